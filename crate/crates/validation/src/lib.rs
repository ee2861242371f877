//! Acceptance suite for the `levy-langevin` workspace. The checks live in
//! `tests/acceptance.rs`; run them with `cargo test -p levy-langevin-validation`.
