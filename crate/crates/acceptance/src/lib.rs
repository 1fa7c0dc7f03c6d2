//! Holds no code. The suite lives in `tests/acceptance.rs`; run it with
//! `cargo test -p rpm-acceptance --test acceptance`.
