//! Empty library. The acceptance criteria live in `tests/acceptance.rs`:
//!
//! ```text
//! cargo test -p tarifflab-verify --test acceptance
//! ```
