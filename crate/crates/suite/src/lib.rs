//! Test-only package; the acceptance suite lives in `tests/acceptance.rs`.
