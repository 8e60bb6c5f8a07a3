//! Acceptance suite for `holder-lab`; see `tests/acceptance.rs`.
