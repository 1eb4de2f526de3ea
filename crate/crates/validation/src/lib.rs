//! Acceptance suite for `sphframes`; see `tests/acceptance.rs`. Lives in its
//! own package so it runs after every unit and integration suite.
