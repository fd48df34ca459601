//! Shared fixtures and independent reference implementations for the
//! acceptance suite.

pub mod oracle;
pub mod random;
pub mod synthetic;
