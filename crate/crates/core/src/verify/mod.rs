//! Reference oracles, frozen baselines and the acceptance criteria.

pub mod acceptance;
pub mod baselines;
pub mod oracle;
