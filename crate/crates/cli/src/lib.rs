//! Command-line companion to the core engine crate: file formats, the
//! brute-force verification oracle, experiment sweeps, and the `ddca`
//! binary's command dispatch.

pub mod cli;
pub mod experiments;
pub mod format;
pub mod oracle;
