pub mod cli;
pub mod exec;
pub mod formats;
pub mod report;
