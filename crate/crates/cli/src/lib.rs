//! Command line and HTTP front ends over `repairscope` sessions. Both emit
//! the same serialized documents.

pub mod commands;
pub mod server;

pub use commands::{run, Cli, Command};
pub use server::{router, serve, AppState};
