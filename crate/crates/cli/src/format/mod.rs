//! On-disk formats shared by the commands.

pub mod attributes;
pub mod directions;
pub mod embedding;
pub mod groups;
pub mod report;
