//! Reading, writing and generating MDPs, and writing solutions.

pub mod builtin;
pub mod format;
pub mod generator;
pub mod solution;

pub use format::{decode_mdp, encode_mdp, read_mdp, write_mdp, HEADER_LEN, MAGIC, VERSION};
pub use generator::build_from_generator;
pub use solution::{format_value, stats_json, write_solution};
