//! Instance formats: AIGER in, DIMACS out, and a random instance source.

pub mod aiger;
pub mod dimacs;
pub mod generate;

pub use aiger::{parse_aiger, write_aiger_ascii, write_aiger_binary, AigerError, AigerHeader};
pub use dimacs::{export_dimacs, tseitin_clauses};
pub use generate::{generate_random_sat_aig, generate_random_sat_aig_with_witness, GeneratedInstance};
