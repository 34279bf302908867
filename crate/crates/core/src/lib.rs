pub mod assertions;
pub mod explore;
pub mod gen;
pub mod graphs;
pub mod lang;
pub mod memory;
pub mod name;
pub mod opsem;
pub mod par;
pub mod rg;
pub mod sra;
pub mod triples;
