pub mod angle;
pub mod cli;
pub mod decomposition;
pub mod error;
pub mod io;
pub mod kronecker;
pub mod measure;
pub mod par;
pub mod random;
pub mod spectrum;
pub mod suite;
