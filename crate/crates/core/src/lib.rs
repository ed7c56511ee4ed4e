pub mod asymptotics;
pub mod capacity;
pub mod error;
pub mod operator;
pub mod profile;
pub mod quadrature;
pub mod special;
pub mod symbol;
pub mod wigner;

pub use error::{Error, Result};
