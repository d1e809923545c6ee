pub mod error;
pub mod gf2;
pub mod lambda;

pub use error::{Error, Result};
pub mod modules;
pub mod ext;
pub mod expr;
pub mod naming;
pub mod registry;
pub mod ss;
pub mod verify;
pub mod cache;
pub mod chart;
pub mod rho;
