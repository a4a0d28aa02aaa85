//! Link analysis and particle simulation for two-hop decode-and-forward
//! molecular communication with reversible ligand-receptor receivers.

pub mod channel;
pub mod error;
pub mod link;
pub mod numerics;
pub mod sim;

pub use error::{Error, Result};
