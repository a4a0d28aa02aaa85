//! Analytical reversible-binding channel: frequency kernel, binding response
//! and per-slot Skellam statistics.

mod hop;
mod response;
mod slots;
mod transform;

pub use hop::{HopChannel, ReceiverKinetics};
pub use response::{binding_response, ChannelModel, ResponseOptions, DEFAULT_PSI_TOL};
pub use slots::{BitSeq, SlotContext};
pub use transform::{u_transform, u_transform_with, TransformForm};
