//! Secure degrees-of-freedom simulation for compound MISO wiretap and
//! private-broadcast channels.

pub mod align;
pub mod channel;
pub mod seed;
pub mod analysis;
pub mod schemes;
pub mod experiment;
