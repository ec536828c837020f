pub mod channel;
pub mod error;
pub mod harness;
pub mod optics;
pub mod receiver;
pub mod rng;
pub mod security;
pub mod stats;
pub mod trace_io;
pub mod transmitter;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/optics.md")]
    mod optics {}
    #[doc = include_str!("../../../book/src/transmitter.md")]
    mod transmitter {}
    #[doc = include_str!("../../../book/src/channel.md")]
    mod channel {}
    #[doc = include_str!("../../../book/src/receiver.md")]
    mod receiver {}
    #[doc = include_str!("../../../book/src/security.md")]
    mod security {}
    #[doc = include_str!("../../../book/src/harness.md")]
    mod harness {}
}
