//! Deterministic random streams.
//!
//! Every random quantity in a run is drawn from a ChaCha20 stream keyed by
//! the master seed, the frame index and a [`Stream`] purpose tag. Frames can
//! therefore be generated in any order, on any number of threads, and
//! toggling one impairment never shifts the draws of another.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

pub type StreamRng = ChaCha20Rng;

/// Purpose tag for a random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stream {
    Source,
    AliceVacuum,
    AliceDetector,
    ChannelState,
    ChannelVacuum,
    ExcessNoise,
    BobDetector,
    Calibration,
}

impl Stream {
    fn id(self) -> u64 {
        match self {
            Stream::Source => 1,
            Stream::AliceVacuum => 2,
            Stream::AliceDetector => 3,
            Stream::ChannelState => 4,
            Stream::ChannelVacuum => 5,
            Stream::ExcessNoise => 6,
            Stream::BobDetector => 7,
            Stream::Calibration => 8,
        }
    }
}

/// Derives independent per-frame, per-purpose streams from one master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedTree {
    master: u64,
}

impl SeedTree {
    pub fn new(master: u64) -> Self {
        Self { master }
    }

    pub fn master(&self) -> u64 {
        self.master
    }

    pub fn stream(&self, frame: u64, purpose: Stream) -> StreamRng {
        let mut rng = ChaCha20Rng::seed_from_u64(self.master);
        // 16 purpose slots per frame.
        rng.set_stream(frame.wrapping_mul(16).wrapping_add(purpose.id()));
        rng
    }
}

/// Standalone stream for a single seed (used by single-shot samplers).
pub fn seeded(seed: u64) -> StreamRng {
    ChaCha20Rng::seed_from_u64(seed)
}

#[inline]
pub(crate) fn gauss<R: rand::Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}
