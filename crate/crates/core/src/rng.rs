//! Keyed random streams.
//!
//! Every stochastic routine in the crate takes a [`Stream`], a `(seed, id)` pair
//! that fully determines the numbers it produces. Child streams are derived from
//! integer keys (iteration, subject index, simulation index, ...), so two runs
//! with the same seed produce identical output regardless of how work is
//! scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator handed out by [`Stream::rng`].
pub type StreamRng = ChaCha8Rng;

/// A deterministic random stream identifier.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Stream {
    seed: u64,
    id: u64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl Stream {
    /// Root stream for a seed.
    pub fn new(seed: u64) -> Self {
        Self { seed, id: 0 }
    }

    /// Stream with an explicit id.
    pub fn with_id(seed: u64, id: u64) -> Self {
        Self { seed, id }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    /// Derive a child stream keyed by `key`. Distinct keys give distinct ids
    /// (up to 64-bit hash collisions), and derivation is order sensitive:
    /// `s.child(a).child(b) != s.child(b).child(a)` in general.
    pub fn child(&self, key: u64) -> Self {
        let id = splitmix64(self.id.rotate_left(17) ^ splitmix64(key ^ 0xA076_1D64_78BD_642F));
        Self { seed: self.seed, id }
    }

    /// Derive a child stream from a sequence of keys.
    pub fn path(&self, keys: &[u64]) -> Self {
        keys.iter().fold(*self, |s, &k| s.child(k))
    }

    /// Materialize a generator for this stream.
    pub fn rng(&self) -> StreamRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.id);
        rng
    }
}

/// Fixed keys for the different consumers of a stream, so that e.g. the
/// proposal draw and the likelihood estimate of one MCMC iteration never
/// share random numbers.
pub mod keys {
    pub const PROPOSAL: u64 = 1;
    pub const LIKELIHOOD: u64 = 2;
    pub const ACCEPT: u64 = 3;
    pub const INIT: u64 = 4;
    pub const SUBJECT: u64 = 5;
    pub const SIMULATION: u64 = 6;
    pub const REPLICATE: u64 = 7;
    pub const PREDICTIVE: u64 = 8;
    pub const DATASET: u64 = 9;
    pub const SAMPLE: u64 = 10;
    pub const CHAIN: u64 = 11;
}
