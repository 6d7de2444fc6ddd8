use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Identifies one deterministic random stream.
///
/// The generator is ChaCha8 keyed by `seed` with its stream counter set to
/// `stream_id`, so distinct trials sharing a seed never overlap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngSpec {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngSpec {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }

    /// A stream independent of `self` for auxiliary draws (e.g. pool
    /// construction) that keeps the same `stream_id` for bookkeeping.
    pub fn derive(&self, salt: u64) -> Self {
        Self {
            seed: splitmix64(self.seed ^ splitmix64(salt)),
            stream_id: self.stream_id,
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
