//! Seeded random streams.
//!
//! Every Monte Carlo cell derives its own stream from a base seed and a
//! path of indices, so results do not depend on execution order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// A position in a tree of independent random streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeedStream(u64);

impl SeedStream {
    pub fn new(seed: u64) -> Self {
        SeedStream(splitmix64(seed))
    }

    /// Stream for the `index`-th child of this node.
    pub fn child(self, index: u64) -> Self {
        SeedStream(splitmix64(
            self.0 ^ splitmix64(index.wrapping_add(0x5851_f42d_4c95_7f2d)),
        ))
    }

    pub fn rng(self) -> Rng {
        Rng::seed_from_u64(self.0)
    }
}

/// Standard-normal vector of length `n`.
pub fn gaussian_vector(n: usize, rng: &mut Rng) -> Vec<f64> {
    use rand_distr::{Distribution, StandardNormal};
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}
