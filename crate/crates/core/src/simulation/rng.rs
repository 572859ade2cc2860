//! Hierarchical seeding for reproducible, order-independent generation.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// A node in a tree of random substreams.
///
/// Every child key is a fixed function of the parent key and the child index,
/// so work items can be generated in any order (or in parallel) and still
/// draw the same numbers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeedStream {
    key: u64,
}

impl SeedStream {
    pub fn new(seed: u64) -> Self {
        Self { key: mix(seed) }
    }

    pub fn child(&self, index: u64) -> Self {
        Self {
            key: mix(self.key ^ mix(index.wrapping_add(0x9E37_79B9_7F4A_7C15))),
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.key)
    }
}

// splitmix64 finalizer
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn children_are_stable_and_distinct() {
        let root = SeedStream::new(42);
        assert_eq!(root.child(3), SeedStream::new(42).child(3));
        assert_ne!(root.child(3), root.child(4));
        assert_ne!(root.child(0), root);
        let a: u64 = root.child(1).rng().random();
        let b: u64 = root.child(1).rng().random();
        assert_eq!(a, b);
    }
}
