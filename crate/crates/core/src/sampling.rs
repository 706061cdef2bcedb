//! Reproducible random streams keyed by (seed, scan, layer, cell).
//!
//! Each pseudo-measurement draw gets its own generator seeded from a hash of
//! its key, so results do not depend on the order in which cells are
//! visited or on how work is split across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::grid::CellCoord;

/// Which layer a pseudo-measurement is deduced from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SourceLayer {
    Semantic = 1,
    Friction = 2,
}

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PseudoSampler {
    seed: u64,
    scan: u64,
}

impl PseudoSampler {
    pub fn new(seed: u64, scan: u64) -> Self {
        PseudoSampler { seed, scan }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn scan(&self) -> u64 {
        self.scan
    }

    pub fn for_scan(&self, scan: u64) -> Self {
        PseudoSampler { seed: self.seed, scan }
    }

    /// Independent generator for one (layer, cell) draw in this scan.
    pub fn stream(&self, layer: SourceLayer, cell: CellCoord) -> ChaCha8Rng {
        let mut h = mix(self.seed);
        for word in [
            self.scan,
            layer as u64,
            cell.i as u32 as u64,
            cell.j as u32 as u64,
            cell.k as u32 as u64,
        ] {
            h = mix(h ^ word);
        }
        ChaCha8Rng::seed_from_u64(h)
    }
}
