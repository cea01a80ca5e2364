//! Counter-based seed derivation for independently reproducible sweep cells.

use serde::{Deserialize, Serialize};

/// What a derived seed is used for. Each purpose gets its own stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Purpose {
    Network,
    TrainInputs,
    TestInputs,
    TrainShots,
    TestShots,
    Threshold,
    Timetrace,
}

impl Purpose {
    fn tag(self) -> u64 {
        match self {
            Purpose::Network => 0x6e65_7477,
            Purpose::TrainInputs => 0x7472_6e69,
            Purpose::TestInputs => 0x7473_7469,
            Purpose::TrainShots => 0x7472_6e73,
            Purpose::TestShots => 0x7473_7473,
            Purpose::Threshold => 0x7468_7273,
            Purpose::Timetrace => 0x7469_6d65,
        }
    }
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for `(root, reservoir, purpose, grid index)`.
///
/// Pass `grid_index = None` for streams shared across a whole γ sweep.
pub fn derive_seed(root: u64, reservoir: usize, purpose: Purpose, grid_index: Option<usize>) -> u64 {
    let mut h = splitmix64(root);
    h = splitmix64(h ^ reservoir as u64);
    h = splitmix64(h ^ purpose.tag());
    let g = grid_index.map_or(u64::MAX, |g| g as u64);
    splitmix64(h ^ g)
}
