//! Seed derivation. Every stochastic stage draws from its own ChaCha stream
//! keyed by `master_seed ^ stage tag`, so stages can be re-run independently.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StageRng = ChaCha8Rng;

pub const TAG_SUBSAMPLE: u64 = 0x5355_4253_414d_504c;
pub const TAG_SYNTH: u64 = 0x5359_4e54_4845_5349;
pub const TAG_SPLIT: u64 = 0x5350_4c49_5454_5241;
pub const TAG_TEST_SHUFFLE: u64 = 0x5445_5354_5348_5546;
pub const TAG_SMOTE: u64 = 0x534d_4f54_4553_4545;
pub const TAG_KFOLD: u64 = 0x4b46_4f4c_4453_4545;
pub const TAG_TRIAL: u64 = 0x5452_4941_4c53_4545;
pub const TAG_MODEL: u64 = 0x4d4f_4445_4c53_4545;

pub fn stage_seed(master: u64, tag: u64) -> u64 {
    master ^ tag
}

pub fn stage_rng(master: u64, tag: u64) -> StageRng {
    ChaCha8Rng::seed_from_u64(stage_seed(master, tag))
}

/// Seed for the `index`-th member of a family of independent streams
/// (forest trees, grid trials). SplitMix64 finalizer so nearby indices decorrelate.
pub fn indexed_seed(base: u64, index: u64) -> u64 {
    let mut z = base.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn indexed_rng(base: u64, index: u64) -> StageRng {
    ChaCha8Rng::seed_from_u64(indexed_seed(base, index))
}
