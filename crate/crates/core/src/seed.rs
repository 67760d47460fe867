//! Sub-seed derivation.
//!
//! Every random stream in a run is derived from one master seed with
//! SplitMix64 finalization of `master ^ stream`, so adding a stream never
//! shifts the others.

/// Stream tags for the pipeline stages.
pub mod stream {
    pub const LOUVAIN: u64 = 0x4c4f_5556;
    pub const LDA: u64 = 0x4c44_4100;
    pub const INFER: u64 = 0x494e_4652;
}

pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

pub fn derive(master: u64, stream: u64) -> u64 {
    splitmix64(master ^ splitmix64(stream))
}
