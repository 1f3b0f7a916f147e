//! Deterministic per-trial seed derivation.
//!
//! Every stochastic object in an experiment gets its own ChaCha8 stream
//! seeded by a stated 64-bit mix of (master_seed, cell_index, stream_index):
//!
//! ```text
//! derive_seed(master, cell, stream) =
//!     splitmix64(splitmix64(splitmix64(master) ^ cell) ^ stream)
//! ```
//!
//! where `stream` is the trial index for trial RNGs and [`STREAM_FAMILY`]
//! for the per-cell instance-construction RNG. Trials therefore never share
//! a stream and results do not depend on execution order or worker count.

/// Stream index reserved for per-cell family/instance construction.
pub const STREAM_FAMILY: u64 = u64::MAX;

/// SplitMix64 finalizer (Steele, Lea, Flood 2014).
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The documented mix of master seed, grid cell index and stream index.
pub fn derive_seed(master: u64, cell: u64, stream: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(master) ^ cell) ^ stream)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn locked_test_vectors() {
        // Frozen values: any change here silently breaks reproducibility of
        // published experiment CSVs.
        assert_eq!(splitmix64(0), 0xE220_A839_7B1D_CDAF);
        assert_eq!(derive_seed(1, 0, 0), derive_seed(1, 0, 0));
        assert_ne!(derive_seed(1, 0, 0), derive_seed(1, 0, 1));
        assert_ne!(derive_seed(1, 0, 0), derive_seed(1, 1, 0));
        assert_ne!(derive_seed(1, 0, 0), derive_seed(2, 0, 0));
        assert_ne!(derive_seed(1, 0, 7), derive_seed(1, 0, STREAM_FAMILY));
    }
}
