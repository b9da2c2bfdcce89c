//! Shared fixtures for the benchmarks.

use pufbench::dataset::{self, CrpDataset};
use pufbench::puf::{create_instance, PufConfig, Variant};

/// `n` CRPs from a seeded device of `variant`.
pub fn dataset(variant: Variant, n: usize) -> CrpDataset {
    let instance = create_instance(&PufConfig::new(variant, 7)).expect("default config is valid");
    dataset::generate(&instance, n, 8).expect("non-empty dataset")
}
