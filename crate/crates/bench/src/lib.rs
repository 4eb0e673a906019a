//! Fixtures shared by the criterion benches.

use acma_core::{
    build_lookup, compose, optimize_offsets, CompositeConstellation, LookupTable, SearchGrid,
    SystemConfig,
};

/// The two-user systems the figures revolve around.
pub fn systems() -> Vec<(&'static str, SystemConfig)> {
    vec![
        ("16x4", SystemConfig::new(vec![16, 4], vec![0.35, 0.65], 1.0).unwrap()),
        ("16x16", SystemConfig::new(vec![16, 16], vec![0.5, 0.5], 1.0).unwrap()),
    ]
}

pub fn grid() -> SearchGrid {
    SearchGrid::harmonic(20).unwrap()
}

/// Composite built with the searched offsets.
pub fn optimized_composite(config: &SystemConfig) -> CompositeConstellation {
    let (offsets, _) = optimize_offsets(config, &grid()).unwrap();
    compose(config, &offsets).unwrap()
}

pub fn table() -> LookupTable {
    build_lookup(&[vec![16, 4], vec![16, 16]], &grid(), 20).unwrap()
}
