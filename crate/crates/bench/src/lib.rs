//! Shared inputs for the benchmarks.

use grasp_core::synth::SynthRng;
use grasp_core::{GridSpec, Raster};

/// Two-mode sample set of size `n`, deterministic in `seed`.
pub fn bimodal(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = SynthRng::new(seed);
    (0..n).map(|_| if rng.uniform() < 0.5 { rng.normal() } else { 6.0 + rng.normal() }).collect()
}

/// `count` optical scenes on `grid` with random reflectances and about 20 % cloud.
pub fn optical_stack(grid: GridSpec, count: usize, seed: u64) -> Vec<Raster> {
    let mut rng = SynthRng::new(seed);
    (0..count)
        .map(|_| {
            let mut band = || (0..grid.len()).map(|_| (rng.uniform() * 0.3) as f32).collect::<Vec<_>>();
            let (r, g, b, n) = (band(), band(), band(), band());
            let cloud = (0..grid.len()).map(|_| (rng.uniform() < 0.2) as u8 as f32).collect();
            Raster::from_bands(grid, [("red", r), ("green", g), ("blue", b), ("nir", n), ("cloud", cloud)])
                .expect("bands match grid")
        })
        .collect()
}
