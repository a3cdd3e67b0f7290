//! Deterministic synthetic scenarios and staged coverage rollouts.
//!
//! Everything here is reproducible from a seed alone: the generator is a
//! fully specified SplitMix64, so two runs (on any platform) produce
//! byte-identical registries, rasters, and rollout orderings.

use crate::error::{Error, Result};
use crate::grid::{BoolRaster, CellFlag, CrsMode, GridGeometry, ScalarRaster};
use crate::ingest::{CoverageMap, CoverageMeta};
use crate::rurality::{rurality_map, City, CityRegistry, ThresholdSet};

/// SplitMix64 pseudo-random generator.
///
/// State update: `state += 0x9E3779B97F4A7C15`. Output mix of the new
/// state `z`:
///
/// ```text
/// z ^= z >> 30;  z *= 0xBF58476D1CE4E5B9;
/// z ^= z >> 27;  z *= 0x94D049BB133111EB;
/// z ^= z >> 31;
/// ```
///
/// All arithmetic is wrapping 64-bit. These constants fully determine the
/// sequence, so any implementation that follows them reproduces identical
/// streams.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1): the top 53 bits of [`Self::next_u64`] scaled by
    /// 2^-53.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / 9_007_199_254_740_992.0)
    }
}

/// Order in which a simulated rollout fills cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RolloutStrategy {
    /// Least rural cells first; ties broken by ascending row-major index.
    UrbanFirst,
    /// Most rural cells first; ties broken by ascending row-major index.
    RuralFirst,
    /// Seeded Fisher-Yates shuffle of the eligible cells.
    UniformRandom { seed: u64 },
}

/// A self-consistent bundle: geometry, a city registry over it, the
/// resulting rurality map, and an all-uncovered starting coverage map.
#[derive(Debug, Clone)]
pub struct SyntheticScenario {
    pub geometry: GridGeometry,
    pub registry: CityRegistry,
    pub rurality: ScalarRaster,
    pub initial_coverage: CoverageMap,
}

/// Grid cell edge used by generated scenarios, in meters.
const SYNTH_CELL_SIZE_M: f64 = 250.0;

/// Generates a deterministic scenario: `n_cities` cities placed uniformly
/// over an `ncols`x`nrows` planar grid (250 m cells, origin at 0,0) with
/// log-uniform populations in [1, max_population], plus the rurality map
/// for the default thresholds.
///
/// City 0 is pinned to `max_population` so every default threshold has at
/// least one qualifying city; `max_population` must therefore be at least
/// the largest default threshold.
pub fn gen_scenario(
    seed: u64,
    ncols: usize,
    nrows: usize,
    n_cities: usize,
    max_population: u64,
) -> Result<SyntheticScenario> {
    if ncols < 1 || nrows < 1 {
        return Err(Error::Validation(format!(
            "grid dimensions must be at least 1x1, got {ncols}x{nrows}"
        )));
    }
    if n_cities < 1 {
        return Err(Error::Validation("n_cities must be at least 1".into()));
    }
    let thresholds = ThresholdSet::default();
    if max_population < thresholds.max() {
        return Err(Error::Validation(format!(
            "max_population must be at least {} so every default threshold is met, got {max_population}",
            thresholds.max()
        )));
    }

    let geometry = GridGeometry::new(
        ncols,
        nrows,
        0.0,
        0.0,
        SYNTH_CELL_SIZE_M,
        CrsMode::PlanarMeters,
    )?;
    let width_m = ncols as f64 * SYNTH_CELL_SIZE_M;
    let height_m = nrows as f64 * SYNTH_CELL_SIZE_M;

    let mut rng = SplitMix64::new(seed);
    let ln_max = (max_population as f64).ln();
    let mut cities = Vec::with_capacity(n_cities);
    for i in 0..n_cities {
        // per city, draw in order: x fraction, y fraction, population exponent
        let ux = rng.next_f64();
        let uy = rng.next_f64();
        let upop = rng.next_f64();
        let population = if i == 0 {
            max_population
        } else {
            ((upop * ln_max).exp().floor() as u64).clamp(1, max_population)
        };
        cities.push(City::new(
            format!("city-{i}"),
            population,
            ux * width_m,
            uy * height_m,
        ));
    }
    let registry = CityRegistry::new(cities, CrsMode::PlanarMeters)?;
    let rurality = rurality_map(&geometry, None, &registry, &thresholds)?;
    let initial_coverage = CoverageMap::new(
        BoolRaster::filled(geometry, CellFlag::Uncovered)?,
        CoverageMeta::new("initial"),
    )?;
    Ok(SyntheticScenario {
        geometry,
        registry,
        rurality,
        initial_coverage,
    })
}

/// Row-major indices of the scenario's eligible cells in the order the
/// given strategy fills them.
pub fn rollout_order(scenario: &SyntheticScenario, strategy: RolloutStrategy) -> Vec<usize> {
    let rurality = &scenario.rurality;
    let mut order: Vec<usize> = (0..rurality.values().len())
        .filter(|&i| !rurality.is_nodata(i))
        .collect();
    match strategy {
        RolloutStrategy::UrbanFirst => {
            order.sort_by(|&a, &b| {
                rurality.values()[a]
                    .total_cmp(&rurality.values()[b])
                    .then(a.cmp(&b))
            });
        }
        RolloutStrategy::RuralFirst => {
            order.sort_by(|&a, &b| {
                rurality.values()[b]
                    .total_cmp(&rurality.values()[a])
                    .then(a.cmp(&b))
            });
        }
        RolloutStrategy::UniformRandom { seed } => {
            let mut rng = SplitMix64::new(seed);
            // Fisher-Yates, modulo bias accepted for simulation purposes
            for i in (1..order.len()).rev() {
                let j = (rng.next_u64() % (i as u64 + 1)) as usize;
                order.swap(i, j);
            }
        }
    }
    order
}

/// Simulates a staged rollout: step t (1-based) covers the first
/// ceil(t*n/steps) eligible cells in strategy order, so coverage grows
/// monotonically and the final step covers everything eligible.
/// Ineligible (rurality nodata) cells stay nodata throughout. Steps are
/// labeled `step-001`, `step-002`, ...
pub fn rollout(
    scenario: &SyntheticScenario,
    strategy: RolloutStrategy,
    steps: usize,
) -> Result<Vec<CoverageMap>> {
    if steps < 1 {
        return Err(Error::Validation("steps must be at least 1".into()));
    }
    let order = rollout_order(scenario, strategy);
    let n = order.len();
    let base_flags: Vec<CellFlag> = scenario
        .rurality
        .values()
        .iter()
        .enumerate()
        .map(|(i, _)| {
            if scenario.rurality.is_nodata(i) {
                CellFlag::Nodata
            } else {
                CellFlag::Uncovered
            }
        })
        .collect();

    let mut maps = Vec::with_capacity(steps);
    let mut flags = base_flags;
    let mut filled = 0usize;
    for t in 1..=steps {
        let k = (t * n).div_ceil(steps);
        for &idx in &order[filled..k] {
            flags[idx] = CellFlag::Covered;
        }
        filled = k;
        maps.push(CoverageMap::new(
            BoolRaster::new(scenario.geometry, flags.clone())?,
            CoverageMeta::new(format!("step-{t:03}")),
        )?);
    }
    Ok(maps)
}
