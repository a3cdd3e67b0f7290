//! Rurality maps from a city registry.
//!
//! The rurality of a location is built from nearest-settlement distances:
//! for each population category `p`, the partial rurality of a cell is the
//! distance (km) from its center to the nearest city with population
//! meeting `p`, and the combined rurality map is the arithmetic mean of
//! the partial maps over all categories. Larger values mean more rural.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{
    haversine_km, mask_includes, BoolRaster, CrsMode, GridGeometry, Point, ScalarRaster,
    DEFAULT_NODATA,
};
use crate::kdtree::KdTree;

/// A settlement: name, resident population, and center coordinates in the
/// registry's CRS units.
#[derive(Debug, Clone, PartialEq)]
pub struct City {
    pub name: String,
    pub population: u64,
    pub x: f64,
    pub y: f64,
}

impl City {
    pub fn new(name: impl Into<String>, population: u64, x: f64, y: f64) -> Self {
        City {
            name: name.into(),
            population,
            x,
            y,
        }
    }
}

/// An ordered list of cities sharing one CRS.
#[derive(Debug, Clone, PartialEq)]
pub struct CityRegistry {
    cities: Vec<City>,
    crs_mode: CrsMode,
}

impl CityRegistry {
    /// Coordinates must be finite and no two cities may share an identical
    /// (name, population, x, y) quadruple.
    pub fn new(cities: Vec<City>, crs_mode: CrsMode) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for city in &cities {
            if !city.x.is_finite() || !city.y.is_finite() {
                return Err(Error::Validation(format!(
                    "city {:?} has non-finite coordinates ({}, {})",
                    city.name, city.x, city.y
                )));
            }
            if !seen.insert((
                city.name.clone(),
                city.population,
                city.x.to_bits(),
                city.y.to_bits(),
            )) {
                return Err(Error::Validation(format!(
                    "duplicate city entry: {:?} population {} at ({}, {})",
                    city.name, city.population, city.x, city.y
                )));
            }
        }
        Ok(CityRegistry { cities, crs_mode })
    }

    pub fn cities(&self) -> &[City] {
        &self.cities
    }

    pub fn crs_mode(&self) -> CrsMode {
        self.crs_mode
    }

    pub fn len(&self) -> usize {
        self.cities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cities.is_empty()
    }
}

/// Strictly increasing population categories.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThresholdSet {
    thresholds: Vec<u64>,
}

/// Default population categories, after the Nordic settlement-size
/// classification: 200, 1 000, 3 000, 30 000 and 60 000 inhabitants.
pub const DEFAULT_THRESHOLDS: [u64; 5] = [200, 1_000, 3_000, 30_000, 60_000];

impl ThresholdSet {
    pub fn new(thresholds: Vec<u64>) -> Result<Self> {
        if thresholds.is_empty() {
            return Err(Error::Validation(
                "threshold set must contain at least one population category".into(),
            ));
        }
        if thresholds[0] == 0 {
            return Err(Error::Validation(
                "population thresholds must be positive".into(),
            ));
        }
        if !thresholds.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Validation(format!(
                "population thresholds must be strictly increasing, got {thresholds:?}"
            )));
        }
        Ok(ThresholdSet { thresholds })
    }

    pub fn thresholds(&self) -> &[u64] {
        &self.thresholds
    }

    pub fn len(&self) -> usize {
        self.thresholds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.thresholds.is_empty()
    }

    pub fn max(&self) -> u64 {
        *self.thresholds.last().expect("threshold set is nonempty")
    }
}

impl Default for ThresholdSet {
    fn default() -> Self {
        ThresholdSet {
            thresholds: DEFAULT_THRESHOLDS.to_vec(),
        }
    }
}

/// The single population comparison used everywhere: a city belongs to
/// category `p` iff its population is at least `p` (boundary populations
/// count as meeting their category).
#[inline]
pub fn meets_threshold(population: u64, threshold: u64) -> bool {
    population >= threshold
}

/// Cities whose population meets `threshold`, in registry order.
pub fn filter_cities(registry: &CityRegistry, threshold: u64) -> Vec<&City> {
    registry
        .cities()
        .iter()
        .filter(|c| meets_threshold(c.population, threshold))
        .collect()
}

/// Distance (km) from every in-mask cell center to the nearest of
/// `cities`; out-of-mask cells get the nodata sentinel.
///
/// Cities outside the grid extent still participate in the minima. The
/// nearest-neighbor search is accelerated but exact: results match an
/// exhaustive scan over all cities.
pub fn partial_rurality(
    geometry: &GridGeometry,
    mask: Option<&BoolRaster>,
    cities: &[&City],
) -> Result<ScalarRaster> {
    if cities.is_empty() {
        return Err(Error::NoQualifyingCities);
    }
    if let Some(m) = mask {
        geometry.ensure_aligned_with(m.geometry())?;
    }
    for city in cities {
        if !city.x.is_finite() || !city.y.is_finite() {
            return Err(Error::Validation(format!(
                "city {:?} has non-finite coordinates ({}, {})",
                city.name, city.x, city.y
            )));
        }
    }

    let ncols = geometry.ncols();
    let nrows = geometry.nrows();
    let mut values = vec![DEFAULT_NODATA; geometry.n_cells()];

    match geometry.crs_mode() {
        CrsMode::PlanarMeters => {
            let points: Vec<[f64; 2]> = cities.iter().map(|c| [c.x, c.y]).collect();
            let tree = KdTree::build(&points);
            values
                .par_chunks_mut(ncols)
                .enumerate()
                .for_each(|(row, out)| {
                    let y = geometry.y_origin()
                        + ((nrows - 1 - row) as f64 + 0.5) * geometry.cell_size();
                    for (col, slot) in out.iter_mut().enumerate() {
                        if !mask_includes(mask, row * ncols + col) {
                            continue;
                        }
                        let x = geometry.x_origin() + (col as f64 + 0.5) * geometry.cell_size();
                        let (_, d2) = tree.nearest(&[x, y]);
                        *slot = d2.sqrt() / 1000.0;
                    }
                });
        }
        CrsMode::GeographicDegrees => {
            for city in cities {
                crate::grid::check_latitude(city.y)?;
            }
            let points: Vec<[f64; 3]> = cities.iter().map(|c| unit_vector(c.x, c.y)).collect();
            let tree = KdTree::build(&points);
            // Validate cell-center latitudes up front so the fill loop is
            // infallible. Only rows with at least one in-mask cell count.
            for row in 0..nrows {
                let lat =
                    geometry.y_origin() + ((nrows - 1 - row) as f64 + 0.5) * geometry.cell_size();
                let row_used = (0..ncols).any(|col| mask_includes(mask, row * ncols + col));
                if row_used {
                    crate::grid::check_latitude(lat)?;
                }
            }
            values
                .par_chunks_mut(ncols)
                .enumerate()
                .for_each(|(row, out)| {
                    let lat = geometry.y_origin()
                        + ((nrows - 1 - row) as f64 + 0.5) * geometry.cell_size();
                    for (col, slot) in out.iter_mut().enumerate() {
                        if !mask_includes(mask, row * ncols + col) {
                            continue;
                        }
                        let lon = geometry.x_origin() + (col as f64 + 0.5) * geometry.cell_size();
                        // The chord distance on the unit sphere is monotone
                        // in the great-circle distance, so the chord argmin
                        // is a great-circle argmin.
                        let (idx, _) = tree.nearest(&unit_vector(lon, lat));
                        let city = cities[idx as usize];
                        *slot = haversine_km(
                            Point::new(lon, lat),
                            Point::new(city.x, city.y),
                        );
                    }
                });
        }
    }

    ScalarRaster::new(*geometry, values, DEFAULT_NODATA)
}

#[inline]
fn unit_vector(lon_deg: f64, lat_deg: f64) -> [f64; 3] {
    let lon = lon_deg.to_radians();
    let lat = lat_deg.to_radians();
    [lat.cos() * lon.cos(), lat.cos() * lon.sin(), lat.sin()]
}

/// Combined rurality map: the pointwise arithmetic mean of the partial
/// maps for every category in `thresholds`.
///
/// Fails with [`Error::NoCityMeetsThreshold`] naming the first category
/// for which the registry has no qualifying city.
pub fn rurality_map(
    geometry: &GridGeometry,
    mask: Option<&BoolRaster>,
    registry: &CityRegistry,
    thresholds: &ThresholdSet,
) -> Result<ScalarRaster> {
    Ok(rurality_impl(geometry, mask, registry, thresholds, false)?.0)
}

/// Like [`rurality_map`] but also returns each partial map, keyed by its
/// population category.
pub fn rurality_with_partials(
    geometry: &GridGeometry,
    mask: Option<&BoolRaster>,
    registry: &CityRegistry,
    thresholds: &ThresholdSet,
) -> Result<(ScalarRaster, Vec<(u64, ScalarRaster)>)> {
    rurality_impl(geometry, mask, registry, thresholds, true)
}

fn rurality_impl(
    geometry: &GridGeometry,
    mask: Option<&BoolRaster>,
    registry: &CityRegistry,
    thresholds: &ThresholdSet,
    keep_partials: bool,
) -> Result<(ScalarRaster, Vec<(u64, ScalarRaster)>)> {
    if registry.is_empty() {
        return Err(Error::Validation("city registry is empty".into()));
    }
    if registry.crs_mode() != geometry.crs_mode() {
        return Err(Error::Misaligned { field: "crs_mode" });
    }

    let n = geometry.n_cells();
    let mut sum = vec![0.0f64; n];
    let mut partials = Vec::new();
    for &p in thresholds.thresholds() {
        let cities = filter_cities(registry, p);
        if cities.is_empty() {
            return Err(Error::NoCityMeetsThreshold(p));
        }
        let partial = partial_rurality(geometry, mask, &cities)?;
        for (acc, (i, v)) in sum.iter_mut().zip(partial.values().iter().enumerate()) {
            if !partial.is_nodata(i) {
                *acc += v;
            }
        }
        if keep_partials {
            partials.push((p, partial));
        }
    }

    let count = thresholds.len() as f64;
    let mut values = vec![DEFAULT_NODATA; n];
    for (i, slot) in values.iter_mut().enumerate() {
        if mask_includes(mask, i) {
            *slot = sum[i] / count;
        }
    }
    Ok((
        ScalarRaster::new(*geometry, values, DEFAULT_NODATA)?,
        partials,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{cell_center, distance, CellCoord, CellFlag};
    use crate::synth::SplitMix64;

    fn planar_geom(ncols: usize, nrows: usize, cell: f64) -> GridGeometry {
        GridGeometry::new(ncols, nrows, 0.0, 0.0, cell, CrsMode::PlanarMeters).unwrap()
    }

    fn registry(entries: &[(&str, u64, f64, f64)]) -> CityRegistry {
        let cities = entries
            .iter()
            .map(|(n, p, x, y)| City::new(*n, *p, *x, *y))
            .collect();
        CityRegistry::new(cities, CrsMode::PlanarMeters).unwrap()
    }

    /// Exhaustive O(cells x cities) scan used as the oracle.
    fn brute_force_partial(
        geometry: &GridGeometry,
        mask: Option<&BoolRaster>,
        cities: &[&City],
    ) -> Vec<f64> {
        let mut out = vec![DEFAULT_NODATA; geometry.n_cells()];
        for row in 0..geometry.nrows() {
            for col in 0..geometry.ncols() {
                let i = row * geometry.ncols() + col;
                if !mask.is_none_or(|m| m.is_covered(i)) {
                    continue;
                }
                let center = cell_center(geometry, CellCoord::new(row, col)).unwrap();
                out[i] = cities
                    .iter()
                    .map(|c| {
                        distance(center, Point::new(c.x, c.y), geometry.crs_mode()).unwrap()
                    })
                    .fold(f64::INFINITY, f64::min);
            }
        }
        out
    }

    #[test]
    fn filter_cities_inclusive_boundary() {
        let reg = registry(&[
            ("A", 150, 0.0, 0.0),
            ("B", 1200, 1.0, 1.0),
            ("C", 60000, 2.0, 2.0),
        ]);
        let names = |v: Vec<&City>| v.iter().map(|c| c.name.clone()).collect::<Vec<_>>();
        assert_eq!(names(filter_cities(&reg, 200)), ["B", "C"]);
        assert_eq!(names(filter_cities(&reg, 60000)), ["C"]);
        assert!(filter_cities(&reg, 60001).is_empty());
    }

    #[test]
    fn city_at_cell_center_has_zero_rurality() {
        let g = planar_geom(3, 3, 1000.0);
        let center = cell_center(&g, CellCoord::new(1, 1)).unwrap();
        let city = City::new("X", 100, center.x, center.y);
        let r = partial_rurality(&g, None, &[&city]).unwrap();
        assert_eq!(r.value_at(g.index_of(CellCoord::new(1, 1))), 0.0);
    }

    #[test]
    fn two_city_row_grid() {
        let g = planar_geom(3, 1, 1000.0);
        let a = City::new("A", 100, 500.0, 500.0);
        let b = City::new("B", 100, 2500.0, 500.0);
        let r = partial_rurality(&g, None, &[&a, &b]).unwrap();
        assert_eq!(r.values(), &[0.0, 1.0, 0.0]);
    }

    #[test]
    fn empty_city_list_is_an_error() {
        let g = planar_geom(2, 2, 1000.0);
        assert!(matches!(
            partial_rurality(&g, None, &[]),
            Err(Error::NoQualifyingCities)
        ));
    }

    #[test]
    fn mask_must_align() {
        let g = planar_geom(2, 2, 1000.0);
        let other = planar_geom(3, 2, 1000.0);
        let mask = BoolRaster::filled(other, CellFlag::Covered).unwrap();
        let city = City::new("X", 100, 0.0, 0.0);
        assert!(matches!(
            partial_rurality(&g, Some(&mask), &[&city]),
            Err(Error::Misaligned { field: "ncols" })
        ));
    }

    #[test]
    fn masked_cells_are_nodata() {
        let g = planar_geom(2, 1, 1000.0);
        let mask = BoolRaster::new(g, vec![CellFlag::Covered, CellFlag::Uncovered]).unwrap();
        let city = City::new("X", 100, 500.0, 500.0);
        let r = partial_rurality(&g, Some(&mask), &[&city]).unwrap();
        assert_eq!(r.value_at(0), 0.0);
        assert!(r.is_nodata(1));
    }

    #[test]
    fn matches_brute_force_on_random_grid() {
        let mut rng = SplitMix64::new(0xC0FFEE);
        let g = planar_geom(40, 40, 250.0);
        let cities: Vec<City> = (0..30)
            .map(|i| {
                City::new(
                    format!("c{i}"),
                    100,
                    rng.next_f64() * 12_000.0 - 1000.0,
                    rng.next_f64() * 12_000.0 - 1000.0,
                )
            })
            .collect();
        let refs: Vec<&City> = cities.iter().collect();
        let fast = partial_rurality(&g, None, &refs).unwrap();
        let slow = brute_force_partial(&g, None, &refs);
        for (a, b) in fast.values().iter().zip(&slow) {
            assert!((a - b).abs() <= 1e-9 * b.abs().max(1.0));
        }
    }

    #[test]
    fn geographic_mode_matches_brute_force() {
        let mut rng = SplitMix64::new(0xFEED);
        let g = GridGeometry::new(15, 12, 20.0, 60.0, 0.25, CrsMode::GeographicDegrees).unwrap();
        let cities: Vec<City> = (0..25)
            .map(|i| {
                City::new(
                    format!("c{i}"),
                    100,
                    18.0 + rng.next_f64() * 10.0,
                    58.0 + rng.next_f64() * 8.0,
                )
            })
            .collect();
        let refs: Vec<&City> = cities.iter().collect();
        let fast = partial_rurality(&g, None, &refs).unwrap();
        let slow = brute_force_partial(&g, None, &refs);
        for (a, b) in fast.values().iter().zip(&slow) {
            assert!((a - b).abs() <= 1e-9 * b.abs().max(1.0), "{a} vs {b}");
        }
    }

    #[test]
    fn geographic_mode_rejects_out_of_range_grid() {
        let g = GridGeometry::new(4, 4, 0.0, 89.0, 1.0, CrsMode::GeographicDegrees).unwrap();
        let city = City::new("pole", 100, 0.0, 89.0);
        assert!(matches!(
            partial_rurality(&g, None, &[&city]),
            Err(Error::InvalidLatitude { .. })
        ));
    }

    #[test]
    fn rurality_map_single_threshold_equals_partial() {
        let reg = registry(&[("A", 500, 500.0, 500.0), ("B", 5000, 2500.0, 500.0)]);
        let g = planar_geom(3, 1, 1000.0);
        let thresholds = ThresholdSet::new(vec![200]).unwrap();
        let combined = rurality_map(&g, None, &reg, &thresholds).unwrap();
        let partial = partial_rurality(&g, None, &filter_cities(&reg, 200)).unwrap();
        assert_eq!(combined.values(), partial.values());
    }

    #[test]
    fn rurality_map_two_threshold_example() {
        let reg = registry(&[("L", 500, 500.0, 500.0), ("H", 5000, 2500.0, 500.0)]);
        let g = planar_geom(3, 1, 1000.0);
        let thresholds = ThresholdSet::new(vec![200, 3000]).unwrap();
        let combined = rurality_map(&g, None, &reg, &thresholds).unwrap();
        assert_eq!(combined.values(), &[1.0, 1.0, 0.0]);
    }

    #[test]
    fn city_center_is_zero_when_it_meets_every_threshold() {
        let g = planar_geom(3, 3, 1000.0);
        let center = cell_center(&g, CellCoord::new(2, 0)).unwrap();
        let reg = CityRegistry::new(
            vec![
                City::new("big", 70_000, center.x, center.y),
                City::new("small", 250, 2500.0, 2500.0),
            ],
            CrsMode::PlanarMeters,
        )
        .unwrap();
        let combined = rurality_map(&g, None, &reg, &ThresholdSet::default()).unwrap();
        assert_eq!(combined.value_at(g.index_of(CellCoord::new(2, 0))), 0.0);
    }

    #[test]
    fn rurality_map_names_failing_threshold() {
        let reg = registry(&[("A", 500, 0.0, 0.0)]);
        let g = planar_geom(2, 2, 1000.0);
        let thresholds = ThresholdSet::new(vec![200, 3000]).unwrap();
        match rurality_map(&g, None, &reg, &thresholds) {
            Err(Error::NoCityMeetsThreshold(3000)) => {}
            other => panic!("expected NoCityMeetsThreshold(3000), got {other:?}"),
        }
    }

    #[test]
    fn registry_crs_must_match_grid() {
        let reg = registry(&[("A", 500, 0.0, 0.0)]);
        let g = GridGeometry::new(2, 2, 0.0, 0.0, 1.0, CrsMode::GeographicDegrees).unwrap();
        assert!(matches!(
            rurality_map(&g, None, &reg, &ThresholdSet::new(vec![1]).unwrap()),
            Err(Error::Misaligned { field: "crs_mode" })
        ));
    }

    #[test]
    fn threshold_monotonicity() {
        let mut rng = SplitMix64::new(11);
        let g = planar_geom(12, 9, 500.0);
        let cities: Vec<City> = (0..40)
            .map(|i| {
                City::new(
                    format!("c{i}"),
                    1 + (rng.next_u64() % 100_000),
                    rng.next_f64() * 8000.0,
                    rng.next_f64() * 8000.0,
                )
            })
            .collect();
        let reg = CityRegistry::new(cities, CrsMode::PlanarMeters).unwrap();
        let lo = partial_rurality(&g, None, &filter_cities(&reg, 100)).unwrap();
        let hi = partial_rurality(&g, None, &filter_cities(&reg, 10_000)).unwrap();
        for (a, b) in lo.values().iter().zip(hi.values()) {
            assert!(a <= b);
        }
    }

    #[test]
    fn adding_a_city_never_increases_rurality() {
        let g = planar_geom(10, 10, 400.0);
        let base = registry(&[("A", 700, 100.0, 100.0), ("B", 90_000, 3500.0, 3500.0)]);
        let thresholds = ThresholdSet::new(vec![200, 1000]).unwrap();
        let before = rurality_map(&g, None, &base, &thresholds).unwrap();
        let mut cities = base.cities().to_vec();
        cities.push(City::new("C", 100_000, 2000.0, 900.0));
        let extended = CityRegistry::new(cities, CrsMode::PlanarMeters).unwrap();
        let after = rurality_map(&g, None, &extended, &thresholds).unwrap();
        for (a, b) in after.values().iter().zip(before.values()) {
            assert!(a <= b);
        }
    }

    #[test]
    fn registry_rejects_duplicates() {
        let cities = vec![
            City::new("A", 100, 1.0, 2.0),
            City::new("A", 100, 1.0, 2.0),
        ];
        assert!(CityRegistry::new(cities, CrsMode::PlanarMeters).is_err());
    }

    #[test]
    fn threshold_set_rejects_non_increasing() {
        assert!(ThresholdSet::new(vec![200, 200]).is_err());
        assert!(ThresholdSet::new(vec![1000, 200]).is_err());
        assert!(ThresholdSet::new(vec![]).is_err());
        assert!(ThresholdSet::new(vec![0, 5]).is_err());
        assert_eq!(ThresholdSet::default().thresholds(), DEFAULT_THRESHOLDS);
    }
}
