//! Quantifying the rural-urban divide in cellular coverage.
//!
//! The crate turns a city registry and a binary coverage raster into
//! inequality metrics:
//!
//! 1. [`rurality`] builds a rurality map: for each grid cell, the mean
//!    over population thresholds of the distance to the nearest city of
//!    at least that size.
//! 2. [`ingest`] reads and writes ASCII grid rasters and city CSVs, and
//!    turns data-rate rasters into binary coverage maps.
//! 3. [`metrics`] computes the areal and population coverage ratios
//!    (ACR/PCR), the coverage concentration curve, and the CCI index,
//!    plus multi-epoch trend tables rendered by [`plot`].
//! 4. [`synth`] generates seeded synthetic scenarios and staged coverage
//!    rollouts for testing and demonstration.
//!
//! All computations are deterministic: equal inputs produce byte-equal
//! outputs, including file renderings.

pub mod error;
pub mod grid;
pub mod ingest;
mod kdtree;
pub mod metrics;
pub mod plot;
pub mod rurality;
pub mod synth;

pub use error::{Error, Result};
pub use grid::{
    cell_center, distance, BoolRaster, CellCoord, CellFlag, CrsMode, GridGeometry, Point,
    ScalarRaster, DEFAULT_NODATA, EARTH_RADIUS_KM,
};
pub use ingest::{
    check_alignment, load_ascii_grid, load_bool_grid, load_city_csv, save_ascii_grid,
    save_bool_grid, save_city_csv, threshold_coverage, write_text_atomic, CoverageMap,
    CoverageMeta,
};
pub use metrics::{
    acr, cci, cci_from_rasters, concentration_curve, pcr, raster_digest, trend_table, Breakpoint,
    CciReport, ConcentrationCurve, TrendRow, TrendTable,
};
pub use plot::trend_svg;
pub use rurality::{
    filter_cities, meets_threshold, partial_rurality, rurality_map, rurality_with_partials, City,
    CityRegistry, ThresholdSet, DEFAULT_THRESHOLDS,
};
pub use synth::{gen_scenario, rollout, RolloutStrategy, SplitMix64, SyntheticScenario};
