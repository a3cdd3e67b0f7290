//! Coverage-inequality metrics: areal and population coverage ratios,
//! the coverage concentration curve, the CCI index, and multi-epoch
//! trend tables.
//!
//! Whenever several rasters feed one computation they must be aligned;
//! cells where any required input is nodata are excluded from both
//! numerator and denominator, so only jointly observed cells count.

use rayon::slice::ParallelSliceMut;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::grid::{mask_includes, BoolRaster, CrsMode, ScalarRaster};
use crate::ingest::{CoverageMap, CoverageMeta};

/// One vertex of a concentration curve: after some prefix of the cells
/// (ordered least rural first), `area_share` of all eligible cells holds
/// `coverage_share` of all covered cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Breakpoint {
    pub area_share: f64,
    pub coverage_share: f64,
}

impl Breakpoint {
    pub fn new(area_share: f64, coverage_share: f64) -> Self {
        Breakpoint {
            area_share,
            coverage_share,
        }
    }
}

/// A coverage concentration curve: breakpoints from (0,0) to (1,1) with
/// strictly increasing area shares and nondecreasing coverage shares,
/// interpreted piecewise-linearly. One interior breakpoint per distinct
/// rurality value.
#[derive(Debug, Clone, PartialEq)]
pub struct ConcentrationCurve {
    breakpoints: Vec<Breakpoint>,
}

impl ConcentrationCurve {
    pub fn new(breakpoints: Vec<Breakpoint>) -> Result<Self> {
        if breakpoints.len() < 2 {
            return Err(Error::Validation(
                "concentration curve needs at least two breakpoints".into(),
            ));
        }
        let first = breakpoints[0];
        if first.area_share != 0.0 || first.coverage_share != 0.0 {
            return Err(Error::Validation(
                "concentration curve must start at (0, 0)".into(),
            ));
        }
        let last = breakpoints[breakpoints.len() - 1];
        if last.area_share != 1.0 || last.coverage_share != 1.0 {
            return Err(Error::Validation(
                "concentration curve must end at (1, 1)".into(),
            ));
        }
        for w in breakpoints.windows(2) {
            if !(w[1].area_share.is_finite() && w[1].coverage_share.is_finite()) {
                return Err(Error::Validation(
                    "concentration curve breakpoints must be finite".into(),
                ));
            }
            if w[1].area_share <= w[0].area_share {
                return Err(Error::Validation(
                    "area shares must be strictly increasing".into(),
                ));
            }
            if w[1].coverage_share < w[0].coverage_share {
                return Err(Error::Validation(
                    "coverage shares must be nondecreasing".into(),
                ));
            }
        }
        Ok(ConcentrationCurve { breakpoints })
    }

    pub fn breakpoints(&self) -> &[Breakpoint] {
        &self.breakpoints
    }

    /// CSV rendering with header `u,L`, one breakpoint per row.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("u,L\n");
        for b in &self.breakpoints {
            out.push_str(&format!("{},{}\n", b.area_share, b.coverage_share));
        }
        out
    }
}

/// Areal coverage ratio: covered cells / eligible cells, where eligible
/// means in-mask and not nodata.
pub fn acr(coverage: &CoverageMap, mask: Option<&BoolRaster>) -> Result<f64> {
    let raster = coverage.raster();
    if let Some(m) = mask {
        raster.geometry().ensure_aligned_with(m.geometry())?;
    }
    let mut eligible = 0u64;
    let mut covered = 0u64;
    for i in 0..raster.flags().len() {
        if !mask_includes(mask, i) || raster.flag_at(i).is_nodata() {
            continue;
        }
        eligible += 1;
        if raster.is_covered(i) {
            covered += 1;
        }
    }
    if eligible == 0 {
        return Err(Error::EmptyDomain(
            "areal coverage ratio has no eligible cells".into(),
        ));
    }
    Ok(covered as f64 / eligible as f64)
}

/// Population coverage ratio: population in covered cells / population in
/// all eligible cells. Population values must be nonnegative and the
/// eligible total positive.
pub fn pcr(
    coverage: &CoverageMap,
    population: &ScalarRaster,
    mask: Option<&BoolRaster>,
) -> Result<f64> {
    let raster = coverage.raster();
    raster.geometry().ensure_aligned_with(population.geometry())?;
    if let Some(m) = mask {
        raster.geometry().ensure_aligned_with(m.geometry())?;
    }
    let mut total = 0.0;
    let mut in_covered = 0.0;
    for i in 0..raster.flags().len() {
        if !mask_includes(mask, i) || raster.flag_at(i).is_nodata() || population.is_nodata(i) {
            continue;
        }
        let p = population.value_at(i);
        if p < 0.0 {
            return Err(Error::Validation(format!(
                "population must be nonnegative, got {p} at cell {i}"
            )));
        }
        total += p;
        if raster.is_covered(i) {
            in_covered += p;
        }
    }
    if total <= 0.0 {
        return Err(Error::EmptyDomain(
            "population coverage ratio has zero total population".into(),
        ));
    }
    Ok(in_covered / total)
}

/// Builds the coverage concentration curve: eligible cells (in-mask,
/// rurality and coverage both observed) are grouped by exact rurality
/// value, groups are walked least rural first, and each group emits one
/// breakpoint of cumulative (area share, coverage share).
pub fn concentration_curve(
    rurality: &ScalarRaster,
    coverage: &CoverageMap,
    mask: Option<&BoolRaster>,
) -> Result<ConcentrationCurve> {
    let cov = coverage.raster();
    rurality.geometry().ensure_aligned_with(cov.geometry())?;
    if let Some(m) = mask {
        rurality.geometry().ensure_aligned_with(m.geometry())?;
    }

    let mut cells: Vec<(f64, bool)> = Vec::new();
    for i in 0..rurality.values().len() {
        if !mask_includes(mask, i) || rurality.is_nodata(i) || cov.flag_at(i).is_nodata() {
            continue;
        }
        cells.push((rurality.value_at(i), cov.is_covered(i)));
    }
    if cells.is_empty() {
        return Err(Error::EmptyDomain(
            "concentration curve has no eligible cells".into(),
        ));
    }
    let total_covered = cells.iter().filter(|(_, c)| *c).count() as u64;
    if total_covered == 0 {
        return Err(Error::NoCoverage);
    }
    let total = cells.len() as u64;

    // ties land in one group, so within-tie order cannot matter
    cells.par_sort_unstable_by(|a, b| a.0.total_cmp(&b.0));

    let mut breakpoints = vec![Breakpoint::new(0.0, 0.0)];
    let mut seen = 0u64;
    let mut seen_covered = 0u64;
    let mut i = 0;
    while i < cells.len() {
        let value = cells[i].0;
        while i < cells.len() && cells[i].0 == value {
            seen += 1;
            if cells[i].1 {
                seen_covered += 1;
            }
            i += 1;
        }
        breakpoints.push(Breakpoint::new(
            seen as f64 / total as f64,
            seen_covered as f64 / total_covered as f64,
        ));
    }
    ConcentrationCurve::new(breakpoints)
}

/// CCI index of a curve: 2A - 1 where A is the exact trapezoid-rule area
/// under the piecewise-linear curve. 0 means coverage is spread evenly
/// across rurality levels; positive values mean urban-favoring coverage;
/// negative values (rural-favoring) are returned signed, not clamped.
pub fn cci(curve: &ConcentrationCurve) -> f64 {
    let mut area = 0.0;
    for w in curve.breakpoints().windows(2) {
        area += (w[1].area_share - w[0].area_share)
            * (w[0].coverage_share + w[1].coverage_share)
            / 2.0;
    }
    2.0 * area - 1.0
}

/// Full inequality report for one epoch.
///
/// `n_cells` and `n_covered` count the jointly observed domain (the same
/// cells the curve is built from), and `acr = n_covered / n_cells`
/// exactly. For reports produced by [`cci_from_rasters`] this holds by
/// construction; hand-built report rows (e.g. transcribed from published
/// figures) should preserve it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CciReport {
    pub cci: f64,
    pub acr: f64,
    pub pcr: Option<f64>,
    pub n_cells: u64,
    pub n_covered: u64,
    pub distinct_rurality_levels: u64,
    pub meta: CoverageMeta,
    pub rurality_source_digest: String,
}

impl CciReport {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string(self).map_err(|e| Error::Validation(e.to_string()))
    }

    pub fn to_json_pretty(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Validation(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Validation(format!("bad report JSON: {e}")))
    }
}

/// SHA-256 hex digest of a raster's geometry, nodata sentinel, and exact
/// value bits (little-endian), in row-major order. Identifies the
/// rurality source of a report.
pub fn raster_digest(raster: &ScalarRaster) -> String {
    let g = raster.geometry();
    let mut hasher = Sha256::new();
    hasher.update((g.ncols() as u64).to_le_bytes());
    hasher.update((g.nrows() as u64).to_le_bytes());
    hasher.update(g.x_origin().to_le_bytes());
    hasher.update(g.y_origin().to_le_bytes());
    hasher.update(g.cell_size().to_le_bytes());
    hasher.update([match g.crs_mode() {
        CrsMode::PlanarMeters => 0u8,
        CrsMode::GeographicDegrees => 1u8,
    }]);
    hasher.update(raster.nodata_sentinel().to_le_bytes());
    for v in raster.values() {
        hasher.update(v.to_le_bytes());
    }
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for byte in digest {
        out.push_str(&format!("{byte:02x}"));
    }
    out
}

/// Computes the full report: concentration curve, CCI, ACR over the
/// jointly observed domain, and PCR when a population raster is given.
pub fn cci_from_rasters(
    rurality: &ScalarRaster,
    coverage: &CoverageMap,
    mask: Option<&BoolRaster>,
    population: Option<&ScalarRaster>,
) -> Result<CciReport> {
    let curve = concentration_curve(rurality, coverage, mask)?;
    let cci_value = cci(&curve);

    let cov = coverage.raster();
    let mut n_cells = 0u64;
    let mut n_covered = 0u64;
    for i in 0..rurality.values().len() {
        if !mask_includes(mask, i) || rurality.is_nodata(i) || cov.flag_at(i).is_nodata() {
            continue;
        }
        n_cells += 1;
        if cov.is_covered(i) {
            n_covered += 1;
        }
    }
    let pcr_value = match population {
        Some(p) => Some(pcr(coverage, p, mask)?),
        None => None,
    };

    Ok(CciReport {
        cci: cci_value,
        acr: n_covered as f64 / n_cells as f64,
        pcr: pcr_value,
        n_cells,
        n_covered,
        distinct_rurality_levels: (curve.breakpoints().len() - 1) as u64,
        meta: coverage.meta().clone(),
        rurality_source_digest: raster_digest(rurality),
    })
}

/// One trend row: an epoch label with its headline ACR and CCI.
#[derive(Debug, Clone, PartialEq)]
pub struct TrendRow {
    pub epoch: String,
    pub acr: f64,
    pub cci: f64,
}

/// Ordered ACR/CCI rows across epochs, one per report.
#[derive(Debug, Clone, PartialEq)]
pub struct TrendTable {
    rows: Vec<TrendRow>,
}

impl TrendTable {
    pub fn new(rows: Vec<TrendRow>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Validation("trend table needs at least one row".into()));
        }
        let mut seen = std::collections::HashSet::new();
        for row in &rows {
            if !seen.insert(row.epoch.as_str()) {
                return Err(Error::Validation(format!(
                    "duplicate epoch label {:?}",
                    row.epoch
                )));
            }
        }
        Ok(TrendTable { rows })
    }

    pub fn rows(&self) -> &[TrendRow] {
        &self.rows
    }

    /// CSV rendering with header `epoch,acr,cci`, rows in input order.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("epoch,acr,cci\n");
        for row in &self.rows {
            out.push_str(&format!("{},{},{}\n", row.epoch, row.acr, row.cci));
        }
        out
    }
}

/// Collects reports into a trend table, keeping input order. Epoch labels
/// must be unique.
pub fn trend_table(reports: &[CciReport]) -> Result<TrendTable> {
    let rows = reports
        .iter()
        .map(|r| TrendRow {
            epoch: r.meta.epoch_label.clone(),
            acr: r.acr,
            cci: r.cci,
        })
        .collect();
    TrendTable::new(rows)
}
