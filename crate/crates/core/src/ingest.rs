//! Raster and registry file I/O, coverage thresholding, and geometry
//! alignment checks.
//!
//! The sole raster format is the ESRI ASCII grid: a text header
//! (`ncols`, `nrows`, `xllcorner`, `yllcorner`, `cellsize`, optional
//! `NODATA_value`, case-insensitive, one per line) followed by `nrows`
//! rows of `ncols` whitespace-separated numbers, top row first. City
//! registries are UTF-8 CSV with header `name,population,x,y`.
//!
//! No resampling is performed anywhere: rasters that flow into one
//! computation must be aligned exactly, and mismatches are hard errors.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{BoolRaster, CellFlag, CrsMode, GridGeometry, ScalarRaster, DEFAULT_NODATA};
use crate::rurality::{City, CityRegistry};

/// Descriptive tags attached to a coverage map: network generation,
/// data-rate threshold, measurement sensitivity, and the epoch the map
/// describes. Only `epoch_label` is required.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageMeta {
    pub generation_tag: Option<String>,
    pub rate_threshold_mbps: Option<f64>,
    pub sensitivity_tag: Option<String>,
    pub epoch_label: String,
}

impl CoverageMeta {
    pub fn new(epoch_label: impl Into<String>) -> Self {
        CoverageMeta {
            generation_tag: None,
            rate_threshold_mbps: None,
            sensitivity_tag: None,
            epoch_label: epoch_label.into(),
        }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if self.epoch_label.is_empty() {
            return Err(Error::Validation("epoch label must not be empty".into()));
        }
        Ok(())
    }
}

/// A binary coverage raster plus its descriptive metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageMap {
    raster: BoolRaster,
    meta: CoverageMeta,
}

impl CoverageMap {
    pub fn new(raster: BoolRaster, meta: CoverageMeta) -> Result<Self> {
        meta.validate()?;
        Ok(CoverageMap { raster, meta })
    }

    pub fn raster(&self) -> &BoolRaster {
        &self.raster
    }

    pub fn meta(&self) -> &CoverageMeta {
        &self.meta
    }
}

/// Covered wherever the rate meets `min_rate_mbps` (inclusive), nodata
/// where the rate raster is nodata. The returned map's metadata carries
/// the threshold.
pub fn threshold_coverage(
    rates: &ScalarRaster,
    min_rate_mbps: f64,
    meta: CoverageMeta,
) -> Result<CoverageMap> {
    if !(min_rate_mbps.is_finite() && min_rate_mbps > 0.0) {
        return Err(Error::Validation(format!(
            "rate threshold must be a positive finite number, got {min_rate_mbps}"
        )));
    }
    let flags = rates
        .values()
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            if rates.is_nodata(i) {
                CellFlag::Nodata
            } else if v >= min_rate_mbps {
                CellFlag::Covered
            } else {
                CellFlag::Uncovered
            }
        })
        .collect();
    let mut meta = meta;
    meta.rate_threshold_mbps = Some(min_rate_mbps);
    CoverageMap::new(BoolRaster::new(*rates.geometry(), flags)?, meta)
}

/// Succeeds iff all geometries are pairwise aligned; the error names the
/// first differing field. Requires at least two geometries.
pub fn check_alignment(geometries: &[&GridGeometry]) -> Result<()> {
    if geometries.len() < 2 {
        return Err(Error::Validation(format!(
            "alignment check needs at least two geometries, got {}",
            geometries.len()
        )));
    }
    let first = geometries[0];
    for other in &geometries[1..] {
        first.ensure_aligned_with(other)?;
    }
    Ok(())
}

/// Writes `text` to `path` atomically: the content lands in a temporary
/// file in the same directory and is renamed into place.
pub fn write_text_atomic(path: &Path, text: &str) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let mut tmp = tempfile::NamedTempFile::new_in(dir.unwrap_or(Path::new(".")))
        .map_err(|e| Error::io(path, e))?;
    tmp.write_all(text.as_bytes())
        .map_err(|e| Error::io(path, e))?;
    tmp.persist(path)
        .map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

const HEADER_KEYS: [&str; 5] = ["ncols", "nrows", "xllcorner", "yllcorner", "cellsize"];

/// Parses an ESRI ASCII grid. A missing `NODATA_value` defaults to -9999.
/// The format records no CRS, so the result is tagged
/// [`CrsMode::PlanarMeters`]; use [`ScalarRaster::with_crs_mode`] for
/// lat/lon data.
pub fn load_ascii_grid(path: &Path) -> Result<ScalarRaster> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);

    let mut header: Vec<(String, String, usize)> = Vec::new();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut data_done = false;

    for (lineno, line) in reader.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        let line = line.trim_start_matches('\u{feff}').trim();
        if line.is_empty() {
            continue;
        }
        let starts_alpha = line.chars().next().is_some_and(|c| c.is_ascii_alphabetic());
        if starts_alpha {
            if !rows.is_empty() {
                return Err(Error::parse(
                    path,
                    lineno,
                    "header line found after data rows",
                ));
            }
            let mut it = line.split_whitespace();
            let key = it.next().unwrap_or_default().to_ascii_lowercase();
            let value = it.next().map(str::to_owned).ok_or_else(|| {
                Error::parse(path, lineno, format!("header key {key:?} has no value"))
            })?;
            if it.next().is_some() {
                return Err(Error::parse(
                    path,
                    lineno,
                    format!("header line for {key:?} has trailing tokens"),
                ));
            }
            if !HEADER_KEYS.contains(&key.as_str()) && key != "nodata_value" {
                return Err(Error::parse(
                    path,
                    lineno,
                    format!("unknown header key {key:?}"),
                ));
            }
            header.push((key, value, lineno));
        } else {
            if data_done {
                return Err(Error::parse(path, lineno, "data after the final row"));
            }
            let ncols = header_usize(&header, "ncols", path)?;
            let nrows = header_usize(&header, "nrows", path)?;
            let mut row = Vec::with_capacity(ncols);
            for token in line.split_whitespace() {
                let v: f64 = token.parse().map_err(|_| {
                    Error::parse(path, lineno, format!("non-numeric token {token:?}"))
                })?;
                row.push(v);
            }
            if row.len() != ncols {
                return Err(Error::parse(
                    path,
                    lineno,
                    format!("expected {ncols} values in row, found {}", row.len()),
                ));
            }
            rows.push(row);
            if rows.len() == nrows {
                data_done = true;
            }
        }
    }

    for key in HEADER_KEYS {
        if !header.iter().any(|(k, _, _)| k == key) {
            return Err(Error::parse(
                path,
                1,
                format!("missing header key {key:?}"),
            ));
        }
    }
    let ncols = header_usize(&header, "ncols", path)?;
    let nrows = header_usize(&header, "nrows", path)?;
    let x_origin = header_f64(&header, "xllcorner", path)?;
    let y_origin = header_f64(&header, "yllcorner", path)?;
    let cell_size = header_f64(&header, "cellsize", path)?;
    let nodata = match header.iter().find(|(k, _, _)| k == "nodata_value") {
        Some(_) => header_f64(&header, "nodata_value", path)?,
        None => DEFAULT_NODATA,
    };
    if rows.len() != nrows {
        return Err(Error::parse(
            path,
            header.last().map(|h| h.2).unwrap_or(1),
            format!("expected {nrows} data rows, found {}", rows.len()),
        ));
    }

    let geometry = GridGeometry::new(
        ncols,
        nrows,
        x_origin,
        y_origin,
        cell_size,
        CrsMode::PlanarMeters,
    )?;
    let values: Vec<f64> = rows.into_iter().flatten().collect();
    ScalarRaster::new(geometry, values, nodata)
}

fn header_entry<'a>(
    header: &'a [(String, String, usize)],
    key: &str,
    path: &Path,
) -> Result<&'a (String, String, usize)> {
    header
        .iter()
        .find(|(k, _, _)| k == key)
        .ok_or_else(|| Error::parse(path, 1, format!("missing header key {key:?}")))
}

fn header_usize(header: &[(String, String, usize)], key: &str, path: &Path) -> Result<usize> {
    let (_, value, lineno) = header_entry(header, key, path)?;
    value.parse().map_err(|_| {
        Error::parse(
            path,
            *lineno,
            format!("{key} must be a positive integer, got {value:?}"),
        )
    })
}

fn header_f64(header: &[(String, String, usize)], key: &str, path: &Path) -> Result<f64> {
    let (_, value, lineno) = header_entry(header, key, path)?;
    value.parse().map_err(|_| {
        Error::parse(path, *lineno, format!("{key} must be a number, got {value:?}"))
    })
}

/// Writes a raster in the ASCII grid format. Reals are printed with
/// shortest-round-trip formatting, so save/load is lossless.
pub fn save_ascii_grid(raster: &ScalarRaster, path: &Path) -> Result<()> {
    let g = raster.geometry();
    let mut out = String::with_capacity(raster.values().len() * 8 + 128);
    out.push_str(&format!("ncols {}\n", g.ncols()));
    out.push_str(&format!("nrows {}\n", g.nrows()));
    out.push_str(&format!("xllcorner {}\n", g.x_origin()));
    out.push_str(&format!("yllcorner {}\n", g.y_origin()));
    out.push_str(&format!("cellsize {}\n", g.cell_size()));
    out.push_str(&format!("NODATA_value {}\n", raster.nodata_sentinel()));
    for row in raster.values().chunks(g.ncols()) {
        let mut first = true;
        for v in row {
            if !first {
                out.push(' ');
            }
            out.push_str(&format_f64(*v));
            first = false;
        }
        out.push('\n');
    }
    write_text_atomic(path, &out)
}

fn format_f64(v: f64) -> String {
    let mut s = format!("{v}");
    if !s.contains('.') && !s.contains('e') && !s.contains("inf") && !s.contains("NaN") {
        // keep plain integers as-is
        s.shrink_to_fit();
    }
    s
}

/// Loads a binary coverage/mask grid: 1 means covered, 0 uncovered (both
/// within 1e-9), the sentinel means nodata. Anything else is a validation
/// error naming the offending cell.
pub fn load_bool_grid(path: &Path) -> Result<BoolRaster> {
    let raster = load_ascii_grid(path)?;
    let ncols = raster.geometry().ncols();
    let mut flags = Vec::with_capacity(raster.values().len());
    for (i, &v) in raster.values().iter().enumerate() {
        let flag = if raster.is_nodata(i) {
            CellFlag::Nodata
        } else if (v - 1.0).abs() <= 1e-9 {
            CellFlag::Covered
        } else if v.abs() <= 1e-9 {
            CellFlag::Uncovered
        } else {
            return Err(Error::Validation(format!(
                "value {v} at row {}, col {} of {} is neither 0 nor 1",
                i / ncols,
                i % ncols,
                path.display()
            )));
        };
        flags.push(flag);
    }
    BoolRaster::new(*raster.geometry(), flags)
}

/// Writes a binary raster as an ASCII grid of 1/0/sentinel values.
pub fn save_bool_grid(raster: &BoolRaster, path: &Path) -> Result<()> {
    let values = raster
        .flags()
        .iter()
        .map(|f| match f {
            CellFlag::Covered => 1.0,
            CellFlag::Uncovered => 0.0,
            CellFlag::Nodata => DEFAULT_NODATA,
        })
        .collect();
    let scalar = ScalarRaster::new(*raster.geometry(), values, DEFAULT_NODATA)?;
    save_ascii_grid(&scalar, path)
}

const CITY_CSV_HEADER: [&str; 4] = ["name", "population", "x", "y"];

/// Loads a city registry from CSV with header `name,population,x,y`.
/// Coordinates are interpreted in `crs_mode` units.
pub fn load_city_csv(path: &Path, crs_mode: CrsMode) -> Result<CityRegistry> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;

    let headers = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    let got: Vec<String> = headers.iter().map(|h| h.to_ascii_lowercase()).collect();
    if got != CITY_CSV_HEADER {
        return Err(Error::parse(
            path,
            1,
            format!("expected header \"name,population,x,y\", got {:?}", headers),
        ));
    }

    let mut cities = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() != 4 {
            return Err(Error::parse(
                path,
                line,
                format!("expected 4 fields, found {}", record.len()),
            ));
        }
        let population: u64 = record[1].parse().map_err(|_| {
            Error::parse(
                path,
                line,
                format!("population must be a base-10 integer, got {:?}", &record[1]),
            )
        })?;
        let x: f64 = record[2].parse().map_err(|_| {
            Error::parse(path, line, format!("x must be a number, got {:?}", &record[2]))
        })?;
        let y: f64 = record[3].parse().map_err(|_| {
            Error::parse(path, line, format!("y must be a number, got {:?}", &record[3]))
        })?;
        cities.push(City::new(record[0].to_owned(), population, x, y));
    }
    CityRegistry::new(cities, crs_mode)
}

/// Writes a city registry as CSV with header `name,population,x,y`.
pub fn save_city_csv(registry: &CityRegistry, path: &Path) -> Result<()> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record(CITY_CSV_HEADER)
        .map_err(|e| csv_error(path, e))?;
    for city in registry.cities() {
        writer
            .write_record([
                city.name.as_str(),
                &city.population.to_string(),
                &format!("{}", city.x),
                &format!("{}", city.y),
            ])
            .map_err(|e| csv_error(path, e))?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| Error::Validation(e.to_string()))?;
    let text = String::from_utf8(bytes).expect("csv output is UTF-8");
    write_text_atomic(path, &text)
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    if e.is_io_error() {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            _ => unreachable!("is_io_error guarantees an Io kind"),
        }
    } else {
        Error::parse(path, line, e.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::SplitMix64;
    use proptest::prelude::*;

    fn write_tmp(content: &str) -> tempfile::TempPath {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f.into_temp_path()
    }

    #[test]
    fn loads_two_by_two_grid() {
        let path = write_tmp(
            "ncols 2\nnrows 2\nxllcorner 0\nyllcorner 0\ncellsize 250\n1 2\n3 4\n",
        );
        let r = load_ascii_grid(&path).unwrap();
        assert_eq!(r.values(), &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(r.geometry().cell_size(), 250.0);
        assert_eq!(r.nodata_sentinel(), DEFAULT_NODATA);
    }

    #[test]
    fn nodata_cell_is_flagged() {
        let path = write_tmp(
            "ncols 2\nnrows 1\nxllcorner 0\nyllcorner 0\ncellsize 1\nNODATA_value -9999\n-9999 4\n",
        );
        let r = load_ascii_grid(&path).unwrap();
        assert!(r.is_nodata(0));
        assert!(!r.is_nodata(1));
    }

    #[test]
    fn header_is_case_insensitive_and_crlf_tolerated() {
        let path = write_tmp(
            "NCOLS 1\r\nNROWS 1\r\nXLLCORNER 2\r\nYLLCORNER 3\r\nCELLSIZE 4\r\nNODATA_VALUE -1\r\n7\r\n",
        );
        let r = load_ascii_grid(&path).unwrap();
        assert_eq!(r.values(), &[7.0]);
        assert_eq!(r.geometry().x_origin(), 2.0);
        assert_eq!(r.nodata_sentinel(), -1.0);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let path = write_tmp("ncols 2\nnrows 1\nxllcorner 0\nyllcorner 0\ncellsize 1\n1 oops\n");
        match load_ascii_grid(&path) {
            Err(Error::Parse { line: 6, message, .. }) => {
                assert!(message.contains("oops"));
            }
            other => panic!("expected parse error at line 6, got {other:?}"),
        }

        let path = write_tmp("ncols 2\nnrows 1\nxllcorner 0\nyllcorner 0\ncellsize 1\n1 2 3\n");
        match load_ascii_grid(&path) {
            Err(Error::Parse { line: 6, .. }) => {}
            other => panic!("expected wrong-token-count error at line 6, got {other:?}"),
        }

        let path = write_tmp("ncols 2\nnrows 1\nxllcorner 0\ncellsize 1\n1 2\n");
        match load_ascii_grid(&path) {
            Err(Error::Parse { message, .. }) => assert!(message.contains("yllcorner")),
            other => panic!("expected missing-header error, got {other:?}"),
        }

        let path = write_tmp("ncols 2\nnrows 1\nxllcorner 0\nyllcorner 0\ncellsize abc\n1 2\n");
        match load_ascii_grid(&path) {
            Err(Error::Parse { line: 5, .. }) => {}
            other => panic!("expected bad cellsize error at line 5, got {other:?}"),
        }
    }

    #[test]
    fn missing_file_is_io_error() {
        let err = load_ascii_grid(Path::new("/nonexistent/grid.asc")).unwrap_err();
        assert!(err.is_io());
    }

    #[test]
    fn one_by_one_grid_is_seven_lines() {
        let g = GridGeometry::new(1, 1, 0.0, 0.0, 1.0, CrsMode::PlanarMeters).unwrap();
        let r = ScalarRaster::new(g, vec![0.0], DEFAULT_NODATA).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("tiny.asc");
        save_ascii_grid(&r, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 7);
    }

    #[test]
    fn nodata_round_trips_through_save() {
        let g = GridGeometry::new(2, 1, 0.0, 0.0, 1.0, CrsMode::PlanarMeters).unwrap();
        let r = ScalarRaster::new(g, vec![DEFAULT_NODATA, 5.5], DEFAULT_NODATA).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("nd.asc");
        save_ascii_grid(&r, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.contains("-9999 5.5"));
        let back = load_ascii_grid(&path).unwrap();
        assert!(back.is_nodata(0));
    }

    proptest! {
        #[test]
        fn save_load_round_trip(
            ncols in 1usize..6,
            nrows in 1usize..6,
            x0 in -1e6f64..1e6,
            y0 in -1e6f64..1e6,
            cell in prop::sample::select(vec![0.25f64, 1.0, 250.0, 1037.5]),
            seed in any::<u64>(),
        ) {
            let g = GridGeometry::new(ncols, nrows, x0, y0, cell, CrsMode::PlanarMeters).unwrap();
            let mut rng = SplitMix64::new(seed);
            let values: Vec<f64> = (0..ncols * nrows)
                .map(|_| {
                    if rng.next_u64().is_multiple_of(5) {
                        DEFAULT_NODATA
                    } else {
                        (rng.next_f64() - 0.5) * 1e4
                    }
                })
                .collect();
            let r = ScalarRaster::new(g, values, DEFAULT_NODATA).unwrap();
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("rt.asc");
            save_ascii_grid(&r, &path).unwrap();
            let back = load_ascii_grid(&path).unwrap();
            prop_assert_eq!(back.geometry(), r.geometry());
            prop_assert_eq!(back.nodata_sentinel(), r.nodata_sentinel());
            for (a, b) in back.values().iter().zip(r.values()) {
                prop_assert!((a - b).abs() <= 1e-9);
            }
        }

        #[test]
        fn threshold_is_monotone_in_rate(
            b1 in 1.0f64..200.0,
            b2 in 1.0f64..200.0,
            seed in any::<u64>(),
        ) {
            let (lo, hi) = if b1 <= b2 { (b1, b2) } else { (b2, b1) };
            let g = GridGeometry::new(8, 4, 0.0, 0.0, 1.0, CrsMode::PlanarMeters).unwrap();
            let mut rng = SplitMix64::new(seed);
            let rates: Vec<f64> = (0..32).map(|_| rng.next_f64() * 250.0).collect();
            let r = ScalarRaster::new(g, rates, DEFAULT_NODATA).unwrap();
            let c_lo = threshold_coverage(&r, lo, CoverageMeta::new("t")).unwrap();
            let c_hi = threshold_coverage(&r, hi, CoverageMeta::new("t")).unwrap();
            for (a, b) in c_hi.raster().flags().iter().zip(c_lo.raster().flags()) {
                // raising the threshold never turns uncovered into covered
                if *a == CellFlag::Covered {
                    prop_assert_eq!(*b, CellFlag::Covered);
                }
            }
        }
    }

    #[test]
    fn threshold_coverage_boundary_inclusive() {
        let g = GridGeometry::new(3, 1, 0.0, 0.0, 1.0, CrsMode::PlanarMeters).unwrap();
        let r = ScalarRaster::new(g, vec![10.0, 30.0, 100.0], DEFAULT_NODATA).unwrap();
        let cov = threshold_coverage(&r, 30.0, CoverageMeta::new("2024")).unwrap();
        assert_eq!(
            cov.raster().flags(),
            &[CellFlag::Uncovered, CellFlag::Covered, CellFlag::Covered]
        );
        assert_eq!(cov.meta().rate_threshold_mbps, Some(30.0));
    }

    #[test]
    fn threshold_coverage_propagates_nodata() {
        let g = GridGeometry::new(2, 1, 0.0, 0.0, 1.0, CrsMode::PlanarMeters).unwrap();
        let r = ScalarRaster::new(g, vec![0.0, DEFAULT_NODATA], DEFAULT_NODATA).unwrap();
        let cov = threshold_coverage(&r, 100.0, CoverageMeta::new("2024")).unwrap();
        assert_eq!(cov.raster().flags(), &[CellFlag::Uncovered, CellFlag::Nodata]);
    }

    #[test]
    fn bool_grid_accepts_zeros_ones_sentinel() {
        let path = write_tmp(
            "ncols 2\nnrows 2\nxllcorner 0\nyllcorner 0\ncellsize 1\nNODATA_value -9999\n1 0\n-9999 1\n",
        );
        let b = load_bool_grid(&path).unwrap();
        assert_eq!(
            b.flags(),
            &[
                CellFlag::Covered,
                CellFlag::Uncovered,
                CellFlag::Nodata,
                CellFlag::Covered
            ]
        );
    }

    #[test]
    fn bool_grid_rejects_fractional_values() {
        let path = write_tmp(
            "ncols 2\nnrows 1\nxllcorner 0\nyllcorner 0\ncellsize 1\n0.5 1\n",
        );
        match load_bool_grid(&path) {
            Err(Error::Validation(msg)) => {
                assert!(msg.contains("row 0"), "{msg}");
                assert!(msg.contains("col 0"), "{msg}");
            }
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn all_ones_grid_is_fully_covered() {
        let path = write_tmp("ncols 3\nnrows 1\nxllcorner 0\nyllcorner 0\ncellsize 1\n1 1 1\n");
        let b = load_bool_grid(&path).unwrap();
        assert!(b.flags().iter().all(|f| *f == CellFlag::Covered));
    }

    #[test]
    fn check_alignment_reports_first_field() {
        let a = GridGeometry::new(2, 2, 0.0, 0.0, 250.0, CrsMode::PlanarMeters).unwrap();
        let b = GridGeometry::new(2, 2, 0.0, 0.0, 251.0, CrsMode::PlanarMeters).unwrap();
        let c = GridGeometry::new(3, 2, 0.0, 0.0, 250.0, CrsMode::PlanarMeters).unwrap();
        assert!(check_alignment(&[&a, &a, &a]).is_ok());
        assert!(matches!(
            check_alignment(&[&a, &b]),
            Err(Error::Misaligned { field: "cell_size" })
        ));
        assert!(matches!(
            check_alignment(&[&a, &c]),
            Err(Error::Misaligned { field: "ncols" })
        ));
        assert!(check_alignment(&[&a]).is_err());
    }

    #[test]
    fn city_csv_round_trip() {
        let reg = CityRegistry::new(
            vec![
                City::new("Kiruna, North", 17000, 1634.25, -42.5),
                City::new("Aked", 200, 0.125, 9.75),
            ],
            CrsMode::PlanarMeters,
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cities.csv");
        save_city_csv(&reg, &path).unwrap();
        let back = load_city_csv(&path, CrsMode::PlanarMeters).unwrap();
        assert_eq!(back, reg);
    }

    #[test]
    fn city_csv_rejects_bad_header_and_fields() {
        let path = write_tmp("name,pop,x,y\nA,100,1,2\n");
        assert!(matches!(
            load_city_csv(&path, CrsMode::PlanarMeters),
            Err(Error::Parse { line: 1, .. })
        ));

        let path = write_tmp("name,population,x,y\nA,12.5,1,2\n");
        match load_city_csv(&path, CrsMode::PlanarMeters) {
            Err(Error::Parse { line: 2, message, .. }) => {
                assert!(message.contains("population"));
            }
            other => panic!("expected population parse error, got {other:?}"),
        }
    }

    #[test]
    fn coverage_meta_requires_epoch() {
        let g = GridGeometry::new(1, 1, 0.0, 0.0, 1.0, CrsMode::PlanarMeters).unwrap();
        let raster = BoolRaster::filled(g, CellFlag::Covered).unwrap();
        assert!(CoverageMap::new(raster, CoverageMeta::new("")).is_err());
    }
}
