//! Raster geometry, cell addressing, distance functions, and the
//! nodata-masked raster containers the rest of the crate consumes.
//!
//! A grid is a row-major raster whose row 0 is the northern/top row,
//! matching the on-disk row order of the ASCII grid format. Cell values
//! live either in a [`ScalarRaster`] (reals plus a nodata sentinel) or a
//! [`BoolRaster`] (covered / uncovered / nodata flags).

use crate::error::{Error, Result};

/// Mean Earth radius in kilometers (IUGG mean radius).
pub const EARTH_RADIUS_KM: f64 = 6371.0088;

/// Default nodata sentinel for rasters produced by this crate.
pub const DEFAULT_NODATA: f64 = -9999.0;

/// Absolute tolerance when comparing the real-valued fields of two grid
/// geometries for alignment.
pub const ALIGNMENT_TOLERANCE: f64 = 1e-9;

/// How grid and city coordinates are interpreted.
///
/// The toolkit performs no projection: cities and grids must already share
/// one CRS. Regulator rasters typically ship in a national projected CRS
/// with meter units; lat/lon datasets use [`CrsMode::GeographicDegrees`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrsMode {
    /// Planar coordinates in meters; distances are Euclidean.
    PlanarMeters,
    /// Longitude/latitude in degrees; distances are great-circle.
    GeographicDegrees,
}

/// A location in CRS units. In geographic mode `x` is longitude and `y`
/// is latitude, both in degrees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }
}

/// Row/column address of one cell. Row 0 is the top (northern) row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CellCoord {
    pub row: usize,
    pub col: usize,
}

impl CellCoord {
    pub fn new(row: usize, col: usize) -> Self {
        CellCoord { row, col }
    }
}

/// Raster georeferencing: dimensions, lower-left origin, cell size, and
/// coordinate-system mode. Cells are square and treated as equal-area in
/// every area fraction computed from a grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridGeometry {
    ncols: usize,
    nrows: usize,
    x_origin: f64,
    y_origin: f64,
    cell_size: f64,
    crs_mode: CrsMode,
}

impl GridGeometry {
    /// `x_origin`/`y_origin` locate the lower-left corner of the grid in
    /// CRS units.
    pub fn new(
        ncols: usize,
        nrows: usize,
        x_origin: f64,
        y_origin: f64,
        cell_size: f64,
        crs_mode: CrsMode,
    ) -> Result<Self> {
        if ncols < 1 || nrows < 1 {
            return Err(Error::Validation(format!(
                "grid dimensions must be at least 1x1, got {nrows}x{ncols}"
            )));
        }
        if !(cell_size.is_finite() && cell_size > 0.0) {
            return Err(Error::Validation(format!(
                "cell_size must be a positive finite number, got {cell_size}"
            )));
        }
        if !x_origin.is_finite() || !y_origin.is_finite() {
            return Err(Error::Validation(format!(
                "grid origin must be finite, got ({x_origin}, {y_origin})"
            )));
        }
        Ok(GridGeometry {
            ncols,
            nrows,
            x_origin,
            y_origin,
            cell_size,
            crs_mode,
        })
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn x_origin(&self) -> f64 {
        self.x_origin
    }

    pub fn y_origin(&self) -> f64 {
        self.y_origin
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn crs_mode(&self) -> CrsMode {
        self.crs_mode
    }

    pub fn n_cells(&self) -> usize {
        self.ncols * self.nrows
    }

    /// Same geometry with a different CRS mode. The ASCII grid format does
    /// not record a CRS, so loaders default to planar meters and callers
    /// working in lat/lon override it here.
    pub fn with_crs_mode(mut self, crs_mode: CrsMode) -> Self {
        self.crs_mode = crs_mode;
        self
    }

    /// Row-major flat index of a cell. The caller guarantees bounds.
    pub fn index_of(&self, cell: CellCoord) -> usize {
        debug_assert!(cell.row < self.nrows && cell.col < self.ncols);
        cell.row * self.ncols + cell.col
    }

    pub fn contains(&self, cell: CellCoord) -> bool {
        cell.row < self.nrows && cell.col < self.ncols
    }

    /// Two geometries are aligned iff all six fields are equal: exact
    /// comparison for the integers and the CRS mode, absolute tolerance
    /// [`ALIGNMENT_TOLERANCE`] for the reals. Returns the name of the
    /// first differing field, in declaration order.
    pub fn first_misaligned_field(&self, other: &GridGeometry) -> Option<&'static str> {
        fn close(a: f64, b: f64) -> bool {
            (a - b).abs() <= ALIGNMENT_TOLERANCE
        }
        if self.ncols != other.ncols {
            return Some("ncols");
        }
        if self.nrows != other.nrows {
            return Some("nrows");
        }
        if !close(self.x_origin, other.x_origin) {
            return Some("x_origin");
        }
        if !close(self.y_origin, other.y_origin) {
            return Some("y_origin");
        }
        if !close(self.cell_size, other.cell_size) {
            return Some("cell_size");
        }
        if self.crs_mode != other.crs_mode {
            return Some("crs_mode");
        }
        None
    }

    pub fn aligned_with(&self, other: &GridGeometry) -> bool {
        self.first_misaligned_field(other).is_none()
    }

    pub(crate) fn ensure_aligned_with(&self, other: &GridGeometry) -> Result<()> {
        match self.first_misaligned_field(other) {
            None => Ok(()),
            Some(field) => Err(Error::Misaligned { field }),
        }
    }
}

/// Center of a cell in CRS units.
///
/// `x = x_origin + (col + 0.5) * cell_size`;
/// `y = y_origin + (nrows - 1 - row + 0.5) * cell_size` (row 0 is the
/// northern/top row).
pub fn cell_center(geometry: &GridGeometry, cell: CellCoord) -> Result<Point> {
    if !geometry.contains(cell) {
        return Err(Error::OutOfBounds {
            row: cell.row,
            col: cell.col,
            nrows: geometry.nrows,
            ncols: geometry.ncols,
        });
    }
    Ok(Point {
        x: geometry.x_origin + (cell.col as f64 + 0.5) * geometry.cell_size,
        y: geometry.y_origin
            + ((geometry.nrows - 1 - cell.row) as f64 + 0.5) * geometry.cell_size,
    })
}

/// Distance between two points in kilometers.
///
/// Planar mode: Euclidean distance divided by 1000. Geographic mode:
/// great-circle (haversine) distance on a sphere of radius
/// [`EARTH_RADIUS_KM`]; latitudes must lie in [-90, 90].
pub fn distance(a: Point, b: Point, mode: CrsMode) -> Result<f64> {
    match mode {
        CrsMode::PlanarMeters => Ok(planar_km(a, b)),
        CrsMode::GeographicDegrees => {
            check_latitude(a.y)?;
            check_latitude(b.y)?;
            Ok(haversine_km(a, b))
        }
    }
}

pub(crate) fn check_latitude(latitude: f64) -> Result<()> {
    if !(-90.0..=90.0).contains(&latitude) {
        return Err(Error::InvalidLatitude { latitude });
    }
    Ok(())
}

#[inline]
pub(crate) fn planar_km(a: Point, b: Point) -> f64 {
    let dx = a.x - b.x;
    let dy = a.y - b.y;
    (dx * dx + dy * dy).sqrt() / 1000.0
}

#[inline]
pub(crate) fn haversine_km(a: Point, b: Point) -> f64 {
    let lat_a = a.y.to_radians();
    let lat_b = b.y.to_radians();
    let half_dlat = (b.y - a.y).to_radians() / 2.0;
    let half_dlon = (b.x - a.x).to_radians() / 2.0;
    let h = half_dlat.sin() * half_dlat.sin()
        + lat_a.cos() * lat_b.cos() * half_dlon.sin() * half_dlon.sin();
    2.0 * EARTH_RADIUS_KM * h.sqrt().min(1.0).asin()
}

/// Per-cell real values with nodata masking, row-major, row 0 on top.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarRaster {
    geometry: GridGeometry,
    values: Vec<f64>,
    nodata_sentinel: f64,
}

impl ScalarRaster {
    /// Every non-sentinel value must be finite and `values` must hold
    /// exactly `ncols * nrows` entries.
    pub fn new(geometry: GridGeometry, values: Vec<f64>, nodata_sentinel: f64) -> Result<Self> {
        if values.len() != geometry.n_cells() {
            return Err(Error::Validation(format!(
                "raster holds {} values but geometry is {}x{} = {} cells",
                values.len(),
                geometry.nrows(),
                geometry.ncols(),
                geometry.n_cells()
            )));
        }
        if !nodata_sentinel.is_finite() {
            return Err(Error::Validation(format!(
                "nodata sentinel must be finite, got {nodata_sentinel}"
            )));
        }
        if let Some(idx) = values
            .iter()
            .position(|v| !v.is_finite() && *v != nodata_sentinel)
        {
            return Err(Error::Validation(format!(
                "non-finite value {} at cell index {idx}",
                values[idx]
            )));
        }
        Ok(ScalarRaster {
            geometry,
            values,
            nodata_sentinel,
        })
    }

    /// Raster with every cell set to `value`.
    pub fn filled(geometry: GridGeometry, value: f64, nodata_sentinel: f64) -> Result<Self> {
        let n = geometry.n_cells();
        ScalarRaster::new(geometry, vec![value; n], nodata_sentinel)
    }

    pub fn geometry(&self) -> &GridGeometry {
        &self.geometry
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn nodata_sentinel(&self) -> f64 {
        self.nodata_sentinel
    }

    pub fn value_at(&self, idx: usize) -> f64 {
        self.values[idx]
    }

    pub fn is_nodata(&self, idx: usize) -> bool {
        self.values[idx] == self.nodata_sentinel
    }

    /// Same raster reinterpreted in another CRS mode.
    pub fn with_crs_mode(mut self, crs_mode: CrsMode) -> Self {
        self.geometry = self.geometry.with_crs_mode(crs_mode);
        self
    }
}

/// State of one cell in a [`BoolRaster`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellFlag {
    Covered,
    Uncovered,
    Nodata,
}

impl CellFlag {
    pub fn is_nodata(self) -> bool {
        self == CellFlag::Nodata
    }
}

/// Per-cell covered/uncovered flags with nodata masking.
///
/// Doubles as the mask type: wherever an operation accepts an optional
/// mask, cells flagged [`CellFlag::Covered`] are included and both
/// `Uncovered` and `Nodata` cells are excluded.
#[derive(Debug, Clone, PartialEq)]
pub struct BoolRaster {
    geometry: GridGeometry,
    flags: Vec<CellFlag>,
}

impl BoolRaster {
    pub fn new(geometry: GridGeometry, flags: Vec<CellFlag>) -> Result<Self> {
        if flags.len() != geometry.n_cells() {
            return Err(Error::Validation(format!(
                "raster holds {} flags but geometry is {}x{} = {} cells",
                flags.len(),
                geometry.nrows(),
                geometry.ncols(),
                geometry.n_cells()
            )));
        }
        Ok(BoolRaster { geometry, flags })
    }

    /// Raster with every cell set to `flag`.
    pub fn filled(geometry: GridGeometry, flag: CellFlag) -> Result<Self> {
        let n = geometry.n_cells();
        BoolRaster::new(geometry, vec![flag; n])
    }

    pub fn geometry(&self) -> &GridGeometry {
        &self.geometry
    }

    pub fn flags(&self) -> &[CellFlag] {
        &self.flags
    }

    pub fn flag_at(&self, idx: usize) -> CellFlag {
        self.flags[idx]
    }

    pub fn is_covered(&self, idx: usize) -> bool {
        self.flags[idx] == CellFlag::Covered
    }

    pub fn with_crs_mode(mut self, crs_mode: CrsMode) -> Self {
        self.geometry = self.geometry.with_crs_mode(crs_mode);
        self
    }
}

/// True when `idx` is included by an optional mask (no mask includes all).
#[inline]
pub(crate) fn mask_includes(mask: Option<&BoolRaster>, idx: usize) -> bool {
    mask.is_none_or(|m| m.is_covered(idx))
}
