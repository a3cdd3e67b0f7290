//! One function per subcommand; each returns the library error that the
//! caller maps onto the exit-code contract.

use std::fs;
use std::path::{Path, PathBuf};

use cci_core::error::{Error, Result};
use cci_core::grid::GridGeometry;
use cci_core::ingest::{
    load_ascii_grid, load_bool_grid, load_city_csv, save_ascii_grid, save_bool_grid,
    save_city_csv, write_text_atomic, CoverageMap, CoverageMeta,
};
use cci_core::metrics::{cci_from_rasters, concentration_curve, trend_table, CciReport};
use cci_core::plot::trend_svg;
use cci_core::rurality::{rurality_with_partials, ThresholdSet};
use cci_core::synth::{gen_scenario, rollout, RolloutStrategy};
use cci_core::CrsMode;

use crate::{CurveArgs, IndexArgs, RuralityArgs, StrategyArg, SynthArgs, TrendArgs};

pub fn run_rurality(args: &RuralityArgs) -> Result<()> {
    let crs: CrsMode = args.crs.into();
    let geometry = match &args.template {
        Some(path) => load_ascii_grid(path)?.geometry().with_crs_mode(crs),
        None => {
            let (ncols, nrows, cellsize) = match (args.ncols, args.nrows, args.cellsize) {
                (Some(c), Some(r), Some(s)) => (c, r, s),
                _ => {
                    return Err(Error::Validation(
                        "provide either --template or all of --ncols, --nrows, --cellsize"
                            .into(),
                    ))
                }
            };
            GridGeometry::new(ncols, nrows, args.xllcorner, args.yllcorner, cellsize, crs)?
        }
    };
    let registry = load_city_csv(&args.cities, crs)?;
    let thresholds = match &args.thresholds {
        Some(list) => ThresholdSet::new(list.clone())?,
        None => ThresholdSet::default(),
    };
    let mask = args
        .mask
        .as_ref()
        .map(|p| load_bool_grid(p).map(|b| b.with_crs_mode(crs)))
        .transpose()?;

    let (combined, partials) =
        rurality_with_partials(&geometry, mask.as_ref(), &registry, &thresholds)?;
    if let Some(dir) = &args.partials_dir {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for (threshold, partial) in &partials {
            save_ascii_grid(partial, &dir.join(format!("partial-{threshold}.asc")))?;
        }
    }
    save_ascii_grid(&combined, &args.out)
}

fn load_index_inputs(
    rurality: &Path,
    coverage: &Path,
    mask: Option<&PathBuf>,
    meta: CoverageMeta,
) -> Result<(
    cci_core::ScalarRaster,
    CoverageMap,
    Option<cci_core::BoolRaster>,
)> {
    let rurality = load_ascii_grid(rurality)?;
    let coverage = CoverageMap::new(load_bool_grid(coverage)?, meta)?;
    let mask = mask.map(|p| load_bool_grid(p)).transpose()?;
    Ok((rurality, coverage, mask))
}

pub fn run_index(args: &IndexArgs) -> Result<()> {
    let meta = CoverageMeta {
        generation_tag: args.generation_tag.clone(),
        rate_threshold_mbps: None,
        sensitivity_tag: args.sensitivity_tag.clone(),
        epoch_label: args.epoch_label.clone(),
    };
    let (rurality, coverage, mask) =
        load_index_inputs(&args.rurality, &args.coverage, args.mask.as_ref(), meta)?;
    let population = args.population.as_deref().map(load_ascii_grid).transpose()?;

    let report = cci_from_rasters(&rurality, &coverage, mask.as_ref(), population.as_ref())?;
    if let Some(curve_path) = &args.curve {
        let curve = concentration_curve(&rurality, &coverage, mask.as_ref())?;
        write_text_atomic(curve_path, &curve.to_csv_string())?;
    }
    write_text_atomic(&args.out, &(report.to_json_pretty()? + "\n"))?;
    println!("CCI={} ACR={}", report.cci, report.acr);
    Ok(())
}

pub fn run_curve(args: &CurveArgs) -> Result<()> {
    let (rurality, coverage, mask) = load_index_inputs(
        &args.rurality,
        &args.coverage,
        args.mask.as_ref(),
        CoverageMeta::new("unlabeled"),
    )?;
    let curve = concentration_curve(&rurality, &coverage, mask.as_ref())?;
    write_text_atomic(&args.out, &curve.to_csv_string())
}

fn read_manifest(path: &Path) -> Result<Vec<(String, PathBuf)>> {
    let base = path.parent().unwrap_or(Path::new("."));
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut entries = Vec::new();
    let mut saw_header = false;
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let Some((label, report)) = line.split_once(',') else {
            return Err(Error::parse(path, lineno, "expected label,path"));
        };
        if !saw_header {
            if !(label.trim().eq_ignore_ascii_case("label")
                && report.trim().eq_ignore_ascii_case("path"))
            {
                return Err(Error::parse(path, lineno, "expected header \"label,path\""));
            }
            saw_header = true;
            continue;
        }
        let report = Path::new(report.trim());
        let resolved = if report.is_absolute() {
            report.to_path_buf()
        } else {
            base.join(report)
        };
        entries.push((label.trim().to_owned(), resolved));
    }
    Ok(entries)
}

pub fn run_trend(args: &TrendArgs) -> Result<()> {
    let entries: Vec<(String, PathBuf)> = match &args.manifest {
        Some(manifest) => read_manifest(manifest)?,
        None => {
            if args.report.len() != args.label.len() {
                return Err(Error::Validation(format!(
                    "{} --report flags but {} --label flags; they pair by position",
                    args.report.len(),
                    args.label.len()
                )));
            }
            args.label
                .iter()
                .cloned()
                .zip(args.report.iter().cloned())
                .collect()
        }
    };
    if entries.is_empty() {
        return Err(Error::Validation("no reports given".into()));
    }

    let mut reports = Vec::with_capacity(entries.len());
    for (label, path) in entries {
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let mut report = CciReport::from_json(&text)?;
        report.meta.epoch_label = label;
        reports.push(report);
    }
    let table = trend_table(&reports)?;
    write_text_atomic(&args.csv, &table.to_csv_string())?;
    write_text_atomic(&args.svg, &trend_svg(&table))
}

pub fn run_synth(args: &SynthArgs) -> Result<()> {
    let scenario = gen_scenario(
        args.seed,
        args.ncols,
        args.nrows,
        args.cities,
        args.max_population,
    )?;
    fs::create_dir_all(&args.out_dir).map_err(|e| Error::io(&args.out_dir, e))?;
    save_city_csv(&scenario.registry, &args.out_dir.join("cities.csv"))?;
    save_ascii_grid(&scenario.rurality, &args.out_dir.join("rurality.asc"))?;
    save_bool_grid(
        scenario.initial_coverage.raster(),
        &args.out_dir.join("coverage-initial.asc"),
    )?;

    if let Some(steps) = args.rollout_steps {
        let strategy = match args.strategy {
            StrategyArg::UrbanFirst => RolloutStrategy::UrbanFirst,
            StrategyArg::RuralFirst => RolloutStrategy::RuralFirst,
            StrategyArg::UniformRandom => RolloutStrategy::UniformRandom {
                seed: args.rollout_seed,
            },
        };
        for map in rollout(&scenario, strategy, steps)? {
            let name = format!("coverage-{}.asc", map.meta().epoch_label);
            save_bool_grid(map.raster(), &args.out_dir.join(name))?;
        }
    }
    Ok(())
}
