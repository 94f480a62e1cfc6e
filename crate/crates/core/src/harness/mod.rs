//! Experiment grid sweep: runs every (dataset, color space, distance, bins,
//! stripes) cell, records CMC area, rank-1 rate, and wall time per cell, and
//! emits a results CSV plus grouped-bar SVG summaries.

mod config;
mod plot;

pub use config::{GridSpec, DEFAULT_BINS, DEFAULT_COLOR_SPACES, DEFAULT_SEED, DEFAULT_STRIPES};
pub use plot::GroupedBarChart;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use thiserror::Error;

use crate::colorspace::{self, ColorImage, ColorSpace};
use crate::dataset::{self, DatasetError, ProbeGallerySplit};
use crate::descriptor::extract_descriptor;
use crate::distance::{DistanceKind, DistanceMeasure, MahalanobisFactor};
use crate::evaluation::{compute_cmc, match_probe, LabeledDescriptor, RankResult};
use crate::histogram::Histogram;

pub const RESULTS_HEADER: &str =
    "dataset,color_space,distance,bins,stripes,probes,gallery,rank1,cmc_area,wall_time_s,error";

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("cannot read config {path}: {source}")]
    ConfigIo {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid config: {0}")]
    ConfigParse(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("cannot write {path}: {source}")]
    WriteFailed {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot read results {}: {message}", .path.display())]
    ResultsRead { path: PathBuf, message: String },
    #[error("results contain no usable rows")]
    EmptyResults,
    #[error("thread pool: {0}")]
    ThreadPool(String),
}

/// One grid point.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct ExperimentConfig {
    pub dataset: PathBuf,
    pub color_space: ColorSpace,
    pub distance: DistanceKind,
    pub bins: usize,
    pub stripes: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentMetrics {
    pub probes: usize,
    pub gallery: usize,
    pub rank1: f64,
    pub cmc_area: f64,
}

/// Outcome of one grid cell; failed cells carry an error string instead of
/// metrics so a single bad configuration never aborts the sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub metrics: Option<ExperimentMetrics>,
    pub wall_time_s: f64,
    pub error: Option<String>,
}

/// Everything a sweep leaves on disk.
#[derive(Debug, Clone)]
pub struct GridRunOutput {
    pub results: Vec<ExperimentResult>,
    pub csv_path: PathBuf,
    pub plot_paths: Vec<PathBuf>,
}

/// Runs the whole grid with a work pool of `jobs` threads (0 = one per
/// core), writes `results.csv` and the four summary SVGs into `out_dir`,
/// and returns the sorted results.
///
/// Rows are sorted by (dataset, color space, distance, bins, stripes)
/// regardless of execution order, so the CSV content is identical at any
/// parallelism level apart from the wall-time column.
pub fn run_grid(
    spec: &GridSpec,
    out_dir: &Path,
    jobs: usize,
) -> Result<GridRunOutput, HarnessError> {
    spec.validate(true)?;
    std::fs::create_dir_all(out_dir).map_err(|e| HarnessError::WriteFailed {
        path: out_dir.to_path_buf(),
        source: e,
    })?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| HarnessError::ThreadPool(e.to_string()))?;

    let mut results = pool.install(|| run_all_cells(spec));
    results.sort_by(|a, b| a.config.cmp(&b.config));

    let csv_path = out_dir.join("results.csv");
    write_results_csv(&results, &csv_path)?;
    let plot_paths = write_plots(&results, out_dir)?;
    Ok(GridRunOutput {
        results,
        csv_path,
        plot_paths,
    })
}

/// Convenience wrapper: parse the config file, validate, sweep.
pub fn run_grid_file(
    config_path: &Path,
    out_dir: &Path,
    jobs: usize,
    extended: bool,
) -> Result<GridRunOutput, HarnessError> {
    let spec = GridSpec::from_file(config_path)?;
    spec.validate(extended)?;
    run_grid(&spec, out_dir, jobs)
}

fn run_all_cells(spec: &GridSpec) -> Vec<ExperimentResult> {
    let mut results = Vec::new();
    for dataset_path in &spec.datasets {
        match load_split(dataset_path, spec.seed) {
            Err(err) => {
                let message = err.to_string();
                for config in spec.expand_for_dataset(dataset_path) {
                    results.push(ExperimentResult {
                        config,
                        metrics: None,
                        wall_time_s: 0.0,
                        error: Some(message.clone()),
                    });
                }
            }
            Ok(split) => {
                results.extend(run_dataset_cells(spec, dataset_path, &split));
            }
        }
    }
    results
}

fn load_split(dataset: &Path, seed: u64) -> Result<ProbeGallerySplit, DatasetError> {
    let loaded = dataset::load_manifest(dataset)?;
    dataset::make_split(&loaded.records, seed)
}

fn run_dataset_cells(
    spec: &GridSpec,
    dataset_path: &Path,
    split: &ProbeGallerySplit,
) -> Vec<ExperimentResult> {
    let mut results = Vec::new();
    for &color_space in &spec.color_spaces {
        // Convert once per color space; descriptors are shared by all
        // distance kernels of the same (bins, stripes) cell block.
        let converted = convert_split(split, color_space);
        let (probe_imgs, gallery_imgs) = match &converted {
            Ok(pair) => pair,
            Err(e) => {
                let message = e.clone();
                for &distance in &spec.distances {
                    for &bins in &spec.bins {
                        for &stripes in &spec.stripes {
                            results.push(error_cell(
                                cell_config(spec, dataset_path, color_space, distance, bins, stripes),
                                &message,
                            ));
                        }
                    }
                }
                continue;
            }
        };
        for &bins in &spec.bins {
            for &stripes in &spec.stripes {
                let described = build_descriptors(probe_imgs, gallery_imgs, bins, stripes);
                match described {
                    Err(message) => {
                        for &distance in &spec.distances {
                            results.push(error_cell(
                                cell_config(spec, dataset_path, color_space, distance, bins, stripes),
                                &message,
                            ));
                        }
                    }
                    Ok((probes, gallery)) => {
                        for &distance in &spec.distances {
                            let config = cell_config(
                                spec, dataset_path, color_space, distance, bins, stripes,
                            );
                            results.push(evaluate_cell(config, &probes, &gallery));
                        }
                    }
                }
            }
        }
    }
    results
}

fn cell_config(
    spec: &GridSpec,
    dataset: &Path,
    color_space: ColorSpace,
    distance: DistanceKind,
    bins: usize,
    stripes: usize,
) -> ExperimentConfig {
    ExperimentConfig {
        dataset: dataset.to_path_buf(),
        color_space,
        distance,
        bins,
        stripes,
        seed: spec.seed,
    }
}

fn error_cell(config: ExperimentConfig, message: &str) -> ExperimentResult {
    ExperimentResult {
        config,
        metrics: None,
        wall_time_s: 0.0,
        error: Some(message.to_string()),
    }
}

type ConvertedSplit = (Vec<(String, ColorImage)>, Vec<(String, ColorImage)>);

fn convert_split(split: &ProbeGallerySplit, space: ColorSpace) -> Result<ConvertedSplit, String> {
    let convert_side = |records: &[dataset::PersonRecord]| {
        records
            .par_iter()
            .map(|r| {
                let rgb = ColorImage::from_rgb8(r.image());
                colorspace::convert(&rgb, space)
                    .map(|img| (r.person_id.clone(), img))
                    .map_err(|e| e.to_string())
            })
            .collect::<Result<Vec<_>, String>>()
    };
    Ok((convert_side(&split.probes)?, convert_side(&split.gallery)?))
}

type DescribedSplit = (Vec<LabeledDescriptor>, Vec<LabeledDescriptor>);

fn build_descriptors(
    probes: &[(String, ColorImage)],
    gallery: &[(String, ColorImage)],
    bins: usize,
    stripes: usize,
) -> Result<DescribedSplit, String> {
    let describe = |side: &[(String, ColorImage)]| {
        side.par_iter()
            .map(|(id, img)| {
                extract_descriptor(img, stripes, bins)
                    .map(|descriptor| LabeledDescriptor {
                        person_id: id.clone(),
                        descriptor,
                    })
                    .map_err(|e| e.to_string())
            })
            .collect::<Result<Vec<_>, String>>()
    };
    Ok((describe(probes)?, describe(gallery)?))
}

fn evaluate_cell(
    config: ExperimentConfig,
    probes: &[LabeledDescriptor],
    gallery: &[LabeledDescriptor],
) -> ExperimentResult {
    let started = Instant::now();
    let outcome = (|| -> Result<ExperimentMetrics, String> {
        let measure = match config.distance {
            DistanceKind::Mahalanobis => {
                // Covariance pooled over every gallery stripe-channel
                // histogram of this configuration.
                let pooled: Vec<Histogram> = gallery
                    .iter()
                    .flat_map(|g| g.descriptor.cells().iter().cloned())
                    .collect();
                let factor = MahalanobisFactor::estimate(&pooled).map_err(|e| e.to_string())?;
                DistanceMeasure::with_mahalanobis(factor)
            }
            kind => DistanceMeasure::new(kind).map_err(|e| e.to_string())?,
        };
        let rank_results: Vec<RankResult> = probes
            .par_iter()
            .map(|p| match_probe(p, gallery, &measure))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        let cmc = compute_cmc(&rank_results, gallery.len()).map_err(|e| e.to_string())?;
        Ok(ExperimentMetrics {
            probes: probes.len(),
            gallery: gallery.len(),
            rank1: cmc.rank1(),
            cmc_area: cmc.area,
        })
    })();
    let wall_time_s = started.elapsed().as_secs_f64();
    match outcome {
        Ok(metrics) => ExperimentResult {
            config,
            metrics: Some(metrics),
            wall_time_s,
            error: None,
        },
        Err(message) => ExperimentResult {
            config,
            metrics: None,
            wall_time_s,
            error: Some(message),
        },
    }
}

pub fn write_results_csv(results: &[ExperimentResult], path: &Path) -> Result<(), HarnessError> {
    let io_err = |e: std::io::Error| HarnessError::WriteFailed {
        path: path.to_path_buf(),
        source: e,
    };
    let mut writer = csv::Writer::from_path(path)
        .map_err(|e| io_err(std::io::Error::other(e.to_string())))?;
    let write_record = |writer: &mut csv::Writer<std::fs::File>, fields: &[String]| {
        writer
            .write_record(fields)
            .map_err(|e| io_err(std::io::Error::other(e.to_string())))
    };
    write_record(
        &mut writer,
        &RESULTS_HEADER.split(',').map(String::from).collect::<Vec<_>>(),
    )?;
    for r in results {
        let (probes, gallery, rank1, area) = match &r.metrics {
            Some(m) => (
                m.probes.to_string(),
                m.gallery.to_string(),
                format!("{:.6}", m.rank1),
                format!("{:.6}", m.cmc_area),
            ),
            None => (String::new(), String::new(), String::new(), String::new()),
        };
        write_record(
            &mut writer,
            &[
                r.config.dataset.display().to_string(),
                r.config.color_space.to_string(),
                r.config.distance.to_string(),
                r.config.bins.to_string(),
                r.config.stripes.to_string(),
                probes,
                gallery,
                rank1,
                area,
                format!("{:.3}", r.wall_time_s),
                r.error.clone().unwrap_or_default(),
            ],
        )?;
    }
    writer.flush().map_err(io_err)
}

/// One parsed row of a results CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub dataset: String,
    pub color_space: String,
    pub distance: String,
    pub bins: usize,
    pub stripes: usize,
    pub probes: Option<usize>,
    pub gallery: Option<usize>,
    pub rank1: Option<f64>,
    pub cmc_area: Option<f64>,
    pub wall_time_s: f64,
    pub error: String,
}

pub fn read_results_csv(path: &Path) -> Result<Vec<ResultRow>, HarnessError> {
    let bad = |message: String| HarnessError::ResultsRead {
        path: path.to_path_buf(),
        message,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| bad(e.to_string()))?;
    let headers = reader.headers().map_err(|e| bad(e.to_string()))?.clone();
    if headers.iter().collect::<Vec<_>>().join(",") != RESULTS_HEADER {
        return Err(bad(format!("unexpected header {headers:?}")));
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| bad(e.to_string()))?;
        let field = |i: usize| record.get(i).unwrap_or("").to_string();
        let opt_usize = |i: usize| field(i).parse::<usize>().ok();
        let opt_f64 = |i: usize| field(i).parse::<f64>().ok();
        rows.push(ResultRow {
            dataset: field(0),
            color_space: field(1),
            distance: field(2),
            bins: field(3).parse().map_err(|_| bad(format!("bad bins {:?}", field(3))))?,
            stripes: field(4)
                .parse()
                .map_err(|_| bad(format!("bad stripes {:?}", field(4))))?,
            probes: opt_usize(5),
            gallery: opt_usize(6),
            rank1: opt_f64(7),
            cmc_area: opt_f64(8),
            wall_time_s: opt_f64(9).unwrap_or(0.0),
            error: field(10),
        });
    }
    Ok(rows)
}

/// Per-distance mean CMC area, all other factors averaged out.
#[derive(Debug, Clone, PartialEq)]
pub struct RankReportEntry {
    pub distance: String,
    pub mean_cmc_area: f64,
    pub cells: usize,
}

/// Ranks the distance measures by mean CMC area over every successful cell,
/// best first.
pub fn rank_report(rows: &[ResultRow]) -> Result<Vec<RankReportEntry>, HarnessError> {
    let mut by_distance: BTreeMap<&str, (f64, usize)> = BTreeMap::new();
    for row in rows {
        if let Some(area) = row.cmc_area {
            let entry = by_distance.entry(&row.distance).or_insert((0.0, 0));
            entry.0 += area;
            entry.1 += 1;
        }
    }
    if by_distance.is_empty() {
        return Err(HarnessError::EmptyResults);
    }
    let mut entries: Vec<RankReportEntry> = by_distance
        .into_iter()
        .map(|(distance, (sum, cells))| RankReportEntry {
            distance: distance.to_string(),
            mean_cmc_area: sum / cells as f64,
            cells,
        })
        .collect();
    entries.sort_by(|a, b| {
        b.mean_cmc_area
            .total_cmp(&a.mean_cmc_area)
            .then_with(|| a.distance.cmp(&b.distance))
    });
    Ok(entries)
}

pub fn rank_report_from_csv(path: &Path) -> Result<Vec<RankReportEntry>, HarnessError> {
    rank_report(&read_results_csv(path)?)
}

/// Formats a rank report as a fixed-width text table.
pub fn format_rank_report(entries: &[RankReportEntry]) -> String {
    let mut out = String::from("rank  distance       mean_cmc_area  cells\n");
    for (i, e) in entries.iter().enumerate() {
        out.push_str(&format!(
            "{:<5} {:<14} {:<14.6} {}\n",
            i + 1,
            e.distance,
            e.mean_cmc_area,
            e.cells
        ));
    }
    out
}

/// Marginal mean CMC area keyed by (group, series) extracted from each row.
fn marginal_means<G, S, FG, FS>(
    results: &[ExperimentResult],
    group_of: FG,
    series_of: FS,
) -> BTreeMap<(G, S), f64>
where
    G: Ord,
    S: Ord,
    FG: Fn(&ExperimentResult) -> G,
    FS: Fn(&ExperimentResult) -> S,
{
    let mut acc: BTreeMap<(G, S), (f64, usize)> = BTreeMap::new();
    for r in results {
        if let Some(m) = &r.metrics {
            let entry = acc.entry((group_of(r), series_of(r))).or_insert((0.0, 0));
            entry.0 += m.cmc_area;
            entry.1 += 1;
        }
    }
    acc.into_iter()
        .map(|(k, (sum, count))| (k, sum / count as f64))
        .collect()
}

fn area_chart<S: Ord + ToString + Copy>(
    results: &[ExperimentResult],
    title: &str,
    series_of: impl Fn(&ExperimentResult) -> S,
    series_values: Vec<S>,
) -> GroupedBarChart {
    let means = marginal_means(results, |r| r.config.distance, &series_of);
    let groups: Vec<DistanceKind> = DistanceKind::ALL
        .into_iter()
        .filter(|k| results.iter().any(|r| r.config.distance == *k))
        .collect();
    GroupedBarChart {
        title: title.to_string(),
        y_label: "mean CMC area".to_string(),
        group_labels: groups.iter().map(|k| k.to_string()).collect(),
        series_labels: series_values.iter().map(|s| s.to_string()).collect(),
        values: groups
            .iter()
            .map(|g| {
                series_values
                    .iter()
                    .map(|s| means.get(&(*g, *s)).copied())
                    .collect()
            })
            .collect(),
    }
}

fn timing_chart(results: &[ExperimentResult], spec_stripes: &[usize], spec_bins: &[usize]) -> GroupedBarChart {
    let mut totals: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for r in results {
        *totals
            .entry((r.config.stripes, r.config.bins))
            .or_insert(0.0) += r.wall_time_s;
    }
    GroupedBarChart {
        title: "Total evaluation time by stripes and bins".to_string(),
        y_label: "wall time (s)".to_string(),
        group_labels: spec_stripes.iter().map(|s| format!("{s} stripes")).collect(),
        series_labels: spec_bins.iter().map(|b| format!("{b} bins")).collect(),
        values: spec_stripes
            .iter()
            .map(|s| {
                spec_bins
                    .iter()
                    .map(|b| totals.get(&(*s, *b)).copied())
                    .collect()
            })
            .collect(),
    }
}

fn write_plots(results: &[ExperimentResult], out_dir: &Path) -> Result<Vec<PathBuf>, HarnessError> {
    let mut stripes: Vec<usize> = results.iter().map(|r| r.config.stripes).collect();
    stripes.sort_unstable();
    stripes.dedup();
    let mut bins: Vec<usize> = results.iter().map(|r| r.config.bins).collect();
    bins.sort_unstable();
    bins.dedup();
    let mut spaces: Vec<ColorSpace> = results.iter().map(|r| r.config.color_space).collect();
    spaces.sort_unstable();
    spaces.dedup();

    let charts: [(&str, GroupedBarChart); 4] = [
        (
            "cmc_area_by_color_space.svg",
            area_chart(
                results,
                "Mean CMC area by distance and color space",
                |r| r.config.color_space,
                spaces,
            ),
        ),
        (
            "cmc_area_by_bins.svg",
            area_chart(
                results,
                "Mean CMC area by distance and bin count",
                |r| r.config.bins,
                bins.clone(),
            ),
        ),
        (
            "cmc_area_by_stripes.svg",
            area_chart(
                results,
                "Mean CMC area by distance and stripe count",
                |r| r.config.stripes,
                stripes.clone(),
            ),
        ),
        (
            "timing_by_stripes_bins.svg",
            timing_chart(results, &stripes, &bins),
        ),
    ];

    let mut paths = Vec::with_capacity(charts.len());
    for (name, chart) in charts {
        let path = out_dir.join(name);
        std::fs::write(&path, chart.to_svg()).map_err(|e| HarnessError::WriteFailed {
            path: path.clone(),
            source: e,
        })?;
        paths.push(path);
    }
    Ok(paths)
}
