//! Command-line front end.

pub mod benchmark;
pub mod bundle;
pub mod table;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use crate::config::{parse_config, validate_config, InstanceConfig};
use crate::generator::{generate_replicas, write_instance, Instance, Scenario};
use crate::metrics::{display2, MetricsSummary, DEFAULT_NEIGHBORS, DEFAULT_TH_S};
use crate::network::poi::load_pois_csv;
use crate::network::{
    dedupe_stations, load_csv_network, load_network, load_stations_csv, synth_grid_network, synth_stations,
    write_stations_csv, Coordinate, NetworkKind, PoiIndex,
};
use crate::similarity::{instance_similarity, SimilarityThresholds};
use benchmark::{expand_grid, BenchmarkGrid};
use bundle::{load_kind, load_meta, save_meta, save_network, Bundle};
use table::{measure_table, similarity_requests, ColumnNames, Locator, MatrixLocator, MeasureOptions, NetworkLocator, Table};

pub const BUNDLE_ENV: &str = "ODGEN_BUNDLE";

#[derive(Debug, Parser)]
#[command(name = "odgen", version, about = "Generate and measure on-demand transportation instances")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build or extend a network bundle
    #[command(subcommand)]
    Net(NetCommand),
    /// Generate instance replicas from a configuration file
    Generate(GenerateArgs),
    /// Report dynamism, urgency and geographic dispersion of an instance
    Measure(MeasureArgs),
    /// Compare two instances of the same size
    Similarity(SimilarityArgs),
    /// Generate one instance group per cell of a property grid
    Benchmark(BenchmarkArgs),
}

#[derive(Debug, Subcommand)]
pub enum NetCommand {
    /// Import a GraphML file, or a nodes CSV together with --edges
    Ingest(IngestArgs),
    /// Write a synthetic grid as both drive and walk network
    Synth(SynthArgs),
    /// Add bus stations (station_id,lon,lat), dropping duplicates
    Stations(StationsArgs),
    /// Add points of interest (lon,lat) indexed on a square grid
    Pois(PoisArgs),
}

#[derive(Debug, Args)]
pub struct BundleDir {
    /// Network bundle directory
    #[arg(long, env = BUNDLE_ENV)]
    pub bundle: PathBuf,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    pub input: PathBuf,
    #[arg(long, default_value = "drive")]
    pub kind: NetworkKind,
    #[arg(long)]
    pub edges: Option<PathBuf>,
    #[command(flatten)]
    pub dir: BundleDir,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub rows: usize,
    #[arg(long)]
    pub cols: usize,
    /// Arc length in meters
    #[arg(long)]
    pub spacing: f64,
    /// Drive maxspeed in m/s
    #[arg(long, default_value_t = 13.9)]
    pub maxspeed: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub lon: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub lat: f64,
    /// Also place a station on every k-th row and column
    #[arg(long)]
    pub stations_every: Option<usize>,
    #[command(flatten)]
    pub dir: BundleDir,
}

#[derive(Debug, Args)]
pub struct StationsArgs {
    pub input: PathBuf,
    #[command(flatten)]
    pub dir: BundleDir,
}

#[derive(Debug, Args)]
pub struct PoisArgs {
    pub input: PathBuf,
    /// Side of the counting cells in meters
    #[arg(long)]
    pub cell_size: f64,
    #[command(flatten)]
    pub dir: BundleDir,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    pub config: PathBuf,
    #[command(flatten)]
    pub dir: BundleDir,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

/// Travel times come from a bundle or from a matrix file.
#[derive(Debug, Args)]
pub struct TravelSource {
    /// Network bundle directory (defaults to $ODGEN_BUNDLE)
    #[arg(long, conflicts_with = "matrix")]
    pub bundle: Option<PathBuf>,
    /// Travel time matrix CSV whose labels appear in the location columns
    #[arg(long)]
    pub matrix: Option<PathBuf>,
    /// Arc speed factor applied to bundle networks
    #[arg(long, default_value_t = 1.0)]
    pub speed_factor: f64,
}

#[derive(Debug, Args)]
pub struct MeasureArgs {
    pub instance: PathBuf,
    #[command(flatten)]
    pub travel: TravelSource,
    #[arg(long, default_value_t = DEFAULT_TH_S)]
    pub th_s: f64,
    #[arg(long, default_value_t = DEFAULT_NEIGHBORS)]
    pub n: usize,
    /// Planning period start in seconds (else read from the instance meta file)
    #[arg(long, requires = "period_end")]
    pub period_start: Option<f64>,
    #[arg(long, requires = "period_start")]
    pub period_end: Option<f64>,
    /// Print key,value CSV instead of text
    #[arg(long)]
    pub csv: bool,
    #[command(flatten)]
    pub columns: ColumnNames,
}

#[derive(Debug, Args)]
pub struct SimilarityArgs {
    pub first: PathBuf,
    pub second: PathBuf,
    #[command(flatten)]
    pub travel: TravelSource,
    #[arg(long, default_value_t = 600.0)]
    pub th_tt: f64,
    #[arg(long, default_value_t = 600.0)]
    pub th_ts: f64,
    #[arg(long, default_value_t = 600.0)]
    pub th_e: f64,
    /// Write the matching as i,j,xi CSV here instead of stdout
    #[arg(long)]
    pub matching: Option<PathBuf>,
    #[command(flatten)]
    pub columns: ColumnNames,
}

#[derive(Debug, Args)]
pub struct BenchmarkArgs {
    pub template: PathBuf,
    /// JSON grid of sizes, dynamism levels, urgency levels and gd intervals
    #[arg(long)]
    pub grid: PathBuf,
    #[command(flatten)]
    pub dir: BundleDir,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

fn warn(msg: impl std::fmt::Display) {
    eprintln!("warning: {msg}");
}

/// Parses arguments and runs the command; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", format!("{e:#}").replace('\n', " "));
            1
        }
    }
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Net(NetCommand::Ingest(a)) => net_ingest(a),
        Command::Net(NetCommand::Synth(a)) => net_synth(a),
        Command::Net(NetCommand::Stations(a)) => net_stations(a),
        Command::Net(NetCommand::Pois(a)) => net_pois(a),
        Command::Generate(a) => generate(a),
        Command::Measure(a) => measure(a),
        Command::Similarity(a) => similarity(a),
        Command::Benchmark(a) => run_benchmark(a),
    }
}

fn net_ingest(a: IngestArgs) -> Result<()> {
    let net = match &a.edges {
        Some(edges) => load_csv_network(&a.input, edges, a.kind)?,
        None => load_network(&a.input, a.kind)?,
    };
    if net.defaulted_speeds > 0 {
        warn(format!(
            "{} arcs have no usable maxspeed; using {} m/s",
            net.defaulted_speeds,
            a.kind.default_speed()
        ));
    }
    save_network(&a.dir.bundle, &net)?;
    println!("{} network: {} nodes, {} arcs", a.kind, net.node_count(), net.arcs().len());
    Ok(())
}

fn net_synth(a: SynthArgs) -> Result<()> {
    let origin = Some(Coordinate::new(a.lon, a.lat));
    let drive = synth_grid_network(a.rows, a.cols, a.spacing, a.maxspeed, NetworkKind::Drive, origin)?;
    let walk = synth_grid_network(
        a.rows,
        a.cols,
        a.spacing,
        NetworkKind::Walk.default_speed(),
        NetworkKind::Walk,
        origin,
    )?;
    save_network(&a.dir.bundle, &drive)?;
    save_network(&a.dir.bundle, &walk)?;
    println!("grid: {} nodes, {} arcs", drive.node_count(), drive.arcs().len());
    if let Some(every) = a.stations_every {
        let (set, _) = dedupe_stations(synth_stations(&drive, a.cols, every), &drive, Some(&walk));
        write_stations_csv(&a.dir.bundle.join("stations.csv"), &set)?;
        println!("stations: {}", set.stations.len());
    }
    Ok(())
}

fn net_stations(a: StationsArgs) -> Result<()> {
    let dir = &a.dir.bundle;
    let drive = load_kind(dir, NetworkKind::Drive)?.context("bundle has no drive network")?;
    let walk = load_kind(dir, NetworkKind::Walk)?;
    let raw = load_stations_csv(&a.input)?;
    let total = raw.len();
    let (set, stats) = dedupe_stations(raw, &drive, walk.as_ref());
    write_stations_csv(&dir.join("stations.csv"), &set)?;
    println!(
        "stations: {} kept of {total} ({} duplicates, {} isolated)",
        set.stations.len(),
        stats.duplicates,
        stats.isolated
    );
    Ok(())
}

fn net_pois(a: PoisArgs) -> Result<()> {
    let dir = &a.dir.bundle;
    let drive = load_kind(dir, NetworkKind::Drive)?.context("bundle has no drive network")?;
    let pois = load_pois_csv(&a.input)?;
    let index = PoiIndex::build(&pois, drive.bounds(), a.cell_size)?;
    if index.dropped > 0 {
        warn(format!("{} POIs outside the network bounds ignored", index.dropped));
    }
    let inside: Vec<Coordinate> = pois.into_iter().filter(|p| drive.bounds().contains(*p)).collect();
    crate::network::poi::write_pois_csv(&dir.join("pois.csv"), &inside)?;
    let mut meta = load_meta(dir)?;
    meta.poi_cell_size = Some(a.cell_size);
    save_meta(dir, &meta)?;
    println!("pois: {} in {} cells", index.total(), index.zone_count());
    Ok(())
}

fn read_config(path: &Path) -> Result<InstanceConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let cfg = parse_config(&text).with_context(|| format!("{}", path.display()))?;
    for w in cfg.warnings() {
        warn(w);
    }
    Ok(cfg)
}

fn prepare_bundle(dir: &Path, cfg: &InstanceConfig) -> Result<Bundle> {
    let mut b = Bundle::load(dir)?;
    b.drive.compute_arc_travel_times(cfg.max_speed_factor, cfg.equal_speed)?;
    if let Some(w) = b.walk.as_mut() {
        w.compute_arc_travel_times(1.0, None)?;
    }
    Ok(b)
}

fn summary_line(instance: &Instance, bundle: &Bundle) -> String {
    let table = Table::from_instance(instance, &bundle.drive);
    let mut line = instance.name.clone();
    let Ok(locator) = NetworkLocator::new(&bundle.drive, &bundle.stations) else {
        return line;
    };
    let columns = ColumnNames::default();
    let opts = MeasureOptions {
        columns: &columns,
        period: instance.period,
        th_s: DEFAULT_TH_S,
        n: DEFAULT_NEIGHBORS,
    };
    let summary = measure_table(&table, &locator, &opts).map(|s| s.0).unwrap_or_default();
    let entries = summary.entries();
    for key in ["rho", "urgency_mean", "urgency_std", "gd"] {
        let v = entries.iter().find(|e| e.0 == key).map(|e| format!("{:.2}", display2(e.1)));
        line.push_str(&format!(" {key}={}", v.as_deref().unwrap_or("n/a")));
    }
    line
}

fn generate_into(cfg: &InstanceConfig, bundle: &Bundle, out: &Path, rename: Option<&str>) -> Result<()> {
    let vcfg = validate_config(cfg, &bundle.drive)?;
    let scenario = Scenario::new(&bundle.drive, bundle.walk.as_ref(), &bundle.stations, bundle.pois.as_ref())?;
    let mut instances = generate_replicas(&vcfg, &scenario)?;
    for inst in &mut instances {
        if let Some(group) = rename {
            inst.name = format!("{group}_{}", inst.replica);
        }
        write_instance(inst, &bundle.drive, out)?;
        if let Some(p) = &inst.dynamism {
            if !p.reached {
                warn(format!("{}: dynamism {:.3} short of target {}", inst.name, p.achieved, p.target));
            }
        }
        println!("{}", summary_line(inst, bundle));
    }
    Ok(())
}

fn generate(a: GenerateArgs) -> Result<()> {
    let cfg = read_config(&a.config)?;
    let bundle = prepare_bundle(&a.dir.bundle, &cfg)?;
    generate_into(&cfg, &bundle, &a.out, None)
}

fn run_benchmark(a: BenchmarkArgs) -> Result<()> {
    let template = read_config(&a.template)?;
    let text = fs::read_to_string(&a.grid).with_context(|| format!("reading {}", a.grid.display()))?;
    let grid: BenchmarkGrid = serde_json::from_str(&text).with_context(|| format!("{}", a.grid.display()))?;
    let groups = expand_grid(&template, &grid)?;
    if groups.is_empty() {
        return Ok(());
    }
    let bundle = prepare_bundle(&a.dir.bundle, &template)?;
    for (name, cfg) in &groups {
        generate_into(cfg, &bundle, &a.out.join(name), Some(name))?;
    }
    Ok(())
}

enum Travel {
    Bundle(Bundle),
    Matrix(MatrixLocator),
}

fn load_travel(src: &TravelSource) -> Result<Travel> {
    if let Some(m) = &src.matrix {
        return Ok(Travel::Matrix(MatrixLocator::read(m)?));
    }
    let dir = match &src.bundle {
        Some(d) => d.clone(),
        None => std::env::var_os(BUNDLE_ENV)
            .map(PathBuf::from)
            .context("need --bundle, --matrix or $ODGEN_BUNDLE")?,
    };
    let mut b = Bundle::load(&dir)?;
    b.drive.compute_arc_travel_times(src.speed_factor, None)?;
    Ok(Travel::Bundle(b))
}

fn with_locator<R>(travel: &Travel, f: impl FnOnce(&dyn Locator) -> Result<R>) -> Result<R> {
    match travel {
        Travel::Matrix(m) => f(m),
        Travel::Bundle(b) => f(&NetworkLocator::new(&b.drive, &b.stations)?),
    }
}

/// Planning period stored next to a generated instance.
fn meta_period(instance: &Path) -> Option<(f64, f64)> {
    let stem = instance.file_stem()?.to_str()?;
    let meta = instance.with_file_name(format!("{stem}_meta.json"));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(meta).ok()?).ok()?;
    let p = v.get("planning_period")?.as_array()?;
    Some((p.first()?.as_f64()?, p.get(1)?.as_f64()?))
}

fn measure(a: MeasureArgs) -> Result<()> {
    let table = Table::read(&a.instance)?;
    let period = match (a.period_start, a.period_end) {
        (Some(s), Some(e)) => Some((s, e)),
        _ => meta_period(&a.instance),
    };
    let travel = load_travel(&a.travel)?;
    let opts = MeasureOptions {
        columns: &a.columns,
        period,
        th_s: a.th_s,
        n: a.n,
    };
    let (summary, warnings): (MetricsSummary, Vec<String>) =
        with_locator(&travel, |loc| measure_table(&table, loc, &opts))?;
    for w in warnings {
        warn(w);
    }
    print!("{}", if a.csv { summary.to_csv() } else { summary.to_text() });
    Ok(())
}

fn similarity(a: SimilarityArgs) -> Result<()> {
    let first = Table::read(&a.first)?;
    let second = Table::read(&a.second)?;
    let th = SimilarityThresholds::new(a.th_tt, a.th_ts, a.th_e)?;
    let travel = load_travel(&a.travel)?;
    let result = with_locator(&travel, |loc| {
        let x = similarity_requests(&first, loc, &a.columns)?;
        let y = similarity_requests(&second, loc, &a.columns)?;
        let t = |u: usize, v: usize| loc.travel(u, v);
        Ok(instance_similarity(&x, &y, &th, &t)?)
    })?;
    println!("omega {:.2}", display2(result.omega));
    match &a.matching {
        Some(path) => fs::write(path, result.matching_csv()).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{}", result.matching_csv()),
    }
    if result.matching.is_empty() {
        bail!("empty matching");
    }
    Ok(())
}
