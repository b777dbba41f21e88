//! Batch front end: `ingest`, `estimate`, `compare`, `backbone`, `curve`
//! and `simulate`. Every command writes its outputs atomically into
//! `--out` together with `<command>.provenance.json`.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::backbone::{backbone_with_edge_count, density, density_matched_backbone, symmetrize};
use crate::error::{Error, ErrorClass, Result};
use crate::estimate::{build_detection_grid, weighted_network, DetectionGrid, Universe, WeightMode};
use crate::export::{
    activity_rows, parse_matrix, write_activity, write_curve, write_edge_list, write_graphml,
    write_matrix, ActivityRow, Provenance,
};
use crate::ingest::{
    activity_timelines, compute_activity, parse_name_map, parse_roster, parse_scan_log,
    parse_survey, write_roster, write_scan_log, NameMap, Rejection,
};
use crate::model::{
    ActivityTimeline, Adjacency, BinaryNetwork, ContingencyTable, GridSpec, MantelResult, Roster,
    ScanEvent, Source, TableStats, TimeGrid,
};
use crate::sim::{simulate, SimConfig};
use crate::stats::{
    contingency, derive_seed, edge_match_count, mantel_with_ci, resampling_curve, table_stats,
    CoactiveRule, EdgeMatch, PairedTimelines, Reference, DEFAULT_BOOTSTRAP, DEFAULT_PERMUTATIONS,
};

impl ErrorClass {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorClass::Io => 1,
            ErrorClass::Config => 2,
            ErrorClass::Parse => 3,
            ErrorClass::Statistics => 4,
        }
    }
}

#[derive(Debug, Parser, Serialize)]
#[command(name = "proxnet", version, about = "Proximity networks from scan logs")]
pub struct Cli {
    /// Office-hours grid as JSON (defaults to the four-week study grid).
    #[arg(long, global = true)]
    pub grid: Option<PathBuf>,
    /// Seed for randomized commands (compare, curve, simulate).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Parse raw logs into a normalized store with an activity report.
    Ingest(IngestArgs),
    /// Weighted network of one source from a store.
    Estimate(EstimateArgs),
    /// Correlate networks and cross-tabulate sources.
    Compare(CompareArgs),
    /// Disparity-filter backbone at a survey's or given density.
    Backbone(BackboneArgs),
    /// Correlation against references as a function of sample size.
    Curve(CurveArgs),
    /// Generate synthetic logs with a known ground truth.
    Simulate(SimulateArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Ingest(_) => "ingest",
            Command::Estimate(_) => "estimate",
            Command::Compare(_) => "compare",
            Command::Backbone(_) => "backbone",
            Command::Curve(_) => "curve",
            Command::Simulate(_) => "simulate",
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct IngestArgs {
    #[arg(long)]
    pub roster: PathBuf,
    /// App scan log (CSV or JSON lines).
    #[arg(long)]
    pub app: Option<PathBuf>,
    /// Badge scan log (CSV or JSON lines).
    #[arg(long)]
    pub badge: Option<PathBuf>,
    /// Fill inactive runs of at most this many bins between active bins.
    #[arg(long, default_value_t = 0)]
    pub gap_tolerance: usize,
    /// Skip malformed rows (listed in the report) instead of failing.
    #[arg(long)]
    pub lenient: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceArg {
    App,
    Badge,
}

impl From<SourceArg> for Source {
    fn from(s: SourceArg) -> Source {
        match s {
            SourceArg::App => Source::App,
            SourceArg::Badge => Source::Badge,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct EstimateArgs {
    /// Directory written by `ingest`.
    #[arg(long)]
    pub store: PathBuf,
    #[arg(long, value_enum)]
    pub source: SourceArg,
    /// scan_normalized or time_fraction.
    #[arg(long, default_value = "time_fraction")]
    pub mode: WeightMode,
    /// all, coactive or sampled.
    #[arg(long, default_value = "all")]
    pub universe: Universe,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleArg {
    AllFour,
    AppPair,
}

#[derive(Debug, Args, Serialize)]
pub struct CompareArgs {
    /// First weighted matrix (e.g. app).
    #[arg(long)]
    pub a: PathBuf,
    /// Second weighted matrix (e.g. badge or ground truth).
    #[arg(long)]
    pub b: PathBuf,
    /// Survey nominations; adds correlations and density-matched edge matches.
    #[arg(long)]
    pub survey: Option<PathBuf>,
    /// `name,participant` aliases for survey names.
    #[arg(long)]
    pub names: Option<PathBuf>,
    /// Store with both sources; adds the app-by-badge contingency table.
    #[arg(long)]
    pub store: Option<PathBuf>,
    #[arg(long, default_value = "all")]
    pub universe: Universe,
    #[arg(long, value_enum, default_value = "all-four")]
    pub coactive_rule: RuleArg,
    /// Density for matching backbones when no survey is given.
    #[arg(long)]
    pub density: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_PERMUTATIONS)]
    pub permutations: usize,
    #[arg(long, default_value_t = DEFAULT_BOOTSTRAP)]
    pub bootstrap: usize,
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct BackboneArgs {
    #[arg(long)]
    pub matrix: PathBuf,
    /// Match the density of this survey's symmetrized network.
    #[arg(long, conflicts_with = "density", required_unless_present = "density")]
    pub survey: Option<PathBuf>,
    #[arg(long)]
    pub names: Option<PathBuf>,
    /// Explicit target density in (0, 1].
    #[arg(long)]
    pub density: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct CurveArgs {
    #[arg(long)]
    pub store: PathBuf,
    #[arg(long, value_enum, default_value = "app")]
    pub source: SourceArg,
    /// Scan-bins drawn per participant, ascending.
    #[arg(long, value_delimiter = ',', required = true)]
    pub samples: Vec<usize>,
    #[arg(long, default_value_t = 1000)]
    pub repeats: usize,
    /// `label=matrix.csv` weighted reference.
    #[arg(long = "reference")]
    pub references: Vec<String>,
    /// `label=survey.csv` nomination reference (symmetrized).
    #[arg(long = "survey-reference")]
    pub survey_references: Vec<String>,
    #[arg(long)]
    pub names: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    FieldStudy,
    Noiseless,
}

#[derive(Debug, Args, Serialize)]
pub struct SimulateArgs {
    /// Simulator configuration JSON; overrides the preset.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "field-study")]
    pub preset: Preset,
    /// Cohort size for the noiseless preset.
    #[arg(long, default_value_t = 21)]
    pub participants: usize,
}

/// Layout of an ingest store directory.
pub mod store {
    pub const META: &str = "store.json";
    pub const ROSTER: &str = "roster.csv";
    pub const ACTIVITY: &str = "activity.csv";
    pub const REPORT: &str = "ingest_report.json";

    pub fn events(source: crate::model::Source) -> String {
        format!("{source}_events.csv")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoreMeta {
    pub grid: GridSpec,
    pub gap_tolerance: usize,
    pub sources: Vec<Source>,
}

/// A normalized event store as written by `ingest`.
#[derive(Debug, Clone)]
pub struct Store {
    pub dir: PathBuf,
    pub meta: StoreMeta,
    pub grid: TimeGrid,
    pub roster: Roster,
}

impl Store {
    pub fn open(dir: &Path) -> Result<Self> {
        let meta_path = dir.join(store::META);
        let bytes = fs::read(&meta_path).map_err(|e| Error::io(&meta_path, e))?;
        let meta: StoreMeta = serde_json::from_slice(&bytes)?;
        let grid = TimeGrid::new(meta.grid.clone())?;
        let roster = parse_roster(dir.join(store::ROSTER))?;
        Ok(Store {
            dir: dir.to_path_buf(),
            meta,
            grid,
            roster,
        })
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn events(&self, source: Source) -> Result<Vec<ScanEvent>> {
        if !self.meta.sources.contains(&source) {
            return Err(Error::Config(format!(
                "store {} has no {source} log",
                self.dir.display()
            )));
        }
        Ok(parse_scan_log(self.path(&store::events(source)), source)?
            .into_strict()?
            .events)
    }

    pub fn detection_grid(&self, source: Source) -> Result<DetectionGrid> {
        build_detection_grid(&self.events(source)?, &self.grid, &self.roster, source)
    }

    pub fn timelines(&self, source: Source) -> Result<Vec<ActivityTimeline>> {
        activity_timelines(
            &self.events(source)?,
            &self.grid,
            &self.roster,
            source,
            self.meta.gap_tolerance,
        )
    }

    fn input_files(&self, sources: &[Source]) -> Vec<PathBuf> {
        let mut v = vec![self.path(store::META), self.path(store::ROSTER)];
        v.extend(sources.iter().map(|&s| self.path(&store::events(s))));
        v
    }
}

/// Collects outputs, then writes them and the provenance record.
struct Outputs {
    dir: PathBuf,
    files: Vec<(String, Vec<u8>)>,
    provenance: Provenance,
}

impl Outputs {
    fn new(cli: &Cli, args: Vec<String>) -> Result<Self> {
        Ok(Outputs {
            dir: cli.out.clone(),
            files: Vec::new(),
            provenance: Provenance::new(
                cli.command.name(),
                args,
                cli.seed,
                serde_json::to_value(cli)?,
            ),
        })
    }

    fn input(&mut self, path: &Path) -> Result<()> {
        self.provenance.add_input(path)
    }

    fn add(&mut self, name: impl Into<String>, render: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<()> {
        let mut buf = Vec::new();
        render(&mut buf)?;
        self.files.push((name.into(), buf));
        Ok(())
    }

    fn add_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        self.add(name, |buf| {
            serde_json::to_writer_pretty(&mut *buf, value)?;
            buf.push(b'\n');
            Ok(())
        })
    }

    fn commit(mut self, command: &str) -> Result<()> {
        for (name, bytes) in &self.files {
            crate::export::write_atomic(&self.dir.join(name), bytes)?;
            self.provenance.add_output(name, bytes);
        }
        self.provenance
            .write(&self.dir.join(format!("{command}.provenance.json")))
    }
}

fn load_grid(cli: &Cli) -> Result<TimeGrid> {
    match &cli.grid {
        None => TimeGrid::new(GridSpec::study()),
        Some(p) => {
            let bytes = fs::read(p).map_err(|e| Error::io(p, e))?;
            let spec: GridSpec = serde_json::from_slice(&bytes)
                .map_err(|e| Error::Config(format!("{}: {e}", p.display())))?;
            TimeGrid::new(spec)
        }
    }
}

fn require_seed(cli: &Cli) -> Result<u64> {
    cli.seed.ok_or_else(|| {
        Error::Config(format!("`{}` is randomized and requires --seed", cli.command.name()))
    })
}

fn load_names(path: &Option<PathBuf>, out: &mut Outputs) -> Result<NameMap> {
    match path {
        Some(p) => {
            out.input(p)?;
            parse_name_map(p)
        }
        None => Ok(NameMap::new()),
    }
}

#[derive(Debug, Serialize)]
struct SourceReport {
    source: Source,
    input: String,
    events: usize,
    duplicates: usize,
    rejections: Vec<Rejection>,
}

fn cmd_ingest(cli: &Cli, a: &IngestArgs, out: &mut Outputs) -> Result<()> {
    let grid = load_grid(cli)?;
    out.input(&a.roster)?;
    let roster = parse_roster(&a.roster)?;
    let mut reports = Vec::new();
    let mut activity: Vec<ActivityRow> = Vec::new();
    let mut sources = Vec::new();
    for (source, path) in [(Source::App, &a.app), (Source::Badge, &a.badge)] {
        let Some(path) = path else { continue };
        out.input(path)?;
        let mut parsed = parse_scan_log(path, source)?;
        if !a.lenient {
            parsed = parsed.into_strict()?;
        }
        let events = parsed.events;
        out.add(store::events(source), |buf| write_scan_log(buf, &events))?;
        // Participants without a device on this source are left out of the report.
        let timelines: Vec<(usize, ActivityTimeline)> = roster
            .participants()
            .iter()
            .enumerate()
            .filter_map(|(i, p)| {
                p.device(source)
                    .map(|d| (i, compute_activity(d, &events, &events, &grid, a.gap_tolerance)))
            })
            .collect();
        let sub = Roster::new(
            timelines
                .iter()
                .map(|(i, _)| roster.participants()[*i].clone())
                .collect(),
        )?;
        let tl: Vec<ActivityTimeline> = timelines.into_iter().map(|(_, t)| t).collect();
        activity.extend(activity_rows(&sub, source.as_str(), &tl));
        reports.push(SourceReport {
            source,
            input: path.display().to_string(),
            events: events.len(),
            duplicates: parsed.duplicates,
            rejections: parsed.rejections,
        });
        sources.push(source);
    }
    out.add(store::ROSTER, |buf| write_roster(buf, &roster))?;
    out.add(store::ACTIVITY, |buf| write_activity(buf, &activity))?;
    out.add_json(
        store::META,
        &StoreMeta {
            grid: grid.spec().clone(),
            gap_tolerance: a.gap_tolerance,
            sources,
        },
    )?;
    out.add_json(store::REPORT, &reports)
}

fn cmd_estimate(a: &EstimateArgs, out: &mut Outputs) -> Result<()> {
    let st = Store::open(&a.store)?;
    let source: Source = a.source.into();
    for p in st.input_files(&[source]) {
        out.input(&p)?;
    }
    let grid = st.detection_grid(source)?;
    let timelines = match a.universe {
        Universe::CoactiveBins => Some(st.timelines(source)?),
        _ => None,
    };
    let w = weighted_network(&grid, timelines.as_deref(), a.mode, a.universe)?;
    out.add(format!("{source}_weights.csv"), |buf| write_matrix(buf, &w))
}

#[derive(Debug, Serialize)]
struct ContingencyReport {
    universe: Universe,
    coactive_rule: Option<CoactiveRule>,
    table: ContingencyTable,
    stats: TableStats,
}

#[derive(Debug, Serialize)]
struct SurveyReport {
    respondents: usize,
    nominations: usize,
    edges: usize,
    density: f64,
    warnings: Vec<String>,
    mantel_a: MantelResult,
    mantel_b: MantelResult,
}

#[derive(Debug, Serialize)]
struct EdgeMatchReport {
    target_density: f64,
    edges: usize,
    a_vs_survey: Option<EdgeMatch>,
    b_vs_survey: Option<EdgeMatch>,
    a_vs_b: EdgeMatch,
}

#[derive(Debug, Serialize)]
struct CompareReport {
    a: String,
    b: String,
    participants: usize,
    density_a: f64,
    density_b: f64,
    mantel: MantelResult,
    survey: Option<SurveyReport>,
    edge_match: Option<EdgeMatchReport>,
    contingency: Option<ContingencyReport>,
}

fn cmd_compare(cli: &Cli, a: &CompareArgs, out: &mut Outputs) -> Result<()> {
    let seed = require_seed(cli)?;
    out.input(&a.a)?;
    out.input(&a.b)?;
    let wa = parse_matrix(&a.a)?;
    let wb = parse_matrix(&a.b)?;
    let mantel = |x: &dyn Adjacency, y: &dyn Adjacency, k: u64| {
        mantel_with_ci(x, y, a.permutations, a.bootstrap, a.level, derive_seed(seed, &[k]))
    };
    let main = mantel(&wa, &wb, 0)?;

    let names = load_names(&a.names, out)?;
    let mut survey_net: Option<BinaryNetwork> = None;
    let survey = match &a.survey {
        Some(p) => {
            out.input(p)?;
            let parsed = parse_survey(p, wa.roster(), &names)?;
            let sym = symmetrize(&parsed.network);
            let report = SurveyReport {
                respondents: parsed.responses.len(),
                nominations: parsed.responses.iter().map(|r| r.nominees.len()).sum(),
                edges: sym.edge_count(),
                density: density(&sym),
                warnings: parsed
                    .warnings
                    .iter()
                    .map(|w| format!("line {}: {}", w.line, w.message))
                    .collect(),
                mantel_a: mantel(&wa, &sym, 1)?,
                mantel_b: mantel(&wb, &sym, 2)?,
            };
            survey_net = Some(sym);
            Some(report)
        }
        None => None,
    };

    let target = survey.as_ref().map(|s| s.density).or(a.density);
    let edge_match = match target {
        Some(t) => {
            let ba = density_matched_backbone(&wa, t)?;
            let bb = density_matched_backbone(&wb, t)?;
            let vs = |b: &BinaryNetwork| survey_net.as_ref().map(|s| edge_match_count(b, s)).transpose();
            Some(EdgeMatchReport {
                target_density: t,
                edges: ba.network.edge_count(),
                a_vs_survey: vs(&ba.network)?,
                b_vs_survey: vs(&bb.network)?,
                a_vs_b: edge_match_count(&ba.network, &bb.network)?,
            })
        }
        None => None,
    };

    let contingency = match &a.store {
        Some(dir) => {
            let st = Store::open(dir)?;
            for p in st.input_files(&[Source::App, Source::Badge]) {
                out.input(&p)?;
            }
            let ga = st.detection_grid(Source::App)?;
            let gb = st.detection_grid(Source::Badge)?;
            let rule = match a.coactive_rule {
                RuleArg::AllFour => CoactiveRule::AllFour,
                RuleArg::AppPair => CoactiveRule::SourceAPair,
            };
            let (ta, tb);
            let paired = if a.universe == Universe::CoactiveBins {
                ta = st.timelines(Source::App)?;
                tb = st.timelines(Source::Badge)?;
                Some(PairedTimelines { a: &ta, b: &tb, rule })
            } else {
                None
            };
            let table = contingency(&ga, &gb, a.universe, paired)?;
            Some(ContingencyReport {
                universe: a.universe,
                coactive_rule: paired.map(|p| p.rule),
                table,
                stats: table_stats(&table)?,
            })
        }
        None => None,
    };

    let report = CompareReport {
        a: a.a.display().to_string(),
        b: a.b.display().to_string(),
        participants: wa.n(),
        density_a: density(&wa),
        density_b: density(&wb),
        mantel: main,
        survey,
        edge_match,
        contingency,
    };
    out.add_json("stats.json", &report)
}

fn cmd_backbone(a: &BackboneArgs, out: &mut Outputs) -> Result<()> {
    out.input(&a.matrix)?;
    let w = parse_matrix(&a.matrix)?;
    let names = load_names(&a.names, out)?;
    let backbone = match (&a.survey, a.density) {
        (Some(p), _) => {
            out.input(p)?;
            let sym = symmetrize(&parse_survey(p, w.roster(), &names)?.network);
            out.add("survey.graphml", |buf| write_graphml(buf, &sym, None))?;
            backbone_with_edge_count(&w, sym.edge_count())?
        }
        (None, Some(d)) => density_matched_backbone(&w, d)?,
        (None, None) => return Err(Error::Config("backbone needs --survey or --density".into())),
    };
    out.add("backbone.csv", |buf| write_edge_list(buf, w.roster(), &backbone))?;
    out.add("backbone.graphml", |buf| write_graphml(buf, &backbone.network, Some(&w)))
}

fn split_label(spec: &str) -> Result<(&str, &Path)> {
    spec.split_once('=')
        .filter(|(l, p)| !l.is_empty() && !p.is_empty())
        .map(|(l, p)| (l, Path::new(p)))
        .ok_or_else(|| Error::Config(format!("reference {spec:?} is not label=path")))
}

fn cmd_curve(cli: &Cli, a: &CurveArgs, out: &mut Outputs) -> Result<()> {
    let seed = require_seed(cli)?;
    let st = Store::open(&a.store)?;
    let source: Source = a.source.into();
    for p in st.input_files(&[source]) {
        out.input(&p)?;
    }
    let grid = st.detection_grid(source)?;
    let names = load_names(&a.names, out)?;
    let mut owned: Vec<(String, Box<dyn Adjacency>)> = Vec::new();
    for spec in &a.references {
        let (label, path) = split_label(spec)?;
        out.input(path)?;
        owned.push((label.to_string(), Box::new(parse_matrix(path)?)));
    }
    for spec in &a.survey_references {
        let (label, path) = split_label(spec)?;
        out.input(path)?;
        let survey = parse_survey(path, &st.roster.names(), &names)?;
        owned.push((label.to_string(), Box::new(symmetrize(&survey.network))));
    }
    if owned.is_empty() {
        return Err(Error::Config("curve needs at least one reference".into()));
    }
    let refs: Vec<Reference<'_>> = owned
        .iter()
        .map(|(label, net)| Reference {
            label: label.clone(),
            network: net.as_ref(),
        })
        .collect();
    let curve = resampling_curve(&grid, &refs, &a.samples, a.repeats, seed)?;
    out.add("curve.csv", |buf| write_curve(buf, &curve))
}

fn cmd_simulate(cli: &Cli, a: &SimulateArgs, out: &mut Outputs) -> Result<()> {
    let seed = require_seed(cli)?;
    let mut config = match &a.config {
        Some(p) => {
            out.input(p)?;
            let bytes = fs::read(p).map_err(|e| Error::io(p, e))?;
            serde_json::from_slice::<SimConfig>(&bytes)
                .map_err(|e| Error::Config(format!("{}: {e}", p.display())))?
        }
        None => match a.preset {
            Preset::FieldStudy => SimConfig::field_study(seed),
            Preset::Noiseless => SimConfig::noiseless(a.participants, GridSpec::study(), seed),
        },
    };
    config.seed = seed;
    if cli.grid.is_some() {
        config.grid = load_grid(cli)?.spec().clone();
    }
    let sim = simulate(&config)?;
    out.add("roster.csv", |buf| write_roster(buf, &sim.roster))?;
    out.add("app_log.csv", |buf| write_scan_log(buf, &sim.app_log))?;
    out.add("badge_log.csv", |buf| write_scan_log(buf, &sim.badge_log))?;
    out.add("truth.csv", |buf| write_matrix(buf, &sim.truth.true_weights))?;
    out.add_json("sim_config.json", &config)?;
    out.provenance.config = serde_json::json!({ "cli": out.provenance.config, "simulation": config });
    Ok(())
}

/// Parse arguments and run one command.
pub fn run(cli: &Cli, args: Vec<String>) -> Result<()> {
    let mut out = Outputs::new(cli, args)?;
    match &cli.command {
        Command::Ingest(a) => cmd_ingest(cli, a, &mut out)?,
        Command::Estimate(a) => cmd_estimate(a, &mut out)?,
        Command::Compare(a) => cmd_compare(cli, a, &mut out)?,
        Command::Backbone(a) => cmd_backbone(a, &mut out)?,
        Command::Curve(a) => cmd_curve(cli, a, &mut out)?,
        Command::Simulate(a) => cmd_simulate(cli, a, &mut out)?,
    }
    out.commit(cli.command.name())
}

/// Entry point for the binary; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { ErrorClass::Config.exit_code() } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let recorded = args
        .iter()
        .skip(1)
        .map(|a| a.to_string_lossy().into_owned())
        .collect();
    match run(&cli, recorded) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("proxnet: {e}");
            e.class().exit_code()
        }
    }
}
