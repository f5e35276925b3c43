//! Command line front end.
//!
//! Every command needs a seed, writes JSON reports that embed the resolved
//! configuration, and exits with 0 when the checked condition holds on the
//! sample, 1 when it fails and 2 on configuration or usage errors.

mod example;

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::criteria::{
    check_hyper_minimal, check_local_hyper_minimal, check_overlap_number, invariant_hull_coverage, sample_rng,
    OverlapParams, SearchBudget, Strategy, VerifierReport,
};
use crate::error::{Error, Result};
use crate::geom::{ball_measure, sample_in_ball, sample_uniform, Ball, Manifold, Point};
use crate::ifs::{fiberwise_orbit, IfsSystem, Letter, Word};
use crate::zoo::{
    omega_construction, rotation_system, translation_system, CircleConfig, CircleOmega, SphereConfig, TorusConfig,
    TorusExample, TorusReturn,
};

/// Environment variable that overrides the configured output directory.
pub const OUT_DIR_ENV: &str = "HYPERIFS_OUT_DIR";
const DEFAULT_OUT_DIR: &str = "hyperifs-out";

#[derive(Debug, Parser)]
#[command(name = "hyperifs", version, about = "Iterated function systems and their hyperspace verifiers")]
pub struct Cli {
    /// Seed of every random choice; required here or in the config file.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// TOML file with [run], [circle], [torus], [sphere], [budget] and [overlap] sections.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory; overrides the environment and the config file.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample the overlap inequality on one manifold.
    VerifyOverlap(OverlapArgs),
    /// Sample pairs on the whole space and search for witness words.
    CheckHyperMinimal(HyperArgs),
    /// Sample pairs in a neighbourhood and search for witness words.
    CheckLocal(LocalArgs),
    /// Run the full property battery of an example and write a bundle.
    Example(ExampleArgs),
    /// Write an orbit as CSV.
    Orbit(OrbitArgs),
    /// Write the invariant-hull coverage per depth as CSV.
    Coverage(CoverageArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ExampleName {
    Circle,
    Torus,
    Sphere,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OverlapArgs {
    #[arg(long, default_value = "circle", value_parser = parse_manifold)]
    pub manifold: Manifold,
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long)]
    pub ell: Option<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0.01,0.02,0.05,0.1")]
    pub radii: Vec<f64>,
    #[arg(long, default_value_t = 250)]
    pub samples: usize,
    /// Monte Carlo samples for the cross-check of the first instance per radius.
    #[arg(long, default_value_t = 0)]
    pub mc_samples: usize,
}

/// Which system to run on: a named example or a rigid control.
#[derive(Debug, Clone, Args, Serialize)]
pub struct SystemArgs {
    #[arg(long, conflicts_with_all = ["rotations", "translations"])]
    pub example: Option<ExampleName>,
    /// Circle rotation angles, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub rotations: Option<Vec<f64>>,
    /// Torus translations as `a:b`, comma separated.
    #[arg(long, value_delimiter = ',', value_parser = parse_pair)]
    pub translations: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum StrategyName {
    /// The constructive rule of the example, else greedy.
    Auto,
    Greedy,
    Exhaustive,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct HyperArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    #[arg(long, default_value_t = 6.0)]
    pub theta: f64,
    #[arg(long, default_value_t = 100)]
    pub pairs: usize,
    /// Radius; several may be given, comma separated.
    #[arg(long = "r", value_delimiter = ',', default_value = "0.02")]
    pub radii: Vec<f64>,
    /// Radii must stay below this; defaults to the injectivity bound.
    #[arg(long)]
    pub r0: Option<f64>,
    #[arg(long, value_enum, default_value = "auto")]
    pub strategy: StrategyName,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct LocalArgs {
    #[command(flatten)]
    pub hyper: HyperArgs,
    /// Centre of the neighbourhood; the torus example defaults to the affine base.
    #[arg(long, value_delimiter = ',')]
    pub center: Option<Vec<f64>>,
    /// Radius of the neighbourhood; the torus example defaults to half the affine radius.
    #[arg(long)]
    pub radius: Option<f64>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ExampleArgs {
    #[arg(value_enum)]
    pub name: ExampleName,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Sequence {
    /// Uniformly random letters.
    Random,
    /// The letters in turn.
    Cycle,
    /// The inductive sequence of the circle example.
    Omega,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OrbitArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    /// Starting point; random when absent.
    #[arg(long, value_delimiter = ',')]
    pub start: Option<Vec<f64>>,
    #[arg(long, default_value_t = 1000)]
    pub steps: usize,
    #[arg(long, value_enum, default_value = "random")]
    pub sequence: Sequence,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CoverageArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    /// Centre of the initial ball; random when absent.
    #[arg(long, value_delimiter = ',')]
    pub center: Option<Vec<f64>>,
    /// Radius of the initial ball; by default its measure is `--measure`.
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long, default_value_t = 0.01)]
    pub measure: f64,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long, default_value_t = 5000)]
    pub max_depth: usize,
    #[arg(long, default_value_t = 20_000_000)]
    pub max_points: usize,
}

/// Contents of a config file. Absent sections take their defaults.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub run: RunSection,
    pub circle: CircleConfig,
    pub torus: TorusConfig,
    pub sphere: SphereConfig,
    pub budget: SearchBudget,
    pub overlap: OverlapParams,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
}

/// Fully resolved settings of one run. Everything except the output
/// directory is embedded in the reports.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub seed: u64,
    pub arguments: Value,
    pub circle: CircleConfig,
    pub torus: TorusConfig,
    pub sphere: SphereConfig,
    pub budget: SearchBudget,
    pub overlap: OverlapParams,
    #[serde(skip)]
    pub out_dir: PathBuf,
}

impl RunConfig {
    fn resolve(cli: &Cli, file: ConfigFile) -> Result<Self> {
        let Some(seed) = cli.seed.or(file.run.seed) else {
            return Err(Error::Input("a seed is required (--seed or [run] seed)".into()));
        };
        let out_dir = cli
            .out
            .clone()
            .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
            .or(file.run.out_dir)
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
        let (command, arguments) = match &cli.command {
            Command::VerifyOverlap(a) => ("verify-overlap", to_value(a)),
            Command::CheckHyperMinimal(a) => ("check-hyper-minimal", to_value(a)),
            Command::CheckLocal(a) => ("check-local", to_value(a)),
            Command::Example(a) => ("example", to_value(a)),
            Command::Orbit(a) => ("orbit", to_value(a)),
            Command::Coverage(a) => ("coverage", to_value(a)),
        };
        let mut overlap = file.overlap;
        if let Command::VerifyOverlap(a) = &cli.command {
            overlap.theta = a.theta.unwrap_or(overlap.theta);
            overlap.t = a.t.unwrap_or(overlap.t);
            overlap.ell = a.ell.unwrap_or(overlap.ell);
        }
        file.budget.validate()?;
        Ok(RunConfig {
            command: command.to_string(),
            seed,
            arguments,
            circle: file.circle,
            torus: file.torus,
            sphere: file.sphere,
            budget: file.budget,
            overlap,
            out_dir,
        })
    }

    /// Writes `{"config": …, "report": …}` as pretty JSON.
    fn write_json(&self, dir: &Path, name: &str, report: &impl Serialize) -> Result<PathBuf> {
        let doc = json!({ "config": self, "report": report });
        let text = serde_json::to_string_pretty(&doc).map_err(|e| Error::Input(format!("serialising report: {e}")))?;
        write_file(dir, name, (text + "\n").as_bytes())
    }

    fn write_report(&self, dir: &Path, stem: &str, rep: &VerifierReport) -> Result<()> {
        self.write_json(dir, &format!("{stem}.json"), rep)?;
        let mut buf = Vec::new();
        rep.write_csv(&mut buf)?;
        write_file(dir, &format!("{stem}.csv"), &buf)?;
        Ok(())
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("arguments serialise")
}

fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::Input(format!("{}: {e}", path.display()))
}

fn write_file(dir: &Path, name: &str, bytes: &[u8]) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let path = dir.join(name);
    fs::write(&path, bytes).map_err(|e| io_err(&path, e))?;
    Ok(path)
}

fn parse_manifold(s: &str) -> std::result::Result<Manifold, String> {
    Manifold::parse(s).ok_or_else(|| format!("unknown manifold `{s}` (circle, torus, sphere)"))
}

fn parse_pair(s: &str) -> std::result::Result<[f64; 2], String> {
    let (a, b) = s.split_once(':').ok_or_else(|| format!("expected `a:b`, got `{s}`"))?;
    let f = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("`{v}`: {e}"));
    Ok([f(a)?, f(b)?])
}

/// Outcome of a command: whether its condition held, and a summary line.
struct Outcome {
    holds: bool,
    summary: String,
}

/// A built system together with what the example-specific strategies need.
enum Built {
    Circle(IfsSystem<f64>),
    Torus(TorusExample<f64>),
    Plain(IfsSystem<f64>),
}

impl Built {
    fn system(&self) -> &IfsSystem<f64> {
        match self {
            Built::Circle(s) | Built::Plain(s) => s,
            Built::Torus(t) => &t.system,
        }
    }
}

fn build_system(args: &SystemArgs, cfg: &RunConfig) -> Result<Built> {
    match (args.example, &args.rotations, &args.translations) {
        (Some(ExampleName::Circle), None, None) => Ok(Built::Circle(cfg.circle.build()?)),
        (Some(ExampleName::Torus), None, None) => Ok(Built::Torus(cfg.torus.build()?)),
        (Some(ExampleName::Sphere), None, None) => Ok(Built::Plain(cfg.sphere.build()?)),
        (None, Some(b), None) => Ok(Built::Plain(rotation_system(b)?)),
        (None, None, Some(a)) => Ok(Built::Plain(translation_system(a)?)),
        _ => Err(Error::Input("choose exactly one of --example, --rotations or --translations".into())),
    }
}

fn point_arg(m: Manifold, coords: &[f64]) -> Result<Point<f64>> {
    Point::from_coords(m, coords)
}

/// Radius of a ball of measure `target`, by bisection on the exact ball measure.
pub fn radius_for_measure(m: Manifold, target: f64) -> Result<f64> {
    if !(target > 0.0 && target < ball_measure(m, 0.499)?) {
        return Err(Error::Input(format!("no ball of measure {target} below the injectivity bound")));
    }
    let (mut lo, mut hi) = (0.0, 0.499);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if ball_measure(m, mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

fn verify_overlap(cfg: &RunConfig, a: &OverlapArgs) -> Result<Outcome> {
    let rep = check_overlap_number(a.manifold, &cfg.overlap, &a.radii, a.samples, a.mc_samples, cfg.seed)?;
    cfg.write_report(&cfg.out_dir, "overlap", &rep)?;
    Ok(Outcome {
        holds: rep.aggregate.min_margin > 0.0,
        summary: format!("verify-overlap on {}: min relative margin {}", a.manifold, rep.aggregate.min_margin),
    })
}

fn hyper_summary(name: &str, rep: &VerifierReport) -> String {
    let failing: Vec<String> = rep.samples.iter().filter(|s| !s.found).map(|s| s.id.to_string()).collect();
    let mut s = format!("{name}: {}/{} pairs have witnesses", rep.aggregate.successes, rep.aggregate.samples);
    if !failing.is_empty() {
        s += &format!("; failing sample ids: {}", failing.join(" "));
    }
    s
}

fn check_hyper(cfg: &RunConfig, a: &HyperArgs) -> Result<Outcome> {
    let built = build_system(&a.system, cfg)?;
    let sys = built.system();
    let r0 = a.r0.unwrap_or(sys.manifold().injectivity_bound());
    let omega;
    let strategy = match (a.strategy, &built) {
        (StrategyName::Auto, Built::Circle(s)) => {
            omega = CircleOmega { system: s };
            Strategy::Custom(&omega)
        }
        (StrategyName::Auto, Built::Torus(_)) => {
            return Err(Error::Input(
                "the torus example is checked locally near its affine region; use check-local".into(),
            ))
        }
        (StrategyName::Exhaustive, _) => Strategy::Exhaustive,
        _ => Strategy::Greedy,
    };
    let rep = check_hyper_minimal(sys, a.theta, r0, a.pairs, &a.radii, &cfg.budget, &strategy, cfg.seed)?;
    cfg.write_report(&cfg.out_dir, "hyper_minimal", &rep)?;
    Ok(Outcome { holds: rep.holds(), summary: hyper_summary("check-hyper-minimal", &rep) })
}

fn check_local(cfg: &RunConfig, a: &LocalArgs) -> Result<Outcome> {
    let h = &a.hyper;
    let built = build_system(&h.system, cfg)?;
    let sys = built.system();
    let m = sys.manifold();
    let (center, radius) = match (&built, &a.center, a.radius) {
        (_, Some(c), Some(r)) => (point_arg(m, c)?, r),
        (Built::Torus(t), c, r) => {
            let region = t.affine_region();
            let center = match c {
                Some(c) => point_arg(m, c)?,
                None => region.center,
            };
            (center, r.unwrap_or(0.5 * region.radius))
        }
        _ => return Err(Error::Input("--center and --radius are required for this system".into())),
    };
    let u = Ball::new(center, radius)?;
    let r0 = h.r0.unwrap_or(m.injectivity_bound());
    let custom;
    let strategy = match (h.strategy, &built) {
        (StrategyName::Auto, Built::Circle(s)) => {
            custom = Box::new(CircleOmega { system: s }) as Box<dyn crate::criteria::WitnessConstructor<f64>>;
            Strategy::Custom(custom.as_ref())
        }
        (StrategyName::Auto, Built::Torus(t)) => {
            custom = Box::new(TorusReturn { example: t });
            Strategy::Custom(custom.as_ref())
        }
        (StrategyName::Exhaustive, _) => Strategy::Exhaustive,
        _ => Strategy::Greedy,
    };
    let sampler = move |rng: &mut rand_chacha::ChaCha8Rng| sample_in_ball(&u, rng);
    let rep =
        check_local_hyper_minimal(sys, &u, &sampler, h.theta, r0, h.pairs, &h.radii, &cfg.budget, &strategy, cfg.seed)?;
    cfg.write_report(&cfg.out_dir, "local_hyper_minimal", &rep)?;
    Ok(Outcome { holds: rep.holds(), summary: hyper_summary("check-local", &rep) })
}

fn orbit(cfg: &RunConfig, a: &OrbitArgs) -> Result<Outcome> {
    let built = build_system(&a.system, cfg)?;
    let sys = built.system();
    let m = sys.manifold();
    if a.steps == 0 {
        return Err(Error::Input("--steps must be positive".into()));
    }
    let mut rng = sample_rng(cfg.seed, 0);
    let start = match &a.start {
        Some(c) => point_arg(m, c)?,
        None => sample_uniform(m, &mut rng),
    };
    let seq: Vec<Letter> = match a.sequence {
        Sequence::Random => (0..a.steps).map(|_| Letter::forward(rng.gen_range(0..sys.len()))).collect(),
        Sequence::Cycle => (0..a.steps).map(|i| Letter::forward(i % sys.len())).collect(),
        Sequence::Omega => {
            let Built::Circle(s) = &built else {
                return Err(Error::Input("the omega sequence needs --example circle".into()));
            };
            omega_construction(s, &start, a.steps, 0.0)?.word.time_order().collect()
        }
    };
    let points = fiberwise_orbit(sys, &Word::from_time_order(seq.iter().copied()), &start)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    let axes = ["x", "y", "z"];
    let mut header = vec!["step", "letter"];
    header.extend(&axes[..start.coords().len()]);
    let csv_err = |e: csv::Error| Error::Input(format!("writing CSV: {e}"));
    w.write_record(&header).map_err(csv_err)?;
    for (i, (l, p)) in seq.iter().zip(&points).enumerate() {
        let mut row = vec![(i + 1).to_string(), l.signed().to_string()];
        row.extend(p.coords().iter().map(|c| c.to_string()));
        w.write_record(&row).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Input(format!("writing CSV: {e}")))?;
    write_file(&cfg.out_dir, "orbit.csv", &bytes)?;
    let meta = json!({ "system": sys.label(), "start": start.coords(), "rows": points.len() });
    cfg.write_json(&cfg.out_dir, "orbit.json", &meta)?;
    Ok(Outcome { holds: true, summary: format!("orbit: {} points written", points.len()) })
}

fn coverage(cfg: &RunConfig, a: &CoverageArgs) -> Result<Outcome> {
    let built = build_system(&a.system, cfg)?;
    let sys = built.system();
    let m = sys.manifold();
    let mut rng = sample_rng(cfg.seed, 0);
    let center = match &a.center {
        Some(c) => point_arg(m, c)?,
        None => sample_uniform(m, &mut rng),
    };
    let radius = match a.radius {
        Some(r) => r,
        None => radius_for_measure(m, a.measure)?,
    };
    let eps = a.eps.unwrap_or(if m == Manifold::Circle { 1e-3 } else { 1e-2 });
    let ball = Ball::new(center, radius)?;
    let cov = invariant_hull_coverage(sys, &ball, eps, a.max_depth, a.max_points)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::Input(format!("writing CSV: {e}"));
    w.write_record(["depth", "coverage"]).map_err(csv_err)?;
    for (d, c) in cov.coverage.iter().enumerate() {
        w.write_record([d.to_string(), c.to_string()]).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Input(format!("writing CSV: {e}")))?;
    write_file(&cfg.out_dir, "coverage.csv", &bytes)?;
    let meta = json!({
        "system": sys.label(),
        "center": center.coords(),
        "radius": radius,
        "eps": eps,
        "coverage": cov,
        "note": "necessary-condition probe for ergodicity; full coverage does not prove it",
    });
    cfg.write_json(&cfg.out_dir, "coverage.json", &meta)?;
    Ok(Outcome {
        holds: cov.last() >= 0.99,
        summary: format!("coverage: {} after {} depths", cov.last(), cov.coverage.len() - 1),
    })
}

fn dispatch(cli: &Cli) -> Result<Outcome> {
    let file = match &cli.config {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| io_err(p, e))?;
            toml::from_str(&text).map_err(|e| Error::Input(format!("{}: {e}", p.display())))?
        }
        None => ConfigFile::default(),
    };
    let cfg = RunConfig::resolve(cli, file)?;
    match &cli.command {
        Command::VerifyOverlap(a) => verify_overlap(&cfg, a),
        Command::CheckHyperMinimal(a) => check_hyper(&cfg, a),
        Command::CheckLocal(a) => check_local(&cfg, a),
        Command::Example(a) => example::run(&cfg, a.name),
        Command::Orbit(a) => orbit(&cfg, a),
        Command::Coverage(a) => coverage(&cfg, a),
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(&cli) {
        Ok(o) => {
            println!("{}", o.summary);
            if o.holds {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_in(dir: &Path, args: &[&str]) -> i32 {
        let mut v = vec!["hyperifs", "--out", dir.to_str().unwrap()];
        v.extend_from_slice(args);
        run(v)
    }

    #[test]
    fn overlap_exit_codes() {
        let dir = tempfile::tempdir().unwrap();
        let ok =
            ["verify-overlap", "--manifold", "circle", "--theta", "6", "--t", "0.1", "--ell", "0.8", "--seed", "1"];
        assert_eq!(run_in(dir.path(), &ok), 0);
        let text = fs::read_to_string(dir.path().join("overlap.json")).unwrap();
        let doc: Value = serde_json::from_str(&text).unwrap();
        let min = doc["report"]["aggregate"]["min_margin"].as_f64().unwrap();
        assert!((min - 1.0 / 15.0).abs() < 1e-9);
        assert_eq!(doc["config"]["overlap"]["t"], 0.1);
        let bad = ["verify-overlap", "--t", "0.5", "--ell", "0.99", "--seed", "1"];
        assert_eq!(run_in(dir.path(), &bad), 1);
        assert_eq!(run_in(dir.path(), &["verify-overlap"]), 2);
        assert_eq!(run_in(dir.path(), &["verify-overlap", "--seed", "1", "--theta", "0.5"]), 2);
        assert_eq!(run_in(dir.path(), &["no-such-command", "--seed", "1"]), 2);
    }

    #[test]
    fn config_file_supplies_seed_and_sections() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("run.toml");
        fs::write(&cfg, "[run]\nseed = 3\n[overlap]\nt = 0.05\n").unwrap();
        let code = run_in(dir.path(), &["--config", cfg.to_str().unwrap(), "verify-overlap", "--samples", "5"]);
        assert_eq!(code, 0);
        let doc: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("overlap.json")).unwrap()).unwrap();
        assert_eq!(doc["config"]["seed"], 3);
        assert_eq!(doc["config"]["overlap"]["t"], 0.05);
        fs::write(&cfg, "[run]\nseed = 3\n[circle]\nwidth = 1\n").unwrap();
        assert_eq!(run_in(dir.path(), &["--config", cfg.to_str().unwrap(), "verify-overlap"]), 2);
    }

    #[test]
    fn rotation_orbit_rows() {
        let dir = tempfile::tempdir().unwrap();
        let args = ["orbit", "--rotations", "0.1", "--start", "0.05", "--steps", "10", "--seed", "1"];
        assert_eq!(run_in(dir.path(), &args), 0);
        let text = fs::read_to_string(dir.path().join("orbit.csv")).unwrap();
        let mut rdr = csv::Reader::from_reader(text.as_bytes());
        let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
        assert_eq!(rows.len(), 10);
        for (i, row) in rows.iter().enumerate() {
            let x: f64 = row[2].parse().unwrap();
            let expected = (0.05 + (i + 1) as f64 * 0.1).rem_euclid(1.0);
            let d = (x - expected).abs();
            assert!(d.min(1.0 - d) < 1e-12, "{i}: {x} vs {expected}");
        }
    }

    #[test]
    fn full_space_coverage_is_one() {
        let dir = tempfile::tempdir().unwrap();
        let args =
            ["coverage", "--rotations", "0.1", "--center", "0.5", "--radius", "0.5", "--eps", "0.01", "--seed", "1"];
        assert_eq!(run_in(dir.path(), &args), 0);
        let text = fs::read_to_string(dir.path().join("coverage.csv")).unwrap();
        assert!(text.lines().skip(1).all(|l| l.ends_with(",1")), "{text}");
    }

    #[test]
    fn rational_rotation_fails_with_ids() {
        let dir = tempfile::tempdir().unwrap();
        let args = ["check-hyper-minimal", "--rotations", "0.25", "--pairs", "5", "--r", "0.02", "--seed", "2"];
        assert_eq!(run_in(dir.path(), &args), 1);
        let doc: Value =
            serde_json::from_str(&fs::read_to_string(dir.path().join("hyper_minimal.json")).unwrap()).unwrap();
        assert!(doc["report"]["aggregate"]["success_rate"].as_f64().unwrap() < 1.0);
    }

    #[test]
    fn radius_for_measure_inverts() {
        for m in [Manifold::Circle, Manifold::Torus2, Manifold::Sphere2] {
            let r = radius_for_measure(m, 0.01).unwrap();
            assert!((ball_measure(m, r).unwrap() - 0.01).abs() < 1e-12);
        }
        assert!(radius_for_measure(Manifold::Circle, 1.5).is_err());
    }
}
