//! The `spde` command-line tool.
//!
//! ```text
//! spde coercivity check --coeffs c.json --p 4 --mode pdep
//! spde coercivity sweep --coeffs c.json --p-min 2 --p-max 10 --steps 81 --out sweep.csv
//! spde simulate --config cfg.json --out ens/
//! spde sharpness --m 2 --mu 1.0 --p 4 --t-grid 0:4:0.25 --paths 1000,10000 --seed 1 --out sharp.csv
//! spde schauder-probe --config cfg.json --delta 0.5 --p 2 --out probe.csv
//! ```
//!
//! Exit status is 0 on success, 2 for invalid input and 1 for I/O failures.
//! Every file is written to a temporary sibling and renamed into place.

use std::ffi::OsString;
use std::fmt;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::coercivity::{self, Mode};
use crate::holder::{self, Region};
use crate::moments;
use crate::simulate::{self, InitialCondition, LinearModel, SimulationSettings, TimeGrid};
use crate::{CoefficientSet, SpectralField};

const DEFAULT_SEED: u64 = 0;
const DEFAULT_SNAPSHOTS: usize = 16;

#[derive(Parser, Debug)]
#[command(
    name = "spde",
    version,
    about = "Spectral experiments for higher-order parabolic SPDEs on the torus"
)]
struct Cli {
    /// Master seed; overrides any seed in a config file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (results do not depend on this).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output file, or directory for `simulate`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Suppress progress messages on stderr.
    #[arg(long, global = true)]
    quiet: bool,
    /// Also write a gnuplot script next to the CSV output.
    #[arg(long, global = true)]
    gnuplot_stub: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Decide the coercivity condition for a coefficient set.
    #[command(subcommand)]
    Coercivity(CoercivityCommand),
    /// Simulate an ensemble and write one CSV per snapshot.
    Simulate(SimulateArgs),
    /// Finiteness verdicts, closed forms and Monte Carlo moments for the model example.
    Sharpness(SharpnessArgs),
    /// Estimate the Schauder ratio of a simulated solution.
    SchauderProbe(ProbeArgs),
}

#[derive(Subcommand, Debug)]
enum CoercivityCommand {
    Check(CheckArgs),
    Sweep(SweepArgs),
}

#[derive(Args, Debug)]
struct CheckArgs {
    #[arg(long)]
    coeffs: PathBuf,
    #[arg(long)]
    p: f64,
    #[arg(long, default_value = "pdep", value_parser = parse_mode)]
    mode: Mode,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long)]
    coeffs: PathBuf,
    #[arg(long, default_value_t = 2.0)]
    p_min: f64,
    #[arg(long, default_value_t = 10.0)]
    p_max: f64,
    #[arg(long, default_value_t = 81)]
    steps: usize,
    #[arg(long, default_value = "pdep", value_parser = parse_mode)]
    mode: Mode,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(long)]
    config: PathBuf,
}

#[derive(Args, Debug)]
struct SharpnessArgs {
    #[arg(long)]
    m: u32,
    #[arg(long)]
    mu: f64,
    #[arg(long)]
    p: f64,
    /// `start:stop:step`, both ends included when the step divides the range.
    #[arg(long)]
    t_grid: String,
    /// Comma-separated path counts; smaller counts reuse the first paths.
    #[arg(long, default_value = "1000")]
    paths: String,
    /// Fourier truncation N.
    #[arg(long, default_value_t = simulate::DEFAULT_TRUNCATION)]
    truncation: usize,
}

#[derive(Args, Debug)]
struct ProbeArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    delta: f64,
    #[arg(long, default_value_t = 2.0)]
    p: f64,
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    s.parse().map_err(|e: crate::Error| e.to_string())
}

#[derive(Debug)]
enum CliError {
    Invalid(String),
    Runtime(String),
}

impl CliError {
    fn invalid(msg: impl Into<String>) -> Self {
        CliError::Invalid(msg.into())
    }

    fn field(name: &str, reason: impl fmt::Display) -> Self {
        CliError::Invalid(format!("invalid config field `{name}`: {reason}"))
    }

    fn exit_code(&self) -> i32 {
        match self {
            CliError::Invalid(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Invalid(m) | CliError::Runtime(m) => f.write_str(m),
        }
    }
}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        CliError::Invalid(e.to_string())
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

type CliResult<T> = Result<T, CliError>;

/// Parses `args` (program name first), runs the command and returns the exit
/// status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: &Cli) -> CliResult<()> {
    match cli.threads {
        Some(0) => Err(CliError::invalid("--threads must be at least 1")),
        #[cfg(feature = "parallel")]
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Runtime(e.to_string()))?;
            pool.install(|| dispatch(cli))
        }
        _ => dispatch(cli),
    }
}

fn dispatch(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Coercivity(CoercivityCommand::Check(a)) => check(cli, a),
        Command::Coercivity(CoercivityCommand::Sweep(a)) => sweep(cli, a),
        Command::Simulate(a) => simulate_cmd(cli, a),
        Command::Sharpness(a) => sharpness(cli, a),
        Command::SchauderProbe(a) => probe(cli, a),
    }
}

fn required_out(cli: &Cli) -> CliResult<&Path> {
    cli.out
        .as_deref()
        .ok_or_else(|| CliError::invalid("missing required option --out"))
}

fn note(cli: &Cli, msg: impl fmt::Display) {
    if !cli.quiet {
        eprintln!("{msg}");
    }
}

fn read_input(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::invalid(format!("cannot read {}: {e}", path.display())))
}

fn load_coefficients(path: &Path) -> CliResult<CoefficientSet> {
    CoefficientSet::from_json(&read_input(path)?).map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))
}

/// Writes through a temporary file in the target directory, then renames.
fn write_atomic(path: &Path, body: impl FnOnce(&mut dyn Write) -> CliResult<()>) -> CliResult<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    {
        let mut w = BufWriter::new(tmp.as_file_mut());
        body(&mut w)?;
        w.flush()?;
    }
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        tmp.as_file().set_permissions(fs::Permissions::from_mode(0o644))?;
    }
    tmp.persist(path).map_err(|e| CliError::from(e.error))?;
    Ok(())
}

fn write_csv<R: Serialize>(path: &Path, rows: &[R]) -> CliResult<()> {
    write_atomic(path, |w| {
        let mut out = csv::Writer::from_writer(w);
        for row in rows {
            out.serialize(row)?;
        }
        out.flush()?;
        Ok(())
    })
}

fn write_json(path: &Path, value: &Value) -> CliResult<()> {
    write_atomic(path, |w| {
        serde_json::to_writer_pretty(&mut *w, value)?;
        w.write_all(b"\n")?;
        Ok(())
    })
}

/// `sharp.csv` → `sharp.manifest.json`.
fn manifest_path(out: &Path) -> PathBuf {
    out.with_extension("manifest.json")
}

fn manifest(command: &str, seed: u64, config: Value, outputs: &[&Path], results: Value) -> Value {
    let outputs: Vec<String> = outputs
        .iter()
        .map(|p| {
            p.file_name()
                .map_or_else(String::new, |n| n.to_string_lossy().into_owned())
        })
        .collect();
    json!({
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "seed": seed,
        "config": config,
        "outputs": outputs,
        "results": results,
    })
}

fn write_gnuplot(cli: &Cli, out: &Path, script: String) -> CliResult<()> {
    if !cli.gnuplot_stub {
        return Ok(());
    }
    let path = out.with_extension("gp");
    write_atomic(&path, |w| Ok(w.write_all(script.as_bytes())?))?;
    note(cli, format_args!("wrote {}", path.display()));
    Ok(())
}

fn csv_name(out: &Path) -> String {
    out.file_name()
        .map_or_else(String::new, |n| n.to_string_lossy().into_owned())
}

fn check(cli: &Cli, a: &CheckArgs) -> CliResult<()> {
    let coeffs = load_coefficients(&a.coeffs)?;
    let v = coercivity::lambda_star(&coeffs, a.p, a.mode)?;
    println!("lambda_star={}, holds={}", v.lambda_star, v.holds);
    if let Some(out) = &cli.out {
        let critical = coercivity::critical_p(&coeffs)?;
        let result = json!({ "verdict": v, "critical_p": critical });
        write_json(out, &result)?;
        let config = json!({ "coeffs": coeffs, "p": a.p, "mode": a.mode });
        let mpath = manifest_path(out);
        write_json(
            &mpath,
            &manifest(
                "coercivity check",
                cli.seed.unwrap_or(DEFAULT_SEED),
                config,
                &[out],
                Value::Null,
            ),
        )?;
        note(cli, format_args!("wrote {} and {}", out.display(), mpath.display()));
    }
    Ok(())
}

#[derive(Serialize)]
struct SweepRow {
    p: f64,
    c_p: f64,
    lambda_star: f64,
    holds: bool,
}

fn sweep(cli: &Cli, a: &SweepArgs) -> CliResult<()> {
    let out = required_out(cli)?;
    let coeffs = load_coefficients(&a.coeffs)?;
    let rows: Vec<SweepRow> = coercivity::sweep(&coeffs, a.p_min, a.p_max, a.steps, a.mode)?
        .into_iter()
        .map(|v| SweepRow {
            p: v.p,
            c_p: v.c_p,
            lambda_star: v.lambda_star,
            holds: v.holds,
        })
        .collect();
    let critical = coercivity::critical_p(&coeffs)?;
    write_csv(out, &rows)?;
    let config = json!({
        "coeffs": coeffs, "p_min": a.p_min, "p_max": a.p_max, "steps": a.steps, "mode": a.mode,
    });
    write_json(
        &manifest_path(out),
        &manifest(
            "coercivity sweep",
            cli.seed.unwrap_or(DEFAULT_SEED),
            config,
            &[out],
            json!({ "critical_p": critical }),
        ),
    )?;
    note(cli, format_args!("wrote {}", out.display()));
    write_gnuplot(
        cli,
        out,
        format!(
            "set datafile separator ','\nset key autotitle columnhead\nset xlabel 'p'\nset ylabel 'lambda_star'\n\
             plot '{}' using 1:3 with linespoints, 0 notitle dt 2\n",
            csv_name(out)
        ),
    )
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum FieldKind {
    Sin,
    Cos,
}

/// `amplitude · sin(n x)` or `amplitude · cos(n x)`, constant in time.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FieldTerm {
    kind: FieldKind,
    n: u32,
    #[serde(default = "one")]
    amplitude: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum InitialKind {
    Zero,
    Example,
}

/// Config file shared by `simulate` and `schauder-probe`.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    m: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mu: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    coeffs: Option<CoefficientSet>,
    #[serde(rename = "N", skip_serializing_if = "Option::is_none")]
    truncation: Option<usize>,
    #[serde(rename = "T", skip_serializing_if = "Option::is_none")]
    horizon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    steps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    paths: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    initial: Option<InitialKind>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    forcing: Vec<FieldTerm>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    noise_forcing: Vec<Vec<FieldTerm>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    record_every: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    resolutions_x: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    resolution_t: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    path_counts: Option<Vec<usize>>,
}

/// Fully defaulted and validated run parameters.
#[derive(Clone, Debug, Serialize)]
struct ResolvedModel {
    m: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    mu: Option<f64>,
    coeffs: CoefficientSet,
    #[serde(rename = "N")]
    truncation: usize,
    #[serde(rename = "T")]
    horizon: f64,
    steps: usize,
    paths: usize,
    seed: u64,
    initial: InitialKind,
    forcing: Vec<FieldTerm>,
    noise_forcing: Vec<Vec<FieldTerm>>,
    record_every: usize,
}

fn load_config(path: &Path) -> CliResult<ModelConfig> {
    serde_json::from_str(&read_input(path)?).map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))
}

fn positive(name: &str, value: Option<usize>, default: usize) -> CliResult<usize> {
    let v = value.unwrap_or(default);
    if v == 0 {
        return Err(CliError::field(name, "must be at least 1"));
    }
    Ok(v)
}

fn resolve(cfg: &ModelConfig, cli_seed: Option<u64>, default_initial: InitialKind) -> CliResult<ResolvedModel> {
    let (m, mu, coeffs) = match (&cfg.coeffs, cfg.m, cfg.mu) {
        (Some(c), None, None) => (c.half_order(), None, c.clone()),
        (Some(_), _, _) => {
            return Err(CliError::field(
                "coeffs",
                "give either `coeffs` or `m` and `mu`, not both",
            ));
        }
        (None, Some(m), Some(mu)) => {
            if m == 0 {
                return Err(CliError::field("m", "must be at least 1"));
            }
            if !mu.is_finite() {
                return Err(CliError::field("mu", "must be finite"));
            }
            (m, Some(mu), CoefficientSet::scalar(m, 1.0, &[mu])?)
        }
        (None, None, _) => return Err(CliError::field("m", "missing (or give `coeffs`)")),
        (None, _, None) => return Err(CliError::field("mu", "missing (or give `coeffs`)")),
    };
    if coeffs.dim() != 1 {
        return Err(CliError::field("coeffs", "simulation needs spatial dimension n = 1"));
    }
    let truncation = positive("N", cfg.truncation, simulate::DEFAULT_TRUNCATION)?;
    let horizon = cfg.horizon.unwrap_or(1.0);
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(CliError::field("T", "must be a positive finite time"));
    }
    let steps = positive("steps", cfg.steps, simulate::DEFAULT_STEPS)?;
    let paths = positive("paths", cfg.paths, simulate::DEFAULT_PATHS)?;
    let record_every = positive("record_every", cfg.record_every, (steps / DEFAULT_SNAPSHOTS).max(1))?;
    for (name, terms) in
        std::iter::once(("forcing", &cfg.forcing)).chain(cfg.noise_forcing.iter().map(|t| ("noise_forcing", t)))
    {
        for term in terms {
            if term.n as usize > truncation {
                return Err(CliError::field(
                    name,
                    format!("mode {} exceeds N = {truncation}", term.n),
                ));
            }
            if !term.amplitude.is_finite() {
                return Err(CliError::field(name, "amplitude must be finite"));
            }
        }
    }
    if !cfg.noise_forcing.is_empty() && cfg.noise_forcing.len() != coeffs.noise_count() {
        return Err(CliError::field(
            "noise_forcing",
            format!(
                "has {} entries but the coefficients carry {} Wiener processes",
                cfg.noise_forcing.len(),
                coeffs.noise_count()
            ),
        ));
    }
    Ok(ResolvedModel {
        m,
        mu,
        coeffs,
        truncation,
        horizon,
        steps,
        paths,
        seed: cli_seed.or(cfg.seed).unwrap_or(DEFAULT_SEED),
        initial: cfg.initial.unwrap_or(default_initial),
        forcing: cfg.forcing.clone(),
        noise_forcing: cfg.noise_forcing.clone(),
        record_every,
    })
}

fn build_field(terms: &[FieldTerm], truncation: usize) -> SpectralField {
    let mut f = SpectralField::zeros(truncation);
    for t in terms {
        match t.kind {
            FieldKind::Sin => f.add_sine(t.n as i64, t.amplitude),
            FieldKind::Cos => f.add_cosine(t.n as i64, t.amplitude),
        }
    }
    f
}

impl ResolvedModel {
    fn model(&self) -> LinearModel {
        let mut model = LinearModel::constant(self.coeffs.clone()).with_initial(match self.initial {
            InitialKind::Zero => InitialCondition::Zero,
            InitialKind::Example => InitialCondition::Example,
        });
        if !self.forcing.is_empty() {
            let f = build_field(&self.forcing, self.truncation);
            model = model.with_forcing(move |_| f.clone());
        }
        if !self.noise_forcing.is_empty() {
            let g: Vec<SpectralField> = self
                .noise_forcing
                .iter()
                .map(|terms| build_field(terms, self.truncation))
                .collect();
            model = model.with_noise_forcing(move |_| g.clone());
        }
        model
    }

    fn settings(&self, paths: usize) -> CliResult<SimulationSettings> {
        let grid = TimeGrid::uniform(self.horizon, self.steps)?;
        Ok(SimulationSettings::new(self.truncation, grid, paths, self.seed).record_every(self.record_every))
    }
}

#[derive(Serialize)]
struct ModeRow {
    path: usize,
    n: i64,
    re: f64,
    im: f64,
}

fn simulate_cmd(cli: &Cli, a: &SimulateArgs) -> CliResult<()> {
    let out = required_out(cli)?;
    let cfg = load_config(&a.config)?;
    for (name, set) in [
        ("resolutions_x", cfg.resolutions_x.is_some()),
        ("resolution_t", cfg.resolution_t.is_some()),
        ("path_counts", cfg.path_counts.is_some()),
    ] {
        if set {
            return Err(CliError::field(name, "only meaningful for schauder-probe"));
        }
    }
    let resolved = resolve(&cfg, cli.seed, InitialKind::Example)?;
    let ens = simulate::simulate_model(&resolved.model(), &resolved.settings(resolved.paths)?)?;

    fs::create_dir_all(out)?;
    let mut snapshots = Vec::new();
    for (idx, &t) in ens.times().iter().enumerate() {
        let name = format!("snapshot_{idx:04}.csv");
        write_atomic(&out.join(&name), |w| {
            let mut csv_out = csv::Writer::from_writer(w);
            for (path, field) in ens.snapshot(idx).enumerate() {
                for (n, c) in field.iter() {
                    csv_out.serialize(ModeRow {
                        path,
                        n,
                        re: c.re,
                        im: c.im,
                    })?;
                }
            }
            csv_out.flush()?;
            Ok(())
        })?;
        snapshots.push(json!({ "file": name, "index": idx, "t": t }));
    }
    let config = serde_json::to_value(&resolved)?;
    let man = json!({
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "command": "simulate",
        "seed": resolved.seed,
        "config": config,
        "snapshots": snapshots,
    });
    write_json(&out.join("manifest.json"), &man)?;
    note(
        cli,
        format_args!("wrote {} snapshots to {}", ens.times().len(), out.display()),
    );
    Ok(())
}

/// `start:stop:step`; `stop` is included when it lies on the lattice.
fn parse_t_grid(spec: &str) -> CliResult<Vec<f64>> {
    let bad = |why: &str| CliError::invalid(format!("invalid --t-grid `{spec}`: {why}"));
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(bad("expected start:stop:step"));
    }
    let nums: Vec<f64> = parts
        .iter()
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| bad("not a number"))?;
    let (start, stop, step) = (nums[0], nums[1], nums[2]);
    if !nums.iter().all(|v| v.is_finite()) {
        return Err(bad("values must be finite"));
    }
    if start < 0.0 {
        return Err(bad("start must be non-negative"));
    }
    if stop < start {
        return Err(bad("stop must not precede start"));
    }
    if !(step > 0.0) {
        return Err(bad("step must be positive"));
    }
    let span = (stop - start) / step;
    let count = (span + 1e-9).floor() as usize;
    let mut times: Vec<f64> = (0..=count).map(|i| start + step * i as f64).collect();
    if (span - count as f64).abs() <= 1e-9 {
        *times.last_mut().expect("non-empty grid") = stop;
    }
    Ok(times)
}

fn parse_counts(spec: &str) -> CliResult<Vec<usize>> {
    let counts: Vec<usize> = spec
        .split(',')
        .map(|s| s.trim().parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::invalid(format!("invalid --paths `{spec}`: expected comma-separated counts")))?;
    if counts.contains(&0) {
        return Err(CliError::invalid("--paths counts must be at least 1"));
    }
    Ok(counts)
}

#[derive(Serialize)]
struct SharpnessRow {
    t: f64,
    p: f64,
    criterion: f64,
    verdict: &'static str,
    closed_form_l2: f64,
    mc_estimate: f64,
    mc_stderr: f64,
    paths: usize,
}

fn sharpness(cli: &Cli, a: &SharpnessArgs) -> CliResult<()> {
    let out = required_out(cli)?;
    let seed = cli.seed.unwrap_or(DEFAULT_SEED);
    let times = parse_t_grid(&a.t_grid)?;
    let counts = parse_counts(&a.paths)?;
    if a.truncation == 0 {
        return Err(CliError::invalid("--truncation must be at least 1"));
    }
    // validates m, μ and p before any sampling
    moments::finiteness(a.m, a.mu, a.p, 0.0)?;
    let mut verdicts = Vec::with_capacity(times.len());
    for &t in &times {
        verdicts.push((
            moments::finiteness(a.m, a.mu, a.p, t)?,
            moments::closed_form_l2(a.m, a.mu, t, a.truncation)?,
        ));
    }

    let mut grid_times = times.clone();
    if grid_times[0] > 0.0 {
        grid_times.insert(0, 0.0);
    }
    let offset = grid_times.len() - times.len();
    if grid_times.len() < 2 {
        grid_times.push(1.0);
    }
    let grid = TimeGrid::new(grid_times)?;
    let max_paths = counts.iter().copied().max().unwrap_or(1);
    let norms = simulate::sample_exact_l2_norms(a.m, a.mu, a.truncation, &grid, max_paths, seed)?;

    let mut rows = Vec::with_capacity(times.len() * counts.len());
    for (i, (&t, (v, l2))) in times.iter().zip(&verdicts).enumerate() {
        for &count in &counts {
            let samples: Vec<f64> = norms[..count].iter().map(|n| n[i + offset].powf(a.p)).collect();
            let est = moments::mc_estimate(&samples)?;
            rows.push(SharpnessRow {
                t,
                p: a.p,
                criterion: v.criterion_value,
                verdict: v.verdict.as_str(),
                closed_form_l2: *l2,
                mc_estimate: est.mean,
                mc_stderr: est.stderr,
                paths: count,
            });
        }
    }
    write_csv(out, &rows)?;
    let config = json!({
        "m": a.m, "mu": a.mu, "p": a.p, "t_grid": a.t_grid, "paths": counts, "N": a.truncation,
    });
    let results = json!({ "blowup_time": moments::blowup_time(a.mu, a.p).filter(|_| a.m.is_multiple_of(2)) });
    write_json(
        &manifest_path(out),
        &manifest("sharpness", seed, config, &[out], results),
    )?;
    note(cli, format_args!("wrote {}", out.display()));
    write_gnuplot(
        cli,
        out,
        format!(
            "set datafile separator ','\nset key autotitle columnhead\nset logscale y\nset xlabel 't'\n\
             set ylabel 'E|u|^p estimate'\nplot for [n in '{}'] '{}' using 1:($8 == n ? $6 : 1/0) \
             with linespoints title 'paths='.n\n",
            counts.iter().map(usize::to_string).collect::<Vec<_>>().join(" "),
            csv_name(out)
        ),
    )
}

#[derive(Serialize)]
struct ProbeRow {
    resolution_x: usize,
    resolution_t: usize,
    paths: usize,
    norm_u: f64,
    norm_f: f64,
    norm_g: f64,
    ratio: f64,
}

fn probe(cli: &Cli, a: &ProbeArgs) -> CliResult<()> {
    let out = required_out(cli)?;
    let cfg = load_config(&a.config)?;
    if cfg.initial == Some(InitialKind::Example) {
        return Err(CliError::field("initial", "the probe needs zero initial data"));
    }
    let nt = positive("resolution_t", cfg.resolution_t, holder::DEFAULT_RESOLUTION_T)?;
    let steps = positive("steps", cfg.steps, simulate::DEFAULT_STEPS)?;
    if steps % nt != 0 {
        return Err(CliError::field("resolution_t", format!("must divide steps = {steps}")));
    }
    if cfg.record_every.is_some_and(|r| r != steps / nt) {
        return Err(CliError::field(
            "record_every",
            "is fixed by steps / resolution_t for the probe",
        ));
    }
    let cfg = ModelConfig {
        record_every: Some(steps / nt),
        ..cfg
    };
    let resolved = resolve(&cfg, cli.seed, InitialKind::Zero)?;
    let resolutions = cfg.resolutions_x.clone().unwrap_or(vec![holder::DEFAULT_RESOLUTION_X]);
    if resolutions.contains(&0) {
        return Err(CliError::field("resolutions_x", "entries must be at least 1"));
    }
    let counts = cfg.path_counts.clone().unwrap_or(vec![resolved.paths]);
    if counts.is_empty() || counts.contains(&0) {
        return Err(CliError::field("path_counts", "entries must be at least 1"));
    }
    let max_paths = counts.iter().copied().max().unwrap_or(1);
    let model = resolved.model();
    let ens = simulate::simulate_model(&model, &resolved.settings(max_paths)?)?;
    let times = ens.times()[1..].to_vec();

    let mut rows = Vec::new();
    for &rx in &resolutions {
        let region = Region::uniform(rx, times.clone())?;
        for &count in &counts {
            let sub = ens.prefix(count)?;
            let pr = holder::schauder_ratio(&sub, &model, a.delta, a.p, &region)?;
            rows.push(ProbeRow {
                resolution_x: pr.resolution_x,
                resolution_t: pr.resolution_t,
                paths: pr.paths,
                norm_u: pr.norm_u,
                norm_f: pr.norm_f,
                norm_g: pr.norm_g,
                ratio: pr.ratio,
            });
            note(cli, format_args!("resolution_x={rx} paths={count} ratio={}", pr.ratio));
        }
    }
    write_csv(out, &rows)?;
    let mut config = serde_json::to_value(&resolved)?;
    config["resolutions_x"] = json!(resolutions);
    config["resolution_t"] = json!(nt);
    config["path_counts"] = json!(counts);
    config["delta"] = json!(a.delta);
    config["p"] = json!(a.p);
    write_json(
        &manifest_path(out),
        &manifest("schauder-probe", resolved.seed, config, &[out], Value::Null),
    )?;
    note(cli, format_args!("wrote {}", out.display()));
    write_gnuplot(
        cli,
        out,
        format!(
            "set datafile separator ','\nset key autotitle columnhead\nset xlabel 'resolution_x'\n\
             set ylabel 'ratio'\nplot '{}' using 1:7 with points\n",
            csv_name(out)
        ),
    )
}
