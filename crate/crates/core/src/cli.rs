//! Command-line front end.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::admission::{self, StepEvent};
use crate::calculus::{classify_tail, concavity_set, concavity_set_noniid, convex_minorant, ClassifyPolicy, RegionMethod};
use crate::convolution::{ratio_log, RatioOptions, RatioSample, SumMethod};
use crate::error::Error;
use crate::tail::TailSpec;
use crate::witness::{
    doubling_value, geometric_grid, iid_witness, ndim_witness, noniid_witness, reduction_bound, reduction_bound_ndim,
    reduction_bound_noniid, NoniidOptions, WitnessOptions,
};

/// Environment variable for the default worker-thread count.
pub const THREADS_ENV: &str = "TAILRATIO_THREADS";

#[derive(Parser, Debug)]
#[command(name = "tailratio", version, about = "Tail ratios of sums of independent variables")]
struct Cli {
    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Regime of the gap to the convex minorant.
    Classify {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, default_value_t = 1e4)]
        xmax: f64,
    },
    /// Knots of the convex minorant.
    Minorant {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, default_value_t = 1e4)]
        xmax: f64,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Concavity set at (m, d).
    Lset {
        #[arg(long)]
        spec: PathBuf,
        /// Second law; selects the non-i.i.d. set.
        #[arg(long)]
        spec2: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        j: usize,
        #[arg(long)]
        m: f64,
        #[arg(long)]
        d: f64,
    },
    /// Bracketed log tail ratio over an m grid.
    Ratio {
        /// One law (broadcast) or one per weight.
        #[arg(long, required = true, num_args = 1..)]
        spec: Vec<PathBuf>,
        #[arg(long, value_delimiter = ',', default_values_t = [0.5, 0.5])]
        weights: Vec<f64>,
        #[command(flatten)]
        grid: MGrid,
        #[command(flatten)]
        method: MethodArgs,
    },
    /// Certified reduction and doubling bounds over an m grid.
    Bound {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        spec2: Option<PathBuf>,
        #[arg(long, value_delimiter = ',')]
        weights: Option<Vec<f64>>,
        #[arg(long)]
        d: f64,
        #[command(flatten)]
        grid: MGrid,
    },
    /// Witness search in the detected regime.
    Witness {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        spec2: Option<PathBuf>,
        /// Weights for the n-variable construction.
        #[arg(long, value_delimiter = ',')]
        weights: Option<Vec<f64>>,
        #[arg(long)]
        eta: f64,
        #[arg(long)]
        d: f64,
        #[arg(long, default_value_t = 1e4)]
        xmax: f64,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Maximum observed log ratio per weight on an m grid.
    ConjectureScan {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        spec2: PathBuf,
        #[arg(long, value_delimiter = ',', default_values_t = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9])]
        lambdas: Vec<f64>,
        #[command(flatten)]
        grid: MGrid,
    },
    /// Trajectory of the admission process.
    SimulateClub {
        /// Run config JSON {spec, r, steps, seed}; overrides the flags below.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, required_unless_present = "config")]
        spec: Option<PathBuf>,
        #[arg(long, default_value_t = 0.5)]
        r: f64,
        #[arg(long, default_value_t = 10_000)]
        steps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug)]
struct MGrid {
    /// Explicit m values; overrides the geometric range.
    #[arg(long, value_delimiter = ',')]
    m: Option<Vec<f64>>,
    #[arg(long, default_value_t = 1.0)]
    m_lo: f64,
    #[arg(long, default_value_t = 100.0)]
    m_hi: f64,
    #[arg(long, default_value_t = 1.1)]
    m_ratio: f64,
}

impl MGrid {
    fn values(&self) -> Result<Vec<f64>, Failure> {
        if let Some(m) = &self.m {
            return Ok(m.clone());
        }
        if !(self.m_lo > 0.0 && self.m_hi >= self.m_lo && self.m_ratio > 1.0) {
            return Err(Failure::config("bad_grid", "need 0 < m-lo <= m-hi and m-ratio > 1"));
        }
        Ok(geometric_grid(self.m_lo, self.m_hi, self.m_ratio))
    }
}

#[derive(Args, Debug)]
struct MethodArgs {
    /// Monte Carlo for n > 2 instead of the lattice grid.
    #[arg(long)]
    mc: bool,
    #[arg(long, default_value_t = 4000)]
    cells: usize,
    #[arg(long, default_value_t = 200_000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.05)]
    max_rel_se: f64,
}

impl MethodArgs {
    fn options(&self) -> RatioOptions {
        let n = if self.mc {
            SumMethod::MonteCarlo { samples: self.samples, seed: self.seed, max_rel_se: self.max_rel_se }
        } else {
            SumMethod::Grid { cells: self.cells }
        };
        RatioOptions { n, ..RatioOptions::default() }
    }
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RunConfig {
    spec: TailSpec,
    r: f64,
    steps: usize,
    seed: u64,
}

/// Exit status plus the error JSON written to stderr.
#[derive(Debug)]
struct Failure {
    exit: i32,
    code: String,
    message: String,
}

impl Failure {
    fn config(code: &str, message: impl Into<String>) -> Self {
        Self { exit: 2, code: code.into(), message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let exit = match e {
            Error::Domain(_) | Error::InvalidSpec(_) | Error::Unsupported(_) => 2,
            _ => 1,
        };
        Self { exit, code: e.code().into(), message: e.to_string() }
    }
}

fn read_spec(path: &Path) -> Result<TailSpec, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::config("io", format!("{}: {e}", path.display())))?;
    Ok(TailSpec::from_json(&text)?)
}

fn csv_text(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Failure::config("io", e.to_string());
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(&r).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Failure::config("io", e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn json_text<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("reports serialize");
    s.push('\n');
    s
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(v) = std::env::var(THREADS_ENV) else { return Ok(()) };
    let n: usize = v.trim().parse().map_err(|_| Failure::config("bad_env", format!("{THREADS_ENV}={v} is not a count")))?;
    // A pool may already exist when called repeatedly in one process.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn ratio_rows(specs: &[TailSpec], weights: &[f64], ms: &[f64], opts: &RatioOptions) -> Result<Vec<RatioSample>, Failure> {
    ms.par_iter().map(|&m| ratio_log(specs, weights, m, opts)).collect::<Result<Vec<_>, Error>>().map_err(Failure::from)
}

const BOUND_HEADER: [&str; 6] = ["m", "d", "measure", "reduction_bound", "doubling_bound", "certified"];
const MINORANT_HEADER: [&str; 3] = ["x", "h", "slope"];
const SCAN_HEADER: [&str; 8] =
    ["lambda", "best_m", "max_log_ratio_lo", "max_log_ratio_hi", "exceeds_1", "exceeds_2", "exceeds_5", "note"];

fn execute(cmd: Command) -> Result<String, Failure> {
    match cmd {
        Command::Classify { spec, xmax } => {
            let g = read_spec(&spec)?;
            Ok(json_text(&classify_tail(&g, xmax, &ClassifyPolicy::default())?))
        }
        Command::Minorant { spec, xmax, format } => {
            let g = read_spec(&spec)?;
            let h = convex_minorant(&g, xmax, &ClassifyPolicy::default().grid)?;
            match format {
                Format::Json => Ok(json_text(&h)),
                Format::Csv => csv_text(
                    &MINORANT_HEADER,
                    h.xs.iter().zip(&h.hs).enumerate().map(|(i, (x, y))| {
                        let slope = h.slopes.get(i).map_or(String::new(), f64::to_string);
                        vec![x.to_string(), y.to_string(), slope]
                    }),
                ),
            }
        }
        Command::Lset { spec, spec2, j, m, d } => {
            let g = read_spec(&spec)?;
            let set = match spec2 {
                Some(p) => concavity_set_noniid(&g, &read_spec(&p)?, m, d, j)?,
                None => concavity_set(&g, m, d)?,
            };
            Ok(json_text(&set))
        }
        Command::Ratio { spec, weights, grid, method } => {
            let specs = spec.iter().map(|p| read_spec(p)).collect::<Result<Vec<_>, _>>()?;
            let rows = ratio_rows(&specs, &weights, &grid.values()?, &method.options())?;
            csv_text(&RatioSample::CSV_HEADER, rows.iter().map(RatioSample::csv_record))
        }
        Command::Bound { spec, spec2, weights, d, grid } => {
            let g = read_spec(&spec)?;
            let other = spec2.map(|p| read_spec(&p)).transpose()?;
            let ms = grid.values()?;
            let rows = ms
                .par_iter()
                .map(|&m| -> Result<Vec<String>, Error> {
                    let (measure, bound, certified) = match (&other, &weights) {
                        (Some(o), _) => {
                            let b = reduction_bound_noniid(&g, o, m, d, 0)?;
                            ((b + 2.0 * d).exp(), b, true)
                        }
                        (None, Some(w)) => {
                            let b = reduction_bound_ndim(&g, m, d, w, RegionMethod::default())?;
                            (b.measure, b.bound, b.certified)
                        }
                        (None, None) => {
                            let b = reduction_bound(&g, m, d)?;
                            ((b + 2.0 * d).exp(), b, true)
                        }
                    };
                    let n = weights.as_ref().map_or(2, Vec::len);
                    let dbl = if other.is_none() { doubling_value(&g, n, m).to_string() } else { String::new() };
                    Ok(vec![m.to_string(), d.to_string(), measure.to_string(), bound.to_string(), dbl, certified.to_string()])
                })
                .collect::<Result<Vec<_>, Error>>()?;
            csv_text(&BOUND_HEADER, rows)
        }
        Command::Witness { spec, spec2, weights, eta, d, xmax, format } => {
            let g = read_spec(&spec)?;
            let other = spec2.map(|p| read_spec(&p)).transpose()?;
            let opts = WitnessOptions { x_max: xmax, ..WitnessOptions::default() };
            let (report, specs) = match (&other, &weights) {
                (Some(o), _) => {
                    let nopts = NoniidOptions { x_max: xmax, m_hi: 0.8 * xmax, ..NoniidOptions::default() };
                    (noniid_witness(&g, o, d, eta, &nopts)?, vec![g.clone(), o.clone()])
                }
                (None, Some(w)) => (ndim_witness(&g, w, d, eta, &opts)?, vec![g.clone()]),
                (None, None) => (iid_witness(&g, eta, d, &opts)?, vec![g.clone()]),
            };
            match format {
                Format::Json => Ok(json_text(&report)),
                Format::Csv => {
                    let truth = ratio_log(&specs, &report.weights, report.m, &RatioOptions::default())
                        .ok()
                        .map(|r| (r.log_ratio_lo, r.log_ratio_hi));
                    csv_text(&crate::witness::WitnessReport::CSV_HEADER, [report.csv_record(truth)])
                }
            }
        }
        Command::ConjectureScan { spec, spec2, lambdas, grid } => {
            let specs = [read_spec(&spec)?, read_spec(&spec2)?];
            let ms = grid.values()?;
            if lambdas.iter().any(|&l| !(l > 0.0 && l < 1.0)) {
                return Err(Failure::config("domain", "lambdas must lie in (0, 1)"));
            }
            let mut rows = Vec::new();
            for &l in &lambdas {
                let samples = ratio_rows(&specs, &[l, 1.0 - l], &ms, &RatioOptions::default())?;
                let best = samples
                    .iter()
                    .fold(None::<&RatioSample>, |b, s| match b {
                        Some(b) if b.log_ratio_lo >= s.log_ratio_lo => Some(b),
                        _ => Some(s),
                    })
                    .expect("non-empty grid");
                let ex = |t: f64| (best.log_ratio_lo > t).to_string();
                rows.push(vec![
                    l.to_string(),
                    best.m.to_string(),
                    best.log_ratio_lo.to_string(),
                    best.log_ratio_hi.to_string(),
                    ex(1.0),
                    ex(2.0),
                    ex(5.0),
                    "evidence, not proof".into(),
                ]);
            }
            csv_text(&SCAN_HEADER, rows)
        }
        Command::SimulateClub { config, spec, r, steps, seed } => {
            let cfg = match config {
                Some(p) => {
                    let text = fs::read_to_string(&p).map_err(|e| Failure::config("io", format!("{}: {e}", p.display())))?;
                    serde_json::from_str::<RunConfig>(&text).map_err(|e| Failure::config("invalid_config", e.to_string()))?
                }
                None => RunConfig { spec: read_spec(spec.as_deref().expect("clap enforces --spec"))?, r, steps, seed },
            };
            let t = admission::run(&cfg.spec, cfg.r, cfg.steps, cfg.seed)?;
            csv_text(&StepEvent::CSV_HEADER, t.events.iter().map(StepEvent::csv_record))
        }
    }
}

fn command_name(cmd: &Command) -> &'static str {
    match cmd {
        Command::Classify { .. } => "classify",
        Command::Minorant { .. } => "minorant",
        Command::Lset { .. } => "lset",
        Command::Ratio { .. } => "ratio",
        Command::Bound { .. } => "bound",
        Command::Witness { .. } => "witness",
        Command::ConjectureScan { .. } => "conjecture-scan",
        Command::SimulateClub { .. } => "simulate-club",
    }
}

fn report(f: &Failure, command: &str) -> i32 {
    let body = json!({ "code": f.code, "message": f.message, "context": { "command": command } });
    eprintln!("{body}");
    f.exit
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return 0;
        }
        Err(e) => return report(&Failure::config("usage", e.to_string().trim_end()), "parse"),
    };
    if let Err(f) = configure_threads() {
        return report(&f, "env");
    }
    let name = command_name(&cli.command);
    let text = match execute(cli.command) {
        Ok(t) => t,
        Err(f) => return report(&f, name),
    };
    let written = match &cli.out {
        Some(p) => fs::write(p, text.as_bytes()).map_err(|e| Failure::config("io", format!("{}: {e}", p.display()))),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| Failure::config("io", e.to_string())),
    };
    match written {
        Ok(()) => 0,
        Err(f) => report(&f, name),
    }
}
