//! The `dispkit` command line.
//!
//! Every output starts with an echo of the configuration: `#` lines in CSV,
//! a first JSON object in JSON-lines output. Reals are printed with 17
//! significant digits. Exit codes: 0 success, 2 input error, 3 size or
//! resource refusal, 4 internal invariant violation.

use std::ffi::OsString;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bounds::{self, BoundValue, LowerVariant};
use crate::error::{Error, Result};
use crate::exact::{self, Witness};
use crate::geometry::ArcKind;
use crate::io::{self, fmt_g17};
use crate::montecarlo::{self, DispersionExperiment, Method, TrialReport};
use crate::nets::{self, ApproximationNet, NetKind, NetParams};
use crate::par;

pub const OUTPUT_VERSION: u32 = 1;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_SIZE: i32 = 3;
pub const EXIT_INVARIANT: i32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Jsonl,
}

#[derive(Debug, Parser)]
#[command(name = "dispkit", version, about = "Dispersion of point sets: exact values, nets, bounds and experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    /// Worker threads (results do not depend on it).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Write the report here instead of stdout (`net build`: the net file).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Seed of every random draw.
    #[arg(long, global = true, env = "DISPKIT_SEED", default_value_t = 0)]
    pub seed: u64,

    /// Memory budget for nets, e.g. `512MiB` or `2GiB`.
    #[arg(long, global = true, default_value = "2GiB", value_parser = parse_bytes)]
    pub mem_budget: u128,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact (k-)dispersion of a point file.
    Disp(DispArgs),
    /// Build, verify or apply approximation nets.
    #[command(subcommand)]
    Net(NetCommand),
    /// Evaluate bound formulas over parameter grids.
    #[command(subcommand)]
    Bounds(BoundsCommand),
    /// Monte Carlo experiments with uniform random points.
    #[command(subcommand)]
    Mc(McCommand),
}

#[derive(Debug, Args)]
pub struct DispArgs {
    /// Point file (format version 1).
    #[arg(long)]
    pub points: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub k: usize,
    #[arg(long)]
    pub torus: bool,
    /// Refuse larger point sets unless `--force` is given.
    #[arg(long, default_value_t = 2000)]
    pub max_n: usize,
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Args, Clone)]
pub struct NetSpec {
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub eps: Option<f64>,
    /// Defaults to 1/ln(1/eps).
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Periodic net.
    #[arg(long, conflicts_with = "anchored")]
    pub torus: bool,
    /// Anchored boxes only.
    #[arg(long)]
    pub anchored: bool,
}

impl NetSpec {
    fn kind(&self) -> NetKind {
        if self.torus {
            NetKind::Torus
        } else if self.anchored {
            NetKind::Anchored
        } else {
            NetKind::General
        }
    }

    fn params(&self) -> Result<NetParams> {
        let d = self.d.ok_or_else(|| Error::param("d", "required"))?;
        let eps = self.eps.ok_or_else(|| Error::param("eps", "required"))?;
        NetParams::new(d, eps, self.gamma)
    }
}

#[derive(Debug, Subcommand)]
pub enum NetCommand {
    /// Construct a net and write it to `--out`.
    Build(NetSpec),
    /// Check the approximation property on random boxes of volume eps.
    Verify {
        /// Net file; otherwise the net is built from the parameters.
        #[arg(long)]
        net: Option<PathBuf>,
        #[command(flatten)]
        spec: NetSpec,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
    },
    /// Check whether every net element holds more than k points of a file.
    Certify {
        #[arg(long)]
        net: Option<PathBuf>,
        #[command(flatten)]
        spec: NetSpec,
        #[arg(long)]
        points: PathBuf,
        #[arg(long, default_value_t = 0)]
        k: usize,
    },
}

#[derive(Debug, Subcommand)]
pub enum BoundsCommand {
    /// One row per formula and grid cell.
    Eval {
        /// Values `a,b,c` or a range `lo:hi:count`.
        #[arg(long)]
        eps: String,
        /// Values `a,b,c` or an inclusive range `lo:hi`.
        #[arg(long)]
        d: String,
        #[arg(long, default_value = "0")]
        k: String,
    },
    /// Regime label of the best known upper bound per grid cell.
    Regimes {
        #[arg(long, default_value = "2:64")]
        d: String,
        /// Grid of log10(eps), `lo:hi:count`.
        #[arg(long, default_value = "-40:-0.3:100", allow_hyphen_values = true)]
        log10_eps: String,
    },
}

#[derive(Debug, Subcommand)]
pub enum McCommand {
    /// Certification of uniform random points by a net.
    Net {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long, default_value_t = 0)]
        k: usize,
        /// Defaults to the union-bound sample size of the net.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 100)]
        trials: u64,
        #[arg(long)]
        torus: bool,
    },
    /// Success fraction of dispersion at most eps.
    Disp {
        #[command(flatten)]
        exp: ExperimentArgs,
        #[arg(long)]
        n: usize,
        /// Use n copies of the cube center instead of random points.
        #[arg(long)]
        midpoint: bool,
    },
    /// Smallest n whose success fraction reaches the target.
    Invert {
        #[command(flatten)]
        exp: ExperimentArgs,
        #[arg(long)]
        target: f64,
        /// Search cap on n.
        #[arg(long, default_value_t = 4096)]
        cap: usize,
    },
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[arg(long)]
    pub d: usize,
    #[arg(long)]
    pub eps: f64,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub k: usize,
    #[arg(long, default_value_t = 100)]
    pub trials: u64,
    /// exact, net_certify or both.
    #[arg(long, default_value = "exact")]
    pub method: String,
    #[arg(long)]
    pub torus: bool,
    /// Largest n evaluated exactly.
    #[arg(long, default_value_t = 400)]
    pub max_n: usize,
}

/// Parses `1024`, `64KiB`, `512MiB`, `2GiB` (also `K`, `M`, `G`, `KB`, ...).
pub fn parse_bytes(s: &str) -> std::result::Result<u128, String> {
    let t = s.trim();
    let split = t.find(|c: char| !c.is_ascii_digit()).unwrap_or(t.len());
    let (num, unit) = t.split_at(split);
    let base: u128 = num.parse().map_err(|_| format!("bad byte count '{s}'"))?;
    let mult: u128 = match unit.trim().to_ascii_lowercase().as_str() {
        "" | "b" => 1,
        "k" | "kb" | "kib" => 1 << 10,
        "m" | "mb" | "mib" => 1 << 20,
        "g" | "gb" | "gib" => 1 << 30,
        "t" | "tb" | "tib" => 1 << 40,
        _ => return Err(format!("bad byte unit in '{s}'")),
    };
    Ok(base * mult)
}

// ---------------------------------------------------------------------------
// Output
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
enum Cell {
    Int(u64),
    Real(f64),
    Bool(bool),
    Str(String),
    Reals(Vec<f64>),
    Bools(Vec<bool>),
    Null,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Real(v) => fmt_g17(*v),
            Cell::Bool(v) => v.to_string(),
            Cell::Str(s) => s.clone(),
            Cell::Reals(v) => v.iter().map(|&x| fmt_g17(x)).collect::<Vec<_>>().join(" "),
            Cell::Bools(v) => v.iter().map(|b| b.to_string()).collect::<Vec<_>>().join(" "),
            Cell::Null => String::new(),
        }
    }

    fn json(&self) -> String {
        let real = |x: f64| if x.is_finite() { fmt_g17(x) } else { "null".into() };
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Real(v) => real(*v),
            Cell::Bool(v) => v.to_string(),
            Cell::Str(s) => serde_json::to_string(s).expect("string serializes"),
            Cell::Reals(v) => format!("[{}]", v.iter().map(|&x| real(x)).collect::<Vec<_>>().join(",")),
            Cell::Bools(v) => format!("[{}]", v.iter().map(|b| b.to_string()).collect::<Vec<_>>().join(",")),
            Cell::Null => "null".into(),
        }
    }
}

fn opt_real(v: Option<f64>) -> Cell {
    v.map(Cell::Real).unwrap_or(Cell::Null)
}

fn opt_int(v: Option<u64>) -> Cell {
    v.map(Cell::Int).unwrap_or(Cell::Null)
}

fn opt_bool(v: Option<bool>) -> Cell {
    v.map(Cell::Bool).unwrap_or(Cell::Null)
}

struct Table {
    name: &'static str,
    columns: Vec<&'static str>,
    rows: Vec<Vec<Cell>>,
    /// Part of the CSV rendering (JSON lines always include every table).
    csv: bool,
}

struct Report {
    command: &'static str,
    config: Vec<(&'static str, Cell)>,
    tables: Vec<Table>,
}

impl Report {
    fn new(command: &'static str) -> Self {
        Report {
            command,
            config: Vec::new(),
            tables: Vec::new(),
        }
    }

    fn set(&mut self, key: &'static str, value: Cell) -> &mut Self {
        self.config.push((key, value));
        self
    }

    fn table(&mut self, name: &'static str, columns: &[&'static str], csv: bool) -> &mut Table {
        self.tables.push(Table {
            name,
            columns: columns.to_vec(),
            rows: Vec::new(),
            csv,
        });
        self.tables.last_mut().expect("just pushed")
    }

    fn render(&self, format: Format) -> String {
        let mut out = String::new();
        match format {
            Format::Csv => {
                out.push_str(&format!(
                    "# dispkit {} output_version={OUTPUT_VERSION}\n# command={}\n",
                    env!("CARGO_PKG_VERSION"),
                    self.command
                ));
                for (k, v) in &self.config {
                    out.push_str(&format!("# {k}={}\n", v.csv()));
                }
                let mut first = true;
                for t in self.tables.iter().filter(|t| t.csv) {
                    if !first {
                        out.push('\n');
                    }
                    first = false;
                    out.push_str(&t.columns.join(","));
                    out.push('\n');
                    for row in &t.rows {
                        out.push_str(&row.iter().map(Cell::csv).collect::<Vec<_>>().join(","));
                        out.push('\n');
                    }
                }
            }
            Format::Jsonl => {
                let config: Vec<String> = self
                    .config
                    .iter()
                    .map(|(k, v)| format!("\"{k}\":{}", v.json()))
                    .collect();
                out.push_str(&format!(
                    "{{\"dispkit\":\"{}\",\"output_version\":{OUTPUT_VERSION},\"command\":\"{}\",\"config\":{{{}}}}}\n",
                    env!("CARGO_PKG_VERSION"),
                    self.command,
                    config.join(",")
                ));
                for t in &self.tables {
                    for row in &t.rows {
                        let fields: Vec<String> = t
                            .columns
                            .iter()
                            .zip(row)
                            .map(|(c, v)| format!("\"{c}\":{}", v.json()))
                            .collect();
                        out.push_str(&format!("{{\"record\":\"{}\",{}}}\n", t.name, fields.join(",")));
                    }
                }
            }
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Entry points
// ---------------------------------------------------------------------------

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InstanceTooLarge { .. } | Error::BudgetExceeded { .. } | Error::SearchCapExceeded { .. } => EXIT_SIZE,
        Error::Invariant(_) => EXIT_INVARIANT,
        _ => EXIT_INPUT,
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code. Diagnostics go to stderr.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    match run(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("dispkit: {e}");
            exit_code(&e)
        }
    }
}

pub fn run(cli: &Cli) -> Result<()> {
    if cli.threads == Some(0) {
        return Err(Error::param("threads", "must be at least 1"));
    }
    let report = par::with_workers(cli.threads, || dispatch(cli))?;
    let text = report.render(cli.format);
    let report_path = match &cli.command {
        Command::Net(NetCommand::Build(_)) => None,
        _ => cli.out.as_deref(),
    };
    match report_path {
        Some(path) => std::fs::write(path, text)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
        }
    }
    Ok(())
}

fn dispatch(cli: &Cli) -> Result<Report> {
    match &cli.command {
        Command::Disp(a) => cmd_disp(a),
        Command::Net(NetCommand::Build(spec)) => cmd_net_build(cli, spec),
        Command::Net(NetCommand::Verify { net, spec, trials }) => cmd_net_verify(cli, net.as_deref(), spec, *trials),
        Command::Net(NetCommand::Certify { net, spec, points, k }) => {
            cmd_net_certify(cli, net.as_deref(), spec, points, *k)
        }
        Command::Bounds(BoundsCommand::Eval { eps, d, k }) => cmd_bounds_eval(eps, d, k),
        Command::Bounds(BoundsCommand::Regimes { d, log10_eps }) => cmd_bounds_regimes(d, log10_eps),
        Command::Mc(McCommand::Net {
            d,
            eps,
            gamma,
            k,
            n,
            trials,
            torus,
        }) => cmd_mc_net(cli, *d, *eps, *gamma, *k, *n, *trials, *torus),
        Command::Mc(McCommand::Disp { exp, n, midpoint }) => cmd_mc_disp(cli, exp, *n, *midpoint),
        Command::Mc(McCommand::Invert { exp, target, cap }) => cmd_mc_invert(cli, exp, *target, *cap),
    }
}

fn path_cell(p: &Path) -> Cell {
    Cell::Str(p.display().to_string())
}

fn cmd_disp(a: &DispArgs) -> Result<Report> {
    let points = io::read_points(&a.points)?;
    if points.len() > a.max_n && !a.force {
        return Err(Error::InstanceTooLarge {
            reason: format!(
                "{} points in dimension {} (limit {}, about {:.3e} face combinations unpruned); pass --force to run anyway",
                points.len(),
                points.dim(),
                a.max_n,
                exact::enumeration_estimate(&points, a.torus)
            ),
        });
    }
    let r = exact::exact(&points, a.k, a.torus);
    let mut rep = Report::new("disp");
    rep.set("points", path_cell(&a.points))
        .set("d", Cell::Int(points.dim() as u64))
        .set("n", Cell::Int(points.len() as u64))
        .set("k", Cell::Int(a.k as u64))
        .set("torus", Cell::Bool(a.torus));
    let (anchor, sides, open) = match &r.witness {
        Witness::Cube(b) => (b.anchor().to_vec(), b.sides().to_vec(), b.open_left().to_vec()),
        Witness::Torus(b) => (
            b.anchor().to_vec(),
            b.sides().to_vec(),
            b.kinds().iter().map(|&k| k == ArcKind::Open).collect(),
        ),
    };
    let inside = r.witness.count_in(&points);
    rep.table(
        "dispersion",
        &["value", "attained", "points_inside", "anchor", "sides", "open_left"],
        true,
    )
    .rows
    .push(vec![
        Cell::Real(r.value),
        Cell::Bool(r.attained),
        Cell::Int(inside as u64),
        Cell::Reals(anchor),
        Cell::Reals(sides),
        Cell::Bools(open),
    ]);
    Ok(rep)
}

fn echo_params(rep: &mut Report, p: &NetParams, kind: NetKind) {
    rep.set("d", Cell::Int(p.d as u64))
        .set("eps", Cell::Real(p.eps))
        .set("gamma", Cell::Real(p.gamma))
        .set("delta0", Cell::Real(p.delta0))
        .set("delta", Cell::Real(p.delta))
        .set("kind", Cell::Str(kind.name().into()));
}

fn load_or_build(cli: &Cli, net: Option<&Path>, spec: &NetSpec) -> Result<ApproximationNet> {
    match net {
        Some(path) => io::read_net(path),
        None => nets::build_net_within(&spec.params()?, spec.kind(), cli.mem_budget),
    }
}

fn cmd_net_build(cli: &Cli, spec: &NetSpec) -> Result<Report> {
    let path = cli
        .out
        .as_deref()
        .ok_or_else(|| Error::param("out", "net build needs --out for the net file"))?;
    let params = spec.params()?;
    let kind = spec.kind();
    let net = nets::build_net_within(&params, kind, cli.mem_budget)?;
    io::write_net(path, &net)?;
    let bound = nets::cardinality_bound(&params, kind);
    let mut rep = Report::new("net build");
    echo_params(&mut rep, &params, kind);
    rep.set("mem_budget", Cell::Int(cli.mem_budget.min(u64::MAX as u128) as u64))
        .set("out", path_cell(path));
    let min_volume = net.elements().map(|e| e.volume()).fold(f64::INFINITY, f64::min);
    rep.table("net", &["kind", "count", "min_volume", "cardinality_bound", "ratio"], true)
        .rows
        .push(vec![
            Cell::Str(kind.name().into()),
            Cell::Int(net.len() as u64),
            Cell::Real(min_volume),
            Cell::Real(bound),
            Cell::Real(net.len() as f64 / bound),
        ]);
    Ok(rep)
}

fn cmd_net_verify(cli: &Cli, net_path: Option<&Path>, spec: &NetSpec, trials: u64) -> Result<Report> {
    let net = load_or_build(cli, net_path, spec)?;
    let r = nets::verify_approximation(&net, trials, cli.seed)?;
    let mut rep = Report::new("net verify");
    echo_params(&mut rep, &net.params, net.kind);
    if let Some(p) = net_path {
        rep.set("net", path_cell(p));
    }
    rep.set("trials", Cell::Int(trials)).set("seed", Cell::Int(cli.seed));
    let (ft, fa, fs) = match &r.first_failure {
        Some((t, q)) => (Cell::Int(*t), Cell::Reals(q.anchor.clone()), Cell::Reals(q.sides.clone())),
        None => (Cell::Null, Cell::Null, Cell::Null),
    };
    rep.table(
        "verification",
        &["count", "trials", "passes", "failures", "first_failure_trial", "first_failure_anchor", "first_failure_sides"],
        true,
    )
    .rows
    .push(vec![
        Cell::Int(net.len() as u64),
        Cell::Int(r.trials),
        Cell::Int(r.passes),
        Cell::Int(r.failures),
        ft,
        fa,
        fs,
    ]);
    Ok(rep)
}

fn cmd_net_certify(cli: &Cli, net_path: Option<&Path>, spec: &NetSpec, points: &Path, k: usize) -> Result<Report> {
    let net = load_or_build(cli, net_path, spec)?;
    let pts = io::read_points(points)?;
    let r = nets::net_certifies(&net, &pts, k)?;
    let mut rep = Report::new("net certify");
    echo_params(&mut rep, &net.params, net.kind);
    if let Some(p) = net_path {
        rep.set("net", path_cell(p));
    }
    rep.set("points", path_cell(points))
        .set("n", Cell::Int(pts.len() as u64))
        .set("k", Cell::Int(k as u64));
    rep.table("certification", &["count", "n", "k", "certified", "deficient"], true)
        .rows
        .push(vec![
            Cell::Int(net.len() as u64),
            Cell::Int(pts.len() as u64),
            Cell::Int(k as u64),
            Cell::Bool(r.certified),
            Cell::Int(r.deficient.len() as u64),
        ]);
    let t = rep.table("deficient", &["index", "anchor", "sides"], false);
    for &i in &r.deficient {
        let e = net.element(i);
        t.rows
            .push(vec![Cell::Int(i as u64), Cell::Reals(e.anchor.to_vec()), Cell::Reals(e.sides.to_vec())]);
    }
    Ok(rep)
}

fn grid_err(spec: &str, why: &str) -> Error {
    Error::param("grid", format!("'{spec}': {why}"))
}

/// `a,b,c` or `lo:hi:count` (linear, endpoints included).
pub fn parse_real_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| grid_err(spec, "not a number"));
    match parts.len() {
        1 => spec.split(',').map(num).collect(),
        3 => {
            let (lo, hi) = (num(parts[0])?, num(parts[1])?);
            let count: usize = parts[2].trim().parse().map_err(|_| grid_err(spec, "bad count"))?;
            if count == 0 {
                return Err(grid_err(spec, "count must be positive"));
            }
            if count == 1 {
                return Ok(vec![lo]);
            }
            Ok((0..count)
                .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
                .collect())
        }
        _ => Err(grid_err(spec, "expected a list or lo:hi:count")),
    }
}

/// `a,b,c` or `lo:hi` (inclusive).
pub fn parse_int_grid(spec: &str) -> Result<Vec<usize>> {
    let num = |s: &str| s.trim().parse::<usize>().map_err(|_| grid_err(spec, "not an integer"));
    match spec.split_once(':') {
        Some((lo, hi)) => {
            let (lo, hi) = (num(lo)?, num(hi)?);
            if lo > hi {
                return Err(grid_err(spec, "empty range"));
            }
            Ok((lo..=hi).collect())
        }
        None => spec.split(',').map(num).collect(),
    }
}

fn bound_row(b: &BoundValue, eps: f64, d: usize, k: Cell) -> Vec<Cell> {
    vec![
        Cell::Str(b.formula.as_str().into()),
        Cell::Real(eps),
        Cell::Int(d as u64),
        k,
        Cell::Real(b.value),
        Cell::Real(b.integer_value),
        Cell::Bool(b.valid),
        Cell::Bool(b.constant_unspecified),
    ]
}

fn cmd_bounds_eval(eps_spec: &str, d_spec: &str, k_spec: &str) -> Result<Report> {
    let eps_grid = parse_real_grid(eps_spec)?;
    let d_grid = parse_int_grid(d_spec)?;
    let k_grid = parse_int_grid(k_spec)?;
    if let Some(&e) = eps_grid.iter().find(|&&e| !(e > 0.0 && e < 1.0)) {
        return Err(grid_err(eps_spec, &format!("eps {e} is not in (0, 1)")));
    }
    if d_grid.contains(&0) {
        return Err(grid_err(d_spec, "dimension 0"));
    }
    let mut rep = Report::new("bounds eval");
    rep.set("eps", Cell::Str(eps_spec.into()))
        .set("d", Cell::Str(d_spec.into()))
        .set("k", Cell::Str(k_spec.into()));
    let t = rep.table(
        "bound",
        &["formula_id", "eps", "d", "k", "value", "integer_value", "valid", "constant_unspecified"],
        true,
    );
    for &eps in &eps_grid {
        for &d in &d_grid {
            t.rows.push(bound_row(&bounds::thm_main_bound(eps, d)?, eps, d, Cell::Null));
            t.rows.push(bound_row(&bounds::thm_torus_bound(eps, d)?, eps, d, Cell::Null));
            for &k in &k_grid {
                t.rows.push(bound_row(&bounds::thm_k_bound(eps, d, k)?, eps, d, Cell::Int(k as u64)));
            }
            if d >= 2 {
                let params = NetParams::new(d, eps, None)?;
                let size = nets::shifted_net_size(&params, false)?;
                if size >= 3.0 && size < u64::MAX as f64 {
                    let size = size as u64;
                    t.rows.push(bound_row(&bounds::lemma_unb_bound(size, params.delta)?, eps, d, Cell::Null));
                    for &k in &k_grid {
                        let b = bounds::lemma_k_unb_bound(size, params.delta, k)?;
                        t.rows.push(bound_row(&b, eps, d, Cell::Int(k as u64)));
                    }
                }
            }
            for v in LowerVariant::ALL {
                t.rows.push(bound_row(&bounds::lower_bound(eps, d, v)?, eps, d, Cell::Null));
            }
            if d >= 2 {
                t.rows.push(bound_row(&bounds::best_known_upper(eps, d)?, eps, d, Cell::Null));
            }
            if eps > 0.25 {
                t.rows.push(bound_row(&bounds::large_eps_bounds(eps)?, eps, d, Cell::Null));
            }
        }
    }
    Ok(rep)
}

fn cmd_bounds_regimes(d_spec: &str, log_spec: &str) -> Result<Report> {
    let d_grid = parse_int_grid(d_spec)?;
    let logs = parse_real_grid(log_spec)?;
    if d_grid.iter().any(|&d| d < 2) {
        return Err(grid_err(d_spec, "dimensions must be at least 2"));
    }
    if logs.iter().any(|&l| !l.is_finite() || l >= 0.0) {
        return Err(grid_err(log_spec, "log10(eps) must be negative"));
    }
    let mut rep = Report::new("bounds regimes");
    rep.set("d", Cell::Str(d_spec.into()))
        .set("log10_eps", Cell::Str(log_spec.into()));
    let t = rep.table("regime", &["d", "log10_eps", "regime"], true);
    for &d in &d_grid {
        for &l in &logs {
            let eps = 10f64.powf(l);
            if eps == 0.0 {
                return Err(grid_err(log_spec, "eps underflows"));
            }
            let r = bounds::best_known_regime(eps, d)?;
            t.rows.push(vec![Cell::Int(d as u64), Cell::Real(l), Cell::Int(r as u64)]);
        }
    }
    Ok(rep)
}

fn trial_tables(rep: &mut Report, r: &TrialReport) {
    rep.table("summary", &["n", "trials", "successes", "fraction", "floor", "net_size"], true)
        .rows
        .push(vec![
            Cell::Int(r.n as u64),
            Cell::Int(r.trials),
            Cell::Int(r.successes),
            Cell::Real(r.fraction),
            opt_real(r.probability_floor),
            opt_int(r.net_size.map(|s| s as u64)),
        ]);
    let t = rep.table("trial", &["trial", "n", "success", "deficient_boxes", "dispersion", "certified"], false);
    for rec in &r.records {
        t.rows.push(vec![
            Cell::Int(rec.trial),
            Cell::Int(rec.n as u64),
            Cell::Bool(rec.success),
            opt_int(rec.deficient_boxes.map(|v| v as u64)),
            opt_real(rec.dispersion),
            opt_bool(rec.certified),
        ]);
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_mc_net(
    cli: &Cli,
    d: usize,
    eps: f64,
    gamma: Option<f64>,
    k: usize,
    n: Option<usize>,
    trials: u64,
    torus: bool,
) -> Result<Report> {
    let params = NetParams::new(d, eps, gamma)?;
    let kind = if torus { NetKind::Torus } else { NetKind::General };
    let net = nets::build_net_within(&params, kind, cli.mem_budget)?;
    let n = match n {
        Some(n) => n,
        None => montecarlo::lemma_sample_size(net.len(), params.delta, k)?.0,
    };
    let r = montecarlo::run_net_experiment_on(&net, k, n, trials, cli.seed)?;
    let mut rep = Report::new("mc net");
    echo_params(&mut rep, &params, kind);
    rep.set("k", Cell::Int(k as u64))
        .set("n", Cell::Int(n as u64))
        .set("trials", Cell::Int(trials))
        .set("seed", Cell::Int(cli.seed));
    trial_tables(&mut rep, &r);
    Ok(rep)
}

fn experiment(cli: &Cli, a: &ExperimentArgs, n: usize) -> Result<DispersionExperiment> {
    let mut cfg = DispersionExperiment::new(a.d, a.eps, n);
    cfg.k = a.k;
    cfg.trials = a.trials;
    cfg.seed = cli.seed;
    cfg.method = Method::parse(&a.method)?;
    cfg.periodic = a.torus;
    cfg.gamma = a.gamma;
    cfg.budget_bytes = cli.mem_budget;
    cfg.max_exact_n = a.max_n;
    Ok(cfg)
}

fn echo_experiment(rep: &mut Report, cfg: &DispersionExperiment) {
    rep.set("d", Cell::Int(cfg.d as u64))
        .set("eps", Cell::Real(cfg.eps))
        .set("gamma", opt_real(cfg.gamma))
        .set("k", Cell::Int(cfg.k as u64))
        .set("trials", Cell::Int(cfg.trials))
        .set("method", Cell::Str(cfg.method.as_str().into()))
        .set("torus", Cell::Bool(cfg.periodic))
        .set("max_n", Cell::Int(cfg.max_exact_n as u64))
        .set("seed", Cell::Int(cfg.seed));
}

fn cmd_mc_disp(cli: &Cli, a: &ExperimentArgs, n: usize, midpoint: bool) -> Result<Report> {
    let mut cfg = experiment(cli, a, n)?;
    cfg.midpoint = midpoint;
    let r = montecarlo::run_dispersion_experiment(&cfg)?;
    let mut rep = Report::new("mc disp");
    echo_experiment(&mut rep, &cfg);
    rep.set("n", Cell::Int(n as u64)).set("midpoint", Cell::Bool(midpoint));
    trial_tables(&mut rep, &r);
    Ok(rep)
}

fn cmd_mc_invert(cli: &Cli, a: &ExperimentArgs, target: f64, cap: usize) -> Result<Report> {
    let cfg = experiment(cli, a, 0)?;
    let r = montecarlo::empirical_inverse(&cfg, target, cap)?;
    let mut rep = Report::new("mc invert");
    echo_experiment(&mut rep, &cfg);
    rep.set("target", Cell::Real(target)).set("cap", Cell::Int(cap as u64));
    let lower = bounds::lower_bound(a.eps, a.d, LowerVariant::Trivial)?;
    let upper = if a.d >= 2 && a.eps <= 0.5 {
        Some(bounds::thm_main_bound(a.eps, a.d)?.integer_value)
    } else {
        None
    };
    rep.table("inverse", &["n", "target", "trivial_lower", "thm_main"], true)
        .rows
        .push(vec![
            Cell::Int(r.n as u64),
            Cell::Real(target),
            Cell::Real(lower.integer_value),
            opt_real(upper),
        ]);
    let t = rep.table("trace", &["n", "trials", "successes", "fraction"], false);
    for &(n, s, f) in &r.trace {
        t.rows
            .push(vec![Cell::Int(n as u64), Cell::Int(cfg.trials), Cell::Int(s), Cell::Real(f)]);
    }
    Ok(rep)
}
