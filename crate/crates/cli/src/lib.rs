//! Command-line front end: `maxsurf <solve|surface|figures|verify>`.
//!
//! Every command reads an optional `key = value` config file (`--config`);
//! flags given on the command line win over its entries.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use maxsurf::config::{parse_bounds, parse_grid, Config};
use maxsurf::diffgeo::{run_suite, Bounds, FdSteps, GridSpec, Tolerances, VerificationReport};
use maxsurf::immersions::{
    b_chart, geodesic_plane, hyperbolic_cylinder, maximal_phi_e, minimal_phi_e, modified_gauss_map, pair_gauss_map,
    SurfaceChart,
};
use maxsurf::mesh::{MeshGrid, Projection};
use maxsurf::sinhgordon::{solve, Interval, SinhGordonSolution};

/// Energies of the two figure sets, positive then negative.
pub const FIGURE_ENERGIES: [f64; 6] = [4.0, 1.0, 0.1, -0.5, -1.0, -6.0];

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Domain(maxsurf::Error),

    #[error("verification failed: {0}")]
    Verification(String),

    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Domain(_) => 3,
            CliError::Verification(_) => 4,
            CliError::Io { .. } => 5,
        }
    }

    fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<maxsurf::Error> for CliError {
    fn from(e: maxsurf::Error) -> Self {
        match e {
            maxsurf::Error::Parse { .. } => CliError::Usage(e.to_string()),
            e => CliError::Domain(e),
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(
    name = "maxsurf",
    version,
    about = "Maximal surfaces in AdS3 and minimal surfaces in H2xR"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the reduced sinh-Gordon equation and tabulate v, v'.
    Solve(SolveArgs),
    /// Sample one surface family on a grid and export it.
    Surface(SurfaceArgs),
    /// Write the six figure meshes and their top views.
    Figures(FiguresArgs),
    /// Run the verification suite over the named charts.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// Energy E.
    #[arg(short = 'E', long = "energy", allow_negative_numbers = true)]
    pub energy: Option<f64>,
    /// Initial value v(0); defaults to log λ for E < −1, else 0.
    #[arg(long = "v0", allow_negative_numbers = true)]
    pub v0: Option<f64>,
    /// Use the mirrored solution −v.
    #[arg(long)]
    pub negated: bool,
    /// Grid size, `NXxNY`.
    #[arg(long)]
    pub grid: Option<String>,
    /// Grid bounds, `x0:x1:y0:y1`.
    #[arg(long, allow_hyphen_values = true)]
    pub bounds: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub common: Common,
    /// Number of table rows.
    #[arg(long)]
    pub samples: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    AdsMax,
    H2xrMin,
    Cylinder,
    Geodesic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MeshFormat {
    Obj,
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct SurfaceArgs {
    pub family: Family,
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum)]
    pub format: Option<MeshFormat>,
    /// Project H² factors to the Poincaré disc.
    #[arg(long)]
    pub disc: bool,
    /// Phase t of the hyperbolic cylinder.
    #[arg(long, allow_negative_numbers = true)]
    pub phase: Option<f64>,
}

#[derive(Debug, Args)]
pub struct FiguresArgs {
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Target {
    /// The totally geodesic plane B.
    B,
    Cylinder,
    Geodesic,
    AdsMax,
    H2xrMin,
    /// Gauss-map pairs (φ_E, ψ), (φ_E, φ_E) and (ψ, ψ).
    Pair,
    /// Modified Gauss maps of φ_E; not part of the default suite.
    Modified,
}

impl Target {
    pub const DEFAULT_SUITE: [Target; 6] = [
        Target::B,
        Target::Cylinder,
        Target::Geodesic,
        Target::AdsMax,
        Target::H2xrMin,
        Target::Pair,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Text,
    Json,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Charts to check; the default suite when empty.
    #[arg(value_enum)]
    pub targets: Vec<Target>,
    #[command(flatten)]
    pub common: Common,
    /// Switch to three-point stencils with first-derivative step `h`.
    #[arg(long)]
    pub h: Option<f64>,
    #[arg(long, value_enum)]
    pub format: Option<ReportFormat>,
    /// Phase t of the hyperbolic cylinder.
    #[arg(long, allow_negative_numbers = true)]
    pub phase: Option<f64>,
}

const CONFIG_KEYS: &[&str] = &[
    "energy",
    "v0",
    "negated",
    "grid",
    "bounds",
    "out",
    "format",
    "samples",
    "disc",
    "phase",
    "h",
    "tol_on_manifold",
    "tol_conformality",
    "tol_conformal_factor",
    "tol_mean_curvature",
    "tol_hopf",
    "tol_cauchy_riemann",
    "tol_normal",
    "tol_gauss_equation",
];

/// Flags merged over the config file.
struct Settings {
    common: Common,
    config: Config,
}

impl Settings {
    fn load(common: &Common) -> Result<Self> {
        let config = match &common.config {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
                let cfg = Config::parse(&text)?;
                if let Some(k) = cfg.keys().find(|k| !CONFIG_KEYS.contains(k)) {
                    return Err(CliError::Usage(format!("{}: unknown key {k}", path.display())));
                }
                cfg
            }
            None => Config::default(),
        };
        Ok(Settings {
            common: common.clone(),
            config,
        })
    }

    fn energy(&self) -> Result<Option<f64>> {
        Ok(self.common.energy.or(self.config.get_f64("energy")?))
    }

    fn v0(&self) -> Result<Option<f64>> {
        Ok(self.common.v0.or(self.config.get_f64("v0")?))
    }

    fn flag(&self, set: bool, key: &str) -> Result<bool> {
        Ok(set || self.config.get_parsed::<bool>(key)?.unwrap_or(false))
    }

    fn f64(&self, flag: Option<f64>, key: &str) -> Result<Option<f64>> {
        Ok(flag.or(self.config.get_f64(key)?))
    }

    fn grid(&self) -> Result<GridSpec> {
        let mut g = match &self.common.grid {
            Some(s) => parse_grid(s)?,
            None => self.config.get_grid("grid")?.unwrap_or_default(),
        };
        g.bounds = match &self.common.bounds {
            Some(s) => Some(parse_bounds(s)?),
            None => self.config.get_bounds("bounds")?,
        };
        Ok(g)
    }

    fn out(&self) -> Option<PathBuf> {
        self.common
            .out
            .clone()
            .or_else(|| self.config.get("out").map(PathBuf::from))
    }

    fn value_enum<T: ValueEnum>(&self, flag: Option<T>, key: &str) -> Result<Option<T>> {
        if flag.is_some() {
            return Ok(flag);
        }
        self.config
            .get(key)
            .map(|s| T::from_str(s, true).map_err(|e| CliError::Usage(format!("{key}: {e}"))))
            .transpose()
    }

    fn solution(&self) -> Result<SinhGordonSolution> {
        let e = self
            .energy()?
            .ok_or_else(|| CliError::Usage("an energy is required (-E <real>)".into()))?;
        let negated = self.flag(self.common.negated, "negated")?;
        Ok(match self.v0()? {
            Some(v0) => solve(e, v0, negated)?,
            None => default_solution(e, negated)?,
        })
    }

    fn tolerances(&self) -> Result<Tolerances> {
        let mut t = Tolerances::default();
        for (key, slot) in [
            ("tol_on_manifold", &mut t.on_manifold),
            ("tol_conformality", &mut t.conformality),
            ("tol_conformal_factor", &mut t.conformal_factor),
            ("tol_mean_curvature", &mut t.mean_curvature),
            ("tol_hopf", &mut t.hopf),
            ("tol_cauchy_riemann", &mut t.cauchy_riemann),
            ("tol_normal", &mut t.normal),
            ("tol_gauss_equation", &mut t.gauss_equation),
        ] {
            if let Some(v) = self.config.get_f64(key)? {
                *slot = v;
            }
        }
        Ok(t)
    }
}

/// The default initial value: `log λ = ½ arccosh(−E)` for `E < −1`, where
/// `v` attains its minimum at 0, else `v0 = 0`.
pub fn default_v0(energy: f64) -> f64 {
    if energy < -1.0 {
        0.5 * (-energy).acosh()
    } else {
        0.0
    }
}

/// Solves with [`default_v0`].
pub fn default_solution(energy: f64, negated: bool) -> maxsurf::Result<SinhGordonSolution> {
    let v0 = default_v0(energy);
    // the floor is hit exactly; nudge past rounding in arccosh
    let mut last = None;
    for k in 0..4 {
        match solve(energy, v0 * (1.0 + k as f64 * 2.0 * f64::EPSILON), negated) {
            Ok(s) => return Ok(s),
            Err(e) => last = Some(e),
        }
    }
    Err(last.expect("at least one attempt"))
}

/// Inner 90% of an interval, or `[−1.5, 1.5]` when both ends are infinite.
pub fn plot_range(iv: Interval, anchor: f64) -> Interval {
    if !iv.lo.is_finite() && !iv.hi.is_finite() {
        Interval::new(-1.5, 1.5)
    } else {
        iv.inner(0.9, anchor, 1.5)
    }
}

fn e17(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

fn emit(out: &mut dyn Write, path: Option<&Path>, contents: &str) -> Result<()> {
    match path {
        Some(p) => write_file(p, contents),
        None => out
            .write_all(contents.as_bytes())
            .map_err(|e| CliError::io("<stdout>", e)),
    }
}

fn say(out: &mut dyn Write, line: &str) -> Result<()> {
    writeln!(out, "{line}").map_err(|e| CliError::io("<stdout>", e))
}

/// Rewrites `-v0` to `--v0` so the single-dash spelling parses.
fn normalize_args<I, T>(args: I) -> Vec<OsString>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    args.into_iter()
        .map(|a| {
            let a: OsString = a.into();
            match a.to_str() {
                Some("-v0") => OsString::from("--v0"),
                Some(s) if s.starts_with("-v0=") => OsString::from(format!("-{s}")),
                _ => a,
            }
        })
        .collect()
}

/// Parses `args` (including the program name) and runs the command,
/// writing regular output to `out`.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let cli = match Cli::try_parse_from(normalize_args(args)) {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            return write!(out, "{}", e.render()).map_err(|e| CliError::io("<stdout>", e));
        }
        Err(e) => return Err(CliError::Usage(e.render().to_string())),
    };
    match cli.command {
        Command::Solve(a) => cmd_solve(&a, out),
        Command::Surface(a) => cmd_surface(&a, out),
        Command::Figures(a) => cmd_figures(&a, out),
        Command::Verify(a) => cmd_verify(&a, out),
    }
}

pub fn cmd_solve(args: &SolveArgs, out: &mut dyn Write) -> Result<()> {
    let st = Settings::load(&args.common)?;
    let sol = st.solution()?;
    let n = match args.samples {
        Some(n) => n,
        None => st.config.get_parsed::<usize>("samples")?.unwrap_or(101),
    };
    if n < 2 {
        return Err(CliError::Usage("--samples must be at least 2".into()));
    }
    let iv = sol.interval();
    let mut summary = String::new();
    let _ = writeln!(summary, "branch: {}", sol.branch());
    let _ = writeln!(summary, "form: {}", sol.form_name());
    let _ = writeln!(summary, "energy: {}", sol.energy());
    let _ = writeln!(summary, "v0: {}", sol.v0());
    let _ = writeln!(summary, "negated: {}", sol.is_negated());
    match sol.lambda() {
        Some(l) => {
            let _ = writeln!(summary, "lambda: {}", e17(l));
        }
        None => summary.push_str("lambda: none\n"),
    }
    let _ = writeln!(summary, "mu: {}", e17(sol.mu().value()));
    let _ = writeln!(summary, "a0: {}", e17(sol.a0()));
    let _ = writeln!(summary, "interval: {iv}");

    let range = plot_range(iv, 0.0);
    let mut csv = String::from("x,v,v'\n");
    for i in 0..n {
        let x = range.lo + range.width() * i as f64 / (n - 1) as f64;
        let (v, vp) = sol.eval(x)?;
        let _ = writeln!(csv, "{},{},{}", e17(x), e17(v), e17(vp));
    }
    say(out, summary.trim_end())?;
    match st.out() {
        Some(p) => write_file(&p, &csv),
        None => {
            say(out, "")?;
            emit(out, None, &csv)
        }
    }
}

fn family_chart(family: Family, st: &Settings, phase: f64) -> Result<SurfaceChart> {
    Ok(match family {
        Family::AdsMax => maximal_phi_e(st.solution()?)?,
        Family::H2xrMin => minimal_phi_e(st.solution()?)?,
        Family::Cylinder => hyperbolic_cylinder(phase),
        Family::Geodesic => geodesic_plane(),
    })
}

fn render_mesh(m: &MeshGrid, format: MeshFormat) -> String {
    match format {
        MeshFormat::Obj => m.to_obj(),
        MeshFormat::Json => m.to_json(),
        MeshFormat::Csv => m.to_csv(),
    }
}

pub fn cmd_surface(args: &SurfaceArgs, out: &mut dyn Write) -> Result<()> {
    let st = Settings::load(&args.common)?;
    let phase = st.f64(args.phase, "phase")?.unwrap_or(0.0);
    let chart = family_chart(args.family, &st, phase)?;
    let proj = if st.flag(args.disc, "disc")? {
        Projection::Disc
    } else {
        Projection::Raw
    };
    let format = st.value_enum(args.format, "format")?.unwrap_or(MeshFormat::Obj);
    let mesh = MeshGrid::sample(&chart, &st.grid()?, proj)?;
    emit(out, st.out().as_deref(), &render_mesh(&mesh, format))
}

/// Grid bounds of one figure: the inner 90% of the surface interval along
/// `x` and one screw period (at most `±3`) along `y`.
pub fn figure_bounds(sol: &SinhGordonSolution) -> maxsurf::Result<Bounds> {
    let x = plot_range(sol.surface_interval()?, sol.g_base_point()?);
    let s = (2.0 * sol.energy().abs()).sqrt();
    let y = (std::f64::consts::PI / s).min(3.0);
    Ok(Bounds {
        x0: x.lo,
        x1: x.hi,
        y0: -y,
        y1: y,
    })
}

/// File stem of the figure for energy `e`.
pub fn figure_stem(e: f64) -> String {
    format!("h2xr-min_E{e}")
}

pub fn cmd_figures(args: &FiguresArgs, out: &mut dyn Write) -> Result<()> {
    let st = Settings::load(&args.common)?;
    if st.common.energy.is_some() || st.common.v0.is_some() || st.common.bounds.is_some() {
        return Err(CliError::Usage("figures uses fixed energies and bounds".into()));
    }
    let grid = st.grid()?;
    let dir = st.out().unwrap_or_else(|| PathBuf::from("figures"));
    fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    for e in FIGURE_ENERGIES {
        let sol = default_solution(e, false)?;
        let chart = minimal_phi_e(sol)?;
        let g = grid.with_bounds(figure_bounds(&sol)?);
        let mesh = MeshGrid::sample(&chart, &g, Projection::Disc)?;
        let stem = figure_stem(e);
        let obj = dir.join(format!("{stem}.obj"));
        let top = dir.join(format!("{stem}_top.csv"));
        write_file(&obj, &mesh.to_obj())?;
        write_file(&top, &mesh.to_top_csv())?;
        say(out, &obj.display().to_string())?;
        say(out, &top.display().to_string())?;
    }
    Ok(())
}

fn energies(st: &Settings) -> Result<Vec<SinhGordonSolution>> {
    match st.energy()? {
        Some(_) => Ok(vec![st.solution()?]),
        None => FIGURE_ENERGIES
            .iter()
            .map(|&e| default_solution(e, false).map_err(CliError::from))
            .collect(),
    }
}

/// The charts behind each verification target.
pub fn target_charts(target: Target, sols: &[SinhGordonSolution], phase: f64) -> maxsurf::Result<Vec<SurfaceChart>> {
    let matched = hyperbolic_cylinder(-std::f64::consts::FRAC_PI_2);
    let mut out = Vec::new();
    match target {
        Target::B => out.push(b_chart()),
        Target::Cylinder => out.push(hyperbolic_cylinder(phase)),
        Target::Geodesic => out.push(geodesic_plane()),
        Target::AdsMax => {
            for s in sols {
                out.push(maximal_phi_e(*s)?);
            }
        }
        Target::H2xrMin => {
            for s in sols {
                out.push(minimal_phi_e(*s)?);
            }
        }
        Target::Pair => {
            let cyl = hyperbolic_cylinder(phase);
            out.push(pair_gauss_map(&cyl, &cyl)?);
            for s in sols {
                let phi = maximal_phi_e(*s)?;
                out.push(pair_gauss_map(&phi, &phi)?);
                out.push(pair_gauss_map(&phi, &matched)?);
            }
        }
        Target::Modified => {
            for s in sols {
                out.push(modified_gauss_map(&maximal_phi_e(*s)?)?);
            }
        }
    }
    Ok(out)
}

fn file_stem(i: usize, label: &str) -> String {
    let clean: String = label
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || matches!(c, '-' | '.') {
                c
            } else {
                '_'
            }
        })
        .collect();
    format!("{i:02}_{}", clean.trim_end_matches('_'))
}

pub fn cmd_verify(args: &VerifyArgs, out: &mut dyn Write) -> Result<()> {
    let st = Settings::load(&args.common)?;
    let targets: Vec<Target> = if args.targets.is_empty() {
        Target::DEFAULT_SUITE.to_vec()
    } else {
        args.targets.clone()
    };
    let phase = st.f64(args.phase, "phase")?.unwrap_or(0.0);
    let steps = match st.f64(args.h, "h")? {
        Some(h) => FdSteps::second_order(h),
        None => FdSteps::default(),
    };
    let needs_energy = targets
        .iter()
        .any(|t| matches!(t, Target::AdsMax | Target::H2xrMin | Target::Pair | Target::Modified));
    let sols = if needs_energy { energies(&st)? } else { Vec::new() };
    let mut charts = Vec::new();
    for t in targets {
        charts.extend(target_charts(t, &sols, phase)?);
    }
    let reports = run_suite(&charts, &st.grid()?, &st.tolerances()?, &steps)?;

    let format = st.value_enum(args.format, "format")?.unwrap_or(ReportFormat::Text);
    match format {
        ReportFormat::Text => {
            for r in &reports {
                say(out, &summary_line(r))?;
            }
        }
        ReportFormat::Json => {
            let body: Vec<String> = reports.iter().map(VerificationReport::to_json).collect();
            say(out, &format!("[\n{}\n]", body.join(",\n")))?;
        }
    }
    if let Some(dir) = st.out() {
        fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
        for (i, r) in reports.iter().enumerate() {
            let stem = file_stem(i, &r.chart);
            write_file(&dir.join(format!("{stem}.txt")), &r.to_text())?;
            write_file(&dir.join(format!("{stem}.json")), &r.to_json())?;
        }
    }
    let failed: Vec<&str> = reports
        .iter()
        .filter(|r| !r.passed())
        .map(|r| r.chart.as_str())
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verification(failed.join(", ")))
    }
}

/// `PASS label` or `FAIL label: check=residual ...`.
pub fn summary_line(r: &VerificationReport) -> String {
    if r.passed() {
        return format!("PASS {}", r.chart);
    }
    let detail: Vec<String> = r
        .failed_checks()
        .into_iter()
        .map(|k| format!("{k}={:e}", r.checks[k].max_residual))
        .collect();
    format!("FAIL {}: {}", r.chart, detail.join(" "))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_str(args: &[&str]) -> (Result<()>, String) {
        let mut buf = Vec::new();
        let r = run(std::iter::once("maxsurf").chain(args.iter().copied()), &mut buf);
        (r, String::from_utf8(buf).unwrap())
    }

    #[test]
    fn single_dash_v0_and_negative_energy() {
        let (r, out) = run_str(&["solve", "-E", "-1", "-v0", "0", "--samples", "3"]);
        r.unwrap();
        assert!(out.contains("branch: zero"), "{out}");
        assert_eq!(out.lines().filter(|l| l.starts_with("-1.")).count(), 1);
    }

    #[test]
    fn log_tan_branch() {
        let (r, out) = run_str(&["solve", "-E", "1"]);
        r.unwrap();
        assert!(out.contains("form: log-tan"), "{out}");
    }

    #[test]
    fn exit_codes() {
        assert_eq!(run_str(&["surface", "torus"]).0.unwrap_err().exit_code(), 2);
        assert_eq!(run_str(&["solve"]).0.unwrap_err().exit_code(), 2);
        assert_eq!(
            run_str(&["solve", "-E", "-3", "-v0", "0"]).0.unwrap_err().exit_code(),
            3
        );
        assert_eq!(run_str(&["verify", "torus"]).0.unwrap_err().exit_code(), 2);
        assert_eq!(
            run_str(&["solve", "-E", "1", "--config", "/nonexistent/maxsurf.conf"])
                .0
                .unwrap_err()
                .exit_code(),
            5
        );
    }

    #[test]
    fn help_is_not_an_error() {
        let (r, out) = run_str(&["--help"]);
        r.unwrap();
        assert!(out.contains("verify"));
    }

    #[test]
    fn default_v0_sits_on_the_floor() {
        for e in [-1.5, -3.0, -6.0, -40.0] {
            let s = default_solution(e, false).unwrap();
            assert!(s.eval_v_prime(0.0).unwrap().abs() < 1e-6, "E={e}");
        }
        assert_eq!(default_v0(0.5), 0.0);
    }

    #[test]
    fn stems_are_filesystem_safe() {
        assert_eq!(file_stem(3, "ads-max(E=-0.5,v0=0)"), "03_ads-max_E_-0.5_v0_0");
    }
}
