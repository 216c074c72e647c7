use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use radial_core::bifurcation::{log_grid, sweep_curve, BifurcationOptions};
use radial_core::intersect::{count_intersections, IntersectOptions, LimitSingular, Profile};
use radial_core::morse::morse_regime_check;
use radial_core::nonlinearity::classify;
use radial_core::radial_ode::{
    check_tol, residual_norm, shoot_limit, shoot_regular, ShootOptions, ZeroMode, DEFAULT_R_MAX, DEFAULT_TOL,
};
use radial_core::singular::{construct_singular, SingularOptions};
use radial_core::verification::{parse_suite, run_suite, summary_lines};
use radial_core::{make_builtin, Error, Nonlinearity, Result};

#[derive(Parser)]
#[command(name = "radial", version, about = "Radial solutions of Δu + f(u) = 0 with supercritical growth")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct Common {
    /// Nonlinearity, e.g. `exp`, `power:p=5,a=1`, `iterexp:n=2`.
    #[arg(long = "f")]
    f: String,
    /// Space dimension.
    #[arg(long = "N")]
    n: u32,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    /// Output file; JSON goes to stdout without it, CSV requires it.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum Zero {
    Stop,
    Record,
    Off,
}

#[derive(Subcommand)]
enum Command {
    /// Growth exponent q, critical exponents and regime.
    Classify(Common),
    /// Regular solution with u(0) = rho.
    Shoot {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        rho: f64,
        #[arg(long, default_value_t = DEFAULT_R_MAX)]
        r_max: f64,
        /// Behaviour at the first zero; by default the domain of f decides.
        #[arg(long, value_enum)]
        zero: Option<Zero>,
    },
    /// Solution of the limit equation with v(0) = sigma.
    LimitShoot {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        sigma: f64,
        /// Growth exponent; defaults to the classified q of f.
        #[arg(long)]
        q: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_R_MAX)]
        s_max: f64,
    },
    /// Singular solution u* and its diagnostics.
    Singular {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        q: Option<f64>,
        /// Start the asymptotic representation no later than this radius.
        #[arg(long)]
        r_min: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_R_MAX)]
        r_max: f64,
    },
    /// Crossings of two profiles: `regular:RHO`, `limit:SIGMA`, `singular` or `limit-singular`.
    Intersect {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        first: String,
        #[arg(long)]
        second: String,
        #[arg(long, default_value_t = 0.0)]
        lo: f64,
        #[arg(long)]
        hi: f64,
        #[arg(long)]
        q: Option<f64>,
        /// Inner radius of the singular solution when one is used.
        #[arg(long)]
        r_min: Option<f64>,
    },
    /// Bifurcation diagram mu(rho) on the unit ball.
    Bifurcate {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1e-2)]
        rho_min: f64,
        #[arg(long, default_value_t = 1e3)]
        rho_max: f64,
        #[arg(long, default_value_t = 200)]
        points: usize,
        #[arg(long, default_value_t = 1e3)]
        r_max: f64,
        /// Worker threads; results do not depend on it.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Hardy-threshold test and linearized zero counts for u*.
    Morse(Common),
    /// Runs acceptance criteria and writes their report.
    Verify {
        /// `all` or a comma-separated list of criterion numbers.
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long)]
        jobs: Option<usize>,
        /// Directory for the report and data files.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Validated form of the shared flags.
struct Setup {
    f: Nonlinearity,
    n: u32,
    tol: f64,
    out: Option<PathBuf>,
    format: Format,
}

impl Setup {
    fn new(c: &Common, csv_ok: bool) -> Result<Self> {
        let f = make_builtin(&c.f)?;
        check_tol(c.tol)?;
        if c.n < 1 {
            return Err(Error::Constraint("N must be positive".into()));
        }
        match (c.format, &c.out) {
            (Format::Csv, _) if !csv_ok => return Err(Error::Constraint("this command has no CSV output".into())),
            (Format::Csv, None) => return Err(Error::Constraint("--format csv needs --out".into())),
            _ => {}
        }
        Ok(Setup { f, n: c.n, tol: c.tol, out: c.out.clone(), format: c.format })
    }

    fn q(&self, given: Option<f64>) -> Result<f64> {
        match given {
            Some(q) if q >= 1.0 && q.is_finite() => Ok(q),
            Some(q) => Err(Error::Constraint(format!("q must be finite and >= 1, got {q}"))),
            None => Ok(classify(&self.f, self.n)?.q),
        }
    }

    /// Writes `summary` as JSON, or `csv` plus a `.meta.json` sidecar
    /// holding `summary`; prints `line` unless JSON went to stdout.
    fn emit(&self, mut summary: Value, csv: Option<String>, line: String) -> Result<()> {
        if let Value::Object(map) = &mut summary {
            map.insert("f".into(), json!(self.f.id()));
            map.insert("N".into(), json!(self.n));
            map.insert("tol".into(), json!(self.tol));
        }
        let text = serde_json::to_string_pretty(&summary).expect("summary serializes") + "\n";
        match (self.format, &self.out) {
            (Format::Json, None) => print!("{text}"),
            (Format::Json, Some(path)) => {
                fs::write(path, text)?;
                println!("{line}; wrote {}", path.display());
            }
            (Format::Csv, Some(path)) => {
                let body = csv.ok_or_else(|| Error::Constraint("this command has no CSV output".into()))?;
                fs::write(path, body)?;
                fs::write(meta_path(path), text)?;
                println!("{line}; wrote {}", path.display());
            }
            (Format::Csv, None) => unreachable!("checked in Setup::new"),
        }
        Ok(())
    }
}

fn meta_path(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".meta.json");
    PathBuf::from(name)
}

fn pool(jobs: Option<usize>) -> Result<rayon::ThreadPool> {
    let n = jobs.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if n == 0 {
        return Err(Error::Constraint("--jobs must be at least 1".into()));
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build().map_err(|e| Error::Constraint(e.to_string()))
}

fn opt_f64(v: Option<f64>) -> Value {
    v.map_or(Value::Null, |x| json!(x))
}

enum ProfileSpec {
    Regular(f64),
    Limit(f64),
    Singular,
    LimitSingular,
}

impl ProfileSpec {
    fn parse(s: &str) -> Result<Self> {
        let bad = |reason: &str| Error::Parse { spec: s.into(), reason: reason.into() };
        let number = |v: &str| v.parse::<f64>().ok().filter(|x| x.is_finite()).ok_or_else(|| bad("expected a number"));
        match s.split_once(':') {
            Some(("regular", v)) => Ok(ProfileSpec::Regular(number(v)?)),
            Some(("limit", v)) => Ok(ProfileSpec::Limit(number(v)?)),
            None if s == "singular" => Ok(ProfileSpec::Singular),
            None if s == "limit-singular" => Ok(ProfileSpec::LimitSingular),
            _ => Err(bad("expected regular:RHO, limit:SIGMA, singular or limit-singular")),
        }
    }

    fn is_limit(&self) -> bool {
        matches!(self, ProfileSpec::Limit(_) | ProfileSpec::LimitSingular)
    }
}

fn build_profile<'a>(
    spec: &ProfileSpec,
    s: &'a Setup,
    q: f64,
    hi: f64,
    r_min: Option<f64>,
) -> Result<Box<dyn Profile + 'a>> {
    let opts = ShootOptions::new(s.tol, hi);
    Ok(match *spec {
        ProfileSpec::Regular(rho) => Box::new(shoot_regular(&s.f, s.n, rho, opts)?),
        ProfileSpec::Limit(sigma) => Box::new(shoot_limit(&s.f, s.n, q, sigma, opts)?),
        ProfileSpec::Singular => {
            let sopts = SingularOptions { tol: s.tol, r_max: hi.max(1.0), r_min, ..Default::default() };
            Box::new(construct_singular(&s.f, s.n, q, sopts)?)
        }
        ProfileSpec::LimitSingular => Box::new(LimitSingular { f: &s.f, n: s.n, q }),
    })
}

fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Classify(c) => {
            let s = Setup::new(&c, false)?;
            let report = classify(&s.f, s.n)?;
            let line = format!("classify {} N={}: q = {}, regime {:?}", s.f.id(), s.n, report.q, report.regime);
            s.emit(serde_json::to_value(&report).expect("report serializes"), None, line)?;
        }
        Command::Shoot { common, rho, r_max, zero } => {
            let s = Setup::new(&common, true)?;
            let mut opts = ShootOptions::new(s.tol, r_max);
            if let Some(z) = zero {
                opts = opts.zero_mode(match z {
                    Zero::Stop => ZeroMode::Stop,
                    Zero::Record => ZeroMode::Record,
                    Zero::Off => ZeroMode::Off,
                });
            }
            let sol = shoot_regular(&s.f, s.n, rho, opts)?;
            let summary = json!({
                "command": "shoot",
                "rho": rho,
                "r_max": r_max,
                "first_zero": opt_f64(sol.first_zero),
                "termination": sol.termination,
                "r_end": sol.r_max(),
                "nodes": sol.radii().len(),
                "residual": residual_norm(&s.f, &sol),
            });
            let line = format!("shoot {} N={} rho={rho}: first zero {:?}, {:?}", s.f.id(), s.n, sol.first_zero, sol.termination);
            s.emit(summary, Some(sol.to_csv()), line)?;
        }
        Command::LimitShoot { common, sigma, q, s_max } => {
            let s = Setup::new(&common, true)?;
            let q = s.q(q)?;
            let sol = shoot_limit(&s.f, s.n, q, sigma, ShootOptions::new(s.tol, s_max))?;
            let summary = json!({
                "command": "limit-shoot",
                "q": q,
                "sigma": sigma,
                "s_max": s_max,
                "termination": sol.termination,
                "s_end": sol.r_max(),
                "nodes": sol.radii().len(),
                "residual": residual_norm(&s.f, &sol),
            });
            let line = format!("limit-shoot {} N={} q={q} sigma={sigma}: {:?}", s.f.id(), s.n, sol.termination);
            s.emit(summary, Some(sol.to_csv()), line)?;
        }
        Command::Singular { common, q, r_min, r_max } => {
            let s = Setup::new(&common, true)?;
            let q = s.q(q)?;
            let sopts = SingularOptions { tol: s.tol, r_max, r_min, ..Default::default() };
            let sing = construct_singular(&s.f, s.n, q, sopts)?;
            let summary = json!({
                "command": "singular",
                "q": q,
                "k": sing.k,
                "r_start": sing.r_start(),
                "r_switch": sing.r_switch(),
                "r0_star": opt_f64(sing.r0_star),
                "residual": sing.residual_on(sing.r_start(), sing.r_end())?,
                "diagnostics": sing.diagnostics,
            });
            let line = format!("singular {} N={} q={q}: r0* = {:?}", s.f.id(), s.n, sing.r0_star);
            let csv = if s.format == Format::Csv { Some(sing.to_csv()?) } else { None };
            s.emit(summary, csv, line)?;
        }
        Command::Intersect { common, first, second, lo, hi, q, r_min } => {
            let s = Setup::new(&common, true)?;
            let (a_spec, b_spec) = (ProfileSpec::parse(&first)?, ProfileSpec::parse(&second)?);
            if a_spec.is_limit() != b_spec.is_limit() {
                return Err(Error::Constraint("both profiles must belong to the same equation".into()));
            }
            if !(hi > lo && lo >= 0.0) {
                return Err(Error::Constraint(format!("need 0 <= lo < hi, got {lo}, {hi}")));
            }
            let q = s.q(q)?;
            let a = build_profile(&a_spec, &s, q, hi, r_min)?;
            let b = build_profile(&b_spec, &s, q, hi, r_min)?;
            let opts = IntersectOptions { s_max: hi.max(IntersectOptions::default().s_max), ..Default::default() };
            let rep = count_intersections(a.as_ref(), b.as_ref(), (lo, hi), opts)?;
            let mut csv = String::from("r,residual\n");
            for z in &rep.zeros {
                csv += &format!("{:.16e},{:.16e}\n", z.r, z.residual);
            }
            let mut summary = serde_json::to_value(&rep).expect("report serializes");
            summary["command"] = json!("intersect");
            summary["first"] = json!(first);
            summary["second"] = json!(second);
            summary["q"] = json!(q);
            let line = format!("intersect {} N={} {first} vs {second} on ({lo}, {hi}): {} crossings", s.f.id(), s.n, rep.count);
            s.emit(summary, Some(csv), line)?;
        }
        Command::Bifurcate { common, rho_min, rho_max, points, r_max, jobs } => {
            let s = Setup::new(&common, true)?;
            let grid = log_grid(rho_min, rho_max, points)?;
            let workers = pool(jobs)?;
            let opts = BifurcationOptions { tol: s.tol, r_max, ..Default::default() };
            let curve = workers.install(|| sweep_curve(&s.f, s.n, &grid, opts))?;
            let mut summary = serde_json::to_value(&curve).expect("curve serializes");
            if let Value::Object(map) = &mut summary {
                map.remove("samples");
                map.insert("command".into(), json!("bifurcate"));
                map.insert("points".into(), json!(points));
                map.insert("failed_samples".into(), json!(curve.samples.iter().filter(|x| x.error.is_some()).count()));
            }
            let class = serde_json::to_value(curve.classification).expect("class serializes");
            let line = format!(
                "bifurcate {} N={}: mu* = {:?}, {} turning points, {} crossings, {}",
                s.f.id(),
                s.n,
                curve.mu_star,
                curve.turning_points.len(),
                curve.crossings,
                class.as_str().unwrap_or_default()
            );
            s.emit(summary, Some(curve.to_csv()), line)?;
        }
        Command::Morse(c) => {
            let s = Setup::new(&c, false)?;
            let report = morse_regime_check(&s.f, s.n)?;
            let line = format!("morse {} N={}: c* = {}, hardy = {}, {:?}", s.f.id(), s.n, report.c_star, report.hardy, report.verdict);
            s.emit(serde_json::to_value(&report).expect("report serializes"), None, line)?;
        }
        Command::Verify { suite, jobs, out } => {
            let ids = parse_suite(&suite)?;
            let workers = pool(jobs)?;
            let jobs = workers.current_num_threads();
            let results = run_suite(&ids, jobs)?;
            for line in summary_lines(&results) {
                println!("{line}");
            }
            if let Some(dir) = out {
                fs::create_dir_all(&dir)?;
                let text = serde_json::to_string_pretty(&results).expect("results serialize") + "\n";
                fs::write(dir.join("verify_report.json"), text)?;
                for r in &results {
                    for (name, body) in &r.artifacts {
                        fs::write(dir.join(name), body)?;
                    }
                }
            }
            if results.iter().any(|r| !r.pass) {
                return Ok(2);
            }
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
