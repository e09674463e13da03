//! `fpcalc`: batch front end for fpcalc-core.
//!
//! Exit codes: 0 success, 1 identity failure, 2 input error, 3 numeric or
//! domain error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fpcalc_core::checks::{linspace, run_suite};
use fpcalc_core::pde::{convergence, Convergence, Family};
use fpcalc_core::spec::Arg;
use fpcalc_core::transforms::{density_grid, moments_any, stieltjes_density};
use fpcalc_core::{FpError, Measure, Spec, ToleranceConfig, C64};

#[derive(Parser)]
#[command(name = "fpcalc", version, about = "Free probability calculator")]
struct Cli {
    /// TOML file overriding tolerance settings.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Density of a measure on a uniform grid, as `x,density` CSV.
    Density {
        /// Measure: spec file, inline JSON, or shorthand like `free_poisson` or `beta_alpha:alpha=0.5`.
        #[arg(long = "spec", alias = "mu")]
        spec: String,
        #[arg(long, allow_negative_numbers = true)]
        xmin: f64,
        #[arg(long, allow_negative_numbers = true)]
        xmax: f64,
        #[arg(long, default_value_t = 512)]
        n: usize,
        #[arg(long, value_enum, default_value_t = Method::Auto)]
        method: Method,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Convolve measures.
    Conv {
        /// add-free, add-boolean, add-monotone, mul-free, mul-monotone,
        /// boolean-power, free-power or mul-free-power.
        #[arg(long)]
        op: String,
        #[arg(long)]
        mu: String,
        #[arg(long)]
        nu: Option<String>,
        /// Exponent of the power operations.
        #[arg(long, allow_negative_numbers = true)]
        t: Option<f64>,
        #[command(flatten)]
        emit: Emit,
    },
    /// Apply a subordination map.
    Subordinate {
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long)]
        mu: String,
        /// Subordinating measure for `mult` and `add`.
        #[arg(long)]
        sigma: Option<String>,
        /// Time of the Belinschi-Nica map.
        #[arg(long)]
        t: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        a: Option<f64>,
        #[arg(long)]
        b: Option<f64>,
        #[command(flatten)]
        emit: Emit,
    },
    /// Run a bundled identity suite.
    Check {
        #[arg(long)]
        suite: String,
        /// Tolerance applied to every deviation-type identity.
        #[arg(long)]
        tol: Option<f64>,
        /// Print the JSON report instead of the table.
        #[arg(long)]
        json: bool,
        /// Also write the JSON report here.
        #[arg(long, value_name = "PATH")]
        report: Option<PathBuf>,
    },
    /// Finite-difference residual of a Burgers-type equation at `h` and `h/2`.
    PdeResidual {
        #[arg(long)]
        family: String,
        #[arg(long)]
        mu: String,
        #[arg(long)]
        t: f64,
        /// `re,im`
        #[arg(long, allow_negative_numbers = true)]
        z: String,
        #[arg(long, default_value_t = 1e-3)]
        h: f64,
        /// Drift of `cauchy-additive`.
        #[arg(long, allow_negative_numbers = true)]
        a: Option<f64>,
        /// Scale of `cauchy-additive`.
        #[arg(long)]
        b: Option<f64>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    /// Closed-form boundary values where available.
    Auto,
    Stieltjes,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Mult,
    Add,
    BelinschiNica,
    Cauchy,
    BpMult,
    BpAdd,
    Circle,
}

#[derive(Args)]
struct Emit {
    #[arg(long, value_enum, default_value_t = EmitKind::Spec)]
    emit: EmitKind,
    /// Number of moments for `--emit moments`.
    #[arg(long, default_value_t = 4)]
    moments: usize,
    #[arg(long, allow_negative_numbers = true)]
    xmin: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    xmax: Option<f64>,
    #[arg(long, default_value_t = 512)]
    n: usize,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum EmitKind {
    Spec,
    Moments,
    Density,
}

enum Fail {
    Identity,
    Input(String),
    Numeric(String),
}

impl From<FpError> for Fail {
    fn from(e: FpError) -> Self {
        if e.is_input_error() {
            Fail::Input(e.to_string())
        } else {
            Fail::Numeric(e.to_string())
        }
    }
}

type Res<T> = Result<T, Fail>;

fn input(msg: impl Into<String>) -> Fail {
    Fail::Input(msg.into())
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Fail::Identity) => ExitCode::from(1),
        Err(Fail::Input(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Fail::Numeric(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(3)
        }
    }
}

fn run(cli: Cli) -> Res<()> {
    init_threads()?;
    let cfg = load_config(cli.config.as_deref())?;
    match cli.cmd {
        Cmd::Density { spec, xmin, xmax, n, method, out } => {
            let mu = measure_arg(&spec)?.build(&cfg)?;
            let csv = density_csv(&mu, xmin, xmax, n, method, &cfg)?;
            write_out(out.as_deref(), &csv)
        }
        Cmd::Conv { op, mu, nu, t, emit } => {
            let binary = ["add-free", "add-boolean", "add-monotone", "mul-free", "mul-monotone"];
            let power = ["boolean-power", "free-power", "mul-free-power"];
            let mut args = vec![Arg::from(measure_arg(&mu)?)];
            if binary.contains(&op.as_str()) {
                let nu = nu.ok_or_else(|| input(format!("`{op}` needs --nu")))?;
                args.push(measure_arg(&nu)?.into());
            } else if power.contains(&op.as_str()) {
                let t = t.ok_or_else(|| input(format!("`{op}` needs --t")))?;
                args.push(t.into());
            } else {
                return Err(input(format!(
                    "unknown convolution `{op}` (expected one of {:?})",
                    [&binary[..], &power[..]].concat()
                )));
            }
            emit_measure(&Spec::expr(&op, args).build(&cfg)?, &emit, &cfg)
        }
        Cmd::Subordinate { kind, mu, sigma, t, a, b, emit } => {
            let mu = Arg::from(measure_arg(&mu)?);
            let need = |v: Option<f64>, flag: &str| v.ok_or_else(|| input(format!("this kind needs --{flag}")));
            let sigma = || -> Res<Arg> {
                let s = sigma.as_deref().ok_or_else(|| input("this kind needs --sigma"))?;
                Ok(measure_arg(s)?.into())
            };
            let spec = match kind {
                Kind::Mult => Spec::expr("mult-subordinate", vec![sigma()?, mu]),
                Kind::Add => Spec::expr("add-subordinate", vec![sigma()?, mu]),
                Kind::BelinschiNica => Spec::expr("belinschi-nica", vec![need(t, "t")?.into(), mu]),
                Kind::Cauchy => Spec::expr("cauchy-subordinate", vec![need(a, "a")?.into(), need(b, "b")?.into(), mu]),
                Kind::Circle => Spec::expr("circle-subordinate", vec![need(a, "a")?.into(), need(b, "b")?.into(), mu]),
                Kind::BpMult => Spec::expr("bp-mult", vec![mu]),
                Kind::BpAdd => Spec::expr("bp-add", vec![mu]),
            };
            emit_measure(&spec.build(&cfg)?, &emit, &cfg)
        }
        Cmd::Check { suite, tol, json, report } => {
            if let Some(t) = tol {
                if !(t > 0.0 && t.is_finite()) {
                    return Err(input(format!("--tol must be positive, got {t}")));
                }
            }
            let rep = run_suite(&suite, &cfg, tol)?;
            if let Some(p) = report {
                write_out(Some(&p), &rep.to_json())?;
            }
            if json {
                println!("{}", rep.to_json());
            } else {
                print!("{}", rep.table());
            }
            if rep.has_errors() {
                Err(Fail::Numeric(format!("suite {suite}: some identities could not be evaluated")))
            } else if rep.pass() {
                Ok(())
            } else {
                Err(Fail::Identity)
            }
        }
        Cmd::PdeResidual { family, mu, t, z, h, a, b } => {
            let mut fam: Family = family.parse()?;
            if let Family::CauchyAdditive { a: a0, b: b0 } = fam {
                fam = Family::CauchyAdditive {
                    a: a.unwrap_or(a0),
                    b: b.unwrap_or(b0),
                };
            } else if a.is_some() || b.is_some() {
                return Err(input("--a and --b only apply to cauchy-additive"));
            }
            let mu = measure_arg(&mu)?.build(&cfg)?;
            let z = parse_complex(&z)?;
            let c = convergence(fam, &mu, t, z, h, &cfg)?;
            println!("{}", Convergence::csv_header());
            println!("{}", c.csv_row());
            Ok(())
        }
    }
}

fn init_threads() -> Res<()> {
    let Ok(v) = std::env::var("FPCALC_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| input(format!("FPCALC_THREADS must be a positive integer, got `{v}`")))?;
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Fail::Numeric(e.to_string()))?;
    #[cfg(not(feature = "parallel"))]
    let _ = n;
    Ok(())
}

fn load_config(path: Option<&Path>) -> Res<ToleranceConfig> {
    let Some(path) = path else {
        return Ok(ToleranceConfig::default());
    };
    let text = read(path)?;
    let cfg: ToleranceConfig =
        toml::from_str(&text).map_err(|e| input(format!("config {}: {e}", path.display())))?;
    cfg.validate()?;
    Ok(cfg)
}

fn read(path: &Path) -> Res<String> {
    std::fs::read_to_string(path).map_err(|e| input(format!("{}: {e}", path.display())))
}

/// A spec file, inline JSON, `delta_<a>`, or `law[:k=v,...]`.
fn measure_arg(s: &str) -> Res<Spec> {
    let s = s.trim();
    if s.starts_with('{') {
        return Ok(Spec::parse(s)?);
    }
    let path = Path::new(s);
    if path.exists() {
        return Ok(Spec::parse(&read(path)?)?);
    }
    if let Some(a) = s.strip_prefix("delta_") {
        let a: f64 = a.parse().map_err(|_| input(format!("bad point mass `{s}`")))?;
        return Ok(Spec::named("dirac", &[("a", a)]));
    }
    let (name, rest) = s.split_once(':').unwrap_or((s, ""));
    if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
        return Err(input(format!("`{s}` is neither a file, JSON, nor a law name")));
    }
    let mut params = Vec::new();
    for kv in rest.split(',').filter(|p| !p.is_empty()) {
        let (k, v) = kv.split_once('=').ok_or_else(|| input(format!("bad parameter `{kv}`")))?;
        let v: f64 = v.trim().parse().map_err(|_| input(format!("bad value in `{kv}`")))?;
        params.push((k.trim(), v));
    }
    Ok(Spec::named(name, &params))
}

fn parse_complex(s: &str) -> Res<C64> {
    let bad = || input(format!("expected `re,im`, got `{s}`"));
    let (re, im) = s.split_once(',').ok_or_else(bad)?;
    let re: f64 = re.trim().parse().map_err(|_| bad())?;
    let im: f64 = im.trim().parse().map_err(|_| bad())?;
    Ok(C64::new(re, im))
}

fn density_csv(mu: &Measure, xmin: f64, xmax: f64, n: usize, method: Method, cfg: &ToleranceConfig) -> Res<String> {
    if !(xmin < xmax && xmin.is_finite() && xmax.is_finite()) {
        return Err(input(format!("need finite xmin < xmax, got {xmin} and {xmax}")));
    }
    if n < 2 {
        return Err(input("need at least 2 grid points"));
    }
    let xs = linspace(xmin, xmax, n);
    let g = match method {
        Method::Auto => density_grid(mu, &xs, cfg)?,
        Method::Stieltjes => stieltjes_density(mu, &xs, cfg)?,
    };
    Ok(g.to_csv())
}

fn emit_measure(mu: &Measure, emit: &Emit, cfg: &ToleranceConfig) -> Res<()> {
    let text = match emit.emit {
        EmitKind::Spec => mu.spec().to_json() + "\n",
        EmitKind::Moments => {
            let ms = moments_any(mu, emit.moments)?;
            let mut s = ms.iter().map(|&m| num(m)).collect::<Vec<_>>().join(",");
            s.push('\n');
            s
        }
        EmitKind::Density => {
            let (lo, hi) = match (emit.xmin, emit.xmax) {
                (Some(a), Some(b)) => (a, b),
                _ => return Err(input("--emit density needs --xmin and --xmax")),
            };
            density_csv(mu, lo, hi, emit.n, Method::Auto, cfg)?
        }
    };
    write_out(emit.out.as_deref(), &text)
}

fn write_out(path: Option<&Path>, text: &str) -> Res<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| input(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
