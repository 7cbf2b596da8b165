use clap::{Args, Parser, Subcommand, ValueEnum};
use dphase::error::Error;
use dphase::exponents::{derive, ExponentConfig};
use dphase::gehring::{gehring_constants, gehring_verify, GehringInput, PremiseMode};
use dphase::grid::Grid;
use dphase::harness::model_residual;
use dphase::maximal::{maximal_function, MaximalSpec, Mode};
use dphase::report::{to_json_string, to_value, Report};
use dphase::suites::{run_suite, SuiteConfig, SUITES};
use dphase::truncation::{assemble_g, lambda_floor, truncate_and_report, DataFields, ModelCase, TruncationSetup};
use dphase::weights::{estimate_seminorm, regularize, Weight};
use dphase::whitney::{cover, overlap_cap, partition_of_unity, verify_cover, verify_partition};
use dphase::{io, meanpoly, potentials};
use serde_json::{json, Map, Value};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "dptool", version, about = "Grid checks for double-phase higher-integrability estimates")]
struct Cli {
    /// Corpus seed, decimal or 0x-prefixed hex.
    #[arg(long, global = true, value_parser = parse_seed)]
    seed: Option<u64>,
    /// Cells per axis for the suites' main grids.
    #[arg(long, global = true)]
    grid_size: Option<usize>,
    /// Relative output paths are resolved here; `verify` writes <suite>.json into it.
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Derive the auxiliary exponents of a configuration.
    Exponents {
        #[arg(long)]
        config: PathBuf,
    },
    /// Hoelder regularization of a weight.
    Regularize {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        output: PathBuf,
    },
    /// Hardy-Littlewood and fractional maximal functions.
    Maximal {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        beta: f64,
        #[arg(long, value_enum, default_value_t = ModeArg::Uncentered)]
        mode: ModeArg,
        /// ball:cx,cy,r
        #[arg(long)]
        restrict: Option<String>,
        #[arg(long, default_value_t = 1)]
        iterate: usize,
        #[arg(long)]
        output: PathBuf,
    },
    /// Riesz potential restricted to a ball.
    Riesz {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        gamma: f64,
        /// cx,cy,r
        #[arg(long)]
        ball: String,
        #[arg(long)]
        output: PathBuf,
    },
    /// Mean-value polynomial on a ball.
    Polyfit {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        ball: String,
        #[arg(long)]
        weight: PathBuf,
        #[arg(long)]
        order: usize,
        /// Expansion point; defaults to the ball centre.
        #[arg(long)]
        center: Option<String>,
    },
    /// Whitney cover of a mask (nonzero samples are inside).
    Whitney {
        #[arg(long)]
        mask: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[arg(long)]
        verify: bool,
        /// Derivative orders checked on the partition of unity.
        #[arg(long, default_value_t = 2)]
        order: usize,
    },
    /// Truncation at lambda = mult * Lambda0.
    Truncate {
        #[arg(long)]
        u: PathBuf,
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 1.5)]
        lambda_mult: f64,
        /// Defaults to the grid centre.
        #[arg(long)]
        center: Option<String>,
        /// Defaults to the largest R with B_4R inside the grid.
        #[arg(long)]
        radius: Option<f64>,
        #[arg(long)]
        output: PathBuf,
        #[arg(long)]
        report: PathBuf,
    },
    /// Gehring certificate, or a premise/conclusion scan with --verify.
    Gehring(GehringArgs),
    /// Weak-form residual of the model system against a test function.
    Residual {
        #[arg(long)]
        u: PathBuf,
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        phi: PathBuf,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        q: f64,
        #[arg(long, default_value_t = 1)]
        m: usize,
    },
    /// Run a verification suite and emit its report.
    Verify {
        #[arg(long)]
        suite: String,
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

#[derive(Args)]
struct GehringArgs {
    #[arg(long, default_value_t = 2)]
    n: usize,
    #[arg(long = "A", default_value_t = 1.0)]
    a: f64,
    #[arg(long, default_value_t = 0.5)]
    kappa: f64,
    #[arg(long, default_value_t = 0.5)]
    eps0: f64,
    #[arg(long)]
    verify: bool,
    #[arg(long)]
    f1: Option<PathBuf>,
    /// Defaults to zero.
    #[arg(long)]
    f2: Option<PathBuf>,
    #[arg(long, default_value_t = 0.0)]
    theta: f64,
    /// Largest scanned radius; defaults to a sixth of the domain radius.
    #[arg(long)]
    r0: Option<f64>,
    /// cx,cy,r; defaults to the ball inscribed in the grid.
    #[arg(long)]
    omega: Option<String>,
    #[arg(long, value_enum, default_value_t = PremiseArg::All)]
    premise: PremiseArg,
    /// Exponent tested in the conclusion; defaults to eps_max.
    #[arg(long)]
    eps: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Centered,
    Uncentered,
}

#[derive(Clone, Copy, ValueEnum)]
enum PremiseArg {
    All,
    Decaying,
}

fn parse_seed(s: &str) -> Result<u64, String> {
    let r = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(h) => u64::from_str_radix(h, 16),
        None => s.parse(),
    };
    r.map_err(|e| format!("bad seed {s:?}: {e}"))
}

/// Outcome of a command that ran to completion.
enum Outcome {
    Pass,
    CheckFailed,
}

impl Outcome {
    fn from_bool(ok: bool) -> Self {
        if ok {
            Outcome::Pass
        } else {
            Outcome::CheckFailed
        }
    }
}

type CliResult = Result<Outcome, Error>;

struct Ctx {
    seed: Option<u64>,
    grid_size: Option<usize>,
    output_dir: Option<PathBuf>,
}

impl Ctx {
    fn out_path(&self, p: &Path) -> PathBuf {
        match &self.output_dir {
            Some(d) if p.is_relative() => d.join(p),
            _ => p.to_path_buf(),
        }
    }

    fn ensure_dir(&self) -> Result<(), Error> {
        if let Some(d) = &self.output_dir {
            std::fs::create_dir_all(d)?;
        }
        Ok(())
    }
}

fn numbers(s: &str) -> Result<Vec<f64>, Error> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| Error::Domain(format!("bad number {t:?} in {s:?}: {e}"))))
        .collect()
}

/// "cx,..,r" for an n-dimensional grid.
fn parse_ball(s: &str, n: usize) -> Result<(Vec<f64>, f64), Error> {
    let v = numbers(s.strip_prefix("ball:").unwrap_or(s))?;
    if v.len() != n + 1 {
        return Err(Error::Domain(format!("ball {s:?} needs {n} centre coordinates and a radius")));
    }
    let r = v[n];
    if !(r > 0.0) {
        return Err(Error::Domain(format!("ball radius must be positive in {s:?}")));
    }
    Ok((v[..n].to_vec(), r))
}

fn read_config(path: &Path) -> Result<ExponentConfig, Error> {
    ExponentConfig::from_json(&std::fs::read_to_string(path)?)
}

fn print(v: &Value) -> Result<(), Error> {
    print!("{}", to_json_string(v)?);
    Ok(())
}

fn grid_centre(g: &Grid) -> Vec<f64> {
    g.origin.iter().zip(g.upper()).map(|(lo, hi)| 0.5 * (lo + hi)).collect()
}

/// Half the shortest side of the grid box.
fn inscribed_radius(g: &Grid) -> f64 {
    g.dims.iter().map(|&d| 0.5 * d as f64 * g.spacing).fold(f64::INFINITY, f64::min)
}

fn exponents(config: &Path) -> CliResult {
    let cfg = read_config(config)?;
    print(&to_value(&derive(&cfg)?))?;
    Ok(Outcome::Pass)
}

fn regularize_cmd(ctx: &Ctx, input: &Path, alpha: f64, output: &Path) -> CliResult {
    let a = io::load(input, None)?;
    let all = vec![true; a.npoints()];
    let before = estimate_seminorm(&a, alpha, &all)?;
    let reg = regularize(&a, alpha)?;
    let after = estimate_seminorm(&reg, alpha, &all)?;
    ctx.ensure_dir()?;
    io::save(&ctx.out_path(output), &reg)?;
    print(&json!({ "input": to_value(&before), "regularized": to_value(&after) }))?;
    Ok(Outcome::Pass)
}

#[allow(clippy::too_many_arguments)]
fn maximal_cmd(
    ctx: &Ctx,
    input: &Path,
    beta: f64,
    mode: ModeArg,
    restrict: Option<&str>,
    iterate: usize,
    output: &Path,
) -> CliResult {
    let f = io::load(input, None)?;
    let restriction = match restrict {
        Some(s) => {
            let (c, r) = parse_ball(s, f.n())?;
            Some(f.grid.ball_mask(&c, r))
        }
        None => None,
    };
    let mode = match mode {
        ModeArg::Centered => Mode::Centered,
        ModeArg::Uncentered => Mode::Uncentered,
    };
    let mf = maximal_function(&f, &MaximalSpec { beta, mode, restriction, iterations: iterate })?;
    ctx.ensure_dir()?;
    io::save(&ctx.out_path(output), &mf)?;
    Ok(Outcome::Pass)
}

fn riesz_cmd(ctx: &Ctx, input: &Path, gamma: f64, ball: &str, output: &Path) -> CliResult {
    let f = io::load(input, None)?;
    let (c, r) = parse_ball(ball, f.n())?;
    let out = potentials::riesz_potential(&f, gamma, &f.grid.ball_mask(&c, r))?;
    ctx.ensure_dir()?;
    io::save(&ctx.out_path(output), &out)?;
    Ok(Outcome::Pass)
}

fn polyfit_cmd(input: &Path, ball: &str, weight: &Path, order: usize, center: Option<&str>) -> CliResult {
    let u = io::load(input, None)?;
    let eta = io::load(weight, None)?;
    let (c, r) = parse_ball(ball, u.n())?;
    let x0 = match center {
        Some(s) => numbers(s)?,
        None => c.clone(),
    };
    if x0.len() != u.n() {
        return Err(Error::Domain(format!("--center needs {} coordinates", u.n())));
    }
    let poly = meanpoly::fit(&u, &u.grid.ball_mask(&c, r), &eta, order, &x0)?;
    let coeffs: Map<String, Value> = poly.coeffs.iter().map(|(s, v)| (s.label(), to_value(v))).collect();
    print(&json!({ "center": x0, "order": order, "coefficients": coeffs }))?;
    Ok(Outcome::Pass)
}

fn whitney_cmd(ctx: &Ctx, mask: &Path, output: &Path, verify: bool, order: usize) -> CliResult {
    let e = io::load(mask, None)?;
    let inside: Vec<bool> = (0..e.npoints()).map(|p| e.at(p, 0) != 0.0).collect();
    let cov = cover(&e.grid, &inside, f64::INFINITY);
    let mut doc = json!({ "balls": to_value(&cov.balls), "neighbors": to_value(&cov.neighbors) });
    let mut ok = true;
    if verify {
        let rep = verify_cover(&e.grid, &inside, &cov);
        let pou = partition_of_unity(&e.grid, &inside, &cov)?;
        let prep = verify_partition(&e.grid, &inside, &pou, order);
        ok = rep.all_pass(overlap_cap(e.n())) && prep.sum_error <= 1e-10 && prep.upper && prep.bump_lower;
        doc["cover_report"] = to_value(&rep);
        doc["partition_report"] = to_value(&prep);
        doc["pass"] = Value::Bool(ok);
    }
    ctx.ensure_dir()?;
    std::fs::write(ctx.out_path(output), to_json_string(&doc)?)?;
    Ok(Outcome::from_bool(ok))
}

#[allow(clippy::too_many_arguments)]
fn truncate_cmd(
    ctx: &Ctx,
    u: &Path,
    a: &Path,
    config: &Path,
    mult: f64,
    center: Option<&str>,
    radius: Option<f64>,
    output: &Path,
    report: &Path,
) -> CliResult {
    let cfg = read_config(config)?;
    let u = io::load(u, None)?;
    let a = io::load(a, None)?;
    if u.n() != cfg.n || a.grid != u.grid {
        return Err(Error::Domain("u and a must share a grid of the configured dimension".into()));
    }
    if !(mult > 0.0) {
        return Err(Error::Domain("--lambda-mult must be positive".into()));
    }
    let derived = derive(&cfg)?;
    let c = match center {
        Some(s) => numbers(s)?,
        None => grid_centre(&u.grid),
    };
    if c.len() != cfg.n {
        return Err(Error::Domain(format!("--center needs {} coordinates", cfg.n)));
    }
    let big_r = radius.unwrap_or_else(|| inscribed_radius(&u.grid) / 4.0);
    let setup = TruncationSetup { center: c, big_r, delta: TruncationSetup::default_delta(derived.d0()) };
    let weight = Weight::new(a, cfg.alpha)?;
    let case = ModelCase { cfg, derived, setup, u, weight, data: DataFields::default() };
    let asm = assemble_g(&case.u, &case.weight, &case.cfg, &case.derived, &case.data, &case.setup, None)?;
    let floor = lambda_floor(&asm.big_g, &case.setup);
    let (level, v_lambda) = truncate_and_report(&case, &asm.big_g, mult, mult * floor.lambda0)?;

    let mut rep = Report::new("truncate", json!({ "lambda_mult": mult, "setup": to_value(&case.setup), "config": to_value(&case.cfg) }));
    rep.holds("exact_on_good_set", level.consistency.exact_on_good);
    rep.holds("support_in_b4r", level.consistency.support_ok);
    rep.holds("bad_set_in_b4r", level.contained);
    rep.at_most("partition_error", level.consistency.partition_error, 1e-10, 0.0);
    rep.at_most("gluing_error", level.consistency.gluing_error, 1e-8, 0.0);
    rep.holds("bounds_finite", level.bounds.finite());
    rep.constant("lambda0", &floor);
    rep.constant("sup_g", asm.big_g.max_abs());
    rep.constant("level", &level);
    ctx.ensure_dir()?;
    io::save(&ctx.out_path(output), &v_lambda)?;
    std::fs::write(ctx.out_path(report), rep.to_json()?)?;
    print(&to_value(&rep))?;
    Ok(Outcome::from_bool(rep.passed()))
}

fn gehring_cmd(g: &GehringArgs) -> CliResult {
    if !g.verify {
        print(&to_value(&gehring_constants(g.n, g.a, g.kappa, g.eps0)?))?;
        return Ok(Outcome::Pass);
    }
    let f1_path = g.f1.as_ref().ok_or_else(|| Error::Domain("--verify needs --f1".into()))?;
    let f1 = io::load(f1_path, None)?;
    let f2 = match &g.f2 {
        Some(p) => io::load(p, None)?,
        None => f1.grid.zeros(1),
    };
    if f2.grid != f1.grid {
        return Err(Error::Domain("f1 and f2 must share a grid".into()));
    }
    let (oc, orad) = match &g.omega {
        Some(s) => parse_ball(s, f1.n())?,
        None => (grid_centre(&f1.grid), inscribed_radius(&f1.grid)),
    };
    let mode = match g.premise {
        PremiseArg::All => PremiseMode::AllBalls,
        PremiseArg::Decaying => PremiseMode::Decaying,
    };
    let inp = GehringInput {
        f1: &f1,
        f2: &f2,
        kappa: g.kappa,
        a: g.a,
        theta_rh: g.theta,
        eps0: g.eps0,
        r0: g.r0.unwrap_or(orad / 6.0),
        omega: (&oc, orad),
        mode,
        pairs: None,
    };
    let scan = gehring_verify(&inp, g.eps)?;
    print(&to_value(&scan))?;
    Ok(Outcome::from_bool(scan.premise_all && scan.conclusion_on_premise_pairs))
}

fn residual_cmd(u: &Path, a: &Path, phi: &Path, p: f64, q: f64, m: usize) -> CliResult {
    let u = io::load(u, None)?;
    let a = io::load(a, None)?;
    let phi = io::load(phi, None)?;
    let r = model_residual(&u, &a, p, q, m, &phi)?;
    print(&json!({ "residual": r, "p": p, "q": q, "m": m }))?;
    Ok(Outcome::Pass)
}

fn verify_cmd(ctx: &Ctx, suite: &str, config: Option<&Path>) -> CliResult {
    if !SUITES.contains(&suite) {
        return Err(Error::Domain(format!("unknown suite {suite:?}; expected one of {}", SUITES.join(", "))));
    }
    let mut sc = SuiteConfig::default();
    if let Some(s) = ctx.seed {
        sc.seed = s;
    }
    sc.grid_size = ctx.grid_size;
    if let Some(p) = config {
        sc.exponents = Some(read_config(p)?);
    }
    let rep = run_suite(suite, &sc)?;
    let text = rep.to_json()?;
    if let Some(d) = &ctx.output_dir {
        std::fs::create_dir_all(d)?;
        std::fs::write(d.join(format!("{suite}.json")), &text)?;
    }
    print!("{text}");
    Ok(Outcome::from_bool(rep.passed()))
}

fn run(cli: Cli) -> CliResult {
    let ctx = Ctx { seed: cli.seed, grid_size: cli.grid_size, output_dir: cli.output_dir };
    match &cli.cmd {
        Cmd::Exponents { config } => exponents(config),
        Cmd::Regularize { input, alpha, output } => regularize_cmd(&ctx, input, *alpha, output),
        Cmd::Maximal { input, beta, mode, restrict, iterate, output } => {
            maximal_cmd(&ctx, input, *beta, *mode, restrict.as_deref(), *iterate, output)
        }
        Cmd::Riesz { input, gamma, ball, output } => riesz_cmd(&ctx, input, *gamma, ball, output),
        Cmd::Polyfit { input, ball, weight, order, center } => polyfit_cmd(input, ball, weight, *order, center.as_deref()),
        Cmd::Whitney { mask, output, verify, order } => whitney_cmd(&ctx, mask, output, *verify, *order),
        Cmd::Truncate { u, a, config, lambda_mult, center, radius, output, report } => {
            truncate_cmd(&ctx, u, a, config, *lambda_mult, center.as_deref(), *radius, output, report)
        }
        Cmd::Gehring(g) => gehring_cmd(g),
        Cmd::Residual { u, a, phi, p, q, m } => residual_cmd(u, a, phi, *p, *q, *m),
        Cmd::Verify { suite, config } => verify_cmd(&ctx, suite, config.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(2),
            };
        }
    };
    match run(cli) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::CheckFailed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("dptool: {e}");
            ExitCode::from(2)
        }
    }
}
