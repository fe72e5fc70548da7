//! Configuration-driven front end: solver runs, data generators and the
//! oracle report. `main.rs` only maps subcommands onto these functions.

use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Poisson, StandardNormal};

use crate::catalog;
use crate::config::Config;
use crate::cramer::{cramer_grad, cramer_value};
use crate::error::{Error, Result};
use crate::expfam::{log_normalizer, log_normalizer_grad, mean, ReferenceDistribution};
use crate::kernels::{bregman_distance, kernel_grad, kernel_value, KernelKind};
use crate::linops::{
    finite_difference_2d, gaussian_blur, op_norm_2, to_dense, BlurShape, Boundary, Conv1d, Dense, Identity,
    LinearOperator, Operator,
};
use crate::models::{smoothness_constant, Fidelity, FidelityKind, Problem, Regularizer};
use crate::oracle::{dense_prox_1d, descent_lemma_check, fd_gradient, numeric_conjugate, OracleReport, OracleRow};
use crate::prior::Prior;
use crate::prox::{bregman_prox, ProxRequest};
use crate::rootfind::{lambert_w0, solve_monotone, Bracket};
use crate::solvers::{bpg, chambolle_pock_nig_tv, fista, resolve_step, NigTv, SolverOptions, SolverTrace, Step};
use crate::textio::{read_matrix, read_vector, write_vector};

pub const EXIT_PARSE: i32 = 1;
pub const EXIT_DOMAIN: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

pub const SOLUTION_FILE: &str = "solution.txt";
pub const TRACE_FILE: &str = "trace.csv";
pub const MANIFEST_FILE: &str = "manifest.cfg";
pub const ORACLE_FILE: &str = "oracle_report.csv";

/// Symbology pixels are pinned to `ε` or `1 − ε`.
pub const BARCODE_EPS: f64 = 1e-6;
const MIN_RATE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl CliError {
    /// Errors raised while reading and validating inputs.
    fn setup(e: Error) -> Self {
        let code = match e {
            Error::Parse { .. } | Error::Io(_) => EXIT_PARSE,
            _ => EXIT_DOMAIN,
        };
        CliError { code, message: e.to_string() }
    }

    fn solver(e: Error) -> Self {
        CliError { code: EXIT_SOLVER, message: e.to_string() }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn load(path: &Path) -> CliResult<(Config, PathBuf)> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError { code: EXIT_PARSE, message: format!("{}: {e}", path.display()) })?;
    let cfg = Config::parse(&text).map_err(CliError::setup)?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok((cfg, base))
}

fn resolve(base: &Path, p: &str) -> PathBuf {
    let p = Path::new(p);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

/// Absolute form of a path config entry, so manifests can be re-fed from anywhere.
fn absolutize(cfg: &mut Config, base: &Path, key: &str) {
    if let Some(v) = cfg.str(key).map(str::to_string) {
        let p = resolve(base, &v);
        let p = std::path::absolute(&p).unwrap_or(p);
        cfg.set(key, p.display());
    }
}

const PATH_KEYS: [&str; 6] =
    ["output.dir", "operator.matrix", "fidelity.observation", "truth.path", "regularizer.p_path", "solver.x0"];

fn out_dir(cfg: &Config, base: &Path) -> Result<PathBuf> {
    let dir = resolve(base, cfg.require("output.dir")?);
    std::fs::create_dir_all(&dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    Ok(dir)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

// ---------------------------------------------------------------------------
// operators, priors, data

/// Operator and, for 2-D blurs, the image shape.
fn build_operator(cfg: &Config, base: &Path) -> Result<(Operator, Option<(usize, usize)>)> {
    let boundary = || -> Result<Boundary> {
        match cfg.str("operator.boundary").unwrap_or("reflect") {
            "reflect" => Ok(Boundary::Reflect),
            "zero_pad" => Ok(Boundary::ZeroPad),
            b => Err(Error::Parse { line: 0, msg: format!("operator.boundary: unknown boundary {b:?}") }),
        }
    };
    Ok(match cfg.require("operator.kind")? {
        "identity" => (Arc::new(Identity(positive(cfg, "operator.size")?)), None),
        "dense" => (Arc::new(read_matrix(&resolve(base, cfg.require("operator.matrix")?))?), None),
        "blur1d" => {
            let n = positive(cfg, "operator.size")?;
            (gaussian_blur(BlurShape::OneD(n), cfg.get_req("operator.sigma")?, boundary()?)?, None)
        }
        "blur2d" => {
            let (height, width) = (positive(cfg, "operator.height")?, positive(cfg, "operator.width")?);
            let op = gaussian_blur(BlurShape::TwoD { height, width }, cfg.get_req("operator.sigma")?, boundary()?)?;
            (op, Some((height, width)))
        }
        k => return Err(Error::Parse { line: 0, msg: format!("operator.kind: unknown operator {k:?}") }),
    })
}

fn positive(cfg: &Config, key: &str) -> Result<usize> {
    let n: usize = cfg.get_req(key)?;
    if n == 0 {
        return Err(Error::InvalidParameter(format!("{key} >= 1 violated")));
    }
    Ok(n)
}

fn fidelity_kind(cfg: &Config) -> Result<FidelityKind> {
    let f = cfg.require("fidelity.family")?;
    FidelityKind::parse(f).ok_or_else(|| Error::Parse { line: 0, msg: format!("fidelity.family: unknown family {f:?}") })
}

fn univariate_prior(cfg: &Config, name: &str) -> Result<ReferenceDistribution> {
    let g = |k: &str, d: f64| cfg.get_or(&format!("regularizer.{k}"), d);
    let r = |k: &str| cfg.get_req::<f64>(&format!("regularizer.{k}"));
    match name {
        "normal" => ReferenceDistribution::normal_1d(g("mean", 0.0)?, g("var", 1.0)?),
        "nig" => ReferenceDistribution::nig(
            vec![g("mu", 0.0)?],
            vec![g("beta", 0.0)?],
            g("alpha", 1.0)?,
            r("delta")?,
            vec![g("var", 1.0)?],
        ),
        "gamma" => ReferenceDistribution::gamma(r("alpha")?, g("beta", 1.0)?),
        "laplace" => ReferenceDistribution::laplace(g("mu", 0.0)?, g("scale", 1.0)?),
        "poisson" => ReferenceDistribution::poisson(r("lambda")?),
        "bernoulli" => ReferenceDistribution::bernoulli(r("p")?),
        "binomial" => ReferenceDistribution::multinomial(cfg.get_req("regularizer.trials")?, vec![r("p")?]),
        "negative_binomial" => ReferenceDistribution::negative_multinomial(vec![r("p")?], r("x0")?),
        "discrete_uniform" => {
            ReferenceDistribution::discrete_uniform(cfg.get_req("regularizer.lower")?, cfg.get_req("regularizer.upper")?)
        }
        "continuous_uniform" => ReferenceDistribution::continuous_uniform(r("lower")?, r("upper")?),
        "logistic" => ReferenceDistribution::logistic(g("mu", 0.0)?, g("scale", 1.0)?),
        p => Err(Error::Parse { line: 0, msg: format!("regularizer.prior: unknown prior {p:?}") }),
    }
}

fn build_regularizer(cfg: &Config, base: &Path, d: usize, image: Option<(usize, usize)>) -> Result<Regularizer> {
    let name = cfg.str("regularizer.prior").unwrap_or("none");
    if name == "none" {
        return Ok(Regularizer::None);
    }
    let tau: f64 = cfg.get_req("regularizer.tau")?;
    if let Some(c) = cfg.str("regularizer.composite") {
        if c != "finite_difference" {
            return Err(Error::Parse { line: 0, msg: format!("regularizer.composite: unknown operator {c:?}") });
        }
        let (h, w) = image_shape(cfg, image)?;
        if h * w != d {
            return Err(Error::DimensionMismatch { expected: d, got: h * w });
        }
        let var: f64 = cfg.get_or("regularizer.var", 1.0)?;
        let cov = vec![var, 0.0, 0.0, var];
        let block = match name {
            "nig" => ReferenceDistribution::nig(
                vec![0.0; 2],
                vec![0.0; 2],
                cfg.get_or("regularizer.alpha", 1.0)?,
                cfg.get_req("regularizer.delta")?,
                cov,
            )?,
            "normal" => ReferenceDistribution::normal(vec![0.0; 2], cov)?,
            p => {
                return Err(Error::InvalidParameter(format!(
                    "composite regularizer needs a nig or normal prior, got {p}"
                )))
            }
        };
        return Regularizer::composite(block, Arc::new(finite_difference_2d(h, w)?), tau);
    }
    let prior = if let Some(p) = cfg.str("regularizer.p_path") {
        if name != "bernoulli" {
            return Err(Error::InvalidParameter("regularizer.p_path requires the bernoulli prior".into()));
        }
        let ps = read_vector(&resolve(base, p))?;
        if ps.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: ps.len() });
        }
        Prior::separable(ps.into_iter().map(ReferenceDistribution::bernoulli).collect::<Result<_>>()?)?
    } else {
        Prior::iid(univariate_prior(cfg, name)?, d)?
    };
    Regularizer::prior(prior, tau)
}

fn image_shape(cfg: &Config, image: Option<(usize, usize)>) -> Result<(usize, usize)> {
    match image {
        Some(s) if !cfg.contains("image.height") => Ok(s),
        _ => Ok((positive(cfg, "image.height")?, positive(cfg, "image.width")?)),
    }
}

/// Parse a mask such as `0-6,57-63`, `all` or `none`.
pub fn parse_mask(text: &str, length: usize) -> Result<Vec<bool>> {
    let mut mask = vec![false; length];
    match text.trim() {
        "none" => return Ok(mask),
        "all" => return Ok(vec![true; length]),
        _ => {}
    }
    let bad = |t: &str| Error::Parse { line: 0, msg: format!("barcode.mask: cannot parse {t:?}") };
    for part in text.split(',') {
        let part = part.trim();
        let (a, b) = match part.split_once('-') {
            Some((a, b)) => (a.trim().parse::<usize>().map_err(|_| bad(part))?, b.trim().parse::<usize>().map_err(|_| bad(part))?),
            None => {
                let i = part.parse::<usize>().map_err(|_| bad(part))?;
                (i, i)
            }
        };
        if a > b || b >= length {
            return Err(Error::InvalidParameter(format!(
                "barcode.mask: range {part} must satisfy lo <= hi < length ({length})"
            )));
        }
        mask[a..=b].iter_mut().for_each(|m| *m = true);
    }
    Ok(mask)
}

/// Random binary signal and its Bernoulli parameters: `½` on free pixels,
/// `ε` or `1 − ε` on masked (known) pixels.
pub fn gen_barcode(length: usize, mask: &[bool], seed: u64) -> Result<(Vec<f64>, Vec<f64>)> {
    use rand::Rng;
    if length == 0 {
        return Err(Error::InvalidParameter("barcode.length >= 1 violated".into()));
    }
    if mask.len() != length {
        return Err(Error::DimensionMismatch { expected: length, got: mask.len() });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let truth: Vec<f64> = (0..length).map(|_| if rng.random_bool(0.5) { 1.0 } else { 0.0 }).collect();
    let p = truth
        .iter()
        .zip(mask)
        .map(|(&x, &m)| match (m, x > 0.5) {
            (false, _) => 0.5,
            (true, true) => 1.0 - BARCODE_EPS,
            (true, false) => BARCODE_EPS,
        })
        .collect();
    Ok((truth, p))
}

/// Synthetic observation of `A·x`: additive Gaussian noise of standard
/// deviation `noise` (Normal), Poisson counts with rates `Ax` (Poisson), or
/// `Ax` times a unit-rate Gamma draw of shape `1/noise²` rescaled to mean
/// one (Gamma). `noise = 0` returns `Ax` for Normal and Gamma.
pub fn gen_observation(kind: FidelityKind, a: &dyn LinearOperator, x: &[f64], noise: f64, seed: u64) -> Result<Vec<f64>> {
    if !(noise >= 0.0 && noise.is_finite()) {
        return Err(Error::InvalidParameter(format!("observation.noise >= 0 violated (noise = {noise})")));
    }
    let ax = a.apply(x)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if kind != FidelityKind::Normal {
        if let Some(i) = ax.iter().position(|&r| !(r > 0.0)) {
            return Err(Error::Domain(format!(
                "{} observation: rate (Ax)[{i}] = {} must be positive",
                kind.name(),
                ax[i]
            )));
        }
    }
    Ok(match kind {
        FidelityKind::Normal => ax
            .iter()
            .map(|&m| {
                let z: f64 = StandardNormal.sample(&mut rng);
                m + noise * z
            })
            .collect(),
        FidelityKind::Poisson => {
            let mut out = Vec::with_capacity(ax.len());
            for &r in &ax {
                let d = Poisson::new(r.max(MIN_RATE)).map_err(|e| Error::Domain(format!("poisson rate {r}: {e}")))?;
                out.push(d.sample(&mut rng));
            }
            out
        }
        FidelityKind::Gamma => {
            if noise == 0.0 {
                return Ok(ax);
            }
            let shape = 1.0 / (noise * noise);
            let d = Gamma::new(shape, 1.0).map_err(|e| Error::InvalidParameter(format!("gamma noise: {e}")))?;
            ax.iter().map(|&m| m * d.sample(&mut rng) / shape).collect()
        }
    })
}

fn observation(cfg: &Config, base: &Path, kind: FidelityKind, a: &dyn LinearOperator, seed: u64) -> Result<Vec<f64>> {
    if let Some(p) = cfg.str("fidelity.observation") {
        return read_vector(&resolve(base, p));
    }
    let truth = cfg
        .str("truth.path")
        .ok_or_else(|| Error::Parse { line: 0, msg: "either fidelity.observation or truth.path is required".into() })?;
    let x = read_vector(&resolve(base, truth))?;
    gen_observation(kind, a, &x, cfg.get_or("observation.noise", 0.0)?, seed)
}

// ---------------------------------------------------------------------------
// run

/// Everything needed to start a solver, resolved from a configuration.
enum Plan {
    Prox { problem: Problem, solver: String },
    ChambollePock { model: NigTv, s: f64, tau: f64 },
}

/// Outcome of [`run`].
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub trace: SolverTrace,
    pub out_dir: PathBuf,
}

fn solver_options(cfg: &Config) -> Result<SolverOptions> {
    let step = match cfg.str("solver.step").unwrap_or("auto") {
        "auto" => Step::Auto,
        s => Step::Fixed(
            s.parse()
                .map_err(|_| Error::Parse { line: 0, msg: format!("solver.step: expected auto or a number, got {s:?}") })?,
        ),
    };
    Ok(SolverOptions {
        max_iters: cfg.get_or("solver.max_iters", 500)?,
        step,
        tol: cfg.get_or("solver.tol", 1e-10)?,
        trace_stride: cfg.get_or("solver.trace_stride", 1)?,
        fidelity_target: cfg.get("solver.fidelity_target")?,
    })
}

fn default_start(problem: &Problem) -> Vec<f64> {
    let d = problem.dim();
    let k = problem.kernel;
    let fallback = if k == KernelKind::Energy { 0.0 } else { 1.0 };
    match &problem.regularizer {
        Regularizer::Prior { prior, .. } => {
            prior.mean().into_iter().map(|m| if k.interior(m) { m } else { fallback }).collect()
        }
        _ => vec![fallback; d],
    }
}

fn start_point(cfg: &Config, base: &Path, d: usize, default: impl FnOnce() -> Vec<f64>) -> Result<Vec<f64>> {
    if let Some(p) = cfg.str("solver.x0") {
        let x = read_vector(&resolve(base, p))?;
        if x.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: x.len() });
        }
        return Ok(x);
    }
    Ok(match cfg.get::<f64>("solver.x0_fill")? {
        Some(v) => vec![v; d],
        None => default(),
    })
}

/// Run the solver described by the configuration file and write the
/// solution, trace and manifest into `output.dir`.
pub fn run(config: &Path) -> CliResult<RunSummary> {
    let (mut cfg, base) = load(config)?;
    let setup = || -> Result<(Plan, Vec<f64>, SolverOptions, String, u64, PathBuf)> {
        let seed: u64 = cfg.get_or("seed", 0)?;
        let dir = resolve(&base, cfg.require("output.dir")?);
        let (a, image) = build_operator(&cfg, &base)?;
        let kind = fidelity_kind(&cfg)?;
        let y = observation(&cfg, &base, kind, a.as_ref(), seed)?;
        let d = a.shape().1;
        let solver = cfg.str("solver.name").unwrap_or("bpg").to_string();
        let opts = solver_options(&cfg)?;
        let (plan, x0, kernel) = match solver.as_str() {
            "bpg" | "fista" => {
                let kernel = match cfg.str("kernel.name").unwrap_or("auto") {
                    "auto" => kind.paired_kernel(),
                    k => KernelKind::parse(k)
                        .ok_or_else(|| Error::Parse { line: 0, msg: format!("kernel.name: unknown kernel {k:?}") })?,
                };
                let fid = Fidelity::new(kind, a, y)?;
                let reg = build_regularizer(&cfg, &base, d, image)?;
                let problem = Problem::with_constant(fid, reg, kernel, cfg.get("kernel.constant")?)?;
                let x0 = start_point(&cfg, &base, d, || default_start(&problem))?;
                resolve_step(&problem, opts.step)?;
                (Plan::Prox { problem, solver: solver.clone() }, x0, kernel.name())
            }
            "chambolle_pock" => {
                if kind != FidelityKind::Normal {
                    return Err(Error::InvalidParameter("chambolle_pock needs the normal fidelity".into()));
                }
                if cfg.str("regularizer.prior").unwrap_or("nig") != "nig"
                    || cfg.str("regularizer.composite").unwrap_or("finite_difference") != "finite_difference"
                {
                    return Err(Error::InvalidParameter(
                        "chambolle_pock solves the nig prior composed with finite differences".into(),
                    ));
                }
                let (h, w) = image_shape(&cfg, image)?;
                let model = NigTv::new(a, y, h, w, cfg.get_req("regularizer.delta")?)?;
                let x0 = start_point(&cfg, &base, d, || model.y.clone())?;
                let (s, tau): (f64, f64) = (cfg.get_req("solver.dual_step")?, cfg.get_req("solver.primal_step")?);
                let lsq = model.diff().norm_sq();
                if s * tau * lsq >= 1.0 {
                    return Err(Error::StepSize(format!(
                        "s*tau*||L||^2 < 1 violated (s = {s}, tau = {tau}, ||L||^2 = {lsq})"
                    )));
                }
                let plan = Plan::ChambollePock { model, s, tau };
                (plan, x0, "energy")
            }
            s => return Err(Error::Parse { line: 0, msg: format!("solver.name: unknown solver {s:?}") }),
        };
        cfg.check_unused()?;
        std::fs::create_dir_all(&dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
        Ok((plan, x0, opts, kernel.to_string(), seed, dir))
    };
    let (plan, x0, opts, kernel, seed, dir) = setup().map_err(CliError::setup)?;

    let trace = match &plan {
        Plan::Prox { problem, solver } if solver == "fista" => fista(problem, &x0, &opts),
        Plan::Prox { problem, .. } => bpg(problem, &x0, &opts),
        Plan::ChambollePock { model, s, tau } => chambolle_pock_nig_tv(model, *s, *tau, &x0, &opts),
    }
    .map_err(CliError::solver)?;

    let io = |e: Error| CliError { code: EXIT_PARSE, message: e.to_string() };
    write_vector(&dir.join(SOLUTION_FILE), &trace.x).map_err(io)?;
    write_text(&dir.join(TRACE_FILE), &trace_csv(&trace)).map_err(io)?;

    if cfg.contains("kernel.name") || matches!(plan, Plan::Prox { .. }) {
        cfg.set("kernel.name", &kernel);
    }
    cfg.set("seed", seed);
    for k in PATH_KEYS {
        absolutize(&mut cfg, &base, k);
    }
    let manifest = format!(
        "# resolved step = {}\n# iterations = {}\n# termination = {}\n{}",
        trace.step,
        trace.iterations,
        trace.reason.name(),
        cfg.to_text()
    );
    write_text(&dir.join(MANIFEST_FILE), &manifest).map_err(io)?;
    Ok(RunSummary { trace, out_dir: dir })
}

pub fn trace_csv(trace: &SolverTrace) -> String {
    let mut s = String::from("k,objective,residual,change\n");
    for r in &trace.records {
        s.push_str(&format!("{},{},{},{}\n", r.k, r.objective, r.residual, r.change));
    }
    s
}

// ---------------------------------------------------------------------------
// generators

/// `gen barcode`: writes `truth.txt` and `p.txt`.
pub fn gen_barcode_cmd(config: &Path) -> CliResult<PathBuf> {
    let (cfg, base) = load(config)?;
    let go = || -> Result<(PathBuf, Vec<f64>, Vec<f64>)> {
        let length = positive(&cfg, "barcode.length")?;
        let mask = parse_mask(cfg.str("barcode.mask").unwrap_or("none"), length)?;
        let seed = cfg.get_or("seed", 0)?;
        let dir = out_dir(&cfg, &base)?;
        cfg.check_unused()?;
        let (truth, p) = gen_barcode(length, &mask, seed)?;
        Ok((dir, truth, p))
    };
    let (dir, truth, p) = go().map_err(CliError::setup)?;
    write_vector(&dir.join("truth.txt"), &truth).map_err(CliError::setup)?;
    write_vector(&dir.join("p.txt"), &p).map_err(CliError::setup)?;
    Ok(dir)
}

/// `gen observation`: writes `observation.txt`.
pub fn gen_observation_cmd(config: &Path) -> CliResult<PathBuf> {
    let (cfg, base) = load(config)?;
    let go = || -> Result<PathBuf> {
        let (a, _) = build_operator(&cfg, &base)?;
        let kind = fidelity_kind(&cfg)?;
        let x = read_vector(&resolve(&base, cfg.require("truth.path")?))?;
        let noise = cfg.get_or("observation.noise", 0.0)?;
        let seed = cfg.get_or("seed", 0)?;
        let dir = out_dir(&cfg, &base)?;
        cfg.check_unused()?;
        let y = gen_observation(kind, a.as_ref(), &x, noise, seed)?;
        write_vector(&dir.join("observation.txt"), &y)?;
        Ok(dir)
    };
    go().map_err(CliError::setup)
}

// ---------------------------------------------------------------------------
// oracle report

/// `oracle`: writes the oracle report; fails with the solver exit code if
/// any comparison is out of tolerance.
pub fn oracle_cmd(config: &Path) -> CliResult<OracleReport> {
    let (cfg, base) = load(config)?;
    let (dir, seed) = (|| -> Result<(PathBuf, u64)> {
        let seed = cfg.get_or("seed", 0)?;
        let dir = out_dir(&cfg, &base)?;
        cfg.check_unused()?;
        Ok((dir, seed))
    })()
    .map_err(CliError::setup)?;
    let report = oracle_report(seed).map_err(CliError::solver)?;
    report.write_csv(&dir.join(ORACLE_FILE)).map_err(CliError::setup)?;
    if !report.all_pass() {
        let n = report.rows.iter().filter(|r| !r.pass).count();
        return Err(CliError { code: EXIT_SOLVER, message: format!("{n} oracle comparisons out of tolerance") });
    }
    Ok(report)
}

/// Compare the analytic quantities against the brute-force oracles.
pub fn oracle_report(seed: u64) -> Result<OracleReport> {
    use rand::Rng;
    let mut rep = OracleReport::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // fixed reference values
    let p2 = ReferenceDistribution::poisson(2.0)?;
    let th = [2f64.ln()];
    let fd = fd_gradient(&|t| log_normalizer(&p2, t).unwrap_or(f64::INFINITY), &th, 1e-6)?;
    rep.push(OracleRow::compare("log_normalizer_grad:poisson(2):log2", log_normalizer_grad(&p2, &th)?[0], fd[0], 1e-5));
    let lg = ReferenceDistribution::logistic(0.0, 1.0)?;
    rep.push(OracleRow::compare("cramer_value:logistic(0,1):1", cramer_value(&lg, &[1.0])?, numeric_conjugate(&lg, 1.0, 1e-10)?, 1e-8));
    let cu = ReferenceDistribution::continuous_uniform(-1.0, 1.0)?;
    let fd = fd_gradient(&|y| cramer_value(&cu, y).unwrap_or(f64::INFINITY), &[0.5], 1e-6)?;
    rep.push(OracleRow::compare("cramer_grad:continuous_uniform(-1,1):0.5", cramer_grad(&cu, &[0.5])?[0], fd[0], 1e-5));
    let direct = kernel_value(KernelKind::Burg, &[2.0])? - kernel_value(KernelKind::Burg, &[1.0])?
        - kernel_grad(KernelKind::Burg, &[1.0])?[0] * (2.0 - 1.0);
    rep.push(OracleRow::compare("bregman_distance:burg:(2,1)", bregman_distance(KernelKind::Burg, &[2.0], &[1.0])?, direct, 1e-14));
    let omega = solve_monotone(|x: f64| x * x.exp() - 1.0, None, Bracket::new(0.0, 1.0)?, 0.0)?;
    let bis = bisect_plain(|x| x * x.exp() - 1.0, 0.0, 1.0);
    rep.push(OracleRow::compare("solve_monotone:omega", omega, bis, 1e-12));
    rep.push(OracleRow::compare("lambert_w0:1", lambert_w0(1.0)?, bis, 1e-12));
    let pois1 = Prior::Joint(ReferenceDistribution::poisson(1.0)?);
    let x = bregman_prox(&ProxRequest::new(KernelKind::Energy, &pois1, 1.0, &[0.0]))?.x[0];
    rep.push(OracleRow::compare("prox:energy:poisson(1):0", x, dense_prox_1d(KernelKind::Energy, &ReferenceDistribution::poisson(1.0)?, 1.0, 0.0)?, 1e-7));
    let cuj = Prior::Joint(cu.clone());
    let x = bregman_prox(&ProxRequest::new(KernelKind::Energy, &cuj, 1.0, &[0.3]))?.x[0];
    rep.push(OracleRow::compare("prox:energy:continuous_uniform(-1,1):0.3", x, dense_prox_1d(KernelKind::Energy, &cu, 1.0, 0.3)?, 1e-7));
    let m = Dense::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]])?;
    // AᵀA = [[10,14],[14,20]]: λ_max = 15 + √221
    rep.push(OracleRow::compare("op_norm_2:[[1,2],[3,4]]", op_norm_2(&m, 1e-14)?, (15.0 + 221f64.sqrt()).sqrt(), 1e-10));
    let c = Conv1d::new(9, vec![0.25, 0.5, 0.25], Boundary::ZeroPad)?;
    let cols = to_dense(&c);
    let explicit = (0..9).map(|i| cols.get(i, 4).abs()).sum::<f64>();
    rep.push(OracleRow::compare("norm_1_columns:conv1d:interior", c.column_abs_sums().unwrap()[4], explicit, 1e-15));
    for (h, w) in [(4, 4), (16, 16), (3, 9)] {
        let l = finite_difference_2d(h, w)?;
        let n = op_norm_2(&l, 1e-13)?;
        let mut row = OracleRow::compare(format!("finite_difference_norm_sq:{h}x{w}"), l.norm_sq(), n * n, 1e-6);
        row.pass &= l.norm_sq() <= 8.0;
        rep.push(row);
    }

    // rate functions and their gradients against the numeric conjugate
    for d in catalog::univariate() {
        for i in 0..20 {
            let y = catalog::interior_point(&d, &mut rng);
            rep.push(OracleRow::compare(format!("cramer_value:{}:{i}", d.name()), cramer_value(&d, &[y])?, numeric_conjugate(&d, y, 1e-12)?, 1e-6));
        }
        for i in 0..5 {
            let y = catalog::interior_point(&d, &mut rng);
            let fd = fd_gradient(&|v| cramer_value(&d, v).unwrap_or(f64::INFINITY), &[y], 1e-6)?;
            rep.push(OracleRow::compare(format!("cramer_grad:{}:{i}", d.name()), cramer_grad(&d, &[y])?[0], fd[0], 1e-5));
        }
    }

    // scalar prox against direct minimization
    for k in [KernelKind::Energy, KernelKind::BoltzmannShannon, KernelKind::Burg] {
        for d in catalog::univariate().into_iter().filter(|d| catalog::compatible(k, d)) {
            let prior = Prior::Joint(d.clone());
            for i in 0..3 {
                let xb = catalog::kernel_point(k, mean(&d)[0], &mut rng);
                let t = rng.random_range((0.1f64).ln()..(3.0f64).ln()).exp();
                let x = bregman_prox(&ProxRequest::new(k, &prior, t, &[xb]))?.x[0];
                let o = dense_prox_1d(k, &d, t, xb)?;
                rep.push(OracleRow::compare(format!("prox:{}:{}:{i}", k.name(), d.name()), x, o, 1e-7));
            }
        }
    }

    // smooth adaptability of each fidelity/kernel pairing
    let mut a = vec![0.0; 8 * 6];
    a.iter_mut().for_each(|v| *v = rng.random_range(0.0..1.0));
    let a: Operator = Arc::new(Dense::new(8, 6, a)?);
    let y: Vec<f64> = (0..8).map(|_| rng.random_range(0.5..3.0)).collect();
    for kind in [FidelityKind::Normal, FidelityKind::Poisson, FidelityKind::Gamma] {
        let fid = Fidelity::new(kind, a.clone(), y.clone())?;
        rep.push(descent_lemma_check(&fid, kind.paired_kernel(), smoothness_constant(&fid)?, 200, seed)?);
    }
    Ok(rep)
}

fn bisect_plain(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let sa = f(a) > 0.0;
    while b - a > 1e-15 {
        let m = 0.5 * (a + b);
        if (f(m) > 0.0) == sa {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mask_parsing() {
        assert_eq!(parse_mask("none", 3).unwrap(), vec![false; 3]);
        assert_eq!(parse_mask("all", 2).unwrap(), vec![true; 2]);
        assert_eq!(parse_mask("0-1, 4", 5).unwrap(), vec![true, true, false, false, true]);
        assert!(parse_mask("3-1", 5).is_err());
        assert!(parse_mask("0-5", 5).is_err());
        assert!(parse_mask("x", 5).is_err());
    }

    #[test]
    fn barcode_generation() {
        let (t, p) = gen_barcode(32, &vec![true; 32], 4).unwrap();
        for (x, q) in t.iter().zip(&p) {
            assert!((x - q).abs() <= BARCODE_EPS * (1.0 + 1e-9));
        }
        let (_, p) = gen_barcode(32, &vec![false; 32], 4).unwrap();
        assert!(p.iter().all(|&q| q == 0.5));
        assert_eq!(gen_barcode(32, &vec![false; 32], 9).unwrap(), gen_barcode(32, &vec![false; 32], 9).unwrap());
    }

    #[test]
    fn observation_generation() {
        let a = Identity(4);
        let x = [1.0, 2.0, 0.5, 3.0];
        assert_eq!(gen_observation(FidelityKind::Normal, &a, &x, 0.0, 1).unwrap(), x.to_vec());
        assert_eq!(gen_observation(FidelityKind::Gamma, &a, &x, 0.0, 1).unwrap(), x.to_vec());
        let y1 = gen_observation(FidelityKind::Poisson, &a, &x, 0.0, 7).unwrap();
        assert_eq!(y1, gen_observation(FidelityKind::Poisson, &a, &x, 0.0, 7).unwrap());
        assert!(y1.iter().all(|v| v.fract() == 0.0 && *v >= 0.0));
        assert!(matches!(gen_observation(FidelityKind::Poisson, &a, &[1.0, 0.0, 1.0, 1.0], 0.0, 1), Err(Error::Domain(_))));
    }

    #[test]
    fn poisson_sample_mean() {
        for r in [0.3, 4.0, 55.0] {
            let n = 100_000;
            let a = Identity(n);
            let y = gen_observation(FidelityKind::Poisson, &a, &vec![r; n], 0.0, 11).unwrap();
            let m = y.iter().sum::<f64>() / n as f64;
            assert!((m - r).abs() <= 3.0 * (r / n as f64).sqrt(), "rate {r}: mean {m}");
        }
    }

    #[test]
    fn gamma_sample_mean() {
        let n = 50_000;
        let a = Identity(n);
        let y = gen_observation(FidelityKind::Gamma, &a, &vec![2.0; n], 0.5, 3).unwrap();
        let m = y.iter().sum::<f64>() / n as f64;
        // sd of the mean is 2·0.5/√n
        assert!((m - 2.0).abs() <= 4.0 * 1.0 / (n as f64).sqrt());
    }
}
