//! Acceptance suite: one test per criterion. Each test writes a single
//! `criterion N ... PASS|FAIL` line straight to the process stdout, then
//! asserts.

use std::io::Write;
use std::path::Path;
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use memtoolbox::catalog;
use memtoolbox::cli::{gen_barcode, gen_observation};
use memtoolbox::cramer::{cramer_grad, cramer_value};
use memtoolbox::expfam::{log_normalizer, log_normalizer_grad, mean, natural_domain_contains};
use memtoolbox::kernels::kernel_grad;
use memtoolbox::linops::{
    finite_difference_2d, gaussian_blur, op_norm_2, BlurShape, Boundary, Dense, Operator,
};
use memtoolbox::models::{fidelity_grad, fidelity_value, smoothness_constant, Fidelity, FidelityKind, Problem, Regularizer};
use memtoolbox::oracle::{dense_prox_1d, descent_lemma_check, fd_gradient, numeric_conjugate};
use memtoolbox::prox::{dual_prox_theta, prox_residual};
use memtoolbox::solvers::{bpg, chambolle_pock_nig_tv, fista, NigTv, SolverOptions, SolverTrace};
use memtoolbox::{bregman_prox, Error, KernelKind, Prior, ProxRequest, ReferenceDistribution, Region};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = std::result::Result<String, String>;

fn report(n: usize, name: &str, outcome: Outcome) {
    let line = match &outcome {
        Ok(detail) => format!("criterion {n:>2} {name}: PASS ({detail})"),
        Err(why) => format!("criterion {n:>2} {name}: FAIL ({why})"),
    };
    // libtest captures the stdout handle, so write through the descriptor
    match std::fs::OpenOptions::new().append(true).open("/dev/stdout") {
        Ok(mut f) => {
            let _ = writeln!(f, "{line}");
        }
        Err(_) => println!("{line}"),
    }
    if let Err(why) = outcome {
        panic!("criterion {n} failed: {why}");
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn inf_norm(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn all_distributions() -> Vec<ReferenceDistribution> {
    let mut v = catalog::univariate();
    v.extend(catalog::multivariate());
    v
}

/// Random point of the interior of `dom ψ*` for any catalog distribution.
fn domain_point(d: &ReferenceDistribution, r: &mut ChaCha8Rng) -> Vec<f64> {
    use memtoolbox::Family;
    if d.is_univariate() {
        return vec![catalog::interior_point(d, r)];
    }
    let k = d.dim();
    match d.family() {
        Family::Multinomial { n, .. } => {
            // strictly inside n·(open simplex with slack)
            let u: Vec<f64> = (0..=k).map(|_| r.random_range(0.05..1.0)).collect();
            let s: f64 = u.iter().sum();
            u[..k].iter().map(|v| *n as f64 * v / s).collect()
        }
        Family::NegativeMultinomial { .. } => (0..k).map(|_| r.random_range((0.05f64).ln()..(6.0f64).ln()).exp()).collect(),
        _ => mean(d).iter().map(|m| m + r.random_range(-3.0..3.0)).collect(),
    }
}

/// Random `θ` with a margin inside the natural domain.
fn theta_point(d: &ReferenceDistribution, r: &mut ChaCha8Rng) -> Vec<f64> {
    let k = d.dim();
    loop {
        let th: Vec<f64> = (0..k).map(|_| r.random_range(-1.5..1.5)).collect();
        let inside = |t: &[f64]| matches!(natural_domain_contains(d, t), Ok(Region::Interior));
        let margin = (0..k).all(|i| {
            [-1e-2, 1e-2].iter().all(|e| {
                let mut t = th.clone();
                t[i] += e;
                inside(&t)
            })
        });
        if inside(&th) && margin {
            return th;
        }
    }
}

// ---------------------------------------------------------------------------

#[test]
fn criterion_01_conjugate_oracle() {
    let start = Instant::now();
    let outcome = (|| -> Outcome {
        let mut r = rng(101);
        let mut worst = 0.0f64;
        let mut count = 0;
        for d in catalog::univariate() {
            for _ in 0..20 {
                let y = catalog::interior_point(&d, &mut r);
                let a = cramer_value(&d, &[y]).map_err(|e| format!("{} y={y}: {e}", d.name()))?;
                let o = numeric_conjugate(&d, y, 1e-12).map_err(|e| format!("oracle {} y={y}: {e}", d.name()))?;
                let err = (a - o).abs();
                ensure(err <= 1e-6, || format!("{} at y={y}: analytic {a}, oracle {o}", d.name()))?;
                worst = worst.max(err);
                count += 1;
            }
        }
        let el = start.elapsed();
        ensure(el < Duration::from_secs(10), || format!("took {el:?}"))?;
        Ok(format!("{count} points, max |diff| {worst:.2e}, {el:.2?}"))
    })();
    report(1, "conjugate oracle", outcome);
}

#[test]
fn criterion_02_rate_function_invariants() {
    let outcome = (|| -> Outcome {
        let mut r = rng(202);
        let mut worst_mean = 0.0f64;
        let mut min_val = f64::INFINITY;
        let dists = all_distributions();
        for d in &dists {
            let m = mean(d);
            let v = cramer_value(d, &m).map_err(|e| format!("{}: {e}", d.name()))?;
            ensure(v.abs() <= 1e-12, || format!("{}: psi*(E) = {v}", d.name()))?;
            worst_mean = worst_mean.max(v.abs());
            for _ in 0..1000 {
                let y = domain_point(d, &mut r);
                let v = cramer_value(d, &y).map_err(|e| format!("{} at {y:?}: {e}", d.name()))?;
                ensure(v >= -1e-12, || format!("{} at {y:?}: psi* = {v}", d.name()))?;
                min_val = min_val.min(v);
            }
        }
        Ok(format!("{} distributions, max |psi*(E)| {worst_mean:.1e}, min psi* {min_val:.2e}", dists.len()))
    })();
    report(2, "rate-function invariants", outcome);
}

#[test]
fn criterion_03_gradients() {
    let outcome = (|| -> Outcome {
        let mut r = rng(303);
        let mut checked = 0;
        let mut worst = 0.0f64;
        let mut cmp = |what: &str, a: &[f64], fd: &[f64]| -> std::result::Result<(), String> {
            for (x, y) in a.iter().zip(fd) {
                let rel = (x - y).abs() / x.abs().max(1.0);
                worst = worst.max(rel);
                ensure(rel <= 1e-5, || format!("{what}: analytic {a:?}, finite difference {fd:?}"))?;
            }
            checked += 1;
            Ok(())
        };
        for d in all_distributions() {
            for _ in 0..20 {
                let y = domain_point(&d, &mut r);
                let g = cramer_grad(&d, &y).map_err(|e| e.to_string())?;
                let fd = fd_gradient(&|v| cramer_value(&d, v).unwrap_or(f64::INFINITY), &y, 1e-6).map_err(|e| e.to_string())?;
                cmp(&format!("cramer_grad {} at {y:?}", d.name()), &g, &fd)?;
                let th = theta_point(&d, &mut r);
                let g = log_normalizer_grad(&d, &th).map_err(|e| e.to_string())?;
                let fd =
                    fd_gradient(&|t| log_normalizer(&d, t).unwrap_or(f64::INFINITY), &th, 1e-6).map_err(|e| e.to_string())?;
                cmp(&format!("log_normalizer_grad {} at {th:?}", d.name()), &g, &fd)?;
            }
        }
        let a: Vec<f64> = (0..6 * 5).map(|_| r.random_range(0.1..1.0)).collect();
        let a: Operator = Arc::new(Dense::new(6, 5, a).unwrap());
        let y: Vec<f64> = (0..6).map(|_| r.random_range(0.5..3.0)).collect();
        for kind in [FidelityKind::Normal, FidelityKind::Poisson, FidelityKind::Gamma] {
            let fid = Fidelity::new(kind, a.clone(), y.clone()).map_err(|e| e.to_string())?;
            for _ in 0..20 {
                let x: Vec<f64> = (0..5).map(|_| r.random_range(0.2..3.0)).collect();
                let g = fidelity_grad(&fid, &x).map_err(|e| e.to_string())?;
                let fd = fd_gradient(&|v| fidelity_value(&fid, v).unwrap_or(f64::INFINITY), &x, 1e-6)
                    .map_err(|e| e.to_string())?;
                cmp(&format!("fidelity_grad {} at {x:?}", kind.name()), &g, &fd)?;
            }
        }
        Ok(format!("{checked} gradients, max relative error {worst:.2e}"))
    })();
    report(3, "finite-difference gradients", outcome);
}

#[test]
fn criterion_04_prox_catalog() {
    let outcome = (|| -> Outcome {
        let mut r = rng(404);
        let (mut cells, mut requests) = (0, 0);
        let (mut w_res, mut w_moreau, mut w_oracle) = (0.0f64, 0.0f64, 0.0f64);
        for k in [KernelKind::Energy, KernelKind::BoltzmannShannon, KernelKind::Burg] {
            for d in all_distributions() {
                if d.is_univariate() && !catalog::compatible(k, &d) {
                    continue;
                }
                let prior = Prior::Joint(d.clone());
                let m = mean(&d);
                let probe: Vec<f64> = m.iter().map(|&c| catalog::kernel_point(k, c, &mut r)).collect();
                match bregman_prox(&ProxRequest::new(k, &prior, 1.0, &probe)) {
                    Err(Error::Unsupported(_)) => continue,
                    Err(e) => return Err(format!("{} / {}: {e}", k.name(), d.name())),
                    Ok(_) => {}
                }
                cells += 1;
                let cell = format!("{} / {}", k.name(), d.name());
                for _ in 0..20 {
                    let xb: Vec<f64> = m.iter().map(|&c| catalog::kernel_point(k, c, &mut r)).collect();
                    let t = r.random_range((0.1f64).ln()..(3.0f64).ln()).exp();
                    let req = ProxRequest::new(k, &prior, t, &xb);
                    let res = bregman_prox(&req).map_err(|e| format!("{cell} t={t} xbar={xb:?}: {e}"))?;
                    let fo = prox_residual(&req, &res.x).map_err(|e| e.to_string())?;
                    ensure(fo <= 1e-8, || format!("{cell} t={t} xbar={xb:?}: first-order residual {fo:e}"))?;
                    let th = dual_prox_theta(k, &prior, t, &xb).map_err(|e| format!("{cell}: {e}"))?;
                    let hx = kernel_grad(k, &res.x).unwrap();
                    let hb = kernel_grad(k, &xb).unwrap();
                    let moreau = (0..xb.len()).map(|i| (hx[i] + t * th[i] - hb[i]).abs()).fold(0.0, f64::max);
                    ensure(moreau <= 1e-10, || format!("{cell} t={t} xbar={xb:?}: Moreau residual {moreau:e}"))?;
                    if d.is_univariate() {
                        let o = dense_prox_1d(k, &d, t, xb[0]).map_err(|e| format!("oracle {cell}: {e}"))?;
                        let diff = (o - res.x[0]).abs();
                        ensure(diff <= 1e-7, || format!("{cell} t={t} xbar={}: prox {} oracle {o}", xb[0], res.x[0]))?;
                        w_oracle = w_oracle.max(diff);
                    }
                    w_res = w_res.max(fo);
                    w_moreau = w_moreau.max(moreau);
                    requests += 1;
                }
                if m.iter().all(|&v| k == KernelKind::Energy || v > 0.0) {
                    let t = r.random_range(0.1..3.0);
                    let res = bregman_prox(&ProxRequest::new(k, &prior, t, &m)).map_err(|e| format!("{cell} at mean: {e}"))?;
                    let e = inf_norm(&res.x, &m);
                    ensure(e <= 1e-12, || format!("{cell}: prox at the mean moved by {e:e}"))?;
                }
            }
        }
        Ok(format!(
            "{cells} cells, {requests} requests, max residual {w_res:.1e}, Moreau {w_moreau:.1e}, oracle {w_oracle:.1e}"
        ))
    })();
    report(4, "prox catalog", outcome);
}

#[test]
fn criterion_05_smooth_adaptability() {
    let outcome = (|| -> Outcome {
        let mut r = rng(505);
        let mut details = Vec::new();
        let signed: Vec<f64> = (0..8 * 6).map(|_| r.random_range(-1.0..1.0)).collect();
        let pos: Vec<f64> = (0..8 * 6).map(|_| r.random_range(0.0..1.0)).collect();
        let y: Vec<f64> = (0..8).map(|_| r.random_range(0.5..3.0)).collect();
        let signed: Operator = Arc::new(Dense::new(8, 6, signed).unwrap());
        let pos: Operator = Arc::new(Dense::new(8, 6, pos).unwrap());
        for (kind, a) in [(FidelityKind::Normal, &signed), (FidelityKind::Poisson, &pos), (FidelityKind::Gamma, &pos)] {
            let fid = Fidelity::new(kind, a.clone(), y.clone()).map_err(|e| e.to_string())?;
            let l = smoothness_constant(&fid).map_err(|e| e.to_string())?;
            let row = descent_lemma_check(&fid, kind.paired_kernel(), l, 200, 7).map_err(|e| e.to_string())?;
            ensure(row.pass, || format!("{} / {}: violation {:e}", kind.name(), kind.paired_kernel().name(), row.oracle))?;
            details.push(format!("{} violation {:.1e}", kind.name(), row.oracle));
        }
        // the unsquared spectral norm does not certify the normal row once ‖A‖₂ > 1
        let fid = Fidelity::new(FidelityKind::Normal, signed.clone(), y.clone()).unwrap();
        let n2 = op_norm_2(signed.as_ref(), 1e-12).unwrap();
        ensure(n2 > 1.0, || format!("test matrix has ||A|| = {n2}"))?;
        let row = descent_lemma_check(&fid, KernelKind::Energy, n2, 200, 7).unwrap();
        ensure(!row.pass, || "L = ||A||_2 unexpectedly certified the normal row".into())?;
        details.push(format!("normal with L=||A||: violation {:.2} (rejected)", row.oracle));
        Ok(details.join(", "))
    })();
    report(5, "smooth adaptability", outcome);
}

fn monotone(trace: &SolverTrace, slack: f64) -> std::result::Result<f64, String> {
    let mut worst = f64::NEG_INFINITY;
    for w in trace.records.windows(2) {
        let inc = w[1].objective - w[0].objective;
        worst = worst.max(inc);
        if inc > slack {
            return Err(format!("objective rose by {inc:e} at k = {}", w[1].k));
        }
    }
    Ok(worst)
}

fn barcode_problem(noise: f64, mask_all: bool, seed: u64) -> (Problem, Vec<f64>) {
    let d = 64;
    let mask = if mask_all { vec![true; d] } else { (0..d).map(|i| i < 7 || i >= 57).collect::<Vec<_>>() };
    let (truth, p) = gen_barcode(d, &mask, seed).unwrap();
    let a = gaussian_blur(BlurShape::OneD(d), 0.6, Boundary::Reflect).unwrap();
    let y = gen_observation(FidelityKind::Normal, a.as_ref(), &truth, noise, seed).unwrap();
    let prior = Prior::separable(p.into_iter().map(|q| ReferenceDistribution::bernoulli(q).unwrap()).collect()).unwrap();
    let fid = Fidelity::new(FidelityKind::Normal, a, y).unwrap();
    let problem = Problem::new(fid, Regularizer::prior(prior, 1.0).unwrap(), KernelKind::Energy).unwrap();
    (problem, truth)
}

fn blocks(h: usize, w: usize) -> Vec<f64> {
    (0..h * w).map(|i| if (4..12).contains(&(i / w)) && (4..12).contains(&(i % w)) { 1.0 } else { 0.0 }).collect()
}

#[test]
fn criterion_06_bpg_descent() {
    let outcome = (|| -> Outcome {
        let opts = SolverOptions { max_iters: 500, tol: 0.0, ..SolverOptions::default() };
        let mut details = Vec::new();
        let mut check = |name: &str, problem: &Problem, x0: &[f64]| -> std::result::Result<(), String> {
            let start = Instant::now();
            let tr = bpg(problem, x0, &opts).map_err(|e| format!("{name}: {e}"))?;
            let el = start.elapsed();
            ensure(tr.iterations == 500, || format!("{name}: stopped after {} iterations", tr.iterations))?;
            let worst = monotone(&tr, 1e-10).map_err(|e| format!("{name}: {e}"))?;
            ensure(el < Duration::from_secs(30), || format!("{name}: took {el:?}"))?;
            details.push(format!("{name} max rise {worst:.1e} in {el:.2?}"));
            Ok(())
        };

        let (barcode, _) = barcode_problem(0.02, false, 11);
        check("barcode", &barcode, &vec![0.5; 64])?;

        let (h, w) = (16, 16);
        let a = gaussian_blur(BlurShape::TwoD { height: h, width: w }, 1.0, Boundary::Reflect).unwrap();
        let y = gen_observation(FidelityKind::Normal, a.as_ref(), &blocks(h, w), 0.05, 12).unwrap();
        let block = ReferenceDistribution::nig(vec![0.0; 2], vec![0.0; 2], 1.0, 0.5, vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let reg = Regularizer::composite(block, Arc::new(finite_difference_2d(h, w).unwrap()), 0.2).unwrap();
        let fid = Fidelity::new(FidelityKind::Normal, a, y.clone()).unwrap();
        let nig_tv = Problem::new(fid, reg, KernelKind::Energy).unwrap();
        check("nig-tv", &nig_tv, &y)?;

        let mut r = rng(13);
        let a: Vec<f64> = (0..32 * 64).map(|_| r.random_range(0.0..1.0)).collect();
        let a: Operator = Arc::new(Dense::new(32, 64, a).unwrap());
        let truth: Vec<f64> = (0..64).map(|_| r.random_range(0.5..2.0)).collect();
        let y = gen_observation(FidelityKind::Poisson, a.as_ref(), &truth, 0.0, 13).unwrap();
        let prior = Prior::iid(ReferenceDistribution::laplace(1.0, 1.0).unwrap(), 64).unwrap();
        let fid = Fidelity::new(FidelityKind::Poisson, a, y).unwrap();
        let poisson = Problem::new(fid, Regularizer::prior(prior, 0.5).unwrap(), KernelKind::BoltzmannShannon).unwrap();
        check("poisson", &poisson, &vec![1.0; 64])?;
        Ok(details.join(", "))
    })();
    report(6, "BPG monotone descent", outcome);
}

#[test]
fn criterion_07_barcode_recovery() {
    let outcome = (|| -> Outcome {
        let (problem, truth) = barcode_problem(0.0, true, 21);
        let opts = SolverOptions { max_iters: 300, ..SolverOptions::default() };
        let tr = bpg(&problem, &vec![0.5; 64], &opts).map_err(|e| e.to_string())?;
        ensure(tr.iterations <= 300, || format!("{} iterations", tr.iterations))?;
        let wrong = tr.x.iter().zip(&truth).filter(|(x, t)| (**x > 0.5) != (**t > 0.5)).count();
        ensure(wrong == 0, || format!("{wrong} of 64 pixels wrong after {} iterations", tr.iterations))?;
        Ok(format!("64/64 pixels after {} iterations ({})", tr.iterations, tr.reason.name()))
    })();
    report(7, "barcode exact recovery", outcome);
}

#[test]
fn criterion_08_least_squares() {
    let outcome = (|| -> Outcome {
        let n = 32;
        let mut r = rng(808);
        let mut a: Vec<f64> = (0..n * n).map(|_| r.random_range(-0.3..0.3) / (n as f64).sqrt()).collect();
        (0..n).for_each(|i| a[i * n + i] += 1.0);
        let a: Operator = Arc::new(Dense::new(n, n, a).unwrap());
        let truth: Vec<f64> = (0..n).map(|_| r.random_range(-2.0..2.0)).collect();
        let y = a.apply(&truth).unwrap();
        let fid = Fidelity::new(FidelityKind::Normal, a.clone(), y.clone()).unwrap();
        let problem = Problem::new(fid, Regularizer::None, KernelKind::Energy).unwrap();
        // ‖Ax − ŷ‖ ≤ 1e-6 ⇔ ½‖Ax − ŷ‖² ≤ 5e-13
        let opts = SolverOptions { max_iters: 100_000, tol: 0.0, fidelity_target: Some(5e-13), ..SolverOptions::default() };
        let x0 = vec![0.0; n];
        let mut its = Vec::new();
        for (name, tr) in [("bpg", bpg(&problem, &x0, &opts)), ("fista", fista(&problem, &x0, &opts))] {
            let tr = tr.map_err(|e| format!("{name}: {e}"))?;
            let ax = a.apply(&tr.x).unwrap();
            let res = ax.iter().zip(&y).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
            ensure(res <= 1e-6, || format!("{name}: residual {res:e} after {} iterations", tr.iterations))?;
            its.push(tr.iterations);
        }
        ensure(its[1] <= its[0], || format!("fista {} iterations > bpg {}", its[1], its[0]))?;
        Ok(format!("bpg {} iterations, fista {}", its[0], its[1]))
    })();
    report(8, "least squares", outcome);
}

#[test]
fn criterion_09_chambolle_pock() {
    let outcome = (|| -> Outcome {
        let (h, w) = (16, 16);
        let a = gaussian_blur(BlurShape::TwoD { height: h, width: w }, 1.0, Boundary::Reflect).unwrap();
        let y = gen_observation(FidelityKind::Normal, a.as_ref(), &blocks(h, w), 0.05, 9).unwrap();
        let model = NigTv::new(a.clone(), y.clone(), h, w, 0.5).unwrap();
        let lsq = model.diff().norm_sq();
        let s = 0.9 / lsq.sqrt();
        let tau = 0.9 / lsq.sqrt();
        let opts = SolverOptions { max_iters: 300, tol: 0.0, ..SolverOptions::default() };
        let tr = chambolle_pock_nig_tv(&model, s, tau, &y, &opts).map_err(|e| e.to_string())?;
        ensure(tr.records.len() == 301, || format!("{} trace records", tr.records.len()))?;
        let worst = tr.records.iter().map(|r| r.residual).fold(0.0, f64::max);
        ensure(worst <= 1e-10, || format!("rho residual {worst:e}"))?;

        let bad = 1.0 / (tau * lsq);
        match chambolle_pock_nig_tv(&model, bad, tau, &y, &opts) {
            Err(Error::StepSize(_)) => {}
            other => return Err(format!("s*tau*||L||^2 = 1 accepted: {other:?}")),
        }

        let c = 0.7;
        let flat = vec![c; h * w];
        let y = a.apply(&flat).unwrap();
        let model = NigTv::new(a, y, h, w, 0.5).unwrap();
        let mut drift = 0.0f64;
        for k in 1..=100 {
            let o = SolverOptions { max_iters: k, tol: 0.0, ..SolverOptions::default() };
            let tr = chambolle_pock_nig_tv(&model, s, tau, &flat, &o).map_err(|e| e.to_string())?;
            drift = drift.max(inf_norm(&tr.x, &flat));
        }
        ensure(drift <= 1e-10, || format!("constant image drifted by {drift:e}"))?;
        Ok(format!("max rho residual {worst:.1e}, step check enforced, constant drift {drift:.1e}"))
    })();
    report(9, "Chambolle-Pock", outcome);
}

fn run_cli(cfg: &Path) -> std::result::Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_memtool")).arg("run").arg(cfg).output().map_err(|e| e.to_string())?;
    ensure(out.status.success(), || String::from_utf8_lossy(&out.stderr).into_owned())
}

#[test]
fn criterion_10_cli_determinism() {
    let outcome = (|| -> Outcome {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let d = dir.path();
        let (truth, p) = gen_barcode(64, &(0..64).map(|i| i < 7 || i >= 57).collect::<Vec<_>>(), 5).unwrap();
        memtoolbox::textio::write_vector(&d.join("truth.txt"), &truth).unwrap();
        memtoolbox::textio::write_vector(&d.join("p.txt"), &p).unwrap();
        let mut outputs = Vec::new();
        for run in ["a", "b"] {
            let cfg = d.join(format!("{run}.cfg"));
            std::fs::write(
                &cfg,
                format!(
                    "seed = 42\noutput.dir = out_{run}\noperator.kind = blur1d\noperator.size = 64\noperator.sigma = 0.6\n\
                     fidelity.family = normal\ntruth.path = truth.txt\nobservation.noise = 0.05\n\
                     regularizer.prior = bernoulli\nregularizer.p_path = p.txt\nregularizer.tau = 1\nsolver.max_iters = 200\n"
                ),
            )
            .unwrap();
            run_cli(&cfg)?;
            let sol = std::fs::read(d.join(format!("out_{run}/solution.txt"))).map_err(|e| e.to_string())?;
            let trace = std::fs::read(d.join(format!("out_{run}/trace.csv"))).map_err(|e| e.to_string())?;
            outputs.push((sol, trace));
        }
        ensure(outputs[0].0 == outputs[1].0, || "solution files differ".into())?;
        ensure(outputs[0].1 == outputs[1].1, || "trace files differ".into())?;
        Ok(format!("solution {} bytes, trace {} bytes identical", outputs[0].0.len(), outputs[0].1.len()))
    })();
    report(10, "CLI determinism", outcome);
}
