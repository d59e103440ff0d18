//! Acceptance suite: one pass/fail line per criterion, nonzero exit on any failure.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, Discrete, Normal, Poisson};

use robustcounter::model::{export_text, import_text, LinExpr, Model, ObjSense, Sense, Status};
use robustcounter::robustify::timing::{
    robust_timing_bounded, robust_timing_for, robust_timing_normal, template_model, DeltaSplitReading,
    ProcessingSpread, SplitBasis, PROCESSING_UNCERTAINTIES,
};
use robustcounter::robustify::{robustify, Mode};
use robustcounter::sitesel::{self, SiteMode};
use robustcounter::solver::{solve, SolverOptions};
use robustcounter::uncertainty::{discrete_deviation, omega_from_kappa, Distribution, RobustConfig, Target, UncertainSet};
use robustcounter::validate::{corner_check, monte_carlo_check, sweep};

use common::*;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

fn cfg(e: f64, d: f64, k: f64) -> RobustConfig {
    RobustConfig::new(e, d, k).unwrap()
}

/// Cone weight against the closed form `κ = exp(-Ω²/2)`.
fn c1_omega() -> Outcome {
    let w = omega_from_kappa((-2.0f64).exp()).unwrap();
    ensure(close(w, 2.0, 1e-12), || format!("omega(e^-2) = {w}"))?;
    let w = omega_from_kappa(0.05).unwrap();
    ensure(close(w, 2.447747, 1e-5), || format!("omega(0.05) = {w}"))?;
    let back = (-w * w / 2.0).exp();
    ensure(close(back, 0.05, 1e-12), || format!("exp(-w^2/2) = {back}"))?;
    Ok(format!("omega(e^-2) = {:.12}, omega(0.05) = {w:.6}", omega_from_kappa((-2.0f64).exp()).unwrap()))
}

/// Integer deviation of Poisson(5) at κ = 0.24, checked by summing the pmf.
fn c2_poisson() -> Outcome {
    let t = discrete_deviation(&Distribution::Poisson { mean: 5.0 }, 0.24).unwrap();
    let p = Poisson::new(5.0).unwrap();
    let tail = |t: u64| 1.0 - (0..=t).map(|k| p.pmf(k)).sum::<f64>();
    let oracle = (0u64..).find(|&t| tail(t) <= 0.24).unwrap();
    ensure(oracle == 6, || format!("oracle gave {oracle}"))?;
    ensure(t == oracle as f64, || format!("deviation {t}, oracle {oracle}"))?;
    Ok(format!("t = {t}, P(X > 6) = {:.4}, P(X > 5) = {:.4}", tail(6), tail(5)))
}

struct IrcCase {
    ilp: RandomIlp,
    set: UncertainSet,
    epsilon: f64,
    delta: f64,
}

fn irc_cases() -> Vec<IrcCase> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x1c3);
    (0..100)
        .map(|_| {
            let ilp = random_ilp(&mut rng, 6, 4, 3);
            let set = random_interval_set(&mut rng, &ilp, 10);
            let epsilon = [0.05, 0.1, 0.2][rng.random_range(0..3)];
            let delta = [0.0, 0.1][rng.random_range(0..2)];
            IrcCase { ilp, set, epsilon, delta }
        })
        .collect()
}

fn solve_irc(case: &IrcCase) -> robustcounter::model::Solution {
    let art = robustify(&case.ilp.model, &case.set, Mode::Irc, &cfg(case.epsilon, case.delta, 1.0)).unwrap();
    solve(&art.model, &SolverOptions::default()).unwrap()
}

/// Interval-counterpart optima survive every corner of the box.
fn c3_irc_certified(cases: &[IrcCase]) -> Outcome {
    let mut optimal = 0;
    for (k, case) in cases.iter().enumerate() {
        let sol = solve_irc(case);
        if sol.status != Status::Optimal {
            continue;
        }
        optimal += 1;
        let n = case.ilp.model.num_variables();
        let rep = corner_check(&case.ilp.model, &case.set, &sol.values[..n], case.epsilon, case.delta).unwrap();
        ensure(rep.certified, || format!("instance {k}: {:?}", rep.constraints))?;
    }
    Ok(format!("{optimal} of {} optima certified", cases.len()))
}

/// Interval-counterpart objective equals the enumerated robust optimum.
fn c4_irc_brute_force(cases: &[IrcCase]) -> Outcome {
    let mut infeasible = 0;
    for (k, case) in cases.iter().enumerate() {
        let sol = solve_irc(case);
        let oracle = brute_force_robust(&case.ilp, &case.set, case.epsilon, case.delta);
        match (sol.status, oracle) {
            (Status::Optimal, Some(best)) => {
                ensure(close(sol.objective, best, 1e-6), || format!("instance {k}: {} vs {best}", sol.objective))?
            }
            (Status::Infeasible, None) => infeasible += 1,
            (s, o) => return Err(format!("instance {k}: status {s}, oracle {o:?}")),
        }
    }
    Ok(format!("{} instances match ({infeasible} infeasible)", cases.len()))
}

/// Random LP with positive data whose rows carry bounded uncertainty.
fn random_rc_instance(rng: &mut ChaCha8Rng) -> (Model, UncertainSet) {
    let n = rng.random_range(2..=4);
    let m = rng.random_range(1..=2);
    let mut model = Model::new();
    let vars: Vec<_> = (0..n).map(|j| model.add_continuous(&format!("x{j}"), 0.0, 10.0).unwrap()).collect();
    let mut cons = Vec::new();
    for i in 0..m {
        let expr = LinExpr::from_terms(vars.iter().map(|&v| (v, rng.random_range(1..=6) as f64)));
        cons.push(model.add_constraint(&format!("r{i}"), expr, Sense::Le, rng.random_range(10..=30) as f64).unwrap());
    }
    let obj = LinExpr::from_terms(vars.iter().map(|&v| (v, rng.random_range(1..=5) as f64)));
    model.set_objective(ObjSense::Maximize, obj).unwrap();
    let mut slots: Vec<_> = cons.iter().flat_map(|&c| vars.iter().map(move |&v| (c, Target::Var(v)))).collect();
    slots.extend(cons.iter().map(|&c| (c, Target::Rhs)));
    let mut set = UncertainSet::new();
    for _ in 0..rng.random_range(1..=5.min(slots.len())) {
        let (c, t) = slots.swap_remove(rng.random_range(0..slots.len()));
        set.add(c, t, Distribution::Bounded { epsilon: None }).unwrap();
    }
    (model, set)
}

/// Symmetric-counterpart optima are violated with frequency at most κ.
fn c5_rc_probability() -> Outcome {
    const N: u64 = 100_000;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5c5);
    let mut worst: f64 = 0.0;
    let mut nominal_mean = 0.0;
    for k in 0..20 {
        let (model, set) = random_rc_instance(&mut rng);
        let kappa = [0.05, 0.14][k % 2];
        let epsilon = [0.1, 0.2, 0.3][rng.random_range(0..3)];
        let art = robustify(&model, &set, Mode::Rc, &cfg(epsilon, 0.0, kappa)).unwrap();
        let sol = solve(&art.model, &SolverOptions::default()).unwrap();
        ensure(sol.is_optimal(), || format!("instance {k}: {}", sol.status))?;
        let n = model.num_variables();
        let est = monte_carlo_check(&model, &set, &sol.values[..n], epsilon, 0.0, N, k as u64).unwrap();
        let limit = kappa + 3.0 * (kappa * (1.0 - kappa) / N as f64).sqrt();
        ensure(est.frequency <= limit, || format!("instance {k}: frequency {} > {limit}", est.frequency))?;
        worst = worst.max(est.frequency / kappa);
        let base = solve(&model, &SolverOptions::default()).unwrap();
        let exposed = monte_carlo_check(&model, &set, &base.values, epsilon, 0.0, N, k as u64).unwrap();
        nominal_mean += exposed.frequency / 20.0;
    }
    Ok(format!(
        "20 instances within bound, worst frequency/kappa = {worst:.4}, nominal optima violated {nominal_mean:.3} on average"
    ))
}

/// Demo sweep objectives fall with ε and rise with δ and κ.
fn c6_sweep_monotone() -> Outcome {
    let inst = sitesel::load_instance(fixture("sitesel_demo")).unwrap();
    let eps = [0.0, 0.05, 0.1, 0.15, 0.2];
    let deltas = [0.0, 0.05, 0.1];
    let kappas = [0.05, 0.14, 0.5];
    let mut points = Vec::new();
    for &e in &eps {
        for &d in &deltas {
            for &k in &kappas {
                points.push(cfg(e, d, k));
            }
        }
    }
    let at = |e: usize, d: usize, k: usize| e * 9 + d * 3 + k;
    let mut summary = Vec::new();
    for mode in [SiteMode::Irc, SiteMode::Rc] {
        let rows = sweep(|c: &RobustConfig| sitesel::build(&inst, mode, c), &points, &SolverOptions::default(), 0).unwrap();
        let obj = |i: usize| rows[i].objective.unwrap_or(f64::NEG_INFINITY);
        ensure(rows.iter().all(|r| r.status == "optimal" || r.status == "infeasible"), || {
            format!("{}: unexpected statuses {:?}", mode.as_str(), rows.iter().map(|r| &r.status).collect::<Vec<_>>())
        })?;
        #[allow(clippy::needless_range_loop)]
        for e in 0..5 {
            for d in 0..3 {
                for k in 0..3 {
                    let here = obj(at(e, d, k));
                    let fail = |what: &str, other: f64| {
                        format!("{} at ({}, {}, {}): {what} {here} vs {other}", mode.as_str(), eps[e], deltas[d], kappas[k])
                    };
                    if e + 1 < 5 {
                        let next = obj(at(e + 1, d, k));
                        ensure(next <= here + 1e-6, || fail("eps up", next))?;
                    }
                    if d + 1 < 3 {
                        let next = obj(at(e, d + 1, k));
                        ensure(next >= here - 1e-6, || fail("delta up", next))?;
                    }
                    if k + 1 < 3 {
                        let next = obj(at(e, d, k + 1));
                        ensure(next >= here - 1e-6, || fail("kappa up", next))?;
                    }
                }
            }
        }
        summary.push(format!("{} {:.3}..{:.3}", mode.as_str(), obj(at(4, 0, 0)), obj(at(0, 2, 2))));
    }
    Ok(format!("45 points per mode monotone ({})", summary.join(", ")))
}

/// At `(0, 0, 1)` both counterparts reproduce the nominal optimum.
fn c7_nominal_reduction() -> Outcome {
    let opts = SolverOptions::default();
    let nominal = RobustConfig::nominal();
    let mut checked = 0;
    for dir in SITE_FIXTURES {
        let inst = sitesel::load_instance(fixture(dir)).unwrap();
        let base = solve(&sitesel::build_nominal(&inst).unwrap(), &opts).unwrap();
        for mode in [SiteMode::Irc, SiteMode::Rc] {
            let sol = solve(&sitesel::build(&inst, mode, &nominal).unwrap(), &opts).unwrap();
            ensure(sol.status == base.status && close(sol.objective, base.objective, 1e-7), || {
                format!("{dir} {}: {} {} vs {} {}", mode.as_str(), sol.status, sol.objective, base.status, base.objective)
            })?;
            checked += 1;
        }
    }
    let mut fixed_width = Vec::new();
    for (model_path, unc_path) in ANNOTATED_MODELS {
        let model = read_model(model_path);
        let set = read_annotations(unc_path, &model);
        if !scales_with_epsilon(&set) {
            fixed_width.push(*unc_path);
            continue;
        }
        let base = solve(&model, &opts).unwrap();
        for mode in [Mode::Irc, Mode::Rc] {
            let art = robustify(&model, &set, mode, &nominal).unwrap();
            let sol = solve(&art.model, &opts).unwrap();
            ensure(sol.status == base.status && close(sol.objective, base.objective, 1e-7), || {
                format!("{model_path} {}: {} vs {}", mode.as_str(), sol.objective, base.objective)
            })?;
            checked += 1;
        }
    }
    Ok(format!(
        "{checked} counterparts equal their nominal optimum; skipped fixed-width annotations {fixed_width:?}"
    ))
}

/// Branch-and-bound agrees with enumeration on binary programs.
fn c8_milp_exact() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x8b8);
    let mut infeasible = 0;
    for k in 0..200 {
        let (model, objective, rows) = random_binary_model(&mut rng, 10, 6);
        let sol = solve(&model, &SolverOptions::default()).unwrap();
        match (sol.status, brute_force_binary(&objective, &rows)) {
            (Status::Optimal, Some(best)) => {
                ensure(sol.objective == best, || format!("instance {k}: {} vs {best}", sol.objective))?;
                ensure(rows.iter().all(|(c, s, b)| satisfies(c, *s, *b, &sol.values)), || {
                    format!("instance {k}: reported point infeasible")
                })?;
            }
            (Status::Infeasible, None) => infeasible += 1,
            (s, o) => return Err(format!("instance {k}: status {s}, oracle {o:?}")),
        }
    }
    Ok(format!("200 instances match ({infeasible} infeasible)"))
}

/// Split-tolerance identities of the robust timing rows.
fn c9_timing() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x919);
    let std = Normal::standard();
    for _ in 0..500 {
        let alpha = rng.random_range(0.1..20.0);
        let beta = rng.random_range(0.0..2.0);
        let eps = rng.random_range(0.0..0.5);
        let delta = rng.random_range(0.0..1.0);
        let (_, t) = template_model(alpha, beta, 24.0, 0.5).unwrap();
        let r = robust_timing_bounded(&t, eps, delta, SplitBasis::Duration).unwrap();
        ensure(close(delta + r.delta2, 2.0 * eps * alpha, 1e-12), || format!("bounded alpha={alpha} eps={eps}"))?;
        let mu = rng.random_range(0.0..15.0);
        let sigma = rng.random_range(0.01..2.0);
        let kappa = rng.random_range(0.01..0.49);
        let lambda = std.inverse_cdf(1.0 - kappa);
        let r = robust_timing_normal(&t, mu, sigma, eps, delta, kappa, DeltaSplitReading::Sigma).unwrap();
        let want = 2.0 * eps * (lambda * sigma.sqrt() - mu);
        ensure(close(delta + r.delta2, want, 1e-9), || format!("normal mu={mu} sigma={sigma}: {} vs {want}", delta + r.delta2))?;
    }
    let (mut model, t) = template_model(10.0, 0.5, 24.0, 0.5).unwrap();
    for (k, row) in PROCESSING_UNCERTAINTIES.iter().enumerate() {
        let r = robust_timing_for(row, &t, 0.1, 0.05, 0.14).unwrap();
        if let ProcessingSpread::Range { low, high } = row.spread {
            ensure(close(0.05 + r.delta2, high - low, 1e-12), || format!("row {k}: range split"))?;
            ensure(r.alpha == low, || format!("row {k}: alpha {}", r.alpha))?;
        }
        r.apply(&mut model, &format!("row{k}")).unwrap();
    }
    ensure(PROCESSING_UNCERTAINTIES.len() == 9, || "expected 9 processing rows".into())?;
    Ok("identities hold on 500 draws; 9 processing rows applied".into())
}

/// Exported text re-imports to a model with the same optimum.
fn c10_round_trip() -> Outcome {
    let opts = SolverOptions::default();
    let mut models: Vec<(String, Model)> = Vec::new();
    for path in PLAIN_MODELS {
        models.push((path.to_string(), read_model(path)));
    }
    for (model_path, unc_path) in ANNOTATED_MODELS {
        let model = read_model(model_path);
        let set = read_annotations(unc_path, &model);
        for mode in [Mode::Irc, Mode::Rc] {
            let art = robustify(&model, &set, mode, &cfg(0.1, 0.05, 0.14)).unwrap();
            models.push((format!("{model_path} {}", mode.as_str()), art.model));
        }
    }
    for dir in SITE_FIXTURES {
        let inst = sitesel::load_instance(fixture(dir)).unwrap();
        for mode in [SiteMode::Nominal, SiteMode::Irc, SiteMode::Rc] {
            models.push((format!("{dir} {}", mode.as_str()), sitesel::build(&inst, mode, &cfg(0.1, 0.05, 0.14)).unwrap()));
        }
    }
    for (name, model) in &models {
        let direct = solve(model, &opts).unwrap();
        let again = solve(&import_text(&export_text(model)).unwrap(), &opts).unwrap();
        ensure(direct.status == again.status, || format!("{name}: {} vs {}", direct.status, again.status))?;
        if direct.is_optimal() {
            ensure(close(direct.objective, again.objective, 1e-9), || {
                format!("{name}: {} vs {}", direct.objective, again.objective)
            })?;
        }
    }
    Ok(format!("{} models round-trip", models.len()))
}

type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn main() -> ExitCode {
    let cases = irc_cases();
    let criteria: Vec<Criterion<'_>> = vec![
        ("cone weight from kappa", Box::new(c1_omega)),
        ("integer tail deviation", Box::new(c2_poisson)),
        ("interval optima certified at corners", Box::new(|| c3_irc_certified(&cases))),
        ("interval optima match enumeration", Box::new(|| c4_irc_brute_force(&cases))),
        ("symmetric violation frequency", Box::new(c5_rc_probability)),
        ("sweep monotonicity", Box::new(c6_sweep_monotone)),
        ("nominal reduction", Box::new(c7_nominal_reduction)),
        ("exact MILP", Box::new(c8_milp_exact)),
        ("timing identities", Box::new(c9_timing)),
        ("text round trip", Box::new(c10_round_trip)),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let started = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = started.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("[PASS] criterion {}: {name}: {detail} ({secs:.1} s)", k + 1),
            Err(detail) => {
                failed += 1;
                println!("[FAIL] criterion {}: {name}: {detail} ({secs:.1} s)", k + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
