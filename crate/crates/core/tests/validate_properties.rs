mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use robustcounter::robustify::{robustify, Mode};
use robustcounter::sitesel::{self, SiteMode};
use robustcounter::solver::{solve, SolverOptions};
use robustcounter::uncertainty::{Distribution, RobustConfig, Target};
use robustcounter::validate::{corner_check, monte_carlo_check, sweep, SweepGrid};

use common::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn monte_carlo_repeats_bit_for_bit(seed in any::<u64>(), mc_seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ilp = random_ilp(&mut rng, 4, 3, 3);
        let set = random_interval_set(&mut rng, &ilp, 6);
        let x = vec![1.0; ilp.model.num_variables()];
        let a = monte_carlo_check(&ilp.model, &set, &x, 0.1, 0.0, 2000, mc_seed).unwrap();
        let b = monte_carlo_check(&ilp.model, &set, &x, 0.1, 0.0, 2000, mc_seed).unwrap();
        prop_assert_eq!(format!("{a:?}"), format!("{b:?}"));
    }

    #[test]
    fn extra_entries_leave_other_rows_draws_alone(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ilp = random_ilp(&mut rng, 4, 3, 2);
        prop_assume!(ilp.rows.len() >= 2);
        let first = ilp.model.constraint_by_label("r0").unwrap();
        let second = ilp.model.constraint_by_label("r1").unwrap();
        let mut base = robustcounter::uncertainty::UncertainSet::new();
        base.add(first, Target::Rhs, Distribution::Bounded { epsilon: None }).unwrap();
        let mut grown = base.clone();
        grown.add(second, Target::Rhs, Distribution::Uniform).unwrap();
        let x: Vec<f64> = ilp.upper.iter().map(|&u| u as f64).collect();
        let a = monte_carlo_check(&ilp.model, &base, &x, 0.3, 0.0, 5000, 9).unwrap();
        let b = monte_carlo_check(&ilp.model, &grown, &x, 0.3, 0.0, 5000, 9).unwrap();
        let count = |e: &robustcounter::validate::ViolationEstimate| {
            e.per_constraint.iter().find(|(l, _)| l == "r0").map(|p| p.1)
        };
        prop_assert_eq!(count(&a), count(&b));
    }
}

#[test]
fn zero_epsilon_never_violates_a_nominal_optimum() {
    let model = read_model("models/production.txt");
    let set = read_annotations("models/production_scaled.unc", &model);
    let sol = solve(&model, &SolverOptions::default()).unwrap();
    let est = monte_carlo_check(&model, &set, &sol.values, 0.0, 0.0, 10_000, 3).unwrap();
    assert_eq!(est.violations, 0);
    assert!(corner_check(&model, &set, &sol.values, 0.0, 0.0).unwrap().certified);
}

#[test]
fn single_row_optimum_certifies_at_its_binding_corner() {
    let model = read_model("models/single_row.txt");
    let set = read_annotations("models/single_row.unc", &model);
    let art = robustify(&model, &set, Mode::Irc, &RobustConfig::new(0.1, 0.0, 1.0).unwrap()).unwrap();
    let sol = solve(&art.model, &SolverOptions::default()).unwrap();
    assert!((sol.objective - 9.0 / 1.1).abs() <= 1e-7);
    let rep = corner_check(&model, &set, &sol.values[..1], 0.1, 0.0).unwrap();
    assert!(rep.certified);
    assert!(rep.constraints[0].worst_violation.abs() <= 1e-7);
}

/// Every pair of grid points that differ in one coordinate is ordered.
#[test]
fn sweep_rows_are_ordered_on_the_lattice() {
    let points = SweepGrid::parse("eps=0:0.05:0.2 delta=0,0.05,0.1 kappa=0.05,0.14,0.5").unwrap().points().unwrap();
    let opts = SolverOptions::default();
    let mut cases = Vec::new();
    for dir in SITE_FIXTURES {
        let inst = sitesel::load_instance(fixture(dir)).unwrap();
        for mode in [SiteMode::Irc, SiteMode::Rc] {
            let rows = sweep(|c: &RobustConfig| sitesel::build(&inst, mode, c), &points, &opts, 2).unwrap();
            cases.push((format!("{dir} {}", mode.as_str()), rows));
        }
    }
    for (model_path, unc_path) in ANNOTATED_MODELS {
        let model = read_model(model_path);
        let set = read_annotations(unc_path, &model);
        for mode in [Mode::Irc, Mode::Rc] {
            let rows = sweep(|c: &RobustConfig| robustify(&model, &set, mode, c).map(|a| a.model), &points, &opts, 2).unwrap();
            cases.push((format!("{unc_path} {}", mode.as_str()), rows));
        }
    }
    for (name, rows) in &cases {
        let obj = |k: usize| rows[k].objective.unwrap_or(f64::NEG_INFINITY);
        for a in 0..rows.len() {
            for b in 0..rows.len() {
                let (p, q) = (rows[a].config, rows[b].config);
                let only_eps = p.delta == q.delta && p.kappa == q.kappa && p.epsilon < q.epsilon;
                let only_delta = p.epsilon == q.epsilon && p.kappa == q.kappa && p.delta < q.delta;
                let only_kappa = p.epsilon == q.epsilon && p.delta == q.delta && p.kappa < q.kappa;
                if only_eps {
                    assert!(obj(b) <= obj(a) + 1e-6, "{name}: {p:?} -> {q:?}");
                }
                if only_delta || only_kappa {
                    assert!(obj(b) >= obj(a) - 1e-6, "{name}: {p:?} -> {q:?}");
                }
            }
        }
    }
}
