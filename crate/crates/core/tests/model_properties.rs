mod common;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use robustcounter::model::{export_text, import_text, ConeTerm, LinExpr, Model, ObjSense, Sense, Status, VarId, VarKind};
use robustcounter::solver::{solve, solve_lp, SolverOptions};

/// Model exercising every variable kind, bound shape, sense and cone rows.
fn random_model(seed: u64, with_cones: bool) -> Model {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = Model::new();
    let n = rng.random_range(1..=5);
    let vars: Vec<VarId> = (0..n)
        .map(|j| {
            let name = format!("v{j}");
            match rng.random_range(0..5) {
                0 => m.add_binary(&name),
                1 => m.add_integer(&name, rng.random_range(-3..=0) as f64, rng.random_range(1..=4) as f64),
                2 => m.add_continuous(&name, f64::NEG_INFINITY, f64::INFINITY),
                3 => m.add_continuous(&name, f64::NEG_INFINITY, rng.random_range(-2.0..5.0)),
                _ => m.add_continuous(&name, rng.random_range(-5.0..0.0), f64::INFINITY),
            }
            .unwrap()
        })
        .collect();
    let expr = |rng: &mut ChaCha8Rng| {
        let mut e = LinExpr::zero();
        for &v in &vars {
            if rng.random_bool(0.7) {
                e.add_term(v, rng.random_range(-9.0..9.0));
            }
        }
        e.with_constant(if rng.random_bool(0.3) { rng.random_range(-3.0..3.0) } else { 0.0 })
    };
    for i in 0..rng.random_range(0..=5) {
        let lhs = expr(&mut rng);
        let rhs = rng.random_range(-20.0..20.0);
        if with_cones && rng.random_bool(0.3) {
            let mut comps = Vec::new();
            for &v in &vars {
                if rng.random_bool(0.5) {
                    comps.push((v, rng.random_range(-3.0..3.0)));
                }
            }
            let cone = ConeTerm::new(rng.random_range(0.0..2.0), comps, rng.random_range(0.0..4.0)).unwrap();
            m.add_cone_constraint(&format!("k{i}"), lhs, cone, Sense::Le, rhs).unwrap();
        } else {
            let sense = [Sense::Le, Sense::Ge, Sense::Eq][rng.random_range(0..3)];
            m.add_constraint(&format!("c{i}"), lhs, sense, rhs).unwrap();
        }
    }
    let sense = if rng.random_bool(0.5) { ObjSense::Maximize } else { ObjSense::Minimize };
    let obj = expr(&mut rng);
    m.set_objective(sense, obj).unwrap();
    m
}

/// Bounded continuous LP that is feasible at the origin.
fn random_lp(seed: u64) -> Model {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = Model::new();
    let n = rng.random_range(1..=4);
    let vars: Vec<VarId> = (0..n)
        .map(|j| {
            let lo = rng.random_range(-4..=0) as f64;
            let hi = rng.random_range(0..=6) as f64;
            if rng.random_bool(0.2) {
                m.add_continuous(&format!("x{j}"), lo, f64::INFINITY).unwrap()
            } else {
                m.add_continuous(&format!("x{j}"), lo, hi).unwrap()
            }
        })
        .collect();
    // a cap on the sum keeps half-bounded columns from running off
    m.add_constraint("cap", LinExpr::from_terms(vars.iter().map(|&v| (v, 1.0))), Sense::Le, 10.0).unwrap();
    for i in 0..rng.random_range(0..=4) {
        let lhs = LinExpr::from_terms(vars.iter().map(|&v| (v, rng.random_range(-4..=4) as f64)));
        let sense = [Sense::Le, Sense::Ge][rng.random_range(0..2)];
        let rhs = match sense {
            Sense::Le => rng.random_range(0..=10) as f64,
            _ => -(rng.random_range(0..=10) as f64),
        };
        m.add_constraint(&format!("r{i}"), lhs, sense, rhs).unwrap();
    }
    let sense = if rng.random_bool(0.5) { ObjSense::Maximize } else { ObjSense::Minimize };
    let obj = LinExpr::from_terms(vars.iter().map(|&v| (v, rng.random_range(-5..=5) as f64)));
    m.set_objective(sense, obj).unwrap();
    m
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn shuffled_terms_merge_identically(
        terms in prop::collection::vec((0usize..6, -10.0f64..10.0), 0..20),
        seed in any::<u64>(),
    ) {
        let mut m = Model::new();
        let vars: Vec<VarId> = (0..6).map(|j| m.add_continuous(&format!("v{j}"), 0.0, 1.0).unwrap()).collect();
        let list: Vec<(VarId, f64)> = terms.iter().map(|&(j, c)| (vars[j], c)).collect();
        let mut shuffled = list.clone();
        shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let a = LinExpr::from_terms(list.clone());
        let b = LinExpr::from_terms(shuffled);
        let mut ids: Vec<VarId> = a.terms().iter().map(|t| t.0).collect();
        ids.sort();
        ids.dedup();
        prop_assert_eq!(ids.len(), a.terms().len());
        for &v in &vars {
            let sum: f64 = list.iter().filter(|t| t.0 == v).map(|t| t.1).sum();
            prop_assert!((a.coefficient(v) - sum).abs() <= 1e-9);
            prop_assert!((a.coefficient(v) - b.coefficient(v)).abs() <= 1e-9);
        }
    }

    #[test]
    fn residual_is_affine_for_le_rows(
        coeffs in prop::collection::vec(-10.0f64..10.0, 3),
        rhs in -10.0f64..10.0,
        p in prop::collection::vec(-5.0f64..5.0, 3),
        q in prop::collection::vec(-5.0f64..5.0, 3),
        alpha in 0.0f64..=1.0,
    ) {
        let mut m = Model::new();
        let vars: Vec<VarId> = (0..3).map(|j| m.add_continuous(&format!("v{j}"), -5.0, 5.0).unwrap()).collect();
        let c = m
            .add_constraint("c", LinExpr::from_terms(vars.iter().zip(&coeffs).map(|(&v, &a)| (v, a))), Sense::Le, rhs)
            .unwrap();
        let mix: Vec<f64> = p.iter().zip(&q).map(|(a, b)| alpha * a + (1.0 - alpha) * b).collect();
        let r = |x: &[f64]| m.evaluate_constraint(x, c).unwrap();
        let expect = alpha * r(&p) + (1.0 - alpha) * r(&q);
        prop_assert!((r(&mix) - expect).abs() <= 1e-9 * (1.0 + expect.abs()));
    }

    #[test]
    fn text_round_trip_preserves_structure(seed in any::<u64>()) {
        let model = random_model(seed, true);
        let text = export_text(&model);
        let back = import_text(&text).unwrap();
        prop_assert_eq!(&back, &model);
        prop_assert_eq!(export_text(&back), text);
    }

    #[test]
    fn standard_form_point_mapping_inverts(seed in any::<u64>()) {
        let model = random_model(seed, false);
        let sf = model.to_standard_form().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabc);
        let x: Vec<f64> = model
            .variables()
            .iter()
            .map(|v| {
                let lo = if v.lower().is_finite() { v.lower() } else { v.upper().min(0.0) - 5.0 };
                let hi = if v.upper().is_finite() { v.upper() } else { lo.max(0.0) + 5.0 };
                rng.random_range(lo..=hi)
            })
            .collect();
        let cols = sf.map_point(&x);
        let back = sf.recover(&cols);
        for (a, b) in x.iter().zip(&back) {
            prop_assert!((a - b).abs() <= 1e-9);
        }
        let obj = model.objective_value(&x);
        prop_assert!((sf.objective_sign * sf.objective_value(&cols) - obj).abs() <= 1e-9 * (1.0 + obj.abs()));
        // a point is model-feasible exactly when its columns satisfy the standard rows
        let model_ok = model.max_violation(&x) <= 1e-9;
        let sf_ok = sf.max_violation(&cols) <= 1e-9;
        prop_assert_eq!(model_ok, sf_ok);
    }
}

#[test]
fn standard_form_optimum_matches_direct_solve() {
    let opts = SolverOptions::default();
    let mut optimal = 0;
    for seed in 0..100u64 {
        let model = random_lp(seed);
        let direct = solve(&model, &opts).unwrap();
        let sf = model.to_standard_form().unwrap();
        let via = solve_lp(&sf, &opts).unwrap();
        assert_eq!(direct.status, via.status, "seed {seed}");
        assert_eq!(direct.status, Status::Optimal, "seed {seed}: origin is feasible and the region bounded");
        assert!((direct.objective - via.objective).abs() <= 1e-7, "seed {seed}");
        assert!(model.max_violation(&via.values) <= 1e-7, "seed {seed}");
        optimal += 1;
    }
    assert_eq!(optimal, 100);
}

#[test]
fn exported_kinds_survive() {
    for seed in 0..50 {
        let m = random_model(seed, true);
        let back = import_text(&export_text(&m)).unwrap();
        for (a, b) in m.variables().iter().zip(back.variables()) {
            assert_eq!(a.kind(), b.kind());
            if a.kind() == VarKind::Binary {
                assert_eq!((b.lower(), b.upper()), (0.0, 1.0));
            }
        }
    }
}
