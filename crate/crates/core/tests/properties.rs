#![allow(clippy::needless_range_loop)]

use cone_metric_core::catalog::{self, ContractionKind, KindTag, PowerParams};
use cone_metric_core::cone::{Cone, ConeKind, Norm, SolverConfig};
use cone_metric_core::equiv::{self, psi_from_phi, MinNormProblem, PhiSpec, ScalarFn};
use cone_metric_core::fixedpoint;
use cone_metric_core::linalg::{self, Matrix};
use cone_metric_core::rng;
use cone_metric_core::space::FiniteConeMetricSpace;
use cone_metric_core::suite;
use proptest::prelude::*;
use rand::Rng as _;

fn cone_for(seed: u64) -> Cone {
    let mut r = rng::rng_from_seed(seed);
    let dim = r.gen_range(2..=4);
    suite::random_cone(&mut r, dim)
}

fn vector(seed: u64, dim: usize) -> Vec<f64> {
    let mut r = rng::rng_from_seed(seed);
    (0..dim).map(|_| r.gen_range(-3.0..3.0)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn order_is_reflexive_and_antisymmetric(seed in any::<u64>()) {
        let cone = cone_for(seed);
        let a = vector(seed ^ 1, cone.dim());
        let b = vector(seed ^ 2, cone.dim());
        prop_assert!(cone.leq(&a, &a, 1e-9).unwrap());
        if cone.leq(&a, &b, 1e-9).unwrap() && cone.leq(&b, &a, 1e-9).unwrap() {
            prop_assert!(linalg::distance2(&a, &b) <= 1e-6);
        }
        // b + p ≥ b for any p in the cone.
        let p = cone.sample_point(&mut rng::rng_from_seed(seed ^ 3));
        prop_assert!(cone.leq(&b, &linalg::add(&b, &p), 1e-9).unwrap());
    }

    #[test]
    fn projection_satisfies_moreau(seed in any::<u64>()) {
        let cone = cone_for(seed);
        let v = vector(seed ^ 5, cone.dim());
        let cfg = SolverConfig::default();
        let p = cone.project(&v, &cfg).unwrap();
        let p = p.as_slice();
        prop_assert!(cone.contains(p, 1e-8).unwrap());
        let r = linalg::sub(&v, p);
        prop_assert!(linalg::dot(p, &r).abs() <= 1e-8 * (1.0 + linalg::dot(&v, &v)));
        prop_assert!(cone.dual().contains(&linalg::scale(-1.0, &r), 1e-8).unwrap());
        let pp = cone.project(p, &cfg).unwrap();
        prop_assert!(linalg::distance2(pp.as_slice(), p) <= 1e-8);
    }

    #[test]
    fn interior_points_are_members(seed in any::<u64>(), margin in 1e-6f64..0.5) {
        let cone = cone_for(seed);
        let v = vector(seed ^ 7, cone.dim());
        if cone.contains_interior(&v, margin).unwrap() {
            prop_assert!(cone.contains(&v, 0.0).unwrap());
        }
    }

    #[test]
    fn euclidean_is_monotone_on_self_dual_cones(seed in any::<u64>(), dim in 2usize..6) {
        prop_assert!(Cone::orthant(dim).unwrap().is_norm_monotone(&Norm::Euclidean, 64, seed));
        prop_assert!(Cone::lorentz(dim).unwrap().is_norm_monotone(&Norm::Euclidean, 64, seed));
    }

    #[test]
    fn generated_spaces_are_cone_metrics(seed in any::<u64>()) {
        let s = suite::generated_space(seed).unwrap();
        let r = s.validate_axioms(1e-9);
        prop_assert!(r.is_valid(), "{:?}", r.violations);
    }

    #[test]
    fn saturating_transform_keeps_one_dimensional_metrics(seed in any::<u64>(), n in 2usize..8) {
        let mut r = rng::rng_from_seed(seed);
        let pos: Vec<f64> = (0..n).map(|i| i as f64 + r.gen_range(0.0..5.0) * (i as f64 + 1.0)).collect();
        let rho: Vec<Vec<f64>> = pos.iter().map(|a| pos.iter().map(|b| (a - b).abs()).collect()).collect();
        let labels = (0..n).map(|i| format!("x{i}")).collect();
        let space = FiniteConeMetricSpace::from_scalar_metric(labels, Cone::orthant(1).unwrap(), Norm::Euclidean, &rho, &[1.0]).unwrap();
        let star = space.transform_metric(&PhiSpec::Scalar1D(ScalarFn::Saturating)).unwrap();
        prop_assert!(star.validate_axioms(1e-9).is_valid());
    }

    #[test]
    fn equivalent_distance_is_at_most_the_norm(seed in any::<u64>()) {
        let mut r = rng::rng_from_seed(seed);
        let cone = cone_for(seed);
        let norm = suite::random_norm(&mut r, cone.dim());
        let v = cone.sample_point(&mut r);
        let prob = MinNormProblem::new(&v, &cone, &norm).unwrap();
        let d = equiv::equivalent_distance(&prob, &SolverConfig::default()).unwrap().value;
        prop_assert!(d >= 0.0);
        prop_assert!(d <= norm.eval(&v) + 1e-9);
        // Positive homogeneity: d(s v) = s d(v), so d → 0 exactly when ‖D‖ → 0.
        let s = 2f64.powi(-r.gen_range(1..20));
        let sv = linalg::scale(s, &v);
        let prob = MinNormProblem::new(&sv, &cone, &norm).unwrap();
        let ds = equiv::equivalent_distance(&prob, &SolverConfig::default()).unwrap().value;
        prop_assert!((ds - s * d).abs() <= 1e-7 * s * (1.0 + d), "{ds} vs {}", s * d);
        if linalg::norm2(&v) > 1e-9 {
            prop_assert!(d > 0.0);
        }
    }

    #[test]
    fn table_is_a_metric_below_the_norm(seed in any::<u64>()) {
        let space = suite::generated_space(seed).unwrap();
        let t = equiv::equivalent_metric_table(&space, &SolverConfig::default()).unwrap();
        let norm_d = space.norm_table();
        let n = space.len();
        for i in 0..n {
            prop_assert_eq!(t.d[i][i], 0.0);
            for j in 0..n {
                prop_assert_eq!(t.d[i][j], t.d[j][i]);
                prop_assert!(t.d[i][j] <= norm_d[i][j] + 1e-9);
                for k in 0..n {
                    prop_assert!(t.d[i][j] <= t.d[i][k] + t.d[k][j] + 1e-8);
                }
            }
        }
        let monotone = matches!(space.cone().kind(), ConeKind::Orthant | ConeKind::Lorentz) && *space.norm() == Norm::Euclidean;
        if monotone {
            for i in 0..n {
                for j in 0..n {
                    prop_assert!((t.d[i][j] - norm_d[i][j]).abs() <= 1e-9);
                }
            }
        }
    }

    #[test]
    fn psi_is_bounded_by_the_operator_norm(seed in any::<u64>(), which in 0usize..5) {
        let mut r = rng::rng_from_seed(seed);
        let dim = r.gen_range(2..=3);
        let orthant = r.gen::<bool>();
        let cone = if orthant { Cone::orthant(dim).unwrap() } else { Cone::lorentz(dim).unwrap() };
        // Unequal diagonal scalings leave the orthant invariant but not the Lorentz cone.
        let diag: Vec<f64> = if orthant {
            (0..dim).map(|_| r.gen_range(0.1..3.0)).collect()
        } else {
            vec![r.gen_range(0.1..3.0); dim]
        };
        let phi = match which {
            0 => PhiSpec::Linear(Matrix::diagonal(&diag)),
            1 => PhiSpec::Radial(ScalarFn::Saturating),
            2 => PhiSpec::Radial(ScalarFn::Scale(r.gen_range(0.0..3.0))),
            3 => PhiSpec::Radial(ScalarFn::Clamp(r.gen_range(0.1..3.0))),
            _ => PhiSpec::Linear(Matrix::identity(dim)),
        };
        let bound = equiv::phi_operator_bound(&phi, &cone, &Norm::Euclidean, 512, seed).unwrap().value();
        for t in [0.1, 0.5, 1.0, 2.0, 10.0] {
            let psi = psi_from_phi(&phi, &cone, &Norm::Euclidean, t, 512, seed).unwrap().value;
            prop_assert!(psi <= t * bound + 1e-6, "ψ({t}) = {psi}, ‖φ‖ = {bound}");
        }
    }
}

/// A random suite instance: space, map, table and a coefficient scale at
/// which the cone-side condition holds.
fn instance(seed: u64, tag: KindTag) -> Option<(FiniteConeMetricSpace, cone_metric_core::SelfMap, ContractionKind)> {
    let mut r = rng::rng_from_seed(seed);
    let (space, map, _) = suite::transfer_space(&mut r).ok()?;
    let dir = vec![1.0; tag.coefficient_count()];
    let s = catalog::cone_min_scale(&space, &map, tag, PowerParams::default(), &dir, 0.0).ok()?;
    let s = s * (1.0 + r.gen::<f64>());
    let ceiling = tag.bound() / if tag.bounds_sum() { catalog::functional(tag, &dir) } else { 1.0 };
    if !(s > 0.0 && s < ceiling) {
        return None;
    }
    let kind = ContractionKind::new(tag, dir.iter().map(|d| d * s).collect(), PowerParams::default()).ok()?;
    Some((space, map, kind))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn verdicts_are_scale_invariant(seed in any::<u64>(), k in 0usize..12, s in 0.01f64..100.0) {
        let tag = KindTag::ALL[k];
        if let Some((space, map, kind)) = instance(seed, tag) {
            let cfg = SolverConfig::default();
            let scaled = space.scaled(s);
            let a = catalog::check_cone_condition(&space, &map, &kind, 0.0).unwrap().holds;
            let b = catalog::check_cone_condition(&scaled, &map, &kind, 0.0).unwrap().holds;
            prop_assert_eq!(a, b);
            let d = equiv::equivalent_metric_table(&space, &cfg).unwrap().d;
            let ds = equiv::equivalent_metric_table(&scaled, &cfg).unwrap().d;
            let ma = catalog::check_metric_condition(&d, &map, &kind, 1e-9).unwrap().holds;
            let mb = catalog::check_metric_condition(&ds, &map, &kind, 1e-9 * s).unwrap().holds;
            prop_assert_eq!(ma, mb);
        }
    }

    #[test]
    fn transfer_holds_on_random_instances(seed in any::<u64>(), k in 0usize..12) {
        let tag = KindTag::ALL[k];
        if let Some((space, map, kind)) = instance(seed, tag) {
            let r = catalog::verify_transfer(&space, &map, &kind, &SolverConfig::default()).unwrap();
            prop_assert!(r.cone_check.holds);
            prop_assert!(r.metric_check.holds, "{:?}", r.metric_check.witnesses);
            prop_assert!(r.pairwise_ok, "{:?}", r.pairwise_failures);
        }
    }

    #[test]
    fn metric_constants_do_not_exceed_cone_constants(seed in any::<u64>(), k in 0usize..12) {
        let tag = KindTag::ALL[k];
        if tag.coefficient_count() != 1 {
            return Ok(());
        }
        let mut r = rng::rng_from_seed(seed);
        let (space, map, _) = suite::transfer_space(&mut r).unwrap();
        let d = equiv::equivalent_metric_table(&space, &SolverConfig::default()).unwrap().d;
        let m = catalog::minimal_constant_metric(&d, &map, tag, PowerParams::default()).unwrap()[0];
        let c = catalog::minimal_constant_cone(&space, &map, tag, PowerParams::default(), None, 1e-9).unwrap()[0];
        prop_assert!(m <= c + 2e-6, "{tag}: metric {m} > cone {c}");
    }

    #[test]
    fn banach_agrees_on_one_dimensional_cones(seed in any::<u64>(), alpha in 0.0f64..1.0) {
        let mut r = rng::rng_from_seed(seed);
        let n = r.gen_range(2..8);
        let pos: Vec<f64> = (0..n).map(|_| r.gen_range(-5.0..5.0)).collect();
        let rho: Vec<Vec<f64>> = pos.iter().map(|a| pos.iter().map(|b| (a - b).abs()).collect()).collect();
        let labels = (0..n).map(|i| format!("x{i}")).collect();
        let w = r.gen_range(0.5..2.0);
        let space = FiniteConeMetricSpace::from_scalar_metric(labels, Cone::orthant(1).unwrap(), Norm::Euclidean, &rho, &[w]).unwrap();
        if !space.validate_axioms(1e-9).is_valid() {
            return Ok(());
        }
        let map = cone_metric_core::SelfMap::tabulated((0..n).map(|_| r.gen_range(0..n)).collect());
        let kind = ContractionKind::banach(alpha).unwrap();
        let d = equiv::equivalent_metric_table(&space, &SolverConfig::default()).unwrap().d;
        let cone = catalog::check_cone_condition(&space, &map, &kind, 0.0).unwrap();
        let metric = catalog::check_metric_condition(&d, &map, &kind, 0.0).unwrap();
        prop_assert_eq!(cone.holds, metric.holds);
        prop_assert_eq!(cone.witnesses.len(), metric.witnesses.len());
    }

    #[test]
    fn choice_b_gives_the_max_bound(seed in any::<u64>()) {
        if let Some((space, map, kind)) = instance(seed, KindTag::ChoiceB) {
            let d = equiv::equivalent_metric_table(&space, &SolverConfig::default()).unwrap().d;
            prop_assert!(catalog::check_cone_condition(&space, &map, &kind, 0.0).unwrap().holds);
            let beta = kind.coefficients()[0];
            let t = map.images_for(space.len()).unwrap();
            for x in 0..space.len() {
                for y in 0..space.len() {
                    let m = d[x][y].max(d[x][t[x]]).max(d[y][t[y]]).max(0.5 * d[x][t[y]]).max(0.5 * d[y][t[x]]);
                    prop_assert!(d[t[x]][t[y]] <= beta * m + 1e-9, "({x},{y})");
                }
            }
        }
    }

    #[test]
    fn certified_runs_respect_their_bounds(seed in any::<u64>()) {
        let mut r = rng::rng_from_seed(seed);
        let (space, map, _) = suite::transfer_space(&mut r).unwrap();
        let rep = fixedpoint::certify_and_solve(&space, &map, &SolverConfig::default()).unwrap();
        if !rep.certified {
            return Ok(());
        }
        prop_assert!(rep.all_agree);
        let star = rep.fixed_point.unwrap();
        for run in &rep.runs {
            let t = &run.trace;
            for k in 0..t.step_d.len() {
                let here = t.iterates[k + 1];
                prop_assert!(rep.d[here][star] <= t.apriori[k] + 1e-9);
                prop_assert!(rep.d[here][star] <= t.aposteriori[k] + 1e-9);
                if k + 1 < t.step_d.len() {
                    prop_assert!(t.step_d[k + 1] <= rep.alpha * t.step_d[k] + 1e-12);
                }
            }
        }
    }
}
