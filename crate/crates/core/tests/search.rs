mod common;

use confprod_core::conformal::{assemble_metric, einstein1_residual, ConformalProductConfig};
use confprod_core::oracle::ricci_oracle;
use confprod_core::search::{
    minimize, split_diagnostic_on, FourierParam, GradientMode, LambdaMode, Objective, SearchConfig,
    Termination,
};
use confprod_core::{CoordSplit, Error, ProductPoint};
use proptest::prelude::*;
use rand::Rng;

fn torus() -> CoordSplit {
    CoordSplit::new(1, 2).unwrap()
}

fn cross_start(split: CoordSplit, mode: usize, sine: bool, eps: f64) -> FourierParam {
    let mut p = FourierParam::zeros(split, 1).unwrap();
    let m = p.cross_modes()[mode];
    p.perturb_f2(m, sine, eps).unwrap();
    p
}

fn random_param(split: CoordSplit, k: usize, amp: f64, seed: u64) -> FourierParam {
    let mut rng = common::rng(seed);
    let p = FourierParam::zeros(split, k).unwrap();
    let v: Vec<f64> = (0..p.len()).map(|_| rng.random_range(-amp..amp)).collect();
    p.with_vec(&v).unwrap()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[test]
fn basis_sizes() {
    let p = FourierParam::zeros(torus(), 1).unwrap();
    // half of 3^2 - 1 y-frequencies, half of 3^3 - 1 frequencies overall
    assert_eq!(p.f1_modes().len(), 4);
    assert_eq!(p.f2_modes().len(), 13);
    assert_eq!(p.len(), 9 + 27);
    assert!(p.f1_modes().iter().all(|k| k[0] == 0));
    assert_eq!(p.cross_modes().len(), 8);
}

#[test]
fn grid_must_resolve_the_basis() {
    let mut cfg = SearchConfig::new(torus(), 2);
    cfg.grid = 4;
    assert!(matches!(cfg.validate(), Err(Error::Invalid(_))));
    cfg.grid = 5;
    cfg.validate().unwrap();
    cfg.line_search.shrink = 1.0;
    assert!(cfg.validate().is_err());
}

#[test]
fn flat_start_converges_immediately() {
    let split = torus();
    for mode in [LambdaMode::TraceAveraged, LambdaMode::Fixed(0.0)] {
        let mut cfg = SearchConfig::new(split, 1);
        cfg.lambda_mode = mode;
        let r = minimize(&cfg, &FourierParam::zeros(split, 1).unwrap()).unwrap();
        assert_eq!(r.iterations(), 0);
        assert_eq!(r.objective, 0.0);
        assert_eq!(r.termination, Termination::ObjectiveBelowTolerance);
    }
}

#[test]
fn objective_is_quadratic_in_small_perturbations() {
    let split = torus();
    let obj = Objective::new(&SearchConfig::new(split, 1)).unwrap();
    for mode in 0..4 {
        let j = |eps| {
            obj.value(&cross_start(split, mode, mode % 2 == 0, eps).to_vec())
                .unwrap()
        };
        let mut eps = 0.05;
        for _ in 0..4 {
            let ratio = j(eps) / j(eps / 2.0);
            assert!((ratio - 4.0).abs() < 0.05 * 4.0, "ratio {ratio} at {eps}");
            eps /= 2.0;
        }
    }
}

#[test]
fn objective_matches_oracle_substitution() {
    let split = torus();
    let cfg = SearchConfig::new(split, 1);
    let obj = Objective::new(&cfg).unwrap();
    for seed in 0..3 {
        let p = random_param(split, 1, 0.2, seed);
        let ours = obj.evaluate(&p.to_vec()).unwrap();
        let (f1, f2) = p.to_exprs();
        let conf = ConformalProductConfig::flat_factors(f1.clone(), f2.clone()).unwrap();
        let metric = assemble_metric(&conf);
        let n = split.n();
        let mut rows = Vec::new();
        let mut scal = 0.0;
        for z in obj.nodes() {
            let pt = ProductPoint::from_coords(split, z.clone()).unwrap();
            let g = metric.value(&pt).unwrap();
            let ric = ricci_oracle(&metric, &pt).unwrap();
            for a in 0..n {
                scal += ric.get(a, a) / g.metric().get(a, a);
            }
            rows.push((g, ric));
        }
        let lambda = scal / (n * obj.nodes().len()) as f64;
        let mut total = 0.0;
        for (g, ric) in &rows {
            let (mut num, mut den) = (0.0, 0.0);
            for a in 0..n {
                for b in 0..n {
                    let gab = g.metric().get(a, b);
                    num += (ric.get(a, b) - lambda * gab).powi(2);
                    den += gab * gab;
                }
            }
            total += num / den;
        }
        let oracle = total / rows.len() as f64;
        assert!(
            common::close(ours.value, oracle, 1e-8, 1e-12),
            "{} vs {oracle}",
            ours.value
        );
        assert!(common::close(ours.lambda, lambda, 1e-8, 1e-12));
    }
}

#[test]
fn jet_gradient_matches_finite_differences() {
    for (split, k) in [
        (torus(), 1),
        (CoordSplit::new(2, 2).unwrap(), 1),
        (CoordSplit::new(1, 1).unwrap(), 2),
    ] {
        let obj = Objective::new(&SearchConfig::new(split, k)).unwrap();
        for seed in 0..3 {
            let v = random_param(split, k, 0.15, 100 + seed).to_vec();
            let gj = obj.gradient(&v, GradientMode::Jet).unwrap();
            let gf = obj
                .gradient(&v, GradientMode::FiniteDifference(1e-6))
                .unwrap();
            let d: Vec<f64> = gj.iter().zip(&gf).map(|(a, b)| a - b).collect();
            assert!(
                norm(&d) <= 1e-4 * norm(&gj).max(1e-8),
                "{} vs {}",
                norm(&d),
                norm(&gj)
            );
        }
    }
}

#[test]
fn descent_from_cross_modes_is_monotone_and_splits() {
    let split = torus();
    let mut cfg = SearchConfig::new(split, 1);
    cfg.tolerance = 1e-9;
    for mode in 0..8 {
        let r = minimize(&cfg, &cross_start(split, mode, mode % 3 == 1, 0.05)).unwrap();
        assert_eq!(r.termination, Termination::ObjectiveBelowTolerance);
        assert!(r.is_monotone());
        assert!(r.iterations() <= 500);
        assert!(r.trace.last().unwrap().split_diag < 1e-3);
        assert!(r.trace[0].split_diag > 0.01);
    }
}

#[test]
fn converged_search_satisfies_einstein1() {
    let split = torus();
    let mut cfg = SearchConfig::new(split, 1);
    cfg.tolerance = 1e-11;
    let r = minimize(&cfg, &cross_start(split, 5, true, 0.05)).unwrap();
    assert!(r.objective < 1e-10);
    let (f1, f2) = r.param.to_exprs();
    let conf = ConformalProductConfig::flat_factors(f1, f2).unwrap();
    let obj = Objective::new(&cfg).unwrap();
    for z in obj.nodes() {
        let p = ProductPoint::from_coords(split, z.clone()).unwrap();
        assert!(einstein1_residual(&conf, &p).unwrap().max_abs() < 1e-6);
    }
}

#[test]
fn finite_difference_descent_also_converges() {
    let split = torus();
    let mut cfg = SearchConfig::new(split, 1);
    cfg.tolerance = 1e-8;
    cfg.gradient = GradientMode::FiniteDifference(1e-8);
    let r = minimize(&cfg, &cross_start(split, 2, false, 0.05)).unwrap();
    assert!(r.converged());
    assert!(r.is_monotone());
}

#[test]
fn iteration_cap_is_respected() {
    let split = torus();
    let mut cfg = SearchConfig::new(split, 1);
    cfg.tolerance = 0.0;
    cfg.grad_tolerance = 0.0;
    cfg.max_iters = 2;
    let r = minimize(&cfg, &cross_start(split, 0, true, 0.05)).unwrap();
    assert_eq!(r.termination, Termination::MaxIterations);
    assert_eq!(r.trace.len(), 3);
}

#[test]
fn split_diagnostic_of_product_mode() {
    // c·sin(x)sin(y₁) = (c/2)[cos(x − y₁) − cos(x + y₁)]
    let split = torus();
    let c = 0.3;
    let mut p = FourierParam::zeros(split, 1).unwrap();
    let find = |k: [i32; 3]| p.f2_modes().iter().position(|m| m[..] == k[..]).unwrap();
    let (minus, plus) = (find([1, -1, 0]), find([1, 1, 0]));
    *p.f2_coeff_mut(minus, false) = c / 2.0;
    *p.f2_coeff_mut(plus, false) = -c / 2.0;
    let obj = Objective::new(&SearchConfig::new(split, 1)).unwrap();
    let d = obj.split_diagnostic(&p);
    assert!((d.max - c).abs() < 1e-12);
    assert!((d.coefficient_rms - c / 2.0).abs() < 1e-12);
    assert!((d.grid_rms - d.coefficient_rms).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn split_diagnostic_parseval(seed in any::<u64>(), k in 1usize..3, extra in 0usize..3) {
        let split = torus();
        let p = random_param(split, k, 1.0, seed);
        let cfg = SearchConfig { grid: 2 * k + 1 + extra, ..SearchConfig::new(split, k) };
        let obj = Objective::new(&cfg).unwrap();
        let d = split_diagnostic_on(&p, obj.nodes());
        prop_assert!((d.grid_rms - d.coefficient_rms).abs() <= 1e-10 * d.coefficient_rms.max(1.0));
        prop_assert!(d.max + 1e-12 >= d.grid_rms);
    }

    #[test]
    fn split_functions_have_no_diagnostic(seed in any::<u64>()) {
        let split = torus();
        let mut p = random_param(split, 1, 1.0, seed);
        for m in p.cross_modes() {
            *p.f2_coeff_mut(m, false) = 0.0;
            *p.f2_coeff_mut(m, true) = 0.0;
        }
        let obj = Objective::new(&SearchConfig::new(split, 1)).unwrap();
        prop_assert!(obj.split_diagnostic(&p).max < 1e-13);
    }
}
