//! One line per acceptance criterion; exits non-zero if any fails.

mod common;

use std::process::ExitCode;
use std::sync::OnceLock;
use std::time::Instant;

use confprod::commands::{cmd_search, cmd_split, cmd_verify, SplitOptions, VerifyOptions};
use confprod::scene::{SceneFile, SplitSpec};
use confprod::search_config::{InitSpec, SearchFile};
use confprod::{Report, Scene};
use confprod_core::conformal::{
    einstein1_residual, einstein_residual, hypothesis_check, lee_form, theorem_split, LambdaMode,
    SampleGrid,
};
use confprod_core::ode::{
    homogeneity_check, kderiv_family_residual, Case3Config, RationalDegreeTerm,
};
use confprod_core::oracle::{ricci_oracle, MetricField};
use confprod_core::search::{GradientMode, Objective, SearchConfig};
use confprod_core::{CoordSplit, ProductPoint, ScalarExpr};
use rand::Rng;

const SPLITS: [(usize, usize); 6] = [(1, 2), (2, 1), (2, 2), (1, 3), (3, 1), (2, 3)];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

/// The seeded random sweep shared by the oracle criteria.
fn sweep() -> &'static Vec<Report> {
    static SWEEP: OnceLock<Vec<Report>> = OnceLock::new();
    SWEEP.get_or_init(|| {
        let mut rng = common::rng(2024);
        (0..100)
            .map(|k| {
                let (n1, n2) = SPLITS[k % SPLITS.len()];
                let scene = common::random_scene(&mut rng, n1, n2)
                    .validate()
                    .expect("random scene is valid");
                let seed = scene.seed().unwrap();
                cmd_verify(&scene, VerifyOptions { points: 10, seed }).expect("verify runs")
            })
            .collect()
    })
}

fn sweep_max(name: &str) -> (f64, usize) {
    sweep().iter().fold((0.0f64, 0), |(m, p), r| {
        let c = r.check(name).unwrap();
        (m.max(c.max), p + c.points)
    })
}

fn criterion_1() -> Outcome {
    let (max, points) = sweep_max("ricci");
    outcome(
        max <= 1e-8 && points == 1000,
        format!("worst scaled error {max:.1e} over {points} points (rel 1e-8, abs 1e-10)"),
    )
}

fn criterion_2() -> Outcome {
    let (max, points) = sweep_max("riemann");
    let filled: Vec<String> = sweep()
        .iter()
        .flat_map(|r| {
            r.details["oracle_filled_classes"]
                .as_array()
                .unwrap()
                .clone()
        })
        .map(|v| v.as_str().unwrap().to_string())
        .collect();
    outcome(
        max <= 1e-8 && points == 1000 && filled.is_empty(),
        format!(
            "worst scaled error {max:.1e} over {points} points, oracle-filled classes {filled:?}"
        ),
    )
}

fn criterion_3() -> Outcome {
    let (lc, _) = sweep_max("lc_product");
    let (normal, _) = sweep_max("connection_normal");
    let (mixed, points) = sweep_max("connection_mixed");
    outcome(
        lc <= 1e-9 && normal < 1e-10 && mixed < 1e-10,
        format!("lc {lc:.1e} (tol 1e-9), normal component {normal:.1e}, mixed Weyl {mixed:.1e} (tol 1e-10) over {points} points"),
    )
}

fn criterion_4() -> Outcome {
    let mut worst = Vec::new();
    for name in ["flat_torus.json", "sphere_product.json"] {
        let scene = common::load(name);
        let r = cmd_verify(
            &scene,
            VerifyOptions {
                points: 20,
                seed: 4,
            },
        )
        .unwrap();
        worst.push(r.check("einstein").unwrap().max);
    }
    // upper half-plane: Ric = -g
    let split = CoordSplit::new(1, 1).unwrap();
    let c = |s: &str| ScalarExpr::parse(s, split).unwrap();
    let h2 = MetricField::on_product(
        split,
        vec![vec![c("1/y1^2"), c("0")], vec![c("0"), c("1/y1^2")]],
    )
    .unwrap();
    let mut hyp: f64 = 0.0;
    for z in confprod::sampling::halton_box(&[(-2.0, 2.0), (0.3, 2.8)], 20, 4) {
        let p = ProductPoint::from_coords(split, z).unwrap();
        let g = h2.value(&p).unwrap();
        let ric = ricci_oracle(&h2, &p).unwrap();
        hyp = hyp.max(ric.sub(&g.metric().scaled(-1.0)).max_abs() / g.metric().max_abs());
    }
    outcome(
        worst.iter().all(|w| *w < 1e-9) && hyp < 1e-9,
        format!(
            "flat T1xT2 {:.1e}, S2xS2 {:.1e}, half-plane Ric+g {hyp:.1e} (tol 1e-9)",
            worst[0], worst[1]
        ),
    )
}

/// Flat-torus scene from a converged search.
fn searched_scene() -> Scene {
    let file = SearchFile {
        tolerance: Some(1e-24),
        grad_tolerance: Some(1e-30),
        init: InitSpec::CrossMode { eps: 0.05, seed: 7 },
        ..SearchFile::from_json(br#"{"split":{"n1":1,"n2":2}}"#).unwrap()
    };
    let out = cmd_search(&file.setup(&[]).unwrap()).unwrap();
    let (f1, f2) = out.result.param.to_exprs();
    SceneFile {
        split: SplitSpec { n1: 1, n2: 2 },
        g1: vec![vec!["1".into()]],
        g2: vec![vec!["1".into(), "0".into()], vec!["0".into(), "1".into()]],
        f1: f1.to_string(),
        f2: f2.to_string(),
        domain: None,
        periodic: Some(vec![true; 3]),
        lambda: Some(out.result.lambda),
        tolerances: None,
        seed: Some(11),
    }
    .validate()
    .unwrap()
}

fn criterion_5() -> Outcome {
    let mut scenes: Vec<(String, Scene)> = [
        "flat_torus.json",
        "sphere_product.json",
        "sphere_product_scaled.json",
        "sphere_product_gauged.json",
        "sphere_product_unequal.json",
        "hyperbolic_space.json",
        "hyperbolic_halfspace.json",
        "hyperbolic_product.json",
        "sum_form.json",
        "cross_term.json",
    ]
    .iter()
    .map(|n| (n.to_string(), common::load(n)))
    .collect();
    scenes.push(("search result".into(), searched_scene()));
    let mut rng = common::rng(55);
    for k in 0..12 {
        let (n1, n2) = SPLITS[k % SPLITS.len()];
        scenes.push((
            format!("random {k}"),
            common::random_scene(&mut rng, n1, n2).validate().unwrap(),
        ));
    }
    let (mut qualifying, mut worst_e1, mut worst_conf) = (Vec::new(), 0.0f64, 0.0f64);
    let mut failures = Vec::new();
    for (name, scene) in &scenes {
        let cfg = &scene.config;
        let points = scene.sample(20, scene.seed().unwrap_or(0));
        let mode = scene
            .lambda()
            .map_or(LambdaMode::TraceEstimated, LambdaMode::Given);
        let e = einstein_residual(cfg, &points, mode).unwrap().residual;
        let h = hypothesis_check(cfg, &points, 1e-10).unwrap();
        if !(e < 1e-8 && h.d1d2f1_max < 1e-10) {
            continue;
        }
        qualifying.push(name.clone());
        let grid = SampleGrid::in_box(scene.split(), &scene.domain, 33).unwrap();
        match theorem_split(cfg, &scene.center(), &grid, 1e-10) {
            Ok(s) => {
                let normal = s.regauge.as_ref().map_or(cfg, |g| &g.config);
                for p in &points {
                    worst_e1 = worst_e1.max(einstein1_residual(normal, p).unwrap().max_abs());
                }
                worst_conf = worst_conf.max(s.conformality_residual);
            }
            Err(err) => failures.push(format!("{name}: {err}")),
        }
        let r = cmd_split(
            scene,
            &SplitOptions {
                grid: 33,
                basepoint: None,
            },
        )
        .unwrap();
        if !r.pass {
            failures.push(format!("{name}: split report did not pass"));
        }
    }
    outcome(
        failures.is_empty() && qualifying.len() >= 8 && worst_e1 < 1e-6 && worst_conf < 1e-8,
        format!(
            "{} of {} scenes qualify; einstein1 {worst_e1:.1e} (tol 1e-6), conformality {worst_conf:.1e} (tol 1e-8) on 33 samples per factor{}",
            qualifying.len(),
            scenes.len(),
            if failures.is_empty() { String::new() } else { format!("; failures {failures:?}") }
        ),
    )
}

fn criterion_6() -> Outcome {
    let mut rng = common::rng(66);
    let (mut kd, mut hom, mut evaluated, mut skipped) = (0.0f64, 0.0f64, 0usize, 0usize);
    for pair in 0..5 {
        let n2 = 2 + pair % 2;
        let f1 = common::random_y_function(&mut rng, n2);
        let c = common::random_profile(&mut rng);
        let lambda: f64 = rng.random_range(-1.0..1.0);
        let ident: Vec<Vec<String>> = (0..n2)
            .map(|i| {
                (0..n2)
                    .map(|j| if i == j { "1" } else { "0" }.to_string())
                    .collect()
            })
            .collect();
        let scene = SceneFile {
            split: SplitSpec { n1: 1, n2 },
            g1: vec![vec!["1".into()]],
            g2: ident,
            f2: format!("{c}*exp({f1})"),
            f1,
            domain: None,
            periodic: None,
            lambda: Some(lambda),
            tolerances: None,
            seed: Some(pair as u64),
        }
        .validate()
        .unwrap();
        let four = Case3Config::new(scene.config.clone(), lambda).unwrap();
        let five = four.clone().with_max_order(5).unwrap();
        for p in scene.sample(20, pair as u64) {
            for k in 1..=4 {
                kd = kd.max(kderiv_family_residual(&four, &p, k).unwrap());
            }
            for (cfg, term) in [
                (&four, RationalDegreeTerm::A0),
                (&four, RationalDegreeTerm::A1),
                (&four, RationalDegreeTerm::A2),
                (&five, RationalDegreeTerm::AMinus1),
            ] {
                match homogeneity_check(cfg, &p, term) {
                    Ok(v) => {
                        hom = hom.max(v);
                        evaluated += 1;
                    }
                    Err(_) => skipped += 1,
                }
            }
        }
    }
    outcome(
        kd < 1e-8 && hom < 1e-8 && skipped == 0 && evaluated == 400,
        format!("kderiv {kd:.1e}, homogeneity {hom:.1e} (tol 1e-8) over 5 pairs x 20 points, {skipped} gated"),
    )
}

fn criterion_7() -> Outcome {
    let mut lines = Vec::new();
    let mut pass = true;
    for seed in [7u64, 11, 23] {
        let file = SearchFile {
            tolerance: Some(1e-9),
            init: InitSpec::CrossMode { eps: 0.05, seed },
            ..SearchFile::from_json(br#"{"split":{"n1":1,"n2":2}}"#).unwrap()
        };
        let out = cmd_search(&file.setup(&[]).unwrap()).unwrap();
        let r = &out.result;
        let split = r.trace.last().unwrap().split_diag;
        pass &= r.objective < 1e-6 && r.iterations() <= 500 && r.is_monotone() && split < 1e-3;
        lines.push(format!(
            "seed {seed}: {} iterations, objective {:.1e}, split {split:.1e}, monotone {}",
            r.iterations(),
            r.objective,
            r.is_monotone()
        ));
    }
    outcome(pass, lines.join("; "))
}

fn criterion_8() -> Outcome {
    let split = CoordSplit::new(1, 2).unwrap();
    let obj = Objective::new(&SearchConfig::new(split, 1)).unwrap();
    let mut rng = common::rng(88);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let v: Vec<f64> = (0..obj.template().len())
            .map(|_| rng.random_range(-0.1..0.1))
            .collect();
        let gj = obj.gradient(&v, GradientMode::Jet).unwrap();
        let gf = obj
            .gradient(&v, GradientMode::FiniteDifference(1e-6))
            .unwrap();
        let diff: f64 = gj
            .iter()
            .zip(&gf)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        let norm: f64 = gj.iter().map(|a| a * a).sum::<f64>().sqrt();
        worst = worst.max(diff / norm);
    }
    outcome(
        worst <= 1e-4,
        format!("worst relative deviation {worst:.1e} over 10 vectors (tol 1e-4)"),
    )
}

/// Central difference of `f` at 0 with two Richardson steps, `O(h⁶)`.
fn derivative(f: impl Fn(f64) -> f64, h: f64) -> f64 {
    let d = |h: f64| (f(h) - f(-h)) / (2.0 * h);
    let r1 = |h: f64| (4.0 * d(h / 2.0) - d(h)) / 3.0;
    (16.0 * r1(h / 2.0) - r1(h)) / 15.0
}

fn criterion_9() -> Outcome {
    const H: f64 = 0.05;
    let mut rng = common::rng(99);
    let (mut sym, mut split_err, mut gauge) = (0.0f64, 0.0f64, 0.0f64);
    for k in 0..100 {
        let (n1, n2) = SPLITS[k % SPLITS.len()];
        let scene = common::random_scene(&mut rng, n1, n2).validate().unwrap();
        let split = scene.split();
        let n = split.n();
        let p = scene.sample(1, k as u64).pop().unwrap();
        let f = scene.config.f2();
        let shifted = |c: usize, t: f64| p.with_coord(c, p.coords()[c] + t);
        let scale = |v: f64| v.abs().max(1.0);

        // mixed partials: jet Hessian against differences of the gradient in both orders
        let hess = f.eval_jet(&p, 2).unwrap().hessian();
        let mixed = f.mixed_d1d2(&p).unwrap();
        for i in 0..n {
            for j in 0..n {
                let dij = derivative(|t| f.eval_jet(&shifted(j, t), 1).unwrap().gradient()[i], H);
                let dji = derivative(|t| f.eval_jet(&shifted(i, t), 1).unwrap().gradient()[j], H);
                let h = hess[i * n + j];
                sym = sym
                    .max((h - hess[j * n + i]).abs())
                    .max((h - dij).abs() / scale(h))
                    .max((dij - dji).abs() / scale(h));
                if i < n1 && j >= n1 {
                    sym = sym.max((mixed[i * n2 + (j - n1)] - h).abs());
                }
            }
        }

        // d₁/d₂ split against differences of the values
        let (d1, d2) = f.split_differential(&p).unwrap();
        for c in 0..n {
            let fd = derivative(|t| f.eval(&shifted(c, t)).unwrap(), H);
            let ours = if c < n1 { d1[c] } else { d2[c - n1] };
            split_err = split_err.max((ours - fd).abs() / scale(fd));
        }
        let (a, _) = f.restrict_first(p.x()).split_differential(&p).unwrap();
        let (_, b) = f.restrict_second(p.y()).split_differential(&p).unwrap();
        split_err = split_err.max(a.iter().chain(&b).fold(0.0, |m, v| m.max(v.abs())));

        // Lee-form gauge rule with an independent differential of the gauge
        let phi = scene.config.f1().scaled(0.5) + f.restrict_first(p.x());
        let moved = scene
            .config
            .with_factors(scene.config.f1() + &phi, scene.config.f2() + &phi)
            .unwrap();
        let (t0, t1) = (
            lee_form(&scene.config, &p).unwrap(),
            lee_form(&moved, &p).unwrap(),
        );
        for c in 0..n {
            let dphi = derivative(|t| phi.eval(&shifted(c, t)).unwrap(), H);
            let want = t0.components()[c] - dphi;
            gauge = gauge.max((t1.components()[c] - want).abs() / scale(want));
        }
    }
    outcome(
        sym < 1e-10 && split_err < 1e-10 && gauge < 1e-10,
        format!("mixed partials {sym:.1e}, d1/d2 split {split_err:.1e}, Lee gauge {gauge:.1e} over 100 pairs (tol 1e-10)"),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("Ricci closed form vs oracle", criterion_1),
        ("Riemann closed form vs oracle", criterion_2),
        ("connection formulas", criterion_3),
        ("known Einstein instances", criterion_4),
        ("theorem consistency", criterion_5),
        ("transverse ODE machinery", criterion_6),
        ("search behavior", criterion_7),
        ("gradient check", criterion_8),
        ("d-operator and gauge identities", criterion_9),
    ];
    let mut failed = 0;
    for (k, (title, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let o = run();
        failed += !o.pass as usize;
        println!(
            "criterion {} {:<32} {}  {} [{:.1}s]",
            k + 1,
            title,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            t.elapsed().as_secs_f64()
        );
    }
    println!(
        "acceptance: {} of {} criteria pass",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
