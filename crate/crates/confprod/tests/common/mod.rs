#![allow(dead_code)]

use std::path::PathBuf;

use confprod::scene::{SceneFile, SplitSpec};
use confprod::Scene;
use confprod_core::CoordSplit;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn scenes_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenes")
}

pub fn scene(name: &str) -> PathBuf {
    scenes_dir().join(name)
}

pub fn load(name: &str) -> Scene {
    Scene::load(&scene(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn names(split: CoordSplit, coords: impl Iterator<Item = usize>) -> Vec<String> {
    coords.map(|c| split.coord_name(c)).collect()
}

fn term(rng: &mut ChaCha8Rng, vars: &[String]) -> String {
    let v = &vars[rng.random_range(0..vars.len())];
    let w = &vars[rng.random_range(0..vars.len())];
    let c: f64 = rng.random_range(-0.3..0.3);
    let a: f64 = rng.random_range(0.5..1.5);
    match rng.random_range(0..5) {
        0 => format!("{c:.3}*sin({a:.3}*{v}+{w})"),
        1 => format!("{c:.3}*cos({v}-{a:.3}*{w})"),
        2 => format!("{c:.3}*{v}*{w}/4"),
        3 => format!("{c:.3}*exp({a:.3}*{v}/3)"),
        _ => format!("{c:.3}*{v}^2/4"),
    }
}

fn function(rng: &mut ChaCha8Rng, vars: &[String], terms: usize) -> String {
    let mut s = format!("{:.3}", rng.random_range(-0.3..0.3));
    for _ in 0..terms {
        s.push('+');
        s.push_str(&term(rng, vars));
    }
    s
}

/// Diagonally dominant, coordinate-dependent factor metric.
fn factor(rng: &mut ChaCha8Rng, vars: &[String]) -> Vec<Vec<String>> {
    let d = vars.len();
    let mut rows = vec![vec![String::new(); d]; d];
    for i in 0..d {
        for j in i..d {
            let s = if i == j {
                format!(
                    "{:.3}+{:.3}*sin({})^2",
                    rng.random_range(1.5..2.5),
                    rng.random_range(0.0..0.5),
                    vars[rng.random_range(0..d)]
                )
            } else {
                format!(
                    "{:.3}*cos({})",
                    rng.random_range(-0.3..0.3),
                    vars[rng.random_range(0..d)]
                )
            };
            rows[i][j] = s.clone();
            rows[j][i] = s;
        }
    }
    rows
}

/// Random scene with non-flat factors and factors depending on everything.
pub fn random_scene(rng: &mut ChaCha8Rng, n1: usize, n2: usize) -> SceneFile {
    let split = CoordSplit::new(n1, n2).unwrap();
    let all = names(split, 0..split.n());
    SceneFile {
        split: SplitSpec { n1, n2 },
        g1: factor(rng, &names(split, split.first())),
        g2: factor(rng, &names(split, split.second())),
        f1: function(rng, &all, 3),
        f2: function(rng, &all, 3),
        domain: None,
        periodic: None,
        lambda: None,
        tolerances: None,
        seed: Some(rng.random()),
    }
}

/// Smooth function of the second-factor coordinates only.
pub fn random_y_function(rng: &mut ChaCha8Rng, n2: usize) -> String {
    let vars: Vec<String> = (1..=n2).map(|j| format!("y{j}")).collect();
    let mut s = format!("{:.3}", rng.random_range(-0.3..0.3));
    for v in &vars {
        s.push_str(&format!(
            "+{:.3}*sin({:.3}*{v})",
            rng.random_range(-0.4..0.4),
            rng.random_range(0.5..1.5)
        ));
    }
    s
}

/// `c(t) = α + βt + γt³` with `β, γ > 0`, so `c′` never vanishes.
pub fn random_profile(rng: &mut ChaCha8Rng) -> String {
    format!(
        "({:.3}+{:.3}*x1+{:.3}*x1^3)",
        rng.random_range(-1.0..1.0),
        rng.random_range(0.2..1.0),
        rng.random_range(0.05..0.3)
    )
}
