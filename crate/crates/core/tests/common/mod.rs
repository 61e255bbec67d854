#![allow(dead_code)]

use confprod_core::conformal::ConformalProductConfig;
use confprod_core::oracle::MetricField;
use confprod_core::{CoordSplit, ProductPoint, ScalarExpr};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn e(s: &str, split: CoordSplit) -> ScalarExpr {
    ScalarExpr::parse(s, split).unwrap_or_else(|err| panic!("{s}: {err}"))
}

fn names(split: CoordSplit, coords: impl Iterator<Item = usize>) -> Vec<String> {
    coords.map(|c| split.coord_name(c)).collect()
}

/// Smooth random term in the given variables.
fn term(rng: &mut ChaCha8Rng, vars: &[String]) -> String {
    let v = &vars[rng.random_range(0..vars.len())];
    let w = &vars[rng.random_range(0..vars.len())];
    let c: f64 = rng.random_range(-0.4..0.4);
    let a: f64 = rng.random_range(0.5..1.5);
    match rng.random_range(0..5) {
        0 => format!("{c:.3}*sin({a:.3}*{v}+{w})"),
        1 => format!("{c:.3}*cos({v}-{a:.3}*{w})"),
        2 => format!("{c:.3}*{v}*{w}"),
        3 => format!("{c:.3}*exp({a:.3}*{v}/3)"),
        _ => format!("{c:.3}*{v}^2"),
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

/// Diagonally dominant factor metric on its own coordinates.
fn factor(rng: &mut ChaCha8Rng, split: CoordSplit, coords: Vec<usize>) -> MetricField {
    let vars = names(split, coords.iter().copied());
    let d = coords.len();
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
    let rows = rows
        .into_iter()
        .map(|r| r.into_iter().map(|s| e(&s, split)).collect())
        .collect();
    MetricField::from_rows(split, coords, rows).unwrap()
}

pub fn random_split(rng: &mut ChaCha8Rng) -> CoordSplit {
    loop {
        let (a, b) = (rng.random_range(1..=3), rng.random_range(1..=3));
        if a + b >= 3 {
            return CoordSplit::new(a, b).unwrap();
        }
    }
}

pub fn random_config(rng: &mut ChaCha8Rng, split: CoordSplit) -> ConformalProductConfig {
    let all = names(split, 0..split.n());
    let g1 = factor(rng, split, split.first().collect());
    let g2 = factor(rng, split, split.second().collect());
    let f1 = e(&function(rng, &all, 3), split);
    let f2 = e(&function(rng, &all, 3), split);
    ConformalProductConfig::new(g1, g2, f1, f2).unwrap()
}

pub fn random_point(rng: &mut ChaCha8Rng, split: CoordSplit) -> ProductPoint {
    let c = (0..split.n())
        .map(|_| rng.random_range(-1.0..1.0))
        .collect();
    ProductPoint::from_coords(split, c).unwrap()
}

/// `|a − b| ≤ max(rel·|b|, abs)`.
pub fn close(a: f64, b: f64, rel: f64, abs: f64) -> bool {
    (a - b).abs() <= (rel * b.abs()).max(abs)
}
