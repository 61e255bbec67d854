//! Closed-form scalar functions of split product coordinates.
//!
//! Coordinates are numbered `0..n1` for the first factor (`x1..x{n1}` in
//! text) followed by `n1..n1+n2` for the second (`y1..y{n2}`).

mod eval;
mod jet;
mod parse;

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

pub use jet::{Jet, JetSpace, MAX_JET_ORDER, MAX_JET_VARS};
pub use parse::parse;

use crate::error::{Error, Result};

/// Default jet order for checks that differentiate conformal factors.
pub const DEFAULT_JET_ORDER: usize = 4;

/// Dimensions `(n1, n2)` of the two factors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CoordSplit {
    n1: usize,
    n2: usize,
}

impl CoordSplit {
    pub fn new(n1: usize, n2: usize) -> Result<Self> {
        if n1 == 0 || n2 == 0 {
            return Err(Error::Dimension(format!(
                "factor dimensions must be positive, got ({n1}, {n2})"
            )));
        }
        if n1 + n2 > MAX_JET_VARS {
            return Err(Error::Dimension(format!(
                "total dimension {} exceeds {MAX_JET_VARS}",
                n1 + n2
            )));
        }
        Ok(CoordSplit { n1, n2 })
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn n2(&self) -> usize {
        self.n2
    }

    pub fn n(&self) -> usize {
        self.n1 + self.n2
    }

    /// The rigidity statements need `n ≥ 3`; pointwise formulas hold for any `n`.
    pub fn supports_theorem(&self) -> bool {
        self.n() >= 3
    }

    pub fn first(&self) -> core::ops::Range<usize> {
        0..self.n1
    }

    pub fn second(&self) -> core::ops::Range<usize> {
        self.n1..self.n()
    }

    pub fn is_first(&self, coord: usize) -> bool {
        coord < self.n1
    }

    /// Textual name of a coordinate (`x1`, `y2`, ...).
    pub fn coord_name(&self, coord: usize) -> String {
        if coord < self.n1 {
            format!("x{}", coord + 1)
        } else {
            format!("y{}", coord - self.n1 + 1)
        }
    }
}

/// A point `(x, y)` on the product chart.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductPoint {
    split: CoordSplit,
    coords: Vec<f64>,
}

impl ProductPoint {
    pub fn new(split: CoordSplit, x: &[f64], y: &[f64]) -> Result<Self> {
        if x.len() != split.n1() || y.len() != split.n2() {
            return Err(Error::Dimension(format!(
                "point has ({}, {}) coordinates, split is ({}, {})",
                x.len(),
                y.len(),
                split.n1(),
                split.n2()
            )));
        }
        let mut coords = Vec::with_capacity(split.n());
        coords.extend_from_slice(x);
        coords.extend_from_slice(y);
        Ok(ProductPoint { split, coords })
    }

    pub fn from_coords(split: CoordSplit, coords: Vec<f64>) -> Result<Self> {
        if coords.len() != split.n() {
            return Err(Error::Dimension(format!(
                "point has {} coordinates, expected {}",
                coords.len(),
                split.n()
            )));
        }
        Ok(ProductPoint { split, coords })
    }

    pub fn origin(split: CoordSplit) -> Self {
        ProductPoint {
            split,
            coords: alloc::vec![0.0; split.n()],
        }
    }

    pub fn split(&self) -> CoordSplit {
        self.split
    }

    pub fn x(&self) -> &[f64] {
        &self.coords[..self.split.n1()]
    }

    pub fn y(&self) -> &[f64] {
        &self.coords[self.split.n1()..]
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Copy with one coordinate replaced.
    pub fn with_coord(&self, coord: usize, value: f64) -> Self {
        let mut p = self.clone();
        p.coords[coord] = value;
        p
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Sinh,
    Cosh,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sinh" => Func::Sinh,
            "cosh" => Func::Cosh,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Coord(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
    Call(Func, Box<Expr>),
}

impl Expr {
    fn visit_coords(&self, f: &mut impl FnMut(usize)) {
        match self {
            Expr::Const(_) => {}
            Expr::Coord(i) => f(*i),
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Call(_, a) => a.visit_coords(f),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.visit_coords(f);
                b.visit_coords(f);
            }
        }
    }

    fn substitute(&self, values: &[Option<f64>]) -> Expr {
        let bin = |a: &Expr, b: &Expr| {
            (
                Box::new(a.substitute(values)),
                Box::new(b.substitute(values)),
            )
        };
        match self {
            Expr::Const(c) => Expr::Const(*c),
            Expr::Coord(i) => match values.get(*i).copied().flatten() {
                Some(v) => Expr::Const(v),
                None => Expr::Coord(*i),
            },
            Expr::Neg(a) => Expr::Neg(Box::new(a.substitute(values))),
            Expr::Pow(a, k) => Expr::Pow(Box::new(a.substitute(values)), *k),
            Expr::Call(func, a) => Expr::Call(*func, Box::new(a.substitute(values))),
            Expr::Add(a, b) => {
                let (a, b) = bin(a, b);
                Expr::Add(a, b)
            }
            Expr::Sub(a, b) => {
                let (a, b) = bin(a, b);
                Expr::Sub(a, b)
            }
            Expr::Mul(a, b) => {
                let (a, b) = bin(a, b);
                Expr::Mul(a, b)
            }
            Expr::Div(a, b) => {
                let (a, b) = bin(a, b);
                Expr::Div(a, b)
            }
        }
    }

    pub(crate) fn write(&self, split: CoordSplit, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => {
                if c.is_sign_negative() {
                    write!(f, "(-{})", -c)
                } else {
                    write!(f, "{c}")
                }
            }
            Expr::Coord(i) => f.write_str(&split.coord_name(*i)),
            Expr::Neg(a) => {
                f.write_str("(-(")?;
                a.write(split, f)?;
                f.write_str("))")
            }
            Expr::Add(a, b) => write_binary(split, f, a, " + ", b),
            Expr::Sub(a, b) => write_binary(split, f, a, " - ", b),
            Expr::Mul(a, b) => write_binary(split, f, a, " * ", b),
            Expr::Div(a, b) => write_binary(split, f, a, " / ", b),
            Expr::Pow(a, k) => {
                f.write_str("(")?;
                a.write(split, f)?;
                write!(f, ")^{k}")
            }
            Expr::Call(func, a) => {
                write!(f, "{}(", func.name())?;
                a.write(split, f)?;
                f.write_str(")")
            }
        }
    }
}

fn write_binary(
    split: CoordSplit,
    f: &mut fmt::Formatter<'_>,
    a: &Expr,
    op: &str,
    b: &Expr,
) -> fmt::Result {
    f.write_str("(")?;
    a.write(split, f)?;
    f.write_str(op)?;
    b.write(split, f)?;
    f.write_str(")")
}

/// A parsed expression together with the coordinate split it is bound to.
///
/// `Display` prints a fully parenthesized form that parses back to the same
/// tree.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarExpr {
    split: CoordSplit,
    root: Expr,
}

impl ScalarExpr {
    pub fn parse(text: &str, split: CoordSplit) -> Result<Self> {
        parse(text, split)
    }

    pub(crate) fn from_root(split: CoordSplit, root: Expr) -> Self {
        ScalarExpr { split, root }
    }

    pub fn constant(split: CoordSplit, value: f64) -> Self {
        ScalarExpr::from_root(split, Expr::Const(value))
    }

    /// The coordinate function with index `coord` (0-based, product numbering).
    pub fn coordinate(split: CoordSplit, coord: usize) -> Result<Self> {
        if coord >= split.n() {
            return Err(Error::Dimension(format!(
                "coordinate index {coord} outside 0..{}",
                split.n()
            )));
        }
        Ok(ScalarExpr::from_root(split, Expr::Coord(coord)))
    }

    pub fn split(&self) -> CoordSplit {
        self.split
    }

    pub fn root(&self) -> &Expr {
        &self.root
    }

    /// Sorted, deduplicated coordinate indices the expression references.
    pub fn free_coords(&self) -> Vec<usize> {
        let mut seen = alloc::vec![false; self.split.n()];
        self.root.visit_coords(&mut |i| seen[i] = true);
        seen.iter()
            .enumerate()
            .filter_map(|(i, s)| s.then_some(i))
            .collect()
    }

    pub fn depends_on_first(&self) -> bool {
        self.free_coords().iter().any(|&c| self.split.is_first(c))
    }

    pub fn depends_on_second(&self) -> bool {
        self.free_coords().iter().any(|&c| !self.split.is_first(c))
    }

    pub fn is_constant(&self) -> bool {
        self.free_coords().is_empty()
    }

    /// Replace the listed coordinates by constants.
    pub fn substitute(&self, assignments: &[(usize, f64)]) -> Self {
        let mut values = alloc::vec![None; self.split.n()];
        for &(c, v) in assignments {
            if c < values.len() {
                values[c] = Some(v);
            }
        }
        ScalarExpr::from_root(self.split, self.root.substitute(&values))
    }

    /// Fix every first-factor coordinate to `x`.
    pub fn restrict_first(&self, x: &[f64]) -> Self {
        let a: Vec<_> = x.iter().copied().enumerate().collect();
        self.substitute(&a)
    }

    /// Fix every second-factor coordinate to `y`.
    pub fn restrict_second(&self, y: &[f64]) -> Self {
        let n1 = self.split.n1();
        let a: Vec<_> = y.iter().enumerate().map(|(j, &v)| (n1 + j, v)).collect();
        self.substitute(&a)
    }

    pub fn call(&self, func: Func) -> Self {
        ScalarExpr::from_root(self.split, Expr::Call(func, Box::new(self.root.clone())))
    }

    pub fn exp(&self) -> Self {
        self.call(Func::Exp)
    }

    pub fn powi(&self, k: i32) -> Self {
        ScalarExpr::from_root(self.split, Expr::Pow(Box::new(self.root.clone()), k))
    }

    pub fn scaled(&self, k: f64) -> Self {
        ScalarExpr::from_root(
            self.split,
            Expr::Mul(Box::new(Expr::Const(k)), Box::new(self.root.clone())),
        )
    }

    fn combine(&self, other: &Self, op: fn(Box<Expr>, Box<Expr>) -> Expr) -> Self {
        debug_assert_eq!(self.split, other.split);
        ScalarExpr::from_root(
            self.split,
            op(Box::new(self.root.clone()), Box::new(other.root.clone())),
        )
    }
}

impl fmt::Display for ScalarExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.root.write(self.split, f)
    }
}

macro_rules! expr_binop {
    ($trait:ident, $method:ident, $variant:ident) => {
        impl core::ops::$trait<&ScalarExpr> for &ScalarExpr {
            type Output = ScalarExpr;
            fn $method(self, rhs: &ScalarExpr) -> ScalarExpr {
                self.combine(rhs, Expr::$variant)
            }
        }
        impl core::ops::$trait<ScalarExpr> for ScalarExpr {
            type Output = ScalarExpr;
            fn $method(self, rhs: ScalarExpr) -> ScalarExpr {
                self.combine(&rhs, Expr::$variant)
            }
        }
    };
}

expr_binop!(Add, add, Add);
expr_binop!(Sub, sub, Sub);
expr_binop!(Mul, mul, Mul);
expr_binop!(Div, div, Div);

impl core::ops::Neg for &ScalarExpr {
    type Output = ScalarExpr;
    fn neg(self) -> ScalarExpr {
        ScalarExpr::from_root(self.split, Expr::Neg(Box::new(self.root.clone())))
    }
}
