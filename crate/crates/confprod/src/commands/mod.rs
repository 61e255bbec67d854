//! The batch commands; each returns a finished [`Report`](crate::Report).

mod ode;
mod search;
mod split;
mod verify;

pub use ode::{cmd_ode, OdeOptions};
pub use search::{cmd_search, SearchOutcome};
pub use split::{cmd_split, parse_basepoint, SplitOptions};
pub use verify::{cmd_verify, VerifyOptions};

use confprod_core::ScalarExpr;

/// Gauge function used by the Lee-form check: smooth and coupling both factors.
pub(crate) fn gauge_function(split: confprod_core::CoordSplit) -> ScalarExpr {
    let names: Vec<String> = (0..split.n()).map(|c| split.coord_name(c)).collect();
    let text = format!(
        "0.25*sin({})+0.1*{}*{}",
        names.join("+"),
        names[0],
        names[split.n() - 1]
    );
    ScalarExpr::parse(&text, split).expect("gauge function parses")
}
