//! Analytic expressions and their Taylor/Laurent expansions.

mod expr;
mod series;

pub use expr::AnalyticExpr;
pub use series::{eval_jet, jet_add, jet_div, jet_exp, jet_mul, Jet, Laurent, CANCEL_TOL, MAX_ORDER, VANISH_TOL};
