//! Decision-diagram relaxations and spatial branch-and-bound for bounded MINLPs.

pub mod bounds;
pub mod dd;
pub mod enclosure;
pub mod expr;
pub mod interval;
pub mod lp;
pub mod report;
pub mod sbb;
pub mod scalar;
pub mod separation;
pub mod special;

pub type Interval = interval::Interval<f64>;
pub type LinearProgram = lp::LinearProgram<f64>;
pub type ExactLinearProgram = lp::LinearProgram<num::BigRational>;
