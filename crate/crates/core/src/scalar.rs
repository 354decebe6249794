//! Numeric scalars accepted by the simplex kernel.

use std::fmt::Debug;

use num::BigRational;
use num_traits::{FromPrimitive, Signed, ToPrimitive, Zero};

/// A field the simplex can pivot over.
///
/// Floating types carry tolerances; exact types use zero tolerances and skip
/// refactorization.
pub trait Scalar: Clone + PartialOrd + Signed + FromPrimitive + ToPrimitive + Debug {
    const EXACT: bool;

    fn feasibility_tol() -> Self;
    fn optimality_tol() -> Self;
    fn pivot_tol() -> Self;

    fn from_f64_lossy(v: f64) -> Self {
        Self::from_f64(v).expect("finite value")
    }

    fn is_finite_value(&self) -> bool;
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn feasibility_tol() -> Self {
        1e-7
    }
    fn optimality_tol() -> Self {
        1e-9
    }
    fn pivot_tol() -> Self {
        1e-11
    }
    fn is_finite_value(&self) -> bool {
        self.is_finite()
    }
}

impl Scalar for f32 {
    const EXACT: bool = false;

    fn feasibility_tol() -> Self {
        1e-4
    }
    fn optimality_tol() -> Self {
        1e-5
    }
    fn pivot_tol() -> Self {
        1e-6
    }
    fn is_finite_value(&self) -> bool {
        self.is_finite()
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn feasibility_tol() -> Self {
        Self::zero()
    }
    fn optimality_tol() -> Self {
        Self::zero()
    }
    fn pivot_tol() -> Self {
        Self::zero()
    }
    fn from_f64_lossy(v: f64) -> Self {
        BigRational::from_float(v).expect("finite value")
    }
    fn is_finite_value(&self) -> bool {
        true
    }
}
