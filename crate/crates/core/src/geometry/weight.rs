//! Ray weights `κ(t, x, θ)`.
//!
//! Weights are degree-zero homogeneous in the direction by construction:
//! every caller in this crate evaluates them on unit `θ` only, which also
//! makes the weighted transform independent of the ray parameterization up to
//! the documented `κ/α` rescaling rule.

use std::fmt;
use std::sync::Arc;

type WeightFn = dyn Fn(f64, &[f64], &[f64]) -> f64 + Send + Sync;

#[derive(Clone)]
pub struct Weight {
    eval: Arc<WeightFn>,
    nowhere_vanishing: bool,
    label: &'static str,
}

impl Weight {
    /// The unweighted transform, `κ ≡ 1`.
    pub fn one() -> Self {
        Self {
            eval: Arc::new(|_, _, _| 1.0),
            nowhere_vanishing: true,
            label: "1",
        }
    }

    pub fn new(
        label: &'static str,
        nowhere_vanishing: bool,
        eval: impl Fn(f64, &[f64], &[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            eval: Arc::new(eval),
            nowhere_vanishing,
            label,
        }
    }

    #[inline]
    pub fn eval(&self, t: f64, x: &[f64], theta: &[f64]) -> f64 {
        (self.eval)(t, x, theta)
    }

    pub fn nowhere_vanishing(&self) -> bool {
        self.nowhere_vanishing
    }

    /// True when evaluation can be skipped entirely.
    pub fn is_one(&self) -> bool {
        self.label == "1"
    }
}

impl fmt::Debug for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Weight({})", self.label)
    }
}
