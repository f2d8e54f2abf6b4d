//! Covectors `(τ, ξ)` and their causal classification.
//!
//! A covector is spacelike when `g⁻¹(c, c) > 0`, lightlike when it vanishes
//! and timelike when it is negative.  For the Minkowski metric
//! `g⁻¹(c, c) = |ξ|² - τ²`, so the spacelike cone is `{|τ| < |ξ|}`.

use crate::error::{Error, Result};

/// Relative tolerance for the lightlike classification: exact equality
/// `|τ| = |ξ|` has measure zero in floating point.
pub const TOL_CONE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CausalClass {
    Spacelike,
    Lightlike,
    Timelike,
}

/// A covector at an (optional) base point of spacetime.
#[derive(Debug, Clone, Copy)]
pub struct Covector {
    pub tau: f64,
    /// Spatial components; only the first `n` entries are used.
    pub xi: [f64; 3],
    pub n: usize,
    /// Base point `(t, x)`, required for position-dependent metrics.
    pub base: Option<(f64, [f64; 3])>,
}

impl Covector {
    pub fn new(tau: f64, xi: &[f64]) -> Self {
        let mut x = [0.0f64; 3];
        x[..xi.len()].copy_from_slice(xi);
        Self {
            tau,
            xi: x,
            n: xi.len(),
            base: None,
        }
    }

    pub fn at(mut self, t: f64, x: &[f64]) -> Self {
        let mut p = [0.0f64; 3];
        p[..x.len()].copy_from_slice(x);
        self.base = Some((t, p));
        self
    }

    pub fn xi_norm(&self) -> f64 {
        self.xi[..self.n].iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.tau == 0.0 && self.xi[..self.n].iter().all(|c| *c == 0.0)
    }
}

/// Classifies by the sign of the quadratic form value `q`, with the lightlike
/// band `|q| ≤ TOL_CONE · scale` where `scale` is the covector's size squared.
pub fn classify_quadratic(q: f64, scale: f64) -> CausalClass {
    if q.abs() <= TOL_CONE * scale {
        CausalClass::Lightlike
    } else if q > 0.0 {
        CausalClass::Spacelike
    } else {
        CausalClass::Timelike
    }
}

/// Minkowski causal classification of `(τ, ξ)`.
pub fn classify(c: &Covector) -> Result<CausalClass> {
    if c.is_zero() {
        return Err(Error::ZeroCovector);
    }
    let xi2: f64 = c.xi[..c.n].iter().map(|v| v * v).sum();
    let q = xi2 - c.tau * c.tau;
    Ok(classify_quadratic(q, xi2 + c.tau * c.tau))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn cone_examples() {
        // |τ| < |ξ| spacelike, |τ| = |ξ| lightlike, |τ| > |ξ| timelike
        let s = Covector::new(0.0, &[1.0, 0.0]);
        let l = Covector::new(1.0, &[1.0, 0.0]);
        let t = Covector::new(2.0, &[1.0, 0.0]);
        assert_eq!(classify(&s).unwrap(), CausalClass::Spacelike);
        assert_eq!(classify(&l).unwrap(), CausalClass::Lightlike);
        assert_eq!(classify(&t).unwrap(), CausalClass::Timelike);
    }

    #[test]
    fn zero_covector_is_a_domain_error() {
        assert!(classify(&Covector::new(0.0, &[0.0, 0.0])).is_err());
    }

    #[test]
    fn classification_is_scale_invariant() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let n = if rng.random::<bool>() { 2 } else { 3 };
            let mut xi = [0.0f64; 3];
            for x in xi.iter_mut().take(n) {
                *x = rng.random_range(-1.0..1.0);
            }
            let c = Covector::new(rng.random_range(-1.0f64..1.0), &xi[..n]);
            if c.is_zero() {
                continue;
            }
            let base = classify(&c).unwrap();
            for lambda in [1e-6, 1.0, 1e6] {
                let mut sxi = [0.0f64; 3];
                for (s, x) in sxi.iter_mut().zip(xi.iter()) {
                    *s = lambda * x;
                }
                let scaled = Covector::new(lambda * c.tau, &sxi[..n]);
                assert_eq!(classify(&scaled).unwrap(), base, "λ={lambda}");
            }
        }
    }
}
