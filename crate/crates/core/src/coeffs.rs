//! Periodic coefficient sequences and their invariants.
//!
//! A coefficient set is `(p, a, b, shift)` with `a = (a_1..a_p)` positive and
//! of unit product, `b = (b_1..b_p)` of zero mean, and a scalar `shift`
//! applied additively to every `b_x` at evaluation time. Keeping the mean in
//! `shift` represents the inverse-problem domain (unit-product `a`,
//! zero-mean `b`) exactly, while still allowing arbitrary energy offsets.
//!
//! Indices are extended p-periodically; by convention `a_0 ≡ a_p`.

use crate::{Result, SpectralError};
use serde::{Deserialize, Serialize};

/// Relative tolerance for the unit-product / zero-mean invariants.
const INVARIANT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PeriodicCoefficients {
    pub p: usize,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    #[serde(default)]
    pub shift: f64,
}

impl PeriodicCoefficients {
    /// Validate and construct. `a` must be positive with product 1 (to
    /// 1e-12 relative), `b` must sum to 0 (1e-12 absolute, scaled).
    pub fn new(a: Vec<f64>, b: Vec<f64>, shift: f64) -> Result<Self> {
        let p = a.len();
        if p == 0 {
            return Err(SpectralError::validation("period p must be >= 1"));
        }
        if b.len() != p {
            return Err(SpectralError::validation(format!(
                "a has length {}, b has length {}",
                p,
                b.len()
            )));
        }
        if a.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
            return Err(SpectralError::validation("all hoppings a_x must be positive"));
        }
        let prod: f64 = a.iter().product();
        if (prod - 1.0).abs() > INVARIANT_TOL * 10.0 {
            return Err(SpectralError::validation(format!(
                "product of a must be 1, got {prod:.16}"
            )));
        }
        let scale = 1.0 + b.iter().map(|x| x.abs()).sum::<f64>();
        let sum: f64 = b.iter().sum();
        if sum.abs() > INVARIANT_TOL * 10.0 * scale {
            return Err(SpectralError::validation(format!(
                "sum of b must be 0, got {sum:.16}"
            )));
        }
        Ok(PeriodicCoefficients { p, a, b, shift })
    }

    /// Normalize raw sequences into the invariant form: divide `a` by its
    /// geometric mean, move the mean of `b` into `shift`.
    pub fn normalized(a: Vec<f64>, b: Vec<f64>, shift: f64) -> Result<Self> {
        let p = a.len();
        if p == 0 || b.len() != p {
            return Err(SpectralError::validation("empty or mismatched coefficient arrays"));
        }
        if a.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
            return Err(SpectralError::validation("all hoppings a_x must be positive"));
        }
        let gm = (a.iter().map(|x| x.ln()).sum::<f64>() / p as f64).exp();
        let mean = b.iter().sum::<f64>() / p as f64;
        let a: Vec<f64> = a.iter().map(|x| x / gm).collect();
        let b: Vec<f64> = b.iter().map(|x| x - mean).collect();
        // Renormalize the residual rounding drift exactly once more.
        let mut c = PeriodicCoefficients { p, a, b, shift: shift + mean };
        let prod: f64 = c.a.iter().product();
        let corr = prod.powf(-1.0 / p as f64);
        for x in c.a.iter_mut() {
            *x *= corr;
        }
        let sum: f64 = c.b.iter().sum();
        c.b[p - 1] -= sum;
        Ok(c)
    }

    /// The free operator: a = 1, b = 0.
    pub fn free(p: usize) -> Self {
        PeriodicCoefficients { p, a: vec![1.0; p], b: vec![0.0; p], shift: 0.0 }
    }

    /// Hopping `a_x` for any integer site x (periodic; `a_0 = a_p`).
    #[inline]
    pub fn ax(&self, x: i64) -> f64 {
        self.a[(x - 1).rem_euclid(self.p as i64) as usize]
    }

    /// Potential `b_x + shift` for any integer site x.
    #[inline]
    pub fn bx(&self, x: i64) -> f64 {
        self.b[(x - 1).rem_euclid(self.p as i64) as usize] + self.shift
    }

    /// Return the same operator with an additional energy offset.
    pub fn with_extra_shift(&self, ds: f64) -> Self {
        let mut c = self.clone();
        c.shift += ds;
        c
    }

    /// Spatial reflection `x -> -x`. The reflected half-line operator is
    /// unitarily equivalent to the original operator viewed from the other
    /// half-lattice: `a~_x = a_{-(x+1)}, b~_x = b_{-x}` (indices mod p).
    ///
    /// The reflection leaves the Lyapunov function — hence bands, gaps and
    /// the energy shift — unchanged, and reverses the interior Dirichlet
    /// window, so the Dirichlet values `μ_n` are preserved exactly while
    /// every gap state switches sheet (eigenvalue <-> resonance).
    pub fn reflected(&self) -> Self {
        let p = self.p as i64;
        // a~_x and b~_x are 1-indexed values with a_0 = a_p, b_0 = b_p, so the
        // 0-based array index carries an extra  -1 mod p.
        let a = (1..=p)
            .map(|x| self.a[(((-(x + 1)).rem_euclid(p) + p - 1) % p) as usize])
            .collect();
        let b = (1..=p)
            .map(|x| self.b[(((-x).rem_euclid(p) + p - 1) % p) as usize])
            .collect();
        PeriodicCoefficients { p: self.p, a, b, shift: self.shift }
    }

    /// Parse from the JSON coefficient format
    /// `{"p": int, "a": [p floats], "b": [p floats], "shift": float}`.
    pub fn from_json(s: &str) -> Result<Self> {
        let raw: PeriodicCoefficients = serde_json::from_str(s)
            .map_err(|e| SpectralError::validation(format!("bad coefficient JSON: {e}")))?;
        if raw.p != raw.a.len() {
            return Err(SpectralError::validation(format!(
                "field p = {} does not match a length {}",
                raw.p,
                raw.a.len()
            )));
        }
        Self::new(raw.a, raw.b, raw.shift)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("coefficients serialize")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn valid_coefficients_accepted() {
        let c = PeriodicCoefficients::new(vec![2.0, 0.5], vec![1.0, -1.0], 0.0).unwrap();
        assert_eq!(c.p, 2);
        assert_eq!(c.ax(0), 0.5); // a_0 = a_p
        assert_eq!(c.ax(3), 2.0);
        assert_eq!(c.bx(4), -1.0);
    }

    #[test]
    fn bad_product_rejected() {
        assert!(PeriodicCoefficients::new(vec![2.0, 1.0], vec![0.0, 0.0], 0.0).is_err());
        assert!(PeriodicCoefficients::new(vec![-1.0, -1.0], vec![0.0, 0.0], 0.0).is_err());
        assert!(PeriodicCoefficients::new(vec![1.0, 1.0], vec![0.5, 0.0], 0.0).is_err());
    }

    #[test]
    fn normalization_moves_mean_to_shift() {
        let c = PeriodicCoefficients::normalized(vec![2.0, 2.0], vec![3.0, 1.0], 0.0).unwrap();
        assert!((c.a[0] - 1.0).abs() < 1e-15 && (c.a[1] - 1.0).abs() < 1e-15);
        assert!((c.b[0] - 1.0).abs() < 1e-15 && (c.b[1] + 1.0).abs() < 1e-15);
        assert!((c.shift - 2.0).abs() < 1e-15);
        // evaluation values unchanged
        assert!((c.bx(1) - 3.0).abs() < 1e-15);
    }

    #[test]
    fn json_roundtrip() {
        let c = PeriodicCoefficients::new(vec![1.25, 0.8], vec![0.3, -0.3], 1.5).unwrap();
        let c2 = PeriodicCoefficients::from_json(&c.to_json()).unwrap();
        assert_eq!(c.a, c2.a);
        assert_eq!(c.b, c2.b);
        assert_eq!(c.shift, c2.shift);
    }

    #[test]
    fn reflection_is_an_involution_preserving_invariants() {
        let c = PeriodicCoefficients::normalized(
            vec![2.0, 0.7, 1.3, 0.9],
            vec![0.4, -0.2, 0.5, -0.7],
            0.3,
        )
        .unwrap();
        let r = c.reflected().reflected();
        for i in 0..4 {
            assert!((c.a[i] - r.a[i]).abs() < 1e-15);
            assert!((c.b[i] - r.b[i]).abs() < 1e-15);
        }
        let prod: f64 = c.reflected().a.iter().product();
        assert!((prod - 1.0).abs() < 1e-12);
    }
}
