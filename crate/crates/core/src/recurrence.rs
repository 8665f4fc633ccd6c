//! Three-term recurrence machinery: fundamental solutions, Wronskian,
//! Lyapunov function.
//!
//! The fundamental solutions θ, φ of
//!
//! ```text
//! a_{x-1} f_{x-1} + a_x f_{x+1} + b_x f_x = λ f_x
//! ```
//!
//! carry the initial data θ_0 = 1, θ_1 = 0, φ_0 = 0, φ_1 = 1. Their values
//! one period out assemble the monodromy data: the Lyapunov function
//! `F = (φ_{p+1} + θ_p)/2` — with `|F| ≤ 1` exactly on the spectrum — and
//! its companion `Fo = (φ_{p+1} − θ_p)/2`. Two algebraic identities tie the
//! endpoint values together and serve as run-time checks:
//!
//! ```text
//! θ_p φ_{p+1} − φ_p θ_{p+1} = 1            (unimodular period map)
//! Fo² − F² + 1 = −φ_p θ_{p+1}
//! ```
//!
//! The recurrence is evaluated directly (never through expanded polynomial
//! coefficients): it is the numerically stable representation.

use crate::coeffs::PeriodicCoefficients;
use crate::{Result, SpectralError};
use num_complex::Complex64;

/// Values of the fundamental solutions θ_x, φ_x for 0 ≤ x ≤ x_max.
#[derive(Debug, Clone)]
pub struct SolutionTable {
    pub lambda: Complex64,
    pub theta: Vec<Complex64>,
    pub phi: Vec<Complex64>,
}

/// Endpoint monodromy data at a fixed λ.
#[derive(Debug, Clone)]
pub struct LyapunovValues {
    pub lambda: Complex64,
    /// F = (φ_{p+1} + θ_p)/2
    pub f: Complex64,
    /// Fo = (φ_{p+1} − θ_p)/2
    pub fo: Complex64,
    pub phi_p: Complex64,
    pub phi_p1: Complex64,
    pub theta_p: Complex64,
    pub theta_p1: Complex64,
}

/// Run the recurrence for complex λ up to site `x_max ≥ 1`.
pub fn solve_recurrence(
    c: &PeriodicCoefficients,
    lambda: Complex64,
    x_max: usize,
) -> Result<SolutionTable> {
    if x_max < 1 {
        return Err(SpectralError::validation("x_max must be >= 1"));
    }
    let mut theta = vec![Complex64::ZERO; x_max + 1];
    let mut phi = vec![Complex64::ZERO; x_max + 1];
    theta[0] = Complex64::ONE;
    phi[1] = Complex64::ONE;
    for x in 1..x_max as i64 {
        let ax = c.ax(x);
        let axm = c.ax(x - 1);
        let d = lambda - c.bx(x);
        theta[(x + 1) as usize] = (d * theta[x as usize] - axm * theta[(x - 1) as usize]) / ax;
        phi[(x + 1) as usize] = (d * phi[x as usize] - axm * phi[(x - 1) as usize]) / ax;
    }
    Ok(SolutionTable { lambda, theta, phi })
}

/// Real-λ convenience path (the recurrence keeps everything real).
pub fn solve_recurrence_real(
    c: &PeriodicCoefficients,
    lambda: f64,
    x_max: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let t = solve_recurrence(c, Complex64::new(lambda, 0.0), x_max)?;
    Ok((
        t.theta.iter().map(|z| z.re).collect(),
        t.phi.iter().map(|z| z.re).collect(),
    ))
}

impl SolutionTable {
    /// The Wronskian {θ,φ}_x = a_x (θ_x φ_{x+1} − φ_x θ_{x+1}); constant in
    /// x and equal to a_0 = a_p.
    pub fn wronskian(&self, c: &PeriodicCoefficients, x: usize) -> Complex64 {
        c.ax(x as i64)
            * (self.theta[x] * self.phi[x + 1] - self.phi[x] * self.theta[x + 1])
    }
}

/// Evaluate the monodromy data at complex λ.
pub fn lyapunov(c: &PeriodicCoefficients, lambda: Complex64) -> Result<LyapunovValues> {
    let p = c.p;
    let t = solve_recurrence(c, lambda, p + 1)?;
    let f = 0.5 * (t.phi[p + 1] + t.theta[p]);
    let fo = 0.5 * (t.phi[p + 1] - t.theta[p]);
    Ok(LyapunovValues {
        lambda,
        f,
        fo,
        phi_p: t.phi[p],
        phi_p1: t.phi[p + 1],
        theta_p: t.theta[p],
        theta_p1: t.theta[p + 1],
    })
}

/// Real-λ Lyapunov function value F(λ).
pub fn lyapunov_real(c: &PeriodicCoefficients, lambda: f64) -> f64 {
    lyapunov(c, Complex64::new(lambda, 0.0)).expect("p >= 1").f.re
}

/// Derivative F'(λ) of the Lyapunov function, via the differentiated
/// recurrence (∂_λ f obeys the same recurrence with source term f).
pub fn lyapunov_derivative_real(c: &PeriodicCoefficients, lambda: f64) -> f64 {
    let p = c.p;
    let mut th = vec![0.0_f64; p + 2];
    let mut ph = vec![0.0_f64; p + 2];
    let mut dth = vec![0.0_f64; p + 2];
    let mut dph = vec![0.0_f64; p + 2];
    th[0] = 1.0;
    ph[1] = 1.0;
    for x in 1..=(p as i64) {
        let ax = c.ax(x);
        let axm = c.ax(x - 1);
        let d = lambda - c.bx(x);
        let xi = x as usize;
        th[xi + 1] = (d * th[xi] - axm * th[xi - 1]) / ax;
        ph[xi + 1] = (d * ph[xi] - axm * ph[xi - 1]) / ax;
        dth[xi + 1] = (d * dth[xi] + th[xi] - axm * dth[xi - 1]) / ax;
        dph[xi + 1] = (d * dph[xi] + ph[xi] - axm * dph[xi - 1]) / ax;
    }
    0.5 * (dph[p + 1] + dth[p])
}

/// Derivative φ_p'(λ) via the differentiated recurrence.
pub fn phi_p_derivative_real(c: &PeriodicCoefficients, lambda: f64) -> f64 {
    let p = c.p;
    let mut ph = vec![0.0_f64; p + 1];
    let mut dph = vec![0.0_f64; p + 1];
    ph[1] = 1.0;
    for x in 1..(p as i64) {
        let ax = c.ax(x);
        let axm = c.ax(x - 1);
        let d = lambda - c.bx(x);
        let xi = x as usize;
        ph[xi + 1] = (d * ph[xi] - axm * ph[xi - 1]) / ax;
        dph[xi + 1] = (d * dph[xi] + ph[xi] - axm * dph[xi - 1]) / ax;
    }
    dph[p]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::PeriodicCoefficients;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_coeffs(rng: &mut ChaCha8Rng, p: usize) -> PeriodicCoefficients {
        let a: Vec<f64> = (0..p).map(|_| (rng.gen_range(-1.0..1.0_f64)).exp()).collect();
        let b: Vec<f64> = (0..p).map(|_| rng.gen_range(-2.0..2.0)).collect();
        PeriodicCoefficients::normalized(a, b, 0.0).unwrap()
    }

    #[test]
    fn free_operator_hand_values() {
        // p=2, a=(1,1), b=(0,0), λ=0: φ = (0,1,0,-1), θ = (1,0,-1,0)
        let c = PeriodicCoefficients::free(2);
        let (th, ph) = solve_recurrence_real(&c, 0.0, 3).unwrap();
        assert_eq!(ph, vec![0.0, 1.0, 0.0, -1.0]);
        assert_eq!(th, vec![1.0, 0.0, -1.0, 0.0]);
        let l = lyapunov(&c, Complex64::new(0.0, 0.0)).unwrap();
        assert!((l.f.re + 1.0).abs() < 1e-15);
    }

    #[test]
    fn staggered_potential_closed_forms() {
        // p=2, a=(1,1), b=(1,-1): φ_2 = λ-1, φ_3 = λ²-2, θ_2 = -1
        let c = PeriodicCoefficients::new(vec![1.0, 1.0], vec![1.0, -1.0], 0.0).unwrap();
        for lam in [-2.3, -0.5, 0.0, 0.9, 1.0, 2.7, 10.0] {
            let (th, ph) = solve_recurrence_real(&c, lam, 3).unwrap();
            assert!((ph[2] - (lam - 1.0)).abs() < 1e-12 * (1.0 + lam.abs()));
            assert!((ph[3] - (lam * lam - 2.0)).abs() < 1e-11 * (1.0 + lam * lam));
            assert!((th[2] + 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn lyapunov_closed_forms() {
        // p=1 free: F = λ/2
        let c1 = PeriodicCoefficients::free(1);
        assert!((lyapunov_real(&c1, 0.7) - 0.35).abs() < 1e-15);
        // p=2, b=(β,-β): F = (λ² - β² - 2)/2
        for beta in [0.0, 1.0, 1.7] {
            let c = PeriodicCoefficients::new(vec![1.0, 1.0], vec![beta, -beta], 0.0).unwrap();
            for lam in [-1.2, 0.4, 2.0, 3.5] {
                let want = 0.5 * (lam * lam - beta * beta - 2.0);
                assert!((lyapunov_real(&c, lam) - want).abs() < 1e-12 * (1.0 + want.abs()));
            }
        }
        // p=2 free at the band edge λ=2: F = 1
        let c = PeriodicCoefficients::free(2);
        assert!((lyapunov_real(&c, 2.0) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn wronskian_and_monodromy_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let p = rng.gen_range(1..=10);
            let c = random_coeffs(&mut rng, p);
            for _ in 0..5 {
                let lam = Complex64::new(rng.gen_range(-4.0..4.0), rng.gen_range(-1.0..1.0));
                let t = solve_recurrence(&c, lam, p + 1).unwrap();
                let w0 = t.wronskian(&c, 0);
                for x in 1..=p {
                    // the two products cancel down to a_p from magnitudes
                    // ~|λ|^{2x}; scale the comparison accordingly
                    let mag = 1.0
                        + (t.theta[x] * t.phi[x + 1]).norm()
                        + (t.phi[x] * t.theta[x + 1]).norm();
                    assert!(
                        (t.wronskian(&c, x) - w0).norm() < 1e-11 * mag,
                        "Wronskian drift at p={p}"
                    );
                }
                assert!((w0 - c.ax(0)).norm() < 1e-9 * (1.0 + w0.norm()));
                let l = lyapunov(&c, lam).unwrap();
                let det = l.theta_p * l.phi_p1 - l.phi_p * l.theta_p1;
                let dscale = 1.0
                    + (l.theta_p * l.phi_p1).norm()
                    + (l.phi_p * l.theta_p1).norm();
                assert!((det - Complex64::ONE).norm() < 1e-11 * dscale);
                let lhs = l.fo * l.fo - l.f * l.f + Complex64::ONE;
                let rhs = -l.phi_p * l.theta_p1;
                let fscale = 1.0 + l.f.norm_sqr() + l.fo.norm_sqr() + rhs.norm();
                assert!((lhs - rhs).norm() < 1e-11 * fscale);
            }
        }
    }

    #[test]
    fn large_lambda_asymptotics() {
        // F(λ)·2/λ^p -> 1 as λ -> ∞ for bounded coefficients.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for p in [1, 2, 3] {
            let c = random_coeffs(&mut rng, p);
            let lam = 1e6;
            let f = lyapunov_real(&c, lam);
            assert!((f * 2.0 / lam.powi(p as i32) - 1.0).abs() < 1e-4);
        }
    }

    #[test]
    fn zeros_of_phi_interlace() {
        // zeros of φ_x strictly interlace those of φ_{x+1}, x ≤ p+1
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let p = rng.gen_range(2..=6);
            let c = random_coeffs(&mut rng, p);
            // φ_x is (up to normalization) the char. poly of the leading
            // (x-1)-site Dirichlet block; get its zeros from that matrix.
            let zeros = |x: usize| -> Vec<f64> {
                if x < 2 {
                    return vec![];
                }
                let n = x - 1;
                let d: Vec<f64> = (1..=n as i64).map(|i| c.bx(i)).collect();
                let e: Vec<f64> = (1..n as i64).map(|i| c.ax(i)).collect();
                crate::oracle::tridiag_eigenvalues(&d, &e)
            };
            for x in 2..=(p + 1) {
                let z1 = zeros(x);
                let z2 = zeros(x + 1);
                for (i, zi) in z1.iter().enumerate() {
                    assert!(z2[i] < zi - 1e-12 && *zi < z2[i + 1] + 1e-12);
                }
            }
        }
    }

    #[test]
    fn derivative_recurrences_match_finite_differences() {
        let c = PeriodicCoefficients::new(vec![1.0, 1.0], vec![1.0, -1.0], 0.0).unwrap();
        for lam in [-0.7, 0.3, 1.9] {
            let h = 1e-6;
            let fd = (lyapunov_real(&c, lam + h) - lyapunov_real(&c, lam - h)) / (2.0 * h);
            assert!((lyapunov_derivative_real(&c, lam) - fd).abs() < 1e-7);
            let (_, php) = solve_recurrence_real(&c, lam + h, c.p).unwrap();
            let (_, phm) = solve_recurrence_real(&c, lam - h, c.p).unwrap();
            let fd2 = (php[c.p] - phm[c.p]) / (2.0 * h);
            assert!((phi_p_derivative_real(&c, lam) - fd2).abs() < 1e-7);
        }
    }
}
