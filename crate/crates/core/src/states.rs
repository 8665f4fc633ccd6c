//! Dirichlet values, Weyl–Titchmarsh functions, Bloch solutions, and the
//! classification of gap states.
//!
//! Each open gap γ_n hosts exactly one state of the half-line operator,
//! projecting onto the Dirichlet value μ_n (the n-th zero of φ_p, equally
//! the n-th eigenvalue of the interior (p−1)-site Dirichlet matrix). The
//! state lives on the two-sheeted Riemann surface over the gap:
//!
//! * eigenvalue   (sheet 1)  ⟺  |φ_{p+1}(μ_n)| < 1,
//! * resonance    (sheet 2)  ⟺  |φ_{p+1}(μ_n)| > 1,
//! * virtual state (band edge) ⟺  |φ_{p+1}(μ_n)| = 1,
//!
//! because φ_{j+p}(μ_n) = φ_{p+1}(μ_n)·φ_j(μ_n) exactly: φ_{p+1} is the
//! Floquet multiplier of the Dirichlet solution. We report
//! ε = +1 / −1 / 0 for eigenvalue / resonance / virtual.
//!
//! ## Numerically stable sheet detection
//!
//! At μ_n the unimodularity identity collapses to θ_p·φ_{p+1} = 1 (φ_p
//! vanishes). For strongly designed operators |φ_{p+1}(μ_n)| can be ~1e−20:
//! direct recurrence evaluation in doubles is pure cancellation noise. But
//! its reciprocal θ_p(μ_n) ~ 1e+20 is growth-dominated and carries good
//! relative accuracy. The classifier therefore evaluates both endpoint
//! values and trusts whichever log-magnitude is larger.

use crate::bands::band_edges;
use crate::coeffs::PeriodicCoefficients;
use crate::oracle::tridiag_eigenvalues;
use crate::recurrence::{lyapunov, solve_recurrence, solve_recurrence_real};
use crate::{Result, SpectralError};
use num_complex::Complex64;
use serde::Serialize;

/// Relative tolerance deciding "virtual state" (| |φ_{p+1}| − 1 | below it).
pub const VIRTUAL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StateKind {
    Eigenvalue,
    Resonance,
    VirtualState,
}

#[derive(Debug, Clone, Serialize)]
pub struct GapState {
    /// Gap index n in 1..p-1.
    pub n: usize,
    /// Dirichlet value μ_n (shift included).
    pub mu: f64,
    pub kind: StateKind,
    /// +1 eigenvalue, −1 resonance, 0 virtual.
    pub epsilon: i32,
    /// |φ_{p+1}(μ_n)| (decay multiplier per period of the Dirichlet solution).
    pub phi_p1_abs: f64,
    /// log|φ_{p+1}(μ_n)|, evaluated stably (see module docs).
    pub log_multiplier: f64,
}

/// Dirichlet eigenvalues μ_1 < … < μ_{p-1}: spectrum of the symmetric
/// tridiagonal interior block (diag b_1..b_{p-1}, off-diag a_1..a_{p-2}).
/// Empty for p = 1.
pub fn dirichlet_eigenvalues(c: &PeriodicCoefficients) -> Vec<f64> {
    if c.p < 2 {
        return vec![];
    }
    let d: Vec<f64> = (1..=(c.p as i64 - 1)).map(|i| c.bx(i)).collect();
    let e: Vec<f64> = (1..(c.p as i64 - 1)).map(|i| c.ax(i)).collect();
    tridiag_eigenvalues(&d, &e)
}

/// Stable log|φ_{p+1}(μ)| at a Dirichlet zero μ, via θ_p·φ_{p+1} = 1.
pub fn log_multiplier_at_mu(c: &PeriodicCoefficients, mu: f64) -> f64 {
    let p = c.p;
    let (th, ph) = solve_recurrence_real(c, mu, p + 1).expect("p >= 1");
    let lph = ph[p + 1].abs().ln();
    let lth = th[p].abs().ln();
    if lth.abs() > lph.abs() {
        -lth
    } else {
        lph
    }
}

/// Classify the state in every open gap. Closed gaps contribute nothing.
pub fn classify_states(c: &PeriodicCoefficients) -> Result<Vec<GapState>> {
    let sb = band_edges(c)?;
    let mus = dirichlet_eigenvalues(c);
    let mut out = Vec::new();
    for n in 1..c.p {
        if sb.gap_is_closed(n) {
            continue;
        }
        let mu = mus[n - 1];
        let logm = log_multiplier_at_mu(c, mu);
        let (kind, eps) = if logm.abs() <= VIRTUAL_TOL {
            (StateKind::VirtualState, 0)
        } else if logm < 0.0 {
            (StateKind::Eigenvalue, 1)
        } else {
            (StateKind::Resonance, -1)
        };
        out.push(GapState {
            n,
            mu,
            kind,
            epsilon: eps,
            phi_p1_abs: logm.exp(),
            log_multiplier: logm,
        });
    }
    Ok(out)
}

/// Both m± values at a complex λ, plus shared monodromy data.
#[derive(Debug, Clone, Serialize)]
pub struct WeylValue {
    pub lambda: (f64, f64),
    pub m_plus: (f64, f64),
    pub m_minus: (f64, f64),
}

/// The Floquet multiplier e^{ik(λ)} with |e^{ik}| ≤ 1 (decaying branch):
/// the root of ρ² − 2Fρ + 1 = 0 inside the closed unit disk. On band
/// interiors (real λ, |F| < 1) the limit from below the real axis is taken:
/// e^{ik} = F − i√(1−F²), the branch on which ψ^+ stays the physical Bloch
/// solution across the last band's normalization interval.
pub fn floquet_multiplier(c: &PeriodicCoefficients, lambda: Complex64) -> Result<Complex64> {
    let l = lyapunov(c, lambda)?;
    let f = l.f;
    let mut s = (f * f - Complex64::ONE).sqrt();
    if (f + s).norm() < (f - s).norm() {
        s = -s;
    }
    // the small root by Vieta: stable even when |F| is huge and F − s cancels
    let r = (f + s).inv();
    if (r.norm() - 1.0).abs() < 1e-12 && lambda.im == 0.0 {
        // On a band: pin the branch to the limit from below.
        let fr = f.re.clamp(-1.0, 1.0);
        let sink = (1.0 - fr * fr).sqrt();
        return Ok(Complex64::new(fr, -sink));
    }
    Ok(r)
}

/// Weyl–Titchmarsh functions m±(λ) = (e^{±ik} − θ_p)/φ_p. Checks the second
/// algebraic form (φ_{p+1} − e^{∓ik})/φ_p for cross-consistency.
pub fn weyl_m(c: &PeriodicCoefficients, lambda: Complex64) -> Result<WeylValue> {
    let p = c.p;
    let l = lyapunov(c, lambda)?;
    if l.phi_p.norm() < 1e-13 * (1.0 + l.theta_p.norm()) {
        return Err(SpectralError::numerical(format!(
            "λ = {lambda} is a Dirichlet zero: m± has a pole (residue scale {:.3e})",
            l.theta_p.norm()
        )));
    }
    let e = floquet_multiplier(c, lambda)?;
    let einv = 1.0 / e;
    let mp = (e - l.theta_p) / l.phi_p;
    let mm = (einv - l.theta_p) / l.phi_p;
    // Cross-check with the second form; failure signals branch trouble.
    let mp2 = (l.phi_p1 - einv) / l.phi_p;
    if (mp - mp2).norm() > 1e-8 * (1.0 + mp.norm() + mm.norm()) {
        return Err(SpectralError::numerical(format!(
            "Weyl-function forms disagree at λ = {lambda}: {mp} vs {mp2}"
        )));
    }
    let _ = p;
    Ok(WeylValue {
        lambda: (lambda.re, lambda.im),
        m_plus: (mp.re, mp.im),
        m_minus: (mm.re, mm.im),
    })
}

/// Real gap-branch value of m₊ (λ strictly inside a gap): the decaying
/// Floquet multiplier is real there and so is m₊.
pub fn weyl_m_plus_gap(c: &PeriodicCoefficients, lambda: f64) -> Result<f64> {
    let w = weyl_m(c, Complex64::new(lambda, 0.0))?;
    Ok(w.m_plus.0)
}

/// Bloch solution value ψ_x^± = θ_x + m± φ_x.
pub fn bloch_value(
    c: &PeriodicCoefficients,
    lambda: Complex64,
    x: usize,
    plus: bool,
) -> Result<Complex64> {
    let w = weyl_m(c, lambda)?;
    let m = if plus {
        Complex64::new(w.m_plus.0, w.m_plus.1)
    } else {
        Complex64::new(w.m_minus.0, w.m_minus.1)
    };
    let t = solve_recurrence(c, lambda, x.max(1))?;
    Ok(t.theta[x] + m * t.phi[x])
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_coeffs(rng: &mut ChaCha8Rng, p: usize) -> PeriodicCoefficients {
        let a: Vec<f64> = (0..p).map(|_| (rng.gen_range(-1.0..1.0_f64)).exp()).collect();
        let b: Vec<f64> = (0..p).map(|_| rng.gen_range(-2.0..2.0)).collect();
        PeriodicCoefficients::normalized(a, b, 0.0).unwrap()
    }

    #[test]
    fn dirichlet_closed_forms() {
        // p=2 staggered: φ_2 = λ-1, zero at 1 (gap edge -> virtual state)
        let c = PeriodicCoefficients::new(vec![1.0, 1.0], vec![1.0, -1.0], 0.0).unwrap();
        let mus = dirichlet_eigenvalues(&c);
        assert_eq!(mus.len(), 1);
        assert!((mus[0] - 1.0).abs() < 1e-12);
        let st = classify_states(&c).unwrap();
        assert_eq!(st.len(), 1);
        assert_eq!(st[0].kind, StateKind::VirtualState);
        assert_eq!(st[0].epsilon, 0);
        assert!((st[0].phi_p1_abs - 1.0).abs() < 1e-9);
        // p=2 free: μ_1 = 0 at the degenerate gap; closed gap -> no state
        let f = PeriodicCoefficients::free(2);
        assert!(dirichlet_eigenvalues(&f)[0].abs() < 1e-12);
        assert!(classify_states(&f).unwrap().is_empty());
        // p=1: empty
        assert!(dirichlet_eigenvalues(&PeriodicCoefficients::free(1)).is_empty());
    }

    #[test]
    fn free_p4_no_states() {
        let c = PeriodicCoefficients::free(4);
        assert!(classify_states(&c).unwrap().is_empty());
    }

    #[test]
    fn mu_inside_closed_gap_always() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..30 {
            let p = rng.gen_range(2..=10);
            let c = random_coeffs(&mut rng, p);
            let sb = band_edges(&c).unwrap();
            let mus = dirichlet_eigenvalues(&c);
            for n in 1..p {
                let (lm, lp) = (sb.lambda_minus(n), sb.lambda_plus(n));
                let tol = 1e-8 * (1.0 + lm.abs());
                assert!(
                    mus[n - 1] >= lm - tol && mus[n - 1] <= lp + tol,
                    "μ_{n} = {} outside [{lm}, {lp}]",
                    mus[n - 1]
                );
            }
            // one state per open gap
            let open = (1..p).filter(|&n| !sb.gap_is_closed(n)).count();
            assert_eq!(classify_states(&c).unwrap().len(), open);
        }
    }

    #[test]
    fn decay_identity_and_trichotomy() {
        // At μ the Dirichlet solution is a Floquet eigenvector:
        // φ_{np+1}(μ) = φ_{p+1}(μ)^n. The measured one-period ratio must
        // match the classifier's multiplier. Only the φ_{np+1} sites are
        // usable — φ_{np} ≈ 0 is pure roundoff — and for decaying states the
        // growing error component limits how many periods stay clean, so the
        // check stops after two.
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..10 {
            let p = rng.gen_range(2..=6);
            let c = random_coeffs(&mut rng, p);
            for s in classify_states(&c).unwrap() {
                if !(1e-4..=1e4).contains(&s.phi_p1_abs) {
                    continue;
                }
                let (_, ph) = solve_recurrence_real(&c, s.mu, 3 * p + 1).unwrap();
                for nn in 0..2usize {
                    let r = (ph[(nn + 2) * p + 1] / ph[nn * p + 1]).abs().sqrt();
                    assert!(
                        (r - s.phi_p1_abs).abs() < 1e-6 * (1.0 + s.phi_p1_abs),
                        "decay ratio {r} vs multiplier {}",
                        s.phi_p1_abs
                    );
                }
            }
        }
    }

    #[test]
    fn weyl_product_identity_off_axis() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..20 {
            let p = rng.gen_range(2..=8);
            let c = random_coeffs(&mut rng, p);
            let lam = Complex64::new(0.0, 3.0);
            let w = weyl_m(&c, lam).unwrap();
            let l = lyapunov(&c, lam).unwrap();
            let mp = Complex64::new(w.m_plus.0, w.m_plus.1);
            let mm = Complex64::new(w.m_minus.0, w.m_minus.1);
            let want = -l.theta_p1 / l.phi_p;
            assert!(((mp * mm) - want).norm() < 1e-8 * (1.0 + want.norm()));
        }
    }

    #[test]
    fn bloch_endpoint_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..10 {
            let p = rng.gen_range(2..=6);
            let c = random_coeffs(&mut rng, p);
            let lam = Complex64::new(rng.gen_range(-1.0..1.0), 1.0 + rng.gen_range(0.0..1.0));
            let e = floquet_multiplier(&c, lam).unwrap();
            let w = weyl_m(&c, lam).unwrap();
            let mp = Complex64::new(w.m_plus.0, w.m_plus.1);
            let psi0 = bloch_value(&c, lam, 0, true).unwrap();
            let psip = bloch_value(&c, lam, p, true).unwrap();
            let psip1 = bloch_value(&c, lam, p + 1, true).unwrap();
            assert!((psi0 - Complex64::ONE).norm() < 1e-8);
            assert!((psip - e).norm() < 1e-8 * (1.0 + e.norm()));
            assert!((psip1 - e * mp).norm() < 1e-8 * (1.0 + (e * mp).norm()));
            // |e^{ik}| reproduced from cos k = F independently
            let f = lyapunov(&c, lam).unwrap().f;
            let s = (f * f - Complex64::ONE).sqrt();
            let modulus = (f - s).norm().min((f + s).norm());
            assert!((e.norm() - modulus).abs() < 1e-9 * (1.0 + modulus));
        }
    }

    #[test]
    fn eigenvalue_state_means_m_plus_pole() {
        // designed small case: p=2 with an interior eigenvalue state
        // (built by reflection of a resonance-side draw found by search)
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let mut found = false;
        for _ in 0..200 {
            let c = random_coeffs(&mut rng, 2);
            let st = classify_states(&c).unwrap();
            if st.len() == 1 && st[0].kind == StateKind::Eigenvalue {
                let mu = st[0].mu;
                let sb = band_edges(&c).unwrap();
                let g = &sb.gaps[0];
                let h = (1e-6_f64).min(g.len() / 10.0);
                let m1 = weyl_m_plus_gap(&c, mu - h).unwrap();
                let m2 = weyl_m_plus_gap(&c, mu + h).unwrap();
                assert!(
                    m1.abs().max(m2.abs()) > 1e4,
                    "no m+ pole near eigenvalue state: {m1}, {m2}"
                );
                found = true;
                break;
            }
        }
        assert!(found, "no eigenvalue-state draw found");
    }

    #[test]
    fn band_interior_forms_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for _ in 0..10 {
            let p = rng.gen_range(2..=6);
            let c = random_coeffs(&mut rng, p);
            let sb = band_edges(&c).unwrap();
            let band = &sb.bands[0];
            let lam = band.mid();
            // weyl_m() internally cross-checks both algebraic forms and the
            // multiplier is unimodular on a band
            if let Ok(_) = weyl_m(&c, Complex64::new(lam, 0.0)) {
                let e = floquet_multiplier(&c, Complex64::new(lam, 0.0)).unwrap();
                assert!((e.norm() - 1.0).abs() < 1e-9);
            }
        }
    }
}
