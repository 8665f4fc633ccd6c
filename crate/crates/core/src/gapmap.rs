//! Gap-length coordinates and their numerical inversion; uniform-gap
//! designs with prescribed state sheets.
//!
//! The map sends zero-mean coefficients (log a reduced to p−1 free
//! coordinates, likewise b) to the 2(p−1) gap coordinates
//!
//! ```text
//! ψ_{1n} = (λ_n^+ + λ_n^-)/2 − μ_n          (state offset from gap center)
//! ψ_{2n} = ε_n √| |γ_n|²/4 − ψ_{1n}² |      (signed conjugate length)
//! ```
//!
//! which is a real-analytic isomorphism onto ℝ^{2p−2}: `√(ψ₁²+ψ₂²)` is the
//! half-gap-length and the sign of ψ₂ carries the sheet of the gap state.
//! Inversion is damped Newton with a central-difference Jacobian and a
//! norm-reduction line search, cold-started through an adaptive homotopy
//! `t · target` from the free operator.
//!
//! ## Uniform designs
//!
//! The designed operator has all p−1 gaps of length γ and its states at
//! μ_n = γ(n−1+e₁), e₁ = 1/(4d), after shifting λ_0^+ to 0. An outer
//! fixed-point loop (a handful of rounds) corrects the ψ₁ targets for the
//! a-posteriori band positions. Only the *resonance*-sheet design is solved
//! directly — that Newton branch is benign at every scale. The
//! eigenvalue-sheet design is its spatial reflection: reflection preserves
//! bands, gaps and every μ_n while flipping each state to the other sheet,
//! and the direct Newton path on the eigenvalue sheet is hopelessly stiff
//! at large γ (hoppings of order e^{±25}).

use crate::bands::band_edges;
use crate::coeffs::PeriodicCoefficients;
use crate::states::{dirichlet_eigenvalues, log_multiplier_at_mu};
use crate::{Result, SpectralError};
use nalgebra::{DMatrix, DVector};
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct GapMapVector {
    /// p−1 pairs (ψ_1n, ψ_2n).
    pub psi: Vec<(f64, f64)>,
}

impl GapMapVector {
    pub fn flat(&self) -> Vec<f64> {
        self.psi.iter().flat_map(|&(x, y)| [x, y]).collect()
    }
    pub fn from_flat(v: &[f64]) -> Self {
        GapMapVector {
            psi: v.chunks(2).map(|c| (c[0], c[1])).collect(),
        }
    }
    pub fn norm_inf(&self) -> f64 {
        self.flat().iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }
}

/// Reduced coordinates: v = (log a_1..log a_{p-1}, b_1..b_{p-1}), the last
/// component of each block being minus the sum (zero-mean constraint).
fn vec_to_coeffs(v: &[f64], p: usize) -> Result<PeriodicCoefficients> {
    let (x, y) = v.split_at(p - 1);
    let mut a: Vec<f64> = x.iter().map(|t| t.exp()).collect();
    a.push((-x.iter().sum::<f64>()).exp());
    let mut b: Vec<f64> = y.to_vec();
    b.push(-y.iter().sum::<f64>());
    PeriodicCoefficients::new(a, b, 0.0)
}

fn coeffs_to_vec(c: &PeriodicCoefficients) -> Vec<f64> {
    let mut v: Vec<f64> = c.a[..c.p - 1].iter().map(|x| x.ln()).collect();
    v.extend_from_slice(&c.b[..c.p - 1]);
    v
}

/// Forward gap-length map. Closed gaps contribute (0, 0).
pub fn forward_gap_map(c: &PeriodicCoefficients) -> Result<GapMapVector> {
    let sb = band_edges(c)?;
    let mus = dirichlet_eigenvalues(c);
    let mut psi = Vec::with_capacity(c.p - 1);
    for n in 1..c.p {
        if sb.gap_is_closed(n) {
            psi.push((0.0, 0.0));
            continue;
        }
        let (lm, lp) = (sb.lambda_minus(n), sb.lambda_plus(n));
        let mu = mus[n - 1];
        let p1 = 0.5 * (lm + lp) - mu;
        let half = 0.5 * (lp - lm);
        let logm = log_multiplier_at_mu(c, mu);
        // sign convention: ψ₂ > 0 on the resonance sheet, < 0 on the
        // eigenvalue sheet, 0 for virtual states (|multiplier| = 1).
        let eps = if logm.abs() <= crate::states::VIRTUAL_TOL {
            0.0
        } else {
            logm.signum()
        };
        let p2 = eps * (half * half - p1 * p1).abs().sqrt();
        psi.push((p1, p2));
    }
    Ok(GapMapVector { psi })
}

fn residual(v: &[f64], p: usize, target: &[f64]) -> Option<Vec<f64>> {
    // overflow guard on the log-hopping block only; the potential block
    // scales linearly with the target and is bounded separately
    let (logs, pots) = v.split_at(p - 1);
    if logs.iter().any(|x| x.abs() > 60.0) || pots.iter().any(|x| x.abs() > 1e6) {
        return None;
    }
    let c = vec_to_coeffs(v, p).ok()?;
    let f = forward_gap_map(&c).ok()?;
    let r: Vec<f64> = f.flat().iter().zip(target).map(|(a, t)| a - t).collect();
    if r.iter().all(|x| x.is_finite()) {
        Some(r)
    } else {
        None
    }
}

fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

/// One damped-Newton solve from a given starting vector. Returns the best
/// vector and its residual norm (which may not meet the tolerance; the
/// homotopy driver decides what to do with that).
fn newton_solve(target: &[f64], p: usize, v0: &[f64], tol: f64, max_iter: usize) -> (Vec<f64>, f64) {
    let m = 2 * (p - 1);
    let mut v = v0.to_vec();
    let mut r = match residual(&v, p, target) {
        Some(r) => r,
        None => return (v0.to_vec(), f64::INFINITY),
    };
    let mut nr = norm_inf(&r);
    let scale = 1.0 + norm_inf(target);
    for _ in 0..max_iter {
        if nr <= tol * scale {
            break;
        }
        let mut jac = DMatrix::zeros(m, m);
        let mut ok = true;
        for j in 0..m {
            let h = 1e-6 * (1.0 + v[j].abs());
            let mut vp = v.clone();
            vp[j] += h;
            let mut vm = v.clone();
            vm[j] -= h;
            match (residual(&vp, p, target), residual(&vm, p, target)) {
                (Some(fp), Some(fm)) => {
                    for i in 0..m {
                        jac[(i, j)] = (fp[i] - fm[i]) / (2.0 * h);
                    }
                }
                _ => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            break;
        }
        let rhs = DVector::from_iterator(m, r.iter().map(|x| -x));
        let dv = match jac.lu().solve(&rhs) {
            Some(d) => d,
            None => break,
        };
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..50 {
            let vt: Vec<f64> = v.iter().zip(dv.iter()).map(|(x, d)| x + t * d).collect();
            if let Some(rt) = residual(&vt, p, target) {
                let nt = norm_inf(&rt);
                if nt < nr {
                    v = vt;
                    r = rt;
                    nr = nt;
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    (v, nr)
}

/// Invert the gap-length map. Cold starts walk an adaptive homotopy
/// `t · target` from the free operator; warm starts go straight at the
/// target and fall back to the homotopy if Newton stalls.
pub fn invert_gap_map(
    target: &GapMapVector,
    initial: Option<&PeriodicCoefficients>,
) -> Result<PeriodicCoefficients> {
    let p = target.psi.len() + 1;
    if p < 2 {
        return Err(SpectralError::validation("need at least one gap coordinate"));
    }
    let tflat = target.flat();
    if tflat.iter().any(|x| !x.is_finite()) {
        return Err(SpectralError::validation("target must be finite"));
    }
    let tol = 1e-10;
    let scale = 1.0 + norm_inf(&tflat);

    if let Some(c0) = initial {
        if c0.p != p {
            return Err(SpectralError::validation("initial guess period mismatch"));
        }
        let v0 = coeffs_to_vec(c0);
        let (v, nr) = newton_solve(&tflat, p, &v0, tol, 60);
        if nr <= tol * scale {
            return vec_to_coeffs(&v, p);
        }
        // fall through to the homotopy
    }

    let m = 2 * (p - 1);
    let mut v = vec![0.0; m];
    let mut t = 0.0_f64;
    let mut dt = 0.1_f64;
    // Intermediate stages serve only to supply a warm start for the next
    // one, so they may end on a loose plateau; only the final target must
    // meet the full tolerance.
    let loose = 1e-3 * scale;
    while t < 1.0 {
        let tn = (t + dt).min(1.0);
        let stage: Vec<f64> = tflat.iter().map(|x| tn * x).collect();
        let (v2, r2) = newton_solve(&stage, p, &v, tol, 100);
        if r2 <= tol * scale || (tn < 1.0 && r2 <= loose) {
            t = tn;
            v = v2;
            dt = (dt * 1.5).min(0.25);
        } else {
            dt *= 0.5;
            if dt < 1e-4 {
                return Err(SpectralError::numerical(format!(
                    "gap-map inversion stalled at homotopy t = {t:.5}, residual {r2:.3e}"
                )));
            }
        }
    }
    let (v, nr) = newton_solve(&tflat, p, &v, tol, 100);
    if nr > tol * scale {
        return Err(SpectralError::numerical(format!(
            "gap-map inversion finished the homotopy but stalled at residual {nr:.3e}"
        )));
    }
    vec_to_coeffs(&v, p)
}

/// Design request: uniform gap length, states at μ_n = γ(n−1+e₁) on the
/// requested sheet.
#[derive(Debug, Clone)]
pub struct DesignSpec {
    pub p: usize,
    /// spatial dimension of the target assembly; sets e₁ = 1/(4d)
    pub d: usize,
    /// +1: all states eigenvalues; −1: all states resonances
    pub sheet: i32,
}

#[derive(Debug, Clone, Serialize)]
pub struct DesignReport {
    pub coeffs: PeriodicCoefficients,
    pub gamma: f64,
    pub e1: f64,
    pub achieved_gaps: Vec<f64>,
    pub achieved_mus: Vec<f64>,
    pub mu_targets: Vec<f64>,
    pub residual: f64,
}

/// Solve the resonance-sheet uniform design directly (the benign Newton
/// branch), retargeting μ positions by an outer fixed-point loop.
fn design_resonance(p: usize, gamma: f64, e1: f64) -> Result<(PeriodicCoefficients, f64)> {
    let mut delta = vec![gamma * (0.5 - e1); p - 1];
    let mut current: Option<PeriodicCoefficients> = None;
    let mut res = f64::INFINITY;
    for _round in 0..8 {
        let target = GapMapVector {
            psi: delta
                .iter()
                .map(|&d| {
                    let q = (gamma * gamma / 4.0 - d * d).max(0.0);
                    (d, q.sqrt())
                })
                .collect(),
        };
        let c = invert_gap_map(&target, current.as_ref())?;
        let f = forward_gap_map(&c)?;
        res = f
            .flat()
            .iter()
            .zip(target.flat())
            .map(|(x, t)| (x - t).abs())
            .fold(0.0_f64, f64::max);
        let sb = band_edges(&c)?;
        let shift = -sb.edges[0];
        let mus = dirichlet_eigenvalues(&c);
        let mut err = 0.0_f64;
        for n in 1..p {
            let target_mu = gamma * ((n - 1) as f64 + e1);
            let e = mus[n - 1] + shift - target_mu;
            err = err.max(e.abs());
            delta[n - 1] += e;
        }
        current = Some(c);
        if err < 1e-8 {
            break;
        }
    }
    let mut c = current.expect("at least one round ran");
    let sb = band_edges(&c)?;
    c.shift -= sb.edges[0]; // normalize λ_0^+ = 0
    Ok((c, res))
}

/// Uniform-gap design with λ_0^+ = 0. Eigenvalue-sheet designs are produced
/// by reflecting the resonance-sheet solution (see module docs).
pub fn design_uniform(spec: &DesignSpec, gamma: f64) -> Result<DesignReport> {
    if spec.p < 2 {
        return Err(SpectralError::validation("design needs p >= 2"));
    }
    if !(spec.d == 2 || spec.d == 3) {
        return Err(SpectralError::validation("design dimension must be 2 or 3"));
    }
    if gamma < 16.0 {
        return Err(SpectralError::validation(
            "gamma must be >= 16 for the clusters to separate",
        ));
    }
    if spec.sheet != 1 && spec.sheet != -1 {
        return Err(SpectralError::validation("sheet must be +1 or -1"));
    }
    let e1 = 1.0 / (4.0 * spec.d as f64);
    let (cres, residual) = design_resonance(spec.p, gamma, e1)?;
    let mut c = if spec.sheet == 1 { cres.reflected() } else { cres };
    // reflection preserves the Lyapunov function, but re-derive the
    // λ_0^+ = 0 shift anyway to absorb roundoff
    let sb0 = band_edges(&c)?;
    c.shift -= sb0.edges[0];

    let sb = band_edges(&c)?;
    let mus = dirichlet_eigenvalues(&c);
    let achieved_gaps: Vec<f64> = sb.gaps.iter().map(|g| g.len()).collect();
    let mu_targets: Vec<f64> = (1..spec.p).map(|n| gamma * ((n - 1) as f64 + e1)).collect();
    Ok(DesignReport {
        coeffs: c,
        gamma,
        e1,
        achieved_gaps,
        achieved_mus: mus,
        mu_targets,
        residual,
    })
}
