//! Brute-force finite-truncation verifier.
//!
//! Everything here is deliberately independent of the analytic machinery in
//! the rest of the crate: explicit matrices, classical algorithms, no shared
//! code paths. Three workhorses:
//!
//! * a Sturm-sequence bisection eigensolver for symmetric tridiagonal
//!   matrices (half-line and half-solid truncations up to L = 2000 and
//!   window-local eigenvalue extraction),
//! * a Kronecker-sum fast path for separable boxes: the spectrum of
//!   `A ⊗ I + I ⊗ B` is exactly `{α + β}`, so 2D/3D box spectra reduce to
//!   sums of 1D eigenvalues (an exact tensor identity, not an approximation),
//! * a banded symmetric LDLᵀ inertia counter (spectrum slicing): the number
//!   of negative pivots of `H − σI` equals the number of eigenvalues below
//!   σ, so window counts on non-separable (perturbed, quadrant-assembled)
//!   boxes cost two factorizations instead of a full diagonalization.

use crate::bands::{band_edges, Interval};
use crate::coeffs::PeriodicCoefficients;
use crate::{Result, SpectralError};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// ---------------------------------------------------------------------------
// Symmetric tridiagonal eigenvalues by Sturm bisection
// ---------------------------------------------------------------------------

/// Number of eigenvalues of tridiag(d, e) strictly below x, by the Sturm
/// sequence of leading-principal-minor pivots.
pub fn sturm_count(d: &[f64], e: &[f64], x: f64) -> usize {
    let n = d.len();
    let mut count = 0usize;
    let mut q = d[0] - x;
    if q < 0.0 {
        count += 1;
    }
    for i in 1..n {
        if q == 0.0 {
            q = 1e-300;
        }
        q = d[i] - x - e[i - 1] * e[i - 1] / q;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

fn gershgorin_bounds(d: &[f64], e: &[f64]) -> (f64, f64) {
    let n = d.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = if i > 0 { e[i - 1].abs() } else { 0.0 } + if i < n - 1 { e[i].abs() } else { 0.0 };
        lo = lo.min(d[i] - r);
        hi = hi.max(d[i] + r);
    }
    (lo, hi)
}

/// k-th smallest eigenvalue (0-based) by bisection on the Sturm count.
fn kth_eigenvalue(d: &[f64], e: &[f64], k: usize, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(d, e, mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// All eigenvalues of the symmetric tridiagonal matrix with diagonal `d`
/// and off-diagonal `e`, sorted ascending.
pub fn tridiag_eigenvalues(d: &[f64], e: &[f64]) -> Vec<f64> {
    let n = d.len();
    if n == 0 {
        return vec![];
    }
    assert_eq!(e.len(), n - 1, "off-diagonal length mismatch");
    let (lo, hi) = gershgorin_bounds(d, e);
    let (lo, hi) = (lo - 1e-8 * (1.0 + lo.abs()), hi + 1e-8 * (1.0 + hi.abs()));
    (0..n).map(|k| kth_eigenvalue(d, e, k, lo, hi)).collect()
}

/// Eigenvalues inside the open window (lo, hi) only.
pub fn tridiag_eigenvalues_in_window(d: &[f64], e: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    let below_lo = sturm_count(d, e, lo);
    let below_hi = sturm_count(d, e, hi);
    let (glo, ghi) = gershgorin_bounds(d, e);
    (below_lo..below_hi)
        .map(|k| kth_eigenvalue(d, e, k, glo.min(lo), ghi.max(hi)))
        .collect()
}

// ---------------------------------------------------------------------------
// 1D truncations
// ---------------------------------------------------------------------------

/// Dirichlet truncation of the half-line operator to sites 1..=L.
pub fn half_line_tridiag(c: &PeriodicCoefficients, l: usize) -> (Vec<f64>, Vec<f64>) {
    let d: Vec<f64> = (1..=l as i64).map(|x| c.bx(x)).collect();
    let e: Vec<f64> = (1..l as i64).map(|x| c.ax(x)).collect();
    (d, e)
}

/// Dirichlet truncation of the half-solid operator (periodic on ℤ₊, vacuum
/// hopping 1 / potential τ on ℤ₋) to sites −L..=L.
pub fn half_solid_tridiag(c: &PeriodicCoefficients, tau: f64, l: usize) -> (Vec<f64>, Vec<f64>) {
    let li = l as i64;
    let d: Vec<f64> = (-li..=li)
        .map(|x| if x >= 1 { c.bx(x) } else { tau })
        .collect();
    let e: Vec<f64> = (-li..li)
        .map(|x| if x >= 1 { c.ax(x) } else { 1.0 })
        .collect();
    (d, e)
}

/// Truncation models for the generic diagonalization entry point.
#[derive(Debug, Clone)]
pub enum TruncationSpec {
    HalfLine { l: usize },
    HalfSolid { l: usize, tau: f64 },
    /// Separable box: one half-line factor per axis (Kronecker fast path).
    BoxSeparable { l: usize },
}

/// Assemble and diagonalize a truncation. For separable boxes the exact
/// Kronecker-sum identity is used. Matrix dimension is capped to keep the
/// dense/tridiagonal paths honest.
pub fn truncate_and_diagonalize(
    spec: &TruncationSpec,
    coeffs: &[PeriodicCoefficients],
) -> Result<Vec<f64>> {
    match spec {
        TruncationSpec::HalfLine { l } => {
            if *l > 100_000 {
                return Err(SpectralError::validation("truncation length too large"));
            }
            let (d, e) = half_line_tridiag(&coeffs[0], *l);
            Ok(tridiag_eigenvalues(&d, &e))
        }
        TruncationSpec::HalfSolid { l, tau } => {
            if 2 * l + 1 > 100_000 {
                return Err(SpectralError::validation("truncation length too large"));
            }
            let (d, e) = half_solid_tridiag(&coeffs[0], *tau, *l);
            Ok(tridiag_eigenvalues(&d, &e))
        }
        TruncationSpec::BoxSeparable { l } => {
            if coeffs.len() < 2 {
                return Err(SpectralError::validation("box needs one coefficient set per axis"));
            }
            if l * l > 4_000_000 {
                return Err(SpectralError::validation("box dimension overflow"));
            }
            let mut eigs: Vec<f64> = {
                let (d, e) = half_line_tridiag(&coeffs[0], *l);
                tridiag_eigenvalues(&d, &e)
            };
            for c in &coeffs[1..] {
                let (d, e) = half_line_tridiag(c, *l);
                let next = tridiag_eigenvalues(&d, &e);
                eigs = kronecker_sum(&eigs, &next);
            }
            Ok(eigs)
        }
    }
}

/// All pairwise sums {α + β}, sorted: the exact spectrum of A ⊕ B on the
/// tensor product.
pub fn kronecker_sum(u: &[f64], v: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(u.len() * v.len());
    for &a in u {
        for &b in v {
            out.push(a + b);
        }
    }
    out.sort_by(|x, y| x.partial_cmp(y).unwrap());
    out
}

/// Count eigenvalues in the closed interval. The list is assumed sorted;
/// multiplicity is whatever the list contains (clusters within 1e-7 count
/// per member, which is the numerical notion of multiplicity here).
pub fn count_in_interval(eigs: &[f64], iv: &Interval) -> usize {
    eigs.iter().filter(|&&x| iv.contains(x)).count()
}

// ---------------------------------------------------------------------------
// Banded symmetric LDL^T inertia counting (spectrum slicing)
// ---------------------------------------------------------------------------

/// Symmetric banded matrix, lower storage: column j holds A[j..=j+hb, j]
/// (clipped at n), contiguously.
pub struct BandedSym {
    pub n: usize,
    /// half-bandwidth: number of sub-diagonals
    pub hb: usize,
    /// cols[j * (hb+1) + k] = A[j+k, j], k = 0..=hb
    pub cols: Vec<f64>,
}

impl BandedSym {
    pub fn zeros(n: usize, hb: usize) -> Self {
        BandedSym { n, hb, cols: vec![0.0; n * (hb + 1)] }
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        debug_assert!(r - c <= self.hb);
        self.cols[c * (self.hb + 1) + (r - c)] += v;
    }

    /// Number of eigenvalues strictly below σ: negative pivots of the
    /// LDLᵀ factorization of A − σI (no pivoting). A zero or overflowing
    /// pivot means σ sits numerically on an eigenvalue of a leading
    /// principal block; the shift is then retried with a relative jitter,
    /// which cannot change the count unless σ itself is an eigenvalue to
    /// machine precision.
    pub fn count_below(&self, sigma: f64) -> usize {
        let scale = 1.0
            + sigma.abs()
            + self.cols.iter().fold(0.0_f64, |m, &v| m.max(v.abs()));
        let mut jitter = 0.0;
        for _ in 0..8 {
            if let Some(neg) = self.try_count_below(sigma + jitter) {
                return neg;
            }
            jitter = if jitter == 0.0 { 1e-13 * scale } else { jitter * 16.0 };
        }
        panic!("LDL^T breakdown persists near sigma = {sigma}");
    }

    fn try_count_below(&self, sigma: f64) -> Option<usize> {
        let n = self.n;
        let hb = self.hb;
        let w = hb + 1;
        // working copy of the band, overwritten by L and D
        let mut f = self.cols.clone();
        for j in 0..n {
            f[j * w] -= sigma;
        }
        let mut negatives = 0usize;
        for j in 0..n {
            // subtract contributions of columns j-hb .. j-1
            let kmin = j.saturating_sub(hb);
            for i in kmin..j {
                let k = j - i; // row offset of entry (j, i) in column i
                let lji = f[i * w + k];
                if lji == 0.0 {
                    continue;
                }
                let di = f[i * w];
                let fac = lji * di;
                // entries (j..=i+hb, j) receive -L[r,i] * fac
                let top = (i + hb).min(n - 1);
                let len = top - j;
                let src = i * w + k;
                let dst = j * w;
                for r in 0..=len {
                    f[dst + r] -= f[src + r] * fac;
                }
            }
            let dj = f[j * w];
            if dj == 0.0 || !dj.is_finite() {
                return None;
            }
            if dj < 0.0 {
                negatives += 1;
            }
            // scale column j to L entries
            let top = (j + hb).min(n - 1);
            for r in 1..=(top - j) {
                f[j * w + r] /= dj;
            }
        }
        Some(negatives)
    }

    pub fn count_in(&self, iv: &Interval) -> usize {
        // closed interval: nudge endpoints outward by ulp-scale
        let eps = 1e-12;
        let lo = iv.lo - eps * (1.0 + iv.lo.abs());
        let hi = iv.hi + eps * (1.0 + iv.hi.abs());
        self.count_below(hi) - self.count_below(lo)
    }
}

// ---------------------------------------------------------------------------
// 2D boxes: separable base + octant-periodic perturbations
// ---------------------------------------------------------------------------

/// Perturbation data for a 2D box: symmetric hopping perturbations along
/// both axes and a potential, all with sup-norm ≤ 1; applied with overall
/// strength ε. The operator bound ‖W‖ ≤ 5 follows from the five unit-norm
/// components (two hoppings, each entering twice as U±, plus the potential).
pub struct PerturbationSpec {
    pub epsilon: f64,
    pub hop_x: Vec<f64>,
    pub hop_y: Vec<f64>,
    pub pot: Vec<f64>,
    pub l: usize,
}

impl PerturbationSpec {
    /// Seeded random perturbation with all component sup-norms ≤ 1.
    pub fn random(l: usize, epsilon: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = |n: usize| -> Vec<f64> {
            (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
        };
        PerturbationSpec {
            epsilon,
            hop_x: draw(l * l),
            hop_y: draw(l * l),
            pot: draw(l * l),
            l,
        }
    }
}

/// Separable Dirichlet box H = J₁ ⊗ I + I ⊗ J₂ on sites (1..=L)², with an
/// optional perturbation, as a banded matrix (y index fastest, so the x
/// neighbor hop sits at offset L).
pub fn box2d(
    cx: &PeriodicCoefficients,
    cy: &PeriodicCoefficients,
    l: usize,
    pert: Option<&PerturbationSpec>,
) -> BandedSym {
    let n = l * l;
    let mut m = BandedSym::zeros(n, l);
    let idx = |x: usize, y: usize| (x - 1) * l + (y - 1);
    for x in 1..=l {
        for y in 1..=l {
            let s = idx(x, y);
            m.add(s, s, cx.bx(x as i64) + cy.bx(y as i64));
            if y < l {
                m.add(idx(x, y + 1), s, cy.ax(y as i64));
            }
            if x < l {
                m.add(idx(x + 1, y), s, cx.ax(x as i64));
            }
        }
    }
    if let Some(p) = pert {
        assert_eq!(p.l, l);
        for x in 1..=l {
            for y in 1..=l {
                let s = idx(x, y);
                m.add(s, s, p.epsilon * p.pot[s]);
                if y < l {
                    m.add(idx(x, y + 1), s, p.epsilon * p.hop_y[s]);
                }
                if x < l {
                    m.add(idx(x + 1, y), s, p.epsilon * p.hop_x[s]);
                }
            }
        }
    }
    m
}

/// Count eigenvalues of the (possibly perturbed) separable box inside an
/// isolation interval, before and after the perturbation.
pub fn perturb_and_count(
    cx: &PeriodicCoefficients,
    cy: &PeriodicCoefficients,
    l: usize,
    pert: &PerturbationSpec,
    iv: &Interval,
) -> Result<(usize, usize)> {
    if pert.epsilon > 0.02 {
        return Err(SpectralError::validation(
            "perturbation strength above the stability regime (ε ≤ 0.02)",
        ));
    }
    let before = box2d(cx, cy, l, None).count_in(iv);
    let after = box2d(cx, cy, l, Some(pert)).count_in(iv);
    Ok((before, after))
}

// ---------------------------------------------------------------------------
// Quadrant-assembled operators and essential-spectrum coverage
// ---------------------------------------------------------------------------

/// Box [−L, L]² with quadrant-dependent coefficients: quadrant of a site is
/// (x ≥ 1, y ≥ 1); each quadrant uses its own periodic 1D set for both axes
/// (potential b(x) + b(y), hoppings from the same set). Deep inside
/// quadrant ω the operator is the separable periodic H_ω.
pub fn quadrant_box(sets: &[PeriodicCoefficients; 4], l: usize) -> BandedSym {
    let li = l as i64;
    let side = 2 * l + 1;
    let n = side * side;
    let mut m = BandedSym::zeros(n, side);
    let idx = |x: i64, y: i64| ((x + li) as usize) * side + (y + li) as usize;
    let quad = |x: i64, y: i64| -> &PeriodicCoefficients {
        let qx = (x >= 1) as usize;
        let qy = (y >= 1) as usize;
        &sets[2 * qx + qy]
    };
    for x in -li..=li {
        for y in -li..=li {
            let s = idx(x, y);
            let c = quad(x, y);
            m.add(s, s, c.bx(x) + c.bx(y));
            if y < li {
                // hop (x,y)-(x,y+1): use the quadrant of the lower site
                m.add(idx(x, y + 1), s, c.ax(y));
            }
            if x < li {
                m.add(idx(x + 1, y), s, c.ax(x));
            }
        }
    }
    m
}

/// Merged union of Minkowski band sums σ(H_ω) = bands(c_ω) + bands(c_ω)
/// over the four quadrant operators.
pub fn quadrant_limit_spectrum(sets: &[PeriodicCoefficients; 4]) -> Result<Vec<Interval>> {
    let mut ivs: Vec<Interval> = Vec::new();
    for c in sets.iter() {
        let sb = band_edges(c)?;
        for s1 in &sb.bands {
            for s2 in &sb.bands {
                ivs.push(Interval::new(s1.lo + s2.lo, s1.hi + s2.hi));
            }
        }
    }
    Ok(merge_intervals(ivs))
}

pub fn merge_intervals(mut ivs: Vec<Interval>) -> Vec<Interval> {
    ivs.sort_by(|a, b| a.lo.partial_cmp(&b.lo).unwrap());
    let mut out: Vec<Interval> = Vec::new();
    for iv in ivs {
        match out.last_mut() {
            Some(last) if iv.lo <= last.hi + 1e-12 => last.hi = last.hi.max(iv.hi),
            _ => out.push(iv),
        }
    }
    out
}

/// Coverage statistic for the essential-spectrum union: the fraction of
/// sample points of ∪_ω σ(H_ω) that have an eigenvalue of the truncated
/// quadrant box within `tol`. Sample points keep a fixed safety margin from
/// interval ends (the same margin for every L, so the statistic is
/// comparable across the monotone-in-L sweep).
pub struct CoverageReport {
    pub l: usize,
    pub samples: usize,
    pub hits: usize,
    pub coverage: f64,
}

pub fn ess_coverage(
    sets: &[PeriodicCoefficients; 4],
    l: usize,
    tol: f64,
    margin: f64,
    max_samples: usize,
) -> Result<CoverageReport> {
    let union = quadrant_limit_spectrum(sets)?;
    // Evenly spread sample points across the union, margin-clipped.
    let total_len: f64 = union
        .iter()
        .map(|iv| (iv.len() - 2.0 * margin).max(0.0))
        .sum();
    if total_len <= 0.0 {
        return Err(SpectralError::numerical("limit spectrum thinner than the margin"));
    }
    let mut pts = Vec::new();
    for iv in &union {
        let len = iv.len() - 2.0 * margin;
        if len <= 0.0 {
            continue;
        }
        let k = ((len / total_len) * max_samples as f64).round().max(1.0) as usize;
        for i in 0..k {
            pts.push(iv.lo + margin + len * (i as f64 + 0.5) / k as f64);
        }
    }
    let m = quadrant_box(sets, l);
    let mut hits = 0usize;
    for &x in &pts {
        let cnt = m.count_below(x + tol) - m.count_below(x - tol);
        if cnt > 0 {
            hits += 1;
        }
    }
    Ok(CoverageReport {
        l,
        samples: pts.len(),
        hits,
        coverage: hits as f64 / pts.len() as f64,
    })
}
