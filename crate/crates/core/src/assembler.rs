//! Separated-variables spectra on lattice octants: Minkowski sums of 1D
//! component spectra, band clusters, designed point spectrum with
//! multiplicities, and isolation certificates.
//!
//! A designed, normalized component (bands divided by γ after shifting
//! λ_0^+ to 0) has bands s_n within O(4/γ) of the integers n = 0..p−1 and
//! one eigenvalue e_i = i−1+e₁ per gap, e₁ = 1/(4d). Sums of d such
//! spectra concentrate near a three-rung ladder per unit cell:
//!
//! ```text
//! K_n^0 ~ n          (d bands)
//! K_n^1 ~ n + e₁     (one eigenvalue + bands)
//! K_n^2 ~ n + 2e₁    (two eigenvalues + band, d = 3)
//! K_n^e = n + d·e₁   (d eigenvalues — true point spectrum,
//!                     multiplicity = # of index tuples)
//! ```
//!
//! Spacing e₁ = 1/(4d) keeps the rungs apart; the isolation interval
//! `I_n = [K_n^e − r, K_n^e + r]` with r = 1/(8d) then stays at distance
//! ≥ 3 from the scaled essential spectrum once γ is large enough. All
//! cluster positions here are *measured* from actual component intervals,
//! not nominal centers, so the reported distances are certificates.

use crate::bands::{band_edges, Interval};
use crate::coeffs::PeriodicCoefficients;
use crate::halfsolid::half_solid_spectrum;
use crate::oracle::merge_intervals;
use crate::states::{classify_states, StateKind};
use crate::{Result, SpectralError};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ComponentSource {
    HalfLine,
    HalfSolid,
}

/// Normalized 1D spectrum entering an assembly.
#[derive(Debug, Clone, Serialize)]
pub struct ComponentSpectrum {
    pub source: ComponentSource,
    /// sorted disjoint bands (normalized by γ)
    pub bands: Vec<Interval>,
    /// one eigenvalue per gap, e_i for i = 1..p-1 (normalized by γ)
    pub eigenvalues: Vec<f64>,
    /// vacuum band (normalized), present for half-solid sources
    pub vacuum_band: Option<Interval>,
}

impl ComponentSpectrum {
    /// Component from a designed half-line operator: requires an eigenvalue
    /// state in every gap (the designed structure).
    pub fn from_half_line(c: &PeriodicCoefficients, gamma: f64) -> Result<Self> {
        let sb = band_edges(c)?;
        let states = classify_states(c)?;
        let mut eigenvalues = Vec::new();
        for n in 1..c.p {
            match states.iter().find(|s| s.n == n) {
                Some(s) if s.kind == StateKind::Eigenvalue => eigenvalues.push(s.mu / gamma),
                _ => {
                    return Err(SpectralError::validation(format!(
                        "component structure violated: no eigenvalue state in gap {n}"
                    )))
                }
            }
        }
        Ok(ComponentSpectrum {
            source: ComponentSource::HalfLine,
            bands: sb
                .bands
                .iter()
                .map(|s| Interval::new(s.lo / gamma, s.hi / gamma))
                .collect(),
            eigenvalues,
            vacuum_band: None,
        })
    }

    /// Component from a half-solid operator at vacuum level τ: eigenvalues
    /// are the Wronskian zeros μ_n(τ); the vacuum band is carried along for
    /// window bookkeeping.
    pub fn from_half_solid(c: &PeriodicCoefficients, tau: f64, gamma: f64) -> Result<Self> {
        let hs = half_solid_spectrum(c, tau)?;
        let p = c.p;
        let mut eigenvalues = Vec::new();
        for n in 1..p {
            match hs.eigenvalues.iter().find(|e| e.n == n) {
                Some(e) => eigenvalues.push(e.mu_tau / gamma),
                None => {
                    return Err(SpectralError::validation(format!(
                        "component structure violated: no half-solid eigenvalue in gap {n}"
                    )))
                }
            }
        }
        let periodic_bands: Vec<Interval> = hs.bands[..p]
            .iter()
            .map(|s| Interval::new(s.lo / gamma, s.hi / gamma))
            .collect();
        Ok(ComponentSpectrum {
            source: ComponentSource::HalfSolid,
            bands: periodic_bands,
            eigenvalues,
            vacuum_band: Some(Interval::new((tau - 2.0) / gamma, (tau + 2.0) / gamma)),
        })
    }
}

/// Exact union of pairwise interval sums, merged and sorted.
pub fn minkowski_sum(a: &[Interval], b: &[Interval]) -> Vec<Interval> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for x in a {
        for y in b {
            out.push(Interval::new(x.lo + y.lo, x.hi + y.hi));
        }
    }
    merge_intervals(out)
}

/// A labeled cluster: the merged hull of all sums sharing the label n.
#[derive(Debug, Clone, Serialize)]
pub struct Cluster {
    pub n: usize,
    /// nominal center in normalized units (n, n+e₁ or n+2e₁)
    pub nominal_center: f64,
    pub hull: Interval,
    /// number of elementary sums merged into the hull
    pub parts: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct PointSpectrumEntry {
    pub n: usize,
    /// nominal K_n^e = n + d·e₁
    pub nominal: f64,
    /// measured mean of the d-fold eigenvalue sums
    pub value: f64,
    pub multiplicity: usize,
    pub spread: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct IsolationEntry {
    pub n: usize,
    /// normalized isolation interval I_n = [K_n^e − r, K_n^e + r]
    pub interval: Interval,
    /// scaled interval γ·I_n
    pub scaled: Interval,
    /// measured distance of γ·I_n to the scaled essential spectrum
    pub distance: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClusterReport {
    pub d: usize,
    pub gamma: f64,
    pub e1: f64,
    pub clusters0: Vec<Cluster>,
    pub clusters1: Vec<Cluster>,
    pub clusters2: Vec<Cluster>,
    pub point_spectrum: Vec<PointSpectrumEntry>,
    pub isolation: Vec<IsolationEntry>,
    /// merged essential spectrum (normalized units)
    pub essential: Vec<Interval>,
    /// energy window (normalized) to which a mixed-domain report is
    /// restricted, if any
    pub window: Option<Interval>,
    /// vacuum-band sums excluded by the window, if any
    pub excluded_vacuum: bool,
}

struct LabeledSums {
    clusters0: Vec<Cluster>,
    clusters1: Vec<Cluster>,
    clusters2: Vec<Cluster>,
    points: Vec<PointSpectrumEntry>,
    essential: Vec<Interval>,
}

fn labeled_sums(d: usize, comps: &[&ComponentSpectrum], e1: f64) -> LabeledSums {
    // Collect elementary sums with cluster labels. Band index = n (0-based),
    // eigenvalue index i contributes i−1 to the label.
    let mut c0: Vec<(usize, Interval)> = Vec::new();
    let mut c1: Vec<(usize, Interval)> = Vec::new();
    let mut c2: Vec<(usize, Interval)> = Vec::new();
    let mut pts: Vec<(usize, f64)> = Vec::new();

    // enumerate tuples: each axis contributes either band n_k or eigenvalue
    // i_k; classify by how many eigenvalue factors are used
    let axes: Vec<(Vec<(usize, Interval)>, Vec<(usize, f64)>)> = comps
        .iter()
        .map(|cmp| {
            let bands: Vec<(usize, Interval)> =
                cmp.bands.iter().cloned().enumerate().collect();
            let eigs: Vec<(usize, f64)> = cmp
                .eigenvalues
                .iter()
                .cloned()
                .enumerate()
                .map(|(i, e)| (i, e)) // i = 0-based, label contribution = i
                .collect();
            (bands, eigs)
        })
        .collect();

    // recursive enumeration over d axes
    fn recurse(
        axes: &[(Vec<(usize, Interval)>, Vec<(usize, f64)>)],
        k: usize,
        label: usize,
        neig: usize,
        lo: f64,
        hi: f64,
        out: &mut Vec<(usize, usize, Interval)>,
    ) {
        if k == axes.len() {
            out.push((neig, label, Interval::new(lo, hi)));
            return;
        }
        for (n, iv) in &axes[k].0 {
            recurse(axes, k + 1, label + n, neig, lo + iv.lo, hi + iv.hi, out);
        }
        for (i, e) in &axes[k].1 {
            recurse(axes, k + 1, label + i, neig + 1, lo + e, hi + e, out);
        }
    }
    let mut all = Vec::new();
    recurse(&axes, 0, 0, 0, 0.0, 0.0, &mut all);

    let mut essential = Vec::new();
    for (neig, label, iv) in all {
        match neig {
            0 => c0.push((label, iv)),
            1 => c1.push((label, iv)),
            2 if d == 3 => c2.push((label, iv)),
            k if k == d => pts.push((label, iv.lo)),
            _ => unreachable!("d = {d}, {neig} eigenvalue factors"),
        }
    }
    for (_, iv) in c0.iter().chain(c1.iter()).chain(c2.iter()) {
        essential.push(*iv);
    }
    let essential = merge_intervals(essential);

    let collect = |mut v: Vec<(usize, Interval)>, offset: f64| -> Vec<Cluster> {
        v.sort_by(|a, b| a.0.cmp(&b.0));
        let mut out: Vec<Cluster> = Vec::new();
        for (n, iv) in v {
            match out.last_mut() {
                Some(c) if c.n == n => {
                    c.hull = Interval::new(c.hull.lo.min(iv.lo), c.hull.hi.max(iv.hi));
                    c.parts += 1;
                }
                _ => out.push(Cluster {
                    n,
                    nominal_center: n as f64 + offset,
                    hull: iv,
                    parts: 1,
                }),
            }
        }
        out
    };
    let clusters0 = collect(c0, 0.0);
    let clusters1 = collect(c1, e1);
    let clusters2 = collect(c2, 2.0 * e1);

    pts.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.partial_cmp(&b.1).unwrap()));
    let mut points: Vec<PointSpectrumEntry> = Vec::new();
    for (n, v) in pts {
        match points.last_mut() {
            Some(p) if p.n == n => {
                let lo = (p.value * p.multiplicity as f64 + v) / (p.multiplicity + 1) as f64;
                p.spread = p.spread.max((v - p.value).abs());
                p.value = lo;
                p.multiplicity += 1;
            }
            _ => points.push(PointSpectrumEntry {
                n,
                nominal: n as f64 + d as f64 * e1,
                value: v,
                multiplicity: 1,
                spread: 0.0,
            }),
        }
    }
    LabeledSums {
        clusters0,
        clusters1,
        clusters2,
        points,
        essential,
    }
}

fn build_report(
    d: usize,
    comps: &[&ComponentSpectrum],
    gamma: f64,
    window: Option<Interval>,
    excluded_vacuum: bool,
) -> ClusterReport {
    let e1 = 1.0 / (4.0 * d as f64);
    let sums = labeled_sums(d, comps, e1);
    let r = 1.0 / (8.0 * d as f64);
    let in_window = |x: f64| window.map_or(true, |w| w.contains(x));
    let clip = |v: Vec<Cluster>| -> Vec<Cluster> {
        v.into_iter().filter(|c| in_window(c.hull.mid())).collect()
    };
    let points: Vec<PointSpectrumEntry> = sums
        .points
        .into_iter()
        .filter(|p| in_window(p.value))
        .collect();
    let isolation = points
        .iter()
        .map(|p| {
            let iv = Interval::new(p.value - r, p.value + r);
            let dist = sums
                .essential
                .iter()
                .map(|ess| iv.dist(ess))
                .fold(f64::INFINITY, f64::min)
                * gamma;
            IsolationEntry {
                n: p.n,
                interval: iv,
                scaled: Interval::new(iv.lo * gamma, iv.hi * gamma),
                distance: dist,
            }
        })
        .collect();
    ClusterReport {
        d,
        gamma,
        e1,
        clusters0: clip(sums.clusters0),
        clusters1: clip(sums.clusters1),
        clusters2: clip(sums.clusters2),
        point_spectrum: points,
        isolation,
        essential: sums.essential,
        window,
        excluded_vacuum,
    }
}

/// Assemble d identical-structure half-line components on ℤ₊^d.
pub fn assemble(d: usize, comps: &[ComponentSpectrum], gamma: f64) -> Result<ClusterReport> {
    if !(d == 2 || d == 3) {
        return Err(SpectralError::validation("assembly dimension must be 2 or 3"));
    }
    if comps.len() != d {
        return Err(SpectralError::validation(format!(
            "need {d} components, got {}",
            comps.len()
        )));
    }
    let refs: Vec<&ComponentSpectrum> = comps.iter().collect();
    Ok(build_report(d, &refs, gamma, None, false))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MixedDomain {
    /// ℤ₊ × ℤ: one half-line and one half-solid component
    HalfPlaneCross,
    /// ℤ²: two half-solid components
    FullPlane,
}

/// Mixed-domain assembly: half-solid components mirror the half-line
/// structure on the energy window [0, 2 λ_{top}]/γ; vacuum-band sums are
/// excluded by the window, which requires the vacuum band itself to stay
/// above the window.
pub fn assemble_mixed(
    domain: MixedDomain,
    comps: &[ComponentSpectrum],
    gamma: f64,
) -> Result<ClusterReport> {
    if comps.len() != 2 {
        return Err(SpectralError::validation("mixed domains are two-dimensional"));
    }
    let need_solid = match domain {
        MixedDomain::HalfPlaneCross => 1,
        MixedDomain::FullPlane => 2,
    };
    let solid = comps
        .iter()
        .filter(|c| c.source == ComponentSource::HalfSolid)
        .count();
    if solid != need_solid {
        return Err(SpectralError::validation(format!(
            "domain needs {need_solid} half-solid component(s), got {solid}"
        )));
    }
    // window: [0, 2·top of the periodic bands]
    let top = comps
        .iter()
        .flat_map(|c| c.bands.iter().map(|b| b.hi))
        .fold(f64::NEG_INFINITY, f64::max);
    let window = Interval::new(0.0, 2.0 * top);
    for c in comps {
        if let Some(v) = c.vacuum_band {
            if v.lo <= window.hi {
                return Err(SpectralError::validation(format!(
                    "vacuum band [{:.3}, {:.3}] intrudes into the window [0, {:.3}]: raise τ",
                    v.lo, v.hi, window.hi
                )));
            }
        }
    }
    let refs: Vec<&ComponentSpectrum> = comps.iter().collect();
    Ok(build_report(2, &refs, gamma, Some(window), true))
}

#[derive(Debug, Clone, Serialize)]
pub struct CountCertificate {
    pub count: usize,
    pub isolation_distance: f64,
    pub spectrum_below: bool,
    pub spectrum_above: bool,
}

/// Count designed point spectrum inside a scaled interval I ⊆ 𝔍_{n,γ},
/// with the isolation certificate. Refuses intervals overlapping any
/// essential-spectrum cluster.
pub fn eigenvalues_in_interval(
    report: &ClusterReport,
    iv: &Interval,
) -> Result<CountCertificate> {
    let gamma = report.gamma;
    let scaled_ess: Vec<Interval> = report
        .essential
        .iter()
        .map(|e| Interval::new(e.lo * gamma, e.hi * gamma))
        .collect();
    for ess in &scaled_ess {
        if iv.dist(ess) == 0.0 {
            return Err(SpectralError::validation(format!(
                "interval [{}, {}] overlaps essential cluster [{}, {}]",
                iv.lo, iv.hi, ess.lo, ess.hi
            )));
        }
    }
    let mut count = 0usize;
    let mut dist = f64::INFINITY;
    for p in &report.point_spectrum {
        let val = p.value * gamma;
        if iv.contains(val) {
            count += p.multiplicity;
            if let Some(entry) = report.isolation.iter().find(|i| i.n == p.n) {
                dist = dist.min(entry.distance);
            }
        }
    }
    if !dist.is_finite() {
        dist = scaled_ess
            .iter()
            .map(|e| iv.dist(e))
            .fold(f64::INFINITY, f64::min);
    }
    let below = scaled_ess.iter().any(|e| e.hi < iv.lo);
    let above = scaled_ess.iter().any(|e| e.lo > iv.hi);
    Ok(CountCertificate {
        count,
        isolation_distance: dist,
        spectrum_below: below,
        spectrum_above: above,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_component(p: usize, d: usize) -> ComponentSpectrum {
        // idealized normalized component: bands [n-0.005, n+0.005],
        // eigenvalues exactly at i-1+e1
        let e1 = 1.0 / (4.0 * d as f64);
        ComponentSpectrum {
            source: ComponentSource::HalfLine,
            bands: (0..p)
                .map(|n| Interval::new(n as f64 - 0.005, n as f64 + 0.005))
                .collect(),
            eigenvalues: (1..p).map(|i| (i - 1) as f64 + e1).collect(),
            vacuum_band: None,
        }
    }

    #[test]
    fn minkowski_sum_examples() {
        let s = minkowski_sum(
            &[Interval::new(0.0, 1.0)],
            &[Interval::new(10.0, 11.0)],
        );
        assert_eq!(s.len(), 1);
        assert_eq!((s[0].lo, s[0].hi), (10.0, 12.0));
        let s = minkowski_sum(
            &[Interval::new(0.0, 1.0), Interval::new(5.0, 6.0)],
            &[Interval::new(0.0, 1.0)],
        );
        assert_eq!(s.len(), 2);
        assert_eq!((s[0].lo, s[0].hi), (0.0, 2.0));
        assert_eq!((s[1].lo, s[1].hi), (5.0, 7.0));
    }

    #[test]
    fn d2_point_spectrum_multiplicities() {
        let c = toy_component(8, 2);
        let rep = assemble(2, &[c.clone(), c], 200.0).unwrap();
        // K_0^e = 2 e1 = 1/4 with multiplicity 1
        let p0 = &rep.point_spectrum[0];
        assert_eq!(p0.n, 0);
        assert_eq!(p0.multiplicity, 1);
        assert!((p0.value - 0.25).abs() < 1e-12);
        // n = 3: multiplicity 4
        let p3 = rep.point_spectrum.iter().find(|p| p.n == 3).unwrap();
        assert_eq!(p3.multiplicity, 4);
        assert!((p3.value - 3.25).abs() < 1e-12);
        // multiplicity n+1 for n ≤ p-2
        for n in 0..=6 {
            let p = rep.point_spectrum.iter().find(|p| p.n == n).unwrap();
            assert_eq!(p.multiplicity, n + 1);
        }
    }

    #[test]
    fn d3_composition_counts() {
        let c = toy_component(8, 3);
        let rep = assemble(3, &[c.clone(), c.clone(), c], 200.0).unwrap();
        let e1 = 1.0 / 12.0;
        let p0 = rep.point_spectrum.iter().find(|p| p.n == 0).unwrap();
        assert_eq!(p0.multiplicity, 1);
        assert!((p0.value - 3.0 * e1).abs() < 1e-12);
        let p1 = rep.point_spectrum.iter().find(|p| p.n == 1).unwrap();
        assert_eq!(p1.multiplicity, 3);
        assert!((p1.value - (1.0 + 3.0 * e1)).abs() < 1e-12);
        // cluster ladder centers
        let k2 = rep.clusters2.iter().find(|c| c.n == 1).unwrap();
        assert!((k2.nominal_center - (1.0 + 2.0 * e1)).abs() < 1e-12);
    }

    #[test]
    fn isolation_and_counting() {
        let c = toy_component(8, 2);
        let rep = assemble(2, &[c.clone(), c], 200.0).unwrap();
        let iso3 = rep.isolation.iter().find(|i| i.n == 3).unwrap();
        assert!(iso3.distance >= 3.0, "distance {}", iso3.distance);
        let cert = eigenvalues_in_interval(&rep, &iso3.scaled).unwrap();
        assert_eq!(cert.count, 4);
        assert!(cert.spectrum_below && cert.spectrum_above);
        // between clusters: zero
        let mid = Interval::new(200.0 * 3.6, 200.0 * 3.9);
        let cert0 = eigenvalues_in_interval(&rep, &mid).unwrap();
        assert_eq!(cert0.count, 0);
        // overlapping a cluster: refusal
        assert!(eigenvalues_in_interval(&rep, &Interval::new(199.0, 201.0)).is_err());
    }

    #[test]
    fn structure_error_on_missing_eigenvalue() {
        let mut c = toy_component(4, 2);
        c.eigenvalues.pop();
        // assemble itself doesn't recheck counts against p (it has no p);
        // from_half_line does the structural check — here just verify the
        // mixed-domain guards
        let c2 = toy_component(4, 2);
        assert!(assemble(2, &[c2.clone()], 200.0).is_err());
        assert!(assemble(4, &[c2.clone(), c2.clone()], 200.0).is_err());
    }

    #[test]
    fn mixed_domain_window_guard() {
        let mut c = toy_component(8, 2);
        // fake a half-solid component whose vacuum band sits inside the window
        c.source = ComponentSource::HalfSolid;
        c.vacuum_band = Some(Interval::new(10.0, 14.0));
        let cl = toy_component(8, 2);
        assert!(assemble_mixed(MixedDomain::HalfPlaneCross, &[cl.clone(), c.clone()], 200.0).is_err());
        // vacuum far above the window: fine, and window clips to [0, 2·top]
        let mut ok = c.clone();
        ok.vacuum_band = Some(Interval::new(50.0, 54.0));
        let rep = assemble_mixed(MixedDomain::HalfPlaneCross, &[cl, ok], 200.0).unwrap();
        assert!(rep.window.is_some());
        let w = rep.window.unwrap();
        for p in &rep.point_spectrum {
            assert!(w.contains(p.value));
        }
    }
}
