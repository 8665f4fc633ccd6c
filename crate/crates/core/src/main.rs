//! Command-line front end for the octant spectral toolkit.
//!
//! Every subcommand reads periodic coefficient sets in the JSON format
//! `{"p": int, "a": [p floats], "b": [p floats], "shift": float}` and emits
//! a single JSON document on stdout (or to `--out`). `--table` / `--csv`
//! switch the tabular subcommands to human- or machine-readable tables.
//!
//! Exit codes: 0 success, 2 validation / input error, 3 numerical solver
//! failure.

use clap::{Args, Parser, Subcommand};
use octant_spectral::assembler::{
    assemble, assemble_mixed, eigenvalues_in_interval, ComponentSpectrum, MixedDomain,
};
use octant_spectral::bands::{band_edges, gap_heights, quasimomentum, Interval};
use octant_spectral::coeffs::PeriodicCoefficients;
use octant_spectral::gapmap::{design_uniform, forward_gap_map, DesignSpec};
use octant_spectral::halfsolid::{fit_asymptotics, half_solid_spectrum};
use octant_spectral::oracle::{
    count_in_interval, ess_coverage, perturb_and_count, quadrant_box, quadrant_limit_spectrum,
    truncate_and_diagonalize, PerturbationSpec, TruncationSpec,
};
use octant_spectral::states::classify_states;
use octant_spectral::{Result, SpectralError};
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "octant",
    version,
    about = "Spectral computations for periodic Jacobi operators on lattice octants"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Write the JSON document to this file instead of stdout
    #[arg(long, global = true)]
    out: Option<std::path::PathBuf>,
    /// Tolerance for interval counting / coverage checks
    #[arg(long, global = true, default_value_t = 0.05)]
    tol: f64,
    /// Seed for random perturbations
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Render the main result as an aligned table
    #[arg(long, global = true)]
    table: bool,
    /// Render the main result as CSV
    #[arg(long, global = true)]
    csv: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Band edges, gaps, gap heights and quasimomentum of a periodic set
    Bands {
        /// Coefficient JSON file
        #[arg(long)]
        coeffs: std::path::PathBuf,
        /// Report the quasimomentum k(λ) at this energy
        #[arg(long)]
        momentum: Option<f64>,
    },
    /// Dirichlet values and gap-state classification (eigenvalue /
    /// resonance / virtual state)
    States {
        #[arg(long)]
        coeffs: std::path::PathBuf,
    },
    /// Design a period-p operator with p−1 uniform gaps of length γ and all
    /// gap states on one sheet
    Design {
        #[arg(long)]
        p: usize,
        #[arg(long)]
        gamma: f64,
        /// Target assembly dimension (sets the state position offset 1/(4·dim))
        #[arg(long, default_value_t = 2)]
        dim: usize,
        /// +1: eigenvalues, -1: resonances
        #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
        sheet: i32,
    },
    /// Half-solid operator (vacuum level τ on the left): gap eigenvalues
    /// μ_n(τ) and their 1/τ asymptotics
    Halfsolid {
        #[arg(long)]
        coeffs: std::path::PathBuf,
        #[arg(long)]
        tau: f64,
        /// Also fit μ_n(τ) − μ_n ~ −c(μ_n)/τ over τ·{1,2,4,8}
        #[arg(long)]
        fit: bool,
    },
    /// Cluster spectrum of a separable assembly on ℤ₊^d or a mixed domain
    Assemble {
        /// Coefficient files, one per axis (repeat the flag)
        #[arg(long, required = true)]
        coeffs: Vec<std::path::PathBuf>,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        /// octant (ℤ₊^d), halfplane (ℤ₊ × ℤ) or plane (ℤ²)
        #[arg(long, default_value = "octant")]
        domain: String,
        #[arg(long)]
        gamma: f64,
        /// Vacuum level for half-solid components (mixed domains)
        #[arg(long)]
        tau: Option<f64>,
        /// Count designed eigenvalues in this interval "lo,hi" (scaled units)
        #[arg(long)]
        interval: Option<String>,
    },
    /// Independent brute-force truncations: eigenvalue counts and coverage
    Oracle {
        /// halfline | halfsolid | box | quadrant | coverage
        #[arg(long)]
        model: String,
        #[arg(long, required = true)]
        coeffs: Vec<std::path::PathBuf>,
        /// Truncation size
        #[arg(long, default_value_t = 40)]
        l: usize,
        #[arg(long)]
        tau: Option<f64>,
        /// Count eigenvalues in "lo,hi"
        #[arg(long)]
        interval: Option<String>,
        /// Apply a seeded random perturbation of this strength (box model)
        #[arg(long)]
        perturb: Option<f64>,
    },
    /// Plan a 2-axis design whose assembled operator has exactly N
    /// eigenvalues in a prescribed interval, then re-verify it
    Certify {
        /// Target interval "lo,hi" (physical units)
        #[arg(long)]
        interval: String,
        /// Required eigenvalue count (with multiplicity)
        #[arg(long)]
        count: usize,
        #[arg(long, default_value_t = 2)]
        dim: usize,
    },
}

fn parse_interval(s: &str) -> Result<Interval> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err(SpectralError::validation(format!(
            "interval must be \"lo,hi\", got {s:?}"
        )));
    }
    let lo: f64 = parts[0]
        .trim()
        .parse()
        .map_err(|_| SpectralError::validation("interval endpoints must be numbers"))?;
    let hi: f64 = parts[1]
        .trim()
        .parse()
        .map_err(|_| SpectralError::validation("interval endpoints must be numbers"))?;
    if !(lo < hi) {
        return Err(SpectralError::validation("interval must satisfy lo < hi"));
    }
    Ok(Interval::new(lo, hi))
}

fn load_coeffs(path: &std::path::Path) -> Result<PeriodicCoefficients> {
    let s = std::fs::read_to_string(path)
        .map_err(|e| SpectralError::validation(format!("cannot read {}: {e}", path.display())))?;
    PeriodicCoefficients::from_json(&s)
}

/// Tabular output: rows of (name, columns).
struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn print(&self, csv: bool) {
        if csv {
            println!("{}", self.header.join(","));
            for r in &self.rows {
                println!("{}", r.join(","));
            }
            return;
        }
        let mut w: Vec<usize> = self.header.iter().map(|h| h.len()).collect();
        for r in &self.rows {
            for (i, c) in r.iter().enumerate() {
                w[i] = w[i].max(c.len());
            }
        }
        let line = |cells: &[String]| {
            cells
                .iter()
                .enumerate()
                .map(|(i, c)| format!("{:>width$}", c, width = w[i]))
                .collect::<Vec<_>>()
                .join("  ")
        };
        println!("{}", line(&self.header));
        for r in &self.rows {
            println!("{}", line(r));
        }
    }
}

fn emit(common: &Common, doc: serde_json::Value, table: Option<Table>) -> Result<()> {
    if let Some(t) = table {
        if common.table || common.csv {
            t.print(common.csv);
            return Ok(());
        }
    }
    let s = serde_json::to_string_pretty(&doc).expect("document serializes");
    match &common.out {
        Some(p) => {
            std::fs::write(p, s.as_bytes()).map_err(|e| {
                SpectralError::validation(format!("cannot write {}: {e}", p.display()))
            })?;
            println!("wrote {}", p.display());
        }
        None => println!("{s}"),
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.cmd {
        Cmd::Bands { coeffs, momentum } => {
            let c = load_coeffs(coeffs)?;
            let sb = band_edges(&c)?;
            let heights = gap_heights(&c)?;
            let k = match momentum {
                Some(lam) => {
                    let band = sb
                        .bands
                        .iter()
                        .position(|b| b.contains(*lam))
                        .ok_or_else(|| {
                            SpectralError::validation(format!(
                                "λ = {lam} is not inside any band"
                            ))
                        })?;
                    Some(json!({
                        "lambda": lam,
                        "band": band,
                        "k": quasimomentum(&c, *lam, band)?
                    }))
                }
                None => None,
            };
            let mut t = Table {
                header: vec![
                    "band".into(),
                    "lo".into(),
                    "hi".into(),
                    "gap_after".into(),
                    "gap_height".into(),
                ],
                rows: vec![],
            };
            for (n, b) in sb.bands.iter().enumerate() {
                let (g, h) = if n < sb.gaps.len() {
                    (format!("{:.12e}", sb.gaps[n].len()), format!("{:.6}", heights[n]))
                } else {
                    ("-".into(), "-".into())
                };
                t.rows.push(vec![
                    n.to_string(),
                    format!("{:.12e}", b.lo),
                    format!("{:.12e}", b.hi),
                    g,
                    h,
                ]);
            }
            emit(
                &cli.common,
                json!({
                    "p": c.p,
                    "edges": sb.edges,
                    "bands": sb.bands,
                    "gaps": sb.gaps,
                    "total_band_length": sb.total_band_length(),
                    "gap_heights": heights,
                    "quasimomentum": k,
                }),
                Some(t),
            )
        }
        Cmd::States { coeffs } => {
            let c = load_coeffs(coeffs)?;
            let states = classify_states(&c)?;
            let psi = forward_gap_map(&c)?;
            let mut t = Table {
                header: vec![
                    "gap".into(),
                    "mu".into(),
                    "kind".into(),
                    "epsilon".into(),
                    "log_multiplier".into(),
                ],
                rows: vec![],
            };
            for s in &states {
                t.rows.push(vec![
                    s.n.to_string(),
                    format!("{:.12e}", s.mu),
                    format!("{:?}", s.kind),
                    s.epsilon.to_string(),
                    format!("{:.6}", s.log_multiplier),
                ]);
            }
            emit(
                &cli.common,
                json!({ "p": c.p, "states": states, "gap_coordinates": psi.psi }),
                Some(t),
            )
        }
        Cmd::Design { p, gamma, dim, sheet } => {
            let rep = design_uniform(
                &DesignSpec { p: *p, d: *dim, sheet: *sheet },
                *gamma,
            )?;
            // `--out` receives the bare coefficient file so it can feed the
            // other subcommands directly; the full report goes to stdout.
            if let Some(path) = &cli.common.out {
                std::fs::write(path, rep.coeffs.to_json()).map_err(|e| {
                    SpectralError::validation(format!("cannot write {}: {e}", path.display()))
                })?;
            }
            let doc = serde_json::to_value(&rep).expect("report serializes");
            println!("{}", serde_json::to_string_pretty(&doc).unwrap());
            Ok(())
        }
        Cmd::Halfsolid { coeffs, tau, fit } => {
            let c = load_coeffs(coeffs)?;
            let hs = half_solid_spectrum(&c, *tau)?;
            let fits = if *fit {
                let taus: Vec<f64> = [1.0, 2.0, 4.0, 8.0].iter().map(|m| tau * m).collect();
                Some(fit_asymptotics(&c, &taus)?)
            } else {
                None
            };
            let mut t = Table {
                header: vec!["gap".into(), "mu_tau".into(), "mu".into(), "c".into()],
                rows: vec![],
            };
            for e in &hs.eigenvalues {
                t.rows.push(vec![
                    e.n.to_string(),
                    format!("{:.12e}", e.mu_tau),
                    format!("{:.12e}", e.mu),
                    format!("{:.6e}", e.c_coefficient),
                ]);
            }
            emit(
                &cli.common,
                json!({ "spectrum": hs, "asymptotic_fits": fits }),
                Some(t),
            )
        }
        Cmd::Assemble { coeffs, dim, domain, gamma, tau, interval } => {
            let sets: Vec<PeriodicCoefficients> =
                coeffs.iter().map(|p| load_coeffs(p)).collect::<Result<_>>()?;
            let report = match domain.as_str() {
                "octant" => {
                    let comps: Vec<ComponentSpectrum> = sets
                        .iter()
                        .map(|c| ComponentSpectrum::from_half_line(c, *gamma))
                        .collect::<Result<_>>()?;
                    assemble(*dim, &comps, *gamma)?
                }
                "halfplane" | "plane" => {
                    let tau = tau.ok_or_else(|| {
                        SpectralError::validation("mixed domains require --tau")
                    })?;
                    if sets.len() != 2 {
                        return Err(SpectralError::validation(
                            "mixed domains need exactly two coefficient files",
                        ));
                    }
                    let (md, comps) = if domain == "plane" {
                        (
                            MixedDomain::FullPlane,
                            vec![
                                ComponentSpectrum::from_half_solid(&sets[0], tau, *gamma)?,
                                ComponentSpectrum::from_half_solid(&sets[1], tau, *gamma)?,
                            ],
                        )
                    } else {
                        (
                            MixedDomain::HalfPlaneCross,
                            vec![
                                ComponentSpectrum::from_half_line(&sets[0], *gamma)?,
                                ComponentSpectrum::from_half_solid(&sets[1], tau, *gamma)?,
                            ],
                        )
                    };
                    assemble_mixed(md, &comps, *gamma)?
                }
                other => {
                    return Err(SpectralError::validation(format!(
                        "unknown domain {other:?}; use octant, halfplane or plane"
                    )))
                }
            };
            let cert = match interval {
                Some(s) => {
                    let iv = parse_interval(s)?;
                    Some(json!({
                        "interval": iv,
                        "certificate": eigenvalues_in_interval(&report, &iv)?
                    }))
                }
                None => None,
            };
            emit(
                &cli.common,
                json!({ "report": report, "count": cert }),
                None,
            )
        }
        Cmd::Oracle { model, coeffs, l, tau, interval, perturb } => {
            let sets: Vec<PeriodicCoefficients> =
                coeffs.iter().map(|p| load_coeffs(p)).collect::<Result<_>>()?;
            let iv = interval.as_deref().map(parse_interval).transpose()?;
            let doc = match model.as_str() {
                "halfline" | "halfsolid" | "box" if perturb.is_none() => {
                    let spec = match model.as_str() {
                        "halfline" => TruncationSpec::HalfLine { l: *l },
                        "halfsolid" => TruncationSpec::HalfSolid {
                            l: *l,
                            tau: tau.ok_or_else(|| {
                                SpectralError::validation("halfsolid oracle requires --tau")
                            })?,
                        },
                        _ => TruncationSpec::BoxSeparable { l: *l },
                    };
                    let eigs = truncate_and_diagonalize(&spec, &sets)?;
                    let count = iv.as_ref().map(|i| count_in_interval(&eigs, i));
                    let window: Vec<f64> = match &iv {
                        Some(i) => eigs.iter().copied().filter(|x| i.contains(*x)).collect(),
                        None => eigs.iter().copied().take(50).collect(),
                    };
                    json!({
                        "model": model, "l": l, "n_eigenvalues": eigs.len(),
                        "count_in_interval": count, "eigenvalues": window,
                    })
                }
                "box" => {
                    let eps = perturb.unwrap();
                    if sets.len() < 2 {
                        return Err(SpectralError::validation(
                            "perturbed box needs two coefficient files",
                        ));
                    }
                    let iv = iv.ok_or_else(|| {
                        SpectralError::validation("perturbed box requires --interval")
                    })?;
                    let pert = PerturbationSpec::random(*l, eps, cli.common.seed);
                    let (before, after) =
                        perturb_and_count(&sets[0], &sets[1], *l, &pert, &iv)?;
                    json!({
                        "model": "box", "l": l, "epsilon": eps, "seed": cli.common.seed,
                        "interval": iv, "count_before": before, "count_after": after,
                    })
                }
                "quadrant" | "coverage" => {
                    if sets.len() != 4 {
                        return Err(SpectralError::validation(
                            "quadrant models need four coefficient files (one per quadrant)",
                        ));
                    }
                    let arr: [PeriodicCoefficients; 4] = [
                        sets[0].clone(),
                        sets[1].clone(),
                        sets[2].clone(),
                        sets[3].clone(),
                    ];
                    if model == "coverage" {
                        let rep = ess_coverage(&arr, *l, cli.common.tol, 0.075, 60)?;
                        json!({
                            "model": "coverage", "l": rep.l, "samples": rep.samples,
                            "hits": rep.hits, "coverage": rep.coverage,
                            "limit_spectrum": quadrant_limit_spectrum(&arr)?,
                        })
                    } else {
                        let m = quadrant_box(&arr, *l);
                        let iv = iv.ok_or_else(|| {
                            SpectralError::validation("quadrant model requires --interval")
                        })?;
                        json!({
                            "model": "quadrant", "l": l, "interval": iv,
                            "count_in_interval": m.count_in(&iv),
                        })
                    }
                }
                other => {
                    return Err(SpectralError::validation(format!(
                        "unknown oracle model {other:?}"
                    )))
                }
            };
            emit(&cli.common, doc, None)
        }
        Cmd::Certify { interval, count, dim } => {
            let iv = parse_interval(interval)?;
            let doc = certify(&iv, *count, *dim, &cli.common)?;
            emit(&cli.common, doc, None)
        }
    }
}

/// Plan, build and re-verify a design whose assembled ℤ₊^d operator has
/// exactly `count` eigenvalues (with multiplicity) in `iv`.
fn certify(iv: &Interval, count: usize, dim: usize, common: &Common) -> Result<serde_json::Value> {
    if !(dim == 2 || dim == 3) {
        return Err(SpectralError::validation("certification dimension must be 2 or 3"));
    }
    let gamma = (8.0 * iv.len()).min(200.0);
    if gamma < 16.0 {
        return Err(SpectralError::validation(format!(
            "interval too short to isolate eigenvalues: |I| = {:.4}, minimal achievable |I| = 2",
            iv.len()
        )));
    }
    // multiplicity of the n-th designed point on ℤ₊^d = number of index
    // tuples summing to n (n+1 for d = 2; composition counts for d = 3)
    let mult = |n: usize| -> usize {
        if dim == 2 {
            n + 1
        } else {
            (0..=n).map(|k| n - k + 1).sum()
        }
    };
    let (n, p) = if count == 0 {
        (0usize, 8usize)
    } else {
        let n = (0..64)
            .find(|&n| mult(n) == count)
            .ok_or_else(|| {
                SpectralError::validation(format!(
                    "count {count} is not an achievable multiplicity on ℤ₊^{dim} \
                     (achievable: {:?} …)",
                    (0..6).map(mult).collect::<Vec<_>>()
                ))
            })?;
        (n, 8.max(n + 2))
    };
    let rep = design_uniform(&DesignSpec { p, d: dim, sheet: 1 }, gamma)?;
    let e1 = rep.e1;
    // target normalized position: the designed point n + d·e₁ for count > 0,
    // or the dead zone between that point and the next band cluster for 0
    let pos = if count == 0 {
        0.5 * (dim as f64 * e1 + 1.0 / (8.0 * dim as f64) + 1.0) // midway to cluster 1
    } else {
        n as f64 + dim as f64 * e1
    };
    let extra_shift = iv.mid() - gamma * pos;
    // the shift rides on one axis; the others use the design as-is
    let cx = rep.coeffs.with_extra_shift(extra_shift);
    let mut comps = vec![ComponentSpectrum::from_half_line(&cx, gamma)?];
    for _ in 1..dim {
        comps.push(ComponentSpectrum::from_half_line(&rep.coeffs, gamma)?);
    }
    let report = assemble(dim, &comps, gamma)?;
    // the assembler works in normalized units of the *unshifted* ladder;
    // count in the scaled interval directly
    let cert = eigenvalues_in_interval(&report, iv)?;
    if cert.count != count {
        return Err(SpectralError::numerical(format!(
            "plan places {} eigenvalues in the interval, wanted {count}",
            cert.count
        )));
    }
    if cert.isolation_distance < 3.0 {
        let dn = cert.isolation_distance / gamma;
        let min_len = if dn > 0.0 { (3.0 / (8.0 * dn)).max(2.0) } else { f64::INFINITY };
        return Err(SpectralError::validation(format!(
            "isolation distance {:.3} < 3 at |I| = {:.4}; minimal achievable |I| ≈ {:.3}",
            cert.isolation_distance,
            iv.len(),
            min_len
        )));
    }
    // independent re-verification: Kronecker box truncation
    let l = 40usize;
    let mut axes = vec![cx.clone()];
    for _ in 1..dim {
        axes.push(rep.coeffs.clone());
    }
    let eigs = truncate_and_diagonalize(&TruncationSpec::BoxSeparable { l }, &axes)?;
    let oracle_count = count_in_interval(&eigs, iv);
    if oracle_count != count {
        return Err(SpectralError::numerical(format!(
            "oracle truncation finds {oracle_count} eigenvalues, wanted {count}"
        )));
    }
    let _ = common;
    Ok(json!({
        "interval": iv,
        "requested_count": count,
        "dim": dim,
        "gamma": gamma,
        "cluster_index": n,
        "extra_shift": extra_shift,
        "coeffs_shifted_axis": cx,
        "coeffs_other_axes": rep.coeffs,
        "design_residual": rep.residual,
        "certificate": cert,
        "oracle_box_l": l,
        "oracle_count": oracle_count,
    }))
}

fn main() {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(match e {
                SpectralError::Validation(_) => 2,
                SpectralError::Numerical(_) => 3,
            });
        }
    }
}
