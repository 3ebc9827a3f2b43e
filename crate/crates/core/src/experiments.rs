//! Family sweeps, log-log exponent fits and per-domain stability reports.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::{ledger, tau, ConstantLedger, LedgerInputs, DEFAULT_THETA};
use crate::deviation::{
    deviation_field, oscillation_bound_check, rayleigh_estimate_on, select_center, CenterStrategy,
    OscillationBoundRecord,
};
use crate::error::{Error, Result};
use crate::geometry::{build_domain, radii_about, summary_from_grid, Domain, DomainSpec, GeometrySummary};
use crate::identities::{
    check_pointwise, check_stability_inequalities, deficits, sample, verify_all, verify_h_fundamental, verify_hk,
    verify_idwps, DeficitKind, DeficitReport, GridOrders, Grids, IdentityReport, StabilityRecord, Violation,
};
use crate::torsion::{gradient_bound, solve_adaptive, DEFAULT_DEGREE};

/// Rows whose worst relative identity residual exceeds this are excluded.
pub const ROW_RESIDUAL_LIMIT: f64 = 1e-5;
/// A row enters the fit only if its deficit exceeds this multiple of the identity residual.
pub const NOISE_FLOOR_FACTOR: f64 = 10.0;
pub const MIN_FIT_ROWS: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FamilyKind {
    /// Axes `base(1+ε)` and `base(1+ε)^{−1/(N−1)}` (N − 1 times): constant volume.
    EllipsoidEccentric { dim: usize, base: f64 },
    /// `r(θ) = base (1 + ε cos kθ)`.
    FourierPerturb { base: f64, mode: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub family: FamilyKind,
    /// Strictly decreasing, positive.
    pub eps: Vec<f64>,
    #[serde(default = "default_center")]
    pub center: CenterStrategy,
    /// Grid orders; dimension defaults when absent.
    #[serde(default)]
    pub orders: Option<GridOrders>,
    #[serde(default = "default_degree")]
    pub degree: usize,
    pub deficit: DeficitKind,
    #[serde(default = "default_theta")]
    pub theta: f64,
}

fn default_center() -> CenterStrategy {
    CenterStrategy::ArgminU
}

fn default_degree() -> usize {
    DEFAULT_DEGREE
}

fn default_theta() -> f64 {
    DEFAULT_THETA
}

impl FamilySpec {
    pub fn new(family: FamilyKind, eps: Vec<f64>, deficit: DeficitKind) -> Self {
        FamilySpec {
            family,
            eps,
            center: default_center(),
            orders: None,
            degree: DEFAULT_DEGREE,
            deficit,
            theta: DEFAULT_THETA,
        }
    }

    pub fn dim(&self) -> usize {
        match self.family {
            FamilyKind::EllipsoidEccentric { dim, .. } => dim,
            FamilyKind::FourierPerturb { .. } => 2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.eps.is_empty() || self.eps.iter().any(|&e| !(e > 0.0 && e.is_finite())) {
            return Err(Error::InvalidParameter("eps entries must be positive and finite".into()));
        }
        if self.eps.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::InvalidParameter("eps list must be strictly decreasing".into()));
        }
        if self.eps.len() < MIN_FIT_ROWS {
            return Err(Error::TooFewPoints { usable: self.eps.len(), needed: MIN_FIT_ROWS });
        }
        match self.family {
            FamilyKind::EllipsoidEccentric { dim, base } => {
                if dim < 2 {
                    return Err(Error::InvalidDimension(dim));
                }
                if !(base > 0.0) {
                    return Err(Error::InvalidParameter(format!("base radius {base} must be positive")));
                }
            }
            FamilyKind::FourierPerturb { base, mode } => {
                if !(base > 0.0) {
                    return Err(Error::InvalidParameter(format!("base radius {base} must be positive")));
                }
                if mode == 0 {
                    return Err(Error::InvalidParameter("perturbation mode must be at least 1".into()));
                }
                if let Some(&e) = self.eps.first().filter(|&&e| e >= 1.0) {
                    return Err(Error::InvalidParameter(format!("amplitude {e} leaves the star-shaped class")));
                }
            }
        }
        if !(0.0..1.0).contains(&self.theta) || self.theta == 0.0 {
            return Err(Error::InvalidTheta(self.theta));
        }
        Ok(())
    }

    /// The member of the family at `eps`.
    pub fn domain_spec(&self, eps: f64) -> DomainSpec {
        match self.family {
            FamilyKind::EllipsoidEccentric { dim, base } => {
                let major = base * (1.0 + eps);
                let minor = base * (1.0 + eps).powf(-1.0 / (dim as f64 - 1.0));
                let mut axes = vec![minor; dim];
                axes[0] = major;
                DomainSpec::Ellipsoid { axes }
            }
            FamilyKind::FourierPerturb { base, mode } => {
                let mut cos = vec![0.0; mode + 1];
                cos[0] = base;
                cos[mode] = base * eps;
                DomainSpec::Fourier2d { cos, sin: vec![] }
            }
        }
    }

    fn grids(&self, domain: &Domain) -> Result<Grids> {
        match self.orders {
            Some(o) => Grids::new(domain, o.boundary, o.radial, o.angular),
            None => Grids::default_for(domain),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitRow {
    pub epsilon: f64,
    /// Ellipsoid semi-axes; empty for Fourier members.
    pub axes: Vec<f64>,
    pub deficit: f64,
    /// `ρ_e − ρ_i` about the selected center.
    pub gap: f64,
    /// `gap / deficit^{τ}` with the theorem's exponent.
    pub ratio: f64,
    /// Largest absolute residual among the verified identities.
    pub residual: f64,
    pub residual_idwps: f64,
    pub residual_hfund: f64,
    pub residual_hk: Option<f64>,
    /// Passed the noise-floor rule and entered the fit.
    pub used: bool,
}

/// A row that did not make it into the table, with the reason.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExcludedRow {
    pub epsilon: f64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub spec: FamilySpec,
    pub rows: Vec<FitRow>,
    pub excluded: Vec<ExcludedRow>,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// `τ_N` for the deficit's problem.
    pub tau: f64,
    /// Exponent in `gap ≤ C · deficit^{exponent}`: `τ_N` or `τ_N/2`.
    pub theorem_exponent: f64,
}

impl ExponentFit {
    /// Slope at least the theorem's exponent, up to `slack`.
    pub fn consistent_with_theorem(&self, slack: f64) -> bool {
        self.slope >= self.theorem_exponent - slack
    }
}

/// Ordinary least squares of `ln y` on `ln x`: `(slope, intercept, R²)`.
pub fn loglog_fit(x: &[f64], y: &[f64]) -> Result<(f64, f64, f64)> {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(a, b)| **a > 0.0 && **b > 0.0 && a.is_finite() && b.is_finite())
        .map(|(a, b)| (a.ln(), b.ln()))
        .collect();
    if pts.len() < 2 {
        return Err(Error::TooFewPoints { usable: pts.len(), needed: 2 });
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("all deficits are equal; slope undefined".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let r2 = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };
    Ok((slope, intercept, r2))
}

/// Fits already-computed rows, applying the noise-floor rule.
pub fn fit_rows(spec: &FamilySpec, mut rows: Vec<FitRow>, mut excluded: Vec<ExcludedRow>) -> Result<ExponentFit> {
    let tau_n = tau(spec.dim(), spec.deficit.problem(), spec.theta)?;
    let exponent = tau_n * spec.deficit.tau_power();
    rows.sort_by(|a, b| b.epsilon.total_cmp(&a.epsilon));
    excluded.sort_by(|a, b| b.epsilon.total_cmp(&a.epsilon));
    for r in rows.iter_mut() {
        r.used = r.deficit > NOISE_FLOOR_FACTOR * r.residual && r.gap > 0.0;
        r.ratio = if r.deficit > 0.0 { r.gap / r.deficit.powf(exponent) } else { f64::NAN };
    }
    let (x, y): (Vec<f64>, Vec<f64>) = rows.iter().filter(|r| r.used).map(|r| (r.deficit, r.gap)).unzip();
    if x.len() < MIN_FIT_ROWS {
        return Err(Error::TooFewPoints { usable: x.len(), needed: MIN_FIT_ROWS });
    }
    let (slope, intercept, r_squared) = loglog_fit(&x, &y)?;
    Ok(ExponentFit {
        spec: spec.clone(),
        rows,
        excluded,
        slope,
        intercept,
        r_squared,
        tau: tau_n,
        theorem_exponent: exponent,
    })
}

fn run_row(spec: &FamilySpec, eps: f64) -> Result<std::result::Result<FitRow, String>> {
    let dspec = spec.domain_spec(eps);
    let domain = build_domain(&dspec)?;
    let field = solve_adaptive(&domain, spec.degree).map_err(|e| Error::SolverFailure(e.to_string()))?;
    let grids = spec.grids(&domain)?;
    let summary = summary_from_grid(&grids.boundary);
    let z = select_center(&field, &spec.center, &grids.volume)?;
    let dev = deviation_field(&field, &z, 0.0)?;
    let samples = sample(&field, &grids);
    let report = deficits(&samples, &summary)?;
    let deficit = report
        .get(spec.deficit)
        .ok_or_else(|| Error::InvalidParameter(format!("{} needs a mean-convex boundary", spec.deficit.name())))?;
    let (rho_i, rho_e) = radii_about(&domain, &z)?;
    let idwps = verify_idwps(&samples, &dev, &summary);
    let hfund = verify_h_fundamental(&samples, &dev, &summary);
    let hk = if report.mean_convex { verify_hk(&samples, &summary).ok() } else { None };
    let all: Vec<&IdentityReport> = idwps.iter().chain(&hfund).chain(hk.iter().flatten()).collect();
    if let Some(bad) = all.iter().find(|r| !r.passes(ROW_RESIDUAL_LIMIT)) {
        return Ok(Err(format!("{} relative residual {:.3e} exceeds {ROW_RESIDUAL_LIMIT:e}", bad.name, bad.rel_residual)));
    }
    let max_abs = |v: &[IdentityReport]| v.iter().map(|r| r.abs_residual).fold(0.0, f64::max);
    Ok(Ok(FitRow {
        epsilon: eps,
        axes: match dspec {
            DomainSpec::Ellipsoid { axes } => axes,
            _ => vec![],
        },
        deficit,
        gap: rho_e - rho_i,
        ratio: f64::NAN,
        residual: all.iter().map(|r| r.abs_residual).fold(0.0, f64::max),
        residual_idwps: max_abs(&idwps),
        residual_hfund: max_abs(&hfund),
        residual_hk: hk.as_deref().map(max_abs),
        used: false,
    }))
}

/// Sweeps the family, one row per `ε`, with `jobs` worker threads (all cores when `None`).
pub fn run_family(spec: &FamilySpec, jobs: Option<usize>) -> Result<ExponentFit> {
    spec.validate()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        builder = builder.num_threads(j.max(1));
    }
    let pool = builder.build().map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    let outcomes: Vec<(f64, Result<std::result::Result<FitRow, String>>)> =
        pool.install(|| spec.eps.par_iter().map(|&e| (e, run_row(spec, e))).collect());
    let mut rows = Vec::new();
    let mut excluded = Vec::new();
    for (epsilon, outcome) in outcomes {
        match outcome {
            Ok(Ok(row)) => rows.push(row),
            Ok(Err(reason)) => excluded.push(ExcludedRow { epsilon, reason }),
            Err(e @ (Error::SolverFailure(_) | Error::IllConditioned { .. })) => {
                excluded.push(ExcludedRow { epsilon, reason: e.to_string() })
            }
            Err(e) => return Err(e),
        }
    }
    fit_rows(spec, rows, excluded)
}

pub const CSV_FORMAT: &str = "#format=fit-v1";

/// Fixed-width scientific notation with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

/// One row per `ε`, plus the fit summary as trailing comment lines.
pub fn fit_csv(fit: &ExponentFit) -> String {
    let dim = fit.spec.dim();
    let axes_cols = match fit.spec.family {
        FamilyKind::EllipsoidEccentric { .. } => dim,
        FamilyKind::FourierPerturb { .. } => 0,
    };
    let mut s = String::new();
    writeln!(s, "{CSV_FORMAT}").unwrap();
    let mut header = vec!["epsilon".to_string()];
    header.extend((1..=axes_cols).map(|i| format!("a{i}")));
    header.extend(
        ["deficit_name", "deficit", "gap", "local_slope", "ratio", "residual_idwps", "residual_hfund", "residual_hk", "used"]
            .map(String::from),
    );
    writeln!(s, "{}", header.join(",")).unwrap();
    let mut prev: Option<&FitRow> = None;
    for r in &fit.rows {
        let local = match prev {
            Some(p) if r.used && p.used => (r.gap / p.gap).ln() / (r.deficit / p.deficit).ln(),
            _ => f64::NAN,
        };
        let mut cols = vec![fmt17(r.epsilon)];
        cols.extend((0..axes_cols).map(|i| r.axes.get(i).map_or("nan".into(), |&a| fmt17(a))));
        cols.push(fit.spec.deficit.name().into());
        cols.extend([r.deficit, r.gap, local, r.ratio, r.residual_idwps, r.residual_hfund].map(fmt17));
        cols.push(r.residual_hk.map_or("nan".into(), fmt17));
        cols.push(if r.used { "1" } else { "0" }.into());
        writeln!(s, "{}", cols.join(",")).unwrap();
        prev = Some(r);
    }
    for e in &fit.excluded {
        writeln!(s, "#excluded,{},{}", fmt17(e.epsilon), e.reason.replace(',', ";")).unwrap();
    }
    writeln!(
        s,
        "#fit,slope={},intercept={},r_squared={},tau={},theorem_exponent={}",
        fmt17(fit.slope),
        fmt17(fit.intercept),
        fmt17(fit.r_squared),
        fmt17(fit.tau),
        fmt17(fit.theorem_exponent)
    )
    .unwrap();
    s
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportOptions {
    #[serde(default)]
    pub orders: Option<GridOrders>,
    #[serde(default = "default_degree")]
    pub degree: usize,
    #[serde(default = "default_center")]
    pub center: CenterStrategy,
    #[serde(default = "default_theta")]
    pub theta: f64,
    /// Estimate `μ_{2,2,1/2}` by a Rayleigh quotient.
    #[serde(default)]
    pub rayleigh: bool,
}

impl Default for ReportOptions {
    fn default() -> Self {
        ReportOptions { orders: None, degree: DEFAULT_DEGREE, center: default_center(), theta: DEFAULT_THETA, rayleigh: false }
    }
}

/// `gap / deficit^{exponent}`; `None` when the deficit vanishes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioEntry {
    pub deficit: DeficitKind,
    pub exponent: f64,
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub domain: DomainSpec,
    pub summary: GeometrySummary,
    pub orders: GridOrders,
    pub center: Vec<f64>,
    pub rho_i: f64,
    pub rho_e: f64,
    pub gap: f64,
    pub m: f64,
    pub deficits: DeficitReport,
    pub ratios: Vec<RatioEntry>,
    pub identities: Vec<IdentityReport>,
    pub pointwise_violations: Vec<Violation>,
    pub stability: StabilityRecord,
    pub oscillation: Vec<OscillationBoundRecord>,
    pub ledger: ConstantLedger,
}

/// Deficits below this (relative to the matching scale) count as zero.
const VANISHING: f64 = 1e-12;

pub fn stability_report(spec: &DomainSpec, options: &ReportOptions) -> Result<StabilityReport> {
    let domain = build_domain(spec)?;
    let field = solve_adaptive(&domain, options.degree)?;
    let grids = match options.orders {
        Some(o) => Grids::new(&domain, o.boundary, o.radial, o.angular)?,
        None => Grids::default_for(&domain)?,
    };
    let summary = summary_from_grid(&grids.boundary);
    let z = select_center(&field, &options.center, &grids.volume)?;
    let dev = deviation_field(&field, &z, 0.0)?;
    let samples = sample(&field, &grids);
    let report = deficits(&samples, &summary)?;
    let (rho_i, rho_e) = radii_about(&domain, &z)?;
    let gap = rho_e - rho_i;
    let dim = domain.dim();
    let scale = summary.surface * summary.reference_r();
    let ratios = DeficitKind::ALL
        .iter()
        .filter_map(|&k| {
            let d = report.get(k)?;
            let exponent = tau(dim, k.problem(), options.theta).ok()? * k.tau_power();
            let ratio = (d > VANISHING * scale).then(|| gap / d.powf(exponent));
            Some(RatioEntry { deficit: k, exponent, ratio })
        })
        .collect();
    let m = gradient_bound(&field, &grids.boundary).m;
    let mu_rayleigh = if options.rayleigh {
        let identity: Vec<f64> = (0..dim * dim).map(|k| if k % (dim + 1) == 0 { 1.0 } else { 0.0 }).collect();
        Some(rayleigh_estimate_on(&domain, &grids.volume, &z, 2.0, 2.0, 0.5, 4, &identity)?.mu)
    } else {
        None
    };
    let stability = check_stability_inequalities(&samples, &dev, &summary, m, mu_rayleigh)?;
    let oscillation = [1.0, 2.0, 4.0]
        .iter()
        .map(|&p| oscillation_bound_check(&dev, &grids.volume, &grids.boundary, &summary, p, m))
        .collect::<Result<Vec<_>>>()?;
    let delta_z = domain.distance_to_boundary(&z)?;
    let mut inputs = LedgerInputs::from_summary(&summary, 2.0, delta_z, m);
    inputs.theta = options.theta;
    Ok(StabilityReport {
        domain: spec.clone(),
        orders: grids.orders(),
        center: z,
        rho_i,
        rho_e,
        gap,
        m,
        ratios,
        identities: verify_all(&samples, &dev, &summary),
        pointwise_violations: check_pointwise(&samples, &summary, m),
        stability,
        oscillation,
        ledger: ledger(&inputs)?,
        deficits: report,
        summary,
    })
}
