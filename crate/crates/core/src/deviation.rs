//! The harmonic deviation `h = q − u`, `q(x) = (|x − z|² − a)/2`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::{check_exponents, osc_a, osc_alpha, oscillation_constant};
use crate::error::{Error, Result};
use crate::geometry::{
    boundary_grid, default_volume_orders, dot, norm, radii_about_grid, volume_grid, BoundaryGrid, Domain,
    GeometrySummary, VolumeGrid,
};
use crate::linalg::generalized_min_eigenvalue;
use crate::optimize::nelder_mead;
use crate::quadrature::{compensated_sum, weighted_sum};
use crate::torsion::TorsionField;

/// How the center `z` of `q` is chosen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CenterStrategy {
    /// A global minimum point of `u`.
    ArgminU,
    /// The center of mass of `Ω`.
    Centroid,
    /// `z = x₀ − ∇u(x₀)`.
    Feldman { x0: Vec<f64> },
}

/// Picks `z`; the volume grid supplies the centroid and the fallback search.
pub fn select_center(field: &TorsionField, strategy: &CenterStrategy, vgrid: &VolumeGrid) -> Result<Vec<f64>> {
    let domain = field.domain();
    match strategy {
        CenterStrategy::Centroid => {
            let c = vgrid.centroid();
            if domain.contains(&c) {
                Ok(c)
            } else {
                Err(Error::CenterLeftDomain(c))
            }
        }
        CenterStrategy::Feldman { x0 } => {
            if !domain.contains(x0) {
                return Err(Error::OutsideDomain(x0.clone()));
            }
            let g = field.eval_unchecked(x0).grad;
            let z: Vec<f64> = x0.iter().zip(&g).map(|(x, g)| x - g).collect();
            if domain.contains(&z) {
                Ok(z)
            } else {
                Err(Error::CenterLeftDomain(z))
            }
        }
        CenterStrategy::ArgminU => {
            let seed = vgrid.centroid();
            if domain.contains(&seed) {
                if let Some(z) = newton_critical_point(field, &seed) {
                    return Ok(z);
                }
            }
            // Fallback: the lowest volume node.
            let best = (0..vgrid.len())
                .min_by(|&a, &b| {
                    let ua = field.eval_unchecked(vgrid.point(a)).u;
                    let ub = field.eval_unchecked(vgrid.point(b)).u;
                    ua.total_cmp(&ub)
                })
                .ok_or(Error::NoConvergence("minimum search"))?;
            newton_critical_point(field, vgrid.point(best)).ok_or(Error::NoConvergence("minimum search"))
        }
    }
}

/// Damped Newton on `∇u = 0` from `x`, accepting only descent steps inside `Ω`.
fn newton_critical_point(field: &TorsionField, x: &[f64]) -> Option<Vec<f64>> {
    let n = field.dim();
    let domain = field.domain();
    let mut x = x.to_vec();
    let mut jet = field.eval_unchecked(&x);
    let scale = domain_scale(domain);
    for _ in 0..100 {
        let g = &jet.grad;
        if norm(g) <= 1e-14 * scale {
            return Some(x);
        }
        let step = solve_symmetric(&jet.hess, g, n)?;
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let trial: Vec<f64> = x.iter().zip(&step).map(|(x, s)| x - t * s).collect();
            if domain.contains(&trial) {
                let tj = field.eval_unchecked(&trial);
                if tj.u <= jet.u || norm(&tj.grad) < norm(g) {
                    x = trial;
                    jet = tj;
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !accepted {
            // Newton cannot improve further: accept if already stationary to round-off.
            return (norm(&jet.grad) <= 1e-10 * scale).then_some(x);
        }
    }
    (norm(&jet.grad) <= 1e-10 * scale).then_some(x)
}

fn domain_scale(domain: &Domain) -> f64 {
    match domain {
        Domain::Ellipsoid(e) => e.axes().iter().cloned().fold(0.0, f64::max),
        Domain::Fourier2D(f) => f.cos_coefficients()[0].abs(),
    }
}

/// Gaussian elimination with partial pivoting for the small Newton systems.
fn solve_symmetric(a: &[f64], b: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut m = a.to_vec();
    let mut x = b.to_vec();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| m[i * n + k].abs().total_cmp(&m[j * n + k].abs()))?;
        if m[p * n + k] == 0.0 {
            return None;
        }
        if p != k {
            for j in 0..n {
                m.swap(k * n + j, p * n + j);
            }
            x.swap(k, p);
        }
        for i in (k + 1)..n {
            let f = m[i * n + k] / m[k * n + k];
            for j in k..n {
                m[i * n + j] -= f * m[k * n + j];
            }
            x[i] -= f * x[k];
        }
    }
    for k in (0..n).rev() {
        let mut s = x[k];
        for j in (k + 1)..n {
            s -= m[k * n + j] * x[j];
        }
        x[k] = s / m[k * n + k];
    }
    Some(x)
}

/// `h`, `∇h`, `∇²h` at a point, together with the underlying `u` and `∇u`.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviationJet {
    pub h: f64,
    pub grad: Vec<f64>,
    /// Row-major, exactly traceless.
    pub hess: Vec<f64>,
    pub u: f64,
    pub grad_u: Vec<f64>,
    /// `|∇²u|²`.
    pub hess_u_norm_sq: f64,
    /// `Δu` as evaluated.
    pub laplacian_u: f64,
}

impl DeviationJet {
    pub fn hess_norm_sq(&self) -> f64 {
        self.hess.iter().map(|x| x * x).sum()
    }
}

#[derive(Debug, Clone)]
pub struct Deviation<'a> {
    field: &'a TorsionField,
    z: Vec<f64>,
    a: f64,
}

/// `h = q − u` about `z` with offset `a`.
pub fn deviation_field<'a>(field: &'a TorsionField, z: &[f64], a: f64) -> Result<Deviation<'a>> {
    if !field.domain().contains(z) {
        return Err(Error::CenterOutsideDomain(z.to_vec()));
    }
    Ok(Deviation { field, z: z.to_vec(), a })
}

impl<'a> Deviation<'a> {
    pub fn field(&self) -> &'a TorsionField {
        self.field
    }

    pub fn center(&self) -> &[f64] {
        &self.z
    }

    pub fn offset(&self) -> f64 {
        self.a
    }

    pub fn q(&self, x: &[f64]) -> f64 {
        let r2: f64 = x.iter().zip(&self.z).map(|(x, z)| (x - z) * (x - z)).sum();
        0.5 * (r2 - self.a)
    }

    pub fn eval(&self, x: &[f64]) -> DeviationJet {
        let jet = self.field.eval_unchecked(x);
        let grad = x
            .iter()
            .zip(&self.z)
            .zip(&jet.grad)
            .map(|((x, z), g)| (x - z) - g)
            .collect();
        DeviationJet {
            h: self.q(x) - jet.u,
            grad,
            hess_u_norm_sq: jet.hess_norm_sq(),
            laplacian_u: jet.laplacian(),
            hess: jet.hess_h,
            u: jet.u,
            grad_u: jet.grad,
        }
    }
}

/// Norms of `h` over the volume grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub p: f64,
    /// `‖h − h_Ω‖_{p,Ω}`.
    pub lp_deviation: f64,
    /// `‖∇²h‖_{2,Ω}`.
    pub hessian_l2: f64,
    /// `‖δ_Γ^{1/2} ∇²h‖_{2,Ω}`.
    pub weighted_hessian_l2: f64,
    /// `∫_Ω (−u)|∇²h|²`.
    pub torsion_weighted: f64,
    /// `max_Γ h − min_Γ h`.
    pub oscillation: f64,
    /// `h_Ω`.
    pub mean: f64,
}

/// Per-node values of `h`, `u`, `|∇²h|²` on a volume grid.
struct VolumeSamples {
    h: Vec<f64>,
    u: Vec<f64>,
    hess_sq: Vec<f64>,
}

fn sample_volume(dev: &Deviation<'_>, vgrid: &VolumeGrid) -> VolumeSamples {
    let rows: Vec<(f64, f64, f64)> = (0..vgrid.len())
        .into_par_iter()
        .map(|m| {
            let j = dev.eval(vgrid.point(m));
            (j.h, j.u, j.hess_norm_sq())
        })
        .collect();
    VolumeSamples {
        h: rows.iter().map(|r| r.0).collect(),
        u: rows.iter().map(|r| r.1).collect(),
        hess_sq: rows.iter().map(|r| r.2).collect(),
    }
}

/// `‖v − λ‖_{p}` on the volume grid.
fn lp_norm(vgrid: &VolumeGrid, values: &[f64], lambda: f64, p: f64) -> f64 {
    let powered: Vec<f64> = values.iter().map(|v| (v - lambda).abs().powf(p)).collect();
    vgrid.integrate(&powered).max(0.0).powf(1.0 / p)
}

pub fn norms(dev: &Deviation<'_>, vgrid: &VolumeGrid, bgrid: &BoundaryGrid, p: f64) -> Result<NormReport> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::InvalidParameter(format!("p = {p} must lie in [1, ∞)")));
    }
    let s = sample_volume(dev, vgrid);
    let mean = vgrid.integrate(&s.h) / vgrid.volume();
    let weighted: Vec<f64> = s.hess_sq.iter().zip(vgrid.distances()).map(|(h, d)| h * d).collect();
    let torsion: Vec<f64> = s.hess_sq.iter().zip(&s.u).map(|(h, u)| -u * h).collect();
    Ok(NormReport {
        p,
        lp_deviation: lp_norm(vgrid, &s.h, mean, p),
        hessian_l2: vgrid.integrate(&s.hess_sq).max(0.0).sqrt(),
        weighted_hessian_l2: vgrid.integrate(&weighted).max(0.0).sqrt(),
        torsion_weighted: vgrid.integrate(&torsion),
        oscillation: boundary_extremes(dev, bgrid).2,
        mean,
    })
}

/// `(min_Γ h, max_Γ h, osc)`, polished between nodes.
fn boundary_extremes(dev: &Deviation<'_>, bgrid: &BoundaryGrid) -> (f64, f64, f64) {
    let (_, lo) = bgrid.polish_min(|x| dev.eval(x).h);
    let (_, neg_hi) = bgrid.polish_min(|x| -dev.eval(x).h);
    (lo, -neg_hi, -neg_hi - lo)
}

/// `osc_Γ h` against `(ρ_e² − ρ_i²)/2` and the lower bound `(r_i/2)(ρ_e − ρ_i)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OscillationCheck {
    pub oscillation: f64,
    pub rho_i: f64,
    pub rho_e: f64,
    /// `(ρ_e² − ρ_i²)/2`.
    pub half_difference_of_squares: f64,
    pub identity_residual: f64,
    /// `(r_i/2)(ρ_e − ρ_i)`.
    pub lower_bound: f64,
    pub lower_bound_holds: bool,
}

pub fn boundary_oscillation(
    dev: &Deviation<'_>,
    bgrid: &BoundaryGrid,
    summary: &GeometrySummary,
) -> Result<OscillationCheck> {
    let (_, _, osc) = boundary_extremes(dev, bgrid);
    let (rho_i, rho_e) = radii_about_grid(bgrid, dev.center())?;
    let half = 0.5 * (rho_e * rho_e - rho_i * rho_i);
    let lower_bound = 0.5 * summary.r_i * (rho_e - rho_i);
    let tol = 1e-9 * (rho_e * rho_e).max(f64::MIN_POSITIVE);
    Ok(OscillationCheck {
        oscillation: osc,
        rho_i,
        rho_e,
        half_difference_of_squares: half,
        identity_residual: (osc - half).abs(),
        lower_bound,
        lower_bound_holds: osc + tol >= lower_bound,
    })
}

/// The `r`-mean: the minimizer over `λ` of `Σ w |v − λ|^r`.
pub fn r_mean(values: &[f64], weights: &[f64], r: f64) -> Result<f64> {
    if !(r >= 1.0) {
        return Err(Error::InvalidParameter(format!("r = {r} must be at least 1")));
    }
    if values.is_empty() || values.len() != weights.len() || weights.iter().any(|w| !(*w > 0.0)) {
        return Err(Error::InvalidParameter("r-mean needs matching values and positive weights".into()));
    }
    if r == 2.0 {
        return Ok(weighted_sum(weights, values) / compensated_sum(weights.iter().copied()));
    }
    if r == 1.0 {
        // Weighted median: the first value at which the cumulative weight reaches half.
        let mut idx: Vec<usize> = (0..values.len()).collect();
        idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let total = compensated_sum(weights.iter().copied());
        let mut acc = 0.0;
        for &i in &idx {
            acc += weights[i];
            if acc >= 0.5 * total {
                return Ok(values[i]);
            }
        }
        return Ok(values[idx[idx.len() - 1]]);
    }
    // Strictly convex: bisect on the sign of the derivative.
    let deriv = |l: f64| -> f64 {
        compensated_sum(
            values
                .iter()
                .zip(weights)
                .map(|(v, w)| -w * (v - l).signum() * (v - l).abs().powf(r - 1.0)),
        )
    };
    let mut lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let d = deriv(mid);
        if d == 0.0 {
            return Ok(mid);
        }
        if d > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Both sides of the `L^p` oscillation lemma and of its specialization to `h`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OscillationBoundRecord {
    pub p: f64,
    /// `‖h − h_Ω‖_{p,Ω}`.
    pub lp_deviation: f64,
    /// `max_Γ |∇h|`, polished.
    pub g_numeric: f64,
    /// `M + d_Ω`.
    pub g_analytic: f64,
    /// `α_{N,p} r_i^{(N+p)/p} G` with the numeric `G`.
    pub smallness_rhs: f64,
    pub smallness_holds: bool,
    pub oscillation: f64,
    /// `a_{N,p} G^{N/(N+p)} ‖h − h_Ω‖_p^{p/(N+p)}`.
    pub oscillation_rhs: f64,
    /// Present only when the smallness condition holds.
    pub oscillation_bound_holds: Option<bool>,
    pub gap: f64,
    /// Lemma constant `max{2a, α^{−p/(N+p)}} d^{N/(N+p)}/r_i (1 + M/d)^{N/(N+p)}`.
    pub lemma_constant: f64,
    pub gap_rhs: f64,
    pub gap_bound_holds: bool,
}

pub fn oscillation_bound_check(
    dev: &Deviation<'_>,
    vgrid: &VolumeGrid,
    bgrid: &BoundaryGrid,
    summary: &GeometrySummary,
    p: f64,
    m: f64,
) -> Result<OscillationBoundRecord> {
    let n = dev.field().dim();
    let nf = n as f64;
    let report = norms(dev, vgrid, bgrid, p)?;
    let (_, neg_g) = bgrid.polish_min(|x| -norm(&dev.eval(x).grad));
    let g = -neg_g;
    let osc_check = boundary_oscillation(dev, bgrid, summary)?;
    let l = report.lp_deviation;
    let smallness_rhs = osc_alpha(n, p) * summary.r_i.powf((nf + p) / p) * g;
    let smallness_holds = l <= smallness_rhs;
    let oscillation_rhs = osc_a(n, p) * g.powf(nf / (nf + p)) * l.powf(p / (nf + p));
    // Slack for the quadrature error of the two sides.
    let tol = 1e-9 * (1.0 + oscillation_rhs);
    let oscillation_bound_holds = smallness_holds.then_some(report.oscillation <= oscillation_rhs + tol);
    let lemma_constant = oscillation_constant(n, p, summary.diameter, summary.r_i, m);
    let gap = osc_check.rho_e - osc_check.rho_i;
    let gap_rhs = lemma_constant * l.powf(p / (nf + p));
    Ok(OscillationBoundRecord {
        p,
        lp_deviation: l,
        g_numeric: g,
        g_analytic: m + summary.diameter,
        smallness_rhs,
        smallness_holds,
        oscillation: report.oscillation,
        oscillation_rhs,
        oscillation_bound_holds,
        gap,
        lemma_constant,
        gap_rhs,
        gap_bound_holds: gap <= gap_rhs + 1e-9 * (1.0 + gap_rhs),
    })
}

/// Subspace estimate of a Hardy–Poincaré constant. Restricting the minimization
/// to harmonic polynomials can only raise the minimum, so `mu` is an upper
/// bound on the true constant and must not certify an inequality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RayleighEstimate {
    /// Estimate with `v(z) = 0`.
    pub mu: f64,
    /// Estimate with `v_Ω = 0`.
    pub mu_bar: f64,
    pub degree: usize,
    pub basis_size: usize,
    pub upper_bound_only: bool,
}

/// Harmonic polynomial basis vanishing at `z`, evaluated with gradients at `y`
/// after the coordinate change `w = Q (y − z)`.
fn harmonic_basis(dim: usize, degree: usize, rotation: &[f64], z: &[f64], y: &[f64]) -> Vec<(f64, Vec<f64>)> {
    let w: Vec<f64> = (0..dim)
        .map(|i| (0..dim).map(|j| rotation[i * dim + j] * (y[j] - z[j])).sum())
        .collect();
    // Gradient in y of a function of w: Qᵀ ∇_w.
    let back = |gw: Vec<f64>| -> Vec<f64> {
        (0..dim).map(|j| (0..dim).map(|i| rotation[i * dim + j] * gw[i]).sum()).collect()
    };
    let mut out = Vec::new();
    if dim == 2 {
        // Re/Im of (w₁ + i w₂)^k; ∂₁ = k Re ζ^{k−1}·(1, …), via ζ^{k−1}.
        let mut prev = (1.0f64, 0.0f64); // ζ^{k−1}
        for k in 1..=degree {
            let kf = k as f64;
            let cur = (prev.0 * w[0] - prev.1 * w[1], prev.0 * w[1] + prev.1 * w[0]);
            // d/dw₁ ζ^k = k ζ^{k−1}; d/dw₂ ζ^k = i k ζ^{k−1}
            out.push((cur.0, back(vec![kf * prev.0, -kf * prev.1])));
            out.push((cur.1, back(vec![kf * prev.1, kf * prev.0])));
            prev = cur;
        }
    } else {
        for i in 0..dim {
            let mut g = vec![0.0; dim];
            g[i] = 1.0;
            out.push((w[i], back(g)));
        }
        if degree >= 2 {
            for i in 0..dim {
                for j in (i + 1)..dim {
                    let mut g = vec![0.0; dim];
                    g[i] = w[j];
                    g[j] = w[i];
                    out.push((w[i] * w[j], back(g)));
                }
            }
            for i in 0..dim - 1 {
                let mut g = vec![0.0; dim];
                g[i] = 2.0 * w[i];
                g[i + 1] = -2.0 * w[i + 1];
                out.push((w[i] * w[i] - w[i + 1] * w[i + 1], back(g)));
            }
        }
    }
    out
}

/// Rayleigh-quotient estimate of `μ_{r,p,α}(Ω, z)` and `μ̄_{r,p,α}(Ω)` over
/// harmonic polynomials of the given degree (any degree in the plane, at most
/// 2 in higher dimensions).
pub fn rayleigh_estimate(
    domain: &Domain,
    z: &[f64],
    r: f64,
    p: f64,
    alpha: f64,
    degree: usize,
) -> Result<RayleighEstimate> {
    let (radial, angular) = default_volume_orders(domain.dim());
    let vgrid = volume_grid(domain, radial.min(32), angular)?;
    let n = domain.dim();
    let mut rot = vec![0.0; n * n];
    for i in 0..n {
        rot[i * n + i] = 1.0;
    }
    rayleigh_estimate_on(domain, &vgrid, z, r, p, alpha, degree, &rot)
}

/// As [`rayleigh_estimate`], on a given grid and with the basis written in the
/// rotated coordinates `Q (y − z)` (`Q` row-major orthogonal).
#[allow(clippy::too_many_arguments)]
pub fn rayleigh_estimate_on(
    domain: &Domain,
    vgrid: &VolumeGrid,
    z: &[f64],
    r: f64,
    p: f64,
    alpha: f64,
    degree: usize,
    rotation: &[f64],
) -> Result<RayleighEstimate> {
    let n = domain.dim();
    check_exponents(n, r, p, alpha)?;
    if !domain.contains(z) {
        return Err(Error::CenterOutsideDomain(z.to_vec()));
    }
    if degree == 0 || (n > 2 && degree > 2) {
        return Err(Error::InvalidParameter(format!("basis degree {degree} unsupported in dimension {n}")));
    }
    let samples: Vec<Vec<(f64, Vec<f64>)>> = (0..vgrid.len())
        .into_par_iter()
        .map(|m| harmonic_basis(n, degree, rotation, z, vgrid.point(m)))
        .collect();
    let k = samples[0].len();
    let weights = vgrid.weights();
    let delta_w: Vec<f64> = vgrid.distances().iter().map(|d| d.powf(alpha * p)).collect();
    let vol = vgrid.volume();
    let means: Vec<f64> = (0..k)
        .map(|b| weighted_sum(weights, &samples.iter().map(|s| s[b].0).collect::<Vec<_>>()) / vol)
        .collect();

    let estimate = |shift: &[f64]| -> f64 {
        if r == 2.0 && p == 2.0 {
            let mut a = vec![0.0; k * k];
            let mut bm = vec![0.0; k * k];
            for i in 0..k {
                for j in i..k {
                    let gij: Vec<f64> = samples.iter().zip(&delta_w).map(|(s, d)| d * dot(&s[i].1, &s[j].1)).collect();
                    let vij: Vec<f64> = samples.iter().map(|s| (s[i].0 - shift[i]) * (s[j].0 - shift[j])).collect();
                    a[i * k + j] = weighted_sum(weights, &gij);
                    a[j * k + i] = a[i * k + j];
                    bm[i * k + j] = weighted_sum(weights, &vij);
                    bm[j * k + i] = bm[i * k + j];
                }
            }
            generalized_min_eigenvalue(&a, &bm, k).map_or(f64::NAN, |l| l.max(0.0).sqrt())
        } else {
            let ratio = |c: &[f64]| -> f64 {
                let mut num = Vec::with_capacity(samples.len());
                let mut den = Vec::with_capacity(samples.len());
                for (s, d) in samples.iter().zip(&delta_w) {
                    let mut v = 0.0;
                    let mut g = vec![0.0; n];
                    for (b, (val, grad)) in s.iter().enumerate() {
                        v += c[b] * (val - shift[b]);
                        for (gi, gb) in g.iter_mut().zip(grad) {
                            *gi += c[b] * gb;
                        }
                    }
                    num.push(d * norm(&g).powf(p));
                    den.push(v.abs().powf(r));
                }
                let top = weighted_sum(weights, &num).powf(1.0 / p);
                let bottom = weighted_sum(weights, &den).powf(1.0 / r);
                if bottom > 0.0 { top / bottom } else { f64::INFINITY }
            };
            let mut best = f64::INFINITY;
            for start in 0..k {
                let mut c0 = vec![0.1; k];
                c0[start] = 1.0;
                let (_, v) = nelder_mead(ratio, &c0, 0.3, 1e-12, 400 * k);
                best = best.min(v);
            }
            best
        }
    };
    let zeros = vec![0.0; k];
    let mu = estimate(&zeros);
    let mu_bar = estimate(&means);
    if !mu.is_finite() || !mu_bar.is_finite() {
        return Err(Error::SolverFailure("Rayleigh quotient minimization failed".into()));
    }
    Ok(RayleighEstimate { mu, mu_bar, degree, basis_size: k, upper_bound_only: true })
}

/// Default boundary grid for a domain's deviation checks.
pub fn default_deviation_grid(domain: &Domain) -> Result<BoundaryGrid> {
    boundary_grid(domain, crate::geometry::default_boundary_order(domain.dim()))
}
