//! Integral identities, pointwise inequalities and deficits.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::{feldman_factor, m_bound, mu_inverse_bounds, sbt_chain_factor};
use crate::deviation::Deviation;
use crate::error::{Error, Result};
use crate::geometry::{
    boundary_grid, default_boundary_order, default_volume_orders, dot, volume_grid, BoundaryGrid, Domain,
    GeometrySummary, VolumeGrid,
};
use crate::quadrature::{compensated_sum, gauss_legendre_on};
use crate::torsion::{normal_derivative, TorsionField};

/// A boundary grid and a volume grid on the same domain.
#[derive(Debug, Clone)]
pub struct Grids {
    pub boundary: BoundaryGrid,
    pub volume: VolumeGrid,
}

impl Grids {
    pub fn new(domain: &Domain, boundary_order: usize, radial_order: usize, angular_order: usize) -> Result<Grids> {
        Ok(Grids {
            boundary: boundary_grid(domain, boundary_order)?,
            volume: volume_grid(domain, radial_order, angular_order)?,
        })
    }

    pub fn default_for(domain: &Domain) -> Result<Grids> {
        let (radial, angular) = default_volume_orders(domain.dim());
        Grids::new(domain, default_boundary_order(domain.dim()), radial, angular)
    }

    /// Both grids at twice their orders.
    pub fn refined(&self) -> Result<Grids> {
        let (radial, angular) = self.volume.orders();
        Grids::new(self.boundary.domain(), 2 * self.boundary.order(), 2 * radial, 2 * angular)
    }

    pub fn orders(&self) -> GridOrders {
        let (radial, angular) = self.volume.orders();
        GridOrders { boundary: self.boundary.order(), radial, angular }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridOrders {
    pub boundary: usize,
    pub radial: usize,
    pub angular: usize,
}

/// Values of `u` and its derivatives at every node, computed once per field.
#[derive(Debug, Clone)]
pub struct FieldSamples<'a> {
    field: &'a TorsionField,
    grids: &'a Grids,
    dim: usize,
    /// Boundary: `u_ν` and `∇u`.
    u_nu: Vec<f64>,
    grad_b: Vec<f64>,
    /// Volume: `u`, `∇u`, `|∇²h|²`, `|∇²u|²`, `Δu`.
    u: Vec<f64>,
    grad_v: Vec<f64>,
    hess_h_sq: Vec<f64>,
    hess_u_sq: Vec<f64>,
    laplacian: Vec<f64>,
}

pub fn sample<'a>(field: &'a TorsionField, grids: &'a Grids) -> FieldSamples<'a> {
    let dim = field.dim();
    let b = &grids.boundary;
    let boundary: Vec<(f64, Vec<f64>)> = (0..b.len())
        .into_par_iter()
        .map(|j| {
            let g = field.eval_unchecked(b.point(j)).grad;
            (dot(&g, b.normal(j)), g)
        })
        .collect();
    let v = &grids.volume;
    let volume: Vec<_> = (0..v.len())
        .into_par_iter()
        .map(|m| {
            let jet = field.eval_unchecked(v.point(m));
            (jet.u, jet.hess_h_norm_sq(), jet.hess_norm_sq(), jet.laplacian(), jet.grad)
        })
        .collect();
    FieldSamples {
        field,
        grids,
        dim,
        u_nu: boundary.iter().map(|r| r.0).collect(),
        grad_b: boundary.into_iter().flat_map(|r| r.1).collect(),
        u: volume.iter().map(|r| r.0).collect(),
        hess_h_sq: volume.iter().map(|r| r.1).collect(),
        hess_u_sq: volume.iter().map(|r| r.2).collect(),
        laplacian: volume.iter().map(|r| r.3).collect(),
        grad_v: volume.into_iter().flat_map(|r| r.4).collect(),
    }
}

impl<'a> FieldSamples<'a> {
    pub fn field(&self) -> &'a TorsionField {
        self.field
    }

    pub fn grids(&self) -> &'a Grids {
        self.grids
    }

    pub fn u_nu(&self) -> &[f64] {
        &self.u_nu
    }

    fn bint(&self, f: impl Fn(usize) -> f64) -> f64 {
        let b = &self.grids.boundary;
        compensated_sum((0..b.len()).map(|j| b.weights()[j] * f(j)))
    }

    fn vint(&self, f: impl Fn(usize) -> f64) -> f64 {
        let v = &self.grids.volume;
        compensated_sum((0..v.len()).map(|m| v.weights()[m] * f(m)))
    }

    /// `q_ν = ⟨x − z, ν⟩` at boundary node `j`.
    fn q_nu(&self, z: &[f64], j: usize) -> f64 {
        let b = &self.grids.boundary;
        b.point(j).iter().zip(z).zip(b.normal(j)).map(|((x, z), n)| (x - z) * n).sum()
    }

    /// `|∇h|²` at volume node `m`.
    fn grad_h_sq(&self, z: &[f64], m: usize) -> f64 {
        let n = self.dim;
        let y = self.grids.volume.point(m);
        (0..n)
            .map(|i| {
                let g = (y[i] - z[i]) - self.grad_v[m * n + i];
                g * g
            })
            .sum()
    }

    /// `∫_Ω |∇²h|²`, independent of `z` and `a`.
    pub fn hessian_h_sq(&self) -> f64 {
        self.vint(|m| self.hess_h_sq[m])
    }

    /// `∫_Ω (−u)|∇²h|²`.
    pub fn torsion_weighted_hessian(&self) -> f64 {
        self.vint(|m| -self.u[m] * self.hess_h_sq[m])
    }
}

fn surface_and_r(summary: &GeometrySummary) -> (f64, f64) {
    (summary.surface, summary.reference_r())
}

/// Deficits of the stability theorems.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeficitReport {
    pub r: f64,
    pub h0: f64,
    /// `‖u_ν − R‖_{1,Γ}`.
    pub serrin_l1: f64,
    /// `‖u_ν − R‖_{2,Γ}`.
    pub serrin_l2: f64,
    /// `‖H₀ − H‖_{2,Γ}`.
    pub sbt_l2: f64,
    /// `∫_Γ (H₀ − H)⁺`.
    pub sbt_pos_part: f64,
    /// `∫_Γ (H₀ − H)⁻ u_ν²`.
    pub neg_part_weighted: f64,
    /// `∫_Γ 1/H − N|Ω|`, present only for mean-convex boundaries.
    pub heintze_karcher: Option<f64>,
    /// `∫_Γ (1/H − u_ν)`, present only for mean-convex boundaries.
    pub one_over_h: Option<f64>,
    pub mean_convex: bool,
}

/// Selector for one deficit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DeficitKind {
    SerrinL2,
    SerrinL1,
    SbtL2,
    SbtPosPart,
    Hk,
    OneOverH,
}

impl DeficitKind {
    pub const ALL: [DeficitKind; 6] = [
        DeficitKind::SerrinL2,
        DeficitKind::SerrinL1,
        DeficitKind::SbtL2,
        DeficitKind::SbtPosPart,
        DeficitKind::Hk,
        DeficitKind::OneOverH,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DeficitKind::SerrinL2 => "serrin-l2",
            DeficitKind::SerrinL1 => "serrin-l1",
            DeficitKind::SbtL2 => "sbt-l2",
            DeficitKind::SbtPosPart => "sbt-pos-part",
            DeficitKind::Hk => "hk",
            DeficitKind::OneOverH => "one-over-h",
        }
    }

    pub fn parse(s: &str) -> Option<DeficitKind> {
        DeficitKind::ALL.into_iter().find(|k| k.name() == s)
    }

    /// The exponent tabulated for this deviation.
    pub fn problem(self) -> crate::constants::Problem {
        use crate::constants::Problem;
        match self {
            DeficitKind::SerrinL2 | DeficitKind::SerrinL1 => Problem::Serrin,
            DeficitKind::SbtL2 | DeficitKind::SbtPosPart => Problem::Sbt,
            DeficitKind::Hk => Problem::Hk,
            DeficitKind::OneOverH => Problem::OneOverH,
        }
    }

    /// Power of `τ_N` in `ρ_e − ρ_i ≤ C · deficit^{power·τ_N}`.
    pub fn tau_power(self) -> f64 {
        match self {
            DeficitKind::SerrinL2 | DeficitKind::SbtL2 => 1.0,
            _ => 0.5,
        }
    }
}

impl DeficitReport {
    pub fn get(&self, kind: DeficitKind) -> Option<f64> {
        match kind {
            DeficitKind::SerrinL2 => Some(self.serrin_l2),
            DeficitKind::SerrinL1 => Some(self.serrin_l1),
            DeficitKind::SbtL2 => Some(self.sbt_l2),
            DeficitKind::SbtPosPart => Some(self.sbt_pos_part),
            DeficitKind::Hk => self.heintze_karcher,
            DeficitKind::OneOverH => self.one_over_h,
        }
    }
}

/// `(∫ g⁺ w dS, ∫ g⁻ w dS)` with `g = H₀ − H` and `w = 1` or `w = u_ν²`.
///
/// In the plane the integrand is split at the roots of `g` and each smooth
/// arc is integrated by Gauss–Legendre, so the kinks cost no accuracy. In
/// three dimensions a sign change triggers a grid of twice the order; beyond
/// that the given grid is used as is.
fn signed_parts(samples: &FieldSamples<'_>, h0: f64, weight_u_nu_sq: bool) -> Result<(f64, f64)> {
    let field = samples.field;
    let domain = field.domain();
    let b = &samples.grids.boundary;
    let g_nodes: Vec<f64> = b.curvatures().iter().map(|h| h0 - h).collect();
    let changes_sign = g_nodes.iter().any(|&g| g > 0.0) && g_nodes.iter().any(|&g| g < 0.0);
    if domain.dim() == 2 && changes_sign {
        let g = |t: f64| h0 - domain.boundary_point(&[t]).mean_curvature;
        let w = |t: f64| {
            let bp = domain.boundary_point(&[t]);
            let un = if weight_u_nu_sq { normal_derivative(field, &[t]).powi(2) } else { 1.0 };
            bp.area_density * un
        };
        return Ok(split_periodic(g, w, b.len().max(256)));
    }
    let parts = |grid: &BoundaryGrid, u_nu: &dyn Fn(usize) -> f64| -> (f64, f64) {
        let mut pos = Vec::with_capacity(grid.len());
        let mut neg = Vec::with_capacity(grid.len());
        for j in 0..grid.len() {
            let g = h0 - grid.curvatures()[j];
            let w = grid.weights()[j] * if weight_u_nu_sq { u_nu(j).powi(2) } else { 1.0 };
            pos.push(g.max(0.0) * w);
            neg.push((-g).max(0.0) * w);
        }
        (compensated_sum(pos), compensated_sum(neg))
    };
    if domain.dim() == 3 && changes_sign {
        let fine = b.refined()?;
        let un: Vec<f64> = (0..fine.len())
            .into_par_iter()
            .map(|j| dot(&field.eval_unchecked(fine.point(j)).grad, fine.normal(j)))
            .collect();
        return Ok(parts(&fine, &|j| un[j]));
    }
    Ok(parts(b, &|j| samples.u_nu[j]))
}

/// `∫₀^{2π} g⁺ w` and `∫₀^{2π} g⁻ w` for smooth periodic `g`, `w`.
fn split_periodic(g: impl Fn(f64) -> f64, w: impl Fn(f64) -> f64, samples: usize) -> (f64, f64) {
    let h = 2.0 * PI / samples as f64;
    let mut roots = Vec::new();
    for k in 0..samples {
        let (a, b) = (k as f64 * h, (k + 1) as f64 * h);
        let (ga, gb) = (g(a), g(b));
        if ga == 0.0 {
            roots.push(a);
        } else if ga * gb < 0.0 {
            let (mut lo, mut hi, mut glo) = (a, b, ga);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                let gm = g(mid);
                if (gm < 0.0) == (glo < 0.0) {
                    lo = mid;
                    glo = gm;
                } else {
                    hi = mid;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
    }
    if roots.is_empty() {
        roots.push(0.0);
    }
    let (gl_t, gl_w) = gauss_legendre_on(24, 0.0, 1.0);
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for i in 0..roots.len() {
        let a = roots[i];
        let b = if i + 1 < roots.len() { roots[i + 1] } else { roots[0] + 2.0 * PI };
        let pieces = (((b - a) / (2.0 * PI / 64.0)).ceil() as usize).max(1);
        let len = (b - a) / pieces as f64;
        let sign = g(0.5 * (a + b)).signum();
        for p in 0..pieces {
            let s = a + p as f64 * len;
            for (t, wt) in gl_t.iter().zip(&gl_w) {
                let x = s + t * len;
                let v = wt * len * g(x).abs() * w(x);
                if sign > 0.0 {
                    pos.push(v);
                } else {
                    neg.push(v);
                }
            }
        }
    }
    (compensated_sum(pos), compensated_sum(neg))
}

pub fn deficits(samples: &FieldSamples<'_>, summary: &GeometrySummary) -> Result<DeficitReport> {
    let b = &samples.grids.boundary;
    let (_, r) = surface_and_r(summary);
    let h0 = 1.0 / r;
    let n = samples.dim as f64;
    let serrin_l1 = samples.bint(|j| (samples.u_nu[j] - r).abs());
    let serrin_l2 = samples.bint(|j| (samples.u_nu[j] - r).powi(2)).max(0.0).sqrt();
    let sbt_l2 = samples.bint(|j| (h0 - b.curvatures()[j]).powi(2)).max(0.0).sqrt();
    let (sbt_pos_part, _) = signed_parts(samples, h0, false)?;
    let (_, neg_part_weighted) = signed_parts(samples, h0, true)?;
    let mean_convex = b.curvatures().iter().all(|&h| h > 0.0);
    let (heintze_karcher, one_over_h) = if mean_convex {
        let inv = samples.bint(|j| 1.0 / b.curvatures()[j]);
        (
            Some(inv - n * summary.volume),
            Some(samples.bint(|j| 1.0 / b.curvatures()[j] - samples.u_nu[j])),
        )
    } else {
        (None, None)
    };
    Ok(DeficitReport {
        r,
        h0,
        serrin_l1,
        serrin_l2,
        sbt_l2,
        sbt_pos_part,
        neg_part_weighted,
        heintze_karcher,
        one_over_h,
        mean_convex,
    })
}

/// One identity, evaluated on both sides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub abs_residual: f64,
    pub rel_residual: f64,
    /// Magnitude of the integrands; sets the relative-residual floor.
    pub scale: f64,
    pub orders: GridOrders,
}

impl IdentityReport {
    /// `scale` sets the floor `1e-14 · scale` of the relative residual.
    fn new(name: &str, lhs: f64, rhs: f64, scale: f64, orders: GridOrders) -> Self {
        let abs = (lhs - rhs).abs();
        let denom = lhs.abs().max(rhs.abs()).max(1e-14 * scale.abs());
        IdentityReport {
            name: name.to_string(),
            lhs,
            rhs,
            abs_residual: abs,
            rel_residual: if denom > 0.0 { abs / denom } else { 0.0 },
            scale: scale.abs(),
            orders,
        }
    }

    /// Both sides vanish to round-off, as on balls; the relative residual is then meaningless.
    pub fn degenerate(&self) -> bool {
        self.lhs.abs().max(self.rhs.abs()) <= DEGENERATE_SIDE * self.scale
    }

    /// Relative residual within `bound`, or a degenerate identity with both sides negligible.
    pub fn passes(&self, bound: f64) -> bool {
        self.rel_residual <= bound || self.degenerate()
    }
}

/// Sides below this multiple of the scale count as zero.
pub const DEGENERATE_SIDE: f64 = 1e-10;

/// `∫(−u)|∇²h|² = ½∫(R² − u_ν²)h_ν`, and the form in `u` and `q`.
pub fn verify_idwps(samples: &FieldSamples<'_>, dev: &Deviation<'_>, summary: &GeometrySummary) -> Vec<IdentityReport> {
    let (surface, r) = surface_and_r(summary);
    let z = dev.center();
    let n = samples.dim as f64;
    let orders = samples.grids.orders();
    let scale = surface * r.powi(3);
    let lhs_h = samples.torsion_weighted_hessian();
    let rhs_h = 0.5 * samples.bint(|j| {
        let un = samples.u_nu[j];
        (r * r - un * un) * (samples.q_nu(z, j) - un)
    });
    let lhs_u = samples.vint(|m| -samples.u[m] * (samples.hess_u_sq[m] - samples.laplacian[m].powi(2) / n));
    let rhs_u = 0.5 * samples.bint(|j| {
        let un = samples.u_nu[j];
        (un * un - r * r) * (un - samples.q_nu(z, j))
    });
    vec![
        IdentityReport::new("idwps-h", lhs_h, rhs_h, scale, orders),
        IdentityReport::new("idwps-u", lhs_u, rhs_u, scale, orders),
    ]
}

/// `(1/(N−1))∫|∇²h|² + (1/R)∫(u_ν − R)² = ∫(H₀ − H)u_ν²`, and its split form.
pub fn verify_h_fundamental(
    samples: &FieldSamples<'_>,
    dev: &Deviation<'_>,
    summary: &GeometrySummary,
) -> Vec<IdentityReport> {
    let (surface, r) = surface_and_r(summary);
    let h0 = 1.0 / r;
    let z = dev.center();
    let n = samples.dim as f64;
    let b = &samples.grids.boundary;
    let orders = samples.grids.orders();
    let scale = surface * r;
    let lhs = samples.hessian_h_sq() / (n - 1.0) + samples.bint(|j| (samples.u_nu[j] - r).powi(2)) / r;
    let rhs = samples.bint(|j| (h0 - b.curvatures()[j]) * samples.u_nu[j].powi(2));
    let split = samples.bint(|j| {
        let un = samples.u_nu[j];
        let qn = samples.q_nu(z, j);
        let g = h0 - b.curvatures()[j];
        -g * (qn - un) * un + g * (un - r) * qn
    });
    vec![
        IdentityReport::new("h-fundamental", lhs, rhs, scale, orders),
        IdentityReport::new("h-fundamental-split", lhs, split, scale, orders),
    ]
}

/// `(1/(N−1))∫|∇²h|² + ∫(1 − H u_ν)²/H = ∫1/H − N|Ω|`.
pub fn verify_hk(samples: &FieldSamples<'_>, summary: &GeometrySummary) -> Result<Vec<IdentityReport>> {
    let b = &samples.grids.boundary;
    if let Some(node) = b.curvatures().iter().position(|&h| !(h > 0.0)) {
        return Err(Error::NonPositiveCurvature { node, value: b.curvatures()[node] });
    }
    let (surface, r) = surface_and_r(summary);
    let n = samples.dim as f64;
    let lhs = samples.hessian_h_sq() / (n - 1.0)
        + samples.bint(|j| {
            let h = b.curvatures()[j];
            (1.0 - h * samples.u_nu[j]).powi(2) / h
        });
    let rhs = samples.bint(|j| 1.0 / b.curvatures()[j]) - n * summary.volume;
    Ok(vec![IdentityReport::new("heintze-karcher", lhs, rhs, surface * r, samples.grids.orders())])
}

/// `∫u_ν = N|Ω|` and `∫H q_ν = |Γ|`.
pub fn verify_flux(samples: &FieldSamples<'_>, summary: &GeometrySummary, z: &[f64]) -> Vec<IdentityReport> {
    let (surface, r) = surface_and_r(summary);
    let b = &samples.grids.boundary;
    let n = samples.dim as f64;
    let orders = samples.grids.orders();
    let flux = samples.bint(|j| samples.u_nu[j]);
    let volume = samples.grids.volume.volume();
    let minkowski = samples.bint(|j| b.curvatures()[j] * samples.q_nu(z, j));
    vec![
        IdentityReport::new("flux-torsion", flux, n * volume, surface * r, orders),
        IdentityReport::new("flux-minkowski", minkowski, b.surface_area(), surface, orders),
    ]
}

/// `∫_Γ v² u_ν = N∫_Ω v² + 2∫_Ω (−u)|∇v|²` for a harmonic `v` given with its gradient.
pub fn verify_harmonic_flux(
    samples: &FieldSamples<'_>,
    v: &(dyn Fn(&[f64]) -> (f64, Vec<f64>) + Sync),
    summary: &GeometrySummary,
) -> IdentityReport {
    let b = &samples.grids.boundary;
    let vol = &samples.grids.volume;
    let n = samples.dim as f64;
    let vb: Vec<f64> = (0..b.len()).into_par_iter().map(|j| v(b.point(j)).0).collect();
    let vv: Vec<(f64, f64)> = (0..vol.len())
        .into_par_iter()
        .map(|m| {
            let (val, g) = v(vol.point(m));
            (val, dot(&g, &g))
        })
        .collect();
    let lhs = samples.bint(|j| vb[j] * vb[j] * samples.u_nu[j]);
    let rhs = n * samples.vint(|m| vv[m].0 * vv[m].0) + 2.0 * samples.vint(|m| -samples.u[m] * vv[m].1);
    let scale_v = compensated_sum(vb.iter().map(|x| x * x)) / b.len() as f64;
    let (surface, r) = surface_and_r(summary);
    IdentityReport::new("harmonic-flux", lhs, rhs, surface * r * scale_v.max(1.0), samples.grids.orders())
}

/// The summed version with `v = ∂_i h`:
/// `∫_Γ |∇h|² u_ν = N∫_Ω |∇h|² + 2∫_Ω (−u)|∇²h|²`.
pub fn verify_gradient_flux(samples: &FieldSamples<'_>, dev: &Deviation<'_>, summary: &GeometrySummary) -> IdentityReport {
    let z = dev.center();
    let n = samples.dim;
    let b = &samples.grids.boundary;
    let lhs = samples.bint(|j| {
        let x = b.point(j);
        let g2: f64 = (0..n).map(|i| ((x[i] - z[i]) - samples.grad_b[j * n + i]).powi(2)).sum();
        g2 * samples.u_nu[j]
    });
    let rhs = n as f64 * samples.vint(|m| samples.grad_h_sq(z, m)) + 2.0 * samples.torsion_weighted_hessian();
    let (surface, r) = surface_and_r(summary);
    IdentityReport::new("gradient-flux", lhs, rhs, surface * r.powi(3), samples.grids.orders())
}

/// Every identity for one center and offset, headline identities first.
pub fn verify_all(
    samples: &FieldSamples<'_>,
    dev: &Deviation<'_>,
    summary: &GeometrySummary,
) -> Vec<IdentityReport> {
    let mut out = verify_idwps(samples, dev, summary);
    out.extend(verify_h_fundamental(samples, dev, summary));
    if let Ok(hk) = verify_hk(samples, summary) {
        out.extend(hk);
    }
    out.extend(verify_flux(samples, summary, dev.center()));
    out.push(verify_gradient_flux(samples, dev, summary));
    out
}

/// A pointwise inequality that failed at a node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub check: String,
    pub node: usize,
    pub lhs: f64,
    pub rhs: f64,
}

/// Slack allowed by the pointwise suite.
pub const POINTWISE_SLACK: f64 = 1e-9;

/// Newton `(Δu)² ≤ N|∇²u|²` and `−u ≥ (r_i/2)δ_Γ` at volume nodes, Hopf
/// `u_ν ≥ r_i` at boundary nodes, and `M ≤ c_N d(d + r_e)/r_e`.
pub fn check_pointwise(samples: &FieldSamples<'_>, summary: &GeometrySummary, m: f64) -> Vec<Violation> {
    let n = samples.dim as f64;
    let vol = &samples.grids.volume;
    let mut out = Vec::new();
    for k in 0..vol.len() {
        let lhs = samples.laplacian[k].powi(2);
        let rhs = n * samples.hess_u_sq[k];
        if lhs > rhs + POINTWISE_SLACK * (1.0 + rhs) {
            out.push(Violation { check: "newton".into(), node: k, lhs, rhs });
        }
        let lhs = -samples.u[k];
        let rhs = 0.5 * summary.r_i * vol.distances()[k];
        if lhs < rhs - POINTWISE_SLACK {
            out.push(Violation { check: "distance".into(), node: k, lhs, rhs });
        }
    }
    for (j, &un) in samples.u_nu.iter().enumerate() {
        if un < summary.r_i - POINTWISE_SLACK {
            out.push(Violation { check: "hopf".into(), node: j, lhs: un, rhs: summary.r_i });
        }
    }
    let bound = m_bound(samples.dim, summary.diameter, summary.r_e);
    if m > bound + POINTWISE_SLACK {
        out.push(Violation { check: "gradient-bound".into(), node: 0, lhs: m, rhs: bound });
    }
    out
}

/// Both sides of one inequality, with the `μ` that produced the right side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalitySides {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

impl InequalitySides {
    fn new(lhs: f64, rhs: f64) -> Self {
        InequalitySides { lhs, rhs, holds: lhs <= rhs * (1.0 + 1e-10) + 1e-14 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityRecord {
    /// Rayleigh-quotient estimate of `μ_{2,2,1/2}` (upper bound; not certified).
    pub mu_rayleigh: Option<f64>,
    /// `μ_{2,2,1/2}` from the analytic bound with `k = 1`.
    pub mu_analytic: f64,
    pub placeholder_k: bool,
    /// `‖h_ν‖_{2,Γ}` against the Feldman bound.
    pub feldman_rayleigh: Option<InequalitySides>,
    pub feldman_analytic: InequalitySides,
    /// `‖u_ν − R‖_{2,Γ}` against `R{d + M(M+R)/r_i(…)}‖H₀ − H‖_{2,Γ}`.
    pub sbt_chain_rayleigh: Option<InequalitySides>,
    pub sbt_chain_analytic: InequalitySides,
    /// `(1/(N−1))∫|∇²h|² + ∫(H₀−H)⁻u_ν² ≤ ∫(H₀−H)⁺u_ν²`.
    pub positive_part: InequalitySides,
    /// `(rhs − lhs)` of the previous line minus `(1/R)∫(u_ν − R)²`; zero by the
    /// fundamental identity.
    pub positive_part_consistency: f64,
}

pub fn check_stability_inequalities(
    samples: &FieldSamples<'_>,
    dev: &Deviation<'_>,
    summary: &GeometrySummary,
    m: f64,
    mu_rayleigh: Option<f64>,
) -> Result<StabilityRecord> {
    let n = samples.dim;
    let (_, r) = surface_and_r(summary);
    let h0 = 1.0 / r;
    let z = dev.center();
    let b = &samples.grids.boundary;
    let h_nu_l2 = samples.bint(|j| (samples.q_nu(z, j) - samples.u_nu[j]).powi(2)).max(0.0).sqrt();
    let serrin_sq = samples.bint(|j| (samples.u_nu[j] - r).powi(2)).max(0.0);
    let serrin_l2 = serrin_sq.sqrt();
    let sbt_l2 = samples.bint(|j| (h0 - b.curvatures()[j]).powi(2)).max(0.0).sqrt();
    let delta_z = summary_delta(samples, z)?;
    let (_, mu_inv, _) = mu_inverse_bounds(n, 2.0, 2.0, 0.5, summary.diameter, summary.r_i, delta_z, summary.volume)?;
    let mu_analytic = 1.0 / mu_inv;
    let feldman = |mu: f64| InequalitySides::new(h_nu_l2, feldman_factor(n, m, r, summary.r_i, mu) * serrin_l2);
    let chain = |mu: f64| {
        InequalitySides::new(serrin_l2, sbt_chain_factor(n, m, r, summary.r_i, summary.diameter, mu) * sbt_l2)
    };
    let (pos, neg) = signed_parts(samples, h0, true)?;
    let lhs_c = samples.hessian_h_sq() / (n as f64 - 1.0) + neg;
    Ok(StabilityRecord {
        mu_rayleigh,
        mu_analytic,
        placeholder_k: true,
        feldman_rayleigh: mu_rayleigh.map(feldman),
        feldman_analytic: feldman(mu_analytic),
        sbt_chain_rayleigh: mu_rayleigh.map(chain),
        sbt_chain_analytic: chain(mu_analytic),
        positive_part: InequalitySides::new(lhs_c, pos),
        positive_part_consistency: (pos - lhs_c) - serrin_sq / r,
    })
}

fn summary_delta(samples: &FieldSamples<'_>, z: &[f64]) -> Result<f64> {
    samples.field.domain().distance_to_boundary(z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deviation::{deviation_field, select_center, CenterStrategy};
    use crate::geometry::{geometric_summary, summary_from_grid};
    use crate::torsion::{gradient_bound, solve, solve_ellipsoid};

    fn setup(axes: &[f64]) -> (TorsionField, Grids, GeometrySummary) {
        let d = Domain::ellipsoid(axes).unwrap();
        let f = solve_ellipsoid(&d).unwrap();
        let g = Grids::default_for(&d).unwrap();
        let s = summary_from_grid(&g.boundary);
        (f, g, s)
    }

    #[test]
    fn ball_deficits_vanish() {
        for rho in [0.5, 2.0] {
            let (f, g, s) = setup(&[rho, rho]);
            let smp = sample(&f, &g);
            let d = deficits(&smp, &s).unwrap();
            assert!((d.r - rho).abs() < 1e-13 && (d.h0 - 1.0 / rho).abs() < 1e-13);
            for k in DeficitKind::ALL {
                assert!(d.get(k).unwrap().abs() < 1e-10, "{k:?}: {:?}", d.get(k));
            }
        }
    }

    #[test]
    fn ellipse_reference_radius_from_perimeter() {
        let (f, g, s) = setup(&[2.0, 1.0]);
        let d = deficits(&sample(&f, &g), &s).unwrap();
        assert!((d.r - 2.0 * 2.0 * PI / 9.688448220547675).abs() < 1e-12);
        assert!((d.r - 1.297047).abs() < 1e-6);
        assert!(d.heintze_karcher.unwrap() > 0.0);
        // ∫(1/H − u_ν) equals the HK deficit because ∫u_ν = N|Ω|.
        assert!((d.heintze_karcher.unwrap() - d.one_over_h.unwrap()).abs() < 1e-10);
    }

    #[test]
    fn ellipse_idwps_matches_closed_form() {
        let (f, g, s) = setup(&[2.0, 1.0]);
        let smp = sample(&f, &g);
        let dev = deviation_field(&f, &[0.0, 0.0], 0.0).unwrap();
        let reps = verify_idwps(&smp, &dev, &s);
        assert!((reps[0].lhs - 0.576 * PI).abs() < 1e-10);
        for r in &reps {
            assert!(r.rel_residual <= 1e-8, "{r:?}");
        }
    }

    #[test]
    fn identities_are_invariant_in_offset_and_center() {
        let (f, g, s) = setup(&[1.2, 1.0 / 1.2]);
        let smp = sample(&f, &g);
        let z_arg = select_center(&f, &CenterStrategy::ArgminU, &g.volume).unwrap();
        let z_c = select_center(&f, &CenterStrategy::Centroid, &g.volume).unwrap();
        let base = verify_h_fundamental(&smp, &deviation_field(&f, &z_arg, 0.0).unwrap(), &s);
        for z in [&z_arg, &z_c] {
            for a in [0.0, 1.0] {
                let dev = deviation_field(&f, z, a).unwrap();
                let reps = verify_h_fundamental(&smp, &dev, &s);
                for (r, b) in reps.iter().zip(&base) {
                    assert!(r.rel_residual <= 1e-8, "{r:?}");
                    assert!((r.rhs - b.rhs).abs() <= 1e-10 * b.rhs.abs());
                }
                let idw = verify_idwps(&smp, &dev, &s);
                assert!(idw.iter().all(|r| r.rel_residual <= 1e-8));
            }
        }
    }

    #[test]
    fn hk_identity_and_precondition() {
        let (f, g, s) = setup(&[2.0, 1.0]);
        let rep = &verify_hk(&sample(&f, &g), &s).unwrap()[0];
        assert!(rep.rel_residual <= 1e-8 && rep.lhs > 0.0 && rep.rhs > 0.0, "{rep:?}");
        let d = Domain::fourier(&[1.0, 0.0, 0.0, 0.0, 0.12], &[]).unwrap();
        let f = solve(&d, 40).unwrap();
        let g = Grids::new(&d, 256, 16, 64).unwrap();
        let s = summary_from_grid(&g.boundary);
        assert!(matches!(verify_hk(&sample(&f, &g), &s), Err(Error::NonPositiveCurvature { .. })));
        let smp = sample(&f, &g);
        let dr = deficits(&smp, &s).unwrap();
        assert!(!dr.mean_convex && dr.heintze_karcher.is_none());
    }

    #[test]
    fn flux_identities_on_ellipse() {
        let (f, g, s) = setup(&[2.0, 1.0]);
        let smp = sample(&f, &g);
        for z in [[0.0, 0.0], [0.3, -0.2]] {
            for r in verify_flux(&smp, &s, &z) {
                assert!(r.rel_residual <= 1e-8, "{r:?}");
            }
        }
    }

    #[test]
    fn harmonic_flux_examples() {
        // Unit disk, v = x₁: ∫_Γ x₁² = π; N∫x₁² + 2∫(−u)·1 = π/2 + π/2.
        let (f, g, s) = setup(&[1.0, 1.0]);
        let smp = sample(&f, &g);
        let rep = verify_harmonic_flux(&smp, &|x: &[f64]| (x[0], vec![1.0, 0.0]), &s);
        assert!((rep.lhs - PI).abs() < 1e-12 && (rep.rhs - PI).abs() < 1e-10);
        let one = verify_harmonic_flux(&smp, &|_: &[f64]| (1.0, vec![0.0, 0.0]), &s);
        assert!((one.lhs - 2.0 * PI).abs() < 1e-12 && one.rel_residual < 1e-10);
        // Ellipse 1.5 × 1, v = r² cos 2θ = x² − y².
        let (f, g, s) = setup(&[1.5, 1.0]);
        let smp = sample(&f, &g);
        let v = |x: &[f64]| (x[0] * x[0] - x[1] * x[1], vec![2.0 * x[0], -2.0 * x[1]]);
        let rep = verify_harmonic_flux(&smp, &v, &s);
        assert!(rep.rel_residual <= 1e-8, "{rep:?}");
        let dev = deviation_field(&f, &[0.1, 0.0], 0.5).unwrap();
        let rep = verify_gradient_flux(&smp, &dev, &s);
        assert!(rep.rel_residual <= 1e-8, "{rep:?}");
    }

    #[test]
    fn pointwise_suite_on_ball_and_ellipse() {
        let (f, g, s) = setup(&[1.0, 1.0]);
        let smp = sample(&f, &g);
        let m = gradient_bound(&f, &g.boundary).m;
        assert!(check_pointwise(&smp, &s, m).is_empty());
        assert!(smp.u_nu().iter().all(|&un| (un - s.r_i).abs() < 1e-14));
        let (f, g, s) = setup(&[2.0, 1.0]);
        let smp = sample(&f, &g);
        let m = gradient_bound(&f, &g.boundary).m;
        assert!(check_pointwise(&smp, &s, m).is_empty());
        assert!(smp.u_nu().iter().all(|&un| (0.8 - 1e-14..=1.6 + 1e-14).contains(&un)));
        assert!(smp.hess_u_sq.iter().zip(&smp.laplacian).all(|(h, l)| (2.0 * h - l * l - 1.44).abs() < 1e-13));
    }

    #[test]
    fn positive_part_inequality_on_ellipse() {
        let (f, g, s) = setup(&[1.2, 1.0 / 1.2]);
        let smp = sample(&f, &g);
        let z = select_center(&f, &CenterStrategy::ArgminU, &g.volume).unwrap();
        let dev = deviation_field(&f, &z, 0.0).unwrap();
        let m = gradient_bound(&f, &g.boundary).m;
        let rec = check_stability_inequalities(&smp, &dev, &s, m, None).unwrap();
        assert!(rec.positive_part.holds && rec.positive_part.lhs < rec.positive_part.rhs);
        assert!(rec.positive_part_consistency.abs() <= 1e-8 * rec.positive_part.rhs, "{rec:?}");
        assert!(rec.feldman_analytic.holds && rec.sbt_chain_analytic.holds);
    }

    #[test]
    fn signed_parts_in_three_dimensions_refine() {
        let (f, g, s) = setup(&[1.3, 1.0, 0.8]);
        let smp = sample(&f, &g);
        let z = [0.0; 3];
        let dev = deviation_field(&f, &z, 0.0).unwrap();
        let m = gradient_bound(&f, &g.boundary).m;
        let rec = check_stability_inequalities(&smp, &dev, &s, m, None).unwrap();
        assert!(rec.positive_part.holds);
        assert!(rec.positive_part_consistency.abs() <= 1e-3 * rec.positive_part.rhs, "{rec:?}");
    }

    #[test]
    fn summary_and_grid_measures_agree() {
        let d = Domain::ellipsoid(&[1.4, 1.0, 0.9, 1.1]).unwrap();
        let g = Grids::default_for(&d).unwrap();
        let s = geometric_summary(&d);
        assert!((g.volume.volume() - s.volume).abs() < 1e-10 * s.volume);
    }
}
