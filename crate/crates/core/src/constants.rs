//! Closed-form constants, constant bounds and stability exponents.
//!
//! The dimensionless factors `k` multiplying the Hardy–Poincaré bounds are not
//! known numerically; they are set to 1 and every quantity built from them is
//! marked by `placeholder_k`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::GeometrySummary;
use crate::quadrature::unit_ball_volume;

/// Value used for every unspecified `k_{N,r,p,α}` / `k_{N,p}`.
pub const PLACEHOLDER_K: f64 = 1.0;

/// Default `θ` for the exponents that are "arbitrarily close to one".
pub const DEFAULT_THETA: f64 = 0.1;

/// `c_2 = 3/2`, `c_N = N/2` for `N >= 3`.
pub fn c_n(n: usize) -> f64 {
    if n == 2 {
        1.5
    } else {
        n as f64 / 2.0
    }
}

/// `M ≤ c_N d (d + r_e) / r_e`; with `r_e = ∞` this is the convex branch `c_N d`.
pub fn m_bound(n: usize, d: f64, r_e: f64) -> f64 {
    if r_e.is_infinite() {
        c_n(n) * d
    } else {
        c_n(n) * d * (d + r_e) / r_e
    }
}

/// `a_{N,p}` of the `L^p` oscillation lemma.
pub fn osc_a(n: usize, p: f64) -> f64 {
    let nf = n as f64;
    let s = nf + p;
    2.0 * s / (nf.powf(nf / s) * p.powf(p / s) * unit_ball_volume(n).powf(1.0 / s))
}

/// `α_{N,p}` of the `L^p` oscillation lemma.
pub fn osc_alpha(n: usize, p: f64) -> f64 {
    p / n as f64 * unit_ball_volume(n).powf(1.0 / p)
}

fn lemma_prefactor(n: usize, p: f64, d: f64, r_i: f64) -> f64 {
    let e = n as f64 / (n as f64 + p);
    let k = (2.0 * osc_a(n, p)).max(osc_alpha(n, p).powf(-p / (n as f64 + p)));
    k * d.powf(e) / r_i
}

/// `C` with `ρ_e − ρ_i ≤ C ‖h − h_Ω‖_p^{p/(N+p)}`, in terms of `M`.
pub fn oscillation_constant(n: usize, p: f64, d: f64, r_i: f64, m: f64) -> f64 {
    let e = n as f64 / (n as f64 + p);
    lemma_prefactor(n, p, d, r_i) * (1.0 + m / d).powf(e)
}

/// The same constant with `M` replaced by its bound through `r_e`.
pub fn oscillation_constant_re(n: usize, p: f64, d: f64, r_i: f64, r_e: f64) -> f64 {
    let e = n as f64 / (n as f64 + p);
    let ratio = if r_e.is_infinite() { 1.0 } else { (d + r_e) / r_e };
    lemma_prefactor(n, p, d, r_i) * (1.0 + c_n(n) * ratio).powf(e)
}

/// Mean-convex form `(1 + c_N)^{N/(N+p)} max{2a, α^{−p/(N+p)}} d^{N/(N+p)} / r_i`.
pub fn oscillation_constant_mean_convex(n: usize, p: f64, d: f64, r_i: f64) -> f64 {
    let e = n as f64 / (n as f64 + p);
    (1.0 + c_n(n)).powf(e) * lemma_prefactor(n, p, d, r_i)
}

/// `δ_Γ(z) ≥ r_i² / (2M)` for a minimum point `z` of `u`.
pub fn center_distance_lower_bound(r_i: f64, m: f64) -> f64 {
    r_i * r_i / (2.0 * m)
}

/// `b₀ ≤ d / r_i`.
pub fn john_b0_bound(d: f64, r_i: f64) -> f64 {
    d / r_i
}

/// `L₀ ≤ d / min(r_i, δ_Γ(z))`.
pub fn john_l0_bound(d: f64, r_i: f64, delta_z: f64) -> f64 {
    d / r_i.min(delta_z)
}

/// `1 ≤ p ≤ r ≤ Np/(N − p(1−α))`, `p(1−α) < N`, `0 ≤ α ≤ 1`.
pub fn condition_hs(n: usize, r: f64, p: f64, alpha: f64) -> bool {
    let nf = n as f64;
    let slack = 1e-12;
    (0.0..=1.0).contains(&alpha)
        && p >= 1.0
        && p * (1.0 - alpha) < nf
        && p <= r * (1.0 + slack)
        && r <= nf * p / (nf - p * (1.0 - alpha)) * (1.0 + slack)
}

/// `r = p ≥ 1`, `α = 0`.
pub fn condition_bs(r: f64, p: f64, alpha: f64) -> bool {
    r == p && p >= 1.0 && alpha == 0.0
}

pub fn check_exponents(n: usize, r: f64, p: f64, alpha: f64) -> Result<()> {
    if condition_hs(n, r, p, alpha) || condition_bs(r, p, alpha) {
        Ok(())
    } else {
        Err(Error::ConditionViolated { r, p, alpha, dim: n })
    }
}

/// Which Hardy–Poincaré regime a bound was taken from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MuRegime {
    /// Weighted case `1 ≤ p ≤ r ≤ Np/(N − p(1−α))`.
    Weighted,
    /// Unweighted case `r = p`, `α = 0`.
    Unweighted,
}

/// Upper bounds `(μ̄⁻¹, μ⁻¹)` for a `C²` domain, with `k = 1`.
/// The weighted regime is used whenever it applies. `volume` may be an upper
/// bound for `|Ω|` (the exponent of `|Ω|` is nonnegative in that regime).
pub fn mu_inverse_bounds(
    n: usize,
    r: f64,
    p: f64,
    alpha: f64,
    d: f64,
    r_i: f64,
    delta_z: f64,
    volume: f64,
) -> Result<(f64, f64, MuRegime)> {
    let nf = n as f64;
    if condition_hs(n, r, p, alpha) {
        let vol = volume.powf((1.0 - alpha) / nf + 1.0 / r - 1.0 / p);
        let bar = PLACEHOLDER_K * (d / r_i).powf(nf) * vol;
        let centered = PLACEHOLDER_K * (d / r_i.min(delta_z)).powf(nf) * vol;
        Ok((bar, centered, MuRegime::Weighted))
    } else if condition_bs(r, p, alpha) {
        let e = 3.0 * nf * (1.0 + nf / p);
        let bar = PLACEHOLDER_K * d.powf(e + 1.0) / r_i.powf(e);
        let centered = PLACEHOLDER_K * d.powf(e + 1.0) / r_i.min(delta_z).powf(e);
        Ok((bar, centered, MuRegime::Unweighted))
    } else {
        Err(Error::ConditionViolated { r, p, alpha, dim: n })
    }
}

/// `(2/r_i)(1 + N/(r_i μ²))`, the trace-inequality factor for `μ = μ_{2,2,1/2}`.
pub fn trace_factor(n: usize, r_i: f64, mu: f64) -> f64 {
    2.0 / r_i * (1.0 + n as f64 / (r_i * mu * mu))
}

/// `((M + R)/r_i)(1 + N/(r_i μ²))`: `‖h_ν‖_{2,Γ} ≤ factor · ‖u_ν − R‖_{2,Γ}`.
pub fn feldman_factor(n: usize, m: f64, r: f64, r_i: f64, mu: f64) -> f64 {
    (m + r) / r_i * (1.0 + n as f64 / (r_i * mu * mu))
}

/// `R{d + M(M+R)/r_i (1 + N/(r_i μ²))}`: `‖u_ν − R‖₂ ≤ factor · ‖H₀ − H‖₂`.
pub fn sbt_chain_factor(n: usize, m: f64, r: f64, r_i: f64, d: f64, mu: f64) -> f64 {
    r * (d + m * (m + r) / r_i * (1.0 + n as f64 / (r_i * mu * mu)))
}

/// Deviations whose stability exponent is tabulated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Problem {
    Serrin,
    Sbt,
    Hk,
    OneOverH,
}

/// Stability exponent `τ_N`.
pub fn tau(n: usize, problem: Problem, theta: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidDimension(n));
    }
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::InvalidTheta(theta));
    }
    let nf = n as f64;
    Ok(match problem {
        Problem::Serrin => match n {
            2 => 1.0,
            3 => 1.0 - theta,
            _ => 2.0 / (nf - 1.0),
        },
        Problem::Sbt | Problem::Hk | Problem::OneOverH => match n {
            2 | 3 => 1.0,
            4 => 1.0 - theta,
            _ => 2.0 / (nf - 2.0),
        },
    })
}

/// Inputs to [`ledger`]; optional entries are replaced by admissible bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerInputs {
    pub dim: usize,
    pub p: f64,
    pub diameter: f64,
    pub r_i: f64,
    #[serde(with = "crate::serde_inf")]
    pub r_e: f64,
    /// `M = max_Γ u_ν`.
    pub m: f64,
    pub volume: Option<f64>,
    pub surface: Option<f64>,
    /// `δ_Γ(z)`; defaults to the bound `r_i²/(2M)`.
    pub delta_z: Option<f64>,
    pub theta: f64,
}

impl LedgerInputs {
    pub fn from_summary(summary: &GeometrySummary, p: f64, delta_z: f64, m: f64) -> Self {
        LedgerInputs {
            dim: summary.dim,
            p,
            diameter: summary.diameter,
            r_i: summary.r_i,
            r_e: summary.r_e,
            m,
            volume: Some(summary.volume),
            surface: Some(summary.surface),
            delta_z: Some(delta_z),
            theta: DEFAULT_THETA,
        }
    }
}

/// Every explicit constant, evaluated as printed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantLedger {
    pub dim: usize,
    pub p: f64,
    /// `R = N|Ω|/|Γ|`, when both measures are known.
    pub r: Option<f64>,
    /// `H₀ = 1/R`.
    pub h0: Option<f64>,
    pub c_n: f64,
    pub m: f64,
    /// `c_N d (d + r_e)/r_e` (equal to the convex branch when `r_e = ∞`).
    pub m_bound: f64,
    /// `c_N d`.
    pub m_bound_convex: f64,
    /// Convex-branch formula offered for mean-convex domains; its constant is unverified.
    pub m_bound_mean_convex: f64,
    pub osc_a: f64,
    pub osc_alpha: f64,
    /// Lemma constant with `M`.
    pub oscillation_constant: f64,
    /// Lemma constant with `M` bounded through `r_e`.
    #[serde(with = "crate::serde_inf")]
    pub oscillation_constant_re: f64,
    pub oscillation_constant_mean_convex: f64,
    pub john_b0: f64,
    pub john_l0: f64,
    pub delta_z: f64,
    pub delta_z_lower_bound: f64,
    /// `|Ω|` used in the Hardy–Poincaré bounds (possibly the bound `|B|(d/2)^N`).
    pub volume_used: f64,
    /// `μ̄_{2,2,1/2}⁻¹` and `μ_{2,2,1/2}⁻¹`, weighted regime.
    pub mu_bar_inv_weighted: f64,
    pub mu_inv_weighted: f64,
    /// `μ̄_{p,p,0}⁻¹` and `μ_{p,p,0}⁻¹`, unweighted regime.
    pub mu_bar_inv_unweighted: f64,
    pub mu_inv_unweighted: f64,
    /// Factors with `μ = μ_{2,2,1/2}` from its analytic bound.
    pub trace_factor: f64,
    pub feldman_factor: Option<f64>,
    pub sbt_chain_factor: Option<f64>,
    pub theta: f64,
    pub tau_serrin: f64,
    pub tau_sbt: f64,
    pub placeholder_k: bool,
    pub k_value: f64,
    pub mean_convex_unverified_constant: bool,
}

pub fn ledger(inputs: &LedgerInputs) -> Result<ConstantLedger> {
    let LedgerInputs { dim: n, p, diameter: d, r_i, r_e, m, .. } = *inputs;
    if n < 2 {
        return Err(Error::InvalidDimension(n));
    }
    for (name, v) in [("p", p), ("d", d), ("r_i", r_i), ("M", m)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidParameter(format!("{name} = {v} must be positive and finite")));
        }
    }
    if p < 1.0 {
        return Err(Error::InvalidParameter(format!("p = {p} must be at least 1")));
    }
    if !(r_e > 0.0) {
        return Err(Error::InvalidParameter(format!("r_e = {r_e} must be positive")));
    }
    let r = match (inputs.volume, inputs.surface) {
        (Some(v), Some(s)) => Some(n as f64 * v / s),
        _ => None,
    };
    let delta_z_lower_bound = center_distance_lower_bound(r_i, m);
    let delta_z = inputs.delta_z.unwrap_or(delta_z_lower_bound);
    let volume_used = inputs
        .volume
        .unwrap_or_else(|| unit_ball_volume(n) * (d / 2.0).powi(n as i32));
    let (mu_bar_w, mu_w, _) = mu_inverse_bounds(n, 2.0, 2.0, 0.5, d, r_i, delta_z, volume_used)?;
    let (mu_bar_u, mu_u, _) = mu_inverse_bounds(n, p, p, 0.0, d, r_i, delta_z, volume_used)?;
    let mu = 1.0 / mu_w;
    Ok(ConstantLedger {
        dim: n,
        p,
        r,
        h0: r.map(|r| 1.0 / r),
        c_n: c_n(n),
        m,
        m_bound: m_bound(n, d, r_e),
        m_bound_convex: m_bound(n, d, f64::INFINITY),
        m_bound_mean_convex: m_bound(n, d, f64::INFINITY),
        osc_a: osc_a(n, p),
        osc_alpha: osc_alpha(n, p),
        oscillation_constant: oscillation_constant(n, p, d, r_i, m),
        oscillation_constant_re: oscillation_constant_re(n, p, d, r_i, r_e),
        oscillation_constant_mean_convex: oscillation_constant_mean_convex(n, p, d, r_i),
        john_b0: john_b0_bound(d, r_i),
        john_l0: john_l0_bound(d, r_i, delta_z),
        delta_z,
        delta_z_lower_bound,
        volume_used,
        mu_bar_inv_weighted: mu_bar_w,
        mu_inv_weighted: mu_w,
        mu_bar_inv_unweighted: mu_bar_u,
        mu_inv_unweighted: mu_u,
        trace_factor: trace_factor(n, r_i, mu),
        feldman_factor: r.map(|r| feldman_factor(n, m, r, r_i, mu)),
        sbt_chain_factor: r.map(|r| sbt_chain_factor(n, m, r, r_i, d, mu)),
        theta: inputs.theta,
        tau_serrin: tau(n, Problem::Serrin, inputs.theta)?,
        tau_sbt: tau(n, Problem::Sbt, inputs.theta)?,
        placeholder_k: true,
        k_value: PLACEHOLDER_K,
        mean_convex_unverified_constant: true,
    })
}
