//! The torsion function: `Δu = N` in `Ω`, `u = 0` on `Γ`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{BoundaryGrid, Domain, VolumeGrid};
use crate::linalg::Cpqr;

/// Default harmonic-polynomial degree for planar collocation.
pub const DEFAULT_DEGREE: usize = 40;

const MAX_CONDITION: f64 = 1e14;
const OVERSAMPLING: usize = 4;

/// Value, gradient and Hessian of `u` at a point, plus the Hessian of the
/// harmonic part `∇²h = I − ∇²u`, assembled so that its trace vanishes exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    pub u: f64,
    pub grad: Vec<f64>,
    /// Row-major `N × N`.
    pub hess: Vec<f64>,
    /// Row-major `N × N`; `I − ∇²u`.
    pub hess_h: Vec<f64>,
}

impl Jet {
    pub fn dim(&self) -> usize {
        self.grad.len()
    }

    pub fn hess_at(&self, i: usize, j: usize) -> f64 {
        self.hess[i * self.dim() + j]
    }

    pub fn laplacian(&self) -> f64 {
        let n = self.dim();
        (0..n).map(|i| self.hess[i * n + i]).sum()
    }

    /// `|∇²u|²`.
    pub fn hess_norm_sq(&self) -> f64 {
        self.hess.iter().map(|x| x * x).sum()
    }

    /// `|∇²h|²`.
    pub fn hess_h_norm_sq(&self) -> f64 {
        self.hess_h.iter().map(|x| x * x).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Representation {
    /// `u = c (Σ x_i²/a_i² − 1)`.
    ClosedFormEllipsoid { c: f64, axes: Vec<f64> },
    /// `u = |x|²/2 + Re Σ_k (α_k − iβ_k) ξ^k`, `ξ = (x₁ + i x₂)/scale`.
    HarmonicSplit {
        scale: f64,
        alpha: Vec<f64>,
        /// `β_1..β_K`.
        beta: Vec<f64>,
    },
}

#[derive(Debug, Clone)]
pub struct TorsionField {
    domain: Domain,
    repr: Representation,
    residual: f64,
    condition: f64,
}

impl TorsionField {
    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn representation(&self) -> &Representation {
        &self.repr
    }

    /// `max_Γ |u|` on a check grid four times finer than the collocation grid;
    /// exactly zero for closed forms.
    pub fn boundary_residual(&self) -> f64 {
        self.residual
    }

    /// Condition estimate of the collocation system (1 for closed forms).
    pub fn condition(&self) -> f64 {
        self.condition
    }

    pub fn is_closed_form(&self) -> bool {
        matches!(self.repr, Representation::ClosedFormEllipsoid { .. })
    }

    pub fn degree(&self) -> Option<usize> {
        match &self.repr {
            Representation::ClosedFormEllipsoid { .. } => None,
            Representation::HarmonicSplit { beta, .. } => Some(beta.len()),
        }
    }

    /// Evaluation at a point of the closed domain.
    pub fn eval(&self, x: &[f64]) -> Result<Jet> {
        if !self.domain.contains_with_slack(x, 1e-9) {
            return Err(Error::OutsideDomain(x.to_vec()));
        }
        Ok(self.eval_unchecked(x))
    }

    /// Evaluation without the membership check; both representations extend
    /// to all of `R^N`.
    pub fn eval_unchecked(&self, x: &[f64]) -> Jet {
        match &self.repr {
            Representation::ClosedFormEllipsoid { c, axes } => {
                let n = axes.len();
                let mut u = -c;
                let mut grad = vec![0.0; n];
                let mut hess = vec![0.0; n * n];
                let mut hess_h = vec![0.0; n * n];
                let mut diag_u = 0.0;
                let mut diag_h = 0.0;
                for i in 0..n {
                    let a2 = axes[i] * axes[i];
                    u += c * x[i] * x[i] / a2;
                    grad[i] = 2.0 * c * x[i] / a2;
                    if i + 1 < n {
                        hess[i * n + i] = 2.0 * c / a2;
                        hess_h[i * n + i] = 1.0 - 2.0 * c / a2;
                        diag_u += hess[i * n + i];
                        diag_h += hess_h[i * n + i];
                    }
                }
                // Close the traces exactly: Δu = N, Δh = 0.
                hess[n * n - 1] = n as f64 - diag_u;
                hess_h[n * n - 1] = -diag_h;
                Jet { u, grad, hess, hess_h }
            }
            Representation::HarmonicSplit { scale, alpha, beta } => {
                let xi = Complex64::new(x[0] / scale, x[1] / scale);
                // f, f', f'' of f(ξ) = Σ (α_k − iβ_k) ξ^k by Horner.
                let k_max = alpha.len() - 1;
                let coef = |k: usize| {
                    Complex64::new(alpha[k], if k == 0 { 0.0 } else { -beta[k - 1] })
                };
                let mut f = Complex64::new(0.0, 0.0);
                let mut f1 = Complex64::new(0.0, 0.0);
                let mut f2 = Complex64::new(0.0, 0.0);
                for k in (0..=k_max).rev() {
                    f2 = f2 * xi + 2.0 * f1;
                    f1 = f1 * xi + f;
                    f = f * xi + coef(k);
                }
                let s = *scale;
                let phi = f.re;
                let (px, py) = (f1.re / s, -f1.im / s);
                let (pxx, pxy) = (f2.re / (s * s), -f2.im / (s * s));
                let u = 0.5 * (x[0] * x[0] + x[1] * x[1]) + phi;
                let grad = vec![x[0] + px, x[1] + py];
                let h11 = 1.0 + pxx;
                let hess = vec![h11, pxy, pxy, 2.0 - h11];
                let hess_h = vec![-pxx, -pxy, -pxy, pxx];
                Jet { u, grad, hess, hess_h }
            }
        }
    }
}

/// Closed-form torsion function of an ellipsoid: `c = N / (2 Σ a_i⁻²)`.
pub fn solve_ellipsoid(domain: &Domain) -> Result<TorsionField> {
    let Domain::Ellipsoid(e) = domain else {
        return Err(Error::InvalidParameter("closed-form torsion needs an ellipsoid".into()));
    };
    let axes = e.axes().to_vec();
    let inv: f64 = axes.iter().map(|a| 1.0 / (a * a)).sum();
    let c = axes.len() as f64 / (2.0 * inv);
    Ok(TorsionField {
        domain: domain.clone(),
        repr: Representation::ClosedFormEllipsoid { c, axes },
        residual: 0.0,
        condition: 1.0,
    })
}

/// Planar torsion by harmonic-polynomial collocation: `u = |x|²/2 + φ` with
/// `φ = −|x|²/2` on `Γ`, fitted by least squares at `4(2K + 1)` boundary nodes.
/// Any planar domain is accepted, so ellipses can be cross-checked against
/// their closed form.
pub fn solve_fourier2d(domain: &Domain, degree: usize) -> Result<TorsionField> {
    if domain.dim() != 2 {
        return Err(Error::UnsupportedDimension { what: "planar collocation", dim: domain.dim() });
    }
    if degree < 4 {
        return Err(Error::InvalidParameter(format!("solver degree {degree} is below 4")));
    }
    let unknowns = 2 * degree + 1;
    let rows = OVERSAMPLING * unknowns;
    let nodes: Vec<Vec<f64>> = (0..rows)
        .map(|j| domain.boundary_position(&[2.0 * PI * j as f64 / rows as f64]))
        .collect();
    let scale = nodes.iter().map(|p| p[0].hypot(p[1])).fold(0.0, f64::max);

    // Columns: Re ξ^k (k = 0..K), Im ξ^k (k = 1..K); normalized to unit length.
    let mut re_cols = vec![vec![0.0; rows]; degree + 1];
    let mut im_cols = vec![vec![0.0; rows]; degree];
    for (j, p) in nodes.iter().enumerate() {
        let xi = Complex64::new(p[0] / scale, p[1] / scale);
        let mut pow = Complex64::new(1.0, 0.0);
        for k in 0..=degree {
            re_cols[k][j] = pow.re;
            if k > 0 {
                im_cols[k - 1][j] = pow.im;
            }
            pow *= xi;
        }
    }
    let mut columns: Vec<Vec<f64>> = re_cols.into_iter().chain(im_cols).collect();
    let col_scale: Vec<f64> = columns
        .iter()
        .map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt())
        .collect();
    for (c, s) in columns.iter_mut().zip(&col_scale) {
        if *s > 0.0 {
            c.iter_mut().for_each(|v| *v /= s);
        }
    }
    let rhs: Vec<f64> = nodes.iter().map(|p| -0.5 * (p[0] * p[0] + p[1] * p[1])).collect();
    let qr = Cpqr::factor(&columns);
    let condition = qr.condition_estimate();
    if !(condition <= MAX_CONDITION) {
        return Err(Error::IllConditioned { condition });
    }
    // One step of iterative refinement against the normalized system.
    let mut z = qr.solve(&rhs);
    let correction = qr.solve(&residual(&columns, &z, &rhs));
    z.iter_mut().zip(&correction).for_each(|(a, d)| *a += d);
    let sol: Vec<f64> = z
        .iter()
        .zip(&col_scale)
        .map(|(x, s)| if *s > 0.0 { x / s } else { 0.0 })
        .collect();
    // Solving for ξ^k coefficients: φ = Σ a_k Re ξ^k + b_k Im ξ^k = Re Σ (a_k − i b_k) ξ^k.
    let alpha = sol[..=degree].to_vec();
    let beta = sol[degree + 1..].to_vec();

    let mut field = TorsionField {
        domain: domain.clone(),
        repr: Representation::HarmonicSplit { scale, alpha, beta },
        residual: 0.0,
        condition,
    };
    let check = 4 * rows;
    field.residual = (0..check)
        .map(|j| {
            let p = domain.boundary_position(&[2.0 * PI * (j as f64 + 0.5) / check as f64]);
            field.eval_unchecked(&p).u.abs()
        })
        .fold(0.0, f64::max);
    Ok(field)
}

fn residual(columns: &[Vec<f64>], x: &[f64], b: &[f64]) -> Vec<f64> {
    (0..b.len())
        .map(|i| {
            let ax = crate::quadrature::compensated_sum(columns.iter().zip(x).map(|(c, xj)| c[i] * xj));
            b[i] - ax
        })
        .collect()
}

/// Closed form for ellipsoids, collocation for planar Fourier domains.
pub fn solve(domain: &Domain, degree: usize) -> Result<TorsionField> {
    match domain {
        Domain::Ellipsoid(_) => solve_ellipsoid(domain),
        Domain::Fourier2D(_) => solve_fourier2d(domain, degree),
    }
}

/// Highest degree [`solve_adaptive`] will try.
pub const MAX_DEGREE: usize = 160;
/// Target for `max_Γ |u|`, relative to the squared mean radius.
pub const RESIDUAL_TARGET: f64 = 1e-11;

/// Like [`solve`], but for collocation raises the degree from `degree` in
/// steps of one half until the boundary residual meets [`RESIDUAL_TARGET`],
/// the system becomes ill-conditioned, or [`MAX_DEGREE`] is reached. Returns
/// the field with the smallest residual.
pub fn solve_adaptive(domain: &Domain, degree: usize) -> Result<TorsionField> {
    let Domain::Fourier2D(curve) = domain else {
        return solve(domain, degree);
    };
    let target = RESIDUAL_TARGET * curve.cos_coefficients()[0].powi(2);
    let mut best = solve_fourier2d(domain, degree)?;
    let mut k = degree;
    while best.boundary_residual() > target && k < MAX_DEGREE {
        k = (k + k / 2).min(MAX_DEGREE);
        match solve_fourier2d(domain, k) {
            Ok(f) if f.boundary_residual() < best.boundary_residual() => best = f,
            Ok(_) => break,
            Err(Error::IllConditioned { .. }) => break,
            Err(e) => return Err(e),
        }
    }
    Ok(best)
}

/// `M = max_Γ u_ν`, which equals `max_Ω |∇u|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientBound {
    pub m: f64,
    /// Boundary node with the largest `u_ν` before refinement.
    pub node: usize,
    /// Boundary parameters of the refined maximizer.
    pub params: Vec<f64>,
}

/// Normal derivative `u_ν` at boundary parameters `t`.
pub fn normal_derivative(field: &TorsionField, t: &[f64]) -> f64 {
    let bp = field.domain().boundary_point(t);
    let jet = field.eval_unchecked(&bp.point);
    jet.grad.iter().zip(&bp.normal).map(|(g, n)| g * n).sum()
}

pub fn gradient_bound(field: &TorsionField, grid: &BoundaryGrid) -> GradientBound {
    let un: Vec<f64> = (0..grid.len())
        .map(|j| {
            let g = field.eval_unchecked(grid.point(j)).grad;
            g.iter().zip(grid.normal(j)).map(|(a, b)| a * b).sum()
        })
        .collect();
    let node = (0..un.len()).max_by(|&a, &b| un[a].total_cmp(&un[b])).unwrap_or(0);
    let (params, neg) = grid.polish_min_params(|t| -normal_derivative(field, t));
    GradientBound { m: (-neg).max(un[node]), node, params }
}

/// Volume nodes where `u ≥ 0`, which the maximum principle forbids.
pub fn interior_sign_violations(field: &TorsionField, grid: &VolumeGrid) -> Vec<usize> {
    (0..grid.len())
        .filter(|&m| field.eval_unchecked(grid.point(m)).u >= 0.0)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{boundary_grid, volume_grid};
    use proptest::prelude::*;

    #[test]
    fn unit_ball_closed_form() {
        for n in [2, 3, 5] {
            let f = solve_ellipsoid(&Domain::ball(1.0, n).unwrap()).unwrap();
            let jet = f.eval(&vec![0.0; n]).unwrap();
            assert_eq!(jet.u, -0.5);
            assert!(jet.grad.iter().all(|&g| g == 0.0));
            for i in 0..n {
                for j in 0..n {
                    assert_eq!(jet.hess_at(i, j), if i == j { 1.0 } else { 0.0 });
                }
            }
            assert!(jet.hess_h.iter().all(|&v| v == 0.0));
            let g = boundary_grid(f.domain(), 16).unwrap();
            let mut params = vec![0.3; n - 1];
            params[0] = 1.1;
            assert!((normal_derivative(&f, &params) - 1.0).abs() < 1e-15);
            assert!((gradient_bound(&f, &g).m - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn adaptive_degree_meets_target() {
        let d = Domain::fourier(&[1.0, 0.0, 0.0, 0.0, 0.1], &[]).unwrap();
        let fixed = solve_fourier2d(&d, 40).unwrap();
        let f = solve_adaptive(&d, 40).unwrap();
        assert!(fixed.boundary_residual() > RESIDUAL_TARGET);
        assert!(f.degree().unwrap() > 40 && f.boundary_residual() <= RESIDUAL_TARGET, "{}", f.boundary_residual());
        let easy = Domain::fourier(&[1.0, 0.0, 0.05], &[]).unwrap();
        assert_eq!(solve_adaptive(&easy, 40).unwrap().degree(), Some(40));
    }

    #[test]
    fn ellipse_closed_form_values() {
        let f = solve_ellipsoid(&Domain::ellipsoid(&[2.0, 1.0]).unwrap()).unwrap();
        let Representation::ClosedFormEllipsoid { c, .. } = f.representation() else { unreachable!() };
        assert!((c - 0.8).abs() < 1e-15);
        let jet = f.eval(&[0.0, 0.0]).unwrap();
        assert!((jet.u + 0.8).abs() < 1e-15);
        assert!((jet.hess_at(0, 0) - 0.4).abs() < 1e-15 && (jet.hess_at(1, 1) - 1.6).abs() < 1e-15);
        assert_eq!(jet.laplacian(), 2.0);
        assert!((normal_derivative(&f, &[0.0]) - 0.8).abs() < 1e-15);
        assert!((normal_derivative(&f, &[PI / 2.0]) - 1.6).abs() < 1e-15);
        let g = boundary_grid(f.domain(), 64).unwrap();
        let gb = gradient_bound(&f, &g);
        assert!((gb.m - 1.6).abs() < 1e-14);
        let p = f.domain().boundary_position(&gb.params);
        assert!(p[0].abs() < 1e-6 && (p[1].abs() - 1.0).abs() < 1e-12);
        assert_eq!(f.eval(&[2.5, 0.0]).unwrap_err(), Error::OutsideDomain(vec![2.5, 0.0]));
    }

    #[test]
    fn ball_of_radius_rho_has_m_equal_rho() {
        for rho in [0.5, 2.0] {
            let f = solve_ellipsoid(&Domain::ball(rho, 3).unwrap()).unwrap();
            let g = boundary_grid(f.domain(), 16).unwrap();
            assert!((gradient_bound(&f, &g).m - rho).abs() < 1e-14);
        }
    }

    #[test]
    fn collocation_on_unit_disk_is_exact() {
        for degree in [4, 12, 40] {
            let f = solve_fourier2d(&Domain::fourier(&[1.0], &[]).unwrap(), degree).unwrap();
            assert!(f.boundary_residual() <= 1e-14, "K={degree}: {}", f.boundary_residual());
            let jet = f.eval(&[0.3, -0.2]).unwrap();
            assert!((jet.u - 0.5 * (0.13 - 1.0)).abs() < 1e-14);
        }
    }

    /// Fourier coefficients of the ellipse's polar radius by trapezoidal DFT.
    fn ellipse_fourier(a: f64, b: f64, k_geom: usize) -> Vec<f64> {
        let m = 4096;
        let r = |t: f64| a * b / ((b * t.cos()).powi(2) + (a * t.sin()).powi(2)).sqrt();
        (0..=k_geom)
            .map(|k| {
                let s: f64 = (0..m)
                    .map(|j| {
                        let t = 2.0 * PI * j as f64 / m as f64;
                        r(t) * (k as f64 * t).cos()
                    })
                    .sum();
                if k == 0 { s / m as f64 } else { 2.0 * s / m as f64 }
            })
            .collect()
    }

    #[test]
    fn collocation_matches_closed_form_ellipse() {
        let (a, b) = (1.2, 1.0 / 1.2);
        let cos = ellipse_fourier(a, b, 32);
        let fourier = solve_fourier2d(&Domain::fourier(&cos, &[]).unwrap(), 40).unwrap();
        let exact = solve_ellipsoid(&Domain::ellipsoid(&[a, b]).unwrap()).unwrap();
        let grid = boundary_grid(exact.domain(), 256).unwrap();
        let mut worst = 0.0f64;
        for j in 0..grid.len() {
            // Same physical point: eccentric angle for the ellipse, polar angle for the curve.
            let p = grid.point(j);
            let theta = p[1].atan2(p[0]);
            let diff = normal_derivative(&fourier, &[theta]) - normal_derivative(&exact, grid.params(j));
            worst = worst.max(diff.abs());
        }
        assert!(worst <= 1e-8, "max |Δu_ν| = {worst:e}");
    }

    #[test]
    fn collocation_residual_decays_with_degree() {
        let d = Domain::fourier(&[1.0, 0.0, 0.05], &[]).unwrap();
        let res: Vec<f64> = [8, 16, 24, 40]
            .iter()
            .map(|&k| solve_fourier2d(&d, k).unwrap().boundary_residual())
            .collect();
        assert!(res[3] <= 1e-10, "{res:?}");
        assert!(res[1] < 1e-2 * res[0] && res[2] < res[1], "{res:?}");
    }

    #[test]
    fn collocation_rejects_bad_inputs() {
        let d3 = Domain::ball(1.0, 3).unwrap();
        assert!(matches!(solve_fourier2d(&d3, 10), Err(Error::UnsupportedDimension { .. })));
        let d = Domain::fourier(&[1.0], &[]).unwrap();
        assert!(matches!(solve_fourier2d(&d, 3), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn torsion_is_negative_inside() {
        let d = Domain::fourier(&[1.0, 0.05, 0.0, 0.04], &[0.02, 0.0, 0.03]).unwrap();
        let f = solve_fourier2d(&d, 40).unwrap();
        let v = volume_grid(&d, 12, 64).unwrap();
        assert!(interior_sign_violations(&f, &v).is_empty());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn laplacian_is_exactly_n(
            axes in proptest::collection::vec(0.3f64..3.0, 2..6),
            dir in proptest::collection::vec(-1.0f64..1.0, 5),
            r in 0.0f64..1.0,
        ) {
            let n = axes.len();
            let f = solve_ellipsoid(&Domain::ellipsoid(&axes).unwrap()).unwrap();
            let x: Vec<f64> = (0..n).map(|i| r * axes[i] * dir[i] / (n as f64).sqrt()).collect();
            let jet = f.eval(&x).unwrap();
            prop_assert_eq!(jet.laplacian(), n as f64);
            prop_assert_eq!((0..n).map(|i| jet.hess_h[i * n + i]).sum::<f64>(), 0.0);
        }

        #[test]
        fn planar_laplacian_is_exactly_two(
            c2 in -0.08f64..0.08,
            s3 in -0.05f64..0.05,
            t in 0.0f64..(2.0 * PI),
            r in 0.0f64..0.9,
        ) {
            let d = Domain::fourier(&[1.0, 0.0, c2], &[0.0, 0.0, s3]).unwrap();
            let f = solve_fourier2d(&d, 16).unwrap();
            let x = [r * 0.85 * t.cos(), r * 0.85 * t.sin()];
            let jet = f.eval(&x).unwrap();
            prop_assert_eq!(jet.laplacian(), 2.0);
            prop_assert_eq!(jet.hess_h[0] + jet.hess_h[3], 0.0);
        }
    }
}
