use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optimize::golden_min;

/// Number of samples used to validate positivity of a Fourier radius and to
/// seed boundary projections.
const FOURIER_SAMPLES: usize = 4096;

/// Serializable description of a star-shaped domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum DomainSpec {
    Ellipsoid {
        axes: Vec<f64>,
    },
    Fourier2d {
        cos: Vec<f64>,
        #[serde(default)]
        sin: Vec<f64>,
    },
}

impl DomainSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidSpec(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("domain spec serializes")
    }
}

/// Validates a description and returns the corresponding domain.
pub fn build_domain(spec: &DomainSpec) -> Result<Domain> {
    match spec {
        DomainSpec::Ellipsoid { axes } => Ellipsoid::new(axes.clone()).map(Domain::Ellipsoid),
        DomainSpec::Fourier2d { cos, sin } => {
            FourierCurve::new(cos.clone(), sin.clone()).map(Domain::Fourier2D)
        }
    }
}

/// A point on the boundary with the local differential data the integrals need.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryPoint {
    pub point: Vec<f64>,
    /// Unit outward normal.
    pub normal: Vec<f64>,
    /// Surface measure per unit parameter measure (`dS = area_density dparams`).
    pub area_density: f64,
    /// Mean curvature, averaged over principal curvatures, positive on balls.
    pub mean_curvature: f64,
}

/// Axis-aligned ellipsoid centered at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct Ellipsoid {
    axes: Vec<f64>,
}

impl Ellipsoid {
    pub fn new(axes: Vec<f64>) -> Result<Self> {
        if axes.len() < 2 {
            return Err(Error::InvalidDimension(axes.len()));
        }
        for (index, &value) in axes.iter().enumerate() {
            if !(value > 0.0) || !value.is_finite() {
                return Err(Error::NonPositiveAxis { index, value });
            }
        }
        Ok(Self { axes })
    }

    pub fn axes(&self) -> &[f64] {
        &self.axes
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn is_ball(&self) -> bool {
        self.axes.iter().all(|&a| a == self.axes[0])
    }

    fn level(&self, y: &[f64]) -> f64 {
        y.iter().zip(&self.axes).map(|(y, a)| (y / a) * (y / a)).sum()
    }

    fn boundary_point(&self, params: &[f64]) -> BoundaryPoint {
        let n = self.dim();
        let (omega, sphere_density) = sphere_direction(params, n);
        let point: Vec<f64> = omega.iter().zip(&self.axes).map(|(w, a)| w * a).collect();
        // g = D x with D = diag(1/a_i^2); ν = g/|g|
        let g: Vec<f64> = point.iter().zip(&self.axes).map(|(x, a)| x / (a * a)).collect();
        let g_norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        let normal: Vec<f64> = g.iter().map(|v| v / g_norm).collect();
        let trace_d: f64 = self.axes.iter().map(|a| 1.0 / (a * a)).sum();
        let gdg: f64 = g.iter().zip(&self.axes).map(|(v, a)| v * v / (a * a)).sum();
        let mean_curvature = (trace_d / g_norm - gdg / g_norm.powi(3)) / (n as f64 - 1.0);
        // dS = det(A) |A^{-1} ω| dσ
        let det: f64 = self.axes.iter().product();
        let inv_norm = omega
            .iter()
            .zip(&self.axes)
            .map(|(w, a)| (w / a) * (w / a))
            .sum::<f64>()
            .sqrt();
        BoundaryPoint {
            point,
            normal,
            area_density: det * inv_norm * sphere_density,
            mean_curvature,
        }
    }

    /// Closest boundary point to `y` and its distance, via the Lagrange
    /// multiplier equation `Σ (a_i y_i / (s + a_i² − a_min²))² = 1`, written in
    /// the shifted multiplier `s > 0` so that the minimal axes carry no
    /// cancellation near the center.
    fn closest_point(&self, y: &[f64]) -> Result<(Vec<f64>, f64)> {
        let a = &self.axes;
        if self.is_ball() {
            let r = y.iter().map(|v| v * v).sum::<f64>().sqrt();
            let mut x = vec![0.0; a.len()];
            if r > 0.0 {
                x.iter_mut().zip(y).for_each(|(x, y)| *x = a[0] * y / r);
            } else {
                x[0] = a[0];
            }
            return Ok((x, (a[0] - r).abs()));
        }
        let abs_y: Vec<f64> = y.iter().map(|v| v.abs()).collect();
        let a_min = a.iter().cloned().fold(f64::INFINITY, f64::min);
        let gap: Vec<f64> = a.iter().map(|ai| ai * ai - a_min * a_min).collect();
        let is_min = |i: usize| gap[i] <= 2.0 * f64::EPSILON * a_min * a_min;
        let min_axis_active = (0..a.len()).any(|i| is_min(i) && abs_y[i] > 0.0);

        let mut x = vec![0.0; a.len()];
        let solved = |x: &mut Vec<f64>| -> Result<()> {
            let s = self.solve_multiplier(&abs_y, &gap, y)?;
            for i in 0..a.len() {
                if abs_y[i] > 0.0 {
                    x[i] = a[i] * a[i] * abs_y[i] / (s + gap[i]);
                }
            }
            Ok(())
        };
        if min_axis_active {
            solved(&mut x)?;
        } else {
            let mut s = 0.0;
            for i in 0..a.len() {
                if !is_min(i) {
                    let v = a[i] * abs_y[i] / gap[i];
                    s += v * v;
                }
            }
            if s < 1.0 {
                for i in 0..a.len() {
                    if !is_min(i) {
                        x[i] = a[i] * a[i] * abs_y[i] / gap[i];
                    }
                }
                let first_min = (0..a.len()).find(|&i| is_min(i)).expect("some axis is minimal");
                x[first_min] = a_min * (1.0 - s).max(0.0).sqrt();
            } else {
                solved(&mut x)?;
            }
        }
        for i in 0..a.len() {
            if y[i] < 0.0 {
                x[i] = -x[i];
            }
        }
        let dist = x.iter().zip(y).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt();
        Ok((x, dist))
    }

    fn solve_multiplier(&self, abs_y: &[f64], gap: &[f64], y: &[f64]) -> Result<f64> {
        let a = &self.axes;
        let f = |s: f64| -> (f64, f64) {
            let mut v = -1.0;
            let mut dv = 0.0;
            for i in 0..a.len() {
                if abs_y[i] == 0.0 {
                    continue;
                }
                let r = a[i] * abs_y[i] / (s + gap[i]);
                v += r * r;
                dv -= 2.0 * r * r / (s + gap[i]);
            }
            (v, dv)
        };
        // F is strictly decreasing on (0, ∞) and negative beyond a_max (|y| + a_max).
        let y_norm = abs_y.iter().map(|v| v * v).sum::<f64>().sqrt();
        let a_max = a.iter().cloned().fold(0.0, f64::max);
        let mut lo = 0.0;
        let mut hi = a_max * (y_norm + a_max);
        if f(hi).0 > 0.0 {
            return Err(Error::ProjectionDiverged { point: y.to_vec() });
        }
        // For points inside, the root lies below a_min²; start there.
        let a_min_sq = a_max * a_max - gap.iter().cloned().fold(0.0, f64::max);
        let mut t = a_min_sq.min(0.5 * hi);
        for _ in 0..200 {
            let (v, dv) = f(t);
            if v == 0.0 {
                return Ok(t);
            }
            if v > 0.0 {
                lo = t;
            } else {
                hi = t;
            }
            let newton = t - v / dv;
            let next = if newton > lo && newton < hi && dv.is_finite() && dv != 0.0 {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if (next - t).abs() <= 4.0 * f64::EPSILON * t.abs() || hi - lo <= 2.0 * f64::EPSILON * hi {
                return Ok(next);
            }
            t = next;
        }
        Err(Error::ProjectionDiverged { point: y.to_vec() })
    }
}

/// Planar domain bounded by `r = R(θ) = c_0 + Σ c_k cos kθ + s_k sin kθ`.
#[derive(Debug, Clone)]
pub struct FourierCurve {
    cos: Vec<f64>,
    sin: Vec<f64>,
    /// `(θ, x, y)` samples for seeding projections.
    seeds: Vec<[f64; 3]>,
}

impl PartialEq for FourierCurve {
    fn eq(&self, other: &Self) -> bool {
        self.cos == other.cos && self.sin == other.sin
    }
}

impl FourierCurve {
    pub fn new(cos: Vec<f64>, sin: Vec<f64>) -> Result<Self> {
        if cos.is_empty() {
            return Err(Error::InvalidSpec("fourier2d needs at least the constant coefficient".into()));
        }
        if cos.iter().chain(&sin).any(|c| !c.is_finite()) {
            return Err(Error::InvalidSpec("fourier2d coefficients must be finite".into()));
        }
        let mut curve = Self { cos, sin, seeds: Vec::new() };
        let mut seeds = Vec::with_capacity(FOURIER_SAMPLES);
        for j in 0..FOURIER_SAMPLES {
            let theta = 2.0 * PI * j as f64 / FOURIER_SAMPLES as f64;
            let (r, _, _) = curve.radius(theta);
            if !(r > 0.0) {
                return Err(Error::NonPositiveRadius { theta, value: r });
            }
            seeds.push([theta, r * theta.cos(), r * theta.sin()]);
        }
        // Catch negative dips between samples.
        for j in 0..FOURIER_SAMPLES {
            let lo = seeds[j][0];
            let hi = lo + 2.0 * PI / FOURIER_SAMPLES as f64;
            let (theta, r) = golden_min(|t| curve.radius(t).0, lo, hi, 1e-10);
            if !(r > 0.0) {
                return Err(Error::NonPositiveRadius { theta, value: r });
            }
        }
        curve.seeds = seeds;
        Ok(curve)
    }

    pub fn cos_coefficients(&self) -> &[f64] {
        &self.cos
    }

    pub fn sin_coefficients(&self) -> &[f64] {
        &self.sin
    }

    /// Highest Fourier mode present.
    pub fn max_mode(&self) -> usize {
        (self.cos.len().saturating_sub(1)).max(self.sin.len())
    }

    /// `(R, R', R'')` at `theta`.
    pub fn radius(&self, theta: f64) -> (f64, f64, f64) {
        let mut r = self.cos[0];
        let mut dr = 0.0;
        let mut ddr = 0.0;
        for k in 1..=self.max_mode() {
            let c = self.cos.get(k).copied().unwrap_or(0.0);
            let s = self.sin.get(k - 1).copied().unwrap_or(0.0);
            let kf = k as f64;
            let (sn, cs) = (kf * theta).sin_cos();
            r += c * cs + s * sn;
            dr += kf * (-c * sn + s * cs);
            ddr -= kf * kf * (c * cs + s * sn);
        }
        (r, dr, ddr)
    }

    pub fn point(&self, theta: f64) -> [f64; 2] {
        let (r, _, _) = self.radius(theta);
        [r * theta.cos(), r * theta.sin()]
    }

    /// Signed curvature of the boundary at `theta` (positive for the disk).
    pub fn curvature(&self, theta: f64) -> f64 {
        let (r, dr, ddr) = self.radius(theta);
        (r * r + 2.0 * dr * dr - r * ddr) / (r * r + dr * dr).powf(1.5)
    }

    fn boundary_point(&self, theta: f64) -> BoundaryPoint {
        let (r, dr, _) = self.radius(theta);
        let (s, c) = theta.sin_cos();
        let speed = (r * r + dr * dr).sqrt();
        BoundaryPoint {
            point: vec![r * c, r * s],
            normal: vec![(r * c + dr * s) / speed, (r * s - dr * c) / speed],
            area_density: speed,
            mean_curvature: self.curvature(theta),
        }
    }

    fn contains(&self, y: &[f64], slack: f64) -> bool {
        let rho = (y[0] * y[0] + y[1] * y[1]).sqrt();
        if rho == 0.0 {
            return true;
        }
        let (r, _, _) = self.radius(y[1].atan2(y[0]));
        rho <= r * (1.0 + slack)
    }

    /// Closest boundary point by Newton on the squared distance in θ, seeded
    /// from the nearest sample node.
    fn closest_point(&self, y: &[f64]) -> Result<(f64, [f64; 2], f64)> {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (j, s) in self.seeds.iter().enumerate() {
            let d = (s[1] - y[0]).powi(2) + (s[2] - y[1]).powi(2);
            if d < best_d {
                best_d = d;
                best = j;
            }
        }
        let h = 2.0 * PI / FOURIER_SAMPLES as f64;
        let theta0 = self.seeds[best][0];
        // g'(θ) = <p', p - y>; bracket it on [θ0 - h, θ0 + h].
        let dg = |t: f64| -> (f64, f64) {
            let (r, dr, ddr) = self.radius(t);
            let (s, c) = t.sin_cos();
            let p = [r * c, r * s];
            let dp = [dr * c - r * s, dr * s + r * c];
            let ddp = [(ddr - r) * c - 2.0 * dr * s, (ddr - r) * s + 2.0 * dr * c];
            let e = [p[0] - y[0], p[1] - y[1]];
            let g1 = dp[0] * e[0] + dp[1] * e[1];
            let g2 = dp[0] * dp[0] + dp[1] * dp[1] + ddp[0] * e[0] + ddp[1] * e[1];
            (g1, g2)
        };
        let mut lo = theta0 - h;
        let mut hi = theta0 + h;
        let (glo, _) = dg(lo);
        let (ghi, _) = dg(hi);
        let theta = if glo < 0.0 && ghi > 0.0 {
            let mut t = theta0;
            let mut converged = false;
            for _ in 0..100 {
                let (g1, g2) = dg(t);
                if g1 == 0.0 {
                    converged = true;
                    break;
                }
                if g1 < 0.0 {
                    lo = t;
                } else {
                    hi = t;
                }
                let newton = t - g1 / g2;
                let next = if g2 > 0.0 && newton > lo && newton < hi {
                    newton
                } else {
                    0.5 * (lo + hi)
                };
                if (next - t).abs() <= 1e-15 * (1.0 + t.abs()) || hi - lo <= 1e-15 {
                    t = next;
                    converged = true;
                    break;
                }
                t = next;
            }
            if !converged {
                return Err(Error::ProjectionDiverged { point: y.to_vec() });
            }
            t
        } else {
            // No interior stationary point next to the seed: fall back to a
            // direct search over the bracket.
            let dist2 = |t: f64| {
                let p = self.point(t);
                (p[0] - y[0]).powi(2) + (p[1] - y[1]).powi(2)
            };
            let (t, v) = golden_min(dist2, theta0 - 2.0 * h, theta0 + 2.0 * h, 1e-15);
            if !v.is_finite() {
                return Err(Error::ProjectionDiverged { point: y.to_vec() });
            }
            t
        };
        let p = self.point(theta);
        let dist = ((p[0] - y[0]).powi(2) + (p[1] - y[1]).powi(2)).sqrt();
        Ok((theta, p, dist))
    }
}

/// Star-shaped domain (with respect to the origin) acting as a geometry oracle.
#[derive(Debug, Clone, PartialEq)]
pub enum Domain {
    Ellipsoid(Ellipsoid),
    Fourier2D(FourierCurve),
}

impl Domain {
    pub fn ellipsoid(axes: &[f64]) -> Result<Self> {
        Ellipsoid::new(axes.to_vec()).map(Domain::Ellipsoid)
    }

    pub fn ball(radius: f64, dim: usize) -> Result<Self> {
        Self::ellipsoid(&vec![radius; dim])
    }

    pub fn fourier(cos: &[f64], sin: &[f64]) -> Result<Self> {
        FourierCurve::new(cos.to_vec(), sin.to_vec()).map(Domain::Fourier2D)
    }

    pub fn spec(&self) -> DomainSpec {
        match self {
            Domain::Ellipsoid(e) => DomainSpec::Ellipsoid { axes: e.axes.clone() },
            Domain::Fourier2D(f) => DomainSpec::Fourier2d { cos: f.cos.clone(), sin: f.sin.clone() },
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Domain::Ellipsoid(e) => e.dim(),
            Domain::Fourier2D(_) => 2,
        }
    }

    /// Number of boundary parameters (`N - 1`).
    pub fn param_dim(&self) -> usize {
        self.dim() - 1
    }

    pub fn boundary_point(&self, params: &[f64]) -> BoundaryPoint {
        match self {
            Domain::Ellipsoid(e) => e.boundary_point(params),
            Domain::Fourier2D(f) => f.boundary_point(params[0]),
        }
    }

    /// Boundary position only; cheaper than [`Domain::boundary_point`].
    pub fn boundary_position(&self, params: &[f64]) -> Vec<f64> {
        match self {
            Domain::Ellipsoid(e) => {
                let (omega, _) = sphere_direction(params, e.dim());
                omega.iter().zip(&e.axes).map(|(w, a)| w * a).collect()
            }
            Domain::Fourier2D(f) => f.point(params[0]).to_vec(),
        }
    }

    /// Membership in the closure, with a relative `slack`.
    pub fn contains_with_slack(&self, y: &[f64], slack: f64) -> bool {
        if y.len() != self.dim() {
            return false;
        }
        match self {
            Domain::Ellipsoid(e) => e.level(y) <= 1.0 + slack,
            Domain::Fourier2D(f) => f.contains(y, slack),
        }
    }

    /// Strict interior membership.
    pub fn contains(&self, y: &[f64]) -> bool {
        if y.len() != self.dim() {
            return false;
        }
        match self {
            Domain::Ellipsoid(e) => e.level(y) < 1.0,
            Domain::Fourier2D(f) => {
                let rho = (y[0] * y[0] + y[1] * y[1]).sqrt();
                rho == 0.0 || rho < f.radius(y[1].atan2(y[0])).0
            }
        }
    }

    /// Nearest boundary point and the distance `δ_Γ(y)`.
    pub fn project(&self, y: &[f64]) -> Result<(Vec<f64>, f64)> {
        match self {
            Domain::Ellipsoid(e) => e.closest_point(y),
            Domain::Fourier2D(f) => f.closest_point(y).map(|(_, p, d)| (p.to_vec(), d)),
        }
    }

    pub fn distance_to_boundary(&self, y: &[f64]) -> Result<f64> {
        self.project(y).map(|(_, d)| d)
    }

    pub fn is_ball(&self) -> bool {
        match self {
            Domain::Ellipsoid(e) => e.is_ball(),
            Domain::Fourier2D(f) => f.max_mode() == 0 || f.cos[1..].iter().chain(&f.sin).all(|&c| c == 0.0),
        }
    }
}

/// Unit vector on `S^{n-1}` from hyperspherical angles `(φ_1..φ_{n-2}, azimuth)`
/// together with the density of the sphere measure in those angles.
pub fn sphere_direction(params: &[f64], n: usize) -> (Vec<f64>, f64) {
    debug_assert_eq!(params.len(), n - 1);
    let mut omega = vec![0.0; n];
    let mut s = 1.0;
    let mut density = 1.0;
    for j in 0..n - 2 {
        let (sn, cs) = params[j].sin_cos();
        omega[j] = s * cs;
        density *= sn.abs().powi((n - 2 - j) as i32);
        s *= sn;
    }
    let (sn, cs) = params[n - 2].sin_cos();
    omega[n - 2] = s * cs;
    omega[n - 1] = s * sn;
    (omega, density)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn specs_round_trip_through_json() {
        let s = DomainSpec::from_json(r#"{"kind":"ellipsoid","axes":[2,1]}"#).unwrap();
        assert_eq!(s, DomainSpec::Ellipsoid { axes: vec![2.0, 1.0] });
        let f = DomainSpec::from_json(r#"{"kind":"fourier2d","cos":[1.0,0.0,0.1],"sin":[0.05]}"#).unwrap();
        assert_eq!(DomainSpec::from_json(&f.to_json()).unwrap(), f);
        assert!(DomainSpec::from_json(r#"{"kind":"torus"}"#).is_err());
    }

    #[test]
    fn unit_disk_two_ways() {
        let a = build_domain(&DomainSpec::Ellipsoid { axes: vec![1.0, 1.0] }).unwrap();
        let b = build_domain(&DomainSpec::Fourier2d { cos: vec![1.0], sin: vec![] }).unwrap();
        assert_eq!(a.dim(), 2);
        assert!(a.is_ball() && b.is_ball());
        for t in [0.0, 0.7, 2.0, 4.5] {
            let p = a.boundary_point(&[t]);
            let q = b.boundary_point(&[t]);
            for i in 0..2 {
                assert!((p.point[i] - q.point[i]).abs() < 1e-15);
                assert!((p.normal[i] - q.normal[i]).abs() < 1e-15);
            }
            assert!((p.mean_curvature - 1.0).abs() < 1e-15);
            assert!((q.mean_curvature - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_non_positive_radius() {
        let err = Domain::fourier(&[1.0, 1.5], &[]).unwrap_err();
        match err {
            Error::NonPositiveRadius { value, .. } => assert!(value <= 0.0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_non_positive_axis() {
        assert_eq!(
            Domain::ellipsoid(&[1.0, 0.0]).unwrap_err(),
            Error::NonPositiveAxis { index: 1, value: 0.0 }
        );
        assert_eq!(
            Domain::ellipsoid(&[1.0, -2.0, 1.0]).unwrap_err(),
            Error::NonPositiveAxis { index: 1, value: -2.0 }
        );
        assert_eq!(Domain::ellipsoid(&[1.0]).unwrap_err(), Error::InvalidDimension(1));
    }

    #[test]
    fn ellipse_curvature_matches_formula_and_finite_differences() {
        let d = Domain::ellipsoid(&[2.0, 1.0]).unwrap();
        let (a, b) = (2.0f64, 1.0f64);
        for &t in &[0.0, 0.3, PI / 2.0, 2.1, 4.0] {
            let bp = d.boundary_point(&[t]);
            let formula = a * b / (a * a * t.sin().powi(2) + b * b * t.cos().powi(2)).powf(1.5);
            assert!((bp.mean_curvature - formula).abs() < 1e-13);
            // |dν/ds| by central differences
            let h = 1e-5;
            let np = d.boundary_point(&[t + h]);
            let nm = d.boundary_point(&[t - h]);
            let dn = ((np.normal[0] - nm.normal[0]).powi(2) + (np.normal[1] - nm.normal[1]).powi(2)).sqrt();
            let ds = ((np.point[0] - nm.point[0]).powi(2) + (np.point[1] - nm.point[1]).powi(2)).sqrt();
            assert!((dn / ds - formula).abs() < 1e-8, "t={t}");
        }
        assert!((d.boundary_point(&[0.0]).mean_curvature - 2.0).abs() < 1e-14);
        assert!((d.boundary_point(&[PI / 2.0]).mean_curvature - 0.25).abs() < 1e-14);
    }

    #[test]
    fn fourier_curvature_matches_finite_differences() {
        let d = Domain::fourier(&[1.0, 0.0, 0.05, 0.0, 0.02], &[0.03]).unwrap();
        for &t in &[0.1, 1.3, 2.9, 5.5] {
            let bp = d.boundary_point(&[t]);
            let h = 1e-5;
            let np = d.boundary_point(&[t + h]);
            let nm = d.boundary_point(&[t - h]);
            let cross = (nm.normal[0] * np.normal[1] - nm.normal[1] * np.normal[0]).asin();
            let ds = ((np.point[0] - nm.point[0]).powi(2) + (np.point[1] - nm.point[1]).powi(2)).sqrt();
            assert!((cross / ds - bp.mean_curvature).abs() < 1e-7);
            // normal is orthogonal to the tangent
            let tx = np.point[0] - nm.point[0];
            let ty = np.point[1] - nm.point[1];
            assert!((tx * bp.normal[0] + ty * bp.normal[1]).abs() < 1e-9);
        }
    }

    #[test]
    fn sphere_curvature_in_three_and_five_dimensions() {
        for n in [3, 5] {
            let d = Domain::ball(3.0, n).unwrap();
            let params = vec![0.4; n - 1];
            let bp = d.boundary_point(&params);
            assert!((bp.mean_curvature - 1.0 / 3.0).abs() < 1e-15);
            let r: f64 = bp.point.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((r - 3.0).abs() < 1e-14);
        }
    }

    #[test]
    fn ellipsoid_projection_handles_degenerate_points() {
        let d = Domain::ellipsoid(&[2.0, 1.0]).unwrap();
        assert!((d.distance_to_boundary(&[0.0, 0.0]).unwrap() - 1.0).abs() < 1e-15);
        // on the major axis, deep inside: nearest point is off-axis
        let y = [0.3, 0.0];
        let (x, dist) = d.project(&y).unwrap();
        assert!(x[1].abs() > 0.0);
        let brute = (0..200_000)
            .map(|j| {
                let t = 2.0 * PI * j as f64 / 200_000.0;
                ((2.0 * t.cos() - y[0]).powi(2) + (t.sin() - y[1]).powi(2)).sqrt()
            })
            .fold(f64::INFINITY, f64::min);
        assert!((dist - brute).abs() < 1e-9);
        let d5 = Domain::ellipsoid(&[2.0, 1.0, 1.0, 1.0, 1.0]).unwrap();
        assert!((d5.distance_to_boundary(&[0.0; 5]).unwrap() - 1.0).abs() < 1e-15);
        let y = [1.0, 0.0, 0.2, 0.0, 0.0];
        let dist = d5.distance_to_boundary(&y).unwrap();
        assert!(dist > 0.0 && dist < 1.0);
    }

    #[test]
    fn fourier_projection_matches_brute_force() {
        let d = Domain::fourier(&[1.0, 0.0, 0.08], &[0.0, 0.04]).unwrap();
        for y in [[0.0, 0.0], [0.5, 0.1], [-0.2, 0.7], [0.9, -0.05]] {
            let dist = d.distance_to_boundary(&y).unwrap();
            let Domain::Fourier2D(f) = &d else { unreachable!() };
            let brute = (0..400_000)
                .map(|j| {
                    let p = f.point(2.0 * PI * j as f64 / 400_000.0);
                    ((p[0] - y[0]).powi(2) + (p[1] - y[1]).powi(2)).sqrt()
                })
                .fold(f64::INFINITY, f64::min);
            assert!(dist <= brute + 1e-14 && brute - dist < 1e-9, "{y:?}: {dist} vs {brute}");
        }
    }
}
