use serde::{Deserialize, Serialize};

use super::domain::Domain;
use super::grid::{boundary_grid, default_boundary_order, dot, norm, BoundaryGrid};
use crate::error::{Error, Result};
use crate::optimize::nelder_mead;

/// Global geometric quantities of a domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometrySummary {
    pub dim: usize,
    pub volume: f64,
    pub surface: f64,
    pub diameter: f64,
    pub r_i: f64,
    /// `+∞` for convex domains.
    #[serde(with = "crate::serde_inf")]
    pub r_e: f64,
    pub mean_convex: bool,
    pub convex: bool,
    /// Set when `r_i`/`r_e` are sampled estimates rather than exact values.
    pub estimated: bool,
}

impl GeometrySummary {
    /// `R = N|Ω| / |Γ|`.
    pub fn reference_r(&self) -> f64 {
        self.dim as f64 * self.volume / self.surface
    }

    /// `H₀ = |Γ| / (N|Ω|)`.
    pub fn reference_h0(&self) -> f64 {
        1.0 / self.reference_r()
    }
}

/// Summary computed on the default boundary grid.
pub fn geometric_summary(domain: &Domain) -> GeometrySummary {
    let grid = boundary_grid(domain, default_boundary_order(domain.dim())).expect("default order is valid");
    summary_from_grid(&grid)
}

pub fn summary_from_grid(grid: &BoundaryGrid) -> GeometrySummary {
    let domain = grid.domain();
    let dim = domain.dim();
    let volume = grid.enclosed_volume();
    let surface = grid.surface_area();
    match domain {
        Domain::Ellipsoid(e) => {
            let a_max = e.axes().iter().cloned().fold(0.0, f64::max);
            let a_min = e.axes().iter().cloned().fold(f64::INFINITY, f64::min);
            GeometrySummary {
                dim,
                volume,
                surface,
                diameter: 2.0 * a_max,
                // smallest principal radius of curvature, attained at the ends of the long axis
                r_i: a_min * a_min / a_max,
                r_e: f64::INFINITY,
                mean_convex: true,
                convex: true,
                estimated: false,
            }
        }
        Domain::Fourier2D(curve) => {
            let dense = boundary_grid(domain, 4 * grid.order()).expect("order only grows");
            let diameter = sampled_diameter(&dense);
            let kappa = dense.curvatures();
            let kappa_min = kappa.iter().cloned().fold(f64::INFINITY, f64::min);
            let convex = kappa_min >= 0.0;
            // Polish the curvature maximum: r_i = 1/κ_max for convex curves.
            let (_, neg_kmax) = dense.polish_min_params(|t| -curve.curvature(t[0]));
            let kappa_max = -neg_kmax;
            if convex {
                GeometrySummary {
                    dim,
                    volume,
                    surface,
                    diameter,
                    r_i: 1.0 / kappa_max,
                    r_e: f64::INFINITY,
                    mean_convex: true,
                    convex: true,
                    estimated: false,
                }
            } else {
                let (ti, te) = touching_ball_radii(&dense);
                let (_, kmin) = dense.polish_min_params(|t| curve.curvature(t[0]));
                GeometrySummary {
                    dim,
                    volume,
                    surface,
                    diameter,
                    r_i: ti.min(1.0 / kappa_max),
                    r_e: te.min(-1.0 / kmin),
                    mean_convex: false,
                    convex: false,
                    estimated: true,
                }
            }
        }
    }
}

/// Largest pairwise node distance, polished by a local search over the pair of
/// boundary parameters.
fn sampled_diameter(grid: &BoundaryGrid) -> f64 {
    let n = grid.len();
    let mut best = (0, 0, 0.0f64);
    for i in 0..n {
        let p = grid.point(i);
        for j in (i + 1)..n {
            let q = grid.point(j);
            let d2: f64 = p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum();
            if d2 > best.2 {
                best = (i, j, d2);
            }
        }
    }
    let m = grid.domain().param_dim();
    let mut start = grid.params(best.0).to_vec();
    start.extend_from_slice(grid.params(best.1));
    let domain = grid.domain();
    let (_, v) = nelder_mead(
        |t| {
            let p = domain.boundary_position(&t[..m]);
            let q = domain.boundary_position(&t[m..]);
            -p.iter().zip(&q).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()
        },
        &start,
        grid.spacing(),
        1e-16,
        2000,
    );
    (-v).max(best.2).sqrt()
}

/// Radii of the largest discrete balls touching `Γ` at a node from the inside
/// and from the outside without containing any other node: the ball of radius
/// `ρ` tangent at `x_j` passes through `x_k` when `ρ = |x_k − x_j|² / (2⟨x_j − x_k, ν_j⟩)`.
fn touching_ball_radii(grid: &BoundaryGrid) -> (f64, f64) {
    let mut inner = f64::INFINITY;
    let mut outer = f64::INFINITY;
    for j in 0..grid.len() {
        let x = grid.point(j);
        let nu = grid.normal(j);
        for k in 0..grid.len() {
            if k == j {
                continue;
            }
            let diff: Vec<f64> = x.iter().zip(grid.point(k)).map(|(a, b)| a - b).collect();
            let d2 = dot(&diff, &diff);
            let s = dot(&diff, nu);
            if s > 0.0 {
                inner = inner.min(d2 / (2.0 * s));
            } else if s < 0.0 {
                outer = outer.min(-d2 / (2.0 * s));
            }
        }
    }
    (inner, outer)
}

/// `(ρ_i, ρ_e)`: the distance from `z` to the nearest and farthest boundary points.
pub fn radii_about(domain: &Domain, z: &[f64]) -> Result<(f64, f64)> {
    let order = match domain.dim() {
        2 => 256,
        3 => 48,
        _ => 24,
    };
    radii_about_grid(&boundary_grid(domain, order)?, z)
}

pub fn radii_about_grid(grid: &BoundaryGrid, z: &[f64]) -> Result<(f64, f64)> {
    let domain = grid.domain();
    if !domain.contains(z) {
        return Err(Error::CenterOutsideDomain(z.to_vec()));
    }
    let rho_i = domain.distance_to_boundary(z)?;
    let dist = |x: &[f64]| norm(&x.iter().zip(z).map(|(a, b)| a - b).collect::<Vec<_>>());
    let (_, neg) = grid.polish_min(|x| -dist(x));
    Ok((rho_i, -neg))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn unit_disk_summary() {
        for d in [Domain::ball(1.0, 2).unwrap(), Domain::fourier(&[1.0], &[]).unwrap()] {
            let s = geometric_summary(&d);
            assert!((s.volume - PI).abs() < 1e-12);
            assert!((s.surface - 2.0 * PI).abs() < 1e-12);
            assert!((s.diameter - 2.0).abs() < 1e-12);
            assert!((s.r_i - 1.0).abs() < 1e-12);
            assert!(s.r_e.is_infinite() && s.convex && s.mean_convex && !s.estimated);
        }
    }

    #[test]
    fn ellipse_inradius_from_osculating_circle() {
        // Oracle: the osculating circle at (a, 0) has radius b²/a, and a convex
        // curve rolls freely inside its smallest osculating circle.
        let d = Domain::ellipsoid(&[2.0, 1.0]).unwrap();
        let s = geometric_summary(&d);
        assert!((s.r_i - 0.5).abs() < 1e-15);
        assert!((s.diameter - 4.0).abs() < 1e-15);
        // The Fourier form of a nearly identical convex curve gives r_i = 1/κ_max.
        let f = Domain::fourier(&[1.0, 0.0, 0.1], &[]).unwrap();
        let sf = geometric_summary(&f);
        let kappa0 = match &f {
            Domain::Fourier2D(c) => c.curvature(0.0),
            _ => unreachable!(),
        };
        assert!((sf.r_i - 1.0 / kappa0).abs() < 1e-10);
        assert!((sf.diameter - 2.2).abs() < 1e-12);
    }

    #[test]
    fn sphere_radius_three() {
        let s = geometric_summary(&Domain::ball(3.0, 3).unwrap());
        assert!((s.volume - 36.0 * PI).abs() < 1e-10);
        assert!((s.surface - 36.0 * PI).abs() < 1e-10);
        assert!((s.r_i - 3.0).abs() < 1e-15);
    }

    #[test]
    fn nonconvex_fourier_is_flagged() {
        let d = Domain::fourier(&[1.0, 0.0, 0.0, 0.0, 0.12], &[]).unwrap();
        let s = geometric_summary(&d);
        assert!(!s.convex && !s.mean_convex && s.estimated);
        assert!(s.r_i > 0.0 && s.r_e.is_finite() && s.r_e > 0.0);
        assert!(s.diameter >= 2.0 * s.r_i);
    }

    #[test]
    fn radii_about_examples() {
        let disk = Domain::ball(1.0, 2).unwrap();
        let (ri, re) = radii_about(&disk, &[0.0, 0.0]).unwrap();
        assert!((ri - 1.0).abs() < 1e-14 && (re - 1.0).abs() < 1e-14);
        let (ri, re) = radii_about(&disk, &[0.5, 0.0]).unwrap();
        assert!((ri - 0.5).abs() < 1e-14 && (re - 1.5).abs() < 1e-14);
        let ell = Domain::ellipsoid(&[2.0, 1.0]).unwrap();
        let (ri, re) = radii_about(&ell, &[0.0, 0.0]).unwrap();
        assert!((ri - 1.0).abs() < 1e-14 && (re - 2.0).abs() < 1e-14);
        assert_eq!(
            radii_about(&disk, &[1.5, 0.0]).unwrap_err(),
            Error::CenterOutsideDomain(vec![1.5, 0.0])
        );
    }

    #[test]
    fn radii_about_off_center_ellipsoid_3d() {
        let d = Domain::ellipsoid(&[1.5, 1.0, 0.8]).unwrap();
        let z = [0.2, -0.1, 0.05];
        let (_, re) = radii_about(&d, &z).unwrap();
        // Oracle: dense random sampling of the surface.
        let mut best = 0.0f64;
        let m = 400;
        for i in 0..m {
            for j in 0..m {
                let t = PI * (i as f64 + 0.5) / m as f64;
                let p = 2.0 * PI * j as f64 / m as f64;
                let x = [1.5 * t.cos(), t.sin() * p.cos(), 0.8 * t.sin() * p.sin()];
                let r = ((x[0] - z[0]).powi(2) + (x[1] - z[1]).powi(2) + (x[2] - z[2]).powi(2)).sqrt();
                best = best.max(r);
            }
        }
        assert!(re >= best - 1e-12 && re - best < 1e-4);
    }
}
