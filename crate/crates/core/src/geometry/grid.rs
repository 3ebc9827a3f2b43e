use std::f64::consts::PI;

use rayon::prelude::*;

use super::domain::Domain;
use crate::error::{Error, Result};
use crate::quadrature::{gauss_legendre_on, weighted_sum};

pub const MIN_ORDER: usize = 8;

/// Default boundary order for a dimension: the number of azimuthal nodes, with
/// half as many Gauss–Legendre nodes in each polar angle when `N >= 3`.
pub fn default_boundary_order(dim: usize) -> usize {
    match dim {
        2 => 256,
        3 => 96,
        4 => 64,
        _ => 40,
    }
}

/// Default `(radial, angular)` orders for volume quadrature.
pub fn default_volume_orders(dim: usize) -> (usize, usize) {
    match dim {
        2 => (64, 256),
        3 => (32, 48),
        4 => (24, 24),
        _ => (12, 24),
    }
}

/// Boundary quadrature: nodes, weights, outward normals and mean curvature.
#[derive(Debug, Clone)]
pub struct BoundaryGrid {
    domain: Domain,
    order: usize,
    dim: usize,
    points: Vec<f64>,
    normals: Vec<f64>,
    weights: Vec<f64>,
    curvature: Vec<f64>,
    params: Vec<f64>,
    spacing: f64,
}

impl BoundaryGrid {
    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn point(&self, j: usize) -> &[f64] {
        &self.points[j * self.dim..(j + 1) * self.dim]
    }

    pub fn normal(&self, j: usize) -> &[f64] {
        &self.normals[j * self.dim..(j + 1) * self.dim]
    }

    pub fn params(&self, j: usize) -> &[f64] {
        let m = self.dim - 1;
        &self.params[j * m..(j + 1) * m]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn curvatures(&self) -> &[f64] {
        &self.curvature
    }

    /// Largest parameter spacing, used as the local search radius.
    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// `∫_Γ f dS`.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        weighted_sum(&self.weights, values)
    }

    pub fn surface_area(&self) -> f64 {
        self.weights.iter().sum::<f64>()
    }

    /// `|Ω| = (1/N) ∫_Γ <x, ν> dS`.
    pub fn enclosed_volume(&self) -> f64 {
        let support: Vec<f64> = (0..self.len()).map(|j| dot(self.point(j), self.normal(j))).collect();
        self.integrate(&support) / self.dim as f64
    }

    /// The same grid at twice the order.
    pub fn refined(&self) -> Result<BoundaryGrid> {
        boundary_grid(&self.domain, 2 * self.order)
    }

    /// Minimize a function of boundary position: best node, then a local
    /// polish in the boundary parameters. Returns `(params, value)`.
    pub fn polish_min<F: Fn(&[f64]) -> f64>(&self, f: F) -> (Vec<f64>, f64) {
        let domain = &self.domain;
        self.polish_min_params(|t| f(&domain.boundary_position(t)))
    }

    /// As [`BoundaryGrid::polish_min`], for a function of the boundary parameters.
    pub fn polish_min_params<F: Fn(&[f64]) -> f64>(&self, f: F) -> (Vec<f64>, f64) {
        let node_values: Vec<f64> = (0..self.len()).map(|j| f(self.params(j))).collect();
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by(|&a, &b| node_values[a].total_cmp(&node_values[b]));
        let mut best: (Vec<f64>, f64) = (self.params(order[0]).to_vec(), node_values[order[0]]);
        for &j in order.iter().take(3) {
            let (p, v) = crate::optimize::refine_min(&f, self.params(j), 2.0 * self.spacing);
            if v < best.1 {
                best = (p, v);
            }
        }
        best
    }
}

/// Boundary quadrature of the given order.
///
/// `N = 2`: `order` equispaced parameter nodes (trapezoidal rule, spectrally
/// accurate for periodic integrands). `N >= 3` (ellipsoids only): Gauss–Legendre
/// with `order / 2` nodes in each polar angle times `order` equispaced azimuths.
pub fn boundary_grid(domain: &Domain, order: usize) -> Result<BoundaryGrid> {
    if order < MIN_ORDER {
        return Err(Error::OrderTooSmall { order, min: MIN_ORDER });
    }
    let dim = domain.dim();
    if let Domain::Fourier2D(_) = domain {
        if dim != 2 {
            return Err(Error::UnsupportedDimension { what: "fourier2d boundary", dim });
        }
    }

    let azimuth: Vec<f64> = (0..order).map(|j| 2.0 * PI * j as f64 / order as f64).collect();
    let azimuth_weight = 2.0 * PI / order as f64;
    let polar_count = (order / 2).max(4);
    let (polar, polar_w) = gauss_legendre_on(polar_count, 0.0, PI);

    // Node index = (polar digits, most significant first) × order + azimuth.
    let polar_dims = dim.saturating_sub(2);
    let total = polar_count.pow(polar_dims as u32) * order;
    let nodes: Vec<_> = (0..total)
        .into_par_iter()
        .map(|idx| {
            let mut p = vec![0.0; dim - 1];
            let mut w = azimuth_weight;
            p[dim - 2] = azimuth[idx % order];
            let mut rest = idx / order;
            for k in (0..polar_dims).rev() {
                let i = rest % polar_count;
                rest /= polar_count;
                p[k] = polar[i];
                w *= polar_w[i];
            }
            (domain.boundary_point(&p), w, p)
        })
        .collect();

    let n = nodes.len();
    let mut grid = BoundaryGrid {
        domain: domain.clone(),
        order,
        dim,
        points: Vec::with_capacity(n * dim),
        normals: Vec::with_capacity(n * dim),
        weights: Vec::with_capacity(n),
        curvature: Vec::with_capacity(n),
        params: Vec::with_capacity(n * (dim - 1)),
        spacing: if dim == 2 {
            azimuth_weight
        } else {
            azimuth_weight.max(PI / polar_count as f64)
        },
    };
    for (bp, w, p) in nodes {
        grid.points.extend_from_slice(&bp.point);
        grid.normals.extend_from_slice(&bp.normal);
        grid.weights.push(w * bp.area_density);
        grid.curvature.push(bp.mean_curvature);
        grid.params.extend_from_slice(&p);
    }
    Ok(grid)
}

/// Volume quadrature with boundary distances at every node.
#[derive(Debug, Clone)]
pub struct VolumeGrid {
    dim: usize,
    radial_order: usize,
    angular_order: usize,
    points: Vec<f64>,
    weights: Vec<f64>,
    distances: Vec<f64>,
}

impl VolumeGrid {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn orders(&self) -> (usize, usize) {
        (self.radial_order, self.angular_order)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn point(&self, m: usize) -> &[f64] {
        &self.points[m * self.dim..(m + 1) * self.dim]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `δ_Γ` at every node.
    pub fn distances(&self) -> &[f64] {
        &self.distances
    }

    pub fn integrate(&self, values: &[f64]) -> f64 {
        weighted_sum(&self.weights, values)
    }

    pub fn volume(&self) -> f64 {
        self.weights.iter().sum::<f64>()
    }

    /// Volume-weighted mean position.
    pub fn centroid(&self) -> Vec<f64> {
        let vol = self.volume();
        (0..self.dim)
            .map(|i| {
                let coord: Vec<f64> = (0..self.len()).map(|m| self.point(m)[i]).collect();
                self.integrate(&coord) / vol
            })
            .collect()
    }
}

/// Polar volume rule: `y = r x_j` for boundary nodes `x_j` of an angular grid and
/// Gauss–Legendre radii `r ∈ (0, 1)`, with weight `ω_r r^{N-1} <x_j, ν_j> w_j`.
pub fn volume_grid(domain: &Domain, radial_order: usize, angular_order: usize) -> Result<VolumeGrid> {
    if radial_order < MIN_ORDER {
        return Err(Error::OrderTooSmall { order: radial_order, min: MIN_ORDER });
    }
    let angular = boundary_grid(domain, angular_order)?;
    let dim = domain.dim();
    let (radii, radial_w) = gauss_legendre_on(radial_order, 0.0, 1.0);

    let mut points = Vec::with_capacity(angular.len() * radial_order * dim);
    let mut weights = Vec::with_capacity(angular.len() * radial_order);
    for j in 0..angular.len() {
        let x = angular.point(j);
        let cone = dot(x, angular.normal(j)) * angular.weights()[j];
        for (r, wr) in radii.iter().zip(&radial_w) {
            points.extend(x.iter().map(|c| r * c));
            weights.push(wr * r.powi(dim as i32 - 1) * cone);
        }
    }
    let distances: Vec<f64> = points
        .par_chunks(dim)
        .map(|y| domain.distance_to_boundary(y))
        .collect::<Result<_>>()?;
    Ok(VolumeGrid {
        dim,
        radial_order,
        angular_order,
        points,
        weights,
        distances,
    })
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
