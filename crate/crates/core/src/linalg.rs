//! Dense kernels for the small systems in this crate: column-pivoted
//! Householder least squares and symmetric eigenproblems.

/// Householder QR with column pivoting of an `m × n` column-major matrix.
#[derive(Debug, Clone)]
pub struct Cpqr {
    m: usize,
    n: usize,
    qr: Vec<f64>,
    tau: Vec<f64>,
    perm: Vec<usize>,
}

impl Cpqr {
    /// `columns[j]` is column `j`; all columns must have the same length `m >= n`.
    pub fn factor(columns: &[Vec<f64>]) -> Cpqr {
        let n = columns.len();
        let m = columns.first().map_or(0, |c| c.len());
        assert!(m >= n, "least squares needs at least as many rows as columns");
        let mut qr: Vec<f64> = columns.iter().flatten().copied().collect();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut tau = vec![0.0; n];
        let mut norms: Vec<f64> = (0..n).map(|j| col_norm(&qr[j * m..(j + 1) * m])).collect();

        for k in 0..n {
            // Pivot: recompute trailing norms exactly, cheap at these sizes.
            for j in k..n {
                norms[j] = col_norm(&qr[j * m + k..(j + 1) * m]);
            }
            let p = (k..n).max_by(|&a, &b| norms[a].total_cmp(&norms[b])).unwrap_or(k);
            if p != k {
                for i in 0..m {
                    qr.swap(k * m + i, p * m + i);
                }
                perm.swap(k, p);
                norms.swap(k, p);
            }
            let col = &mut qr[k * m + k..(k + 1) * m];
            let alpha = col_norm(col);
            if alpha == 0.0 {
                continue;
            }
            let beta = if col[0] > 0.0 { -alpha } else { alpha };
            let v0 = col[0] - beta;
            for x in col[1..].iter_mut() {
                *x /= v0;
            }
            tau[k] = (beta - col[0]) / beta;
            col[0] = beta;
            // Apply H = I − τ v vᵀ (v₀ = 1) to the trailing columns.
            let (head, tail) = qr.split_at_mut((k + 1) * m);
            let v = &head[k * m + k..(k + 1) * m];
            for j in 0..(n - k - 1) {
                let c = &mut tail[j * m + k..(j + 1) * m];
                let mut s = c[0];
                for i in 1..v.len() {
                    s += v[i] * c[i];
                }
                s *= tau[k];
                c[0] -= s;
                for i in 1..v.len() {
                    c[i] -= s * v[i];
                }
            }
        }
        Cpqr { m, n, qr, tau, perm }
    }

    fn r(&self, i: usize, j: usize) -> f64 {
        self.qr[j * self.m + i]
    }

    /// `|R₀₀ / R_{n−1,n−1}|`, a cheap lower estimate of the 2-norm condition number.
    pub fn condition_estimate(&self) -> f64 {
        if self.n == 0 {
            return 1.0;
        }
        let last = self.r(self.n - 1, self.n - 1).abs();
        if last == 0.0 {
            f64::INFINITY
        } else {
            self.r(0, 0).abs() / last
        }
    }

    /// Minimizer of `|A x − b|₂`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let (m, n) = (self.m, self.n);
        assert_eq!(b.len(), m);
        let mut y = b.to_vec();
        for k in 0..n {
            let v = &self.qr[k * m + k..(k + 1) * m];
            let mut s = y[k];
            for i in 1..v.len() {
                s += v[i] * y[k + i];
            }
            s *= self.tau[k];
            y[k] -= s;
            for i in 1..v.len() {
                y[k + i] -= s * v[i];
            }
        }
        let mut z = vec![0.0; n];
        for k in (0..n).rev() {
            let mut s = y[k];
            for j in (k + 1)..n {
                s -= self.r(k, j) * z[j];
            }
            z[k] = s / self.r(k, k);
        }
        let mut x = vec![0.0; n];
        for (k, &p) in self.perm.iter().enumerate() {
            x[p] = z[k];
        }
        x
    }
}

fn col_norm(c: &[f64]) -> f64 {
    let scale = c.iter().fold(0.0f64, |s, x| s.max(x.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    scale * c.iter().map(|x| (x / scale) * (x / scale)).sum::<f64>().sqrt()
}

/// Eigen-decomposition of a symmetric `n × n` row-major matrix by cyclic Jacobi.
/// Returns ascending eigenvalues and the matching eigenvectors (as rows).
pub fn symmetric_eigen(a: &[f64], n: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    let mut a = a.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j] * a[i * n + j])
            .sum();
        let diag: f64 = (0..n).map(|i| a[i * n + i] * a[i * n + i]).sum();
        if off <= 1e-30 * diag || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| a[i * n + i].total_cmp(&a[j * n + j]));
    let values = idx.iter().map(|&i| a[i * n + i]).collect();
    let vectors = idx.iter().map(|&i| (0..n).map(|k| v[k * n + i]).collect()).collect();
    (values, vectors)
}

/// Lower Cholesky factor of a symmetric positive definite row-major matrix.
pub fn cholesky(a: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if !(s > 0.0) {
                    return None;
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    Some(l)
}

/// Smallest `λ` with `A v = λ B v` for symmetric `A` and SPD `B`.
pub fn generalized_min_eigenvalue(a: &[f64], b: &[f64], n: usize) -> Option<f64> {
    let l = cholesky(b, n)?;
    // C = L⁻¹ A L⁻ᵀ
    let forward = |rhs: &[f64]| -> Vec<f64> {
        let mut x = vec![0.0; n];
        for i in 0..n {
            let mut s = rhs[i];
            for k in 0..i {
                s -= l[i * n + k] * x[k];
            }
            x[i] = s / l[i * n + i];
        }
        x
    };
    let mut y = vec![0.0; n * n]; // y = L⁻¹ A, row-major
    for j in 0..n {
        let col: Vec<f64> = (0..n).map(|i| a[i * n + j]).collect();
        let s = forward(&col);
        for i in 0..n {
            y[i * n + j] = s[i];
        }
    }
    let mut c = vec![0.0; n * n]; // c = y L⁻ᵀ = (L⁻¹ yᵀ)ᵀ
    for i in 0..n {
        let s = forward(&y[i * n..(i + 1) * n]);
        for j in 0..n {
            c[i * n + j] = s[j];
        }
    }
    for i in 0..n {
        for j in 0..i {
            let avg = 0.5 * (c[i * n + j] + c[j * n + i]);
            c[i * n + j] = avg;
            c[j * n + i] = avg;
        }
    }
    symmetric_eigen(&c, n).0.first().copied()
}
