//! Dense and structured linear solvers used by the data generators.
//!
//! Small problems only: Cholesky for GP covariance factors (n <= a few
//! hundred), Thomas sweeps for tridiagonal BVP systems, a rank-one
//! corrected Thomas solve for periodic (cyclic) systems, and conjugate
//! gradients on sparse rows for the FEM stiffness.

use crate::error::{Error, Result};

/// In-place Cholesky of a row-major symmetric matrix; on success the
/// lower triangle holds L (upper zeroed). Fails on a nonpositive pivot.
pub fn cholesky(a: &mut [f64], n: usize) -> Result<()> {
    assert_eq!(a.len(), n * n);
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= a[j * n + k] * a[j * n + k];
        }
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::numerical(
                "cholesky",
                format!("nonpositive pivot {d:.3e} at column {j}"),
            ));
        }
        let l = d.sqrt();
        a[j * n + j] = l;
        for i in j + 1..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= a[i * n + k] * a[j * n + k];
            }
            a[i * n + j] = s / l;
        }
        for i in 0..j {
            a[i * n + j] = 0.0;
        }
    }
    Ok(())
}

/// Cholesky with diagonal jitter: start at `jitter0 * scale`, escalate
/// by 10x up to three times before giving up.
pub fn cholesky_with_jitter(k: &[f64], n: usize, jitter0: f64, scale: f64) -> Result<Vec<f64>> {
    let mut jitter = jitter0 * scale;
    for attempt in 0..4 {
        let mut a = k.to_vec();
        for i in 0..n {
            a[i * n + i] += jitter;
        }
        match cholesky(&mut a, n) {
            Ok(()) => return Ok(a),
            Err(_) if attempt < 3 => jitter *= 10.0,
            Err(e) => {
                return Err(Error::numerical(
                    "cholesky",
                    format!("failed after jitter escalation to {jitter:.1e}: {e}"),
                ))
            }
        }
    }
    unreachable!()
}

/// Tridiagonal solve. `sub[i]` sits below the diagonal at row i+1,
/// `sup[i]` above it at row i.
pub fn thomas(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    assert!(sub.len() == n - 1 && sup.len() == n - 1 && rhs.len() == n);
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut denom = diag[0];
    if denom.abs() < 1e-300 {
        return Err(Error::numerical("thomas", "singular tridiagonal system"));
    }
    c[0] = sup.first().copied().unwrap_or(0.0) / denom;
    d[0] = rhs[0] / denom;
    for i in 1..n {
        denom = diag[i] - sub[i - 1] * c[i - 1];
        if denom.abs() < 1e-300 {
            return Err(Error::numerical(
                "thomas",
                format!("singular tridiagonal system at row {i}"),
            ));
        }
        if i < n - 1 {
            c[i] = sup[i] / denom;
        }
        d[i] = (rhs[i] - sub[i - 1] * d[i - 1]) / denom;
    }
    let mut x = d;
    for i in (0..n - 1).rev() {
        let next = x[i + 1];
        x[i] -= c[i] * next;
    }
    Ok(x)
}

/// Cyclic tridiagonal solve via the rank-one (Sherman-Morrison)
/// correction of a plain Thomas sweep. `corner_top` is the (0, n-1)
/// entry, `corner_bot` the (n-1, 0) entry.
pub fn cyclic_thomas(
    sub: &[f64],
    diag: &[f64],
    sup: &[f64],
    corner_top: f64,
    corner_bot: f64,
    rhs: &[f64],
) -> Result<Vec<f64>> {
    let n = diag.len();
    if n < 3 {
        return Err(Error::InvalidArg("cyclic tridiagonal needs n >= 3".into()));
    }
    // A = T + u v^T with u = (gamma, 0, ..., 0, corner_bot),
    // v = (1, 0, ..., 0, corner_top / gamma).
    let gamma = -diag[0];
    let mut d2 = diag.to_vec();
    d2[0] -= gamma;
    d2[n - 1] -= corner_top * corner_bot / gamma;
    let y = thomas(sub, &d2, sup, rhs)?;
    let mut u = vec![0.0; n];
    u[0] = gamma;
    u[n - 1] = corner_bot;
    let z = thomas(sub, &d2, sup, &u)?;
    let vy = y[0] + corner_top / gamma * y[n - 1];
    let vz = z[0] + corner_top / gamma * z[n - 1];
    let denom = 1.0 + vz;
    if denom.abs() < 1e-300 {
        return Err(Error::numerical("cyclic_thomas", "singular correction"));
    }
    let factor = vy / denom;
    Ok(y.iter().zip(&z).map(|(yi, zi)| yi - factor * zi).collect())
}

/// Symmetric sparse matrix stored by rows; entries accumulate.
#[derive(Debug, Clone)]
pub struct SparseRows {
    pub n: usize,
    rows: Vec<Vec<(usize, f64)>>,
}

impl SparseRows {
    pub fn new(n: usize) -> Self {
        SparseRows {
            n,
            rows: vec![Vec::new(); n],
        }
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let row = &mut self.rows[i];
        match row.iter_mut().find(|(c, _)| *c == j) {
            Some((_, e)) => *e += v,
            None => row.push((j, v)),
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.rows[i]
            .iter()
            .find(|(c, _)| *c == j)
            .map(|(_, v)| *v)
            .unwrap_or(0.0)
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        self.rows
            .iter()
            .map(|row| row.iter().map(|&(j, v)| v * x[j]).sum())
            .collect()
    }

    /// Largest |A_ij - A_ji| over stored entries.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                worst = worst.max((v - self.get(j, i)).abs());
            }
        }
        worst
    }
}

/// Conjugate gradients for SPD systems; converges when the residual
/// norm drops below `tol * ||b||`.
pub fn conjugate_gradient(a: &SparseRows, b: &[f64], tol: f64, max_iter: usize) -> Result<Vec<f64>> {
    let n = a.n;
    assert_eq!(b.len(), n);
    let bnorm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    if bnorm == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut rs: f64 = r.iter().map(|v| v * v).sum();
    for _ in 0..max_iter {
        if rs.sqrt() <= tol * bnorm {
            return Ok(x);
        }
        let ap = a.matvec(&p);
        let pap: f64 = p.iter().zip(&ap).map(|(u, v)| u * v).sum();
        if !(pap > 0.0) {
            return Err(Error::numerical(
                "conjugate_gradient",
                format!("non-positive curvature {pap:.3e}; matrix not SPD"),
            ));
        }
        let alpha = rs / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rs_new: f64 = r.iter().map(|v| v * v).sum();
        let beta = rs_new / rs;
        rs = rs_new;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
    }
    if rs.sqrt() <= tol * bnorm {
        Ok(x)
    } else {
        Err(Error::numerical(
            "conjugate_gradient",
            format!("no convergence in {max_iter} iterations, residual {:.3e}", rs.sqrt()),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    // Oracle: dense Gaussian elimination with partial pivoting,
    // written straight from the textbook.
    fn dense_solve(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
        let mut m = a.to_vec();
        let mut x = b.to_vec();
        for col in 0..n {
            let piv = (col..n)
                .max_by(|&i, &j| m[i * n + col].abs().total_cmp(&m[j * n + col].abs()))
                .unwrap();
            if piv != col {
                for k in 0..n {
                    m.swap(col * n + k, piv * n + k);
                }
                x.swap(col, piv);
            }
            for row in col + 1..n {
                let f = m[row * n + col] / m[col * n + col];
                for k in col..n {
                    m[row * n + k] -= f * m[col * n + k];
                }
                x[row] -= f * x[col];
            }
        }
        for row in (0..n).rev() {
            for k in row + 1..n {
                let xk = x[k];
                x[row] -= m[row * n + k] * xk;
            }
            x[row] /= m[row * n + row];
        }
        x
    }

    #[test]
    fn cholesky_matches_hand_factor() {
        let mut a = vec![4.0, 2.0, 2.0, 3.0];
        cholesky(&mut a, 2).unwrap();
        let expect = [2.0, 0.0, 1.0, 2.0f64.sqrt()];
        for (got, want) in a.iter().zip(expect) {
            assert!((got - want).abs() < 1e-14);
        }
    }

    #[test]
    fn cholesky_rejects_indefinite_matrices() {
        let mut a = vec![1.0, 2.0, 2.0, 1.0];
        assert!(cholesky(&mut a, 2).is_err());
    }

    #[test]
    fn jitter_rescues_rank_deficient_but_not_indefinite() {
        // Rank-1 PSD matrix factors once jitter lands on the diagonal.
        let psd = vec![1.0, 1.0, 1.0, 1.0];
        assert!(cholesky_with_jitter(&psd, 2, 1e-10, 1.0).is_ok());
        // Indefinite matrix (eigenvalues +-1) stays broken at every
        // jitter level the escalation reaches.
        let indef = vec![0.0, 1.0, 1.0, 0.0];
        assert!(cholesky_with_jitter(&indef, 2, 1e-10, 1.0).is_err());
    }

    #[test]
    fn thomas_matches_dense_elimination() {
        let mut r = crate::rng::rng_for(3, 0x111);
        for _ in 0..20 {
            let n = 9;
            let sub: Vec<f64> = (0..n - 1).map(|_| r.random_range(-1.0..1.0)).collect();
            let sup: Vec<f64> = (0..n - 1).map(|_| r.random_range(-1.0..1.0)).collect();
            let diag: Vec<f64> = (0..n).map(|_| r.random_range(3.0..5.0)).collect();
            let rhs: Vec<f64> = (0..n).map(|_| r.random_range(-2.0..2.0)).collect();
            let mut dense = vec![0.0; n * n];
            for i in 0..n {
                dense[i * n + i] = diag[i];
                if i + 1 < n {
                    dense[i * n + i + 1] = sup[i];
                    dense[(i + 1) * n + i] = sub[i];
                }
            }
            let got = thomas(&sub, &diag, &sup, &rhs).unwrap();
            let want = dense_solve(&dense, &rhs, n);
            for (g, w) in got.iter().zip(&want) {
                assert!((g - w).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn cyclic_thomas_matches_dense_elimination() {
        let mut r = crate::rng::rng_for(7, 0x222);
        for _ in 0..20 {
            let n = 7;
            let sub: Vec<f64> = (0..n - 1).map(|_| r.random_range(-1.0..1.0)).collect();
            let sup: Vec<f64> = (0..n - 1).map(|_| r.random_range(-1.0..1.0)).collect();
            let diag: Vec<f64> = (0..n).map(|_| r.random_range(4.0..6.0)).collect();
            let rhs: Vec<f64> = (0..n).map(|_| r.random_range(-2.0..2.0)).collect();
            let (ct, cb) = (r.random_range(-1.0..1.0), r.random_range(-1.0..1.0));
            let mut dense = vec![0.0; n * n];
            for i in 0..n {
                dense[i * n + i] = diag[i];
                if i + 1 < n {
                    dense[i * n + i + 1] = sup[i];
                    dense[(i + 1) * n + i] = sub[i];
                }
            }
            dense[n - 1] = ct;
            dense[(n - 1) * n] = cb;
            let got = cyclic_thomas(&sub, &diag, &sup, ct, cb, &rhs).unwrap();
            let want = dense_solve(&dense, &rhs, n);
            for (g, w) in got.iter().zip(&want) {
                assert!((g - w).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn conjugate_gradient_matches_dense_elimination() {
        let mut r = crate::rng::rng_for(11, 0x333);
        let n = 12;
        // SPD by construction: A = M^T M + n I.
        let m: Vec<f64> = (0..n * n).map(|_| r.random_range(-1.0..1.0)).collect();
        let mut dense = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let mut s = if i == j { n as f64 } else { 0.0 };
                for k in 0..n {
                    s += m[k * n + i] * m[k * n + j];
                }
                dense[i * n + j] = s;
            }
        }
        let mut sparse = SparseRows::new(n);
        for i in 0..n {
            for j in 0..n {
                sparse.add(i, j, dense[i * n + j]);
            }
        }
        let b: Vec<f64> = (0..n).map(|_| r.random_range(-2.0..2.0)).collect();
        let got = conjugate_gradient(&sparse, &b, 1e-13, 10 * n).unwrap();
        let want = dense_solve(&dense, &b, n);
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() < 1e-8);
        }
        assert!(sparse.asymmetry() < 1e-14);
    }

    #[test]
    fn conjugate_gradient_zero_rhs_is_zero() {
        let mut a = SparseRows::new(3);
        for i in 0..3 {
            a.add(i, i, 2.0);
        }
        let x = conjugate_gradient(&a, &[0.0; 3], 1e-12, 100).unwrap();
        assert!(x.iter().all(|&v| v == 0.0));
    }
}
