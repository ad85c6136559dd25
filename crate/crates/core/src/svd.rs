//! One-sided Jacobi SVD for small complex matrices.
//!
//! The TEBD split factors matrices that are strongly rank-deficient by
//! construction (bond dimension well below the matrix size), and the
//! platform SVD mis-factors those: reconstruction error reaches O(1) on
//! random low-rank complex inputs even though the returned factors stay
//! orthonormal. One-sided Jacobi orthogonalizes the columns in place, keeps
//! `a = w * v_t` exact per rotation, and retains high relative accuracy for
//! small singular values, which is what truncation decisions need.

use nalgebra::DMatrix;

use crate::C64;

pub(crate) struct SvdResult {
    /// m x r with orthonormal columns (zero columns for zero singular values).
    pub u: DMatrix<C64>,
    /// r singular values, descending, r = min(m, n).
    pub s: Vec<f64>,
    /// r x n with orthonormal rows.
    pub v_t: DMatrix<C64>,
}

/// Thin SVD: a = u * diag(s) * v_t.
pub(crate) fn jacobi_svd(a: &DMatrix<C64>) -> SvdResult {
    debug_assert!(
        a.iter().all(|c| c.re.is_finite() && c.im.is_finite()),
        "non-finite input to jacobi_svd"
    );
    let (m, n) = a.shape();
    if m < n {
        let t = jacobi_svd(&a.adjoint());
        return SvdResult {
            u: t.v_t.adjoint(),
            s: t.s,
            v_t: t.u.adjoint(),
        };
    }
    let mut w = a.clone();
    let mut v = DMatrix::<C64>::identity(n, n);
    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..n.saturating_sub(1) {
            for q in p + 1..n {
                let mut app = 0.0f64;
                let mut aqq = 0.0f64;
                let mut apq = C64::new(0.0, 0.0);
                for i in 0..m {
                    let wp = w[(i, p)];
                    let wq = w[(i, q)];
                    app += wp.norm_sqr();
                    aqq += wq.norm_sqr();
                    apq += wp.conj() * wq;
                }
                let mag = apq.norm();
                // sqrt before multiplying: app * aqq can underflow to zero
                // for numerically-dead column pairs
                if mag <= 1e-16 * app.sqrt() * aqq.sqrt() || mag == 0.0 {
                    continue;
                }
                rotated = true;
                // phase-reduce the pair Gram to a real symmetric 2x2, then a
                // classical Jacobi rotation with |theta| <= pi/4; divide
                // componentwise (complex division squares mag and underflows)
                let ph = C64::new(apq.re / mag, -(apq.im / mag));
                let tau = (aqq - app) / (2.0 * mag);
                let t = -tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                for i in 0..m {
                    let wp = w[(i, p)];
                    let wq = w[(i, q)];
                    w[(i, p)] = wp * cs + wq * (ph * sn);
                    w[(i, q)] = -wp * sn + wq * (ph * cs);
                }
                for i in 0..n {
                    let vp = v[(i, p)];
                    let vq = v[(i, q)];
                    v[(i, p)] = vp * cs + vq * (ph * sn);
                    v[(i, q)] = -vp * sn + vq * (ph * cs);
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let norms: Vec<f64> = (0..n).map(|j| w.column(j).norm()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| norms[b].partial_cmp(&norms[a]).expect("norms are finite"));
    let mut u = DMatrix::<C64>::zeros(m, n);
    let mut v_t = DMatrix::<C64>::zeros(n, n);
    let mut s = Vec::with_capacity(n);
    for (k, &j) in order.iter().enumerate() {
        s.push(norms[j]);
        if norms[j] > 0.0 {
            for i in 0..m {
                u[(i, k)] = w[(i, j)] / norms[j];
            }
        }
        for i in 0..n {
            v_t[(k, i)] = v[(i, j)].conj();
        }
    }
    SvdResult { u, s, v_t }
}
