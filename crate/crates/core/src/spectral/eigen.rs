//! Eigenvalues of dense real symmetric matrices.
//!
//! Householder reduction to tridiagonal form followed by implicit-shift QL.
//! Eigenvectors are never accumulated.

use crate::scalar::Scalar;

/// Maximum QL sweeps per eigenvalue before giving up.
const MAX_SWEEPS: usize = 60;

/// Failure of the QL iteration on the tridiagonal form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NoConvergence;

/// Reduce the symmetric row-major `n x n` matrix `a` in place to tridiagonal
/// form. Returns `(diagonal, subdiagonal)` with `subdiagonal.len() == n - 1`.
///
/// Both triangles are kept up to date so every inner loop is a contiguous row
/// operation.
pub fn tridiagonalize<T: Scalar>(a: &mut [T], n: usize) -> (Vec<T>, Vec<T>) {
    assert_eq!(a.len(), n * n, "matrix storage does not match dimension");
    let mut d = vec![T::zero(); n];
    let mut e = vec![T::zero(); n];
    let mut u = vec![T::zero(); n];
    let mut q = vec![T::zero(); n];
    let two = T::cst(2.0);

    for i in (1..n).rev() {
        let l = i - 1;
        let row = &a[i * n..i * n + i];
        let scale: T = row.iter().map(|x| x.abs()).sum();
        if l == 0 || scale == T::zero() {
            e[i] = a[i * n + l];
            d[i] = a[i * n + i];
            continue;
        }
        let mut h = T::zero();
        for k in 0..=l {
            u[k] = row[k] / scale;
            h = h + u[k] * u[k];
        }
        let f = u[l];
        let g = if f >= T::zero() { -h.sqrt() } else { h.sqrt() };
        e[i] = scale * g;
        h = h - f * g;
        u[l] = f - g;

        // p = B u / h over the leading (l+1) block, then K and q = p - K u
        let mut upk = T::zero();
        for j in 0..=l {
            let brow = &a[j * n..j * n + l + 1];
            let dot = brow
                .iter()
                .zip(&u[..=l])
                .fold(T::zero(), |acc, (&b, &x)| acc + b * x);
            q[j] = dot / h;
            upk = upk + u[j] * q[j];
        }
        let kk = upk / (two * h);
        for j in 0..=l {
            q[j] = q[j] - kk * u[j];
        }
        for j in 0..=l {
            let (uj, qj) = (u[j], q[j]);
            let brow = &mut a[j * n..j * n + l + 1];
            for ((b, &uk), &qk) in brow.iter_mut().zip(&u[..=l]).zip(&q[..=l]) {
                *b = *b - (uj * qk + qj * uk);
            }
        }
        d[i] = a[i * n + i];
    }
    if n == 0 {
        return (d, e);
    }
    d[0] = a[0];
    e.remove(0);
    (d, e)
}

#[inline]
fn with_sign<T: Scalar>(magnitude: T, sign_of: T) -> T {
    if sign_of >= T::zero() {
        magnitude.abs()
    } else {
        -magnitude.abs()
    }
}

/// Eigenvalues of the symmetric tridiagonal matrix with diagonal `d` and
/// subdiagonal `e` (implicit QL with Wilkinson-type shifts). Output is unsorted.
pub fn tridiagonal_eigenvalues<T: Scalar>(mut d: Vec<T>, e: &[T]) -> Result<Vec<T>, NoConvergence> {
    let n = d.len();
    if n == 0 {
        return Ok(d);
    }
    assert_eq!(e.len() + 1, n, "subdiagonal length must be n - 1");
    let mut e: Vec<T> = e.iter().copied().chain(std::iter::once(T::zero())).collect();
    let eps = T::epsilon();
    let two = T::cst(2.0);
    // absolute floor for deflation: relative tests alone stall on clusters at zero
    let norm = (0..n).fold(T::zero(), |acc, i| acc.max(d[i].abs() + e[i].abs() + if i > 0 { e[i - 1].abs() } else { T::zero() }));
    let floor = eps * norm;

    for l in 0..n {
        let mut sweeps = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= eps * dd || e[m].abs() <= floor {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            sweeps += 1;
            if sweeps > MAX_SWEEPS {
                return Err(NoConvergence);
            }

            let mut g = (d[l + 1] - d[l]) / (two * e[l]);
            let mut r = g.hypot(T::one());
            g = d[m] - d[l] + e[l] / (g + with_sign(r, g));
            let (mut s, mut c, mut p) = (T::one(), T::one(), T::zero());
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == T::zero() {
                    d[i + 1] = d[i + 1] - p;
                    e[m] = T::zero();
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + two * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] = d[l] - p;
            e[l] = g;
            e[m] = T::zero();
        }
    }
    Ok(d)
}

/// All eigenvalues of a dense symmetric matrix, ascending. `a` is consumed as workspace.
pub fn symmetric_eigenvalues<T: Scalar>(mut a: Vec<T>, n: usize) -> Result<Vec<T>, NoConvergence> {
    let (d, e) = tridiagonalize(&mut a, n);
    let mut values = tridiagonal_eigenvalues(d, &e)?;
    values.sort_by(|x, y| x.partial_cmp(y).expect("finite eigenvalues"));
    Ok(values)
}
