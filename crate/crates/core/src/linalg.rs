//! Dense complex linear algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::fourier::C64;

pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

/// Frobenius norm.
pub fn frob(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Outcome of a least-squares solve.
#[derive(Clone, Debug)]
pub struct LstsqSolution {
    pub x: CVector,
    /// Euclidean norm of `A x - b`.
    pub residual: f64,
    pub sigma_min: f64,
    pub sigma_max: f64,
}

const REFINE_STEPS: usize = 4;

/// Minimum-norm least squares via the singular value decomposition.
pub fn lstsq_svd(a: &CMatrix, b: &CVector) -> Result<LstsqSolution> {
    let svd = a.clone().svd(true, true);
    let sigma_max = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let sigma_min = svd.singular_values.iter().cloned().fold(f64::INFINITY, f64::min);
    let eps = sigma_max * 1e-14;
    let solve = |r: &CVector| svd.solve(r, eps).map_err(|e| Error::Conditioning(format!("svd solve: {e}")));
    let mut x = solve(b)?;
    let mut residual = (a * &x - b).norm();
    // The complex SVD is sometimes accurate only to ~1e-7; refine against A itself.
    for _ in 0..REFINE_STEPS {
        let r = b - a * &x;
        let next = &x + solve(&r)?;
        let res = (a * &next - b).norm();
        if !(res < residual) {
            break;
        }
        x = next;
        residual = res;
    }
    Ok(LstsqSolution {
        x,
        residual,
        sigma_min,
        sigma_max,
    })
}

/// Least squares through a thin QR factorization; requires full column rank.
pub fn lstsq_qr(a: &CMatrix, b: &CVector) -> Result<CVector> {
    if a.nrows() < a.ncols() {
        return Err(Error::BadInput("QR least squares needs rows >= columns".into()));
    }
    let qr = a.clone().qr();
    let q = qr.q();
    let r = qr.r();
    let rhs = q.adjoint() * b;
    r.solve_upper_triangular(&rhs)
        .ok_or_else(|| Error::Singular {
            what: "QR triangular factor".into(),
            sigma_min: 0.0,
        })
}

/// Least squares through the normal equations `A^H A x = A^H b`.
pub fn lstsq_normal(a: &CMatrix, b: &CVector) -> Result<CVector> {
    let ah = a.adjoint();
    let n = &ah * a;
    let rhs = &ah * b;
    n.lu().solve(&rhs).ok_or_else(|| Error::Singular {
        what: "normal equations".into(),
        sigma_min: 0.0,
    })
}

/// Moore-Penrose pseudo-inverse together with the extreme singular values.
pub fn pseudo_inverse(a: &CMatrix) -> Result<(CMatrix, f64, f64)> {
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let smin = svd.singular_values.iter().cloned().fold(f64::INFINITY, f64::min);
    let pinv = svd
        .pseudo_inverse(smax * 1e-14)
        .map_err(|e| Error::Conditioning(format!("pseudo-inverse: {e}")))?;
    Ok((pinv, smin, smax))
}

pub fn singular_values(a: &CMatrix) -> Vec<f64> {
    let mut s: Vec<f64> = a.clone().svd(false, false).singular_values.iter().cloned().collect();
    s.sort_by(|x, y| y.partial_cmp(x).unwrap());
    s
}

pub fn det(a: &CMatrix) -> C64 {
    if a.nrows() == 0 {
        return c(1.0, 0.0);
    }
    a.clone().lu().determinant()
}

pub fn inverse(a: &CMatrix, what: &str) -> Result<CMatrix> {
    a.clone().try_inverse().ok_or_else(|| Error::Singular {
        what: what.to_string(),
        sigma_min: 0.0,
    })
}

pub fn norm1(a: &CMatrix) -> f64 {
    (0..a.ncols())
        .map(|j| a.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Matrix exponential by scaling and squaring with the degree-13 Padé approximant.
pub fn expm(a: &CMatrix) -> CMatrix {
    const B: [f64; 14] = [
        64764752532480000.0,
        32382376266240000.0,
        7771770303897600.0,
        1187353796428800.0,
        129060195264000.0,
        10559470521600.0,
        670442572800.0,
        33522128640.0,
        1323241920.0,
        40840800.0,
        960960.0,
        16380.0,
        182.0,
        1.0,
    ];
    const THETA13: f64 = 5.371920351148152;
    let n = a.nrows();
    if n == 0 {
        return a.clone();
    }
    let nrm = norm1(a);
    let s = if nrm > THETA13 {
        (nrm / THETA13).log2().ceil() as i32
    } else {
        0
    };
    let x = a.scale(0.5f64.powi(s));
    let id = identity(n);
    let x2 = &x * &x;
    let x4 = &x2 * &x2;
    let x6 = &x4 * &x2;
    let r = |k: usize| c(B[k], 0.0);
    let u_inner = &x6 * (&x6 * r(13) + &x4 * r(11) + &x2 * r(9))
        + &x6 * r(7)
        + &x4 * r(5)
        + &x2 * r(3)
        + &id * r(1);
    let u = &x * u_inner;
    let v = &x6 * (&x6 * r(12) + &x4 * r(10) + &x2 * r(8))
        + &x6 * r(6)
        + &x4 * r(4)
        + &x2 * r(2)
        + &id * r(0);
    let p = &v + &u;
    let q = &v - &u;
    let mut e = q.lu().solve(&p).expect("Padé denominator is invertible for scaled input");
    for _ in 0..s {
        e = &e * &e;
    }
    e
}

/// Richardson extrapolation of `v(N) ≈ v∞ + a/N + b/N²` (fewer terms when
/// fewer sizes). Returns the limit and the last-step difference as error.
pub fn richardson(sizes: &[usize], values: &[C64]) -> (C64, f64) {
    assert_eq!(sizes.len(), values.len());
    assert!(!sizes.is_empty());
    let k = sizes.len().min(3);
    let start = sizes.len() - k;
    let err = if sizes.len() >= 2 {
        (values[sizes.len() - 1] - values[sizes.len() - 2]).norm()
    } else {
        f64::INFINITY
    };
    let m = CMatrix::from_fn(k, k, |i, j| c((sizes[start + i] as f64).powi(-(j as i32)), 0.0));
    let rhs = CVector::from_iterator(k, values[start..].iter().cloned());
    let limit = m.lu().solve(&rhs).map(|s| s[0]).unwrap_or(values[values.len() - 1]);
    (limit, err)
}
