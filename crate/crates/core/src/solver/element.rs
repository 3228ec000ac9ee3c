//! Square bilinear plane-stress element with selective integration.
//!
//! The plane-stress elasticity matrix splits as `D = lambda* m m^T + G diag(2, 2, 1)`
//! with `lambda* = E nu / (1 - nu^2)`. The shear part is integrated with 2x2
//! Gauss points and the dilatational part with the single centre point, which
//! keeps the element free of spurious zero-energy modes while relieving
//! volumetric stiffening as `nu -> 0.5`.

use crate::scalar::Scalar;

/// Local node order: (-1,-1), (1,-1), (1,1), (-1,1).
const CORNERS: [(f64, f64); 4] = [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)];

pub type ElementMatrix<T> = [[T; 8]; 8];

/// Strain-displacement matrix (rows exx, eyy, gxy) at (xi, eta) for side `h`.
fn b_matrix<T: Scalar>(xi: T, eta: T, h: T) -> [[T; 8]; 3] {
    let quarter = T::lit(0.25);
    let scale = T::lit(2.0) / h;
    let mut b = [[T::zero(); 8]; 3];
    for (a, &(xa, ya)) in CORNERS.iter().enumerate() {
        let (xa, ya) = (T::lit(xa), T::lit(ya));
        let dx = quarter * xa * (T::one() + ya * eta) * scale;
        let dy = quarter * ya * (T::one() + xa * xi) * scale;
        b[0][2 * a] = dx;
        b[1][2 * a + 1] = dy;
        b[2][2 * a] = dy;
        b[2][2 * a + 1] = dx;
    }
    b
}

fn accumulate<T: Scalar>(k: &mut ElementMatrix<T>, b: &[[T; 8]; 3], d: &[[T; 3]; 3], w: T) {
    let mut db = [[T::zero(); 8]; 3];
    for i in 0..3 {
        for j in 0..8 {
            db[i][j] = (0..3).map(|l| d[i][l] * b[l][j]).sum();
        }
    }
    for i in 0..8 {
        for j in 0..8 {
            k[i][j] = k[i][j] + w * (0..3).map(|l| b[l][i] * db[l][j]).sum::<T>();
        }
    }
}

/// Stiffness of a unit-thickness square element of side `h`.
pub fn stiffness<T: Scalar>(youngs: T, poisson: T, h: T) -> ElementMatrix<T> {
    let one = T::one();
    let shear = youngs / (T::lit(2.0) * (one + poisson));
    let lambda = youngs * poisson / (one - poisson * poisson);
    let jac = h * h * T::lit(0.25);
    let z = T::zero();

    let d_shear = [
        [T::lit(2.0) * shear, z, z],
        [z, T::lit(2.0) * shear, z],
        [z, z, shear],
    ];
    let d_vol = [[lambda, lambda, z], [lambda, lambda, z], [z, z, z]];

    let mut k = [[z; 8]; 8];
    let g = T::one() / T::lit(3.0).sqrt();
    for &(xi, eta) in &[(-g, -g), (g, -g), (g, g), (-g, g)] {
        accumulate(&mut k, &b_matrix(xi, eta, h), &d_shear, jac);
    }
    accumulate(&mut k, &b_matrix(z, z, h), &d_vol, T::lit(4.0) * jac);
    k
}

/// Largest eigenvalue of a symmetric matrix (cyclic Jacobi).
pub fn max_eigenvalue<T: Scalar>(m: &ElementMatrix<T>) -> T {
    let mut a = *m;
    let n = 8;
    for _sweep in 0..100 {
        let off: T = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        let diag: T = (0..n).map(|i| a[i][i] * a[i][i]).sum();
        if off <= T::epsilon() * T::epsilon() * diag {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q] == T::zero() {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (T::lit(2.0) * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i][i]).fold(T::neg_infinity(), T::max)
}
