use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

/// Dense complex matrix, row `i` column `j` at `(i, j)`.
pub type ComplexMatrix = DMatrix<Complex64>;

/// Smallest `|R_ii|` accepted from the QR step before the draw is repeated.
const SINGULAR_TOL: f64 = 1e-10;

/// Draws a Haar-distributed element of `SU(n)`.
///
/// A complex Ginibre matrix is orthonormalized by QR, the columns of `Q` are
/// rephased by `R_ii / |R_ii|` (giving Haar on `U(n)`), and the result is
/// multiplied by the principal branch of `det^{-1/n}`.
pub fn haar_su<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    assert!(n >= 1, "SU(n) needs n ≥ 1");
    if n == 1 {
        return ComplexMatrix::from_element(1, 1, Complex64::new(1.0, 0.0));
    }
    loop {
        let z = ComplexMatrix::from_fn(n, n, |_, _| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re, im)
        });
        let qr = z.qr();
        let r = qr.r();
        if (0..n).any(|i| r[(i, i)].norm() < SINGULAR_TOL) {
            continue;
        }
        let mut q = qr.q();
        for j in 0..n {
            let d = r[(j, j)];
            let phase = d / d.norm();
            for i in 0..n {
                q[(i, j)] *= phase;
            }
        }
        let det = q.determinant();
        let fix = Complex64::from_polar(det.norm().powf(-1.0 / n as f64), -det.arg() / n as f64);
        return q * fix;
    }
}

/// `max |(g g†)_{ij} − δ_{ij}|`.
pub fn unitarity_defect(g: &ComplexMatrix) -> f64 {
    let p = g * g.adjoint();
    let n = g.nrows();
    let mut worst = 0f64;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((p[(i, j)] - Complex64::new(target, 0.0)).norm());
        }
    }
    worst
}

/// `|det g − 1|`.
pub fn det_defect(g: &ComplexMatrix) -> f64 {
    (g.clone().determinant() - Complex64::new(1.0, 0.0)).norm()
}
