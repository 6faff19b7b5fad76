//! Shared dense-linear-algebra helpers: matrix exponentials, continuous
//! determinant-argument tracking, Hermitian eigendecompositions, and
//! complex Gaussian (Fresnel) integrals with branch control.
//!
//! Everything here is branch-sensitive plumbing: square roots of complex
//! determinants are never taken with the principal branch directly, but by
//! accumulating a continuous argument along an explicit homotopy.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type RMat = DMatrix<f64>;
pub type RVec = DVector<f64>;
pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const IM: Complex64 = Complex64::new(0.0, 1.0);

/// Real matrix exponential (nalgebra's Pade scaling-and-squaring).
pub fn expm(m: &RMat) -> RMat {
    m.clone().exp()
}

/// Promote a real matrix to complex.
pub fn to_c(m: &RMat) -> CMat {
    m.map(|x| Complex64::new(x, 0.0))
}

/// Promote a real vector to complex.
pub fn vec_to_c(v: &RVec) -> CVec {
    v.map(|x| Complex64::new(x, 0.0))
}

/// Entrywise max-abs norm.
pub fn max_abs(m: &RMat) -> f64 {
    m.iter().fold(0.0_f64, |a, x| a.max(x.abs()))
}

/// Determinant of a complex matrix via LU.
pub fn det_c(m: &CMat) -> Complex64 {
    m.clone().lu().determinant()
}

/// Symmetrize a complex matrix: (M + M^T)/2.
pub fn symmetrize(m: &CMat) -> CMat {
    (m + m.transpose()) * Complex64::new(0.5, 0.0)
}

/// Symmetrize a real matrix.
pub fn symmetrize_r(m: &RMat) -> RMat {
    (m + m.transpose()) * 0.5
}

/// Accumulates a continuous argument from a stream of complex values,
/// unwrapping each increment into (-pi, pi].
#[derive(Debug, Clone)]
pub struct ArgTracker {
    prev: Option<f64>,
    acc: f64,
    max_step: f64,
}

impl ArgTracker {
    pub fn new() -> Self {
        ArgTracker { prev: None, acc: 0.0, max_step: 0.0 }
    }

    /// Feed the next value; returns the accumulated continuous argument.
    pub fn push(&mut self, v: Complex64) -> f64 {
        let a = v.arg();
        if let Some(p) = self.prev {
            let mut da = a - p;
            while da > std::f64::consts::PI {
                da -= 2.0 * std::f64::consts::PI;
            }
            while da < -std::f64::consts::PI {
                da += 2.0 * std::f64::consts::PI;
            }
            self.max_step = self.max_step.max(da.abs());
            self.acc += da;
        }
        self.prev = Some(a);
        self.acc
    }

    pub fn accumulated(&self) -> f64 {
        self.acc
    }

    /// Largest single unwrapped increment seen so far; callers compare this
    /// against their mesh criterion (pi/2) to detect under-resolution.
    pub fn max_step(&self) -> f64 {
        self.max_step
    }
}

impl Default for ArgTracker {
    fn default() -> Self {
        Self::new()
    }
}

/// Continuous argument of det(M) accumulated along a sequence of matrices.
/// Returns (accumulated arg change, modulus of the final determinant,
/// max unwrapped step).
pub fn unwrap_det_arg<'a, I: IntoIterator<Item = &'a CMat>>(mats: I) -> (f64, f64, f64) {
    let mut tr = ArgTracker::new();
    let mut last_mod = 0.0;
    for m in mats {
        let d = det_c(m);
        tr.push(d);
        last_mod = d.norm();
    }
    (tr.accumulated(), last_mod, tr.max_step())
}

/// Hermitian eigendecomposition; returns (ascending eigenvalues, eigenvectors
/// as columns). Input is symmetrized first to absorb roundoff.
pub fn herm_eig(m: &CMat) -> (RVec, CMat) {
    let h = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let se = nalgebra::SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..se.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| se.eigenvalues[a].total_cmp(&se.eigenvalues[b]));
    let ev = RVec::from_iterator(order.len(), order.iter().map(|&i| se.eigenvalues[i]));
    let cols: Vec<_> = order.iter().map(|&i| se.eigenvectors.column(i)).collect();
    (ev, CMat::from_columns(&cols))
}

/// Real symmetric eigendecomposition, eigenvalues ascending.
pub fn sym_eig(m: &RMat) -> (RVec, RMat) {
    let se = nalgebra::SymmetricEigen::new(symmetrize_r(m));
    let mut order: Vec<usize> = (0..se.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| se.eigenvalues[a].total_cmp(&se.eigenvalues[b]));
    let ev = RVec::from_iterator(order.len(), order.iter().map(|&i| se.eigenvalues[i]));
    let cols: Vec<_> = order.iter().map(|&i| se.eigenvectors.column(i)).collect();
    (ev, RMat::from_columns(&cols))
}

/// Smallest eigenvalue of the Hermitian part of a complex matrix.
pub fn min_herm_eig(m: &CMat) -> f64 {
    let (ev, _) = herm_eig(m);
    ev.iter().cloned().fold(f64::INFINITY, f64::min)
}

/// det(A)^{-1/2} with the branch fixed by the straight-line homotopy
/// (1-tau) I + tau A, valid whenever the Hermitian part of A is positive
/// definite (the homotopy then stays invertible and the argument is
/// unambiguous). `steps` controls the homotopy resolution.
pub fn inv_sqrt_det_pd(a: &CMat, steps: usize) -> Complex64 {
    let n = a.nrows();
    let id = CMat::identity(n, n);
    let mut tr = ArgTracker::new();
    let mut last = Complex64::new(1.0, 0.0);
    for k in 0..=steps {
        let tau = k as f64 / steps as f64;
        let m = &id * Complex64::new(1.0 - tau, 0.0) + a * Complex64::new(tau, 0.0);
        last = det_c(&m);
        tr.push(last);
    }
    let arg = tr.accumulated();
    Complex64::from_polar(last.norm().powf(-0.5), -0.5 * arg)
}

/// Complex Gaussian integral over R^d:
///   int exp(-1/2 x^T A x + b.x) dx = (2 pi)^{d/2} det(A)^{-1/2} exp(1/2 b^T A^{-1} b)
/// for complex symmetric A with positive-definite Hermitian part; the
/// det branch comes from the homotopy in `inv_sqrt_det_pd`.
pub fn gauss_integral(a: &CMat, b: &CVec) -> Complex64 {
    let d = a.nrows();
    let ai = a
        .clone()
        .lu()
        .solve(b)
        .expect("gauss_integral: singular quadratic form");
    let quad: Complex64 = b.dot(&ai);
    let pref = Complex64::new((2.0 * std::f64::consts::PI).powf(d as f64 / 2.0), 0.0);
    pref * inv_sqrt_det_pd(a, 256) * (quad * Complex64::new(0.5, 0.0)).exp()
}

/// Fourier transform of a Gaussian phase: int exp(i M X.X - i X.Y) dX for
/// complex symmetric M with positive-semidefinite imaginary part and
/// det M != 0. The branch of det^{-1/2} is tracked along the homotopy
/// M(tau) = (1-tau) iI + tau M, whose imaginary part stays positive
/// definite for tau < 1 (Fresnel limit at the endpoint).
pub fn gauss_ft(c: Complex64, m: &CMat, y: &RVec) -> Complex64 {
    let d = m.nrows();
    let id = CMat::identity(d, d);
    let steps = 400;
    let mut tr = ArgTracker::new();
    let mut last = Complex64::new(1.0, 0.0);
    for k in 0..=steps {
        let tau = k as f64 / steps as f64;
        // -i M(tau): at tau=0 this is -i * iI = I, so the arg starts at 0.
        let mt = &id * (IM * Complex64::new(1.0 - tau, 0.0)) + m * Complex64::new(tau, 0.0);
        last = det_c(&(mt * (-IM)));
        tr.push(last);
    }
    let arg = tr.accumulated();
    let yc = vec_to_c(y);
    let minv_y = m.clone().lu().solve(&yc).expect("gauss_ft: singular M");
    let quad: Complex64 = yc.dot(&minv_y);
    let pref = std::f64::consts::PI.powf(d as f64 / 2.0);
    c * pref
        * Complex64::from_polar(last.norm().powf(-0.5), -0.5 * arg)
        * (-Complex64::new(0.25, 0.0) * IM * quad).exp()
}

/// Eigendecomposition of a unitary matrix U = V diag(e^{i theta}) V^*.
/// Exploits normality: diagonalize the Hermitian part, then diagonalize the
/// anti-Hermitian part within each (possibly degenerate) eigenspace.
/// Returns (angles theta in (-pi, pi], unitary V).
pub fn unitary_eig(u: &CMat) -> (RVec, CMat) {
    let n = u.nrows();
    let h1 = (u + u.adjoint()) * Complex64::new(0.5, 0.0);
    let h2 = (u - u.adjoint()) * (-IM * Complex64::new(0.5, 0.0));
    let (c_ev, mut v) = herm_eig(&h1);
    // Group near-equal cos-eigenvalues and rediagonalize sin within groups.
    let tol = 1e-9;
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && (c_ev[end] - c_ev[start]).abs() < tol {
            end += 1;
        }
        if end - start > 1 {
            let block = v.columns(start, end - start).clone_owned();
            let h2_sub = block.adjoint() * &h2 * &block;
            let (_, w) = herm_eig(&h2_sub);
            let rotated = &block * &w;
            v.columns_mut(start, end - start).copy_from(&rotated);
        }
        start = end;
    }
    // Angles from diagonal of V^* U V.
    let diag = v.adjoint() * u * &v;
    let angles = RVec::from_iterator(n, (0..n).map(|i| diag[(i, i)].arg()));
    (angles, v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn expm_rotation() {
        let j = RMat::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        let r = expm(&(j * PI / 2.0));
        assert!((r[(0, 1)] - 1.0).abs() < 1e-12);
        assert!(r[(0, 0)].abs() < 1e-12);
    }

    #[test]
    fn arg_tracker_winds_past_branch_cut() {
        let mut tr = ArgTracker::new();
        for k in 0..=100 {
            let th = 2.0 * PI * k as f64 / 100.0;
            tr.push(Complex64::from_polar(1.0, th));
        }
        assert!((tr.accumulated() - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn gauss_integral_real_case() {
        // int exp(-x^2/2) dx = sqrt(2 pi)
        let a = CMat::identity(1, 1);
        let b = CVec::zeros(1);
        let v = gauss_integral(&a, &b);
        assert!((v.re - (2.0 * PI).sqrt()).abs() < 1e-10);
        assert!(v.im.abs() < 1e-10);
    }

    #[test]
    fn gauss_ft_pure_fresnel() {
        // int exp(i x^2) dx = sqrt(pi) e^{i pi/4}
        let m = CMat::identity(1, 1);
        let v = gauss_ft(Complex64::new(1.0, 0.0), &m, &RVec::zeros(1));
        let want = Complex64::from_polar(PI.sqrt(), PI / 4.0);
        assert!((v - want).norm() < 1e-8, "got {v}");
    }

    #[test]
    fn unitary_eig_reconstructs() {
        // A unitary with a degenerate cos block: diag(e^{i a}, e^{-i a}, e^{i b})
        let a = 0.7;
        let b = 2.0;
        let mut u = CMat::zeros(3, 3);
        u[(0, 0)] = Complex64::from_polar(1.0, a);
        u[(1, 1)] = Complex64::from_polar(1.0, -a);
        u[(2, 2)] = Complex64::from_polar(1.0, b);
        // conjugate by a random-ish unitary built from a Hermitian exponential
        let h = CMat::from_row_slice(
            3,
            3,
            &[
                ONE,
                Complex64::new(0.3, 0.2),
                Complex64::new(-0.1, 0.5),
                Complex64::new(0.3, -0.2),
                2.0 * ONE,
                Complex64::new(0.4, 0.0),
                Complex64::new(-0.1, -0.5),
                Complex64::new(0.4, 0.0),
                -ONE,
            ],
        );
        let (ev, w) = herm_eig(&h);
        let q = &w
            * CMat::from_diagonal(&ev.map(|x| (IM * Complex64::new(x, 0.0)).exp()))
            * w.adjoint();
        let u = &q * u * q.adjoint();
        let (angles, v) = unitary_eig(&u);
        let rec = &v
            * CMat::from_diagonal(&angles.map(|t| Complex64::from_polar(1.0, t)))
            * v.adjoint();
        assert!((rec - u).norm() < 1e-9);
    }
}
