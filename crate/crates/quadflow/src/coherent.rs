//! Gaussian (squeezed) coherent states, Weyl translations, and their exact
//! propagation under quadratic Hamiltonians, with amplitude branch tracking
//! and an independent Riccati cross-check of the Moebius transport.

use crate::linalg::{
    gauss_integral, symmetrize, to_c, vec_to_c, ArgTracker, CMat, CVec, RMat, RVec, IM,
};
use crate::siegel::{moebius, SiegelPoint};
use crate::symcore::{
    symplectic_product, PhasePoint, QuadraticHamiltonian, SymplecticPath,
};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoherentError {
    #[error("dimension/hbar mismatch between states")]
    Mismatch,
    #[error(transparent)]
    Siegel(#[from] crate::siegel::SiegelError),
    #[error(transparent)]
    Sym(#[from] crate::symcore::SymError),
    #[error("branch continuity lost: det(A + B Gamma) argument jumped by {step:.3}")]
    BranchDiscontinuity { step: f64 },
    #[error("Riccati step rejected: Im Gamma lost positivity at t = {t}")]
    PositivityLost { t: f64 },
}

/// A normalized Gaussian state a T(z) exp((i/2 hbar) Gamma x.x).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GaussianState {
    n: usize,
    hbar: f64,
    z: PhasePoint,
    gamma: SiegelPoint,
    a: Complex64,
}

impl GaussianState {
    /// The ground state phi_0 = (pi hbar)^{-n/4} e^{-x.x/(2 hbar)}.
    pub fn ground(n: usize, hbar: f64) -> Self {
        GaussianState {
            n,
            hbar,
            z: PhasePoint::zeros(n),
            gamma: SiegelPoint::base(n),
            a: Complex64::new((std::f64::consts::PI * hbar).powf(-(n as f64) / 4.0), 0.0),
        }
    }

    /// The coherent state phi_z = T(z) phi_0.
    pub fn coherent(z: PhasePoint, hbar: f64) -> Self {
        let n = z.dim();
        let mut s = Self::ground(n, hbar);
        s.z = z;
        s
    }

    /// A squeezed state phi^Gamma_z with the real positive normalization.
    pub fn squeezed(z: PhasePoint, gamma: SiegelPoint, hbar: f64) -> Result<Self, CoherentError> {
        if z.dim() != gamma.dim() {
            return Err(CoherentError::Mismatch);
        }
        let n = z.dim();
        let det_im = gamma.im().determinant();
        let a = (std::f64::consts::PI * hbar).powf(-(n as f64) / 4.0) * det_im.powf(0.25);
        Ok(GaussianState { n, hbar, z, gamma, a: Complex64::new(a, 0.0) })
    }

    /// Build a state with an explicit complex amplitude (no normalization).
    pub fn with_amplitude(
        z: PhasePoint,
        gamma: SiegelPoint,
        a: Complex64,
        hbar: f64,
    ) -> Result<Self, CoherentError> {
        if z.dim() != gamma.dim() {
            return Err(CoherentError::Mismatch);
        }
        let n = z.dim();
        Ok(GaussianState { n, hbar, z, gamma, a })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn center(&self) -> &PhasePoint {
        &self.z
    }

    pub fn gamma(&self) -> &SiegelPoint {
        &self.gamma
    }

    pub fn amplitude(&self) -> Complex64 {
        self.a
    }

    /// |a| required for unit L^2 norm.
    pub fn normalization_modulus(&self) -> f64 {
        (std::f64::consts::PI * self.hbar).powf(-(self.n as f64) / 4.0)
            * self.gamma.im().determinant().powf(0.25)
    }

    /// Deviation of |a| from the unit-norm value.
    pub fn norm_residual(&self) -> f64 {
        (self.a.norm() - self.normalization_modulus()).abs()
    }

    /// Evaluate the wavefunction at position points (each of dimension n):
    ///   phi(x) = a exp((i/hbar)(p.x - q.p/2)) exp((i/2 hbar) Gamma (x-q).(x-q)).
    pub fn wavefunction(&self, xs: &[RVec]) -> Vec<Complex64> {
        let q = self.z.q();
        let p = self.z.p();
        let qp_half: f64 = q.dot(&p) / 2.0;
        let g = self.gamma.matrix();
        xs.iter()
            .map(|x| {
                let dx = vec_to_c(&(x - &q));
                let quad: Complex64 = (g * &dx).dot(&dx);
                let lin = p.dot(x) - qp_half;
                self.a
                    * (IM * Complex64::new(lin / self.hbar, 0.0)).exp()
                    * (IM * quad * Complex64::new(0.5 / self.hbar, 0.0)).exp()
            })
            .collect()
    }

    /// 1D convenience sampling (n = 1).
    pub fn wavefunction_1d(&self, xs: &[f64]) -> Vec<Complex64> {
        assert_eq!(self.n, 1);
        let pts: Vec<RVec> = xs.iter().map(|&x| RVec::from_element(1, x)).collect();
        self.wavefunction(&pts)
    }

    /// Argument of the wavefunction at the moving center:
    /// arg phi(q) = arg a + q.p / (2 hbar). Differences of this quantity
    /// expose the propagation phase independent of the Gaussian envelope.
    pub fn center_phase(&self) -> f64 {
        self.a.arg() + self.z.q().dot(&self.z.p()) / (2.0 * self.hbar)
    }
}

/// Composition of Weyl translations:
///   T(z) T(z') = exp((i/2 hbar) sigma(z, z')) T(z + z').
pub fn translate_compose(
    z: &PhasePoint,
    zp: &PhasePoint,
    hbar: f64,
) -> (Complex64, PhasePoint) {
    let s = symplectic_product(z.as_vec(), zp.as_vec());
    let phase = (IM * Complex64::new(s / (2.0 * hbar), 0.0)).exp();
    let center = PhasePoint::new(z.as_vec() + zp.as_vec()).expect("dimensions match");
    (phase, center)
}

/// Exact Gaussian-integral inner product <s1|s2>, conjugate-linear in the
/// first argument.
pub fn overlap(s1: &GaussianState, s2: &GaussianState) -> Result<Complex64, CoherentError> {
    if s1.n != s2.n || (s1.hbar - s2.hbar).abs() > 1e-15 {
        return Err(CoherentError::Mismatch);
    }
    let hb = s1.hbar;
    let g1c = s1.gamma.matrix().map(|c| c.conj());
    let g2 = s2.gamma.matrix().clone();
    let (q1, p1) = (s1.z.q(), s1.z.p());
    let (q2, p2) = (s2.z.q(), s2.z.p());
    // integrand exponent: -1/2 x.Ax + b.x + c
    let a_mat = (&g2 - &g1c) * (-IM / Complex64::new(hb, 0.0));
    let b: CVec = (-(&g2) * vec_to_c(&q2) + &g1c * vec_to_c(&q1) + vec_to_c(&(&p2 - &p1)))
        * (IM / Complex64::new(hb, 0.0));
    // Expanding Gamma (x-q).(x-q) contributes +(i/2hb) q.Gq for s2 and
    // -(i/2hb) q.G*q for s1's conjugate; the translation factors contribute
    // -(i/hb) q2.p2/2 + (i/hb) q1.p1/2.
    let c: Complex64 = IM / Complex64::new(2.0 * hb, 0.0)
        * ((&g2 * vec_to_c(&q2)).dot(&vec_to_c(&q2))
            - (&g1c * vec_to_c(&q1)).dot(&vec_to_c(&q1)))
        + IM / Complex64::new(hb, 0.0)
            * Complex64::new(q1.dot(&p1) / 2.0 - q2.dot(&p2) / 2.0, 0.0);
    Ok(s1.a.conj() * s2.a * c.exp() * gauss_integral(&a_mat, &b))
}

/// Transport a Gaussian state along a symplectic path (Theorem-4.1 closed
/// form): center F_t z, Gamma_t by the Moebius action, and amplitude
/// multiplied by det(A_t + B_t Gamma_0)^{-1/2} with the square-root branch
/// fixed by continuity along the path.
pub fn propagate(
    path: &SymplecticPath,
    s0: &GaussianState,
) -> Result<Vec<GaussianState>, CoherentError> {
    let mut out = Vec::with_capacity(path.nodes().len());
    let mut tracker = ArgTracker::new();
    for f in path.nodes() {
        let (gamma_t, det_e) = moebius(f, &s0.gamma)?;
        let arg = tracker.push(det_e);
        if tracker.max_step() >= std::f64::consts::FRAC_PI_2 {
            return Err(CoherentError::BranchDiscontinuity { step: tracker.max_step() });
        }
        let factor = Complex64::from_polar(det_e.norm().powf(-0.5), -0.5 * arg);
        let z_t = f.apply(&s0.z)?;
        out.push(GaussianState {
            n: s0.n,
            hbar: s0.hbar,
            z: z_t,
            gamma: gamma_t,
            a: s0.a * factor,
        });
    }
    Ok(out)
}

/// Direct ODE integration of the Riccati flow
///   dGamma/dt = -G - L^T Gamma - Gamma L - Gamma K Gamma,
/// an independent cross-check of the Moebius/linearization transport.
/// RK4 with step halving when Im Gamma loses positivity.
// mut_range_bound: doubling `steps` restarts 'retry, which recomputes the range
#[allow(clippy::mut_range_bound)]
pub fn riccati_integrate(
    h: &QuadraticHamiltonian,
    gamma0: &SiegelPoint,
    t0: f64,
    t1: f64,
    min_steps: usize,
) -> Result<SiegelPoint, CoherentError> {
    let mut steps = min_steps.max(64);
    'retry: loop {
        let dt = (t1 - t0) / steps as f64;
        let mut g = gamma0.matrix().clone();
        for i in 0..steps {
            let t = t0 + i as f64 * dt;
            let f = |tt: f64, gm: &CMat| -> CMat {
                let b = h.blocks(tt);
                let gg = to_c(&b.g);
                let ll = to_c(&b.l);
                let kk = to_c(&b.k);
                -(&gg) - ll.transpose() * gm - gm * &ll - gm * kk * gm
            };
            let k1 = f(t, &g);
            let k2 = f(t + dt / 2.0, &(&g + &k1 * Complex64::new(dt / 2.0, 0.0)));
            let k3 = f(t + dt / 2.0, &(&g + &k2 * Complex64::new(dt / 2.0, 0.0)));
            let k4 = f(t + dt, &(&g + &k3 * Complex64::new(dt, 0.0)));
            g = &g
                + (k1 + k2 * Complex64::new(2.0, 0.0) + k3 * Complex64::new(2.0, 0.0) + k4)
                    * Complex64::new(dt / 6.0, 0.0);
            g = symmetrize(&g);
            if crate::linalg::min_herm_eig(&to_c(&g.map(|c| c.im))) <= 0.0 {
                if steps < (1 << 16) {
                    steps *= 2;
                    continue 'retry;
                }
                return Err(CoherentError::PositivityLost { t: t + dt });
            }
        }
        return Ok(SiegelPoint::new(g)?);
    }
}

/// Closed-form Wigner function of a Gaussian state:
///   W(X) = 2^n exp(-(1/hbar) G (X - z).(X - z)),
/// with G assembled from Re Gamma and Im Gamma. Real-valued by construction.
pub fn wigner(s: &GaussianState, points: &[PhasePoint]) -> Vec<f64> {
    let n = s.n;
    let re = s.gamma.re();
    let im = s.gamma.im();
    let im_inv = im
        .clone()
        .lu()
        .try_inverse()
        .expect("Im Gamma is positive definite");
    let mut g = RMat::zeros(2 * n, 2 * n);
    g.view_mut((0, 0), (n, n)).copy_from(&(&im + &re * &im_inv * &re));
    g.view_mut((0, n), (n, n)).copy_from(&(-(&re) * &im_inv));
    g.view_mut((n, 0), (n, n)).copy_from(&(-(&im_inv) * &re));
    g.view_mut((n, n), (n, n)).copy_from(&im_inv);
    let scale = 2.0_f64.powi(n as i32);
    points
        .iter()
        .map(|x| {
            let d = x.as_vec() - s.z.as_vec();
            scale * (-(&g * &d).dot(&d) / s.hbar).exp()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symcore::{flow, random_symmetric};
    use std::f64::consts::PI;

    const HB: f64 = 1.0;

    #[test]
    fn ground_state_values() {
        let s = GaussianState::ground(1, HB);
        let xs = [-1.0, 0.0, 0.5, 2.0];
        let vals = s.wavefunction_1d(&xs);
        for (x, v) in xs.iter().zip(vals) {
            let want = PI.powf(-0.25) * (-x * x / 2.0).exp();
            assert!((v - Complex64::new(want, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn translated_state_recentres() {
        let z = PhasePoint::from_qp(&[1.5], &[0.0]).unwrap();
        let s = GaussianState::coherent(z, HB);
        let v = s.wavefunction_1d(&[1.5])[0];
        // no momentum: at x = q the phase is zero and the modulus peaks
        assert!((v.re - PI.powf(-0.25)).abs() < 1e-14);
        assert!(v.im.abs() < 1e-14);
    }

    #[test]
    fn squeezed_normalization() {
        // Gamma = 2i: |a| = (2/pi)^{1/4}
        let g = SiegelPoint::new(CMat::from_element(1, 1, 2.0 * IM)).unwrap();
        let s = GaussianState::squeezed(PhasePoint::zeros(1), g, HB).unwrap();
        assert!((s.amplitude().norm() - (2.0 / PI).powf(0.25)).abs() < 1e-14);
        // discrete L2 norm on a fine grid
        let xs: Vec<f64> = (0..4000).map(|i| -10.0 + i as f64 * 0.005).collect();
        let vals = s.wavefunction_1d(&xs);
        let norm: f64 = vals.iter().map(|v| v.norm_sqr() * 0.005).sum();
        assert!((norm - 1.0).abs() < 1e-8);
    }

    #[test]
    fn translate_compose_cases() {
        let z = PhasePoint::from_qp(&[1.0], &[0.5]).unwrap();
        let mz = PhasePoint::from_qp(&[-1.0], &[-0.5]).unwrap();
        let (ph, c) = translate_compose(&z, &mz, HB);
        assert!((ph - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        assert!(c.norm_sq() < 1e-28);

        // z = (q,0), z' = (0,p): sigma = -qp, phase e^{-iqp/2}
        let (q, p) = (0.8, 1.1);
        let z1 = PhasePoint::from_qp(&[q], &[0.0]).unwrap();
        let z2 = PhasePoint::from_qp(&[0.0], &[p]).unwrap();
        let (ph, _) = translate_compose(&z1, &z2, HB);
        assert!((ph - Complex64::from_polar(1.0, -q * p / 2.0)).norm() < 1e-14);

        let (ph, c) = translate_compose(&z, &z, HB);
        assert!((ph - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        assert!((c.as_vec() - z.as_vec() * 2.0).norm() < 1e-14);
    }

    #[test]
    fn overlap_normalized_and_coherent() {
        let s = GaussianState::ground(1, HB);
        assert!((overlap(&s, &s).unwrap() - Complex64::new(1.0, 0.0)).norm() < 1e-12);

        // <phi_z | phi_0> has modulus e^{-|z|^2/4}
        let z = PhasePoint::from_qp(&[0.9], &[-0.4]).unwrap();
        let sz = GaussianState::coherent(z.clone(), HB);
        let ov = overlap(&sz, &GaussianState::ground(1, HB)).unwrap();
        assert!((ov.norm() - (-z.norm_sq() / 4.0).exp()).abs() < 1e-12);
    }

    #[test]
    fn overlap_matches_grid_quadrature() {
        let g1 = SiegelPoint::new(CMat::from_element(1, 1, Complex64::new(0.4, 1.0))).unwrap();
        let g2 = SiegelPoint::new(CMat::from_element(1, 1, Complex64::new(-0.3, 2.0))).unwrap();
        let s1 = GaussianState::squeezed(
            PhasePoint::from_qp(&[0.3], &[0.7]).unwrap(),
            g1,
            HB,
        )
        .unwrap();
        let s2 = GaussianState::squeezed(
            PhasePoint::from_qp(&[-0.5], &[0.2]).unwrap(),
            g2,
            HB,
        )
        .unwrap();
        let dx = 0.004;
        let xs: Vec<f64> = (0..6000).map(|i| -12.0 + i as f64 * dx).collect();
        let v1 = s1.wavefunction_1d(&xs);
        let v2 = s2.wavefunction_1d(&xs);
        let grid: Complex64 = v1
            .iter()
            .zip(&v2)
            .map(|(a, b)| a.conj() * b * Complex64::new(dx, 0.0))
            .sum();
        let closed = overlap(&s1, &s2).unwrap();
        assert!((grid - closed).norm() < 1e-9, "grid {grid} vs closed {closed}");
    }

    #[test]
    fn ho_ground_state_phase() {
        // e^{-itH} phi_0 = e^{-it/2} phi_0 for the HO.
        let h = QuadraticHamiltonian::harmonic(1, HB);
        let t = 1.3;
        let path = flow(&h, 0.0, t, 128).unwrap();
        let states = propagate(&path, &GaussianState::ground(1, HB)).unwrap();
        let sf = states.last().unwrap();
        assert!((sf.gamma().matrix()[(0, 0)] - IM).norm() < 1e-9);
        let want = Complex64::from_polar(PI.powf(-0.25), -t / 2.0);
        assert!((sf.amplitude() - want).norm() < 1e-9);
    }

    #[test]
    fn ho_full_period_gives_minus_one() {
        // At t = 2pi the state returns to -phi_0: the det(A + iB) branch
        // winds once around.
        let h = QuadraticHamiltonian::harmonic(1, HB);
        let path = flow(&h, 0.0, 2.0 * PI, 256).unwrap();
        let states = propagate(&path, &GaussianState::ground(1, HB)).unwrap();
        let sf = states.last().unwrap();
        let want = -Complex64::new(PI.powf(-0.25), 0.0);
        assert!((sf.amplitude() - want).norm() < 1e-8, "got {}", sf.amplitude());
    }

    #[test]
    fn coherent_circle_phase() {
        // HO coherent state: center rotates, extra phase is
        // delta_t(z) = (p_t q_t - p q)/2.
        let h = QuadraticHamiltonian::harmonic(1, HB);
        let z = PhasePoint::from_qp(&[1.0], &[0.0]).unwrap();
        let s0 = GaussianState::coherent(z.clone(), HB);
        let t = 2.0;
        let path = flow(&h, 0.0, t, 256).unwrap();
        let states = propagate(&path, &s0).unwrap();
        let sf = states.last().unwrap();
        let zt = path.endpoint().apply(&z).unwrap();
        assert!((sf.center().as_vec() - zt.as_vec()).norm() < 1e-9);
        let delta = (zt.p()[0] * zt.q()[0] - z.p()[0] * z.q()[0]) / 2.0;
        let extra = sf.center_phase() - s0.center_phase() + t / 2.0;
        let diff = (extra - delta).rem_euclid(2.0 * PI);
        let diff = diff.min(2.0 * PI - diff);
        assert!(diff < 1e-8, "extra {extra} vs delta {delta}");
    }

    #[test]
    fn free_particle_gamma_and_amplitude() {
        let h = QuadraticHamiltonian::free(1, HB);
        let path = flow(&h, 0.0, 1.0, 128).unwrap();
        let states = propagate(&path, &GaussianState::ground(1, HB)).unwrap();
        let sf = states.last().unwrap();
        let want = Complex64::new(0.5, 0.5);
        assert!((sf.gamma().matrix()[(0, 0)] - want).norm() < 1e-9);
        let amp_ratio = sf.amplitude().norm() / PI.powf(-0.25);
        assert!((amp_ratio - 2.0_f64.powf(-0.25)).abs() < 1e-9);
    }

    #[test]
    fn riccati_fixed_point_and_free_case() {
        let h = QuadraticHamiltonian::harmonic(1, HB);
        let g = riccati_integrate(&h, &SiegelPoint::base(1), 0.0, 2.0, 256).unwrap();
        assert!((g.matrix()[(0, 0)] - IM).norm() < 1e-9);

        let hf = QuadraticHamiltonian::free(1, HB);
        let g = riccati_integrate(&hf, &SiegelPoint::base(1), 0.0, 1.0, 256).unwrap();
        assert!((g.matrix()[(0, 0)] - Complex64::new(0.5, 0.5)).norm() < 1e-9);

        let hz = QuadraticHamiltonian::zero(2, HB);
        let mut rng = crate::seeded_rng(31);
        let g0 = crate::siegel::random_siegel(2, &mut rng);
        let g = riccati_integrate(&hz, &g0, 0.0, 3.0, 64).unwrap();
        assert!((g.matrix() - g0.matrix()).norm() < 1e-12);
    }

    #[test]
    fn riccati_agrees_with_moebius() {
        let mut rng = crate::seeded_rng(41);
        for n in [1usize, 2] {
            let h = QuadraticHamiltonian::constant(
                n,
                HB,
                random_symmetric(n, 0.7, &mut rng),
                random_symmetric(n, 0.7, &mut rng),
                random_symmetric(n, 0.7, &mut rng),
            )
            .unwrap();
            let g0 = crate::siegel::random_siegel(n, &mut rng);
            let t = 2.5;
            let path = flow(&h, 0.0, t, 512).unwrap();
            let (via_moebius, _) = moebius(path.endpoint(), &g0).unwrap();
            let via_ode = riccati_integrate(&h, &g0, 0.0, t, 1024).unwrap();
            assert!(
                (via_moebius.matrix() - via_ode.matrix()).norm() < 1e-7,
                "n={n} disagreement"
            );
        }
    }

    #[test]
    fn norm_preserved_along_propagation() {
        let mut rng = crate::seeded_rng(43);
        let h = QuadraticHamiltonian::constant(
            1,
            HB,
            random_symmetric(1, 1.0, &mut rng),
            random_symmetric(1, 1.0, &mut rng),
            random_symmetric(1, 1.0, &mut rng),
        )
        .unwrap();
        let path = flow(&h, 0.0, 3.0, 512).unwrap();
        let states = propagate(&path, &GaussianState::ground(1, HB)).unwrap();
        for s in &states {
            assert!(s.norm_residual() < 1e-8);
            assert!(s.gamma().min_im_eigenvalue() > 0.0);
        }
    }

    #[test]
    fn wigner_ground_state() {
        let s = GaussianState::ground(1, HB);
        let pts = vec![
            PhasePoint::zeros(1),
            PhasePoint::from_qp(&[1.0], &[0.0]).unwrap(),
            PhasePoint::from_qp(&[0.3], &[-0.7]).unwrap(),
        ];
        let w = wigner(&s, &pts);
        assert!((w[0] - 2.0).abs() < 1e-14);
        assert!((w[1] - 2.0 * (-1.0_f64).exp()).abs() < 1e-14);
        assert!((w[2] - 2.0 * (-0.58_f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn wigner_translation_covariance_and_mass() {
        let z = PhasePoint::from_qp(&[0.7], &[-0.3]).unwrap();
        let s0 = GaussianState::ground(1, HB);
        let sz = GaussianState::coherent(z.clone(), HB);
        let pts = vec![
            PhasePoint::from_qp(&[0.7], &[-0.3]).unwrap(),
            PhasePoint::from_qp(&[1.7], &[-0.3]).unwrap(),
        ];
        let shifted = vec![PhasePoint::zeros(1), PhasePoint::from_qp(&[1.0], &[0.0]).unwrap()];
        let wz = wigner(&sz, &pts);
        let w0 = wigner(&s0, &shifted);
        for (a, b) in wz.iter().zip(&w0) {
            assert!((a - b).abs() < 1e-14);
        }
        // integral of W over phase space = 2 pi hbar for a unit state
        let mut total = 0.0;
        let d = 0.05;
        let m = 200;
        let mut pts = Vec::new();
        for i in 0..m {
            for j in 0..m {
                let q = -5.0 + i as f64 * d;
                let p = -5.0 + j as f64 * d;
                pts.push(PhasePoint::from_qp(&[q], &[p]).unwrap());
            }
        }
        for v in wigner(&s0, &pts) {
            total += v * d * d;
        }
        assert!((total - 2.0 * PI).abs() < 1e-6, "got {total}");
    }
}
