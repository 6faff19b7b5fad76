//! Weyl symbols and phase indices of metaplectic operators: the regularized
//! symbol evolution, contravariant and covariant Gaussian symbols, the
//! winding index of a symplectic path, coherent-state matrix elements, the
//! distributional symbol at eigenvalue 1, and the decay bound of the
//! associated quadratic form.
//!
//! hbar is fixed to 1 throughout this module; callers rescale inputs.

use crate::linalg::{
    det_c, gauss_integral, gauss_ft, sym_eig, symmetrize, symmetrize_r, to_c, unwrap_det_arg,
    vec_to_c, ArgTracker, CMat, RMat, RVec, IM, ONE,
};
use crate::symcore::{
    standard_symplectic_form, PhasePoint, PolarPath, QuadraticHamiltonian, SymError,
    SymplecticMatrix, SymplecticPath,
};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Regularization schedule used for index and degenerate-limit computations.
pub const EPSILON_SCHEDULE: [f64; 3] = [1e-1, 1e-2, 1e-3];

/// Agreement threshold between the snapped winding residuals of successive
/// epsilon values of the schedule (in turns).
pub const EPSILON_AGREEMENT: f64 = 0.05;

/// Largest tolerated per-node jump of a tracked determinant argument.
/// Nearest-branch unwrapping is exact below pi; this leaves a safety margin
/// while still rejecting grossly under-resolved meshes.
const MAX_ARG_STEP: f64 = 3.0;

/// The operator normalization of the contravariant Gaussian symbol: the true
/// symbol that quantizes to the metaplectic operator is 2^n times the
/// displayed prefactor. Pinned by the grid-propagator consistency test.
pub fn contravariant_scale(n: usize) -> f64 {
    2.0_f64.powi(n as i32)
}

#[derive(Debug, Error)]
pub enum MetaplecticError {
    #[error("path mesh too coarse for branch tracking (arg step {step:.3e})")]
    MeshTooCoarse { step: f64 },
    #[error("index did not converge over the epsilon schedule (last change {change:.3e})")]
    IndexConvergence { change: f64 },
    #[error("1+F is numerically singular (|det| = {det:.3e})")]
    SingularOnePlusF { det: f64 },
    #[error("1-F is numerically singular (|det| = {det:.3e}); use the degenerate machinery")]
    SingularOneMinusF { det: f64 },
    #[error("F does not have eigenvalue 1 (smallest singular value of 1-F is {sv:.3e})")]
    NotDegenerate { sv: f64 },
    #[error("ill-conditioned eigenspace split: singular values near threshold, candidate ranks {low} and {high}")]
    AmbiguousSplit { low: usize, high: usize },
    #[error("signature of the regularized form did not stabilize over the schedule")]
    SignatureUnstable,
    #[error("composite path endpoint mismatch (residual {residual:.3e})")]
    EndpointMismatch { residual: f64 },
    #[error(transparent)]
    Sym(#[from] SymError),
}

/// A Gaussian phase-space symbol c exp(i M X.X), optionally decorated with a
/// Dirac factor on a subspace (the degenerate eigenvalue-1 case).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GaussianSymbol {
    pub prefactor: Complex64,
    /// Complex symmetric 2n x 2n matrix in c exp(i M X.X).
    pub m: CMat,
    pub dirac: Option<DiracDecoration>,
}

impl GaussianSymbol {
    pub fn dim(&self) -> usize {
        self.m.nrows() / 2
    }

    /// Evaluate at a phase point (plain symbols only).
    pub fn eval(&self, x: &RVec) -> Complex64 {
        assert!(self.dirac.is_none(), "decorated symbols are distributions");
        let xc = vec_to_c(x);
        let quad: Complex64 = xc.dot(&(&self.m * &xc));
        self.prefactor * (IM * quad).exp()
    }

    pub fn symmetry_residual(&self) -> f64 {
        (&self.m - self.m.transpose()).iter().fold(0.0_f64, |a, c| a.max(c.norm()))
    }
}

/// Dirac decoration of a degenerate covariant symbol: the distribution is
///   prefactor · δ(u₁) · exp(−(i/4) W u·u)
/// in the coordinates z = dirac_basis·u₁ + complement_basis·u.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiracDecoration {
    /// Orthonormal directions carrying the Dirac mass (2n x d1).
    pub dirac_basis: RMat,
    /// Basis of the complementary integration directions (2n x k).
    pub complement_basis: RMat,
    /// Real symmetric k x k matrix W of the residual factor exp(-(i/4) W u.u).
    pub w_reduced: RMat,
    /// Half-integer phase index of the degenerate Proposition.
    pub mu1: f64,
    /// Limiting signature of the regularized quadratic form Q'.
    pub sg_q: i32,
    /// Limit of the covariant mu index along the regularizing family.
    pub mu_limit: f64,
    /// |det [dirac_basis | complement_basis]|, the split-coordinate Jacobian.
    pub jacobian: f64,
}

/// Result of the winding-index computation along a symplectic path.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IndexResult {
    /// The index (snapped to the nearest half-integer).
    pub nu: f64,
    /// Raw accumulated argument (the Im-integral) at the smallest epsilon.
    pub im_integral: f64,
    /// Epsilon schedule used.
    pub epsilons: Vec<f64>,
    /// Raw accumulated argument per epsilon.
    pub raw: Vec<f64>,
    /// Winding samples (t, Re delta, Im delta, accumulated arg) at the
    /// smallest epsilon.
    pub winding: Vec<(f64, f64, f64, f64)>,
    /// det(1+F) at the endpoint; its sign classifies integer vs half-integer.
    pub det_one_plus: f64,
}

/// A complex matrix 𝓜 = J M with M complex symmetric and Im M positive
/// definite (the sp₊ class driving the symbol evolution).
#[derive(Debug, Clone)]
pub struct HamiltonianComplexMatrix {
    m: CMat,
}

impl HamiltonianComplexMatrix {
    pub fn new(m: CMat) -> Result<Self, MetaplecticError> {
        let sym = (&m - m.transpose()).iter().fold(0.0_f64, |a, c| a.max(c.norm()));
        if sym > 1e-10 {
            return Err(SymError::NotSymmetric { name: "M", residual: sym }.into());
        }
        let im = to_c(&m.map(|c| c.im));
        let min = crate::linalg::min_herm_eig(&im);
        if min <= 0.0 {
            return Err(SymError::InvalidHamiltonian(format!(
                "Im M is not positive definite (min eig {min:.3e})"
            ))
            .into());
        }
        Ok(HamiltonianComplexMatrix { m })
    }

    pub fn matrix(&self) -> &CMat {
        &self.m
    }

    /// 𝓜 = J M.
    pub fn mcal(&self) -> CMat {
        let n = self.m.nrows() / 2;
        to_c(&standard_symplectic_form(n)) * &self.m
    }
}

fn jmat_c(n: usize) -> CMat {
    to_c(&standard_symplectic_form(n))
}

/// chi(F) = 1 + F + iJ(1-F); invertible for every symplectic F.
pub fn chi_matrix(f: &RMat) -> CMat {
    let d = f.nrows();
    let n = d / 2;
    let id = CMat::identity(d, d);
    let fc = to_c(f);
    &id + &fc + jmat_c(n) * (&id - &fc) * IM
}

/// Continuously tracked argument of det(1+F_t+iJ(1-F_t)) along a path,
/// starting from 0 at the identity.
pub fn theta_arg(path: &SymplecticPath) -> Result<f64, MetaplecticError> {
    let mats: Vec<CMat> = path.nodes().iter().map(|f| chi_matrix(f.matrix())).collect();
    let (acc, _, step) = unwrap_det_arg(mats.iter());
    if step >= MAX_ARG_STEP {
        return Err(MetaplecticError::MeshTooCoarse { step });
    }
    Ok(acc)
}

/// delta(F, M0) = det((1 + M0 + F(1 - M0)) / 2).
pub fn delta_det(f: &RMat, m0: &CMat) -> Complex64 {
    let d = f.nrows();
    let id = CMat::identity(d, d);
    det_c(&((&id + m0 + to_c(f) * (&id - m0)) * Complex64::new(0.5, 0.0)))
}

/// Winding index of a symplectic path from the identity: the limit over the
/// epsilon schedule of (1/2π)·(accumulated argument of delta(F_t, iεJ)).
pub fn cz_index(path: &SymplecticPath) -> Result<IndexResult, MetaplecticError> {
    let n = path.dim();
    let j = jmat_c(n);
    let mut raw = Vec::new();
    let mut winding = Vec::new();
    for (k, &eps) in EPSILON_SCHEDULE.iter().enumerate() {
        let m0 = &j * (IM * Complex64::new(eps, 0.0));
        let mut tr = ArgTracker::new();
        let mut samples = Vec::with_capacity(path.nodes().len());
        for (f, &t) in path.nodes().iter().zip(path.times()) {
            let d = delta_det(f.matrix(), &m0);
            let acc = tr.push(d);
            samples.push((t, d.re, d.im, acc));
        }
        if tr.max_step() >= MAX_ARG_STEP {
            return Err(MetaplecticError::MeshTooCoarse { step: tr.max_step() });
        }
        raw.push(tr.accumulated());
        if k == EPSILON_SCHEDULE.len() - 1 {
            winding = samples;
        }
    }
    // The raw winding converges to the index linearly in epsilon; require
    // the last two snapped values to agree and the final residual to be
    // well inside the snapping basin.
    let snap = |w: f64| (w / std::f64::consts::PI).round() / 2.0;
    let last = raw[raw.len() - 1];
    let nu = snap(last);
    let prev = snap(raw[raw.len() - 2]);
    let residual = (last / (2.0 * std::f64::consts::PI) - nu).abs();
    if nu != prev || residual > EPSILON_AGREEMENT {
        return Err(MetaplecticError::IndexConvergence {
            change: (nu - prev).abs().max(residual),
        });
    }
    let f_end = path.endpoint().matrix();
    let d = f_end.nrows();
    let det_one_plus = (f_end + RMat::identity(d, d)).determinant();
    Ok(IndexResult {
        nu,
        im_integral: last,
        epsilons: EPSILON_SCHEDULE.to_vec(),
        raw,
        winding,
        det_one_plus,
    })
}

/// The covariant phase index mu along a path from the identity:
/// mu = (−β − θ)/2π, where θ is the tracked argument of det chi(F_t) and β
/// accumulates the argument of det(Re S + iτ Im S), S = 1 − K_F, over
/// τ ∈ [0, 1].
pub fn mu_index(path: &SymplecticPath) -> Result<f64, MetaplecticError> {
    let th = theta_arg(path)?;
    let f = path.endpoint().matrix();
    let d = f.nrows();
    let id = CMat::identity(d, d);
    let chi = chi_matrix(f);
    let kf = (&id + to_c(f))
        * chi.clone().lu().try_inverse().expect("chi(F) is always invertible");
    let s = &id - kf;
    let re = to_c(&s.map(|c| c.re));
    let im = to_c(&s.map(|c| c.im));
    let steps = 1500;
    let mats: Vec<CMat> = (0..=steps)
        .map(|k| {
            let tau = k as f64 / steps as f64;
            &re + &im * (IM * Complex64::new(tau, 0.0))
        })
        .collect();
    let (beta_acc, _, step) = unwrap_det_arg(mats.iter());
    if step >= MAX_ARG_STEP {
        return Err(MetaplecticError::MeshTooCoarse { step });
    }
    Ok((-beta_acc - th) / (2.0 * std::f64::consts::PI))
}

/// Contravariant Gaussian symbol of the metaplectic operator reaching F with
/// index nu: e^{iπν}|det(1+F)|^{−1/2} exp(−iJ(1−F)(1+F)⁻¹X·X).
pub fn mw_contravariant(
    f: &SymplecticMatrix,
    nu: f64,
) -> Result<GaussianSymbol, MetaplecticError> {
    let fm = f.matrix();
    let d = fm.nrows();
    let id = RMat::identity(d, d);
    let one_plus = &id + fm;
    let det = one_plus.determinant();
    if det.abs() <= 1e-10 {
        return Err(MetaplecticError::SingularOnePlusF { det: det.abs() });
    }
    let inv = one_plus.clone().try_inverse().expect("checked determinant");
    let j = standard_symplectic_form(f.dim());
    let m = symmetrize_r(&(-(&j * (&id - fm) * inv)));
    let pref = Complex64::from_polar(
        det.abs().powf(-0.5),
        std::f64::consts::PI * nu,
    );
    Ok(GaussianSymbol { prefactor: pref, m: to_c(&m), dirac: None })
}

/// Covariant Gaussian symbol along a path reaching F:
/// e^{iπμ}|det(1−F)|^{−1/2} exp(−(i/4)J(1+F)(1−F)⁻¹z·z).
pub fn covariant_symbol(
    path: &SymplecticPath,
) -> Result<GaussianSymbol, MetaplecticError> {
    let f = path.endpoint().matrix();
    let d = f.nrows();
    let id = RMat::identity(d, d);
    let one_minus = &id - f;
    let det = one_minus.determinant();
    if det.abs() <= 1e-10 {
        return Err(MetaplecticError::SingularOneMinusF { det: det.abs() });
    }
    let mu = mu_index(path)?;
    let inv = one_minus.clone().try_inverse().expect("checked determinant");
    let j = standard_symplectic_form(path.dim());
    // exponent −(i/4) J(1+F)(1−F)⁻¹ z·z, stored as i M z·z
    let m = symmetrize_r(&(&j * (&id + f) * inv * (-0.25)));
    let pref = Complex64::from_polar(det.abs().powf(-0.5), std::f64::consts::PI * mu);
    Ok(GaussianSymbol { prefactor: pref, m: to_c(&m), dirac: None })
}

/// Evaluate the covariant symbol at z as the exact symplectic Fourier
/// transform of the (operator-normalized) contravariant symbol:
///   A#(z) = (2π)^{−n} ∫ 2ⁿ·R(Y) e^{iσ(Y,z)} dY.
pub fn covariant_from_mw(sym: &GaussianSymbol, z: &PhasePoint) -> Complex64 {
    let n = sym.dim();
    let j = standard_symplectic_form(n);
    let y = &j * z.as_vec();
    let c = sym.prefactor * Complex64::new(contravariant_scale(n), 0.0);
    gauss_ft(c, &sym.m, &y) * Complex64::new((2.0 * std::f64::consts::PI).powi(-(n as i32)), 0.0)
}

/// Coherent-state matrix element ⟨φ_{z+X} | R̂ φ_z⟩ of the metaplectic
/// operator with det-root branch θ (from `theta_arg` along the path):
///   2ⁿ det χ^{−1/2} exp(−|z+X/2|² + (i/2)σ(X,z) + K_F v·v),
/// v = z + (X − iJX)/2.
pub fn matrix_element(
    f: &SymplecticMatrix,
    theta: f64,
    z: &PhasePoint,
    x: &PhasePoint,
) -> Complex64 {
    let n = f.dim();
    let fm = f.matrix();
    let chi = chi_matrix(fm);
    let det = det_c(&chi);
    let id = CMat::identity(2 * n, 2 * n);
    let kf = (&id + to_c(fm)) * chi.clone().lu().try_inverse().expect("chi invertible");
    let j = standard_symplectic_form(n);
    let zc = vec_to_c(z.as_vec());
    let xc = vec_to_c(x.as_vec());
    let jx = to_c(&j) * &xc;
    let v = &zc + (&xc - &jx * IM) * Complex64::new(0.5, 0.0);
    let w = &zc + &xc * Complex64::new(0.5, 0.0);
    let norm_sq: Complex64 = w.dot(&w);
    let sigma = crate::symcore::symplectic_product(x.as_vec(), z.as_vec());
    let quad: Complex64 = v.dot(&(kf * &v));
    let pref = Complex64::from_polar(
        contravariant_scale(n) * det.norm().powf(-0.5),
        -0.5 * theta,
    );
    pref * (-norm_sq + IM * Complex64::new(0.5 * sigma, 0.0) + quad).exp()
}

/// Matrix element with the branch derived from a supplied path to F.
pub fn matrix_element_on_path(
    path: &SymplecticPath,
    z: &PhasePoint,
    x: &PhasePoint,
) -> Result<Complex64, MetaplecticError> {
    let theta = theta_arg(path)?;
    Ok(matrix_element(path.endpoint(), theta, z, x))
}

/// The quadratic form γ_F(X) = ¼(K_F(1−iJ)X·(1−iJ)X − |X|²).
pub fn gamma_form(f: &SymplecticMatrix, x: &PhasePoint) -> Complex64 {
    let n = f.dim();
    let fm = f.matrix();
    let chi = chi_matrix(fm);
    let id = CMat::identity(2 * n, 2 * n);
    let kf = (&id + to_c(fm)) * chi.clone().lu().try_inverse().expect("chi invertible");
    let j = standard_symplectic_form(n);
    let xc = vec_to_c(x.as_vec());
    let v = &xc - to_c(&j) * &xc * IM;
    let quad: Complex64 = v.dot(&(kf * &v));
    (quad - Complex64::new(x.norm_sq(), 0.0)) * Complex64::new(0.25, 0.0)
}

/// The decay bound −|X|²/(2(1+s_F)) with s_F the largest eigenvalue of FFᵀ.
pub fn gamma_bound(f: &SymplecticMatrix, x: &PhasePoint) -> f64 {
    let fm = f.matrix();
    let (ev, _) = sym_eig(&(fm * fm.transpose()));
    let s_f = ev[ev.len() - 1];
    -x.norm_sq() / (2.0 * (1.0 + s_f))
}

/// Closed-form evolution of the Gaussian symbol ansatz α_t exp(i M_t X·X):
///   𝓜_t = (1 + 𝓜₀ − F_t(1 − 𝓜₀)) (1 + 𝓜₀ + F_t(1 − 𝓜₀))⁻¹,
///   α_t = exp(−½ [log det χ₊]₀ᵗ) with a continuously tracked log.
pub fn symbol_evolution(
    h: &QuadraticHamiltonian,
    m0: &HamiltonianComplexMatrix,
    t0: f64,
    t1: f64,
    min_nodes: usize,
) -> Result<Vec<(f64, GaussianSymbol)>, MetaplecticError> {
    let n = h.dim();
    let d = 2 * n;
    let path = crate::symcore::flow(h, t0, t1, min_nodes)?;
    let id = CMat::identity(d, d);
    let mc0 = m0.mcal();
    let j = jmat_c(n);
    let mut tr = ArgTracker::new();
    let mut mod0 = 0.0;
    let mut out = Vec::with_capacity(path.nodes().len());
    for (fnode, &t) in path.nodes().iter().zip(path.times()) {
        let fc = to_c(fnode.matrix());
        let chi_plus = &id + &mc0 + &fc * (&id - &mc0);
        let det = det_c(&chi_plus);
        tr.push(det);
        if out.is_empty() {
            mod0 = det.norm();
        }
        if tr.max_step() >= MAX_ARG_STEP {
            return Err(MetaplecticError::MeshTooCoarse { step: tr.max_step() });
        }
        let num = &id + &mc0 - &fc * (&id - &mc0);
        let mcal = num
            * chi_plus
                .clone()
                .lu()
                .try_inverse()
                .expect("chi_plus invertible for valid M0");
        let logdet = Complex64::new((det.norm() / mod0).ln(), tr.accumulated());
        let alpha = (logdet * Complex64::new(-0.5, 0.0)).exp();
        // M_t from 𝓜_t = J M_t: M_t = −J 𝓜_t.
        let m_t = symmetrize(&(-(&j * &mcal)));
        out.push((t, GaussianSymbol { prefactor: alpha, m: m_t, dirac: None }));
    }
    Ok(out)
}

/// Direct RK4 integration of the evolution equations
///   𝓜̇ = ½(𝓜+1) 𝓢 (𝓜−1), α̇ = ¼ Tr(𝓜𝓢) α, 𝓢 = J S_t,
/// used as the independent cross-check of the closed form.
pub fn symbol_evolution_ode(
    h: &QuadraticHamiltonian,
    m0: &HamiltonianComplexMatrix,
    t0: f64,
    t1: f64,
    steps: usize,
) -> (CMat, Complex64) {
    let n = h.dim();
    let d = 2 * n;
    let id = CMat::identity(d, d);
    let j = jmat_c(n);
    let mut mc = m0.mcal();
    let mut alpha = ONE;
    let dt = (t1 - t0) / steps as f64;
    let rhs = |t: f64, mc: &CMat, alpha: Complex64| -> (CMat, Complex64) {
        let s = to_c(&h.s_matrix(t));
        let scal = &j * s;
        let dm = (mc + &id) * &scal * (mc - &id) * Complex64::new(0.5, 0.0);
        let da = (mc * &scal).trace() * Complex64::new(0.25, 0.0) * alpha;
        (dm, da)
    };
    for i in 0..steps {
        let t = t0 + i as f64 * dt;
        let (k1m, k1a) = rhs(t, &mc, alpha);
        let (k2m, k2a) = rhs(
            t + dt / 2.0,
            &(&mc + &k1m * Complex64::new(dt / 2.0, 0.0)),
            alpha + k1a * Complex64::new(dt / 2.0, 0.0),
        );
        let (k3m, k3a) = rhs(
            t + dt / 2.0,
            &(&mc + &k2m * Complex64::new(dt / 2.0, 0.0)),
            alpha + k2a * Complex64::new(dt / 2.0, 0.0),
        );
        let (k4m, k4a) = rhs(
            t + dt,
            &(&mc + &k3m * Complex64::new(dt, 0.0)),
            alpha + k3a * Complex64::new(dt, 0.0),
        );
        mc += (k1m + k2m * Complex64::new(2.0, 0.0) + k3m * Complex64::new(2.0, 0.0) + k4m)
            * Complex64::new(dt / 6.0, 0.0);
        alpha += (k1a + k2a * 2.0 + k3a * 2.0 + k4a) * Complex64::new(dt / 6.0, 0.0);
    }
    (mc, alpha)
}

/// Sign relating the product of path-defined metaplectic operators to the
/// path-defined operator of the product: R̂(path1)·R̂(path2) = s·R̂(path12).
pub fn compose_sign(
    path1: &SymplecticPath,
    path2: &SymplecticPath,
    path12: &SymplecticPath,
) -> Result<i8, MetaplecticError> {
    let f1 = path1.endpoint();
    let f2 = path2.endpoint();
    let f12 = f1.compose(f2);
    let residual = crate::linalg::max_abs(&(f12.matrix() - path12.endpoint().matrix()));
    if residual > 1e-8 {
        return Err(MetaplecticError::EndpointMismatch { residual });
    }
    // The operator R̂(F1)R̂(F2) corresponds to path2 followed by the
    // left-translated path1 (so the composite ends at F1·F2).
    let composite = path2.then(path1)?;
    let zero = PhasePoint::zeros(path1.dim());
    let probes: [(f64, f64); 3] = [(0.0, 0.0), (0.4, -0.3), (0.9, 0.5)];
    for &(a, b) in &probes {
        let z = PhasePoint::new(RVec::from_fn(2 * path1.dim(), |i, _| {
            if i.is_multiple_of(2) {
                a
            } else {
                b
            }
        }))
        .expect("finite probe");
        let _ = &zero;
        let me_c = matrix_element_on_path(&composite, &z, &z)?;
        let me_d = matrix_element_on_path(path12, &z, &z)?;
        if me_c.norm() < 1e-12 || me_d.norm() < 1e-12 {
            continue;
        }
        let ratio = me_c / me_d;
        let s = if ratio.re >= 0.0 { 1i8 } else { -1i8 };
        debug_assert!(
            (ratio - Complex64::new(s as f64, 0.0)).norm() < 1e-6,
            "ratio {ratio} is not a clean sign"
        );
        return Ok(s);
    }
    Err(MetaplecticError::IndexConvergence { change: f64::NAN })
}

// ---------------------------------------------------------------------------
// Degenerate eigenvalue-1 machinery.
// ---------------------------------------------------------------------------

/// Orthonormal basis of the (right) null space of m, threshold on singular
/// values (eigenvectors of mᵀm with sqrt-eigenvalue at most tol).
fn null_space(m: &RMat, tol: f64) -> RMat {
    let gram = m.transpose() * m;
    let (ev, vecs) = sym_eig(&gram);
    let cols: Vec<_> = (0..ev.len())
        .filter(|&i| ev[i].max(0.0).sqrt() <= tol)
        .map(|i| vecs.column(i).into_owned())
        .collect();
    if cols.is_empty() {
        RMat::zeros(m.ncols(), 0)
    } else {
        RMat::from_columns(&cols)
    }
}

/// Orthonormal basis of the column space of m (singular vectors above tol).
fn column_space(m: &RMat, tol: f64) -> RMat {
    if m.ncols() == 0 {
        return RMat::zeros(m.nrows(), 0);
    }
    let svd = m.clone().svd(true, true);
    let u = svd.u.expect("svd requested");
    let sv = &svd.singular_values;
    let cols: Vec<_> = (0..sv.len()).filter(|&i| sv[i] > tol).map(|i| u.column(i).into_owned()).collect();
    if cols.is_empty() {
        RMat::zeros(m.nrows(), 0)
    } else {
        RMat::from_columns(&cols)
    }
}

/// Minimal-norm least-squares solve M Y = B via SVD.
fn pinv_solve(m: &RMat, b: &RMat, tol: f64) -> RMat {
    let svd = m.clone().svd(true, true);
    let u = svd.u.as_ref().expect("svd requested");
    let v_t = svd.v_t.as_ref().expect("svd requested");
    let sv = &svd.singular_values;
    let mut y = RMat::zeros(m.ncols(), b.ncols());
    for i in 0..sv.len() {
        if sv[i] > tol {
            let coeff = (u.column(i).transpose() * b) / sv[i];
            y += v_t.row(i).transpose() * coeff;
        }
    }
    y
}

/// Distributional covariant symbol when 1 is an eigenvalue of F: a Dirac
/// factor on the stiff directions and a residual Gaussian on the complement.
/// The branch is fixed by the canonical polar path from the identity to F
/// followed by a Cayley regularization leg.
pub fn degenerate_covariant(
    f: &SymplecticMatrix,
) -> Result<GaussianSymbol, MetaplecticError> {
    let n = f.dim();
    let d = 2 * n;
    let fm = f.matrix().clone();
    let id = RMat::identity(d, d);
    let j = standard_symplectic_form(n);
    let f_norm = fm.norm();
    let tol = 1e-8 * f_norm.max(1.0);

    // E' = union of ker(1-F)^j, iterated until the dimension stabilizes.
    let one_minus = &id - &fm;
    {
        let svd = one_minus.clone().svd(false, false);
        let smin = svd.singular_values.iter().cloned().fold(f64::INFINITY, f64::min);
        if smin > tol {
            return Err(MetaplecticError::NotDegenerate { sv: smin });
        }
    }
    let mut power = one_minus.clone();
    let mut e_prime = null_space(&power, tol);
    for _ in 1..d {
        power = &power * &one_minus;
        let next = null_space(&power, tol * power.norm().max(1.0) / f_norm.max(1.0));
        if next.ncols() == e_prime.ncols() {
            break;
        }
        e_prime = next;
    }
    let d2 = e_prime.ncols();
    // E'' = symplectic orthogonal of E'.
    let e_sec = null_space(&(e_prime.transpose() * &j), tol);
    let k2 = e_sec.ncols();
    debug_assert_eq!(d2 + k2, d);

    // Restrictions (both subspaces are F-invariant, bases orthonormal).
    let fp = e_prime.transpose() * &fm * &e_prime;
    let fs2 = if k2 > 0 { e_sec.transpose() * &fm * &e_sec } else { RMat::zeros(0, 0) };
    let jp = e_prime.transpose() * &j * &e_prime;

    // z2 = Im(F'-1) inside E'; z1 = its Euclidean complement in E'.
    let im_cols = &fm * &e_prime - &e_prime;
    let z2 = column_space(&im_cols, tol);
    let z1 = {
        let resid = &e_prime - &z2 * (z2.transpose() * &e_prime);
        column_space(&resid, tol)
    };
    let d1 = z1.ncols();

    // Residual Gaussian on V = [z2 | E'']: exponent (i/4) J(1+F)(F-1)^{-1} v·v,
    // stored in the convention exp(-(i/4) W u·u).
    let v = if k2 > 0 {
        let mut cols: Vec<RVec> = Vec::new();
        for c in z2.column_iter() {
            cols.push(c.into_owned());
        }
        for c in e_sec.column_iter() {
            cols.push(c.into_owned());
        }
        if cols.is_empty() {
            RMat::zeros(d, 0)
        } else {
            RMat::from_columns(&cols)
        }
    } else {
        z2.clone()
    };
    let w_reduced = if v.ncols() > 0 {
        let y = pinv_solve(&(&fm - &id), &v, tol);
        symmetrize_r(&(-(v.transpose() * &j * (&id + &fm) * y)))
    } else {
        RMat::zeros(0, 0)
    };

    // Signature of the regularized form Q'^ε = −(L'J' + ε)⁻¹,
    // L' = (1−F')(1+F')⁻¹ on E'.
    let idp = RMat::identity(d2, d2);
    let one_plus_fp = &idp + &fp;
    let lp_cayley = (&idp - &fp)
        * one_plus_fp
            .clone()
            .try_inverse()
            .ok_or(MetaplecticError::SingularOnePlusF { det: 0.0 })?;
    let mut sgs: Vec<i32> = Vec::new();
    for &eps in &EPSILON_SCHEDULE {
        let q = -((&lp_cayley * &jp + &idp * eps)
            .try_inverse()
            .ok_or(MetaplecticError::SignatureUnstable)?);
        let (ev, _) = sym_eig(&symmetrize_r(&q));
        sgs.push(ev.iter().map(|&e| if e > 0.0 { 1 } else { -1 }).sum());
    }
    if sgs[sgs.len() - 1] != sgs[sgs.len() - 2] {
        return Err(MetaplecticError::SignatureUnstable);
    }
    let sg_q = sgs[sgs.len() - 1];

    // Canonical branch path: polar path to F, then the Cayley leg
    // L_s = (F'−1)(F'+1)⁻¹ − s·ε·J' assembled on the full space.
    let base_path = PolarPath::new(f)?.path(400)?;
    let lp_mine = (&fp - &idp)
        * one_plus_fp.clone().try_inverse().expect("1+F' invertible on E'");
    let basis = {
        let mut cols: Vec<RVec> = Vec::new();
        for c in e_prime.column_iter() {
            cols.push(c.into_owned());
        }
        for c in e_sec.column_iter() {
            cols.push(c.into_owned());
        }
        RMat::from_columns(&cols)
    };
    let basis_inv = basis.clone().try_inverse().expect("split basis invertible");
    let f_eps_ambient = |eps: f64| -> RMat {
        let le = &lp_mine - &jp * eps;
        let fpe = (&idp + &le)
            * (&idp - &le).try_inverse().expect("Cayley leg regular for small eps");
        let mut blk = RMat::zeros(d, d);
        blk.view_mut((0, 0), (d2, d2)).copy_from(&fpe);
        if k2 > 0 {
            blk.view_mut((d2, d2), (k2, k2)).copy_from(&fs2);
        }
        &basis * blk * &basis_inv
    };

    let leg_nodes = 400usize;
    let mut c_vals: Vec<Complex64> = Vec::new();
    let mut mu_vals: Vec<f64> = Vec::new();
    for &eps in &EPSILON_SCHEDULE {
        // Assemble the combined path by appending leg nodes.
        let mut ts: Vec<f64> = base_path.times().to_vec();
        let mut mats: Vec<SymplecticMatrix> = base_path.nodes().to_vec();
        let t_end = *ts.last().unwrap();
        for i in 1..=leg_nodes {
            let s = i as f64 / leg_nodes as f64;
            ts.push(t_end + s);
            mats.push(SymplecticMatrix::project(f_eps_ambient(s * eps))?);
        }
        let combined = SymplecticPath::from_nodes(ts, mats)?;
        let mu_eps = mu_index(&combined)?;
        mu_vals.push(mu_eps);
        let f_eps = combined.endpoint().matrix().clone();
        let one_minus_eps = &id - &f_eps;
        let det_eps = one_minus_eps.determinant().abs();
        let w_eps = symmetrize_r(
            &(&j * (&id + &f_eps)
                * one_minus_eps.clone().try_inverse().expect("1-F_eps invertible")),
        );
        let (ev, _) = sym_eig(&w_eps);
        // The d1 largest |w| are the stiff (Dirac) directions.
        let mut idx: Vec<usize> = (0..ev.len()).collect();
        idx.sort_by(|&a, &b| ev[b].abs().total_cmp(&ev[a].abs()));
        let mut c_eps = Complex64::from_polar(
            det_eps.powf(-0.5),
            std::f64::consts::PI * mu_eps,
        );
        for &i in idx.iter().take(d1) {
            let w = ev[i];
            // ∫ e^{−(i/4) w u²} du = 2 sqrt(π/|w|) e^{−i sgn(w) π/4}.
            c_eps *= Complex64::from_polar(
                2.0 * (std::f64::consts::PI / w.abs()).sqrt(),
                -w.signum() * std::f64::consts::FRAC_PI_4,
            );
        }
        c_vals.push(c_eps);
    }
    let m_last = c_vals[c_vals.len() - 1];
    let m_prev = c_vals[c_vals.len() - 2];
    if (m_last - m_prev).norm() > 0.2 * m_last.norm() {
        return Err(MetaplecticError::IndexConvergence {
            change: (m_last - m_prev).norm(),
        });
    }
    // The leg error is linear in eps; extrapolate the last two values.
    let c_limit = m_last + (m_last - m_prev) / Complex64::new(9.0, 0.0);
    let mu_limit = mu_vals[mu_vals.len() - 1];
    let mu1_raw = mu_limit + sg_q as f64 / 4.0;
    let mu1 = (mu1_raw * 2.0).round() / 2.0;

    let jacobian = if d1 + v.ncols() == d {
        let mut cols: Vec<RVec> = Vec::new();
        for c in z1.column_iter() {
            cols.push(c.into_owned());
        }
        for c in v.column_iter() {
            cols.push(c.into_owned());
        }
        RMat::from_columns(&cols).determinant().abs()
    } else {
        1.0
    };

    Ok(GaussianSymbol {
        prefactor: c_limit,
        m: CMat::zeros(d, d),
        dirac: Some(DiracDecoration {
            dirac_basis: z1,
            complement_basis: v,
            w_reduced,
            mu1,
            sg_q,
            mu_limit,
            jacobian,
        }),
    })
}

/// Weyl-quantize a plain 1D Gaussian symbol c·exp(iMX·X) (operator
/// normalization, i.e. the symbol is 2·prefactor) to a grid matrix via the
/// exact Fresnel momentum integral of the midpoint kernel
///   K(x, y) = (2π)⁻¹ ∫ A((x+y)/2, p) e^{ip(x−y)} dp.
/// Requires M_pp ≠ 0 so the p-integral is a genuine Fresnel integral.
pub fn quantize_gaussian_symbol(sym: &GaussianSymbol, grid: &crate::weylq::Grid1D) -> CMat {
    assert_eq!(sym.dim(), 1, "grid quantization implemented for n = 1");
    assert!(sym.dirac.is_none(), "decorated symbols are distributions");
    let m_qq = sym.m[(0, 0)];
    let m_qp = sym.m[(0, 1)];
    let m_pp = sym.m[(1, 1)];
    assert!(m_pp.norm() > 1e-12, "degenerate momentum Fresnel integral");
    assert!(m_qp.im.abs() < 1e-12, "complex cross term not supported");
    let c = sym.prefactor * Complex64::new(contravariant_scale(1), 0.0);
    let xs = grid.xs();
    let npts = xs.len();
    let dx = grid.dx();
    // The Fresnel branch factor depends only on m_pp; evaluate it once at
    // Y = 0 and vary only the quadratic phase exp(−(i/4) y²/m_pp).
    let mpp_mat = CMat::from_element(1, 1, m_pp);
    let base = gauss_ft(c, &mpp_mat, &RVec::zeros(1))
        / Complex64::new(2.0 * std::f64::consts::PI, 0.0)
        * Complex64::new(dx, 0.0);
    let mut k = CMat::zeros(npts, npts);
    for i in 0..npts {
        for jcol in 0..npts {
            let mid = 0.5 * (xs[i] + xs[jcol]);
            let u = xs[i] - xs[jcol];
            // ∫ exp(i m_pp p² + i p (2 m_qp mid + u)) dp: Y = −(2 m_qp mid + u).
            let y = 2.0 * m_qp.re * mid + u;
            let phase = IM * m_qq * Complex64::new(mid * mid, 0.0)
                - Complex64::new(0.25, 0.0) * IM * Complex64::new(y * y, 0.0) / m_pp;
            k[(i, jcol)] = base * phase.exp();
        }
    }
    k
}

/// Pair a covariant symbol (plain or Dirac-decorated) with the Gaussian test
/// function g(X) = exp(−|X − z0|²/(2w²)).
pub fn pair_gaussian(sym: &GaussianSymbol, z0: &PhasePoint, w: f64) -> Complex64 {
    let z0v = z0.as_vec();
    let gauss_const = (-z0v.dot(z0v) / (2.0 * w * w)).exp();
    match &sym.dirac {
        None => {
            let d = sym.m.nrows();
            // ∫ c e^{iMX·X} e^{−|X−z0|²/2w²} dX = c e^{−|z0|²/2w²} ∫ e^{−½XᵀAX + b·X}
            let a = CMat::identity(d, d) * Complex64::new(1.0 / (w * w), 0.0)
                - &sym.m * (IM * Complex64::new(2.0, 0.0));
            let b = vec_to_c(&(z0v / (w * w)));
            sym.prefactor * Complex64::new(gauss_const, 0.0) * gauss_integral(&a, &b)
        }
        Some(dec) => {
            let v = &dec.complement_basis;
            let k = v.ncols();
            if k == 0 {
                return sym.prefactor
                    * Complex64::new(gauss_const * dec.jacobian, 0.0);
            }
            // z = V u on the Dirac support; |Vu − z0|² = uᵀVᵀVu − 2u·Vᵀz0 + |z0|².
            let vtv = v.transpose() * v;
            let a = to_c(&(vtv / (w * w)))
                + to_c(&dec.w_reduced) * (IM * Complex64::new(0.5, 0.0));
            let b = vec_to_c(&(v.transpose() * z0v / (w * w)));
            sym.prefactor
                * Complex64::new(gauss_const * dec.jacobian, 0.0)
                * gauss_integral(&a, &b)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symcore::{flow, random_symplectic, QuadraticHamiltonian};
    use std::f64::consts::PI;

    fn ho_path(t: f64) -> SymplecticPath {
        flow(&QuadraticHamiltonian::harmonic(1, 1.0), 0.0, t, 2400).unwrap()
    }

    #[test]
    fn cz_index_ho_loop_and_quarter() {
        let full = cz_index(&ho_path(2.0 * PI)).unwrap();
        assert_eq!(full.nu, 1.0, "full loop index {}", full.nu);
        assert!(full.det_one_plus > 0.0);
        let quarter = cz_index(&ho_path(PI / 2.0)).unwrap();
        assert_eq!(quarter.nu, 0.0, "quarter index {}", quarter.nu);
    }

    #[test]
    fn cz_index_half_case() {
        // rotation(tπ) · diag(1+t, 1/(1+t)): ends at diag(-2, -1/2),
        // det(1+F) = -1/2 < 0, Im-integral → π, ν = 1/2.
        let path = SymplecticPath::from_fn(0.0, 1.0, 4096, |t| {
            let (c, s) = ((t * PI).cos(), (t * PI).sin());
            let r = RMat::from_row_slice(2, 2, &[c, s, -s, c]);
            let b = RMat::from_diagonal(&RVec::from_vec(vec![1.0 + t, 1.0 / (1.0 + t)]));
            r * b
        })
        .unwrap();
        let res = cz_index(&path).unwrap();
        assert!(res.det_one_plus < 0.0);
        assert_eq!(res.nu, 0.5, "half-case index {}", res.nu);
        assert!(
            (res.im_integral - PI).abs() < 1e-2,
            "Im-integral {} vs π",
            res.im_integral
        );
    }

    #[test]
    fn mw_contravariant_examples() {
        // F = I: prefactor 2^{-n}, zero exponent.
        let sym = mw_contravariant(&SymplecticMatrix::identity(1), 0.0).unwrap();
        assert!((sym.prefactor - Complex64::new(0.5, 0.0)).norm() < 1e-12);
        assert!(sym.m.norm() < 1e-12);
        // rotation(t): prefactor (2cos(t/2))^{-1}, M = -tan(t/2) I.
        let t: f64 = 0.8;
        let f = SymplecticMatrix::new(RMat::from_row_slice(
            2,
            2,
            &[t.cos(), t.sin(), -t.sin(), t.cos()],
        ))
        .unwrap();
        let sym = mw_contravariant(&f, 0.0).unwrap();
        assert!((sym.prefactor.re - 1.0 / (2.0 * (t / 2.0).cos())).abs() < 1e-12);
        let want = -(t / 2.0).tan();
        assert!((sym.m[(0, 0)] - Complex64::new(want, 0.0)).norm() < 1e-12);
        assert!((sym.m[(1, 1)] - Complex64::new(want, 0.0)).norm() < 1e-12);
        assert!(sym.m[(0, 1)].norm() < 1e-12);
    }

    #[test]
    fn matrix_element_closed_cases() {
        let id = SymplecticMatrix::identity(1);
        let z = PhasePoint::from_qp(&[0.7], &[-0.4]).unwrap();
        let x0 = PhasePoint::zeros(1);
        let me = matrix_element(&id, 0.0, &z, &x0);
        assert!((me - ONE).norm() < 1e-12, "identity element {me}");
        // F = I, z = 0: e^{-|X|^2/4}.
        let x = PhasePoint::from_qp(&[0.5], &[0.3]).unwrap();
        let me = matrix_element(&id, 0.0, &PhasePoint::zeros(1), &x);
        let want = (-x.norm_sq() / 4.0).exp();
        assert!((me - Complex64::new(want, 0.0)).norm() < 1e-12);
        // rotation(π/2) with the HO branch: e^{-iπ/4}.
        let path = ho_path(PI / 2.0);
        let me = matrix_element_on_path(&path, &PhasePoint::zeros(1), &x0).unwrap();
        let want = Complex64::from_polar(1.0, -PI / 4.0);
        assert!((me - want).norm() < 1e-10, "quarter-turn element {me}");
    }

    #[test]
    fn matrix_element_matches_grid() {
        use crate::weylq::{coherent_matrix_element, propagator_matrix, Grid1D};
        let grid = Grid1D::new(256, 20.0, 1.0);
        let t = 0.9;
        let h = QuadraticHamiltonian::harmonic(1, 1.0);
        let u = propagator_matrix(&h, t, &grid);
        let path = ho_path(t);
        let z = PhasePoint::from_qp(&[0.6], &[-0.3]).unwrap();
        let x = PhasePoint::from_qp(&[0.4], &[0.5]).unwrap();
        let z_out = PhasePoint::new(z.as_vec() + x.as_vec()).unwrap();
        let grid_me = coherent_matrix_element(&grid, &u, &z_out, &z);
        let form = matrix_element_on_path(&path, &z, &x).unwrap();
        assert!(
            (grid_me - form).norm() < 1e-6,
            "grid {grid_me} vs closed form {form}"
        );
    }

    #[test]
    fn quantized_symbol_matches_propagator_panel() {
        use crate::weylq::{coherent_matrix_element, propagator_matrix, Grid1D};
        let grid = Grid1D::new(256, 20.0, 1.0);
        let t = 1.0;
        let path = ho_path(t);
        let nu = cz_index(&path).unwrap().nu;
        let sym = mw_contravariant(path.endpoint(), nu).unwrap();
        let m = quantize_gaussian_symbol(&sym, &grid);
        let u = propagator_matrix(&QuadraticHamiltonian::harmonic(1, 1.0), t, &grid);
        let mut max_err = 0.0_f64;
        let mut max_ref = 0.0_f64;
        for &(a, b) in &[(0.0, 0.0), (0.8, 0.0), (0.0, -0.7), (0.6, 0.5), (-1.0, 0.4)] {
            for &(c, d) in &[(0.0, 0.0), (0.5, -0.5), (-0.8, 0.3)] {
                let z_out = PhasePoint::from_qp(&[a], &[b]).unwrap();
                let z_in = PhasePoint::from_qp(&[c], &[d]).unwrap();
                let got = coherent_matrix_element(&grid, &m, &z_out, &z_in);
                let want = coherent_matrix_element(&grid, &u, &z_out, &z_in);
                max_err = max_err.max((got - want).norm());
                max_ref = max_ref.max(want.norm());
            }
        }
        assert!(
            max_err <= 1e-4 * max_ref,
            "panel relative error {} exceeds 1e-4",
            max_err / max_ref
        );
    }

    #[test]
    fn covariant_symbol_rotation() {
        let t = 1.0;
        let path = ho_path(t);
        let sym = covariant_symbol(&path).unwrap();
        let modulus = 1.0 / (2.0 * (t / 2.0).sin().abs());
        assert!((sym.prefactor.norm() - modulus).abs() < 1e-10);
        // exponent +(i/4) cot(t/2) |z|^2.
        let want = 0.25 / (t / 2.0).tan();
        assert!((sym.m[(0, 0)] - Complex64::new(want, 0.0)).norm() < 1e-10);
        assert!(sym.m[(0, 1)].norm() < 1e-10);
    }

    #[test]
    fn covariant_minus_identity() {
        let path = ho_path(PI);
        let sym = covariant_symbol(&path).unwrap();
        // det(1-F) = 4: modulus 1/2, exponent 0.
        assert!((sym.prefactor.norm() - 0.5).abs() < 1e-10);
        assert!(sym.m.norm() < 1e-9);
    }

    #[test]
    fn duality_contravariant_covariant() {
        let mut rng = crate::seeded_rng(41);
        let mut tested = 0;
        while tested < 6 {
            let s = crate::symcore::random_symmetric(2, 0.8, &mut rng);
            let t = 0.5 + 1.5 * rand::Rng::gen::<f64>(&mut rng);
            let h = QuadraticHamiltonian::constant(
                1,
                1.0,
                RMat::from_element(1, 1, s[(0, 0)]),
                RMat::from_element(1, 1, s[(0, 1)]),
                RMat::from_element(1, 1, s[(1, 1)]),
            )
            .unwrap();
            let path = flow(&h, 0.0, t, 2400).unwrap();
            let f = path.endpoint();
            let d1 = (RMat::identity(2, 2) - f.matrix()).determinant();
            let d2 = (RMat::identity(2, 2) + f.matrix()).determinant();
            if d1.abs() < 0.1 || d2.abs() < 0.1 {
                continue;
            }
            tested += 1;
            let nu = cz_index(&path).unwrap().nu;
            let contra = mw_contravariant(f, nu).unwrap();
            let cov = covariant_symbol(&path).unwrap();
            for (a, b) in [(0.4, 0.2), (1.0, -0.5), (-0.3, 0.8)] {
                let z = PhasePoint::from_qp(&[a], &[b]).unwrap();
                let via_ft = covariant_from_mw(&contra, &z);
                let direct = cov.eval(z.as_vec());
                assert!(
                    (via_ft - direct).norm() < 1e-8 * direct.norm().max(1.0),
                    "duality mismatch: {via_ft} vs {direct}"
                );
            }
        }
    }

    #[test]
    fn symbol_evolution_dual_route() {
        let mut rng = crate::seeded_rng(7);
        let s = crate::symcore::random_symmetric(2, 1.0, &mut rng);
        let h = QuadraticHamiltonian::constant(
            1,
            1.0,
            RMat::from_element(1, 1, s[(0, 0)]),
            RMat::from_element(1, 1, s[(0, 1)]),
            RMat::from_element(1, 1, s[(1, 1)]),
        )
        .unwrap();
        for m0 in [
            CMat::identity(2, 2) * IM,
            CMat::from_row_slice(
                2,
                2,
                &[
                    Complex64::new(0.0, 2.0),
                    Complex64::new(0.3, 0.0),
                    Complex64::new(0.3, 0.0),
                    Complex64::new(0.0, 1.0),
                ],
            ),
        ] {
            let m0 = HamiltonianComplexMatrix::new(m0).unwrap();
            let t = 1.7;
            let closed = symbol_evolution(&h, &m0, 0.0, t, 400).unwrap();
            let (_, last) = closed.last().unwrap();
            let (mc_ode, alpha_ode) = symbol_evolution_ode(&h, &m0, 0.0, t, 800);
            let j = jmat_c(1);
            let m_ode = symmetrize(&(-(&j * &mc_ode)));
            assert!((&last.m - m_ode).norm() < 1e-8, "M mismatch");
            assert!(
                (last.prefactor - alpha_ode).norm() < 1e-8,
                "alpha mismatch: {} vs {alpha_ode}",
                last.prefactor
            );
        }
    }

    #[test]
    fn symbol_evolution_zero_hamiltonian_constant() {
        let h = QuadraticHamiltonian::zero(1, 1.0);
        let m0 = HamiltonianComplexMatrix::new(CMat::identity(2, 2) * IM).unwrap();
        let out = symbol_evolution(&h, &m0, 0.0, 2.0, 64).unwrap();
        let (_, first) = &out[0];
        let (_, last) = out.last().unwrap();
        assert!((&first.m - &last.m).norm() < 1e-12);
        assert!((first.prefactor - last.prefactor).norm() < 1e-12);
    }

    #[test]
    fn gamma_form_bound() {
        // F = I: gamma = -|X|^2/4 = bound.
        let id = SymplecticMatrix::identity(2);
        let x = PhasePoint::from_qp(&[0.7, -0.2], &[0.4, 1.1]).unwrap();
        let g = gamma_form(&id, &x);
        assert!((g - Complex64::new(-x.norm_sq() / 4.0, 0.0)).norm() < 1e-12);
        assert!((gamma_bound(&id, &x) - (-x.norm_sq() / 4.0)).abs() < 1e-12);
        // random draws respect the bound
        let mut rng = crate::seeded_rng(3);
        for _ in 0..200 {
            let f = random_symplectic(2, 0.9, &mut rng);
            let x = PhasePoint::new(RVec::from_fn(4, |_, _| {
                rand::Rng::gen_range(&mut rng, -2.0..2.0)
            }))
            .unwrap();
            let g = gamma_form(&f, &x);
            assert!(
                g.re <= gamma_bound(&f, &x) + 1e-12,
                "bound violated: {} > {}",
                g.re,
                gamma_bound(&f, &x)
            );
        }
    }

    #[test]
    fn compose_sign_ho_half_turns() {
        let half = ho_path(PI);
        let full = ho_path(2.0 * PI);
        let s = compose_sign(&half, &half, &full).unwrap();
        // e^{-iπ/2} · e^{-iπ/2} = -1 vs the full-loop branch e^{-iπ}... the
        // full loop's own branch gives the consistent -? sign is checked to
        // be stable; trivial identity case is +1.
        assert!(s == 1 || s == -1);
        let id_path = SymplecticPath::from_fn(0.0, 1.0, 8, |_| RMat::identity(2, 2)).unwrap();
        assert_eq!(compose_sign(&id_path, &id_path, &id_path).unwrap(), 1);
        // rotation(π) twice vs the direct trivial-loop-free path to 2π:
        // the direct path to the identity through the loop differs from the
        // constant identity path by -1.
        let s2 = compose_sign(&half, &half, &id_path).unwrap();
        assert_eq!(s2, -1, "half·half vs trivial path must differ by -1");
    }

    #[test]
    fn degenerate_shear_constants() {
        let f = SymplecticMatrix::new(RMat::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]))
            .unwrap();
        let sym = degenerate_covariant(&f).unwrap();
        let dec = sym.dirac.as_ref().unwrap();
        assert_eq!(dec.dirac_basis.ncols(), 1);
        // Dirac direction is the p-axis (orthogonal to Im(F-1) = q-axis).
        assert!(dec.dirac_basis[(0, 0)].abs() < 1e-9);
        assert!((dec.dirac_basis[(1, 0)].abs() - 1.0).abs() < 1e-9);
        assert_eq!(dec.mu1, -0.5);
        assert_eq!(dec.sg_q, -2);
        // residual exponent +i q²/2 → W = -2 on the q direction
        assert!((dec.w_reduced[(0, 0)] + 2.0).abs() < 1e-6);
        // coefficient √(2π) e^{-iπ/4}
        let want = Complex64::from_polar((2.0 * PI).sqrt(), -PI / 4.0);
        assert!(
            (sym.prefactor - want).norm() < 1e-3,
            "shear coefficient {} vs {want}",
            sym.prefactor
        );
    }

    #[test]
    fn degenerate_identity_is_pure_dirac() {
        let sym = degenerate_covariant(&SymplecticMatrix::identity(1)).unwrap();
        let dec = sym.dirac.as_ref().unwrap();
        assert_eq!(dec.dirac_basis.ncols(), 2);
        assert_eq!(dec.complement_basis.ncols(), 0);
        // covariant symbol of the identity operator is (2π)^n δ(z)
        let z0 = PhasePoint::from_qp(&[0.3], &[-0.4]).unwrap();
        let w = 0.9;
        let got = pair_gaussian(&sym, &z0, w);
        let want = 2.0 * PI * (-z0.norm_sq() / (2.0 * w * w)).exp();
        assert!(
            (got - Complex64::new(want, 0.0)).norm() < 2e-3 * want,
            "identity pairing {got} vs {want}"
        );
    }

    #[test]
    fn degenerate_tensor_split() {
        // F = I ⊕ rotation(t) on n=2 (coords q1,q2,p1,p2; plane 2 rotates).
        let t = 1.0;
        let emb = |s: f64| -> RMat {
            let mut f = RMat::identity(4, 4);
            f[(1, 1)] = s.cos();
            f[(1, 3)] = s.sin();
            f[(3, 1)] = -s.sin();
            f[(3, 3)] = s.cos();
            f
        };
        let f = SymplecticMatrix::new(emb(t)).unwrap();
        let sym = degenerate_covariant(&f).unwrap();
        let dec = sym.dirac.as_ref().unwrap();
        assert_eq!(dec.dirac_basis.ncols(), 2);
        // Reference: (2π)·g restricted to plane 1 zero × rotation covariant
        // pairing on plane 2.
        let z0 = PhasePoint::new(RVec::from_vec(vec![0.2, 0.4, -0.1, 0.3])).unwrap();
        let w = 1.1;
        let got = pair_gaussian(&sym, &z0, w);
        let rot_path = SymplecticPath::from_fn(0.0, t, 300, |s| {
            RMat::from_row_slice(2, 2, &[s.cos(), s.sin(), -s.sin(), s.cos()])
        })
        .unwrap();
        let rot_cov = covariant_symbol(&rot_path).unwrap();
        let z0_rot = PhasePoint::from_qp(&[0.4], &[0.3]).unwrap();
        let rot_pair = pair_gaussian(&rot_cov, &z0_rot, w);
        let plane1 = (-(0.2f64.powi(2) + 0.1f64.powi(2)) / (2.0 * w * w)).exp();
        let want = rot_pair * Complex64::new(2.0 * PI * plane1, 0.0);
        assert!(
            (got - want).norm() < 2e-3 * want.norm(),
            "tensor pairing {got} vs {want}"
        );
    }

    #[test]
    fn degenerate_rejects_nondegenerate() {
        let t: f64 = 1.0;
        let f = SymplecticMatrix::new(RMat::from_row_slice(
            2,
            2,
            &[t.cos(), t.sin(), -t.sin(), t.cos()],
        ))
        .unwrap();
        assert!(matches!(
            degenerate_covariant(&f),
            Err(MetaplecticError::NotDegenerate { .. })
        ));
    }

    #[test]
    fn shear_epsilon_pairings_converge() {
        // small version of the weak-limit check (full version in acceptance)
        let f = SymplecticMatrix::new(RMat::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]))
            .unwrap();
        let dec_sym = degenerate_covariant(&f).unwrap();
        let z0 = PhasePoint::from_qp(&[0.5], &[0.2]).unwrap();
        let w = 1.0;
        let dec_pair = pair_gaussian(&dec_sym, &z0, w);
        let mut errs = Vec::new();
        for &eps in &EPSILON_SCHEDULE {
            let path = shear_eps_path(eps);
            let cov = covariant_symbol(&path).unwrap();
            let p = pair_gaussian(&cov, &z0, w);
            errs.push((p - dec_pair).norm() / dec_pair.norm());
        }
        assert!(errs[0] > errs[1] && errs[1] > errs[2], "not converging: {errs:?}");
        assert!(errs[2] < 2e-3, "final relerr {}", errs[2]);
    }

    fn shear_eps_path(eps: f64) -> SymplecticPath {
        let id = RMat::identity(2, 2);
        let j = standard_symplectic_form(1);
        let shear_leg = SymplecticPath::from_fn(0.0, 1.0, 200, |tau| {
            RMat::from_row_slice(2, 2, &[1.0, tau, 0.0, 1.0])
        })
        .unwrap();
        let f = RMat::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        let lp = (&f - &id) * (&f + &id).try_inverse().unwrap();
        let mut ts = shear_leg.times().to_vec();
        let mut mats = shear_leg.nodes().to_vec();
        for i in 1..=400 {
            let s = i as f64 / 400.0;
            let le = &lp - &j * (s * eps);
            let fpe = (&id + &le) * (&id - &le).try_inverse().unwrap();
            ts.push(1.0 + s);
            mats.push(SymplecticMatrix::project(fpe).unwrap());
        }
        SymplecticPath::from_nodes(ts, mats).unwrap()
    }
}
