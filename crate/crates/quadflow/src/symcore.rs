//! Real symplectic linear algebra: classical flows of quadratic
//! Hamiltonians, symplecticity enforcement, and paths in Sp(2n).

use crate::linalg::{self, expm, max_abs, symmetrize_r, ArgTracker, RMat, RVec};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const SYMPLECTIC_TOL: f64 = 1e-9;
pub const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum SymError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix block {name} is not symmetric (residual {residual:.3e})")]
    NotSymmetric { name: &'static str, residual: f64 },
    #[error("matrix is not symplectic (residual {residual:.3e})")]
    NotSymplectic { residual: f64 },
    #[error("mesh refinement exhausted at {nodes} nodes (max arg step {max_step:.3})")]
    MeshRefinementExhausted { nodes: usize, max_step: f64 },
    #[error("polar decomposition failed: |F| has non-positive eigenvalue {value:.3e}")]
    LogarithmFailure { value: f64 },
    #[error("invalid Hamiltonian: {0}")]
    InvalidHamiltonian(String),
}

/// A phase-space point z = (q, p) with q, p in R^n.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    z: RVec,
}

impl PhasePoint {
    pub fn new(z: RVec) -> Result<Self, SymError> {
        if !z.len().is_multiple_of(2) {
            return Err(SymError::DimensionMismatch { expected: z.len() + 1, got: z.len() });
        }
        Ok(PhasePoint { z })
    }

    pub fn from_qp(q: &[f64], p: &[f64]) -> Result<Self, SymError> {
        if q.len() != p.len() {
            return Err(SymError::DimensionMismatch { expected: q.len(), got: p.len() });
        }
        let z = RVec::from_iterator(2 * q.len(), q.iter().chain(p.iter()).cloned());
        Ok(PhasePoint { z })
    }

    pub fn zeros(n: usize) -> Self {
        PhasePoint { z: RVec::zeros(2 * n) }
    }

    pub fn dim(&self) -> usize {
        self.z.len() / 2
    }

    pub fn as_vec(&self) -> &RVec {
        &self.z
    }

    pub fn q(&self) -> RVec {
        self.z.rows(0, self.dim()).into_owned()
    }

    pub fn p(&self) -> RVec {
        self.z.rows(self.dim(), self.dim()).into_owned()
    }

    pub fn norm_sq(&self) -> f64 {
        self.z.norm_squared()
    }
}

/// The standard symplectic form J = (0, I; -I, 0) on R^{2n}.
pub fn standard_symplectic_form(n: usize) -> RMat {
    assert!(n >= 1, "dimension must be at least 1");
    let mut j = RMat::zeros(2 * n, 2 * n);
    for i in 0..n {
        j[(i, n + i)] = 1.0;
        j[(n + i, i)] = -1.0;
    }
    j
}

/// sigma(x, y) = Jx . y.
pub fn symplectic_product(x: &RVec, y: &RVec) -> f64 {
    let n = x.len() / 2;
    let mut s = 0.0;
    for i in 0..n {
        // (Jx) = (p, -q), so sigma = p.y_q - q.y_p
        s += x[n + i] * y[i] - x[i] * y[n + i];
    }
    s
}

/// ||F^T J F - J||_inf.
pub fn symplectic_residual(f: &RMat) -> f64 {
    let n = f.nrows() / 2;
    let j = standard_symplectic_form(n);
    max_abs(&(f.transpose() * &j * f - &j))
}

/// A real symplectic matrix with block accessors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymplecticMatrix {
    f: RMat,
}

impl SymplecticMatrix {
    /// Wrap a matrix, verifying the symplecticity residual.
    pub fn new(f: RMat) -> Result<Self, SymError> {
        let r = symplectic_residual(&f);
        if r > SYMPLECTIC_TOL {
            return Err(SymError::NotSymplectic { residual: r });
        }
        Ok(SymplecticMatrix { f })
    }

    /// Wrap a nearly-symplectic matrix after re-projection onto Sp(2n).
    pub fn project(f: RMat) -> Result<Self, SymError> {
        let g = symplectic_project(&f);
        Self::new(g)
    }

    pub fn identity(n: usize) -> Self {
        SymplecticMatrix { f: RMat::identity(2 * n, 2 * n) }
    }

    pub fn dim(&self) -> usize {
        self.f.nrows() / 2
    }

    pub fn matrix(&self) -> &RMat {
        &self.f
    }

    pub fn block_a(&self) -> RMat {
        let n = self.dim();
        self.f.view((0, 0), (n, n)).into_owned()
    }

    pub fn block_b(&self) -> RMat {
        let n = self.dim();
        self.f.view((0, n), (n, n)).into_owned()
    }

    pub fn block_c(&self) -> RMat {
        let n = self.dim();
        self.f.view((n, 0), (n, n)).into_owned()
    }

    pub fn block_d(&self) -> RMat {
        let n = self.dim();
        self.f.view((n, n), (n, n)).into_owned()
    }

    pub fn apply(&self, z: &PhasePoint) -> Result<PhasePoint, SymError> {
        if z.dim() != self.dim() {
            return Err(SymError::DimensionMismatch { expected: self.dim(), got: z.dim() });
        }
        Ok(PhasePoint { z: &self.f * z.as_vec() })
    }

    pub fn compose(&self, other: &SymplecticMatrix) -> SymplecticMatrix {
        SymplecticMatrix { f: &self.f * &other.f }
    }
}

/// Newton-type averaging step toward Sp(2n): G = (F - J F^{-T} J)/2 fixes
/// symplectic matrices and converges quadratically for nearby inputs.
pub fn symplectic_project(f: &RMat) -> RMat {
    let n = f.nrows() / 2;
    let j = standard_symplectic_form(n);
    let mut g = f.clone();
    for _ in 0..8 {
        if symplectic_residual(&g) < 1e-14 {
            break;
        }
        let g_inv_t = g
            .clone()
            .lu()
            .try_inverse()
            .expect("symplectic projection: singular iterate")
            .transpose();
        g = (&g - &j * g_inv_t * &j) * 0.5;
    }
    g
}

/// Coefficient blocks of H_t(q, p) = 1/2 (G_t q.q + 2 L_t q.p + K_t p.p).
#[derive(Debug, Clone)]
pub struct HamiltonianBlocks {
    pub g: RMat,
    pub l: RMat,
    pub k: RMat,
}

impl HamiltonianBlocks {
    fn validate(&self, n: usize) -> Result<(), SymError> {
        for (name, m) in [("G", &self.g), ("L", &self.l), ("K", &self.k)] {
            if m.nrows() != n || m.ncols() != n {
                return Err(SymError::DimensionMismatch { expected: n, got: m.nrows() });
            }
            if name != "L" {
                let r = max_abs(&(m - m.transpose()));
                if r > SYMMETRY_TOL {
                    let name: &'static str = if name == "G" { "G" } else { "K" };
                    return Err(SymError::NotSymmetric { name, residual: r });
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
enum HamiltonianKind {
    Constant(HamiltonianBlocks),
    /// Pieces valid on [breaks[i], breaks[i+1]); exact exponential steps.
    PiecewiseConstant { breaks: Vec<f64>, pieces: Vec<HamiltonianBlocks> },
    /// Samples on a uniform-ish mesh, linearly interpolated in t.
    Sampled { ts: Vec<f64>, samples: Vec<HamiltonianBlocks> },
}

/// A time-dependent quadratic Hamiltonian.
#[derive(Debug, Clone)]
pub struct QuadraticHamiltonian {
    n: usize,
    hbar: f64,
    kind: HamiltonianKind,
}

impl QuadraticHamiltonian {
    pub fn constant(n: usize, hbar: f64, g: RMat, l: RMat, k: RMat) -> Result<Self, SymError> {
        let blocks = HamiltonianBlocks { g, l, k };
        blocks.validate(n)?;
        if hbar <= 0.0 {
            return Err(SymError::InvalidHamiltonian("hbar must be positive".into()));
        }
        Ok(QuadraticHamiltonian { n, hbar, kind: HamiltonianKind::Constant(blocks) })
    }

    pub fn piecewise(
        n: usize,
        hbar: f64,
        breaks: Vec<f64>,
        pieces: Vec<(RMat, RMat, RMat)>,
    ) -> Result<Self, SymError> {
        if breaks.len() != pieces.len() + 1 {
            return Err(SymError::InvalidHamiltonian(
                "need exactly one more break than pieces".into(),
            ));
        }
        if !breaks.windows(2).all(|w| w[0] < w[1]) {
            return Err(SymError::InvalidHamiltonian("breaks must be increasing".into()));
        }
        let pieces: Vec<HamiltonianBlocks> = pieces
            .into_iter()
            .map(|(g, l, k)| HamiltonianBlocks { g, l, k })
            .collect();
        for p in &pieces {
            p.validate(n)?;
        }
        Ok(QuadraticHamiltonian { n, hbar, kind: HamiltonianKind::PiecewiseConstant { breaks, pieces } })
    }

    pub fn sampled(
        n: usize,
        hbar: f64,
        ts: Vec<f64>,
        samples: Vec<(RMat, RMat, RMat)>,
    ) -> Result<Self, SymError> {
        if ts.len() != samples.len() || ts.len() < 2 {
            return Err(SymError::InvalidHamiltonian("need at least two samples".into()));
        }
        if !ts.windows(2).all(|w| w[0] < w[1]) {
            return Err(SymError::InvalidHamiltonian("sample times must be increasing".into()));
        }
        let samples: Vec<HamiltonianBlocks> = samples
            .into_iter()
            .map(|(g, l, k)| HamiltonianBlocks { g, l, k })
            .collect();
        for s in &samples {
            s.validate(n)?;
        }
        Ok(QuadraticHamiltonian { n, hbar, kind: HamiltonianKind::Sampled { ts, samples } })
    }

    /// The zero Hamiltonian (identity flow).
    pub fn zero(n: usize, hbar: f64) -> Self {
        QuadraticHamiltonian {
            n,
            hbar,
            kind: HamiltonianKind::Constant(HamiltonianBlocks {
                g: RMat::zeros(n, n),
                l: RMat::zeros(n, n),
                k: RMat::zeros(n, n),
            }),
        }
    }

    /// Harmonic oscillator: G = K = I, L = 0.
    pub fn harmonic(n: usize, hbar: f64) -> Self {
        QuadraticHamiltonian {
            n,
            hbar,
            kind: HamiltonianKind::Constant(HamiltonianBlocks {
                g: RMat::identity(n, n),
                l: RMat::zeros(n, n),
                k: RMat::identity(n, n),
            }),
        }
    }

    /// Free particle: K = I, G = L = 0.
    pub fn free(n: usize, hbar: f64) -> Self {
        QuadraticHamiltonian {
            n,
            hbar,
            kind: HamiltonianKind::Constant(HamiltonianBlocks {
                g: RMat::zeros(n, n),
                l: RMat::zeros(n, n),
                k: RMat::identity(n, n),
            }),
        }
    }

    /// Inverted oscillator: G = -I, K = I, L = 0.
    pub fn inverted(n: usize, hbar: f64) -> Self {
        QuadraticHamiltonian {
            n,
            hbar,
            kind: HamiltonianKind::Constant(HamiltonianBlocks {
                g: -RMat::identity(n, n),
                l: RMat::zeros(n, n),
                k: RMat::identity(n, n),
            }),
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.kind, HamiltonianKind::Constant(_))
    }

    /// Coefficient blocks at time t.
    pub fn blocks(&self, t: f64) -> HamiltonianBlocks {
        match &self.kind {
            HamiltonianKind::Constant(b) => b.clone(),
            HamiltonianKind::PiecewiseConstant { breaks, pieces } => {
                let idx = match breaks[1..breaks.len() - 1]
                    .iter()
                    .position(|&b| t < b)
                {
                    Some(i) => i,
                    None => pieces.len() - 1,
                };
                pieces[idx].clone()
            }
            HamiltonianKind::Sampled { ts, samples } => {
                let t = t.clamp(ts[0], *ts.last().unwrap());
                let i = match ts.windows(2).position(|w| t <= w[1]) {
                    Some(i) => i,
                    None => ts.len() - 2,
                };
                let w = (t - ts[i]) / (ts[i + 1] - ts[i]);
                HamiltonianBlocks {
                    g: &samples[i].g * (1.0 - w) + &samples[i + 1].g * w,
                    l: &samples[i].l * (1.0 - w) + &samples[i + 1].l * w,
                    k: &samples[i].k * (1.0 - w) + &samples[i + 1].k * w,
                }
            }
        }
    }

    /// The full symmetric block matrix S_t = (G, L^T; L, K), so that
    /// H_t(z) = 1/2 S_t z.z and the flow satisfies dF/dt = J S_t F.
    pub fn s_matrix(&self, t: f64) -> RMat {
        let b = self.blocks(t);
        let n = self.n;
        let mut s = RMat::zeros(2 * n, 2 * n);
        s.view_mut((0, 0), (n, n)).copy_from(&b.g);
        s.view_mut((0, n), (n, n)).copy_from(&b.l.transpose());
        s.view_mut((n, 0), (n, n)).copy_from(&b.l);
        s.view_mut((n, n), (n, n)).copy_from(&b.k);
        s
    }

    /// Classical energy H_t(z) = 1/2 S_t z.z.
    pub fn energy(&self, t: f64, z: &PhasePoint) -> f64 {
        let s = self.s_matrix(t);
        0.5 * (&s * z.as_vec()).dot(z.as_vec())
    }
}

/// A discretized C^1 path in Sp(2n) starting at the identity, together with
/// the continuously tracked argument of det(A_t + i B_t).
#[derive(Debug, Clone)]
pub struct SymplecticPath {
    ts: Vec<f64>,
    mats: Vec<SymplecticMatrix>,
    arg_det_ab: Vec<f64>,
}

impl SymplecticPath {
    /// Build a path from explicit nodes, refusing meshes whose
    /// det(A + iB) argument jumps by pi/2 or more between nodes.
    pub fn from_nodes(ts: Vec<f64>, mats: Vec<SymplecticMatrix>) -> Result<Self, SymError> {
        assert_eq!(ts.len(), mats.len());
        assert!(!mats.is_empty());
        let n = mats[0].dim();
        let ident_res = max_abs(&(mats[0].matrix() - RMat::identity(2 * n, 2 * n)));
        if ident_res > 1e-9 {
            return Err(SymError::InvalidHamiltonian(format!(
                "path must start at the identity (residual {ident_res:.3e})"
            )));
        }
        let mut tracker = ArgTracker::new();
        let mut args = Vec::with_capacity(mats.len());
        for m in &mats {
            let ab = crate::linalg::to_c(&m.block_a())
                + crate::linalg::to_c(&m.block_b()) * linalg::IM;
            let d = linalg::det_c(&ab);
            args.push(tracker.push(d));
        }
        if tracker.max_step() >= std::f64::consts::FRAC_PI_2 {
            return Err(SymError::MeshRefinementExhausted {
                nodes: ts.len(),
                max_step: tracker.max_step(),
            });
        }
        Ok(SymplecticPath { ts, mats, arg_det_ab: args })
    }

    /// Build a path by sampling a continuous matrix function on a uniform
    /// mesh, doubling the node count until the branch criterion holds.
    pub fn from_fn(
        t0: f64,
        t1: f64,
        min_nodes: usize,
        f: impl Fn(f64) -> RMat,
    ) -> Result<Self, SymError> {
        let mut k = min_nodes.max(16);
        loop {
            let ts: Vec<f64> = (0..=k)
                .map(|i| t0 + (t1 - t0) * i as f64 / k as f64)
                .collect();
            let mats: Result<Vec<SymplecticMatrix>, SymError> =
                ts.iter().map(|&t| SymplecticMatrix::project(f(t))).collect();
            match Self::from_nodes(ts, mats?) {
                Ok(p) => return Ok(p),
                Err(SymError::MeshRefinementExhausted { .. }) if k < (1 << 16) => {
                    k *= 2;
                }
                Err(e) => return Err(e),
            }
        }
    }

    pub fn times(&self) -> &[f64] {
        &self.ts
    }

    pub fn nodes(&self) -> &[SymplecticMatrix] {
        &self.mats
    }

    pub fn arg_det_ab(&self) -> &[f64] {
        &self.arg_det_ab
    }

    pub fn endpoint(&self) -> &SymplecticMatrix {
        self.mats.last().unwrap()
    }

    pub fn dim(&self) -> usize {
        self.mats[0].dim()
    }

    /// Concatenate with a second path that starts at the identity; the
    /// second leg is left-multiplied onto this path's endpoint.
    pub fn then(&self, next: &SymplecticPath) -> Result<SymplecticPath, SymError> {
        let end = self.endpoint().clone();
        let t_off = *self.ts.last().unwrap() - next.ts[0];
        let mut ts = self.ts.clone();
        let mut mats = self.mats.clone();
        for (t, m) in next.ts.iter().zip(next.mats.iter()).skip(1) {
            ts.push(t + t_off);
            mats.push(m.compose(&end));
        }
        SymplecticPath::from_nodes(ts, mats)
    }
}

/// Integrate dF/dt = J S_t F from t0 to t1. Constant and piecewise-constant
/// Hamiltonians use exact exponential steps; sampled ones use RK4 with
/// symplectic re-projection at every node. `min_steps` is the initial mesh.
pub fn flow(
    h: &QuadraticHamiltonian,
    t0: f64,
    t1: f64,
    min_steps: usize,
) -> Result<SymplecticPath, SymError> {
    let n = h.dim();
    let j = standard_symplectic_form(n);
    let mut k = min_steps.max(32);
    loop {
        let ts: Vec<f64> = (0..=k)
            .map(|i| t0 + (t1 - t0) * i as f64 / k as f64)
            .collect();
        let mut mats = Vec::with_capacity(ts.len());
        let mut f = RMat::identity(2 * n, 2 * n);
        mats.push(SymplecticMatrix::identity(n));
        for w in ts.windows(2) {
            let (ta, tb) = (w[0], w[1]);
            let dt = tb - ta;
            let step = if h.is_constant() || is_within_piece(h, ta, tb) {
                // Exact step for (piecewise-)constant coefficients.
                expm(&(&j * h.s_matrix(0.5 * (ta + tb)) * dt))
            } else {
                rk4_step(h, &j, ta, dt)
            };
            f = symplectic_project(&(step * &f));
            mats.push(SymplecticMatrix::new(f.clone())?);
        }
        match SymplecticPath::from_nodes(ts, mats) {
            Ok(p) => return Ok(p),
            Err(SymError::MeshRefinementExhausted { .. }) if k < (1 << 16) => {
                k *= 2;
            }
            Err(e) => return Err(e),
        }
    }
}

fn is_within_piece(h: &QuadraticHamiltonian, ta: f64, tb: f64) -> bool {
    match &h.kind {
        HamiltonianKind::Constant(_) => true,
        HamiltonianKind::PiecewiseConstant { breaks, .. } => {
            // Step is exact iff no interior break separates ta and tb.
            !breaks[1..breaks.len() - 1]
                .iter()
                .any(|&b| ta < b && b < tb)
        }
        HamiltonianKind::Sampled { .. } => false,
    }
}

fn rk4_step(h: &QuadraticHamiltonian, j: &RMat, t: f64, dt: f64) -> RMat {
    let n = h.dim();
    let id = RMat::identity(2 * n, 2 * n);
    let rhs = |tt: f64, f: &RMat| -> RMat { j * h.s_matrix(tt) * f };
    let k1 = rhs(t, &id);
    let k2 = rhs(t + dt / 2.0, &(&id + &k1 * (dt / 2.0)));
    let k3 = rhs(t + dt / 2.0, &(&id + &k2 * (dt / 2.0)));
    let k4 = rhs(t + dt, &(&id + &k3 * dt));
    &id + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0)
}

/// Evaluate z_t = F_t z0 at every node of the path.
pub fn classical_trajectory(
    path: &SymplecticPath,
    z0: &PhasePoint,
) -> Result<Vec<PhasePoint>, SymError> {
    path.nodes().iter().map(|f| f.apply(z0)).collect()
}

/// The polar-interpolation path s -> exp(s K') exp(s L') where
/// exp(K') = V is the orthogonal-symplectic factor and exp(L') = |F| the
/// positive-symplectic factor of F = V |F|.
pub struct PolarPath {
    angles: RVec,
    v_basis: linalg::CMat,
    log_absf_eigs: RVec,
    absf_basis: RMat,
    n: usize,
}

impl PolarPath {
    pub fn new(f: &SymplecticMatrix) -> Result<Self, SymError> {
        let n = f.dim();
        let fm = f.matrix();
        // |F| = (F^T F)^{1/2} via symmetric eigendecomposition.
        let (ev, basis) = linalg::sym_eig(&(fm.transpose() * fm));
        for &e in ev.iter() {
            if e <= 0.0 {
                return Err(SymError::LogarithmFailure { value: e });
            }
        }
        let log_absf_eigs = ev.map(|e| 0.5 * e.ln());
        let absf_inv = &basis
            * RMat::from_diagonal(&ev.map(|e| e.powf(-0.5)))
            * basis.transpose();
        let v = fm * absf_inv;
        // V is orthogonal-symplectic <=> U = X + iY unitary, where
        // V = (X, Y; -Y, X).
        let x = v.view((0, 0), (n, n)).into_owned();
        let y = v.view((0, n), (n, n)).into_owned();
        let u = linalg::to_c(&x) + linalg::to_c(&y) * linalg::IM;
        let (angles, v_basis) = linalg::unitary_eig(&u);
        Ok(PolarPath { angles, v_basis, log_absf_eigs, absf_basis: basis, n })
    }

    /// Evaluate the interpolant at s in [0, 1].
    pub fn at(&self, s: f64) -> SymplecticMatrix {
        let n = self.n;
        // V^s from the unitary eigendecomposition.
        let us = &self.v_basis
            * linalg::CMat::from_diagonal(
                &self.angles.map(|t| Complex64::from_polar(1.0, s * t)),
            )
            * self.v_basis.adjoint();
        let mut vs = RMat::zeros(2 * n, 2 * n);
        for i in 0..n {
            for k in 0..n {
                let x = us[(i, k)].re;
                let y = us[(i, k)].im;
                vs[(i, k)] = x;
                vs[(i, n + k)] = y;
                vs[(n + i, k)] = -y;
                vs[(n + i, n + k)] = x;
            }
        }
        // |F|^s from the symmetric eigendecomposition.
        let abss = &self.absf_basis
            * RMat::from_diagonal(&self.log_absf_eigs.map(|e| (s * e).exp()))
            * self.absf_basis.transpose();
        SymplecticMatrix { f: symplectic_project(&(vs * abss)) }
    }

    /// Sample the interpolant as a SymplecticPath on [0, 1].
    pub fn path(&self, min_nodes: usize) -> Result<SymplecticPath, SymError> {
        SymplecticPath::from_fn(0.0, 1.0, min_nodes, |s| self.at(s).matrix().clone())
    }
}

/// Single-point evaluation of the polar interpolation (convenience wrapper).
pub fn polar_path(f: &SymplecticMatrix, t: f64) -> Result<SymplecticMatrix, SymError> {
    Ok(PolarPath::new(f)?.at(t))
}

/// Random symplectic matrix exp(J S) with Gaussian symmetric S, for tests.
pub fn random_symplectic<R: rand::Rng>(n: usize, scale: f64, rng: &mut R) -> SymplecticMatrix {
    use rand::distributions::Distribution;
    let normal = rand::distributions::Uniform::new(-1.0_f64, 1.0);
    let mut s = RMat::zeros(2 * n, 2 * n);
    for i in 0..2 * n {
        for k in 0..=i {
            let v = normal.sample(rng) * scale;
            s[(i, k)] = v;
            s[(k, i)] = v;
        }
    }
    let j = standard_symplectic_form(n);
    SymplecticMatrix::project(expm(&(j * s))).expect("projection of exp(JS) cannot fail")
}

/// Random symmetric matrix with entries uniform in [-scale, scale], for tests.
pub fn random_symmetric<R: rand::Rng>(n: usize, scale: f64, rng: &mut R) -> RMat {
    use rand::distributions::Distribution;
    let u = rand::distributions::Uniform::new(-1.0_f64, 1.0);
    let mut s = RMat::zeros(n, n);
    for i in 0..n {
        for k in 0..=i {
            let v = u.sample(rng) * scale;
            s[(i, k)] = v;
            s[(k, i)] = v;
        }
    }
    symmetrize_r(&s)
}
