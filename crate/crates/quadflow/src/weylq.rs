//! Desk-scale Weyl quantization on 1D/2D grids: the independent brute-force
//! oracle. Position factors act by midpoint multiplication, momentum factors
//! by spectral (discrete-Fourier) differentiation; the propagator is an
//! exact matrix exponential of the quantized Hamiltonian.
//!
//! Conventions: operator matrices act on sample vectors, i.e. the matrix of
//! an integral kernel K is M_ij = K(x_i, x_j) dx. With that convention the
//! matrix trace equals the operator trace and inner products carry a dx.

use crate::coherent::GaussianState;
use crate::linalg::{herm_eig, CMat, CVec, RMat, RVec};
use crate::symcore::{PhasePoint, QuadraticHamiltonian};
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GridError {
    #[error("symbol degree exceeds 2")]
    DegreeTooHigh,
    #[error("grid mismatch between operands")]
    GridMismatch,
    #[error("wavepacket escape: boundary mass {mass:.3e} exceeds threshold")]
    WavepacketEscape { mass: f64 },
}

/// A uniform, origin-symmetric 1D position grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid1D {
    pub n_points: usize,
    pub length: f64,
    pub hbar: f64,
}

impl Grid1D {
    pub fn new(n_points: usize, length: f64, hbar: f64) -> Self {
        assert!(n_points >= 4 && n_points.is_multiple_of(2));
        Grid1D { n_points, length, hbar }
    }

    pub fn dx(&self) -> f64 {
        self.length / self.n_points as f64
    }

    /// Position samples x_i = (i - N/2) dx.
    pub fn xs(&self) -> RVec {
        let n = self.n_points;
        let dx = self.dx();
        RVec::from_iterator(n, (0..n).map(|i| (i as f64 - n as f64 / 2.0) * dx))
    }

    /// Momentum samples p_m = hbar k_m with k in DFT (fftfreq) order.
    pub fn ps(&self) -> RVec {
        let n = self.n_points as i64;
        let dk = 2.0 * std::f64::consts::PI / self.length;
        RVec::from_iterator(
            self.n_points,
            (0..n).map(|m| {
                let mm = if m < (n + 1) / 2 { m } else { m - n };
                self.hbar * dk * mm as f64
            }),
        )
    }

    /// Dense forward DFT matrix matching the fftfreq momentum order.
    pub fn dft(&self) -> CMat {
        let n = self.n_points;
        let w = -2.0 * std::f64::consts::PI / n as f64;
        CMat::from_fn(n, n, |k, j| Complex64::from_polar(1.0, w * (k as f64) * (j as f64)))
    }

    pub fn idft(&self) -> CMat {
        let n = self.n_points;
        let w = 2.0 * std::f64::consts::PI / n as f64;
        CMat::from_fn(n, n, |j, k| {
            Complex64::from_polar(1.0 / n as f64, w * (j as f64) * (k as f64))
        })
    }

    /// Spectral momentum operator P = F^{-1} diag(hbar k) F.
    pub fn momentum_matrix(&self) -> CMat {
        let ps = self.ps();
        let f = self.dft();
        let fi = self.idft();
        let d = CMat::from_diagonal(&ps.map(|p| Complex64::new(p, 0.0)));
        fi * d * f
    }

    pub fn position_matrix(&self) -> CMat {
        CMat::from_diagonal(&self.xs().map(|x| Complex64::new(x, 0.0)))
    }
}

/// Complex samples of a wavefunction on a Grid1D.
#[derive(Debug, Clone)]
pub struct GridWavefunction {
    pub grid: Grid1D,
    pub samples: CVec,
}

impl GridWavefunction {
    pub fn from_gaussian(grid: &Grid1D, s: &GaussianState) -> Self {
        assert_eq!(s.dim(), 1);
        let xs = grid.xs();
        let vals = s.wavefunction_1d(xs.as_slice());
        GridWavefunction { grid: grid.clone(), samples: CVec::from_vec(vals) }
    }

    pub fn norm(&self) -> f64 {
        (self.samples.norm_squared() * self.grid.dx()).sqrt()
    }

    /// <self | other> with the dx quadrature weight.
    pub fn inner(&self, other: &GridWavefunction) -> Complex64 {
        self.samples.dotc(&other.samples) * Complex64::new(self.grid.dx(), 0.0)
    }

    /// Mass in the outer 10% of the grid on each side.
    pub fn boundary_mass(&self) -> f64 {
        let n = self.grid.n_points;
        let edge = n / 10;
        let mut m = 0.0;
        for i in 0..n {
            if i < edge || i >= n - edge {
                m += self.samples[i].norm_sqr() * self.grid.dx();
            }
        }
        m
    }
}

/// A dense operator on grid sample vectors.
#[derive(Debug, Clone)]
pub struct GridOperator {
    pub grid: Grid1D,
    pub matrix: CMat,
}

impl GridOperator {
    pub fn apply(&self, psi: &GridWavefunction) -> GridWavefunction {
        GridWavefunction { grid: psi.grid.clone(), samples: &self.matrix * &psi.samples }
    }

    /// Operator trace (equals the matrix trace in our convention).
    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }
}

/// A real polynomial symbol of degree <= 2 in (q, p), n = 1.
#[derive(Debug, Clone, Default)]
pub struct QuadPoly {
    pub c0: f64,
    pub cq: f64,
    pub cp: f64,
    pub cqq: f64,
    pub cqp: f64,
    pub cpp: f64,
}

impl QuadPoly {
    pub fn eval(&self, q: f64, p: f64) -> f64 {
        self.c0 + self.cq * q + self.cp * p + self.cqq * q * q + self.cqp * q * p
            + self.cpp * p * p
    }

    /// Compose with a linear symplectic map: (A o F)(z) = A(Fz).
    pub fn compose_linear(&self, f: &RMat) -> QuadPoly {
        let (a, b, c, d) = (f[(0, 0)], f[(0, 1)], f[(1, 0)], f[(1, 1)]);
        QuadPoly {
            c0: self.c0,
            cq: self.cq * a + self.cp * c,
            cp: self.cq * b + self.cp * d,
            cqq: self.cqq * a * a + self.cqp * a * c + self.cpp * c * c,
            cqp: 2.0 * self.cqq * a * b + self.cqp * (a * d + b * c) + 2.0 * self.cpp * c * d,
            cpp: self.cqq * b * b + self.cqp * b * d + self.cpp * d * d,
        }
    }
}

/// Weyl-quantize a degree-<=2 polynomial symbol: position powers multiply at
/// the midpoint, momentum powers act spectrally, and the cross term is the
/// symmetrization (QP + PQ)/2 (exactly the midpoint rule).
pub fn quantize_quadratic(poly: &QuadPoly, grid: &Grid1D) -> GridOperator {
    let n = grid.n_points;
    let q = grid.position_matrix();
    let p = grid.momentum_matrix();
    let id = CMat::identity(n, n);
    let mut m = id * Complex64::new(poly.c0, 0.0);
    m += &q * Complex64::new(poly.cq, 0.0);
    m += &p * Complex64::new(poly.cp, 0.0);
    m += &q * &q * Complex64::new(poly.cqq, 0.0);
    m += &p * &p * Complex64::new(poly.cpp, 0.0);
    m += (&q * &p + &p * &q) * Complex64::new(poly.cqp / 2.0, 0.0);
    GridOperator { grid: grid.clone(), matrix: m }
}

/// Weyl-quantize arbitrary symbol samples:
///   M_ij = sum_m exp(i (x_i - x_j) p_m / hbar) A((x_i + x_j)/2, p_m) / N.
/// (The 1/N collects dp dx / (2 pi hbar).) The momentum sum periodizes the
/// kernel in x - y with period L, so entries with |i - j| >= N/2 would be
/// pure wrap-around ghosts; they are masked to zero. The result is
/// continuum-faithful for symbols whose kernels decay within half the box.
/// Polynomial symbols (non-decaying kernels) belong to
/// `quantize_quadratic`.
pub fn quantize_samples(
    symbol: impl Fn(f64, f64) -> Complex64,
    grid: &Grid1D,
) -> GridOperator {
    let n = grid.n_points;
    let xs = grid.xs();
    let ps = grid.ps();
    let mut m = CMat::zeros(n, n);
    for idx in 0..n {
        let pm = ps[idx];
        for i in 0..n {
            for j in 0..n {
                if i.abs_diff(j) >= n / 2 {
                    continue;
                }
                let mid = 0.5 * (xs[i] + xs[j]);
                let phase = (xs[i] - xs[j]) * pm / grid.hbar;
                m[(i, j)] += Complex64::from_polar(1.0, phase) * symbol(mid, pm);
            }
        }
    }
    GridOperator { grid: grid.clone(), matrix: m / Complex64::new(n as f64, 0.0) }
}

/// Recover symbol samples from an operator:
///   A(x_i, p) = 2 sum_j exp(-2 i j dx p / hbar) M_{i+j, i-j},
/// truncating offsets that leave the grid. Returns samples A[i][m] on the
/// (xs, ps) lattice. The offset lattice has spacing 2 dx, so this is exact
/// only for kernels band-limited to half the grid Nyquist frequency
/// (smooth decaying kernels); delta-like kernels alias by a factor 2.
pub fn symbol_from_kernel(op: &GridOperator) -> CMat {
    let n = op.grid.n_points;
    let dx = op.grid.dx();
    let ps = op.grid.ps();
    let hb = op.grid.hbar;
    let mut a = CMat::zeros(n, n);
    for i in 0..n {
        for (mi, pm) in ps.iter().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            let jmax = i.min(n - 1 - i);
            for j in 0..=jmax {
                let u = 2.0 * j as f64 * dx;
                let e = Complex64::from_polar(1.0, -u * pm / hb);
                acc += e * op.matrix[(i + j, i - j)];
                if j > 0 {
                    acc += e.conj() * op.matrix[(i - j, i + j)];
                }
            }
            a[(i, mi)] = acc * Complex64::new(2.0, 0.0);
        }
    }
    a
}

/// A rectangular phase-space sampling lattice for symbol transforms.
#[derive(Debug, Clone)]
pub struct PhaseGrid {
    pub qs: Vec<f64>,
    pub ps: Vec<f64>,
}

impl PhaseGrid {
    /// Symmetric lattice with `m` points per axis spanning [-half, half].
    pub fn symmetric(m: usize, half: f64) -> Self {
        let step = 2.0 * half / m as f64;
        let axis: Vec<f64> = (0..m).map(|i| -half + (i as f64 + 0.5) * step).collect();
        PhaseGrid { qs: axis.clone(), ps: axis }
    }

    pub fn dq(&self) -> f64 {
        self.qs[1] - self.qs[0]
    }

    pub fn dp(&self) -> f64 {
        self.ps[1] - self.ps[0]
    }

    pub fn sample(&self, f: impl Fn(f64, f64) -> Complex64) -> CMat {
        CMat::from_fn(self.qs.len(), self.ps.len(), |i, j| f(self.qs[i], self.ps[j]))
    }
}

/// Discrete symplectic Fourier transform of contravariant symbol samples:
///   A#(X) = (2 pi hbar)^{-1} sum A(Y) exp((i/hbar) sigma(Y, X)) dq dp,
/// evaluated at an arbitrary phase point X. Valid for decaying samples.
pub fn covariant_from_contravariant(
    samples: &CMat,
    pg: &PhaseGrid,
    hbar: f64,
    x: &PhasePoint,
) -> Complex64 {
    let (xq, xp) = (x.q()[0], x.p()[0]);
    let mut acc = Complex64::new(0.0, 0.0);
    for (i, &yq) in pg.qs.iter().enumerate() {
        for (j, &yp) in pg.ps.iter().enumerate() {
            // sigma(Y, X) = y_p x_q - y_q x_p
            let s = yp * xq - yq * xp;
            acc += samples[(i, j)] * Complex64::from_polar(1.0, s / hbar);
        }
    }
    acc * Complex64::new(pg.dq() * pg.dp() / (2.0 * std::f64::consts::PI * hbar), 0.0)
}

/// Parity-operator route to the symbol (n = 1): the Grossmann-Royer
/// reflection at X evaluated as a lattice trace,
///   A(X) = 2 sum_i M_{i, 2m-i} exp(-2 i xi (x_i - q) / hbar),
/// where q = x_m is the nearest grid node to X's position. Exact for
/// half-band (smooth decaying) kernels, like `symbol_from_kernel`.
pub fn parity_symbol(op: &GridOperator, x: &PhasePoint) -> Complex64 {
    let n = op.grid.n_points;
    let xs = op.grid.xs();
    let dx = op.grid.dx();
    let q = x.q()[0];
    let xi = x.p()[0];
    let m = ((q - xs[0]) / dx).round() as i64;
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n as i64 {
        let j = 2 * m - i;
        if j < 0 || j >= n as i64 {
            continue;
        }
        let phase = -2.0 * xi * (xs[i as usize] - xs[m as usize]) / op.grid.hbar;
        acc += op.matrix[(i as usize, j as usize)] * Complex64::from_polar(1.0, phase);
    }
    acc * Complex64::new(2.0, 0.0)
}

/// Tr[A B] computed two ways: the matrix trace of the product of quantized
/// operators, and the phase-space integral (2 pi hbar)^{-n} int A B.
pub fn trace_pairing(
    a: impl Fn(f64, f64) -> Complex64,
    b: impl Fn(f64, f64) -> Complex64,
    grid: &Grid1D,
    pg: &PhaseGrid,
) -> (Complex64, Complex64) {
    let op_a = quantize_samples(&a, grid);
    let op_b = quantize_samples(&b, grid);
    let via_trace = (op_a.matrix * op_b.matrix).trace();
    let mut acc = Complex64::new(0.0, 0.0);
    for &q in &pg.qs {
        for &p in &pg.ps {
            acc += a(q, p) * b(q, p);
        }
    }
    let via_integral =
        acc * Complex64::new(pg.dq() * pg.dp() / (2.0 * std::f64::consts::PI * grid.hbar), 0.0);
    (via_trace, via_integral)
}

/// Quantize a quadratic Hamiltonian at time t (n = 1).
pub fn hamiltonian_operator(h: &QuadraticHamiltonian, t: f64, grid: &Grid1D) -> GridOperator {
    assert_eq!(h.dim(), 1);
    let b = h.blocks(t);
    let poly = QuadPoly {
        cqq: 0.5 * b.g[(0, 0)],
        cqp: b.l[(0, 0)],
        cpp: 0.5 * b.k[(0, 0)],
        ..Default::default()
    };
    quantize_quadratic(&poly, grid)
}

/// The exact grid propagator U = exp(-i t H / hbar) for constant H (n = 1),
/// via a dense Hermitian eigendecomposition.
pub fn propagator_matrix(h: &QuadraticHamiltonian, t: f64, grid: &Grid1D) -> CMat {
    let op = hamiltonian_operator(h, 0.0, grid);
    let (ev, v) = herm_eig(&op.matrix);
    let d = CMat::from_diagonal(&ev.map(|e| Complex64::from_polar(1.0, -e * t / grid.hbar)));
    &v * d * v.adjoint()
}

/// Propagate grid samples under i hbar dpsi/dt = H psi. Constant H uses one
/// eigendecomposition; time-dependent H uses exact midpoint exponential
/// steps. Errors if boundary mass exceeds 1e-8 at the end.
pub fn grid_propagate(
    h: &QuadraticHamiltonian,
    psi0: &GridWavefunction,
    t0: f64,
    t1: f64,
    steps: usize,
) -> Result<GridWavefunction, GridError> {
    let grid = &psi0.grid;
    let mut samples = psi0.samples.clone();
    if h.is_constant() {
        let u = propagator_matrix(h, t1 - t0, grid);
        samples = u * samples;
    } else {
        let dt = (t1 - t0) / steps as f64;
        for i in 0..steps {
            let tm = t0 + (i as f64 + 0.5) * dt;
            let op = hamiltonian_operator(h, tm, grid);
            let (ev, v) = herm_eig(&op.matrix);
            let d = CMat::from_diagonal(
                &ev.map(|e| Complex64::from_polar(1.0, -e * dt / grid.hbar)),
            );
            samples = &v * d * v.adjoint() * samples;
        }
    }
    let out = GridWavefunction { grid: grid.clone(), samples };
    let mass = out.boundary_mass();
    if mass > 1e-8 {
        return Err(GridError::WavepacketEscape { mass });
    }
    Ok(out)
}

/// Apply the Weyl translation T(z) psi(x) = e^{(i/hbar)(p x - q p/2)} psi(x - q)
/// using a spectral fractional shift.
pub fn weyl_translate(psi: &GridWavefunction, z: &PhasePoint) -> GridWavefunction {
    let grid = &psi.grid;
    let (q, p) = (z.q()[0], z.p()[0]);
    let f = grid.dft();
    let fi = grid.idft();
    let ks = grid.ps().map(|pm| pm / grid.hbar);
    let mut spec = f * &psi.samples;
    for (i, s) in spec.iter_mut().enumerate() {
        *s *= Complex64::from_polar(1.0, -ks[i] * q);
    }
    let mut shifted = fi * spec;
    let xs = grid.xs();
    for (i, s) in shifted.iter_mut().enumerate() {
        *s *= Complex64::from_polar(1.0, (p * xs[i] - q * p / 2.0) / grid.hbar);
    }
    GridWavefunction { grid: grid.clone(), samples: shifted }
}

/// Dense matrix of the Weyl translation T(z) on the grid.
pub fn weyl_translate_matrix(grid: &Grid1D, z: &PhasePoint) -> CMat {
    let n = grid.n_points;
    let (q, p) = (z.q()[0], z.p()[0]);
    let f = grid.dft();
    let fi = grid.idft();
    let ks = grid.ps().map(|pm| pm / grid.hbar);
    let shift_diag = CMat::from_diagonal(&CVec::from_iterator(
        n,
        ks.iter().map(|&k| Complex64::from_polar(1.0, -k * q)),
    ));
    let xs = grid.xs();
    let pre = CMat::from_diagonal(&CVec::from_iterator(
        n,
        xs.iter()
            .map(|&x| Complex64::from_polar(1.0, (p * x - q * p / 2.0) / grid.hbar)),
    ));
    pre * fi * shift_diag * f
}

/// Mean value via the covariant symbol:
///   <phi | A psi> = (2 pi hbar)^{-1} int A#(X) <phi | T(X) psi> dX.
pub fn mean_value(
    a_cov: impl Fn(f64, f64) -> Complex64,
    pg: &PhaseGrid,
    phi: &GridWavefunction,
    psi: &GridWavefunction,
) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for &q in &pg.qs {
        for &p in &pg.ps {
            let z = PhasePoint::from_qp(&[q], &[p]).expect("1d point");
            let tpsi = weyl_translate(psi, &z);
            acc += a_cov(q, p) * phi.inner(&tpsi);
        }
    }
    acc * Complex64::new(
        pg.dq() * pg.dp() / (2.0 * std::f64::consts::PI * phi.grid.hbar),
        0.0,
    )
}

/// Evaluate the band-limited (Fourier) interpolant of grid samples at an
/// arbitrary x; exact for functions resolved by the grid.
pub fn fourier_interp(grid: &Grid1D, samples: &CVec, x: f64) -> Complex64 {
    let n = grid.n_points;
    let spec = grid.dft() * samples;
    let ks = grid.ps().map(|pm| pm / grid.hbar);
    let x0 = grid.xs()[0];
    let mut acc = Complex64::new(0.0, 0.0);
    for m in 0..n {
        acc += spec[m] * Complex64::from_polar(1.0, ks[m] * (x - x0));
    }
    acc / Complex64::new(n as f64, 0.0)
}

/// Wigner function of grid samples at a phase point (oracle for the closed
/// form): W(q, p) = int e^{-i u p / hbar} psi(q + u/2) conj(psi(q - u/2)) du
/// with Fourier interpolation of the samples.
pub fn wigner_grid(psi: &GridWavefunction, q: f64, p: f64) -> Complex64 {
    let grid = &psi.grid;
    let n = grid.n_points;
    let dx = grid.dx();
    let du = dx;
    let m = 2 * n;
    let interp_at: Vec<(Complex64, Complex64)> = (0..m)
        .map(|j| {
            let u = (j as f64 - m as f64 / 2.0) * du;
            (
                fourier_interp(grid, &psi.samples, q + u / 2.0),
                fourier_interp(grid, &psi.samples, q - u / 2.0),
            )
        })
        .collect();
    let mut acc = Complex64::new(0.0, 0.0);
    for (j, (plus, minus)) in interp_at.iter().enumerate() {
        let u = (j as f64 - m as f64 / 2.0) * du;
        acc += Complex64::from_polar(1.0, -u * p / grid.hbar) * plus * minus.conj();
    }
    acc * Complex64::new(du, 0.0)
}

// ---------------------------------------------------------------------------
// Minimal 2D grid support (n = 2): Kronecker-product operators, degree-<=2
// quantization, and the exact propagator. Sizes stay small (dense eig).
// ---------------------------------------------------------------------------

/// A square 2D grid, m x m points per axis.
#[derive(Debug, Clone)]
pub struct Grid2D {
    pub axis: Grid1D,
}

impl Grid2D {
    pub fn new(m: usize, length: f64, hbar: f64) -> Self {
        Grid2D { axis: Grid1D::new(m, length, hbar) }
    }

    pub fn size(&self) -> usize {
        self.axis.n_points * self.axis.n_points
    }

    fn kron(a: &CMat, b: &CMat) -> CMat {
        a.kronecker(b)
    }

    /// Position and momentum operators (Q1, Q2, P1, P2) as dense matrices
    /// on the tensor-product grid (axis 1 is the slow index).
    pub fn operators(&self) -> [CMat; 4] {
        let m = self.axis.n_points;
        let id = CMat::identity(m, m);
        let q = self.axis.position_matrix();
        let p = self.axis.momentum_matrix();
        [
            Self::kron(&q, &id),
            Self::kron(&id, &q),
            Self::kron(&p, &id),
            Self::kron(&id, &p),
        ]
    }

    /// Quantize 1/2 (G q.q + 2 L q.p + K p.p) with symmetrized cross terms.
    pub fn quantize_hamiltonian(&self, h: &QuadraticHamiltonian, t: f64) -> CMat {
        assert_eq!(h.dim(), 2);
        let b = h.blocks(t);
        let [q1, q2, p1, p2] = self.operators();
        let qs = [q1, q2];
        let ps = [p1, p2];
        let sz = self.size();
        let mut m = CMat::zeros(sz, sz);
        for i in 0..2 {
            for j in 0..2 {
                m += &qs[i] * &qs[j] * Complex64::new(0.5 * b.g[(i, j)], 0.0);
                m += &ps[i] * &ps[j] * Complex64::new(0.5 * b.k[(i, j)], 0.0);
                // L q.p with Weyl (symmetric) ordering
                m += (&qs[j] * &ps[i] + &ps[i] * &qs[j])
                    * Complex64::new(0.5 * b.l[(i, j)], 0.0);
            }
        }
        (m.adjoint() + m) * Complex64::new(0.5, 0.0)
    }

    /// Sample a 2D Gaussian state on the tensor grid (axis-1 slow).
    pub fn sample_gaussian(&self, s: &GaussianState) -> CVec {
        assert_eq!(s.dim(), 2);
        let xs = self.axis.xs();
        let m = self.axis.n_points;
        let mut pts = Vec::with_capacity(m * m);
        for i in 0..m {
            for j in 0..m {
                pts.push(RVec::from_vec(vec![xs[i], xs[j]]));
            }
        }
        CVec::from_vec(s.wavefunction(&pts))
    }

    /// Exact propagator exp(-i t H / hbar) on the tensor grid (constant H).
    pub fn propagator(&self, h: &QuadraticHamiltonian, t: f64) -> CMat {
        let hm = self.quantize_hamiltonian(h, 0.0);
        let (ev, v) = herm_eig(&hm);
        let d = CMat::from_diagonal(
            &ev.map(|e| Complex64::from_polar(1.0, -e * t / self.axis.hbar)),
        );
        &v * d * v.adjoint()
    }

    pub fn inner(&self, a: &CVec, b: &CVec) -> Complex64 {
        let dx = self.axis.dx();
        a.dotc(b) * Complex64::new(dx * dx, 0.0)
    }
}

/// Coherent-state matrix element <phi_{z'} | M phi_z> on the grid.
pub fn coherent_matrix_element(
    grid: &Grid1D,
    m: &CMat,
    z_out: &PhasePoint,
    z_in: &PhasePoint,
) -> Complex64 {
    let bra = GridWavefunction::from_gaussian(grid, &GaussianState::coherent(z_out.clone(), grid.hbar));
    let ket = GridWavefunction::from_gaussian(grid, &GaussianState::coherent(z_in.clone(), grid.hbar));
    let m_ket = GridWavefunction { grid: grid.clone(), samples: m * &ket.samples };
    bra.inner(&m_ket)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ONE;
    use crate::symcore::flow;
    use std::f64::consts::PI;

    fn grid() -> Grid1D {
        Grid1D::new(256, 20.0, 1.0)
    }

    #[test]
    fn quantize_q_squared_is_diagonal() {
        let g = grid();
        let op = quantize_quadratic(&QuadPoly { cqq: 1.0, ..Default::default() }, &g);
        let xs = g.xs();
        for i in 0..g.n_points {
            for j in 0..g.n_points {
                let want = if i == j {
                    Complex64::new(xs[i] * xs[i], 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                };
                assert!((op.matrix[(i, j)] - want).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn quantize_qp_is_symmetrized() {
        let g = Grid1D::new(64, 16.0, 1.0);
        let op = quantize_quadratic(&QuadPoly { cqp: 1.0, ..Default::default() }, &g);
        let q = g.position_matrix();
        let p = g.momentum_matrix();
        let want = (&q * &p + &p * &q) * Complex64::new(0.5, 0.0);
        assert!((op.matrix - want).norm() < 1e-10);
    }

    #[test]
    fn ho_ground_energy() {
        let g = grid();
        let op = quantize_quadratic(
            &QuadPoly { cqq: 0.5, cpp: 0.5, ..Default::default() },
            &g,
        );
        let (ev, _) = herm_eig(&op.matrix);
        assert!((ev[0] - 0.5).abs() < 1e-6, "lowest eigenvalue {}", ev[0]);
    }

    #[test]
    fn symbol_round_trip_smooth() {
        // quantize then recover a smooth decaying symbol; interior points
        // and modest momenta (the recovery is exact for half-band kernels).
        let g = Grid1D::new(128, 18.0, 1.0);
        let f = |q: f64, p: f64| {
            Complex64::new((1.0 + q * p) * (-(q * q + p * p) / 2.0).exp(), 0.0)
        };
        let op = quantize_samples(f, &g);
        let sym = symbol_from_kernel(&op);
        let xs = g.xs();
        let ps = g.ps();
        for i in (g.n_points / 4)..(3 * g.n_points / 4) {
            for m in 0..g.n_points {
                if ps[m].abs() > 4.0 {
                    continue;
                }
                let want = f(xs[i], ps[m]);
                assert!(
                    (sym[(i, m)] - want).norm() < 5e-8,
                    "mismatch at ({i},{m}): {} vs {want}",
                    sym[(i, m)]
                );
            }
        }
    }

    #[test]
    fn covariant_of_gaussian_symbol() {
        // A(X) = e^{-|X|^2}: symplectic FT is again a Gaussian,
        // A#(X) = (2 pi hbar)^{-1} pi e^{-|X|^2/4} (J-invariant radial case).
        let pg = PhaseGrid::symmetric(128, 8.0);
        let samples = pg.sample(|q, p| Complex64::new((-(q * q + p * p)).exp(), 0.0));
        for (xq, xp) in [(0.0, 0.0), (1.0, 0.5), (-0.7, 1.2)] {
            let x = PhasePoint::from_qp(&[xq], &[xp]).unwrap();
            let got = covariant_from_contravariant(&samples, &pg, 1.0, &x);
            let want = 0.5 * (-(xq * xq + xp * xp) / 4.0).exp();
            assert!(
                (got - Complex64::new(want, 0.0)).norm() < 1e-9,
                "at ({xq},{xp}): {got} vs {want}"
            );
        }
    }

    #[test]
    fn parity_symbol_matches_kernel_route() {
        let g = Grid1D::new(128, 18.0, 1.0);
        // a Hermitian operator with decaying kernel: the ground projector
        let phi0 = GridWavefunction::from_gaussian(&g, &GaussianState::ground(1, 1.0));
        let mut proj = CMat::zeros(128, 128);
        for i in 0..128 {
            for j in 0..128 {
                proj[(i, j)] = phi0.samples[i] * phi0.samples[j].conj() * g.dx();
            }
        }
        let op = GridOperator { grid: g.clone(), matrix: proj };
        let sym = symbol_from_kernel(&op);
        let xs = g.xs();
        let ps = g.ps();
        for (i, m) in [(64usize, 0usize), (70, 3), (60, 125)] {
            let x = PhasePoint::from_qp(&[xs[i]], &[ps[m]]).unwrap();
            let via_parity = parity_symbol(&op, &x);
            assert!(
                (via_parity - sym[(i, m)]).norm() < 1e-9,
                "parity {via_parity} vs kernel {}",
                sym[(i, m)]
            );
            // Hermitian operator -> real symbol
            assert!(via_parity.im.abs() < 1e-10);
        }
        // ground-state projector symbol is the Wigner Gaussian 2 e^{-|X|^2}
        let x0 = PhasePoint::zeros(1);
        assert!((parity_symbol(&op, &x0) - Complex64::new(2.0, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn parity_symbol_of_gaussian_symbol_operator() {
        let g = Grid1D::new(128, 18.0, 1.0);
        let f = |q: f64, p: f64| Complex64::new((-(q * q + p * p) / 2.0).exp(), 0.0);
        let op = quantize_samples(f, &g);
        let xs = g.xs();
        let ps = g.ps();
        for (i, m) in [(64usize, 0usize), (72, 2), (58, 126)] {
            let x = PhasePoint::from_qp(&[xs[i]], &[ps[m]]).unwrap();
            let got = parity_symbol(&op, &x);
            assert!(
                (got - f(xs[i], ps[m])).norm() < 1e-8,
                "parity symbol {got} vs {}",
                f(xs[i], ps[m])
            );
        }
    }

    #[test]
    fn trace_pairing_dual_routes() {
        let g = Grid1D::new(96, 16.0, 1.0);
        let pg = PhaseGrid::symmetric(160, 7.0);
        let gauss = |q: f64, p: f64| Complex64::new((-(q * q + p * p)).exp(), 0.0);
        let (t1, t2) = trace_pairing(gauss, gauss, &g, &pg);
        assert!((t1 - t2).norm() < 1e-6, "trace {t1} vs integral {t2}");
        // odd x even -> 0
        let odd = |q: f64, p: f64| Complex64::new(q * (-(q * q + p * p)).exp(), 0.0);
        let (t1, t2) = trace_pairing(odd, gauss, &g, &pg);
        assert!(t1.norm() < 1e-8 && t2.norm() < 1e-8);
    }

    #[test]
    fn ho_propagator_full_period() {
        let g = grid();
        let h = QuadraticHamiltonian::harmonic(1, 1.0);
        let psi0 = GridWavefunction::from_gaussian(&g, &GaussianState::ground(1, 1.0));
        let psi = grid_propagate(&h, &psi0, 0.0, 2.0 * PI, 1).unwrap();
        let diff: f64 = (&psi.samples + &psi0.samples).norm() * g.dx().sqrt();
        assert!(diff < 1e-6, "psi(2pi) != -psi(0), diff {diff}");
        assert!((psi.norm() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn free_particle_variance_growth() {
        let g = grid();
        let h = QuadraticHamiltonian::free(1, 1.0);
        let psi0 = GridWavefunction::from_gaussian(&g, &GaussianState::ground(1, 1.0));
        let psi = grid_propagate(&h, &psi0, 0.0, 1.0, 1).unwrap();
        let xs = g.xs();
        let var: f64 = psi
            .samples
            .iter()
            .zip(xs.iter())
            .map(|(s, &x)| x * x * s.norm_sqr() * g.dx())
            .sum();
        // Gamma_1 = (1+i)/2: variance (1 + t^2)/2 = 1 at t = 1
        assert!((var - 1.0).abs() < 1e-8, "variance {var}");
    }

    #[test]
    fn zero_hamiltonian_keeps_state() {
        let g = grid();
        let h = QuadraticHamiltonian::zero(1, 1.0);
        let psi0 = GridWavefunction::from_gaussian(&g, &GaussianState::ground(1, 1.0));
        let psi = grid_propagate(&h, &psi0, 0.0, 2.0, 1).unwrap();
        assert!((&psi.samples - &psi0.samples).norm() < 1e-12);
    }

    #[test]
    fn weyl_translate_matches_closed_form() {
        let g = grid();
        let psi0 = GridWavefunction::from_gaussian(&g, &GaussianState::ground(1, 1.0));
        let z = PhasePoint::from_qp(&[0.8], &[-0.5]).unwrap();
        let shifted = weyl_translate(&psi0, &z);
        let want =
            GridWavefunction::from_gaussian(&g, &GaussianState::coherent(z.clone(), 1.0));
        assert!(((&shifted.samples - &want.samples).norm() * g.dx().sqrt()) < 1e-10);
        let m = weyl_translate_matrix(&g, &z);
        assert!(((m * &psi0.samples) - &shifted.samples).norm() < 1e-9);
    }

    #[test]
    fn mean_value_identity_and_position() {
        let g = grid();
        let phi0 = GridWavefunction::from_gaussian(&g, &GaussianState::ground(1, 1.0));
        // identity has covariant symbol 2 pi hbar delta(X); smeared route:
        // use A = q instead. Covariant symbol of multiplication-by-q is the
        // distribution whose pairing reproduces <phi|q phi>; test with the
        // Gaussian-projector observable instead, whose covariant symbol is
        // e^{-|X|^2/4} (computed in closed form from <phi_0|T(-X)|phi_0>).
        let acov = |q: f64, p: f64| {
            // covariant symbol of |phi_0><phi_0| is <phi_0|T(-X)phi_0>... up
            // to conventions; equals e^{-|X|^2/4} with a symplectic phase 0.
            Complex64::new((-(q * q + p * p) / 4.0).exp(), 0.0)
        };
        let pg = PhaseGrid::symmetric(60, 6.0);
        let got = mean_value(acov, &pg, &phi0, &phi0);
        // <phi_0| |phi_0><phi_0| |phi_0> = 1
        assert!((got - ONE).norm() < 1e-6, "got {got}");
        // expectation of q on a coherent state
        let z = PhasePoint::from_qp(&[0.6], &[0.3]).unwrap();
        let phiz = GridWavefunction::from_gaussian(&g, &GaussianState::coherent(z, 1.0));
        let opq = quantize_quadratic(&QuadPoly { cq: 1.0, ..Default::default() }, &g);
        let expect = phiz.inner(&opq.apply(&phiz));
        assert!((expect - Complex64::new(0.6, 0.0)).norm() < 1e-9);
        assert!((phiz.norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn exact_egorov_single_case() {
        // <psi_t| A psi_t> = <psi_0| (A o F_t)^ psi_0> for A = q^2, HO flow.
        let g = grid();
        let h = QuadraticHamiltonian::harmonic(1, 1.0);
        let t = 0.9;
        let psi0 = GridWavefunction::from_gaussian(
            &g,
            &GaussianState::coherent(PhasePoint::from_qp(&[0.7], &[-0.2]).unwrap(), 1.0),
        );
        let psi_t = grid_propagate(&h, &psi0, 0.0, t, 1).unwrap();
        let a = QuadPoly { cqq: 1.0, ..Default::default() };
        let lhs = psi_t.inner(&quantize_quadratic(&a, &g).apply(&psi_t));
        let path = flow(&h, 0.0, t, 64).unwrap();
        let a_flow = a.compose_linear(path.endpoint().matrix());
        let rhs = psi0.inner(&quantize_quadratic(&a_flow, &g).apply(&psi0));
        assert!((lhs - rhs).norm() < 1e-8, "Egorov violated: {lhs} vs {rhs}");
    }

    #[test]
    fn wigner_grid_matches_closed_form() {
        let g = grid();
        let s = GaussianState::ground(1, 1.0);
        let psi = GridWavefunction::from_gaussian(&g, &s);
        for (q, p) in [(0.0, 0.0), (0.5, -0.3)] {
            let w = wigner_grid(&psi, q, p);
            let want = 2.0 * (-(q * q + p * p)).exp();
            assert!((w - Complex64::new(want, 0.0)).norm() < 1e-6);
        }
    }

    #[test]
    fn grid2d_ho_ground_energy_and_propagation() {
        let g2 = Grid2D::new(32, 14.0, 1.0);
        let h = QuadraticHamiltonian::harmonic(2, 1.0);
        let hm = g2.quantize_hamiltonian(&h, 0.0);
        let (ev, _) = herm_eig(&hm);
        // 2D HO ground energy = 1
        assert!((ev[0] - 1.0).abs() < 1e-5, "ground energy {}", ev[0]);
        // phase at t: e^{-i t} on the ground state
        let s0 = GaussianState::ground(2, 1.0);
        let v0 = g2.sample_gaussian(&s0);
        let t = 0.7;
        let u = g2.propagator(&h, t);
        let vt = u * &v0;
        let ov = g2.inner(&v0, &vt);
        assert!((ov - Complex64::from_polar(1.0, -t)).norm() < 1e-5, "overlap {ov}");
    }
}
