//! The Siegel space of complex symmetric matrices with positive-definite
//! imaginary part, and the symplectic Moebius action on it.

use crate::linalg::{det_c, herm_eig, symmetrize, to_c, CMat, IM};
use crate::symcore::SymplecticMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const SIEGEL_SYMMETRY_TOL: f64 = 1e-10;
pub const SIEGEL_POSITIVITY_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum SiegelError {
    #[error("matrix is not symmetric (residual {residual:.3e})")]
    NotSymmetric { residual: f64 },
    #[error("imaginary part is not positive definite (min eigenvalue {min_eig:.3e})")]
    NotPositive { min_eig: f64 },
    #[error("A + BZ is numerically singular (condition estimate {cond:.3e})")]
    NearSingular { cond: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// A point of the Siegel space: Gamma complex symmetric, Im Gamma > 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SiegelPoint {
    gamma: CMat,
}

impl SiegelPoint {
    pub fn new(gamma: CMat) -> Result<Self, SiegelError> {
        let rep = verify_siegel(&gamma);
        if !rep.pass {
            if rep.symmetry_residual > SIEGEL_SYMMETRY_TOL {
                return Err(SiegelError::NotSymmetric { residual: rep.symmetry_residual });
            }
            return Err(SiegelError::NotPositive { min_eig: rep.min_im_eigenvalue });
        }
        Ok(SiegelPoint { gamma })
    }

    /// The base point iI.
    pub fn base(n: usize) -> Self {
        SiegelPoint { gamma: CMat::identity(n, n) * IM }
    }

    pub fn dim(&self) -> usize {
        self.gamma.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.gamma
    }

    pub fn im(&self) -> crate::linalg::RMat {
        self.gamma.map(|c| c.im)
    }

    pub fn re(&self) -> crate::linalg::RMat {
        self.gamma.map(|c| c.re)
    }

    /// Smallest eigenvalue of Im Gamma.
    pub fn min_im_eigenvalue(&self) -> f64 {
        let im = to_c(&self.im());
        let (ev, _) = herm_eig(&im);
        ev.iter().cloned().fold(f64::INFINITY, f64::min)
    }
}

/// Diagnostic report for Siegel-space membership.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SiegelReport {
    pub symmetry_residual: f64,
    pub min_im_eigenvalue: f64,
    pub pass: bool,
}

/// Check the SiegelPoint invariants on an arbitrary square complex matrix.
pub fn verify_siegel(z: &CMat) -> SiegelReport {
    let sym = z - z.transpose();
    let symmetry_residual = sym.iter().fold(0.0_f64, |a, c| a.max(c.norm()));
    let im = to_c(&z.map(|c| c.im));
    let (ev, _) = herm_eig(&im);
    let min_im_eigenvalue = ev.iter().cloned().fold(f64::INFINITY, f64::min);
    SiegelReport {
        symmetry_residual,
        min_im_eigenvalue,
        pass: symmetry_residual <= SIEGEL_SYMMETRY_TOL
            && min_im_eigenvalue >= SIEGEL_POSITIVITY_TOL,
    }
}

/// The Moebius action of Sp(2n) on the Siegel space:
///   Z -> (C + DZ)(A + BZ)^{-1}.
/// Also returns det(A + BZ) so callers can track square-root branches.
pub fn moebius(
    f: &SymplecticMatrix,
    z: &SiegelPoint,
) -> Result<(SiegelPoint, Complex64), SiegelError> {
    let n = f.dim();
    if z.dim() != n {
        return Err(SiegelError::DimensionMismatch { expected: n, got: z.dim() });
    }
    let a = to_c(&f.block_a());
    let b = to_c(&f.block_b());
    let c = to_c(&f.block_c());
    let d = to_c(&f.block_d());
    let e = &a + &b * z.matrix();
    let det_e = det_c(&e);
    let lu = e.clone().lu();
    let e_inv = match lu.try_inverse() {
        Some(m) => m,
        None => return Err(SiegelError::NearSingular { cond: f64::INFINITY }),
    };
    let cond = e.norm() * e_inv.norm();
    if cond > 1e12 {
        return Err(SiegelError::NearSingular { cond });
    }
    let num = &c + &d * z.matrix();
    // Symmetrize to stop floating-point symmetry drift; the exact map
    // preserves symmetry.
    let out = symmetrize(&(num * e_inv));
    Ok((SiegelPoint::new(out)?, det_e))
}

/// Random Siegel point R + i P with symmetric R and P = S S^T + I, for tests.
pub fn random_siegel<R: rand::Rng>(n: usize, rng: &mut R) -> SiegelPoint {
    let r = crate::symcore::random_symmetric(n, 1.0, rng);
    let s = crate::symcore::random_symmetric(n, 0.7, rng);
    let p = &s * s.transpose() + crate::linalg::RMat::identity(n, n) * 0.3;
    SiegelPoint::new(to_c(&r) + to_c(&p) * IM).expect("constructed point is valid")
}
