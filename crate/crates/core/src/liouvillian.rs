//! Dense Lindblad generator over column-stacked density matrices.
//!
//! Entry `(r, c)` of ρ sits at flat index `c * dim + r`. Under this stacking
//! `vec(A ρ B) = (Bᵀ ⊗ A) vec(ρ)`, which fixes every Kronecker factor below.

use faer::{Col, Mat, Side};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{BasisIndex, JumpChannel};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Flat index of entry `(row, col)` under column stacking.
#[inline]
pub fn stacked_index(dim: usize, row: usize, col: usize) -> usize {
    col * dim + row
}

/// Density matrix over the `g, p, 1..N` basis.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: Mat<Complex64>,
}

impl DensityMatrix {
    pub fn new(matrix: Mat<Complex64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                found: matrix.ncols(),
            });
        }
        Ok(Self { matrix })
    }

    /// Pure basis state |a⟩⟨a|.
    pub fn basis_state(dim: usize, a: BasisIndex) -> Self {
        let mut matrix = Mat::zeros(dim, dim);
        matrix[(a.index(), a.index())] = ONE;
        Self { matrix }
    }

    pub fn vacuum(dim: usize) -> Self {
        Self::basis_state(dim, BasisIndex::Vacuum)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &Mat<Complex64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> Mat<Complex64> {
        self.matrix
    }

    #[inline]
    pub fn get(&self, a: BasisIndex, b: BasisIndex) -> Complex64 {
        self.matrix[(a.index(), b.index())]
    }

    #[inline]
    pub fn population(&self, a: BasisIndex) -> f64 {
        self.get(a, a).re
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim()).map(|k| self.matrix[(k, k)]).sum()
    }

    /// max |ρ_ij − conj(ρ_ji)|.
    pub fn hermiticity_error(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for j in 0..d {
            for i in 0..=j {
                worst = worst.max((self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let h = self.hermitian_part();
        h.self_adjoint_eigenvalues(Side::Lower)
            .map_err(|e| Error::Linalg(format!("{e:?}")))
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.eigenvalues()?[0])
    }

    pub fn hermitian_part(&self) -> Mat<Complex64> {
        let d = self.dim();
        Mat::from_fn(d, d, |i, j| {
            (self.matrix[(i, j)] + self.matrix[(j, i)].conj()) * 0.5
        })
    }

    pub fn to_vec(&self) -> Col<Complex64> {
        let d = self.dim();
        Col::from_fn(d * d, |k| self.matrix[(k % d, k / d)])
    }

    pub fn from_vec(dim: usize, v: &Col<Complex64>) -> Result<Self> {
        if v.nrows() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: v.nrows(),
            });
        }
        Ok(Self {
            matrix: unstack(dim, v),
        })
    }

    /// Symmetrises, clips eigenvalues in [−1e-10, 0) to zero and renormalises
    /// the trace. Eigenvalues below −1e-10 are rejected.
    pub fn repair(&self) -> Result<Self> {
        let h = self.hermitian_part();
        let evd = h
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::Linalg(format!("{e:?}")))?;
        let s = evd.S().column_vector();
        let u = evd.U();
        let d = self.dim();
        let min = (0..d).map(|k| s[k].re).fold(f64::INFINITY, f64::min);
        if min < -1e-10 {
            return Err(Error::NegativeEigenvalue(min));
        }
        if min >= 0.0 {
            let tr = self.trace().re;
            return Ok(Self {
                matrix: h.map(|z| z / tr),
            });
        }
        let clipped: Vec<f64> = (0..d).map(|k| s[k].re.max(0.0)).collect();
        let total: f64 = clipped.iter().sum();
        let mut out = Mat::zeros(d, d);
        for (k, &lam) in clipped.iter().enumerate() {
            if lam == 0.0 {
                continue;
            }
            let w = lam / total;
            for j in 0..d {
                let uj = u[(j, k)].conj() * w;
                for i in 0..d {
                    out[(i, j)] += u[(i, k)] * uj;
                }
            }
        }
        Ok(Self { matrix: out })
    }
}

pub(crate) fn unstack(dim: usize, v: &Col<Complex64>) -> Mat<Complex64> {
    Mat::from_fn(dim, dim, |r, c| v[stacked_index(dim, r, c)])
}

/// The generator L acting on column-stacked density matrices, in ps⁻¹.
#[derive(Debug, Clone)]
pub struct Superoperator {
    matrix: Mat<Complex64>,
    dim: usize,
}

impl Superoperator {
    pub fn from_matrix(dim: usize, matrix: Mat<Complex64>) -> Result<Self> {
        if matrix.nrows() != dim * dim || matrix.ncols() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: matrix.nrows(),
            });
        }
        Ok(Self { matrix, dim })
    }

    /// Hilbert-space dimension (the superoperator is dim² × dim²).
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &Mat<Complex64> {
        &self.matrix
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.matrix.norm_l2()
    }

    /// Largest |Σ_k L[k·d+k, j]| over columns j, i.e. the deviation of
    /// ⟨⟨I| L from zero.
    pub fn trace_row_defect(&self) -> f64 {
        let d = self.dim;
        (0..d * d)
            .map(|j| {
                (0..d)
                    .map(|k| self.matrix[(stacked_index(d, k, k), j)])
                    .sum::<Complex64>()
                    .norm()
            })
            .fold(0.0, f64::max)
    }
}

/// Nonzero entries of a dense matrix.
fn nonzeros(m: &Mat<Complex64>) -> Vec<(usize, usize, Complex64)> {
    let mut out = Vec::new();
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let z = m[(i, j)];
            if z != ZERO {
                out.push((i, j, z));
            }
        }
    }
    out
}

/// out += alpha · (A ⊗ B), visiting only nonzero pairs.
fn add_kron(
    out: &mut Mat<Complex64>,
    alpha: Complex64,
    a: &[(usize, usize, Complex64)],
    b: &[(usize, usize, Complex64)],
    d: usize,
) {
    for &(ai, aj, av) in a {
        let s = alpha * av;
        for &(bi, bj, bv) in b {
            out[(ai * d + bi, aj * d + bj)] += s * bv;
        }
    }
}

fn identity_nonzeros(d: usize) -> Vec<(usize, usize, Complex64)> {
    (0..d).map(|k| (k, k, ONE)).collect()
}

/// Assembles L = −i(I⊗H − Hᵀ⊗I) + Σ γ [X̄⊗X − ½ I⊗X†X − ½ (X†X)ᵀ⊗I].
///
/// `h` must be in rad/ps.
pub fn build_liouvillian(h: &Mat<Complex64>, channels: &[JumpChannel]) -> Result<Superoperator> {
    let d = h.nrows();
    if h.ncols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: h.ncols(),
        });
    }
    for ch in channels {
        if ch.operator.nrows() != d || ch.operator.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: ch.operator.nrows(),
            });
        }
    }
    let mut l = Mat::zeros(d * d, d * d);
    let id = identity_nonzeros(d);
    let minus_i = Complex64::new(0.0, -1.0);

    let h_nz = nonzeros(h);
    let ht_nz: Vec<_> = h_nz.iter().map(|&(i, j, z)| (j, i, z)).collect();
    add_kron(&mut l, minus_i, &id, &h_nz, d);
    add_kron(&mut l, -minus_i, &ht_nz, &id, d);

    for ch in channels {
        if ch.rate == 0.0 {
            continue;
        }
        let gamma = Complex64::new(ch.rate, 0.0);
        let x = &ch.operator;
        let x_nz = nonzeros(x);
        let xbar_nz: Vec<_> = x_nz.iter().map(|&(i, j, z)| (i, j, z.conj())).collect();
        let xdx = x.adjoint() * x;
        let xdx_nz = nonzeros(&xdx);
        let xdx_t_nz: Vec<_> = xdx_nz.iter().map(|&(i, j, z)| (j, i, z)).collect();
        add_kron(&mut l, gamma, &xbar_nz, &x_nz, d);
        add_kron(&mut l, -0.5 * gamma, &id, &xdx_nz, d);
        add_kron(&mut l, -0.5 * gamma, &xdx_t_nz, &id, d);
    }
    Superoperator::from_matrix(d, l)
}

/// dρ/dt = L[ρ], reshaped to a dim × dim matrix (ps⁻¹).
pub fn apply_liouvillian(l: &Superoperator, rho: &DensityMatrix) -> Result<Mat<Complex64>> {
    if rho.dim() != l.dim() {
        return Err(Error::DimensionMismatch {
            expected: l.dim(),
            found: rho.dim(),
        });
    }
    let v = l.matrix() * rho.to_vec();
    Ok(unstack(l.dim(), &v))
}
