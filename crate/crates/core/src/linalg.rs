//! Dense complex matrices sized for the 2-, 4- and 16-dimensional objects
//! in this crate, plus a cyclic Jacobi eigensolver for Hermitian input.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Hermiticity tolerance applied on entry to the eigensolver and PSD test.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Default PSD threshold: minimum eigenvalue ≥ −`PSD_TOL`.
pub const PSD_TOL: f64 = 1e-10;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub const I: C64 = C64 { re: 0.0, im: 1.0 };

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Row-major dense complex matrix.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

/// Which tensor factor a partial operation acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    First,
    Second,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { ONE } else { ZERO })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: format!("{} entries", rows * cols),
                got: format!("{} entries", data.len()),
            });
        }
        Ok(Self { rows, cols, data })
    }

    /// Build from nested rows of real entries.
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let n = rows.len();
        let m = rows.first().map_or(0, |r| r.len());
        Self::from_fn(n, m, |i, j| c(rows[i][j], 0.0))
    }

    pub fn diag(values: &[C64]) -> Self {
        let n = values.len();
        Self::from_fn(n, n, |i, j| if i == j { values[i] } else { ZERO })
    }

    pub fn diag_real(values: &[f64]) -> Self {
        let n = values.len();
        Self::from_fn(n, n, |i, j| if i == j { c(values[i], 0.0) } else { ZERO })
    }

    /// |u⟩⟨v|
    pub fn outer(u: &[C64], v: &[C64]) -> Self {
        Self::from_fn(u.len(), v.len(), |i, j| u[i] * v[j].conj())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[C64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(c(s, 0.0))
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Largest entrywise modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `self - other`; infinite on shape mismatch.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.rows != other.rows || self.cols != other.cols {
            return f64::INFINITY;
        }
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> f64 {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows;
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_deviation() <= tol
    }

    /// Tr(A† B), the Hilbert–Schmidt inner product.
    pub fn hs_inner(&self, other: &Self) -> C64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                expected: format!("{} rows", self.cols),
                got: format!("{} rows", other.rows),
            });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                let row = &other.data[k * other.cols..(k + 1) * other.cols];
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[C64]) -> Result<Vec<C64>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: format!("vector of length {}", self.cols),
                got: format!("length {}", v.len()),
            });
        }
        Ok((0..self.rows)
            .map(|i| {
                self.data[i * self.cols..(i + 1) * self.cols]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect())
    }

    /// ⟨u| A |v⟩
    pub fn sandwich(&self, u: &[C64], v: &[C64]) -> Result<C64> {
        let av = self.mul_vec(v)?;
        if u.len() != av.len() {
            return Err(Error::DimensionMismatch {
                expected: format!("vector of length {}", av.len()),
                got: format!("length {}", u.len()),
            });
        }
        Ok(u.iter().zip(&av).map(|(a, b)| a.conj() * b).sum())
    }

    /// Kronecker product; dimensions multiply.
    pub fn kron(&self, other: &Self) -> Self {
        let (r2, c2) = (other.rows, other.cols);
        Self::from_fn(self.rows * r2, self.cols * c2, |i, j| {
            self[(i / r2, j / c2)] * other[(i % r2, j % c2)]
        })
    }

    /// Transpose one factor of a `(dim_a·dim_b)`-square bipartite operator.
    pub fn partial_transpose(&self, dim_a: usize, dim_b: usize, which: Subsystem) -> Result<Self> {
        let n = dim_a * dim_b;
        if self.rows != n || self.cols != n {
            return Err(Error::DimensionMismatch {
                expected: format!("{n}x{n}"),
                got: format!("{}x{}", self.rows, self.cols),
            });
        }
        Ok(Self::from_fn(n, n, |i, j| {
            let (i1, i2) = (i / dim_b, i % dim_b);
            let (j1, j2) = (j / dim_b, j % dim_b);
            match which {
                Subsystem::First => self[(j1 * dim_b + i2, i1 * dim_b + j2)],
                Subsystem::Second => self[(i1 * dim_b + j2, j1 * dim_b + i2)],
            }
        }))
    }

    /// Diagonal block `(a, b)` of size `block` (the operator coefficient of |a⟩⟨b| ⊗ ·).
    pub fn block(&self, a: usize, b: usize, block: usize) -> Self {
        Self::from_fn(block, block, |i, j| self[(a * block + i, b * block + j)])
    }

    pub fn set_block(&mut self, a: usize, b: usize, m: &Self) {
        for i in 0..m.rows {
            for j in 0..m.cols {
                self[(a * m.rows + i, b * m.cols + j)] = m[(i, j)];
            }
        }
    }

    fn check_same_shape(&self, other: &Self) {
        assert!(
            self.rows == other.rows && self.cols == other.cols,
            "shape mismatch: {}x{} vs {}x{}",
            self.rows,
            self.cols,
            other.rows,
            other.cols
        );
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.check_same_shape(rhs);
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.check_same_shape(rhs);
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

/// Panics on inner-dimension mismatch; use [`ComplexMatrix::matmul`] for a checked product.
impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs).expect("matrix product dimension mismatch")
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kron(b)
}

pub fn kron_vec(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter()
        .flat_map(|x| b.iter().map(move |y| x * y))
        .collect()
}

pub fn partial_transpose(
    rho: &ComplexMatrix,
    dim_a: usize,
    dim_b: usize,
    subsystem: Subsystem,
) -> Result<ComplexMatrix> {
    rho.partial_transpose(dim_a, dim_b, subsystem)
}

pub fn vec_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn inner(u: &[C64], v: &[C64]) -> C64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

/// Eigenvalues in descending order with orthonormal eigenvectors as columns.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl Spectrum {
    pub fn min(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    /// U Λ U†
    pub fn reconstruct(&self) -> ComplexMatrix {
        let u = &self.eigenvectors;
        let n = u.rows();
        ComplexMatrix::from_fn(n, n, |i, j| {
            (0..self.eigenvalues.len())
                .map(|k| u[(i, k)] * u[(j, k)].conj() * self.eigenvalues[k])
                .sum()
        })
    }

    /// Number of eigenvalues with modulus above `tol`.
    pub fn rank(&self, tol: f64) -> usize {
        self.eigenvalues.iter().filter(|x| x.abs() > tol).count()
    }
}

const JACOBI_MAX_SWEEPS: usize = 100;

/// Hermitian eigendecomposition by cyclic complex Jacobi rotations.
pub fn hermitian_eigen(a: &ComplexMatrix) -> Result<Spectrum> {
    let deviation = a.hermiticity_deviation();
    if deviation > HERMITIAN_TOL {
        return Err(Error::NotHermitian { deviation });
    }
    let n = a.rows();
    // Symmetrize so round-off in the input does not leak into the rotations.
    let mut m = ComplexMatrix::from_fn(n, n, |i, j| 0.5 * (a[(i, j)] + a[(j, i)].conj()));
    let mut v = ComplexMatrix::identity(n);
    let scale = m.max_abs().max(f64::MIN_POSITIVE);

    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)].norm_sqr())
            .sum();
        if off.sqrt() <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                let r = apq.norm();
                if r <= 1e-300 || r <= 1e-17 * scale {
                    continue;
                }
                let phase = apq / r;
                let app = m[(p, p)].re;
                let aqq = m[(q, q)].re;
                let theta = (aqq - app) / (2.0 * r);
                let t = if theta == 0.0 {
                    1.0
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let cs = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * cs;
                // G restricted to (p, q): [[c, s], [-s·e^{-iφ}, c·e^{-iφ}]]
                let g_pp = c(cs, 0.0);
                let g_pq = c(sn, 0.0);
                let g_qp = -phase.conj() * sn;
                let g_qq = phase.conj() * cs;

                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = mkp * g_pp + mkq * g_qp;
                    m[(k, q)] = mkp * g_pq + mkq * g_qq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = g_pp.conj() * mpk + g_qp.conj() * mqk;
                    m[(q, k)] = g_pq.conj() * mpk + g_qq.conj() * mqk;
                }
                m[(p, q)] = ZERO;
                m[(q, p)] = ZERO;
                m[(p, p)] = c(m[(p, p)].re, 0.0);
                m[(q, q)] = c(m[(q, q)].re, 0.0);
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * g_pp + vkq * g_qp;
                    v[(k, q)] = vkp * g_pq + vkq * g_qq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(j, j)].re.total_cmp(&m[(i, i)].re));
    let eigenvalues = order.iter().map(|&k| m[(k, k)].re).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    Ok(Spectrum {
        eigenvalues,
        eigenvectors,
    })
}

/// Eigenvalues only, descending.
pub fn eigenvalues_hermitian(a: &ComplexMatrix) -> Result<Vec<f64>> {
    Ok(hermitian_eigen(a)?.eigenvalues)
}

/// True iff the minimum eigenvalue is ≥ −tol.
pub fn is_psd(a: &ComplexMatrix, tol: f64) -> Result<bool> {
    Ok(hermitian_eigen(a)?.min() >= -tol)
}

/// Largest singular value, from the top eigenvalue of A†A.
pub fn operator_norm(a: &ComplexMatrix) -> f64 {
    let gram = &a.adjoint() * a;
    hermitian_eigen(&gram)
        .map(|s| s.max().max(0.0).sqrt())
        .unwrap_or(f64::NAN)
}

/// Sort a copy ascending; spectra are compared as multisets this way.
pub fn sorted(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Max deviation between two spectra compared as multisets.
pub fn multiset_distance(a: &[f64], b: &[f64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    sorted(a)
        .iter()
        .zip(sorted(b))
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sigma3() -> ComplexMatrix {
        ComplexMatrix::diag_real(&[1.0, -1.0])
    }

    fn flip2() -> ComplexMatrix {
        ComplexMatrix::from_fn(4, 4, |i, j| {
            let (a, b) = (i / 2, i % 2);
            if j == b * 2 + a {
                ONE
            } else {
                ZERO
            }
        })
    }

    fn p_plus2() -> ComplexMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let v = vec![c(s, 0.0), ZERO, ZERO, c(s, 0.0)];
        ComplexMatrix::outer(&v, &v)
    }

    #[test]
    fn kron_of_identities_and_diagonals() {
        let id = ComplexMatrix::identity(2);
        assert_eq!(kron(&id, &id), ComplexMatrix::identity(4));
        let zz = kron(&sigma3(), &sigma3());
        assert_eq!(zz, ComplexMatrix::diag_real(&[1.0, -1.0, -1.0, 1.0]));
        assert_eq!((zz.rows(), zz.cols()), (4, 4));
    }

    #[test]
    fn partial_transpose_of_bell_projector_is_half_flip() {
        let pt = p_plus2().partial_transpose(2, 2, Subsystem::First).unwrap();
        assert!(pt.max_abs_diff(&flip2().scale_real(0.5)) < 1e-15);
        let back = pt.partial_transpose(2, 2, Subsystem::First).unwrap();
        assert!(back.max_abs_diff(&p_plus2()) < 1e-15);
        assert!(!is_psd(&pt, PSD_TOL).unwrap());
        assert!((hermitian_eigen(&pt).unwrap().min() + 0.5).abs() < 1e-12);
    }

    #[test]
    fn partial_transpose_of_product_transposes_one_factor() {
        let a = ComplexMatrix::from_fn(2, 2, |i, j| c(i as f64 + 1.0, j as f64 - 0.5));
        let b = ComplexMatrix::from_fn(3, 3, |i, j| c((i * j) as f64, 1.0 + i as f64));
        let ab = kron(&a, &b);
        let first = ab.partial_transpose(2, 3, Subsystem::First).unwrap();
        assert!(first.max_abs_diff(&kron(&a.transpose(), &b)) < 1e-14);
        let second = ab.partial_transpose(2, 3, Subsystem::Second).unwrap();
        assert!(second.max_abs_diff(&kron(&a, &b.transpose())) < 1e-14);
    }

    #[test]
    fn partial_transpose_rejects_bad_dims() {
        let m = ComplexMatrix::identity(5);
        assert!(matches!(
            m.partial_transpose(2, 2, Subsystem::First),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn eigen_of_small_cases() {
        let s = hermitian_eigen(&sigma3()).unwrap();
        assert_eq!(s.eigenvalues.len(), 2);
        assert!((s.eigenvalues[0] - 1.0).abs() < 1e-14 && (s.eigenvalues[1] + 1.0).abs() < 1e-14);

        let v = hermitian_eigen(&flip2()).unwrap();
        assert!(multiset_distance(&v.eigenvalues, &[1.0, 1.0, 1.0, -1.0]) < 1e-12);
        assert!(v.reconstruct().max_abs_diff(&flip2()) < 1e-10);
    }

    #[test]
    fn eigen_of_rank_one_projector_in_16_dims() {
        let v: Vec<C64> = (0..16).map(|i| if i % 5 == 0 { c(0.5, 0.0) } else { ZERO }).collect();
        let p = ComplexMatrix::outer(&v, &v);
        let s = hermitian_eigen(&p).unwrap();
        assert!((s.eigenvalues[0] - 1.0).abs() < 1e-12);
        assert!(s.eigenvalues[1..].iter().all(|x| x.abs() < 1e-12));
    }

    #[test]
    fn eigen_handles_complex_offdiagonals() {
        let a = ComplexMatrix::from_fn(3, 3, |i, j| match (i, j) {
            (0, 1) => c(0.3, 0.7),
            (1, 0) => c(0.3, -0.7),
            (1, 2) => c(-0.2, 0.4),
            (2, 1) => c(-0.2, -0.4),
            (i, j) if i == j => c(i as f64, 0.0),
            _ => ZERO,
        });
        let s = hermitian_eigen(&a).unwrap();
        assert!(s.reconstruct().max_abs_diff(&a) < 1e-12);
        let gram = &s.eigenvectors.adjoint() * &s.eigenvectors;
        assert!(gram.max_abs_diff(&ComplexMatrix::identity(3)) < 1e-12);
        let sum: f64 = s.eigenvalues.iter().sum();
        assert!((sum - a.trace().re).abs() < 1e-12);
    }

    #[test]
    fn non_hermitian_input_is_rejected() {
        let a = ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[0.0, 1.0]]);
        assert!(matches!(hermitian_eigen(&a), Err(Error::NotHermitian { .. })));
        assert!(is_psd(&a, PSD_TOL).is_err());
    }

    #[test]
    fn psd_basic() {
        assert!(is_psd(&ComplexMatrix::identity(3), PSD_TOL).unwrap());
        assert!(!is_psd(&ComplexMatrix::diag_real(&[1.0, -0.5]), 1e-10).unwrap());
    }

    #[test]
    fn operator_norm_of_scaled_pauli() {
        let s = sigma3().scale_real(std::f64::consts::FRAC_1_SQRT_2);
        assert!((operator_norm(&s).powi(2) - 0.5).abs() < 1e-12);
    }
}
