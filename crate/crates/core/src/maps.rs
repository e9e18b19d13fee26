//! Linear maps on d×d matrices as superoperators, complete-positivity and
//! sufficient positivity tests, GKS generators and the two-qubit semigroups
//! γ¹_t, γ²_t and Γ_t = γ¹_t ⊗ γ²_t.
//!
//! Vectorization is column stacking: `vec(X)[i + d·j] = X[i][j]`, so the map
//! ρ ↦ AρB has superoperator `Bᵀ ⊗ A`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, hermitian_eigen, operator_norm, ComplexMatrix, Spectrum, C64, ONE, PSD_TOL, ZERO};
use crate::pauli::{pauli, PauliIndex};

pub fn vectorize(x: &ComplexMatrix) -> Vec<C64> {
    let d = x.rows();
    let mut v = vec![ZERO; d * x.cols()];
    for j in 0..x.cols() {
        for i in 0..d {
            v[i + d * j] = x[(i, j)];
        }
    }
    v
}

pub fn unvectorize(v: &[C64], d: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(d, v.len() / d, |i, j| v[i + d * j])
}

/// Matrix unit |i⟩⟨j| of size d.
pub fn matrix_unit(d: usize, i: usize, j: usize) -> ComplexMatrix {
    let mut e = ComplexMatrix::zeros(d, d);
    e[(i, j)] = ONE;
    e
}

/// A linear map on d×d matrices in the column-stacked representation.
#[derive(Debug, Clone, PartialEq)]
pub struct SuperOperator {
    dim: usize,
    matrix: ComplexMatrix,
}

impl SuperOperator {
    pub fn from_matrix(dim: usize, matrix: ComplexMatrix) -> Result<Self> {
        let n = dim * dim;
        if matrix.rows() != n || matrix.cols() != n {
            return Err(Error::DimensionMismatch {
                expected: format!("{n}x{n}"),
                got: format!("{}x{}", matrix.rows(), matrix.cols()),
            });
        }
        Ok(Self { dim, matrix })
    }

    /// Tabulate a map by its action on the matrix units.
    pub fn from_fn(dim: usize, f: impl Fn(&ComplexMatrix) -> ComplexMatrix) -> Self {
        let n = dim * dim;
        let mut matrix = ComplexMatrix::zeros(n, n);
        for j in 0..dim {
            for i in 0..dim {
                let col = vectorize(&f(&matrix_unit(dim, i, j)));
                for (r, z) in col.into_iter().enumerate() {
                    matrix[(r, i + dim * j)] = z;
                }
            }
        }
        Self { dim, matrix }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            matrix: ComplexMatrix::identity(dim * dim),
        }
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            matrix: ComplexMatrix::zeros(dim * dim, dim * dim),
        }
    }

    /// ρ ↦ A ρ B
    pub fn sandwich(a: &ComplexMatrix, b: &ComplexMatrix) -> Self {
        Self {
            dim: a.rows(),
            matrix: b.transpose().kron(a),
        }
    }

    /// T_d: ρ ↦ ρᵀ
    pub fn transposition(dim: usize) -> Self {
        Self::from_fn(dim, ComplexMatrix::transpose)
    }

    /// ρ ↦ Tr(ρ)·1_d
    pub fn trace_map(dim: usize) -> Self {
        Self::from_fn(dim, |x| ComplexMatrix::identity(dim).scale(x.trace()))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn apply(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        if x.rows() != self.dim || x.cols() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: format!("{0}x{0}", self.dim),
                got: format!("{}x{}", x.rows(), x.cols()),
            });
        }
        let v = self.matrix.mul_vec(&vectorize(x))?;
        Ok(unvectorize(&v, self.dim))
    }

    /// `self ∘ other`
    pub fn compose(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "composing maps of different dimension");
        Self {
            dim: self.dim,
            matrix: &self.matrix * &other.matrix,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "adding maps of different dimension");
        Self {
            dim: self.dim,
            matrix: &self.matrix + &other.matrix,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "subtracting maps of different dimension");
        Self {
            dim: self.dim,
            matrix: &self.matrix - &other.matrix,
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            dim: self.dim,
            matrix: self.matrix.scale_real(s),
        }
    }

    /// Λ_a ⊗ Λ_b acting on (d_a·d_b)×(d_a·d_b) matrices.
    pub fn tensor(a: &Self, b: &Self) -> Self {
        let (da, db) = (a.dim, b.dim);
        let d = da * db;
        let mut matrix = ComplexMatrix::zeros(d * d, d * d);
        let images_a: Vec<Vec<ComplexMatrix>> = (0..da)
            .map(|i| (0..da).map(|j| a.apply(&matrix_unit(da, i, j)).expect("dim")).collect())
            .collect();
        let images_b: Vec<Vec<ComplexMatrix>> = (0..db)
            .map(|i| (0..db).map(|j| b.apply(&matrix_unit(db, i, j)).expect("dim")).collect())
            .collect();
        for i in 0..d {
            for j in 0..d {
                let image = images_a[i / db][j / db].kron(&images_b[i % db][j % db]);
                for (r, z) in vectorize(&image).into_iter().enumerate() {
                    matrix[(r, i + d * j)] = z;
                }
            }
        }
        Self { dim: d, matrix }
    }

    /// (id_{dim_a} ⊗ Λ)[ρ] for ρ on C^{dim_a} ⊗ C^d.
    pub fn apply_on_second_factor(&self, rho: &ComplexMatrix, dim_a: usize) -> Result<ComplexMatrix> {
        let n = dim_a * self.dim;
        if rho.rows() != n || rho.cols() != n {
            return Err(Error::DimensionMismatch {
                expected: format!("{n}x{n}"),
                got: format!("{}x{}", rho.rows(), rho.cols()),
            });
        }
        let mut out = ComplexMatrix::zeros(n, n);
        for a in 0..dim_a {
            for b in 0..dim_a {
                let block = self.apply(&rho.block(a, b, self.dim))?;
                out.set_block(a, b, &block);
            }
        }
        Ok(out)
    }

    /// The dual Λ* defined by Tr(Λ[X] ρ) = Tr(X Λ*[ρ]).
    pub fn dual(&self) -> Self {
        let d = self.dim;
        let images: Vec<Vec<ComplexMatrix>> = (0..d)
            .map(|i| (0..d).map(|j| self.apply(&matrix_unit(d, j, i)).expect("dim")).collect())
            .collect();
        Self::from_fn(d, |rho| {
            ComplexMatrix::from_fn(d, d, |i, j| (&images[i][j] * rho).trace())
        })
    }

    /// Max over probes of |Tr Λ[E_ij] − δ_ij|.
    pub fn trace_preservation_error(&self) -> f64 {
        let d = self.dim;
        let mut worst = 0.0_f64;
        for i in 0..d {
            for j in 0..d {
                let tr = self.apply(&matrix_unit(d, i, j)).expect("dim").trace();
                let expect = if i == j { ONE } else { ZERO };
                worst = worst.max((tr - expect).norm());
            }
        }
        worst
    }

    pub fn is_trace_preserving(&self, tol: f64) -> bool {
        self.trace_preservation_error() <= tol
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.matrix.max_abs_diff(&other.matrix)
    }
}

/// Kraus operators G_j of Λ[ρ] = Σ G_j ρ G_j†.
#[derive(Debug, Clone)]
pub struct KrausSet {
    operators: Vec<ComplexMatrix>,
}

impl KrausSet {
    pub fn new(operators: Vec<ComplexMatrix>) -> Result<Self> {
        let Some(first) = operators.first() else {
            return Err(Error::DimensionMismatch {
                expected: "at least one Kraus operator".into(),
                got: "none".into(),
            });
        };
        let d = first.rows();
        if let Some(bad) = operators.iter().find(|g| g.rows() != d || g.cols() != d) {
            return Err(Error::DimensionMismatch {
                expected: format!("{d}x{d}"),
                got: format!("{}x{}", bad.rows(), bad.cols()),
            });
        }
        Ok(Self { operators })
    }

    pub fn operators(&self) -> &[ComplexMatrix] {
        &self.operators
    }

    pub fn dim(&self) -> usize {
        self.operators[0].rows()
    }

    /// max |Σ G_j†G_j − 1|
    pub fn completeness_error(&self) -> f64 {
        let d = self.dim();
        let sum = self
            .operators
            .iter()
            .fold(ComplexMatrix::zeros(d, d), |acc, g| &acc + &(&g.adjoint() * g));
        sum.max_abs_diff(&ComplexMatrix::identity(d))
    }
}

pub fn superop_from_kraus(ks: &KrausSet) -> SuperOperator {
    let d = ks.dim();
    ks.operators
        .iter()
        .fold(SuperOperator::zero(d), |acc, g| acc.add(&SuperOperator::sandwich(g, &g.adjoint())))
}

/// Λ[ρ] = Σ_ki λ_ki F_k ρ F_i† for a coefficient matrix over a basis {F_k}.
pub fn superop_from_coefficients(lambda: &ComplexMatrix, basis: &[ComplexMatrix]) -> Result<SuperOperator> {
    let n = basis.len();
    if lambda.rows() != n || lambda.cols() != n {
        return Err(Error::DimensionMismatch {
            expected: format!("{n}x{n} coefficient matrix"),
            got: format!("{}x{}", lambda.rows(), lambda.cols()),
        });
    }
    let d = basis.first().map_or(0, ComplexMatrix::rows);
    let mut out = SuperOperator::zero(d);
    for k in 0..n {
        for i in 0..n {
            let l = lambda[(k, i)];
            if l != ZERO {
                let term = SuperOperator::sandwich(&basis[k], &basis[i].adjoint());
                out.matrix = &out.matrix + &term.matrix.scale(l);
            }
        }
    }
    Ok(out)
}

/// (id_d ⊗ Λ)[P^d₊] = (1/d) Σ_ij E_ij ⊗ Λ[E_ij]
pub fn choi(m: &SuperOperator) -> ComplexMatrix {
    let d = m.dim;
    let mut out = ComplexMatrix::zeros(d * d, d * d);
    let inv = 1.0 / d as f64;
    for i in 0..d {
        for j in 0..d {
            let image = m.apply(&matrix_unit(d, i, j)).expect("dim").scale_real(inv);
            out.set_block(i, j, &image);
        }
    }
    out
}

pub fn choi_spectrum(m: &SuperOperator) -> Result<Spectrum> {
    hermitian_eigen(&choi(m))
}

/// Complete positivity: Choi matrix PSD at `tol`.
pub fn is_cp(m: &SuperOperator, tol: f64) -> Result<bool> {
    Ok(choi_spectrum(m)?.min() >= -tol)
}

/// Outcome of a one-sided positivity test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Positivity {
    CertifiedPositive,
    Inconclusive,
}

/// Eigen-decomposition Λ[ρ] = Σ ℓ_j G_j ρ G_j† with orthonormal G_j.
#[derive(Debug, Clone)]
pub struct HermDecomposition {
    eigenvalues: Vec<f64>,
    operators: Vec<ComplexMatrix>,
    norms: Vec<f64>,
}

impl HermDecomposition {
    pub fn new(eigenvalues: Vec<f64>, operators: Vec<ComplexMatrix>) -> Result<Self> {
        if eigenvalues.len() != operators.len() {
            return Err(Error::DimensionMismatch {
                expected: format!("{} operators", eigenvalues.len()),
                got: format!("{}", operators.len()),
            });
        }
        for (i, gi) in operators.iter().enumerate() {
            for (j, gj) in operators.iter().enumerate() {
                let expect = if i == j { ONE } else { ZERO };
                if (gi.hs_inner(gj) - expect).norm() > 1e-10 {
                    return Err(Error::Hypothesis(format!("operators {i} and {j} are not orthonormal")));
                }
            }
        }
        let norms = operators.iter().map(operator_norm).collect();
        Ok(Self {
            eigenvalues,
            operators,
            norms,
        })
    }

    /// Diagonalize a Hermitian coefficient matrix λ = U diag(ℓ) U† over an
    /// orthonormal basis; G_j = Σ_k U_kj F_k.
    pub fn from_coefficients(lambda: &ComplexMatrix, basis: &[ComplexMatrix]) -> Result<Self> {
        let spec = hermitian_eigen(lambda)?;
        let u = &spec.eigenvectors;
        let d = basis.first().map_or(0, ComplexMatrix::rows);
        let operators = (0..basis.len())
            .map(|j| {
                basis
                    .iter()
                    .enumerate()
                    .fold(ComplexMatrix::zeros(d, d), |acc, (k, f)| &acc + &f.scale(u[(k, j)]))
            })
            .collect();
        Self::new(spec.eigenvalues, operators)
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn operators(&self) -> &[ComplexMatrix] {
        &self.operators
    }

    pub fn norms(&self) -> &[f64] {
        &self.norms
    }

    pub fn to_superop(&self) -> SuperOperator {
        let d = self.operators.first().map_or(0, ComplexMatrix::rows);
        self.eigenvalues
            .iter()
            .zip(&self.operators)
            .fold(SuperOperator::zero(d), |acc, (&l, g)| {
                acc.add(&SuperOperator::sandwich(g, &g.adjoint()).scale(l))
            })
    }
}

// Equality cases such as the transposition sit exactly on the bound.
const PROP5_SLACK: f64 = 1e-12;

/// Sufficient positivity test for a single negative eigenvalue ℓ_p: positive
/// if M = ‖G_p‖² < 1 and every other ℓ_k ≥ M/(1−M)·|ℓ_p|. Never reports
/// non-positivity. With no negative eigenvalue the map is CP, hence positive.
pub fn positivity_sufficient_prop5(h: &HermDecomposition) -> Result<Positivity> {
    let negatives: Vec<usize> = (0..h.eigenvalues.len()).filter(|&k| h.eigenvalues[k] < 0.0).collect();
    let p = match negatives.as_slice() {
        [] => return Ok(Positivity::CertifiedPositive),
        [p] => *p,
        _ => {
            return Err(Error::Hypothesis(format!(
                "{} negative eigenvalues, at most one allowed",
                negatives.len()
            )))
        }
    };
    let m = h.norms[p].powi(2);
    if m >= 1.0 {
        return Ok(Positivity::Inconclusive);
    }
    let bound = m / (1.0 - m) * h.eigenvalues[p].abs();
    let ok = (0..h.eigenvalues.len())
        .filter(|&k| k != p)
        .all(|k| h.eigenvalues[k] >= bound - PROP5_SLACK);
    Ok(if ok {
        Positivity::CertifiedPositive
    } else {
        Positivity::Inconclusive
    })
}

/// Normalized Pauli basis {σ_i/√2}, i = 1..3.
pub fn qubit_traceless_basis() -> Vec<ComplexMatrix> {
    PauliIndex::ALL[1..]
        .iter()
        .map(|&a| pauli(a).scale_real(std::f64::consts::FRAC_1_SQRT_2))
        .collect()
}

/// L[ρ] = −i[H, ρ] + Σ_ij C_ij (F_i ρ F_j† − ½{F_j† F_i, ρ}).
#[derive(Debug, Clone)]
pub struct GksGenerator {
    hamiltonian: ComplexMatrix,
    kossakowski: ComplexMatrix,
    basis: Vec<ComplexMatrix>,
}

impl GksGenerator {
    /// `basis` lists the d²−1 traceless elements F_1..F_{d²−1}.
    pub fn new(hamiltonian: ComplexMatrix, kossakowski: ComplexMatrix, basis: Vec<ComplexMatrix>) -> Result<Self> {
        let d = hamiltonian.rows();
        if !hamiltonian.is_square() {
            return Err(Error::InvalidGenerator("Hamiltonian must be square".into()));
        }
        let n = d * d - 1;
        if basis.len() != n || kossakowski.rows() != n || kossakowski.cols() != n {
            return Err(Error::InvalidGenerator(format!(
                "need {n} basis elements and a {n}x{n} Kossakowski matrix"
            )));
        }
        let dev = hamiltonian.hermiticity_deviation();
        if dev > 1e-12 {
            return Err(Error::NotHermitian { deviation: dev });
        }
        let dev = kossakowski.hermiticity_deviation();
        if dev > 1e-12 {
            return Err(Error::NotHermitian { deviation: dev });
        }
        let f0 = ComplexMatrix::identity(d).scale_real(1.0 / (d as f64).sqrt());
        let full: Vec<&ComplexMatrix> = std::iter::once(&f0).chain(basis.iter()).collect();
        for (i, fi) in full.iter().enumerate() {
            if fi.rows() != d || fi.cols() != d {
                return Err(Error::InvalidGenerator(format!("basis element {i} has wrong size")));
            }
            for (k, fk) in full.iter().enumerate() {
                let expect = if i == k { ONE } else { ZERO };
                if (fi.hs_inner(fk) - expect).norm() > 1e-10 {
                    return Err(Error::InvalidGenerator(format!("basis elements {i}, {k} not orthonormal")));
                }
            }
        }
        Ok(Self {
            hamiltonian,
            kossakowski,
            basis,
        })
    }

    /// H = 0, F_i = σ_i/√2 and a diagonal Kossakowski matrix.
    pub fn qubit_diagonal(rates: [f64; 3]) -> Self {
        Self::new(
            ComplexMatrix::zeros(2, 2),
            ComplexMatrix::diag_real(&rates),
            qubit_traceless_basis(),
        )
        .expect("valid qubit generator")
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.rows()
    }

    pub fn kossakowski(&self) -> &ComplexMatrix {
        &self.kossakowski
    }

    pub fn hamiltonian(&self) -> &ComplexMatrix {
        &self.hamiltonian
    }
}

pub fn gks_generator_superop(g: &GksGenerator) -> SuperOperator {
    let d = g.dim();
    let id = ComplexMatrix::identity(d);
    let h = &g.hamiltonian;
    let minus_i = c(0.0, -1.0);
    // −i(Hρ − ρH)
    let mut l = SuperOperator::sandwich(h, &id)
        .sub(&SuperOperator::sandwich(&id, h))
        .matrix
        .scale(minus_i);
    for (i, fi) in g.basis.iter().enumerate() {
        for (j, fj) in g.basis.iter().enumerate() {
            let cij = g.kossakowski[(i, j)];
            if cij == ZERO {
                continue;
            }
            let fj_dag = fj.adjoint();
            let anti = &fj_dag * fi;
            let term = SuperOperator::sandwich(fi, &fj_dag)
                .sub(&SuperOperator::sandwich(&anti, &id).scale(0.5))
                .sub(&SuperOperator::sandwich(&id, &anti).scale(0.5));
            l = &l + &term.matrix.scale(cij);
        }
    }
    SuperOperator { dim: d, matrix: l }
}

/// exp(A) by scaling and squaring a truncated Taylor series.
pub fn expm(a: &ComplexMatrix) -> ComplexMatrix {
    let n = a.rows();
    let norm = a.norm_one();
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let scaled = a.scale_real(0.5f64.powi(squarings));
    let mut sum = ComplexMatrix::identity(n);
    let mut term = ComplexMatrix::identity(n);
    for k in 1..=40 {
        term = (&term * &scaled).scale_real(1.0 / k as f64);
        sum = &sum + &term;
        if term.max_abs() <= 1e-18 * sum.max_abs() {
            break;
        }
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// exp(tL)
pub fn exp_generator(l: &SuperOperator, t: f64) -> Result<SuperOperator> {
    if t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    Ok(SuperOperator {
        dim: l.dim,
        matrix: expm(&l.matrix.scale_real(t)),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SemigroupKind {
    Gamma1,
    Gamma2,
    Gamma,
}

/// Kossakowski matrix diag(1, 1, 1): the CP qubit semigroup γ¹_t.
pub fn generator_gamma1() -> GksGenerator {
    GksGenerator::qubit_diagonal([1.0, 1.0, 1.0])
}

/// Kossakowski matrix diag(1, −1, 1): γ²_t, positive but not CP.
pub fn generator_gamma2() -> GksGenerator {
    GksGenerator::qubit_diagonal([1.0, -1.0, 1.0])
}

/// Generator L of the chosen semigroup; for Γ it is L₁ ⊗ id + id ⊗ L₂.
pub fn semigroup_generator(kind: SemigroupKind) -> SuperOperator {
    match kind {
        SemigroupKind::Gamma1 => gks_generator_superop(&generator_gamma1()),
        SemigroupKind::Gamma2 => gks_generator_superop(&generator_gamma2()),
        SemigroupKind::Gamma => {
            let id = SuperOperator::identity(2);
            let l1 = gks_generator_superop(&generator_gamma1());
            let l2 = gks_generator_superop(&generator_gamma2());
            SuperOperator::tensor(&l1, &id).add(&SuperOperator::tensor(&id, &l2))
        }
    }
}

fn decay(t: f64) -> Result<f64> {
    if t < 0.0 || t.is_nan() {
        return Err(Error::NegativeTime(t));
    }
    Ok((-2.0 * t).exp())
}

/// Closed forms γ¹_t = e·id₂ + (1−e)/2·Tr₂ and γ²_t = (1+e)/2·id₂ + (1−e)/2·T₂
/// with e = e^{−2t}; Γ_t = γ¹_t ⊗ γ²_t on 4×4 matrices.
pub fn semigroup_map(kind: SemigroupKind, t: f64) -> Result<SuperOperator> {
    let e = decay(t)?;
    let id = SuperOperator::identity(2);
    let g1 = || id.scale(e).add(&SuperOperator::trace_map(2).scale((1.0 - e) / 2.0));
    let g2 = || {
        id.scale((1.0 + e) / 2.0)
            .add(&SuperOperator::transposition(2).scale((1.0 - e) / 2.0))
    };
    Ok(match kind {
        SemigroupKind::Gamma1 => g1(),
        SemigroupKind::Gamma2 => g2(),
        SemigroupKind::Gamma => SuperOperator::tensor(&g1(), &g2()),
    })
}

/// Γ_t = Γ¹_t + Γ²_t ∘ T₄ with
/// Γ¹_t = e(1+e)/2·id₄ + (1−e²)/4·Tr₂⊗id₂ and
/// Γ²_t = (1−e)/2·(e·T₂⊗id₂ + (1−e)/2·Tr₂⊗id₂).
pub fn semg4_decomposition(t: f64) -> Result<(SuperOperator, SuperOperator)> {
    let e = decay(t)?;
    let id2 = SuperOperator::identity(2);
    let tr_id = SuperOperator::tensor(&SuperOperator::trace_map(2), &id2);
    let t_id = SuperOperator::tensor(&SuperOperator::transposition(2), &id2);
    let first = SuperOperator::identity(4)
        .scale(e * (1.0 + e) / 2.0)
        .add(&tr_id.scale((1.0 - e * e) / 4.0));
    let second = t_id
        .scale(e)
        .add(&tr_id.scale((1.0 - e) / 2.0))
        .scale((1.0 - e) / 2.0);
    Ok((first, second))
}

/// Max entrywise residual of Γ_t − (Γ¹_t + Γ²_t ∘ T₄).
pub fn semg4_residual(t: f64) -> Result<f64> {
    let (first, second) = semg4_decomposition(t)?;
    let rebuilt = first.add(&second.compose(&SuperOperator::transposition(4)));
    Ok(semigroup_map(SemigroupKind::Gamma, t)?.max_abs_diff(&rebuilt))
}

/// t* = (ln 3)/2, beyond which Γ²_t is completely positive again.
pub fn t_star() -> f64 {
    3f64.ln() / 2.0
}

/// Diagonal Kossakowski data of a product semigroup γ¹ ⊗ γ² with one negative
/// rate in the second factor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KossakowskiSpec {
    c1: Vec<f64>,
    c2: Vec<f64>,
    negative_index: usize,
}

impl KossakowskiSpec {
    pub fn new(c1: Vec<f64>, c2: Vec<f64>, negative_index: usize) -> Result<Self> {
        if c1.len() != c2.len() || negative_index >= c2.len() {
            return Err(Error::DimensionMismatch {
                expected: format!("equal-length rate lists with index < {}", c2.len()),
                got: format!("{} / {} rates, index {negative_index}", c1.len(), c2.len()),
            });
        }
        if c1.iter().any(|&x| x <= 0.0) {
            return Err(Error::Hypothesis("all first-factor rates must be positive".into()));
        }
        for (l, &x) in c2.iter().enumerate() {
            let bad = if l == negative_index { x >= 0.0 } else { x <= 0.0 };
            if bad {
                return Err(Error::Hypothesis(format!(
                    "second-factor rates must be negative exactly at index {negative_index}"
                )));
            }
        }
        Ok(Self {
            c1,
            c2,
            negative_index,
        })
    }

    pub fn c1(&self) -> &[f64] {
        &self.c1
    }

    pub fn c2(&self) -> &[f64] {
        &self.c2
    }

    pub fn negative_index(&self) -> usize {
        self.negative_index
    }
}

/// Γ_t = γ¹_t ⊗ γ²_t is positive if every c1 and every other c2 dominates |c2_k|.
pub fn prop11_tensor_positivity(spec: &KossakowskiSpec) -> Positivity {
    let bound = spec.c2[spec.negative_index].abs();
    let first = spec.c1.iter().all(|&x| x >= bound);
    let second = spec
        .c2
        .iter()
        .enumerate()
        .filter(|&(l, _)| l != spec.negative_index)
        .all(|(_, &x)| x >= bound);
    if first && second {
        Positivity::CertifiedPositive
    } else {
        Positivity::Inconclusive
    }
}

/// Minimum Choi eigenvalue; negative means not CP.
pub fn choi_min_eigenvalue(m: &SuperOperator) -> Result<f64> {
    Ok(choi_spectrum(m)?.min())
}

/// CP at the default tolerance.
pub fn is_cp_default(m: &SuperOperator) -> Result<bool> {
    is_cp(m, PSD_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{eigenvalues_hermitian, multiset_distance, I};
    use crate::pauli::{epsilon, flip_v, p_plus};

    fn rand_matrix(d: usize, seed: u64) -> ComplexMatrix {
        // small deterministic LCG; tests elsewhere use rand
        let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let mut next = move || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        ComplexMatrix::from_fn(d, d, |_, _| c(next(), next()))
    }

    fn rand_state(d: usize, seed: u64) -> ComplexMatrix {
        let a = rand_matrix(d, seed);
        let rho = &a * &a.adjoint();
        let tr = rho.trace().re;
        rho.scale_real(1.0 / tr)
    }

    fn pauli_kraus() -> KrausSet {
        KrausSet::new(
            PauliIndex::ALL
                .iter()
                .map(|&a| pauli(a).scale_real(std::f64::consts::FRAC_1_SQRT_2))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn vectorization_convention() {
        let a = rand_matrix(3, 1);
        let b = rand_matrix(3, 2);
        let x = rand_matrix(3, 3);
        let direct = &(&a * &x) * &b;
        let via = SuperOperator::sandwich(&a, &b).apply(&x).unwrap();
        assert!(direct.max_abs_diff(&via) < 1e-14);
        assert_eq!(vectorize(&x)[1], x[(1, 0)]);
        assert_eq!(unvectorize(&vectorize(&x), 3), x);
    }

    #[test]
    fn kraus_examples() {
        let id = superop_from_kraus(&KrausSet::new(vec![ComplexMatrix::identity(2)]).unwrap());
        assert_eq!(id, SuperOperator::identity(2));

        let tr = superop_from_kraus(&pauli_kraus());
        assert!(tr.max_abs_diff(&SuperOperator::trace_map(2)) < 1e-15);

        let u = ComplexMatrix::from_fn(2, 2, |i, j| match (i, j) {
            (0, 0) => c(0.6, 0.0),
            (0, 1) => c(0.0, 0.8),
            (1, 0) => c(0.0, 0.8),
            _ => c(0.6, 0.0),
        });
        let conj = superop_from_kraus(&KrausSet::new(vec![u]).unwrap());
        let rho = rand_state(2, 9);
        let out = conj.apply(&rho).unwrap();
        let a = eigenvalues_hermitian(&rho).unwrap();
        let b = eigenvalues_hermitian(&out).unwrap();
        assert!(multiset_distance(&a, &b) < 1e-12);

        let bad = KrausSet::new(vec![ComplexMatrix::identity(2), ComplexMatrix::identity(3)]);
        assert!(matches!(bad, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn choi_examples() {
        assert!(choi(&SuperOperator::identity(2)).max_abs_diff(&p_plus(2)) < 1e-15);

        let t2 = choi(&SuperOperator::transposition(2));
        assert!(t2.max_abs_diff(&flip_v(2).scale_real(0.5)) < 1e-15);
        let eig = eigenvalues_hermitian(&t2).unwrap();
        assert!(multiset_distance(&eig, &[0.5, 0.5, 0.5, -0.5]) < 1e-12);

        let tr = choi(&SuperOperator::trace_map(2));
        assert!(tr.max_abs_diff(&ComplexMatrix::identity(4).scale_real(0.5)) < 1e-15);
    }

    #[test]
    fn cp_examples() {
        assert!(!is_cp(&SuperOperator::transposition(2), PSD_TOL).unwrap());
        assert!(is_cp(&SuperOperator::trace_map(2), PSD_TOL).unwrap());
        let g2 = |t| semg4_decomposition(t).unwrap().1;
        assert!(!is_cp(&g2(0.2), PSD_TOL).unwrap());
        assert!(is_cp(&g2(0.6), PSD_TOL).unwrap());
    }

    #[test]
    fn choi_is_linear_in_the_map() {
        let a = SuperOperator::transposition(2);
        let b = SuperOperator::trace_map(2);
        let mix = a.scale(0.3).add(&b.scale(0.7));
        let lhs = choi(&mix);
        let rhs = &choi(&a).scale_real(0.3) + &choi(&b).scale_real(0.7);
        assert!(lhs.max_abs_diff(&rhs) < 1e-15);
    }

    #[test]
    fn kraus_maps_are_cp() {
        for seed in 0..10 {
            let ks = KrausSet::new((0..3).map(|k| rand_matrix(3, seed * 10 + k)).collect()).unwrap();
            assert!(is_cp(&superop_from_kraus(&ks), 1e-12).unwrap());
        }
        // σ_a/√2 sum to 2·1; halving the weights gives the depolarizing channel
        assert!((pauli_kraus().completeness_error() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn transposition_from_pauli_coefficients() {
        let basis: Vec<ComplexMatrix> = PauliIndex::ALL
            .iter()
            .map(|&a| pauli(a).scale_real(std::f64::consts::FRAC_1_SQRT_2))
            .collect();
        let lambda = ComplexMatrix::diag_real(&PauliIndex::ALL.map(|a| epsilon(a) as f64));
        let t2 = superop_from_coefficients(&lambda, &basis).unwrap();
        assert!(t2.max_abs_diff(&SuperOperator::transposition(2)) < 1e-15);

        let h = HermDecomposition::from_coefficients(&lambda, &basis).unwrap();
        assert!(h.to_superop().max_abs_diff(&t2) < 1e-12);
        assert_eq!(positivity_sufficient_prop5(&h).unwrap(), Positivity::CertifiedPositive);
    }

    #[test]
    fn prop5_examples() {
        let basis: Vec<ComplexMatrix> = PauliIndex::ALL
            .iter()
            .map(|&a| pauli(a).scale_real(std::f64::consts::FRAC_1_SQRT_2))
            .collect();
        let h = HermDecomposition::new(vec![1.0, 1.0, -1.0, 1.0], basis.clone()).unwrap();
        assert!(h.norms().iter().all(|n| (n * n - 0.5).abs() < 1e-12));
        assert_eq!(positivity_sufficient_prop5(&h).unwrap(), Positivity::CertifiedPositive);

        let weak = HermDecomposition::new(vec![0.1, 0.1, -1.0, 0.1], basis.clone()).unwrap();
        assert_eq!(positivity_sufficient_prop5(&weak).unwrap(), Positivity::Inconclusive);

        // A unit-norm G_p: a rank-one matrix unit in d = 2 has ‖E‖ = 1.
        let units: Vec<ComplexMatrix> = (0..4).map(|k| matrix_unit(2, k / 2, k % 2)).collect();
        let unit = HermDecomposition::new(vec![5.0, 5.0, -1.0, 5.0], units).unwrap();
        assert_eq!(positivity_sufficient_prop5(&unit).unwrap(), Positivity::Inconclusive);

        let two_neg = HermDecomposition::new(vec![1.0, -1.0, -1.0, 1.0], basis).unwrap();
        assert!(matches!(positivity_sufficient_prop5(&two_neg), Err(Error::Hypothesis(_))));
    }

    #[test]
    fn generator_examples() {
        let zero = GksGenerator::new(ComplexMatrix::zeros(2, 2), ComplexMatrix::zeros(3, 3), qubit_traceless_basis()).unwrap();
        assert!(gks_generator_superop(&zero).matrix().max_abs() < 1e-15);

        // Oracle: evaluate ½(Σ σ_i ρ σ_i − 3ρ) on σ₃ directly.
        let l1 = gks_generator_superop(&generator_gamma1());
        let s3 = pauli(PauliIndex::new(3).unwrap());
        let direct = PauliIndex::ALL[1..]
            .iter()
            .fold(s3.scale_real(-3.0), |acc, &a| &acc + &(&(&pauli(a) * &s3) * &pauli(a)))
            .scale_real(0.5);
        let out = l1.apply(&s3).unwrap();
        assert!(out.max_abs_diff(&direct) < 1e-15);
        assert!(out.max_abs_diff(&s3.scale_real(-2.0)) < 1e-15);

        let rho = rand_state(2, 4);
        for g in [generator_gamma1(), generator_gamma2()] {
            let l = gks_generator_superop(&g);
            assert!(l.apply(&rho).unwrap().trace().norm() < 1e-15);
        }
    }

    #[test]
    fn generator_validation() {
        let h = ComplexMatrix::from_fn(2, 2, |i, j| if i < j { I } else { ZERO });
        let err = GksGenerator::new(h, ComplexMatrix::zeros(3, 3), qubit_traceless_basis());
        assert!(matches!(err, Err(Error::NotHermitian { .. })));
        let mut c = ComplexMatrix::zeros(3, 3);
        c[(0, 1)] = ONE;
        let err = GksGenerator::new(ComplexMatrix::zeros(2, 2), c, qubit_traceless_basis());
        assert!(matches!(err, Err(Error::NotHermitian { .. })));
        let err = GksGenerator::new(ComplexMatrix::zeros(2, 2), ComplexMatrix::zeros(3, 3), vec![]);
        assert!(matches!(err, Err(Error::InvalidGenerator(_))));
    }

    #[test]
    fn hamiltonian_part_generates_unitary_flow() {
        let h = pauli(PauliIndex::new(3).unwrap());
        let g = GksGenerator::new(h.clone(), ComplexMatrix::zeros(3, 3), qubit_traceless_basis()).unwrap();
        let t = 0.37;
        let flow = exp_generator(&gks_generator_superop(&g), t).unwrap();
        let u = ComplexMatrix::diag(&[c(0.0, -t).exp(), c(0.0, t).exp()]);
        let rho = rand_state(2, 5);
        let expect = &(&u * &rho) * &u.adjoint();
        assert!(flow.apply(&rho).unwrap().max_abs_diff(&expect) < 1e-13);
    }

    #[test]
    fn exponential_examples() {
        let l1 = semigroup_generator(SemigroupKind::Gamma1);
        assert!(exp_generator(&l1, 0.0).unwrap().max_abs_diff(&SuperOperator::identity(2)) < 1e-15);
        for t in [0.1, 0.5, 1.0, 2.0] {
            let closed = semigroup_map(SemigroupKind::Gamma1, t).unwrap();
            assert!(exp_generator(&l1, t).unwrap().max_abs_diff(&closed) < 1e-8);
        }
        let (s, t) = (0.3, 0.45);
        let lhs = exp_generator(&l1, s + t).unwrap();
        let rhs = exp_generator(&l1, s).unwrap().compose(&exp_generator(&l1, t).unwrap());
        assert!(lhs.max_abs_diff(&rhs) < 1e-9);
        assert_eq!(exp_generator(&l1, -1.0).unwrap_err(), Error::NegativeTime(-1.0));
    }

    #[test]
    fn semigroup_examples() {
        assert!(semigroup_map(SemigroupKind::Gamma2, 0.0).unwrap().max_abs_diff(&SuperOperator::identity(2)) < 1e-15);
        let far = semigroup_map(SemigroupKind::Gamma1, 20.0).unwrap();
        assert!(far.max_abs_diff(&SuperOperator::trace_map(2).scale(0.5)) < 1e-10);
        for t in [0.05, 0.4, 1.3] {
            let gamma = semigroup_map(SemigroupKind::Gamma, t).unwrap();
            let e1 = exp_generator(&semigroup_generator(SemigroupKind::Gamma1), t).unwrap();
            let e2 = exp_generator(&semigroup_generator(SemigroupKind::Gamma2), t).unwrap();
            assert!(gamma.max_abs_diff(&SuperOperator::tensor(&e1, &e2)) < 1e-8);
            let eg = exp_generator(&semigroup_generator(SemigroupKind::Gamma), t).unwrap();
            assert!(gamma.max_abs_diff(&eg) < 1e-8);
        }
        assert!(matches!(semigroup_map(SemigroupKind::Gamma, -0.1), Err(Error::NegativeTime(_))));
    }

    #[test]
    fn tensor_of_transpositions_is_full_transposition() {
        let t2 = SuperOperator::transposition(2);
        assert!(SuperOperator::tensor(&t2, &t2).max_abs_diff(&SuperOperator::transposition(4)) < 1e-15);
        let tr = SuperOperator::trace_map(2);
        assert!(tr.compose(&t2).max_abs_diff(&tr) < 1e-15);
    }

    #[test]
    fn semg4_examples() {
        assert!(semg4_residual(0.3).unwrap() < 1e-10);
        for t in [0.1, 0.5, 1.0, 2.0] {
            let (first, _) = semg4_decomposition(t).unwrap();
            assert!(is_cp(&first, PSD_TOL).unwrap(), "t = {t}");
        }
        for k in 0..=10 {
            let t = k as f64 / 10.0;
            let (_, second) = semg4_decomposition(t).unwrap();
            let cp = is_cp(&second, PSD_TOL).unwrap();
            assert_eq!(cp, t == 0.0 || t >= t_star(), "t = {t}");
        }
    }

    #[test]
    fn prop11_examples() {
        let spec = KossakowskiSpec::new(vec![1.0, 1.0, 1.0], vec![1.0, -1.0, 1.0], 1).unwrap();
        assert_eq!(prop11_tensor_positivity(&spec), Positivity::CertifiedPositive);
        let weak1 = KossakowskiSpec::new(vec![0.5, 1.0, 1.0], vec![1.0, -1.0, 1.0], 1).unwrap();
        assert_eq!(prop11_tensor_positivity(&weak1), Positivity::Inconclusive);
        let weak2 = KossakowskiSpec::new(vec![1.0, 1.0, 1.0], vec![0.5, -1.0, 1.0], 1).unwrap();
        assert_eq!(prop11_tensor_positivity(&weak2), Positivity::Inconclusive);
        assert!(KossakowskiSpec::new(vec![1.0, -1.0, 1.0], vec![1.0, -1.0, 1.0], 1).is_err());
        assert!(KossakowskiSpec::new(vec![1.0, 1.0, 1.0], vec![-1.0, -1.0, 1.0], 1).is_err());
    }

    #[test]
    fn kossakowski_sign_controls_complete_positivity() {
        let l1 = semigroup_generator(SemigroupKind::Gamma1);
        let l2 = semigroup_generator(SemigroupKind::Gamma2);
        for t in [0.05, 0.1, 0.5, 1.0, 3.0] {
            assert!(is_cp(&exp_generator(&l1, t).unwrap(), PSD_TOL).unwrap());
        }
        assert!(!is_cp(&exp_generator(&l2, 0.1).unwrap(), PSD_TOL).unwrap());
    }

    #[test]
    fn semigroups_preserve_trace() {
        for kind in [SemigroupKind::Gamma1, SemigroupKind::Gamma2, SemigroupKind::Gamma] {
            for t in [0.0, 0.2, 0.7, 4.0] {
                let m = semigroup_map(kind, t).unwrap();
                assert!(m.is_trace_preserving(1e-12));
                let d = m.dim();
                let rho = rand_state(d, (t * 100.0) as u64 + d as u64);
                assert!((m.apply(&rho).unwrap().trace() - ONE).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn gamma_is_self_dual() {
        for t in [0.0, 0.1, 0.5, 2.0] {
            let g = semigroup_map(SemigroupKind::Gamma, t).unwrap();
            assert!(g.dual().max_abs_diff(&g) < 1e-10, "t = {t}");
        }
    }

    #[test]
    fn gamma_keeps_random_states_positive() {
        for seed in 0..40 {
            let rho = if seed % 2 == 0 {
                rand_state(2, seed).kron(&rand_state(2, seed + 100))
            } else {
                let v: Vec<C64> = rand_matrix(4, seed).column(0);
                let n = crate::linalg::vec_norm(&v);
                let v: Vec<C64> = v.iter().map(|z| z / n).collect();
                ComplexMatrix::outer(&v, &v)
            };
            for t in [0.05, 0.2, 0.5] {
                let out = semigroup_map(SemigroupKind::Gamma, t).unwrap().apply(&rho).unwrap();
                let min = hermitian_eigen(&out).unwrap().min();
                assert!(min >= -1e-10, "seed {seed} t {t}: {min}");
            }
        }
    }

    #[test]
    fn apply_on_second_factor_matches_tensor_with_identity() {
        let g = semigroup_map(SemigroupKind::Gamma1, 0.3).unwrap();
        let rho = rand_state(4, 77);
        let direct = g.apply_on_second_factor(&rho, 2).unwrap();
        let via = SuperOperator::tensor(&SuperOperator::identity(2), &g).apply(&rho).unwrap();
        assert!(direct.max_abs_diff(&via) < 1e-14);
    }
}
