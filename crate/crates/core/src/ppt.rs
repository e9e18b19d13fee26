//! Positivity under partial transposition for lattice states, by three routes:
//! the row/column counting rule, the closed-form spectrum, and brute-force
//! diagonalization of (T₄ ⊗ id₄)[ρ].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, ComplexMatrix, Subsystem, PSD_TOL};
use crate::pauli::{xi, Site};
use crate::states::{LatticeState, LatticeSubset, WeightVector};

/// Column weight (row excluded) and row weight (column excluded) at a site.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QCounts {
    pub q1: f64,
    pub q2: f64,
}

impl QCounts {
    pub fn total(&self) -> f64 {
        self.q1 + self.q2
    }
}

/// q1 = Σ_{β≠δ} π_γβ and q2 = Σ_{α≠γ} π_αδ at (γ, δ), without the tilde shift.
pub fn q_counts(pi: &WeightVector, at: Site) -> QCounts {
    let mut q1 = 0.0;
    let mut q2 = 0.0;
    for s in Site::all() {
        if s.col == at.col && s.row != at.row {
            q1 += pi.get(s);
        }
        if s.row == at.row && s.col != at.col {
            q2 += pi.get(s);
        }
    }
    QCounts { q1, q2 }
}

/// Members of `subset` in column C_α ∪ row R_β, excluding (α, β).
pub fn cross_count(subset: LatticeSubset, at: Site) -> usize {
    subset
        .sites()
        .filter(|s| (s.col == at.col) != (s.row == at.row))
        .count()
}

/// The first site whose cross count exceeds N_I/2, if any.
pub fn ppt_violation(subset: LatticeSubset) -> Option<Site> {
    let n = subset.len();
    Site::all().find(|&s| 2 * cross_count(subset, s) > n)
}

/// Counting rule: ρ_I is PPT iff no cross C_α ∪ R_β \ {(α,β)} holds more than N_I/2 members.
pub fn ppt_combinatorial(subset: LatticeSubset) -> Result<bool> {
    if subset.is_empty() {
        return Err(Error::EmptySubset);
    }
    Ok(ppt_violation(subset).is_none())
}

/// Eigenvalues of (T₄ ⊗ id₄)[ρ_π], indexed by the site (γ, δ) of the
/// eigenprojector P_γδ: (1/4)[1 − 2(Q⁽¹⁾ + Q⁽²⁾)] with Q evaluated at (γ̃, δ̃).
pub fn pt_spectrum_closed_form(pi: &WeightVector) -> [f64; 16] {
    let mut out = [0.0; 16];
    for s in Site::all() {
        out[s.index()] = 0.25 * (1.0 - 2.0 * q_counts(pi, s.tilde()).total());
    }
    out
}

/// (1/4) Σ_αβ π_αβ ξ_αγ ξ_βδ; same values as [`pt_spectrum_closed_form`] by another route.
pub fn pt_spectrum_sign_sum(pi: &WeightVector) -> [f64; 16] {
    let mut out = [0.0; 16];
    for target in Site::all() {
        out[target.index()] = 0.25
            * Site::all()
                .map(|s| pi.get(s) * (xi(s.col, target.col) * xi(s.row, target.row)) as f64)
                .sum::<f64>();
    }
    out
}

/// (T₄ ⊗ id₄)[ρ]
pub fn partial_transpose_state(rho: &ComplexMatrix) -> Result<ComplexMatrix> {
    rho.partial_transpose(4, 4, Subsystem::First)
}

/// Minimum eigenvalue of the numerically diagonalized partial transpose.
pub fn pt_min_eigenvalue(state: &LatticeState) -> Result<f64> {
    Ok(hermitian_eigen(&partial_transpose_state(state.matrix())?)?.min())
}

/// Brute-force route: diagonalize (T₄ ⊗ id₄)[ρ], PSD at −1e−10.
pub fn ppt_spectral(state: &LatticeState) -> Result<bool> {
    Ok(pt_min_eigenvalue(state)? >= -PSD_TOL)
}
