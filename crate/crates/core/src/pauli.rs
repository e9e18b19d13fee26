//! Pauli tensor basis on C⁴, the maximally entangled basis |Ψ_αβ⟩ of C⁴⊗C⁴
//! and the sign tables relating them under partial transposition.
//!
//! Two-qubit kets are ordered |00⟩, |01⟩, |10⟩, |11⟩ inside each C⁴ factor,
//! which is what `σ_α ⊗ σ_β` produces under the row-major Kronecker product.

use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, ComplexMatrix, C64, I, ONE, ZERO};

/// Index α ∈ {0, 1, 2, 3} of σ_α (σ₀ is the identity).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct PauliIndex(u8);

impl PauliIndex {
    pub const ALL: [PauliIndex; 4] = [PauliIndex(0), PauliIndex(1), PauliIndex(2), PauliIndex(3)];

    pub fn new(value: u8) -> Result<Self> {
        if value < 4 {
            Ok(Self(value))
        } else {
            Err(Error::PauliIndexOutOfRange(value))
        }
    }

    pub fn value(self) -> u8 {
        self.0
    }

    pub fn idx(self) -> usize {
        self.0 as usize
    }

    /// μ̃ = (μ + 2) mod 4
    pub fn tilde(self) -> Self {
        Self((self.0 + 2) % 4)
    }
}

impl TryFrom<u8> for PauliIndex {
    type Error = Error;
    fn try_from(value: u8) -> Result<Self> {
        Self::new(value)
    }
}

impl From<PauliIndex> for u8 {
    fn from(p: PauliIndex) -> u8 {
        p.0
    }
}

/// Lattice point (α, β) of L₁₆: column α, row β.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "[u8; 2]", into = "[u8; 2]")]
pub struct Site {
    pub col: PauliIndex,
    pub row: PauliIndex,
}

impl Site {
    pub fn new(col: u8, row: u8) -> Result<Self> {
        Ok(Self {
            col: PauliIndex::new(col)?,
            row: PauliIndex::new(row)?,
        })
    }

    /// Bit position 4·α + β.
    pub fn index(self) -> usize {
        4 * self.col.idx() + self.row.idx()
    }

    pub fn from_index(index: usize) -> Self {
        assert!(index < 16, "site index {index} out of range");
        Self {
            col: PauliIndex((index / 4) as u8),
            row: PauliIndex((index % 4) as u8),
        }
    }

    pub fn all() -> impl Iterator<Item = Site> {
        (0..16).map(Site::from_index)
    }

    pub fn tilde(self) -> Self {
        Self {
            col: self.col.tilde(),
            row: self.row.tilde(),
        }
    }

    /// (α, β) → (β, α)
    pub fn flipped(self) -> Self {
        Self {
            col: self.row,
            row: self.col,
        }
    }
}

impl TryFrom<[u8; 2]> for Site {
    type Error = Error;
    fn try_from([a, b]: [u8; 2]) -> Result<Self> {
        Self::new(a, b)
    }
}

impl From<Site> for [u8; 2] {
    fn from(s: Site) -> [u8; 2] {
        [s.col.0, s.row.0]
    }
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.col.0, self.row.0)
    }
}

/// Shorthand for tests and tables; panics on out-of-range input.
pub fn site(col: u8, row: u8) -> Site {
    Site::new(col, row).expect("site out of range")
}

pub fn pauli(alpha: PauliIndex) -> ComplexMatrix {
    let m = match alpha.0 {
        0 => [[ONE, ZERO], [ZERO, ONE]],
        1 => [[ZERO, ONE], [ONE, ZERO]],
        2 => [[ZERO, -I], [I, ZERO]],
        _ => [[ONE, ZERO], [ZERO, -ONE]],
    };
    ComplexMatrix::from_fn(2, 2, |i, j| m[i][j])
}

/// σ_αᵀ = ε_α σ_α: +1 except for σ₂.
pub fn epsilon(alpha: PauliIndex) -> i8 {
    if alpha.0 == 2 {
        -1
    } else {
        1
    }
}

/// σ_αβ = σ_α ⊗ σ_β
pub fn sigma_ab(site: Site) -> ComplexMatrix {
    pauli(site.col).kron(&pauli(site.row))
}

/// (1/√d) Σ_j |j⟩⊗|j⟩
pub fn psi_plus(d: usize) -> Vec<C64> {
    assert!(d >= 2, "psi_plus needs d >= 2");
    let amp = c(1.0 / (d as f64).sqrt(), 0.0);
    let mut v = vec![ZERO; d * d];
    for j in 0..d {
        v[j * d + j] = amp;
    }
    v
}

pub fn p_plus(d: usize) -> ComplexMatrix {
    let v = psi_plus(d);
    ComplexMatrix::outer(&v, &v)
}

/// |Ψ_αβ⟩ = (1₄ ⊗ σ_αβ)|Ψ⁴₊⟩
pub fn basis_vector(site: Site) -> Vec<C64> {
    let op = ComplexMatrix::identity(4).kron(&sigma_ab(site));
    op.mul_vec(&psi_plus(4)).expect("16-dim operator on 16-dim vector")
}

/// P_αβ = |Ψ_αβ⟩⟨Ψ_αβ|
pub fn basis_projector(site: Site) -> ComplexMatrix {
    let v = basis_vector(site);
    ComplexMatrix::outer(&v, &v)
}

/// All 16 projectors P_αβ indexed by [`Site::index`], built once.
pub fn projectors() -> &'static [ComplexMatrix] {
    static CACHE: OnceLock<Vec<ComplexMatrix>> = OnceLock::new();
    CACHE.get_or_init(|| Site::all().map(basis_projector).collect())
}

/// The d-dimensional flip V|ψ⊗φ⟩ = |φ⊗ψ⟩ on C^d ⊗ C^d.
pub fn flip_v(d: usize) -> ComplexMatrix {
    assert!(d >= 2, "flip_v needs d >= 2");
    ComplexMatrix::from_fn(d * d, d * d, |i, j| {
        let (a, b) = (i / d, i % d);
        if j == b * d + a {
            ONE
        } else {
            ZERO
        }
    })
}

/// ξ_αγ = 1 − 2δ_{|α−γ|,2}
pub fn xi(alpha: PauliIndex, gamma: PauliIndex) -> i8 {
    if alpha.0.abs_diff(gamma.0) == 2 {
        -1
    } else {
        1
    }
}

// Indexed [γ][α]; σ_α σ_γ σ_α = η_αγ σ_γ.
const ETA: [[i8; 4]; 4] = [[1, 1, 1, 1], [1, 1, -1, -1], [1, -1, 1, -1], [1, -1, -1, 1]];

pub fn eta(alpha: PauliIndex, gamma: PauliIndex) -> i8 {
    ETA[gamma.idx()][alpha.idx()]
}

/// V_αβ = (1₄ ⊗ σ_αβ) V (1₄ ⊗ σ_αβ) with V the 4-dimensional flip.
pub fn v_ab(site: Site) -> ComplexMatrix {
    let s = ComplexMatrix::identity(4).kron(&sigma_ab(site));
    &(&s * &flip_v(4)) * &s
}

/// Σ_γδ ξ_αγ ξ_βδ P_γδ, the diagonal form of V_αβ in the |Ψ_γδ⟩ basis.
pub fn v_ab_spectral(site: Site) -> ComplexMatrix {
    Site::all().fold(ComplexMatrix::zeros(16, 16), |acc, s| {
        let sign = xi(site.col, s.col) * xi(site.row, s.row);
        &acc + &basis_projector(s).scale_real(sign as f64)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{inner, kron_vec, vec_norm};

    fn p(a: u8) -> PauliIndex {
        PauliIndex::new(a).unwrap()
    }

    #[test]
    fn pauli_index_range_checked() {
        assert!(PauliIndex::new(3).is_ok());
        assert_eq!(PauliIndex::new(4), Err(Error::PauliIndexOutOfRange(4)));
        assert!(Site::new(0, 7).is_err());
    }

    #[test]
    fn pauli_matrices_and_orthogonality() {
        assert_eq!(pauli(p(0)), ComplexMatrix::identity(2));
        let y = pauli(p(2));
        assert_eq!(y[(0, 1)], -I);
        assert_eq!(y[(1, 0)], I);
        for a in PauliIndex::ALL {
            for b in PauliIndex::ALL {
                let tr = (&pauli(a) * &pauli(b)).trace();
                let expect = if a == b { 2.0 } else { 0.0 };
                assert!((tr - c(expect, 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn epsilon_matches_transpose() {
        assert_eq!(epsilon(p(2)), -1);
        assert_eq!(epsilon(p(0)), 1);
        for a in PauliIndex::ALL {
            let s = pauli(a);
            assert!(s.transpose().max_abs_diff(&s.scale_real(epsilon(a) as f64)) < 1e-15);
        }
    }

    #[test]
    fn sigma_ab_examples() {
        assert_eq!(sigma_ab(site(0, 0)), ComplexMatrix::identity(4));
        assert_eq!(sigma_ab(site(3, 3)), ComplexMatrix::diag_real(&[1.0, -1.0, -1.0, 1.0]));
        assert!(sigma_ab(site(0, 1)).adjoint().hs_inner(&sigma_ab(site(0, 2))).norm() < 1e-15);
    }

    #[test]
    fn sigma_ab_basis_is_orthogonal() {
        for s in Site::all() {
            assert!(sigma_ab(s).is_hermitian(1e-15));
            for t in Site::all() {
                let ip = sigma_ab(s).hs_inner(&sigma_ab(t));
                let expect = if s == t { 4.0 } else { 0.0 };
                assert!((ip - c(expect, 0.0)).norm() < 1e-14, "{s} {t}");
            }
        }
    }

    #[test]
    fn psi_plus_vectors() {
        let v2 = psi_plus(2);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((v2[0].re - h).abs() < 1e-15 && (v2[3].re - h).abs() < 1e-15);
        assert_eq!(v2[1], ZERO);
        let v4 = psi_plus(4);
        assert!((vec_norm(&v4) - 1.0).abs() < 1e-15);
        assert_eq!(v4[5], c(0.5, 0.0));
    }

    #[test]
    fn psi_plus_transfers_operators_across_the_cut() {
        let a = ComplexMatrix::from_fn(4, 4, |i, j| c((i + 2 * j) as f64 * 0.1, (i as f64) - (j as f64)));
        let id = ComplexMatrix::identity(4);
        let lhs = a.kron(&id).mul_vec(&psi_plus(4)).unwrap();
        let rhs = id.kron(&a.transpose()).mul_vec(&psi_plus(4)).unwrap();
        let diff = lhs.iter().zip(&rhs).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        assert!(diff < 1e-14);
    }

    #[test]
    fn maximally_entangled_basis_is_orthonormal_and_complete() {
        assert!(basis_projector(site(0, 0)).max_abs_diff(&p_plus(4)) < 1e-15);
        let mut total = ComplexMatrix::zeros(16, 16);
        for s in Site::all() {
            for t in Site::all() {
                let ip = inner(&basis_vector(s), &basis_vector(t));
                let expect = if s == t { 1.0 } else { 0.0 };
                assert!((ip - c(expect, 0.0)).norm() < 1e-12);
                let tr = (&basis_projector(s) * &basis_projector(t)).trace();
                assert!((tr.re - expect).abs() < 1e-12);
            }
            total = &total + &basis_projector(s);
        }
        assert!(total.max_abs_diff(&ComplexMatrix::identity(16)) < 1e-12);
    }

    #[test]
    fn flip_swaps_factors() {
        let v = flip_v(2);
        let e = |k: usize| -> Vec<C64> { (0..4).map(|i| if i == k { ONE } else { ZERO }).collect() };
        assert_eq!(v.mul_vec(&e(0)).unwrap(), e(0));
        assert_eq!(v.mul_vec(&e(1)).unwrap(), e(2));
        assert!((&v * &v).max_abs_diff(&ComplexMatrix::identity(4)) < 1e-15);

        let a = ComplexMatrix::from_fn(2, 2, |i, j| c(i as f64 + 0.3, j as f64 * 0.7));
        let b = ComplexMatrix::from_fn(2, 2, |i, j| c(-(j as f64), 1.0 + i as f64));
        let lhs = &(&v * &a.kron(&b)) * &v;
        assert!(lhs.max_abs_diff(&b.kron(&a)) < 1e-15);

        let psi = psi_plus(4);
        assert_eq!(flip_v(4).mul_vec(&psi).unwrap(), psi);
        let u = vec![c(0.6, 0.0), c(0.0, 0.8)];
        let w = vec![ONE, ZERO];
        assert_eq!(v.mul_vec(&kron_vec(&u, &w)).unwrap(), kron_vec(&w, &u));
    }

    #[test]
    fn xi_table() {
        assert_eq!(xi(p(0), p(2)), -1);
        assert_eq!(xi(p(1), p(3)), -1);
        assert_eq!(xi(p(0), p(0)), 1);
        for a in PauliIndex::ALL {
            let row: i32 = PauliIndex::ALL.iter().map(|&g| xi(a, g) as i32).sum();
            assert_eq!(row, 2);
            for g in PauliIndex::ALL {
                assert_eq!(xi(a, g), xi(g, a));
                assert_eq!(xi(a, g) * xi(a, g), 1);
            }
        }
    }

    #[test]
    fn eta_table_and_relation_to_xi() {
        assert_eq!(eta(p(1), p(2)), -1);
        for g in PauliIndex::ALL {
            assert_eq!(eta(p(0), g), 1);
        }
        for a in PauliIndex::ALL {
            for g in PauliIndex::ALL {
                assert_eq!(xi(a, g), epsilon(a) * epsilon(g) * eta(a, g));
                let conj = &(&pauli(a) * &pauli(g)) * &pauli(a);
                assert!(conj.max_abs_diff(&pauli(g).scale_real(eta(a, g) as f64)) < 1e-15);
            }
        }
    }

    #[test]
    fn conjugated_flips_have_sign_spectra() {
        assert!(v_ab(site(0, 0)).max_abs_diff(&flip_v(4)) < 1e-15);
        let v00 = v_ab(site(0, 0));
        let psi22 = basis_vector(site(2, 2));
        let image = v00.mul_vec(&psi22).unwrap();
        let eig = inner(&psi22, &image);
        assert!((eig - c(1.0, 0.0)).norm() < 1e-12);
        for s in Site::all() {
            let v = v_ab(s);
            assert!(v.is_hermitian(1e-15));
            assert!(v.max_abs_diff(&v_ab_spectral(s)) <= 1e-12, "site {s}");
        }
    }

    #[test]
    fn site_serde_as_pair() {
        let s = site(2, 3);
        assert_eq!(serde_json::to_string(&s).unwrap(), "[2,3]");
        let back: Site = serde_json::from_str("[2,3]").unwrap();
        assert_eq!(back, s);
        assert!(serde_json::from_str::<Site>("[4,0]").is_err());
    }
}
