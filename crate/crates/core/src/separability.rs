//! Separability certificates for PPT lattice states.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::equivalence::{apply_op, canonical_form, find_op, EquivalenceOp, SiteMap};
use crate::error::{Error, Result};
use crate::linalg::{c, kron_vec, vec_norm, ComplexMatrix, C64, ONE, ZERO};
use crate::pauli::{projectors, site};
use crate::ppt::ppt_combinatorial;
use crate::states::{lattice_state, LatticeSubset};

const LOCAL_DIM: usize = 4;
const ENSEMBLE_TOL: f64 = 1e-12;
/// Tolerance for ensembles rebuilt through an equivalence op.
pub const TRANSPORT_TOL: f64 = 1e-10;

/// Convex combination Σ wᵢ |aᵢ⟩⟨aᵢ| ⊗ |bᵢ⟩⟨bᵢ| of product vectors on C⁴ ⊗ C⁴.
///
/// Complex entries serialize as `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawEnsemble")]
pub struct ProductEnsemble {
    weights: Vec<f64>,
    factors: Vec<(Vec<C64>, Vec<C64>)>,
}

#[derive(Deserialize)]
struct RawEnsemble {
    weights: Vec<f64>,
    factors: Vec<(Vec<C64>, Vec<C64>)>,
}

impl TryFrom<RawEnsemble> for ProductEnsemble {
    type Error = Error;
    fn try_from(raw: RawEnsemble) -> Result<Self> {
        Self::new(raw.weights, raw.factors)
    }
}

impl ProductEnsemble {
    pub fn new(weights: Vec<f64>, factors: Vec<(Vec<C64>, Vec<C64>)>) -> Result<Self> {
        if weights.len() != factors.len() || weights.is_empty() {
            return Err(Error::InvalidWeights(format!(
                "{} weights for {} factor pairs",
                weights.len(),
                factors.len()
            )));
        }
        if let Some(w) = weights.iter().find(|&&w| !(w >= 0.0)) {
            return Err(Error::InvalidWeights(format!("negative weight {w}")));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > ENSEMBLE_TOL {
            return Err(Error::InvalidWeights(format!("weights sum to {sum}")));
        }
        for (a, b) in &factors {
            for v in [a, b] {
                if v.len() != LOCAL_DIM {
                    return Err(Error::DimensionMismatch {
                        expected: format!("vector in C^{LOCAL_DIM}"),
                        got: format!("length {}", v.len()),
                    });
                }
                let n = vec_norm(v);
                if (n - 1.0).abs() > ENSEMBLE_TOL {
                    return Err(Error::InvalidWeights(format!("factor with norm {n}")));
                }
            }
        }
        Ok(Self { weights, factors })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn factors(&self) -> &[(Vec<C64>, Vec<C64>)] {
        &self.factors
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// The 16-dimensional product vectors aᵢ ⊗ bᵢ.
    pub fn product_vectors(&self) -> impl Iterator<Item = Vec<C64>> + '_ {
        self.factors.iter().map(|(a, b)| kron_vec(a, b))
    }

    pub fn density_matrix(&self) -> ComplexMatrix {
        self.weights
            .iter()
            .zip(self.product_vectors())
            .fold(ComplexMatrix::zeros(16, 16), |acc, (&w, v)| {
                &acc + &ComplexMatrix::outer(&v, &v).scale_real(w)
            })
    }

    /// Image under the local unitary U* ⊗ W of an equivalence op.
    pub fn transport(&self, op: &EquivalenceOp) -> Result<Self> {
        let factors = self
            .factors
            .iter()
            .map(|(a, b)| op.transport_product(a, b))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            weights: self.weights.clone(),
            factors,
        })
    }
}

/// True iff the ensemble reproduces `rho` entrywise within `tol`, with
/// normalized weights and unit C⁴ factors on each side of the cut.
pub fn verify_ensemble(rho: &ComplexMatrix, e: &ProductEnsemble, tol: f64) -> bool {
    if rho.rows() != LOCAL_DIM * LOCAL_DIM || rho.cols() != LOCAL_DIM * LOCAL_DIM {
        return false;
    }
    let weights_ok = e.weights.iter().all(|&w| w >= 0.0) && (e.weights.iter().sum::<f64>() - 1.0).abs() <= tol;
    let factors_ok = e
        .factors
        .iter()
        .all(|(a, b)| a.len() == LOCAL_DIM && b.len() == LOCAL_DIM && (vec_norm(a) - 1.0).abs() <= tol && (vec_norm(b) - 1.0).abs() <= tol);
    weights_ok && factors_ok && e.density_matrix().max_abs_diff(rho) <= tol
}

/// ρ₆ = (1/6)(P₀₀ + P₀₁ + P₀₂ + P₃₀ + P₃₁ + P₃₂).
pub fn rho6_subset() -> LatticeSubset {
    LatticeSubset::from_sites([site(0, 0), site(0, 1), site(0, 2), site(3, 0), site(3, 1), site(3, 2)])
}

/// Twelve product vectors with weight 1/12 each whose mixture is ρ₆.
///
/// Inside each C⁴ the basis is |00⟩, |01⟩, |10⟩, |11⟩ with |0⟩, |1⟩ the σ₃
/// eigenstates.
pub fn rho6_ensemble() -> ProductEnsemble {
    let ket = |k: usize| -> Vec<C64> { (0..LOCAL_DIM).map(|j| if j == k { ONE } else { ZERO }).collect() };
    let combo = |a: &[C64], b: &[C64], z: C64| -> Vec<C64> {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x + z * y) * std::f64::consts::FRAC_1_SQRT_2)
            .collect()
    };
    let mut factors = Vec::with_capacity(12);
    for q in 0..2 {
        let (a, b) = (ket(2 * q), ket(2 * q + 1));
        for s in [1.0, -1.0] {
            let plus = combo(&a, &b, c(s, 0.0));
            factors.push((plus.clone(), plus));
            factors.push((combo(&a, &b, c(0.0, s)), combo(&a, &b, c(0.0, -s))));
        }
    }
    for (x, y) in [(0, 1), (1, 0), (2, 3), (3, 2)] {
        factors.push((ket(x), ket(y)));
    }
    ProductEnsemble::new(vec![1.0 / 12.0; 12], factors).expect("valid ρ₆ ensemble")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CertificateKind {
    Rank4Rule,
    Isotropic15,
    Rho6Explicit,
    Rank14Convex,
    Ensemble,
}

impl fmt::Display for CertificateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Rank4Rule => "RANK4_RULE",
            Self::Isotropic15 => "ISOTROPIC15",
            Self::Rho6Explicit => "RHO6_EXPLICIT",
            Self::Rank14Convex => "RANK14_CONVEX",
            Self::Ensemble => "ENSEMBLE",
        })
    }
}

/// One separable summand of a convex certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificatePiece {
    pub weight: f64,
    pub subset: LatticeSubset,
    pub kind: CertificateKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparabilityCertificate {
    pub kind: CertificateKind,
    /// Set when the rule is taken from the literature rather than rebuilt here.
    pub literature_backed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ensemble: Option<ProductEnsemble>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fidelity: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub pieces: Vec<CertificatePiece>,
    /// Orbit member the argument is made on, and the site map onto it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<LatticeSubset>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub site_map: Option<SiteMap>,
}

impl SeparabilityCertificate {
    fn bare(kind: CertificateKind, literature_backed: bool) -> Self {
        Self {
            kind,
            literature_backed,
            ensemble: None,
            fidelity: None,
            pieces: Vec::new(),
            reference: None,
            site_map: None,
        }
    }
}

/// Representative of the 14-element class with holes at (2,3) and (3,3).
pub fn rank14_reference() -> LatticeSubset {
    LatticeSubset::from_sites([site(2, 3), site(3, 3)]).complement()
}

/// Diamonds, circles and crosses of the rank-14 reference, with weights.
pub fn rank14_pieces() -> [(f64, LatticeSubset); 3] {
    let block = |cols: &[u8], rows: &[u8]| {
        LatticeSubset::from_sites(cols.iter().flat_map(|&a| rows.iter().map(move |&b| site(a, b))))
    };
    [
        (4.0 / 14.0, block(&[0, 1], &[0, 1])),
        (4.0 / 14.0, block(&[0, 1], &[2, 3])),
        (6.0 / 14.0, block(&[2, 3], &[0, 1, 2])),
    ]
}

pub fn isotropic15_reference() -> LatticeSubset {
    LatticeSubset::from_sites([site(0, 0)]).complement()
}

/// A certificate from the first matching rule, or `None`.
pub fn separability_certificate(i: LatticeSubset) -> Result<Option<SeparabilityCertificate>> {
    if !ppt_combinatorial(i)? {
        return Ok(None);
    }
    let n = i.len();
    if n <= 4 {
        return Ok(Some(SeparabilityCertificate::bare(CertificateKind::Rank4Rule, true)));
    }
    if n == 15 {
        let reference = isotropic15_reference();
        let op = find_op(i, reference).ok_or_else(|| Error::Consistency("N_I = 15 outside the isotropic class".into()))?;
        let rho = lattice_state(reference)?.into_matrix();
        let fidelity = rho.hs_inner(&projectors()[0]).re;
        let mut cert = SeparabilityCertificate::bare(CertificateKind::Isotropic15, true);
        cert.fidelity = Some(fidelity);
        cert.reference = Some(reference);
        cert.site_map = Some(*op.site_map());
        return Ok(Some(cert));
    }
    let rho6 = rho6_subset();
    if canonical_form(i) == canonical_form(rho6) {
        let op = find_op(rho6, i).expect("same orbit");
        let ensemble = rho6_ensemble().transport(&op)?;
        let rho = lattice_state(i)?.into_matrix();
        if !verify_ensemble(&rho, &ensemble, TRANSPORT_TOL) {
            return Err(Error::Consistency(format!("transported ρ₆ ensemble fails for {i}")));
        }
        let mut cert = SeparabilityCertificate::bare(CertificateKind::Rho6Explicit, false);
        cert.ensemble = Some(ensemble);
        cert.reference = Some(rho6);
        cert.site_map = Some(*op.inverse().site_map());
        return Ok(Some(cert));
    }
    if n == 14 {
        let reference = rank14_reference();
        let op = find_op(i, reference).ok_or_else(|| Error::Consistency("N_I = 14 outside the reference class".into()))?;
        let back = op.inverse();
        let mut pieces = Vec::with_capacity(3);
        for (weight, piece) in rank14_pieces() {
            let subset = apply_op(piece, &back);
            let kind = separability_certificate(subset)?
                .ok_or_else(|| Error::Consistency(format!("rank-14 piece {subset} not certified")))?
                .kind;
            pieces.push(CertificatePiece { weight, subset, kind });
        }
        let mut cert = SeparabilityCertificate::bare(CertificateKind::Rank14Convex, false);
        cert.pieces = pieces;
        cert.reference = Some(reference);
        cert.site_map = Some(*op.site_map());
        return Ok(Some(cert));
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hermitian_eigen, inner};
    use crate::pauli::{p_plus, psi_plus};

    fn subset(sites: &[(u8, u8)]) -> LatticeSubset {
        LatticeSubset::from_sites(sites.iter().map(|&(a, b)| site(a, b)))
    }

    /// Schmidt rank of a vector on C⁴ ⊗ C⁴ via its 4×4 coefficient matrix.
    fn schmidt_rank(v: &[C64]) -> usize {
        let m = ComplexMatrix::from_fn(4, 4, |i, j| v[4 * i + j]);
        hermitian_eigen(&(&m * &m.adjoint())).unwrap().rank(1e-12)
    }

    #[test]
    fn rho6_ensemble_reproduces_rho6() {
        let e = rho6_ensemble();
        assert_eq!(e.len(), 12);
        assert!(e.weights().iter().all(|&w| (w - 1.0 / 12.0).abs() < 1e-15));
        assert!(e.product_vectors().all(|v| schmidt_rank(&v) == 1));
        let rho6 = lattice_state(rho6_subset()).unwrap().into_matrix();
        assert!(e.density_matrix().max_abs_diff(&rho6) <= 1e-12);
        assert!(verify_ensemble(&rho6, &e, 1e-12));
    }

    #[test]
    fn verify_rejects_wrong_ensembles() {
        let rho6 = lattice_state(rho6_subset()).unwrap().into_matrix();
        let e = rho6_ensemble();
        let mut weights = e.weights().to_vec();
        weights[0] = 1.0 / 11.0;
        let bumped = ProductEnsemble {
            weights,
            factors: e.factors().to_vec(),
        };
        assert!(!verify_ensemble(&rho6, &bumped, 1e-12));

        // Best product-state overlap with |Ψ⁴₊⟩ is 1/4, so no product ensemble fits.
        let a: Vec<C64> = (0..4).map(|k| if k == 0 { ONE } else { ZERO }).collect();
        let single = ProductEnsemble::new(vec![1.0], vec![(a.clone(), a.clone())]).unwrap();
        assert!(!verify_ensemble(&p_plus(4), &single, 1e-6));
        let overlap = inner(&kron_vec(&a, &a), &psi_plus(4)).norm_sqr();
        assert!((overlap - 0.25).abs() < 1e-15);
    }

    #[test]
    fn ensemble_validation() {
        let v: Vec<C64> = vec![ONE, ZERO, ZERO, ZERO];
        assert!(ProductEnsemble::new(vec![0.5], vec![(v.clone(), v.clone())]).is_err());
        assert!(ProductEnsemble::new(vec![1.0], vec![(v[..2].to_vec(), v.clone())]).is_err());
        let long = vec![ONE, ONE, ZERO, ZERO];
        assert!(ProductEnsemble::new(vec![1.0], vec![(long, v)]).is_err());
    }

    #[test]
    fn ensemble_json_uses_pairs() {
        let e = rho6_ensemble();
        let json = serde_json::to_value(&e).unwrap();
        assert_eq!(json["factors"][0][0][0].as_array().unwrap().len(), 2);
        let back: ProductEnsemble = serde_json::from_value(json).unwrap();
        assert!(back.density_matrix().max_abs_diff(&e.density_matrix()) < 1e-15);
    }

    #[test]
    fn certificate_examples() {
        let missing00 = isotropic15_reference();
        let cert = separability_certificate(missing00).unwrap().unwrap();
        assert_eq!(cert.kind, CertificateKind::Isotropic15);
        assert!(cert.fidelity.unwrap().abs() < 1e-15);

        let left6 = subset(&[(0, 0), (1, 0), (2, 0), (0, 1), (1, 1), (2, 1)]);
        let cert = separability_certificate(left6).unwrap().unwrap();
        assert_eq!(cert.kind, CertificateKind::Rho6Explicit);
        let rho = lattice_state(left6).unwrap().into_matrix();
        assert!(verify_ensemble(&rho, cert.ensemble.as_ref().unwrap(), 1e-10));

        let cert = separability_certificate(rank14_reference()).unwrap().unwrap();
        assert_eq!(cert.kind, CertificateKind::Rank14Convex);
        let kinds: Vec<_> = cert.pieces.iter().map(|p| p.kind).collect();
        assert_eq!(
            kinds,
            [CertificateKind::Rank4Rule, CertificateKind::Rank4Rule, CertificateKind::Rho6Explicit]
        );

        let diag = subset(&[(0, 0), (1, 1), (2, 2), (3, 3)]);
        assert_eq!(separability_certificate(diag).unwrap().unwrap().kind, CertificateKind::Rank4Rule);
        assert!(separability_certificate(subset(&[(0, 0)])).unwrap().is_none());
        assert!(separability_certificate(LatticeSubset::default()).is_err());
    }

    #[test]
    fn rank14_pieces_rebuild_the_state() {
        for i in LatticeSubset::all_nonempty().filter(|i| i.len() == 14).step_by(7) {
            let cert = separability_certificate(i).unwrap().unwrap();
            let sum = cert.pieces.iter().fold(ComplexMatrix::zeros(16, 16), |acc, p| {
                &acc + &lattice_state(p.subset).unwrap().into_matrix().scale_real(p.weight)
            });
            assert!(sum.max_abs_diff(lattice_state(i).unwrap().matrix()) < 1e-12);
            let union = cert.pieces.iter().fold(LatticeSubset::default(), |u, p| u.union(p.subset));
            assert_eq!(union, i);
        }
    }
}
