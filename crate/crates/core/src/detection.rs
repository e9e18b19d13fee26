//! Entanglement detection with Γ_t = γ¹_t ⊗ γ²_t and the verdict logic.
//!
//! (id₄ ⊗ Γ_t) maps P_αβ to Σ_μν p^{μν}_{αβ}(t) P_μν, so the evolved lattice
//! state stays diagonal in the P_μν basis with eigenvalues R_μν(t).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::equivalence::{find_op, orbit, EquivalenceOp, SiteMap};
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, PSD_TOL};
use crate::maps::{choi, semigroup_map, SemigroupKind, SuperOperator};
use crate::pauli::{site, xi, PauliIndex, Site};
use crate::ppt::{ppt_violation, pt_spectrum_closed_form};
use crate::separability::{separability_certificate, SeparabilityCertificate};
use crate::states::{LatticeSubset, WeightVector};

pub const DEFAULT_T_GRID: [f64; 10] = [0.001, 0.01, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.52, 0.549];

/// Time at which a relabeled cross configuration is checked numerically.
pub const CROSS_PROBE_T: f64 = 1e-3;

/// Nonempty, strictly ascending list of nonnegative times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct TGrid(Vec<f64>);

impl TGrid {
    pub fn new(times: Vec<f64>) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::GridParse("t-grid is empty".into()));
        }
        if let Some(t) = times.iter().find(|t| !(**t >= 0.0) || !t.is_finite()) {
            return Err(Error::NegativeTime(*t));
        }
        if times.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::GridParse("t-grid must be strictly ascending".into()));
        }
        Ok(Self(times))
    }

    pub fn times(&self) -> &[f64] {
        &self.0
    }
}

impl Default for TGrid {
    fn default() -> Self {
        Self(DEFAULT_T_GRID.to_vec())
    }
}

impl TryFrom<Vec<f64>> for TGrid {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<TGrid> for Vec<f64> {
    fn from(g: TGrid) -> Vec<f64> {
        g.0
    }
}

impl FromStr for TGrid {
    type Err = Error;
    /// Comma-separated times, e.g. `0.1,0.3,0.5`.
    fn from_str(s: &str) -> Result<Self> {
        let times = s
            .split(',')
            .map(|x| x.trim().parse::<f64>().map_err(|_| Error::GridParse(format!("bad time {x:?}"))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(times)
    }
}

fn delta(a: PauliIndex, b: PauliIndex) -> f64 {
    if a == b {
        1.0
    } else {
        0.0
    }
}

/// p^{μν}_{αβ}(t) = (1/16)(4e δ_αμ + 1 − e)(2(1+e) δ_βν + (1−e) ξ_βν), e = e^{−2t}.
pub fn p_coeff(mu: PauliIndex, nu: PauliIndex, alpha: PauliIndex, beta: PauliIndex, t: f64) -> f64 {
    debug_assert!(t >= 0.0, "negative time {t}");
    let e = (-2.0 * t).exp();
    (4.0 * e * delta(alpha, mu) + 1.0 - e) * (2.0 * (1.0 + e) * delta(beta, nu) + (1.0 - e) * xi(beta, nu) as f64) / 16.0
}

/// First order in t: (1 − 3t) δ_αμ δ_βν + (t/2)(δ_αμ ξ_βν + δ_βν).
pub fn p_linearized(mu: PauliIndex, nu: PauliIndex, alpha: PauliIndex, beta: PauliIndex, t: f64) -> f64 {
    (1.0 - 3.0 * t) * delta(alpha, mu) * delta(beta, nu)
        + 0.5 * t * (delta(alpha, mu) * xi(beta, nu) as f64 + delta(beta, nu))
}

/// p table at one time, indexed `[source][target]` by site index.
#[derive(Debug, Clone)]
pub struct PTable {
    t: f64,
    p: [[f64; 16]; 16],
}

impl PTable {
    pub fn new(t: f64) -> Result<Self> {
        if !(t >= 0.0) {
            return Err(Error::NegativeTime(t));
        }
        let mut p = [[0.0; 16]; 16];
        for src in Site::all() {
            for dst in Site::all() {
                p[src.index()][dst.index()] = p_coeff(dst.col, dst.row, src.col, src.row, t);
            }
        }
        Ok(Self { t, p })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn get(&self, source: Site, target: Site) -> f64 {
        self.p[source.index()][target.index()]
    }

    pub fn spectrum(&self, pi: &WeightVector) -> EvolvedSpectrum {
        let mut values = [0.0; 16];
        for (src, &w) in pi.as_array().iter().enumerate() {
            if w != 0.0 {
                for (v, p) in values.iter_mut().zip(&self.p[src]) {
                    *v += w * p;
                }
            }
        }
        EvolvedSpectrum { t: self.t, values }
    }

    /// D = (1/N_I) Σ_{(α,β)∈I} p^{αβ}_{00}(t).
    pub fn witness(&self, pi: &WeightVector) -> f64 {
        pi.as_array()
            .iter()
            .enumerate()
            .map(|(src, &w)| w * self.p[0][src])
            .sum()
    }
}

/// Eigenvalues R_μν(t) of (id₄ ⊗ Γ_t)[ρ] on the P_μν basis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolvedSpectrum {
    pub t: f64,
    pub values: [f64; 16],
}

impl EvolvedSpectrum {
    pub fn get(&self, s: Site) -> f64 {
        self.values[s.index()]
    }

    /// Most negative entry, first site on ties.
    pub fn min(&self) -> (Site, f64) {
        let mut best = (Site::from_index(0), self.values[0]);
        for (k, &v) in self.values.iter().enumerate().skip(1) {
            if v < best.1 {
                best = (Site::from_index(k), v);
            }
        }
        best
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }
}

pub fn evolved_spectrum(i: LatticeSubset, t: f64) -> Result<EvolvedSpectrum> {
    let pi = WeightVector::uniform_on(i)?;
    Ok(PTable::new(t)?.spectrum(&pi))
}

/// (id₄ ⊗ Λ)[ρ] for a map Λ on the second C⁴.
pub fn evolve_state(map: &SuperOperator, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
    map.apply_on_second_factor(rho, 4)
}

/// D_Λ[ρ] = Tr[(id₄ ⊗ Λ)[P⁴₊] ρ].
pub fn witness_d(map_t: &SuperOperator, rho: &ComplexMatrix) -> Result<f64> {
    if map_t.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: "map on 4x4 matrices".into(),
            got: format!("map on {0}x{0}", map_t.dim()),
        });
    }
    if rho.rows() != 16 || rho.cols() != 16 {
        return Err(Error::DimensionMismatch {
            expected: "16x16".into(),
            got: format!("{}x{}", rho.rows(), rho.cols()),
        });
    }
    Ok((&choi(map_t) * rho).trace().re)
}

/// Closed-form D_{Γ_t}[ρ_I].
pub fn witness_d_lattice(i: LatticeSubset, t: f64) -> Result<f64> {
    Ok(PTable::new(t)?.witness(&WeightVector::uniform_on(i)?))
}

/// Witness data: column C_γ ∪ row R_δ meets I only in `member` ≠ (γ, δ).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrossWitness {
    pub witness: Site,
    pub member: Site,
}

/// First (γ, δ) in descending order whose cross holds exactly one member,
/// and that member is off (γ, δ).
pub fn prop20_predicate(i: LatticeSubset) -> Option<CrossWitness> {
    for gamma in (0..4u8).rev() {
        for delta in (0..4u8).rev() {
            let at = site(gamma, delta);
            let mut members = i.sites().filter(|s| s.col == at.col || s.row == at.row);
            if let (Some(member), None) = (members.next(), members.next()) {
                if member != at {
                    return Some(CrossWitness { witness: at, member });
                }
            }
        }
    }
    None
}

/// Relabeling sending the witness to (3,3) and the sole member to (3,1),
/// flipping first if the member shares the row. Returns the op and the image.
pub fn prop20_canonicalize(i: LatticeSubset, w: CrossWitness) -> Result<(EquivalenceOp, LatticeSubset)> {
    let flip = w.member.col != w.witness.col;
    let (witness, member) = if flip {
        (w.witness.flipped(), w.member.flipped())
    } else {
        (w.witness, w.member)
    };
    let col_perm = perm_with(&[(witness.col.value(), 3)]);
    let row_perm = perm_with(&[(witness.row.value(), 3), (member.row.value(), 1)]);
    let op = EquivalenceOp::from_relabeling(col_perm, row_perm, flip)?;
    let image = crate::equivalence::apply_op(i, &op);
    Ok((op, image))
}

/// Permutation with the given fixed assignments, other labels in order.
fn perm_with(fixed: &[(u8, u8)]) -> [u8; 4] {
    let mut perm = [u8::MAX; 4];
    let mut used = [false; 4];
    for &(from, to) in fixed {
        perm[from as usize] = to;
        used[to as usize] = true;
    }
    let mut free = (0..4u8).filter(|&x| !used[x as usize]);
    for p in perm.iter_mut().filter(|p| **p == u8::MAX) {
        *p = free.next().expect("enough labels");
    }
    perm
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Detection {
    /// Cross condition, with R₃₃ of the relabeled configuration at a small t.
    CrossCondition {
        witness: Site,
        member: Site,
        relabeled: LatticeSubset,
        t: f64,
        r33: f64,
    },
    NegativeEigenvalue {
        t: f64,
        site: Site,
        value: f64,
    },
    NegativeWitness {
        t: f64,
        value: f64,
    },
}

impl Detection {
    pub fn t(&self) -> f64 {
        match self {
            Self::CrossCondition { t, .. } | Self::NegativeEigenvalue { t, .. } | Self::NegativeWitness { t, .. } => *t,
        }
    }
}

impl fmt::Display for Detection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::CrossCondition { witness, member, relabeled, t, r33 } => write!(
                f,
                "cross at {witness} with sole member {member}; relabeled to {relabeled}, R33({t}) = {r33:.4e}"
            ),
            Self::NegativeEigenvalue { t, site, value } => write!(f, "R at {site} is {value:.4e} at t = {t}"),
            Self::NegativeWitness { t, value } => write!(f, "D({t}) = {value:.4e}"),
        }
    }
}

/// Detection made on `subset`; `site_map` relabels the classified subset onto
/// it when the two differ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntanglementEvidence {
    pub detection: Detection,
    pub subset: LatticeSubset,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub site_map: Option<SiteMap>,
}

/// PPT certificate: least eigenvalue of the partial transpose (closed form).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PptCertificate {
    pub min_pt_eigenvalue: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum VerdictKind {
    NptEntangled,
    BoundEntangled,
    SeparableCertified,
    PptUndetermined,
}

impl fmt::Display for VerdictKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::NptEntangled => "NPT_ENTANGLED",
            Self::BoundEntangled => "BOUND_ENTANGLED",
            Self::SeparableCertified => "SEPARABLE_CERTIFIED",
            Self::PptUndetermined => "PPT_UNDETERMINED",
        })
    }
}

/// Classification outcome. Entangled-PPT and separable verdicts carry both
/// their PPT certificate and the positive evidence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    NptEntangled {
        violation: Site,
        min_pt_eigenvalue: f64,
    },
    BoundEntangled {
        ppt: PptCertificate,
        evidence: EntanglementEvidence,
    },
    SeparableCertified {
        ppt: PptCertificate,
        certificate: SeparabilityCertificate,
    },
    PptUndetermined {
        ppt: PptCertificate,
    },
}

impl Verdict {
    pub fn kind(&self) -> VerdictKind {
        match self {
            Self::NptEntangled { .. } => VerdictKind::NptEntangled,
            Self::BoundEntangled { .. } => VerdictKind::BoundEntangled,
            Self::SeparableCertified { .. } => VerdictKind::SeparableCertified,
            Self::PptUndetermined { .. } => VerdictKind::PptUndetermined,
        }
    }

    /// Detecting time for bound-entangled verdicts.
    pub fn evidence_t(&self) -> Option<f64> {
        match self {
            Self::BoundEntangled { evidence, .. } => Some(evidence.detection.t()),
            _ => None,
        }
    }

    pub fn certificate(&self) -> Option<&SeparabilityCertificate> {
        match self {
            Self::SeparableCertified { certificate, .. } => Some(certificate),
            _ => None,
        }
    }
}

/// Grid-bound classifier with precomputed p tables.
#[derive(Debug, Clone)]
pub struct Classifier {
    tables: Vec<PTable>,
    tol: f64,
    probe: PTable,
}

impl Default for Classifier {
    fn default() -> Self {
        Self::new(&TGrid::default(), PSD_TOL).expect("default grid is valid")
    }
}

impl Classifier {
    pub fn new(grid: &TGrid, tol: f64) -> Result<Self> {
        if !(tol > 0.0) {
            return Err(Error::Hypothesis(format!("tolerance must be positive, got {tol}")));
        }
        Ok(Self {
            tables: grid.times().iter().map(|&t| PTable::new(t)).collect::<Result<_>>()?,
            tol,
            probe: PTable::new(CROSS_PROBE_T)?,
        })
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn tables(&self) -> &[PTable] {
        &self.tables
    }

    /// Evidence found on `i` itself: the cross condition, then negative
    /// R_μν on the grid, then a negative witness value.
    pub fn direct_evidence(&self, i: LatticeSubset) -> Result<Option<Detection>> {
        if let Some(w) = prop20_predicate(i) {
            let (_, relabeled) = prop20_canonicalize(i, w)?;
            let r33 = self.probe.spectrum(&WeightVector::uniform_on(relabeled)?).get(site(3, 3));
            return Ok(Some(Detection::CrossCondition {
                witness: w.witness,
                member: w.member,
                relabeled,
                t: CROSS_PROBE_T,
                r33,
            }));
        }
        let pi = WeightVector::uniform_on(i)?;
        for table in &self.tables {
            let (site, value) = table.spectrum(&pi).min();
            if value < -self.tol {
                return Ok(Some(Detection::NegativeEigenvalue { t: table.t(), site, value }));
            }
        }
        for table in &self.tables {
            let value = table.witness(&pi);
            if value < -self.tol {
                return Ok(Some(Detection::NegativeWitness { t: table.t(), value }));
            }
        }
        Ok(None)
    }

    fn ppt_certificate(i: LatticeSubset) -> Result<PptCertificate> {
        let spec = pt_spectrum_closed_form(&WeightVector::uniform_on(i)?);
        Ok(PptCertificate {
            min_pt_eigenvalue: spec.iter().copied().fold(f64::INFINITY, f64::min),
        })
    }

    /// NPT check, then detection on `i` or, failing that, on the first orbit
    /// member (ascending mask) with evidence, then separability certificates.
    pub fn classify(&self, i: LatticeSubset) -> Result<Verdict> {
        if i.is_empty() {
            return Err(Error::EmptySubset);
        }
        let ppt = Self::ppt_certificate(i)?;
        if let Some(violation) = ppt_violation(i) {
            return Ok(Verdict::NptEntangled {
                violation,
                min_pt_eigenvalue: ppt.min_pt_eigenvalue,
            });
        }
        if let Some(detection) = self.direct_evidence(i)? {
            return Ok(Verdict::BoundEntangled {
                ppt,
                evidence: EntanglementEvidence {
                    detection,
                    subset: i,
                    site_map: None,
                },
            });
        }
        for member in orbit(i).into_iter().filter(|&m| m != i) {
            if let Some(detection) = self.direct_evidence(member)? {
                return Ok(self.transported(i, member, detection, ppt));
            }
        }
        self.finish(i, ppt)
    }

    /// Verdicts for every member of the orbit of `i`, ascending; the same
    /// values `classify` gives member by member, sharing the orbit scan.
    pub fn classify_orbit(&self, i: LatticeSubset) -> Result<Vec<(LatticeSubset, Verdict)>> {
        let members = orbit(i);
        if ppt_violation(i).is_some() || i.is_empty() {
            return members.into_iter().map(|m| Ok((m, self.classify(m)?))).collect();
        }
        let direct = members
            .iter()
            .map(|&m| self.direct_evidence(m))
            .collect::<Result<Vec<_>>>()?;
        let first = members.iter().zip(&direct).find_map(|(&m, d)| d.clone().map(|d| (m, d)));
        members
            .iter()
            .zip(direct)
            .map(|(&m, d)| {
                let ppt = Self::ppt_certificate(m)?;
                let verdict = match (d, &first) {
                    (Some(detection), _) => Verdict::BoundEntangled {
                        ppt,
                        evidence: EntanglementEvidence {
                            detection,
                            subset: m,
                            site_map: None,
                        },
                    },
                    (None, Some((source, detection))) => self.transported(m, *source, detection.clone(), ppt),
                    (None, None) => self.finish(m, ppt)?,
                };
                Ok((m, verdict))
            })
            .collect()
    }

    fn transported(&self, i: LatticeSubset, source: LatticeSubset, detection: Detection, ppt: PptCertificate) -> Verdict {
        let op = find_op(i, source).expect("orbit members are related");
        Verdict::BoundEntangled {
            ppt,
            evidence: EntanglementEvidence {
                detection,
                subset: source,
                site_map: Some(*op.site_map()),
            },
        }
    }

    fn finish(&self, i: LatticeSubset, ppt: PptCertificate) -> Result<Verdict> {
        Ok(match separability_certificate(i)? {
            Some(certificate) => Verdict::SeparableCertified { ppt, certificate },
            None => Verdict::PptUndetermined { ppt },
        })
    }
}

pub fn classify(i: LatticeSubset, t_grid: &TGrid) -> Result<Verdict> {
    Classifier::new(t_grid, PSD_TOL)?.classify(i)
}

/// Γ_t superoperator on 4×4 matrices, for the matrix route.
pub fn gamma_map(t: f64) -> Result<SuperOperator> {
    semigroup_map(SemigroupKind::Gamma, t)
}
