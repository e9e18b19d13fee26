//! Lattice subsets I ⊆ L₁₆ and the Bell-diagonal states they label.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::pauli::{projectors, Site};

/// Subset of the 4×4 lattice as a 16-bit mask; site (α, β) is bit 4·α + β.
///
/// Serializes as the sorted site list, e.g. `[[0,2],[1,1]]`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(from = "Vec<Site>", into = "Vec<Site>")]
pub struct LatticeSubset(u16);

impl LatticeSubset {
    pub const FULL: LatticeSubset = LatticeSubset(u16::MAX);

    pub fn from_mask(mask: u16) -> Self {
        Self(mask)
    }

    pub fn from_sites<I: IntoIterator<Item = Site>>(sites: I) -> Self {
        Self(sites.into_iter().fold(0, |m, s| m | (1 << s.index())))
    }

    pub fn mask(self) -> u16 {
        self.0
    }

    /// N_I
    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, site: Site) -> bool {
        self.0 >> site.index() & 1 == 1
    }

    /// Members in ascending bit order.
    pub fn sites(self) -> impl Iterator<Item = Site> {
        (0..16).filter(move |i| self.0 >> i & 1 == 1).map(Site::from_index)
    }

    pub fn complement(self) -> Self {
        Self(!self.0)
    }

    pub fn union(self, other: Self) -> Self {
        Self(self.0 | other.0)
    }

    pub fn is_disjoint(self, other: Self) -> bool {
        self.0 & other.0 == 0
    }

    /// Every nonempty subset, ascending by mask.
    pub fn all_nonempty() -> impl Iterator<Item = LatticeSubset> {
        (1..=u16::MAX).map(LatticeSubset)
    }
}

impl From<Vec<Site>> for LatticeSubset {
    fn from(v: Vec<Site>) -> Self {
        Self::from_sites(v)
    }
}

impl From<LatticeSubset> for Vec<Site> {
    fn from(s: LatticeSubset) -> Self {
        s.sites().collect()
    }
}

impl fmt::Debug for LatticeSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LatticeSubset({:#06x} {})", self.0, self)
    }
}

impl fmt::Display for LatticeSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, s) in self.sites().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{s}")?;
        }
        write!(f, "}}")
    }
}

/// Weights π_αβ indexed by [`Site::index`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightVector([f64; 16]);

impl WeightVector {
    pub const SUM_TOL: f64 = 1e-12;

    pub fn new(weights: [f64; 16]) -> Result<Self> {
        if let Some((k, w)) = weights.iter().enumerate().find(|(_, w)| !(**w >= 0.0)) {
            return Err(Error::InvalidWeights(format!(
                "weight {w} at {} is negative",
                Site::from_index(k)
            )));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > Self::SUM_TOL {
            return Err(Error::InvalidWeights(format!("weights sum to {sum}, expected 1")));
        }
        Ok(Self(weights))
    }

    /// 1/N_I on I, zero elsewhere.
    pub fn uniform_on(subset: LatticeSubset) -> Result<Self> {
        if subset.is_empty() {
            return Err(Error::EmptySubset);
        }
        let w = 1.0 / subset.len() as f64;
        let mut weights = [0.0; 16];
        for s in subset.sites() {
            weights[s.index()] = w;
        }
        Ok(Self(weights))
    }

    pub fn get(&self, site: Site) -> f64 {
        self.0[site.index()]
    }

    pub fn as_array(&self) -> &[f64; 16] {
        &self.0
    }

    pub fn support(&self) -> LatticeSubset {
        LatticeSubset::from_sites(Site::all().filter(|s| self.get(*s) > 0.0))
    }
}

/// ρ_π = Σ π_αβ P_αβ.
#[derive(Debug, Clone)]
pub struct LatticeState {
    weights: WeightVector,
    matrix: ComplexMatrix,
}

impl LatticeState {
    pub fn weights(&self) -> &WeightVector {
        &self.weights
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }
}

/// ρ_I = (1/N_I) Σ_{(α,β)∈I} P_αβ
pub fn lattice_state(subset: LatticeSubset) -> Result<LatticeState> {
    weighted_state(WeightVector::uniform_on(subset)?)
}

pub fn weighted_state(weights: WeightVector) -> Result<LatticeState> {
    let mut matrix = ComplexMatrix::zeros(16, 16);
    for (p, &w) in projectors().iter().zip(weights.as_array()) {
        if w != 0.0 {
            matrix = &matrix + &p.scale_real(w);
        }
    }
    Ok(LatticeState { weights, matrix })
}

const CROSS: &str = "×";

/// 4×4 text grid with row 3 on top and '×' at members.
pub fn render_grid(subset: LatticeSubset) -> String {
    let mut out = String::new();
    for row in (0..4u8).rev() {
        out.push_str(&format!("{row} |"));
        for col in 0..4u8 {
            let s = Site::new(col, row).expect("in range");
            let cell = if subset.contains(s) { CROSS } else { " " };
            out.push_str(&format!(" {cell} |"));
        }
        out.push('\n');
    }
    out.push_str("    0   1   2   3\n");
    out
}

/// Inverse of [`render_grid`]; accepts 'x' as well as '×'.
pub fn parse_grid(text: &str) -> Result<LatticeSubset> {
    let mut seen = [false; 4];
    let mut sites = Vec::new();
    for line in text.lines() {
        let Some((label, rest)) = line.split_once('|') else {
            continue;
        };
        let row: u8 = label
            .trim()
            .parse()
            .map_err(|_| Error::GridParse(format!("bad row label {label:?}")))?;
        if row > 3 {
            return Err(Error::GridParse(format!("row label {row} out of range")));
        }
        if std::mem::replace(&mut seen[row as usize], true) {
            return Err(Error::GridParse(format!("row {row} given twice")));
        }
        let cells: Vec<&str> = rest.split('|').collect();
        if cells.len() < 4 || cells[4..].iter().any(|c| !c.trim().is_empty()) {
            return Err(Error::GridParse(format!("row {row} needs 4 cells")));
        }
        for (col, cell) in cells[..4].iter().enumerate() {
            match cell.trim() {
                "" => {}
                "x" | "X" | CROSS => sites.push(Site::new(col as u8, row)?),
                other => return Err(Error::GridParse(format!("unexpected cell {other:?}"))),
            }
        }
    }
    if seen.iter().any(|s| !s) {
        return Err(Error::GridParse("grid must list rows 0 to 3".into()));
    }
    Ok(LatticeSubset::from_sites(sites))
}
