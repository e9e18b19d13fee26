//! Local-unitary relabelings of the lattice.
//!
//! A pair (U, W) with W σ_αβ U† ∝ σ_γδ for every site sends ρ_I to
//! (U*⊗W) ρ_I (Uᵀ⊗W†) = ρ_Î, where Î is the image of I under the induced site
//! bijection. The bijections realized by two-qubit Clifford pairs form a group
//! of order 11520 (affine symplectic maps on F₂⁴); it contains all column and
//! row permutations together with the flip. Every element keeps its unitary
//! pair so that product ensembles and other evidence can be transported.

use std::collections::HashMap;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::linalg::{c, ComplexMatrix, C64, ONE, ZERO};
use crate::pauli::{pauli, sigma_ab, PauliIndex, Site};
use crate::states::LatticeSubset;

pub const GROUP_ORDER: usize = 11520;

/// Site bijection as an image table indexed by [`Site::index`].
pub type SiteMap = [u8; 16];

#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceOp {
    site_map: SiteMap,
    w: ComplexMatrix,
    u: ComplexMatrix,
}

impl EquivalenceOp {
    pub fn identity() -> Self {
        Self {
            site_map: std::array::from_fn(|i| i as u8),
            w: ComplexMatrix::identity(4),
            u: ComplexMatrix::identity(4),
        }
    }

    /// Derive the site bijection of a unitary pair, failing if some W σ_αβ U†
    /// is not proportional to a single σ_γδ.
    pub fn from_unitaries(w: ComplexMatrix, u: ComplexMatrix) -> Result<Self> {
        for m in [&w, &u] {
            if m.rows() != 4 || m.cols() != 4 {
                return Err(Error::DimensionMismatch {
                    expected: "4x4".into(),
                    got: format!("{}x{}", m.rows(), m.cols()),
                });
            }
            if (m * &m.adjoint()).max_abs_diff(&ComplexMatrix::identity(4)) > 1e-10 {
                return Err(Error::Hypothesis("relabeling needs unitary matrices".into()));
            }
        }
        let u_dag = u.adjoint();
        let mut site_map = [0u8; 16];
        let mut hit = [false; 16];
        for s in Site::all() {
            let m = &(&w * &sigma_ab(s)) * &u_dag;
            let image = Site::all()
                .find(|&t| (sigma_ab(t).hs_inner(&m).norm() / 4.0 - 1.0).abs() < 1e-9)
                .ok_or_else(|| Error::Hypothesis(format!("W σ{s} U† is not a scaled Pauli product")))?;
            site_map[s.index()] = image.index() as u8;
            hit[image.index()] = true;
        }
        debug_assert!(hit.iter().all(|&h| h));
        Ok(Self { site_map, w, u })
    }

    /// Group element acting as (α, β) ↦ (π_c(α'), π_r(β')) with
    /// (α', β') = (β, α) when `flip` is set.
    pub fn from_relabeling(col_perm: [u8; 4], row_perm: [u8; 4], flip: bool) -> Result<Self> {
        let mut seen = [[false; 4]; 2];
        for (k, perm) in [col_perm, row_perm].iter().enumerate() {
            for &x in perm {
                if x > 3 || std::mem::replace(&mut seen[k][x as usize], true) {
                    return Err(Error::Hypothesis(format!("{perm:?} is not a permutation of 0..4")));
                }
            }
        }
        let site_map = std::array::from_fn(|i| {
            let s = Site::from_index(i);
            let s = if flip { s.flipped() } else { s };
            (4 * col_perm[s.col.idx()] + row_perm[s.row.idx()]) as u8
        });
        group()
            .element(&site_map)
            .cloned()
            .ok_or_else(|| Error::Consistency("relabeling missing from the group".into()))
    }

    pub fn site_map(&self) -> &SiteMap {
        &self.site_map
    }

    pub fn map_site(&self, s: Site) -> Site {
        Site::from_index(self.site_map[s.index()] as usize)
    }

    pub fn w(&self) -> &ComplexMatrix {
        &self.w
    }

    pub fn u(&self) -> &ComplexMatrix {
        &self.u
    }

    /// `self` after `first`.
    pub fn compose(&self, first: &Self) -> Self {
        Self {
            site_map: std::array::from_fn(|i| self.site_map[first.site_map[i] as usize]),
            w: &self.w * &first.w,
            u: &self.u * &first.u,
        }
    }

    pub fn inverse(&self) -> Self {
        let mut site_map = [0u8; 16];
        for (i, &j) in self.site_map.iter().enumerate() {
            site_map[j as usize] = i as u8;
        }
        Self {
            site_map,
            w: self.w.adjoint(),
            u: self.u.adjoint(),
        }
    }

    /// U* ⊗ W, the unitary acting on C⁴ ⊗ C⁴.
    pub fn state_unitary(&self) -> ComplexMatrix {
        self.u.conj().kron(&self.w)
    }

    /// (U* a) ⊗ (W b) factors of a transported product vector.
    pub fn transport_product(&self, a: &[C64], b: &[C64]) -> Result<(Vec<C64>, Vec<C64>)> {
        Ok((self.u.conj().mul_vec(a)?, self.w.mul_vec(b)?))
    }

    /// Column/row permutations and flip if the op is a pure relabeling.
    pub fn relabeling(&self) -> Option<([u8; 4], [u8; 4], bool)> {
        let img = |a: u8, b: u8| Site::from_index(self.site_map[(4 * a + b) as usize] as usize);
        // A product relabeling sends lines to lines; the image of column 0
        // tells whether it is a column or a row.
        let flip = img(0, 0).col != img(0, 1).col;
        let mut col_perm = [0u8; 4];
        let mut row_perm = [0u8; 4];
        for x in 0..4u8 {
            let (cx, rx) = if flip { (img(0, x).col, img(x, 0).row) } else { (img(x, 0).col, img(0, x).row) };
            col_perm[x as usize] = cx.value();
            row_perm[x as usize] = rx.value();
        }
        let candidate: SiteMap = std::array::from_fn(|i| {
            let s = Site::from_index(i);
            let s = if flip { s.flipped() } else { s };
            (4 * col_perm[s.col.idx()] + row_perm[s.row.idx()]) as u8
        });
        (candidate == self.site_map).then_some((col_perm, row_perm, flip))
    }
}

pub fn apply_op(i: LatticeSubset, op: &EquivalenceOp) -> LatticeSubset {
    LatticeSubset::from_mask(permute_mask(i.mask(), &op.site_map))
}

fn permute_mask(mask: u16, map: &SiteMap) -> u16 {
    let mut out = 0u16;
    let mut m = mask;
    while m != 0 {
        let i = m.trailing_zeros() as usize;
        out |= 1 << map[i];
        m &= m - 1;
    }
    out
}

fn generators() -> Vec<EquivalenceOp> {
    let id2 = ComplexMatrix::identity(2);
    let h = ComplexMatrix::from_real_rows(&[&[1.0, 1.0], &[1.0, -1.0]]).scale_real(std::f64::consts::FRAC_1_SQRT_2);
    let s = ComplexMatrix::diag(&[ONE, c(0.0, 1.0)]);
    let perm4 = |p: [usize; 4]| ComplexMatrix::from_fn(4, 4, |i, j| if p[j] == i { ONE } else { ZERO });
    let cnot = perm4([0, 1, 3, 2]);
    let swap = perm4([0, 2, 1, 3]);
    let clifford = [h.kron(&id2), s.kron(&id2), id2.kron(&h), id2.kron(&s), cnot, swap];
    let p = |k: u8| pauli(PauliIndex::new(k).expect("index"));
    let translations = [p(1).kron(&id2), p(3).kron(&id2), id2.kron(&p(1)), id2.kron(&p(3))];
    clifford
        .into_iter()
        .map(|g| EquivalenceOp::from_unitaries(g.clone(), g))
        .chain(
            translations
                .into_iter()
                .map(|t| EquivalenceOp::from_unitaries(t, ComplexMatrix::identity(4))),
        )
        .collect::<Result<_>>()
        .expect("generators are Clifford pairs")
}

/// The relabeling group with orbit tables for all 2¹⁶ masks.
pub struct EquivalenceGroup {
    ops: Vec<EquivalenceOp>,
    index: HashMap<SiteMap, usize>,
    inverse: Vec<usize>,
    canonical: Vec<u16>,
    // op index sending each mask to its canonical form
    to_canonical: Vec<u16>,
    orbit_size: Vec<u16>,
}

impl EquivalenceGroup {
    fn build() -> Self {
        let gens = generators();
        let mut ops = vec![EquivalenceOp::identity()];
        let mut index = HashMap::from([(ops[0].site_map, 0usize)]);
        let mut frontier = vec![0usize];
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for &k in &frontier {
                for g in &gens {
                    let candidate = g.compose(&ops[k]);
                    if !index.contains_key(&candidate.site_map) {
                        index.insert(candidate.site_map, ops.len());
                        next.push(ops.len());
                        ops.push(candidate);
                    }
                }
            }
            frontier = next;
        }
        assert_eq!(ops.len(), GROUP_ORDER, "relabeling group has unexpected order");
        let inverse: Vec<usize> = ops.iter().map(|op| index[&op.inverse().site_map]).collect();

        let n = 1usize << 16;
        let mut canonical = vec![u16::MAX; n];
        let mut to_canonical = vec![0u16; n];
        let mut orbit_size = vec![0u16; n];
        let mut visited = vec![false; n];
        for mask in 0..n {
            if visited[mask] {
                continue;
            }
            // Ascending scan: the first unvisited mask is its orbit's minimum.
            let mut members = Vec::new();
            for (k, op) in ops.iter().enumerate() {
                let image = permute_mask(mask as u16, &op.site_map) as usize;
                if !visited[image] {
                    visited[image] = true;
                    canonical[image] = mask as u16;
                    to_canonical[image] = inverse[k] as u16;
                    members.push(image);
                }
            }
            for &m in &members {
                orbit_size[m] = members.len() as u16;
            }
        }
        Self {
            ops,
            index,
            inverse,
            canonical,
            to_canonical,
            orbit_size,
        }
    }

    pub fn ops(&self) -> &[EquivalenceOp] {
        &self.ops
    }

    pub fn element(&self, map: &SiteMap) -> Option<&EquivalenceOp> {
        self.index.get(map).map(|&k| &self.ops[k])
    }

    pub fn canonical_form(&self, i: LatticeSubset) -> LatticeSubset {
        LatticeSubset::from_mask(self.canonical[i.mask() as usize])
    }

    /// Op sending `i` to its canonical form.
    pub fn to_canonical(&self, i: LatticeSubset) -> &EquivalenceOp {
        &self.ops[self.to_canonical[i.mask() as usize] as usize]
    }

    pub fn orbit_size(&self, i: LatticeSubset) -> usize {
        self.orbit_size[i.mask() as usize] as usize
    }

    /// Op sending `from` to `to`, if they share an orbit.
    pub fn find_op(&self, from: LatticeSubset, to: LatticeSubset) -> Option<EquivalenceOp> {
        if self.canonical_form(from) != self.canonical_form(to) {
            return None;
        }
        let a = self.to_canonical[from.mask() as usize] as usize;
        let b = self.to_canonical[to.mask() as usize] as usize;
        Some(self.ops[self.inverse[b]].compose(&self.ops[a]))
    }

    /// Canonical representatives of all orbits, ascending.
    pub fn representatives(&self) -> Vec<LatticeSubset> {
        (0..=u16::MAX)
            .filter(|&m| self.canonical[m as usize] == m)
            .map(LatticeSubset::from_mask)
            .collect()
    }
}

/// Shared group instance, built on first use.
pub fn group() -> &'static EquivalenceGroup {
    static GROUP: OnceLock<EquivalenceGroup> = OnceLock::new();
    GROUP.get_or_init(EquivalenceGroup::build)
}

/// Minimal mask over the orbit.
pub fn canonical_form(i: LatticeSubset) -> LatticeSubset {
    group().canonical_form(i)
}

/// Distinct images of `i`, ascending by mask.
pub fn orbit(i: LatticeSubset) -> Vec<LatticeSubset> {
    let mut out: Vec<LatticeSubset> = group().ops.iter().map(|op| apply_op(i, op)).collect();
    out.sort_unstable();
    out.dedup();
    out
}

pub fn orbit_size(i: LatticeSubset) -> usize {
    group().orbit_size(i)
}

pub fn find_op(from: LatticeSubset, to: LatticeSubset) -> Option<EquivalenceOp> {
    group().find_op(from, to)
}
