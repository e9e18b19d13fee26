//! Exhaustive sweeps, single-subset inspection and map diagnostics.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::RangeInclusive;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::detection::{prop20_predicate, witness_d_lattice, Classifier, EvolvedSpectrum, CrossWitness, TGrid, Verdict, VerdictKind};
use crate::equivalence::{canonical_form, group, orbit_size};
use crate::error::{Error, Result};
use crate::linalg::{sorted, PSD_TOL};
use crate::maps::{choi_spectrum, semg4_decomposition, semg4_residual, semigroup_map, SemigroupKind, SuperOperator};
use crate::ppt::{ppt_combinatorial, ppt_spectral, pt_min_eigenvalue, pt_spectrum_closed_form};
use crate::separability::separability_certificate;
use crate::states::{lattice_state, render_grid, LatticeSubset, WeightVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

impl FromStr for OutputFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Self::Json),
            "csv" => Ok(Self::Csv),
            other => Err(Error::GridParse(format!("unknown format {other:?}"))),
        }
    }
}

/// Inclusive N_I filter parsed from `a..b`, `a-b` or a single number.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NRange(RangeInclusive<usize>);

impl NRange {
    pub fn new(lo: usize, hi: usize) -> Result<Self> {
        if lo > hi || hi > 16 {
            return Err(Error::GridParse(format!("bad N_I range {lo}..{hi}")));
        }
        Ok(Self(lo..=hi))
    }

    pub fn contains(&self, n: usize) -> bool {
        self.0.contains(&n)
    }
}

impl FromStr for NRange {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let num = |x: &str| {
            x.trim()
                .parse::<usize>()
                .map_err(|_| Error::GridParse(format!("bad N_I bound {x:?}")))
        };
        match s.split_once("..").or_else(|| s.split_once('-')) {
            Some((a, b)) => Self::new(num(a)?, num(b.trim_start_matches('='))?),
            None => {
                let n = num(s)?;
                Self::new(n, n)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub t_grid: TGrid,
    pub tolerance: f64,
    /// Worker threads; `None` uses all cores.
    pub jobs: Option<usize>,
    pub format: OutputFormat,
    pub n_range: Option<NRange>,
    /// Emit one record per orbit (its canonical form) instead of per subset.
    pub orbits_only: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            t_grid: TGrid::default(),
            tolerance: PSD_TOL,
            jobs: None,
            format: OutputFormat::Json,
            n_range: None,
            orbits_only: false,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) {
            return Err(Error::Hypothesis(format!("tolerance must be positive, got {}", self.tolerance)));
        }
        if self.jobs == Some(0) {
            return Err(Error::Hypothesis("jobs must be at least 1".into()));
        }
        Ok(())
    }

    pub fn classifier(&self) -> Result<Classifier> {
        self.validate()?;
        Classifier::new(&self.t_grid, self.tolerance)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationRecord {
    pub mask: u16,
    pub subset: LatticeSubset,
    #[serde(rename = "N_I")]
    pub n: usize,
    pub ppt_combinatorial: bool,
    pub ppt_spectral: bool,
    pub pt_min_eigenvalue: f64,
    pub verdict: Verdict,
    pub canonical_mask: u16,
    pub orbit_size: usize,
}

impl ClassificationRecord {
    pub const CSV_HEADER: [&'static str; 9] = [
        "mask",
        "hex",
        "N_I",
        "ppt",
        "verdict",
        "evidence_t",
        "certificate",
        "canonical_mask",
        "orbit_size",
    ];

    pub fn csv_row(&self) -> [String; 9] {
        [
            self.mask.to_string(),
            format!("{:#06x}", self.mask),
            self.n.to_string(),
            self.ppt_combinatorial.to_string(),
            self.verdict.kind().to_string(),
            self.verdict.evidence_t().map(|t| t.to_string()).unwrap_or_default(),
            self.verdict.certificate().map(|c| c.kind.to_string()).unwrap_or_default(),
            format!("{:#06x}", self.canonical_mask),
            self.orbit_size.to_string(),
        ]
    }
}

/// Per-N_I counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub total: usize,
    pub ppt: usize,
    pub npt: usize,
    pub bound_entangled: usize,
    pub separable: usize,
    pub undetermined: usize,
}

impl SummaryRow {
    fn add(&mut self, kind: VerdictKind, weight: usize) {
        self.total += weight;
        match kind {
            VerdictKind::NptEntangled => self.npt += weight,
            VerdictKind::BoundEntangled => self.bound_entangled += weight,
            VerdictKind::SeparableCertified => self.separable += weight,
            VerdictKind::PptUndetermined => self.undetermined += weight,
        }
        if kind != VerdictKind::NptEntangled {
            self.ppt += weight;
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub rows: BTreeMap<usize, SummaryRow>,
}

impl Summary {
    pub fn row(&self, n: usize) -> SummaryRow {
        self.rows.get(&n).copied().unwrap_or_default()
    }
}

impl fmt::Display for Summary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:>4} {:>6} {:>6} {:>6} {:>6} {:>6} {:>6}", "N_I", "total", "PPT", "NPT", "bound", "sep", "undet")?;
        for (n, r) in &self.rows {
            writeln!(
                f,
                "{n:>4} {:>6} {:>6} {:>6} {:>6} {:>6} {:>6}",
                r.total, r.ppt, r.npt, r.bound_entangled, r.separable, r.undetermined
            )?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub records: Vec<ClassificationRecord>,
    /// Counts over every subset in range, also with `orbits_only`.
    pub summary: Summary,
    /// Internal consistency failures; a clean run has none.
    pub violations: Vec<String>,
}

fn record(i: LatticeSubset, verdict: Verdict) -> Result<ClassificationRecord> {
    let state = lattice_state(i)?;
    let min = pt_min_eigenvalue(&state)?;
    Ok(ClassificationRecord {
        mask: i.mask(),
        subset: i,
        n: i.len(),
        ppt_combinatorial: ppt_combinatorial(i)?,
        ppt_spectral: min >= -PSD_TOL,
        pt_min_eigenvalue: min,
        verdict,
        canonical_mask: canonical_form(i).mask(),
        orbit_size: orbit_size(i),
    })
}

fn check(r: &ClassificationRecord) -> Result<Option<String>> {
    if r.ppt_combinatorial != r.ppt_spectral {
        return Ok(Some(format!(
            "{:#06x}: counting rule says PPT={} but spectrum min is {:e}",
            r.mask, r.ppt_combinatorial, r.pt_min_eigenvalue
        )));
    }
    let entangled = matches!(r.verdict.kind(), VerdictKind::BoundEntangled | VerdictKind::NptEntangled);
    if entangled && separability_certificate(r.subset)?.is_some() {
        return Ok(Some(format!("{:#06x}: entangled verdict but a separability certificate exists", r.mask)));
    }
    Ok(None)
}

/// Classify every nonempty subset (or orbit), orbit by orbit in parallel.
/// Records come back in mask order regardless of the worker count.
pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepReport> {
    let classifier = cfg.classifier()?;
    let in_range = |n: usize| cfg.n_range.as_ref().map_or(true, |r| r.contains(n));
    let reps: Vec<LatticeSubset> = group()
        .representatives()
        .into_iter()
        .filter(|r| !r.is_empty() && in_range(r.len()))
        .collect();

    let work = || -> Result<Vec<(Vec<ClassificationRecord>, Vec<(VerdictKind, usize)>, Vec<String>)>> {
        reps.par_iter()
            .map(|&rep| {
                let verdicts = classifier.classify_orbit(rep)?;
                let counts: Vec<(VerdictKind, usize)> = verdicts.iter().map(|(m, v)| (v.kind(), m.len())).collect();
                let mut records = Vec::new();
                let mut violations = Vec::new();
                for (m, v) in verdicts {
                    if cfg.orbits_only && m != rep {
                        continue;
                    }
                    let r = record(m, v)?;
                    violations.extend(check(&r)?);
                    records.push(r);
                }
                Ok((records, counts, violations))
            })
            .collect()
    };
    let chunks = match cfg.jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Consistency(format!("thread pool: {e}")))?
            .install(work)?,
        None => work()?,
    };

    let mut summary = Summary::default();
    let mut records = Vec::new();
    let mut violations = Vec::new();
    for (rs, counts, vs) in chunks {
        for (kind, n) in counts {
            summary.rows.entry(n).or_default().add(kind, 1);
        }
        records.extend(rs);
        violations.extend(vs);
    }
    records.sort_by_key(|r| r.mask);
    violations.sort();
    Ok(SweepReport {
        records,
        summary,
        violations,
    })
}

/// Everything known about one subset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InspectReport {
    pub subset: LatticeSubset,
    pub mask: u16,
    #[serde(rename = "N_I")]
    pub n: usize,
    pub grid: String,
    pub ppt_combinatorial: bool,
    pub ppt_spectral: bool,
    /// Closed-form partial-transpose eigenvalues by site index.
    pub pt_closed_form: Vec<f64>,
    /// Numerically diagonalized partial transpose, descending.
    pub pt_numeric: Vec<f64>,
    pub evolved: Vec<EvolvedSpectrum>,
    pub witness: Vec<(f64, f64)>,
    pub cross_condition: Option<CrossWitness>,
    pub verdict: Verdict,
    pub canonical_mask: u16,
    pub orbit_size: usize,
}

pub fn inspect(i: LatticeSubset, cfg: &SweepConfig) -> Result<InspectReport> {
    let classifier = cfg.classifier()?;
    let pi = WeightVector::uniform_on(i)?;
    let state = lattice_state(i)?;
    let pt = crate::ppt::partial_transpose_state(state.matrix())?;
    let mut numeric = crate::linalg::eigenvalues_hermitian(&pt)?;
    numeric.reverse();
    Ok(InspectReport {
        subset: i,
        mask: i.mask(),
        n: i.len(),
        grid: render_grid(i),
        ppt_combinatorial: ppt_combinatorial(i)?,
        ppt_spectral: ppt_spectral(&state)?,
        pt_closed_form: pt_spectrum_closed_form(&pi).to_vec(),
        pt_numeric: numeric,
        evolved: classifier.tables().iter().map(|t| t.spectrum(&pi)).collect(),
        witness: cfg
            .t_grid
            .times()
            .iter()
            .map(|&t| Ok((t, witness_d_lattice(i, t)?)))
            .collect::<Result<_>>()?,
        cross_condition: prop20_predicate(i),
        verdict: classifier.classify(i)?,
        canonical_mask: canonical_form(i).mask(),
        orbit_size: orbit_size(i),
    })
}

impl fmt::Display for InspectReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "subset {} mask {:#06x} N_I = {}", self.subset, self.mask, self.n)?;
        write!(f, "{}", self.grid)?;
        writeln!(f, "PPT: counting rule {}, spectrum {}", self.ppt_combinatorial, self.ppt_spectral)?;
        let closed: Vec<String> = sorted(&self.pt_closed_form).iter().map(|x| format!("{x:.4}")).collect();
        writeln!(f, "PT spectrum (closed form, ascending): {}", closed.join(" "))?;
        let min_numeric = self.pt_numeric.iter().copied().fold(f64::INFINITY, f64::min);
        writeln!(f, "PT spectrum (numeric) min: {min_numeric:.3e}")?;
        writeln!(f, "{:>7} {:>12} {:>8} {:>12}", "t", "min R", "at", "D")?;
        for (spec, (t, d)) in self.evolved.iter().zip(&self.witness) {
            let (site, v) = spec.min();
            writeln!(f, "{t:>7} {v:>12.4e} {:>8} {d:>12.4e}", site.to_string())?;
        }
        if let Some(w) = &self.cross_condition {
            writeln!(f, "cross condition: witness {} sole member {}", w.witness, w.member)?;
        }
        writeln!(f, "verdict: {}", self.verdict.kind())?;
        match &self.verdict {
            Verdict::BoundEntangled { evidence, .. } => {
                writeln!(f, "evidence: {} on {}", evidence.detection, evidence.subset)?;
            }
            Verdict::SeparableCertified { certificate, .. } => writeln!(f, "certificate: {}", certificate.kind)?,
            Verdict::NptEntangled { violation, min_pt_eigenvalue } => {
                writeln!(f, "crowded cross at {violation}, PT eigenvalue {min_pt_eigenvalue:.4}")?
            }
            Verdict::PptUndetermined { .. } => {}
        }
        writeln!(f, "canonical form {:#06x}, orbit size {}", self.canonical_mask, self.orbit_size)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MapKind {
    Gamma1,
    Gamma2,
    Gamma,
    /// Γ²_t, the part composed with the full transposition.
    Gamma2Component,
}

impl FromStr for MapKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "gamma1" => Ok(Self::Gamma1),
            "gamma2" => Ok(Self::Gamma2),
            "gamma" => Ok(Self::Gamma),
            "gamma2_component" => Ok(Self::Gamma2Component),
            _ => Err(Error::GridParse(format!("unknown map kind {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapDiagnostics {
    pub kind: MapKind,
    pub t: f64,
    /// Choi eigenvalues, descending.
    pub choi_eigenvalues: Vec<f64>,
    pub cp: bool,
    pub trace_preservation_error: f64,
    pub distance_from_identity: f64,
    /// max |Γ_t − (Γ¹_t + Γ²_t ∘ T₄)| at this t.
    pub decomposition_residual: f64,
}

pub fn map_diag(kind: MapKind, t: f64) -> Result<MapDiagnostics> {
    let map: SuperOperator = match kind {
        MapKind::Gamma1 => semigroup_map(SemigroupKind::Gamma1, t)?,
        MapKind::Gamma2 => semigroup_map(SemigroupKind::Gamma2, t)?,
        MapKind::Gamma => semigroup_map(SemigroupKind::Gamma, t)?,
        MapKind::Gamma2Component => semg4_decomposition(t)?.1,
    };
    let spectrum = choi_spectrum(&map)?;
    Ok(MapDiagnostics {
        kind,
        t,
        cp: spectrum.min() >= -PSD_TOL,
        choi_eigenvalues: spectrum.eigenvalues,
        trace_preservation_error: map.trace_preservation_error(),
        distance_from_identity: map.max_abs_diff(&SuperOperator::identity(map.dim())),
        decomposition_residual: semg4_residual(t)?,
    })
}

impl fmt::Display for MapDiagnostics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "map {:?} at t = {}", self.kind, self.t)?;
        let eig: Vec<String> = self.choi_eigenvalues.iter().map(|x| format!("{x:.6}")).collect();
        writeln!(f, "Choi eigenvalues: {}", eig.join(" "))?;
        writeln!(f, "completely positive: {}", self.cp)?;
        writeln!(f, "trace preservation error: {:.3e}", self.trace_preservation_error)?;
        writeln!(f, "distance from identity: {:.3e}", self.distance_from_identity)?;
        writeln!(f, "decomposition residual: {:.3e}", self.decomposition_residual)
    }
}

/// One line per orbit: canonical form, size and verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitSummary {
    pub canonical: LatticeSubset,
    pub canonical_mask: u16,
    #[serde(rename = "N_I")]
    pub n: usize,
    pub orbit_size: usize,
    pub ppt: bool,
    pub verdict: VerdictKind,
}

pub fn orbit_table(cfg: &SweepConfig) -> Result<Vec<OrbitSummary>> {
    let classifier = cfg.classifier()?;
    group()
        .representatives()
        .into_iter()
        .filter(|r| !r.is_empty() && cfg.n_range.as_ref().map_or(true, |nr| nr.contains(r.len())))
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&rep| {
            Ok(OrbitSummary {
                canonical: rep,
                canonical_mask: rep.mask(),
                n: rep.len(),
                orbit_size: orbit_size(rep),
                ppt: ppt_combinatorial(rep)?,
                verdict: classifier.classify(rep)?.kind(),
            })
        })
        .collect()
}
