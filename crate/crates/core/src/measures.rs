//! Complementarity quantifiers of a multipath quanton and their pairwise forms.
//!
//! All global measures are normalized sums over ordered pairs `i ≠ j`:
//!
//! - visibility      `𝒱² = n/(n−1) Σ |ρ_ij|²`
//! - predictability  `𝒫² = 1 − n/(n−1) Σ ρ_ii ρ_jj`
//! - distinguishability `𝒟² = 1 − n/(n−1) Σ ρ_ii ρ_jj |⟨d_i|d_j⟩|²`
//! - entanglement    `ℰ² = n/(n−1) Σ (ρ_ii ρ_jj − |ρ_ij|²)`
//!
//! For any unit-trace reduced state `𝒫² + 𝒱² + ℰ² = 1` holds identically; for
//! a pure quanton coupled to a detector additionally `𝒟² + 𝒱² = 1` and
//! `𝒟² = 𝒫² + ℰ²`.
//!
//! `entanglement` is total on density matrices, but it is the (normalized)
//! I-concurrence only when its argument is the marginal of a pure
//! quanton–detector state.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::states::{couple_detector, DetectorGram, PureQuanton, QuantonState};

/// Radicands down to this value are treated as rounding and clamped to zero.
pub const RADICAND_TOL: f64 = 1e-10;

fn norm_factor(n: usize) -> f64 {
    n as f64 / (n as f64 - 1.0)
}

fn checked_sqrt(measure: &'static str, radicand: f64) -> Result<f64> {
    if radicand < -RADICAND_TOL || radicand.is_nan() {
        return Err(Error::NegativeRadicand { measure, radicand });
    }
    Ok(radicand.max(0.0).sqrt())
}

fn require_same_n(s: &QuantonState, g: &DetectorGram) -> Result<()> {
    if s.n() != g.n() {
        return Err(Error::DimensionMismatch {
            context: "detector gram",
            expected: s.n(),
            found: g.n(),
        });
    }
    Ok(())
}

/// `Σ_{i≠j} |ρ_ij|²`.
fn off_diagonal_weight(s: &QuantonState) -> f64 {
    let n = s.n();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc += s.entry(i, j).norm_sqr();
            }
        }
    }
    acc
}

/// Hilbert–Schmidt visibility `𝒱`; equals `2|ρ_12|` for two paths.
pub fn visibility(s: &QuantonState) -> f64 {
    (norm_factor(s.n()) * off_diagonal_weight(s)).sqrt().min(1.0)
}

/// Predictability from path populations alone (assumed to sum to one).
///
/// Evaluated as `n/(n−1) Σ_i (ρ_ii − 1/n)²`, which equals `1 − n/(n−1) Σ_{i≠j} ρ_ii ρ_jj`
/// under unit trace and vanishes exactly for equal populations.
pub fn predictability_from_populations(populations: &[f64]) -> Result<f64> {
    Ok(predictability_sqr(populations)?.sqrt())
}

fn predictability_sqr(populations: &[f64]) -> Result<f64> {
    let n = populations.len();
    if n < 2 {
        return Err(Error::BadDimension(format!("path count must be at least 2, got {n}")));
    }
    let mean = 1.0 / n as f64;
    Ok(norm_factor(n) * populations.iter().map(|p| (p - mean).powi(2)).sum::<f64>())
}

/// Generalized predictability `𝒫`; equals `|ρ_11 − ρ_22|` for two paths.
pub fn predictability(s: &QuantonState) -> Result<f64> {
    predictability_from_populations(&s.populations())
}

/// Path distinguishability `𝒟` from the populations and detector overlaps.
///
/// Evaluated as `𝒫² + n/(n−1) Σ_{i≠j} ρ_ii ρ_jj (1 − |⟨d_i|d_j⟩|²)`, a sum of
/// non-negative terms equal to `1 − n/(n−1) Σ_{i≠j} ρ_ii ρ_jj |⟨d_i|d_j⟩|²`.
pub fn distinguishability(s: &QuantonState, g: &DetectorGram) -> Result<f64> {
    require_same_n(s, g)?;
    let n = s.n();
    let p = s.populations();
    let mut marked = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                marked += p[i] * p[j] * (1.0 - g.overlap(i, j).norm_sqr()).max(0.0);
            }
        }
    }
    checked_sqrt("distinguishability", predictability_sqr(&p)? + norm_factor(n) * marked)
}

/// Distinguishability built on unambiguous-discrimination overlaps; differs from
/// [`distinguishability`] in general and is kept for comparison.
pub fn distinguishability_uqsd(s: &QuantonState, g: &DetectorGram) -> Result<f64> {
    require_same_n(s, g)?;
    let n = s.n();
    let p = s.populations();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc += (p[i] * p[j]).sqrt() * g.overlap(i, j).norm();
            }
        }
    }
    let mean = acc / (n as f64 - 1.0);
    checked_sqrt("distinguishability_uqsd", 1.0 - mean * mean)
}

/// Normalized entanglement `ℰ` of a reduced quanton state.
pub fn entanglement(s_reduced: &QuantonState) -> Result<f64> {
    let n = s_reduced.n();
    let p = s_reduced.populations();
    // Each term is a 2×2 principal minor of a PSD matrix, so only rounding can
    // make it negative; clamping per term keeps the sum consistent with the
    // pairwise values.
    let mut acc = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            acc += checked_sqrt("entanglement", p[i] * p[j] - s_reduced.entry(i, j).norm_sqr())?.powi(2);
        }
    }
    Ok((2.0 * norm_factor(n) * acc).sqrt())
}

/// `ℰ` through the purity route `√(n/(n−1)·(1 − Tr ρ²))`.
pub fn entanglement_from_purity(s_reduced: &QuantonState) -> Result<f64> {
    checked_sqrt(
        "entanglement",
        norm_factor(s_reduced.n()) * (1.0 - s_reduced.purity()),
    )
}

/// All four measures of a quanton coupled to a detector, plus identity residuals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeasureReport {
    pub visibility: f64,
    pub predictability: f64,
    pub distinguishability: f64,
    pub entanglement: f64,
    /// `𝒫² + 𝒱² + ℰ² − 1`; zero up to rounding for every state.
    pub triality_residual: f64,
    /// `𝒟² + 𝒱² − 1`; zero for pure quantons, negative for mixed ones.
    pub duality_residual: f64,
    /// `𝒟² − 𝒫² − ℰ²`; zero for pure quantons.
    pub dpe_residual: f64,
    pub distinguishability_uqsd: f64,
}

/// Evaluates 𝒱, 𝒫, ℰ on `ρ_r = couple_detector(s, g)` and 𝒟 on `(diag s, g)`.
pub fn measure_report(s: &QuantonState, g: &DetectorGram) -> Result<MeasureReport> {
    let reduced = couple_detector(s, g)?;
    let v = visibility(&reduced);
    let p = predictability(&reduced)?;
    let e = entanglement(&reduced)?;
    let d = distinguishability(s, g)?;
    Ok(MeasureReport {
        visibility: v,
        predictability: p,
        distinguishability: d,
        entanglement: e,
        triality_residual: p * p + v * v + e * e - 1.0,
        duality_residual: d * d + v * v - 1.0,
        dpe_residual: d * d - p * p - e * e,
        distinguishability_uqsd: distinguishability_uqsd(s, g)?,
    })
}

/// Which quantity a [`PairwiseTable`] holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureKind {
    Visibility,
    Predictability,
    Distinguishability,
    Entanglement,
}

/// One unordered path pair `i < j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairEntry {
    pub i: usize,
    pub j: usize,
    /// Measure-specific averaging weight.
    pub weight: f64,
    /// `ρ_ii + ρ_jj` of the unblocked state.
    pub pair_population: f64,
    /// `None` when the pair carries no population.
    pub value: Option<f64>,
}

impl PairEntry {
    pub fn is_flagged(&self) -> bool {
        self.value.is_none()
    }
}

/// Two-path values of one measure over all unordered pairs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairwiseTable {
    pub measure: MeasureKind,
    pub n: usize,
    pub pairs: Vec<PairEntry>,
}

impl PairwiseTable {
    pub fn flagged(&self) -> impl Iterator<Item = &PairEntry> {
        self.pairs.iter().filter(|e| e.is_flagged())
    }

    pub fn value(&self, i: usize, j: usize) -> Option<f64> {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        self.pairs.iter().find(|e| e.i == i && e.j == j).and_then(|e| e.value)
    }
}

fn build_table(
    measure: MeasureKind,
    populations: &[f64],
    weight: impl Fn(f64) -> f64,
    mut value: impl FnMut(usize, usize, f64) -> Result<f64>,
) -> Result<PairwiseTable> {
    let n = populations.len();
    let mut pairs = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            let w = populations[i] + populations[j];
            let v = if w > 0.0 { Some(value(i, j, w)?) } else { None };
            pairs.push(PairEntry {
                i,
                j,
                weight: weight(w),
                pair_population: w,
                value: v,
            });
        }
    }
    Ok(PairwiseTable { measure, n, pairs })
}

/// Two-path fringe visibilities `V_ij = 2|ρ_ij|/(ρ_ii + ρ_jj)`, weighted by `(n/2)(ρ_ii + ρ_jj)`.
pub fn pairwise_visibility(s: &QuantonState) -> Result<PairwiseTable> {
    let half_n = s.n() as f64 / 2.0;
    build_table(MeasureKind::Visibility, &s.populations(), |w| half_n * w, |i, j, w| {
        Ok((2.0 * s.entry(i, j).norm() / w).min(1.0))
    })
}

/// Two-path predictabilities `P_ij = |ρ_ii − ρ_jj|/(ρ_ii + ρ_jj)`.
pub fn pairwise_predictability(s: &QuantonState) -> Result<PairwiseTable> {
    let p = s.populations();
    build_table(MeasureKind::Predictability, &p, |w| w, |i, j, w| Ok((p[i] - p[j]).abs() / w))
}

/// Two-path minimum-error distinguishabilities
/// `D_ij = √(1 − 4ρ_ii ρ_jj |⟨d_i|d_j⟩|²/(ρ_ii + ρ_jj)²)`.
pub fn pairwise_distinguishability(s: &QuantonState, g: &DetectorGram) -> Result<PairwiseTable> {
    require_same_n(s, g)?;
    let p = s.populations();
    build_table(MeasureKind::Distinguishability, &p, |w| w, |i, j, w| {
        // (ρ_ii − ρ_jj)² + 4ρ_ii ρ_jj (1 − |g|²) over w², free of cancellation near 𝒟_ij = 0.
        let marked = 4.0 * p[i] * p[j] * (1.0 - g.overlap(i, j).norm_sqr()).max(0.0);
        Ok((((p[i] - p[j]).powi(2) + marked) / (w * w)).sqrt().min(1.0))
    })
}

/// Two-path concurrences of a pure quanton with its detector,
/// `E_ij = 2|c_i||c_j|√(1 − |⟨d_i|d_j⟩|²)/(|c_i|² + |c_j|²)`.
pub fn pairwise_concurrence(psi: &PureQuanton, g: &DetectorGram) -> Result<PairwiseTable> {
    if psi.n() != g.n() {
        return Err(Error::DimensionMismatch {
            context: "detector gram",
            expected: psi.n(),
            found: g.n(),
        });
    }
    let c = psi.amplitudes();
    let p: Vec<f64> = c.iter().map(|a| a.norm_sqr()).collect();
    build_table(MeasureKind::Entanglement, &p, |w| w, |i, j, w| {
        let overlap2 = g.overlap(i, j).norm_sqr();
        Ok(2.0 * c[i].norm() * c[j].norm() * (1.0 - overlap2).max(0.0).sqrt() / w)
    })
}

/// Two-path entanglement `2√(ρ_ii ρ_jj − |ρ_ij|²)/(ρ_ii + ρ_jj)` of a reduced state;
/// the pure-quanton case coincides with [`pairwise_concurrence`].
pub fn pairwise_entanglement(s_reduced: &QuantonState) -> Result<PairwiseTable> {
    let p = s_reduced.populations();
    build_table(MeasureKind::Entanglement, &p, |w| w, |i, j, w| {
        let r = checked_sqrt("pairwise entanglement", p[i] * p[j] - s_reduced.entry(i, j).norm_sqr())?;
        Ok(2.0 * r / w)
    })
}

/// How pairwise values are averaged back into a global measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RmsMode {
    /// Plain root mean square; exact for equally populated paths.
    Equal,
    /// Population-weighted form, exact for any populations.
    Weighted,
}

/// A global measure rebuilt from a pairwise table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Reconstruction {
    pub value: f64,
    /// The (weighted) mean-square term.
    pub mean_square: f64,
    /// Population-inequality offset; nonzero only for weighted distinguishability.
    pub offset: f64,
}

/// `1 − n/(2(n−1)) Σ_pairs (ρ_ii + ρ_jj)²`, the population-inequality term of the
/// weighted distinguishability reconstruction. Vanishes for two paths and for
/// equal populations.
pub fn distinguishability_offset(populations: &[f64]) -> f64 {
    let n = populations.len();
    let mut pair_populations = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            pair_populations.push(populations[i] + populations[j]);
        }
    }
    offset_from_pair_populations(n, &pair_populations)
}

/// Same quantity written as `−n/(2(n−1)) Σ_pairs (w_ij − 2/n)²`, using
/// `Σ_pairs w_ij = n − 1`; exact zero at equal populations.
fn offset_from_pair_populations(n: usize, pair_populations: &[f64]) -> f64 {
    let nf = n as f64;
    let spread: f64 = pair_populations.iter().map(|w| (w - 2.0 / nf).powi(2)).sum();
    -nf / (2.0 * (nf - 1.0)) * spread
}

/// Rebuilds 𝒱, 𝒫, 𝒟 or ℰ from its pairwise table.
pub fn rms_reconstruct(table: &PairwiseTable, mode: RmsMode) -> Result<Reconstruction> {
    if let Some(e) = table.flagged().next() {
        return Err(Error::IncompatibleMode(format!(
            "pair ({}, {}) carries no population; {} table cannot be averaged",
            e.i,
            e.j,
            serde_name(table.measure)
        )));
    }
    let n = table.n as f64;
    let values = table.pairs.iter().map(|e| (e.pair_population, e.value.unwrap_or(0.0)));
    let (mean_square, offset) = match mode {
        RmsMode::Equal => {
            let sum: f64 = values.map(|(_, v)| v * v).sum();
            (2.0 / (n * (n - 1.0)) * sum, 0.0)
        }
        RmsMode::Weighted => {
            let sum: f64 = values.map(|(w, v)| w * w * v * v).sum();
            let coeff = match table.measure {
                MeasureKind::Predictability => 1.0 / (n - 1.0),
                _ => n / (2.0 * (n - 1.0)),
            };
            let offset = match table.measure {
                MeasureKind::Distinguishability => {
                    let w: Vec<f64> = table.pairs.iter().map(|e| e.pair_population).collect();
                    offset_from_pair_populations(table.n, &w)
                }
                _ => 0.0,
            };
            (coeff * sum, offset)
        }
    };
    Ok(Reconstruction {
        value: checked_sqrt("rms reconstruction", mean_square + offset)?,
        mean_square,
        offset,
    })
}

fn serde_name(kind: MeasureKind) -> &'static str {
    match kind {
        MeasureKind::Visibility => "visibility",
        MeasureKind::Predictability => "predictability",
        MeasureKind::Distinguishability => "distinguishability",
        MeasureKind::Entanglement => "entanglement",
    }
}
