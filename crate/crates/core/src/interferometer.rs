//! Operational protocols: output-channel intensities, fringe scans, the
//! phase-averaged variance route to visibility, the pair-opening campaign and
//! the selective-decoherence (Mei–Weitz) scenario.
//!
//! A single output channel is modeled. Every path overlaps it with the same
//! amplitude, so the channel is described by `amp2 = |A|²` alone.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measures::{
    entanglement, pairwise_distinguishability, pairwise_predictability, pairwise_visibility,
    predictability, rms_reconstruct, visibility, distinguishability, MeasureKind, PairEntry, PairwiseTable,
    Reconstruction, RmsMode,
};
use crate::qmath::ComplexMatrix;
use crate::states::{block_paths, couple_detector, DetectorGram, PathMask, PhaseVector, QuantonState};

/// Default number of scan points over one period of the scan phase.
pub const DEFAULT_SCAN_GRID: usize = 1024;
/// Smallest accepted scan grid.
pub const MIN_SCAN_GRID: usize = 8;
/// Smallest accepted Monte Carlo sample count.
pub const MIN_MC_SAMPLES: usize = 1000;
/// Upper bound on tensor-grid evaluations in quadrature mode.
pub const MAX_QUADRATURE_EVALUATIONS: usize = 20_000_000;

const MC_CHUNK: usize = 4096;

/// Output channel with equal overlap `amp2 = |A|²` to every path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChannelModel {
    pub n: usize,
    pub amp2: f64,
}

impl ChannelModel {
    pub fn new(n: usize, amp2: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::BadDimension(format!("path count must be at least 2, got {n}")));
        }
        if !(amp2 > 0.0 && amp2 <= 1.0) {
            return Err(Error::invalid("channel", format!("amp2 {amp2} outside (0, 1]"), 0));
        }
        Ok(Self { n, amp2 })
    }

    /// `amp2 = 1/n`, the normalization under which the variance identity holds.
    pub fn uniform(n: usize) -> Result<Self> {
        Self::new(n, 1.0 / n.max(1) as f64)
    }

    pub fn is_uniform(&self) -> bool {
        (self.amp2 * self.n as f64 - 1.0).abs() <= 1e-12
    }

    fn check(&self, s: &QuantonState) -> Result<()> {
        if self.n != s.n() {
            return Err(Error::DimensionMismatch {
                context: "channel model",
                expected: s.n(),
                found: self.n,
            });
        }
        Ok(())
    }
}

/// `amp2·(1 + Σ_{j≠k} Re[ρ_jk e^{i(θ_j−θ_k)}])` for precomputed `e^{iθ}`.
fn intensity_with(rho: &ComplexMatrix, phasors: &[Complex64], amp2: f64) -> f64 {
    let n = phasors.len();
    let mut cross = 0.0;
    for j in 0..n {
        for k in (j + 1)..n {
            cross += (rho[(j, k)] * phasors[j] * phasors[k].conj()).re;
        }
    }
    amp2 * (1.0 + 2.0 * cross)
}

/// Detection probability in the output channel for phase settings `ph`.
pub fn intensity(s: &QuantonState, ph: &PhaseVector, ch: &ChannelModel) -> Result<f64> {
    ch.check(s)?;
    if ph.n() != s.n() {
        return Err(Error::DimensionMismatch {
            context: "phase vector",
            expected: s.n(),
            found: ph.n(),
        });
    }
    let phasors: Vec<Complex64> = ph.as_slice().iter().map(|&t| Complex64::from_polar(1.0, t)).collect();
    Ok(intensity_with(s.rho(), &phasors, ch.amp2))
}

/// Intensities sampled along a scan of the phase `φ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntensityScan {
    pub phi: Vec<f64>,
    pub intensity: Vec<f64>,
}

impl IntensityScan {
    pub fn new(phi: Vec<f64>, intensity: Vec<f64>) -> Result<Self> {
        if phi.len() != intensity.len() {
            return Err(Error::DimensionMismatch {
                context: "intensity scan",
                expected: phi.len(),
                found: intensity.len(),
            });
        }
        if let Some(idx) = intensity.iter().position(|&i| !(i >= -1e-12)) {
            return Err(Error::invalid("intensity scan", "intensity is negative", idx));
        }
        Ok(Self { phi, intensity })
    }

    pub fn len(&self) -> usize {
        self.phi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phi.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("phi,intensity\n");
        for (p, i) in self.phi.iter().zip(&self.intensity) {
            out.push_str(&format!("{},{}\n", crate::csv_float(*p), crate::csv_float(*i)));
        }
        out
    }
}

/// How the scan phase `φ` enters the path phases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "profile", rename_all = "snake_case")]
pub enum ScanProfile {
    /// `θ_j(φ) = base_j + j·φ`: the far-field multi-slit pattern, `φ` standing
    /// in for the screen position.
    LinearRamp,
    /// `θ_path(φ) = base_path + φ`, all other phases fixed: a phase shifter in
    /// one arm of a split-and-recombine interferometer.
    ReferenceArm { path: usize },
}

/// Scans `θ_j(φ) = base_j + j·φ` over `grid` uniform points of `[0, 2π)`.
pub fn fringe_scan(s: &QuantonState, ch: &ChannelModel, base: &PhaseVector, grid: usize) -> Result<IntensityScan> {
    fringe_scan_with(s, ch, base, grid, ScanProfile::LinearRamp)
}

/// [`fringe_scan`] with an explicit scan profile.
pub fn fringe_scan_with(
    s: &QuantonState,
    ch: &ChannelModel,
    base: &PhaseVector,
    grid: usize,
    profile: ScanProfile,
) -> Result<IntensityScan> {
    ch.check(s)?;
    if grid < MIN_SCAN_GRID {
        return Err(Error::BadGrid {
            grid,
            min: MIN_SCAN_GRID,
        });
    }
    if base.n() != s.n() {
        return Err(Error::DimensionMismatch {
            context: "phase vector",
            expected: s.n(),
            found: base.n(),
        });
    }
    let slope = |j: usize| -> f64 {
        match profile {
            ScanProfile::LinearRamp => j as f64,
            ScanProfile::ReferenceArm { path } => f64::from(u8::from(j == path)),
        }
    };
    if let ScanProfile::ReferenceArm { path } = profile {
        if path >= s.n() {
            return Err(Error::invalid("scan profile", format!("reference arm {path} outside [0, {})", s.n()), path));
        }
    }
    let phi: Vec<f64> = (0..grid).map(|k| TAU * k as f64 / grid as f64).collect();
    let intensity = phi
        .iter()
        .map(|&f| {
            let phasors: Vec<Complex64> = base
                .as_slice()
                .iter()
                .enumerate()
                .map(|(j, &b)| Complex64::from_polar(1.0, b + slope(j) * f))
                .collect();
            intensity_with(s.rho(), &phasors, ch.amp2)
        })
        .collect();
    IntensityScan::new(phi, intensity)
}

/// Conventional fringe contrast `(I_max − I_min)/(I_max + I_min)` over the samples.
pub fn fringe_contrast(scan: &IntensityScan) -> Result<f64> {
    let max = scan.intensity.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = scan.intensity.iter().copied().fold(f64::INFINITY, f64::min).max(0.0);
    if !(max > 0.0) {
        return Err(Error::AllZeroScan);
    }
    Ok(((max - min) / (max + min)).clamp(0.0, 1.0))
}

/// How the phase-averaged intensity variance is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum VarianceMethod {
    /// Closed form `amp2²·Σ_{i≠j} |ρ_ij|²`.
    Exact,
    /// Independent uniform phases, `samples` draws from a seeded stream.
    MonteCarlo { samples: usize, seed: u64 },
    /// Tensor-product uniform grid with `points` nodes per phase; exact for `points ≥ 3`.
    Quadrature { points: usize },
}

/// Phase-averaged variance of the channel intensity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VarianceEstimate {
    pub value: f64,
    /// Standard error of a sampled estimate; zero for deterministic methods.
    pub standard_error: f64,
    pub evaluations: usize,
}

/// Variance of the intensity over independently and uniformly distributed path phases.
pub fn phase_average_variance(s: &QuantonState, ch: &ChannelModel, method: VarianceMethod) -> Result<VarianceEstimate> {
    ch.check(s)?;
    match method {
        VarianceMethod::Exact => {
            let n = s.n();
            let mut acc = 0.0;
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        acc += s.entry(i, j).norm_sqr();
                    }
                }
            }
            Ok(VarianceEstimate {
                value: ch.amp2 * ch.amp2 * acc,
                standard_error: 0.0,
                evaluations: 0,
            })
        }
        VarianceMethod::MonteCarlo { samples, seed } => monte_carlo_variance(s, ch, samples, seed),
        VarianceMethod::Quadrature { points } => quadrature_variance(s, ch, points),
    }
}

/// Power sums of `x = I − amp2` (the intensity about its exact mean).
#[derive(Default, Clone, Copy)]
struct PowerSums {
    count: usize,
    s1: f64,
    s2: f64,
    s3: f64,
    s4: f64,
}

impl PowerSums {
    fn push(&mut self, x: f64) {
        let x2 = x * x;
        self.count += 1;
        self.s1 += x;
        self.s2 += x2;
        self.s3 += x2 * x;
        self.s4 += x2 * x2;
    }

    fn merge(self, o: Self) -> Self {
        Self {
            count: self.count + o.count,
            s1: self.s1 + o.s1,
            s2: self.s2 + o.s2,
            s3: self.s3 + o.s3,
            s4: self.s4 + o.s4,
        }
    }

    /// Population (biased) central second and fourth moments.
    fn central_moments(&self) -> (f64, f64) {
        let n = self.count as f64;
        let m1 = self.s1 / n;
        let r2 = self.s2 / n;
        let r3 = self.s3 / n;
        let r4 = self.s4 / n;
        let m2 = r2 - m1 * m1;
        let m4 = r4 - 4.0 * m1 * r3 + 6.0 * m1 * m1 * r2 - 3.0 * m1.powi(4);
        (m2, m4)
    }
}

fn monte_carlo_variance(s: &QuantonState, ch: &ChannelModel, samples: usize, seed: u64) -> Result<VarianceEstimate> {
    if samples < MIN_MC_SAMPLES {
        return Err(Error::BadSampleCount(format!(
            "Monte Carlo needs at least {MIN_MC_SAMPLES} samples, got {samples}"
        )));
    }
    let n = s.n();
    let rho = s.rho();
    let chunks = samples.div_ceil(MC_CHUNK);
    // One independent stream per chunk; reduction runs in chunk order.
    let partials: Vec<PowerSums> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(chunk as u64);
            let len = MC_CHUNK.min(samples - chunk * MC_CHUNK);
            let mut sums = PowerSums::default();
            let mut phasors = vec![Complex64::new(1.0, 0.0); n];
            for _ in 0..len {
                for p in phasors.iter_mut() {
                    *p = Complex64::from_polar(1.0, rng.random::<f64>() * TAU);
                }
                sums.push(intensity_with(rho, &phasors, ch.amp2) - ch.amp2);
            }
            sums
        })
        .collect();
    let total = partials.into_iter().fold(PowerSums::default(), PowerSums::merge);
    let (m2, m4) = total.central_moments();
    let count = total.count as f64;
    Ok(VarianceEstimate {
        value: m2 * count / (count - 1.0),
        standard_error: ((m4 - m2 * m2).max(0.0) / count).sqrt(),
        evaluations: total.count,
    })
}

fn quadrature_variance(s: &QuantonState, ch: &ChannelModel, points: usize) -> Result<VarianceEstimate> {
    if points < 3 {
        return Err(Error::BadSampleCount(format!(
            "quadrature needs at least 3 points per phase, got {points}"
        )));
    }
    let n = s.n();
    let total = (0..n).try_fold(1usize, |acc, _| acc.checked_mul(points));
    let total = match total {
        Some(t) if t <= MAX_QUADRATURE_EVALUATIONS => t,
        _ => {
            return Err(Error::BadSampleCount(format!(
                "{points}^{n} grid nodes exceed the limit of {MAX_QUADRATURE_EVALUATIONS}"
            )))
        }
    };
    let nodes: Vec<Complex64> = (0..points)
        .map(|k| Complex64::from_polar(1.0, TAU * k as f64 / points as f64))
        .collect();
    let mut index = vec![0usize; n];
    let mut phasors = vec![nodes[0]; n];
    let mut sums = PowerSums::default();
    for _ in 0..total {
        sums.push(intensity_with(s.rho(), &phasors, ch.amp2) - ch.amp2);
        for d in 0..n {
            index[d] += 1;
            if index[d] < points {
                phasors[d] = nodes[index[d]];
                break;
            }
            index[d] = 0;
            phasors[d] = nodes[0];
        }
    }
    let (m2, _) = sums.central_moments();
    Ok(VarianceEstimate {
        value: m2,
        standard_error: 0.0,
        evaluations: total,
    })
}

/// Overshoot above one tolerated (and clamped) in [`visibility_from_variance`].
pub const VARIANCE_OVERSHOOT_TOL: f64 = 1e-6;

/// `𝒱 = √(n³/(n−1) · ⟨(ΔI)²⟩)`, valid for a channel with `amp2 = 1/n`.
pub fn visibility_from_variance(variance: f64, n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::BadDimension(format!("path count must be at least 2, got {n}")));
    }
    if !(variance >= 0.0) {
        return Err(Error::invalid("variance", format!("{variance} is negative"), 0));
    }
    let nf = n as f64;
    let v = (nf.powi(3) / (nf - 1.0) * variance).sqrt();
    if v > 1.0 + VARIANCE_OVERSHOOT_TOL {
        return Err(Error::OvershootBeyondTolerance { value: v });
    }
    Ok(v.min(1.0))
}

/// One opened pair in a [`CampaignRecord`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CampaignPair {
    pub i: usize,
    pub j: usize,
    pub pair_population: f64,
    /// `(n/2)(ρ_ii + ρ_jj)` on the original populations.
    pub visibility_weight: f64,
    /// Measured two-path fringe contrast; `None` for a flagged pair.
    pub contrast: Option<f64>,
    /// Closed-form `2|ρ_ij|/(ρ_ii + ρ_jj)` of the reduced state.
    pub visibility: Option<f64>,
    pub predictability: Option<f64>,
    pub distinguishability: Option<f64>,
    pub entanglement: Option<f64>,
}

/// Global measures alongside their pair-opening reconstructions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CampaignRecord {
    pub n: usize,
    pub populations: Vec<f64>,
    pub pairs: Vec<CampaignPair>,
    pub flagged_pairs: Vec<(usize, usize)>,
    pub global_visibility: f64,
    pub global_predictability: f64,
    pub global_distinguishability: Option<f64>,
    pub global_entanglement: Option<f64>,
    /// Weighted reconstructions; `None` when any pair is flagged.
    pub rebuilt_visibility: Option<Reconstruction>,
    pub rebuilt_predictability: Option<Reconstruction>,
    pub rebuilt_distinguishability: Option<Reconstruction>,
    pub rebuilt_entanglement: Option<Reconstruction>,
    /// Largest `|measured contrast − closed-form V_ij|` over the pairs.
    pub max_contrast_deviation: f64,
    /// Largest `|rebuilt − global|` over the reconstructed measures.
    pub max_reconstruction_residual: Option<f64>,
}

impl CampaignRecord {
    pub fn to_csv(&self) -> String {
        fn cell(v: Option<f64>) -> String {
            v.map(crate::csv_float).unwrap_or_default()
        }
        let mut out = String::from(
            "i,j,pair_population,visibility_weight,contrast,visibility,predictability,distinguishability,entanglement\n",
        );
        for p in &self.pairs {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                p.i,
                p.j,
                crate::csv_float(p.pair_population),
                crate::csv_float(p.visibility_weight),
                cell(p.contrast),
                cell(p.visibility),
                cell(p.predictability),
                cell(p.distinguishability),
                cell(p.entanglement)
            ));
        }
        out
    }
}

/// Fringe contrast of a two-path state, sampled with the scan aligned to
/// the phase of `ρ_01` so that both extremes fall on grid points.
fn two_path_contrast(pair: &QuantonState, grid: usize) -> Result<f64> {
    let base = PhaseVector::new(vec![0.0, pair.entry(0, 1).arg()])?;
    let scan = fringe_scan(pair, &ChannelModel::uniform(2)?, &base, grid)?;
    fringe_contrast(&scan)
}

/// Opens each pair of paths in turn, measures the two-path quantities, and
/// rebuilds the global measures from them.
///
/// With a detector, every pairwise quantity is taken on the reduced state
/// seen behind the detector; without one, distinguishability and
/// entanglement are not reported.
pub fn pair_opening_campaign(s: &QuantonState, g: Option<&DetectorGram>) -> Result<CampaignRecord> {
    let n = s.n();
    let reduced = match g {
        Some(g) => couple_detector(s, g)?,
        None => s.clone(),
    };
    let populations = s.populations();
    let v_table = pairwise_visibility(&reduced)?;
    let p_table = pairwise_predictability(&reduced)?;
    let d_table = g.map(|g| pairwise_distinguishability(s, g)).transpose()?;

    let mut pairs = Vec::new();
    let mut contrast_entries = Vec::new();
    let mut e_entries = Vec::new();
    let mut flagged_pairs = Vec::new();
    let mut max_contrast_deviation: f64 = 0.0;
    for (k, ve) in v_table.pairs.iter().enumerate() {
        let (i, j) = (ve.i, ve.j);
        let blocked = match block_paths(&reduced, &PathMask::pair(i, j, n)?) {
            Ok(b) => Some(b),
            Err(Error::ZeroProbabilityBlock) => {
                flagged_pairs.push((i, j));
                None
            }
            Err(e) => return Err(e),
        };
        let contrast = blocked.as_ref().map(|b| two_path_contrast(b, DEFAULT_SCAN_GRID)).transpose()?;
        let pair_entanglement = match (&blocked, g) {
            (Some(b), Some(_)) => Some(entanglement(b)?),
            _ => None,
        };
        if let (Some(c), Some(v)) = (contrast, ve.value) {
            max_contrast_deviation = max_contrast_deviation.max((c - v).abs());
        }
        contrast_entries.push(PairEntry { value: contrast, ..*ve });
        e_entries.push(PairEntry {
            weight: ve.pair_population,
            value: pair_entanglement,
            ..*ve
        });
        pairs.push(CampaignPair {
            i,
            j,
            pair_population: ve.pair_population,
            visibility_weight: ve.weight,
            contrast,
            visibility: ve.value,
            predictability: p_table.pairs[k].value,
            distinguishability: d_table.as_ref().and_then(|t| t.pairs[k].value),
            entanglement: pair_entanglement,
        });
    }

    let global_visibility = visibility(&reduced);
    let global_predictability = predictability(&reduced)?;
    let global_distinguishability = g.map(|g| distinguishability(s, g)).transpose()?;
    let global_entanglement = g.map(|_| entanglement(&reduced)).transpose()?;

    let contrast_table = PairwiseTable {
        measure: MeasureKind::Visibility,
        n,
        pairs: contrast_entries,
    };
    let e_table = PairwiseTable {
        measure: MeasureKind::Entanglement,
        n,
        pairs: e_entries,
    };
    let complete = flagged_pairs.is_empty();
    let rebuild = |t: &PairwiseTable| -> Result<Option<Reconstruction>> {
        if complete {
            rms_reconstruct(t, RmsMode::Weighted).map(Some)
        } else {
            Ok(None)
        }
    };
    let rebuilt_visibility = rebuild(&contrast_table)?;
    let rebuilt_predictability = rebuild(&p_table)?;
    let rebuilt_distinguishability = match &d_table {
        Some(t) => rebuild(t)?,
        None => None,
    };
    let rebuilt_entanglement = if g.is_some() { rebuild(&e_table)? } else { None };

    let max_reconstruction_residual = complete.then(|| {
        [
            (rebuilt_visibility, Some(global_visibility)),
            (rebuilt_predictability, Some(global_predictability)),
            (rebuilt_distinguishability, global_distinguishability),
            (rebuilt_entanglement, global_entanglement),
        ]
        .iter()
        .filter_map(|(r, g)| Some((r.as_ref()?.value - (*g)?).abs()))
        .fold(0.0, f64::max)
    });

    Ok(CampaignRecord {
        n,
        populations,
        pairs,
        flagged_pairs,
        global_visibility,
        global_predictability,
        global_distinguishability,
        global_entanglement,
        rebuilt_visibility,
        rebuilt_predictability,
        rebuilt_distinguishability,
        rebuilt_entanglement,
        max_contrast_deviation,
        max_reconstruction_residual,
    })
}

/// Margin by which the contrast must grow to count as an increase.
pub const CONTRAST_INCREASE_MARGIN: f64 = 1e-9;

/// Fringe contrast and visibility before and after selective decoherence of one path.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeiWeitzReport {
    pub n: usize,
    pub flipped_path: usize,
    pub overlap: f64,
    pub profile: ScanProfile,
    pub contrast_before: f64,
    pub contrast_after: f64,
    pub visibility_before: f64,
    pub visibility_after: f64,
    /// `n/(n−1) Σ_{i≠j} |ρ_ij|² |⟨d_i|d_j⟩|²`, the squared visibility behind the detector.
    pub visibility_after_sqr_from_overlaps: f64,
    /// `contrast_after > contrast_before + CONTRAST_INCREASE_MARGIN`.
    pub contrast_increased: bool,
}

/// Detector that only tells whether the quanton took path `flagged`: all
/// other states equal `e₁`, the flagged one is `overlap·e₁ + √(1−overlap²)·e₂`.
pub fn single_path_marker(n: usize, flagged: usize, overlap: f64) -> Result<DetectorGram> {
    if !(overlap.abs() <= 1.0) {
        return Err(Error::NotPsd {
            min_eigenvalue: 1.0 - overlap * overlap,
        });
    }
    if flagged >= n {
        return Err(Error::invalid("flipped path", format!("path {flagged} outside [0, {n})"), flagged));
    }
    let e1 = vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
    let marked = vec![
        Complex64::new(overlap, 0.0),
        Complex64::new((1.0 - overlap * overlap).sqrt(), 0.0),
    ];
    let vectors: Vec<Vec<Complex64>> = (0..n).map(|i| if i == flagged { marked.clone() } else { e1.clone() }).collect();
    DetectorGram::from_vectors(&vectors)
}

/// The scan used by [`mei_weitz`]: the phase of the first path other than
/// `flipped_path` is swept.
pub fn default_mei_weitz_profile(flipped_path: usize) -> ScanProfile {
    ScanProfile::ReferenceArm {
        path: usize::from(flipped_path == 0),
    }
}

/// Equal-population coherent state with a π phase on `flipped_path`, scanned
/// before and after the detector marks that path with the given overlap.
pub fn mei_weitz(n: usize, flipped_path: usize, overlap: f64) -> Result<MeiWeitzReport> {
    mei_weitz_with(n, flipped_path, overlap, default_mei_weitz_profile(flipped_path), DEFAULT_SCAN_GRID)
}

pub fn mei_weitz_with(
    n: usize,
    flipped_path: usize,
    overlap: f64,
    profile: ScanProfile,
    grid: usize,
) -> Result<MeiWeitzReport> {
    if n < 3 {
        return Err(Error::BadDimension(format!(
            "selective decoherence needs at least 3 paths, got {n}"
        )));
    }
    if flipped_path >= n {
        return Err(Error::invalid("flipped path", format!("path {flipped_path} outside [0, {n})"), flipped_path));
    }
    let state = QuantonState::maximally_coherent(n)?;
    let mut base = vec![0.0; n];
    base[flipped_path] = PI;
    let base = PhaseVector::new(base)?;
    let ch = ChannelModel::uniform(n)?;

    let before_gram = single_path_marker(n, flipped_path, 1.0)?;
    let after_gram = single_path_marker(n, flipped_path, overlap)?;
    let before = couple_detector(&state, &before_gram)?;
    let after = couple_detector(&state, &after_gram)?;

    let contrast_before = fringe_contrast(&fringe_scan_with(&before, &ch, &base, grid, profile)?)?;
    let contrast_after = fringe_contrast(&fringe_scan_with(&after, &ch, &base, grid, profile)?)?;
    let visibility_before = visibility(&before);
    let visibility_after = visibility(&after);

    let nf = n as f64;
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc += state.entry(i, j).norm_sqr() * after_gram.overlap(i, j).norm_sqr();
            }
        }
    }
    Ok(MeiWeitzReport {
        n,
        flipped_path,
        overlap,
        profile,
        contrast_before,
        contrast_after,
        visibility_before,
        visibility_after,
        visibility_after_sqr_from_overlaps: nf / (nf - 1.0) * acc,
        contrast_increased: contrast_after > contrast_before + CONTRAST_INCREASE_MARGIN,
    })
}
