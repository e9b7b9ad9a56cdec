//! Seeded random instances and the identity/oracle residuals evaluated on them.

use rayon::prelude::*;
use serde::Serialize;
use triality_core::interferometer::{phase_average_variance, ChannelModel, VarianceMethod};
use triality_core::measures::{
    measure_report, pairwise_concurrence, pairwise_distinguishability, pairwise_entanglement, pairwise_predictability,
    pairwise_visibility, rms_reconstruct, PairwiseTable, RmsMode,
};
use triality_core::oracles::{
    build_joint, helstrom_oracle, i_concurrence_oracle, two_qubit_concurrence_oracle, variance_bruteforce,
    BRUTEFORCE_MAX_N,
};
use triality_core::states::{couple_detector, density_from_pure, random_gram, random_mixed, random_pure};
use triality_core::{csv_float, DetectorGram, PureQuanton, QuantonState, Result};

use crate::config::Mixedness;

/// SplitMix64 step, used to derive independent per-instance seeds.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Parameters shared by `random-sweep` and batch `verify`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec {
    pub n_min: usize,
    pub n_max: usize,
    pub count: usize,
    pub seed: u64,
    pub mixedness: Mixedness,
    pub ancilla_dim: usize,
    pub detector_dim: usize,
}

/// One generated quanton/detector pair.
#[derive(Debug, Clone)]
pub struct Instance {
    pub n: usize,
    pub index: usize,
    pub seed: u64,
    /// Present when the quanton state is pure.
    pub pure: Option<PureQuanton>,
    pub state: QuantonState,
    pub gram: DetectorGram,
}

pub fn generate(spec: &SweepSpec, n: usize, index: usize) -> Result<Instance> {
    let global = (n as u64) << 32 | index as u64;
    let seed = derive_seed(spec.seed, global);
    let is_pure = match spec.mixedness {
        Mixedness::Pure => true,
        Mixedness::Mixed => false,
        Mixedness::Alternate => index.is_multiple_of(2),
    };
    let (pure, state) = if is_pure {
        let psi = random_pure(n, seed)?;
        let s = density_from_pure(&psi)?;
        (Some(psi), s)
    } else {
        (None, random_mixed(n, spec.ancilla_dim.max(2), seed)?)
    };
    let gram = random_gram(n, spec.detector_dim, derive_seed(seed, 1))?;
    Ok(Instance {
        n,
        index,
        seed,
        pure,
        state,
        gram,
    })
}

/// Identity and oracle residuals of one instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub n: usize,
    pub index: usize,
    pub seed: u64,
    pub pure: bool,
    pub visibility: f64,
    pub predictability: f64,
    pub distinguishability: f64,
    pub entanglement: f64,
    pub triality_residual: f64,
    pub duality_residual: f64,
    pub dpe_residual: f64,
    pub rms_visibility_residual: f64,
    pub rms_predictability_residual: f64,
    pub rms_distinguishability_residual: f64,
    pub rms_entanglement_residual: f64,
    /// `|ℰ − √(n/(2(n−1)))·C_I|`; pure instances only.
    pub oracle_entanglement_residual: Option<f64>,
    /// Largest `|D_ij − Helstrom|` over pairs.
    pub oracle_helstrom_residual: f64,
    /// Largest `|E_ij − two-path concurrence|` over pairs; pure instances only.
    pub oracle_concurrence_residual: Option<f64>,
}

pub const SWEEP_CSV_HEADER: &str = "n,index,seed,pure,visibility,predictability,distinguishability,entanglement,\
triality_residual,duality_residual,dpe_residual,rms_visibility_residual,rms_predictability_residual,\
rms_distinguishability_residual,rms_entanglement_residual,oracle_entanglement_residual,oracle_helstrom_residual,\
oracle_concurrence_residual";

impl SweepRow {
    pub fn to_csv_line(&self) -> String {
        let opt = |v: Option<f64>| v.map(csv_float).unwrap_or_default();
        [
            self.n.to_string(),
            self.index.to_string(),
            self.seed.to_string(),
            self.pure.to_string(),
            csv_float(self.visibility),
            csv_float(self.predictability),
            csv_float(self.distinguishability),
            csv_float(self.entanglement),
            csv_float(self.triality_residual),
            csv_float(self.duality_residual),
            csv_float(self.dpe_residual),
            csv_float(self.rms_visibility_residual),
            csv_float(self.rms_predictability_residual),
            csv_float(self.rms_distinguishability_residual),
            csv_float(self.rms_entanglement_residual),
            opt(self.oracle_entanglement_residual),
            csv_float(self.oracle_helstrom_residual),
            opt(self.oracle_concurrence_residual),
        ]
        .join(",")
    }
}

fn weighted(table: &PairwiseTable) -> Result<f64> {
    Ok(rms_reconstruct(table, RmsMode::Weighted)?.value)
}

/// `|D_ij − Helstrom(ρ_ii/w, ρ_jj/w, |g_ij|)|` maximized over pairs.
pub fn helstrom_residual(s: &QuantonState, g: &DetectorGram) -> Result<f64> {
    let table = pairwise_distinguishability(s, g)?;
    let p = s.populations();
    let mut worst: f64 = 0.0;
    for e in &table.pairs {
        let (Some(d), true) = (e.value, p[e.i] > 0.0 && p[e.j] > 0.0) else {
            continue;
        };
        let w = e.pair_population;
        let (pi, pj) = (p[e.i] / w, p[e.j] / w);
        let oracle = helstrom_oracle(pi, pj, g.overlap(e.i, e.j).norm().min(1.0))?;
        worst = worst.max((d - oracle).abs());
    }
    Ok(worst)
}

/// `|E_ij − two-path concurrence oracle|` maximized over pairs of a pure quanton.
pub fn concurrence_residual(psi: &PureQuanton, g: &DetectorGram) -> Result<f64> {
    let table = pairwise_concurrence(psi, g)?;
    let c = psi.amplitudes();
    let mut worst: f64 = 0.0;
    for e in &table.pairs {
        let Some(value) = e.value else { continue };
        let pair = PureQuanton::normalized(vec![c[e.i], c[e.j]])?;
        let sub = DetectorGram::new(g.matrix().principal_submatrix(&[e.i, e.j]))?;
        let oracle = two_qubit_concurrence_oracle(&build_joint(&pair, &sub)?)?;
        worst = worst.max((value - oracle).abs());
    }
    Ok(worst)
}

/// `|ℰ(ρ_r) − √(n/(2(n−1)))·C_I(joint)|`.
pub fn entanglement_oracle_residual(psi: &PureQuanton, g: &DetectorGram, entanglement: f64) -> Result<f64> {
    let n = psi.n() as f64;
    let scaled = (n / (2.0 * (n - 1.0))).sqrt() * i_concurrence_oracle(&build_joint(psi, g)?);
    Ok((entanglement - scaled).abs())
}

pub fn evaluate(inst: &Instance) -> Result<SweepRow> {
    let s = &inst.state;
    let g = &inst.gram;
    let r = measure_report(s, g)?;
    let reduced = couple_detector(s, g)?;
    let rms_v = weighted(&pairwise_visibility(&reduced)?)?;
    let rms_p = weighted(&pairwise_predictability(&reduced)?)?;
    let rms_d = weighted(&pairwise_distinguishability(s, g)?)?;
    let rms_e = weighted(&pairwise_entanglement(&reduced)?)?;
    let (oracle_e, oracle_c) = match &inst.pure {
        Some(psi) => (
            Some(entanglement_oracle_residual(psi, g, r.entanglement)?),
            Some(concurrence_residual(psi, g)?),
        ),
        None => (None, None),
    };
    Ok(SweepRow {
        n: inst.n,
        index: inst.index,
        seed: inst.seed,
        pure: inst.pure.is_some(),
        visibility: r.visibility,
        predictability: r.predictability,
        distinguishability: r.distinguishability,
        entanglement: r.entanglement,
        triality_residual: r.triality_residual,
        duality_residual: r.duality_residual,
        dpe_residual: r.dpe_residual,
        rms_visibility_residual: (rms_v - r.visibility).abs(),
        rms_predictability_residual: (rms_p - r.predictability).abs(),
        rms_distinguishability_residual: (rms_d - r.distinguishability).abs(),
        rms_entanglement_residual: (rms_e - r.entanglement).abs(),
        oracle_entanglement_residual: oracle_e,
        oracle_helstrom_residual: helstrom_residual(s, g)?,
        oracle_concurrence_residual: oracle_c,
    })
}

/// All `(n, index)` pairs of a sweep in output order.
pub fn instance_keys(spec: &SweepSpec) -> Vec<(usize, usize)> {
    (spec.n_min..=spec.n_max)
        .flat_map(|n| (0..spec.count).map(move |k| (n, k)))
        .collect()
}

/// Evaluates every instance in parallel; rows come back in key order.
pub fn random_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    instance_keys(spec)
        .into_par_iter()
        .map(|(n, k)| evaluate(&generate(spec, n, k)?))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepSummary {
    pub instances: usize,
    pub pure_instances: usize,
    pub max_abs_triality_residual: f64,
    /// Largest `|𝒟² + 𝒱² − 1|` over pure instances.
    pub max_abs_pure_duality_residual: f64,
    /// Largest `𝒟² + 𝒱² − 1` over mixed instances (should not exceed zero).
    pub max_mixed_duality_residual: Option<f64>,
    /// Mixed instances with `𝒟² + 𝒱² < 1 − 1e−12`.
    pub strict_duality_instances: usize,
    pub max_abs_pure_dpe_residual: f64,
    pub max_rms_residual: f64,
    pub max_oracle_entanglement_residual: Option<f64>,
    pub max_oracle_helstrom_residual: f64,
    pub max_oracle_concurrence_residual: Option<f64>,
}

pub fn summarize(rows: &[SweepRow]) -> SweepSummary {
    let max = |it: &mut dyn Iterator<Item = f64>| it.fold(0.0f64, f64::max);
    let opt_max = |it: &mut dyn Iterator<Item = Option<f64>>| {
        it.flatten().fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v))))
    };
    let pure: Vec<&SweepRow> = rows.iter().filter(|r| r.pure).collect();
    let mixed: Vec<&SweepRow> = rows.iter().filter(|r| !r.pure).collect();
    SweepSummary {
        instances: rows.len(),
        pure_instances: pure.len(),
        max_abs_triality_residual: max(&mut rows.iter().map(|r| r.triality_residual.abs())),
        max_abs_pure_duality_residual: max(&mut pure.iter().map(|r| r.duality_residual.abs())),
        max_mixed_duality_residual: mixed.iter().map(|r| r.duality_residual).reduce(f64::max),
        strict_duality_instances: mixed.iter().filter(|r| r.duality_residual < -1e-12).count(),
        max_abs_pure_dpe_residual: max(&mut pure.iter().map(|r| r.dpe_residual.abs())),
        max_rms_residual: max(&mut rows.iter().flat_map(|r| {
            [
                r.rms_visibility_residual,
                r.rms_predictability_residual,
                r.rms_distinguishability_residual,
                r.rms_entanglement_residual,
            ]
        })),
        max_oracle_entanglement_residual: opt_max(&mut rows.iter().map(|r| r.oracle_entanglement_residual)),
        max_oracle_helstrom_residual: max(&mut rows.iter().map(|r| r.oracle_helstrom_residual)),
        max_oracle_concurrence_residual: opt_max(&mut rows.iter().map(|r| r.oracle_concurrence_residual)),
    }
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(SWEEP_CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.to_csv_line());
        out.push('\n');
    }
    out
}

/// Oracle residuals of one instance, as reported by `verify`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VerifyRow {
    pub n: usize,
    pub index: usize,
    pub oracle_entanglement_residual: Option<f64>,
    pub oracle_helstrom_residual: f64,
    pub oracle_concurrence_residual: Option<f64>,
    /// `|tensor-grid variance − closed form|`; omitted above the oracle's size limit.
    pub variance_residual: Option<f64>,
}

pub fn verify_instance(
    index: usize,
    pure: Option<&PureQuanton>,
    s: &QuantonState,
    g: &DetectorGram,
    bruteforce_grid: usize,
) -> Result<VerifyRow> {
    let n = s.n();
    let (oracle_e, oracle_c) = match pure {
        Some(psi) => {
            let e = triality_core::measures::entanglement(&couple_detector(s, g)?)?;
            (
                Some(entanglement_oracle_residual(psi, g, e)?),
                Some(concurrence_residual(psi, g)?),
            )
        }
        None => (None, None),
    };
    let variance_residual = if n <= BRUTEFORCE_MAX_N {
        let ch = ChannelModel::uniform(n)?;
        let exact = phase_average_variance(s, &ch, VarianceMethod::Exact)?.value;
        Some((variance_bruteforce(s, &ch, bruteforce_grid)? - exact).abs())
    } else {
        None
    };
    Ok(VerifyRow {
        n,
        index,
        oracle_entanglement_residual: oracle_e,
        oracle_helstrom_residual: helstrom_residual(s, g)?,
        oracle_concurrence_residual: oracle_c,
        variance_residual,
    })
}
