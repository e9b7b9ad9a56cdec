//! Command dispatch: turns a resolved scenario into a JSON report and optional CSV.

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use triality_core::interferometer::{
    default_mei_weitz_profile, fringe_contrast, fringe_scan_with, mei_weitz_with, pair_opening_campaign,
    phase_average_variance, visibility_from_variance, ChannelModel, MeiWeitzReport, ScanProfile, VarianceMethod,
};
use triality_core::measures::{
    measure_report, pairwise_concurrence, pairwise_distinguishability, pairwise_entanglement, pairwise_predictability,
    pairwise_visibility, rms_reconstruct, visibility, PairwiseTable, Reconstruction, RmsMode,
};
use triality_core::oracles::variance_bruteforce;
use triality_core::states::{
    couple_detector, density_from_ensemble, density_from_pure, Ensemble, PhaseVector, PureQuanton, QuantonState,
};
use triality_core::{csv_float, ComplexMatrix, DetectorGram};

use crate::config::{
    to_rows, to_vector, Command, DetectorSource, MethodName, ScanName, ScenarioConfig, StateSource,
};
use crate::error::{CliError, Locate};
use crate::sweep::{self, SweepSpec, VerifyRow};

/// Version string embedded in every report.
pub const VERSION: &str = concat!("triality ", env!("CARGO_PKG_VERSION"));

/// Everything a command produced, before it is written anywhere.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub report: Value,
    pub csv: Option<String>,
}

impl RunOutput {
    pub fn report_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.report).expect("report serializes");
        s.push('\n');
        s
    }
}

/// A parsed quanton state, keeping the pure vector when there is one.
struct LoadedState {
    pure: Option<PureQuanton>,
    state: QuantonState,
}

fn load_state(src: &StateSource, origin: &str) -> Result<LoadedState, CliError> {
    match src {
        StateSource::Pure(a) => {
            let psi = PureQuanton::new(to_vector(a)).at(format!("{origin}: state.pure"))?;
            let state = density_from_pure(&psi).at(format!("{origin}: state.pure"))?;
            Ok(LoadedState {
                pure: Some(psi),
                state,
            })
        }
        StateSource::Ensemble(members) => {
            let mut parsed = Vec::with_capacity(members.len());
            for (k, m) in members.iter().enumerate() {
                let psi = PureQuanton::new(to_vector(&m.amplitudes))
                    .at(format!("{origin}: state.ensemble[{k}].amplitudes"))?;
                parsed.push((m.weight, psi));
            }
            let e = Ensemble::new(parsed).at(format!("{origin}: state.ensemble"))?;
            let state = density_from_ensemble(&e).at(format!("{origin}: state.ensemble"))?;
            Ok(LoadedState { pure: None, state })
        }
        StateSource::Density(rows) => {
            let m = ComplexMatrix::from_rows(&to_rows(rows)).at(format!("{origin}: state.density"))?;
            let state = QuantonState::new(m).at(format!("{origin}: state.density"))?;
            Ok(LoadedState { pure: None, state })
        }
        StateSource::File(path) => {
            let shown = path.display().to_string();
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Io(format!("{origin}: state.file: cannot read {shown}: {e}")))?;
            let inner: StateSource =
                serde_json::from_str(&text).map_err(|e| CliError::Parse(format!("{shown}: {e}")))?;
            if matches!(inner, StateSource::File(_)) {
                return Err(CliError::Parse(format!("{shown}: a state file cannot point to another file")));
            }
            load_state(&inner, &shown)
        }
    }
}

fn require_state(config: &ScenarioConfig, origin: &str) -> Result<LoadedState, CliError> {
    let src = config.state.as_ref().ok_or_else(|| {
        CliError::Parse(format!(
            "{origin}: command '{}' needs a 'state' entry",
            config.command.name()
        ))
    })?;
    load_state(src, origin)
}

fn load_detector(config: &ScenarioConfig, origin: &str, n: usize) -> Result<Option<DetectorGram>, CliError> {
    let g = match &config.detector {
        DetectorSource::None => return Ok(None),
        DetectorSource::Gram(rows) => {
            let m = ComplexMatrix::from_rows(&to_rows(rows)).at(format!("{origin}: detector.gram"))?;
            DetectorGram::new(m).at(format!("{origin}: detector.gram"))?
        }
        DetectorSource::Vectors(v) => DetectorGram::from_vectors(&to_rows(v)).at(format!("{origin}: detector.vectors"))?,
    };
    if g.n() != n {
        return Err(CliError::Core {
            location: format!("{origin}: detector"),
            source: triality_core::Error::DimensionMismatch {
                context: "detector gram",
                expected: n,
                found: g.n(),
            },
        });
    }
    Ok(Some(g))
}

fn channel(config: &ScenarioConfig, origin: &str, n: usize) -> Result<ChannelModel, CliError> {
    match config.channel {
        Some(c) => ChannelModel::new(n, c.amp2).at(format!("{origin}: channel.amp2")),
        None => ChannelModel::uniform(n).at(format!("{origin}: channel")),
    }
}

fn phases(config: &ScenarioConfig, origin: &str, n: usize) -> Result<PhaseVector, CliError> {
    match &config.phases_rad {
        None => Ok(PhaseVector::zeros(n)),
        Some(p) => {
            if p.len() != n {
                return Err(CliError::Core {
                    location: format!("{origin}: phases_rad"),
                    source: triality_core::Error::DimensionMismatch {
                        context: "phase vector",
                        expected: n,
                        found: p.len(),
                    },
                });
            }
            PhaseVector::new(p.clone()).at(format!("{origin}: phases_rad"))
        }
    }
}

fn scan_profile(config: &ScenarioConfig, fallback: ScanProfile) -> ScanProfile {
    match config.protocol.scan {
        None => fallback,
        Some(ScanName::LinearRamp) => ScanProfile::LinearRamp,
        Some(ScanName::ReferenceArm) => ScanProfile::ReferenceArm {
            path: config.protocol.reference_path.unwrap_or(match fallback {
                ScanProfile::ReferenceArm { path } => path,
                ScanProfile::LinearRamp => 0,
            }),
        },
    }
}

fn report(config: &ScenarioConfig, result: impl Serialize) -> Value {
    json!({
        "version": VERSION,
        "config": config,
        "result": result,
    })
}

fn cell(v: Option<f64>) -> String {
    v.map(csv_float).unwrap_or_default()
}

/// Executes `config`; `origin` names the scenario source in error messages.
pub fn run(config: &ScenarioConfig, origin: &str) -> Result<RunOutput, CliError> {
    match config.command {
        Command::Measures => run_measures(config, origin),
        Command::Campaign => run_campaign(config, origin),
        Command::Scan => run_scan(config, origin),
        Command::Variance => run_variance(config, origin),
        Command::Meiweitz => run_mei_weitz(config, origin),
        Command::Verify => run_verify(config, origin),
        Command::RandomSweep => run_random_sweep(config, origin),
    }
}

#[derive(Serialize)]
struct Reconstructions {
    visibility: Option<Reconstruction>,
    predictability: Option<Reconstruction>,
    distinguishability: Option<Reconstruction>,
    entanglement: Option<Reconstruction>,
}

fn run_measures(config: &ScenarioConfig, origin: &str) -> Result<RunOutput, CliError> {
    let loaded = require_state(config, origin)?;
    let s = &loaded.state;
    let n = s.n();
    let g = load_detector(config, origin, n)?.map_or_else(|| DetectorGram::parallel(n), Ok).at(origin)?;
    let loc = format!("{origin}: measures");
    let m = measure_report(s, &g).at(&loc)?;
    let reduced = couple_detector(s, &g).at(&loc)?;
    let v = pairwise_visibility(&reduced).at(&loc)?;
    let p = pairwise_predictability(&reduced).at(&loc)?;
    let d = pairwise_distinguishability(s, &g).at(&loc)?;
    let e = match &loaded.pure {
        Some(psi) => pairwise_concurrence(psi, &g),
        None => pairwise_entanglement(&reduced),
    }
    .at(&loc)?;
    let rebuild = |t: &PairwiseTable| rms_reconstruct(t, RmsMode::Weighted).ok();
    let reconstructions = Reconstructions {
        visibility: rebuild(&v),
        predictability: rebuild(&p),
        distinguishability: rebuild(&d),
        entanglement: rebuild(&e),
    };
    let mut csv = String::from("i,j,pair_population,visibility,predictability,distinguishability,entanglement\n");
    for k in 0..v.pairs.len() {
        let pe = &v.pairs[k];
        csv.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            pe.i,
            pe.j,
            csv_float(pe.pair_population),
            cell(pe.value),
            cell(p.pairs[k].value),
            cell(d.pairs[k].value),
            cell(e.pairs[k].value)
        ));
    }
    let result = json!({
        "n": n,
        "pure": loaded.pure.is_some(),
        "measures": m,
        "pairwise": {"visibility": v, "predictability": p, "distinguishability": d, "entanglement": e},
        "reconstructions": reconstructions,
    });
    Ok(RunOutput {
        report: report(config, result),
        csv: Some(csv),
    })
}

fn run_campaign(config: &ScenarioConfig, origin: &str) -> Result<RunOutput, CliError> {
    let loaded = require_state(config, origin)?;
    let g = load_detector(config, origin, loaded.state.n())?;
    let record = pair_opening_campaign(&loaded.state, g.as_ref()).at(format!("{origin}: campaign"))?;
    let csv = record.to_csv();
    Ok(RunOutput {
        report: report(config, &record),
        csv: Some(csv),
    })
}

fn run_scan(config: &ScenarioConfig, origin: &str) -> Result<RunOutput, CliError> {
    let loaded = require_state(config, origin)?;
    let n = loaded.state.n();
    let seen = match load_detector(config, origin, n)? {
        Some(g) => couple_detector(&loaded.state, &g).at(format!("{origin}: detector"))?,
        None => loaded.state.clone(),
    };
    let ch = channel(config, origin, n)?;
    let base = phases(config, origin, n)?;
    let profile = scan_profile(config, ScanProfile::LinearRamp);
    let loc = format!("{origin}: protocol");
    let scan = fringe_scan_with(&seen, &ch, &base, config.protocol.grid, profile).at(&loc)?;
    let contrast = fringe_contrast(&scan).at(&loc)?;
    let result = json!({
        "n": n,
        "grid": config.protocol.grid,
        "profile": profile,
        "contrast": contrast,
        "visibility": visibility(&seen),
    });
    Ok(RunOutput {
        report: report(config, result),
        csv: Some(scan.to_csv()),
    })
}

fn run_variance(config: &ScenarioConfig, origin: &str) -> Result<RunOutput, CliError> {
    let loaded = require_state(config, origin)?;
    let n = loaded.state.n();
    let seen = match load_detector(config, origin, n)? {
        Some(g) => couple_detector(&loaded.state, &g).at(format!("{origin}: detector"))?,
        None => loaded.state.clone(),
    };
    let ch = channel(config, origin, n)?;
    let pr = &config.protocol;
    let loc = format!("{origin}: protocol");
    let exact = phase_average_variance(&seen, &ch, VarianceMethod::Exact).at(&loc)?;
    let (value, standard_error, evaluations) = match pr.method {
        MethodName::Exact => (exact.value, 0.0, 0),
        MethodName::MonteCarlo => {
            let e = phase_average_variance(
                &seen,
                &ch,
                VarianceMethod::MonteCarlo {
                    samples: pr.samples,
                    seed: pr.seed,
                },
            )
            .at(&loc)?;
            (e.value, e.standard_error, e.evaluations)
        }
        MethodName::Quadrature => {
            let e = phase_average_variance(&seen, &ch, VarianceMethod::Quadrature { points: pr.points }).at(&loc)?;
            (e.value, 0.0, e.evaluations)
        }
        MethodName::Bruteforce => {
            let v = variance_bruteforce(&seen, &ch, pr.points).at(&loc)?;
            (v, 0.0, pr.points.pow(n as u32))
        }
    };
    let from_variance = if ch.is_uniform() {
        Some(visibility_from_variance(value, n).at(&loc)?)
    } else {
        None
    };
    let result = json!({
        "n": n,
        "amp2": ch.amp2,
        "method": pr.method,
        "variance": value,
        "standard_error": standard_error,
        "evaluations": evaluations,
        "exact_variance": exact.value,
        "visibility_from_variance": from_variance,
        "visibility": visibility(&seen),
    });
    let csv = format!(
        "method,variance,standard_error,evaluations,exact_variance,visibility_from_variance,visibility\n{},{},{},{},{},{},{}\n",
        serde_json::to_value(pr.method).expect("enum serializes").as_str().unwrap_or_default(),
        csv_float(value),
        csv_float(standard_error),
        evaluations,
        csv_float(exact.value),
        cell(from_variance),
        csv_float(visibility(&seen)),
    );
    Ok(RunOutput {
        report: report(config, result),
        csv: Some(csv),
    })
}

fn run_mei_weitz(config: &ScenarioConfig, origin: &str) -> Result<RunOutput, CliError> {
    let pr = &config.protocol;
    let profile = scan_profile(config, default_mei_weitz_profile(pr.flipped_path));
    let overlaps = pr.overlaps.clone().unwrap_or_else(|| vec![pr.overlap]);
    let loc = format!("{origin}: protocol");
    let reports: Vec<MeiWeitzReport> = overlaps
        .iter()
        .map(|&o| mei_weitz_with(pr.paths, pr.flipped_path, o, profile, pr.grid))
        .collect::<triality_core::Result<_>>()
        .at(&loc)?;
    let mut csv = String::from(
        "overlap,contrast_before,contrast_after,visibility_before,visibility_after,contrast_increased\n",
    );
    for r in &reports {
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            csv_float(r.overlap),
            csv_float(r.contrast_before),
            csv_float(r.contrast_after),
            csv_float(r.visibility_before),
            csv_float(r.visibility_after),
            r.contrast_increased
        ));
    }
    let visibility_never_increases = reports.iter().all(|r| r.visibility_after <= r.visibility_before + 1e-12);
    let result = json!({
        "profile": profile,
        "runs": reports,
        "visibility_never_increases": visibility_never_increases,
    });
    Ok(RunOutput {
        report: report(config, result),
        csv: Some(csv),
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
struct Stat {
    max: f64,
    mean: f64,
    count: usize,
}

fn stat(values: impl Iterator<Item = Option<f64>>) -> Option<Stat> {
    let v: Vec<f64> = values.flatten().collect();
    if v.is_empty() {
        return None;
    }
    Some(Stat {
        max: v.iter().copied().fold(0.0, f64::max),
        mean: v.iter().sum::<f64>() / v.len() as f64,
        count: v.len(),
    })
}

fn sweep_spec(config: &ScenarioConfig, origin: &str) -> Result<SweepSpec, CliError> {
    let pr = &config.protocol;
    if pr.count < 1 {
        return Err(CliError::Core {
            location: format!("{origin}: protocol.count"),
            source: triality_core::Error::InvalidValue {
                what: "instance count",
                invariant: "must be at least 1".into(),
                index: 0,
            },
        });
    }
    if !(2 <= pr.n_min && pr.n_min <= pr.n_max) {
        return Err(CliError::Core {
            location: format!("{origin}: protocol.n_min"),
            source: triality_core::Error::BadDimension(format!(
                "need 2 ≤ n_min ≤ n_max, got n_min = {}, n_max = {}",
                pr.n_min, pr.n_max
            )),
        });
    }
    Ok(SweepSpec {
        n_min: pr.n_min,
        n_max: pr.n_max,
        count: pr.count,
        seed: pr.seed,
        mixedness: pr.mixedness,
        ancilla_dim: pr.ancilla_dim,
        detector_dim: pr.detector_dim,
    })
}

fn run_verify(config: &ScenarioConfig, origin: &str) -> Result<RunOutput, CliError> {
    let grid = config.protocol.bruteforce_grid;
    let loc = format!("{origin}: verify");
    let rows: Vec<VerifyRow> = match &config.state {
        Some(_) => {
            let loaded = require_state(config, origin)?;
            let n = loaded.state.n();
            let g = load_detector(config, origin, n)?.map_or_else(|| DetectorGram::parallel(n), Ok).at(origin)?;
            vec![sweep::verify_instance(0, loaded.pure.as_ref(), &loaded.state, &g, grid).at(&loc)?]
        }
        None => {
            let spec = sweep_spec(config, origin)?;
            sweep::instance_keys(&spec)
                .into_par_iter()
                .map(|(n, k)| {
                    let inst = sweep::generate(&spec, n, k)?;
                    sweep::verify_instance(k, inst.pure.as_ref(), &inst.state, &inst.gram, grid)
                })
                .collect::<triality_core::Result<_>>()
                .at(&loc)?
        }
    };
    let mut csv = String::from(
        "n,index,oracle_entanglement_residual,oracle_helstrom_residual,oracle_concurrence_residual,variance_residual\n",
    );
    for r in &rows {
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.n,
            r.index,
            cell(r.oracle_entanglement_residual),
            csv_float(r.oracle_helstrom_residual),
            cell(r.oracle_concurrence_residual),
            cell(r.variance_residual)
        ));
    }
    let summary = json!({
        "entanglement": stat(rows.iter().map(|r| r.oracle_entanglement_residual)),
        "helstrom": stat(rows.iter().map(|r| Some(r.oracle_helstrom_residual))),
        "concurrence": stat(rows.iter().map(|r| r.oracle_concurrence_residual)),
        "variance": stat(rows.iter().map(|r| r.variance_residual)),
    });
    let result = json!({ "instances": rows, "summary": summary });
    Ok(RunOutput {
        report: report(config, result),
        csv: Some(csv),
    })
}

fn run_random_sweep(config: &ScenarioConfig, origin: &str) -> Result<RunOutput, CliError> {
    let spec = sweep_spec(config, origin)?;
    let rows = sweep::random_sweep(&spec).at(format!("{origin}: random-sweep"))?;
    let summary = sweep::summarize(&rows);
    Ok(RunOutput {
        report: report(config, json!({ "summary": summary })),
        csv: Some(sweep::sweep_csv(&rows)),
    })
}
