//! Brute-force ground truth for the closed-form measures.
//!
//! Nothing here calls into [`crate::measures`]: every quantity is rebuilt from
//! explicit vectors and matrices with the [`crate::qmath`] primitives only.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::interferometer::ChannelModel;
use crate::qmath::{self, ComplexMatrix};
use crate::states::{detector_vectors_from_gram, DetectorGram, PureQuanton, QuantonState};

/// Largest path count accepted by [`variance_bruteforce`].
pub const BRUTEFORCE_MAX_N: usize = 6;

/// `Σ_i c_i |i⟩ ⊗ |d_i⟩` expanded in the product basis, index `i·detector_dim + k`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointPureState {
    n: usize,
    detector_dim: usize,
    amplitudes: Vec<Complex64>,
}

impl JointPureState {
    pub fn new(n: usize, detector_dim: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        if n < 1 || detector_dim < 1 {
            return Err(Error::BadDimension(format!(
                "joint state needs positive dimensions, got {n}x{detector_dim}"
            )));
        }
        if amplitudes.len() != n * detector_dim {
            return Err(Error::DimensionMismatch {
                context: "joint state amplitudes",
                expected: n * detector_dim,
                found: amplitudes.len(),
            });
        }
        let norm = qmath::norm(&amplitudes);
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::invalid("joint state", format!("norm {norm} differs from 1"), 0));
        }
        Ok(Self {
            n,
            detector_dim,
            amplitudes,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn detector_dim(&self) -> usize {
        self.detector_dim
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// Quanton marginal `Tr_detector |Ψ⟩⟨Ψ|`.
    pub fn reduced(&self) -> ComplexMatrix {
        let joint = ComplexMatrix::outer(&self.amplitudes, &self.amplitudes);
        qmath::partial_trace_second(&joint, self.n, self.detector_dim).expect("dimensions checked at construction")
    }
}

/// Realizes the detector states from the Gram matrix and forms the joint vector.
pub fn build_joint(psi: &PureQuanton, g: &DetectorGram) -> Result<JointPureState> {
    let n = psi.n();
    if g.n() != n {
        return Err(Error::DimensionMismatch {
            context: "detector gram",
            expected: n,
            found: g.n(),
        });
    }
    let vectors = detector_vectors_from_gram(g)?;
    let dim = vectors.first().map_or(1, Vec::len).max(1);
    let mut amplitudes = vec![Complex64::new(0.0, 0.0); n * dim];
    for (i, (c, d)) in psi.amplitudes().iter().zip(&vectors).enumerate() {
        for (k, dk) in d.iter().enumerate() {
            amplitudes[i * dim + k] = c * dk;
        }
    }
    let norm = qmath::norm(&amplitudes);
    if !(norm > 0.0) {
        return Err(Error::invalid("joint state", "zero vector", 0));
    }
    for a in &mut amplitudes {
        *a /= norm;
    }
    JointPureState::new(n, dim, amplitudes)
}

/// I-concurrence `C_I` of the joint state from its coefficient matrix `M_ik`:
/// `C_I² = 2(1 − Tr ρ²) = 4 Σ_{i<j, k<l} |M_ik M_jl − M_il M_jk|²`.
///
/// The sum of squared 2×2 minors equals the purity form exactly but has no
/// cancellation, so separable states give an exact zero.
pub fn i_concurrence_oracle(j: &JointPureState) -> f64 {
    let (n, d) = (j.n, j.detector_dim);
    let m = |i: usize, k: usize| j.amplitudes[i * d + k];
    let mut acc = 0.0;
    for a in 0..n {
        for b in (a + 1)..n {
            for k in 0..d {
                for l in (k + 1)..d {
                    acc += (m(a, k) * m(b, l) - m(a, l) * m(b, k)).norm_sqr();
                }
            }
        }
    }
    2.0 * acc.sqrt()
}

/// `√(2(1 − Tr ρ²))` of the explicit partial trace; loses about half the
/// digits near separable states.
pub fn i_concurrence_from_marginal(j: &JointPureState) -> f64 {
    let rho = j.reduced();
    let purity = rho.matmul(&rho).expect("square marginal").trace().re;
    (2.0 * (1.0 - purity)).max(0.0).sqrt()
}

/// `Tr|p_i |u⟩⟨u| − p_j |v⟩⟨v||` for two unit vectors with `⟨u|v⟩ = overlap`.
pub fn helstrom_oracle(prior_i: f64, prior_j: f64, overlap: f64) -> Result<f64> {
    if !(prior_i > 0.0 && prior_j > 0.0) || (prior_i + prior_j - 1.0).abs() > 1e-12 {
        return Err(Error::BadPriors { prior_i, prior_j });
    }
    if !(0.0..=1.0).contains(&overlap) {
        return Err(Error::invalid("overlap", format!("{overlap} outside [0, 1]"), 0));
    }
    let u = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
    let v = [
        Complex64::new(overlap, 0.0),
        Complex64::new((1.0 - overlap * overlap).sqrt(), 0.0),
    ];
    let m = ComplexMatrix::outer(&u, &u)
        .scale(Complex64::new(prior_i, 0.0))
        .sub(&ComplexMatrix::outer(&v, &v).scale(Complex64::new(prior_j, 0.0)))?;
    Ok(qmath::eigenvalues_hermitian(&m)?.iter().map(|l| l.abs()).sum())
}

/// Wootters concurrence `|⟨ψ|σ_y⊗σ_y|ψ*⟩|` of a two-path joint state.
///
/// A one-dimensional detector is embedded in two dimensions; larger detector
/// spaces are rejected.
pub fn two_qubit_concurrence_oracle(j: &JointPureState) -> Result<f64> {
    if j.n() != 2 {
        return Err(Error::BadDimension(format!(
            "two-path concurrence needs n = 2, got {}",
            j.n()
        )));
    }
    if j.detector_dim() > 2 {
        return Err(Error::BadDimension(format!(
            "two-path concurrence needs a detector of dimension at most 2, got {}",
            j.detector_dim()
        )));
    }
    let d = j.detector_dim();
    let mut psi = [Complex64::new(0.0, 0.0); 4];
    for i in 0..2 {
        for k in 0..d {
            psi[i * 2 + k] = j.amplitudes()[i * d + k];
        }
    }
    let zero = Complex64::new(0.0, 0.0);
    let i1 = Complex64::new(0.0, 1.0);
    let sigma_y = ComplexMatrix::from_rows(&[vec![zero, -i1], vec![i1, zero]])?;
    let flip = sigma_y.kron(&sigma_y);
    let conj: Vec<Complex64> = psi.iter().map(|z| z.conj()).collect();
    let flipped: Vec<Complex64> = (0..4).map(|r| (0..4).map(|c| flip[(r, c)] * conj[c]).sum()).collect();
    Ok(qmath::inner(&psi, &flipped).norm())
}

/// Tensor-grid average of `(I − ⟨I⟩)²` over `grid_per_phase` points in every phase.
///
/// Each grid point rotates ρ with the diagonal unitary and reads the intensity
/// as `amp2 · Σ_jk ρ'_jk`.
pub fn variance_bruteforce(s: &QuantonState, ch: &ChannelModel, grid_per_phase: usize) -> Result<f64> {
    let n = s.n();
    if n > BRUTEFORCE_MAX_N {
        return Err(Error::DimensionTooLarge {
            n,
            max: BRUTEFORCE_MAX_N,
        });
    }
    if grid_per_phase < 3 {
        return Err(Error::GridTooCoarse { grid: grid_per_phase });
    }
    if ch.n != n {
        return Err(Error::DimensionMismatch {
            context: "channel model",
            expected: n,
            found: ch.n,
        });
    }
    let total = grid_per_phase.pow(n as u32);
    let roots: Vec<Complex64> = (0..grid_per_phase)
        .map(|k| Complex64::from_polar(1.0, std::f64::consts::TAU * k as f64 / grid_per_phase as f64))
        .collect();
    let mut values = Vec::with_capacity(total);
    let mut digits = vec![0usize; n];
    for _ in 0..total {
        let mut data = vec![Complex64::new(0.0, 0.0); n * n];
        for (i, &d) in digits.iter().enumerate() {
            data[i * n + i] = roots[d];
        }
        let u = ComplexMatrix::from_vec(n, n, data)?;
        let rotated = u.matmul(s.rho())?.matmul(&qmath::conjugate_transpose(&u))?;
        let sum: Complex64 = rotated.as_slice().iter().sum();
        values.push(ch.amp2 * sum.re);
        for d in digits.iter_mut() {
            *d += 1;
            if *d < grid_per_phase {
                break;
            }
            *d = 0;
        }
    }
    let mean = values.iter().sum::<f64>() / total as f64;
    Ok(values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / total as f64)
}
