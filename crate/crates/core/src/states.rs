//! Quanton states, which-way detector configurations and path phases.
//!
//! The detector is carried only through its Gram matrix `g[i][j] = ⟨d_i|d_j⟩`;
//! explicit detector vectors are realized on demand by
//! [`detector_vectors_from_gram`] for the oracle path.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::qmath::{
    cholesky_psd, eigenvalues_hermitian, inner, norm, partial_trace_second, ComplexMatrix, HERMITIAN_TOL, PSD_TOL,
};

/// Tolerance on `Tr ρ = 1`.
pub const TRACE_TOL: f64 = 1e-9;
/// Tolerance on amplitude and ensemble-weight normalization.
pub const NORM_TOL: f64 = 1e-12;
/// Tolerance on the unit diagonal and unit-bounded moduli of a Gram matrix.
pub const GRAM_TOL: f64 = 1e-12;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn require_paths(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::BadDimension(format!("path count must be at least 2, got {n}")));
    }
    Ok(())
}

/// Density matrix of a quanton spread over `n ≥ 2` paths.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuantonState {
    rho: ComplexMatrix,
}

impl QuantonState {
    /// Validates `rho` as a density matrix: Hermitian, unit trace, PSD, real diagonal in `[0, 1]`.
    ///
    /// Inputs within tolerance are symmetrized and have their diagonal made exactly real.
    pub fn new(rho: ComplexMatrix) -> Result<Self> {
        if !rho.is_square() {
            return Err(Error::NotSquare {
                rows: rho.rows(),
                cols: rho.cols(),
            });
        }
        let n = rho.rows();
        require_paths(n)?;
        for (idx, z) in rho.as_slice().iter().enumerate() {
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::invalid("density matrix", "entry is not finite", idx));
            }
        }
        let (defect, row, col) = rho.hermiticity_defect();
        if defect > HERMITIAN_TOL {
            return Err(Error::invalid(
                "density matrix",
                format!("not Hermitian: |rho[{row}][{col}] - conj(rho[{col}][{row}])| = {defect:e}"),
                row * n + col,
            ));
        }
        let mut rho = rho.symmetrized();
        let trace = rho.trace().re;
        if (trace - 1.0).abs() > TRACE_TOL {
            return Err(Error::invalid("density matrix", format!("trace {trace} differs from 1"), 0));
        }
        for i in 0..n {
            let d = rho[(i, i)].re;
            if !(-PSD_TOL..=1.0 + PSD_TOL).contains(&d) {
                return Err(Error::invalid("density matrix", format!("diagonal entry {d} outside [0, 1]"), i));
            }
            rho[(i, i)] = c(d.clamp(0.0, 1.0), 0.0);
        }
        let eig = eigenvalues_hermitian(&rho)?;
        if eig[0] < -PSD_TOL {
            return Err(Error::invalid(
                "density matrix",
                format!("negative eigenvalue {:e}", eig[0]),
                0,
            ));
        }
        Ok(Self { rho })
    }

    /// Diagonal (incoherent) state with the given populations.
    pub fn diagonal(populations: &[f64]) -> Result<Self> {
        Self::new(ComplexMatrix::from_diagonal(populations))
    }

    /// Equal-weight coherent superposition over `n` paths, all entries `1/n`.
    pub fn maximally_coherent(n: usize) -> Result<Self> {
        require_paths(n)?;
        let amp = c((1.0 / n as f64).sqrt(), 0.0);
        density_from_pure(&PureQuanton::new(vec![amp; n])?)
    }

    pub fn n(&self) -> usize {
        self.rho.rows()
    }

    pub fn rho(&self) -> &ComplexMatrix {
        &self.rho
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.rho[(i, j)]
    }

    /// Path populations `ρ_ii`.
    pub fn populations(&self) -> Vec<f64> {
        self.rho.diagonal_real()
    }

    /// `Tr ρ²`.
    pub fn purity(&self) -> f64 {
        self.rho.hs_norm_sqr()
    }
}

/// Pure quanton `Σ c_i |ψ_i⟩` with normalized amplitudes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PureQuanton {
    amplitudes: Vec<Complex64>,
}

impl PureQuanton {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        require_paths(amplitudes.len())?;
        let norm2: f64 = amplitudes.iter().map(Complex64::norm_sqr).sum();
        if !((norm2 - 1.0).abs() <= NORM_TOL) {
            return Err(Error::invalid(
                "pure state",
                format!("squared norm {norm2} differs from 1"),
                0,
            ));
        }
        Ok(Self { amplitudes })
    }

    /// Normalizes any nonzero amplitude vector.
    pub fn normalized(amplitudes: Vec<Complex64>) -> Result<Self> {
        let nrm = norm(&amplitudes);
        if !(nrm > 0.0 && nrm.is_finite()) {
            return Err(Error::invalid("pure state", "amplitudes have zero or non-finite norm", 0));
        }
        Self::new(amplitudes.into_iter().map(|a| a / nrm).collect())
    }

    /// Real amplitudes `√p_i` for the given path probabilities.
    pub fn from_probabilities(probabilities: &[f64]) -> Result<Self> {
        Self::normalized(probabilities.iter().map(|p| c(p.max(0.0).sqrt(), 0.0)).collect())
    }

    pub fn n(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }
}

/// Weighted mixture of pure quanton states.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Ensemble {
    members: Vec<(f64, PureQuanton)>,
}

impl Ensemble {
    pub fn new(members: Vec<(f64, PureQuanton)>) -> Result<Self> {
        let Some((_, first)) = members.first() else {
            return Err(Error::invalid("ensemble", "no members", 0));
        };
        let n = first.n();
        let mut total = 0.0;
        for (idx, (w, psi)) in members.iter().enumerate() {
            if !(*w > 0.0 && w.is_finite()) {
                return Err(Error::invalid("ensemble", format!("weight {w} is not positive"), idx));
            }
            if psi.n() != n {
                return Err(Error::DimensionMismatch {
                    context: "ensemble member",
                    expected: n,
                    found: psi.n(),
                });
            }
            total += w;
        }
        if (total - 1.0).abs() > NORM_TOL {
            return Err(Error::invalid("ensemble", format!("weights sum to {total}, not 1"), 0));
        }
        Ok(Self { members })
    }

    pub fn n(&self) -> usize {
        self.members[0].1.n()
    }

    pub fn members(&self) -> &[(f64, PureQuanton)] {
        &self.members
    }
}

/// Gram matrix `g[i][j] = ⟨d_i|d_j⟩` of the which-way detector states.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetectorGram {
    g: ComplexMatrix,
}

impl DetectorGram {
    /// Validates a Gram matrix: Hermitian, unit diagonal, PSD, entries bounded by one in modulus.
    pub fn new(g: ComplexMatrix) -> Result<Self> {
        if !g.is_square() {
            return Err(Error::NotSquare {
                rows: g.rows(),
                cols: g.cols(),
            });
        }
        let n = g.rows();
        require_paths(n)?;
        let (defect, row, col) = g.hermiticity_defect();
        if !(defect <= HERMITIAN_TOL) {
            return Err(Error::invalid(
                "detector gram",
                format!("not Hermitian: defect {defect:e} at ({row}, {col})"),
                row * n + col,
            ));
        }
        let mut g = g.symmetrized();
        for i in 0..n {
            let d = g[(i, i)].re;
            if (d - 1.0).abs() > GRAM_TOL {
                return Err(Error::invalid("detector gram", format!("diagonal entry {d} is not 1"), i));
            }
            g[(i, i)] = c(1.0, 0.0);
        }
        for i in 0..n {
            for j in 0..n {
                let m = g[(i, j)].norm();
                if m > 1.0 + GRAM_TOL {
                    return Err(Error::invalid(
                        "detector gram",
                        format!("overlap modulus {m} at ({i}, {j}) exceeds 1"),
                        i * n + j,
                    ));
                }
            }
        }
        let eig = eigenvalues_hermitian(&g)?;
        if eig[0] < -PSD_TOL {
            return Err(Error::invalid(
                "detector gram",
                format!("not positive semidefinite: negative eigenvalue {:e}", eig[0]),
                0,
            ));
        }
        Ok(Self { g })
    }

    /// Gram matrix of explicit detector vectors, each of unit norm.
    pub fn from_vectors(vectors: &[Vec<Complex64>]) -> Result<Self> {
        require_paths(vectors.len())?;
        let dim = vectors[0].len();
        for (idx, v) in vectors.iter().enumerate() {
            if v.len() != dim {
                return Err(Error::DimensionMismatch {
                    context: "detector vector",
                    expected: dim,
                    found: v.len(),
                });
            }
            let nrm = norm(v);
            if (nrm * nrm - 1.0).abs() > GRAM_TOL {
                return Err(Error::invalid("detector vector", format!("squared norm {} is not 1", nrm * nrm), idx));
            }
        }
        Self::new(gram_of(vectors))
    }

    /// All detector states parallel: no which-way information.
    pub fn parallel(n: usize) -> Result<Self> {
        require_paths(n)?;
        Self::new(ComplexMatrix::from_real_rows(&vec![vec![1.0; n]; n])?)
    }

    /// Orthonormal detector states: full which-way information.
    pub fn orthonormal(n: usize) -> Result<Self> {
        require_paths(n)?;
        Self::new(ComplexMatrix::identity(n))
    }

    pub fn n(&self) -> usize {
        self.g.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.g
    }

    /// `⟨d_i|d_j⟩`.
    pub fn overlap(&self, i: usize, j: usize) -> Complex64 {
        self.g[(i, j)]
    }
}

fn gram_of(vectors: &[Vec<Complex64>]) -> ComplexMatrix {
    let n = vectors.len();
    let mut g = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            g[(i, j)] = inner(&vectors[i], &vectors[j]);
        }
        g[(i, i)] = c(1.0, 0.0);
    }
    g
}

/// Per-path phase shifts `θ_i`, stored reduced to `[0, 2π)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseVector {
    theta: Vec<f64>,
}

impl PhaseVector {
    pub fn new(theta: Vec<f64>) -> Result<Self> {
        let theta = theta
            .into_iter()
            .enumerate()
            .map(|(idx, t)| {
                if !t.is_finite() {
                    return Err(Error::invalid("phase vector", "phase is not finite", idx));
                }
                let r = t.rem_euclid(TAU);
                Ok(if r >= TAU { 0.0 } else { r })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { theta })
    }

    pub fn zeros(n: usize) -> Self {
        Self { theta: vec![0.0; n] }
    }

    pub fn n(&self) -> usize {
        self.theta.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.theta
    }
}

/// Set of open paths, at least two, sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PathMask {
    open: Vec<usize>,
}

impl PathMask {
    pub fn new(mut open: Vec<usize>, n: usize) -> Result<Self> {
        open.sort_unstable();
        if open.len() < 2 {
            return Err(Error::BadDimension(format!(
                "path mask needs at least two open paths, got {}",
                open.len()
            )));
        }
        for (idx, w) in open.windows(2).enumerate() {
            if w[0] == w[1] {
                return Err(Error::invalid("path mask", format!("path {} listed twice", w[0]), idx));
            }
        }
        if let Some(&bad) = open.iter().find(|&&p| p >= n) {
            return Err(Error::invalid("path mask", format!("path {bad} outside [0, {n})"), bad));
        }
        Ok(Self { open })
    }

    pub fn pair(i: usize, j: usize, n: usize) -> Result<Self> {
        Self::new(vec![i, j], n)
    }

    pub fn open(&self) -> &[usize] {
        &self.open
    }
}

/// `ρ = |ψ⟩⟨ψ|`.
pub fn density_from_pure(psi: &PureQuanton) -> Result<QuantonState> {
    QuantonState::new(ComplexMatrix::outer(psi.amplitudes(), psi.amplitudes()))
}

/// `ρ = Σ_α p^α |ψ^α⟩⟨ψ^α|`.
pub fn density_from_ensemble(e: &Ensemble) -> Result<QuantonState> {
    let n = e.n();
    let mut rho = ComplexMatrix::zeros(n, n);
    for (w, psi) in e.members() {
        let a = psi.amplitudes();
        for i in 0..n {
            for j in 0..n {
                rho[(i, j)] += a[i] * a[j].conj() * *w;
            }
        }
    }
    QuantonState::new(rho)
}

/// Multiplies `ρ_jk` by `exp(i(θ_j − θ_k))`.
pub fn apply_phases(s: &QuantonState, ph: &PhaseVector) -> Result<QuantonState> {
    let n = s.n();
    if ph.n() != n {
        return Err(Error::DimensionMismatch {
            context: "phase vector",
            expected: n,
            found: ph.n(),
        });
    }
    let t = ph.as_slice();
    let mut rho = s.rho().clone();
    for j in 0..n {
        for k in 0..n {
            if j != k {
                rho[(j, k)] *= Complex64::from_polar(1.0, t[j] - t[k]);
            }
        }
    }
    QuantonState::new(rho)
}

/// Reduced quanton state after entangling with the detector: `ρ_r[j][k] = ρ[j][k]·⟨d_k|d_j⟩`.
pub fn couple_detector(s: &QuantonState, g: &DetectorGram) -> Result<QuantonState> {
    let n = s.n();
    if g.n() != n {
        return Err(Error::DimensionMismatch {
            context: "detector gram",
            expected: n,
            found: g.n(),
        });
    }
    let mut rho = s.rho().clone();
    for j in 0..n {
        for k in 0..n {
            if j != k {
                rho[(j, k)] *= g.overlap(k, j);
            }
        }
    }
    // Schur product of two PSD matrices; validation re-checks it.
    QuantonState::new(rho)
}

/// Blocks every path outside `mask` and renormalizes over the open ones.
pub fn block_paths(s: &QuantonState, mask: &PathMask) -> Result<QuantonState> {
    if let Some(&bad) = mask.open().iter().find(|&&p| p >= s.n()) {
        return Err(Error::invalid("path mask", format!("path {bad} outside [0, {})", s.n()), bad));
    }
    let sub = s.rho().principal_submatrix(mask.open());
    let weight = sub.trace().re;
    if !(weight > 0.0) {
        return Err(Error::ZeroProbabilityBlock);
    }
    QuantonState::new(sub.scale(c(1.0 / weight, 0.0)))
}

fn gaussian_vector(rng: &mut ChaCha8Rng, len: usize) -> Vec<Complex64> {
    (0..len)
        .map(|_| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            c(re, im)
        })
        .collect()
}

fn haar_vector(rng: &mut ChaCha8Rng, len: usize) -> Vec<Complex64> {
    loop {
        let v = gaussian_vector(rng, len);
        let nrm = norm(&v);
        if nrm > 1e-300 {
            return v.into_iter().map(|z| z / nrm).collect();
        }
    }
}

/// Haar-random pure state on `n` paths, deterministic in `seed`.
pub fn random_pure(n: usize, seed: u64) -> Result<PureQuanton> {
    require_paths(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    PureQuanton::new(haar_vector(&mut rng, n))
}

/// Marginal of a Haar-random pure state on an `n × ancilla_dim` joint space.
pub fn random_mixed(n: usize, ancilla_dim: usize, seed: u64) -> Result<QuantonState> {
    require_paths(n)?;
    if ancilla_dim < 1 {
        return Err(Error::BadDimension("ancilla dimension must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let joint = haar_vector(&mut rng, n * ancilla_dim);
    let proj = ComplexMatrix::outer(&joint, &joint);
    QuantonState::new(partial_trace_second(&proj, n, ancilla_dim)?)
}

/// Gram matrix of `n` Haar-random unit vectors in a `detector_dim`-dimensional space.
pub fn random_gram(n: usize, detector_dim: usize, seed: u64) -> Result<DetectorGram> {
    require_paths(n)?;
    if detector_dim < 1 {
        return Err(Error::BadDimension("detector dimension must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if detector_dim == 1 {
        // A single global phase per vector; the modulus of every overlap is one.
        let phases: Vec<Complex64> = haar_vector(&mut rng, n)
            .into_iter()
            .map(|z| z / z.norm())
            .collect();
        return DetectorGram::new(gram_of(&phases.into_iter().map(|z| vec![z]).collect::<Vec<_>>()));
    }
    let vectors: Vec<Vec<Complex64>> = (0..n).map(|_| haar_vector(&mut rng, detector_dim)).collect();
    DetectorGram::new(gram_of(&vectors))
}

/// Like [`random_gram`], but Gram–Schmidt orthonormalizes the vectors; requires `detector_dim ≥ n`.
pub fn random_gram_orthogonalized(n: usize, detector_dim: usize, seed: u64) -> Result<DetectorGram> {
    require_paths(n)?;
    if detector_dim < n {
        return Err(Error::BadDimension(format!(
            "orthogonalized detector needs dimension ≥ {n}, got {detector_dim}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    while basis.len() < n {
        let mut v = haar_vector(&mut rng, detector_dim);
        for b in &basis {
            let proj = inner(b, &v);
            for (vk, bk) in v.iter_mut().zip(b) {
                *vk -= proj * bk;
            }
        }
        let nrm = norm(&v);
        if nrm > 1e-8 {
            basis.push(v.into_iter().map(|z| z / nrm).collect());
        }
    }
    DetectorGram::new(gram_of(&basis))
}

/// Realizes explicit unit detector vectors whose inner products reproduce `g`.
///
/// The vectors live in a space of dimension `rank(g)`.
pub fn detector_vectors_from_gram(g: &DetectorGram) -> Result<Vec<Vec<Complex64>>> {
    let l = cholesky_psd(g.matrix())?;
    let n = g.n();
    let live: Vec<usize> = (0..n).filter(|&k| l[(k, k)].norm() > 0.0).collect();
    // ⟨d_i|d_j⟩ = Σ_k conj(d_ik) d_jk = Σ_k L_ik conj(L_jk) when d_i = conj(row i of L).
    let vectors = (0..n)
        .map(|i| {
            let v: Vec<Complex64> = live.iter().map(|&k| l[(i, k)].conj()).collect();
            let nrm = norm(&v);
            v.into_iter().map(|z| z / nrm).collect()
        })
        .collect();
    Ok(vectors)
}
