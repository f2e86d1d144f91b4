//! Domain types and forward statistics.
//!
//! Given initial state `psi`, postselection state `phi` and Kraus operators
//! `V_k`, the postselected ensemble has
//!
//! ```text
//! T    = |<phi|psi>|^2
//! S    = sum_j |<phi|V_j|psi>|^2
//! P(k) = |<phi|V_k|psi>|^2 / S
//! ```
//!
//! Operators act to the right: `<phi|V|psi>` means `<phi| (V |psi>)`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector};

/// Tolerance for probability normalization.
pub const EPS_PROB: f64 = 1e-12;
/// Tolerance for matrix identities (unit norm, idempotence, completeness).
pub const EPS_UNIT: f64 = 1e-10;

/// Probability vector on `n >= 1` outcomes.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeDistribution {
    probs: Vec<f64>,
}

impl OutcomeDistribution {
    /// Validates non-negativity and normalization within [`EPS_PROB`].
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        Self::validate_entries(&probs)?;
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > EPS_PROB {
            return Err(Error::InvalidDistribution(format!(
                "entries sum to {sum}, expected 1"
            )));
        }
        Ok(Self { probs })
    }

    /// Accepts entries summing to 1 within `tol` and rescales them to sum to 1.
    pub fn renormalized(probs: Vec<f64>, tol: f64) -> Result<Self> {
        Self::validate_entries(&probs)?;
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > tol {
            return Err(Error::InvalidDistribution(format!(
                "entries sum to {sum}, expected 1 within {tol:e}"
            )));
        }
        Ok(Self {
            probs: probs.into_iter().map(|p| p / sum).collect(),
        })
    }

    /// Normalizes non-negative weights with a positive total.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        Self::validate_entries(weights)?;
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidDistribution("weights sum to zero".into()));
        }
        Ok(Self {
            probs: weights.iter().map(|w| w / total).collect(),
        })
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidDistribution("no outcomes".into()));
        }
        Ok(Self {
            probs: vec![1.0 / n as f64; n],
        })
    }

    fn validate_entries(probs: &[f64]) -> Result<()> {
        if probs.is_empty() {
            return Err(Error::InvalidDistribution("no outcomes".into()));
        }
        if let Some((k, p)) = probs
            .iter()
            .enumerate()
            .find(|(_, p)| !p.is_finite() || **p < 0.0)
        {
            return Err(Error::InvalidDistribution(format!(
                "entry {k} is {p}, expected a non-negative number"
            )));
        }
        Ok(())
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn max(&self) -> f64 {
        self.probs.iter().copied().fold(0.0, f64::max)
    }

    /// `sum_k sqrt(P(k))`, i.e. `sqrt(D_1/2)`.
    pub fn sqrt_sum(&self) -> f64 {
        self.probs.iter().map(|p| p.sqrt()).sum()
    }

    /// Diversity index of order `q`: the exponentiated Renyi entropy.
    ///
    /// `q = 0` counts the support, `q = 1` is the exponentiated Shannon
    /// entropy and `q = f64::INFINITY` gives `1 / max_k P(k)`. Zero entries
    /// are skipped everywhere.
    ///
    /// # Panics
    ///
    /// If `q` is negative or NaN.
    pub fn diversity(&self, q: f64) -> f64 {
        assert!(q >= 0.0, "diversity order must be non-negative, got {q}");
        let support = self.probs.iter().copied().filter(|&p| p > 0.0);
        if q == 0.0 {
            support.count() as f64
        } else if q == 1.0 {
            let entropy: f64 = support.map(|p| -p * p.ln()).sum();
            entropy.exp()
        } else if q.is_infinite() {
            1.0 / self.max()
        } else if q == 0.5 {
            let s = self.sqrt_sum();
            s * s
        } else {
            let moment: f64 = support.map(|p| p.powf(q)).sum();
            (moment.ln() / (1.0 - q)).exp()
        }
    }

    /// `D_1/2`, `D_inf` and their logarithms.
    pub fn profile(&self) -> DiversityProfile {
        let d_half = self.diversity(0.5);
        let d_inf = self.diversity(f64::INFINITY);
        DiversityProfile {
            d_half,
            d_inf,
            h_half: d_half.ln(),
            h_inf: d_inf.ln(),
        }
    }
}

/// Renyi-1/2 and min-entropy diversity of a distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiversityProfile {
    pub d_half: f64,
    pub d_inf: f64,
    pub h_half: f64,
    pub h_inf: f64,
}

/// A candidate `(T, S, P)` triple.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioTriple {
    t: f64,
    s: f64,
    dist: OutcomeDistribution,
}

impl ScenarioTriple {
    /// Requires `0 <= t <= 1` and `0 < s <= 1`.
    pub fn new(t: f64, s: f64, dist: OutcomeDistribution) -> Result<Self> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::InvalidScenario(format!(
                "transition probability {t} is outside [0, 1]"
            )));
        }
        if !(s > 0.0 && s <= 1.0) {
            return Err(Error::InvalidScenario(format!(
                "success probability {s} is outside (0, 1]"
            )));
        }
        Ok(Self { t, s, dist })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn dist(&self) -> &OutcomeDistribution {
        &self.dist
    }

    pub fn n(&self) -> usize {
        self.dist.len()
    }

    /// Largest absolute difference in `T`, `S` or any `P(k)`; infinite when
    /// the outcome counts differ.
    pub fn max_deviation(&self, other: &ScenarioTriple) -> f64 {
        if self.n() != other.n() {
            return f64::INFINITY;
        }
        self.dist
            .probs()
            .iter()
            .zip(other.dist.probs())
            .map(|(a, b)| (a - b).abs())
            .fold((self.t - other.t).abs().max((self.s - other.s).abs()), f64::max)
    }
}

/// A unit vector in `C^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeVector(CVector);

impl AmplitudeVector {
    /// Requires unit Euclidean norm within [`EPS_UNIT`].
    pub fn new(entries: CVector) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidState("empty amplitude vector".into()));
        }
        let norm = entries.norm();
        if (norm - 1.0).abs() > EPS_UNIT {
            return Err(Error::InvalidState(format!("norm is {norm}, expected 1")));
        }
        Ok(Self(entries))
    }

    /// Rescales a non-zero vector to unit norm.
    pub fn normalized(entries: CVector) -> Result<Self> {
        let norm = entries.norm();
        if entries.is_empty() || !norm.is_finite() || norm <= 0.0 {
            return Err(Error::InvalidState("cannot normalize a zero vector".into()));
        }
        Ok(Self(entries / Complex64::new(norm, 0.0)))
    }

    pub fn from_real(entries: &[f64]) -> Result<Self> {
        Self::new(linalg::real_vector(entries))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_vector(&self) -> &CVector {
        &self.0
    }

    pub fn into_vector(self) -> CVector {
        self.0
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &AmplitudeVector) -> Complex64 {
        linalg::inner(&self.0, &other.0)
    }
}

/// States plus a measurement, from which a scenario is computed.
pub trait Witness {
    fn psi(&self) -> &AmplitudeVector;
    fn phi(&self) -> &AmplitudeVector;
    /// Kraus operators, one per outcome.
    fn operators(&self) -> &[CMatrix];

    fn dimension(&self) -> usize {
        self.psi().dim()
    }

    /// `<phi|V_k|psi>` for every outcome.
    fn amplitudes(&self) -> Vec<Complex64> {
        let psi = self.psi().as_vector();
        let phi = self.phi().as_vector();
        self.operators()
            .iter()
            .map(|v| linalg::inner(phi, &(v * psi)))
            .collect()
    }

    /// Statistics with initial and final state exchanged, `<psi|V_k^dagger|phi>`.
    fn reversed_scenario(&self) -> Result<ScenarioTriple> {
        let psi = self.psi().as_vector();
        let phi = self.phi().as_vector();
        let amps: Vec<_> = self
            .operators()
            .iter()
            .map(|v| linalg::inner(psi, &(v.adjoint() * phi)))
            .collect();
        scenario_from_amplitudes(linalg::inner(psi, phi), &amps)
    }
}

/// Computes `(T, S, P)` for any witness.
pub fn evaluate_witness<W: Witness + ?Sized>(w: &W) -> Result<ScenarioTriple> {
    scenario_from_amplitudes(w.phi().inner(w.psi()), &w.amplitudes())
}

/// `(T, S, P)` from the unmeasured overlap `<phi|psi>` and the per-outcome
/// amplitudes `<phi|V_k|psi>`.
pub fn scenario_from_amplitudes(overlap: Complex64, amps: &[Complex64]) -> Result<ScenarioTriple> {
    let weights: Vec<f64> = amps.iter().map(|a| a.norm_sqr()).collect();
    let success: f64 = weights.iter().sum();
    if success.is_nan() || success <= EPS_PROB {
        return Err(Error::DegeneratePostselection { success });
    }
    let dist = OutcomeDistribution::from_weights(&weights)?;
    ScenarioTriple::new(overlap.norm_sqr().min(1.0), success.min(1.0), dist)
}

fn check_dims(psi: &AmplitudeVector, phi: &AmplitudeVector, ops: &[CMatrix]) -> Result<usize> {
    let d = psi.dim();
    if phi.dim() != d {
        return Err(Error::InvalidWitness(format!(
            "psi has dimension {d} but phi has dimension {}",
            phi.dim()
        )));
    }
    if ops.is_empty() {
        return Err(Error::InvalidWitness("no measurement operators".into()));
    }
    if let Some(k) = ops.iter().position(|m| m.nrows() != d || m.ncols() != d) {
        return Err(Error::InvalidWitness(format!(
            "operator {k} is not {d}x{d}"
        )));
    }
    Ok(d)
}

/// States with a complete set of orthogonal projectors.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectiveWitness {
    psi: AmplitudeVector,
    phi: AmplitudeVector,
    projectors: Vec<CMatrix>,
}

impl ProjectiveWitness {
    /// Checks hermiticity, idempotence, pairwise orthogonality and
    /// completeness, each within [`EPS_UNIT`].
    pub fn new(psi: AmplitudeVector, phi: AmplitudeVector, projectors: Vec<CMatrix>) -> Result<Self> {
        let d = check_dims(&psi, &phi, &projectors)?;
        let mut total = CMatrix::zeros(d, d);
        for (k, p) in projectors.iter().enumerate() {
            let herm = linalg::max_abs_diff(p, &p.adjoint());
            if herm > EPS_UNIT {
                return Err(Error::InvalidWitness(format!(
                    "projector {k} is not hermitian (deviation {herm:e})"
                )));
            }
            let idem = linalg::max_abs_diff(&(p * p), p);
            if idem > EPS_UNIT {
                return Err(Error::InvalidWitness(format!(
                    "projector {k} is not idempotent (deviation {idem:e})"
                )));
            }
            for (j, q) in projectors.iter().enumerate().skip(k + 1) {
                let overlap = linalg::max_abs(&(p * q));
                if overlap > EPS_UNIT {
                    return Err(Error::InvalidWitness(format!(
                        "projectors {k} and {j} are not orthogonal (deviation {overlap:e})"
                    )));
                }
            }
            total += p;
        }
        let completeness = linalg::max_abs_diff(&total, &CMatrix::identity(d, d));
        if completeness > EPS_UNIT {
            return Err(Error::InvalidWitness(format!(
                "projectors do not sum to the identity (deviation {completeness:e})"
            )));
        }
        Ok(Self {
            psi,
            phi,
            projectors,
        })
    }

    pub fn projectors(&self) -> &[CMatrix] {
        &self.projectors
    }

    /// The same measurement with initial and final states exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            psi: self.phi.clone(),
            phi: self.psi.clone(),
            projectors: self.projectors.clone(),
        }
    }

    pub fn into_parts(self) -> (AmplitudeVector, AmplitudeVector, Vec<CMatrix>) {
        (self.psi, self.phi, self.projectors)
    }
}

impl Witness for ProjectiveWitness {
    fn psi(&self) -> &AmplitudeVector {
        &self.psi
    }
    fn phi(&self) -> &AmplitudeVector {
        &self.phi
    }
    fn operators(&self) -> &[CMatrix] {
        &self.projectors
    }
}

/// States with a fine-grained generalized measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralizedWitness {
    psi: AmplitudeVector,
    phi: AmplitudeVector,
    kraus: Vec<CMatrix>,
    repaired_outcomes: Vec<usize>,
}

impl GeneralizedWitness {
    /// Checks `sum_k V_k^dagger V_k = 1` within [`EPS_UNIT`].
    pub fn new(psi: AmplitudeVector, phi: AmplitudeVector, kraus: Vec<CMatrix>) -> Result<Self> {
        let d = check_dims(&psi, &phi, &kraus)?;
        let total = kraus
            .iter()
            .fold(CMatrix::zeros(d, d), |acc, v| acc + v.adjoint() * v);
        let completeness = linalg::max_abs_diff(&total, &CMatrix::identity(d, d));
        if completeness > EPS_UNIT {
            return Err(Error::InvalidWitness(format!(
                "Kraus operators are not complete (deviation {completeness:e})"
            )));
        }
        Ok(Self {
            psi,
            phi,
            kraus,
            repaired_outcomes: Vec::new(),
        })
    }

    /// Marks outcomes whose Kraus operator was set to the bare projector
    /// because the outcome has zero probability.
    pub fn with_repaired_outcomes(mut self, outcomes: Vec<usize>) -> Self {
        self.repaired_outcomes = outcomes;
        self
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    pub fn repaired_outcomes(&self) -> &[usize] {
        &self.repaired_outcomes
    }

    /// Normalized `V_k|psi>`, or `None` when outcome `k` cannot occur.
    pub fn post_measurement_state(&self, k: usize) -> Option<AmplitudeVector> {
        let v = &self.kraus[k] * self.psi.as_vector();
        (v.norm() > EPS_UNIT)
            .then(|| AmplitudeVector::normalized(v).ok())
            .flatten()
    }

    pub fn into_parts(self) -> (AmplitudeVector, AmplitudeVector, Vec<CMatrix>) {
        (self.psi, self.phi, self.kraus)
    }
}

impl Witness for GeneralizedWitness {
    fn psi(&self) -> &AmplitudeVector {
        &self.psi
    }
    fn phi(&self) -> &AmplitudeVector {
        &self.phi
    }
    fn operators(&self) -> &[CMatrix] {
        &self.kraus
    }
}
