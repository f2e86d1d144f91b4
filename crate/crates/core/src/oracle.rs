//! Brute-force confrontation of the analytic predicates with sampled quantum
//! models.
//!
//! States are drawn from the unitarily invariant measure (normalized complex
//! Gaussians) and measurement bases from the Haar measure (QR of a complex
//! Ginibre matrix with the phases of `R`'s diagonal folded back into `Q`).
//!
//! Campaigns are split into fixed-size chunks, each with its own ChaCha stream
//! derived from the seed, so reports do not depend on the thread count.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::feasibility::{check_projective_raw_with_tolerance, Constraint};
use crate::linalg::{self, c, CMatrix, CVector};
use crate::stats::{evaluate_witness, AmplitudeVector, ProjectiveWitness, Witness};

/// Samples with a success probability at or below this are discarded.
pub const DISCARD_SUCCESS: f64 = 1e-9;
/// Boundary tolerance for checking sampled scenarios.
pub const FUZZ_TOLERANCE: f64 = 1e-9;
/// Cells per unit length of the coverage grids.
pub const COVERAGE_RESOLUTION: u32 = 100;
/// Transition probabilities below this count as orthogonal postselection for
/// the ternary coverage.
pub const ORTHOGONAL_SLICE: f64 = 1e-6;

const CHUNK: u64 = 4096;

/// The RNG used for every campaign and search.
pub fn seeded_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    c(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

fn gaussian_vector<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CVector {
    CVector::from_fn(d, |_, _| gaussian(rng))
}

/// Uniformly distributed unit vector in `C^d`.
pub fn sample_state<R: Rng + ?Sized>(d: usize, rng: &mut R) -> AmplitudeVector {
    assert!(d >= 1, "dimension must be positive");
    loop {
        if let Ok(v) = AmplitudeVector::normalized(gaussian_vector(d, rng)) {
            return v;
        }
    }
}

/// Haar-random unitary; its columns form a uniformly random orthonormal basis.
pub fn sample_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    let g = DMatrix::from_fn(d, d, |_, _| gaussian(rng));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..d {
        let diag = r[(j, j)];
        let phase = if diag.norm() > 0.0 {
            diag / diag.norm()
        } else {
            linalg::ONE
        };
        for x in q.column_mut(j).iter_mut() {
            *x *= phase;
        }
    }
    q
}

/// Uniformly random composition of `d` into `n` positive parts.
pub fn sample_ranks<R: Rng + ?Sized>(d: usize, n: usize, rng: &mut R) -> Vec<usize> {
    assert!(1 <= n && n <= d, "need 1 <= n <= d, got n = {n}, d = {d}");
    let mut cuts: Vec<usize> = index::sample(rng, d - 1, n - 1)
        .into_iter()
        .map(|i| i + 1)
        .collect();
    cuts.sort_unstable();
    cuts.push(d);
    let mut prev = 0;
    cuts.into_iter()
        .map(|cut| {
            let rank = cut - prev;
            prev = cut;
            rank
        })
        .collect()
}

/// Projectors onto consecutive groups of columns of `basis`.
pub fn group_projectors(basis: &CMatrix, ranks: &[usize]) -> Vec<CMatrix> {
    let d = basis.nrows();
    let mut start = 0;
    ranks
        .iter()
        .map(|&rank| {
            let mut p = CMatrix::zeros(d, d);
            for j in start..start + rank {
                let col = basis.column(j).into_owned();
                p += linalg::outer(&col, &col);
            }
            start += rank;
            p
        })
        .collect()
}

/// Random complete set of `n` orthogonal projectors on `C^d`.
pub fn sample_projective<R: Rng + ?Sized>(d: usize, n: usize, rng: &mut R) -> Vec<CMatrix> {
    let ranks = sample_ranks(d, n, rng);
    let basis = sample_unitary(d, rng);
    group_projectors(&basis, &ranks)
}

/// Component of a fresh random state orthogonal to `psi`.
pub fn sample_orthogonal_state<R: Rng + ?Sized>(psi: &AmplitudeVector, rng: &mut R) -> AmplitudeVector {
    assert!(psi.dim() >= 2, "no orthogonal state in dimension 1");
    loop {
        let v = gaussian_vector(psi.dim(), rng);
        let p = psi.as_vector();
        let r = &v - p * linalg::inner(p, &v);
        if r.norm() > 1e-6 {
            if let Ok(s) = AmplitudeVector::normalized(r) {
                return s;
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FuzzConfig {
    pub dim: usize,
    pub outcomes: usize,
    pub samples: u64,
    pub seed: u64,
    /// Draw `phi` exactly orthogonal to `psi` (the `T = 0` slice).
    pub orthogonal: bool,
}

impl FuzzConfig {
    pub fn new(dim: usize, outcomes: usize, samples: u64, seed: u64) -> Self {
        Self {
            dim,
            outcomes,
            samples,
            seed,
            orthogonal: false,
        }
    }

    pub fn orthogonal(mut self, yes: bool) -> Self {
        self.orthogonal = yes;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.dim == 0 || self.outcomes == 0 {
            return Err(Error::InvalidParameter("dimension and outcomes must be positive".into()));
        }
        if self.outcomes > self.dim {
            return Err(Error::InvalidParameter(format!(
                "{} outcomes need dimension at least {}, got {}",
                self.outcomes, self.outcomes, self.dim
            )));
        }
        if self.samples == 0 {
            return Err(Error::InvalidParameter("need at least one sample".into()));
        }
        if self.orthogonal && self.dim < 2 {
            return Err(Error::InvalidParameter("orthogonal postselection needs dimension >= 2".into()));
        }
        Ok(())
    }
}

/// A sampled model whose statistics fail the analytic check.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub witness_digest: String,
    pub t: f64,
    pub s: f64,
    pub probs: Vec<f64>,
    pub violated: Vec<Constraint>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FuzzReport {
    /// Samples drawn, including discarded ones.
    pub samples: u64,
    /// Samples with an (almost) empty postselected ensemble.
    pub discarded: u64,
    pub violations: Vec<Violation>,
    /// Hits per `(T, S)` cell, `COVERAGE_RESOLUTION` cells per unit.
    pub coverage_grid: BTreeMap<(u32, u32), u64>,
    /// Hits per `(P(1), P(2))` cell for three outcomes and `T ~ 0`.
    pub ternary_coverage: BTreeMap<(u32, u32), u64>,
    /// Largest `|P(1) - 1/2|` seen for two outcomes and `T ~ 0`.
    pub max_fairness_deviation: Option<f64>,
}

fn quantize(x: f64) -> u32 {
    ((x * COVERAGE_RESOLUTION as f64).floor().max(0.0) as u32).min(COVERAGE_RESOLUTION - 1)
}

impl FuzzReport {
    pub fn evaluated(&self) -> u64 {
        self.samples - self.discarded
    }

    /// Associative combination of two reports.
    pub fn merge(mut self, other: FuzzReport) -> FuzzReport {
        self.samples += other.samples;
        self.discarded += other.discarded;
        self.violations.extend(other.violations);
        for (k, v) in other.coverage_grid {
            *self.coverage_grid.entry(k).or_default() += v;
        }
        for (k, v) in other.ternary_coverage {
            *self.ternary_coverage.entry(k).or_default() += v;
        }
        self.max_fairness_deviation = match (self.max_fairness_deviation, other.max_fairness_deviation) {
            (Some(a), Some(b)) => Some(a.max(b)),
            (a, b) => a.or(b),
        };
        self
    }

    /// SHA-256 over a canonical rendering of the whole report.
    pub fn digest(&self) -> String {
        let mut text = String::new();
        let _ = write!(text, "samples={};discarded={};", self.samples, self.discarded);
        for v in &self.violations {
            let _ = write!(
                text,
                "v={},{:e},{:e},{:?},{:?};",
                v.witness_digest, v.t, v.s, v.probs, v.violated
            );
        }
        for ((i, j), n) in &self.coverage_grid {
            let _ = write!(text, "c{i},{j}={n};");
        }
        for ((i, j), n) in &self.ternary_coverage {
            let _ = write!(text, "t{i},{j}={n};");
        }
        let _ = write!(text, "f={:?}", self.max_fairness_deviation.map(f64::to_bits));
        hex::encode(Sha256::digest(text.as_bytes()))
    }
}

/// Short digest of a witness' numerical content.
pub fn witness_digest<W: Witness + ?Sized>(w: &W) -> String {
    let mut hasher = Sha256::new();
    let vectors = [w.psi().as_vector(), w.phi().as_vector()];
    for z in vectors.into_iter().flat_map(|v| v.iter()).chain(w.operators().iter().flat_map(|m| m.iter())) {
        hasher.update(z.re.to_le_bytes());
        hasher.update(z.im.to_le_bytes());
    }
    hex::encode(&hasher.finalize()[..8])
}

fn fuzz_chunk(config: &FuzzConfig, chunk: u64, count: u64) -> Result<FuzzReport> {
    let mut rng = seeded_rng(config.seed, chunk);
    let mut report = FuzzReport::default();
    for _ in 0..count {
        report.samples += 1;
        let psi = sample_state(config.dim, &mut rng);
        let phi = if config.orthogonal {
            sample_orthogonal_state(&psi, &mut rng)
        } else {
            sample_state(config.dim, &mut rng)
        };
        let projectors = sample_projective(config.dim, config.outcomes, &mut rng);
        let witness = ProjectiveWitness::new(psi, phi, projectors)?;
        let success: f64 = witness.amplitudes().iter().map(|a| a.norm_sqr()).sum();
        if success <= DISCARD_SUCCESS {
            report.discarded += 1;
            continue;
        }
        let sc = evaluate_witness(&witness)?;
        let verdict = check_projective_raw_with_tolerance(&sc, FUZZ_TOLERANCE);
        if !verdict.is_feasible() {
            report.violations.push(Violation {
                witness_digest: witness_digest(&witness),
                t: sc.t(),
                s: sc.s(),
                probs: sc.dist().probs().to_vec(),
                violated: verdict.violated().to_vec(),
            });
        }
        *report
            .coverage_grid
            .entry((quantize(sc.t()), quantize(sc.s())))
            .or_default() += 1;
        if sc.t() <= ORTHOGONAL_SLICE {
            let p = sc.dist().probs();
            match p.len() {
                2 => {
                    let dev = (p[0] - 0.5).abs();
                    report.max_fairness_deviation =
                        Some(report.max_fairness_deviation.map_or(dev, |m: f64| m.max(dev)));
                }
                3 => {
                    *report
                        .ternary_coverage
                        .entry((quantize(p[0]), quantize(p[1])))
                        .or_default() += 1;
                }
                _ => {}
            }
        }
    }
    Ok(report)
}

/// Samples random projective models and checks every resulting scenario
/// against the projective inequalities. Violations are recorded, not raised.
pub fn fuzz_projective(config: &FuzzConfig) -> Result<FuzzReport> {
    config.validate()?;
    let chunks = config.samples.div_ceil(CHUNK);
    let reports: Vec<FuzzReport> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let count = CHUNK.min(config.samples - chunk * CHUNK);
            fuzz_chunk(config, chunk, count)
        })
        .collect::<Result<_>>()?;
    Ok(reports.into_iter().fold(FuzzReport::default(), FuzzReport::merge))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    MaximizeSuccess,
    MinimizeSuccess,
}

/// Hill climbing over `(psi, chi)` with `phi = sqrt(t) psi + sqrt(1-t) chi`,
/// `chi` orthogonal to `psi`, for a fixed `n`-outcome measurement in the
/// computational basis of `C^d`. Returns the best success probability found
/// among samples with `|T - t| <= 1e-3`.
///
/// The basis is held fixed because the states range over all of `C^d`.
pub fn oracle_extreme_s<R: Rng + ?Sized>(
    t: f64,
    n: usize,
    d: usize,
    trials: usize,
    objective: Objective,
    rng: &mut R,
) -> Result<f64> {
    if !(0.0..=1.0).contains(&t) || n == 0 || n > d {
        return Err(Error::InvalidParameter(format!(
            "need t in [0, 1] and 1 <= n <= d, got t = {t}, n = {n}, d = {d}"
        )));
    }
    let ranks: Vec<usize> = (0..n).map(|k| d / n + usize::from(k < d % n)).collect();
    let mut offsets = Vec::with_capacity(n + 1);
    offsets.push(0);
    for r in &ranks {
        offsets.push(offsets.last().unwrap() + r);
    }

    let evaluate = |psi_raw: &CVector, chi_raw: &CVector| -> Option<f64> {
        let psi = psi_raw / c(psi_raw.norm(), 0.0);
        let chi = chi_raw - &psi * linalg::inner(&psi, chi_raw);
        let chi_norm = chi.norm();
        if !(chi_norm > 1e-9 && psi.iter().all(|z| z.is_finite())) {
            return None;
        }
        let phi = &psi * c(t.sqrt(), 0.0) + chi * c((1.0 - t).sqrt() / chi_norm, 0.0);
        let transition = linalg::inner(&phi, &psi).norm_sqr();
        if (transition - t).abs() > 1e-3 {
            return None;
        }
        let success = offsets
            .windows(2)
            .map(|w| {
                (w[0]..w[1])
                    .map(|j| phi[j].conj() * psi[j])
                    .sum::<Complex64>()
                    .norm_sqr()
            })
            .sum::<f64>();
        Some(success)
    };
    let better = |a: f64, b: f64| match objective {
        Objective::MaximizeSuccess => a > b,
        Objective::MinimizeSuccess => a < b,
    };

    const RESTARTS: usize = 8;
    let mut best: Option<f64> = None;
    let mut used = 0;
    for restart in 0..RESTARTS {
        let budget = (trials - used) / (RESTARTS - restart);
        if budget == 0 {
            continue;
        }
        used += budget;
        let mut psi = gaussian_vector(d, rng);
        let mut chi = gaussian_vector(d, rng);
        let mut current = evaluate(&psi, &chi);
        let mut step = 0.5;
        for _ in 1..budget {
            let cand_psi = &psi + gaussian_vector(d, rng) * c(step * psi.norm(), 0.0);
            let cand_chi = &chi + gaussian_vector(d, rng) * c(step * chi.norm(), 0.0);
            match (evaluate(&cand_psi, &cand_chi), current) {
                (Some(v), Some(cur)) if !better(v, cur) => step = (step * 0.95).max(1e-4),
                (Some(v), _) => {
                    psi = cand_psi;
                    chi = cand_chi;
                    current = Some(v);
                    step = (step * 1.5).min(1.0);
                }
                (None, _) => step = (step * 0.95).max(1e-4),
            }
        }
        if let Some(v) = current {
            best = Some(best.map_or(v, |b| if better(v, b) { v } else { b }));
        }
    }
    best.ok_or(Error::SearchBudgetExhausted)
}

/// Largest success probability found by local search at transition probability `t`.
pub fn oracle_max_s<R: Rng + ?Sized>(t: f64, n: usize, d: usize, trials: usize, rng: &mut R) -> Result<f64> {
    oracle_extreme_s(t, n, d, trials, Objective::MaximizeSuccess, rng)
}

/// Smallest success probability found by local search at transition probability `t`.
pub fn oracle_min_s<R: Rng + ?Sized>(t: f64, n: usize, d: usize, trials: usize, rng: &mut R) -> Result<f64> {
    oracle_extreme_s(t, n, d, trials, Objective::MinimizeSuccess, rng)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimensional_state_is_a_phase() {
        let mut rng = seeded_rng(1, 0);
        let s = sample_state(1, &mut rng);
        assert!((s.as_vector()[0].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn states_are_normalized_and_unbiased() {
        let mut rng = seeded_rng(2, 0);
        for _ in 0..1000 {
            assert!((sample_state(4, &mut rng).as_vector().norm() - 1.0).abs() < 1e-12);
        }
        let n = 100_000;
        let mean = (0..n)
            .map(|_| sample_state(2, &mut rng).as_vector()[0].norm_sqr())
            .sum::<f64>()
            / n as f64;
        assert!((mean - 0.5).abs() < 0.01, "mean {mean}");
    }

    #[test]
    fn projector_sets_are_complete() {
        let mut rng = seeded_rng(3, 0);
        let id3 = CMatrix::identity(3, 3);
        let mut seen = std::collections::BTreeSet::new();
        for _ in 0..200 {
            let ps = sample_projective(3, 2, &mut rng);
            let ranks: Vec<usize> = ps
                .iter()
                .map(|p| p.trace().re.round() as usize)
                .collect();
            assert!(ranks == [1, 2] || ranks == [2, 1]);
            seen.insert(ranks);
            let sum = ps.iter().fold(CMatrix::zeros(3, 3), |a, p| a + p);
            assert!(linalg::max_abs_diff(&sum, &id3) < 1e-10);
        }
        assert_eq!(seen.len(), 2);
        let ps = sample_projective(4, 4, &mut rng);
        assert!(ps.iter().all(|p| (p.trace().re - 1.0).abs() < 1e-12));
        let ps = sample_projective(3, 1, &mut rng);
        assert!(linalg::max_abs_diff(&ps[0], &id3) < 1e-12);
    }

    #[test]
    fn unitary_is_unitary() {
        let mut rng = seeded_rng(4, 0);
        let u = sample_unitary(4, &mut rng);
        let id = CMatrix::identity(4, 4);
        assert!(linalg::max_abs_diff(&(u.adjoint() * &u), &id) < 1e-12);
    }

    #[test]
    fn small_campaign_is_clean_and_deterministic() {
        let cfg = FuzzConfig::new(3, 2, 5000, 11);
        let a = fuzz_projective(&cfg).unwrap();
        let b = fuzz_projective(&cfg).unwrap();
        assert!(a.violations.is_empty());
        assert_eq!(a.samples, 5000);
        assert_eq!(a.digest(), b.digest());
        let c = fuzz_projective(&FuzzConfig::new(3, 2, 5000, 12)).unwrap();
        assert_ne!(a.digest(), c.digest());
    }

    #[test]
    fn merge_is_associative() {
        let r = |seed| fuzz_projective(&FuzzConfig::new(2, 2, 300, seed)).unwrap();
        let (a, b, c) = (r(1), r(2), r(3));
        let left = a.clone().merge(b.clone()).merge(c.clone());
        let right = a.merge(b.merge(c));
        assert_eq!(left.digest(), right.digest());
    }

    #[test]
    fn invalid_campaigns_rejected() {
        assert!(fuzz_projective(&FuzzConfig::new(2, 3, 10, 0)).is_err());
        assert!(fuzz_projective(&FuzzConfig::new(2, 2, 0, 0)).is_err());
        assert!(fuzz_projective(&FuzzConfig::new(1, 1, 10, 0).orthogonal(true)).is_err());
    }

    #[test]
    fn orthogonal_dichotomic_is_fair() {
        let cfg = FuzzConfig::new(2, 2, 2000, 5).orthogonal(true);
        let report = fuzz_projective(&cfg).unwrap();
        assert!(report.max_fairness_deviation.unwrap() <= 1e-9);
    }

    #[test]
    fn search_examples() {
        let mut rng = seeded_rng(9, 0);
        let s0 = oracle_max_s(0.0, 2, 2, 10_000, &mut rng).unwrap();
        assert!((0.49..=0.5 + 1e-9).contains(&s0), "{s0}");
        let s1 = oracle_max_s(1.0, 2, 2, 2_000, &mut rng).unwrap();
        assert!((s1 - 1.0).abs() < 0.01, "{s1}");
        let s_half = oracle_max_s(0.5, 2, 2, 10_000, &mut rng).unwrap();
        assert!((s_half - 0.75).abs() < 0.01 && s_half <= 0.75 + 1e-9, "{s_half}");
        assert_eq!(
            oracle_max_s(0.5, 2, 2, 0, &mut rng),
            Err(Error::SearchBudgetExhausted)
        );
    }
}
