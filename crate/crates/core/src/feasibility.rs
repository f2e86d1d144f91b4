//! Analytic feasibility predicates.
//!
//! A triple `(T, S, P)` is realizable by a projective measurement iff
//!
//! ```text
//! sqrt P(k) <= sqrt(T/S) + sum_{j != k} sqrt P(j)   for all k
//! sqrt(T/S) <= sum_k sqrt P(k) <= 1 / sqrt S
//! ```
//!
//! or equivalently, in terms of the diversity indices `D_inf` and `D_1/2`,
//!
//! ```text
//! 2/sqrt(D_inf) - sqrt(D_1/2) <= sqrt(T/S) <= sqrt(D_1/2) <= 1/sqrt(S).
//! ```
//!
//! Generalized measurements realize every triple with `S > 0`.
//!
//! All inequalities are closed; a constraint counts as violated only when its
//! slack is below `-EPS_FEAS`.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::stats::{OutcomeDistribution, ScenarioTriple};

/// Boundary tolerance for all feasibility inequalities.
pub const EPS_FEAS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Constraint {
    /// `sqrt P(k) <= sqrt(T/S) + sum_{j != k} sqrt P(j)` for the largest `P(k)`.
    MaxOutcomePolygon,
    /// `2/sqrt(D_inf) - sqrt(D_1/2) <= sqrt(T/S)`.
    LowerChain,
    /// `sqrt(T/S) <= sqrt(D_1/2)`.
    UpperChain,
    /// `sqrt(D_1/2) <= 1/sqrt(S)`.
    SBound,
    /// `T/n <= S`.
    TOverN,
    /// `S <= (T+1)/2`.
    SHalfPlusT,
}

impl Constraint {
    pub const ALL: [Constraint; 6] = [
        Constraint::MaxOutcomePolygon,
        Constraint::LowerChain,
        Constraint::UpperChain,
        Constraint::SBound,
        Constraint::TOverN,
        Constraint::SHalfPlusT,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Constraint::MaxOutcomePolygon => "MaxOutcomePolygon",
            Constraint::LowerChain => "LowerChain",
            Constraint::UpperChain => "UpperChain",
            Constraint::SBound => "SBound",
            Constraint::TOverN => "TOverN",
            Constraint::SHalfPlusT => "SHalfPlusT",
        }
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Constraint {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Constraint::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown constraint tag `{s}`")))
    }
}

/// Outcome of a feasibility check: every evaluated constraint with its signed
/// slack, and the subset that is violated.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityVerdict {
    slack: BTreeMap<Constraint, f64>,
    violated: Vec<Constraint>,
}

impl FeasibilityVerdict {
    pub fn from_slacks(slacks: impl IntoIterator<Item = (Constraint, f64)>, tol: f64) -> Self {
        let slack: BTreeMap<_, _> = slacks.into_iter().collect();
        let violated = slack
            .iter()
            .filter(|(_, &v)| v.is_nan() || v < -tol)
            .map(|(&c, _)| c)
            .collect();
        Self { slack, violated }
    }

    /// A verdict with no constraints at all.
    pub fn unconstrained() -> Self {
        Self {
            slack: BTreeMap::new(),
            violated: Vec::new(),
        }
    }

    pub fn is_feasible(&self) -> bool {
        self.violated.is_empty()
    }

    pub fn violated(&self) -> &[Constraint] {
        &self.violated
    }

    pub fn slack(&self, c: Constraint) -> Option<f64> {
        self.slack.get(&c).copied()
    }

    pub fn slacks(&self) -> &BTreeMap<Constraint, f64> {
        &self.slack
    }

    /// Smallest slack over all evaluated constraints.
    pub fn min_slack(&self) -> Option<f64> {
        self.slack.values().copied().reduce(f64::min)
    }
}

/// Projective feasibility from the raw square-root inequalities.
pub fn check_projective_raw(sc: &ScenarioTriple) -> FeasibilityVerdict {
    check_projective_raw_with_tolerance(sc, EPS_FEAS)
}

/// [`check_projective_raw`] with a caller-chosen boundary tolerance.
pub fn check_projective_raw_with_tolerance(sc: &ScenarioTriple, tol: f64) -> FeasibilityVerdict {
    let ratio = (sc.t() / sc.s()).sqrt();
    let roots: Vec<f64> = sc.dist().probs().iter().map(|p| p.sqrt()).collect();
    let total: f64 = roots.iter().sum();
    let polygon = roots
        .iter()
        .map(|&r| ratio + (total - r) - r)
        .fold(f64::INFINITY, f64::min);
    FeasibilityVerdict::from_slacks(
        [
            (Constraint::MaxOutcomePolygon, polygon),
            (Constraint::UpperChain, total - ratio),
            (Constraint::SBound, 1.0 / sc.s().sqrt() - total),
        ],
        tol,
    )
}

/// Projective feasibility from the diversity-index chain.
pub fn check_projective_chain(sc: &ScenarioTriple) -> FeasibilityVerdict {
    let ratio = (sc.t() / sc.s()).sqrt();
    let profile = sc.dist().profile();
    let root_half = profile.d_half.sqrt();
    let lower = 2.0 / profile.d_inf.sqrt() - root_half;
    FeasibilityVerdict::from_slacks(
        [
            (Constraint::LowerChain, ratio - lower),
            (Constraint::UpperChain, root_half - ratio),
            (Constraint::SBound, 1.0 / sc.s().sqrt() - root_half),
        ],
        EPS_FEAS,
    )
}

/// Generalized measurements realize every valid scenario.
pub fn check_generalized(_sc: &ScenarioTriple) -> FeasibilityVerdict {
    FeasibilityVerdict::unconstrained()
}

/// Whether `(T, S)` can occur together for some `n`-outcome projective
/// measurement: `T/n <= S <= (T+1)/2`.
pub fn check_ts_region(t: f64, s: f64, n: usize) -> FeasibilityVerdict {
    FeasibilityVerdict::from_slacks(
        [
            (Constraint::TOverN, s - t / n as f64),
            (Constraint::SHalfPlusT, (t + 1.0) / 2.0 - s),
        ],
        EPS_FEAS,
    )
}

/// Orthogonal postselection (`T = 0`) with three outcomes and free `S`:
/// membership in the disk inscribed in the probability simplex.
///
/// The three square-root triangle inequalities are equivalent to the single
/// quadratic `(P1 - P2 - P3)^2 <= 4 P2 P3`, which is symmetric under
/// permutations (it is sixteen times the squared Heron area).
pub fn check_ternary_disk(p: &OutcomeDistribution) -> Result<bool> {
    let &[a, b, c] = p.probs() else {
        return Err(Error::InvalidDistribution(format!(
            "ternary disk needs 3 outcomes, got {}",
            p.len()
        )));
    };
    let cyclic = [(a, b, c), (b, c, a), (c, a, b)];
    Ok(cyclic
        .iter()
        .all(|&(x, y, z)| (x - y - z).powi(2) <= 4.0 * y * z + EPS_FEAS))
}

/// Two outcomes with `P = (p, 1-p)`:
/// `|sqrt p - sqrt(1-p)| <= sqrt(T/S) <= sqrt p + sqrt(1-p) <= 1/sqrt S`.
pub fn check_dichotomic(p: f64, t: f64, s: f64) -> FeasibilityVerdict {
    let (a, b) = (p.sqrt(), (1.0 - p).sqrt());
    let ratio = (t / s).sqrt();
    FeasibilityVerdict::from_slacks(
        [
            (Constraint::LowerChain, ratio - (a - b).abs()),
            (Constraint::UpperChain, a + b - ratio),
            (Constraint::SBound, 1.0 / s.sqrt() - (a + b)),
        ],
        EPS_FEAS,
    )
}

/// Coefficients of `sqrt P` in the extreme rays `y^m_j = 1 + (2-n) delta_jm`
/// of the cone cut out by the orthogonal-postselection polygon inequalities.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeDecomposition {
    pub lambdas: Vec<f64>,
}

impl ConeDecomposition {
    pub fn ray(n: usize, m: usize) -> Vec<f64> {
        (0..n)
            .map(|j| if j == m { 3.0 - n as f64 } else { 1.0 })
            .collect()
    }

    /// `sum_m lambda_m y^m`.
    pub fn reconstruct(&self) -> Vec<f64> {
        let n = self.lambdas.len();
        let mut out = vec![0.0; n];
        for (m, &l) in self.lambdas.iter().enumerate() {
            for (o, y) in out.iter_mut().zip(Self::ray(n, m)) {
                *o += l * y;
            }
        }
        out
    }
}

/// Polygon-inequality check `x_k <= sum_{j != k} x_j`; on failure reports the
/// index with the largest excess.
pub(crate) fn check_polygon(xs: &[f64], tol: f64) -> Result<()> {
    let total: f64 = xs.iter().sum();
    let worst = xs
        .iter()
        .enumerate()
        .map(|(k, &x)| (k, x - (total - x)))
        .max_by(|a, b| a.1.total_cmp(&b.1));
    match worst {
        Some((index, excess)) if excess > tol => Err(Error::PolygonViolation { index, excess }),
        _ => Ok(()),
    }
}

/// Writes `sqrt P` as a non-negative combination of the extreme rays.
pub fn cone_decompose(p: &OutcomeDistribution) -> Result<ConeDecomposition> {
    let n = p.len();
    let roots: Vec<f64> = p.probs().iter().map(|x| x.sqrt()).collect();
    check_polygon(&roots, EPS_FEAS)?;
    let rays = DMatrix::from_fn(n, n, |j, m| {
        1.0 + if j == m { 2.0 - n as f64 } else { 0.0 }
    });
    // The ray matrix has eigenvalues 2 and 2 - n, so it is singular exactly at n = 2.
    let lu = rays.clone().lu();
    let solution = lu
        .solve(&DVector::from_column_slice(&roots))
        .filter(|_| {
            let det = lu.determinant();
            det.is_finite() && det.abs() > 1e-9
        })
        .ok_or(Error::SingularSystem { n })?;
    let residual = (&rays * &solution - DVector::from_column_slice(&roots)).amax();
    if residual > 1e-10 {
        return Err(Error::SingularSystem { n });
    }
    if let Some((index, &l)) = solution
        .iter()
        .enumerate()
        .find(|(_, &l)| l < -EPS_FEAS)
    {
        return Err(Error::PolygonViolation { index, excess: -l });
    }
    Ok(ConeDecomposition {
        lambdas: solution.iter().copied().collect(),
    })
}

/// A distribution `P` on `n` outcomes for which `(t, s, P)` passes
/// [`check_projective_raw`], whenever `(t, s)` lies in the region of
/// [`check_ts_region`].
///
/// For `t <= s` the distribution is supported on two outcomes with
/// `1 + 2 sqrt(p(1-p)) = min(2, 1/s)`. For `s < t` it is `(a, ..., a, b, 0, ...)`
/// with `D_1/2 = t/s`.
pub fn witness_distribution(t: f64, s: f64, n: usize) -> Result<OutcomeDistribution> {
    let region_error = || Error::RegionViolation { t, s, n };
    if n == 0 || !(0.0..=1.0).contains(&t) || !(s > 0.0 && s <= 1.0) {
        return Err(region_error());
    }
    if !check_ts_region(t, s, n).is_feasible() {
        return Err(region_error());
    }
    let mut probs = vec![0.0; n];
    if n == 1 {
        // A one-outcome measurement is the identity: only S = T is possible.
        if (t - s).abs() > EPS_FEAS {
            return Err(region_error());
        }
        probs[0] = 1.0;
    } else if t <= s {
        let spread = (1.0 / s - 1.0).min(1.0);
        // sqrt(p(1-p)) = spread/2; the smaller root, in cancellation-free form
        let root = (1.0 - spread * spread).max(0.0).sqrt();
        let q = spread * spread / (2.0 * (1.0 + root));
        probs[0] = 1.0 - q;
        probs[1] = q;
    } else {
        let target = (t / s).min(n as f64);
        let k = (target.ceil() as usize).clamp(2, n);
        fill_flat_with_tail(&mut probs[..k], target);
    }
    let dist = OutcomeDistribution::renormalized(probs, 1e-9)?;
    let sc = ScenarioTriple::new(t, s, dist.clone())?;
    if !check_projective_raw(&sc).is_feasible() {
        return Err(region_error());
    }
    Ok(dist)
}

/// Fills `out` (length `k`) with `(a, ..., a, b)`, `(k-1) a + b = 1`, `0 <= b <= a`,
/// such that `(sum sqrt)^2` equals `target` in `[k-1, k]`.
fn fill_flat_with_tail(out: &mut [f64], target: f64) {
    let k = out.len();
    let km1 = (k - 1) as f64;
    let d_half = |b: f64| {
        let a = (1.0 - b) / km1;
        let s = km1 * a.sqrt() + b.sqrt();
        s * s
    };
    // d_half increases from k-1 at b = 0 to k at b = 1/k.
    let (mut lo, mut hi) = (0.0, 1.0 / k as f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if d_half(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    let b = hi;
    let a = (1.0 - b) / km1;
    for x in out.iter_mut().take(k - 1) {
        *x = a;
    }
    out[k - 1] = b;
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sc(t: f64, s: f64, p: &[f64]) -> ScenarioTriple {
        ScenarioTriple::new(t, s, OutcomeDistribution::new(p.to_vec()).unwrap()).unwrap()
    }

    #[test]
    fn raw_examples() {
        assert!(check_projective_raw(&sc(0.0, 0.3, &[0.5, 0.25, 0.25])).is_feasible());
        let v = check_projective_raw(&sc(0.0, 0.35, &[0.5, 0.25, 0.25]));
        assert_eq!(v.violated(), &[Constraint::SBound]);
        // sum sqrt P = 1.7071 > 1/sqrt(0.35) = 1.6903
        assert!((v.slack(Constraint::SBound).unwrap() + 0.01677).abs() < 1e-4);
        assert!(check_projective_raw(&sc(1.0, 1.0, &[1.0, 0.0])).is_feasible());
        for s in [0.01, 0.2, 0.5, 0.9, 1.0] {
            assert!(!check_projective_raw(&sc(0.0, s, &[0.6, 0.4])).is_feasible());
        }
    }

    #[test]
    fn chain_examples() {
        let v = check_projective_chain(&sc(0.0, 0.5, &[0.5, 0.5]));
        assert!(v.is_feasible());
        assert!(v.slack(Constraint::LowerChain).unwrap().abs() < 1e-15);
        let v = check_projective_chain(&sc(0.9, 0.1, &[0.5, 0.5]));
        assert_eq!(v.violated(), &[Constraint::UpperChain]);
        let r = check_projective_raw(&sc(0.9, 0.1, &[0.5, 0.5]));
        assert_eq!(r.violated(), &[Constraint::UpperChain]);
    }

    #[test]
    fn all_violations_reported() {
        // T/S = 100 exceeds D_1/2, and sum sqrt P > 1/sqrt S.
        let v = check_projective_raw(&sc(1.0, 0.01, &[0.5, 0.5]));
        assert_eq!(v.violated(), &[Constraint::UpperChain]);
        let v = check_projective_chain(&sc(0.0, 0.9, &[0.98, 0.01, 0.01]));
        assert_eq!(v.violated(), &[Constraint::LowerChain, Constraint::SBound]);
        let v = check_ts_region(0.0, 0.9, 1);
        assert_eq!(v.violated(), &[Constraint::SHalfPlusT]);
        let v = check_ts_region(1.0, 0.1, 4);
        assert_eq!(v.violated(), &[Constraint::TOverN]);
    }

    #[test]
    fn generalized_always_feasible() {
        assert!(check_generalized(&sc(0.0, 0.9, &[0.2; 5])).is_feasible());
        assert!(check_generalized(&sc(1.0, 0.01, &[1.0])).is_feasible());
        let hard = sc(0.0, 0.35, &[0.5, 0.25, 0.25]);
        assert!(!check_projective_raw(&hard).is_feasible());
        assert!(check_generalized(&hard).is_feasible());
    }

    #[test]
    fn ts_region_examples() {
        for n in [2, 3, 10] {
            assert!(check_ts_region(0.0, 0.5, n).is_feasible());
        }
        assert!(!check_ts_region(0.0, 0.51, 100).is_feasible());
        assert!(check_ts_region(0.8, 0.2, 4).is_feasible());
        assert!(!check_ts_region(0.8, 0.19, 4).is_feasible());
    }

    #[test]
    fn ternary_examples() {
        let t = |p: &[f64]| check_ternary_disk(&OutcomeDistribution::new(p.to_vec()).unwrap()).unwrap();
        assert!(t(&[1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]));
        assert!(t(&[0.6, 0.2, 0.2]));
        assert!(!t(&[0.7, 0.15, 0.15]));
        assert!(t(&[0.5, 0.5, 0.0]));
        assert!(t(&[0.0, 0.5, 0.5]));
        assert!(t(&[0.5, 0.0, 0.5]));
        assert!(!t(&[1.0, 0.0, 0.0]));
        assert!(!t(&[0.51, 0.49, 0.0]));
        assert!(check_ternary_disk(&OutcomeDistribution::uniform(2).unwrap()).is_err());
    }

    #[test]
    fn dichotomic_examples() {
        assert!(check_dichotomic(0.5, 0.0, 0.5).is_feasible());
        let v = check_dichotomic(0.5, 0.0, 0.6);
        assert_eq!(v.violated(), &[Constraint::SBound]);
        assert!(check_dichotomic(1.0, 1.0, 1.0).is_feasible());
    }

    #[test]
    fn cone_examples() {
        let u = OutcomeDistribution::uniform(3).unwrap();
        let cone = cone_decompose(&u).unwrap();
        // sqrt(1/3) = 2 lambda  =>  lambda = 0.288675...
        for &l in &cone.lambdas {
            assert!((l - (1.0f64 / 3.0).sqrt() / 2.0).abs() < 1e-12);
        }
        let back = cone.reconstruct();
        assert!(back.iter().all(|x| (x - (1.0f64 / 3.0).sqrt()).abs() < 1e-12));

        let fair = OutcomeDistribution::uniform(2).unwrap();
        assert_eq!(cone_decompose(&fair), Err(Error::SingularSystem { n: 2 }));

        let bad = OutcomeDistribution::new(vec![0.7, 0.15, 0.15]).unwrap();
        assert!(matches!(
            cone_decompose(&bad),
            Err(Error::PolygonViolation { index: 0, .. })
        ));
    }

    #[test]
    fn witness_distribution_examples() {
        let p = witness_distribution(0.0, 0.5, 2).unwrap();
        assert!((p.probs()[0] - 0.5).abs() < 1e-12 && (p.probs()[1] - 0.5).abs() < 1e-12);
        let p = witness_distribution(1.0, 1.0, 2).unwrap();
        assert_eq!(p.probs(), &[1.0, 0.0]);
        let p = witness_distribution(0.6, 0.15, 4).unwrap();
        assert!(check_projective_raw(&sc(0.6, 0.15, p.probs())).is_feasible());
        assert!((p.profile().d_half - 4.0).abs() < 1e-9);
        let p = witness_distribution(0.5, 0.2, 3).unwrap();
        assert!((p.profile().d_half - 2.5).abs() < 1e-9);
        assert!(matches!(
            witness_distribution(0.0, 0.6, 3),
            Err(Error::RegionViolation { .. })
        ));
        assert!(matches!(
            witness_distribution(0.3, 0.5, 1),
            Err(Error::RegionViolation { .. })
        ));
        assert_eq!(witness_distribution(0.3, 0.3, 1).unwrap().probs(), &[1.0]);
    }

    #[test]
    fn constraint_tags_round_trip() {
        for c in Constraint::ALL {
            assert_eq!(c.name().parse::<Constraint>().unwrap(), c);
        }
        assert!("Nope".parse::<Constraint>().is_err());
    }
}
