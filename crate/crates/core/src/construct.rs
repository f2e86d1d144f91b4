//! Explicit witnesses for feasible scenarios.
//!
//! Projective witnesses come from closing a polygon with side lengths
//! `sqrt(P(k) S)` and `sqrt(T)`, then factoring the resulting complex numbers
//! as products of state amplitudes in the computational basis. Generalized
//! witnesses send every outcome to one common post-measurement state, which
//! makes the outcome statistics independent of the postselection.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::feasibility::{check_polygon, check_projective_raw, EPS_FEAS};
use crate::linalg::{self, c, CMatrix, CVector, ONE, ZERO};
use crate::stats::{AmplitudeVector, GeneralizedWitness, ProjectiveWitness, ScenarioTriple, EPS_UNIT};

/// Tolerance on `|sum_k z_k|` for a closed polygon.
pub const EPS_CLOSE: f64 = 1e-11;

/// Complex numbers with prescribed magnitudes summing to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedPolygon {
    pub zs: Vec<Complex64>,
}

impl ClosedPolygon {
    pub fn residual(&self) -> f64 {
        self.zs.iter().sum::<Complex64>().norm()
    }

    pub fn magnitudes(&self) -> Vec<f64> {
        self.zs.iter().map(|z| z.norm()).collect()
    }
}

/// Realizes side lengths `xs` as a closed polygon in the complex plane.
///
/// Magnitudes are dealt in descending order to the group with the smallest
/// running total; the three group totals then satisfy the triangle inequality
/// and every member of a group points along its triangle edge.
pub fn close_polygon(xs: &[f64]) -> Result<ClosedPolygon> {
    if let Some(k) = xs.iter().position(|x| !x.is_finite() || *x < 0.0) {
        return Err(Error::InvalidParameter(format!(
            "side length {k} is {}, expected a non-negative number",
            xs[k]
        )));
    }
    let total: f64 = xs.iter().sum();
    check_polygon(xs, EPS_FEAS * total.max(1.0))?;

    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[b].total_cmp(&xs[a]));
    let mut groups = [0usize; 3].map(|_| Vec::new());
    let mut sums = [0.0f64; 3];
    for &k in &order {
        let g = (0..3)
            .min_by(|&a, &b| sums[a].total_cmp(&sums[b]))
            .unwrap_or(0);
        groups[g].push(k);
        sums[g] += xs[k];
    }
    if !is_triangle(sums, total) {
        let assignment = exhaustive_partition(xs).ok_or(Error::ClosureFailure {
            residual: f64::NAN,
        })?;
        groups = [0usize; 3].map(|_| Vec::new());
        sums = [0.0; 3];
        for (k, g) in assignment.into_iter().enumerate() {
            groups[g].push(k);
            sums[g] += xs[k];
        }
    }

    let directions = triangle_directions(sums);
    let mut zs = vec![ZERO; xs.len()];
    for (g, members) in groups.iter().enumerate() {
        for &k in members {
            zs[k] = directions[g] * xs[k];
        }
    }
    let polygon = ClosedPolygon { zs };
    let residual = polygon.residual();
    if residual > EPS_CLOSE * total.max(1.0) {
        return Err(Error::ClosureFailure { residual });
    }
    Ok(polygon)
}

fn is_triangle(sums: [f64; 3], total: f64) -> bool {
    let tol = EPS_FEAS * total.max(1.0);
    sums.iter().all(|&s| s <= total - s + tol)
}

/// Fallback search over all assignments to three groups, for few sides.
fn exhaustive_partition(xs: &[f64]) -> Option<Vec<usize>> {
    const MAX_SIDES: usize = 12;
    if xs.len() > MAX_SIDES {
        return None;
    }
    let total: f64 = xs.iter().sum();
    let count = 3usize.pow(xs.len() as u32);
    (0..count).find_map(|mut code| {
        let mut assignment = Vec::with_capacity(xs.len());
        let mut sums = [0.0; 3];
        for &x in xs {
            let g = code % 3;
            code /= 3;
            sums[g] += x;
            assignment.push(g);
        }
        is_triangle(sums, total).then_some(assignment)
    })
}

/// Unit directions of three edge vectors with lengths `sides` that sum to zero.
fn triangle_directions([a, b, c_len]: [f64; 3]) -> [Complex64; 3] {
    if a == 0.0 || b == 0.0 {
        // Degenerate: the two non-trivial sides cancel along the real axis.
        let (da, db) = if a == 0.0 { (ONE, ONE) } else { (ONE, -ONE) };
        return [da, db, -ONE];
    }
    let cos = ((c_len * c_len - a * a - b * b) / (2.0 * a * b)).clamp(-1.0, 1.0);
    let db = Complex64::from_polar(1.0, cos.acos());
    let third = -(c(a, 0.0) + db * b);
    let dc = if third.norm() > 0.0 {
        third / third.norm()
    } else {
        Complex64::from_polar(1.0, PI / 2.0)
    };
    [ONE, db, dc]
}

/// Unit vectors `psi`, `phi` in `C^n` with `conj(psi_k) phi_k = z_k`, which
/// exist iff `sum_k |z_k| <= 1`.
///
/// Phases are stripped, the real problem is solved by peeling off the smallest
/// magnitude and rescaling the rest, and the phases are reattached to `phi`.
pub fn factor_amplitudes(zs: &[Complex64]) -> Result<(AmplitudeVector, AmplitudeVector)> {
    let n = zs.len();
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "amplitude factorization needs at least 2 entries, got {n}"
        )));
    }
    let mags: Vec<f64> = zs.iter().map(|z| z.norm()).collect();
    let l1: f64 = mags.iter().sum();
    if l1.is_nan() || l1 > 1.0 + EPS_FEAS {
        return Err(Error::NormViolation { l1 });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| mags[b].total_cmp(&mags[a]));
    let sorted: Vec<f64> = order.iter().map(|&k| mags[k]).collect();
    let (psi_sorted, phi_sorted) = factor_real(&sorted);

    let mut psi = CVector::zeros(n);
    let mut phi = CVector::zeros(n);
    for (slot, &k) in order.iter().enumerate() {
        let phase = if mags[k] > 0.0 { zs[k] / mags[k] } else { ONE };
        psi[k] = c(psi_sorted[slot], 0.0);
        phi[k] = phase * phi_sorted[slot];
    }
    Ok((AmplitudeVector::new(psi)?, AmplitudeVector::new(phi)?))
}

/// Real factorization for magnitudes sorted in descending order.
fn factor_real(z: &[f64]) -> (Vec<f64>, Vec<f64>) {
    if let [z1, z2] = *z {
        // cos(a+b) = z1 - z2, cos(a-b) = z1 + z2 (principal branches).
        let sum = (z1 - z2).clamp(-1.0, 1.0).acos();
        let diff = (z1 + z2).clamp(-1.0, 1.0).acos();
        let (alpha, beta) = (0.5 * (sum + diff), 0.5 * (sum - diff));
        return (
            vec![alpha.cos(), alpha.sin()],
            vec![beta.cos(), beta.sin()],
        );
    }
    let (&last, head) = z.split_last().expect("at least three entries");
    let keep = 1.0 - last;
    let rescaled: Vec<f64> = head.iter().map(|x| x / keep).collect();
    let (mut psi, mut phi) = factor_real(&rescaled);
    let scale = keep.sqrt();
    psi.iter_mut().chain(phi.iter_mut()).for_each(|x| *x *= scale);
    psi.push(last.sqrt());
    phi.push(last.sqrt());
    (psi, phi)
}

/// Computational-basis projectors for `n` outcomes on dimension `d >= n`; the
/// last outcome absorbs the basis vectors `n-1 .. d`.
fn basis_projectors(n: usize, d: usize) -> Vec<CMatrix> {
    (0..n)
        .map(|k| {
            let end = if k + 1 == n { d } else { k + 1 };
            linalg::coordinate_projector(d, k..end)
        })
        .collect()
}

/// Projective witness on dimension `max(n, 2)` with computational-basis
/// projectors.
pub fn construct_projective(sc: &ScenarioTriple) -> Result<ProjectiveWitness> {
    let verdict = check_projective_raw(sc);
    if !verdict.is_feasible() {
        return Err(Error::InfeasibleScenario {
            violated: verdict.violated().to_vec(),
        });
    }
    let n = sc.n();
    let d = n.max(2);
    let mut sides: Vec<f64> = sc.dist().probs().iter().map(|p| (p * sc.s()).sqrt()).collect();
    sides.push(sc.t().sqrt());
    let polygon = close_polygon(&sides)?;

    let mut zs = polygon.zs;
    zs.pop();
    zs.resize(d, ZERO);
    let (psi, phi) = factor_amplitudes(&zs)?;
    ProjectiveWitness::new(psi, phi, basis_projectors(n, d))
}

/// Generalized witness on dimension `max(n, 2)` realizing any valid scenario.
///
/// `psi_k = sqrt P(k)`, `phi` has overlap `sqrt T` with `psi`, and the Kraus
/// operator of each possible outcome maps its basis sector onto a fixed state
/// `phi'` with `|<phi|phi'>|^2 = S`. Outcomes with `P(k) = 0` get the bare
/// projector so that the Kraus set stays complete; they are listed in
/// [`GeneralizedWitness::repaired_outcomes`].
pub fn construct_generalized(sc: &ScenarioTriple) -> Result<GeneralizedWitness> {
    let n = sc.n();
    let d = n.max(2);
    let mut amps: Vec<f64> = sc.dist().probs().iter().map(|p| p.sqrt()).collect();
    amps.resize(d, 0.0);
    let psi = AmplitudeVector::normalized(linalg::real_vector(&amps))?;

    let psi_perp = linalg::orthogonal_complement_direction(psi.as_vector())
        .ok_or_else(|| Error::InvalidParameter("no orthogonal direction".into()))?;
    let phi = AmplitudeVector::normalized(
        psi.as_vector() * c(sc.t().sqrt(), 0.0) + psi_perp * c((1.0 - sc.t()).sqrt(), 0.0),
    )?;
    let phi_perp = linalg::orthogonal_complement_direction(phi.as_vector())
        .ok_or_else(|| Error::InvalidParameter("no orthogonal direction".into()))?;
    let target =
        phi.as_vector() * c(sc.s().sqrt(), 0.0) + phi_perp * c((1.0 - sc.s()).sqrt(), 0.0);

    let projectors = basis_projectors(n, d);
    let mut repaired = Vec::new();
    let kraus = projectors
        .into_iter()
        .enumerate()
        .map(|(k, proj)| {
            if sc.dist().probs()[k] > 0.0 {
                let unitary = linalg::unitary_mapping(&linalg::basis_vector(d, k), &target, EPS_UNIT);
                unitary * proj
            } else {
                repaired.push(k);
                proj
            }
        })
        .collect();
    Ok(GeneralizedWitness::new(psi, phi, kraus)?.with_repaired_outcomes(repaired))
}
