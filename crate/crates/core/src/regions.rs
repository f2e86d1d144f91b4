//! Feasibility regions sampled on grids.
//!
//! Rectangular grids use cell centers over half-open axis ranges and list
//! cells row-major (the last axis varies fastest). The ternary grid is the
//! barycentric lattice `(i, j, k) / resolution` with `i + j + k = resolution`,
//! which includes the simplex edges and vertices.
//!
//! Every cell is classified by the predicates in [`crate::feasibility`].

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::feasibility::{
    check_dichotomic, check_ternary_disk, check_ts_region, Constraint, FeasibilityVerdict,
};
use crate::stats::OutcomeDistribution;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegionKind {
    /// Three outcomes, `T = 0`, free `S`: the disk in the probability simplex.
    Ternary,
    /// Two outcomes: outcome probability `p` against success probability `S`.
    Ps,
    /// Two outcomes at fixed `S`: `p` against transition probability `T`.
    Pt,
    /// Transition against success probability for `n` outcomes.
    Ts,
}

impl RegionKind {
    pub fn name(self) -> &'static str {
        match self {
            RegionKind::Ternary => "ternary",
            RegionKind::Ps => "ps",
            RegionKind::Pt => "pt",
            RegionKind::Ts => "ts",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub name: String,
    pub min: f64,
    pub max: f64,
    pub resolution: usize,
}

impl Axis {
    fn unit(name: &str, resolution: usize) -> Self {
        Self {
            name: name.to_owned(),
            min: 0.0,
            max: 1.0,
            resolution,
        }
    }

    pub fn step(&self) -> f64 {
        (self.max - self.min) / self.resolution as f64
    }

    /// Center of cell `i`.
    pub fn center(&self, i: usize) -> f64 {
        self.min + (i as f64 + 0.5) * self.step()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionSample {
    pub coords: Vec<f64>,
    pub feasible: bool,
    pub violated: Vec<Constraint>,
}

impl RegionSample {
    fn from_verdict(coords: Vec<f64>, verdict: &FeasibilityVerdict) -> Self {
        Self {
            coords,
            feasible: verdict.is_feasible(),
            violated: verdict.violated().to_vec(),
        }
    }
}

/// A named curve for plotting, in axis coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionGrid {
    pub kind: RegionKind,
    pub axes: Vec<Axis>,
    pub cells: Vec<RegionSample>,
    pub polylines: Vec<Polyline>,
}

impl RegionGrid {
    /// Number of cells implied by the axes.
    pub fn expected_cells(&self) -> usize {
        match self.kind {
            RegionKind::Ternary => {
                let r = self.axes[0].resolution;
                (r + 1) * (r + 2) / 2
            }
            _ => self.axes.iter().map(|a| a.resolution).product(),
        }
    }

    pub fn feasible_fraction(&self) -> f64 {
        let hits = self.cells.iter().filter(|c| c.feasible).count();
        hits as f64 / self.cells.len() as f64
    }

    /// Cell at row `i` of a two-axis rectangular grid, column `j`.
    pub fn cell(&self, i: usize, j: usize) -> &RegionSample {
        &self.cells[i * self.axes[1].resolution + j]
    }
}

fn check_resolution(resolution: usize) -> Result<()> {
    if resolution < 2 {
        return Err(Error::InvalidParameter(format!(
            "resolution must be at least 2, got {resolution}"
        )));
    }
    Ok(())
}

fn rectangular<F>(axes: &[Axis; 2], classify: F) -> Vec<RegionSample>
where
    F: Fn(f64, f64) -> FeasibilityVerdict + Sync,
{
    let rows: Vec<Vec<RegionSample>> = (0..axes[0].resolution)
        .into_par_iter()
        .map(|i| {
            let x = axes[0].center(i);
            (0..axes[1].resolution)
                .map(|j| {
                    let y = axes[1].center(j);
                    RegionSample::from_verdict(vec![x, y], &classify(x, y))
                })
                .collect()
        })
        .collect();
    rows.into_iter().flatten().collect()
}

fn curve(name: &str, resolution: usize, f: impl Fn(f64) -> f64) -> Polyline {
    Polyline {
        name: name.to_owned(),
        points: (0..=resolution)
            .map(|i| {
                let x = i as f64 / resolution as f64;
                (x, f(x))
            })
            .collect(),
    }
}

/// Classification of one point of the probability simplex (orthogonal
/// postselection, free success probability).
pub fn ternary_sample(p: [f64; 3]) -> Result<RegionSample> {
    let dist = OutcomeDistribution::renormalized(p.to_vec(), 1e-9)?;
    let feasible = check_ternary_disk(&dist)?;
    Ok(RegionSample {
        coords: p.to_vec(),
        feasible,
        violated: if feasible {
            Vec::new()
        } else {
            vec![Constraint::MaxOutcomePolygon]
        },
    })
}

/// Barycentric lattice over the three-outcome simplex.
pub fn emit_ternary(resolution: usize) -> Result<RegionGrid> {
    check_resolution(resolution)?;
    let r = resolution as f64;
    let rows: Vec<Vec<RegionSample>> = (0..=resolution)
        .into_par_iter()
        .map(|i| {
            (0..=resolution - i)
                .map(|j| {
                    let k = resolution - i - j;
                    ternary_sample([i as f64 / r, j as f64 / r, k as f64 / r])
                })
                .collect::<Result<_>>()
        })
        .collect::<Result<_>>()?;
    let edge = |name: &str, a: (f64, f64), b: (f64, f64)| Polyline {
        name: name.to_owned(),
        points: vec![a, b],
    };
    Ok(RegionGrid {
        kind: RegionKind::Ternary,
        axes: ["p1", "p2", "p3"]
            .into_iter()
            .map(|n| Axis::unit(n, resolution))
            .collect(),
        cells: rows.into_iter().flatten().collect(),
        // edges of the simplex in (p1, p2) coordinates
        polylines: vec![
            edge("edge_p3_zero", (1.0, 0.0), (0.0, 1.0)),
            edge("edge_p1_zero", (0.0, 1.0), (0.0, 0.0)),
            edge("edge_p2_zero", (0.0, 0.0), (1.0, 0.0)),
        ],
    })
}

/// Two outcomes projected onto `(p, S)`: some `T` exists iff
/// `S <= 1 / (1 + 2 sqrt(p(1-p)))`.
pub fn ps_verdict(p: f64, s: f64) -> FeasibilityVerdict {
    // The most favourable T saturates the middle inequality.
    let t = (s * (p.sqrt() + (1.0 - p).sqrt()).powi(2)).min(1.0);
    check_dichotomic(p, t, s)
}

fn ps_boundary(p: f64) -> f64 {
    1.0 / (1.0 + 2.0 * (p * (1.0 - p)).sqrt())
}

pub fn emit_ps_region(resolution: usize) -> Result<RegionGrid> {
    check_resolution(resolution)?;
    let axes = [Axis::unit("p", resolution), Axis::unit("S", resolution)];
    let cells = rectangular(&axes, ps_verdict);
    Ok(RegionGrid {
        kind: RegionKind::Ps,
        axes: axes.to_vec(),
        cells,
        polylines: vec![curve("s_max", resolution, ps_boundary)],
    })
}

/// Two outcomes at fixed `S`, on the `(p, T)` plane.
pub fn emit_pt_sections(s: f64, resolution: usize) -> Result<RegionGrid> {
    check_resolution(resolution)?;
    if !(s > 0.0 && s <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "success probability {s} is outside (0, 1]"
        )));
    }
    let axes = [Axis::unit("p", resolution), Axis::unit("T", resolution)];
    let cells = rectangular(&axes, |p, t| check_dichotomic(p, t, s));
    let lower = |p: f64| s * (p.sqrt() - (1.0 - p).sqrt()).powi(2);
    let upper = |p: f64| (s * (p.sqrt() + (1.0 - p).sqrt()).powi(2)).min(1.0);
    let mut polylines = vec![
        curve("t_min", resolution, lower),
        curve("t_max", resolution, upper),
    ];
    if s > 0.5 {
        // 1 + 2 sqrt(p(1-p)) = 1/s
        let half_gap = (1.0 - (1.0 / s - 1.0).powi(2)).max(0.0).sqrt() / 2.0;
        for (name, p) in [("cut_low", 0.5 - half_gap), ("cut_high", 0.5 + half_gap)] {
            polylines.push(Polyline {
                name: name.to_owned(),
                points: vec![(p, lower(p)), (p, upper(p))],
            });
        }
    }
    Ok(RegionGrid {
        kind: RegionKind::Pt,
        axes: axes.to_vec(),
        cells,
        polylines,
    })
}

/// Transition against success probability for `n` outcomes:
/// `T/n <= S <= (T+1)/2`.
pub fn emit_ts_region(n: usize, resolution: usize) -> Result<RegionGrid> {
    check_resolution(resolution)?;
    if n == 0 {
        return Err(Error::InvalidParameter("need at least one outcome".into()));
    }
    let axes = [Axis::unit("T", resolution), Axis::unit("S", resolution)];
    let cells = rectangular(&axes, |t, s| check_ts_region(t, s, n));
    Ok(RegionGrid {
        kind: RegionKind::Ts,
        axes: axes.to_vec(),
        cells,
        polylines: vec![
            curve("s_min", resolution, |t| t / n as f64),
            curve("s_max", resolution, |t| (t + 1.0) / 2.0),
            // points above the diagonal are measurement-enhanced
            curve("diagonal", resolution, |t| t),
        ],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ternary_grid_shape_and_landmarks() {
        let g = emit_ternary(10).unwrap();
        assert_eq!(g.cells.len(), g.expected_cells());
        let find = |p: [f64; 3]| {
            g.cells
                .iter()
                .find(|c| c.coords.iter().zip(p).all(|(a, b)| (a - b).abs() < 1e-12))
                .unwrap()
        };
        assert!(!find([1.0, 0.0, 0.0]).feasible);
        assert!(find([0.5, 0.5, 0.0]).feasible);
        assert!(find([0.0, 0.5, 0.5]).feasible);
        assert!(find([0.5, 0.0, 0.5]).feasible);
        assert!(ternary_sample([1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]).unwrap().feasible);
        let edge_hits = g
            .cells
            .iter()
            .filter(|c| c.coords.contains(&0.0) && c.feasible)
            .count();
        assert_eq!(edge_hits, 3);
    }

    #[test]
    fn ps_examples() {
        assert!(ps_verdict(0.5, 0.5).is_feasible());
        assert!(ps_verdict(0.0, 1.0).is_feasible());
        assert_eq!(ps_verdict(0.5, 0.6).violated(), &[Constraint::SBound]);
        let g = emit_ps_region(50).unwrap();
        assert_eq!(g.cells.len(), 2500);
        for c in &g.cells {
            assert_eq!(c.feasible, c.coords[1] <= ps_boundary(c.coords[0]));
        }
    }

    #[test]
    fn pt_examples() {
        let s = 1.0 / 3.0;
        let g = emit_pt_sections(s, 60).unwrap();
        // at s <= 1/2 every p column has feasible cells
        for i in 0..60 {
            assert!((0..60).any(|j| g.cell(i, j).feasible), "column {i}");
        }
        assert!(check_dichotomic(0.0, 1.0, 1.0).is_feasible());
        assert!(emit_pt_sections(0.0, 10).is_err());
        let g = emit_pt_sections(0.6, 10).unwrap();
        assert_eq!(g.polylines.len(), 4);
    }

    #[test]
    fn ts_examples() {
        assert!(check_ts_region(1.0, 1.0, 2).is_feasible());
        assert!(check_ts_region(1.0, 0.25, 4).is_feasible());
        assert!(!check_ts_region(1.0, 0.25, 3).is_feasible());
        assert!(check_ts_region(0.0, 0.5, 3).is_feasible());
        let g = emit_ts_region(4, 40).unwrap();
        assert_eq!(g.cells.len(), g.expected_cells());
        assert!(emit_ts_region(0, 40).is_err());
        assert!(emit_ts_region(4, 1).is_err());
    }
}
