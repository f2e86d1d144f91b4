//! File formats: witness JSON, region CSV and SVG.

use std::io::{self, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector};
use crate::regions::{RegionGrid, RegionKind};
use crate::stats::{
    AmplitudeVector, GeneralizedWitness, OutcomeDistribution, ProjectiveWitness, ScenarioTriple,
    Witness,
};

/// Formats `x` with 12 significant digits, `%.12g` style.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_owned()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_owned()
    } else {
        s
    }
}

/// Header: axis names, `feasible`, `violated` (tags joined by `;`).
pub fn write_csv<W: Write>(grid: &RegionGrid, mut out: W) -> io::Result<()> {
    let header: Vec<&str> = grid
        .axes
        .iter()
        .map(|a| a.name.as_str())
        .chain(["feasible", "violated"])
        .collect();
    writeln!(out, "{}", header.join(","))?;
    for cell in &grid.cells {
        let coords: Vec<String> = cell.coords.iter().map(|&x| fmt_num(x)).collect();
        let tags: Vec<&str> = cell.violated.iter().map(|c| c.name()).collect();
        writeln!(out, "{},{},{}", coords.join(","), cell.feasible, tags.join(";"))?;
    }
    Ok(())
}

const SQRT3_2: f64 = 0.866_025_403_784_438_6;

/// Filled feasible cells plus boundary polylines. The view box spans the axis
/// ranges; the ternary plot uses the equilateral triangle with unit sides.
pub fn write_svg<W: Write>(grid: &RegionGrid, mut out: W) -> io::Result<()> {
    let ternary = grid.kind == RegionKind::Ternary;
    let (x0, x1) = (grid.axes[0].min, grid.axes[0].max);
    let (y0, y1) = if ternary {
        (0.0, SQRT3_2)
    } else {
        (grid.axes[1].min, grid.axes[1].max)
    };
    let (w, h) = (x1 - x0, y1 - y0);
    // p1 at the lower left corner, p2 at the lower right, p3 on top.
    let project = |a: f64, b: f64| -> (f64, f64) {
        if ternary {
            let p3 = 1.0 - a - b;
            (b + p3 / 2.0, p3 * SQRT3_2)
        } else {
            (a, b)
        }
    };
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{} {} {} {}" width="600" height="{}">"#,
        fmt_num(x0),
        fmt_num(y0),
        fmt_num(w),
        fmt_num(h),
        (600.0 * h / w).round()
    )?;
    writeln!(
        out,
        r#"<g transform="translate(0 {}) scale(1 -1)">"#,
        fmt_num(y0 + y1)
    )?;
    let (dx, dy) = if ternary {
        let step = 1.0 / grid.axes[0].resolution as f64;
        (step, step * SQRT3_2)
    } else {
        (grid.axes[0].step(), grid.axes[1].step())
    };
    for cell in grid.cells.iter().filter(|c| c.feasible) {
        let (x, y) = project(cell.coords[0], cell.coords[1]);
        writeln!(
            out,
            r##"<rect x="{}" y="{}" width="{}" height="{}" fill="#c8c8c8"/>"##,
            fmt_num(x - dx / 2.0),
            fmt_num(y - dy / 2.0),
            fmt_num(dx),
            fmt_num(dy)
        )?;
    }
    let stroke = w.max(h) / 300.0;
    for line in &grid.polylines {
        let pts: Vec<String> = line
            .points
            .iter()
            .map(|&(a, b)| {
                let (x, y) = project(a, b);
                format!("{},{}", fmt_num(x), fmt_num(y))
            })
            .collect();
        let dash = if line.name == "diagonal" {
            format!(r#" stroke-dasharray="{} {}""#, fmt_num(stroke * 4.0), fmt_num(stroke * 4.0))
        } else {
            String::new()
        };
        writeln!(
            out,
            r#"<polyline data-name="{}" points="{}" fill="none" stroke="black" stroke-width="{}"{dash}/>"#,
            line.name,
            pts.join(" "),
            fmt_num(stroke)
        )?;
    }
    writeln!(out, "</g>\n</svg>")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WitnessKind {
    Projective,
    Generalized,
}

/// JSON witness: states as `[re, im]` pairs, operators as row-major matrices
/// (a list of rows) of `[re, im]` pairs, and free-form metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessFile {
    pub kind: WitnessKind,
    pub dimension: usize,
    pub psi: Vec<[f64; 2]>,
    pub phi: Vec<[f64; 2]>,
    pub operators: Vec<Vec<Vec<[f64; 2]>>>,
    #[serde(default)]
    pub metadata: Map<String, Value>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LoadedWitness {
    Projective(ProjectiveWitness),
    Generalized(GeneralizedWitness),
}

impl LoadedWitness {
    pub fn as_witness(&self) -> &dyn Witness {
        match self {
            LoadedWitness::Projective(w) => w,
            LoadedWitness::Generalized(w) => w,
        }
    }
}

fn pairs(v: &CVector) -> Vec<[f64; 2]> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

fn rows(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
    m.row_iter()
        .map(|r| r.iter().map(|z| [z.re, z.im]).collect())
        .collect()
}

impl WitnessFile {
    fn from_parts<W: Witness>(kind: WitnessKind, w: &W) -> Self {
        Self {
            kind,
            dimension: w.dimension(),
            psi: pairs(w.psi().as_vector()),
            phi: pairs(w.phi().as_vector()),
            operators: w.operators().iter().map(rows).collect(),
            metadata: Map::new(),
        }
    }

    pub fn from_projective(w: &ProjectiveWitness) -> Self {
        Self::from_parts(WitnessKind::Projective, w)
    }

    pub fn from_generalized(w: &GeneralizedWitness) -> Self {
        let mut file = Self::from_parts(WitnessKind::Generalized, w);
        file.metadata.insert(
            "repaired_outcomes".into(),
            Value::from(w.repaired_outcomes().to_vec()),
        );
        file
    }

    /// Records the scenario this witness is meant to reproduce.
    pub fn with_target(mut self, sc: &ScenarioTriple) -> Self {
        self.metadata.insert(
            "target".into(),
            serde_json::json!({ "t": sc.t(), "s": sc.s(), "p": sc.dist().probs() }),
        );
        self
    }

    pub fn with_metadata(mut self, key: &str, value: Value) -> Self {
        self.metadata.insert(key.to_owned(), value);
        self
    }

    /// The embedded target scenario, if any.
    pub fn target(&self) -> Option<Result<ScenarioTriple>> {
        let target = self.metadata.get("target")?;
        let parse = || -> Result<ScenarioTriple> {
            let bad = || Error::InvalidWitness("malformed target metadata".into());
            let t = target.get("t").and_then(Value::as_f64).ok_or_else(bad)?;
            let s = target.get("s").and_then(Value::as_f64).ok_or_else(bad)?;
            let p: Vec<f64> = target
                .get("p")
                .and_then(Value::as_array)
                .ok_or_else(bad)?
                .iter()
                .map(|v| v.as_f64().ok_or_else(bad))
                .collect::<Result<_>>()?;
            ScenarioTriple::new(t, s, OutcomeDistribution::renormalized(p, 1e-9)?)
        };
        Some(parse())
    }

    fn vector(&self, name: &str, entries: &[[f64; 2]]) -> Result<AmplitudeVector> {
        if entries.len() != self.dimension {
            return Err(Error::InvalidWitness(format!(
                "{name} has {} entries, expected {}",
                entries.len(),
                self.dimension
            )));
        }
        let v = CVector::from_iterator(entries.len(), entries.iter().map(|&[re, im]| Complex64::new(re, im)));
        AmplitudeVector::new(v).map_err(|e| Error::InvalidWitness(format!("{name}: {e}")))
    }

    fn matrix(&self, k: usize) -> Result<CMatrix> {
        let d = self.dimension;
        let m = &self.operators[k];
        if m.len() != d || m.iter().any(|r| r.len() != d) {
            return Err(Error::InvalidWitness(format!("operator {k} is not {d}x{d}")));
        }
        Ok(CMatrix::from_fn(d, d, |i, j| {
            let [re, im] = m[i][j];
            Complex64::new(re, im)
        }))
    }

    /// Parses and validates the witness invariants.
    pub fn to_witness(&self) -> Result<LoadedWitness> {
        let psi = self.vector("psi", &self.psi)?;
        let phi = self.vector("phi", &self.phi)?;
        let ops = (0..self.operators.len())
            .map(|k| self.matrix(k))
            .collect::<Result<Vec<_>>>()?;
        Ok(match self.kind {
            WitnessKind::Projective => LoadedWitness::Projective(ProjectiveWitness::new(psi, phi, ops)?),
            WitnessKind::Generalized => {
                let repaired = self
                    .metadata
                    .get("repaired_outcomes")
                    .and_then(Value::as_array)
                    .map(|a| a.iter().filter_map(Value::as_u64).map(|k| k as usize).collect())
                    .unwrap_or_default();
                LoadedWitness::Generalized(
                    GeneralizedWitness::new(psi, phi, ops)?.with_repaired_outcomes(repaired),
                )
            }
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("witness files serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidWitness(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::{construct_generalized, construct_projective};
    use crate::regions::{emit_ternary, emit_ts_region};
    use crate::stats::evaluate_witness;

    #[test]
    fn number_format() {
        assert_eq!(fmt_num(0.0), "0");
        assert_eq!(fmt_num(0.5), "0.5");
        assert_eq!(fmt_num(1.0), "1");
        assert_eq!(fmt_num(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_num(2.0 / 3.0), "0.666666666667");
        assert_eq!(fmt_num(-0.0125), "-0.0125");
        assert_eq!(fmt_num(1e-7), "1e-7");
        assert_eq!(fmt_num(1.5e15), "1.5e15");
        assert_eq!(fmt_num(123456.789), "123456.789");
        assert_eq!(fmt_num(0.99999999999999), "1");
    }

    #[test]
    fn csv_layout() {
        let g = emit_ts_region(4, 4).unwrap();
        let mut buf = Vec::new();
        write_csv(&g, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "T,S,feasible,violated");
        assert_eq!(lines.len(), 17);
        // first cell (T, S) = (0.125, 0.125): feasible
        assert_eq!(lines[1], "0.125,0.125,true,");
        // row-major: S varies fastest; (0.125, 0.875) breaks S <= (T+1)/2
        assert_eq!(lines[4], "0.125,0.875,false,SHalfPlusT");
    }

    #[test]
    fn svg_is_well_formed() {
        let g = emit_ternary(8).unwrap();
        let mut buf = Vec::new();
        write_svg(&g, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("<svg") && text.trim_end().ends_with("</svg>"));
        assert!(text.contains("viewBox=\"0 0 1 0.866025403784\""));
    }

    #[test]
    fn witness_file_round_trip() {
        let sc = ScenarioTriple::new(
            0.2,
            0.3,
            OutcomeDistribution::new(vec![0.5, 0.3, 0.2]).unwrap(),
        )
        .unwrap();
        let w = construct_projective(&sc).unwrap();
        let file = WitnessFile::from_projective(&w).with_target(&sc);
        let back = WitnessFile::from_json(&file.to_json()).unwrap();
        assert_eq!(back, file);
        let LoadedWitness::Projective(loaded) = back.to_witness().unwrap() else {
            panic!("kind changed")
        };
        assert_eq!(loaded, w);
        let target = back.target().unwrap().unwrap();
        assert!(evaluate_witness(&loaded).unwrap().max_deviation(&target) < 1e-9);

        let g = construct_generalized(&sc).unwrap();
        let file = WitnessFile::from_generalized(&g);
        let loaded = WitnessFile::from_json(&file.to_json()).unwrap().to_witness().unwrap();
        assert!(matches!(loaded, LoadedWitness::Generalized(_)));
    }

    #[test]
    fn corrupted_files_rejected() {
        let sc = ScenarioTriple::new(0.0, 0.5, OutcomeDistribution::uniform(2).unwrap()).unwrap();
        let w = construct_projective(&sc).unwrap();
        let mut file = WitnessFile::from_projective(&w);
        file.operators[0][0][0] = [0.9, 0.0];
        assert!(matches!(file.to_witness(), Err(Error::InvalidWitness(_))));
        let mut file = WitnessFile::from_projective(&w);
        file.psi.pop();
        assert!(file.to_witness().is_err());
        assert!(WitnessFile::from_json("{\"kind\": \"weird\"}").is_err());
    }
}
