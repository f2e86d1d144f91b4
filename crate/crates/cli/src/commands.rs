use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use postselect_core::io::{fmt_num, write_csv, write_svg, LoadedWitness, WitnessFile};
use postselect_core::oracle::{fuzz_projective, FuzzConfig};
use postselect_core::regions::{emit_ps_region, emit_pt_sections, emit_ternary, emit_ts_region, RegionGrid};
use postselect_core::{
    check_generalized, check_projective_raw, construct_generalized, construct_projective, evaluate_witness, Error,
    FeasibilityVerdict, OutcomeDistribution, ScenarioTriple,
};
use serde_json::json;

use crate::{Failure, FuzzArgs, Kind, RegionArgs, ScenarioArgs, Which};

const TARGET_TOLERANCE: f64 = 1e-9;
const INPUT_TOLERANCE: f64 = 1e-9;

fn input(e: impl std::fmt::Display) -> Failure {
    Failure::Input(e.to_string())
}

fn join(xs: &[f64]) -> String {
    xs.iter().map(|&x| fmt_num(x)).collect::<Vec<_>>().join(",")
}

fn scenario(args: &ScenarioArgs) -> Result<ScenarioTriple, Failure> {
    let dist = OutcomeDistribution::renormalized(args.p.clone(), INPUT_TOLERANCE).map_err(input)?;
    ScenarioTriple::new(args.t, args.s, dist).map_err(input)
}

fn write_scenario(out: &mut String, sc: &ScenarioTriple) {
    let _ = writeln!(out, "T {}", fmt_num(sc.t()));
    let _ = writeln!(out, "S {}", fmt_num(sc.s()));
    let _ = writeln!(out, "P {}", join(sc.dist().probs()));
}

fn write_verdict(out: &mut String, verdict: &FeasibilityVerdict) {
    let word = if verdict.is_feasible() { "feasible" } else { "infeasible" };
    let _ = writeln!(out, "verdict {word}");
    for (c, slack) in verdict.slacks() {
        let _ = writeln!(out, "slack {c} {}", fmt_num(*slack));
    }
    for c in verdict.violated() {
        let _ = writeln!(out, "violated {c}");
    }
}

fn write_profile(out: &mut String, dist: &OutcomeDistribution) {
    let prof = dist.profile();
    let _ = writeln!(out, "D_1/2 {}", fmt_num(prof.d_half));
    let _ = writeln!(out, "D_inf {}", fmt_num(prof.d_inf));
    let _ = writeln!(out, "H_1/2 {}", fmt_num(prof.h_half));
    let _ = writeln!(out, "H_inf {}", fmt_num(prof.h_inf));
}

pub fn check(args: &ScenarioArgs, generalized: bool) -> Result<String, Failure> {
    let sc = scenario(args)?;
    let verdict = if generalized { check_generalized(&sc) } else { check_projective_raw(&sc) };
    let mut out = String::new();
    write_scenario(&mut out, &sc);
    let _ = writeln!(out, "model {}", if generalized { "generalized" } else { "projective" });
    write_verdict(&mut out, &verdict);
    write_profile(&mut out, sc.dist());
    if verdict.is_feasible() {
        Ok(out)
    } else {
        Err(Failure::Negative(out))
    }
}

pub fn construct(args: &ScenarioArgs, kind: Kind, dest: Option<&Path>) -> Result<String, Failure> {
    let sc = scenario(args)?;
    let file = match kind {
        Kind::Projective => match construct_projective(&sc) {
            Ok(w) => WitnessFile::from_projective(&w),
            Err(Error::InfeasibleScenario { violated }) => {
                let mut out = String::new();
                write_scenario(&mut out, &sc);
                write_verdict(&mut out, &check_projective_raw(&sc));
                let names: Vec<&str> = violated.iter().map(|c| c.name()).collect();
                let _ = writeln!(out, "no projective witness: violates {}", names.join(","));
                return Err(Failure::Negative(out));
            }
            Err(e) => return Err(input(e)),
        },
        Kind::Generalized => WitnessFile::from_generalized(&construct_generalized(&sc).map_err(input)?),
    };
    let file = file
        .with_target(&sc)
        .with_metadata("provenance", json!("constructed"));
    let text = file.to_json() + "\n";
    match dest {
        None => Ok(text),
        Some(path) => {
            fs::write(path, text).map_err(|e| input(format!("{}: {e}", path.display())))?;
            Ok(format!("wrote {}\n", path.display()))
        }
    }
}

pub fn verify(path: &Path) -> Result<String, Failure> {
    let text = fs::read_to_string(path).map_err(|e| input(format!("{}: {e}", path.display())))?;
    let file = WitnessFile::from_json(&text).map_err(input)?;
    let witness = file.to_witness().map_err(input)?;
    let mut out = String::new();
    let kind = match &witness {
        LoadedWitness::Projective(_) => "projective",
        LoadedWitness::Generalized(_) => "generalized",
    };
    let w = witness.as_witness();
    let _ = writeln!(out, "kind {kind}");
    let _ = writeln!(out, "dimension {}", w.dimension());
    let _ = writeln!(out, "outcomes {}", w.operators().len());
    let _ = writeln!(out, "invariants ok");
    if let LoadedWitness::Generalized(g) = &witness {
        if !g.repaired_outcomes().is_empty() {
            let ks: Vec<String> = g.repaired_outcomes().iter().map(|k| k.to_string()).collect();
            let _ = writeln!(out, "repaired_outcomes {}", ks.join(","));
        }
    }
    let sc = match evaluate_witness(w) {
        Ok(sc) => sc,
        Err(e @ Error::DegeneratePostselection { .. }) => {
            let _ = writeln!(out, "{e}");
            return Err(Failure::Negative(out));
        }
        Err(e) => return Err(input(e)),
    };
    write_scenario(&mut out, &sc);
    if let Some(target) = file.target() {
        let target = target.map_err(input)?;
        let dev = sc.max_deviation(&target);
        let _ = writeln!(out, "target_deviation {}", fmt_num(dev));
        if dev.is_nan() || dev > TARGET_TOLERANCE {
            let _ = writeln!(out, "target mismatch beyond {}", fmt_num(TARGET_TOLERANCE));
            return Err(Failure::Negative(out));
        }
    }
    Ok(out)
}

fn build_region(args: &RegionArgs) -> Result<RegionGrid, Failure> {
    let grid = match args.which {
        Which::Ternary => emit_ternary(args.resolution),
        Which::Ps => emit_ps_region(args.resolution),
        Which::Pt => {
            let s = args.s.ok_or_else(|| input("--which pt needs --s"))?;
            emit_pt_sections(s, args.resolution)
        }
        Which::Ts => {
            let n = args.n.ok_or_else(|| input("--which ts needs --n"))?;
            emit_ts_region(n, args.resolution)
        }
    };
    grid.map_err(input)
}

fn write_file(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<(), Failure> {
    let fail = |e: std::io::Error| input(format!("{}: {e}", path.display()));
    let mut w = BufWriter::new(File::create(path).map_err(fail)?);
    f(&mut w).and_then(|_| w.flush()).map_err(fail)
}

pub fn region(args: &RegionArgs) -> Result<String, Failure> {
    let grid = build_region(args)?;
    if let Some(path) = &args.svg {
        write_file(path, |w| write_svg(&grid, w))?;
    }
    match &args.out {
        None => {
            let mut buf = Vec::new();
            write_csv(&grid, &mut buf).map_err(input)?;
            String::from_utf8(buf).map_err(input)
        }
        Some(path) => {
            write_file(path, |w| write_csv(&grid, w))?;
            let mut out = String::new();
            let _ = writeln!(out, "region {}", grid.kind.name());
            let _ = writeln!(out, "cells {}", grid.cells.len());
            let _ = writeln!(out, "feasible_fraction {}", fmt_num(grid.feasible_fraction()));
            Ok(out)
        }
    }
}

pub fn fuzz(args: &FuzzArgs) -> Result<String, Failure> {
    let cfg = FuzzConfig::new(args.dim, args.outcomes, args.samples, args.seed).orthogonal(args.orthogonal);
    let report = fuzz_projective(&cfg).map_err(input)?;
    let mut out = String::new();
    let _ = writeln!(out, "samples {}", report.samples);
    let _ = writeln!(out, "discarded {}", report.discarded);
    let _ = writeln!(out, "evaluated {}", report.evaluated());
    let _ = writeln!(out, "coverage_cells {}", report.coverage_grid.len());
    if let Some(dev) = report.max_fairness_deviation {
        let _ = writeln!(out, "max_fairness_deviation {}", fmt_num(dev));
    }
    if !report.ternary_coverage.is_empty() {
        let _ = writeln!(out, "ternary_cells {}", report.ternary_coverage.len());
    }
    let _ = writeln!(out, "violations {}", report.violations.len());
    for v in &report.violations {
        let names: Vec<&str> = v.violated.iter().map(|c| c.name()).collect();
        let _ = writeln!(
            out,
            "violation {} T={} S={} P={} {}",
            v.witness_digest,
            fmt_num(v.t),
            fmt_num(v.s),
            join(&v.probs),
            names.join(";")
        );
    }
    let _ = writeln!(out, "digest {}", report.digest());
    if report.violations.is_empty() {
        Ok(out)
    } else {
        Err(Failure::Negative(out))
    }
}

fn fmt_order(q: f64) -> String {
    if q.is_infinite() {
        "inf".into()
    } else {
        fmt_num(q)
    }
}

pub fn entropy(p: &[f64], orders: &[f64]) -> Result<String, Failure> {
    let dist = OutcomeDistribution::renormalized(p.to_vec(), INPUT_TOLERANCE).map_err(input)?;
    let default = [0.0, 0.5, 1.0, 2.0, f64::INFINITY];
    let orders = if orders.is_empty() { &default[..] } else { orders };
    let mut out = String::from("q D_q H_q\n");
    for &q in orders {
        let d = dist.diversity(q);
        let _ = writeln!(out, "{} {} {}", fmt_order(q), fmt_num(d), fmt_num(d.ln()));
    }
    Ok(out)
}
