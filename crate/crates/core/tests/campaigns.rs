use postselect_core::oracle::{fuzz_projective, FuzzConfig, COVERAGE_RESOLUTION};
use postselect_core::regions::ternary_sample;

fn in_region(t: f64, s: f64) -> bool {
    t / 2.0 <= s && s <= (t + 1.0) / 2.0
}

#[test]
fn two_level_campaign_fills_the_ts_region() {
    let report = fuzz_projective(&FuzzConfig::new(2, 2, 200_000, 9)).unwrap();
    assert!(report.violations.is_empty());
    let res = COVERAGE_RESOLUTION;
    let h = 1.0 / res as f64;
    let (mut inside, mut hit, mut stray) = (0, 0, 0);
    for i in 0..res {
        for j in 0..res {
            let (t0, s0) = (i as f64 * h, j as f64 * h);
            let seen = report.coverage_grid.contains_key(&(i, j));
            if in_region(t0 + h / 2.0, s0 + h / 2.0) {
                inside += 1;
                hit += seen as u32;
            } else {
                let corners = [(t0, s0), (t0 + h, s0), (t0, s0 + h), (t0 + h, s0 + h)];
                let touches = corners.iter().any(|&(t, s)| in_region(t, s));
                stray += (seen && !touches) as u32;
            }
        }
    }
    assert_eq!(stray, 0);
    assert!(hit as f64 >= 0.98 * inside as f64, "{hit} of {inside} cells reached");
}

#[test]
fn same_seed_same_digest() {
    let cfg = FuzzConfig::new(3, 2, 10_000, 42);
    let a = fuzz_projective(&cfg).unwrap().digest();
    let b = fuzz_projective(&cfg).unwrap().digest();
    assert_eq!(a, b);
    let c = fuzz_projective(&FuzzConfig::new(3, 2, 10_000, 43)).unwrap().digest();
    assert_ne!(a, c);
}

#[test]
fn digest_independent_of_thread_count() {
    let cfg = FuzzConfig::new(4, 3, 20_000, 7);
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| fuzz_projective(&cfg).unwrap())
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn orthogonal_three_outcome_hits_stay_in_the_disk() {
    let cfg = FuzzConfig::new(3, 3, 50_000, 11).orthogonal(true);
    let report = fuzz_projective(&cfg).unwrap();
    assert!(report.violations.is_empty());
    assert!(!report.ternary_coverage.is_empty());
    let h = 1.0 / COVERAGE_RESOLUTION as f64;
    for &(i, j) in report.ternary_coverage.keys() {
        // some corner of every hit cell must lie in the disk
        let near = [(0.0, 0.0), (h, 0.0), (0.0, h), (h, h)].iter().any(|&(a, b)| {
            let p1 = i as f64 * h + a;
            let p2 = j as f64 * h + b;
            p1 + p2 <= 1.0 && ternary_sample([p1, p2, 1.0 - p1 - p2]).unwrap().feasible
        });
        assert!(near, "cell ({i}, {j}) lies outside the disk");
    }
}
