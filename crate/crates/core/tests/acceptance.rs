//! Acceptance criteria. Each criterion prints one PASS/FAIL line; the test
//! fails if any criterion fails. Run with `--nocapture` to see the lines.

mod common;

use std::time::{Duration, Instant};

use common::*;
use ctlvol::factors::{decompose, decompose_with_structure, f1_distinct};
use ctlvol::spectral::{jordan_structure, DEFAULT_CLUSTER_TOL};
use ctlvol::volume::{
    jordan_limit_check, volume_auto, volume_controllability, volume_distinct, volume_jordan,
    volume_single_jordan, DistinctTerms,
};
use ctlvol::zonotope::{
    build_generators, build_generators_with, oracle_volume, polygon_2d, polygon_area,
};
use ctlvol::{Convention, DenseMatrix, JordanBlock, JordanStructure, LdtSystem, RegionKind};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn jordan_pair(blocks: Vec<JordanBlock>, b: &[f64]) -> (LdtSystem, JordanStructure) {
    let (a, js) = JordanStructure::jordan_form(blocks).unwrap();
    (LdtSystem::single_input(a, b).unwrap(), js)
}

fn reach_oracle(sys: &LdtSystem, horizon: usize) -> f64 {
    oracle_volume(&build_generators(sys, horizon, RegionKind::Reach).unwrap()).unwrap()
}

/// The 50 random systems of criterion 2 (also reused by criterion 7).
fn criterion2_systems() -> Vec<LdtSystem> {
    let mut r = rng(0x5eed_0002);
    (0..50)
        .map(|i| {
            let n = 2 + i % 2;
            let eigs = spread_eigenvalues(&mut r, n, 0.05, 0.85, 0.02);
            let b = random_vec(&mut r, n, 0.5, 1.5);
            random_distinct_system(&mut r, &eigs, &b)
        })
        .collect()
}

/// `(lambda, n, b_last)` grid of criterion 3.
fn criterion3_cases() -> Vec<(f64, usize, f64)> {
    let mut cases = Vec::new();
    for lambda in [0.3, 0.5, 0.7] {
        for n in [2, 3] {
            for b_last in [0.5, 1.0] {
                cases.push((lambda, n, b_last));
            }
        }
    }
    cases
}

fn single_block_pair(lambda: f64, n: usize, b_last: f64) -> (LdtSystem, JordanStructure) {
    let mut b = vec![0.0; n];
    b[n - 1] = b_last;
    jordan_pair(vec![JordanBlock::new(lambda, n)], &b)
}

fn c1_reference_f1_values() -> Outcome {
    let cases = [
        ([0.4, 0.9], 0.7813),
        ([0.6, 0.9], 0.6522),
        ([0.85, 0.9], 0.2128),
    ];
    let start = Instant::now();
    let values: Vec<f64> = cases.iter().map(|(e, _)| f1_distinct(e).unwrap()).collect();
    let elapsed = start.elapsed();
    let worst = values
        .iter()
        .zip(&cases)
        .map(|(v, (_, want))| (v - want).abs())
        .fold(0.0, f64::max);
    check(
        worst <= 1e-4 && elapsed < Duration::from_millis(1),
        format!("f1 = {values:.4?}, max abs err {worst:.2e}, {elapsed:?}"),
    )
}

fn c2_distinct_agreement() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for sys in criterion2_systems() {
        let analytic = volume_distinct(&sys).map_err(|e| e.to_string())?;
        worst = worst.max(rel(reach_oracle(&sys, 300), analytic));
    }
    let elapsed = start.elapsed();
    check(
        worst <= 1e-3 && elapsed < Duration::from_secs(30),
        format!("50 systems, max rel gap {worst:.2e} at N=300, {elapsed:.2?}"),
    )
}

fn c3_single_jordan() -> Outcome {
    let mut worst: f64 = 0.0;
    for (lambda, n, b_last) in criterion3_cases() {
        let (sys, _) = single_block_pair(lambda, n, b_last);
        let analytic = volume_single_jordan(lambda, n, b_last).map_err(|e| e.to_string())?;
        worst = worst.max(rel(reach_oracle(&sys, 300), analytic));
    }
    let mut closed_worst: f64 = 0.0;
    for lambda in [0.3, 0.5, 0.7] {
        let v = volume_single_jordan(lambda, 2, 1.0).unwrap();
        closed_worst = closed_worst.max(rel(jordan2_closed_form(lambda), v));
    }
    check(
        worst <= 1e-3 && closed_worst <= 1e-12,
        format!("12 cases, max rel gap {worst:.2e}; double-sum closed form err {closed_worst:.2e}"),
    )
}

fn c4_multi_block() -> Outcome {
    let cases = [
        (
            vec![JordanBlock::new(0.3, 1), JordanBlock::new(0.6, 2)],
            vec![1.0, 0.0, 1.0],
        ),
        (
            vec![JordanBlock::new(0.2, 2), JordanBlock::new(0.7, 1)],
            vec![0.0, 1.0, 1.0],
        ),
    ];
    let mut gaps = Vec::new();
    for (blocks, b) in cases {
        let (sys, js) = jordan_pair(blocks, &b);
        let analytic = volume_jordan(&js, sys.b()).map_err(|e| e.to_string())?;
        gaps.push(rel(reach_oracle(&sys, 300), analytic));
    }
    check(
        gaps.iter().all(|&g| g <= 1e-3),
        format!(
            "rel gaps {:?} at N=300",
            gaps.iter().map(|g| format!("{g:.2e}")).collect::<Vec<_>>()
        ),
    )
}

fn c5_last_row_invariance() -> Outcome {
    let inputs = [[0.7, 1.0], [0.0, 1.0], [-0.7, 1.0]];
    let mut oracles = Vec::new();
    let mut analytics = Vec::new();
    for b in inputs {
        let (sys, js) = jordan_pair(vec![JordanBlock::new(0.9, 2)], &b);
        oracles.push(reach_oracle(&sys, 50));
        analytics.push(volume_jordan(&js, sys.b()).map_err(|e| e.to_string())?);
    }
    let spread = |v: &[f64]| {
        let max = v.iter().cloned().fold(f64::MIN, f64::max);
        let min = v.iter().cloned().fold(f64::MAX, f64::min);
        (max - min) / max
    };
    let (so, sa) = (spread(&oracles), spread(&analytics));
    check(
        so <= 1e-12 && sa <= 1e-12,
        format!(
            "oracle N=50 {:.10} (spread {so:.2e}), analytic spread {sa:.2e}",
            oracles[0]
        ),
    )
}

fn c6_perturbation_limit() -> Outcome {
    let target = volume_single_jordan(0.5, 2, 1.0).unwrap();
    let seq =
        jordan_limit_check(0.5, 2, 1.0, &[1e-1, 1e-2, 1e-3, 1e-4]).map_err(|e| e.to_string())?;
    let errors: Vec<f64> = seq.iter().map(|(_, v)| rel(*v, target)).collect();
    let monotone = errors.windows(2).all(|w| w[1] < w[0]);
    let last = *errors.last().unwrap();
    check(
        monotone && last <= 1e-3 && (target - 5.3333).abs() < 1e-4,
        format!(
            "rel errors {:?}, target {target:.4}",
            errors
                .iter()
                .map(|g| format!("{g:.2e}"))
                .collect::<Vec<_>>()
        ),
    )
}

fn c7_decomposition_identities() -> Outcome {
    let mut worst_a: f64 = 0.0;
    for sys in criterion2_systems() {
        worst_a = worst_a.max(decompose(&sys).map_err(|e| e.to_string())?.residual);
    }
    let mut worst_b: f64 = 0.0;
    for (lambda, n, b_last) in criterion3_cases() {
        let (sys, js) = single_block_pair(lambda, n, b_last);
        let d = decompose_with_structure(&sys, &js).map_err(|e| e.to_string())?;
        worst_b = worst_b.max(d.residual);
    }
    check(
        worst_a <= 1e-12 && worst_b <= 1e-12,
        format!("residual (a) {worst_a:.2e}, residual (b) {worst_b:.2e}"),
    )
}

fn c8_cross_oracle_geometry() -> Outcome {
    let mut r = rng(0x5eed_0008);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let eigs = spread_eigenvalues(&mut r, 2, 0.05, 0.95, 0.02);
        let b = random_vec(&mut r, 2, -1.5, 1.5);
        let sys = random_distinct_system(&mut r, &eigs, &b);
        let z = build_generators_with(&sys, 30, RegionKind::Reach, Convention::Symmetric).unwrap();
        let area = polygon_area(&polygon_2d(&z).map_err(|e| e.to_string())?);
        let unit = oracle_volume(&z.with_convention(Convention::UnitCube)).unwrap();
        worst = worst.max(rel(area, 4.0 * unit));
    }
    check(
        worst <= 1e-9,
        format!("20 systems, max rel diff {worst:.2e} at N=30"),
    )
}

fn c9_scaling_and_similarity() -> Outcome {
    let mut r = rng(0x5eed_0009);
    let mut worst_scale: f64 = 0.0;
    let mut worst_sim: f64 = 0.0;
    for trial in 0..20 {
        let n = 2 + trial % 2;
        let eigs = spread_eigenvalues(&mut r, n, 0.05, 0.85, 0.02);
        let b = random_vec(&mut r, n, 0.5, 1.5);
        let sys = random_distinct_system(&mut r, &eigs, &b);
        let js = jordan_structure(sys.a(), DEFAULT_CLUSTER_TOL).map_err(|e| e.to_string())?;
        let base = DistinctTerms::from_structure(&js, &b).unwrap().volume();
        let mut scaled = js.clone();
        for col in 0..n {
            let s = random_vec(&mut r, 1, 0.1, 10.0)[0] * if col % 2 == 0 { 1.0 } else { -1.0 };
            scaled = scaled.rescale_column(col, s);
        }
        let v_scaled = DistinctTerms::from_structure(&scaled, &b).unwrap().volume();
        worst_scale = worst_scale.max(rel(v_scaled, base));

        let t = well_conditioned(&mut r, n);
        let v = volume_auto(&sys, DEFAULT_CLUSTER_TOL).unwrap().analytic;
        let vt = volume_auto(&sys.similarity(&t).unwrap(), DEFAULT_CLUSTER_TOL)
            .map_err(|e| e.to_string())?
            .analytic;
        worst_sim = worst_sim.max(rel(vt, v * t.det().unwrap().abs()));
    }
    check(
        worst_scale <= 1e-10 && worst_sim <= 1e-8,
        format!("rescaling max rel {worst_scale:.2e}, similarity max rel {worst_sim:.2e}"),
    )
}

fn c10_controllability_transform() -> Outcome {
    let sys =
        LdtSystem::single_input(DenseMatrix::diag(&[2.0, 4.0]).unwrap(), &[1.0, 1.0]).unwrap();
    let analytic = volume_controllability(&sys).map_err(|e| e.to_string())?;
    let oracle = oracle_volume(&build_generators(&sys, 100, RegionKind::Control).unwrap()).unwrap();
    let gap = rel(oracle, analytic);
    check(
        gap <= 1e-3,
        format!("analytic {analytic:.6}, oracle {oracle:.6}, rel gap {gap:.2e}"),
    )
}

#[test]
fn acceptance_criteria() {
    let criteria: [Criterion; 10] = [
        ("1 reference f1 values", c1_reference_f1_values),
        (
            "2 analytic-oracle agreement, distinct",
            c2_distinct_agreement,
        ),
        (
            "3 analytic-oracle agreement, single Jordan block",
            c3_single_jordan,
        ),
        ("4 analytic-oracle agreement, multi-block", c4_multi_block),
        ("5 last-row invariance", c5_last_row_invariance),
        ("6 perturbation limit", c6_perturbation_limit),
        ("7 decomposition identities", c7_decomposition_identities),
        ("8 cross-oracle geometry", c8_cross_oracle_geometry),
        ("9 scaling / similarity", c9_scaling_and_similarity),
        (
            "10 controllability transform",
            c10_controllability_transform,
        ),
    ];
    let mut failed = Vec::new();
    for (name, run) in criteria {
        match run() {
            Ok(detail) => println!("PASS  criterion {name}: {detail}"),
            Err(detail) => {
                println!("FAIL  criterion {name}: {detail}");
                failed.push(name);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
