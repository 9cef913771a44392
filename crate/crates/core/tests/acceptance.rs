//! End-to-end acceptance gate: ten numbered criteria, one pass line each.
//! Tolerances are pinned here and nowhere else; a red criterion means the
//! library no longer reproduces the mathematics it claims to.

use carleson_lab::balayage::SectorSpec;
use carleson_lab::dyadic::{build_adapted_sequence, decompose};
use carleson_lab::embed::{
    balayage_condition, check_classical_carleson, check_sectorial_plq, counterexample_suite,
    gurarii_macaev_ratio, sobolev_transformed_measure, CheckConfig, ExponentPair, SobolevMode,
};
use carleson_lab::measure::{
    default_probe_grid, doubling_constant, HalfPlaneMeasure, RadialMeasure,
};
use carleson_lab::transforms::{
    paley_wiener_check, weight_from_measure, zen_norm, PwOutcome, TestFunction,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::time::Instant;

fn radial_families() -> Vec<(&'static str, RadialMeasure)> {
    vec![
        ("dirac0", RadialMeasure::dirac_zero()),
        ("lebesgue", RadialMeasure::lebesgue()),
        ("r dr", RadialMeasure::power_law(1.0, 1.0)),
    ]
}

#[test]
fn criterion_01_laplace_isometry() {
    let t0 = Instant::now();
    let functions: Vec<(&str, TestFunction)> = vec![
        ("exp(-t)", TestFunction::exponential(1.0)),
        (
            "t exp(-t)",
            TestFunction::MonomialExponential {
                n: 2,
                lambda: Complex64::new(1.0, 0.0),
            },
        ),
        (
            "exp(-2t) + exp(-t)",
            TestFunction::Lacunary {
                coeffs: vec![1.0, 0.5f64.sqrt()],
                n_min: 0,
                p: 2.0,
            },
        ),
    ];
    for (nu_name, nu) in radial_families() {
        for (f_name, f) in &functions {
            match paley_wiener_check(&nu, f).unwrap() {
                PwOutcome::Finite { gap, .. } => {
                    assert!(gap <= 1e-6, "{nu_name} x {f_name}: gap {gap}")
                }
                PwOutcome::BothDivergent => {}
            }
        }
    }
    let hardy_sq = zen_norm(&TestFunction::exponential(1.0), &RadialMeasure::dirac_zero(), 2.0)
        .unwrap()
        .powi(2);
    assert!(
        (hardy_sq - PI).abs() <= 1e-6 * PI,
        "Hardy norm^2 {hardy_sq} vs pi"
    );
    let w1 = weight_from_measure(&RadialMeasure::lebesgue()).eval(1.0).unwrap();
    assert!((w1 - PI).abs() <= 1e-6 * PI, "w(1) = {w1} vs pi");
    let dt = t0.elapsed();
    assert!(dt.as_secs_f64() < 10.0, "isometry sweep took {dt:?}");
    println!("criterion 01 (laplace isometry, 9 pairs, gap <= 1e-6): pass in {dt:?}");
}

#[test]
fn criterion_02_doubling_constants() {
    let grid = default_probe_grid();
    for alpha in [0.0, 1.0, 2.5] {
        let nu = RadialMeasure::power_law(1.0, alpha);
        let info = doubling_constant(&nu, &grid, 1e6).unwrap();
        let expected = 2f64.powf(alpha + 1.0);
        assert!(
            (info.constant - expected).abs() <= 1e-12 * expected,
            "alpha {alpha}: {} vs {expected}",
            info.constant
        );
    }
    println!("criterion 02 (doubling of r^alpha dr = 2^(alpha+1), 1e-12): pass");
}

#[test]
fn criterion_03_adapted_sequence_invariants() {
    let mut atom_leb = RadialMeasure::lebesgue();
    atom_leb.atom_at_zero = 1.0;
    let families = vec![
        ("lebesgue", RadialMeasure::lebesgue()),
        ("r dr", RadialMeasure::power_law(1.0, 1.0)),
        ("atom + lebesgue", atom_leb),
    ];
    for (name, nu) in families {
        let seq = build_adapted_sequence(&nu, 0, 4).unwrap();
        assert!(seq.c >= 0.5, "{name}: separation {}", seq.c);
        let lo = 2.0 * seq.r;
        let hi = lo.powi(3);
        for w in seq.interval_masses.windows(2) {
            let ratio = w[1] / w[0];
            assert!(
                ratio >= lo - 1e-9 && ratio <= hi + 1e-9,
                "{name}: mass ratio {ratio} outside [{lo}, {hi}]"
            );
        }
        for w in seq.a.windows(2) {
            if w[1] > 0.0 {
                assert!(
                    (w[1] - w[0]) / w[1] >= 0.5 - 1e-12,
                    "{name}: radii {w:?} not separated"
                );
            }
        }
    }
    println!("criterion 03 (adapted radii: separation >= 1/2, mass ratios in [2R, (2R)^3]): pass");
}

#[test]
fn criterion_04_decomposition() {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for trial in 0..50u32 {
        let alpha = [0.0, 0.5, 1.0][trial as usize % 3];
        let nu = RadialMeasure::power_law(1.0, alpha);
        let seq = build_adapted_sequence(&nu, 0, 2).unwrap();
        let x_hi = *seq.a.last().unwrap();
        let n_atoms = rng.gen_range(2..6);
        let atoms: Vec<(Complex64, f64)> = (0..n_atoms)
            .map(|_| {
                (
                    Complex64::new(
                        rng.gen_range(seq.a[0]..x_hi),
                        rng.gen_range(-8.0..8.0),
                    ),
                    rng.gen_range(1e-3..1e-2),
                )
            })
            .collect();
        let mu = HalfPlaneMeasure::from_atoms(atoms);
        let total = mu.total_mass().unwrap();
        let dec = decompose(&mu, &nu, &seq, 16.0).unwrap();
        let captured: f64 = dec
            .parts
            .iter()
            .map(|p| p.total_mass().unwrap())
            .sum();
        assert!(
            (captured + dec.truncation_loss - total).abs() <= 1e-12 * total,
            "trial {trial}: conservation off ({captured} + {} vs {total})",
            dec.truncation_loss
        );
        for (i, part) in dec.parts.iter().enumerate() {
            if part.total_mass().unwrap() > 0.0 {
                let (x_min, _, _) = part.support_extent();
                let a_i = seq.a[dec.n_start as usize + i];
                assert!(x_min >= a_i - 1e-12, "trial {trial} part {i}: support leaks left");
            }
            assert!(
                dec.domination[i] <= 1.0 + 1e-9,
                "trial {trial} part {i}: domination {}",
                dec.domination[i]
            );
        }
    }
    let dt = t0.elapsed();
    assert!(dt.as_secs_f64() < 60.0, "decomposition sweep took {dt:?}");
    println!("criterion 04 (50 decompositions: conservation 1e-12, domination <= 1 + 1e-9): pass in {dt:?}");
}

#[test]
fn criterion_05_unbounded_embedding_example() {
    let report = counterexample_suite(100.0, 1e5).unwrap();
    assert!(
        report.max_square_ratio <= 2.0,
        "square ratio {}",
        report.max_square_ratio
    );
    assert!(
        report.divergence_closed >= 4.6,
        "divergence {}",
        report.divergence_closed
    );
    assert!(
        (report.divergence_closed - report.divergence_quad).abs() <= 1e-8,
        "closed {} vs quadrature {}",
        report.divergence_closed,
        report.divergence_quad
    );
    assert!(
        report.lower_bound > 10.0,
        "embedding lower bound {}",
        report.lower_bound
    );
    println!(
        "criterion 05 (square bound <= 2, divergence {} >= 4.6, lower bound {} > 10): pass",
        report.divergence_closed, report.lower_bound
    );
}

#[test]
fn criterion_06_lacunary_norm_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let n_min = -5;
    let len = 11;
    let mut bounds = (f64::INFINITY, 0.0f64);
    for trial in 0..200u32 {
        let coeffs: Vec<f64> = (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect();
        if coeffs.iter().all(|a| a.abs() < 1e-6) {
            continue;
        }
        let report = gurarii_macaev_ratio(&coeffs, n_min, 2.0).unwrap();
        let (lo, hi) = report.gram_bounds.expect("p = 2 has Gram bounds");
        assert!(lo > 0.0 && hi.is_finite(), "Gram bounds ({lo}, {hi})");
        let ratio = report.ratio.expect("nonzero coefficients");
        assert!(
            ratio >= lo.sqrt() * (1.0 - 1e-6) && ratio <= hi.sqrt() * (1.0 + 1e-6),
            "trial {trial}: ratio {ratio} outside [{}, {}]",
            lo.sqrt(),
            hi.sqrt()
        );
        bounds = (bounds.0.min(lo.sqrt()), bounds.1.max(hi.sqrt()));
    }
    println!(
        "criterion 06 (200 lacunary ratios inside the Gram bracket [{:.6}, {:.6}]): pass",
        bounds.0, bounds.1
    );
}

fn random_atoms(rng: &mut ChaCha8Rng, n: usize, sectorial: bool) -> HalfPlaneMeasure {
    let atoms = (0..n)
        .map(|_| {
            let re = rng.gen_range(0.1..8.0);
            let im_cap = if sectorial { 0.45 * re } else { 6.0 };
            (
                Complex64::new(re, rng.gen_range(-im_cap..im_cap)),
                rng.gen_range(0.1..2.0),
            )
        })
        .collect();
    HalfPlaneMeasure::from_atoms(atoms)
}

#[test]
fn criterion_07_kernel_square_coherence() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let cfg = CheckConfig::default();
    let mut worst = 0.0f64;
    for trial in 0..30u32 {
        let n = rng.gen_range(2..6);
        let mu = random_atoms(&mut rng, n, false);
        let v = check_classical_carleson(&mu, 2.0, &cfg).unwrap();
        let square = v[0].constant;
        let kernel = v[1].constant;
        assert!(square > 0.0 && kernel > 0.0, "trial {trial}: degenerate constants");
        let ratio = (square / kernel).max(kernel / square);
        assert!(
            ratio <= 64.0,
            "trial {trial}: square {square} vs kernel {kernel} (x{ratio})"
        );
        worst = worst.max(ratio);
    }
    println!("criterion 07 (30 measures: square and kernel constants within x64, worst x{worst:.3}): pass");
}

#[test]
fn criterion_08_sectorial_p_gt_q_consistency() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let pq = ExponentPair::new(4.0, 2.0);
    let cfg = CheckConfig::default();
    for trial in 0..20u32 {
        let n = rng.gen_range(2..5);
        let mu = random_atoms(&mut rng, n, true);
        let theta = mu
            .atoms
            .iter()
            .map(|a| (a.z.im.abs() / a.z.re).atan())
            .fold(0.0f64, f64::max)
            * 1.05
            + 1e-6;
        let sector = SectorSpec::new(theta);
        for j in 0..=6 {
            let scaled = mu.scaled(2f64.powi(j));
            let report = check_sectorial_plq(&scaled, &sector, pq, &cfg).unwrap();
            let bal = balayage_condition(&scaled, pq).unwrap();
            let finite = [
                report.cond2.norm,
                report.cond3.norm,
                bal.layer_norm,
            ];
            assert!(
                finite.iter().all(|v| v.is_finite()),
                "trial {trial} scale 2^{j}: norms {finite:?} not all finite"
            );
        }
    }
    println!("criterion 08 (20 sectorial measures, 7 mass scales: slab/kernel/sweep norms finite together): pass");
}

#[test]
fn criterion_09_fractional_l2_coherence() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let cfg = CheckConfig::default();
    let mut worst = 0.0f64;
    for trial in 0..20u32 {
        let n = rng.gen_range(2..5);
        let mu = random_atoms(&mut rng, n, false);
        let beta = if trial % 2 == 0 { 0.5 } else { 1.0 };
        let transformed = sobolev_transformed_measure(&mu, beta, 2.0, &SobolevMode::L2).unwrap();
        let v = check_classical_carleson(&transformed, 2.0, &cfg).unwrap();
        let square = v[0].constant;
        let lower_sq = v[2].constant.powi(2);
        assert!(square > 0.0 && lower_sq > 0.0, "trial {trial}: degenerate");
        let ratio = (square / lower_sq).max(lower_sq / square);
        assert!(
            ratio <= 64.0,
            "trial {trial} beta {beta}: square {square} vs lower^2 {lower_sq} (x{ratio})"
        );
        worst = worst.max(ratio);
    }
    println!("criterion 09 (20 reweighted measures: square constant vs lower bound^2 within x64, worst x{worst:.3}): pass");
}

#[test]
fn criterion_10_cli_determinism() {
    let bin = env!("CARGO_BIN_EXE_carleson-lab");
    let dir = std::env::temp_dir().join(format!("carleson-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let spec = dir.join("mu.spec");
    std::fs::write(&spec, "kind: halfplane\natom: 1 0 1\natom: 2 0.5 0.25\n").unwrap();
    let out = dir.join("out");
    let run = |args: &[&str]| {
        let output = std::process::Command::new(bin)
            .args(args)
            .current_dir(&dir)
            .output()
            .unwrap();
        assert!(output.status.success(), "cli failed: {output:?}");
        let mut files = Vec::new();
        for name in ["report.txt", "squares.csv", "verdicts.csv", "manifest.json"] {
            files.push(std::fs::read(out.join(name)).unwrap());
        }
        (output.stdout, files)
    };
    let args = [
        "check",
        "--mu",
        "mu.spec",
        "--criterion",
        "classical",
        "--out-dir",
        "out",
    ];
    let first = run(&args);
    let second = run(&args);
    assert_eq!(first, second, "direct rerun not byte-identical");
    // replay from the stored manifest
    let manifest = out.join("manifest.json").display().to_string();
    let replay = run(&["--manifest", &manifest]);
    assert_eq!(first, replay, "manifest replay not byte-identical");
    std::fs::remove_dir_all(&dir).ok();
    println!("criterion 10 (CLI rerun and manifest replay byte-identical): pass");
}
