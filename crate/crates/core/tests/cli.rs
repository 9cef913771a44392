//! Black-box tests of the `carleson-lab` binary (exit codes, output files,
//! replay) and property tests of the spec-file round trip.

use carleson_lab::measure::{DensityPiece, HalfPlaneMeasure, RadialMeasure};
use carleson_lab::specfile::{emit, parse_spec_str, ParsedSpec};
use num_complex::Complex64;
use proptest::prelude::*;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_carleson-lab")
}

fn workdir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("carleson-cli-{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

#[test]
fn exit_codes() {
    let dir = workdir("exit");
    std::fs::write(dir.join("mu.spec"), "kind: halfplane\natom: 1 0 1\n").unwrap();
    std::fs::write(dir.join("bad.spec"), "kind: halfplane\natom: 1 0 -1\n").unwrap();

    // pass
    let out = run_in(
        &dir,
        &["check", "--mu", "mu.spec", "--criterion", "classical", "--out-dir", "o0"],
    );
    assert_eq!(out.status.code(), Some(0), "{out:?}");

    // fail vs cap
    let out = run_in(
        &dir,
        &[
            "check", "--mu", "mu.spec", "--criterion", "classical", "--cap", "0.1",
            "--out-dir", "o1",
        ],
    );
    assert_eq!(out.status.code(), Some(1), "{out:?}");
    assert!(String::from_utf8_lossy(&out.stdout).contains("[FAIL]"));

    // schema violation
    let out = run_in(
        &dir,
        &["check", "--mu", "bad.spec", "--criterion", "classical", "--out-dir", "o2"],
    );
    assert_eq!(out.status.code(), Some(2), "{out:?}");
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));

    // unknown criterion
    let out = run_in(
        &dir,
        &["check", "--mu", "mu.spec", "--criterion", "bogus", "--out-dir", "o3"],
    );
    assert_eq!(out.status.code(), Some(2), "{out:?}");

    // unknown subcommand is a usage error
    let out = run_in(&dir, &["frobnicate"]);
    assert_eq!(out.status.code(), Some(2), "{out:?}");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn pw_check_and_tolerance() {
    let dir = workdir("pw");
    std::fs::write(dir.join("hardy.spec"), "kind: radial\natom0: 1\n").unwrap();
    let out = run_in(
        &dir,
        &["pw-check", "--nu", "hardy.spec", "--f", "exp:1", "--out-dir", "o"],
    );
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("relative-gap"), "{text}");

    // impossible tolerance turns the same run into a failure
    let out = run_in(
        &dir,
        &[
            "pw-check", "--nu", "hardy.spec", "--f", "exp:1", "--tol", "1e-18",
            "--out-dir", "o2",
        ],
    );
    assert_eq!(out.status.code(), Some(1), "{out:?}");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn balayage_csv_values() {
    let dir = workdir("bal");
    std::fs::write(dir.join("mu.spec"), "kind: halfplane\natom: 1 0 1\n").unwrap();
    let out = run_in(
        &dir,
        &[
            "balayage", "--mu", "mu.spec", "--grid", "0:1:2", "--window", "-4..4",
            "--out-dir", "o",
        ],
    );
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let csv = std::fs::read_to_string(dir.join("o/balayage.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,sweep,dyadic_sweep"));
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    // S_{delta_1}(0) = 1/pi
    let sweep: f64 = first[1].parse().unwrap();
    assert!((sweep - 1.0 / std::f64::consts::PI).abs() < 1e-12);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn counterexample_subcommand() {
    let dir = workdir("cx");
    let out = run_in(
        &dir,
        &["counterexample", "--log-t", "9", "--log-trunc", "100", "--out-dir", "o"],
    );
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("max-square-ratio"), "{text}");
    assert!(dir.join("o/squares.csv").exists());
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn admiss_subcommand_routes_and_reports() {
    let dir = workdir("adm");
    let mut sys = String::from("kind: system\n");
    for k in 0..=10 {
        sys.push_str(&format!("mode: -{} 0 {} 0\n", 1u64 << k, 2f64.powf(k as f64 / 2.0)));
    }
    std::fs::write(dir.join("sys.spec"), sys).unwrap();
    let out = run_in(
        &dir,
        &[
            "admiss", "--sys", "sys.spec", "--q", "2", "--space", "lp:2", "--cap", "8",
            "--out-dir", "o",
        ],
    );
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("admissible: true"), "{text}");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn stored_manifest_replays_byte_identically() {
    let dir = workdir("replay");
    std::fs::write(dir.join("nu.spec"), "kind: radial\npiece: 0 inf power 1 0\n").unwrap();
    let args = [
        "hankel", "--symbol", "log1p", "--nu", "nu.spec", "--cap", "2", "--out-dir", "o",
    ];
    let first = run_in(&dir, &args);
    assert_eq!(first.status.code(), Some(0), "{first:?}");
    let report = std::fs::read(dir.join("o/report.txt")).unwrap();
    let manifest = dir.join("o/manifest.json").display().to_string();
    let replay = run_in(&dir, &["--manifest", &manifest]);
    assert_eq!(replay.status.code(), Some(0), "{replay:?}");
    assert_eq!(first.stdout, replay.stdout);
    assert_eq!(report, std::fs::read(dir.join("o/report.txt")).unwrap());
    std::fs::remove_dir_all(&dir).ok();
}

fn arb_radial() -> impl Strategy<Value = RadialMeasure> {
    let atom0 = prop_oneof![Just(0.0), 0.0..10.0f64];
    let atoms = prop::collection::vec((0.01..100.0f64, 0.0..10.0f64), 0..4).prop_map(|mut v| {
        v.sort_by(|a, b| a.0.total_cmp(&b.0));
        v.dedup_by(|a, b| a.0 == b.0);
        v
    });
    let piece = (0.1..4.0f64, 0.1..4.0f64, 0.0..5.0f64, -0.9..2.0f64)
        .prop_map(|(lo, len, coeff, alpha)| DensityPiece::power(lo, lo + len, coeff, alpha));
    (atom0, atoms, prop::collection::vec(piece, 0..2)).prop_map(|(atom_at_zero, atoms, pieces)| {
        // keep pieces disjoint by shifting the second past the first
        let mut shifted = Vec::new();
        let mut edge = 0.0f64;
        for mut p in pieces {
            let w = p.hi - p.lo;
            if p.lo < edge {
                p.hi = edge + w;
                p.lo = edge;
            }
            edge = p.hi;
            shifted.push(p);
        }
        RadialMeasure {
            atom_at_zero,
            atoms,
            pieces: shifted,
        }
    })
}

fn arb_halfplane() -> impl Strategy<Value = HalfPlaneMeasure> {
    let atoms = prop::collection::vec(
        ((0.0..50.0f64, -50.0..50.0f64), 0.0..10.0f64),
        0..5,
    );
    (atoms, any::<bool>(), arb_radial(), -4.0..0.0f64, 0.1..8.0f64).prop_map(
        |(atoms, boundary, radial, y_lo, y_len)| {
            let mut m = HalfPlaneMeasure::from_atoms(
                atoms
                    .into_iter()
                    .map(|((re, im), mass)| (Complex64::new(re, im), mass))
                    .collect(),
            );
            m.include_boundary_atoms = boundary;
            m.components
                .push(carleson_lab::measure::DensityComponent::Product {
                    radial,
                    y_lo,
                    y_hi: y_lo + y_len,
                    scale: 1.0,
                });
            m
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn radial_specs_round_trip(nu in arb_radial()) {
        prop_assume!(nu.validate().is_ok());
        let spec = ParsedSpec::Radial(nu);
        let text = emit(&spec).unwrap();
        prop_assert_eq!(parse_spec_str(&text).unwrap(), spec.clone());
        // emission is idempotent, so file diffs are byte-stable
        prop_assert_eq!(emit(&parse_spec_str(&text).unwrap()).unwrap(), text);
    }

    #[test]
    fn halfplane_specs_round_trip(mu in arb_halfplane()) {
        prop_assume!(mu.validate().is_ok());
        let spec = ParsedSpec::HalfPlane(mu);
        let text = emit(&spec).unwrap();
        prop_assert_eq!(parse_spec_str(&text).unwrap(), spec);
    }

    #[test]
    fn system_specs_round_trip(rows in prop::collection::vec(
        ((-100.0..-0.01f64, -50.0..50.0f64), (-5.0..5.0f64, -5.0..5.0f64)), 0..8)
    ) {
        let modes: Vec<(Complex64, Complex64)> = rows
            .into_iter()
            .map(|((lr, li), (br, bi))| (Complex64::new(lr, li), Complex64::new(br, bi)))
            .collect();
        let spec = ParsedSpec::System(modes);
        let text = emit(&spec).unwrap();
        prop_assert_eq!(parse_spec_str(&text).unwrap(), spec);
    }
}
