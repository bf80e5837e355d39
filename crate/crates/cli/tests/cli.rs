//! Behavior tests for the command-line driver: exit codes, and the
//! veneer property — every subcommand produces exactly what the matching
//! library call produces.

mod common;

use std::path::Path;
use std::process::Command;

use common::{random_snapshots, scratch_dir};
use ndarray::{Array1, Array2};
use paramkl::io;
use paramkl::kernel::{nystrom_eigensolve, KernelFunction};
use paramkl::model::ParameterGrid;
use paramkl::rng::Xoshiro256PlusPlus;
use paramkl::spectral::{decompose, truncate, TruncationRule};
use paramkl::stationary::{spectral_density, synthesize_realizations, StationaryKernel1D};
use paramkl::tensor::{tt_decompose, FullTensor};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_paramkl")
}

fn run_ok(args: &[&str]) -> Vec<u8> {
    let output = Command::new(bin()).args(args).output().unwrap();
    assert!(
        output.status.success(),
        "paramkl {args:?} failed ({}):\n{}",
        output.status,
        String::from_utf8_lossy(&output.stderr)
    );
    output.stdout
}

fn exit_code(args: &[&str]) -> i32 {
    Command::new(bin())
        .args(args)
        .output()
        .unwrap()
        .status
        .code()
        .unwrap()
}

#[test]
fn exit_codes_follow_the_contract() {
    assert_eq!(exit_code(&["--help"]), 0);
    assert_eq!(exit_code(&["no-such-command"]), 1);
    assert_eq!(exit_code(&["decompose", "--bogus-flag", "x"]), 1);
    // Usage error: truncate needs exactly one of --rank/--tol.
    assert_eq!(exit_code(&["truncate", "--model", "x", "--out", "y"]), 1);
    // Data error: input directory does not exist.
    let dir = scratch_dir("exitcodes");
    let missing = dir.join("missing").display().to_string();
    let out = dir.join("out").display().to_string();
    assert_eq!(
        exit_code(&["decompose", "--input", &missing, "--out", &out]),
        2
    );
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn log_level_env_var_controls_diagnostics() {
    let dir = scratch_dir("loglevel");
    let s = random_snapshots(4, 4, 0xD9);
    io::save_snapshots(&dir.join("snaps"), "fixture", &s).unwrap();
    let run_with_log = |level: &str| -> String {
        let output = Command::new(bin())
            .env("PARAMKL_LOG", level)
            .args([
                "decompose",
                "--input",
                &dir.join("snaps").display().to_string(),
                "--out",
                &dir.join(format!("model-{level}")).display().to_string(),
            ])
            .output()
            .unwrap();
        assert!(output.status.success());
        String::from_utf8_lossy(&output.stderr).to_string()
    };
    let quiet = run_with_log("error");
    let chatty = run_with_log("info");
    // Parameters are echoed regardless; the rank line only appears at info.
    assert!(quiet.contains("[paramkl] decompose:"));
    assert!(!quiet.contains("rank"));
    assert!(chatty.contains("rank"));
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn decompose_cli_equals_library() {
    let dir = scratch_dir("veneer-decompose");
    let s = random_snapshots(7, 5, 0xD1);
    io::save_snapshots(&dir.join("snaps"), "fixture", &s).unwrap();
    run_ok(&[
        "decompose",
        "--input",
        &dir.join("snaps").display().to_string(),
        "--out",
        &dir.join("model").display().to_string(),
    ]);
    let (cli_model, _) = io::load_model(&dir.join("model")).unwrap();
    let direct = truncate(&decompose(&s), TruncationRule::TailEnergy(0.0));
    assert_eq!(
        cli_model.spectral().eigenvalues(),
        direct.spectral().eigenvalues()
    );
    assert_eq!(
        cli_model.spectral().spatial_modes(),
        direct.spectral().spatial_modes()
    );
    assert_eq!(
        cli_model.spectral().parameter_modes(),
        direct.spectral().parameter_modes()
    );
    cli_model.spectral().verify().unwrap();
    cli_model.spectral().verify_against(&s).unwrap();
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn truncate_cli_obeys_the_tail_rule() {
    let dir = scratch_dir("veneer-truncate");
    let s = random_snapshots(8, 8, 0xD2);
    io::save_snapshots(&dir.join("snaps"), "fixture", &s).unwrap();
    run_ok(&[
        "decompose",
        "--input",
        &dir.join("snaps").display().to_string(),
        "--out",
        &dir.join("model").display().to_string(),
    ]);
    run_ok(&[
        "truncate",
        "--model",
        &dir.join("model").display().to_string(),
        "--tol",
        "0.1",
        "--out",
        &dir.join("small").display().to_string(),
    ]);
    let (small, _) = io::load_model(&dir.join("small")).unwrap();
    let total: f64 =
        small.spectral().eigenvalues().iter().sum::<f64>() + small.tail_energy();
    assert!(small.tail_energy() <= 0.01 * total + 1e-15);
    // Matches the library result exactly.
    let direct = truncate(&decompose(&s), TruncationRule::TailEnergy(0.1));
    assert_eq!(
        small.spectral().eigenvalues(),
        direct.spectral().eigenvalues()
    );
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn eval_cli_prints_the_library_vector() {
    let dir = scratch_dir("veneer-eval");
    let s = random_snapshots(5, 6, 0xD3);
    io::save_snapshots(&dir.join("snaps"), "fixture", &s).unwrap();
    run_ok(&[
        "decompose",
        "--input",
        &dir.join("snaps").display().to_string(),
        "--out",
        &dir.join("model").display().to_string(),
    ]);
    let stdout = run_ok(&[
        "eval",
        "--model",
        &dir.join("model").display().to_string(),
        "--index",
        "3",
    ]);
    let direct = truncate(&decompose(&s), TruncationRule::TailEnergy(0.0))
        .evaluate(3)
        .unwrap();
    let expected: String = direct
        .iter()
        .map(|&x| format!("{}\n", io::format_float(x)))
        .collect();
    assert_eq!(String::from_utf8(stdout).unwrap(), expected);
    // Out-of-range index is a data error.
    assert_eq!(
        exit_code(&[
            "eval",
            "--model",
            &dir.join("model").display().to_string(),
            "--index",
            "99",
        ]),
        2
    );
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn kernel_eig_cli_equals_library() {
    let dir = scratch_dir("veneer-kerneig");
    run_ok(&[
        "kernel-eig",
        "--kernel",
        "brownian",
        "--points",
        "60",
        "--count",
        "4",
        "--out",
        &dir.join("eig").display().to_string(),
    ]);
    let grid = ParameterGrid::midpoint_unit_interval(60).unwrap();
    let direct = nystrom_eigensolve(&KernelFunction::brownian(), &grid, 4).unwrap();
    let eigenvalues = io::read_vector_csv(&dir.join("eig/eigenvalues.csv"), Some(4)).unwrap();
    for (a, b) in eigenvalues.iter().zip(direct.eigenvalues().iter()) {
        assert_eq!(a.to_bits(), b.to_bits());
    }
    let functions = io::read_matrix_csv(&dir.join("eig/functions.csv"), Some((60, 4))).unwrap();
    assert_eq!(functions, direct.functions().to_owned());
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn stationary_and_synthesize_cli_equal_library() {
    let dir = scratch_dir("veneer-stationary");
    let density_path = dir.join("density.csv").display().to_string();
    run_ok(&[
        "stationary",
        "--kernel",
        "exp",
        "--scale",
        "1.0",
        "--length",
        "40",
        "--points",
        "128",
        "--out",
        &density_path,
    ]);
    let kernel = StationaryKernel1D::periodized_exponential(1.0, 40.0, 128).unwrap();
    let direct_density = spectral_density(&kernel);
    let loaded = io::load_density(Path::new(&density_path)).unwrap();
    for (a, b) in loaded.values().iter().zip(direct_density.values().iter()) {
        assert_eq!(a.to_bits(), b.to_bits());
    }

    let samples_path = dir.join("samples.csv").display().to_string();
    run_ok(&[
        "synthesize",
        "--density",
        &density_path,
        "--count",
        "7",
        "--seed",
        "99",
        "--out",
        &samples_path,
    ]);
    let direct_samples = synthesize_realizations(&direct_density, 7, 99).unwrap();
    let loaded_samples =
        io::read_matrix_csv(Path::new(&samples_path), Some((7, 128))).unwrap();
    assert_eq!(loaded_samples, direct_samples);
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn tt_cli_round_trip_equals_library() {
    let dir = scratch_dir("veneer-tt");
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(0xD4);
    let data: Vec<f64> = (0..120).map(|_| rng.next_normal()).collect();
    let tensor = FullTensor::new(vec![4, 5, 6], data).unwrap();
    io::save_tensor(&dir.join("tensor"), "t", &tensor).unwrap();
    run_ok(&[
        "tt",
        "compress",
        "--input",
        &dir.join("tensor").display().to_string(),
        "--tol",
        "0",
        "--out",
        &dir.join("tt").display().to_string(),
    ]);
    let (cli_tt, _) = io::load_tt(&dir.join("tt")).unwrap();
    let (direct_tt, _) = tt_decompose(&tensor, 0.0, None).unwrap();
    for (a, b) in cli_tt.cores().iter().zip(direct_tt.cores().iter()) {
        assert_eq!(a, b);
    }
    let stdout = run_ok(&[
        "tt",
        "eval",
        "--tt",
        &dir.join("tt").display().to_string(),
        "--index",
        "1,2,3",
    ]);
    let direct_value = paramkl::tensor::tt_eval(&direct_tt, &[1, 2, 3]).unwrap();
    assert_eq!(
        String::from_utf8(stdout).unwrap().trim(),
        io::format_float(direct_value)
    );
    run_ok(&[
        "tt",
        "reconstruct",
        "--tt",
        &dir.join("tt").display().to_string(),
        "--out",
        &dir.join("back").display().to_string(),
    ]);
    let (back, _) = io::load_tensor(&dir.join("back")).unwrap();
    let direct_back = paramkl::tensor::tt_reconstruct(&direct_tt).unwrap();
    assert_eq!(back, direct_back);
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn spd_field_cli_equals_library() {
    let dir = scratch_dir("veneer-spd");
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(0xD5);
    let mut mats = Vec::new();
    for _ in 0..6 {
        let a = Array2::from_shape_fn((3, 4), |_| rng.next_normal());
        let mut c = a.view().dot(&a.t());
        for i in 0..3 {
            c[[i, i]] += 0.6;
        }
        mats.push(c);
    }
    let field = paramkl::fields::SpdFieldSet::new(mats).unwrap();
    let points = Array2::from_shape_fn((6, 1), |(j, _)| j as f64);
    let grid = ParameterGrid::with_uniform_weights(points).unwrap();
    io::save_spd_field(&dir.join("spd"), "fixture", &field, &grid).unwrap();
    run_ok(&[
        "spd-field",
        "--input",
        &dir.join("spd").display().to_string(),
        "--rank",
        "2",
        "--out",
        &dir.join("reduced").display().to_string(),
    ]);
    let (cli_reduced, _) = io::load_spd_model(&dir.join("reduced")).unwrap();
    let direct = paramkl::fields::spd_field_reduce(&field, &grid, 2).unwrap();
    assert_eq!(cli_reduced.rank(), direct.rank());
    for j in 0..6 {
        let a = cli_reduced.evaluate(j).unwrap();
        let b = direct.evaluate(j).unwrap();
        for (x, y) in a.iter().zip(b.iter()) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn report_cli_is_monotone_and_matches_library() {
    let dir = scratch_dir("veneer-report");
    let s = random_snapshots(6, 6, 0xD6);
    io::save_snapshots(&dir.join("snaps"), "fixture", &s).unwrap();
    run_ok(&[
        "decompose",
        "--input",
        &dir.join("snaps").display().to_string(),
        "--out",
        &dir.join("model").display().to_string(),
    ]);
    run_ok(&[
        "report",
        "--model",
        &dir.join("model").display().to_string(),
        "--out",
        &dir.join("spectrum.csv").display().to_string(),
        "--svg",
        &dir.join("spectrum.svg").display().to_string(),
    ]);
    let text = std::fs::read_to_string(dir.join("spectrum.csv")).unwrap();
    let direct = paramkl::report::SpectrumReport::from_eigenvalues(
        decompose(&s).eigenvalues(),
    )
    .unwrap();
    assert_eq!(text, direct.to_csv());
    let mut last = 0.0f64;
    for line in text.lines() {
        let cumulative: f64 = line.split(',').nth(3).unwrap().parse().unwrap();
        assert!(cumulative >= last);
        last = cumulative;
    }
    assert!((last - 1.0).abs() <= 1e-12);
    let svg = std::fs::read_to_string(dir.join("spectrum.svg")).unwrap();
    assert_eq!(svg, direct.to_svg());
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn feature_cli_equals_library() {
    let dir = scratch_dir("veneer-feature");
    let s = random_snapshots(5, 7, 0xD7);
    io::save_snapshots(&dir.join("snaps"), "fixture", &s).unwrap();
    // Feature samples in the snapshot convention: g = valuesᵀ, ν ≡ 1.
    let g = s.values().t().to_owned();
    let x_points = Array2::from_shape_fn((5, 1), |(j, _)| j as f64);
    let x_grid = ParameterGrid::new(x_points, Array1::ones(5)).unwrap();
    let feature_set = paramkl::model::SnapshotSet::new(g.clone(), x_grid, None).unwrap();
    io::save_snapshots(&dir.join("features"), "features", &feature_set).unwrap();
    run_ok(&[
        "feature",
        "--features",
        &dir.join("features").display().to_string(),
        "--snapshots",
        &dir.join("snaps").display().to_string(),
        "--out",
        &dir.join("out").display().to_string(),
    ]);
    let features =
        paramkl::kernel::FeatureMapSamples::new(g, Array1::ones(5)).unwrap();
    let direct = paramkl::kernel::feature_factorize(&features, s.grid()).unwrap();
    let eigenvalues =
        io::read_vector_csv(&dir.join("out/eigenvalues.csv"), Some(direct.rank())).unwrap();
    for (a, b) in eigenvalues.iter().zip(direct.eigenvalues().iter()) {
        assert_eq!(a.to_bits(), b.to_bits());
    }
    let chi = io::read_matrix_csv(&dir.join("out/chi_modes.csv"), Some((5, direct.rank())))
        .unwrap();
    assert_eq!(chi, direct.chi_modes().to_owned());
    std::fs::remove_dir_all(dir).ok();
}
