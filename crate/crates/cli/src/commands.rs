//! Implementations of the subcommands; each one loads, calls a single
//! library operation, and saves.

use std::path::Path;

use ndarray::Array1;

use paramkl::error::{Error, Result};
use paramkl::fields::spd_field_reduce_with;
use paramkl::io;
use paramkl::kernel::{feature_factorize, nystrom_eigensolve, FeatureMapSamples, KernelFunction};
use paramkl::model::ParameterGrid;
use paramkl::report::SpectrumReport;
use paramkl::spectral::{decompose_with, truncate as truncate_model, DecomposeOptions, TruncationRule};
use paramkl::stationary::{spectral_density, synthesize_realizations, StationaryKernel1D};
use paramkl::tensor;

use crate::logging::{echo_params, log, Level};

pub fn decompose(input: &Path, out: &Path, cutoff: f64) -> Result<()> {
    echo_params("decompose", &[("cutoff", io::format_float(cutoff))]);
    let (snapshots, name) = io::load_snapshots(input)?;
    log(Level::Info, &format!("loaded '{name}': {}×{}", snapshots.state_dim(), snapshots.sample_count()));
    let opts = DecomposeOptions {
        rank_cutoff: cutoff,
        ..Default::default()
    };
    let data = decompose_with(&snapshots, &opts);
    let mut model = truncate_model(&data, TruncationRule::TailEnergy(0.0));
    model.set_source_name(&name);
    io::save_model(out, &name, &model)?;
    log(Level::Info, &format!("rank {}", model.truncation_rank()));
    Ok(())
}

pub fn truncate_cmd_rule(rank: Option<usize>, tol: Option<f64>) -> Result<TruncationRule> {
    match (rank, tol) {
        (Some(n), None) => Ok(TruncationRule::Rank(n)),
        (None, Some(t)) => Ok(TruncationRule::TailEnergy(t)),
        _ => Err(Error::InvalidInput(
            "exactly one of --rank and --tol is required".into(),
        )),
    }
}

pub fn truncate(model_dir: &Path, rank: Option<usize>, tol: Option<f64>, out: &Path) -> Result<()> {
    let mut params: Vec<(&str, String)> = Vec::new();
    if let Some(n) = rank {
        params.push(("rank", n.to_string()));
    }
    if let Some(t) = tol {
        params.push(("tol", io::format_float(t)));
    }
    echo_params("truncate", &params);
    let rule = truncate_cmd_rule(rank, tol)?;
    let (model, name) = io::load_model(model_dir)?;
    let reduced = model.retruncate(rule);
    if reduced.was_clamped() {
        log(Level::Warn, "requested rank exceeds available rank; clamped");
    }
    io::save_model(out, &name, &reduced)
}

pub fn eval(model_dir: &Path, index: usize, out: Option<&Path>) -> Result<()> {
    echo_params("eval", &[("index", index.to_string())]);
    let (model, _) = io::load_model(model_dir)?;
    let vector = model.evaluate(index)?;
    match out {
        Some(path) => io::write_vector_csv(path, vector.view()),
        None => {
            let mut text = String::new();
            for &x in vector.iter() {
                text.push_str(&io::format_float(x));
                text.push('\n');
            }
            print!("{text}");
            Ok(())
        }
    }
}

fn builtin_kernel(name: &str, scale: f64) -> Result<KernelFunction> {
    match name {
        "brownian" => Ok(KernelFunction::brownian()),
        "exp" => Ok(KernelFunction::exponential(scale)),
        "gauss" => Ok(KernelFunction::gaussian(scale)),
        other => Err(Error::InvalidInput(format!(
            "unknown kernel '{other}' (expected brownian, exp, gauss, or snapshot)"
        ))),
    }
}

pub fn kernel_eig(
    kernel_name: &str,
    scale: f64,
    input: Option<&Path>,
    points: Option<usize>,
    count: usize,
    out: &Path,
) -> Result<()> {
    echo_params(
        "kernel-eig",
        &[
            ("scale", io::format_float(scale)),
            ("count", count.to_string()),
        ],
    );
    let (grid, kernel) = match (input, kernel_name) {
        (Some(dir), "snapshot") => {
            let (snapshots, _) = io::load_snapshots(dir)?;
            let kernel = KernelFunction::from_snapshots(&snapshots);
            (snapshots.grid().clone(), kernel)
        }
        (Some(dir), name) => {
            let (snapshots, _) = io::load_snapshots(dir)?;
            (snapshots.grid().clone(), builtin_kernel(name, scale)?)
        }
        (None, "snapshot") => {
            return Err(Error::InvalidInput(
                "--kernel snapshot requires --input".into(),
            ))
        }
        (None, name) => {
            let m = points.ok_or_else(|| {
                Error::InvalidInput("either --input or --points is required".into())
            })?;
            (ParameterGrid::midpoint_unit_interval(m)?, builtin_kernel(name, scale)?)
        }
    };
    let eigen = nystrom_eigensolve(&kernel, &grid, count)?;
    if eigen.clamped() > 0 {
        log(
            Level::Warn,
            &format!("{} slightly negative eigenvalues clamped to zero", eigen.clamped()),
        );
    }
    std::fs::create_dir_all(out)?;
    io::write_vector_csv(
        &out.join("eigenvalues.csv"),
        Array1::from(eigen.eigenvalues().to_vec()).view(),
    )?;
    io::write_matrix_csv(&out.join("functions.csv"), eigen.functions())?;
    io::write_matrix_csv(&out.join("points.csv"), grid.points())?;
    io::write_vector_csv(&out.join("weights.csv"), grid.weights())?;
    Ok(())
}

pub fn feature(features_dir: &Path, snapshots_dir: &Path, out: &Path) -> Result<()> {
    echo_params("feature", &[]);
    // Feature samples use the snapshot convention: column ℓ is g(·, x_ℓ),
    // the grid weights are the ν quadrature.
    let (feature_set, _) = io::load_snapshots(features_dir)?;
    let features = FeatureMapSamples::new(
        feature_set.values().to_owned(),
        feature_set.grid().weights().to_owned(),
    )?;
    let (snapshots, _) = io::load_snapshots(snapshots_dir)?;
    let factorization = feature_factorize(&features, snapshots.grid())?;
    let table = factorization.kl_table(&snapshots)?;
    std::fs::create_dir_all(out)?;
    io::write_matrix_csv(&out.join("kernel.csv"), factorization.kernel_matrix())?;
    io::write_vector_csv(
        &out.join("eigenvalues.csv"),
        Array1::from(factorization.eigenvalues().to_vec()).view(),
    )?;
    io::write_matrix_csv(&out.join("parameter_modes.csv"), factorization.parameter_modes())?;
    io::write_matrix_csv(&out.join("chi_modes.csv"), factorization.chi_modes())?;
    io::write_matrix_csv(&out.join("spatial_modes.csv"), table.spatial_modes.view())?;
    Ok(())
}

pub fn stationary(kernel_name: &str, scale: f64, length: f64, points: usize, out: &Path) -> Result<()> {
    echo_params(
        "stationary",
        &[
            ("scale", io::format_float(scale)),
            ("length", io::format_float(length)),
            ("points", points.to_string()),
        ],
    );
    let kernel = match kernel_name {
        "exp" => StationaryKernel1D::periodized_exponential(scale, length, points)?,
        "gauss" => StationaryKernel1D::periodized_gaussian(scale, length, points)?,
        "const" => StationaryKernel1D::constant(scale, length, points)?,
        other => {
            return Err(Error::InvalidInput(format!(
                "unknown stationary kernel '{other}' (expected exp, gauss, or const)"
            )))
        }
    };
    let density = spectral_density(&kernel);
    if !density.is_admissible() {
        log(
            Level::Warn,
            &format!(
                "kernel is not admissible on this grid: clamped fraction {:.3e}",
                density.clamped_fraction()
            ),
        );
    }
    io::save_density(out, &density)
}

pub fn synthesize(density_path: &Path, count: usize, seed: u64, out: &Path) -> Result<()> {
    echo_params(
        "synthesize",
        &[("count", count.to_string()), ("seed", seed.to_string())],
    );
    let density = io::load_density(density_path)?;
    let samples = synthesize_realizations(&density, count, seed)?;
    io::write_matrix_csv(out, samples.view())
}

pub fn tt_compress(input: &Path, tol: f64, max_rank: Option<usize>, out: &Path) -> Result<()> {
    let mut params = vec![("tol", io::format_float(tol))];
    if let Some(r) = max_rank {
        params.push(("max_rank", r.to_string()));
    }
    echo_params("tt compress", &params);
    let (tensor_data, name) = io::load_tensor(input)?;
    let (tt, trunc_log) = tensor::tt_decompose(&tensor_data, tol, max_rank)?;
    log(
        Level::Info,
        &format!(
            "ranks {:?}, error bound {}",
            tt.ranks(),
            io::format_float(tensor::tt_error_bound(&trunc_log))
        ),
    );
    io::save_tt(out, &name, &tt)
}

pub fn tt_eval(tt_dir: &Path, index_spec: &str) -> Result<()> {
    let index: Vec<usize> = index_spec
        .split(',')
        .map(|part| {
            part.trim()
                .parse::<usize>()
                .map_err(|_| Error::InvalidInput(format!("bad index component '{part}'")))
        })
        .collect::<Result<_>>()?;
    echo_params("tt eval", &[("index", index_spec.to_string())]);
    let (tt, _) = io::load_tt(tt_dir)?;
    let value = tensor::tt_eval(&tt, &index)?;
    println!("{}", io::format_float(value));
    Ok(())
}

pub fn tt_reconstruct(tt_dir: &Path, out: &Path) -> Result<()> {
    echo_params("tt reconstruct", &[]);
    let (tt, name) = io::load_tt(tt_dir)?;
    let full = tensor::tt_reconstruct(&tt)?;
    io::save_tensor(out, &name, &full)
}

pub fn spd_field(input: &Path, rank: usize, center: bool, out: &Path) -> Result<()> {
    echo_params(
        "spd-field",
        &[("rank", rank.to_string()), ("center", center.to_string())],
    );
    let (field, grid, name) = io::load_spd_field(input)?;
    let reduced = spd_field_reduce_with(&field, &grid, rank, center)?;
    io::save_spd_model(out, &name, &reduced)
}

pub fn report(model_dir: &Path, out: &Path, svg: Option<&Path>) -> Result<()> {
    echo_params("report", &[]);
    let (model, _) = io::load_model(model_dir)?;
    let report = SpectrumReport::from_eigenvalues(model.spectral().eigenvalues())?;
    std::fs::write(out, report.to_csv())?;
    if let Some(svg_path) = svg {
        std::fs::write(svg_path, report.to_svg())?;
    }
    Ok(())
}
