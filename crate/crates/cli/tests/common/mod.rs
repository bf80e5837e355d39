//! Shared helpers for the integration suites: an independent Jacobi
//! eigensolver used as an oracle, and small fixture builders.

#![allow(dead_code)]

use ndarray::{Array1, Array2};
use paramkl::model::{ParameterGrid, SnapshotSet};
use paramkl::rng::Xoshiro256PlusPlus;

/// Cyclic Jacobi eigenvalue iteration for symmetric matrices. Slow but
/// simple and very accurate; deliberately independent of the library's
/// eigensolver so it can serve as an oracle.
pub fn jacobi_eigenvalues(matrix: &Array2<f64>) -> Vec<f64> {
    let n = matrix.nrows();
    assert_eq!(n, matrix.ncols());
    let mut a = matrix.clone();
    let scale = a.iter().fold(0.0f64, |m, &x| m.max(x.abs())).max(f64::MIN_POSITIVE);

    for _sweep in 0..100 {
        let mut off = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                off = off.max(a[[i, j]].abs());
            }
        }
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[[p, q]];
                if apq.abs() <= 1e-18 * scale {
                    continue;
                }
                let theta = (a[[q, q]] - a[[p, p]]) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (theta * theta + 1.0).sqrt())
                } else {
                    -1.0 / (-theta + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[[k, p]];
                    let akq = a[[k, q]];
                    a[[k, p]] = c * akp - s * akq;
                    a[[k, q]] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[[p, k]];
                    let aqk = a[[q, k]];
                    a[[p, k]] = c * apk - s * aqk;
                    a[[q, k]] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut values: Vec<f64> = (0..n).map(|i| a[[i, i]]).collect();
    values.sort_by(|x, y| y.partial_cmp(x).unwrap());
    values
}

/// Random matrix with orthonormal columns via modified Gram-Schmidt.
pub fn random_orthonormal(rows: usize, cols: usize, rng: &mut Xoshiro256PlusPlus) -> Array2<f64> {
    assert!(cols <= rows);
    let mut q = Array2::<f64>::zeros((rows, cols));
    for c in 0..cols {
        let mut v = Array1::from_shape_fn(rows, |_| rng.next_normal());
        for prev in 0..c {
            let proj = q.column(prev).dot(&v);
            for i in 0..rows {
                v[i] -= proj * q[[i, prev]];
            }
        }
        // Second pass restores orthogonality lost to cancellation.
        for prev in 0..c {
            let proj = q.column(prev).dot(&v);
            for i in 0..rows {
                v[i] -= proj * q[[i, prev]];
            }
        }
        let norm = v.iter().map(|&x| x * x).sum::<f64>().sqrt();
        for i in 0..rows {
            q[[i, c]] = v[i] / norm;
        }
    }
    q
}

pub fn random_snapshots(n: usize, m: usize, seed: u64) -> SnapshotSet {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    let values = Array2::from_shape_fn((n, m), |_| rng.next_normal());
    let points = Array2::from_shape_fn((m, 1), |(j, _)| j as f64);
    let weights = Array1::from_shape_fn(m, |_| 0.05 + rng.next_f64());
    SnapshotSet::new(values, ParameterGrid::new(points, weights).unwrap(), None).unwrap()
}

/// Weighted correlation assembled with plain loops (oracle path).
pub fn correlation_by_loops(s: &SnapshotSet) -> Array2<f64> {
    let n = s.state_dim();
    let mut c = Array2::<f64>::zeros((n, n));
    for j in 0..s.sample_count() {
        let w = s.grid().weights()[j];
        for a in 0..n {
            for b in 0..n {
                c[[a, b]] += w * s.values()[[a, j]] * s.values()[[b, j]];
            }
        }
    }
    c
}

pub fn scratch_dir(tag: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!(
        "paramkl-it-{tag}-{}-{:x}",
        std::process::id(),
        std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .unwrap()
            .as_nanos()
    ));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}
