//! Property tests for the structural invariants of the analysis chain.

use ndarray::{Array1, Array2};
use proptest::prelude::*;

use paramkl::fields::{matrix_exp_sym, matrix_log_spd, pack_symmetric, unpack_symmetric};
use paramkl::model::{ParameterGrid, SnapshotSet};
use paramkl::spectral::{decompose, truncate, TruncationRule};
use paramkl::tensor::{tt_decompose, tt_error_bound, tt_reconstruct, FullTensor};

fn snapshot_set_strategy() -> impl Strategy<Value = SnapshotSet> {
    ((1usize..7, 1usize..7), any::<u64>()).prop_map(|((n, m), seed)| {
        let mut rng = paramkl::rng::Xoshiro256PlusPlus::seed_from_u64(seed);
        let values = Array2::from_shape_fn((n, m), |_| rng.next_normal());
        let points = Array2::from_shape_fn((m, 1), |(j, _)| j as f64);
        let weights = Array1::from_shape_fn(m, |_| 0.05 + rng.next_f64());
        SnapshotSet::new(values, ParameterGrid::new(points, weights).unwrap(), None).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn adjointness_identity(s in snapshot_set_strategy(), seed in any::<u64>()) {
        let mut rng = paramkl::rng::Xoshiro256PlusPlus::seed_from_u64(seed);
        let u = Array1::from_shape_fn(s.state_dim(), |_| rng.next_normal());
        let phi = Array1::from_shape_fn(s.sample_count(), |_| rng.next_normal());
        let lhs = s.grid().inner(s.apply_map(u.view()).unwrap().view(), phi.view());
        let rhs = u.dot(&s.apply_adjoint(phi.view()).unwrap());
        let scale = lhs.abs().max(rhs.abs()).max(1.0);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * scale);
    }

    #[test]
    fn correlation_trace_equals_weighted_energy(s in snapshot_set_strategy()) {
        let c = s.correlation();
        let direct: f64 = (0..s.sample_count())
            .map(|j| s.grid().weights()[j] * s.snapshot(j).iter().map(|&x| x * x).sum::<f64>())
            .sum();
        prop_assert!((c.trace() - direct).abs() <= 1e-12 * direct.max(1e-300));
    }

    #[test]
    fn spectrum_accounts_for_all_energy(s in snapshot_set_strategy(), n in 0usize..8) {
        let sd = decompose(&s);
        let rm = truncate(&sd, TruncationRule::Rank(n));
        let total: f64 = sd.eigenvalues().iter().sum();
        let kept: f64 = rm.spectral().eigenvalues().iter().sum();
        prop_assert!((kept + rm.tail_energy() - total).abs() <= 1e-10 * total.max(1e-300));
    }

    #[test]
    fn tt_bound_dominates_measured_error(
        dims in proptest::collection::vec(2usize..5, 3..5),
        seed in any::<u64>(),
        tol in 0.0f64..0.6,
    ) {
        let mut rng = paramkl::rng::Xoshiro256PlusPlus::seed_from_u64(seed);
        let len: usize = dims.iter().product();
        let data: Vec<f64> = (0..len).map(|_| rng.next_normal()).collect();
        let tensor = FullTensor::new(dims, data).unwrap();
        let (tt, log) = tt_decompose(&tensor, tol, None).unwrap();
        let back = tt_reconstruct(&tt).unwrap();
        let err: f64 = tensor
            .data()
            .iter()
            .zip(back.data().iter())
            .map(|(&a, &b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        prop_assert!(err <= tt_error_bound(&log) + 1e-10);
        prop_assert!(err <= tol * tensor.frobenius_norm() + 1e-10);
    }

    #[test]
    fn log_exp_round_trip_on_symmetric_matrices(n in 2usize..5, seed in any::<u64>()) {
        let mut rng = paramkl::rng::Xoshiro256PlusPlus::seed_from_u64(seed);
        let mut h = Array2::from_shape_fn((n, n), |_| rng.next_normal());
        let ht = h.t().to_owned();
        h += &ht;
        h.mapv_inplace(|x| 0.5 * x);
        let a = matrix_exp_sym(h.view()).unwrap();
        let back = matrix_log_spd(a.view()).unwrap();
        let scale = h.iter().fold(1.0f64, |m, &x| m.max(x.abs()));
        for (x, y) in back.iter().zip(h.iter()) {
            prop_assert!((x - y).abs() <= 1e-10 * scale);
        }
    }

    #[test]
    fn packing_isometry(n in 1usize..6, seed in any::<u64>()) {
        let mut rng = paramkl::rng::Xoshiro256PlusPlus::seed_from_u64(seed);
        let mut h = Array2::from_shape_fn((n, n), |_| rng.next_normal());
        let ht = h.t().to_owned();
        h += &ht;
        let packed = pack_symmetric(h.view());
        let frob: f64 = h.iter().map(|&x| x * x).sum::<f64>().sqrt();
        let packed_norm: f64 = packed.iter().map(|&x| x * x).sum::<f64>().sqrt();
        prop_assert!((frob - packed_norm).abs() <= 1e-14 * frob.max(1e-300));
        let back = unpack_symmetric(packed.view(), n).unwrap();
        for (x, y) in back.iter().zip(h.iter()) {
            prop_assert!((x - y).abs() <= 1e-14 * x.abs().max(1.0));
        }
    }
}
