//! Randomized robustness sweeps beyond the acceptance sizes: wider shape
//! ranges, rank-deficient correlations, and many seeds.

mod common;

use common::{correlation_by_loops, jacobi_eigenvalues, random_orthonormal, random_snapshots};
use paramkl::factorization::{
    cholesky_factor, cons_transport, square_root_factor, unitary_equivalence, Factor, FactorKind,
};
use paramkl::rng::Xoshiro256PlusPlus;
use paramkl::spectral::decompose;
use paramkl::tensor::{tt_decompose, tt_error_bound, tt_reconstruct, FullTensor};

#[test]
fn decompose_tracks_the_oracle_across_shapes() {
    let mut worst = 0.0f64;
    for seed in 0..150u64 {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed * 7 + 1);
        let n = 2 + (rng.next_u64() % 60) as usize;
        let m = 2 + (rng.next_u64() % 60) as usize;
        let s = random_snapshots(n, m, 90_000 + seed);
        let sd = decompose(&s);
        sd.verify().unwrap();
        sd.verify_against(&s).unwrap();
        let oracle = jacobi_eigenvalues(&correlation_by_loops(&s));
        let scale = sd.eigenvalues().first().copied().unwrap_or(0.0).max(1e-300);
        for (k, &lambda) in sd.eigenvalues().iter().enumerate() {
            worst = worst.max((lambda - oracle[k]).abs() / scale);
        }
    }
    assert!(worst <= 1e-10, "worst spectrum deviation {worst:.3e}");
}

#[test]
fn factor_equivalence_survives_rank_deficiency() {
    // m < n makes the correlation singular; the shared rank cutoff must
    // keep cholesky, square-root, and rotated user factors consistent.
    let mut worst = 0.0f64;
    for seed in 0..150u64 {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed * 13 + 5);
        let n = 2 + (rng.next_u64() % 28) as usize;
        let m = 2 + (rng.next_u64() % 28) as usize;
        let s = random_snapshots(n, m, 70_000 + seed);
        let c = s.correlation();
        let b1 = cholesky_factor(&c).unwrap();
        let b2 = square_root_factor(&c).unwrap();
        let x = unitary_equivalence(&b1, &b2).unwrap();
        worst = worst.max(x.residual());

        let q = random_orthonormal(n, n, &mut rng);
        let b3 = Factor::from_parts(q.dot(&b2.matrix()), FactorKind::User);
        let x2 = unitary_equivalence(&b2, &b3).unwrap();
        worst = worst.max(x2.residual());

        let sd = decompose(&s);
        let h = cons_transport(&b2, &sd).unwrap();
        let hth = h.t().dot(&h);
        for i in 0..sd.rank() {
            for j in 0..sd.rank() {
                let target = if i == j { 1.0 } else { 0.0 };
                assert!((hth[[i, j]] - target).abs() <= 1e-8, "seed {seed}");
            }
        }
    }
    assert!(worst <= 1e-8, "worst equivalence residual {worst:.3e}");
}

#[test]
fn tt_bound_holds_under_aggressive_truncation() {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(424242);
    for trial in 0..300 {
        let order = 2 + (rng.next_u64() % 4) as usize;
        let dims: Vec<usize> = (0..order).map(|_| 2 + (rng.next_u64() % 6) as usize).collect();
        let len: usize = dims.iter().product();
        let data: Vec<f64> = (0..len).map(|_| rng.next_normal()).collect();
        let tensor = FullTensor::new(dims, data).unwrap();
        let tol = rng.next_f64();
        let cap = 1 + (rng.next_u64() % 6) as usize;
        let (tt, log) = tt_decompose(&tensor, tol, Some(cap)).unwrap();
        let back = tt_reconstruct(&tt).unwrap();
        let err: f64 = tensor
            .data()
            .iter()
            .zip(back.data().iter())
            .map(|(&a, &b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        let bound = tt_error_bound(&log);
        assert!(err <= bound + 1e-10, "trial {trial}: {err} vs {bound}");
    }
}
