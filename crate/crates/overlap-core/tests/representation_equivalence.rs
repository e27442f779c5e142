//! Cross-representation checks: the closed forms, the biorthogonal sums, the
//! numeric factorization, and the quadrature oracle must all describe the
//! same objects.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use overlap_core::biorthogonal::{
    inner_product_quad, ldu_closed, ldu_numeric, moment_matrix, partition_zprime, ConditionPoint,
};
use overlap_core::kernels::{
    d11, d11_bruteforce, kappa_closed, kappa_sum, BruteForceConfig, SplitPoint,
};
use overlap_core::scaled::ScaledComplex;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn disk_point(rng: &mut ChaCha8Rng, radius: f64) -> Complex64 {
    loop {
        let z = c(
            rng.random_range(-radius..radius),
            rng.random_range(-radius..radius),
        );
        if z.norm() <= radius {
            return z;
        }
    }
}

fn rel_gap(a: &ScaledComplex, b: &ScaledComplex) -> f64 {
    let diff = a.sub(b);
    if diff.is_zero() {
        return 0.0;
    }
    (diff.log_abs() - a.log_abs()).exp()
}

#[test]
fn kappa_closed_equals_kappa_sum_on_random_tuples() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
    for &n in &[2usize, 5, 10, 30] {
        let radius = (n as f64).sqrt();
        for trial in 0..50 {
            // Alternate physical and fully split condition points.
            let cond = if trial % 2 == 0 {
                ConditionPoint::physical(disk_point(&mut rng, radius))
            } else {
                ConditionPoint::new(disk_point(&mut rng, radius), disk_point(&mut rng, radius))
            };
            let x_bar = disk_point(&mut rng, radius);
            let y = disk_point(&mut rng, radius);
            let (Ok(a), Ok(b)) = (
                kappa_sum(n, x_bar, y, &cond),
                kappa_closed(n, x_bar, y, &cond),
            ) else {
                // Degenerate split condition points are legitimately rejected.
                continue;
            };
            let gap = rel_gap(&a, &b);
            assert!(
                gap <= 1e-9,
                "N={n} trial={trial}: representations differ by {gap:e}"
            );
        }
    }
}

#[test]
fn closed_ldu_matches_numeric_ldu() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0002);
    for trial in 0..50 {
        let cond = ConditionPoint::physical(disk_point(&mut rng, 6.0));
        let n = rng.random_range(2usize..=50);
        let closed = ldu_closed(n, &cond).unwrap();
        let numeric = ldu_numeric(&moment_matrix(n, &cond)).unwrap();
        for m in 0..n {
            let a = closed.d[m];
            let b = numeric.d[m];
            let gap = rel_gap(&b, &a);
            assert!(gap <= 1e-11, "trial={trial} n={n} d[{m}]: gap {gap:e}");
        }
        for m in 0..n - 1 {
            let dl = (closed.l_sub[m] - numeric.l_sub[m]).norm();
            let du = (closed.u_super[m] - numeric.u_super[m]).norm();
            let scale = numeric.l_sub[m].norm().max(1e-30);
            assert!(dl / scale <= 1e-11, "trial={trial} l_sub[{m}]: {dl:e}");
            assert!(du / scale <= 1e-11, "trial={trial} u_super[{m}]: {du:e}");
        }
    }
}

#[test]
fn determinant_equals_norm_product_up_to_n_30() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0003);
    for _ in 0..20 {
        let cond = ConditionPoint::physical(disk_point(&mut rng, 4.0));
        let n = rng.random_range(2usize..=30);
        let det = moment_matrix(n, &cond).det();
        let mut prod = ScaledComplex::ONE;
        for d in &ldu_closed(n, &cond).unwrap().d {
            prod = prod.mul(d);
        }
        let gap = rel_gap(&det, &prod);
        assert!(gap <= 1e-11, "n={n}: det vs Πd gap {gap:e}");
        // and Z'_n carries the same product times n!
        let zp = partition_zprime(n, &cond).unwrap();
        let expect = prod.mul_exp(overlap_core::specfun::ln_factorial(n));
        assert!(rel_gap(&zp, &expect) <= 1e-12);
    }
}

#[test]
fn biorthogonality_by_quadrature() {
    let conds = [
        ConditionPoint::physical(c(0.0, 0.0)),
        ConditionPoint::physical(c(0.8, -0.6)),
        ConditionPoint::physical(c(-1.3, 0.4)),
    ];
    for cond in &conds {
        let n = 5usize;
        let radius = (n as f64 + 1.0).sqrt() + 8.0;
        let d = ldu_closed(n + 1, cond).unwrap().d;
        for i in 0..=2usize {
            for j in 0..=2usize {
                let got = inner_product_quad(i, j, cond, radius, 48, 1e-9).unwrap();
                let expect = if i == j { d[j].value() } else { c(0.0, 0.0) };
                let tol = 1e-6 * d[i.max(j)].value().norm().max(1.0);
                assert!(
                    (got - expect).norm() < tol,
                    "cond={cond:?} ⟨P_{i}, Q_{j}⟩ = {got} vs {expect}"
                );
            }
        }
    }
}

#[test]
fn bruteforce_matches_determinantal_d11_at_n3_k2() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0004);
    let cfg = BruteForceConfig::default();
    for trial in 0..3 {
        let l1 = disk_point(&mut rng, 1.2);
        let l2 = disk_point(&mut rng, 1.2);
        if (l1 - l2).norm() < 0.2 {
            continue;
        }
        let pts = [SplitPoint::physical(l1), SplitPoint::physical(l2)];
        let integral = d11_bruteforce(3, &pts, &cfg).unwrap();
        let exact = d11(3, &pts).unwrap().value();
        assert!(
            (integral - exact).norm() <= 1e-6 * exact.norm().max(1e-12),
            "trial={trial}: {integral} vs {exact}"
        );
    }
}

#[test]
fn d11_k1_prefactor_matches_bruteforce() {
    // Determinant-free k = 1 value against the N − k = 1 integral.
    let lam = c(0.45, -0.35);
    let got = d11_bruteforce(2, &[SplitPoint::physical(lam)], &BruteForceConfig::default()).unwrap();
    let exact = d11(2, &[SplitPoint::physical(lam)]).unwrap().value();
    assert!((got - exact).norm() <= 1e-7 * exact.norm());
}
