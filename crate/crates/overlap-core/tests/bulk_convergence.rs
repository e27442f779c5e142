//! Finite-N quantities approaching their bulk limits.

use num_complex::Complex64;

use overlap_core::bulk::{bulk_convergence_probe, d12_bulk};
use overlap_core::kernels::{d12, SplitPoint};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[test]
fn d12_approaches_bulk_limit_at_origin() {
    // At z0 = 0 the bulk off-diagonal overlap is lim (1/N)·D12^{(N,2)};
    // the prefactor corrections are O(1/N).
    let pairs = [
        (c(0.2, 0.1), c(0.9, -0.4)),
        (c(-0.3, 0.5), c(0.8, 0.9)),
        (c(0.0, 0.0), c(1.4, 0.2)),
    ];
    for &(l1, l2) in &pairs {
        let pts = [SplitPoint::physical(l1), SplitPoint::physical(l2)];
        let bulk = d12_bulk(&pts).unwrap();
        let mut prev_gap = f64::INFINITY;
        for &n in &[50usize, 200] {
            let finite = d12(n, &pts).unwrap().mul_exp(-(n as f64).ln()).value();
            let gap = (finite - bulk).norm() / bulk.norm();
            assert!(gap < 2e-2, "N={n}: relative gap {gap:e}");
            assert!(gap < prev_gap + 1e-9, "gap grew from {prev_gap:e} to {gap:e}");
            prev_gap = gap;
        }
    }
}

#[test]
fn probe_sup_error_shrinks_with_n() {
    // Sup errors decrease along N (10% slack per step, plus an absolute
    // floor: below ~1e-9 the comparison is numerical noise, not convergence).
    let pairs: Vec<(SplitPoint, SplitPoint)> = [
        (c(0.1, 0.0), c(0.6, 0.4)),
        (c(-0.2, 0.3), c(1.2, -0.5)),
        (c(0.0, -0.1), c(2.0, 0.3)),
    ]
    .iter()
    .map(|&(a, b)| (SplitPoint::physical(a), SplitPoint::physical(b)))
    .collect();
    for &z0 in &[c(0.0, 0.0), c(0.5, 0.0)] {
        let report = bulk_convergence_probe(&[50, 100, 200], z0, &pairs).unwrap();
        for w in report.sup_error.windows(2) {
            assert!(
                w[1] <= 1.1 * w[0] + 1e-9,
                "z0={z0}: sup error grew {} → {}",
                w[0],
                w[1]
            );
        }
    }
}
