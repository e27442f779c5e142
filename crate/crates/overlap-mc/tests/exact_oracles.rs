//! Monte Carlo estimators against the exact finite-N formulas.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use overlap_core::kernels::{d11, rho, SplitPoint};
use overlap_mc::{run_campaign, sample_ginibre, spectral_decompose, EnsembleConfig};

#[test]
fn binned_density_matches_exact_kernel() {
    let config = EnsembleConfig::new(5, 30_000, 0x1234);
    let report = run_campaign(&config).unwrap();
    let mut qualifying = 0;
    let mut within = 0;
    for row in report.rho1.iter().filter(|r| r.hits >= 500) {
        let center = Complex64::new(row.center_re, row.center_im);
        let exact = rho(5, &[center]).unwrap().value().re;
        qualifying += 1;
        if (row.mean_re - exact).abs() <= 3.0 * row.se_re.max(1e-12) {
            within += 1;
        }
    }
    assert!(qualifying >= 10, "too few qualifying bins: {qualifying}");
    assert!(
        within as f64 >= 0.95 * qualifying as f64,
        "{within}/{qualifying} bins within 3σ"
    );
}

#[test]
fn binned_diagonal_overlap_matches_exact_formula() {
    let config = EnsembleConfig::new(5, 30_000, 0x4321);
    let report = run_campaign(&config).unwrap();
    let mut qualifying = 0;
    let mut within = 0;
    for row in report.d11.iter().filter(|r| r.hits >= 500) {
        let center = Complex64::new(row.center_re, row.center_im);
        let exact = d11(5, &[SplitPoint::physical(center)]).unwrap().value().re;
        qualifying += 1;
        if (row.mean_re - exact).abs() <= 3.0 * row.se_re.max(1e-12) {
            within += 1;
        }
    }
    assert!(qualifying >= 10);
    assert!(
        within as f64 >= 0.9 * qualifying as f64,
        "{within}/{qualifying} bins within 3σ"
    );
}

#[test]
fn conditional_mean_overlap_near_origin() {
    // E[O_αα | λ_α ≈ 0] at N = 2 is D11^{(2,1)}(0)/ρ^{(2,1)}(0) = (2/π)/(1/π).
    let config = EnsembleConfig::new(2, 60_000, 0x777);
    let report = run_campaign(&config).unwrap();
    let (mut w_d11, mut w_rho, mut se_sq) = (0.0, 0.0, 0.0);
    for (d_row, r_row) in report.d11.iter().zip(&report.rho1) {
        let r = Complex64::new(d_row.center_re, d_row.center_im).norm();
        if r < 0.5 {
            w_d11 += d_row.mean_re * d_row.area;
            w_rho += r_row.mean_re * r_row.area;
            se_sq += (d_row.se_re * d_row.area).powi(2) + (r_row.se_re * r_row.area).powi(2);
        }
    }
    let ratio = w_d11 / w_rho;
    // crude propagated error; the ratio target is 2 exactly at the origin and
    // drifts mildly over the disk r < 0.5
    let sigma = (se_sq.sqrt() / w_rho).max(0.02);
    assert!(
        (ratio - 2.0).abs() < 4.0 * sigma + 0.08,
        "conditional mean {ratio} (σ≈{sigma})"
    );
}

#[test]
fn eigenvalue_only_estimator_agrees_with_eigenvector_estimator() {
    let config = EnsembleConfig::new(5, 20_000, 0xabc);
    let report = run_campaign(&config).unwrap();
    let mut checked = 0;
    for (cm, ev) in report.d11_eigenvalue_only.iter().zip(&report.d11) {
        if cm.hits < 500 || ev.hits < 500 {
            continue;
        }
        let sigma = (cm.se_re.powi(2) + ev.se_re.powi(2)).sqrt();
        // Heavy-tailed weights: allow a handful of σ.
        assert!(
            (cm.mean_re - ev.mean_re).abs() <= 5.0 * sigma.max(1e-9),
            "estimators disagree at ({}, {}): {} vs {} (σ {})",
            cm.center_re,
            cm.center_im,
            cm.mean_re,
            ev.mean_re,
            sigma
        );
        checked += 1;
    }
    assert!(checked >= 10);
}

#[test]
fn offdiagonal_convention_discrimination() {
    // Smooth-function contraction of the N = 2 pair overlap:
    //   E[Σ_{α≠β} O_αβ·e^{−|λ_α|²−|λ_β|²}]
    // equals ∫∫ D12^{(2,2)}·e^{−|λ1|²−|λ2|²} = −(1/π²)(π/2)² = −1/4 for the
    // overlap that reproduces the exact off-diagonal density. The conjugated
    // convention lands on −1/4; the plain one is not even frame-invariant
    // (it feels the solver's per-eigenvector phases), so it lands far away.
    let n_samples = 60_000;
    let mut rng = ChaCha8Rng::seed_from_u64(0xd12);
    let mut acc_conj = 0.0;
    let mut acc_plain = 0.0;
    let mut acc_sq = 0.0;
    for _ in 0..n_samples {
        let m = sample_ginibre(2, &mut rng);
        let s = spectral_decompose(&m).unwrap();
        let g = (-s.eigenvalues[0].norm_sqr() - s.eigenvalues[1].norm_sqr()).exp();
        let conj_term = (s.offdiag_overlap[(0, 1)] + s.offdiag_overlap[(1, 0)]).re * g;
        let plain_term = (s.offdiag_overlap_alt[(0, 1)] + s.offdiag_overlap_alt[(1, 0)]).re * g;
        acc_conj += conj_term;
        acc_plain += plain_term;
        acc_sq += conj_term * conj_term;
    }
    let k = n_samples as f64;
    let mean_conj = acc_conj / k;
    let mean_plain = acc_plain / k;
    let se = ((acc_sq / k - mean_conj * mean_conj) / k).sqrt();
    assert!(
        (mean_conj + 0.25).abs() < 4.0 * se,
        "conjugated convention: {mean_conj} vs −0.25 (se {se})"
    );
    // The plain convention must be clearly discriminated against.
    assert!(
        (mean_plain + 0.25).abs() > 10.0 * se,
        "plain convention unexpectedly matches: {mean_plain} (se {se})"
    );
}
