//! `bulk converge`: finite-N → bulk convergence study around a base point.

use anyhow::Result;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use overlap_core::bulk::{bulk_convergence_probe, BulkProbeReport};
use overlap_core::kernels::SplitPoint;

#[derive(Debug, Clone, Serialize)]
pub struct ConvergeRow {
    pub n: usize,
    pub lambda1_re: f64,
    pub lambda1_im: f64,
    pub lambda2_re: f64,
    pub lambda2_im: f64,
    pub ratio_re: f64,
    pub ratio_im: f64,
    pub bulk_re: f64,
    pub bulk_im: f64,
    pub abs_error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergePayload {
    pub z0_re: f64,
    pub z0_im: f64,
    pub n_list: Vec<usize>,
    pub sup_error: Vec<f64>,
    pub k1_value: Vec<f64>,
    pub k1_error: Vec<f64>,
    pub rows: Vec<ConvergeRow>,
}

/// Builds `points` test pairs (separations log-spaced in [0.1, 3]) and runs
/// the probe over `n_list`.
pub fn converge(
    z0: Complex64,
    n_list: &[usize],
    points: usize,
    seed: u64,
) -> Result<ConvergePayload> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = Vec::with_capacity(points);
    for i in 0..points {
        let l1 = Complex64::new(rng.random_range(-0.4..0.4), rng.random_range(-0.4..0.4));
        let sep = if points > 1 {
            0.1 * (30.0f64).powf(i as f64 / (points as f64 - 1.0))
        } else {
            1.0
        };
        let dir = Complex64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU));
        pairs.push((SplitPoint::physical(l1), SplitPoint::physical(l1 + dir * sep)));
    }
    let report = bulk_convergence_probe(n_list, z0, &pairs)?;
    Ok(payload_from(report))
}

fn payload_from(report: BulkProbeReport) -> ConvergePayload {
    let rows = report
        .ratio_samples
        .iter()
        .map(|s| ConvergeRow {
            n: s.n,
            lambda1_re: s.lambda1.z.re,
            lambda1_im: s.lambda1.z.im,
            lambda2_re: s.lambda2.z.re,
            lambda2_im: s.lambda2.z.im,
            ratio_re: s.ratio.re,
            ratio_im: s.ratio.im,
            bulk_re: s.bulk.re,
            bulk_im: s.bulk.im,
            abs_error: (s.ratio - s.bulk).norm(),
        })
        .collect();
    ConvergePayload {
        z0_re: report.z0.re,
        z0_im: report.z0.im,
        n_list: report.n_list,
        sup_error: report.sup_error,
        k1_value: report.k1_value,
        k1_error: report.k1_error,
        rows,
    }
}

pub fn csv_rows(payload: &ConvergePayload) -> (Vec<&'static str>, Vec<Vec<String>>) {
    let header = vec![
        "n", "lambda1_re", "lambda1_im", "lambda2_re", "lambda2_im", "ratio_re", "ratio_im",
        "bulk_re", "bulk_im", "abs_error",
    ];
    let body = payload
        .rows
        .iter()
        .map(|r| {
            vec![
                r.n.to_string(),
                format!("{:.17e}", r.lambda1_re),
                format!("{:.17e}", r.lambda1_im),
                format!("{:.17e}", r.lambda2_re),
                format!("{:.17e}", r.lambda2_im),
                format!("{:.17e}", r.ratio_re),
                format!("{:.17e}", r.ratio_im),
                format!("{:.17e}", r.bulk_re),
                format!("{:.17e}", r.bulk_im),
                format!("{:.17e}", r.abs_error),
            ]
        })
        .collect();
    (header, body)
}
