//! `mc verify`: run a sampling campaign and line its estimators up against
//! the exact finite-N formulas, bin by bin.

use anyhow::Result;
use num_complex::Complex64;
use serde::Serialize;

use overlap_core::kernels::{d11, d12, rho, SplitPoint};
use overlap_mc::{run_campaign_archived, EnsembleConfig, EstimateReport};

/// One comparison row: estimator vs exact value with the σ-distance
/// max(|Δre|/se_re, |Δim|/se_im).
#[derive(Debug, Clone, Serialize)]
pub struct CompareRow {
    pub centers: Vec<f64>,
    pub area: f64,
    pub hits: u64,
    pub est_re: f64,
    pub est_im: f64,
    pub se_re: f64,
    pub se_im: f64,
    pub exact_re: f64,
    pub exact_im: f64,
    pub sigma_distance: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyPayload {
    pub report: EstimateReport,
    pub rho1: Vec<CompareRow>,
    pub d11: Vec<CompareRow>,
    pub d12: Vec<CompareRow>,
    /// Sum of σ-distances for the two off-diagonal conventions over
    /// well-populated pairs; the smaller one is the matching convention.
    pub convention: ConventionSummary,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConventionSummary {
    pub pairs_compared: usize,
    pub mean_sigma_conjugated: f64,
    pub mean_sigma_plain: f64,
    pub matching: String,
}

fn sigma_distance(d_re: f64, d_im: f64, se_re: f64, se_im: f64) -> f64 {
    (d_re.abs() / se_re.max(1e-300)).max(d_im.abs() / se_im.max(1e-300))
}

pub fn verify(
    config: &EnsembleConfig,
    archive: Option<&mut dyn std::io::Write>,
    min_pair_hits: u64,
) -> Result<VerifyPayload> {
    let report = run_campaign_archived(config, archive)?;
    let n = config.n;

    let rho1 = report
        .rho1
        .iter()
        .map(|row| {
            let c = Complex64::new(row.center_re, row.center_im);
            let exact = rho(n, &[c]).map(|v| v.value()).unwrap_or_default();
            CompareRow {
                centers: vec![row.center_re, row.center_im],
                area: row.area,
                hits: row.hits,
                est_re: row.mean_re,
                est_im: row.mean_im,
                se_re: row.se_re,
                se_im: row.se_im,
                exact_re: exact.re,
                exact_im: exact.im,
                sigma_distance: sigma_distance(
                    row.mean_re - exact.re,
                    row.mean_im - exact.im,
                    row.se_re,
                    row.se_im,
                ),
            }
        })
        .collect();

    let d11_rows = report
        .d11
        .iter()
        .map(|row| {
            let c = Complex64::new(row.center_re, row.center_im);
            let exact = d11(n, &[SplitPoint::physical(c)])
                .map(|v| v.value())
                .unwrap_or_default();
            CompareRow {
                centers: vec![row.center_re, row.center_im],
                area: row.area,
                hits: row.hits,
                est_re: row.mean_re,
                est_im: row.mean_im,
                se_re: row.se_re,
                se_im: row.se_im,
                exact_re: exact.re,
                exact_im: exact.im,
                sigma_distance: sigma_distance(
                    row.mean_re - exact.re,
                    row.mean_im - exact.im,
                    row.se_re,
                    row.se_im,
                ),
            }
        })
        .collect();

    let mut d12_rows = Vec::new();
    let mut conv_pairs = 0usize;
    let mut sigma_conj_acc = 0.0f64;
    let mut sigma_plain_acc = 0.0f64;
    for row in &report.d12 {
        if row.hits == 0 {
            continue;
        }
        let c1 = Complex64::new(row.center1_re, row.center1_im);
        let c2 = Complex64::new(row.center2_re, row.center2_im);
        let exact = d12(n, &[SplitPoint::physical(c1), SplitPoint::physical(c2)])
            .map(|v| v.value())
            .unwrap_or_default();
        let sigma = sigma_distance(
            row.mean_re - exact.re,
            row.mean_im - exact.im,
            row.se_re,
            row.se_im,
        );
        if row.hits >= min_pair_hits {
            conv_pairs += 1;
            sigma_conj_acc += sigma;
            sigma_plain_acc += sigma_distance(
                row.alt_re - exact.re,
                row.alt_im - exact.im,
                row.se_re,
                row.se_im,
            );
        }
        d12_rows.push(CompareRow {
            centers: vec![row.center1_re, row.center1_im, row.center2_re, row.center2_im],
            area: row.area,
            hits: row.hits,
            est_re: row.mean_re,
            est_im: row.mean_im,
            se_re: row.se_re,
            se_im: row.se_im,
            exact_re: exact.re,
            exact_im: exact.im,
            sigma_distance: sigma,
        });
    }

    let (mean_conj, mean_plain) = if conv_pairs > 0 {
        (
            sigma_conj_acc / conv_pairs as f64,
            sigma_plain_acc / conv_pairs as f64,
        )
    } else {
        (0.0, 0.0)
    };
    let convention = ConventionSummary {
        pairs_compared: conv_pairs,
        mean_sigma_conjugated: mean_conj,
        mean_sigma_plain: mean_plain,
        matching: if conv_pairs == 0 {
            "undetermined".into()
        } else if mean_conj <= mean_plain {
            "conjugated".into()
        } else {
            "plain".into()
        },
    };

    Ok(VerifyPayload {
        report,
        rho1,
        d11: d11_rows,
        d12: d12_rows,
        convention,
    })
}

pub const COMPARE_HEADER_SINGLE: [&str; 10] = [
    "center_re", "center_im", "area", "hits", "est_re", "est_im", "se_re", "se_im", "exact_re",
    "exact_im",
];

pub fn csv_rows_single(rows: &[CompareRow]) -> (Vec<&'static str>, Vec<Vec<String>>) {
    let mut header: Vec<&'static str> = COMPARE_HEADER_SINGLE.to_vec();
    header.push("sigma_distance");
    let body = rows
        .iter()
        .map(|r| {
            let mut cells: Vec<String> = r.centers.iter().map(|x| format!("{x:.17e}")).collect();
            for v in [
                r.area, r.hits as f64, r.est_re, r.est_im, r.se_re, r.se_im, r.exact_re, r.exact_im,
                r.sigma_distance,
            ] {
                cells.push(format!("{v:.17e}"));
            }
            cells
        })
        .collect();
    (header, body)
}

pub fn csv_rows_pair(rows: &[CompareRow]) -> (Vec<&'static str>, Vec<Vec<String>>) {
    let header: Vec<&'static str> = vec![
        "center1_re", "center1_im", "center2_re", "center2_im", "area", "hits", "est_re",
        "est_im", "se_re", "se_im", "exact_re", "exact_im", "sigma_distance",
    ];
    let body = rows
        .iter()
        .map(|r| {
            let mut cells: Vec<String> = r.centers.iter().map(|x| format!("{x:.17e}")).collect();
            for v in [
                r.area, r.hits as f64, r.est_re, r.est_im, r.se_re, r.se_im, r.exact_re, r.exact_im,
                r.sigma_distance,
            ] {
                cells.push(format!("{v:.17e}"));
            }
            cells
        })
        .collect();
    (header, body)
}
