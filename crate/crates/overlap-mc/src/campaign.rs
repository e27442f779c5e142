//! Campaign orchestration: deterministic parallel sampling, histogram
//! merging, and report assembly.
//!
//! Samples are split into fixed chunks of contiguous indices; each chunk is
//! processed independently (rayon) and the partial histograms are merged in
//! chunk order, so the result is bit-identical for any worker count. Each
//! sample draws from its own counter-derived RNG stream.

use std::io::Write;
use std::time::Instant;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{CampaignMode, EnsembleConfig, StreamPolicy};
use crate::error::Result;
use crate::histogram::{
    accumulate, bootstrap_se, cm_eigenvalue_only_d11, median_of_means, Histogram2D,
    PairHistogram, N_BLOCKS,
};
use crate::sample::{eigenvalues_only, sample_ginibre, spectral_decompose};

const CHUNKS: usize = 128;
const BOOTSTRAP_RESAMPLES: usize = 100;

/// One row of a single-point estimator table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BinRow {
    pub center_re: f64,
    pub center_im: f64,
    pub area: f64,
    pub hits: u64,
    pub mean_re: f64,
    pub mean_im: f64,
    pub se_re: f64,
    pub se_im: f64,
    pub mom_re: f64,
    pub mom_im: f64,
}

/// One row of an ordered-pair estimator table; `alt` carries the
/// plain-convention mean for the convention experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairRow {
    pub center1_re: f64,
    pub center1_im: f64,
    pub center2_re: f64,
    pub center2_im: f64,
    pub area: f64,
    pub hits: u64,
    pub mean_re: f64,
    pub mean_im: f64,
    pub alt_re: f64,
    pub alt_im: f64,
    pub se_re: f64,
    pub se_im: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InvariantStats {
    /// Samples with any O_αα < 1 − 1e-8.
    pub diag_violations: u64,
    /// Samples with sum-rule deviation above 1e-6.
    pub sum_rule_violations: u64,
    /// Worst observed min(O_αα) − 1 (most negative).
    pub worst_diag_deficit: f64,
    /// Worst observed |Σ_β O_αβ − 1|.
    pub worst_sum_rule: f64,
}

/// Everything a campaign produces.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EstimateReport {
    pub config: EnsembleConfig,
    pub accepted: u64,
    pub rejected: u64,
    pub invariants: InvariantStats,
    pub rho1: Vec<BinRow>,
    pub d11: Vec<BinRow>,
    pub d11_eigenvalue_only: Vec<BinRow>,
    pub rho2: Vec<PairRow>,
    pub d12: Vec<PairRow>,
    pub overflow: OverflowStats,
    pub wall_seconds: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OverflowStats {
    pub rho1: u64,
    pub d11: u64,
    pub rho2: u64,
    pub d12: u64,
}

impl EstimateReport {
    pub fn rejection_rate(&self) -> f64 {
        self.rejected as f64 / self.config.samples as f64
    }

    /// SHA-256 over the canonical JSON of the report with the wall time
    /// zeroed; identical configs must reproduce identical digests.
    pub fn digest(&self) -> String {
        let mut clone = self.clone();
        clone.wall_seconds = 0.0;
        let bytes = serde_json::to_vec(&clone).expect("report serializes");
        let mut hasher = Sha256::new();
        hasher.update(&bytes);
        hex_string(&hasher.finalize())
    }
}

fn hex_string(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// One archived sample record (line-delimited JSON after a header line).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ArchiveRecord {
    pub index: u64,
    pub eigenvalues: Vec<[f64; 2]>,
    pub diag_overlap: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ArchiveHeader {
    pub seed: u64,
    pub n: usize,
    pub samples: usize,
    pub version: String,
}

struct ChunkResult {
    h_rho1: Histogram2D,
    h_d11: Histogram2D,
    h_cm: Histogram2D,
    h_rho2: PairHistogram,
    h_d12: PairHistogram,
    rejected: u64,
    block_samples: [u64; N_BLOCKS],
    invariants: InvariantStats,
    archive: Vec<ArchiveRecord>,
}

fn process_chunk(config: &EnsembleConfig, lo: usize, hi: usize, archive: bool) -> ChunkResult {
    let spec = config.bin_spec;
    let mut out = ChunkResult {
        h_rho1: Histogram2D::new(spec),
        h_d11: Histogram2D::new(spec),
        h_cm: Histogram2D::new(spec),
        h_rho2: PairHistogram::new(spec),
        h_d12: PairHistogram::new(spec),
        rejected: 0,
        block_samples: [0; N_BLOCKS],
        invariants: InvariantStats {
            diag_violations: 0,
            sum_rule_violations: 0,
            worst_diag_deficit: 0.0,
            worst_sum_rule: 0.0,
        },
        archive: Vec::new(),
    };
    for index in lo..hi {
        let StreamPolicy::ChaChaCounter = config.stream_policy;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(index as u64);
        let m = sample_ginibre(config.n, &mut rng);
        let block = index % N_BLOCKS;
        match config.mode {
            CampaignMode::Full => {
                let Some(s) = spectral_decompose(&m) else {
                    out.rejected += 1;
                    continue;
                };
                let deficit = s.diag_deficit();
                let sum_dev = s.sum_rule_deviation();
                if deficit < -1e-8 {
                    out.invariants.diag_violations += 1;
                }
                if sum_dev > 1e-6 {
                    out.invariants.sum_rule_violations += 1;
                }
                out.invariants.worst_diag_deficit = out.invariants.worst_diag_deficit.min(deficit);
                out.invariants.worst_sum_rule = out.invariants.worst_sum_rule.max(sum_dev);
                accumulate(&s, &mut out.h_rho1, &mut out.h_d11, &mut out.h_rho2, &mut out.h_d12, block);
                cm_eigenvalue_only_d11(&s.eigenvalues, &mut out.h_cm, block);
                if archive {
                    out.archive.push(ArchiveRecord {
                        index: index as u64,
                        eigenvalues: s.eigenvalues.iter().map(|z| [z.re, z.im]).collect(),
                        diag_overlap: s.diag_overlap.clone(),
                    });
                }
            }
            CampaignMode::EigenvaluesOnly => {
                let Some(ev) = eigenvalues_only(&m) else {
                    out.rejected += 1;
                    continue;
                };
                for &z in &ev {
                    out.h_rho1.record(z, Complex64::new(1.0, 0.0), block);
                }
                out.h_rho1.samples_seen += 1;
                cm_eigenvalue_only_d11(&ev, &mut out.h_cm, block);
                if archive {
                    out.archive.push(ArchiveRecord {
                        index: index as u64,
                        eigenvalues: ev.iter().map(|z| [z.re, z.im]).collect(),
                        diag_overlap: Vec::new(),
                    });
                }
            }
        }
        out.block_samples[block] += 1;
    }
    out
}

/// Runs a campaign; deterministic given the config regardless of thread
/// scheduling.
pub fn run_campaign(config: &EnsembleConfig) -> Result<EstimateReport> {
    run_campaign_archived(config, None)
}

/// As [`run_campaign`], optionally streaming per-sample archive records to a
/// writer (JSON header line, then one JSON record per accepted sample in
/// index order).
pub fn run_campaign_archived(
    config: &EnsembleConfig,
    mut archive: Option<&mut dyn Write>,
) -> Result<EstimateReport> {
    config.validate()?;
    let start = Instant::now();

    let chunks = CHUNKS.min(config.samples).max(1);
    let bounds: Vec<(usize, usize)> = (0..chunks)
        .map(|c| {
            let lo = c * config.samples / chunks;
            let hi = (c + 1) * config.samples / chunks;
            (lo, hi)
        })
        .collect();

    let want_archive = archive.is_some();
    let mut results: Vec<ChunkResult> = bounds
        .par_iter()
        .map(|&(lo, hi)| process_chunk(config, lo, hi, want_archive))
        .collect();

    let spec = config.bin_spec;
    let mut h_rho1 = Histogram2D::new(spec);
    let mut h_d11 = Histogram2D::new(spec);
    let mut h_cm = Histogram2D::new(spec);
    let mut h_rho2 = PairHistogram::new(spec);
    let mut h_d12 = PairHistogram::new(spec);
    let mut rejected = 0u64;
    let mut block_samples = [0u64; N_BLOCKS];
    let mut invariants = InvariantStats {
        diag_violations: 0,
        sum_rule_violations: 0,
        worst_diag_deficit: 0.0,
        worst_sum_rule: 0.0,
    };

    if let Some(w) = archive.as_deref_mut() {
        let header = ArchiveHeader {
            seed: config.seed,
            n: config.n,
            samples: config.samples,
            version: env!("CARGO_PKG_VERSION").to_string(),
        };
        serde_json::to_writer(&mut *w, &header).map_err(std::io::Error::other)?;
        writeln!(w)?;
    }

    for r in results.iter_mut() {
        h_rho1.merge(&r.h_rho1);
        h_d11.merge(&r.h_d11);
        h_cm.merge(&r.h_cm);
        h_rho2.merge(&r.h_rho2);
        h_d12.merge(&r.h_d12);
        rejected += r.rejected;
        for b in 0..N_BLOCKS {
            block_samples[b] += r.block_samples[b];
        }
        invariants.diag_violations += r.invariants.diag_violations;
        invariants.sum_rule_violations += r.invariants.sum_rule_violations;
        invariants.worst_diag_deficit =
            invariants.worst_diag_deficit.min(r.invariants.worst_diag_deficit);
        invariants.worst_sum_rule = invariants.worst_sum_rule.max(r.invariants.worst_sum_rule);
        if let Some(w) = archive.as_deref_mut() {
            for rec in &r.archive {
                serde_json::to_writer(&mut *w, rec).map_err(std::io::Error::other)?;
                writeln!(w)?;
            }
        }
    }

    // Bootstrap RNG is part of the deterministic pipeline.
    let mut boot_rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x626f_6f74);
    let single_table = |h: &Histogram2D, rng: &mut ChaCha8Rng| -> Vec<BinRow> {
        (0..spec.n_bins())
            .map(|idx| {
                let center = spec.center(idx);
                let area = spec.area(idx);
                let mean = h.estimate(idx);
                let blocks = &h.block_sums[idx * N_BLOCKS..(idx + 1) * N_BLOCKS];
                let (se_re, se_im) =
                    bootstrap_se(blocks, &block_samples, area, BOOTSTRAP_RESAMPLES, rng);
                let mom = median_of_means(blocks, &block_samples, area);
                BinRow {
                    center_re: center.re,
                    center_im: center.im,
                    area,
                    hits: h.counts[idx],
                    mean_re: mean.re,
                    mean_im: mean.im,
                    se_re,
                    se_im,
                    mom_re: mom.re,
                    mom_im: mom.im,
                }
            })
            .collect()
    };
    let rho1 = single_table(&h_rho1, &mut boot_rng);
    let d11 = single_table(&h_d11, &mut boot_rng);
    let d11_cm = single_table(&h_cm, &mut boot_rng);

    let pair_table = |h: &PairHistogram, rng: &mut ChaCha8Rng| -> Vec<PairRow> {
        let b = spec.n_bins();
        (0..b * b)
            .map(|idx| {
                let c1 = spec.center(idx / b);
                let c2 = spec.center(idx % b);
                let area = h.pair_area(idx);
                let mean = h.estimate(idx);
                let alt = h.estimate_alt(idx);
                let blocks = &h.block_sums[idx * N_BLOCKS..(idx + 1) * N_BLOCKS];
                let (se_re, se_im) =
                    bootstrap_se(blocks, &block_samples, area, BOOTSTRAP_RESAMPLES, rng);
                PairRow {
                    center1_re: c1.re,
                    center1_im: c1.im,
                    center2_re: c2.re,
                    center2_im: c2.im,
                    area,
                    hits: h.counts[idx],
                    mean_re: mean.re,
                    mean_im: mean.im,
                    alt_re: alt.re,
                    alt_im: alt.im,
                    se_re,
                    se_im,
                }
            })
            .collect()
    };
    let rho2 = pair_table(&h_rho2, &mut boot_rng);
    let d12 = pair_table(&h_d12, &mut boot_rng);

    let accepted = config.samples as u64 - rejected;
    Ok(EstimateReport {
        config: config.clone(),
        accepted,
        rejected,
        invariants,
        rho1,
        d11,
        d11_eigenvalue_only: d11_cm,
        rho2,
        d12,
        overflow: OverflowStats {
            rho1: h_rho1.overflow_count,
            d11: h_d11.overflow_count,
            rho2: h_rho2.overflow_count,
            d12: h_d12.overflow_count,
        },
        wall_seconds: start.elapsed().as_secs_f64(),
    })
}

impl EstimateReport {
    /// Rows of the single-point tables with at least `min_hits` entries.
    pub fn qualifying_bins(table: &[BinRow], min_hits: u64) -> impl Iterator<Item = &BinRow> {
        table.iter().filter(move |r| r.hits >= min_hits)
    }

    /// Rows of the pair tables with at least `min_hits` entries.
    pub fn qualifying_pairs(table: &[PairRow], min_hits: u64) -> impl Iterator<Item = &PairRow> {
        table.iter().filter(move |r| r.hits >= min_hits)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_reproduces_digest() {
        let config = EnsembleConfig::new(3, 400, 0xfeed);
        let a = run_campaign(&config).unwrap();
        let b = run_campaign(&config).unwrap();
        assert_eq!(a.digest(), b.digest());
        // and a different seed does not
        let other = run_campaign(&EnsembleConfig::new(3, 400, 0xfeee)).unwrap();
        assert_ne!(a.digest(), other.digest());
    }

    #[test]
    fn rejections_are_rare() {
        let config = EnsembleConfig::new(5, 1000, 42);
        let report = run_campaign(&config).unwrap();
        assert_eq!(report.rejected, 0);
        assert_eq!(report.invariants.diag_violations, 0);
        assert_eq!(report.invariants.sum_rule_violations, 0);
    }

    #[test]
    fn density_integral_close_to_n() {
        let config = EnsembleConfig::new(4, 2000, 7);
        let report = run_campaign(&config).unwrap();
        let integral: f64 = report.rho1.iter().map(|r| r.mean_re * r.area).sum();
        let lost = report.overflow.rho1 as f64 / config.samples as f64;
        approx::assert_abs_diff_eq!(integral + lost, 4.0, epsilon = 1e-9);
        assert!(lost < 0.2);
    }

    #[test]
    fn doubling_samples_shrinks_errors() {
        // CLT scaling on the density histogram (the overlap weights are
        // heavy-tailed and exempt from this, hence the median-of-means
        // machinery).
        let base = run_campaign(&EnsembleConfig::new(2, 4000, 99)).unwrap();
        let bigger = run_campaign(&EnsembleConfig::new(2, 8000, 99)).unwrap();
        // Compare on the bins that qualify in the smaller run, so both sides
        // average over the same set.
        let idx: Vec<usize> = base
            .rho1
            .iter()
            .enumerate()
            .filter(|(_, b)| b.hits > 150)
            .map(|(i, _)| i)
            .collect();
        assert!(!idx.is_empty());
        let mean_se = |r: &EstimateReport| {
            idx.iter().map(|&i| r.rho1[i].se_re).sum::<f64>() / idx.len() as f64
        };
        let ratio = mean_se(&bigger) / mean_se(&base);
        // ≈ 1/√2 within ±20%
        assert!(
            (ratio - std::f64::consts::FRAC_1_SQRT_2).abs() < 0.2 * std::f64::consts::FRAC_1_SQRT_2,
            "SE ratio {ratio}"
        );
    }

    #[test]
    fn archive_is_ordered_and_headed() {
        let config = EnsembleConfig::new(2, 50, 5);
        let mut buf: Vec<u8> = Vec::new();
        run_campaign_archived(&config, Some(&mut buf)).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        let header: ArchiveHeader = serde_json::from_str(lines.next().unwrap()).unwrap();
        assert_eq!(header.n, 2);
        assert_eq!(header.seed, 5);
        let mut last = None;
        let mut count = 0;
        for line in lines {
            let rec: ArchiveRecord = serde_json::from_str(line).unwrap();
            if let Some(prev) = last {
                assert!(rec.index > prev);
            }
            assert_eq!(rec.eigenvalues.len(), 2);
            last = Some(rec.index);
            count += 1;
        }
        assert_eq!(count, 50);
    }

    #[test]
    fn eigenvalues_only_mode_skips_pairs() {
        let mut config = EnsembleConfig::new(4, 200, 3);
        config.mode = CampaignMode::EigenvaluesOnly;
        let report = run_campaign(&config).unwrap();
        assert!(report.rho2.iter().all(|r| r.hits == 0));
        assert!(report.rho1.iter().map(|r| r.hits).sum::<u64>() > 0);
        // eigenvalue-only D11 estimator is populated
        assert!(report.d11_eigenvalue_only.iter().map(|r| r.hits).sum::<u64>() > 0);
    }
}
