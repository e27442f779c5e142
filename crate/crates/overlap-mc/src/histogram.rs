//! Binned estimators over ℂ and ℂ², with per-block partial sums for
//! bootstrap standard errors and median-of-means reporting.

use num_complex::Complex64;

use crate::config::BinSpec;
use crate::sample::SpectralSample;

/// Number of sample blocks used for bootstrap/median-of-means; samples are
/// assigned round-robin by index.
pub const N_BLOCKS: usize = 16;

/// Weighted single-point histogram: estimator of a density-like quantity
/// E[Σ_α w_α δ(λ_α − z)] via weighted_sums/(samples·bin_area).
#[derive(Debug, Clone)]
pub struct Histogram2D {
    pub bin_spec: BinSpec,
    pub counts: Vec<u64>,
    pub weighted_sums: Vec<Complex64>,
    pub sum_sq: Vec<f64>,
    /// Per-bin, per-block partial weighted sums (bin-major).
    pub block_sums: Vec<Complex64>,
    pub samples_seen: u64,
    pub overflow_count: u64,
}

impl Histogram2D {
    pub fn new(bin_spec: BinSpec) -> Self {
        let b = bin_spec.n_bins();
        Self {
            bin_spec,
            counts: vec![0; b],
            weighted_sums: vec![Complex64::new(0.0, 0.0); b],
            sum_sq: vec![0.0; b],
            block_sums: vec![Complex64::new(0.0, 0.0); b * N_BLOCKS],
            samples_seen: 0,
            overflow_count: 0,
        }
    }

    pub fn record(&mut self, z: Complex64, weight: Complex64, block: usize) {
        match self.bin_spec.index(z) {
            Some(idx) => {
                self.counts[idx] += 1;
                self.weighted_sums[idx] += weight;
                self.sum_sq[idx] += weight.norm_sqr();
                self.block_sums[idx * N_BLOCKS + block] += weight;
            }
            None => self.overflow_count += 1,
        }
    }

    pub fn merge(&mut self, other: &Histogram2D) {
        debug_assert_eq!(self.bin_spec, other.bin_spec);
        for i in 0..self.counts.len() {
            self.counts[i] += other.counts[i];
            self.weighted_sums[i] += other.weighted_sums[i];
            self.sum_sq[i] += other.sum_sq[i];
        }
        for i in 0..self.block_sums.len() {
            self.block_sums[i] += other.block_sums[i];
        }
        self.samples_seen += other.samples_seen;
        self.overflow_count += other.overflow_count;
    }

    /// Mean estimator for one bin.
    pub fn estimate(&self, idx: usize) -> Complex64 {
        if self.samples_seen == 0 {
            return Complex64::new(0.0, 0.0);
        }
        self.weighted_sums[idx] / (self.samples_seen as f64 * self.bin_spec.area(idx))
    }

    /// Integral of the estimator over all (non-overflow) bins.
    pub fn integral(&self) -> Complex64 {
        (0..self.counts.len())
            .map(|i| self.estimate(i) * self.bin_spec.area(i))
            .sum()
    }
}

/// Ordered-pair histogram over bin pairs of a shared `BinSpec`, carrying the
/// off-diagonal overlap sums in both index conventions.
#[derive(Debug, Clone)]
pub struct PairHistogram {
    pub bin_spec: BinSpec,
    pub counts: Vec<u64>,
    /// Conjugated-convention weights (the documented default).
    pub weighted_sums: Vec<Complex64>,
    /// Plain-convention weights, kept for the convention experiment.
    pub weighted_sums_alt: Vec<Complex64>,
    pub sum_sq: Vec<f64>,
    pub block_sums: Vec<Complex64>,
    pub samples_seen: u64,
    pub overflow_count: u64,
}

impl PairHistogram {
    pub fn new(bin_spec: BinSpec) -> Self {
        let b = bin_spec.n_bins();
        Self {
            bin_spec,
            counts: vec![0; b * b],
            weighted_sums: vec![Complex64::new(0.0, 0.0); b * b],
            weighted_sums_alt: vec![Complex64::new(0.0, 0.0); b * b],
            sum_sq: vec![0.0; b * b],
            block_sums: vec![Complex64::new(0.0, 0.0); b * b * N_BLOCKS],
            samples_seen: 0,
            overflow_count: 0,
        }
    }

    pub fn pair_index(&self, z1: Complex64, z2: Complex64) -> Option<usize> {
        let b = self.bin_spec.n_bins();
        match (self.bin_spec.index(z1), self.bin_spec.index(z2)) {
            (Some(i), Some(j)) => Some(i * b + j),
            _ => None,
        }
    }

    pub fn record(
        &mut self,
        z1: Complex64,
        z2: Complex64,
        weight: Complex64,
        weight_alt: Complex64,
        block: usize,
    ) {
        match self.pair_index(z1, z2) {
            Some(idx) => {
                self.counts[idx] += 1;
                self.weighted_sums[idx] += weight;
                self.weighted_sums_alt[idx] += weight_alt;
                self.sum_sq[idx] += weight.norm_sqr();
                self.block_sums[idx * N_BLOCKS + block] += weight;
            }
            None => self.overflow_count += 1,
        }
    }

    pub fn merge(&mut self, other: &PairHistogram) {
        debug_assert_eq!(self.bin_spec, other.bin_spec);
        for i in 0..self.counts.len() {
            self.counts[i] += other.counts[i];
            self.weighted_sums[i] += other.weighted_sums[i];
            self.weighted_sums_alt[i] += other.weighted_sums_alt[i];
            self.sum_sq[i] += other.sum_sq[i];
        }
        for i in 0..self.block_sums.len() {
            self.block_sums[i] += other.block_sums[i];
        }
        self.samples_seen += other.samples_seen;
        self.overflow_count += other.overflow_count;
    }

    pub fn pair_area(&self, idx: usize) -> f64 {
        let b = self.bin_spec.n_bins();
        self.bin_spec.area(idx / b) * self.bin_spec.area(idx % b)
    }

    pub fn estimate(&self, idx: usize) -> Complex64 {
        if self.samples_seen == 0 {
            return Complex64::new(0.0, 0.0);
        }
        self.weighted_sums[idx] / (self.samples_seen as f64 * self.pair_area(idx))
    }

    pub fn estimate_alt(&self, idx: usize) -> Complex64 {
        if self.samples_seen == 0 {
            return Complex64::new(0.0, 0.0);
        }
        self.weighted_sums_alt[idx] / (self.samples_seen as f64 * self.pair_area(idx))
    }
}

/// Folds one decomposed sample into the four standard histograms: for each
/// eigenvalue the density gains 1 and the diagonal-overlap histogram gains
/// O_αα at λ_α; for each ordered pair α ≠ β the pair density gains 1 and the
/// off-diagonal histogram gains O_αβ at (λ_α, λ_β).
pub fn accumulate(
    sample: &SpectralSample,
    h_rho1: &mut Histogram2D,
    h_d11: &mut Histogram2D,
    h_rho2: &mut PairHistogram,
    h_d12: &mut PairHistogram,
    block: usize,
) {
    let n = sample.n();
    for a in 0..n {
        let z = sample.eigenvalues[a];
        h_rho1.record(z, Complex64::new(1.0, 0.0), block);
        h_d11.record(z, Complex64::new(sample.diag_overlap[a], 0.0), block);
    }
    for a in 0..n {
        for b in 0..n {
            if a == b {
                continue;
            }
            let (za, zb) = (sample.eigenvalues[a], sample.eigenvalues[b]);
            h_rho2.record(za, zb, Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0), block);
            h_d12.record(
                za,
                zb,
                sample.offdiag_overlap[(a, b)],
                sample.offdiag_overlap_alt[(a, b)],
                block,
            );
        }
    }
    h_rho1.samples_seen += 1;
    h_d11.samples_seen += 1;
    h_rho2.samples_seen += 1;
    h_d12.samples_seen += 1;
}

/// Eigenvector-free estimator of the diagonal overlap density: each
/// eigenvalue contributes Π_{ℓ≠α}[1 + 1/|λ_α−λ_ℓ|²] at λ_α.
///
/// The product has heavy tails (close eigenvalue pairs), so reports built on
/// it should quote the median-of-means alongside the mean.
pub fn cm_eigenvalue_only_d11(eigenvalues: &[Complex64], h: &mut Histogram2D, block: usize) {
    let n = eigenvalues.len();
    for a in 0..n {
        let mut product = 1.0f64;
        for l in 0..n {
            if l != a {
                product *= 1.0 + 1.0 / (eigenvalues[a] - eigenvalues[l]).norm_sqr();
            }
        }
        h.record(eigenvalues[a], Complex64::new(product, 0.0), block);
    }
    h.samples_seen += 1;
}

/// Bootstrap standard error of the per-bin mean estimator from block sums.
///
/// Resamples the `N_BLOCKS` blocks with replacement; returns the standard
/// deviation of the resampled estimators, component-wise.
pub fn bootstrap_se(
    block_sums: &[Complex64],
    block_samples: &[u64; N_BLOCKS],
    area: f64,
    resamples: usize,
    rng: &mut impl rand::Rng,
) -> (f64, f64) {
    let mut re_acc = 0.0;
    let mut re_sq = 0.0;
    let mut im_acc = 0.0;
    let mut im_sq = 0.0;
    for _ in 0..resamples {
        let mut w = Complex64::new(0.0, 0.0);
        let mut s = 0u64;
        for _ in 0..N_BLOCKS {
            let b = rng.random_range(0..N_BLOCKS);
            w += block_sums[b];
            s += block_samples[b];
        }
        if s == 0 {
            continue;
        }
        let est = w / (s as f64 * area);
        re_acc += est.re;
        re_sq += est.re * est.re;
        im_acc += est.im;
        im_sq += est.im * est.im;
    }
    let k = resamples as f64;
    (
        (re_sq / k - (re_acc / k).powi(2)).max(0.0).sqrt(),
        (im_sq / k - (im_acc / k).powi(2)).max(0.0).sqrt(),
    )
}

/// Component-wise median over blocks of the per-block mean estimators.
pub fn median_of_means(
    block_sums: &[Complex64],
    block_samples: &[u64; N_BLOCKS],
    area: f64,
) -> Complex64 {
    let mut re: Vec<f64> = Vec::with_capacity(N_BLOCKS);
    let mut im: Vec<f64> = Vec::with_capacity(N_BLOCKS);
    for b in 0..N_BLOCKS {
        if block_samples[b] > 0 {
            let est = block_sums[b] / (block_samples[b] as f64 * area);
            re.push(est.re);
            im.push(est.im);
        }
    }
    Complex64::new(median(&mut re), median(&mut im))
}

fn median(v: &mut [f64]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
