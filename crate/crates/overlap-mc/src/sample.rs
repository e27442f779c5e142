//! Ginibre sampling and the spectral decomposition with left/right
//! eigenvector overlaps.

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eig, EigVals, Inverse};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Normal};

/// Which elementwise product defines the off-diagonal overlap matrix.
///
/// Writing G_L = V⁻¹V⁻† and G_R = V†V, the diagonal O_αα = (G_L)_αα·(G_R)_αα
/// is unambiguous, but O_αβ comes in two flavors depending on the ordering of
/// the right-eigenvector Gram factor. Only the conjugated pairing
/// ⟨L_α,L_β⟩⟨R_β,R_α⟩ is invariant under per-eigenvector rescalings
/// R_α → c_α R_α (the plain one picks up e^{2i(arg c_β − arg c_α)}, i.e. it
/// depends on the solver's arbitrary phase choices), it is the convention
/// under which Σ_β O_αβ = 1 holds exactly, and it is the one whose campaign
/// estimate reproduces the exact N = 2 off-diagonal formula. Hence it is the
/// default; the plain variant is kept so the discrimination experiment stays
/// runnable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OverlapConvention {
    /// O_αβ = (G_L)_αβ · conj((G_R)_αβ) = ⟨L_α, L_β⟩⟨R_β, R_α⟩.
    Conjugated,
    /// O_αβ = (G_L)_αβ · (G_R)_αβ = ⟨L_α, L_β⟩⟨R_α, R_β⟩, in the solver's
    /// eigenvector frame.
    Plain,
}

/// One decomposed draw: eigenvalues, diagonal overlaps, both off-diagonal
/// overlap matrices, and a crude conditioning figure for filtering.
#[derive(Debug, Clone)]
pub struct SpectralSample {
    pub eigenvalues: Vec<Complex64>,
    pub diag_overlap: Vec<f64>,
    /// O_αβ in the conjugated (default) convention; diagonal included.
    pub offdiag_overlap: Array2<Complex64>,
    /// O_αβ in the plain convention.
    pub offdiag_overlap_alt: Array2<Complex64>,
    /// max|u_ii|/min|u_ii| over the LU pivots of the eigenvector matrix.
    pub condition_estimate: f64,
}

impl SpectralSample {
    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn offdiag(&self, convention: OverlapConvention) -> &Array2<Complex64> {
        match convention {
            OverlapConvention::Conjugated => &self.offdiag_overlap,
            OverlapConvention::Plain => &self.offdiag_overlap_alt,
        }
    }

    /// max_α |1 − Σ_β ⟨L_α,L_β⟩·conj(⟨R_α,R_β⟩)|.
    pub fn sum_rule_deviation(&self) -> f64 {
        let n = self.n();
        let mut worst = 0.0f64;
        for alpha in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for beta in 0..n {
                acc += self.offdiag_overlap[(alpha, beta)];
            }
            worst = worst.max((acc - 1.0).norm());
        }
        worst
    }

    /// min_α O_αα − 1 (≥ −1e-8 for a healthy decomposition).
    pub fn diag_deficit(&self) -> f64 {
        self.diag_overlap
            .iter()
            .fold(0.0f64, |acc, &o| acc.min(o - 1.0))
    }
}

/// max|pivot|/min|pivot| over a partial-pivot LU of `v`, or None on
/// breakdown. Cheap filtering figure for near-singular eigenvector bases.
fn lu_pivot_ratio(v: &Array2<Complex64>) -> Option<f64> {
    let n = v.nrows();
    let mut m: Vec<Complex64> = v.iter().copied().collect();
    let mut p_max = 0.0f64;
    let mut p_min = f64::INFINITY;
    for col in 0..n {
        let (pivot_row, pivot_norm) = (col..n)
            .map(|r| (r, m[r * n + col].norm()))
            .max_by(|a, b| a.1.total_cmp(&b.1))?;
        if pivot_norm == 0.0 {
            return None;
        }
        p_max = p_max.max(pivot_norm);
        p_min = p_min.min(pivot_norm);
        if pivot_row != col {
            for j in 0..n {
                m.swap(col * n + j, pivot_row * n + j);
            }
        }
        let pivot = m[col * n + col];
        for r in (col + 1)..n {
            let factor = m[r * n + col] / pivot;
            for j in col..n {
                let x = m[col * n + j];
                m[r * n + j] -= factor * x;
            }
        }
    }
    Some(p_max / p_min)
}

/// An N×N matrix of i.i.d. standard complex Gaussian entries
/// (E M_ij = 0, E|M_ij|² = 1).
pub fn sample_ginibre<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Array2<Complex64> {
    let normal = Normal::new(0.0, std::f64::consts::FRAC_1_SQRT_2).unwrap();
    Array2::from_shape_fn((n, n), |_| {
        Complex64::new(normal.sample(rng), normal.sample(rng))
    })
}

/// Eigenvalues only, for density-only campaigns.
pub fn eigenvalues_only(m: &Array2<Complex64>) -> Option<Vec<Complex64>> {
    let ev: Array1<Complex64> = m.eigvals().ok()?;
    let out: Vec<Complex64> = ev.into_iter().collect();
    if out.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return None;
    }
    Some(out)
}

/// Full spectral decomposition with overlaps.
///
/// Right eigenvectors come from the dense solver; left eigenvectors are the
/// rows of V⁻¹ (one LU solve), which enforces ⟨L_α, R_β⟩ = δ_αβ exactly.
/// Overlaps are O_αβ = (V⁻¹V⁻†)_αβ ⊙ (V†V)_αβ in both index conventions.
/// Returns None on solver failure or non-finite output; callers count such
/// rejections.
pub fn spectral_decompose(m: &Array2<Complex64>) -> Option<SpectralSample> {
    let (eigenvalues, v) = m.eig().ok()?;
    let v_inv = v.inv().ok()?;

    let n = v.nrows();
    let condition_estimate = lu_pivot_ratio(&v)?;
    if !condition_estimate.is_finite() {
        return None;
    }

    let gram_left = v_inv.dot(&v_inv.t().mapv(|z| z.conj()));
    let gram_right = v.t().mapv(|z| z.conj()).dot(&v);

    let mut offdiag = Array2::zeros((n, n));
    let mut offdiag_alt = Array2::zeros((n, n));
    let mut diag = Vec::with_capacity(n);
    for a in 0..n {
        for b in 0..n {
            let gl = gram_left[(a, b)];
            let gr = gram_right[(a, b)];
            offdiag[(a, b)] = gl * gr.conj();
            offdiag_alt[(a, b)] = gl * gr;
        }
        let o = offdiag[(a, a)].re;
        if !o.is_finite() {
            return None;
        }
        diag.push(o);
    }

    Some(SpectralSample {
        eigenvalues: eigenvalues.into_iter().collect(),
        diag_overlap: diag,
        offdiag_overlap: offdiag,
        offdiag_overlap_alt: offdiag_alt,
        condition_estimate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn gaussian_second_moment() {
        // E[Tr M M†] = N²; sample mean over 10⁴ draws at N = 4 within 3 SE.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 4usize;
        let draws = 10_000;
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for _ in 0..draws {
            let m = sample_ginibre(n, &mut rng);
            let tr: f64 = m.iter().map(|z| z.norm_sqr()).sum();
            sum += tr;
            sum_sq += tr * tr;
        }
        let mean = sum / draws as f64;
        let var = sum_sq / draws as f64 - mean * mean;
        let se = (var / draws as f64).sqrt();
        assert!(
            (mean - (n * n) as f64).abs() < 3.0 * se,
            "mean {mean} vs {} ± {se}",
            n * n
        );
    }

    #[test]
    fn scalar_case_has_unit_overlap() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let m = sample_ginibre(1, &mut rng);
            let s = spectral_decompose(&m).unwrap();
            assert!((s.diag_overlap[0] - 1.0).abs() < 1e-12);
            assert!((s.eigenvalues[0] - m[(0, 0)]).norm() < 1e-12);
        }
    }

    #[test]
    fn biorthogonality_invariants_hold() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut rejected = 0;
        for _ in 0..500 {
            let m = sample_ginibre(5, &mut rng);
            match spectral_decompose(&m) {
                Some(s) => {
                    assert!(s.diag_deficit() >= -1e-8, "O_αα < 1: {}", s.diag_deficit());
                    assert!(s.sum_rule_deviation() < 1e-6, "sum rule: {}", s.sum_rule_deviation());
                }
                None => rejected += 1,
            }
        }
        assert_eq!(rejected, 0);
    }

    #[test]
    fn reconstruction_sanity() {
        // V·diag(λ)·V⁻¹ reproduces M.
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = sample_ginibre(6, &mut rng);
        let (ev, v) = m.eig().unwrap();
        let vinv = v.inv().unwrap();
        let recon = v.dot(&Array2::from_diag(&ev)).dot(&vinv);
        let err: f64 = (&recon - &m).iter().map(|z| z.norm()).sum();
        assert!(err < 1e-10, "reconstruction error {err}");
    }

    #[test]
    fn eigenvalues_only_agrees_with_full() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let m = sample_ginibre(5, &mut rng);
        let mut a = eigenvalues_only(&m).unwrap();
        let mut b = spectral_decompose(&m).unwrap().eigenvalues;
        let key = |z: &Complex64| (z.re, z.im);
        a.sort_by(|x, y| key(x).partial_cmp(&key(y)).unwrap());
        b.sort_by(|x, y| key(x).partial_cmp(&key(y)).unwrap());
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).norm() < 1e-10);
        }
    }
}
