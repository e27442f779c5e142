//! Bulk scaling limits: the limiting reduced kernel, K11, the overlap
//! determinants, the Ginibre kernel with its k-point densities, the
//! differential identity relating the two, and finite-N convergence probes.
//!
//! All bulk quantities are O(1) by construction and are carried as plain
//! complex numbers.

use num_complex::Complex64;

use crate::biorthogonal::ConditionPoint;
use crate::error::{CoreError, Result};
use crate::kernels::{self, SplitPoint};
use crate::scaled::ScaledComplex;

/// Switch radius for the series branch of [`kappa_bulk`].
///
/// The direct form cancels like ε·2/|z|² near the origin (≈ 1.8e-13 at
/// |z| = 0.05), while 12 series terms truncate below 1e-17 there, so both
/// branches hold the 1e-12 handoff bound with margin.
pub const EPS_B: f64 = 5e-2;

const PI: f64 = std::f64::consts::PI;

/// κ^{(bulk)}(z) = d/dz[(e^z − 1)/z] = (e^z(z−1) + 1)/z².
///
/// Near z = 0 the direct form cancels; the Taylor series
/// Σ_{m≥0} (m+1)·z^m/(m+2)! takes over for |z| < [`EPS_B`].
pub fn kappa_bulk(z: Complex64) -> Complex64 {
    if z.norm() < EPS_B {
        // 12 terms: truncation ~ 13·|z|^12/14! < 1e-17 at |z| = EPS_B.
        let mut acc = Complex64::new(0.0, 0.0);
        let mut pow = Complex64::new(1.0, 0.0);
        let mut fact = 2.0; // (m+2)!
        for m in 0..12u32 {
            acc += pow * ((m as f64 + 1.0) / fact);
            pow *= z;
            fact *= m as f64 + 3.0;
        }
        acc
    } else {
        (z.exp() * (z - Complex64::new(1.0, 0.0)) + 1.0) / (z * z)
    }
}

/// Limiting kernel
/// K11^{(bulk)}(u, ū, v, v̄ | λ, λ̄)
///   = (1/π)·(1 + (u−λ)(ū−λ̄))·e^{−(u−λ)(ū−λ̄)}·κ^{(bulk)}((ū−λ̄)(v−λ)).
pub fn k11_bulk(u: &SplitPoint, v: &SplitPoint, cond: &ConditionPoint) -> Complex64 {
    let du = (u.z - cond.lambda) * (u.z_bar - cond.lambda_bar);
    let arg = (u.z_bar - cond.lambda_bar) * (v.z - cond.lambda);
    (Complex64::new(1.0, 0.0) + du) * (-du).exp() * kappa_bulk(arg) / PI
}

/// Bulk conditional diagonal overlap
/// D11^{(bulk,k)} = (1/π)·det_{2≤i,j≤k}[K11^{(bulk)}(λ_i, λ_j | λ_1)];
/// for k = 1 the determinant is absent and the overlap is the constant 1/π.
pub fn d11_bulk(points: &[SplitPoint]) -> Result<Complex64> {
    if points.is_empty() {
        return Err(CoreError::ArgumentCount {
            op: "d11_bulk",
            got: 0,
            need: "k ≥ 1",
        });
    }
    let cond = points[0].to_condition();
    let body = &points[1..];
    let det = dense_det(body.len(), |i, j| k11_bulk(&body[i], &body[j], &cond));
    Ok(det / PI)
}

/// Bulk off-diagonal overlap via the transposition identity, with the same
/// removable-ring interpolation as the finite-N version.
pub fn d12_bulk(points: &[SplitPoint]) -> Result<Complex64> {
    if points.len() < 2 {
        return Err(CoreError::ArgumentCount {
            op: "d12_bulk",
            got: points.len(),
            need: "k ≥ 2",
        });
    }
    let v = kernels::d12_with(points, |pts| {
        d11_bulk(pts).map(ScaledComplex::from_complex)
    })?;
    Ok(v.value())
}

/// The Ginibre kernel K_Gin(x, y) = (1/π)·exp[−|x|²/2 − |y|²/2 + x̄y].
pub fn ginibre_kernel(x: Complex64, y: Complex64) -> Complex64 {
    ((x.conj() * y) - 0.5 * x.norm_sqr() - 0.5 * y.norm_sqr()).exp() / PI
}

/// Limiting k-point density ρ^{(bulk,k)} = det[K_Gin(λ_i, λ_j)].
pub fn rho_bulk(points: &[Complex64]) -> Complex64 {
    let split: Vec<SplitPoint> = points.iter().map(|&z| SplitPoint::physical(z)).collect();
    rho_bulk_split(&split)
}

/// Split-variable extension of ρ^{(bulk,k)}: the kernel entries become
/// (1/π)·exp[−λ_iλ̄_i/2 − λ_jλ̄_j/2 + λ̄_iλ_j] with all 2k coordinates
/// independent. This is the function the holomorphic derivatives in
/// [`lemma5_rhs`] act on.
pub fn rho_bulk_split(points: &[SplitPoint]) -> Complex64 {
    dense_det(points.len(), |i, j| {
        ((points[i].z_bar * points[j].z)
            - 0.5 * points[i].product()
            - 0.5 * points[j].product())
        .exp()
            / PI
    })
}

fn dense_det<F: FnMut(usize, usize) -> Complex64>(n: usize, mut entry: F) -> Complex64 {
    if n == 0 {
        return Complex64::new(1.0, 0.0);
    }
    let mut m = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in 0..n {
            m[i * n + j] = entry(i, j);
        }
    }
    det_in_place(&mut m, n)
}

fn det_in_place(m: &mut [Complex64], n: usize) -> Complex64 {
    let mut det = Complex64::new(1.0, 0.0);
    for col in 0..n {
        let (pivot_row, pivot_norm) = (col..n)
            .map(|r| (r, m[r * n + col].norm()))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        if pivot_norm == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if pivot_row != col {
            for j in 0..n {
                m.swap(col * n + j, pivot_row * n + j);
            }
            det = -det;
        }
        let pivot = m[col * n + col];
        det *= pivot;
        for r in (col + 1)..n {
            let factor = m[r * n + col] / pivot;
            for j in col..n {
                let v = m[col * n + j];
                m[r * n + j] -= factor * v;
            }
        }
    }
    det
}

/// How `lemma5_rhs` takes the holomorphic derivatives ∂/∂λ_m.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivativeMode {
    /// Column-replacement derivatives of the Ginibre-kernel determinant.
    Analytic,
    /// Central differences of step 1e-5 in the λ_m coordinate of the
    /// split-variable extension, λ̄_m held fixed.
    FiniteDifference,
}

/// Step for a single holomorphic derivative (k = 2: one central difference).
const FD_STEP_SINGLE: f64 = 1e-5;
/// Step for nested mixed partials (k ≥ 3). Each nesting level divides by the
/// step, so roundoff grows like ε/h²; 1e-4 balances it against the h²
/// truncation term.
const FD_STEP_NESTED: f64 = 1e-4;

/// Right-hand side of the density–overlap identity:
/// (−1)^{k−1}·Π_{m=2}^k [(1+u_m)/u_m²]·(1 − u_m − (λ_m−λ_1)·∂/∂λ_m)·ρ^{(bulk,k)},
/// with u_m = (λ_m−λ_1)(λ̄_m−λ̄_1). Equals D11^{(bulk,k)}.
pub fn lemma5_rhs(points: &[SplitPoint], mode: DerivativeMode) -> Result<Complex64> {
    let k = points.len();
    if k < 2 {
        return Err(CoreError::ArgumentCount {
            op: "lemma5_rhs",
            got: k,
            need: "k ≥ 2",
        });
    }
    for (m, p) in points.iter().enumerate().skip(1) {
        let sep = (p.z - points[0].z).norm();
        if sep < 1e-8 {
            return Err(CoreError::CoincidentPoint { m: m + 1, separation: sep });
        }
    }

    let bracket = match mode {
        DerivativeMode::Analytic => lemma5_bracket_analytic(points),
        DerivativeMode::FiniteDifference => lemma5_op_fd(&mut points.to_vec(), 1),
    };

    let mut prefactor = Complex64::new(1.0, 0.0);
    for p in &points[1..] {
        let u = (p.z - points[0].z) * (p.z_bar - points[0].z_bar);
        prefactor *= (Complex64::new(1.0, 0.0) + u) / (u * u);
    }
    let sign = if k % 2 == 0 { -1.0 } else { 1.0 }; // (−1)^{k−1}
    Ok(sign * prefactor * bracket)
}

/// The operator product applied to ρ via the factorization
/// det[K_Gin] = e^{−Σ λλ̄}·det B with B_{ij} = e^{λ̄_iλ_j}/π: λ_m enters B only
/// through column m, so ∂_S det B is a single determinant with the columns in
/// S row-weighted by λ̄_i, and the scalar prefactor differentiates by the
/// product rule.
fn lemma5_bracket_analytic(points: &[SplitPoint]) -> Complex64 {
    let k = points.len();
    let body = k - 1; // operators act on m = 2..k  (indices 1..k-1)
    let exp_sum: Complex64 = (-points.iter().map(SplitPoint::product).sum::<Complex64>()).exp();

    let b_entry = |i: usize, j: usize| (points[i].z_bar * points[j].z).exp() / PI;

    // det B with the columns in `weighted` (bitmask over 1..k-1, bit m-1 for
    // point m) multiplied entrywise by λ̄_row.
    let weighted_det = |mask: usize| -> Complex64 {
        dense_det(k, |i, j| {
            let e = b_entry(i, j);
            if j >= 1 && (mask >> (j - 1)) & 1 == 1 {
                e * points[i].z_bar
            } else {
                e
            }
        })
    };

    let mut bracket = Complex64::new(0.0, 0.0);
    for s_mask in 0..(1usize << body) {
        // Π_{m∉S}(1 − u_m) · Π_{m∈S}(−(λ_m − λ_1))
        let mut coeff = Complex64::new(1.0, 0.0);
        for m in 1..k {
            let u = (points[m].z - points[0].z) * (points[m].z_bar - points[0].z_bar);
            if (s_mask >> (m - 1)) & 1 == 1 {
                coeff *= -(points[m].z - points[0].z);
            } else {
                coeff *= Complex64::new(1.0, 0.0) - u;
            }
        }
        // ∂_S ρ = e^{−Σλλ̄}·Σ_{T⊆S} Π_{m∈S∖T}(−λ̄_m)·det(B weighted on T)
        let mut d_rho = Complex64::new(0.0, 0.0);
        let mut t_mask = s_mask;
        loop {
            let mut scalar = Complex64::new(1.0, 0.0);
            let rest = s_mask & !t_mask;
            for m in 1..k {
                if (rest >> (m - 1)) & 1 == 1 {
                    scalar *= -points[m].z_bar;
                }
            }
            d_rho += scalar * weighted_det(t_mask);
            if t_mask == 0 {
                break;
            }
            t_mask = (t_mask - 1) & s_mask;
        }
        bracket += coeff * exp_sum * d_rho;
    }
    bracket
}

/// Nested central-difference application of the commuting operators
/// (1 − u_m) − (λ_m − λ_1)·∂_m for m = `level`..k.
fn lemma5_op_fd(points: &mut Vec<SplitPoint>, level: usize) -> Complex64 {
    let h = if points.len() > 2 {
        FD_STEP_NESTED
    } else {
        FD_STEP_SINGLE
    };
    if level >= points.len() {
        return rho_bulk_split(points);
    }
    let u = (points[level].z - points[0].z) * (points[level].z_bar - points[0].z_bar);
    let center = lemma5_op_fd(&mut points.clone(), level + 1);
    let mut plus = points.clone();
    plus[level].z += Complex64::new(h, 0.0);
    let f_plus = lemma5_op_fd(&mut plus, level + 1);
    let mut minus = points.clone();
    minus[level].z -= Complex64::new(h, 0.0);
    let f_minus = lemma5_op_fd(&mut minus, level + 1);
    let derivative = (f_plus - f_minus) / (2.0 * h);
    (Complex64::new(1.0, 0.0) - u) * center - (points[level].z - points[0].z) * derivative
}

/// The circular law (1/π)·Θ(1 − |z₀|²), with the boundary value at
/// |z₀| = 1 set to 1/(2π) by convention.
pub fn circular_density(z0: Complex64) -> f64 {
    let r = z0.norm_sqr();
    if r < 1.0 {
        1.0 / PI
    } else if r > 1.0 {
        0.0
    } else {
        0.5 / PI
    }
}

/// One row of the convergence table in [`BulkProbeReport`].
#[derive(Debug, Clone)]
pub struct RatioSample {
    pub n: usize,
    pub lambda1: SplitPoint,
    pub lambda2: SplitPoint,
    pub ratio: Complex64,
    pub bulk: Complex64,
}

/// Finite-N → bulk convergence measurements at a base point √N·z₀.
#[derive(Debug, Clone)]
pub struct BulkProbeReport {
    pub z0: Complex64,
    pub n_list: Vec<usize>,
    /// sup over test pairs of |R_N − K11_bulk| per N.
    pub sup_error: Vec<f64>,
    /// |(1/N)·D11^{(N,1)}(√N z₀) − (1−|z₀|²)/π| per N.
    pub k1_error: Vec<f64>,
    /// The measured (1/N)·D11^{(N,1)}(√N z₀) per N.
    pub k1_value: Vec<f64>,
    pub ratio_samples: Vec<RatioSample>,
}

/// Measures how fast the conjugation-invariant ratio
/// R_N(λ_1, λ_2) = D11^{(N,2)}(√N z₀+λ_1, √N z₀+λ_2) / D11^{(N,1)}(√N z₀+λ_1)
/// approaches K11^{(bulk)}(λ_2, λ_2 | λ_1), and how fast the k = 1 scalar
/// (1/N)·D11^{(N,1)}(√N z₀) approaches (1 − |z₀|²)/π.
pub fn bulk_convergence_probe(
    n_list: &[usize],
    z0: Complex64,
    test_points: &[(SplitPoint, SplitPoint)],
) -> Result<BulkProbeReport> {
    if z0.norm() > 0.9 {
        return Err(CoreError::InvalidArgument(format!(
            "bulk probe requires |z0| ≤ 0.9, got {}",
            z0.norm()
        )));
    }
    if !n_list.windows(2).all(|w| w[0] < w[1]) {
        return Err(CoreError::InvalidArgument(
            "N list must be strictly increasing".into(),
        ));
    }
    if n_list.iter().any(|&n| n == 0 || n > 700) {
        return Err(CoreError::Overflow {
            context: "bulk probe supports 1 ≤ N ≤ 700".into(),
        });
    }

    let mut sup_error = Vec::with_capacity(n_list.len());
    let mut k1_error = Vec::with_capacity(n_list.len());
    let mut k1_value = Vec::with_capacity(n_list.len());
    let mut ratio_samples = Vec::new();

    for &n in n_list {
        let center = (n as f64).sqrt() * z0;
        let shift = |p: &SplitPoint| SplitPoint::new(p.z + center, p.z_bar + center.conj());

        let base = kernels::d11(n, &[SplitPoint::physical(center)])?;
        let scaled = base.mul_exp(-(n as f64).ln()).value().re;
        k1_value.push(scaled);
        k1_error.push((scaled - (1.0 - z0.norm_sqr()) / PI).abs());

        let mut sup = 0.0f64;
        for (l1, l2) in test_points {
            let p1 = shift(l1);
            let p2 = shift(l2);
            let num = kernels::d11(n, &[p1, p2])?;
            let den = kernels::d11(n, &[p1])?;
            let ratio = num.div(&den).value();
            let bulk = k11_bulk(l2, l2, &l1.to_condition());
            sup = sup.max((ratio - bulk).norm());
            ratio_samples.push(RatioSample {
                n,
                lambda1: *l1,
                lambda2: *l2,
                ratio,
                bulk,
            });
        }
        sup_error.push(sup);
    }

    Ok(BulkProbeReport {
        z0,
        n_list: n_list.to_vec(),
        sup_error,
        k1_error,
        k1_value,
        ratio_samples,
    })
}
