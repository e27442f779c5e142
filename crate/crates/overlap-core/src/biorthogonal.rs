//! The moment matrix of the deformed weight, its LDU factorization in closed
//! form and by numeric elimination, the biorthogonal polynomials P_k/Q_k,
//! and the partition functions.
//!
//! The deformed weight at condition point (λ, λ̄) is
//! ω(z, z̄) = (1/π)(1 + (z−λ)(z̄−λ̄))·e^{−zz̄}, and the moment matrix
//! 𝓜_ij = ⟨z^i, z^j⟩ under it is tridiagonal:
//!   𝓜_ii = i!·(i + 2 + λλ̄),  𝓜_{i,i+1} = −λ·(i+1)!,  𝓜_{i+1,i} = −λ̄·(i+1)!.
//! Its unit-triangular LDU factors close in terms of f_p(λλ̄):
//!   L_{i+1,i} = −λ̄·f_i/f_{i+1},  d_m = (m+1)!·f_{m+1}/f_m,  U_{i,i+1} = −λ·f_i/f_{i+1}.

use num_complex::Complex64;

use crate::error::{CoreError, Result};
use crate::quad::DiskRule;
use crate::scaled::ScaledComplex;

/// A conditioning point (λ, λ̄) with the two coordinates treated as
/// independent complex variables.
///
/// Nothing constrains `lambda_bar` to be the complex conjugate of `lambda`;
/// the overlap functions are entire in both. Use [`ConditionPoint::physical`]
/// for the usual case.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionPoint {
    pub lambda: Complex64,
    pub lambda_bar: Complex64,
}

impl ConditionPoint {
    pub fn new(lambda: Complex64, lambda_bar: Complex64) -> Self {
        Self { lambda, lambda_bar }
    }

    /// λ̄ = conj(λ).
    pub fn physical(lambda: Complex64) -> Self {
        Self {
            lambda,
            lambda_bar: lambda.conj(),
        }
    }

    /// The product λλ̄ (equals |λ|² on physical points).
    pub fn product(&self) -> Complex64 {
        self.lambda * self.lambda_bar
    }

    pub fn is_physical(&self, tol: f64) -> bool {
        (self.lambda_bar - self.lambda.conj()).norm() <= tol
    }
}

/// The tridiagonal moment matrix 𝓜_ij = ⟨z^i, z^j⟩, entries as plain
/// doubles-of-complex.
///
/// Factorials enter the entries directly, so plain storage is adequate up to
/// n ≈ 170; the numeric-factorization oracle is only ever exercised at
/// n ≤ 50 where everything is comfortably in range.
#[derive(Debug, Clone)]
pub struct TridiagonalMoments {
    pub n: usize,
    pub diag: Vec<Complex64>,
    pub superdiag: Vec<Complex64>,
    pub subdiag: Vec<Complex64>,
}

impl TridiagonalMoments {
    /// Determinant by the continuant recurrence, carried in scaled arithmetic.
    pub fn det(&self) -> ScaledComplex {
        let mut prev = ScaledComplex::ONE; // det of the empty matrix
        let mut cur = ScaledComplex::from_complex(self.diag[0]);
        for p in 1..self.n {
            let next = cur.mul_complex(self.diag[p]).sub(
                &prev.mul_complex(self.subdiag[p - 1] * self.superdiag[p - 1]),
            );
            prev = cur;
            cur = next;
        }
        cur
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        if i == j {
            self.diag[i]
        } else if j == i + 1 {
            self.superdiag[i]
        } else if i == j + 1 {
            self.subdiag[j]
        } else {
            Complex64::new(0.0, 0.0)
        }
    }
}

/// Unit-triangular LDU factors of the moment matrix.
#[derive(Debug, Clone)]
pub struct LduFactors {
    pub n: usize,
    /// Pivots d_0 … d_{n−1}; these grow factorially, hence scaled.
    pub d: Vec<ScaledComplex>,
    /// Subdiagonal of L: `l_sub[i] = L_{i+1,i}`.
    pub l_sub: Vec<Complex64>,
    /// Superdiagonal of U: `u_super[i] = U_{i,i+1}`.
    pub u_super: Vec<Complex64>,
}

impl LduFactors {
    /// L·D·U multiplied back out, for entrywise comparison against the
    /// moment matrix.
    pub fn reconstruct(&self) -> TridiagonalMoments {
        let n = self.n;
        let d: Vec<Complex64> = self.d.iter().map(|s| s.value()).collect();
        let mut diag = vec![Complex64::new(0.0, 0.0); n];
        let mut superdiag = vec![Complex64::new(0.0, 0.0); n.saturating_sub(1)];
        let mut subdiag = vec![Complex64::new(0.0, 0.0); n.saturating_sub(1)];
        diag[0] = d[0];
        for p in 1..n {
            diag[p] = d[p] + self.l_sub[p - 1] * d[p - 1] * self.u_super[p - 1];
        }
        for p in 0..n.saturating_sub(1) {
            superdiag[p] = d[p] * self.u_super[p];
            subdiag[p] = self.l_sub[p] * d[p];
        }
        TridiagonalMoments {
            n,
            diag,
            superdiag,
            subdiag,
        }
    }
}

/// The sequence f_0(λλ̄), …, f_{n_max}(λλ̄) in scaled arithmetic, with the
/// degenerate-condition check applied to every element.
///
/// Below the `exp_poly` transition window the running e_p recurrence is
/// accurate; past it each f_p switches to its complementary series, which is
/// cancellation-free for split condition points with Re(λλ̄) ≪ |λλ̄|.
pub fn f_sequence(n_max: usize, cond: &ConditionPoint) -> Result<Vec<ScaledComplex>> {
    let a = cond.product();
    let r = a.norm();
    let anchor = crate::specfun::backward_threshold(r).ceil() as usize;
    let mut fs = Vec::with_capacity(n_max + 1);
    let mut term = ScaledComplex::ONE; // a^p/p!
    let mut e_prev = ScaledComplex::ZERO; // e_{p−1}(a)
    let mut e_cur = ScaledComplex::ONE; // e_p(a)
    for p in 0..=n_max {
        let f_p = if p >= anchor {
            crate::specfun::f_fun_backward(p as u32, a)
        } else {
            e_cur
                .mul_complex(Complex64::new(p as f64 + 1.0, 0.0))
                .sub(&e_prev.mul_complex(a))
        };
        if f_p.is_zero() {
            return Err(CoreError::DegenerateCondition { p, modulus: 0.0 });
        }
        fs.push(f_p);
        if p < anchor {
            term = term.mul_complex(a / (p as f64 + 1.0));
            e_prev = e_cur;
            e_cur = e_cur.add(&term);
        }
    }
    Ok(fs)
}

/// Closed-form tridiagonal moment matrix at a condition point.
pub fn moment_matrix(n: usize, cond: &ConditionPoint) -> TridiagonalMoments {
    assert!(n >= 1);
    let a = cond.product();
    let mut diag = Vec::with_capacity(n);
    let mut superdiag = Vec::with_capacity(n - 1);
    let mut subdiag = Vec::with_capacity(n - 1);
    let mut fact = 1.0; // i!
    for i in 0..n {
        diag.push((Complex64::new(i as f64 + 2.0, 0.0) + a) * fact);
        if i + 1 < n {
            let next_fact = fact * (i as f64 + 1.0);
            superdiag.push(-cond.lambda * next_fact);
            subdiag.push(-cond.lambda_bar * next_fact);
        }
        fact *= i as f64 + 1.0;
    }
    TridiagonalMoments {
        n,
        diag,
        superdiag,
        subdiag,
    }
}

/// LDU factors from the paper's closed forms in f_p(λλ̄).
pub fn ldu_closed(n: usize, cond: &ConditionPoint) -> Result<LduFactors> {
    assert!(n >= 1);
    let fs = f_sequence(n, cond)?;
    let mut d = Vec::with_capacity(n);
    let mut fact = ScaledComplex::ONE; // (m+1)!
    for m in 0..n {
        fact = fact.mul_complex(Complex64::new(m as f64 + 1.0, 0.0));
        d.push(fact.mul(&fs[m + 1].div(&fs[m])));
    }
    let mut l_sub = Vec::with_capacity(n - 1);
    let mut u_super = Vec::with_capacity(n - 1);
    for i in 0..n.saturating_sub(1) {
        let ratio = fs[i].ratio(&fs[i + 1]);
        l_sub.push(-cond.lambda_bar * ratio);
        u_super.push(-cond.lambda * ratio);
    }
    Ok(LduFactors { n, d, l_sub, u_super })
}

/// Standard tridiagonal LDU with unit-diagonal L and U, as an independent
/// numeric oracle for [`ldu_closed`].
pub fn ldu_numeric(m: &TridiagonalMoments) -> Result<LduFactors> {
    let n = m.n;
    let mut d_plain = Vec::with_capacity(n);
    let mut l_sub = Vec::with_capacity(n.saturating_sub(1));
    let mut u_super = Vec::with_capacity(n.saturating_sub(1));
    let mut d_prev = m.diag[0];
    check_pivot(d_prev, 0)?;
    d_plain.push(d_prev);
    for p in 1..n {
        l_sub.push(m.subdiag[p - 1] / d_prev);
        u_super.push(m.superdiag[p - 1] / d_prev);
        let d_p = m.diag[p] - m.subdiag[p - 1] * m.superdiag[p - 1] / d_prev;
        check_pivot(d_p, p)?;
        d_plain.push(d_p);
        d_prev = d_p;
    }
    Ok(LduFactors {
        n,
        d: d_plain.into_iter().map(ScaledComplex::from_complex).collect(),
        l_sub,
        u_super,
    })
}

fn check_pivot(d: Complex64, index: usize) -> Result<()> {
    let modulus = d.norm();
    if !(modulus >= 1e-300) || !modulus.is_finite() {
        return Err(CoreError::PivotBreakdown { index, modulus });
    }
    Ok(())
}

/// Monic polynomial Σ_{m=0}^{k} mult^{k−m}·(f_m/f_k)·z^m in scaled arithmetic.
fn monic_from_inverse(k: usize, z: Complex64, mult: Complex64, fs: &[ScaledComplex]) -> ScaledComplex {
    // z-powers ascending; mult-powers descending, walked from m = k downward.
    let mut acc = ScaledComplex::ZERO;
    let mut mult_pow = ScaledComplex::ONE;
    let mut z_pows = Vec::with_capacity(k + 1);
    let mut zp = ScaledComplex::ONE;
    for _ in 0..=k {
        z_pows.push(zp);
        zp = zp.mul_complex(z);
    }
    for m in (0..=k).rev() {
        acc = acc.add(&fs[m].mul(&z_pows[m]).mul(&mult_pow));
        mult_pow = mult_pow.mul_complex(mult);
    }
    acc.div(&fs[k])
}

/// The monic polynomial P_k(z) = Σ_m conj((L^{-1})_{km})·z^m.
///
/// The conjugation is entrywise on the inverse factor, which carries the
/// condition point to (conj λ̄, conj λ). On physical condition points P_k and
/// Q_k coincide; the biorthogonality quadrature pins this convention down.
pub fn poly_p(k: usize, z: Complex64, cond: &ConditionPoint) -> Result<ScaledComplex> {
    let conj_cond = ConditionPoint::new(cond.lambda_bar.conj(), cond.lambda.conj());
    let fs = f_sequence(k, &conj_cond)?;
    Ok(monic_from_inverse(k, z, conj_cond.lambda, &fs))
}

/// The monic polynomial Q_k(z) = Σ_m z^m·(U^{-1})_{mk}.
pub fn poly_q(k: usize, z: Complex64, cond: &ConditionPoint) -> Result<ScaledComplex> {
    let fs = f_sequence(k, cond)?;
    Ok(monic_from_inverse(k, z, cond.lambda, &fs))
}

/// ⟨P_i, Q_j⟩ by polar quadrature over the disk |z| ≤ R: Gauss–Legendre in
/// r², trapezoid in the angle, with a doubled-resolution convergence check.
///
/// Returns the approximation to δ_ij·d_j. The condition point must be
/// physical (the integral conjugates P pointwise).
pub fn inner_product_quad(
    i: usize,
    j: usize,
    cond: &ConditionPoint,
    radius: f64,
    radial_nodes: usize,
    tol: f64,
) -> Result<Complex64> {
    if !cond.is_physical(1e-12) {
        return Err(CoreError::InvalidArgument(
            "inner_product_quad requires a physical condition point".into(),
        ));
    }
    let angular = 4 * (i + j + 4);
    let coarse = biorthogonal_integral(i, j, cond, radius, radial_nodes, angular)?;
    let fine = biorthogonal_integral(i, j, cond, radius, 2 * radial_nodes, 2 * angular)?;
    let delta = (fine - coarse).norm();
    let scale = fine.norm().max(1.0);
    if delta > tol * scale {
        return Err(CoreError::QuadratureNonConvergence { delta, tol });
    }
    Ok(fine)
}

fn biorthogonal_integral(
    i: usize,
    j: usize,
    cond: &ConditionPoint,
    radius: f64,
    radial_nodes: usize,
    angular_nodes: usize,
) -> Result<Complex64> {
    let rule = DiskRule::new(radius, radial_nodes, angular_nodes);
    let mut acc = Complex64::new(0.0, 0.0);
    for &(z, w) in rule.points() {
        let weight = crate::kernels::weight_omega(z, z.conj(), cond.lambda, cond.lambda_bar);
        let p = poly_p(i, z, cond)?.value().conj();
        let q = poly_q(j, z, cond)?.value();
        acc += weight * p * q * w;
    }
    Ok(acc)
}

/// Z_n = π^n · Π_{j=0}^{n} j!.
pub fn partition_z(n: usize) -> ScaledComplex {
    let mut log = n as f64 * std::f64::consts::PI.ln();
    for j in 0..=n {
        log += crate::specfun::ln_factorial(j);
    }
    ScaledComplex::from_log_polar(log, 0.0)
}

/// Z′_n = n! · Π_{j=0}^{n−1} d_j(cond).
pub fn partition_zprime(n: usize, cond: &ConditionPoint) -> Result<ScaledComplex> {
    let ldu = ldu_closed(n, cond)?;
    let mut acc = ScaledComplex::from_log_polar(crate::specfun::ln_factorial(n), 0.0);
    for d in &ldu.d {
        acc = acc.mul(d);
    }
    Ok(acc)
}
