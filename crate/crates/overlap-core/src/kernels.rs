//! Finite-N kernels and conditional overlap determinants.
//!
//! The k-point conditional diagonal overlap is
//!   D11(λ_1,…,λ_k) = (1/π)·f_{N−1}(λ_1λ̄_1)·e^{−λ_1λ̄_1}
//!                    · det_{2≤i,j≤k}[ K11^{(N−1)}(λ_i, λ̄_i, λ_j, λ̄_j | λ_1, λ̄_1) ],
//! with K11 = ω·κ. The reduced kernel κ has two representations: the
//! biorthogonal sum over P_k/Q_k and a closed form in 𝔉_N; they are kept as
//! independent code paths and cross-checked in the tests. The off-diagonal
//! overlap follows from D11 by the transposition λ̄_1 ↔ λ̄_2 together with the
//! factor −e^{−u}/(1−u), u = (λ_1−λ_2)(λ̄_1−λ̄_2); the zero of the transposed
//! D11 on the ring u = 1 cancels the pole, and near the ring the ratio is
//! interpolated from evaluations just outside it.

use num_complex::Complex64;

use crate::biorthogonal::{f_sequence, ConditionPoint};
use crate::error::{CoreError, Result};
use crate::quad::DiskRule;
use crate::scaled::ScaledComplex;
use crate::specfun::{f_fun, frak_f, ln_factorial};

/// Switch distance to the singular sets of the closed-form reduced kernel
/// (x̄ → λ̄, y → λ, λ → 0) below which `kappa_closed` falls back to the sum.
///
/// The closed form loses roughly sep⁻² (one coordinate near its singular
/// set) to sep⁻⁴ (both) digits to cancellation; 0.05 keeps the residual
/// below ~2e-10 relative while the sum remains exact and no slower.
pub const EPS_K: f64 = 0.05;

/// Half-width of the removable ring |1 − u| around u = 1 inside which D12 is
/// interpolated instead of divided.
pub const EPS_T: f64 = 1e-3;

/// A spectral point (z, z̄) with independent coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitPoint {
    pub z: Complex64,
    pub z_bar: Complex64,
}

impl SplitPoint {
    pub fn new(z: Complex64, z_bar: Complex64) -> Self {
        Self { z, z_bar }
    }

    pub fn physical(z: Complex64) -> Self {
        Self { z, z_bar: z.conj() }
    }

    pub fn to_condition(self) -> ConditionPoint {
        ConditionPoint::new(self.z, self.z_bar)
    }

    /// The product zz̄ (equals |z|² on physical points).
    pub fn product(&self) -> Complex64 {
        self.z * self.z_bar
    }
}

impl From<ConditionPoint> for SplitPoint {
    fn from(c: ConditionPoint) -> Self {
        SplitPoint::new(c.lambda, c.lambda_bar)
    }
}

/// ω(z, x | u, v) = (1/π)·(1 + (z−u)(x−v))·e^{−zx}.
pub fn weight_omega(z: Complex64, x: Complex64, u: Complex64, v: Complex64) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    (one + (z - u) * (x - v)) * (-z * x).exp() / std::f64::consts::PI
}

/// Same weight in scaled form, safe for split arguments where Re(zx) is very
/// negative.
fn weight_omega_scaled(z: Complex64, x: Complex64, u: Complex64, v: Complex64) -> ScaledComplex {
    let one = Complex64::new(1.0, 0.0);
    let zx = z * x;
    let front = (one + (z - u) * (x - v)) / std::f64::consts::PI;
    ScaledComplex::from_parts(front * Complex64::from_polar(1.0, -zx.im), -zx.re)
}

/// Reduced kernel κ^{(N)}(x̄, y | λ, λ̄) as the biorthogonal sum
/// Σ_{k=0}^{N−1} conj(P_k)(x̄)·Q_k(y)/d_k.
///
/// conj(P_k) means the polynomial with the conjugated coefficients, i.e. the
/// inverse factor (L^{-1})_{km} itself, evaluated at the independent
/// coordinate x̄. With S_k(x̄) = Σ_m f_m·λ̄^{k−m}·x̄^m and T_k(y) the same in
/// (λ, y), each term is S_k·T_k/((k+1)!·f_k·f_{k+1}), accumulated by O(1)
/// recurrences in k. The S/T recurrences run compensated: on split condition
/// points these sums can sit orders of magnitude below their largest terms,
/// and plain accumulation would forfeit the representation-equivalence
/// budget.
pub fn kappa_sum(
    n: usize,
    x_bar: Complex64,
    y: Complex64,
    cond: &ConditionPoint,
) -> Result<ScaledComplex> {
    assert!(n >= 1);
    if n <= 64 {
        if let Some(v) = kappa_sum_dd(n, x_bar, y, cond)? {
            return Ok(v);
        }
    }
    kappa_sum_scaled(n, x_bar, y, cond)
}

/// Double-double evaluation of the biorthogonal sum, used at desk sizes.
///
/// Returns Ok(None) when an intermediate leaves the f64 range, in which case
/// the caller falls back to the scaled path.
fn kappa_sum_dd(
    n: usize,
    x_bar: Complex64,
    y: Complex64,
    cond: &ConditionPoint,
) -> Result<Option<ScaledComplex>> {
    use crate::ddc::{exp_dd, Dd, DdComplex};

    let a = DdComplex::from_prod(cond.lambda, cond.lambda_bar);
    let r = a.norm_est();
    let anchor = crate::specfun::backward_threshold(r).ceil() as usize;
    let ea = exp_dd(a);

    // f_p(a) for p = 0..=n: ascending series below the transition order,
    // complementary series past it.
    let mut fs: Vec<DdComplex> = Vec::with_capacity(n + 1);
    let mut term = DdComplex::from_f64(1.0); // a^p/p!
    let mut e_prev = DdComplex::ZERO;
    let mut e_cur = DdComplex::from_f64(1.0);
    let mut tail_start: Option<DdComplex> = None; // a^{p+2}/(p+2)!
    for p in 0..=n {
        let f_p = if p >= anchor {
            let ts = tail_start.unwrap_or_else(|| {
                term.mul(a).div_f64(p as f64 + 1.0).mul(a).div_f64(p as f64 + 2.0)
            });
            let head = ea.mul(DdComplex::from_f64(p as f64 + 1.0).sub(a));
            let mut t = ts;
            let mut sum = t; // (k − p − 1) = 1 at k = p + 2
            let mut k = p + 3;
            while k < p + 2000 {
                t = t.mul(a).div_f64(k as f64);
                let contrib = t.mul_f64((k - p - 1) as f64);
                sum = sum.add(contrib);
                if contrib.norm_est() <= sum.norm_est() * 1e-33 {
                    break;
                }
                k += 1;
            }
            tail_start = Some(ts.mul(a).div_f64(p as f64 + 3.0));
            head.add(sum)
        } else {
            e_cur.mul_f64(p as f64 + 1.0).sub(e_prev.mul(a))
        };
        if !f_p.is_finite() {
            return Ok(None);
        }
        if f_p.to_c64().norm() == 0.0 {
            return Err(CoreError::DegenerateCondition { p, modulus: 0.0 });
        }
        fs.push(f_p);
        if p < anchor {
            term = term.mul(a).div_f64(p as f64 + 1.0);
            e_prev = e_cur;
            e_cur = e_cur.add(term);
        }
    }

    let mut s = DdComplex::from_f64(1.0); // S_0 = f_0
    let mut t = DdComplex::from_f64(1.0); // T_0
    let mut xb_pow = DdComplex::from_f64(1.0);
    let mut y_pow = DdComplex::from_f64(1.0);
    let mut fact = Dd::from_f64(1.0); // (k+1)!
    let mut acc = DdComplex::ZERO;
    for k in 0..n {
        fact = fact.mul_f64(k as f64 + 1.0);
        let denom = fs[k].mul(fs[k + 1]).scale(fact);
        acc = acc.add(s.mul(t).div(denom));
        if !acc.is_finite() {
            return Ok(None);
        }
        if k + 1 < n {
            xb_pow = xb_pow.mul_c64(x_bar);
            y_pow = y_pow.mul_c64(y);
            s = s.mul_c64(cond.lambda_bar).add(fs[k + 1].mul(xb_pow));
            t = t.mul_c64(cond.lambda).add(fs[k + 1].mul(y_pow));
            if !s.is_finite() || !t.is_finite() {
                return Ok(None);
            }
        }
    }
    Ok(Some(ScaledComplex::from_complex(acc.to_c64())))
}

/// Scaled-arithmetic evaluation with compensated recurrences, valid for any
/// N the factorization supports.
fn kappa_sum_scaled(
    n: usize,
    x_bar: Complex64,
    y: Complex64,
    cond: &ConditionPoint,
) -> Result<ScaledComplex> {
    let fs = f_sequence(n, cond)?;
    let mut s = CompensatedScaled::one(); // S_0 = f_0 = 1
    let mut t = CompensatedScaled::one(); // T_0
    let mut xb_pow = CompensatedScaled::one(); // x̄^k
    let mut y_pow = CompensatedScaled::one(); // y^k
    let mut fact = ScaledComplex::ONE; // (k+1)!
    let mut acc = ScaledComplex::ZERO;
    for k in 0..n {
        fact = fact.mul_complex(Complex64::new(k as f64 + 1.0, 0.0));
        let denom = fact.mul(&fs[k]).mul(&fs[k + 1]);
        acc = acc.add(&s.collapse().mul(&t.collapse()).div(&denom));
        if k + 1 < n {
            xb_pow.scale_add(x_bar, &ScaledComplex::ZERO);
            y_pow.scale_add(y, &ScaledComplex::ZERO);
            s.scale_add(cond.lambda_bar, &fs[k + 1].mul(&xb_pow.collapse()));
            t.scale_add(cond.lambda, &fs[k + 1].mul(&y_pow.collapse()));
        }
    }
    Ok(acc)
}

// Error-free transformations for the compensated recurrences above.
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

fn complex_two_sum(a: Complex64, b: Complex64) -> (Complex64, Complex64) {
    let (re, er) = two_sum(a.re, b.re);
    let (im, ei) = two_sum(a.im, b.im);
    (Complex64::new(re, im), Complex64::new(er, ei))
}

fn complex_two_prod(a: Complex64, b: Complex64) -> (Complex64, Complex64) {
    let (p1, e1) = two_prod(a.re, b.re);
    let (p2, e2) = two_prod(a.im, b.im);
    let (p3, e3) = two_prod(a.re, b.im);
    let (p4, e4) = two_prod(a.im, b.re);
    let (re, er) = two_sum(p1, -p2);
    let (im, ei) = two_sum(p3, p4);
    (
        Complex64::new(re, im),
        Complex64::new(er + e1 - e2, ei + e3 + e4),
    )
}

/// A complex value (val + err)·e^offset with the rounding residual carried
/// alongside.
struct CompensatedScaled {
    val: Complex64,
    err: Complex64,
    offset: f64,
}

impl CompensatedScaled {
    fn one() -> Self {
        Self {
            val: Complex64::new(1.0, 0.0),
            err: Complex64::new(0.0, 0.0),
            offset: 0.0,
        }
    }

    /// v ← c·v + t, with t given in scaled form.
    fn scale_add(&mut self, c: Complex64, t: &ScaledComplex) {
        let t_plain = if t.is_zero() {
            Complex64::new(0.0, 0.0)
        } else {
            t.mantissa() * (t.log_scale() - self.offset).exp()
        };
        if !t_plain.is_finite() {
            // t dwarfs the running value beyond the f64 range; restart at its scale.
            self.val = t.mantissa();
            self.err = Complex64::new(0.0, 0.0);
            self.offset = t.log_scale();
            return;
        }
        let (p, pe) = complex_two_prod(c, self.val);
        let (v, ve) = complex_two_sum(p, t_plain);
        self.err = c * self.err + pe + ve;
        self.val = v;
        // Power-of-two renormalization is exact on both parts.
        let m = self.val.norm();
        if m > 1e120 {
            let down = (-512f64).exp2();
            self.val *= down;
            self.err *= down;
            self.offset += 512.0 * std::f64::consts::LN_2;
        } else if m != 0.0 && m < 1e-120 {
            let up = (512f64).exp2();
            self.val *= up;
            self.err *= up;
            self.offset -= 512.0 * std::f64::consts::LN_2;
        }
    }

    fn collapse(&self) -> ScaledComplex {
        ScaledComplex::from_parts(self.val + self.err, self.offset)
    }
}

/// Reduced kernel in closed form:
/// [(N+1)·𝔉_{N+1}(λλ̄, x̄/λ̄, y/λ) − λλ̄·𝔉_N(λλ̄, x̄/λ̄, y/λ)]
///   / [(x̄−λ̄)²·(y−λ)²·f_N(λλ̄)].
///
/// Near the removable configurations (x̄ ≈ λ̄, y ≈ λ) and near λ = 0 the
/// expression cancels catastrophically, so it hands off to [`kappa_sum`],
/// which is exact there.
pub fn kappa_closed(
    n: usize,
    x_bar: Complex64,
    y: Complex64,
    cond: &ConditionPoint,
) -> Result<ScaledComplex> {
    assert!(n >= 1);
    let lam = cond.lambda;
    let lam_bar = cond.lambda_bar;
    if lam.norm() < EPS_K
        || lam_bar.norm() < EPS_K
        || (x_bar - lam_bar).norm() < EPS_K
        || (y - lam).norm() < EPS_K
    {
        return kappa_sum(n, x_bar, y, cond);
    }
    let a = cond.product();
    let y_arg = x_bar / lam_bar;
    let z_arg = y / lam;
    let num = frak_f(n as u32 + 1, a, y_arg, z_arg)
        .mul_complex(Complex64::new(n as f64 + 1.0, 0.0))
        .sub(&frak_f(n as u32, a, y_arg, z_arg).mul_complex(a));
    let den_plain = (x_bar - lam_bar).powu(2) * (y - lam).powu(2);
    let den = f_fun(n as u32, a).mul_complex(den_plain);
    if den.is_zero() {
        return Err(CoreError::DegenerateCondition { p: n, modulus: 0.0 });
    }
    Ok(num.div(&den))
}

/// K11^{(N)}(x, x̄, y, ȳ | λ, λ̄) = ω(x, x̄ | λ, λ̄)·κ^{(N)}(x̄, y | λ, λ̄).
///
/// The value does not depend on ȳ.
pub fn k11(n: usize, x: &SplitPoint, y: &SplitPoint, cond: &ConditionPoint) -> Result<ScaledComplex> {
    let w = weight_omega_scaled(x.z, x.z_bar, cond.lambda, cond.lambda_bar);
    Ok(w.mul(&kappa_closed(n, x.z_bar, y.z, cond)?))
}

/// Dense matrix of scaled kernel values with a determinant.
#[derive(Debug, Clone)]
pub struct KernelMatrix {
    pub size: usize,
    entries: Vec<ScaledComplex>,
}

impl KernelMatrix {
    pub fn from_fn<F: FnMut(usize, usize) -> Result<ScaledComplex>>(
        size: usize,
        mut f: F,
    ) -> Result<Self> {
        let mut entries = Vec::with_capacity(size * size);
        for i in 0..size {
            for j in 0..size {
                entries.push(f(i, j)?);
            }
        }
        Ok(Self { size, entries })
    }

    pub fn entry(&self, i: usize, j: usize) -> ScaledComplex {
        self.entries[i * self.size + j]
    }

    /// Determinant by LU with partial pivoting in plain doubles after the
    /// common log-scale (the max over entries) is factored out.
    pub fn det(&self) -> ScaledComplex {
        let n = self.size;
        if n == 0 {
            return ScaledComplex::ONE;
        }
        let s_max = self
            .entries
            .iter()
            .filter(|e| !e.is_zero())
            .map(|e| e.log_scale())
            .fold(f64::NEG_INFINITY, f64::max);
        if s_max == f64::NEG_INFINITY {
            return ScaledComplex::ZERO;
        }
        let mut m: Vec<Complex64> = self
            .entries
            .iter()
            .map(|e| e.mantissa() * (e.log_scale() - s_max).exp())
            .collect();
        let mut det = ScaledComplex::ONE;
        let mut sign = 1.0;
        for col in 0..n {
            let (pivot_row, pivot_norm) = (col..n)
                .map(|r| (r, m[r * n + col].norm()))
                .max_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap();
            if pivot_norm == 0.0 {
                return ScaledComplex::ZERO;
            }
            if pivot_row != col {
                for j in 0..n {
                    m.swap(col * n + j, pivot_row * n + j);
                }
                sign = -sign;
            }
            let pivot = m[col * n + col];
            det = det.mul(&ScaledComplex::from_complex(pivot));
            for r in (col + 1)..n {
                let factor = m[r * n + col] / pivot;
                for j in col..n {
                    let v = m[col * n + j];
                    m[r * n + j] -= factor * v;
                }
            }
        }
        det.mul_complex(Complex64::new(sign, 0.0)).mul_exp(n as f64 * s_max)
    }
}

fn require_points(op: &'static str, got: usize, min: usize, max: usize, need: &'static str) -> Result<()> {
    if got < min || got > max {
        return Err(CoreError::ArgumentCount { op, got, need });
    }
    Ok(())
}

/// Conditional diagonal overlap D11^{(N,k)} at `points` = (λ_1, …, λ_k).
///
/// For k = 1 the determinant is absent and only the prefactor remains.
pub fn d11(n: usize, points: &[SplitPoint]) -> Result<ScaledComplex> {
    require_points("d11", points.len(), 1, n, "1 ≤ k ≤ N")?;
    let cond = points[0].to_condition();
    let a = cond.product();
    let prefactor = f_fun(n as u32 - 1, a)
        .mul(&ScaledComplex::from_log_polar(-a.re, -a.im))
        .mul_complex(Complex64::new(1.0 / std::f64::consts::PI, 0.0));
    if points.len() == 1 {
        return Ok(prefactor);
    }
    let body = &points[1..];
    let matrix = KernelMatrix::from_fn(body.len(), |i, j| k11(n - 1, &body[i], &body[j], &cond))?;
    Ok(prefactor.mul(&matrix.det()))
}

/// Conditional off-diagonal overlap D12^{(N,k)} = −e^{−u}/(1−u)·T̂D11 with
/// u = (λ_1−λ_2)(λ̄_1−λ̄_2) and T̂ the swap λ̄_1 ↔ λ̄_2.
pub fn d12(n: usize, points: &[SplitPoint]) -> Result<ScaledComplex> {
    require_points("d12", points.len(), 2, n, "2 ≤ k ≤ N")?;
    d12_with(points, |pts| d11(n, pts))
}

/// Shared Lemma-1 machinery for the finite-N and bulk off-diagonal overlaps.
///
/// `eval_d11` is called on point lists with λ̄_1 and λ̄_2 already exchanged.
/// Within |1 − u| < [`EPS_T`] the ratio T̂D11/(1−u) is interpolated cubically
/// from u-offsets {2ε, 3ε, 4ε, 5ε}·ε̂ along the ray from 1 through u, moving
/// λ̄_2 to realize each offset.
pub(crate) fn d12_with<F>(points: &[SplitPoint], mut eval_d11: F) -> Result<ScaledComplex>
where
    F: FnMut(&[SplitPoint]) -> Result<ScaledComplex>,
{
    let p1 = points[0];
    let p2 = points[1];
    let u = (p1.z - p2.z) * (p1.z_bar - p2.z_bar);
    let one = Complex64::new(1.0, 0.0);
    let exp_mu = ScaledComplex::from_log_polar(-u.re, -u.im);

    let transposed = |lam2_bar: Complex64| -> Vec<SplitPoint> {
        let mut pts = points.to_vec();
        pts[0] = SplitPoint::new(p1.z, lam2_bar);
        pts[1] = SplitPoint::new(p2.z, p1.z_bar);
        pts
    };

    if (one - u).norm() >= EPS_T {
        let td11 = eval_d11(&transposed(p2.z_bar))?;
        return Ok(td11.mul_complex(-one / (one - u)).mul(&exp_mu));
    }

    // Removable ring: u ≈ 1 forces λ_1 ≠ λ_2, so λ̄_2 can be moved to place
    // u at chosen offsets from 1.
    let dir = if (u - one).norm() == 0.0 {
        one
    } else {
        (u - one) / (u - one).norm()
    };
    let s_target = (u - one).norm();
    let offsets = [2.0 * EPS_T, 3.0 * EPS_T, 4.0 * EPS_T, 5.0 * EPS_T];
    let mut samples = Vec::with_capacity(offsets.len());
    for &s in &offsets {
        let u_s = one + s * dir;
        // u_s = (λ_1 − λ_2)(λ̄_1 − λ̄_2(s))  ⇒  λ̄_2(s) = λ̄_1 − u_s/(λ_1 − λ_2)
        let lam2_bar = p1.z_bar - u_s / (p1.z - p2.z);
        let td11 = eval_d11(&transposed(lam2_bar))?;
        // ratio r(s) = T̂D11 / (1 − u_s), with 1 − u_s = −s·dir exactly
        samples.push(td11.mul_complex(-one / (s * dir)));
    }
    let mut ratio = ScaledComplex::ZERO;
    for i in 0..offsets.len() {
        let mut coeff = 1.0;
        for j in 0..offsets.len() {
            if j != i {
                coeff *= (s_target - offsets[j]) / (offsets[i] - offsets[j]);
            }
        }
        ratio = ratio.add(&samples[i].mul_complex(Complex64::new(coeff, 0.0)));
    }
    Ok(ratio.mul_complex(-one).mul(&exp_mu))
}

/// Eigenvalue kernel K_ev^{(N)}(x, y) = e^{−|x|²}·Σ_{m<N} (x̄y)^m/(π·m!).
pub fn ev_kernel(n: usize, x: Complex64, y: Complex64) -> ScaledComplex {
    assert!(n >= 1);
    crate::specfun::exp_poly(n as i64 - 1, x.conj() * y)
        .mul_exp(-x.norm_sqr())
        .mul_complex(Complex64::new(1.0 / std::f64::consts::PI, 0.0))
}

/// k-point eigenvalue correlation ρ^{(N,k)} = det[K_ev^{(N)}(λ_i, λ_j)].
pub fn rho(n: usize, points: &[Complex64]) -> Result<ScaledComplex> {
    require_points("rho", points.len(), 1, n, "1 ≤ k ≤ N")?;
    let m = KernelMatrix::from_fn(points.len(), |i, j| Ok(ev_kernel(n, points[i], points[j])))?;
    Ok(m.det())
}

/// Node counts for the brute-force integration of the remaining N−k
/// eigenvalues.
#[derive(Debug, Clone, Copy)]
pub struct BruteForceConfig {
    pub radial_nodes: usize,
    pub angular_nodes: usize,
    /// Relative tolerance for the doubled-resolution convergence check.
    pub tol: f64,
}

impl Default for BruteForceConfig {
    fn default() -> Self {
        Self {
            radial_nodes: 40,
            angular_nodes: 32,
            tol: 1e-7,
        }
    }
}

/// D11^{(N,k)} by direct integration of the joint-density formula: the
/// remaining N−k eigenvalues are integrated over ℂ by polar quadrature
/// against |Δ^{(N−1)}(λ_2,…,λ_N)|²·Π_m π·ω(λ_m, λ̄_m | λ_1, λ̄_1),
/// normalized by e^{−|λ_1|²}·N!/(Z_N·(N−k)!).
///
/// Only desk scale N − k ≤ 2 is supported, and the conditioned points must
/// be physical.
pub fn d11_bruteforce(n: usize, points: &[SplitPoint], quad: &BruteForceConfig) -> Result<Complex64> {
    require_points("d11_bruteforce", points.len(), 1, n, "1 ≤ k ≤ N")?;
    let k = points.len();
    let free = n - k;
    if free > 2 {
        return Err(CoreError::InvalidArgument(format!(
            "d11_bruteforce supports N − k ≤ 2, got {free}"
        )));
    }
    for p in points {
        if (p.z_bar - p.z.conj()).norm() > 1e-12 {
            return Err(CoreError::InvalidArgument(
                "d11_bruteforce requires physical points".into(),
            ));
        }
    }
    let coarse = bruteforce_integral(n, points, quad.radial_nodes, quad.angular_nodes)?;
    if free == 0 {
        return Ok(coarse);
    }
    let fine = bruteforce_integral(n, points, 2 * quad.radial_nodes, 2 * quad.angular_nodes)?;
    let delta = (fine - coarse).norm();
    if delta > quad.tol * fine.norm().max(1e-12) {
        return Err(CoreError::QuadratureNonConvergence { delta, tol: quad.tol });
    }
    Ok(fine)
}

fn bruteforce_integral(
    n: usize,
    points: &[SplitPoint],
    radial_nodes: usize,
    angular_nodes: usize,
) -> Result<Complex64> {
    let k = points.len();
    let free = n - k;
    let lam1 = points[0].z;
    // log prefactor: −|λ_1|² + ln N! − ln(N−k)! − ln Z_N
    let mut log_pref = -lam1.norm_sqr() + ln_factorial(n) - ln_factorial(free);
    log_pref -= n as f64 * std::f64::consts::PI.ln();
    for j in 0..=n {
        log_pref -= ln_factorial(j);
    }

    let fixed: Vec<Complex64> = points[1..].iter().map(|p| p.z).collect();
    let integrand = |frees: &[Complex64]| -> Complex64 {
        let mut ws: Vec<Complex64> = Vec::with_capacity(n - 1);
        ws.extend_from_slice(&fixed);
        ws.extend_from_slice(frees);
        let mut val = Complex64::new(1.0, 0.0);
        // |Δ^{(N−1)}|² over λ_2 … λ_N
        for i in 0..ws.len() {
            for j in (i + 1)..ws.len() {
                val *= (ws[i] - ws[j]).norm_sqr();
            }
        }
        // Π π·ω(λ_m, λ̄_m | λ_1, λ̄_1)
        for w in &ws {
            val *= std::f64::consts::PI
                * weight_omega(*w, w.conj(), points[0].z, points[0].z_bar);
        }
        val
    };

    let value = match free {
        0 => integrand(&[]),
        1 => {
            let rule = DiskRule::new((n as f64).sqrt() + 8.0, radial_nodes, angular_nodes);
            rule.integrate(|z| integrand(&[z]))
        }
        2 => {
            let rule = DiskRule::new((n as f64).sqrt() + 8.0, radial_nodes, angular_nodes);
            let mut acc = Complex64::new(0.0, 0.0);
            for &(z1, w1) in rule.points() {
                for &(z2, w2) in rule.points() {
                    acc += integrand(&[z1, z2]) * (w1 * w2);
                }
            }
            acc
        }
        _ => unreachable!(),
    };
    Ok(value * log_pref.exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    const PI: f64 = std::f64::consts::PI;

    #[test]
    fn weight_omega_values() {
        let u = c(0.3, -0.4);
        let v = c(0.1, 0.7);
        let w0 = weight_omega(c(0.0, 0.0), c(0.0, 0.0), u, v);
        let expect = (Complex64::new(1.0, 0.0) + u * v) / PI;
        assert_abs_diff_eq!((w0 - expect).norm(), 0.0, epsilon = 1e-15);
        // deformation vanishes when (z, x) = (u, v)
        let z = c(1.2, 0.5);
        let x = c(0.8, -0.1);
        let wd = weight_omega(z, x, z, x);
        assert_abs_diff_eq!((wd - (-z * x).exp() / PI).norm(), 0.0, epsilon = 1e-15);
        assert_relative_eq!(
            weight_omega(c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)).re,
            2.0 / (PI * 1.0_f64.exp()),
            max_relative = 1e-14
        );
    }

    #[test]
    fn kappa_sum_origin_small_n() {
        let cond = ConditionPoint::physical(c(0.0, 0.0));
        let xb = c(0.7, 0.3);
        let y = c(-0.2, 0.9);
        let k2 = kappa_sum(2, xb, y, &cond).unwrap().value();
        let expect = c(0.5, 0.0) + xb * y / 3.0;
        assert_abs_diff_eq!((k2 - expect).norm(), 0.0, epsilon = 1e-14);
        // N = 1: single constant term 1/d_0
        let cond1 = ConditionPoint::physical(c(0.6, -0.8));
        let k1 = kappa_sum(1, xb, y, &cond1).unwrap().value();
        assert_relative_eq!(k1.re, 1.0 / (2.0 + 1.0), max_relative = 1e-13);
    }

    #[test]
    fn kappa_closed_matches_hand_value() {
        // κ^{(1)}(0, 0 | 1, 1) = 1/3 through the closed-form branch.
        let cond = ConditionPoint::new(c(1.0, 0.0), c(1.0, 0.0));
        let v = kappa_closed(1, c(0.0, 0.0), c(0.0, 0.0), &cond).unwrap().value();
        assert_relative_eq!(v.re, 1.0 / 3.0, max_relative = 1e-12);
        assert_abs_diff_eq!(v.im, 0.0, epsilon = 1e-13);
    }

    #[test]
    fn kappa_closed_falls_back_near_singular_sets() {
        // λ = 0 must route through the sum; value = κ^{(1)} = 1/d_0 = 1/2.
        let cond = ConditionPoint::physical(c(0.0, 0.0));
        let v = kappa_closed(1, c(0.4, 0.1), c(0.2, -0.3), &cond).unwrap().value();
        assert_relative_eq!(v.re, 0.5, max_relative = 1e-13);
    }

    #[test]
    fn kappa_representations_agree() {
        let cond = ConditionPoint::physical(c(1.1, -0.6));
        for &(xb, y) in &[
            (c(0.4, 0.2), c(-0.7, 1.0)),
            (c(2.0, -1.5), c(1.4, 0.3)),
            (c(-1.0, 0.1), c(0.0, -2.0)),
        ] {
            for &n in &[2usize, 5, 10, 30] {
                let a = kappa_sum(n, xb, y, &cond).unwrap();
                let b = kappa_closed(n, xb, y, &cond).unwrap();
                let diff = a.sub(&b);
                assert!(
                    diff.is_zero() || diff.log_abs() < a.log_abs() - 9.0 * std::f64::consts::LN_10,
                    "nN={n}: rel exp {}",
                    diff.log_abs() - a.log_abs()
                );
            }
        }
    }

    #[test]
    fn kappa_closed_continuous_at_removable_point() {
        let cond = ConditionPoint::physical(c(0.9, 0.4));
        let xb = c(0.5, -0.2);
        let near = kappa_closed(6, xb, cond.lambda + c(1e-7, 0.0), &cond).unwrap().value();
        let at = kappa_sum(6, xb, cond.lambda, &cond).unwrap().value();
        assert!((near - at).norm() < 1e-5);
    }

    #[test]
    fn k11_single_point_closed_form() {
        // N=1, cond at origin: (1 + |w|²)·e^{−|w|²}/(2π)
        let cond = ConditionPoint::physical(c(0.0, 0.0));
        let w = c(0.8, -0.5);
        let p = SplitPoint::physical(w);
        let v = k11(1, &p, &p, &cond).unwrap().value();
        let r = w.norm_sqr();
        assert_relative_eq!(v.re, (1.0 + r) * (-r).exp() / (2.0 * PI), max_relative = 1e-12);
        assert_abs_diff_eq!(v.im, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn k11_ignores_y_bar() {
        let cond = ConditionPoint::physical(c(0.4, 0.3));
        let x = SplitPoint::physical(c(1.0, -0.2));
        let y1 = SplitPoint::new(c(0.3, 0.9), c(0.1, 0.1));
        let y2 = SplitPoint::new(c(0.3, 0.9), c(-5.0, 2.0));
        let a = k11(4, &x, &y1, &cond).unwrap().value();
        let b = k11(4, &x, &y2, &cond).unwrap().value();
        assert_abs_diff_eq!((a - b).norm(), 0.0, epsilon = 1e-15 * a.norm());
    }

    #[test]
    fn d11_single_point_values() {
        // k=1, N=1: e^{−|λ|²}/π
        let lam = c(0.7, -1.1);
        let v = d11(1, &[SplitPoint::physical(lam)]).unwrap().value();
        assert_relative_eq!(v.re, (-lam.norm_sqr()).exp() / PI, max_relative = 1e-13);
        // k=1, N=2, λ=0: f_1(0)/π = 2/π
        let v0 = d11(2, &[SplitPoint::physical(c(0.0, 0.0))]).unwrap().value();
        assert_relative_eq!(v0.re, 2.0 / PI, max_relative = 1e-14);
    }

    #[test]
    fn d11_two_point_closed_form() {
        // D11^{(2,2)} = (1 + |λ1−λ2|²)·e^{−|λ1|²−|λ2|²}/π². The third pair
        // sits at separation 0.14 where the closed κ representation keeps
        // only ~10 digits, hence the 1e-9 bound.
        for &(l1, l2) in &[
            (c(0.0, 0.0), c(1.0, 0.0)),
            (c(0.5, -0.3), c(-0.2, 0.8)),
            (c(1.4, 0.9), c(1.5, 1.0)),
        ] {
            let v = d11(2, &[SplitPoint::physical(l1), SplitPoint::physical(l2)])
                .unwrap()
                .value();
            let expect = (1.0 + (l1 - l2).norm_sqr())
                * (-l1.norm_sqr() - l2.norm_sqr()).exp()
                / (PI * PI);
            assert_relative_eq!(v.re, expect, max_relative = 1e-9);
            assert_abs_diff_eq!(v.im, 0.0, epsilon = 1e-11 * expect);
        }
    }

    #[test]
    fn d11_rejects_bad_counts() {
        let p = SplitPoint::physical(c(0.1, 0.1));
        assert!(matches!(
            d11(1, &[p, p]).unwrap_err(),
            CoreError::ArgumentCount { .. }
        ));
        assert!(matches!(
            d12(5, &[p]).unwrap_err(),
            CoreError::ArgumentCount { .. }
        ));
    }

    #[test]
    fn d12_two_point_closed_form_off_ring() {
        for &(l1, l2) in &[
            (c(0.0, 0.0), c(0.3, 0.1)),   // u well inside the ring
            (c(-0.4, 0.2), c(1.6, 0.5)),  // u well outside
        ] {
            let v = d12(2, &[SplitPoint::physical(l1), SplitPoint::physical(l2)])
                .unwrap()
                .value();
            let expect = -(-l1.norm_sqr() - l2.norm_sqr()).exp() / (PI * PI);
            assert_relative_eq!(v.re, expect, max_relative = 1e-12);
            assert_abs_diff_eq!(v.im, 0.0, epsilon = 1e-14 * expect.abs());
        }
    }

    #[test]
    fn d12_two_point_closed_form_on_ring() {
        // |λ1 − λ2| within 1e-4 of 1 exercises the interpolation path.
        let l1 = c(0.3, 0.2);
        for &eps in &[0.0, 1e-4, -1e-4, 5e-5] {
            let l2 = l1 + c(1.0 + eps, 0.0) * Complex64::from_polar(1.0, 0.7);
            let v = d12(2, &[SplitPoint::physical(l1), SplitPoint::physical(l2)])
                .unwrap()
                .value();
            let expect = -(-l1.norm_sqr() - l2.norm_sqr()).exp() / (PI * PI);
            assert_relative_eq!(v.re, expect, max_relative = 1e-10);
            assert_abs_diff_eq!(v.im, 0.0, epsilon = 1e-10 * expect.abs());
        }
    }

    #[test]
    fn d12_continuous_across_ring() {
        // Second differences along a segment crossing |λ1−λ2| = 1 stay bounded.
        let l1 = c(0.1, -0.2);
        let dir = Complex64::from_polar(1.0, 0.3);
        let n_pts = 17;
        let h = 2.5e-4;
        let mut vals = Vec::with_capacity(n_pts);
        for i in 0..n_pts {
            let t = 1.0 + h * (i as f64 - (n_pts as f64 - 1.0) / 2.0);
            let l2 = l1 + dir * t;
            vals.push(
                d12(3, &[
                    SplitPoint::physical(l1),
                    SplitPoint::physical(l2),
                    SplitPoint::physical(c(1.5, 1.0)),
                ])
                .unwrap()
                .value(),
            );
        }
        let scale = vals.iter().map(|v| v.norm()).fold(0.0, f64::max);
        for i in 1..n_pts - 1 {
            let second = vals[i + 1] - vals[i] * 2.0 + vals[i - 1];
            assert!(
                second.norm() < 1e-6 * scale,
                "spike at i={i}: {:e} vs scale {:e}",
                second.norm(),
                scale
            );
        }
    }

    #[test]
    fn d11_permutation_invariance() {
        let pts = [
            SplitPoint::physical(c(0.2, 0.1)),
            SplitPoint::physical(c(-0.5, 0.7)),
            SplitPoint::physical(c(1.1, -0.3)),
            SplitPoint::physical(c(0.4, 0.9)),
        ];
        let base = d11(6, &pts).unwrap().value();
        let swapped = d11(6, &[pts[0], pts[3], pts[2], pts[1]]).unwrap().value();
        assert_abs_diff_eq!((base - swapped).norm(), 0.0, epsilon = 1e-12 * base.norm());
    }

    #[test]
    fn d11_real_nonnegative_on_physical_points() {
        let pts = [
            SplitPoint::physical(c(0.3, -0.6)),
            SplitPoint::physical(c(1.0, 0.4)),
            SplitPoint::physical(c(-0.8, 0.2)),
        ];
        for k in 1..=3 {
            let v = d11(7, &pts[..k]).unwrap().value();
            assert!(v.re >= 0.0, "k={k}: {v}");
            assert!(v.im.abs() <= 1e-12 * v.re.max(1e-300), "k={k}: {v}");
        }
    }

    #[test]
    fn d12_conjugate_symmetry() {
        let l1 = c(0.6, 0.3);
        let l2 = c(-0.2, 0.5);
        let a = d12(4, &[SplitPoint::physical(l1), SplitPoint::physical(l2)])
            .unwrap()
            .value();
        let b = d12(4, &[SplitPoint::physical(l2), SplitPoint::physical(l1)])
            .unwrap()
            .value();
        assert_abs_diff_eq!((a - b.conj()).norm(), 0.0, epsilon = 1e-11 * a.norm());
    }

    #[test]
    fn ev_kernel_values() {
        assert_relative_eq!(
            ev_kernel(7, c(0.0, 0.0), c(0.0, 0.0)).value().re,
            1.0 / PI,
            max_relative = 1e-14
        );
        let x = c(1.2, -0.7);
        let diag = ev_kernel(9, x, x).value().re;
        assert_relative_eq!(
            diag,
            crate::specfun::gamma_ratio(9, x.norm_sqr()) / PI,
            max_relative = 1e-12
        );
    }

    #[test]
    fn rho_pair_values() {
        // k=2 at coincident points vanishes by repulsion.
        let z = c(0.4, 0.4);
        let v = rho(3, &[z, z]).unwrap();
        assert!(v.is_zero() || v.log_abs() < rho(3, &[z]).unwrap().log_abs() - 25.0);
        // N=2, k=2 equals 2·p_2 = |λ1−λ2|²·e^{−|λ1|²−|λ2|²}/π²
        let l1 = c(0.3, -0.9);
        let l2 = c(-0.6, 0.2);
        let got = rho(2, &[l1, l2]).unwrap().value().re;
        let expect = (l1 - l2).norm_sqr() * (-l1.norm_sqr() - l2.norm_sqr()).exp() / (PI * PI);
        assert_relative_eq!(got, expect, max_relative = 1e-12);
    }

    #[test]
    fn bruteforce_matches_closed_forms_no_integration() {
        // N = k = 2: nothing left to integrate.
        let l1 = c(0.4, 0.1);
        let l2 = c(-0.3, 0.6);
        let v = d11_bruteforce(
            2,
            &[SplitPoint::physical(l1), SplitPoint::physical(l2)],
            &BruteForceConfig::default(),
        )
        .unwrap();
        let expect = (1.0 + (l1 - l2).norm_sqr())
            * (-l1.norm_sqr() - l2.norm_sqr()).exp()
            / (PI * PI);
        assert_relative_eq!(v.re, expect, max_relative = 1e-12);
    }

    #[test]
    fn bruteforce_single_free_eigenvalue() {
        // N=2, k=1 at the origin: 2/π.
        let v = d11_bruteforce(
            2,
            &[SplitPoint::physical(c(0.0, 0.0))],
            &BruteForceConfig::default(),
        )
        .unwrap();
        assert_relative_eq!(v.re, 2.0 / PI, max_relative = 1e-8);
        // and against the determinantal route at a generic point
        let lam = c(0.5, -0.4);
        let q = d11_bruteforce(
            2,
            &[SplitPoint::physical(lam)],
            &BruteForceConfig::default(),
        )
        .unwrap();
        let exact = d11(2, &[SplitPoint::physical(lam)]).unwrap().value();
        assert_relative_eq!(q.re, exact.re, max_relative = 1e-8);
    }

    #[test]
    fn bruteforce_two_free_eigenvalues() {
        // N=3, k=1: 4D quadrature against the closed form (1/π)f_2(|λ|²)e^{−|λ|²}.
        let lam = c(0.6, 0.2);
        let cfg = BruteForceConfig {
            radial_nodes: 24,
            angular_nodes: 20,
            tol: 1e-5,
        };
        let v = d11_bruteforce(3, &[SplitPoint::physical(lam)], &cfg).unwrap();
        let exact = d11(3, &[SplitPoint::physical(lam)]).unwrap().value();
        assert_relative_eq!(v.re, exact.re, max_relative = 1e-6);
    }
}
