//! Exponential polynomials and the special functions built from them.
//!
//! Everything downstream (norms, kernels, overlap determinants) reduces to
//! the truncated exponential e_n(w) = Σ_{k≤n} w^k/k!, the combination
//! f_p(w) = (p+1)e_p(w) − w e_{p−1}(w), and one three-argument function
//! 𝔉_n with a removable singularity at yz = 1. All of them grow like
//! e^{|w|}, so they are evaluated in scaled arithmetic with every partial
//! term pre-scaled by e^{−|w|}.

use num_complex::Complex64;
use std::sync::OnceLock;

use crate::scaled::ScaledComplex;

/// Switch radius |1 − yz| below which `frak_f` uses its series branch.
pub const EPS_F: f64 = 1e-4;

const LN_FACT_TABLE_LEN: usize = 4096;

fn ln_fact_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = Vec::with_capacity(LN_FACT_TABLE_LEN);
        t.push(0.0);
        for n in 1..LN_FACT_TABLE_LEN {
            t.push(t[n - 1] + (n as f64).ln());
        }
        t
    })
}

/// ln(n!). Table-backed for the sizes this crate uses; Stirling with the
/// 1/(12n) − 1/(360n³) corrections beyond that.
pub fn ln_factorial(n: usize) -> f64 {
    let table = ln_fact_table();
    if n < table.len() {
        return table[n];
    }
    let x = (n + 1) as f64;
    let inv = 1.0 / x;
    (x - 0.5) * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI).ln()
        + inv * (1.0 / 12.0 - inv * inv / 360.0)
}

/// w^{n+1} / n! as a scaled value (zero when w = 0).
pub(crate) fn pow_over_factorial(w: Complex64, n: u32) -> ScaledComplex {
    let r = w.norm();
    if r == 0.0 {
        return ScaledComplex::ZERO;
    }
    let log_mod = (n as f64 + 1.0) * r.ln() - ln_factorial(n as usize);
    ScaledComplex::from_log_polar(log_mod, (n as f64 + 1.0) * w.arg())
}

/// Order beyond which e_n(w) is computed from the complementary tail.
///
/// Forward summation at n past |w| subtracts e^{|w|}-sized terms to produce
/// a value that may be as small as e^{Re w}; the backward form
/// e^w − Σ_{k>n} w^k/k! is conditioned like O(√|w|) there. Below |w| the
/// ascending sum is dominated by its top terms and is the accurate branch.
pub(crate) fn backward_threshold(r: f64) -> f64 {
    r + 2.0
}

/// Exponential polynomial e_n(w) = Σ_{k=0}^{n} w^k/k!, with e_{-1} ≡ 0.
///
/// Accumulated by the term recurrence t_{k+1} = t_k·w/(k+1) in scaled
/// arithmetic; every partial term carries a pre-scale of e^{−|w|} so that the
/// largest term is O(1), and the scale is restored at the end. Deep in the
/// convergent regime (n well past |w|) the complementary form
/// e^w − Σ_{k>n} w^k/k! is used instead.
pub fn exp_poly(n: i64, w: Complex64) -> ScaledComplex {
    if n < 0 {
        return ScaledComplex::ZERO;
    }
    let r = w.norm();
    if r == 0.0 {
        return ScaledComplex::ONE;
    }
    if n as f64 >= backward_threshold(r) {
        return exp_poly_backward(n, w);
    }
    let mut term = ScaledComplex::from_parts(Complex64::new(1.0, 0.0), -r);
    let mut sum = term;
    for k in 1..=n {
        term = term.mul_complex(w / k as f64);
        sum = sum.add(&term);
    }
    sum.mul_exp(r)
}

/// e_n(w) = e^w − Σ_{k=n+1}^{∞} w^k/k!, for n past the transition window
/// where the tail terms decay geometrically.
fn exp_poly_backward(n: i64, w: Complex64) -> ScaledComplex {
    let ew = ScaledComplex::from_log_polar(w.re, w.im);
    let mut term = pow_over_factorial(w, n as u32).mul_complex(
        Complex64::new(1.0 / (n as f64 + 1.0), 0.0),
    ); // w^{n+1}/(n+1)!
    let mut tail = term;
    let mut k = n + 2;
    while k < n + 2000 {
        term = term.mul_complex(w / k as f64);
        tail = tail.add(&term);
        if term.log_abs() < tail.log_abs() - 40.0 {
            break;
        }
        k += 1;
    }
    ew.sub(&tail)
}

/// f_p(w) = (p+1)·e_p(w) − w·e_{p−1}(w).
///
/// Evaluated as the single series Σ_{k=0}^{p} (p+1−k)·w^k/k!, whose
/// coefficients are all positive, rather than by the two-term difference;
/// past the transition window the complementary form takes over for the same
/// reason as in [`exp_poly`].
pub fn f_fun(p: u32, w: Complex64) -> ScaledComplex {
    let r = w.norm();
    if r == 0.0 {
        return ScaledComplex::from_real(p as f64 + 1.0);
    }
    if p as f64 >= backward_threshold(r) {
        return f_fun_backward(p, w);
    }
    let mut term = ScaledComplex::from_parts(Complex64::new(1.0, 0.0), -r);
    let mut sum = term.mul_complex(Complex64::new(p as f64 + 1.0, 0.0));
    for k in 1..=p {
        term = term.mul_complex(w / k as f64);
        sum = sum.add(&term.mul_complex(Complex64::new((p + 1 - k) as f64, 0.0)));
    }
    sum.mul_exp(r)
}

/// f_p(w) = (p+1−w)·e^w + Σ_{k=p+2}^{∞} (k−p−1)·w^k/k!.
///
/// The tail series follows from substituting e_p = e^w − Σ_{k>p} w^k/k! into
/// the definition; its k = p+1 contribution cancels symbolically, and the
/// remaining terms decay geometrically once k > |w|, so this form is
/// cancellation-free exactly where the ascending series is not.
pub(crate) fn f_fun_backward(p: u32, w: Complex64) -> ScaledComplex {
    if w.norm() == 0.0 {
        return ScaledComplex::from_real(p as f64 + 1.0);
    }
    let head = ScaledComplex::from_log_polar(w.re, w.im)
        .mul_complex(Complex64::new(p as f64 + 1.0, 0.0) - w);
    // t = w^k/k! from k = p+2
    let mut t = pow_over_factorial(w, p + 1).mul_complex(Complex64::new(
        1.0 / (p as f64 + 2.0),
        0.0,
    ));
    let mut tail = t; // (k − p − 1) = 1 at k = p+2
    let mut k = p as i64 + 3;
    while k < p as i64 + 2000 {
        t = t.mul_complex(w / k as f64);
        tail = tail.add(&t.mul_complex(Complex64::new((k - p as i64 - 1) as f64, 0.0)));
        if t.log_abs() + ((k - p as i64) as f64).ln() < tail.log_abs() - 40.0 {
            break;
        }
        k += 1;
    }
    head.add(&tail)
}

/// Γ(N, x)/Γ(N) = e^{−x}·e_{N−1}(x) for real x ≥ 0.
///
/// Shares the scaled polynomial sum with `exp_poly`; monotone decreasing in x
/// and pinned to [0, 1].
pub fn gamma_ratio(n: u32, x: f64) -> f64 {
    assert!(n >= 1, "gamma_ratio requires N >= 1");
    assert!(x >= 0.0, "gamma_ratio requires x >= 0");
    let e = exp_poly(n as i64 - 1, Complex64::new(x, 0.0));
    e.mul_exp(-x).value().re.clamp(0.0, 1.0)
}

/// 𝔉_n(x, y, z) = e_n(xy)·e_n(xz)
///              − e_n(xyz)·e_n(x)·(1 − x(1−y)(1−z))
///              + (1−y)(1−z)/n! · [(xyz)^{n+1}·e_n(x) − x^{n+1}·e_n(xyz)] / (1−yz).
///
/// The last quotient has a removable singularity at yz = 1; within
/// |1 − yz| < [`EPS_F`] it is evaluated by a Taylor series in (1 − yz)
/// instead of direct division.
pub fn frak_f(n: u32, x: Complex64, y: Complex64, z: Complex64) -> ScaledComplex {
    let one = Complex64::new(1.0, 0.0);
    let xy = x * y;
    let xz = x * z;
    let xyz = x * y * z;

    let e_n_x = exp_poly(n as i64, x);
    let e_n_xyz = exp_poly(n as i64, xyz);

    let t1 = exp_poly(n as i64, xy).mul(&exp_poly(n as i64, xz));
    let t2 = e_n_xyz
        .mul(&e_n_x)
        .mul_complex(one - x * (one - y) * (one - z));

    let front = (one - y) * (one - z);
    let one_minus_yz = one - y * z;
    let t3 = if one_minus_yz.norm() >= EPS_F {
        let num = pow_over_factorial(xyz, n)
            .mul(&e_n_x)
            .sub(&pow_over_factorial(x, n).mul(&e_n_xyz));
        num.mul_complex(front / one_minus_yz)
    } else {
        frak_f_tail_series(n, x, one_minus_yz, &e_n_x).mul_complex(front)
    };

    t1.sub(&t2).add(&t3)
}

/// Relative gap between the direct-quotient and series branches of the 𝔉_n
/// tail term, evaluated at the same arguments. Branch-handoff self-check;
/// meaningful near |1 − yz| = [`EPS_F`].
pub fn frak_f_branch_gap(n: u32, x: Complex64, y: Complex64, z: Complex64) -> f64 {
    let one = Complex64::new(1.0, 0.0);
    let one_minus_yz = one - y * z;
    if one_minus_yz.norm() == 0.0 || x.norm() == 0.0 {
        return 0.0;
    }
    let e_n_x = exp_poly(n as i64, x);
    let xyz = x * y * z;
    let direct = pow_over_factorial(xyz, n)
        .mul(&e_n_x)
        .sub(&pow_over_factorial(x, n).mul(&exp_poly(n as i64, xyz)))
        .mul_complex(one / one_minus_yz);
    let series = frak_f_tail_series(n, x, one_minus_yz, &e_n_x);
    let diff = direct.sub(&series);
    if diff.is_zero() || direct.is_zero() {
        0.0
    } else {
        (diff.log_abs() - direct.log_abs()).exp()
    }
}

/// Series value of [(xyz)^{n+1}·e_n(x) − x^{n+1}·e_n(xyz)] / (n!·(1−yz)) in
/// powers of δ = 1 − yz.
///
/// With s = yz and H(s) = x^{n+1}(s^{n+1} e_n(x) − e_n(xs)), H(1) = 0 and
///   H^{(k)}(1) = x^{n+1}·[(n+1)!/(n+1−k)!·e_n(x) − x^k·e_{n−k}(x)],
/// so H(s)/(1−s) = Σ_{j≥0} (−1)^{j+1}·H^{(j+1)}(1)/(j+1)!·δ^j. The series
/// terminates at j = n and converges geometrically with ratio ~ n·|δ|.
fn frak_f_tail_series(
    n: u32,
    x: Complex64,
    delta: Complex64,
    e_n_x: &ScaledComplex,
) -> ScaledComplex {
    if x.norm() == 0.0 {
        return ScaledComplex::ZERO;
    }
    let base = pow_over_factorial(x, n); // x^{n+1}/n!
    let mut sum = ScaledComplex::ZERO;
    let mut falling = ScaledComplex::ONE; // (n+1)!/(n−j)! running product
    let mut inv_fact = ScaledComplex::ONE; // 1/(j+1)! running
    let mut delta_pow = ScaledComplex::ONE;
    let mut x_pow = ScaledComplex::from_complex(x); // x^{j+1}

    for j in 0..=(n as i64).min(64) {
        falling = falling.mul_complex(Complex64::new((n as i64 + 1 - j) as f64, 0.0));
        inv_fact = inv_fact.mul_complex(Complex64::new(1.0 / (j as f64 + 1.0), 0.0));
        // Bracket: (n+1)!/(n−j)!·e_n(x) − x^{j+1}·e_{n−j−1}(x), all over n!
        // (folded into `base` together with x^{n+1}).
        let bracket = falling
            .mul(e_n_x)
            .sub(&x_pow.mul(&exp_poly(n as i64 - j - 1, x)));
        let sign = if j % 2 == 0 { -1.0 } else { 1.0 };
        let term = base
            .mul(&bracket)
            .mul(&inv_fact)
            .mul(&delta_pow)
            .mul_complex(Complex64::new(sign, 0.0));
        sum = sum.add(&term);
        if !term.is_zero() && term.log_abs() < sum.log_abs() - 40.0 {
            break;
        }
        delta_pow = delta_pow.mul_complex(delta);
        x_pow = x_pow.mul_complex(x);
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn exp_poly_boundary_and_small_orders() {
        assert!(exp_poly(-1, c(3.0, -2.0)).is_zero());
        assert!(exp_poly(-1, c(0.0, 0.0)).is_zero());
        for &w in &[c(0.0, 0.0), c(2.0, 1.0), c(-40.0, 3.0)] {
            assert_relative_eq!(exp_poly(0, w).value().re, 1.0, max_relative = 1e-14);
            assert_abs_diff_eq!(exp_poly(0, w).value().im, 0.0, epsilon = 1e-14);
        }
        // e_2(1) = 1 + 1 + 1/2
        assert_relative_eq!(
            exp_poly(2, c(1.0, 0.0)).value().re,
            2.5,
            max_relative = 1e-15
        );
    }

    #[test]
    fn exp_poly_matches_exponential_for_large_order() {
        // n ≫ |w| ⇒ e_n(w) ≈ e^w even when e^w overflows a plain double.
        let w = c(500.0, 40.0);
        let e = exp_poly(700, w);
        assert_relative_eq!(e.log_abs(), 500.0, max_relative = 1e-12);
        let two_pi = 2.0 * std::f64::consts::PI;
        let d = (e.arg() - 40.0).rem_euclid(two_pi);
        assert!(d.min(two_pi - d) < 1e-9, "phase off by {d}");
    }

    #[test]
    fn f_fun_small_orders() {
        for &w in &[c(0.3, 0.7), c(-2.0, 1.5), c(5.0, 0.0)] {
            assert_relative_eq!(f_fun(0, w).value().re, 1.0, max_relative = 1e-14);
            let f1 = f_fun(1, w).value();
            let expect = c(2.0, 0.0) + w;
            assert_abs_diff_eq!((f1 - expect).norm(), 0.0, epsilon = 1e-13 * expect.norm());
        }
        // f_2(2) = 3·e_2(2) − 2·e_1(2) = 15 − 6
        assert_relative_eq!(f_fun(2, c(2.0, 0.0)).value().re, 9.0, max_relative = 1e-14);
    }

    #[test]
    fn f_fun_agrees_with_two_term_definition() {
        for &(p, w) in &[
            (3u32, c(1.5, -0.5)),
            (12, c(-4.0, 2.0)),
            (40, c(20.0, 5.0)),
            (200, c(140.0, -15.0)),
        ] {
            let direct = f_fun(p, w);
            let composed = exp_poly(p as i64, w)
                .mul_complex(c(p as f64 + 1.0, 0.0))
                .sub(&exp_poly(p as i64 - 1, w).mul_complex(w));
            let delta = direct.sub(&composed);
            assert!(
                delta.is_zero() || delta.log_abs() < direct.log_abs() - 25.0,
                "p={p}, w={w}: rel residual exp {}",
                delta.log_abs() - direct.log_abs()
            );
        }
    }

    #[test]
    fn gamma_ratio_endpoints() {
        assert_relative_eq!(gamma_ratio(3, 0.0), 1.0, max_relative = 1e-15);
        for &x in &[0.1, 1.0, 7.5] {
            assert_relative_eq!(gamma_ratio(1, x), (-x).exp(), max_relative = 1e-13);
        }
    }

    #[test]
    fn gamma_ratio_heaviside_asymptotics() {
        // Deep inside / outside the transition window the ratio is 1 / 0.
        assert_abs_diff_eq!(gamma_ratio(400, 400.0 * 0.25), 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(gamma_ratio(400, 400.0 * 2.25), 0.0, epsilon = 1e-10);
    }

    #[test]
    fn gamma_ratio_matches_scaled_polynomial() {
        // Independent oracle: direct scaled summation of e^{−x}·e_{N−1}(x).
        for &(n, x) in &[(5u32, 2.0), (50, 30.0), (400, 380.0), (500, 900.0)] {
            let direct = exp_poly(n as i64 - 1, c(x, 0.0)).mul_exp(-x).value().re;
            assert_relative_eq!(gamma_ratio(n, x), direct.clamp(0.0, 1.0), max_relative = 1e-12);
        }
    }

    #[test]
    fn frak_f_kill_lines() {
        // y = 1 and x = 0 both collapse the whole expression.
        for &(n, x, z) in &[(3u32, c(1.0, 0.5), c(0.3, -0.2)), (17, c(-2.0, 1.0), c(2.0, 0.0))] {
            let v = frak_f(n, x, c(1.0, 0.0), z);
            assert!(v.is_zero() || v.log_abs() < frak_f(n, x, c(0.5, 0.0), z).log_abs() - 25.0);
        }
        for &(n, y, z) in &[(4u32, c(0.7, 0.1), c(-0.3, 0.4)), (9, c(2.0, -1.0), c(0.5, 0.5))] {
            assert!(frak_f(n, c(0.0, 0.0), y, z).is_zero());
        }
    }

    #[test]
    fn frak_f_vanishes_at_order_zero() {
        // Every term cancels at n = 0 for arbitrary arguments.
        for &(x, y, z) in &[
            (c(0.8, 0.3), c(1.4, -0.2), c(0.5, 0.9)),
            (c(-3.0, 1.0), c(0.2, 0.2), c(2.5, -1.5)),
        ] {
            let v = frak_f(0, x, y, z);
            let scale = exp_poly(0, x * y).mul(&exp_poly(0, x * z));
            assert!(
                v.is_zero() || v.log_abs() < scale.log_abs() - 30.0,
                "frak_f(0, {x}, {y}, {z}) not ~0: log_abs {}",
                v.log_abs()
            );
        }
    }

    #[test]
    fn frak_f_symmetric_in_y_z() {
        let cases = [
            (3u32, c(1.2, 0.4), c(0.7, -0.3), c(1.9, 0.8)),
            (25, c(6.0, -2.0), c(0.4, 0.9), c(1.1, -0.6)),
        ];
        for &(n, x, y, z) in &cases {
            let a = frak_f(n, x, y, z);
            let b = frak_f(n, x, z, y);
            let diff = a.sub(&b);
            assert!(
                diff.is_zero() || diff.log_abs() < a.log_abs() - 25.0,
                "asymmetry at n={n}"
            );
        }
    }

    #[test]
    fn frak_f_branch_handoff() {
        // Direct and series branches must agree across the switch annulus.
        // Pick y, z so that |1 − yz| straddles EPS_F.
        for &n in &[2u32, 6, 31] {
            let x = c(2.5, 1.0);
            for &frac in &[0.91, 1.09] {
                let target = EPS_F * frac;
                let y = c(1.3, 0.4);
                // choose z with yz = 1 − target (real offset)
                let z = (c(1.0, 0.0) - c(target, 0.0)) / y;
                let v = frak_f(n, x, y, z);
                // Recompute with the opposite branch by nudging the switch:
                // direct evaluation of the quotient must match the series.
                let one = c(1.0, 0.0);
                let e_n_x = exp_poly(n as i64, x);
                let xyz = x * y * z;
                let direct_tail = pow_over_factorial(xyz, n)
                    .mul(&e_n_x)
                    .sub(&pow_over_factorial(x, n).mul(&exp_poly(n as i64, xyz)))
                    .mul_complex(one / (one - y * z));
                let series_tail = frak_f_tail_series(n, x, one - y * z, &e_n_x);
                let diff = direct_tail.sub(&series_tail);
                assert!(
                    diff.is_zero() || diff.log_abs() - direct_tail.log_abs() < -9.0 * std::f64::consts::LN_10,
                    "branch mismatch n={n} frac={frac}: rel exp {}",
                    diff.log_abs() - direct_tail.log_abs()
                );
                assert!(v.is_finite());
            }
        }
    }

    #[test]
    fn ln_factorial_consistency() {
        assert_abs_diff_eq!(ln_factorial(0), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(ln_factorial(1), 0.0, epsilon = 1e-15);
        assert_relative_eq!(ln_factorial(10), 3628800.0_f64.ln(), max_relative = 1e-14);
        // Table/Stirling handoff.
        let lo = ln_factorial(LN_FACT_TABLE_LEN - 1);
        let hi = ln_factorial(LN_FACT_TABLE_LEN);
        let step = (LN_FACT_TABLE_LEN as f64).ln();
        assert_relative_eq!(hi - lo, step, max_relative = 1e-10);
    }
}
