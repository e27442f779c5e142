//! Polar quadrature over disks in the complex plane.
//!
//! The weights integrated here all decay like e^{−|z|²}, so the scheme is
//! Gauss–Legendre in s = r² on [0, R²] combined with a uniform trapezoid
//! rule in the angle (spectrally accurate for periodic integrands).

use num_complex::Complex64;

/// Gauss–Legendre nodes and weights on [−1, 1].
///
/// Newton iteration on the three-term recurrence; good to machine precision
/// for the node counts used here (≤ a few hundred).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Chebyshev-based initial guess.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_and_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Quadrature rule for ∫_{|z|≤R} g(z) dA with dA the Lebesgue measure on ℂ.
#[derive(Debug, Clone)]
pub struct DiskRule {
    /// Sample points z and combined weights (already include the ½ ds dθ Jacobian).
    points: Vec<(Complex64, f64)>,
}

impl DiskRule {
    pub fn new(radius: f64, radial_nodes: usize, angular_nodes: usize) -> Self {
        let (xs, ws) = gauss_legendre(radial_nodes);
        let s_max = radius * radius;
        let dtheta = 2.0 * std::f64::consts::PI / angular_nodes as f64;
        let mut points = Vec::with_capacity(radial_nodes * angular_nodes);
        for (x, w) in xs.iter().zip(ws.iter()) {
            let s = 0.5 * s_max * (x + 1.0);
            let r = s.sqrt();
            // ds weight mapped from [−1,1], times ½ from dA = ½ ds dθ.
            let ws_radial = 0.5 * w * (0.5 * s_max);
            for k in 0..angular_nodes {
                let theta = dtheta * k as f64;
                points.push((Complex64::from_polar(r, theta), ws_radial * dtheta));
            }
        }
        Self { points }
    }

    pub fn integrate<F: FnMut(Complex64) -> Complex64>(&self, mut g: F) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for &(z, w) in &self.points {
            acc += g(z) * w;
        }
        acc
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[(Complex64, f64)] {
        &self.points
    }
}
