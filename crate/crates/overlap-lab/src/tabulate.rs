//! Tabulation of the exact formulas over 1-D grids, for external plotting.

use anyhow::{bail, Result};
use num_complex::Complex64;
use serde::Serialize;

use overlap_core::bulk::d11_bulk;
use overlap_core::kernels::{d11, d12, k11, rho, SplitPoint};
use overlap_core::ConditionPoint;

use crate::args::Grid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum TabulateKind {
    /// Conditional diagonal overlap D11^{(N,k)}.
    D11,
    /// Conditional off-diagonal overlap D12^{(N,2)}.
    D12,
    /// Kernel K11^{(N)} at coincident arguments along a ray.
    Kernel,
    /// k-point eigenvalue density ρ^{(N,k)} (k = 1).
    Rho,
    /// Bulk-limit D11^{(bulk,2)} against separation.
    Bulk,
}

#[derive(Debug, Clone, Serialize)]
pub struct TabulateRow {
    pub inputs: Vec<f64>,
    pub re: f64,
    pub im: f64,
    pub log_scale: f64,
}

pub struct Tabulation {
    pub header: Vec<&'static str>,
    pub rows: Vec<TabulateRow>,
}

/// Evaluates the requested family along the grid. For pair quantities the
/// second point is λ₁ + g·direction with g the grid variable.
pub fn tabulate(
    kind: TabulateKind,
    n: usize,
    k: usize,
    grid: &Grid,
    lambda1: Complex64,
    direction: Complex64,
) -> Result<Tabulation> {
    let dir = if direction.norm() == 0.0 {
        bail!("direction must be nonzero");
    } else {
        direction / direction.norm()
    };
    let mut rows = Vec::new();
    let header: Vec<&'static str> = match (kind, k) {
        (TabulateKind::D11, 1) | (TabulateKind::Rho, 1) => {
            vec![grid_col(grid), "re", "im", "log_scale"]
        }
        (TabulateKind::D11, 2)
        | (TabulateKind::D12, 2)
        | (TabulateKind::Kernel, _)
        | (TabulateKind::Bulk, 2) => vec![
            grid_col(grid),
            "lambda1_re",
            "lambda1_im",
            "re",
            "im",
            "log_scale",
        ],
        (TabulateKind::D11, _) => bail!("d11 tabulation supports k ∈ {{1, 2}}"),
        (TabulateKind::D12, _) | (TabulateKind::Bulk, _) => bail!("k must be 2 for this kind"),
        (TabulateKind::Rho, _) => bail!("rho tabulation supports k = 1"),
    };
    for g in grid.values() {
        let row = match kind {
            TabulateKind::D11 if k == 1 => {
                let v = d11(n, &[SplitPoint::physical(Complex64::new(g, 0.0))])?;
                TabulateRow {
                    inputs: vec![g],
                    re: v.value().re,
                    im: v.value().im,
                    log_scale: v.log_scale(),
                }
            }
            TabulateKind::Rho => {
                let v = rho(n, &[Complex64::new(g, 0.0)])?;
                TabulateRow {
                    inputs: vec![g],
                    re: v.value().re,
                    im: v.value().im,
                    log_scale: v.log_scale(),
                }
            }
            TabulateKind::D11 => {
                let pts = [
                    SplitPoint::physical(lambda1),
                    SplitPoint::physical(lambda1 + dir * g),
                ];
                let v = d11(n, &pts)?;
                pair_row(g, lambda1, v.value(), v.log_scale())
            }
            TabulateKind::D12 => {
                let pts = [
                    SplitPoint::physical(lambda1),
                    SplitPoint::physical(lambda1 + dir * g),
                ];
                let v = d12(n, &pts)?;
                pair_row(g, lambda1, v.value(), v.log_scale())
            }
            TabulateKind::Kernel => {
                let x = SplitPoint::physical(lambda1 + dir * g);
                let cond = ConditionPoint::physical(lambda1);
                let v = k11(n, &x, &x, &cond)?;
                pair_row(g, lambda1, v.value(), v.log_scale())
            }
            TabulateKind::Bulk => {
                let pts = [
                    SplitPoint::physical(lambda1),
                    SplitPoint::physical(lambda1 + dir * g),
                ];
                let v = d11_bulk(&pts)?;
                pair_row(g, lambda1, v, 0.0)
            }
        };
        rows.push(row);
    }
    Ok(Tabulation { header, rows })
}

fn grid_col(grid: &Grid) -> &'static str {
    // Stable column name regardless of the user's grid variable label.
    let _ = grid;
    "grid"
}

fn pair_row(g: f64, lambda1: Complex64, v: Complex64, log_scale: f64) -> TabulateRow {
    TabulateRow {
        inputs: vec![g, lambda1.re, lambda1.im],
        re: v.re,
        im: v.im,
        log_scale,
    }
}

impl Tabulation {
    pub fn csv_rows(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|r| {
                let mut cells: Vec<String> = r.inputs.iter().map(|x| format!("{x:.17e}")).collect();
                cells.push(format!("{:.17e}", r.re));
                cells.push(format!("{:.17e}", r.im));
                cells.push(format!("{:.17e}", r.log_scale));
                cells
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::args::parse_grid;

    #[test]
    fn d11_radial_table_matches_formula() {
        let grid = parse_grid("r=0:1:0.5").unwrap();
        let t = tabulate(
            TabulateKind::D11,
            3,
            1,
            &grid,
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
        )
        .unwrap();
        assert_eq!(t.rows.len(), 3);
        // r = 0: f_2(0)/π = 3/π
        approx::assert_relative_eq!(
            t.rows[0].re,
            3.0 / std::f64::consts::PI,
            max_relative = 1e-12
        );
    }

    #[test]
    fn rejects_bad_shapes() {
        let grid = parse_grid("r=0:1:0.5").unwrap();
        assert!(tabulate(
            TabulateKind::Rho,
            3,
            2,
            &grid,
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0)
        )
        .is_err());
        assert!(tabulate(
            TabulateKind::D11,
            3,
            1,
            &grid,
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0)
        )
        .is_err());
    }
}
