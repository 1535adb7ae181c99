//! Tensor-product Gauss-Legendre quadrature for radial integrals
//! \int_0^inf \int_0^inf r1 r2 f(r1, r2) dr1 dr2 against Gaussian-decay
//! integrands.

use crate::error::{Error, Result};

/// Gauss-Legendre nodes and weights on [-1, 1], by Newton iteration on the
/// Legendre recurrence. Plenty accurate (~1e-15) for the orders used here.
pub(crate) fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 2);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(n, z);
            let dz = p / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, z);
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Composite rule on [0, r_max]: `panels` equal panels, `order`-point
/// Gauss-Legendre on each. Returns flattened (nodes, weights).
pub(crate) fn panel_rule(r_max: f64, panels: usize, order: usize) -> (Vec<f64>, Vec<f64>) {
    let (base_x, base_w) = gauss_legendre(order);
    let width = r_max / panels as f64;
    let mut xs = Vec::with_capacity(panels * order);
    let mut ws = Vec::with_capacity(panels * order);
    for p in 0..panels {
        let mid = (p as f64 + 0.5) * width;
        let half = 0.5 * width;
        for (x, w) in base_x.iter().zip(&base_w) {
            xs.push(mid + half * x);
            ws.push(half * w);
        }
    }
    (xs, ws)
}

const PANEL_ORDER: usize = 16;
const MAX_PANELS: usize = 512;

/// \int_0^inf \int_0^inf r1 r2 integrand(r1, r2) dr1 dr2 for integrands that
/// decay at least like exp(-(r1-c1)^2 - (r2-c2)^2) around finite `centers`.
///
/// The domain is truncated at R = max(centers) + 8, where the Gaussian tail
/// is below e^{-64}, and the panel count is doubled until two successive
/// levels agree within `tolerance`. Fails with `NonConvergence` if the panel
/// budget runs out first.
pub fn radial_gauss_quadrature<F>(integrand: F, tolerance: f64, centers: (f64, f64)) -> Result<f64>
where
    F: Fn(f64, f64) -> f64,
{
    if !(tolerance > 0.0 && tolerance.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "quadrature tolerance must be positive, got {tolerance}"
        )));
    }
    if !(centers.0.is_finite() && centers.1.is_finite()) {
        return Err(Error::InvalidInput("decay centers must be finite".into()));
    }
    let r_max = centers.0.max(centers.1).max(0.0) + 8.0;
    let mut panels = (r_max.ceil() as usize).max(4);
    let mut previous: Option<f64> = None;
    while panels <= MAX_PANELS {
        let (xs, ws) = panel_rule(r_max, panels, PANEL_ORDER);
        let mut total = 0.0;
        for (&xi, &wi) in xs.iter().zip(&ws) {
            let mut inner = 0.0;
            for (&xj, &wj) in xs.iter().zip(&ws) {
                inner += wj * xj * integrand(xi, xj);
            }
            total += wi * xi * inner;
        }
        if let Some(prev) = previous {
            if (total - prev).abs() <= tolerance {
                return Ok(total);
            }
        }
        previous = Some(total);
        panels *= 2;
    }
    Err(Error::NonConvergence(format!(
        "radial quadrature still changing after {MAX_PANELS} panels per axis"
    )))
}
