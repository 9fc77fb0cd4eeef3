use alloc::vec::Vec;

/// Default number of Gauss points per panel.
pub const DEFAULT_ORDER: usize = 32;

/// Fixed-order Gauss-Legendre rule, applied panel by panel.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Builds the `order`-point rule on [-1, 1] by Newton iteration on the
    /// Legendre polynomial.
    pub fn new(order: usize) -> Self {
        assert!(order >= 1, "Gauss-Legendre order must be at least 1");
        let n = order;
        let mut nodes = alloc::vec![0.0; n];
        let mut weights = alloc::vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut z = libm::cos(
                core::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5),
            );
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, z);
                dp = d;
                let dz = p / d;
                z -= dz;
                if dz.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, z);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - z * z) * dp * dp);
            nodes[i] = -z;
            nodes[n - 1 - i] = z;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Composite rule over `panels` equal panels of `[lo, hi]`.
    pub fn integrate<F>(&self, mut f: F, lo: f64, hi: f64, panels: usize) -> f64
    where
        F: FnMut(f64) -> f64,
    {
        let panels = panels.max(1);
        let width = (hi - lo) / panels as f64;
        let half = 0.5 * width;
        let mut total = 0.0;
        for k in 0..panels {
            let centre = lo + (k as f64 + 0.5) * width;
            let mut s = 0.0;
            for (x, w) in self.nodes.iter().zip(&self.weights) {
                s += w * f(centre + half * x);
            }
            total += s * half;
        }
        total
    }
}

impl Default for GaussLegendre {
    fn default() -> Self {
        Self::new(DEFAULT_ORDER)
    }
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for j in 2..=n {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * z * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Composite order-32 Gauss-Legendre integral of `f` over `[lo, hi]`.
///
/// Nodes are interior, so integrable endpoint singularities do not produce
/// NaNs, but accuracy near them is the caller's job (substitute first).
pub fn gauss_legendre_integrate<F>(f: F, lo: f64, hi: f64, panels: usize) -> f64
where
    F: FnMut(f64) -> f64,
{
    GaussLegendre::default().integrate(f, lo, hi, panels)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_two() {
        for order in [1, 2, 5, 16, 32] {
            let rule = GaussLegendre::new(order);
            let s: f64 = rule.weights().iter().sum();
            assert!((s - 2.0).abs() < 1e-14, "order {order}: {s}");
        }
    }

    #[test]
    fn polynomials_are_exact() {
        assert!((gauss_legendre_integrate(|x| x, 0.0, 1.0, 1) - 0.5).abs() < 1e-15);
        assert!((gauss_legendre_integrate(|x| x * x * x, 0.0, 1.0, 1) - 0.25).abs() < 1e-15);
        // order 32 is exact up to degree 63
        let p = |x: f64| libm::pow(x, 63.0);
        assert!((gauss_legendre_integrate(p, 0.0, 1.0, 1) - 1.0 / 64.0).abs() < 1e-14);
    }

    #[test]
    fn sine_over_half_period() {
        let v = gauss_legendre_integrate(libm::sin, 0.0, core::f64::consts::PI, 16);
        assert!((v - 2.0).abs() < 1e-10);
    }

    #[test]
    fn error_shrinks_with_panels_on_a_singular_integrand() {
        // ∫₀¹ x^{-1/2} dx = 2
        let f = |x: f64| 1.0 / libm::sqrt(x);
        let rule = GaussLegendre::default();
        let e1 = (rule.integrate(f, 0.0, 1.0, 1) - 2.0).abs();
        let e2 = (rule.integrate(f, 0.0, 1.0, 16) - 2.0).abs();
        assert!(e2 < e1);
    }
}
