//! Adaptive composite Gauss–Legendre quadrature in double precision.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::exec::Execution;

const MAX_PANELS: usize = 20_000;

/// Fixed-order Gauss–Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes are the roots of `P_n`, found by Newton iteration from the
    /// Chebyshev-like initial guesses.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: &F, a: f64, b: f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut sum = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            sum += w * f(mid + half * x);
        }
        sum * half
    }
}

// P_n(x) and P_n'(x)
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
}

/// Integrates `f` over `[points[0], points.last()]` starting from the panels
/// between consecutive `points`. The panel with the largest error estimate
/// (difference between the one-interval and two-half rules) is bisected until
/// the summed estimate drops below `tol · |integral|`.
pub fn integrate_adaptive<F>(f: &F, points: &[f64], tol: f64, exec: Execution) -> Result<Quadrature>
where
    F: Fn(f64) -> f64 + Sync,
{
    assert!(points.len() >= 2);
    let rule = GaussLegendre::new(20);
    let spans: Vec<(f64, f64)> = points.windows(2).map(|w| (w[0], w[1])).collect();
    let mut heap: BinaryHeap<Panel> = exec
        .map(&spans, |&(a, b)| Panel::new(f, &rule, a, b))
        .into_iter()
        .collect();

    let mut evaluations = heap.len();
    loop {
        let (value, error) = heap
            .iter()
            .fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error));
        if !value.is_finite() || !error.is_finite() {
            return Err(Error::Quadrature {
                tol,
                estimate: f64::INFINITY,
            });
        }
        if error <= tol * value.abs() || error == 0.0 {
            // fixed summation order keeps the result schedule-independent
            let mut panels = heap.into_vec();
            panels.sort_by(|x, y| x.a.total_cmp(&y.a));
            let value = panels.iter().map(|p| p.value).sum();
            return Ok(Quadrature { value, error });
        }
        let worst = heap.pop().expect("at least one panel");
        let m = 0.5 * (worst.a + worst.b);
        if evaluations >= MAX_PANELS || m <= worst.a || m >= worst.b {
            return Err(Error::Quadrature {
                tol,
                estimate: error,
            });
        }
        heap.push(Panel::new(f, &rule, worst.a, m));
        heap.push(Panel::new(f, &rule, m, worst.b));
        evaluations += 2;
    }
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl Panel {
    fn new<F: Fn(f64) -> f64>(f: &F, rule: &GaussLegendre, a: f64, b: f64) -> Self {
        let m = 0.5 * (a + b);
        let whole = rule.integrate(f, a, b);
        let value = rule.integrate(f, a, m) + rule.integrate(f, m, b);
        let error = (value - whole).abs();
        Panel {
            a,
            b,
            value,
            error: if error.is_nan() { f64::INFINITY } else { error },
        }
    }
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then(other.a.total_cmp(&self.a))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn rule_is_exact_for_polynomials() {
        let rule = GaussLegendre::new(10);
        // degree 19 is integrated exactly
        let v = rule.integrate(&|x: f64| x.powi(18) + x.powi(19), 0.0, 1.0);
        assert_relative_eq!(v, 1.0 / 19.0 + 1.0 / 20.0, max_relative = 1e-14);
        let w: f64 = rule.weights.iter().sum();
        assert_relative_eq!(w, 2.0, max_relative = 1e-14);
    }

    #[test]
    fn nodes_are_symmetric_and_sorted() {
        let rule = GaussLegendre::new(7);
        assert_eq!(rule.order(), 7);
        assert!(rule.nodes.windows(2).all(|w| w[0] < w[1]));
        assert!(rule.nodes[3].abs() < 1e-15);
    }

    #[test]
    fn adaptive_handles_peaks_and_endpoint_singularities() {
        let peaked = |x: f64| (-(x - 0.3).powi(2) * 1e4).exp();
        let q =
            integrate_adaptive(&peaked, &[0.0, 0.3, 1.0], 1e-10, Execution::Sequential).unwrap();
        assert_relative_eq!(
            q.value,
            std::f64::consts::PI.sqrt() / 100.0,
            max_relative = 1e-9
        );

        let root = |x: f64| x.powf(-0.18);
        let q = integrate_adaptive(&root, &[0.0, 1.0], 1e-9, Execution::Sequential).unwrap();
        assert_relative_eq!(q.value, 1.0 / 0.82, max_relative = 1e-8);
    }

    #[test]
    fn modes_agree() {
        let f = |x: f64| x.sin() * (-x).exp();
        let pts = [0.0, 1.0, 2.0, 5.0, 10.0];
        let a = integrate_adaptive(&f, &pts, 1e-12, Execution::Sequential).unwrap();
        let b = integrate_adaptive(&f, &pts, 1e-12, Execution::Parallel).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn zero_integrand() {
        let q = integrate_adaptive(&|_| 0.0, &[0.0, 1.0], 1e-8, Execution::Sequential).unwrap();
        assert_eq!(q.value, 0.0);
    }

    #[test]
    fn unresolvable_integrand_fails() {
        let f = |x: f64| if x > 0.5 { 1.0 / (x - 0.5) } else { 0.0 };
        assert!(matches!(
            integrate_adaptive(&f, &[0.0, 1.0], 1e-12, Execution::Sequential),
            Err(Error::Quadrature { .. })
        ));
    }
}
