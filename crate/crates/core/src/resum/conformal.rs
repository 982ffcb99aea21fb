//! Conformal map of the Borel plane cut along `(-∞, -r_c]` onto the unit disk,
//! and re-expansion of the Borel series in the mapped variable.

use rug::{Float, Integer};

/// `z(u) = (√(1+u/r_c) − 1)/(√(1+u/r_c) + 1)` and its inverse
/// `u(z) = 4 r_c z/(1−z)²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConformalMap {
    r_c: f64,
}

impl ConformalMap {
    pub fn new(r_c: f64) -> Self {
        assert!(r_c > 0.0, "radius must be positive");
        ConformalMap { r_c }
    }

    pub fn radius(&self) -> f64 {
        self.r_c
    }

    /// Scale of the inverse map, `4 r_c`.
    pub fn rho(&self) -> f64 {
        4.0 * self.r_c
    }

    pub fn z(&self, u: f64) -> f64 {
        let t = u / self.r_c;
        // (√(1+t)−1)/(√(1+t)+1) = t/(√(1+t)+1)², stable near u = 0
        let s = (1.0 + t).sqrt() + 1.0;
        t / (s * s)
    }

    pub fn u(&self, z: f64) -> f64 {
        let w = 1.0 - z;
        self.rho() * z / (w * w)
    }

    pub fn z_float(&self, u: &Float) -> Float {
        let prec = u.prec();
        let t = Float::with_val(prec, u / self.r_c);
        let s = Float::with_val(prec, &t + 1u32).sqrt() + 1u32;
        t / s.square()
    }

    pub fn u_float(&self, z: &Float) -> Float {
        let prec = z.prec();
        let w = Float::with_val(prec, 1u32 - z);
        Float::with_val(prec, z * self.rho()) / w.square()
    }
}

/// `B_k = Σ_{n=1}^{k} b_n ρⁿ C(n+k−1, 2n−1)` for `k = 1..=terms`.
///
/// `b[i]` holds `b_{i+1}`; missing coefficients count as zero. The binomials
/// are exact integers, so all rounding happens in the products with `b_n ρⁿ`.
pub fn conformal_reexpand(b: &[Float], rho: &Float, terms: usize) -> Vec<Float> {
    let prec = rho.prec();
    let mut scaled = Vec::with_capacity(terms);
    let mut power = Float::with_val(prec, rho);
    for n in 1..=terms {
        let bn = b
            .get(n - 1)
            .map_or_else(|| Float::new(prec), |v| Float::with_val(prec, v));
        scaled.push(bn * &power);
        power *= rho;
    }
    (1..=terms)
        .map(|k| {
            let mut sum = Float::new(prec);
            for n in 1..=k {
                if scaled[n - 1].is_zero() {
                    continue;
                }
                let binom = Integer::from(Integer::binomial_u(
                    n as u32 + k as u32 - 1,
                    2 * n as u32 - 1,
                ));
                sum += Float::with_val(prec, &scaled[n - 1] * &binom);
            }
            sum
        })
        .collect()
}
