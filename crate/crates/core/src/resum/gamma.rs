//! Gamma function at arbitrary precision.
//!
//! Positive integers go through an exact factorial. Everything else is shifted
//! upward until the Stirling series for `ln Γ` converges to the working
//! precision, then brought back down with the recurrence `Γ(x) = Γ(x+1)/x`.

use rug::float::Constant;
use rug::{Float, Integer, Rational};

use crate::error::{Error, Result};

const GUARD: u32 = 32;

/// Gamma evaluator carrying the Bernoulli numbers needed at one precision.
#[derive(Debug, Clone)]
pub struct Gamma {
    bits: u32,
    work: u32,
    // B_2, B_4, B_6, ...
    bernoulli: Vec<Rational>,
    shift_to: u32,
}

impl Gamma {
    pub fn new(bits: u32) -> Self {
        let work = bits + GUARD;
        // The smallest Stirling term near x is about exp(-2πx), so x of this
        // size reaches 2^-work before the series starts to diverge.
        let shift_to = (f64::from(work) * std::f64::consts::LN_2 / (2.0 * std::f64::consts::PI))
            .ceil() as u32
            + 4;
        let terms = (std::f64::consts::PI * f64::from(shift_to)).ceil() as usize + 2;
        Gamma {
            bits,
            work,
            bernoulli: even_bernoulli(terms),
            shift_to,
        }
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    /// Γ(x) for real `x > 0`.
    pub fn eval(&self, x: &Float) -> Result<Float> {
        if !x.is_finite() || *x <= 0 {
            return Err(Error::Domain(format!(
                "gamma function needs x > 0, got {}",
                x.to_f64()
            )));
        }
        if x.is_integer() {
            if let Some(n) = x.to_integer().and_then(|n| n.to_u32()) {
                return Ok(Float::with_val(self.bits, factorial(n - 1)));
            }
        }
        let mut shifted = Float::with_val(self.work, x);
        let mut divisor = Float::with_val(self.work, 1);
        while shifted < self.shift_to {
            divisor *= &shifted;
            shifted += 1;
        }
        let lg = self.ln_gamma_stirling(&shifted);
        let value = lg.exp() / divisor;
        Ok(Float::with_val(self.bits, value))
    }

    /// Γ(x) for rational `x > 0`, exact factorial when `x` is an integer.
    pub fn eval_rational(&self, x: &Rational) -> Result<Float> {
        if *x <= 0 {
            return Err(Error::Domain(format!(
                "gamma function needs x > 0, got {x}"
            )));
        }
        if *x.denom() == 1 {
            if let Some(n) = x.numer().to_u32() {
                return Ok(Float::with_val(self.bits, factorial(n - 1)));
            }
        }
        self.eval(&Float::with_val(self.work, x))
    }

    fn ln_gamma_stirling(&self, x: &Float) -> Float {
        let w = self.work;
        let half = Float::with_val(w, 0.5);
        let ln_x = Float::with_val(w, x.ln_ref());
        let two_pi = Float::with_val(w, Constant::Pi) * 2u32;
        let mut sum = Float::with_val(w, x - &half) * &ln_x - x + two_pi.ln() / 2u32;

        let x2 = Float::with_val(w, x.square_ref());
        let mut power = Float::with_val(w, x); // x^(2k-1)
        let eps = Float::with_val(w, Float::i_exp(1, -(w as i32)));
        for (i, b) in self.bernoulli.iter().enumerate() {
            let k = (i + 1) as u32;
            let denom = Float::with_val(w, &power * (2 * k * (2 * k - 1)));
            let term = Float::with_val(w, b) / denom;
            sum += &term;
            if term.abs() < eps {
                break;
            }
            power *= &x2;
        }
        sum
    }
}

/// Γ(x) at the precision of `x`.
pub fn gamma_function(x: &Float) -> Result<Float> {
    Gamma::new(x.prec()).eval(x)
}

pub fn factorial(n: u32) -> Integer {
    Integer::from(Integer::factorial(n))
}

/// `B_2, B_4, ..., B_{2m}` by the Akiyama–Tanigawa transform.
fn even_bernoulli(m: usize) -> Vec<Rational> {
    let top = 2 * m;
    let mut row: Vec<Rational> = (0..=top)
        .map(|k| Rational::from((1, k as u32 + 1)))
        .collect();
    let mut out = Vec::with_capacity(m);
    // After pass n, row[0] holds B_n (with B_1 = +1/2).
    for n in 1..=top {
        for k in 0..=(top - n) {
            let diff = Rational::from(&row[k] - &row[k + 1]);
            row[k] = diff * (k as u32 + 1);
        }
        if n % 2 == 0 {
            out.push(row[0].clone());
        }
    }
    out
}
