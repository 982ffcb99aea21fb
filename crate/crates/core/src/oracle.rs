//! Independent reference values.
//!
//! [`diagonalize`] finds eigenvalues of the full Hamiltonian in a truncated
//! harmonic-oscillator basis. [`rspt_sum_over_states`] evaluates low-order
//! Rayleigh–Schrödinger corrections about the mean-field Hamiltonian by
//! explicit sums over its eigenstates. For fixed coupling and level that
//! Hamiltonian is an ordinary oscillator with a complete orthonormal basis,
//! so the textbook formulas apply even though unperturbed states belonging to
//! different levels are not mutually orthogonal.

use nalgebra::{DMatrix, SymmetricEigen};
use rug::ops::Pow;
use rug::Float;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::model::{gap_root, MeanField, OscillatorKind, OscillatorSpec};
use crate::scalar::{bits_for_digits, Scalar, DEFAULT_DIGITS};

pub const DEFAULT_BASIS_SIZE: usize = 200;
pub const DEFAULT_TOLERANCE: f64 = 1e-8;
pub const MAX_BASIS_SIZE: usize = 6400;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of(level: u32) -> Self {
        if level.is_multiple_of(2) {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    fn first(self) -> usize {
        match self {
            Parity::Even => 0,
            Parity::Odd => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BasisConfig {
    /// Number of harmonic states before parity projection; the sector keeps
    /// half of them.
    pub size: usize,
    /// Basis frequency; `None` picks `max(1, ω)` with ω the gap root.
    pub omega: Option<f64>,
    /// Sector; `None` follows the parity of the level.
    pub parity: Option<Parity>,
    /// Doubling stops once the eigenvalue moves less than this.
    pub tolerance: f64,
    pub max_size: usize,
}

impl Default for BasisConfig {
    fn default() -> Self {
        BasisConfig {
            size: DEFAULT_BASIS_SIZE,
            omega: None,
            parity: None,
            tolerance: DEFAULT_TOLERANCE,
            max_size: MAX_BASIS_SIZE,
        }
    }
}

impl BasisConfig {
    pub fn with_size(size: usize) -> Self {
        BasisConfig {
            size,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleResult {
    pub kind: OscillatorKind,
    pub g: f64,
    pub n: u32,
    pub energy: f64,
    pub basis_size: usize,
    pub basis_omega: f64,
    /// Change in the eigenvalue at the last doubling.
    pub change: f64,
}

/// `x̂^k |n⟩` for the dimensionless `x̂ = (a + a†)/√2`, as a dense vector
/// over states `0..=n+k`.
fn apply_position(n: usize, k: usize) -> Vec<f64> {
    let mut v = vec![0.0; n + k + 1];
    v[n] = 1.0;
    for _ in 0..k {
        let mut next = vec![0.0; v.len()];
        for (m, &c) in v.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            if m > 0 {
                next[m - 1] += c * (m as f64 / 2.0).sqrt();
            }
            if m + 1 < next.len() {
                next[m + 1] += c * ((m + 1) as f64 / 2.0).sqrt();
            }
        }
        v = next;
    }
    v
}

/// Hamiltonian restricted to `states` harmonic states of one parity at basis
/// frequency `w`. Entries are the exact operator matrix elements, so no
/// truncation enters through operator products.
fn hamiltonian_matrix(
    spec: &OscillatorSpec,
    w: f64,
    parity: Parity,
    states: usize,
) -> DMatrix<f64> {
    let g = spec.g_f64();
    let k2 = 2 * spec.kind.power();
    let sign = spec.kind.quadratic_sign() as f64;
    // H = w(a†a + ½) + (sign − w²) x²/2 + g x^{2K} with x = x̂/√w
    let quad = (sign - w * w) / (2.0 * w);
    let anh = g / w.powi(spec.kind.power() as i32);
    let first = parity.first();
    let mut h = DMatrix::zeros(states, states);
    for col in 0..states {
        let n = first + 2 * col;
        let x2 = apply_position(n, 2);
        let xk = apply_position(n, k2);
        // x^{2j} preserves parity, so row m = first + 2·row
        for (ops, scale) in [(&xk, anh), (&x2, quad)] {
            for row in 0..states {
                if let Some(&c) = ops.get(first + 2 * row) {
                    h[(row, col)] += scale * c;
                }
            }
        }
        h[(col, col)] += w * (n as f64 + 0.5);
    }
    h
}

fn eigenvalue(spec: &OscillatorSpec, w: f64, parity: Parity, size: usize, index: usize) -> f64 {
    let h = hamiltonian_matrix(spec, w, parity, size / 2);
    let mut values: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
    values.sort_by(f64::total_cmp);
    values[index]
}

/// Default basis frequency `max(1, ω)`.
pub fn default_basis_omega(spec: &OscillatorSpec) -> f64 {
    gap_root(spec, 64).to_f64().max(1.0)
}

/// Eigenvalue of level `spec.level()` of the full Hamiltonian. The basis is
/// doubled from `basis.size` until the eigenvalue moves by less than
/// `basis.tolerance`.
pub fn diagonalize(spec: &OscillatorSpec, basis: &BasisConfig) -> Result<OracleResult> {
    let level = spec.level();
    let parity = basis.parity.unwrap_or(Parity::of(level));
    if parity != Parity::of(level) {
        return Err(Error::Domain(format!(
            "level {level} has no component in the {parity:?} sector"
        )));
    }
    let index = (level / 2) as usize;
    if basis.size < 4 || index >= basis.size / 2 {
        return Err(Error::Domain(format!(
            "basis of {} states is too small for level {level}",
            basis.size
        )));
    }
    let w = basis.omega.unwrap_or_else(|| default_basis_omega(spec));
    if !(w.is_finite() && w > 0.0) {
        return Err(Error::Domain(format!(
            "basis frequency must be positive, got {w}"
        )));
    }

    let mut size = basis.size;
    let mut energy = eigenvalue(spec, w, parity, size, index);
    loop {
        let next_size = size * 2;
        if next_size > basis.max_size.max(basis.size) {
            return Err(Error::Convergence(format!(
                "eigenvalue still moving at {size} basis states (tolerance {:e})",
                basis.tolerance
            )));
        }
        let next = eigenvalue(spec, w, parity, next_size, index);
        let change = (next - energy).abs();
        size = next_size;
        energy = next;
        if change < basis.tolerance {
            return Ok(OracleResult {
                kind: spec.kind,
                g: spec.g_f64(),
                n: level,
                energy,
                basis_size: size,
                basis_omega: w,
                change,
            });
        }
    }
}

/// [`diagonalize`] over many specs, in input order.
pub fn diagonalize_many(
    specs: &[OscillatorSpec],
    basis: &BasisConfig,
    exec: Execution,
) -> Vec<Result<OracleResult>> {
    exec.map(specs, |s| diagonalize(s, basis))
}

/// Sparse `x̂^k |n⟩` in extended precision.
fn apply_position_float(n: usize, k: usize, prec: u32) -> Vec<Float> {
    let mut v = vec![Float::new(prec); n + k + 1];
    v[n] = Float::with_val(prec, 1);
    for _ in 0..k {
        let mut next = vec![Float::new(prec); v.len()];
        for (m, c) in v.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if m > 0 {
                let f = Float::with_val(prec, m as u32) / 2u32;
                next[m - 1] += Float::with_val(prec, c * f.sqrt());
            }
            if m + 1 < next.len() {
                let f = Float::with_val(prec, m as u32 + 1) / 2u32;
                next[m + 1] += Float::with_val(prec, c * f.sqrt());
            }
        }
        v = next;
    }
    v
}

/// Rayleigh–Schrödinger correction of the given order (1, 2 or 3) to level
/// `n` for `H′ = g x^{2K} − ½(ω² ∓ 1) x² − h₀` about the mean-field
/// oscillator, by explicit sums over its eigenstates.
///
/// `H′` is a polynomial in `x`, so only states within `2K` of `n` couple and
/// the sums are finite.
pub fn rspt_sum_over_states(spec: &OscillatorSpec, mf: &MeanField, order: u32) -> Result<Scalar> {
    if !(1..=3).contains(&order) {
        return Err(Error::Domain(format!(
            "sum-over-states is provided for orders 1 to 3, not {order}"
        )));
    }
    let prec = match &mf.omega {
        Scalar::Exact(_) => bits_for_digits(DEFAULT_DIGITS),
        Scalar::Extended(f) => f.prec(),
    };
    let w = mf.omega.to_float(prec);
    let h0 = mf.h0.to_float(prec);
    let g = Float::with_val(prec, spec.g());
    let k = spec.kind.power();
    let n = spec.level() as usize;
    let sign = spec.kind.quadratic_sign();

    let quad = (Float::with_val(prec, sign) - Float::with_val(prec, w.square_ref())) / 2u32 / &w;
    let anh = g / Float::with_val(prec, (&w).pow(k as u32));
    let dim = n + 4 * k + 1;
    // v[c][m] = ⟨m|H′|c⟩ for c < dim
    let v: Vec<Vec<Float>> = (0..dim)
        .map(|c| {
            let x2 = apply_position_float(c, 2, prec);
            let xk = apply_position_float(c, 2 * k, prec);
            let mut col = vec![Float::new(prec); dim];
            for (m, slot) in col.iter_mut().enumerate() {
                if let Some(e) = xk.get(m) {
                    *slot += Float::with_val(prec, e * &anh);
                }
                if let Some(e) = x2.get(m) {
                    *slot += Float::with_val(prec, e * &quad);
                }
            }
            col[c] -= &h0;
            col
        })
        .collect();
    // E⁰_n − E⁰_m = ω (n − m)
    let gap = |m: usize| Float::with_val(prec, &w * (n as i64 - m as i64));

    let vnn = v[n][n].clone();
    let value = match order {
        1 => vnn,
        2 => (0..dim)
            .filter(|&m| m != n)
            .fold(Float::new(prec), |acc, m| {
                acc + Float::with_val(prec, v[n][m].square_ref()) / gap(m)
            }),
        _ => {
            let mut sum = Float::new(prec);
            for m in (0..dim).filter(|&m| m != n) {
                for l in (0..dim).filter(|&l| l != n) {
                    let num = Float::with_val(prec, &v[n][m] * &v[m][l]) * &v[l][n];
                    sum += num / (gap(m) * gap(l));
                }
            }
            let mut renorm = Float::new(prec);
            for m in (0..dim).filter(|&m| m != n) {
                renorm += Float::with_val(prec, v[n][m].square_ref()) / gap(m).square();
            }
            sum - vnn * renorm
        }
    };
    Ok(Scalar::Extended(value))
}
