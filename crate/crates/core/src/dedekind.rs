//! Dedekind-type Daehee-Changhee sums built on Euler polynomials.

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{binomial, Rat};

/// Coefficients of `E_0..=E_m_max`, lowest degree first, from
/// `E_m(x) = x^m - (1/2) sum_{k<m} C(m,k) E_k(x)`.
pub fn euler_poly_table(m_max: u64) -> Vec<Vec<Rat>> {
    let mut table: Vec<Vec<Rat>> = Vec::with_capacity(m_max as usize + 1);
    for m in 0..=m_max {
        let mut coeffs = vec![Rat::zero(); m as usize + 1];
        coeffs[m as usize] = Rat::one();
        let half = Rat::new(1, 2);
        for (k, ek) in table.iter().enumerate() {
            let c = Rat::from(binomial(m, k as u64)) * &half;
            for (i, e) in ek.iter().enumerate() {
                coeffs[i] -= &c * e;
            }
        }
        table.push(coeffs);
    }
    table
}

/// Coefficients of `E_m`, lowest degree first.
pub fn euler_poly_coeffs(m: u64) -> Vec<Rat> {
    euler_poly_table(m).pop().unwrap()
}

fn horner(coeffs: &[Rat], x: &Rat) -> Rat {
    coeffs.iter().rev().fold(Rat::zero(), |acc, c| acc * x + c)
}

/// `E_m(x)`.
pub fn euler_poly(m: u64, x: &Rat) -> Rat {
    horner(&euler_poly_coeffs(m), x)
}

/// Periodic Euler function `(-1)^[x] E_m({x})`, antiperiodic with period 1.
pub fn periodic_euler(m: u64, x: &Rat) -> Rat {
    periodic_with(&euler_poly_coeffs(m), x)
}

fn periodic_with(coeffs: &[Rat], x: &Rat) -> Rat {
    let v = horner(coeffs, &x.fract_part());
    if x.floor().is_odd() {
        -v
    } else {
        v
    }
}

/// Parameters `(m, h, k)` of `S_m(h, k)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DCSumParams {
    pub m: u64,
    pub h: u64,
    pub k: u64,
}

impl DCSumParams {
    pub fn new(m: u64, h: u64, k: u64) -> Result<Self> {
        if h == 0 || k == 0 {
            return Err(Error::OutOfRange("h and k must be positive".into()));
        }
        if h.gcd(&k) != 1 {
            return Err(Error::NotCoprime(h, k));
        }
        Ok(DCSumParams { m, h, k })
    }
}

/// `S_m(h,k) = sum_{M=1}^{k-1} (-1)^(M-1) (M/k) E~_m(hM/k)`.
pub fn dc_sum(params: DCSumParams) -> Result<Rat> {
    let DCSumParams { m, h, k } = DCSumParams::new(params.m, params.h, params.k)?;
    let coeffs = euler_poly_coeffs(m);
    let mut acc = Rat::zero();
    for big_m in 1..k {
        let term = Rat::new(big_m as i64, k as i64)
            * periodic_with(&coeffs, &Rat::new((h * big_m) as i64, k as i64));
        if big_m % 2 == 1 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    Ok(acc)
}

/// Renders `E_m` coefficients as strings, lowest degree first.
pub fn format_coeffs(coeffs: &[Rat]) -> Vec<String> {
    coeffs.iter().map(|c| c.to_string()).collect()
}
