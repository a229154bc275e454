//! Fast Walsh-Hadamard transform and spectral-tail measurement over {±1}^d.
//!
//! Points are the crate's packed bit masks with bit 1 read as coordinate +1,
//! so the parity character is chi_S(x) = prod_{i in S} x_i
//! = (-1)^(popcount(S) - popcount(S & x)).

use std::io::Write;

use crate::error::{Error, Result};
use crate::function::{DomainKind, FunctionTable};

/// Fixed 0/1 <-> ±1 convention: value 1 maps to +1, value 0 to -1.
pub fn to_pm1(f: &FunctionTable) -> Result<Vec<f64>> {
    if f.r() != 2 {
        return Err(Error::InvalidParameter(format!(
            "±1 view requires r = 2, got r = {}",
            f.r()
        )));
    }
    match f.domain() {
        DomainKind::Hypercube { .. } => {}
        _ => {
            return Err(Error::DomainMismatch(
                "±1 view requires a hypercube table".into(),
            ))
        }
    }
    Ok(f.values()
        .iter()
        .map(|&v| if v == 1 { 1.0 } else { -1.0 })
        .collect())
}

/// Inverse of [`to_pm1`]; positive values map back to 1.
pub fn from_pm1(d: usize, vals: &[f64]) -> Result<FunctionTable> {
    FunctionTable::new_hypercube(d, 2, vals.iter().map(|&v| u8::from(v > 0.0)).collect())
}

/// chi_S(x) as ±1.
pub fn parity(mask_s: u32, x: u32) -> f64 {
    if (mask_s.count_ones() + (mask_s & x).count_ones()) % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// The full Fourier spectrum of a ±1-valued table: coeffs[S] = E[chi_S f].
#[derive(Debug, Clone)]
pub struct SpectrumView {
    d: usize,
    coeffs: Vec<f64>,
}

impl SpectrumView {
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff(&self, mask_s: u32) -> f64 {
        self.coeffs[mask_s as usize]
    }

    /// Sum of squared coefficients over |S| > tau.
    pub fn spectral_tail(&self, tau: u32) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(s, _)| (*s as u32).count_ones() > tau)
            .map(|(_, c)| c * c)
            .sum()
    }

    /// CSV rows `(mask, popcount, coefficient)` with a header line.
    pub fn write_csv(&self, w: &mut impl Write) -> Result<()> {
        writeln!(w, "mask,popcount,coefficient")?;
        for (s, c) in self.coeffs.iter().enumerate() {
            writeln!(w, "{},{},{}", s, (s as u32).count_ones(), c)?;
        }
        Ok(())
    }
}

/// In-place unnormalized butterfly with kernel (-1)^popcount(S & x).
/// Applying it twice returns 2^d times the original vector.
pub fn wht_butterfly(data: &mut [f64]) {
    let n = data.len();
    debug_assert!(n.is_power_of_two());
    let mut half = 1;
    while half < n {
        for block in (0..n).step_by(half * 2) {
            for i in block..block + half {
                let (a, b) = (data[i], data[i + half]);
                data[i] = a + b;
                data[i + half] = a - b;
            }
        }
        half *= 2;
    }
}

/// Walsh-Hadamard transform of a ±1-valued table, normalized by 2^d so that
/// the result holds the Fourier coefficients f̂(S) = E[chi_S f].
///
/// The butterfly natively computes sums against (-1)^popcount(S & x); the
/// sign convention above differs by the diagonal factor (-1)^popcount(S),
/// applied during normalization.
pub fn wht(d: usize, pm1_values: &[f64]) -> Result<SpectrumView> {
    if pm1_values.len() != 1 << d {
        return Err(Error::DimensionMismatch(format!(
            "expected 2^{d} values, got {}",
            pm1_values.len()
        )));
    }
    let mut coeffs = pm1_values.to_vec();
    wht_butterfly(&mut coeffs);
    let scale = 1.0 / (1u64 << d) as f64;
    for (s, c) in coeffs.iter_mut().enumerate() {
        let sign = if (s as u32).count_ones() % 2 == 0 {
            1.0
        } else {
            -1.0
        };
        *c *= sign * scale;
    }
    Ok(SpectrumView { d, coeffs })
}

/// Transform of a Boolean table through the ±1 convention.
pub fn wht_of_table(f: &FunctionTable) -> Result<SpectrumView> {
    wht(f.dim(), &to_pm1(f)?)
}

/// Reconstruct the ±1 table from a spectrum (inverse transform).
pub fn inverse_wht(spec: &SpectrumView) -> Vec<f64> {
    let mut data: Vec<f64> = spec
        .coeffs
        .iter()
        .enumerate()
        .map(|(s, &c)| {
            if (s as u32).count_ones() % 2 == 0 {
                c
            } else {
                -c
            }
        })
        .collect();
    wht_butterfly(&mut data);
    data
}
