//! Fisher's method for combining independent p-values: X = -2 sum(ln p_i)
//! against a chi-square distribution with 2k degrees of freedom. For even
//! degrees of freedom the survival function has the closed form
//! exp(-X/2) * sum_{j<k} (X/2)^j / j!, which is evaluated directly.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum FisherError {
    #[error("no p-values to combine")]
    Empty,
    #[error("p-value {0} outside [0, 1]")]
    OutOfDomain(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FisherCombined {
    /// Test statistic X = -2 sum(ln p_i).
    pub statistic: f64,
    /// Number of combined p-values (degrees of freedom are 2k).
    pub k: usize,
    pub combined_p: f64,
    /// Set when some input was exactly zero; the combined p is then zero by
    /// continuity rather than by the formula.
    pub exact_zero_input: bool,
}

/// Chi-square survival function for even degrees of freedom `2k`.
pub fn chi_square_sf_even(x: f64, k: usize) -> f64 {
    debug_assert!(k >= 1);
    if x <= 0.0 {
        return 1.0;
    }
    let half = x / 2.0;
    // Poisson(half) mass at 0..k-1; every term is in [0, 1].
    let mut term = (-half).exp();
    let mut sum = term;
    for j in 1..k {
        term *= half / j as f64;
        sum += term;
    }
    sum.min(1.0)
}

/// Combines p-values with Fisher's method. Inputs must lie in [0, 1]; an
/// exact zero short-circuits to a combined p of zero with a flag.
pub fn fisher_combine(ps: &[f64]) -> Result<FisherCombined, FisherError> {
    if ps.is_empty() {
        return Err(FisherError::Empty);
    }
    for &p in ps {
        if !(0.0..=1.0).contains(&p) || p.is_nan() {
            return Err(FisherError::OutOfDomain(p));
        }
    }
    if ps.contains(&0.0) {
        return Ok(FisherCombined {
            statistic: f64::INFINITY,
            k: ps.len(),
            combined_p: 0.0,
            exact_zero_input: true,
        });
    }
    let statistic: f64 = -2.0 * ps.iter().map(|p| p.ln()).sum::<f64>();
    Ok(FisherCombined {
        statistic,
        k: ps.len(),
        combined_p: chi_square_sf_even(statistic, ps.len()),
        exact_zero_input: false,
    })
}
