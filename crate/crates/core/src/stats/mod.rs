//! Hypothesis tests for differential transaction prioritization.
//!
//! A miner with hash share theta0 that does not treat a cohort specially
//! should mine each c-block with probability theta0. The acceleration test
//! computes the exact binomial upper-tail p-value P(B >= x) with
//! B ~ Binomial(y, theta0); the deceleration test uses the lower tail
//! P(B <= x). A continuity-corrected normal approximation covers large y,
//! and Fisher's method combines per-window p-values.

mod binom;
mod fisher;
mod special;

pub use binom::{lower_tail, pmf, upper_tail};
pub use fisher::{chi_square_sf_even, fisher_combine, FisherCombined, FisherError};
pub use special::{erfc, normal_cdf, normal_sf};

use thiserror::Error;

pub const DEFAULT_ALPHA: f64 = 0.01;

#[derive(Debug, Error, PartialEq)]
pub enum StatError {
    #[error("theta0 = {0} is degenerate; the test needs 0 < theta0 < 1")]
    DegenerateTheta(f64),
    #[error("x = {x} exceeds y = {y}")]
    CountsOutOfRange { x: u64, y: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestKind {
    Acceleration,
    Deceleration,
}

impl TestKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            TestKind::Acceleration => "accel",
            TestKind::Deceleration => "decel",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestMethod {
    Exact,
    NormalApprox,
}

impl TestMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            TestMethod::Exact => "exact",
            TestMethod::NormalApprox => "normal",
        }
    }
}

/// Outcome of one differential-prioritization test.
#[derive(Debug, Clone, PartialEq)]
pub struct TestResult {
    pub kind: TestKind,
    pub method: TestMethod,
    pub x: u64,
    pub y: u64,
    pub theta0: f64,
    pub p_value: f64,
    pub alpha: f64,
    pub rejected: bool,
    /// Set on the normal method when the rule-of-thumb sample-size guidance
    /// (y*theta0 >= 10 and y*(1-theta0) >= 10) is not met.
    pub small_sample_warning: bool,
}

impl TestResult {
    fn new(kind: TestKind, method: TestMethod, x: u64, y: u64, theta0: f64, p: f64) -> Self {
        TestResult {
            kind,
            method,
            x,
            y,
            theta0,
            p_value: p,
            alpha: DEFAULT_ALPHA,
            rejected: p < DEFAULT_ALPHA,
            small_sample_warning: false,
        }
    }

    /// Re-evaluates rejection at a different significance level.
    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self.rejected = self.p_value < alpha;
        self
    }
}

fn check_inputs(x: u64, y: u64, theta0: f64) -> Result<(), StatError> {
    if x > y {
        return Err(StatError::CountsOutOfRange { x, y });
    }
    if !(theta0 > 0.0 && theta0 < 1.0) {
        return Err(StatError::DegenerateTheta(theta0));
    }
    Ok(())
}

/// Exact acceleration test: p = P(B >= x), B ~ Binomial(y, theta0).
pub fn accel_test_exact(x: u64, y: u64, theta0: f64) -> Result<TestResult, StatError> {
    check_inputs(x, y, theta0)?;
    let p = upper_tail(x, y, theta0);
    Ok(TestResult::new(TestKind::Acceleration, TestMethod::Exact, x, y, theta0, p))
}

/// Exact deceleration test: p = P(B <= x).
pub fn decel_test_exact(x: u64, y: u64, theta0: f64) -> Result<TestResult, StatError> {
    check_inputs(x, y, theta0)?;
    let p = lower_tail(x, y, theta0);
    Ok(TestResult::new(TestKind::Deceleration, TestMethod::Exact, x, y, theta0, p))
}

fn normal_params(y: u64, theta0: f64) -> (f64, f64, bool) {
    let mean = y as f64 * theta0;
    let sd = (y as f64 * theta0 * (1.0 - theta0)).sqrt();
    let warn = mean < 10.0 || y as f64 * (1.0 - theta0) < 10.0;
    (mean, sd, warn)
}

/// Normal approximation to the acceleration test, continuity-corrected:
/// p = 1 - Phi((x - 0.5 - y*theta0) / sd).
pub fn accel_test_normal(x: u64, y: u64, theta0: f64) -> Result<TestResult, StatError> {
    check_inputs(x, y, theta0)?;
    let (mean, sd, warn) = normal_params(y, theta0);
    let z = (x as f64 - 0.5 - mean) / sd;
    let p = normal_sf(z);
    let mut r = TestResult::new(TestKind::Acceleration, TestMethod::NormalApprox, x, y, theta0, p);
    r.small_sample_warning = warn;
    Ok(r)
}

/// Normal approximation to the deceleration test, continuity-corrected:
/// p = Phi((x + 0.5 - y*theta0) / sd).
pub fn decel_test_normal(x: u64, y: u64, theta0: f64) -> Result<TestResult, StatError> {
    check_inputs(x, y, theta0)?;
    let (mean, sd, warn) = normal_params(y, theta0);
    let z = (x as f64 + 0.5 - mean) / sd;
    let p = normal_cdf(z);
    let mut r = TestResult::new(TestKind::Deceleration, TestMethod::NormalApprox, x, y, theta0, p);
    r.small_sample_warning = warn;
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// The scam-payment rows: (theta0, x, y, accel p, decel p).
    pub(crate) const SCAM_ROWS: &[(f64, u64, u64, f64, f64)] = &[
        (0.1528, 10, 53, 0.2856, 0.8227),
        (0.1450, 10, 53, 0.2323, 0.8629),
        (0.1147, 9, 53, 0.1483, 0.9233),
        (0.1093, 4, 53, 0.8450, 0.2989),
        (0.0955, 1, 53, 0.9951, 0.0323),
        (0.0698, 3, 53, 0.7248, 0.4890),
        (0.0684, 8, 53, 0.0268, 0.9907),
        (0.0590, 3, 53, 0.6120, 0.6180),
        (0.0552, 1, 53, 0.9507, 0.2020),
    ];

    #[test]
    fn scam_rows_reproduce() {
        for &(theta0, x, y, pa, pd) in SCAM_ROWS {
            let accel = accel_test_exact(x, y, theta0).unwrap();
            let decel = decel_test_exact(x, y, theta0).unwrap();
            assert!(
                (accel.p_value - pa).abs() <= 0.0005,
                "accel {theta0}/{x}/{y}: {} vs {pa}",
                accel.p_value
            );
            assert!(
                (decel.p_value - pd).abs() <= 0.0005,
                "decel {theta0}/{x}/{y}: {} vs {pd}",
                decel.p_value
            );
        }
    }

    #[test]
    fn accel_zero_x_is_one() {
        for y in [1u64, 10, 53, 500] {
            assert_eq!(accel_test_exact(0, y, 0.3).unwrap().p_value, 1.0);
        }
    }

    #[test]
    fn decel_full_x_is_one() {
        for y in [1u64, 10, 53] {
            assert_eq!(decel_test_exact(y, y, 0.3).unwrap().p_value, 1.0);
        }
    }

    #[test]
    fn pmf_identity_links_both_tails() {
        // accel_p(x) + decel_p(x) = 1 + P(B = x).
        for &(theta0, x, y, ..) in SCAM_ROWS {
            let a = accel_test_exact(x, y, theta0).unwrap().p_value;
            let d = decel_test_exact(x, y, theta0).unwrap().p_value;
            let m = pmf(x, y, theta0);
            assert!((a + d - 1.0 - m).abs() < 1e-12, "{theta0}/{x}/{y}");
        }
    }

    #[test]
    fn complementary_tails_sum_to_one() {
        for &(theta0, _, y, ..) in SCAM_ROWS {
            for x in 1..=y {
                let a = accel_test_exact(x, y, theta0).unwrap().p_value;
                let d = decel_test_exact(x - 1, y, theta0).unwrap().p_value;
                assert!((a + d - 1.0).abs() < 1e-12, "x={x}");
            }
        }
    }

    #[test]
    fn accel_p_strictly_decreasing_in_x() {
        let (y, theta0) = (53, 0.1528);
        let mut last = f64::INFINITY;
        for x in 0..=y {
            let p = accel_test_exact(x, y, theta0).unwrap().p_value;
            assert!(p < last, "x={x}");
            last = p;
        }
    }

    #[test]
    fn decel_p_strictly_increasing_in_x() {
        // Strict until the tail mass falls below one ulp of 1.0, where the
        // p-value saturates at exactly 1.
        let (y, theta0) = (53, 0.1528);
        let mut last = -1.0;
        for x in 0..=y {
            let p = decel_test_exact(x, y, theta0).unwrap().p_value;
            if last < 1.0 - 1e-12 {
                assert!(p > last, "x={x}: {p} vs {last}");
            } else {
                assert!(p >= last, "x={x}");
            }
            last = p;
        }
        assert_eq!(last, 1.0);
    }

    #[test]
    fn degenerate_theta_rejected() {
        for theta in [0.0, 1.0, -0.2, 1.5, f64::NAN] {
            assert!(matches!(
                accel_test_exact(1, 10, theta),
                Err(StatError::DegenerateTheta(_))
            ));
        }
        assert!(matches!(
            decel_test_exact(11, 10, 0.5),
            Err(StatError::CountsOutOfRange { .. })
        ));
    }

    #[test]
    fn normal_self_interest_tail_vanishes() {
        let r = accel_test_normal(466, 839, 0.1753).unwrap();
        assert!(r.p_value < 1e-10, "{:e}", r.p_value);
        assert!(!r.small_sample_warning);
        let d = decel_test_normal(466, 839, 0.1753).unwrap();
        assert!(d.p_value > 0.9999);
    }

    #[test]
    fn normal_centered_at_half() {
        // x = y*theta0 + 0.5 makes the corrected z exactly zero.
        let (y, theta0) = (50u64, 0.25);
        let x = (y as f64 * theta0 + 0.5) as u64; // 13
        assert_eq!(x as f64, y as f64 * theta0 + 0.5);
        let r = accel_test_normal(x, y, theta0).unwrap();
        assert_eq!(r.p_value, 0.5);
    }

    #[test]
    fn normal_close_to_exact_at_table_scale() {
        let exact = accel_test_exact(10, 53, 0.1528).unwrap().p_value;
        let normal = accel_test_normal(10, 53, 0.1528).unwrap().p_value;
        assert!((exact - normal).abs() <= 0.03, "{exact} vs {normal}");
    }

    #[test]
    fn normal_converges_for_large_y() {
        let (y, theta0) = (500u64, 0.15);
        let mut max_err: f64 = 0.0;
        for x in 0..=y {
            let e = accel_test_exact(x, y, theta0).unwrap().p_value;
            let n = accel_test_normal(x, y, theta0).unwrap().p_value;
            max_err = max_err.max((e - n).abs());
        }
        assert!(max_err < 0.01, "max |exact - normal| = {max_err}");
    }

    #[test]
    fn small_sample_warning_set() {
        let r = accel_test_normal(3, 20, 0.1).unwrap();
        assert!(r.small_sample_warning);
    }

    #[test]
    fn alpha_override_recouples_rejection() {
        let r = accel_test_exact(8, 53, 0.0684).unwrap(); // p = 0.0268
        assert!(!r.rejected);
        let r = r.with_alpha(0.05);
        assert!(r.rejected);
        assert_eq!(r.alpha, 0.05);
    }

    #[test]
    fn null_calibration_exact_test_is_conservative() {
        // Simulate B ~ Binomial(y, theta0) under H0; the rejection fraction
        // at alpha = 0.01 must stay at or below alpha plus sampling slack.
        use rand::Rng;
        use rand::SeedableRng;
        let (y, theta0) = (53u64, 0.1528);
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(1729);
        let trials = 4000;
        let mut rejections = 0;
        for _ in 0..trials {
            let x = (0..y).filter(|_| rng.gen::<f64>() < theta0).count() as u64;
            if accel_test_exact(x, y, theta0).unwrap().rejected {
                rejections += 1;
            }
        }
        let rate = rejections as f64 / trials as f64;
        assert!(rate <= 0.02, "rejection rate {rate}");
    }
}
