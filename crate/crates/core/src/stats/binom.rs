//! Binomial pmf and tail sums.
//!
//! The pmf uses the saddle-point expansion (Stirling-error plus binomial
//! deviance, the scheme behind R's dbinom), which stays accurate to a few
//! ulps even for n in the millions. Tails are summed term-by-term with
//! compensated addition, always over whichever side of the split has fewer
//! terms, complementing when needed, so absolute summation error stays far
//! below 1e-12 while small tails keep full relative precision.

/// stirlerr(n) = ln(n!) - ln(sqrt(2 pi n) (n/e)^n), exact table for n <= 15.
#[allow(clippy::excessive_precision)]
const STIRLERR_TABLE: [f64; 16] = [
    0.0,
    0.08106146679532725821967,
    0.04134069595540929409382,
    0.02767792568499833914879,
    0.02079067210376509311152,
    0.01664469118982119216319,
    0.01387612882307074799875,
    0.01189670994589177009506,
    0.01041126526197209649748,
    0.009255462182712732917729,
    0.008330563433362871256469,
    0.007573675487951840794972,
    0.006942840107209529865664,
    0.00640899418800420706844,
    0.005951370112758847735624,
    0.005554733551962801371039,
];

const S0: f64 = 1.0 / 12.0;
const S1: f64 = 1.0 / 360.0;
const S2: f64 = 1.0 / 1260.0;
const S3: f64 = 1.0 / 1680.0;
const S4: f64 = 1.0 / 1188.0;

#[allow(clippy::excessive_precision)]
const LN_2PI: f64 = 1.837877066409345483561;

fn stirlerr(n: u64) -> f64 {
    if n <= 15 {
        return STIRLERR_TABLE[n as usize];
    }
    let nf = n as f64;
    let nn = nf * nf;
    (S0 - (S1 - (S2 - (S3 - S4 / nn) / nn) / nn) / nn) / nf
}

/// Binomial deviance term x*ln(x/np) + np - x, evaluated by series when x
/// is close to np to avoid cancellation.
fn bd0(x: f64, np: f64) -> f64 {
    if (x - np).abs() < 0.1 * (x + np) {
        let v = (x - np) / (x + np);
        let mut s = (x - np) * v;
        let mut ej = 2.0 * x * v;
        let v2 = v * v;
        let mut j = 1u32;
        loop {
            ej *= v2;
            let s1 = s + ej / (2 * j + 1) as f64;
            if s1 == s {
                return s1;
            }
            s = s1;
            j += 1;
        }
    } else {
        x * (x / np).ln() + np - x
    }
}

/// P(B = k) for B ~ Binomial(n, p) with p in (0, 1).
pub fn pmf(k: u64, n: u64, p: f64) -> f64 {
    debug_assert!(k <= n);
    debug_assert!(p > 0.0 && p < 1.0);
    let q = 1.0 - p;
    let nf = n as f64;
    if k == 0 {
        return if n == 0 {
            1.0
        } else if p > q {
            (nf * q.ln()).exp()
        } else {
            (nf * (-p).ln_1p()).exp()
        };
    }
    if k == n {
        return if p > q { (nf * (-q).ln_1p()).exp() } else { (nf * p.ln()).exp() };
    }
    let kf = k as f64;
    let lc = stirlerr(n) - stirlerr(k) - stirlerr(n - k) - bd0(kf, nf * p) - bd0(nf - kf, nf * q);
    let lf = LN_2PI + kf.ln() + (-kf / nf).ln_1p();
    (lc - 0.5 * lf).exp()
}

#[derive(Default)]
struct Kahan {
    sum: f64,
    carry: f64,
}

impl Kahan {
    fn add(&mut self, v: f64) {
        let y = v - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }
}

/// Sum of pmf(k) for k in [from, to], iterated outward from the end nearest
/// the mode so terms are eventually decreasing and the far tail can stop
/// once it no longer moves the compensated sum.
fn sum_range(from: u64, to: u64, n: u64, p: f64) -> f64 {
    debug_assert!(from <= to && to <= n);
    let mode = n as f64 * p;
    let mut acc = Kahan::default();
    if (from as f64) >= mode {
        // Terms decrease with k across the whole range.
        for k in from..=to {
            let t = pmf(k, n, p);
            acc.add(t);
            if t < acc.sum * 1e-18 {
                break;
            }
        }
    } else if (to as f64) <= mode {
        // Terms decrease as k falls.
        for k in (from..=to).rev() {
            let t = pmf(k, n, p);
            acc.add(t);
            if t < acc.sum * 1e-18 {
                break;
            }
        }
    } else {
        // Mode inside: split there and recurse into two monotone halves.
        let m = mode.floor() as u64;
        return sum_range(from, m, n, p) + sum_range(m + 1, to, n, p);
    }
    acc.sum
}

/// Upper tail P(B >= x) for B ~ Binomial(y, theta).
pub fn upper_tail(x: u64, y: u64, theta: f64) -> f64 {
    if x == 0 {
        return 1.0;
    }
    if x > y {
        return 0.0;
    }
    let upper_terms = y - x + 1;
    let lower_terms = x;
    if upper_terms <= lower_terms {
        sum_range(x, y, y, theta).min(1.0)
    } else {
        (1.0 - sum_range(0, x - 1, y, theta)).clamp(0.0, 1.0)
    }
}

/// Lower tail P(B <= x) for B ~ Binomial(y, theta).
pub fn lower_tail(x: u64, y: u64, theta: f64) -> f64 {
    if x >= y {
        return 1.0;
    }
    let lower_terms = x + 1;
    let upper_terms = y - x;
    if lower_terms <= upper_terms {
        sum_range(0, x, y, theta).min(1.0)
    } else {
        (1.0 - sum_range(x + 1, y, y, theta)).clamp(0.0, 1.0)
    }
}
