//! Special-function kernels used by the policies and by the bound checks.
//!
//! The truncated Gaussian integral is evaluated in log space through a
//! log-`erfc` path, so posterior weights stay finite even when an arm's
//! empirical mean is hundreds of standard errors away from the threshold.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::{FRAC_1_SQRT_2, LN_2, PI};

use crate::error::{Error, Result};

/// `log(x)` for `x >= 1`, zero otherwise.
pub fn log_plus(x: f64) -> Result<f64> {
    if x.is_nan() || x <= 0.0 {
        return Err(Error::Domain(format!("log_plus requires x > 0, got {x}")));
    }
    Ok(if x >= 1.0 { x.ln() } else { 0.0 })
}

/// Unnormalized natural-log weights.
#[derive(Debug, Clone, PartialEq)]
pub struct LogWeightVector(Vec<f64>);

impl LogWeightVector {
    pub fn new(log_weights: Vec<f64>) -> Result<Self> {
        if log_weights.iter().any(|w| w.is_nan() || *w == f64::INFINITY) {
            return Err(Error::InvalidInput(
                "log-weights must be finite or -inf".into(),
            ));
        }
        Ok(Self(log_weights))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn normalize(&self) -> Result<Vec<f64>> {
        normalize(&self.0)
    }
}

/// `log(sum_i exp(lw_i))`, or `-inf` when every entry is `-inf`.
pub fn log_sum_exp(lw: &[f64]) -> f64 {
    let max = lw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    let sum: f64 = lw.iter().map(|&w| (w - max).exp()).sum();
    max + sum.ln()
}

/// Probabilities proportional to `exp(lw_i)`.
pub fn normalize(lw: &[f64]) -> Result<Vec<f64>> {
    if lw.iter().any(|w| w.is_nan() || *w == f64::INFINITY) {
        return Err(Error::InvalidInput("log-weights must be finite or -inf".into()));
    }
    let max = lw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return Err(Error::DegenerateWeights);
    }
    let mut p: Vec<f64> = lw.iter().map(|&w| (w - max).exp()).collect();
    let total: f64 = p.iter().sum();
    for x in &mut p {
        *x /= total;
    }
    Ok(p)
}

/// Index drawn from `probs` by inverse CDF with a single uniform `u` in `[0, 1)`.
///
/// Falls back to the last arm with positive probability when rounding leaves
/// the cumulative sum just below `u`.
pub fn sample_index(probs: &[f64], u: f64) -> usize {
    let mut cdf = 0.0;
    let mut last_positive = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            last_positive = i;
        }
        cdf += p;
        if u < cdf {
            return i;
        }
    }
    last_positive
}

/// Standard normal CDF.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z * FRAC_1_SQRT_2)
}

/// `log(erfc(x))` without underflow for large positive `x`.
pub fn ln_erfc(x: f64) -> f64 {
    if x < 8.0 {
        libm::erfc(x).ln()
    } else {
        -x * x + erfcx_cf(x).ln()
    }
}

/// Scaled complementary error function `exp(x^2) erfc(x)` by its Laplace
/// continued fraction; accurate to double precision for `x >= 8`.
fn erfcx_cf(x: f64) -> f64 {
    const TERMS: usize = 60;
    let mut tail = x;
    for k in (1..=TERMS).rev() {
        tail = x + (k as f64 * 0.5) / tail;
    }
    1.0 / (PI.sqrt() * tail)
}

/// `log Phi(z)` for the standard normal CDF.
pub fn log_normal_cdf(z: f64) -> f64 {
    if z.is_nan() {
        return f64::NAN;
    }
    if z > 0.0 {
        (-0.5 * libm::erfc(z * FRAC_1_SQRT_2)).ln_1p()
    } else if z >= -1.0 {
        (0.5 * libm::erfc(-z * FRAC_1_SQRT_2)).ln()
    } else {
        ln_erfc(-z * FRAC_1_SQRT_2) - LN_2
    }
}

/// `log of the integral over (-inf, upper] of exp(-(samples/3) (v - center)^2) dv`.
///
/// Closed form: `log[ sqrt(3 pi / s) * Phi((upper - center) * sqrt(2 s / 3)) ]`.
pub fn log_trunc_gauss_integral(center: f64, upper: f64, samples: u64) -> Result<f64> {
    if samples == 0 {
        return Err(Error::Precondition(
            "truncated Gaussian integral needs at least one sample".into(),
        ));
    }
    let s = samples as f64;
    let z = (upper - center) * (2.0 * s / 3.0).sqrt();
    Ok(0.5 * (3.0 * PI / s).ln() + log_normal_cdf(z))
}

/// Bracket `(lower, upper)` on `int_x^inf exp(-v^2/2) dv` for `x > 0`.
pub fn gauss_tail_bounds(x: f64) -> Result<(f64, f64)> {
    if !(x.is_finite() && x > 0.0) {
        return Err(Error::Domain(format!("tail bounds require finite x > 0, got {x}")));
    }
    let upper = (-0.5 * x * x).exp() / x;
    Ok((upper * (1.0 - 1.0 / (x * x)), upper))
}

/// `int_x^inf exp(-v^2/2) dv = sqrt(2 pi) (1 - Phi(x))`.
pub fn gauss_tail(x: f64) -> f64 {
    (PI / 2.0).sqrt() * libm::erfc(x * FRAC_1_SQRT_2)
}

// Gauss-Kronrod 7/15 nodes and weights on [-1, 1] (positive half, centre last).
const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const KRONROD_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights for the odd-indexed Kronrod nodes and the centre.
const GAUSS_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_SUBINTERVALS: usize = 4000;

#[derive(Debug, Clone, Copy)]
struct Segment {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.lo.total_cmp(&self.lo))
    }
}

fn gauss_kronrod<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> Result<Segment> {
    let centre = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(centre);
    if !fc.is_finite() {
        return Err(Error::Domain(format!("integrand is not finite at {centre}")));
    }
    let mut kronrod = KRONROD_WEIGHTS[7] * fc;
    let mut gauss = GAUSS_WEIGHTS[3] * fc;
    for j in 0..7 {
        let dx = half * GK_NODES[j];
        let (f1, f2) = (f(centre - dx), f(centre + dx));
        if !(f1.is_finite() && f2.is_finite()) {
            return Err(Error::Domain(format!(
                "integrand is not finite near {}",
                centre - dx
            )));
        }
        kronrod += KRONROD_WEIGHTS[j] * (f1 + f2);
        if j % 2 == 1 {
            gauss += GAUSS_WEIGHTS[j / 2] * (f1 + f2);
        }
    }
    Ok(Segment {
        lo,
        hi,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
    })
}

/// Adaptive Gauss-Kronrod (7/15) integration of `f` over the finite interval
/// `[lo, hi]`, bisecting the segment with the largest error estimate until
/// the summed estimate is at most `tol`.
pub fn quadrature<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::Domain(format!("invalid interval [{lo}, {hi}]")));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    let mut heap = BinaryHeap::new();
    heap.push(gauss_kronrod(&f, lo, hi)?);
    loop {
        let total_error: f64 = heap.iter().map(|s| s.error).sum();
        if total_error <= tol {
            // Summing in interval order keeps the result independent of heap layout.
            let mut segments: Vec<Segment> = heap.into_vec();
            segments.sort_by(|a, b| a.lo.total_cmp(&b.lo));
            return Ok(segments.iter().map(|s| s.value).sum());
        }
        if heap.len() >= MAX_SUBINTERVALS {
            return Err(Error::Accuracy { achieved: total_error, tol });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.lo + worst.hi);
        if !(worst.lo < mid && mid < worst.hi) {
            return Err(Error::Accuracy { achieved: total_error, tol });
        }
        heap.push(gauss_kronrod(&f, worst.lo, mid)?);
        heap.push(gauss_kronrod(&f, mid, worst.hi)?);
    }
}
