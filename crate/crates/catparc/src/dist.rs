//! Tail probabilities for the reference distributions used by the tests:
//! central chi-squared, standard normal, Gumbel, and weighted chi-squared
//! (quadratic forms in standard normals).

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Lanczos approximation of `ln Γ(x)` for `x > 0`.
fn ln_gamma<F: Scalar>(x: F) -> F {
    const COEF: [f64; 6] = [
        76.18009172947146,
        -86.50532032941677,
        24.01409824083091,
        -1.231739572450155,
        0.1208650973866179e-2,
        -0.5395239384953e-5,
    ];
    let x = x.to_f64_lossy();
    let tmp = x + 5.5 - (x + 0.5) * (x + 5.5).ln();
    let mut ser = 1.000000000190015;
    for (i, c) in COEF.iter().enumerate() {
        ser += c / (x + 1.0 + i as f64);
    }
    F::from_f64_lossy(-tmp + (2.5066282746310005 * ser / x).ln())
}

/// Regularized upper incomplete gamma `Q(a, x) = Γ(a, x)/Γ(a)`.
///
/// Series for `x < a + 1`, continued fraction otherwise.
pub fn gamma_q<F: Scalar>(a: F, x: F) -> F {
    if x <= F::zero() {
        return F::one();
    }
    if x < a + F::one() {
        F::one() - gamma_p_series(a, x)
    } else {
        gamma_q_contfrac(a, x)
    }
}

fn gamma_p_series<F: Scalar>(a: F, x: F) -> F {
    let mut ap = a;
    let mut sum = F::one() / a;
    let mut del = sum;
    let eps = F::from_f64_lossy(1e-16);
    for _ in 0..500 {
        ap = ap + F::one();
        del = del * x / ap;
        sum = sum + del;
        if del.abs() < sum.abs() * eps {
            break;
        }
    }
    sum * (-x + a * x.ln() - ln_gamma(a)).exp()
}

fn gamma_q_contfrac<F: Scalar>(a: F, x: F) -> F {
    let fpmin = F::from_f64_lossy(1e-300);
    let eps = F::from_f64_lossy(1e-16);
    let mut b = x + F::one() - a;
    let mut c = F::one() / fpmin;
    let mut d = F::one() / b;
    let mut h = d;
    for i in 1..500 {
        let an = -F::from_usize_lossy(i) * (F::from_usize_lossy(i) - a);
        b = b + F::from_f64_lossy(2.0);
        d = an * d + b;
        if d.abs() < fpmin {
            d = fpmin;
        }
        c = b + an / c;
        if c.abs() < fpmin {
            c = fpmin;
        }
        d = F::one() / d;
        let del = d * c;
        h = h * del;
        if (del - F::one()).abs() < eps {
            break;
        }
    }
    (-x + a * x.ln() - ln_gamma(a)).exp() * h
}

/// Upper tail of a central chi-squared with `df` degrees of freedom.
pub fn chisq_tail<F: Scalar>(df: usize, x: F) -> Result<F> {
    if df == 0 {
        return Err(Error::Parameter("chi-squared df must be >= 1".into()));
    }
    if !x.is_finite() {
        return Err(Error::Numeric("non-finite chi-squared argument".into()));
    }
    Ok(chisq_tail_real(F::from_usize_lossy(df), x))
}

/// Chi-squared tail for a real (possibly fractional) degree of freedom.
fn chisq_tail_real<F: Scalar>(df: F, x: F) -> F {
    if x <= F::zero() {
        return F::one();
    }
    gamma_q(df * F::from_f64_lossy(0.5), x * F::from_f64_lossy(0.5))
}

/// Two-sided standard normal p-value `P(|Z| > |z|)`.
pub fn normal_two_sided<F: Scalar>(z: F) -> Result<F> {
    if !z.is_finite() {
        return Err(Error::Numeric("non-finite normal argument".into()));
    }
    // erfc(|z|/sqrt(2)) = Q(1/2, z^2/2)
    Ok(gamma_q(F::from_f64_lossy(0.5), z * z * F::from_f64_lossy(0.5)))
}

/// Upper tail of the Gumbel reference with CDF `exp(-exp(-x/2)/sqrt(8*pi))`.
pub fn gumbel_tail<F: Scalar>(x: F) -> Result<F> {
    if !x.is_finite() {
        return Err(Error::Numeric("non-finite Gumbel argument".into()));
    }
    let sqrt_8pi = F::from_f64_lossy((8.0 * std::f64::consts::PI).sqrt());
    let cdf = (-(-x * F::from_f64_lossy(0.5)).exp() / sqrt_8pi).exp();
    Ok(F::one() - cdf)
}

/// Nonnegative weights of a weighted chi-squared reference, descending.
#[derive(Debug, Clone)]
pub struct WeightedChiSq<F> {
    weights: Vec<F>,
    conditioning_warning: bool,
}

impl<F: Scalar> WeightedChiSq<F> {
    /// Builds the reference from estimated covariance eigenvalues.
    ///
    /// Sample estimates of a PSD matrix can carry small negative eigenvalues;
    /// values in `(-1e-8 * lambda_max, 0)` are clamped silently, more negative
    /// ones are clamped with a conditioning warning.
    pub fn from_eigenvalues(mut eigenvalues: Vec<F>) -> Self {
        eigenvalues.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
        let lam_max = eigenvalues.first().copied().unwrap_or(F::zero()).max(F::zero());
        let cutoff = -F::from_f64_lossy(1e-8) * lam_max;
        let mut warning = false;
        for w in eigenvalues.iter_mut() {
            if *w < F::zero() {
                if *w < cutoff {
                    warning = true;
                }
                *w = F::zero();
            }
        }
        WeightedChiSq {
            weights: eigenvalues,
            conditioning_warning: warning,
        }
    }

    pub fn weights(&self) -> &[F] {
        &self.weights
    }

    pub fn conditioning_warning(&self) -> bool {
        self.conditioning_warning
    }
}

/// Tail method for the weighted chi-squared reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TailMethod {
    /// Numerical inversion of the characteristic function (Imhof), absolute
    /// tolerance 1e-6.
    #[default]
    Imhof,
    /// Moment-matching fast path for benchmarking.
    Satterthwaite,
}

/// `P(sum w_l W_l^2 > x)` with independent standard normal `W_l`.
pub fn weighted_chisq_tail<F: Scalar>(w: &WeightedChiSq<F>, x: F) -> Result<F> {
    weighted_chisq_tail_with(w, x, TailMethod::Imhof)
}

pub fn weighted_chisq_tail_with<F: Scalar>(
    w: &WeightedChiSq<F>,
    x: F,
    method: TailMethod,
) -> Result<F> {
    if !x.is_finite() {
        return Err(Error::Numeric("non-finite quadratic-form argument".into()));
    }
    let weights: Vec<f64> = w
        .weights
        .iter()
        .map(|v| v.to_f64_lossy())
        .filter(|&v| v > 0.0)
        .collect();
    let x = x.to_f64_lossy();
    if weights.is_empty() {
        return Ok(if x <= 0.0 { F::one() } else { F::zero() });
    }
    if x <= 0.0 {
        return Ok(F::one());
    }

    let k = weights.len();
    let first = weights[0];
    let all_equal = weights.iter().all(|&v| (v - first).abs() <= 1e-14 * first);
    if all_equal {
        return Ok(F::from_f64_lossy(chisq_tail_real(k as f64, x / first)));
    }

    let p = match method {
        TailMethod::Imhof => imhof_tail(&weights, x),
        TailMethod::Satterthwaite => {
            let s1: f64 = weights.iter().sum();
            let s2: f64 = weights.iter().map(|v| v * v).sum();
            let g = s2 / s1;
            let nu = s1 * s1 / s2;
            chisq_tail_real(nu, x / g)
        }
    };
    Ok(F::from_f64_lossy(p.clamp(0.0, 1.0)))
}

/// Imhof's characteristic-function inversion for `P(Q > x)` with all unit
/// multiplicities and no non-centrality:
/// `P(Q > x) = 1/2 + (1/pi) \int_0^inf sin(theta(u)) / (u rho(u)) du`.
fn imhof_tail(weights: &[f64], x: f64) -> f64 {
    const TOL: f64 = 1e-6;
    let k = weights.len() as f64;
    let log_prod_sqrt: f64 = weights.iter().map(|w| 0.5 * w.ln()).sum();

    // Truncation point from |integrand| <= u^{-(1+k/2)} / prod sqrt(w):
    // tail integral <= 2 / (k U^{k/2} prod sqrt(w) pi) < TOL/2.
    let log_u = (2.0 / k)
        * ((4.0 / (k * std::f64::consts::PI * TOL)).ln() - log_prod_sqrt);
    let u_abs = log_u.exp().max(1.0);

    // Oscillation-aware truncation. The phase derivative settles at -x/2, so
    // integrating sin(theta) g by parts bounds the tail past U by
    // (4/|theta'|) g(U) once g is decreasing and |theta'| >= x/4 there.
    // Using the conservative constant 16/x keeps the bound under pi*TOL/2.
    let envelope = |u: f64| -> f64 {
        let log_rho: f64 = weights
            .iter()
            .map(|&w| 0.25 * (1.0 + w * u * w * u).ln())
            .sum();
        1.0 / (u * log_rho.exp())
    };
    let mut u_osc = 1.0f64;
    while u_osc < u_abs {
        let phase_drift: f64 = weights
            .iter()
            .map(|&w| 0.5 * w / (1.0 + w * u_osc * w * u_osc))
            .sum();
        let settled = phase_drift <= 0.25 * x;
        let small_tail = (16.0 / x) * envelope(u_osc) <= 0.5 * std::f64::consts::PI * TOL;
        if settled && small_tail {
            break;
        }
        u_osc *= 2.0;
    }
    let upper = u_abs.min(u_osc).max(1.0);

    let integrand = |u: f64| -> f64 {
        if u == 0.0 {
            return 0.5 * (weights.iter().sum::<f64>() - x);
        }
        let mut theta = -0.5 * x * u;
        let mut log_rho = 0.0;
        for &w in weights {
            let wu = w * u;
            theta += 0.5 * wu.atan();
            log_rho += 0.25 * (1.0 + wu * wu).ln();
        }
        theta.sin() / (u * log_rho.exp())
    };

    // Composite Simpson with step-halving. Resolve the oscillation period
    // 4*pi/x with several points per cycle.
    let period = 4.0 * std::f64::consts::PI / x.max(1e-3);
    let mut n = ((upper / (period / 8.0)).ceil() as usize).clamp(64, 4_000_000);
    if n % 2 == 1 {
        n += 1;
    }
    let mut prev = simpson(&integrand, upper, n);
    for _ in 0..4 {
        n *= 2;
        if n > 16_000_000 {
            break;
        }
        let cur = simpson(&integrand, upper, n);
        let done = (cur - prev).abs() < 0.5 * TOL * std::f64::consts::PI;
        prev = cur;
        if done {
            break;
        }
    }

    0.5 + prev / std::f64::consts::PI
}

fn simpson(f: &impl Fn(f64) -> f64, upper: f64, n: usize) -> f64 {
    let h = upper / n as f64;
    let mut sum = f(0.0) + f(upper);
    for i in 1..n {
        let factor = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += factor * f(i as f64 * h);
    }
    sum * h / 3.0
}
