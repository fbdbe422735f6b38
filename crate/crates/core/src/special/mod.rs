//! Probability and special-function kernel.
//!
//! Covers the four distribution families the cost model needs (standard
//! normal, standard Gumbel, the maximum of `N` i.i.d. exponentials and the
//! exponential integral behind the Gumbel tail), their partial expectations
//! `E[(X - a)^+]`, plus generic quadrature and root finding.
//!
//! All functions are pure.

pub mod quadrature;
pub mod roots;

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{domain, Result};
pub use quadrature::{integrate, integrate_panels, integrate_to_infinity, Integral, QuadratureConfig};
pub use roots::{brent, expand_bracket};

/// Euler–Mascheroni constant; also the mean of the standard Gumbel law.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_606_512_090_082;

const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_677_939_946_059_934;

pub fn std_normal_pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Φ(x).
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// 1 − Φ(x), accurate in the upper tail.
pub fn std_normal_sf(x: f64) -> f64 {
    0.5 * libm::erfc(x * FRAC_1_SQRT_2)
}

/// Φ⁻¹(p) for `0 < p < 1`.
///
/// Wichura's AS 241 rational approximation followed by one Newton step.
pub fn std_normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(domain("p", p, "normal quantile needs 0 < p < 1"));
    }
    let mut x = as241(p);
    let resid = if p < 0.5 {
        std_normal_cdf(x) - p
    } else {
        (1.0 - p) - std_normal_sf(x)
    };
    let dens = std_normal_pdf(x);
    if dens > 0.0 {
        x -= resid / dens;
    }
    Ok(x)
}

fn poly(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &k| acc * x + k)
}

#[allow(clippy::excessive_precision)]
fn as241(p: f64) -> f64 {
    const A: [f64; 8] = [
        3.387_132_872_796_366_608,
        1.331_416_678_917_843_774_5e2,
        1.971_590_950_306_551_442_7e3,
        1.373_169_376_550_946_112_5e4,
        4.592_195_393_154_987_145_7e4,
        6.726_577_092_700_870_085_3e4,
        3.343_057_558_358_812_810_5e4,
        2.509_080_928_730_122_672_7e3,
    ];
    const B: [f64; 8] = [
        1.0,
        4.231_333_070_160_091_125_2e1,
        6.871_870_074_920_579_083e2,
        5.394_196_021_424_751_107_7e3,
        2.121_379_430_158_659_586_7e4,
        3.930_789_580_009_271_061e4,
        2.872_908_573_572_194_267_4e4,
        5.226_495_278_852_854_561e3,
    ];
    const C: [f64; 8] = [
        1.423_437_110_749_683_577_34,
        4.630_337_846_156_545_295_9,
        5.769_497_221_460_691_405_5,
        3.647_848_324_763_204_605_04,
        1.270_458_252_452_368_382_58,
        2.417_807_251_774_506_117_7e-1,
        2.272_384_498_926_918_458_33e-2,
        7.745_450_142_783_414_076_4e-4,
    ];
    const D: [f64; 8] = [
        1.0,
        2.053_191_626_637_758_821_87,
        1.676_384_830_183_803_849_4,
        6.897_673_349_851_000_045_5e-1,
        1.481_039_764_274_800_745_9e-1,
        1.519_866_656_361_645_719_66e-2,
        5.475_938_084_995_344_946e-4,
        1.050_750_071_644_416_843_24e-9,
    ];
    const E: [f64; 8] = [
        6.657_904_643_501_103_777_2,
        5.463_784_911_164_114_369_9,
        1.784_826_539_917_291_335_8,
        2.965_605_718_285_048_912_3e-1,
        2.653_218_952_657_612_309_3e-2,
        1.242_660_947_388_078_438_6e-3,
        2.711_555_568_743_487_578_15e-5,
        2.010_334_399_292_288_132_65e-7,
    ];
    const F: [f64; 8] = [
        1.0,
        5.998_322_065_558_879_376_9e-1,
        1.369_298_809_227_358_053_1e-1,
        1.487_536_129_085_061_485_25e-2,
        7.868_691_311_456_132_591e-4,
        1.846_318_317_510_054_681_8e-5,
        1.421_511_758_316_445_888_7e-7,
        2.044_263_103_389_939_785_64e-15,
    ];
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180_625 - q * q;
        return q * poly(&A, r) / poly(&B, r);
    }
    let tail = if q < 0.0 { p } else { 1.0 - p };
    let mut r = (-tail.ln()).sqrt();
    let x = if r <= 5.0 {
        r -= 1.6;
        poly(&C, r) / poly(&D, r)
    } else {
        r -= 5.0;
        poly(&E, r) / poly(&F, r)
    };
    if q < 0.0 {
        -x
    } else {
        x
    }
}

/// Standard Gumbel cdf `exp(-exp(-x))`.
pub fn gumbel_cdf(x: f64) -> f64 {
    (-(-x).exp()).exp()
}

/// Standard Gumbel quantile `-log(-log p)`.
pub fn gumbel_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(domain("p", p, "Gumbel quantile needs 0 < p < 1"));
    }
    Ok(-(-p.ln()).ln())
}

/// Standard Gumbel density.
pub fn gumbel_pdf(x: f64) -> f64 {
    (-x - (-x).exp()).exp()
}

/// Entire exponential integral `Ein(u) = Σ (-1)^{k+1} u^k / (k·k!)`
/// `= E1(u) + γ + ln u`. Computed by the series for `u ≤ 2` so that small
/// arguments keep full relative precision.
pub fn ein(u: f64) -> f64 {
    if u <= 2.0 {
        let mut term = 1.0; // u^k / k!
        let mut sum = 0.0;
        for k in 1..200 {
            term *= u / k as f64;
            let contrib = term / k as f64;
            if k % 2 == 1 {
                sum += contrib;
            } else {
                sum -= contrib;
            }
            if contrib < 1e-18 * sum.abs() {
                break;
            }
        }
        sum
    } else {
        e1_continued_fraction(u) + EULER_GAMMA + u.ln()
    }
}

/// `E1(u) = ∫_u^∞ e^{-t}/t dt` for `u > 0`.
///
/// Power series below 1, modified-Lentz continued fraction above.
pub fn exp_integral_e1(u: f64) -> Result<f64> {
    if !(u > 0.0) || u.is_nan() {
        return Err(domain("u", u, "E1 needs u > 0"));
    }
    if u < 1.0 {
        Ok(ein(u) - EULER_GAMMA - u.ln())
    } else {
        Ok(e1_continued_fraction(u))
    }
}

fn e1_continued_fraction(u: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = u + 1.0;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..10_000 {
        let an = -((i * i) as f64);
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h * (-u).exp()
}

/// `E[(G - a)^+]` for standard Gumbel `G`: `E1(e^{-a}) + γ − a`.
pub fn gumbel_partial_expectation(a: f64) -> f64 {
    if a >= 0.0 {
        // E1(u) + γ + ln u with u = e^{-a} ≤ 1: use the cancellation-free series.
        ein((-a).exp())
    } else {
        let u = (-a).exp();
        e1_continued_fraction(u) + EULER_GAMMA - a
    }
}

/// `E[(m + sX − I)^+]` for standard normal `X` and `s > 0`.
pub fn normal_partial_expectation(m: f64, s: f64, level: f64) -> Result<f64> {
    if !(s > 0.0) {
        return Err(domain("s", s, "normal scale must be > 0"));
    }
    let z = (level - m) / s;
    Ok(normal_loss(z) * s)
}

/// Standard normal loss function `E[(X − z)^+] = φ(z) − z(1 − Φ(z))`.
pub fn normal_loss(z: f64) -> f64 {
    if z < -40.0 {
        return -z;
    }
    (std_normal_pdf(z) - z * std_normal_sf(z)).max(0.0)
}

fn check_exp_max(n: usize, sigma: f64) -> Result<()> {
    if n < 1 {
        return Err(domain("N", n as f64, "need at least one component"));
    }
    if !(sigma > 0.0) {
        return Err(domain("sigma", sigma, "must be > 0"));
    }
    Ok(())
}

/// `P(max_{i≤N} Q_i ≤ x) = (1 − e^{−2x/σ²})^N` for i.i.d. `Q_i ~ Exp(2/σ²)`.
pub fn exp_max_cdf(n: usize, sigma: f64, x: f64) -> Result<f64> {
    check_exp_max(n, sigma)?;
    if x <= 0.0 {
        return Ok(0.0);
    }
    let y = (-2.0 * x / (sigma * sigma)).exp();
    Ok((n as f64 * (-y).ln_1p()).exp())
}

/// Inverse of [`exp_max_cdf`]: `(σ²/2)·log(1 / (1 − p^{1/N}))`.
pub fn exp_max_quantile(n: usize, sigma: f64, p: f64) -> Result<f64> {
    check_exp_max(n, sigma)?;
    if !(p > 0.0 && p < 1.0) {
        return Err(domain("p", p, "quantile needs 0 < p < 1"));
    }
    let one_minus_root = -(p.ln() / n as f64).exp_m1();
    Ok(-0.5 * sigma * sigma * one_minus_root.ln())
}

/// Above this many components the positive series costs more than quadrature.
const SERIES_MAX_N: usize = 100_000;

/// `E[(max_{i≤N} Q_i − I)^+]` for i.i.d. exponential backlogs with mean σ²/2.
///
/// Writing `y = e^{−2x/σ²}`, the tail integral is
/// `(σ²/2)·∫_0^{y₀} (1 − (1 − y)^N)/y dy = (σ²/2)·Σ_{j=1}^{N} (1 − (1 − y₀)^j)/j`.
/// The series has positive terms and is used up to moderate `N`; beyond
/// that the integral is evaluated by quadrature.
pub fn exp_max_partial_expectation(n: usize, sigma: f64, level: f64) -> Result<f64> {
    check_exp_max(n, sigma)?;
    if !(level >= 0.0) {
        return Err(domain("I", level, "inventory must be >= 0"));
    }
    let half_var = 0.5 * sigma * sigma;
    let y0 = (-level / half_var).exp();
    if n <= SERIES_MAX_N {
        return Ok(half_var * positive_overshoot_series(n, y0));
    }
    Ok(half_var * overshoot_tail_integral(n, y0)?)
}

fn positive_overshoot_series(n: usize, y0: f64) -> f64 {
    let log_below = (-y0).ln_1p();
    // Smallest terms first.
    (1..=n).rev().map(|j| -(j as f64 * log_below).exp_m1() / j as f64).sum()
}

fn overshoot_tail_integral(n: usize, y0: f64) -> Result<f64> {
    if y0 == 0.0 {
        return Ok(0.0);
    }
    let nf = n as f64;
    let integrand = |y: f64| {
        if y <= 0.0 {
            nf
        } else {
            -(nf * (-y).ln_1p()).exp_m1() / y
        }
    };
    // The integrand falls from N to ~1/y over a layer of width ~1/N near 0,
    // so split [0, y0] at y0/2, y0/4, ... down to that layer.
    let cfg = QuadratureConfig::tight();
    let mut total = 0.0;
    let mut hi = y0;
    let mut lo = (y0 / 2.0).max(0.0);
    let cutoff = (0.5 / nf).min(y0);
    while lo > cutoff {
        total += integrate(integrand, lo, hi, &cfg)?.value;
        hi = lo;
        lo *= 0.5;
    }
    total += integrate_panels(integrand, 0.0, hi, 4, &cfg)?.value;
    Ok(total)
}

/// `g(x) = −log(−log((1 − e^{−2x/σ²})^N))`: maps the exponential-max law
/// onto the standard Gumbel law pathwise.
pub fn gumbel_coupling(n: usize, sigma: f64, x: f64) -> Result<f64> {
    check_exp_max(n, sigma)?;
    if x <= 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    let y = (-2.0 * x / (sigma * sigma)).exp();
    Ok(-(-(n as f64) * (-y).ln_1p()).ln())
}

/// `x − (σ²/2)·(g(x) + log N) = (σ²/2)·log(−log(1 − y)/y)` with
/// `y = e^{−2x/σ²}`. Positive and decreasing in `x`.
pub fn coupling_gap(n: usize, sigma: f64, x: f64) -> Result<f64> {
    check_exp_max(n, sigma)?;
    if x <= 0.0 {
        return Ok(f64::INFINITY);
    }
    let y = (-2.0 * x / (sigma * sigma)).exp();
    // r = −log(1 − y)/y − 1 = Σ_{k≥1} y^k/(k + 1).
    let r = if y < 1e-2 {
        (1..=12).rev().fold(0.0, |acc, k| y * (1.0 / (k + 1) as f64 + acc))
    } else {
        -(-y).ln_1p() / y - 1.0
    };
    Ok(0.5 * sigma * sigma * r.ln_1p())
}

/// Harmonic number `H_n`.
pub fn harmonic(n: usize) -> f64 {
    // Summed from the small terms up for accuracy.
    (1..=n).rev().map(|k| 1.0 / k as f64).sum()
}

/// Kolmogorov–Smirnov statistic of `sample` against a continuous cdf.
/// The sample is sorted in place.
pub fn ks_statistic<F: Fn(f64) -> f64>(sample: &mut [f64], cdf: F) -> f64 {
    sample.sort_by(f64::total_cmp);
    let n = sample.len() as f64;
    sample
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// Asymptotic one-sample KS critical value `sqrt(-ln(alpha/2)/2) / sqrt(n)`.
pub fn ks_critical_value(n: usize, alpha: f64) -> f64 {
    (-(0.5 * alpha).ln() / 2.0).sqrt() / (n as f64).sqrt()
}

/// Standard deviation of the standard Gumbel law, `π/√6`.
pub const GUMBEL_SD: f64 = PI / 2.449_489_742_783_178;

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    // Taylor series of erf, independent of libm, usable for |x| ≲ 3.
    fn erf_series(x: f64) -> f64 {
        let mut term = x;
        let mut sum = x;
        for n in 1..200 {
            term *= -x * x / n as f64;
            sum += term / (2 * n + 1) as f64;
        }
        2.0 / PI.sqrt() * sum
    }

    #[test]
    fn normal_cdf_examples() {
        assert_eq!(std_normal_cdf(0.0), 0.5);
        let oracle_q75 = bisect(|x| 0.5 * (1.0 + erf_series(x / 2f64.sqrt())) - 0.75, 0.0, 2.0);
        assert!((oracle_q75 - 0.67449).abs() < 1e-5);
        assert!((std_normal_cdf(0.67449) - 0.75).abs() < 1e-5);
        // φ(8)/8 bounds the lower tail
        let bound = std_normal_pdf(8.0) / 8.0;
        assert!(std_normal_cdf(-8.0) < 1e-14);
        assert!(std_normal_cdf(-8.0) <= bound);
        for &x in &[-2.5, -1.0, -0.3, 0.4, 1.7, 2.9] {
            let series = 0.5 * (1.0 + erf_series(x / 2f64.sqrt()));
            assert!((std_normal_cdf(x) - series).abs() < 1e-13, "x = {x}");
        }
    }

    #[test]
    fn normal_quantile_examples() {
        assert_eq!(std_normal_quantile(0.5).unwrap(), 0.0);
        let q = std_normal_quantile(0.75).unwrap();
        assert!((q - bisect(|x| std_normal_cdf(x) - 0.75, -5.0, 5.0)).abs() < 1e-12);
        assert!((q - 0.67449).abs() < 1e-5);
        let p = 10.0 / 11.0;
        let q = std_normal_quantile(p).unwrap();
        assert!((q - bisect(|x| std_normal_cdf(x) - p, -5.0, 5.0)).abs() < 1e-12);
        assert!((q - 1.33518).abs() < 1e-4);
        for &p in &[1e-300, 1e-20, 1e-8, 0.02, 0.3, 0.9, 0.999_999] {
            let q = std_normal_quantile(p).unwrap();
            let back = if p < 0.5 {
                std_normal_cdf(q)
            } else {
                1.0 - std_normal_sf(q)
            };
            assert!(((back - p) / p.min(1.0 - p)).abs() < 1e-10, "p = {p}");
        }
        assert!(std_normal_quantile(0.0).is_err());
        assert!(std_normal_quantile(1.0).is_err());
    }

    #[test]
    fn gumbel_examples() {
        assert!((gumbel_cdf(0.0) - (-1.0f64).exp()).abs() < 1e-15);
        assert!((gumbel_quantile(0.5).unwrap() - 0.366_512_920_581_664_3).abs() < 1e-12);
        assert!(gumbel_quantile((-1.0f64).exp()).unwrap().abs() < 1e-15);
        assert!((gumbel_cdf(gumbel_quantile(0.5).unwrap()) - 0.5).abs() < 1e-12);
        assert!(gumbel_quantile(1.0).is_err());
    }

    fn e1_quadrature(u: f64) -> f64 {
        integrate_to_infinity(|t| (-t).exp() / t, u, &QuadratureConfig::tight())
            .unwrap()
            .value
    }

    #[test]
    fn e1_examples_and_quadrature_oracle() {
        let e1_one = exp_integral_e1(1.0).unwrap();
        assert!((e1_one - 0.219_384).abs() < 1e-6);
        assert!((e1_one - e1_quadrature(1.0)).abs() < 1e-12);
        let e1_ln2 = exp_integral_e1(LN_2).unwrap();
        assert!((e1_ln2 - 0.37867).abs() < 1e-4);
        assert!(exp_integral_e1(50.0).unwrap() <= (-50.0f64).exp() / 50.0);
        for &u in &[1e-6, 0.01, 0.3, 0.99, 1.0, 1.01, 2.5, 7.0, 30.0] {
            let got = exp_integral_e1(u).unwrap();
            let want = e1_quadrature(u);
            assert!(((got - want) / want).abs() < 1e-10, "u = {u}: {got} vs {want}");
        }
        assert!(exp_integral_e1(0.0).is_err());
        assert!(exp_integral_e1(-1.0).is_err());
    }

    #[test]
    fn e1_is_strictly_decreasing() {
        let mut prev = f64::INFINITY;
        for k in 1..400 {
            let v = exp_integral_e1(k as f64 * 0.05).unwrap();
            assert!(v < prev);
            prev = v;
        }
    }

    fn gumbel_tail_quadrature(a: f64) -> f64 {
        // ∫_a^∞ (1 − e^{−e^{−x}}) dx
        integrate_to_infinity(|x| -(-(-x).exp()).exp_m1(), a, &QuadratureConfig::tight())
            .unwrap()
            .value
    }

    #[test]
    fn gumbel_partial_expectation_examples() {
        let at0 = gumbel_partial_expectation(0.0);
        assert!((at0 - 0.796_600).abs() < 1e-5);
        assert!((at0 - gumbel_tail_quadrature(0.0)).abs() < 1e-10);
        let a = -(LN_2.ln());
        assert!((gumbel_partial_expectation(a) - 0.58937).abs() < 1e-4);
        assert!((gumbel_partial_expectation(-10.0) - 10.577_22).abs() < 1e-4);
    }

    #[test]
    fn gumbel_partial_expectation_matches_quadrature() {
        for k in 0..=80 {
            let a = -10.0 + 0.25 * k as f64;
            let got = gumbel_partial_expectation(a);
            let want = gumbel_tail_quadrature(a);
            assert!((got - want).abs() < 1e-8, "a = {a}: {got} vs {want}");
            assert!(got >= 0.0 && got >= EULER_GAMMA - a - 1e-12);
        }
    }

    #[test]
    fn normal_partial_expectation_examples() {
        assert!((normal_partial_expectation(0.0, 1.0, 0.0).unwrap() - 0.398_942).abs() < 1e-6);
        // At z = 0 the loss is s·φ(0).
        let v = normal_partial_expectation(1.151_293, 0.536_575, 1.151_293).unwrap();
        assert!((v - 0.536_575 * FRAC_1_SQRT_2PI).abs() < 1e-15);
        assert!((v - 0.214_062).abs() < 1e-6);
        assert!((normal_partial_expectation(5.0, 1.0, -10.0).unwrap() - 15.0).abs() < 1e-12);
        assert!(normal_partial_expectation(0.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn exp_max_cdf_examples() {
        assert!((exp_max_cdf(1, 1.0, 0.5 * LN_2).unwrap() - 0.5).abs() < 1e-15);
        assert!((exp_max_cdf(10, 1.0, 1.35178).unwrap() - 0.5).abs() < 1e-4);
        assert_eq!(exp_max_cdf(10, 1.0, 0.0).unwrap(), 0.0);
        assert!(exp_max_cdf(0, 1.0, 1.0).is_err());
    }

    #[test]
    fn exp_max_quantile_examples() {
        assert!((exp_max_quantile(10, 1.0, 0.5).unwrap() - 1.35178).abs() < 1e-4);
        assert!((exp_max_quantile(1, 1.0, 0.5).unwrap() - 0.5 * LN_2).abs() < 1e-15);
        assert!((exp_max_quantile(100, 1.0, 100.0 / 101.0).unwrap() - 4.60768).abs() < 1e-4);
        for &n in &[1, 7, 100, 10_000] {
            for &p in &[1e-6, 0.1, 0.5, 0.9, 0.999_99] {
                let x = exp_max_quantile(n, 1.3, p).unwrap();
                assert!((exp_max_cdf(n, 1.3, x).unwrap() - p).abs() < 1e-10);
            }
        }
        assert!(exp_max_quantile(10, 1.0, 1.0).is_err());
    }

    // Independent oracle: quadrature of the tail in the original variable x.
    fn overshoot_x_quadrature(n: usize, sigma: f64, level: f64) -> f64 {
        let tail = |x: f64| {
            let y = (-2.0 * x / (sigma * sigma)).exp();
            -((n as f64) * (-y).ln_1p()).exp_m1()
        };
        integrate_to_infinity(tail, level, &QuadratureConfig::tight())
            .unwrap()
            .value
    }

    #[test]
    fn exp_max_partial_expectation_examples() {
        let h10 = harmonic(10);
        assert!((h10 - 2.928_968).abs() < 1e-6);
        assert!((exp_max_partial_expectation(10, 1.0, 0.0).unwrap() - 0.5 * h10).abs() < 1e-8);
        assert!((exp_max_partial_expectation(10, 1.0, 1.35178).unwrap() - 0.28989).abs() < 5e-4);
        for &i in &[0.0, 0.3, 2.0] {
            let v = exp_max_partial_expectation(1, 1.0, i).unwrap();
            assert!((v - 0.5 * (-2.0 * i).exp()).abs() < 1e-14);
        }
        assert!(exp_max_partial_expectation(10, 1.0, -1.0).is_err());
    }

    #[test]
    fn exp_max_partial_expectation_matches_quadrature() {
        for n in 1..=200 {
            for k in 0..=20 {
                let level = 0.5 * k as f64;
                let got = exp_max_partial_expectation(n, 1.0, level).unwrap();
                let want = overshoot_x_quadrature(n, 1.0, level);
                assert!((got - want).abs() < 1e-8, "N = {n}, I = {level}: {got} vs {want}");
            }
        }
        let big = exp_max_partial_expectation(5000, 0.7, 0.0).unwrap();
        assert!((big - 0.245 * harmonic(5000)).abs() < 1e-9);
    }

    #[test]
    fn partial_expectations_are_convex_and_decreasing() {
        let grid: Vec<f64> = (0..200).map(|k| 0.05 * k as f64).collect();
        let families: Vec<Box<dyn Fn(f64) -> f64>> = vec![
            Box::new(|x| exp_max_partial_expectation(25, 1.0, x).unwrap()),
            Box::new(|x| exp_max_partial_expectation(120, 0.8, x).unwrap()),
            Box::new(|x| gumbel_partial_expectation(x - 4.0)),
            Box::new(|x| normal_partial_expectation(3.0, 0.7, x).unwrap()),
        ];
        for f in &families {
            let v: Vec<f64> = grid.iter().map(|&x| f(x)).collect();
            for w in v.windows(3) {
                assert!(w[1] <= w[0] + 1e-12);
                assert!(w[0] - 2.0 * w[1] + w[2] >= -1e-9);
            }
        }
    }

    #[test]
    fn ks_critical_value_at_level_0_001() {
        // 1.9495 / sqrt(n)
        assert!((ks_critical_value(10_000, 0.001) - 0.019_495).abs() < 1e-5);
    }
}
