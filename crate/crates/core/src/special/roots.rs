//! Bracketing root finder (Brent's method) and bracket expansion.

use crate::error::{Error, Result};

/// Finds `x` in `[lo, hi]` with `f(x) = 0` to absolute tolerance `tol`.
///
/// `f(lo)` and `f(hi)` must have opposite signs (or one of them be zero).
pub fn brent<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() || !fa.is_finite() || !fb.is_finite() {
        return Err(Error::RootBracket {
            lo,
            hi,
            f_lo: fa,
            f_hi: fb,
        });
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..200 {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * tol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b);
    }
    Ok(b)
}

/// Widens `[lo, hi]` geometrically about its midpoint until `f` changes
/// sign, giving up after `max_rounds` expansions.
pub fn expand_bracket<F: FnMut(f64) -> f64>(
    mut f: F,
    mut lo: f64,
    mut hi: f64,
    factor: f64,
    max_rounds: usize,
) -> Result<(f64, f64)> {
    let mut f_lo = f(lo);
    let mut f_hi = f(hi);
    for _ in 0..max_rounds {
        if f_lo.signum() != f_hi.signum() || f_lo == 0.0 || f_hi == 0.0 {
            return Ok((lo, hi));
        }
        let half = 0.5 * (hi - lo) * factor;
        let mid = 0.5 * (hi + lo);
        lo = mid - half;
        hi = mid + half;
        f_lo = f(lo);
        f_hi = f(hi);
    }
    if f_lo.signum() != f_hi.signum() {
        return Ok((lo, hi));
    }
    Err(Error::RootBracket { lo, hi, f_lo, f_hi })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_cubic_root() {
        let r = brent(|x| x * x * x - 2.0, 0.0, 2.0, 1e-14).unwrap();
        assert!((r - 2f64.cbrt()).abs() < 1e-13);
    }

    #[test]
    fn reports_missing_bracket() {
        assert!(matches!(
            brent(|x| x * x + 1.0, -1.0, 1.0, 1e-12),
            Err(Error::RootBracket { .. })
        ));
    }

    #[test]
    fn expands_until_sign_change() {
        let (lo, hi) = expand_bracket(|x| x - 37.0, 0.0, 1.0, 2.0, 20).unwrap();
        assert!(lo <= 37.0 && hi >= 37.0);
    }
}
