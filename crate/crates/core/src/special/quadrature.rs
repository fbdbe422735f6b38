//! Adaptive Gauss–Kronrod (7/15) integration.
//!
//! Intervals are bisected in order of largest local error estimate until the
//! global estimate falls under `max(abs_tol, rel_tol * |I|)` or the
//! subdivision budget runs out. Semi-infinite ranges are mapped onto a finite
//! interval with `x = a + t / (1 - t)`.

// Node and weight tables are kept at their published precision.
#![allow(clippy::excessive_precision)]

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Tolerances and work limit for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            max_subdivisions: 2000,
        }
    }
}

impl QuadratureConfig {
    pub fn tight() -> Self {
        Self {
            abs_tol: 1e-14,
            rel_tol: 1e-13,
            max_subdivisions: 4000,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) {
            return Err(domain("abs_tol", self.abs_tol, "must be > 0"));
        }
        if !(self.rel_tol > 0.0) {
            return Err(domain("rel_tol", self.rel_tol, "must be > 0"));
        }
        if self.max_subdivisions < 16 {
            return Err(domain(
                "max_subdivisions",
                self.max_subdivisions as f64,
                "must be >= 16",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub abs_err: f64,
    pub subdivisions: usize,
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for the odd Kronrod nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (j, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let pair = f(center - dx) + f(center + dx);
        kronrod += w * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Integrates `f` over the finite interval `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<Integral> {
    integrate_panels(f, a, b, 1, cfg)
}

/// As [`integrate`], but starts from `panels` equal sub-intervals. Useful
/// when the integrand has features narrower than the whole range.
pub fn integrate_panels<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    panels: usize,
    cfg: &QuadratureConfig,
) -> Result<Integral> {
    cfg.validate()?;
    if !a.is_finite() || !b.is_finite() {
        return Err(domain(
            "interval endpoint",
            if a.is_finite() { b } else { a },
            "must be finite",
        ));
    }
    if a == b {
        return Ok(Integral {
            value: 0.0,
            abs_err: 0.0,
            subdivisions: 0,
        });
    }
    let panels = panels.max(1);
    let mut heap = BinaryHeap::with_capacity(cfg.max_subdivisions + panels);
    let width = (b - a) / panels as f64;
    for k in 0..panels {
        let lo = a + width * k as f64;
        let hi = if k + 1 == panels { b } else { lo + width };
        let (value, err) = gk15(&f, lo, hi);
        heap.push(Panel {
            a: lo,
            b: hi,
            value,
            err,
        });
    }
    let mut count = panels;
    loop {
        // Re-summing keeps the running totals free of accumulated drift.
        let (total, err) = heap.iter().fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.err));
        let target = cfg.abs_tol.max(cfg.rel_tol * total.abs());
        if err <= target {
            return Ok(Integral {
                value: total,
                abs_err: err,
                subdivisions: count,
            });
        }
        if count >= cfg.max_subdivisions {
            return Err(Error::Quadrature {
                value: total,
                abs_err: err,
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Panel cannot be split further in floating point.
            return Err(Error::Quadrature {
                value: total,
                abs_err: err,
            });
        }
        let (v1, e1) = gk15(&f, worst.a, mid);
        let (v2, e2) = gk15(&f, mid, worst.b);
        heap.push(Panel {
            a: worst.a,
            b: mid,
            value: v1,
            err: e1,
        });
        heap.push(Panel {
            a: mid,
            b: worst.b,
            value: v2,
            err: e2,
        });
        count += 1;
    }
}

/// Integrates `f` over `[a, ∞)`.
pub fn integrate_to_infinity<F: Fn(f64) -> f64>(f: F, a: f64, cfg: &QuadratureConfig) -> Result<Integral> {
    let mapped = |t: f64| {
        if t >= 1.0 {
            return 0.0;
        }
        let s = 1.0 - t;
        let x = a + t / s;
        let v = f(x) / (s * s);
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    integrate_panels(mapped, 0.0, 1.0, 8, cfg)
}
