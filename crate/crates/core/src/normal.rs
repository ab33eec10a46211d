//! Univariate normal distribution primitives.
//!
//! Tail probabilities go through `erfc` directly, so `ccdf` keeps full relative
//! accuracy far into the upper tail instead of cancelling in `1 - cdf`. The
//! analytic integrals start at zero delay; nothing in this module truncates.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Mean and variance of a normally distributed delay.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalParams {
    mean: f64,
    var: f64,
}

impl NormalParams {
    pub fn new(mean: f64, var: f64) -> Result<Self> {
        if !mean.is_finite() {
            return Err(Error::validation("mean", "mean must be finite"));
        }
        if !(var.is_finite() && var > 0.0) {
            return Err(Error::validation("var", "var must be finite and > 0"));
        }
        Ok(Self { mean, var })
    }

    /// Distribution of a sum of `count` independent copies.
    pub fn scaled(&self, count: usize) -> Self {
        debug_assert!(count > 0);
        let c = count as f64;
        Self {
            mean: self.mean * c,
            var: self.var * c,
        }
    }

    #[inline]
    pub fn mean(&self) -> f64 {
        self.mean
    }

    #[inline]
    pub fn var(&self) -> f64 {
        self.var
    }

    #[inline]
    pub fn std_dev(&self) -> f64 {
        self.var.sqrt()
    }

    #[inline]
    fn standardize(&self, x: f64) -> f64 {
        (x - self.mean) / self.std_dev()
    }

    pub fn pdf(&self, x: f64) -> f64 {
        let sd = self.std_dev();
        let z = (x - self.mean) / sd;
        FRAC_1_SQRT_2PI * (-0.5 * z * z).exp() / sd
    }

    pub fn cdf(&self, x: f64) -> f64 {
        standard_cdf(self.standardize(x))
    }

    /// Probability of exceeding `x`.
    pub fn ccdf(&self, x: f64) -> f64 {
        standard_ccdf(self.standardize(x))
    }

    /// The `x` with `ccdf(x) == p`.
    pub fn inv_ccdf(&self, p: f64) -> Result<f64> {
        Ok(self.mean + self.std_dev() * standard_inv_ccdf(p)?)
    }
}

pub fn standard_pdf(z: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * z * z).exp()
}

pub fn standard_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z * FRAC_1_SQRT_2)
}

pub fn standard_ccdf(z: f64) -> f64 {
    0.5 * libm::erfc(z * FRAC_1_SQRT_2)
}

/// Upper-tail quantile of the standard normal: `z` with `standard_ccdf(z) == p`.
pub fn standard_inv_ccdf(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::ProbabilityDomain(p));
    }
    // 1 - p is exact for p in [0.5, 1), so both branches hit the accurate lower tail.
    Ok(if p < 0.5 {
        -lower_tail_quantile(p)
    } else {
        lower_tail_quantile(1.0 - p)
    })
}

/// Solves `standard_cdf(x) == q` for `q` in (0, 0.5].
fn lower_tail_quantile(q: f64) -> f64 {
    let mut x = acklam(q);
    for _ in 0..2 {
        let e = standard_cdf(x) - q;
        let u = e * (2.0 * PI).sqrt() * (0.5 * x * x).exp();
        x -= u / (1.0 + 0.5 * x * u);
    }
    x
}

// Acklam's rational approximation, relative error ~1.15e-9 before refinement.
fn acklam(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const P_LOW: f64 = 0.024_25;

    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    }
}
