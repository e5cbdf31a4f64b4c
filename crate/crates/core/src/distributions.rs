//! Closed-form densities, survival functions, cure fractions and quantiles
//! for the Gompertz, generalized Gompertz (defective when the shape is
//! negative) and Weibull distributions.
//!
//! All evaluations are on the log scale. `1 - e^x` style quantities go
//! through `expm1`/`log1p` so nothing cancels catastrophically near t = 0 or
//! for cure probabilities close to 0 or 1.
//!
//! Parameter naming: the scale of the (generalized) Gompertz is called `mu`
//! here; `alpha` is the shape and `psi` the power parameter. A negative
//! `alpha` makes the distribution improper and the missing mass is the cure
//! fraction.

use crate::error::{Error, Result};
use crate::special::log1mexp;

/// Shape/scale pair of the Gompertz distribution. Defective when
/// `alpha < 0`; `alpha = 0` (the exponential limit) is rejected.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GompertzParams {
    alpha: f64,
    mu: f64,
}

impl GompertzParams {
    pub fn new(alpha: f64, mu: f64) -> Result<Self> {
        if !alpha.is_finite() || alpha == 0.0 {
            return Err(Error::domain(format!(
                "gompertz shape must be finite and nonzero, got {alpha}"
            )));
        }
        if !(mu > 0.0) || !mu.is_finite() {
            return Err(Error::domain(format!("gompertz scale must be positive, got {mu}")));
        }
        Ok(Self { alpha, mu })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }
}

/// Generalized Gompertz: Gompertz base raised through the power family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DGGDParams {
    alpha: f64,
    mu: f64,
    psi: f64,
}

impl DGGDParams {
    pub fn new(alpha: f64, mu: f64, psi: f64) -> Result<Self> {
        GompertzParams::new(alpha, mu)?;
        if !(psi > 0.0) || !psi.is_finite() {
            return Err(Error::domain(format!("power parameter must be positive, got {psi}")));
        }
        Ok(Self { alpha, mu, psi })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn psi(&self) -> f64 {
        self.psi
    }

    fn base(&self) -> GompertzParams {
        GompertzParams {
            alpha: self.alpha,
            mu: self.mu,
        }
    }
}

/// Cure-reparametrized generalized Gompertz: the scale is replaced by the
/// cure probability `p`, so `p` is estimated directly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DGGDCureParams {
    alpha: f64,
    p: f64,
    psi: f64,
}

impl DGGDCureParams {
    pub fn new(alpha: f64, p: f64, psi: f64) -> Result<Self> {
        if !(alpha < 0.0) || !alpha.is_finite() {
            return Err(Error::domain(format!(
                "cure parameterization requires a negative shape, got {alpha}"
            )));
        }
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::domain(format!("cure probability must lie in (0,1), got {p}")));
        }
        if !(psi > 0.0) || !psi.is_finite() {
            return Err(Error::domain(format!("power parameter must be positive, got {psi}")));
        }
        Ok(Self { alpha, p, psi })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn psi(&self) -> f64 {
        self.psi
    }
}

/// Weibull with shape `lambda` and rate `gamma`: S(t) = exp(-(gamma t)^lambda).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeibullParams {
    shape: f64,
    rate: f64,
}

impl WeibullParams {
    pub fn new(shape: f64, rate: f64) -> Result<Self> {
        if !(shape > 0.0) || !shape.is_finite() {
            return Err(Error::domain(format!("weibull shape must be positive, got {shape}")));
        }
        if !(rate > 0.0) || !rate.is_finite() {
            return Err(Error::domain(format!("weibull rate must be positive, got {rate}")));
        }
        Ok(Self { shape, rate })
    }

    pub fn shape(&self) -> f64 {
        self.shape
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }
}

/// Cure fraction together with a flag telling whether the distribution is
/// actually defective (`alpha < 0`). Proper distributions report 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CureFraction {
    pub value: f64,
    pub defective: bool,
}

// ---------------------------------------------------------------------------
// Raw kernels on plain f64 arguments. Preconditions are the callers'
// responsibility; the regression likelihood uses these directly.
// ---------------------------------------------------------------------------

/// log S(t) of the Gompertz: -(mu/alpha) (e^{alpha t} - 1).
///
/// For alpha > 0 the magnitude can exceed f64 range at large t; the result
/// saturates at -f64::MAX instead of overflowing to -inf.
#[inline]
pub(crate) fn gompertz_log_survival_raw(t: f64, alpha: f64, mu: f64) -> f64 {
    let v = (mu / alpha) * (alpha * t).exp_m1();
    if v.is_infinite() {
        return -f64::MAX;
    }
    -v
}

#[inline]
pub(crate) fn gompertz_log_pdf_raw(t: f64, alpha: f64, mu: f64) -> f64 {
    mu.ln() + alpha * t + gompertz_log_survival_raw(t, alpha, mu)
}

#[inline]
pub(crate) fn dggd_log_pdf_raw(t: f64, alpha: f64, mu: f64, psi: f64) -> f64 {
    let log_s = gompertz_log_survival_raw(t, alpha, mu);
    let log_f_base = log1mexp(log_s.min(0.0));
    psi.ln() + gompertz_log_pdf_raw(t, alpha, mu) + (psi - 1.0) * log_f_base
}

#[inline]
pub(crate) fn dggd_log_survival_raw(t: f64, alpha: f64, mu: f64, psi: f64) -> f64 {
    let log_s = gompertz_log_survival_raw(t, alpha, mu);
    // S_G = 1 at t = 0 gives log F = -inf and psi * -inf stays -inf.
    let log_f_base = log1mexp(log_s.min(0.0));
    log1mexp((psi * log_f_base).min(0.0))
}

/// mu = alpha ln(1 - (1-p)^{1/psi}), computed as alpha * log1mexp(log1p(-p)/psi).
#[inline]
pub(crate) fn cure_scale_raw(alpha: f64, p: f64, psi: f64) -> f64 {
    alpha * log1mexp((-p).ln_1p() / psi)
}

/// Cure fraction of the generalized Gompertz for alpha < 0:
/// 1 - (1 - e^{mu/alpha})^psi.
#[inline]
pub(crate) fn dggd_cure_fraction_raw(alpha: f64, mu: f64, psi: f64) -> f64 {
    -(psi * log1mexp(mu / alpha)).exp_m1()
}

// ---------------------------------------------------------------------------
// Public operations with domain checks.
// ---------------------------------------------------------------------------

fn check_time_positive(t: f64) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::domain(format!("time must be positive and finite, got {t}")));
    }
    Ok(())
}

fn check_time_nonnegative(t: f64) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::domain(format!("time must be nonnegative and finite, got {t}")));
    }
    Ok(())
}

pub fn gompertz_log_pdf(t: f64, params: &GompertzParams) -> Result<f64> {
    check_time_positive(t)?;
    Ok(gompertz_log_pdf_raw(t, params.alpha, params.mu))
}

pub fn gompertz_log_survival(t: f64, params: &GompertzParams) -> Result<f64> {
    check_time_nonnegative(t)?;
    Ok(gompertz_log_survival_raw(t, params.alpha, params.mu))
}

/// e^{mu/alpha} for alpha < 0; a proper distribution (alpha > 0) has no cure
/// mass and reports 0 with `defective: false`.
pub fn gompertz_cure_fraction(params: &GompertzParams) -> CureFraction {
    if params.alpha < 0.0 {
        CureFraction {
            value: (params.mu / params.alpha).exp(),
            defective: true,
        }
    } else {
        CureFraction {
            value: 0.0,
            defective: false,
        }
    }
}

pub fn dggd_log_pdf(t: f64, params: &DGGDParams) -> Result<f64> {
    check_time_positive(t)?;
    Ok(dggd_log_pdf_raw(t, params.alpha, params.mu, params.psi))
}

pub fn dggd_log_survival(t: f64, params: &DGGDParams) -> Result<f64> {
    check_time_nonnegative(t)?;
    Ok(dggd_log_survival_raw(t, params.alpha, params.mu, params.psi))
}

/// 1 - (1 - e^{mu/alpha})^psi for alpha < 0, otherwise 0 with the proper flag.
pub fn dggd_cure_fraction(params: &DGGDParams) -> CureFraction {
    if params.alpha < 0.0 {
        CureFraction {
            value: dggd_cure_fraction_raw(params.alpha, params.mu, params.psi),
            defective: true,
        }
    } else {
        CureFraction {
            value: 0.0,
            defective: false,
        }
    }
}

/// Back out the Gompertz scale from the cure parameterization:
/// mu = alpha ln(1 - (1-p)^{1/psi}).
pub fn reparam_to_scale(cure: &DGGDCureParams) -> f64 {
    cure_scale_raw(cure.alpha, cure.p, cure.psi)
}

fn cure_to_dggd(cure: &DGGDCureParams) -> DGGDParams {
    DGGDParams {
        alpha: cure.alpha,
        mu: reparam_to_scale(cure),
        psi: cure.psi,
    }
}

/// Log-density of the cure-reparametrized model; defined as the composition
/// of [`reparam_to_scale`] with [`dggd_log_pdf`].
pub fn dggd_cure_log_pdf(t: f64, cure: &DGGDCureParams) -> Result<f64> {
    dggd_log_pdf(t, &cure_to_dggd(cure))
}

pub fn dggd_cure_log_survival(t: f64, cure: &DGGDCureParams) -> Result<f64> {
    dggd_log_survival(t, &cure_to_dggd(cure))
}

/// Inverse of the (possibly improper) CDF F(t) = 1 - S(t).
///
/// Bisection on a bracket grown geometrically from t = 1; absolute tolerance
/// 1e-10 in t. `u` must lie strictly below the susceptible mass `1 - p`.
pub fn dggd_quantile(u: f64, params: &DGGDParams) -> Result<f64> {
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::domain(format!("quantile level must lie in (0,1), got {u}")));
    }
    let attainable = if params.alpha < 0.0 {
        // 1 - p = (1 - p0)^psi
        (params.psi * log1mexp(params.mu / params.alpha)).exp()
    } else {
        1.0
    };
    if u >= attainable {
        return Err(Error::domain(format!(
            "quantile level {u} exceeds the susceptible fraction {attainable}: \
             mass exceeds susceptible fraction"
        )));
    }
    let cdf = |t: f64| -> f64 {
        -dggd_log_survival_raw(t, params.alpha, params.mu, params.psi).exp_m1()
    };
    let mut hi = 1.0;
    let mut grow = 0;
    while cdf(hi) <= u {
        hi *= 2.0;
        grow += 1;
        if grow > 200 {
            return Err(Error::domain(format!(
                "quantile level {u} is numerically indistinguishable from the susceptible \
                 fraction {attainable}"
            )));
        }
    }
    let mut lo = 0.0;
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        if cdf(mid) < u {
            lo = mid;
        } else {
            hi = mid;
        }
        if mid == lo || mid == hi {
            break; // interval no longer representable
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Quantile in the cure parameterization (composition through the scale).
pub fn dggd_cure_quantile(u: f64, cure: &DGGDCureParams) -> Result<f64> {
    dggd_quantile(u, &cure_to_dggd(cure))
}

#[inline]
pub(crate) fn weibull_log_survival_raw(t: f64, shape: f64, rate: f64) -> f64 {
    -((rate * t).ln() * shape).exp()
}

#[inline]
pub(crate) fn weibull_log_pdf_raw(t: f64, shape: f64, rate: f64) -> f64 {
    shape.ln() + shape * rate.ln() + (shape - 1.0) * t.ln()
        + weibull_log_survival_raw(t, shape, rate)
}

pub fn weibull_log_pdf(t: f64, params: &WeibullParams) -> Result<f64> {
    check_time_positive(t)?;
    Ok(weibull_log_pdf_raw(t, params.shape, params.rate))
}

pub fn weibull_log_survival(t: f64, params: &WeibullParams) -> Result<f64> {
    check_time_nonnegative(t)?;
    if t == 0.0 {
        return Ok(0.0);
    }
    Ok(weibull_log_survival_raw(t, params.shape, params.rate))
}
