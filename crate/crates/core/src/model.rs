//! The Bayesian cure-fraction regression model: logistic link on the cure
//! probability, right-censored log-likelihood under the cure-reparametrized
//! generalized Gompertz, log-priors, constraint transforms and the analytic
//! gradient of the unconstrained log-posterior.
//!
//! The sampler works in an unconstrained space: `alpha = -e^a`, `psi = e^s`,
//! with the log-Jacobian `a + s` added to the posterior.

use crate::data::SurvivalDataset;
use crate::error::{Error, Result};
use crate::special::{gamma_log_pdf, log1mexp, log1pexp, normal_log_pdf};

/// Clamp on the linear predictor of the logistic link. Keeps log(p) and
/// log(1-p) finite; the gradient of a clamped subject is zero, consistent
/// with the clamped value.
pub const LINK_CLAMP: f64 = 35.0;

/// Constrained parameters: regression coefficients, negative shape, positive
/// power.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamVector {
    pub beta: Vec<f64>,
    pub alpha: f64,
    pub psi: f64,
}

impl ParamVector {
    pub fn new(beta: Vec<f64>, alpha: f64, psi: f64) -> Result<Self> {
        if beta.iter().any(|b| !b.is_finite()) {
            return Err(Error::domain("regression coefficients must be finite"));
        }
        if !(alpha < 0.0) || !alpha.is_finite() {
            return Err(Error::domain(format!("shape must be negative, got {alpha}")));
        }
        if !(psi > 0.0) || !psi.is_finite() {
            return Err(Error::domain(format!("power must be positive, got {psi}")));
        }
        Ok(Self { beta, alpha, psi })
    }

    pub fn to_unconstrained(&self) -> UnconstrainedParams {
        UnconstrainedParams {
            beta: self.beta.clone(),
            a: (-self.alpha).ln(),
            s: self.psi.ln(),
        }
    }
}

/// Unconstrained parameterization: `a = ln(-alpha)`, `s = ln(psi)`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnconstrainedParams {
    pub beta: Vec<f64>,
    pub a: f64,
    pub s: f64,
}

impl UnconstrainedParams {
    pub fn to_constrained(&self) -> ParamVector {
        ParamVector {
            beta: self.beta.clone(),
            alpha: -self.a.exp(),
            psi: self.s.exp(),
        }
    }

    /// Log-Jacobian of the back-transform, `a + s`.
    pub fn log_jacobian(&self) -> f64 {
        self.a + self.s
    }

    pub fn from_flat(u: &[f64]) -> Self {
        let k = u.len() - 2;
        Self {
            beta: u[..k].to_vec(),
            a: u[k],
            s: u[k + 1],
        }
    }

    pub fn to_flat(&self) -> Vec<f64> {
        let mut v = self.beta.clone();
        v.push(self.a);
        v.push(self.s);
        v
    }
}

/// Hyperparameters of the independent Normal/Normal/Gamma priors.
#[derive(Debug, Clone, PartialEq)]
pub struct PriorSpec {
    pub beta_means: Vec<f64>,
    pub beta_sds: Vec<f64>,
    pub alpha_mean: f64,
    pub alpha_sd: f64,
    /// Shape of the Gamma prior on psi (shape/rate parameterization).
    pub psi_shape: f64,
    pub psi_rate: f64,
}

impl PriorSpec {
    /// Vague defaults: Normal(0, 10^2) coefficients and shape,
    /// Gamma(0.01, 0.01) power.
    pub fn vague(n_coef: usize) -> Self {
        Self {
            beta_means: vec![0.0; n_coef],
            beta_sds: vec![10.0; n_coef],
            alpha_mean: 0.0,
            alpha_sd: 10.0,
            psi_shape: 0.01,
            psi_rate: 0.01,
        }
    }

    pub fn validate(&self, n_coef: usize) -> Result<()> {
        if self.beta_means.len() != n_coef || self.beta_sds.len() != n_coef {
            return Err(Error::domain(format!(
                "prior has {} coefficient entries, model needs {n_coef}",
                self.beta_means.len()
            )));
        }
        if self.beta_sds.iter().any(|s| !(s > &0.0)) {
            return Err(Error::domain("coefficient prior sds must be positive"));
        }
        if !(self.alpha_sd > 0.0) {
            return Err(Error::domain("shape prior sd must be positive"));
        }
        if !(self.psi_shape > 0.0) || !(self.psi_rate > 0.0) {
            return Err(Error::domain("power prior shape and rate must be positive"));
        }
        Ok(())
    }
}

/// Model family selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// Generalized Gompertz cure regression (free psi).
    Dggd,
    /// Gompertz cure regression (psi pinned at 1).
    Gompertz,
    /// Weibull standard mixture cure model.
    WeibullMixture,
}

impl Family {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "dggd" => Ok(Family::Dggd),
            "gompertz" => Ok(Family::Gompertz),
            "weibull-mixture" => Ok(Family::WeibullMixture),
            other => Err(Error::Config(format!(
                "unknown family '{other}' (expected dggd, gompertz or weibull-mixture)"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Family::Dggd => "dggd",
            Family::Gompertz => "gompertz",
            Family::WeibullMixture => "weibull-mixture",
        }
    }
}

/// Cure probability through the logistic link, p(x) = 1/(1 + e^{-x'beta}).
pub fn cure_probability(beta: &[f64], x: &[f64]) -> Result<f64> {
    if beta.len() != x.len() {
        return Err(Error::domain(format!(
            "coefficient/covariate length mismatch: {} vs {}",
            beta.len(),
            x.len()
        )));
    }
    let eta: f64 = beta.iter().zip(x).map(|(b, v)| b * v).sum();
    let eta = eta.clamp(-LINK_CLAMP, LINK_CLAMP);
    Ok(crate::special::logistic(eta))
}

// ---------------------------------------------------------------------------
// Per-subject likelihood kernel.
//
// With c = ln(1-p) and L = ln(1 - (1-p)^{1/psi}) the subject's Gompertz
// scale is mu = alpha * L, so mu/alpha = L and everything stays on the log
// scale:
//   log S_G = -L (e^{alpha t} - 1)
//   log f   = ln psi + ln(-alpha) + ln(-L) + alpha t + log S_G
//             + (psi - 1) ln(1 - S_G)
//   log S   = ln(1 - (1 - S_G)^psi)
// ---------------------------------------------------------------------------

struct SubjectTerm {
    loglik: f64,
    // d loglik / d eta (through p), d/d alpha, d/d psi (total, L-chain included)
    d_eta: f64,
    d_alpha: f64,
    d_psi: f64,
}

#[inline]
fn subject_term(t: f64, event: bool, eta: f64, alpha: f64, psi: f64, with_grad: bool) -> SubjectTerm {
    let clamped = eta.abs() >= LINK_CLAMP;
    let eta = eta.clamp(-LINK_CLAMP, LINK_CLAMP);
    let c = -log1pexp(eta); // ln(1-p)
    let ln_p = -log1pexp(-eta);
    let p = ln_p.exp();

    let x1 = c / psi; // ln (1-p)^{1/psi}
    let b = x1.exp();
    let one_minus_b = -x1.exp_m1();
    let ell = log1mexp(x1); // L = ln(1 - B) < 0
    let ln_neg_ell = if x1 < -37.0 { x1 } else { (-ell).ln() };

    let z = alpha * t;
    let e = z.exp_m1(); // e^{alpha t} - 1, in (-1, 0)
    let ez = e + 1.0;
    let log_s_g = -ell * e;
    let log_f_base = log1mexp(log_s_g.min(0.0));
    let log_s_d = log1mexp((psi * log_f_base).min(0.0));

    let loglik = if event {
        psi.ln() + (-alpha).ln() + ln_neg_ell + z + log_s_g + (psi - 1.0) * log_f_base
    } else {
        log_s_d
    };

    if !with_grad {
        return SubjectTerm {
            loglik,
            d_eta: 0.0,
            d_alpha: 0.0,
            d_psi: 0.0,
        };
    }

    let d_log_s_g_d_alpha = -ell * t * ez;
    let d_log_s_g_d_ell = -e;

    let (g_alpha, g_ell, g_psi_direct) = if event {
        let r1 = (log_s_g - log_f_base).exp(); // S_G / F
        let scale = 1.0 - (psi - 1.0) * r1;
        (
            1.0 / alpha + t + d_log_s_g_d_alpha * scale,
            1.0 / ell + d_log_s_g_d_ell * scale,
            1.0 / psi + log_f_base,
        )
    } else {
        let coef = psi * ((psi - 1.0) * log_f_base + log_s_g - log_s_d).exp();
        (
            coef * d_log_s_g_d_alpha,
            coef * d_log_s_g_d_ell,
            -(psi * log_f_base - log_s_d).exp() * log_f_base,
        )
    };

    // Chain through L(p, psi).
    let d_ell_d_psi = b * c / (psi * psi * one_minus_b);
    let d_ell_d_eta = if clamped { 0.0 } else { b * p / (psi * one_minus_b) };

    SubjectTerm {
        loglik,
        d_eta: g_ell * d_ell_d_eta,
        d_alpha: g_alpha,
        d_psi: g_psi_direct + g_ell * d_ell_d_psi,
    }
}

/// Right-censored log-likelihood of the cure regression at a constrained
/// parameter point.
pub fn log_likelihood(theta: &ParamVector, data: &SurvivalDataset) -> Result<f64> {
    if data.n() > 0 && theta.beta.len() != data.n_covariates() {
        return Err(Error::domain(format!(
            "model has {} coefficients, data has {} covariate columns",
            theta.beta.len(),
            data.n_covariates()
        )));
    }
    let mut total = 0.0;
    for i in 0..data.n() {
        let eta: f64 = theta
            .beta
            .iter()
            .zip(data.covariate_row(i))
            .map(|(b, x)| b * x)
            .sum();
        let term = subject_term(
            data.time(i),
            data.event(i) == 1,
            eta,
            theta.alpha,
            theta.psi,
            false,
        );
        total += term.loglik;
    }
    Ok(total)
}

/// Sum of the independent prior log-densities at a constrained point.
pub fn log_prior(theta: &ParamVector, priors: &PriorSpec) -> Result<f64> {
    priors.validate(theta.beta.len())?;
    let mut lp = 0.0;
    for (k, &b) in theta.beta.iter().enumerate() {
        lp += normal_log_pdf(b, priors.beta_means[k], priors.beta_sds[k]);
    }
    lp += normal_log_pdf(theta.alpha, priors.alpha_mean, priors.alpha_sd);
    lp += gamma_log_pdf(theta.psi, priors.psi_shape, priors.psi_rate);
    Ok(lp)
}

/// log-likelihood + log-prior + log-Jacobian at an unconstrained point.
pub fn log_posterior_unconstrained(
    u: &UnconstrainedParams,
    data: &SurvivalDataset,
    priors: &PriorSpec,
) -> f64 {
    let theta = u.to_constrained();
    let ll = log_likelihood(&theta, data).unwrap_or(f64::NEG_INFINITY);
    let lp = log_prior(&theta, priors).unwrap_or(f64::NEG_INFINITY);
    ll + lp + u.log_jacobian()
}

/// Analytic gradient of [`log_posterior_unconstrained`], layout
/// `[d/d beta_0, ..., d/d beta_q, d/d a, d/d s]`.
pub fn grad_log_posterior_unconstrained(
    u: &UnconstrainedParams,
    data: &SurvivalDataset,
    priors: &PriorSpec,
) -> Vec<f64> {
    let model = DggdModel {
        data: data.clone(),
        priors: priors.clone(),
    };
    model.logpost_grad_analytic(&u.to_flat()).1
}

/// Central finite differences of a scalar function, step
/// `h_j = 1e-5 (1 + |u_j|)`.
pub fn fd_gradient<F: Fn(&[f64]) -> f64>(f: F, u: &[f64]) -> Vec<f64> {
    let mut grad = vec![0.0; u.len()];
    let mut work = u.to_vec();
    for j in 0..u.len() {
        let h = 1e-5 * (1.0 + u[j].abs());
        work[j] = u[j] + h;
        let up = f(&work);
        work[j] = u[j] - h;
        let down = f(&work);
        work[j] = u[j];
        grad[j] = (up - down) / (2.0 * h);
    }
    grad
}

/// Shared interface of the three model families: unconstrained log-posterior
/// with gradient, constraint transform and per-observation likelihood terms.
pub trait BayesModel: Sync {
    fn family(&self) -> Family;
    fn dim(&self) -> usize;
    fn n_obs(&self) -> usize;
    fn parameter_names(&self) -> Vec<String>;
    fn log_posterior(&self, u: &[f64]) -> f64;
    fn log_posterior_and_grad(&self, u: &[f64]) -> (f64, Vec<f64>);
    /// Map an unconstrained point to the constrained parameter layout used
    /// in reports (`beta..., alpha, psi` or `beta..., lambda, gamma`).
    fn constrain(&self, u: &[f64]) -> Vec<f64>;
    /// Per-observation log-likelihood terms at a constrained point:
    /// `delta log f + (1 - delta) log S`.
    fn pointwise_loglik(&self, constrained: &[f64]) -> Vec<f64>;
    /// Per-observation log-survival at a constrained point.
    fn log_survival_obs(&self, constrained: &[f64], i: usize) -> f64;
}

fn beta_param_names(k: usize) -> Vec<String> {
    (0..k).map(|i| format!("beta{i}")).collect()
}

/// Generalized Gompertz cure regression (free power parameter).
#[derive(Debug, Clone)]
pub struct DggdModel {
    pub data: SurvivalDataset,
    pub priors: PriorSpec,
}

impl DggdModel {
    pub fn new(data: SurvivalDataset, priors: PriorSpec) -> Result<Self> {
        priors.validate(data.n_covariates())?;
        Ok(Self { data, priors })
    }

    fn logpost_value(&self, u: &[f64]) -> f64 {
        log_posterior_unconstrained(&UnconstrainedParams::from_flat(u), &self.data, &self.priors)
    }

    fn logpost_grad_analytic(&self, u: &[f64]) -> (f64, Vec<f64>) {
        let k = u.len() - 2;
        let (a, s) = (u[k], u[k + 1]);
        let alpha = -a.exp();
        let psi = s.exp();
        let beta = &u[..k];

        let mut loglik = 0.0;
        let mut g_beta = vec![0.0; k];
        let mut g_alpha = 0.0;
        let mut g_psi = 0.0;
        for i in 0..self.data.n() {
            let row = self.data.covariate_row(i);
            let eta: f64 = beta.iter().zip(row).map(|(b, x)| b * x).sum();
            let term = subject_term(self.data.time(i), self.data.event(i) == 1, eta, alpha, psi, true);
            loglik += term.loglik;
            g_alpha += term.d_alpha;
            g_psi += term.d_psi;
            for (gb, &x) in g_beta.iter_mut().zip(row) {
                *gb += term.d_eta * x;
            }
        }

        let pr = &self.priors;
        let mut logp = loglik;
        let mut grad = vec![0.0; u.len()];
        for j in 0..k {
            logp += normal_log_pdf(beta[j], pr.beta_means[j], pr.beta_sds[j]);
            grad[j] = g_beta[j] - (beta[j] - pr.beta_means[j]) / (pr.beta_sds[j] * pr.beta_sds[j]);
        }
        logp += normal_log_pdf(alpha, pr.alpha_mean, pr.alpha_sd);
        logp += gamma_log_pdf(psi, pr.psi_shape, pr.psi_rate);
        logp += a + s;
        // d alpha / d a = alpha, d psi / d s = psi.
        grad[k] = alpha * (g_alpha - (alpha - pr.alpha_mean) / (pr.alpha_sd * pr.alpha_sd)) + 1.0;
        grad[k + 1] = psi * g_psi + (pr.psi_shape - 1.0) - pr.psi_rate * psi + 1.0;
        (logp, grad)
    }
}

impl BayesModel for DggdModel {
    fn family(&self) -> Family {
        Family::Dggd
    }

    fn dim(&self) -> usize {
        self.data.n_covariates() + 2
    }

    fn n_obs(&self) -> usize {
        self.data.n()
    }

    fn parameter_names(&self) -> Vec<String> {
        let mut names = beta_param_names(self.data.n_covariates());
        names.push("alpha".into());
        names.push("psi".into());
        names
    }

    fn log_posterior(&self, u: &[f64]) -> f64 {
        self.logpost_value(u)
    }

    fn log_posterior_and_grad(&self, u: &[f64]) -> (f64, Vec<f64>) {
        #[cfg(feature = "fd-gradient")]
        {
            (self.logpost_value(u), fd_gradient(|v| self.logpost_value(v), u))
        }
        #[cfg(not(feature = "fd-gradient"))]
        {
            self.logpost_grad_analytic(u)
        }
    }

    fn constrain(&self, u: &[f64]) -> Vec<f64> {
        let k = u.len() - 2;
        let mut out = u[..k].to_vec();
        out.push(-u[k].exp());
        out.push(u[k + 1].exp());
        out
    }

    fn pointwise_loglik(&self, constrained: &[f64]) -> Vec<f64> {
        let k = constrained.len() - 2;
        let (alpha, psi) = (constrained[k], constrained[k + 1]);
        (0..self.data.n())
            .map(|i| {
                let eta: f64 = constrained[..k]
                    .iter()
                    .zip(self.data.covariate_row(i))
                    .map(|(b, x)| b * x)
                    .sum();
                subject_term(self.data.time(i), self.data.event(i) == 1, eta, alpha, psi, false)
                    .loglik
            })
            .collect()
    }

    fn log_survival_obs(&self, constrained: &[f64], i: usize) -> f64 {
        let k = constrained.len() - 2;
        let (alpha, psi) = (constrained[k], constrained[k + 1]);
        let eta: f64 = constrained[..k]
            .iter()
            .zip(self.data.covariate_row(i))
            .map(|(b, x)| b * x)
            .sum();
        subject_term(self.data.time(i), false, eta, alpha, psi, false).loglik
    }
}

/// Gompertz cure regression: the power parameter is pinned at 1 and drops
/// out of the parameter vector and the prior.
#[derive(Debug, Clone)]
pub struct GompertzModel {
    pub data: SurvivalDataset,
    pub priors: PriorSpec,
}

impl GompertzModel {
    pub fn new(data: SurvivalDataset, priors: PriorSpec) -> Result<Self> {
        priors.validate(data.n_covariates())?;
        Ok(Self { data, priors })
    }

    fn logpost_value(&self, u: &[f64]) -> f64 {
        self.logpost_grad(u, false).0
    }

    fn logpost_grad(&self, u: &[f64], with_grad: bool) -> (f64, Vec<f64>) {
        let k = u.len() - 1;
        let a = u[k];
        let alpha = -a.exp();
        let beta = &u[..k];

        let mut loglik = 0.0;
        let mut g_beta = vec![0.0; k];
        let mut g_alpha = 0.0;
        for i in 0..self.data.n() {
            let row = self.data.covariate_row(i);
            let eta: f64 = beta.iter().zip(row).map(|(b, x)| b * x).sum();
            let term = subject_term(
                self.data.time(i),
                self.data.event(i) == 1,
                eta,
                alpha,
                1.0,
                with_grad,
            );
            loglik += term.loglik;
            g_alpha += term.d_alpha;
            for (gb, &x) in g_beta.iter_mut().zip(row) {
                *gb += term.d_eta * x;
            }
        }

        let pr = &self.priors;
        let mut logp = loglik;
        let mut grad = vec![0.0; u.len()];
        for j in 0..k {
            logp += normal_log_pdf(beta[j], pr.beta_means[j], pr.beta_sds[j]);
            if with_grad {
                grad[j] =
                    g_beta[j] - (beta[j] - pr.beta_means[j]) / (pr.beta_sds[j] * pr.beta_sds[j]);
            }
        }
        logp += normal_log_pdf(alpha, pr.alpha_mean, pr.alpha_sd);
        logp += a;
        if with_grad {
            grad[k] =
                alpha * (g_alpha - (alpha - pr.alpha_mean) / (pr.alpha_sd * pr.alpha_sd)) + 1.0;
        }
        (logp, grad)
    }
}

impl BayesModel for GompertzModel {
    fn family(&self) -> Family {
        Family::Gompertz
    }

    fn dim(&self) -> usize {
        self.data.n_covariates() + 1
    }

    fn n_obs(&self) -> usize {
        self.data.n()
    }

    fn parameter_names(&self) -> Vec<String> {
        let mut names = beta_param_names(self.data.n_covariates());
        names.push("alpha".into());
        names
    }

    fn log_posterior(&self, u: &[f64]) -> f64 {
        self.logpost_value(u)
    }

    fn log_posterior_and_grad(&self, u: &[f64]) -> (f64, Vec<f64>) {
        #[cfg(feature = "fd-gradient")]
        {
            (self.logpost_value(u), fd_gradient(|v| self.logpost_value(v), u))
        }
        #[cfg(not(feature = "fd-gradient"))]
        {
            self.logpost_grad(u, true)
        }
    }

    fn constrain(&self, u: &[f64]) -> Vec<f64> {
        let k = u.len() - 1;
        let mut out = u[..k].to_vec();
        out.push(-u[k].exp());
        out
    }

    fn pointwise_loglik(&self, constrained: &[f64]) -> Vec<f64> {
        let k = constrained.len() - 1;
        let alpha = constrained[k];
        (0..self.data.n())
            .map(|i| {
                let eta: f64 = constrained[..k]
                    .iter()
                    .zip(self.data.covariate_row(i))
                    .map(|(b, x)| b * x)
                    .sum();
                subject_term(self.data.time(i), self.data.event(i) == 1, eta, alpha, 1.0, false)
                    .loglik
            })
            .collect()
    }

    fn log_survival_obs(&self, constrained: &[f64], i: usize) -> f64 {
        let k = constrained.len() - 1;
        let alpha = constrained[k];
        let eta: f64 = constrained[..k]
            .iter()
            .zip(self.data.covariate_row(i))
            .map(|(b, x)| b * x)
            .sum();
        subject_term(self.data.time(i), false, eta, alpha, 1.0, false).loglik
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;

    fn toy_dataset() -> SurvivalDataset {
        SurvivalDataset::new(
            vec![0.5, 1.2, 2.0],
            vec![1, 0, 1],
            vec![
                vec![1.0, 1.0, -0.3],
                vec![1.0, 0.0, 0.8],
                vec![1.0, 1.0, 1.5],
            ],
        )
        .unwrap()
    }

    fn toy_theta() -> ParamVector {
        ParamVector::new(vec![-0.5, 0.4, -0.2], -1.3, 1.7).unwrap()
    }

    #[test]
    fn cure_probability_values() {
        assert_relative_eq!(
            cure_probability(&[0.0, 0.0], &[1.0, 3.0]).unwrap(),
            0.5,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            cure_probability(&[-1.0], &[1.0]).unwrap(),
            0.2689414213699951,
            max_relative = 1e-15
        );
        // Saturated link stays strictly inside (0,1).
        let p = cure_probability(&[40.0], &[1.0]).unwrap();
        assert!(p < 1.0 && (1.0 - p).ln().is_finite());
        assert!(cure_probability(&[1.0, 2.0], &[1.0]).is_err());
    }

    #[test]
    fn log_likelihood_empty_dataset_is_zero() {
        let data = SurvivalDataset::new(vec![], vec![], vec![]).unwrap();
        assert_eq!(log_likelihood(&toy_theta(), &data).unwrap(), 0.0);
    }

    #[test]
    fn log_likelihood_censored_near_zero_time() {
        let data =
            SurvivalDataset::new(vec![1e-12], vec![0], vec![vec![1.0, 0.0, 0.0]]).unwrap();
        assert_abs_diff_eq!(log_likelihood(&toy_theta(), &data).unwrap(), 0.0, epsilon = 1e-10);
    }

    #[test]
    fn log_likelihood_matches_term_oracle() {
        // Frozen 40-digit evaluation of the three subject terms.
        let expected = -4.680470197486069;
        assert_relative_eq!(
            log_likelihood(&toy_theta(), &toy_dataset()).unwrap(),
            expected,
            max_relative = 1e-13
        );
    }

    #[test]
    fn log_likelihood_is_additive_over_subjects() {
        let data = toy_dataset();
        let theta = toy_theta();
        let whole = log_likelihood(&theta, &data).unwrap();
        let mut parts = 0.0;
        for i in 0..data.n() {
            let single = SurvivalDataset::new(
                vec![data.time(i)],
                vec![data.event(i)],
                vec![data.covariate_row(i).to_vec()],
            )
            .unwrap();
            parts += log_likelihood(&theta, &single).unwrap();
        }
        assert_relative_eq!(whole, parts, max_relative = 1e-14);
        let doubled = data.concat(&data).unwrap();
        assert_relative_eq!(
            log_likelihood(&theta, &doubled).unwrap(),
            2.0 * whole,
            max_relative = 1e-14
        );
    }

    #[test]
    fn log_prior_matches_oracle() {
        let theta = toy_theta();
        let vague = PriorSpec::vague(3);
        assert_relative_eq!(
            log_prior(&theta, &vague).unwrap(),
            -18.084648053248325,
            max_relative = 1e-12
        );
        let custom = PriorSpec {
            beta_means: vec![0.1, -0.2, 0.3],
            beta_sds: vec![2.0, 1.5, 3.0],
            alpha_mean: -1.0,
            alpha_sd: 2.0,
            psi_shape: 2.0,
            psi_rate: 0.5,
        };
        assert_relative_eq!(
            log_prior(&theta, &custom).unwrap(),
            -8.421930889661465,
            max_relative = 1e-12
        );
    }

    #[test]
    fn normal_prior_term_one_sd_from_mean() {
        let pr = PriorSpec::vague(1);
        let at_mean = ParamVector::new(vec![0.0], -1.0, 1.0).unwrap();
        let at_sd = ParamVector::new(vec![10.0], -1.0, 1.0).unwrap();
        let diff = log_prior(&at_mean, &pr).unwrap() - log_prior(&at_sd, &pr).unwrap();
        assert_relative_eq!(diff, 0.5, max_relative = 1e-12);
    }

    #[test]
    fn unconstrained_posterior_differs_by_jacobian() {
        let data = toy_dataset();
        let priors = PriorSpec::vague(3);
        let theta = toy_theta();
        let u = theta.to_unconstrained();
        let constrained =
            log_likelihood(&theta, &data).unwrap() + log_prior(&theta, &priors).unwrap();
        let unconstrained = log_posterior_unconstrained(&u, &data, &priors);
        assert_relative_eq!(
            unconstrained - constrained,
            u.log_jacobian(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn unconstrained_posterior_finite_at_extreme_shape() {
        // a = -30 puts alpha at about -1e-13.
        let data = toy_dataset();
        let priors = PriorSpec::vague(3);
        let u = UnconstrainedParams {
            beta: vec![-0.5, 0.4, -0.2],
            a: -30.0,
            s: 0.2,
        };
        assert!(log_posterior_unconstrained(&u, &data, &priors).is_finite());
    }

    #[test]
    fn prior_only_gradient_is_quadratic_score() {
        // Empty dataset: the beta gradient reduces to -(beta - m)/sd^2.
        let data = SurvivalDataset::new(vec![], vec![], vec![]).unwrap();
        let mut priors = PriorSpec::vague(2);
        priors.beta_means = vec![0.3, -0.7];
        priors.beta_sds = vec![1.5, 2.0];
        let u = UnconstrainedParams {
            beta: vec![1.0, 0.5],
            a: 0.1,
            s: -0.2,
        };
        let g = grad_log_posterior_unconstrained(&u, &data, &priors);
        assert_relative_eq!(g[0], -(1.0 - 0.3) / (1.5 * 1.5), max_relative = 1e-12);
        assert_relative_eq!(g[1], -(0.5 + 0.7) / (2.0 * 2.0), max_relative = 1e-12);
    }

    #[test]
    fn analytic_gradient_matches_finite_differences_on_toy() {
        let data = toy_dataset();
        let priors = PriorSpec::vague(3);
        let u = UnconstrainedParams {
            beta: vec![-0.5, 0.4, -0.2],
            a: 0.26,
            s: 0.53,
        };
        let g = grad_log_posterior_unconstrained(&u, &data, &priors);
        let fd = fd_gradient(
            |v| log_posterior_unconstrained(&UnconstrainedParams::from_flat(v), &data, &priors),
            &u.to_flat(),
        );
        for (j, (a, b)) in g.iter().zip(&fd).enumerate() {
            assert_relative_eq!(a, b, max_relative = 1e-5, epsilon = 1e-8);
            let _ = j;
        }
    }

    #[test]
    fn gompertz_family_equals_psi_one_dggd() {
        let data = toy_dataset();
        let priors = PriorSpec::vague(3);
        let dggd = DggdModel::new(data.clone(), priors.clone()).unwrap();
        let gomp = GompertzModel::new(data, priors.clone()).unwrap();
        let u_g = vec![-0.5, 0.4, -0.2, 0.26];
        let mut u_d = u_g.clone();
        u_d.push(0.0); // s = 0 -> psi = 1, jacobian contribution 0
        let lp_g = gomp.log_posterior(&u_g);
        let lp_d = dggd.log_posterior(&u_d);
        let psi_prior = gamma_log_pdf(1.0, priors.psi_shape, priors.psi_rate);
        assert_relative_eq!(lp_g, lp_d - psi_prior, max_relative = 1e-12);
    }

    #[test]
    fn family_parse_round_trip() {
        for f in [Family::Dggd, Family::Gompertz, Family::WeibullMixture] {
            assert_eq!(Family::parse(f.name()).unwrap(), f);
        }
        assert!(Family::parse("cox").is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(256))]

        #[test]
        fn transform_round_trip_is_identity(
            b0 in -5.0f64..5.0,
            alpha in -6.0f64..-0.01,
            psi in 0.02f64..8.0,
        ) {
            let theta = ParamVector::new(vec![b0], alpha, psi).unwrap();
            let back = theta.to_unconstrained().to_constrained();
            prop_assert!((back.alpha - alpha).abs() <= 1e-14 * alpha.abs());
            prop_assert!((back.psi - psi).abs() <= 1e-14 * psi.abs());
            prop_assert_eq!(back.beta, theta.beta);
        }

        #[test]
        fn link_is_monotone_in_coefficients(
            b in -3.0f64..3.0,
            x in 0.05f64..4.0,
            bump in 0.01f64..1.0,
        ) {
            // Positive covariate value: increasing the coefficient increases p.
            let p0 = cure_probability(&[b], &[x]).unwrap();
            let p1 = cure_probability(&[b + bump], &[x]).unwrap();
            prop_assert!(p1 > p0);
        }
    }
}
