//! Weibull standard mixture cure model: the comparison baseline. The
//! population survival is `pi + (1 - pi) S_W(t)` with `pi` the cure
//! probability through the same logistic link, and the improper density is
//! `(1 - pi) f_W(t)`.

use crate::data::SurvivalDataset;
use crate::distributions::{weibull_log_pdf_raw, weibull_log_survival_raw, WeibullParams};
use crate::error::{Error, Result};
use crate::model::{BayesModel, Family, LINK_CLAMP};
use crate::special::{gamma_log_pdf, log1pexp, logaddexp, normal_log_pdf};

/// Constrained parameters of the mixture model: cure-link coefficients plus
/// the Weibull shape and rate.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureParamVector {
    pub beta: Vec<f64>,
    pub lambda: f64,
    pub gamma: f64,
}

impl MixtureParamVector {
    pub fn new(beta: Vec<f64>, lambda: f64, gamma: f64) -> Result<Self> {
        if beta.iter().any(|b| !b.is_finite()) {
            return Err(Error::domain("regression coefficients must be finite"));
        }
        WeibullParams::new(lambda, gamma)?;
        Ok(Self { beta, lambda, gamma })
    }
}

/// Gamma priors on the Weibull parameters plus the usual Normal coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct MixturePriors {
    pub beta_means: Vec<f64>,
    pub beta_sds: Vec<f64>,
    pub lambda_shape: f64,
    pub lambda_rate: f64,
    pub gamma_shape: f64,
    pub gamma_rate: f64,
}

impl MixturePriors {
    pub fn vague(n_coef: usize) -> Self {
        Self {
            beta_means: vec![0.0; n_coef],
            beta_sds: vec![10.0; n_coef],
            lambda_shape: 0.01,
            lambda_rate: 0.01,
            gamma_shape: 0.01,
            gamma_rate: 0.01,
        }
    }

    pub fn validate(&self, n_coef: usize) -> Result<()> {
        if self.beta_means.len() != n_coef || self.beta_sds.len() != n_coef {
            return Err(Error::domain(format!(
                "mixture prior has {} coefficient entries, model needs {n_coef}",
                self.beta_means.len()
            )));
        }
        if self.beta_sds.iter().any(|s| !(s > &0.0)) {
            return Err(Error::domain("coefficient prior sds must be positive"));
        }
        for (name, v) in [
            ("lambda_shape", self.lambda_shape),
            ("lambda_rate", self.lambda_rate),
            ("gamma_shape", self.gamma_shape),
            ("gamma_rate", self.gamma_rate),
        ] {
            if !(v > 0.0) {
                return Err(Error::domain(format!("mixture prior {name} must be positive")));
            }
        }
        Ok(())
    }
}

/// log[pi + (1 - pi) S_W(t)]; `pi` is the cure fraction, the limit of the
/// population survival.
pub fn mixture_log_survival(t: f64, pi: f64, weibull: &WeibullParams) -> Result<f64> {
    if !(pi > 0.0 && pi < 1.0) {
        return Err(Error::domain(format!("cure probability must lie in (0,1), got {pi}")));
    }
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::domain(format!("time must be nonnegative, got {t}")));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    let log_sw = weibull_log_survival_raw(t, weibull.shape(), weibull.rate());
    Ok(logaddexp(pi.ln(), (1.0 - pi).ln() + log_sw))
}

/// log[(1 - pi) f_W(t)]: density of the improper mixture.
pub fn mixture_log_pdf(t: f64, pi: f64, weibull: &WeibullParams) -> Result<f64> {
    if !(pi >= 0.0 && pi < 1.0) {
        return Err(Error::domain(format!("cure probability must lie in [0,1), got {pi}")));
    }
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::domain(format!("time must be positive, got {t}")));
    }
    Ok((1.0 - pi).ln() + weibull_log_pdf_raw(t, weibull.shape(), weibull.rate()))
}

struct MixTerm {
    loglik: f64,
    d_eta: f64,
    d_lambda: f64,
    d_gamma: f64,
}

#[inline]
fn mixture_term(t: f64, event: bool, eta: f64, lambda: f64, gamma: f64, with_grad: bool) -> MixTerm {
    let clamped = eta.abs() >= LINK_CLAMP;
    let eta = eta.clamp(-LINK_CLAMP, LINK_CLAMP);
    let ln_pi = -log1pexp(-eta);
    let ln_1mpi = -log1pexp(eta);
    let pi = ln_pi.exp();

    let lgt = (gamma * t).ln();
    let q = lambda * lgt;
    let pow = q.exp(); // (gamma t)^lambda, may overflow to +inf harmlessly
    let log_sw = -pow;

    if event {
        let loglik = ln_1mpi + lambda.ln() + lambda * gamma.ln() + (lambda - 1.0) * t.ln() - pow;
        if !with_grad {
            return MixTerm {
                loglik,
                d_eta: 0.0,
                d_lambda: 0.0,
                d_gamma: 0.0,
            };
        }
        MixTerm {
            loglik,
            d_eta: if clamped { 0.0 } else { -pi },
            d_lambda: 1.0 / lambda + lgt * (1.0 - pow),
            d_gamma: (lambda / gamma) * (1.0 - pow),
        }
    } else {
        let log_spop = logaddexp(ln_pi, ln_1mpi + log_sw);
        if !with_grad {
            return MixTerm {
                loglik: log_spop,
                d_eta: 0.0,
                d_lambda: 0.0,
                d_gamma: 0.0,
            };
        }
        // c1 = (1-pi) S_W (gamma t)^lambda / S_pop, assembled in log space so
        // the overflowing power and the vanishing survival cancel.
        let c1 = (ln_1mpi + log_sw - log_spop + q).exp();
        let one_minus_sw = -log_sw.exp_m1();
        let d_eta = if clamped {
            0.0
        } else {
            pi * ln_1mpi.exp() * one_minus_sw / log_spop.exp()
        };
        MixTerm {
            loglik: log_spop,
            d_eta,
            d_lambda: -c1 * lgt,
            d_gamma: -c1 * lambda / gamma,
        }
    }
}

/// Weibull mixture cure model behind the shared sampler interface.
/// Unconstrained layout: `[beta..., ln lambda, ln gamma]`.
#[derive(Debug, Clone)]
pub struct MixtureModel {
    pub data: SurvivalDataset,
    pub priors: MixturePriors,
}

impl MixtureModel {
    pub fn new(data: SurvivalDataset, priors: MixturePriors) -> Result<Self> {
        priors.validate(data.n_covariates())?;
        Ok(Self { data, priors })
    }

    fn logpost_grad(&self, u: &[f64], with_grad: bool) -> (f64, Vec<f64>) {
        let k = u.len() - 2;
        let (ua, ub) = (u[k], u[k + 1]);
        let lambda = ua.exp();
        let gamma = ub.exp();
        let beta = &u[..k];

        let mut loglik = 0.0;
        let mut g_beta = vec![0.0; k];
        let mut g_lambda = 0.0;
        let mut g_gamma = 0.0;
        for i in 0..self.data.n() {
            let row = self.data.covariate_row(i);
            let eta: f64 = beta.iter().zip(row).map(|(b, x)| b * x).sum();
            let term = mixture_term(
                self.data.time(i),
                self.data.event(i) == 1,
                eta,
                lambda,
                gamma,
                with_grad,
            );
            loglik += term.loglik;
            g_lambda += term.d_lambda;
            g_gamma += term.d_gamma;
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
        logp += gamma_log_pdf(lambda, pr.lambda_shape, pr.lambda_rate);
        logp += gamma_log_pdf(gamma, pr.gamma_shape, pr.gamma_rate);
        logp += ua + ub;
        if with_grad {
            grad[k] = lambda * g_lambda + (pr.lambda_shape - 1.0) - pr.lambda_rate * lambda + 1.0;
            grad[k + 1] = gamma * g_gamma + (pr.gamma_shape - 1.0) - pr.gamma_rate * gamma + 1.0;
        }
        (logp, grad)
    }
}

impl BayesModel for MixtureModel {
    fn family(&self) -> Family {
        Family::WeibullMixture
    }

    fn dim(&self) -> usize {
        self.data.n_covariates() + 2
    }

    fn n_obs(&self) -> usize {
        self.data.n()
    }

    fn parameter_names(&self) -> Vec<String> {
        let mut names: Vec<String> =
            (0..self.data.n_covariates()).map(|i| format!("beta{i}")).collect();
        names.push("lambda".into());
        names.push("gamma".into());
        names
    }

    fn log_posterior(&self, u: &[f64]) -> f64 {
        self.logpost_grad(u, false).0
    }

    fn log_posterior_and_grad(&self, u: &[f64]) -> (f64, Vec<f64>) {
        #[cfg(feature = "fd-gradient")]
        {
            (
                self.logpost_grad(u, false).0,
                crate::model::fd_gradient(|v| self.logpost_grad(v, false).0, u),
            )
        }
        #[cfg(not(feature = "fd-gradient"))]
        {
            self.logpost_grad(u, true)
        }
    }

    fn constrain(&self, u: &[f64]) -> Vec<f64> {
        let k = u.len() - 2;
        let mut out = u[..k].to_vec();
        out.push(u[k].exp());
        out.push(u[k + 1].exp());
        out
    }

    fn pointwise_loglik(&self, constrained: &[f64]) -> Vec<f64> {
        let k = constrained.len() - 2;
        let (lambda, gamma) = (constrained[k], constrained[k + 1]);
        (0..self.data.n())
            .map(|i| {
                let eta: f64 = constrained[..k]
                    .iter()
                    .zip(self.data.covariate_row(i))
                    .map(|(b, x)| b * x)
                    .sum();
                mixture_term(self.data.time(i), self.data.event(i) == 1, eta, lambda, gamma, false)
                    .loglik
            })
            .collect()
    }

    fn log_survival_obs(&self, constrained: &[f64], i: usize) -> f64 {
        let k = constrained.len() - 2;
        let (lambda, gamma) = (constrained[k], constrained[k + 1]);
        let eta: f64 = constrained[..k]
            .iter()
            .zip(self.data.covariate_row(i))
            .map(|(b, x)| b * x)
            .sum();
        mixture_term(self.data.time(i), false, eta, lambda, gamma, false).loglik
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fd_gradient;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

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

    #[test]
    fn population_survival_limits() {
        let w = WeibullParams::new(2.0, 0.5).unwrap();
        assert_eq!(mixture_log_survival(0.0, 0.3, &w).unwrap(), 0.0);
        // t -> infinity leaves the cure mass.
        assert_relative_eq!(
            mixture_log_survival(1e6, 0.3, &w).unwrap(),
            0.3f64.ln(),
            max_relative = 1e-12
        );
        // S_W = e^{-1} at t = 1/rate.
        assert_relative_eq!(
            mixture_log_survival(2.0, 0.3, &w).unwrap(),
            -0.5842647781563713,
            max_relative = 1e-13
        );
    }

    #[test]
    fn density_edges() {
        let w = WeibullParams::new(2.0, 1.0).unwrap();
        // pi = 0 gives the proper Weibull density.
        assert_relative_eq!(
            mixture_log_pdf(1.0, 0.0, &w).unwrap(),
            2.0f64.ln() - 1.0,
            max_relative = 1e-13
        );
        // pi -> 1 kills the density.
        assert!(mixture_log_pdf(1.0, 1.0 - 1e-16, &w).unwrap() < -30.0);
        assert!(mixture_log_pdf(1.0, 1.0, &w).is_err());
    }

    #[test]
    fn prior_only_posterior_with_empty_data() {
        let data = SurvivalDataset::new(vec![], vec![], vec![]).unwrap();
        let priors = MixturePriors::vague(1);
        let model = MixtureModel { data, priors: priors.clone() };
        let u = vec![0.4, -0.1, 0.3];
        let expect = normal_log_pdf(0.4, 0.0, 10.0)
            + gamma_log_pdf((-0.1f64).exp(), 0.01, 0.01)
            + gamma_log_pdf(0.3f64.exp(), 0.01, 0.01)
            + (-0.1 + 0.3);
        assert_relative_eq!(model.log_posterior(&u), expect, max_relative = 1e-12);
    }

    #[test]
    fn loglik_matches_term_oracle() {
        let model = MixtureModel::new(toy_dataset(), MixturePriors::vague(3)).unwrap();
        let constrained = vec![-0.5, 0.4, -0.2, 1.4, 0.8];
        let total: f64 = model.pointwise_loglik(&constrained).iter().sum();
        assert_relative_eq!(total, -3.862049414989615, max_relative = 1e-13);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let model = MixtureModel::new(toy_dataset(), MixturePriors::vague(3)).unwrap();
        let u = vec![-0.5, 0.4, -0.2, 0.336, -0.223];
        let (_, g) = model.logpost_grad(&u, true);
        let fd = fd_gradient(|v| model.logpost_grad(v, false).0, &u);
        for (a, b) in g.iter().zip(&fd) {
            assert_relative_eq!(a, b, max_relative = 1e-5, epsilon = 1e-8);
        }
    }

    #[test]
    fn survival_bounded_below_by_cure_mass() {
        let w = WeibullParams::new(1.7, 0.9).unwrap();
        for &t in &[0.0, 0.5, 2.0, 10.0, 100.0] {
            let v = mixture_log_survival(t, 0.25, &w).unwrap();
            assert!(v >= 0.25f64.ln() - 1e-12);
        }
    }

    #[test]
    fn censored_time_zero_contributes_nothing() {
        let term = mixture_term(1e-14, false, 0.3, 1.4, 0.8, false);
        assert_abs_diff_eq!(term.loglik, 0.0, epsilon = 1e-10);
    }
}
