//! Inverse link functions and one-parameter exponential families.
//!
//! Everything is evaluated in log space where possible so that the
//! likelihood, its score, and the weight function φ stay finite for linear
//! predictors far into the tails (|u| of order 50 occurs in practice).

use serde::{Deserialize, Serialize};
use std::f64::consts::LN_2;

/// `ln(1 + e^x)` without overflow.
pub fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Logistic function `1 / (1 + e^{-x})`.
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 - e^x)` for `x <= 0`.
fn log1m_exp(x: f64) -> f64 {
    if x > -LN_2 {
        (-x.exp_m1()).ln()
    } else {
        (-x.exp()).ln_1p()
    }
}

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Standard normal density.
pub fn normal_pdf(u: f64) -> f64 {
    (-0.5 * u * u - LN_SQRT_2PI).exp()
}

/// Standard normal distribution function, erfc based.
pub fn normal_cdf(u: f64) -> f64 {
    0.5 * libm::erfc(-u / std::f64::consts::SQRT_2)
}

/// `ln Φ(u)`, with an asymptotic series once erfc underflows.
pub fn normal_log_cdf(u: f64) -> f64 {
    if u > -30.0 {
        normal_cdf(u).ln()
    } else {
        let z2 = 1.0 / (u * u);
        let series = 1.0 - z2 * (1.0 - 3.0 * z2 * (1.0 - 5.0 * z2 * (1.0 - 7.0 * z2)));
        -0.5 * u * u - (-u).ln() - LN_SQRT_2PI + series.ln()
    }
}

/// Inverse link `G` of a generalized linear model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Link {
    Logit,
    Cloglog,
    Probit,
    SkewedLogit {
        m: f64,
    },
    /// `G = exp`, the canonical Poisson link.
    Log,
}

impl Link {
    pub fn g(&self, u: f64) -> f64 {
        match *self {
            Link::Logit => sigmoid(u),
            Link::Cloglog => -(-u.exp()).exp_m1(),
            Link::Probit => normal_cdf(u),
            Link::SkewedLogit { m } => (-m * softplus(-u)).exp(),
            Link::Log => u.exp(),
        }
    }

    pub fn log_g(&self, u: f64) -> f64 {
        match *self {
            Link::Logit => -softplus(-u),
            Link::Cloglog => log1m_exp(-u.exp()),
            Link::Probit => normal_log_cdf(u),
            Link::SkewedLogit { m } => -m * softplus(-u),
            Link::Log => u,
        }
    }

    /// `ln(1 - G(u))`; only meaningful for distribution-function links.
    pub fn log_1m_g(&self, u: f64) -> f64 {
        match *self {
            Link::Logit => -softplus(u),
            Link::Cloglog => -u.exp(),
            Link::Probit => normal_log_cdf(-u),
            Link::SkewedLogit { .. } => log1m_exp(self.log_g(u)),
            Link::Log => f64::NAN,
        }
    }

    pub fn log_g_prime(&self, u: f64) -> f64 {
        match *self {
            Link::Logit => -softplus(-u) - softplus(u),
            Link::Cloglog => u - u.exp(),
            Link::Probit => -0.5 * u * u - LN_SQRT_2PI,
            Link::SkewedLogit { m } => m.ln() - m * softplus(-u) - softplus(u),
            Link::Log => u,
        }
    }

    pub fn g_prime(&self, u: f64) -> f64 {
        self.log_g_prime(u).exp()
    }

    /// `G''(u) / G'(u)`, the derivative of `ln G'`.
    pub fn d_log_g_prime(&self, u: f64) -> f64 {
        match *self {
            Link::Logit => 1.0 - 2.0 * sigmoid(u),
            Link::Cloglog => 1.0 - u.exp(),
            Link::Probit => -u,
            Link::SkewedLogit { m } => m * sigmoid(-u) - sigmoid(u),
            Link::Log => 1.0,
        }
    }

    pub fn g_second(&self, u: f64) -> f64 {
        self.g_prime(u) * self.d_log_g_prime(u)
    }

    /// `G'(u) / G(u)`.
    fn g_prime_over_g(&self, u: f64) -> f64 {
        match *self {
            Link::Logit => sigmoid(-u),
            Link::SkewedLogit { m } => m * sigmoid(-u),
            Link::Log => 1.0,
            _ => (self.log_g_prime(u) - self.log_g(u)).exp(),
        }
    }

    /// `G'(u) / (1 - G(u))`.
    fn g_prime_over_1m_g(&self, u: f64) -> f64 {
        match *self {
            Link::Logit => sigmoid(u),
            Link::Cloglog => u.exp(),
            _ => (self.log_g_prime(u) - self.log_1m_g(u)).exp(),
        }
    }
}

/// Response distribution, written as `K(y) exp(τ y - b(τ))`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResponseKind {
    Bernoulli,
    Poisson,
}

impl ResponseKind {
    pub fn b(&self, tau: f64) -> f64 {
        match self {
            ResponseKind::Bernoulli => softplus(tau),
            ResponseKind::Poisson => tau.exp(),
        }
    }

    pub fn b_prime(&self, tau: f64) -> f64 {
        match self {
            ResponseKind::Bernoulli => sigmoid(tau),
            ResponseKind::Poisson => tau.exp(),
        }
    }

    pub fn b_prime_inv(&self, mean: f64) -> f64 {
        match self {
            ResponseKind::Bernoulli => (mean / (1.0 - mean)).ln(),
            ResponseKind::Poisson => mean.ln(),
        }
    }

    pub fn b_second(&self, tau: f64) -> f64 {
        match self {
            ResponseKind::Bernoulli => {
                let s = sigmoid(tau);
                s * (1.0 - s)
            }
            ResponseKind::Poisson => tau.exp(),
        }
    }
}

/// Exponential-family block of a GLM-type model: inverse link plus response
/// family. All functions take the linear predictor `u = f(x)ᵀθ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GlmBlock {
    pub link: Link,
    pub response: ResponseKind,
}

impl GlmBlock {
    pub fn bernoulli(link: Link) -> Self {
        GlmBlock {
            link,
            response: ResponseKind::Bernoulli,
        }
    }

    pub fn poisson() -> Self {
        GlmBlock {
            link: Link::Log,
            response: ResponseKind::Poisson,
        }
    }

    /// Mean response `G(u)`.
    pub fn mean(&self, u: f64) -> f64 {
        self.link.g(u)
    }

    /// Canonical parameter `τ(u) = (b')⁻¹(G(u))`.
    pub fn tau(&self, u: f64) -> f64 {
        match self.response {
            ResponseKind::Bernoulli => self.link.log_g(u) - self.link.log_1m_g(u),
            ResponseKind::Poisson => self.link.log_g(u),
        }
    }

    /// `ln b''((b')⁻¹(G(u)))`, the log variance at mean `G(u)`.
    pub fn log_variance(&self, u: f64) -> f64 {
        match self.response {
            ResponseKind::Bernoulli => self.link.log_g(u) + self.link.log_1m_g(u),
            ResponseKind::Poisson => self.link.log_g(u),
        }
    }

    /// `ln φ(u)` where `φ(u) = G'(u) / sqrt(b''((b')⁻¹(G(u))))`.
    pub fn ln_phi(&self, u: f64) -> f64 {
        self.link.log_g_prime(u) - 0.5 * self.log_variance(u)
    }

    pub fn phi(&self, u: f64) -> f64 {
        self.ln_phi(u).exp()
    }

    /// Derivative of `ln φ`.
    pub fn d_ln_phi(&self, u: f64) -> f64 {
        let dlogvar = match self.response {
            ResponseKind::Bernoulli => self.link.g_prime_over_g(u) - self.link.g_prime_over_1m_g(u),
            ResponseKind::Poisson => self.link.g_prime_over_g(u),
        };
        self.link.d_log_g_prime(u) - 0.5 * dlogvar
    }

    /// Fisher weight `φ(u)²`.
    pub fn weight(&self, u: f64) -> f64 {
        (2.0 * self.ln_phi(u)).exp()
    }

    /// `dτ/du = G'(u) / b''(τ(u))`.
    pub fn dtau_du(&self, u: f64) -> f64 {
        match (self.link, self.response) {
            (Link::Logit, ResponseKind::Bernoulli) | (Link::Log, ResponseKind::Poisson) => 1.0,
            _ => (self.link.log_g_prime(u) - self.log_variance(u)).exp(),
        }
    }

    /// One observation's log-likelihood `τ y - b(τ)`, the `K(y)` term dropped.
    pub fn loglik(&self, u: f64, y: f64) -> f64 {
        match self.response {
            ResponseKind::Bernoulli => {
                // b(τ) = -ln(1 - G)
                if y == 1.0 {
                    self.link.log_g(u)
                } else if y == 0.0 {
                    self.link.log_1m_g(u)
                } else {
                    y * self.tau(u) + self.link.log_1m_g(u)
                }
            }
            ResponseKind::Poisson => {
                let tau = self.tau(u);
                let b = self.link.g(u);
                if y == 0.0 {
                    -b
                } else {
                    y * tau - b
                }
            }
        }
    }

    /// Derivative of [`GlmBlock::loglik`] with respect to `u`.
    pub fn score(&self, u: f64, y: f64) -> f64 {
        (y - self.mean(u)) * self.dtau_du(u)
    }
}
