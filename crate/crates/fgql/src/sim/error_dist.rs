//! Error distributions shifted so the τ-quantile sits exactly at zero.
//!
//! Sampling goes through the inverse CDF of the raw family, so one uniform
//! stream drives every family identically and the shift is exact by
//! construction. The density at zero (after shifting) is the raw density at
//! the raw τ-quantile, available in closed form for each family.

use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Continuous, ContinuousCDF, Laplace, Normal, StudentsT};

use crate::error::{Error, Result};

/// Raw (unshifted) error family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ErrorFamily {
    Normal { sd: f64 },
    StudentT { df: f64 },
    Laplace { scale: f64 },
    /// Point mass at zero: the noiseless limit, useful as a smoke oracle.
    Degenerate,
}

impl ErrorFamily {
    fn validate(&self) -> Result<()> {
        let ok = match self {
            ErrorFamily::Normal { sd } => *sd > 0.0 && sd.is_finite(),
            ErrorFamily::StudentT { df } => *df > 0.0 && df.is_finite(),
            ErrorFamily::Laplace { scale } => *scale > 0.0 && scale.is_finite(),
            ErrorFamily::Degenerate => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "invalid error family parameters: {self:?}"
            )))
        }
    }
}

enum RawDistribution {
    Normal(Normal),
    StudentT(StudentsT),
    Laplace(Laplace),
    Degenerate,
}

/// An error distribution with its τ-quantile shifted to exactly zero.
pub struct ErrorDistribution {
    family: ErrorFamily,
    raw: RawDistribution,
    tau: f64,
    /// Raw τ-quantile subtracted from every draw.
    tau_shift: f64,
    /// Density at zero after shifting; `+∞` for the degenerate family.
    density_at_zero: f64,
}

impl ErrorDistribution {
    pub fn new(family: ErrorFamily, tau: f64) -> Result<Self> {
        crate::design::check_tau(tau)?;
        family.validate()?;
        let raw = match family {
            ErrorFamily::Normal { sd } => RawDistribution::Normal(
                Normal::new(0.0, sd)
                    .map_err(|e| Error::InvalidParameter(e.to_string()))?,
            ),
            ErrorFamily::StudentT { df } => RawDistribution::StudentT(
                StudentsT::new(0.0, 1.0, df)
                    .map_err(|e| Error::InvalidParameter(e.to_string()))?,
            ),
            ErrorFamily::Laplace { scale } => RawDistribution::Laplace(
                Laplace::new(0.0, scale)
                    .map_err(|e| Error::InvalidParameter(e.to_string()))?,
            ),
            ErrorFamily::Degenerate => RawDistribution::Degenerate,
        };
        let tau_shift = match &raw {
            RawDistribution::Normal(d) => d.inverse_cdf(tau),
            RawDistribution::StudentT(d) => d.inverse_cdf(tau),
            RawDistribution::Laplace(d) => d.inverse_cdf(tau),
            RawDistribution::Degenerate => 0.0,
        };
        let density_at_zero = match &raw {
            RawDistribution::Normal(d) => d.pdf(tau_shift),
            RawDistribution::StudentT(d) => d.pdf(tau_shift),
            RawDistribution::Laplace(d) => d.pdf(tau_shift),
            RawDistribution::Degenerate => f64::INFINITY,
        };
        Ok(Self {
            family,
            raw,
            tau,
            tau_shift,
            density_at_zero,
        })
    }

    pub fn family(&self) -> ErrorFamily {
        self.family
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn tau_shift(&self) -> f64 {
        self.tau_shift
    }

    /// `f(0)` of the shifted distribution.
    pub fn density_at_zero(&self) -> f64 {
        self.density_at_zero
    }

    /// CDF of the shifted distribution; equals τ at zero.
    pub fn cdf(&self, x: f64) -> f64 {
        let raw_x = x + self.tau_shift;
        match &self.raw {
            RawDistribution::Normal(d) => d.cdf(raw_x),
            RawDistribution::StudentT(d) => d.cdf(raw_x),
            RawDistribution::Laplace(d) => d.cdf(raw_x),
            RawDistribution::Degenerate => {
                if raw_x >= 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// One draw, by inverse-CDF transform of a uniform variate.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u = loop {
            let u: f64 = rng.gen();
            if u > 0.0 {
                break u;
            }
        };
        let raw = match &self.raw {
            RawDistribution::Normal(d) => d.inverse_cdf(u),
            RawDistribution::StudentT(d) => d.inverse_cdf(u),
            RawDistribution::Laplace(d) => d.inverse_cdf(u),
            RawDistribution::Degenerate => 0.0,
        };
        raw - self.tau_shift
    }
}
