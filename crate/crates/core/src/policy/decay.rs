use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Closed-form curves approximating a difficulty-driven retention schedule.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecayKind {
    /// `1 / x^α`
    PowerLaw,
    /// `e^(-αx)`
    Exponential,
    /// `1 / ln(x + α)`
    Logarithmic,
    /// `1 / (x + α)`
    InverseLinear,
    /// `1 - 1 / (1 + e^(-αx))`
    SigmoidComplement,
}

impl DecayKind {
    pub const ALL: [DecayKind; 5] = [
        DecayKind::PowerLaw,
        DecayKind::Exponential,
        DecayKind::Logarithmic,
        DecayKind::InverseLinear,
        DecayKind::SigmoidComplement,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DecayKind::PowerLaw => "power-law",
            DecayKind::Exponential => "exponential",
            DecayKind::Logarithmic => "logarithmic",
            DecayKind::InverseLinear => "inverse-linear",
            DecayKind::SigmoidComplement => "sigmoid-complement",
        }
    }

    /// `f(x; α) / f(1; α)`, rearranged so large `α·x` neither overflows nor
    /// divides infinities.
    pub fn normalized(self, x: f64, alpha: f64) -> Result<f64> {
        Ok(match self {
            DecayKind::PowerLaw => x.powf(-alpha),
            DecayKind::Exponential => (-alpha * (x - 1.0)).exp(),
            DecayKind::Logarithmic => {
                if x + alpha <= 1.0 {
                    return Err(Error::Domain(format!(
                        "logarithmic decay needs x + alpha > 1 (x={x}, alpha={alpha})"
                    )));
                }
                (1.0 + alpha).ln() / (x + alpha).ln()
            }
            DecayKind::InverseLinear => (1.0 + alpha) / (x + alpha),
            DecayKind::SigmoidComplement => {
                // (1 + e^α) / (1 + e^(αx)) = e^(-α(x-1)) · (1 + e^-α) / (1 + e^(-αx))
                (-alpha * (x - 1.0)).exp() * (1.0 + (-alpha).exp()) / (1.0 + (-alpha * x).exp())
            }
        })
    }
}

impl fmt::Display for DecayKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DecayKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        DecayKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown decay function '{s}' (expected one of: {})",
                    DecayKind::ALL.map(DecayKind::as_str).join(", ")
                ))
            })
    }
}

/// Retained samples at epoch `x` of `epochs`: `N` at the final epoch,
/// otherwise `N·f(x)/f(1)` rounded half-up.
pub fn decay_count(
    kind: DecayKind,
    alpha: f64,
    x: usize,
    n: usize,
    epochs: usize,
) -> Result<usize> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::Domain(format!(
            "alpha must be positive, got {alpha}"
        )));
    }
    if x == 0 || x > epochs {
        return Err(Error::Domain(format!("epoch {x} outside 1..={epochs}")));
    }
    let ratio = kind.normalized(x as f64, alpha)?;
    if x == epochs {
        return Ok(n);
    }
    let count = (n as f64 * ratio + 0.5).floor();
    Ok((count as usize).min(n))
}
