use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Numerical thresholds shared by every rank decision and acceptance check.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToleranceConfig {
    /// Relative singular-value cutoff used by rank decisions.
    pub rank_tol: f64,
    /// Acceptance threshold for operator-norm residuals and principal angles.
    pub residual_tol: f64,
    /// Consecutive iterations with unchanged dimension required to declare convergence.
    pub stabilization_window: usize,
    /// Budget on operator powers applied by any iteration.
    pub max_power: usize,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            rank_tol: 1e-10,
            residual_tol: 1e-8,
            stabilization_window: 2,
            max_power: 64,
        }
    }
}

impl ToleranceConfig {
    /// Defaults with the power budget sized for shifts of depth at most `depth`.
    pub fn for_depth(depth: usize) -> Self {
        Self {
            max_power: 4 * depth.max(1),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rank_tol > 0.0 && self.rank_tol.is_finite()) {
            return Err(Error::Input(format!(
                "rank_tol must be positive, got {}",
                self.rank_tol
            )));
        }
        if !(self.residual_tol > 0.0 && self.residual_tol.is_finite()) {
            return Err(Error::Input(format!(
                "residual_tol must be positive, got {}",
                self.residual_tol
            )));
        }
        if self.stabilization_window == 0 {
            return Err(Error::Input("stabilization_window must be at least 1".into()));
        }
        if self.max_power == 0 {
            return Err(Error::Input("max_power must be at least 1".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let cfg = ToleranceConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.rank_tol, 1e-10);
        assert_eq!(cfg.residual_tol, 1e-8);
        assert_eq!(cfg.stabilization_window, 2);
        assert_eq!(ToleranceConfig::for_depth(5).max_power, 20);
    }

    #[test]
    fn rejects_degenerate_values() {
        let bad = [
            ToleranceConfig {
                rank_tol: 0.0,
                ..Default::default()
            },
            ToleranceConfig {
                residual_tol: -1.0,
                ..Default::default()
            },
            ToleranceConfig {
                stabilization_window: 0,
                ..Default::default()
            },
            ToleranceConfig {
                max_power: 0,
                ..Default::default()
            },
            ToleranceConfig {
                rank_tol: f64::NAN,
                ..Default::default()
            },
        ];
        for cfg in bad {
            assert!(matches!(cfg.validate(), Err(Error::Input(_))), "{cfg:?}");
        }
    }
}
