//! System-level parameters shared by the transmitter and all receivers.

use serde::{Deserialize, Serialize};

use crate::constellation::SUPPORTED_ORDERS;
use crate::error::{Error, Result};

/// Largest number of co-scheduled users.
pub const MAX_USERS: usize = 4;

/// Tolerance on `sum(alpha) == 1`.
pub const ALPHA_SUM_TOLERANCE: f64 = 1e-9;

/// How the transmitter picks phase offsets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum OffsetMode {
    /// Offsets follow the grid search for the current parameters.
    #[default]
    Dynamic,
    /// Offsets are fixed presets shared with the receivers once.
    Static,
}

/// Number of users, their modulation orders, power split and total power.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    mod_orders: Vec<u32>,
    power_coeffs: Vec<f64>,
    total_power: f64,
    mode: OffsetMode,
    preset_offsets: Option<Vec<f64>>,
}

impl SystemConfig {
    /// Dynamic-mode configuration. Validates every invariant.
    pub fn new(mod_orders: Vec<u32>, power_coeffs: Vec<f64>, total_power: f64) -> Result<Self> {
        let cfg = SystemConfig {
            mod_orders,
            power_coeffs,
            total_power,
            mode: OffsetMode::Dynamic,
            preset_offsets: None,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Switch to static mode with preset offsets in radians.
    pub fn with_static_offsets(mut self, offsets: Vec<f64>) -> Result<Self> {
        self.mode = OffsetMode::Static;
        self.preset_offsets = Some(offsets);
        self.validate()?;
        Ok(self)
    }

    /// Same users and modulation, new power split.
    pub fn with_power_coeffs(&self, power_coeffs: Vec<f64>) -> Result<Self> {
        let mut cfg = self.clone();
        cfg.power_coeffs = power_coeffs;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Same configuration at a different total power.
    pub fn with_total_power(&self, total_power: f64) -> Result<Self> {
        let mut cfg = self.clone();
        cfg.total_power = total_power;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.mod_orders.len();
        if k == 0 || k > MAX_USERS {
            return Err(Error::invalid(
                "mod_orders",
                format!("number of users must be in 1..={MAX_USERS}, got {k}"),
            ));
        }
        if let Some(&m) = self.mod_orders.iter().find(|m| !SUPPORTED_ORDERS.contains(m)) {
            return Err(Error::invalid(
                "mod_orders",
                format!("unsupported QAM order {m}; expected one of {SUPPORTED_ORDERS:?}"),
            ));
        }
        if self.power_coeffs.len() != k {
            return Err(Error::invalid(
                "power_coeffs",
                format!("expected {k} coefficients, got {}", self.power_coeffs.len()),
            ));
        }
        if let Some(a) = self
            .power_coeffs
            .iter()
            .find(|a| !a.is_finite() || **a < 0.0 || **a > 1.0)
        {
            return Err(Error::invalid(
                "power_coeffs",
                format!("coefficient {a} outside [0, 1]"),
            ));
        }
        let sum: f64 = self.power_coeffs.iter().sum();
        if (sum - 1.0).abs() > ALPHA_SUM_TOLERANCE {
            return Err(Error::invalid(
                "power_coeffs",
                format!("coefficients must sum to 1, got {sum}"),
            ));
        }
        if !self.total_power.is_finite() || self.total_power <= 0.0 {
            return Err(Error::invalid(
                "total_power",
                format!("must be positive and finite, got {}", self.total_power),
            ));
        }
        match (self.mode, &self.preset_offsets) {
            (OffsetMode::Static, None) => {
                return Err(Error::invalid(
                    "preset_offsets",
                    "static mode requires preset offsets",
                ))
            }
            (OffsetMode::Static, Some(p)) => {
                if p.len() != k {
                    return Err(Error::invalid(
                        "preset_offsets",
                        format!("expected {k} offsets, got {}", p.len()),
                    ));
                }
                if p.iter().any(|x| !x.is_finite()) {
                    return Err(Error::invalid("preset_offsets", "offsets must be finite"));
                }
            }
            (OffsetMode::Dynamic, Some(_)) => {
                return Err(Error::invalid(
                    "preset_offsets",
                    "preset offsets are only allowed in static mode",
                ))
            }
            (OffsetMode::Dynamic, None) => {}
        }
        Ok(())
    }

    pub fn num_users(&self) -> usize {
        self.mod_orders.len()
    }

    pub fn mod_orders(&self) -> &[u32] {
        &self.mod_orders
    }

    pub fn power_coeffs(&self) -> &[f64] {
        &self.power_coeffs
    }

    pub fn total_power(&self) -> f64 {
        self.total_power
    }

    pub fn mode(&self) -> OffsetMode {
        self.mode
    }

    pub fn preset_offsets(&self) -> Option<&[f64]> {
        self.preset_offsets.as_deref()
    }

    /// Amplitude `sqrt(alpha_k * P_T)` applied to user `k`.
    pub fn amplitude(&self, user: usize) -> f64 {
        (self.power_coeffs[user] * self.total_power).sqrt()
    }

    /// Size of the composite alphabet, the product of all orders.
    pub fn composite_size(&self) -> usize {
        self.mod_orders.iter().map(|&m| m as usize).product()
    }

    /// Sum of `log2(M_k)`, the error-free bits per channel use.
    pub fn bits_per_use(&self) -> f64 {
        self.mod_orders.iter().map(|&m| (m as f64).log2()).sum()
    }
}
