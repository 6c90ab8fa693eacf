use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Boundary densities, kinetic rates and the lattice scale ε = 1/(N+1).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub alpha: f64,
    pub beta: f64,
    pub omega_a: f64,
    pub omega_d: f64,
    pub epsilon: f64,
}

impl ModelParams {
    pub fn new(alpha: f64, beta: f64, omega_a: f64, omega_d: f64, epsilon: f64) -> Result<Self> {
        let p = ModelParams { alpha, beta, omega_a, omega_d, epsilon };
        p.validate()?;
        Ok(p)
    }

    /// Ω_A = Ω_D = `omega`.
    pub fn special(alpha: f64, beta: f64, omega: f64, epsilon: f64) -> Result<Self> {
        Self::new(alpha, beta, omega, omega, epsilon)
    }

    /// Ω_A = K·Ω_D.
    pub fn general(alpha: f64, beta: f64, omega_d: f64, k: f64, epsilon: f64) -> Result<Self> {
        Self::new(alpha, beta, k * omega_d, omega_d, epsilon)
    }

    /// Rates may both vanish (pure TASEP); a vanishing Ω_D with Ω_A > 0 is the K = ∞ limit.
    pub fn validate(&self) -> Result<()> {
        let open01 = |v: f64| v > 0.0 && v < 1.0;
        if !open01(self.alpha) {
            return Err(Error::Parameter(format!("alpha = {} not in (0,1)", self.alpha)));
        }
        if !open01(self.beta) {
            return Err(Error::Parameter(format!("beta = {} not in (0,1)", self.beta)));
        }
        if !(self.omega_a >= 0.0 && self.omega_a.is_finite()) {
            return Err(Error::Parameter(format!("omega_a = {} must be >= 0", self.omega_a)));
        }
        if !(self.omega_d >= 0.0 && self.omega_d.is_finite()) {
            return Err(Error::Parameter(format!("omega_d = {} must be >= 0", self.omega_d)));
        }
        if !open01(self.epsilon) {
            return Err(Error::Parameter(format!("epsilon = {} not in (0,1)", self.epsilon)));
        }
        Ok(())
    }

    pub fn beta_bar(&self) -> f64 {
        1.0 - self.beta
    }

    /// K = Ω_A/Ω_D; 1 when both rates vanish.
    pub fn k(&self) -> f64 {
        if self.omega_a == 0.0 && self.omega_d == 0.0 {
            1.0
        } else {
            self.omega_a / self.omega_d
        }
    }

    /// Langmuir isotherm r̄_K = K/(K+1).
    pub fn r_bar(&self) -> f64 {
        let s = self.omega_a + self.omega_d;
        if s == 0.0 {
            0.5
        } else {
            self.omega_a / s
        }
    }

    pub fn is_special(&self) -> bool {
        (self.omega_a - self.omega_d).abs() <= 1e-12 * (1.0 + self.omega_a.max(self.omega_d))
    }

    /// Number of bulk sites N = round(1/ε) − 1.
    pub fn n_sites(&self) -> usize {
        ((1.0 / self.epsilon).round() as i64 - 1).max(0) as usize
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Self {
        ModelParams { epsilon, ..*self }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub delta: f64,
    pub eps_resid: f64,
    pub eps_newton: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { delta: 0.05, eps_resid: 1e-10, eps_newton: 1e-12 }
    }
}

impl Tolerance {
    pub fn validate(&self) -> Result<()> {
        if self.delta > 0.0 && self.eps_resid > 0.0 && self.eps_newton > 0.0 {
            Ok(())
        } else {
            Err(Error::Parameter("tolerances must be strictly positive".into()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_out_of_range() {
        assert!(ModelParams::new(0.0, 0.5, 0.1, 0.1, 0.01).is_err());
        assert!(ModelParams::new(0.5, 1.0, 0.1, 0.1, 0.01).is_err());
        assert!(ModelParams::new(0.5, 0.5, -0.1, 0.1, 0.01).is_err());
        assert!(ModelParams::new(0.5, 0.5, 0.1, 0.1, 1.0).is_err());
        assert!(ModelParams::new(0.5, 0.5, 0.0, 0.0, 0.5).is_ok());
    }

    #[test]
    fn derived_quantities() {
        let p = ModelParams::general(0.2, 0.3, 0.1, 2.0, 0.01).unwrap();
        assert!((p.k() - 2.0).abs() < 1e-15);
        assert!((p.r_bar() - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(p.n_sites(), 99);
        assert!(!p.is_special());
        assert!(ModelParams::special(0.2, 0.3, 0.25, 0.01).unwrap().is_special());
    }
}
