//! Additive (ERM1) and multiplicative (ERM2) upper bounds on the true risk.
//!
//! Both use the capacity term `L = ln(2m/eta) + h ln(2ne/h)`, with
//! `epsilon = m sqrt(L / n)`:
//!
//! * `erm1 = r + epsilon`
//! * `erm2 = r + (m^2 / 2n) L (1 + sqrt(1 + 4 n r / (m^2 L)))`

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How the empirical risk fed to the bounds is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum EmpiricalRisk {
    /// Training mean squared error on the full data.
    #[default]
    Training,
    /// Mean squared error over deterministic contiguous k-fold splits.
    CrossValidated { folds: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskConfig {
    pub eta: f64,
    pub m: usize,
    pub empirical: EmpiricalRisk,
}

impl Default for RiskConfig {
    fn default() -> Self {
        RiskConfig {
            eta: 0.05,
            m: 10,
            empirical: EmpiricalRisk::Training,
        }
    }
}

impl RiskConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return Err(Error::config(format!("eta must lie in (0, 1), got {}", self.eta)));
        }
        if self.m == 0 {
            return Err(Error::config("m must be at least 1"));
        }
        if let EmpiricalRisk::CrossValidated { folds } = self.empirical {
            if folds < 2 {
                return Err(Error::config("cross-validation needs at least 2 folds"));
            }
        }
        Ok(())
    }
}

/// `ln(2m/eta) + h ln(2ne/h)`.
pub fn capacity_term(m: usize, n: usize, eta: f64, h: usize) -> Result<f64> {
    if m == 0 || n == 0 || h == 0 {
        return Err(Error::Domain(format!("m, n and h must be positive (m={m}, n={n}, h={h})")));
    }
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::Domain(format!("eta must lie in (0, 1), got {eta}")));
    }
    let (nf, hf) = (n as f64, h as f64);
    let ratio = 2.0 * nf * std::f64::consts::E / hf;
    if ratio <= 1.0 {
        return Err(Error::Domain(format!("2ne/h = {ratio} must exceed 1 (n={n}, h={h})")));
    }
    Ok((2.0 * m as f64 / eta).ln() + hf * ratio.ln())
}

pub fn epsilon_bound(m: usize, n: usize, eta: f64, h: usize) -> Result<f64> {
    let l = capacity_term(m, n, eta, h)?;
    Ok(m as f64 * (l / n as f64).sqrt())
}

fn check_risk(r_emp: f64) -> Result<()> {
    if r_emp >= 0.0 && r_emp.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("empirical risk must be finite and nonnegative, got {r_emp}")))
    }
}

pub fn erm1(r_emp: f64, m: usize, n: usize, eta: f64, h: usize) -> Result<f64> {
    check_risk(r_emp)?;
    Ok(r_emp + epsilon_bound(m, n, eta, h)?)
}

pub fn erm2(r_emp: f64, m: usize, n: usize, eta: f64, h: usize) -> Result<f64> {
    check_risk(r_emp)?;
    let l = capacity_term(m, n, eta, h)?;
    let (m2, nf) = ((m * m) as f64, n as f64);
    Ok(r_emp + m2 / (2.0 * nf) * l * (1.0 + (1.0 + 4.0 * nf * r_emp / (m2 * l)).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // 40-digit references.
    const EPS: f64 = 5.063_551_774_083_145;
    const EPS_SQ: f64 = 25.639_556_568_820_57;
    const ERM2_AT_ONE: f64 = 27.603_329_054_449_84;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn golden_values() {
        assert!(rel(epsilon_bound(10, 100, 0.05, 4).unwrap(), EPS) < 1e-12);
        assert!(rel(erm1(1.0, 10, 100, 0.05, 4).unwrap(), 1.0 + EPS) < 1e-12);
        assert_eq!(erm1(0.0, 10, 100, 0.05, 4).unwrap(), epsilon_bound(10, 100, 0.05, 4).unwrap());
        assert!(rel(erm2(0.0, 10, 100, 0.05, 4).unwrap(), EPS_SQ) < 1e-12);
        assert!(rel(erm2(1.0, 10, 100, 0.05, 4).unwrap(), ERM2_AT_ONE) < 1e-12);
    }

    #[test]
    fn domain_errors() {
        assert!(epsilon_bound(10, 100, 0.0, 4).is_err());
        assert!(epsilon_bound(10, 100, 1.0, 4).is_err());
        assert!(epsilon_bound(10, 1, 0.05, 6).is_err());
        assert!(epsilon_bound(0, 100, 0.05, 4).is_err());
        assert!(erm1(-0.1, 10, 100, 0.05, 4).is_err());
        assert!(erm2(f64::NAN, 10, 100, 0.05, 4).is_err());
        assert!(RiskConfig { eta: 1.5, ..Default::default() }.validate().is_err());
        assert!(RiskConfig { m: 0, ..Default::default() }.validate().is_err());
        assert!(RiskConfig::default().validate().is_ok());
    }

    #[test]
    fn epsilon_monotone_examples() {
        let e = |n, eta| epsilon_bound(10, n, eta, 4).unwrap();
        assert!(e(200, 0.05) < e(100, 0.05));
        assert!(e(100, 0.01) > e(100, 0.05));
    }

    proptest! {
        #[test]
        fn erm2_at_zero_is_epsilon_squared(m in 1usize..30, n in 1usize..5000, eta in 0.001f64..0.999, u in 0.0f64..1.0) {
            let h = 1 + ((2 * n - 1) as f64 * u) as usize;
            let eps = epsilon_bound(m, n, eta, h).unwrap();
            prop_assert!(rel(erm2(0.0, m, n, eta, h).unwrap(), eps * eps) < 1e-9);
        }

        #[test]
        fn bounds_increase_in_h(m in 1usize..30, n in 2usize..3000, r in 0.0f64..10.0, u in 0.0f64..1.0) {
            let h = 1 + ((2 * n - 2) as f64 * u) as usize;
            prop_assume!(h + 1 < 2 * n);
            prop_assert!(erm1(r, m, n, 0.05, h + 1).unwrap() > erm1(r, m, n, 0.05, h).unwrap());
            prop_assert!(erm2(r, m, n, 0.05, h + 1).unwrap() > erm2(r, m, n, 0.05, h).unwrap());
        }

        #[test]
        fn epsilon_decreases_in_n(h in 1usize..200, extra in 0usize..3000) {
            let n = h / 2 + 1 + extra;
            prop_assert!(epsilon_bound(10, n + 1, 0.05, h).unwrap() < epsilon_bound(10, n, 0.05, h).unwrap());
        }

        #[test]
        fn erm1_has_unit_slope(r in 0.0f64..100.0, d in 0.0f64..10.0) {
            let a = erm1(r, 10, 100, 0.05, 4).unwrap();
            let b = erm1(r + d, 10, 100, 0.05, 4).unwrap();
            prop_assert!(((b - a) - d).abs() < 1e-9);
        }
    }
}
