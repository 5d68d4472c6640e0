use crate::error::{Error, Result};

use super::CascadeParams;

/// One calibration row of the temperature table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TemperatureRow {
    pub temperature_k: f64,
    pub x_lifetime_ps: f64,
    pub background_fraction: f64,
}

/// Temperature-dependent source parameters, linearly interpolated between
/// calibration rows. No extrapolation outside the table.
#[derive(Debug, Clone, PartialEq)]
pub struct TemperatureModel {
    rows: Vec<TemperatureRow>,
}

/// Parameters that vary with temperature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TemperatureOverrides {
    pub x_lifetime_ps: f64,
    pub background_fraction: f64,
}

impl TemperatureOverrides {
    pub fn apply(&self, base: &CascadeParams) -> CascadeParams {
        CascadeParams {
            x_lifetime_ps: self.x_lifetime_ps,
            background_fraction: self.background_fraction,
            ..base.clone()
        }
    }
}

impl TemperatureModel {
    pub fn new(rows: Vec<TemperatureRow>) -> Result<Self> {
        let mut problems = Vec::new();
        if rows.is_empty() {
            problems.push("temperature table has no rows".to_string());
        }
        for (i, w) in rows.windows(2).enumerate() {
            if !(w[1].temperature_k > w[0].temperature_k) {
                problems.push(format!(
                    "temperatures must increase strictly (row {} -> {})",
                    i,
                    i + 1
                ));
            }
        }
        for (i, r) in rows.iter().enumerate() {
            if !r.temperature_k.is_finite() {
                problems.push(format!("row {i}: temperature not finite"));
            }
            if !(r.x_lifetime_ps.is_finite() && r.x_lifetime_ps > 0.0) {
                problems.push(format!("row {i}: x_lifetime_ps must be > 0"));
            }
            if !(0.0..1.0).contains(&r.background_fraction) {
                problems.push(format!("row {i}: background_fraction must be in [0, 1)"));
            }
        }
        if problems.is_empty() {
            Ok(Self { rows })
        } else {
            Err(Error::Config(problems))
        }
    }

    pub fn rows(&self) -> &[TemperatureRow] {
        &self.rows
    }

    pub fn range_k(&self) -> (f64, f64) {
        (
            self.rows[0].temperature_k,
            self.rows[self.rows.len() - 1].temperature_k,
        )
    }

    pub fn params_at_temperature(&self, temperature_k: f64) -> Result<TemperatureOverrides> {
        let (min_k, max_k) = self.range_k();
        if !(temperature_k >= min_k && temperature_k <= max_k) {
            return Err(Error::TemperatureOutOfRange {
                temperature_k,
                min_k,
                max_k,
            });
        }
        let upper = self
            .rows
            .iter()
            .position(|r| r.temperature_k >= temperature_k)
            .unwrap();
        let hi = self.rows[upper];
        if hi.temperature_k == temperature_k || upper == 0 {
            return Ok(TemperatureOverrides {
                x_lifetime_ps: hi.x_lifetime_ps,
                background_fraction: hi.background_fraction,
            });
        }
        let lo = self.rows[upper - 1];
        let w = (temperature_k - lo.temperature_k) / (hi.temperature_k - lo.temperature_k);
        let lerp = |a: f64, b: f64| a + w * (b - a);
        Ok(TemperatureOverrides {
            x_lifetime_ps: lerp(lo.x_lifetime_ps, hi.x_lifetime_ps),
            background_fraction: lerp(lo.background_fraction, hi.background_fraction),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(t: f64, l: f64, b: f64) -> TemperatureRow {
        TemperatureRow {
            temperature_k: t,
            x_lifetime_ps: l,
            background_fraction: b,
        }
    }

    fn model() -> TemperatureModel {
        TemperatureModel::new(vec![
            row(44.0, 1000.0, 0.1),
            row(63.0, 800.0, 0.2),
            row(99.0, 200.0, 0.6),
        ])
        .unwrap()
    }

    #[test]
    fn exact_rows_and_midpoints() {
        let m = model();
        let at = m.params_at_temperature(63.0).unwrap();
        assert_eq!(at.x_lifetime_ps, 800.0);
        assert_eq!(at.background_fraction, 0.2);
        let mid = m.params_at_temperature(81.0).unwrap();
        assert!((mid.x_lifetime_ps - 500.0).abs() < 1e-12);
        assert!((mid.background_fraction - 0.4).abs() < 1e-12);
        assert_eq!(m.params_at_temperature(44.0).unwrap().x_lifetime_ps, 1000.0);
    }

    #[test]
    fn monotone_table_interpolates_monotonically() {
        let m = model();
        let (lo, hi) = m.range_k();
        let mut prev = m.params_at_temperature(lo).unwrap();
        for i in 1..=100 {
            let t = lo + (hi - lo) * i as f64 / 100.0;
            let p = m.params_at_temperature(t).unwrap();
            assert!(p.x_lifetime_ps <= prev.x_lifetime_ps);
            assert!(p.background_fraction >= prev.background_fraction);
            prev = p;
        }
    }

    #[test]
    fn no_extrapolation() {
        let m = model();
        assert!(matches!(
            m.params_at_temperature(43.9),
            Err(Error::TemperatureOutOfRange { .. })
        ));
        assert!(m.params_at_temperature(99.1).is_err());
        assert!(m.params_at_temperature(f64::NAN).is_err());
    }

    #[test]
    fn rejects_non_increasing_rows() {
        assert!(TemperatureModel::new(vec![row(50.0, 1.0, 0.0), row(50.0, 1.0, 0.0)]).is_err());
        assert!(TemperatureModel::new(vec![]).is_err());
        assert!(TemperatureModel::new(vec![row(50.0, -1.0, 1.0)]).is_err());
    }
}
