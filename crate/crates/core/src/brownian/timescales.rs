//! Decoherence versus relaxation time scales in SI units.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

pub const HBAR_SI: f64 = 1.054_571_817e-34;
pub const KB_SI: f64 = 1.380_649e-23;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Timescales {
    /// Decoherence time, seconds.
    pub tau_d: f64,
    /// Thermal de Broglie wavelength `ħ/√(2 m k_B T)`, metres.
    pub lambda_db: f64,
    /// `τ_D/τ_R = (λ_dB/Δx)²`.
    pub ratio: f64,
}

/// `τ_D = τ_R (λ_dB/Δx)²` for mass (kg), temperature (K), relaxation time (s)
/// and separation (m).
pub fn decoherence_time(mass: f64, temperature: f64, relaxation_time: f64, separation: f64) -> Result<Timescales> {
    for (name, v) in [
        ("mass", mass),
        ("temperature", temperature),
        ("relaxation_time", relaxation_time),
        ("separation", separation),
    ] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(invalid(name, format!("{v} must be positive and finite")));
        }
    }
    let lambda_db = HBAR_SI / (2.0 * mass * KB_SI * temperature).sqrt();
    let ratio = (lambda_db / separation).powi(2);
    Ok(Timescales { tau_d: relaxation_time * ratio, lambda_db, ratio })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub mass: f64,
    pub temperature: f64,
    pub relaxation_time: f64,
    pub separation: f64,
}

impl Scenario {
    /// One gram separated by one centimetre at room temperature, relaxing
    /// over roughly the age of the universe.
    pub fn macroscopic() -> Self {
        Self { name: "gram-centimetre".into(), mass: 1e-3, temperature: 300.0, relaxation_time: 1e17, separation: 1e-2 }
    }

    /// Electron-scale mass over an atomic distance.
    pub fn electron() -> Self {
        Self { name: "electron-angstrom".into(), mass: 1e-30, temperature: 300.0, relaxation_time: 1.0, separation: 1e-10 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimescaleRow {
    pub scenario: Scenario,
    pub timescales: Timescales,
}

pub const REPORT_HEADER: [&str; 8] =
    ["scenario", "mass_kg", "temperature_K", "separation_m", "relaxation_time_s", "lambda_dB_m", "tau_D_s", "ratio"];

pub fn timescale_report(scenarios: &[Scenario]) -> Result<Vec<TimescaleRow>> {
    scenarios
        .iter()
        .map(|s| {
            Ok(TimescaleRow {
                scenario: s.clone(),
                timescales: decoherence_time(s.mass, s.temperature, s.relaxation_time, s.separation)?,
            })
        })
        .collect()
}

/// CSV rendering of [`timescale_report`] rows, header included.
pub fn format_report(rows: &[TimescaleRow]) -> String {
    let mut out = REPORT_HEADER.join(",");
    out.push('\n');
    for r in rows {
        let s = &r.scenario;
        let t = &r.timescales;
        let fields = [s.mass, s.temperature, s.separation, s.relaxation_time, t.lambda_db, t.tau_d, t.ratio];
        out.push_str(&crate::lab::series::quote_field(&s.name));
        for v in fields {
            out.push(',');
            out.push_str(&crate::lab::series::format_float(v));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn macroscopic_example() {
        let s = Scenario::macroscopic();
        let t = decoherence_time(s.mass, s.temperature, s.relaxation_time, s.separation).unwrap();
        assert!(t.ratio > 1e-42 && t.ratio < 1e-39, "ratio {}", t.ratio);
        assert!((t.tau_d.log10() + 23.0).abs() < 1.0, "tau_d {}", t.tau_d);
    }

    #[test]
    fn separation_equal_to_wavelength() {
        let lambda = decoherence_time(1e-20, 10.0, 1.0, 1.0).unwrap().lambda_db;
        let t = decoherence_time(1e-20, 10.0, 3.5, lambda).unwrap();
        assert!((t.tau_d - 3.5).abs() < 1e-12);
    }

    #[test]
    fn electron_is_far_slower_to_decohere() {
        let rows = timescale_report(&[Scenario::macroscopic(), Scenario::electron()]).unwrap();
        assert!(rows[1].timescales.ratio / rows[0].timescales.ratio > 1e30);
        assert!(timescale_report(&[]).unwrap().is_empty());
        assert_eq!(format_report(&[]).lines().count(), 1);
    }

    #[test]
    fn rejects_non_positive_inputs() {
        assert!(decoherence_time(0.0, 300.0, 1.0, 1.0).is_err());
        assert!(decoherence_time(1.0, 300.0, 1.0, -1.0).is_err());
    }
}
