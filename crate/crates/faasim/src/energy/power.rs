//! Trapezoidal integration of power-meter samples.
//!
//! Socket-level meters report `(timestamp, watts)` pairs; the energy of one
//! event (a boot, a request) is the integral of power over the event window.
//! The trapezoidal rule is exact on piecewise-linear power series sampled at
//! their breakpoints, which is what linear ramps between meter readings are.

use std::io::BufRead;

use super::EnergyError;
use crate::scalar::Scalar;

/// One power-meter reading. Timestamps within a series are strictly
/// increasing; fractional seconds are expected.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerSample<F> {
    pub t_s: F,
    pub power_w: F,
}

/// Integrates power over `[t0, t1]`, interpolating linearly at the window
/// edges. The samples must cover the window: at least one sample at or
/// before `t0` and one at or after `t1`.
pub fn integrate_power<F: Scalar>(
    samples: &[PowerSample<F>],
    t0: F,
    t1: F,
) -> Result<F, EnergyError> {
    let as_f64 = |x: F| x.to_f64().unwrap_or(f64::NAN);
    if !(t0 < t1) {
        return Err(EnergyError::InvalidWindow {
            t0: as_f64(t0),
            t1: as_f64(t1),
            message: "window start must be strictly before its end".to_string(),
        });
    }
    for (i, pair) in samples.windows(2).enumerate() {
        if !(pair[0].t_s < pair[1].t_s) {
            return Err(EnergyError::NonMonotone(i + 1));
        }
    }
    match (samples.first(), samples.last()) {
        (Some(first), Some(last)) if first.t_s <= t0 && last.t_s >= t1 => {}
        _ => {
            return Err(EnergyError::Coverage(format!(
                "window [{}, {}] needs samples at or before {} and at or after {}",
                as_f64(t0),
                as_f64(t1),
                as_f64(t0),
                as_f64(t1)
            )))
        }
    }

    let two = F::from_f64_lossy(2.0);
    let mut energy = F::zero();
    for pair in samples.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let lo = if a.t_s > t0 { a.t_s } else { t0 };
        let hi = if b.t_s < t1 { b.t_s } else { t1 };
        if !(lo < hi) {
            continue;
        }
        let p_lo = interpolate(a, b, lo);
        let p_hi = interpolate(a, b, hi);
        energy += (p_lo + p_hi) / two * (hi - lo);
    }
    Ok(energy)
}

fn interpolate<F: Scalar>(a: PowerSample<F>, b: PowerSample<F>, t: F) -> F {
    a.power_w + (b.power_w - a.power_w) * (t - a.t_s) / (b.t_s - a.t_s)
}

/// Reads a `t_s,power_w` CSV of meter samples, validating monotonicity and
/// non-negative power.
pub fn read_power_csv<F: Scalar, R: BufRead>(input: R) -> Result<Vec<PowerSample<F>>, EnergyError> {
    const HEADER: &str = "t_s,power_w";
    let mut samples: Vec<PowerSample<F>> = Vec::new();
    let mut saw_header = false;
    for (idx, line) in input.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !saw_header {
            if line != HEADER {
                return Err(EnergyError::MalformedSamples {
                    line: line_no,
                    message: format!("expected header {HEADER:?}"),
                });
            }
            saw_header = true;
            continue;
        }
        let malformed = |message: String| EnergyError::MalformedSamples { line: line_no, message };
        let (t_field, p_field) = line
            .split_once(',')
            .ok_or_else(|| malformed("expected 2 fields".to_string()))?;
        let parse = |field: &str, name: &str| {
            field
                .trim()
                .parse::<f64>()
                .map_err(|_| malformed(format!("{name} {field:?} is not a number")))
        };
        let t_s = parse(t_field, "t_s")?;
        let power_w = parse(p_field, "power_w")?;
        if !t_s.is_finite() || !power_w.is_finite() {
            return Err(malformed("values must be finite".to_string()));
        }
        if power_w < 0.0 {
            return Err(malformed(format!("power_w must be >= 0, got {power_w}")));
        }
        let sample = PowerSample { t_s: F::from_f64_lossy(t_s), power_w: F::from_f64_lossy(power_w) };
        if let Some(prev) = samples.last() {
            if !(prev.t_s < sample.t_s) {
                return Err(EnergyError::MalformedSamples {
                    line: line_no,
                    message: format!("t_s {t_s} does not increase over the previous sample"),
                });
            }
        }
        samples.push(sample);
    }
    if samples.is_empty() {
        return Err(EnergyError::MalformedSamples {
            line: 0,
            message: "no power samples in input".to_string(),
        });
    }
    Ok(samples)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(t_s: f64, power_w: f64) -> PowerSample<f64> {
        PowerSample { t_s, power_w }
    }

    /// Boot-shaped pulse: 0.6 W baseline, linear rise over [1, 2], 3.0 W
    /// plateau over [2, 4], linear fall over [4, 5], baseline to 6.
    /// Closed-form area over [0, 6]:
    /// 0.6 + (0.6+3)/2 + 3·2 + (3+0.6)/2 + 0.6 = 10.8 J.
    fn boot_pulse() -> Vec<PowerSample<f64>> {
        vec![s(0.0, 0.6), s(1.0, 0.6), s(2.0, 3.0), s(4.0, 3.0), s(5.0, 0.6), s(6.0, 0.6)]
    }

    #[test]
    fn constant_power_integrates_exactly() {
        let samples = vec![s(0.0, 2.0), s(1.0, 2.0), s(2.0, 2.0), s(3.0, 2.0)];
        assert_eq!(integrate_power(&samples, 0.0, 3.0).unwrap(), 6.0);
    }

    #[test]
    fn ramp_is_a_triangle() {
        let samples = vec![s(0.0, 0.0), s(1.0, 2.0)];
        assert_eq!(integrate_power(&samples, 0.0, 1.0).unwrap(), 1.0);
    }

    #[test]
    fn boot_pulse_matches_closed_form() {
        let samples = boot_pulse();
        let full = integrate_power(&samples, 0.0, 6.0).unwrap();
        assert!((full - 10.8).abs() <= 1e-9 * 10.8, "got {full}");
        // Sub-window [0, 3]: 0.6 + 1.8 + 3.0 = 5.4 J.
        let head = integrate_power(&samples, 0.0, 3.0).unwrap();
        assert!((head - 5.4).abs() <= 1e-9 * 5.4, "got {head}");
        // Window edges between breakpoints: [0.5, 2.5] = 0.3 + 1.8 + 1.5.
        let mid = integrate_power(&samples, 0.5, 2.5).unwrap();
        assert!((mid - 3.6).abs() <= 1e-9 * 3.6, "got {mid}");
    }

    #[test]
    fn adjacent_windows_are_additive() {
        let samples = boot_pulse();
        for split in [0.25, 1.0, 2.5, 3.9, 5.5] {
            let left = integrate_power(&samples, 0.0, split).unwrap();
            let right = integrate_power(&samples, split, 6.0).unwrap();
            let full = integrate_power(&samples, 0.0, 6.0).unwrap();
            assert!(
                (left + right - full).abs() <= 1e-12 * full,
                "split at {split}: {left} + {right} != {full}"
            );
        }
    }

    #[test]
    fn rejects_uncovered_windows() {
        let samples = vec![s(1.0, 2.0), s(2.0, 2.0)];
        assert!(matches!(integrate_power(&samples, 0.5, 1.5), Err(EnergyError::Coverage(_))));
        assert!(matches!(integrate_power(&samples, 1.5, 2.5), Err(EnergyError::Coverage(_))));
        assert!(matches!(
            integrate_power(&[] as &[PowerSample<f64>], 0.0, 1.0),
            Err(EnergyError::Coverage(_))
        ));
    }

    #[test]
    fn rejects_degenerate_windows_and_timestamps() {
        let samples = vec![s(0.0, 1.0), s(1.0, 1.0)];
        assert!(matches!(
            integrate_power(&samples, 0.5, 0.5),
            Err(EnergyError::InvalidWindow { .. })
        ));
        let bad = vec![s(0.0, 1.0), s(0.0, 2.0), s(1.0, 1.0)];
        assert!(matches!(integrate_power(&bad, 0.0, 1.0), Err(EnergyError::NonMonotone(1))));
    }

    #[test]
    fn csv_round_trips_and_validates() {
        let csv = "t_s,power_w\n0,0.6\n1.5,2.0\n3,0.6\n";
        let samples = read_power_csv::<f64, _>(csv.as_bytes()).unwrap();
        assert_eq!(samples, vec![s(0.0, 0.6), s(1.5, 2.0), s(3.0, 0.6)]);

        let negative = "t_s,power_w\n0,-0.5\n";
        assert!(read_power_csv::<f64, _>(negative.as_bytes()).is_err());
        let non_monotone = "t_s,power_w\n0,1\n0,2\n";
        assert!(read_power_csv::<f64, _>(non_monotone.as_bytes()).is_err());
        assert!(read_power_csv::<f64, _>("t_s,power_w\n".as_bytes()).is_err());
    }
}
