//! Deterministic text emission: trajectory CSV, ensemble summary JSON, and
//! phase-scan CSV. Every float is printed with 17 significant digits so
//! re-runs are byte-identical and values round-trip exactly.

use crate::engine::{EnsembleReport, PhaseRow, TrajectoryRecord};

/// 17-significant-digit scientific formatting (1 leading + 16 fractional).
/// Non-finite values print as `inf`/`-inf`/`NaN`, which is stable.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "NaN".to_string()
    } else if v > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

/// Per-trajectory checkpoint CSV with columns exactly `trajectory_id,k,u`.
pub fn trajectories_csv(records: &[TrajectoryRecord]) -> String {
    let mut out = String::from("trajectory_id,k,u\n");
    for r in records {
        for (k, u) in &r.checkpoints {
            out.push_str(&format!("{},{},{}\n", r.trajectory_id, k, fmt_f64(*u)));
        }
    }
    out
}

/// Pretty-printed summary JSON (struct field order, so byte-stable).
pub fn summary_json(report: &EnsembleReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serialises");
    s.push('\n');
    s
}

/// Phase-scan CSV with columns exactly
/// `xi,admissible,converged_fraction,mean_jumps,analytic_jumps`.
pub fn phase_csv(rows: &[PhaseRow]) -> String {
    let mut out = String::from("xi,admissible,converged_fraction,mean_jumps,analytic_jumps\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt_f64(r.xi),
            r.admissible,
            fmt_f64(r.converged_fraction),
            fmt_f64(r.mean_jumps),
            r.analytic_jumps.map(fmt_f64).unwrap_or_default(),
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_formatting_is_17_digits_and_stable() {
        assert_eq!(fmt_f64(1.0), "1.0000000000000000e0");
        assert_eq!(fmt_f64(f64::INFINITY), "inf");
        assert_eq!(fmt_f64(f64::NEG_INFINITY), "-inf");
        assert_eq!(fmt_f64(f64::NAN), "NaN");
        // Round-trips exactly.
        for &v in &[0.1, 2.0 / 3.0, 1e-300, 123456.789, 6.309573444801933e-5] {
            let parsed: f64 = fmt_f64(v).parse().unwrap();
            assert_eq!(parsed.to_bits(), v.to_bits());
        }
    }

    #[test]
    fn csv_headers_are_pinned() {
        assert!(trajectories_csv(&[]).starts_with("trajectory_id,k,u\n"));
        assert!(
            phase_csv(&[]).starts_with("xi,admissible,converged_fraction,mean_jumps,analytic_jumps\n")
        );
    }
}
