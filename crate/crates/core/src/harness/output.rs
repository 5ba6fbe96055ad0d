//! CSV writers. Floats carry 12 significant digits.

use std::io::Write;

use super::compare::CompareRow;
use super::sweep::SweepRow;
use super::trace::TraceStats;
use crate::analysis::BalanceSolution;
use crate::error::Result;

pub const SWEEP_HEADER: [&str; 8] = [
    "e_c",
    "theta",
    "empirical_underflow",
    "approx_exp",
    "approx_refined",
    "delta_hat",
    "events",
    "low_confidence",
];

pub const COMPARE_HEADER: [&str; 5] =
    ["policy", "theta", "e_c", "mean_service_rate", "outage_freq"];

pub const STATS_HEADER: [&str; 15] = [
    "policy",
    "theta",
    "e_c",
    "frames_counted",
    "underflow_freq",
    "underflow_se",
    "underflow_events",
    "outage_freq",
    "delta_hat",
    "overflow_loss_rate",
    "mean_service_rate",
    "mean_consumed",
    "theta_hat",
    "fit_r_squared",
    "energy_imbalance",
];

pub const TAIL_HEADER: [&str; 5] = [
    "threshold",
    "exceedance_prob",
    "log_prob",
    "episodes",
    "frames",
];

pub const SOLVE_HEADER: [&str; 6] = [
    "policy",
    "theta",
    "policy_parameter",
    "mgf_residual",
    "mean_net_flow",
    "stable",
];

/// `x` in scientific notation with 12 significant digits; empty for NaN.
pub fn fmt_float(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else {
        format!("{x:.11e}")
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_float).unwrap_or_default()
}

pub fn write_sweep<W: Write>(out: W, rows: &[SweepRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_HEADER)?;
    for r in rows {
        let mut rec = vec![fmt_float(r.e_c), fmt_opt(r.theta)];
        match &r.result {
            Ok(p) => rec.extend([
                fmt_float(p.empirical_underflow),
                fmt_float(p.approx_exp),
                fmt_float(p.approx_refined),
                fmt_float(p.delta_hat),
                p.events.to_string(),
                p.low_confidence.to_string(),
            ]),
            Err(_) => rec.extend(std::iter::repeat_n(String::new(), 6)),
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_compare<W: Write>(out: W, rows: &[CompareRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(COMPARE_HEADER)?;
    for r in rows {
        let (rate, outage) = match &r.result {
            Ok(s) => (fmt_float(s.mean_service_rate), fmt_float(s.outage_freq)),
            Err(_) => (String::new(), String::new()),
        };
        w.write_record([
            r.policy.label().to_string(),
            fmt_opt(r.theta),
            fmt_float(r.e_c),
            rate,
            outage,
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_stats<W: Write>(out: W, s: &TraceStats) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(STATS_HEADER)?;
    let (theta_hat, r2) = match &s.tail {
        Ok(t) => (fmt_float(t.theta_hat), fmt_float(t.fit_r_squared)),
        Err(_) => (String::new(), String::new()),
    };
    w.write_record([
        s.policy.label().to_string(),
        fmt_opt(s.theta),
        fmt_float(s.e_c),
        s.frames_counted.to_string(),
        fmt_float(s.underflow_freq),
        fmt_float(s.underflow_se),
        s.underflow_events().to_string(),
        fmt_float(s.outage_freq),
        fmt_float(s.delta_hat),
        fmt_float(s.overflow_loss_rate),
        fmt_float(s.mean_service_rate),
        fmt_float(s.mean_consumed),
        theta_hat,
        r2,
        fmt_float(s.counts.ledger.relative_imbalance()),
    ])?;
    w.flush()?;
    Ok(())
}

/// One row per tail threshold of the trace's available space.
pub fn write_tail<W: Write>(out: W, s: &TraceStats) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TAIL_HEADER)?;
    let t = &s.counts.tail;
    for (k, &x) in t.thresholds.iter().enumerate() {
        let p = t.probability(k);
        w.write_record([
            fmt_float(x),
            fmt_float(p),
            fmt_float(p.ln()),
            t.episodes[k].to_string(),
            t.frames.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_solution<W: Write>(out: W, label: &str, s: &BalanceSolution) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SOLVE_HEADER)?;
    w.write_record([
        label.to_string(),
        fmt_float(s.theta),
        fmt_float(s.policy_parameter),
        fmt_float(s.mgf_residual),
        fmt_float(s.mean_net_flow),
        s.stable.to_string(),
    ])?;
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt_float(0.1), "1.00000000000e-1");
        assert_eq!(fmt_float(84.70150123456789), "8.47015012346e1");
        assert_eq!(fmt_float(f64::NAN), "");
        let digits = fmt_float(std::f64::consts::PI)
            .split('e')
            .next()
            .unwrap()
            .chars()
            .filter(|c| c.is_ascii_digit())
            .count();
        assert_eq!(digits, 12);
    }

    #[test]
    fn solution_csv() {
        let s = BalanceSolution {
            theta: 4.6e-4,
            policy_parameter: 84.7,
            mgf_residual: 1e-12,
            mean_net_flow: 1.9,
            stable: true,
        };
        let mut buf = Vec::new();
        write_solution(&mut buf, "constant", &s).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), SOLVE_HEADER.join(","));
        assert!(lines
            .next()
            .unwrap()
            .starts_with("constant,4.60000000000e-4,8.47000000000e1,"));
    }
}
