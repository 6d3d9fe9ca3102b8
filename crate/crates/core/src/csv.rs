//! CSV tables for sweeps, searches and coherence checks.
//!
//! Numbers carry 12 significant digits with '.' as the decimal mark. Fixed
//! notation is used for decimal exponents in [−5, 12), scientific otherwise.

use std::fmt::Write;

use crate::coherence::CoherenceReport;
use crate::lgi::{SweepAxis, SweepPoint};
use crate::qpi::QpiReport;

pub const SIGNIFICANT_DIGITS: usize = 12;

/// `x` rounded to 12 significant digits, trailing zeros removed.
pub fn number(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        let decimals = (SIGNIFICANT_DIGITS as i32 - 1 - exp).max(0) as usize;
        trim(format!("{:.*}", decimals, x))
    } else {
        format!("{}e{}", trim(mantissa.to_string()), exp)
    }
}

fn trim(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn row(out: &mut String, cells: impl IntoIterator<Item = String>) {
    let cells: Vec<String> = cells.into_iter().collect();
    writeln!(out, "{}", cells.join(",")).expect("writing to a String");
}

/// Columns naming the swept quantities of `axis`.
pub fn axis_columns(axis: &SweepAxis) -> &'static [&'static str] {
    match axis {
        SweepAxis::Ds { .. } => &["ds"],
        SweepAxis::Sigma0 { .. } => &["sigma0", "beta1", "beta2"],
        SweepAxis::Betas { .. } => &["beta1", "beta2"],
    }
}

pub const LGI_COLUMNS: [&str; 16] = [
    "ka",
    "kv",
    "violation",
    "ds_opt",
    "q1_1",
    "q1_2",
    "q1_3",
    "q2_1",
    "q2_2",
    "q2_3",
    "q2_4",
    "signaling_1",
    "signaling_2",
    "signaling_3",
    "signaling_4",
    "gamma_c",
];

/// One row per sweep point, swept values first.
pub fn lgi_sweep(axis: &SweepAxis, points: &[SweepPoint]) -> String {
    let mut out = String::new();
    let axis_cols = axis_columns(axis);
    row(&mut out, axis_cols.iter().chain(LGI_COLUMNS.iter()).map(|s| s.to_string()));
    for p in points {
        let g = &p.geometry;
        let axis_vals: Vec<f64> = match axis {
            SweepAxis::Ds { .. } => vec![g.ds],
            SweepAxis::Sigma0 { .. } => vec![g.sigma0, g.beta1, g.beta2],
            SweepAxis::Betas { .. } => vec![g.beta1, g.beta2],
        };
        let r = &p.report;
        let mut cells: Vec<String> = axis_vals.into_iter().map(number).collect();
        cells.extend([r.ka, r.kv, r.violation, g.ds].map(number));
        cells.extend(r.signs.q1.iter().chain(&r.signs.q2).map(|q| q.to_string()));
        cells.extend(r.signaling.iter().map(|&s| number(s)));
        cells.push(number(r.gamma_c));
        row(&mut out, cells);
    }
    out
}

pub const QPI_COLUMNS: [&str; 16] = [
    "x21",
    "x31_opt",
    "constructive_margin",
    "destructive_margin",
    "p1_12",
    "p1_1",
    "p1_2",
    "p12_121",
    "p12_11",
    "p12_21",
    "p123_1211",
    "p123_111",
    "p123_211",
    "verdict1",
    "verdict2",
    "verdict3",
];

pub fn qpi(reports: &[QpiReport]) -> String {
    let mut out = String::new();
    row(&mut out, QPI_COLUMNS.map(String::from));
    for r in reports {
        let mut cells: Vec<String> = [r.x21, r.x31, r.constructive_margin, r.destructive_margin].map(number).to_vec();
        cells.extend(r.probs.as_array().map(number));
        cells.extend(r.verdicts.map(|v| v.to_string()));
        row(&mut out, cells);
    }
    out
}

pub const COHERENCE_COLUMNS: [&str; 5] = ["parameter", "check", "dc", "d_setup", "feasible"];

/// One row per check; `parameter` is the value the report was computed at.
pub fn coherence(reports: &[(f64, CoherenceReport)]) -> String {
    let mut out = String::new();
    row(&mut out, COHERENCE_COLUMNS.map(String::from));
    for (param, r) in reports {
        for c in &r.checks {
            row(
                &mut out,
                [number(*param), c.label.to_string(), number(c.dc), number(c.d_setup), c.feasible().to_string()],
            );
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_formatting() {
        assert_eq!(number(0.0), "0");
        assert_eq!(number(1.0), "1");
        assert_eq!(number(-2.5), "-2.5");
        assert_eq!(number(0.212200000000049), "0.2122");
        assert_eq!(number(1.0 / 3.0), "0.333333333333");
        assert_eq!(number(123456.7890123456), "123456.789012");
        assert_eq!(number(1.5e-7), "1.5e-7");
        assert_eq!(number(2.0e13), "2e13");
        assert_eq!(number(9.9999999999999e-6), "0.00001");
    }

    #[test]
    fn numbers_round_trip_to_twelve_digits() {
        for x in [std::f64::consts::PI, 6.02214076e23, -1.602176634e-19, 0.4034, 607.0] {
            let back: f64 = number(x).parse().unwrap();
            assert!((back - x).abs() <= 5e-12 * x.abs());
        }
    }
}
