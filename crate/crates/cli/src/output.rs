//! Deterministic text formatting of sweep results.

use std::fmt::Write as _;

use fockbench::TradeoffCurve;
use serde_json::{json, Map, Value};

use crate::config::SweepConfig;

/// Significant digits of every emitted number.
pub const SIG_DIGITS: usize = 12;

/// `x` rounded to [`SIG_DIGITS`] significant digits. Plain decimal notation
/// for exponents in `[-5, 12)`, scientific otherwise.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.*e}", SIG_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..SIG_DIGITS as i32).contains(&exp) {
        let decimals = (SIG_DIGITS as i32 - 1 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

/// JSON number holding exactly the digits [`fmt_num`] prints.
pub fn json_num(x: f64) -> Value {
    let rounded: f64 = fmt_num(x).parse().unwrap_or(x);
    json!(rounded)
}

/// Quotes a CSV field when it contains a separator or a quote.
pub fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Config as `# key=value` comment lines.
pub fn csv_header(cfg: &SweepConfig) -> String {
    let mut out = String::new();
    for (k, v) in cfg.entries() {
        writeln!(out, "# {k}={v}").unwrap();
    }
    out
}

/// Keeps the points with a positive, finite-log success probability.
fn emitted(curve: &TradeoffCurve) -> impl Iterator<Item = &fockbench::SweepRecord> {
    curve.points.iter().filter(|p| p.p_s > 0.0 && p.log10_ps.is_finite())
}

pub const SWEEP_COLUMNS: &str = "strategy,t2,p_s,log10_ps,negativity";

pub fn sweep_csv(cfg: &SweepConfig, curves: &[TradeoffCurve]) -> String {
    let mut out = csv_header(cfg);
    out.push_str(SWEEP_COLUMNS);
    out.push('\n');
    for c in curves {
        let label = csv_field(&c.label);
        for p in emitted(c) {
            writeln!(
                out,
                "{label},{},{},{},{}",
                fmt_num(p.t2),
                fmt_num(p.p_s),
                fmt_num(p.log10_ps),
                fmt_num(p.negativity)
            )
            .unwrap();
        }
    }
    out
}

pub fn sweep_json(cfg: &SweepConfig, curves: &[TradeoffCurve]) -> String {
    let rows: Vec<Value> = curves
        .iter()
        .flat_map(|c| {
            emitted(c).map(move |p| {
                json!({
                    "strategy": c.label,
                    "t2": json_num(p.t2),
                    "p_s": json_num(p.p_s),
                    "log10_ps": json_num(p.log10_ps),
                    "negativity": json_num(p.negativity),
                })
            })
        })
        .collect();
    let mut doc = Map::new();
    doc.insert("config".into(), cfg.to_json());
    doc.insert("rows".into(), Value::Array(rows));
    pretty(Value::Object(doc))
}

pub fn pretty(v: Value) -> String {
    let mut s = serde_json::to_string_pretty(&v).expect("values are finite");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt_num(0.031217481789802277), "0.0312174817898");
        assert_eq!(fmt_num(-1.5056573839), "-1.5056573839");
        assert_eq!(fmt_num(0.5), "0.5");
        assert_eq!(fmt_num(1.0), "1");
        assert_eq!(fmt_num(1.234e-9), "1.234e-9");
        assert_eq!(fmt_num(2.0f64.sqrt()), "1.41421356237");
        assert_eq!(fmt_num(0.0), "0");
    }

    #[test]
    fn json_numbers_match_text() {
        let v = json_num(std::f64::consts::PI);
        assert_eq!(v.to_string(), "3.14159265359");
    }

    #[test]
    fn quoting() {
        assert_eq!(csv_field("1/0"), "1/0");
        assert_eq!(csv_field("1,0,0,1"), "\"1,0,0,1\"");
    }
}
