//! Report rendering: JSON with 17 significant digits, CSV tables and a
//! four-decimal console table.

use std::io::{self, Write};

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::experiment::RunReport;

/// Pretty JSON whose floats carry 17 significant digits.
struct Precise<'a> {
    inner: PrettyFormatter<'a>,
}

impl Formatter for Precise<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_array(w)
    }

    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_array(w)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_array_value(w)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object(w)
    }

    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object(w)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object_value(w)
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Precise { inner: PrettyFormatter::new() });
    value.serialize(&mut ser).expect("report serializes");
    buf.push(b'\n');
    String::from_utf8(buf).expect("JSON is UTF-8")
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| format!("{x:.16e}"))
}

/// One row per estimator and component.
pub fn to_csv(report: &RunReport) -> String {
    let mut out = String::from("label,component,ac,stderr,bias,rmse_proxy,oracle\n");
    for o in &report.estimators {
        let Some(est) = &o.estimate else { continue };
        for (j, ac) in est.ac.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{:.16e},{},{},{},{}\n",
                o.label,
                j + 1,
                ac,
                opt(est.stderr.as_ref().map(|s| s[j])),
                opt(o.bias.as_ref().map(|b| b[j])),
                opt(o.rmse_proxy.as_ref().map(|r| r[j])),
                opt(report.oracle.as_ref().map(|r| r.ac[j])),
            ));
        }
    }
    out
}

fn vec4(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:>9.4}")).collect::<Vec<_>>().join(" ")
}

/// Console summary in the layout of an estimator comparison table.
pub fn to_table(report: &RunReport) -> String {
    let mut out = format!("v_hat = {:.4}   (p = {}, n = {}, seed = {})\n", report.v_hat, report.config.p, report.config.n, report.config.seed);
    match &report.oracle {
        Some(o) => out.push_str(&format!("true AC ({}): {}\n", o.kind, vec4(&o.ac))),
        None => out.push_str("true AC: not available\n"),
    }
    for o in &report.estimators {
        match &o.estimate {
            Some(est) => {
                out.push_str(&format!("{:<8} ac     {}\n", o.label, vec4(&est.ac)));
                if let Some(b) = &o.bias {
                    out.push_str(&format!("{:<8} bias   {}\n", "", vec4(b)));
                }
                if let Some(s) = &est.stderr {
                    out.push_str(&format!("{:<8} stderr {}\n", "", vec4(s)));
                }
                if let Some(r) = &o.rmse_proxy {
                    out.push_str(&format!("{:<8} rmse   {}\n", "", vec4(r)));
                }
                if let Some(d) = &o.diagnostics {
                    if let Some(a) = d.acceptance_rate {
                        out.push_str(&format!("{:<8} accept {:>9.4}  ({})\n", "", a, d.proposal));
                    }
                }
            }
            None => out.push_str(&format!(
                "{:<8} failed: {}\n",
                o.label,
                o.error.as_deref().unwrap_or("unknown error")
            )),
        }
    }
    for c in &report.clt_validation.conditions {
        out.push_str(&format!("{:<24} {}\n", c.name, if c.satisfied { "satisfied" } else { "not satisfied" }));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_carry_seventeen_digits() {
        let s = to_json(&vec![0.1f64, 1.0 / 3.0]);
        assert!(s.contains("1.0000000000000001e-1"));
        assert!(s.contains("3.3333333333333331e-1"));
        let back: Vec<f64> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, vec![0.1, 1.0 / 3.0]);
        assert!(to_json(&f64::NAN).contains("null"));
    }
}
