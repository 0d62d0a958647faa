//! Plain-text metric reports.

use std::fmt::Write as _;

use spikeclass_core::metrics::EvalReport;

/// `key: value` lines, one metric per line.
pub fn format_report(r: &EvalReport) -> String {
    let c = &r.confusion;
    let mut out = String::new();
    let _ = writeln!(out, "mode: {}", r.mode.as_str());
    let _ = writeln!(out, "theta: {}", r.theta);
    let _ = writeln!(out, "window_steps: {}", r.window);
    let _ = writeln!(out, "tp: {}", c.tp);
    let _ = writeln!(out, "tn: {}", c.tn);
    let _ = writeln!(out, "fp: {}", c.fp);
    let _ = writeln!(out, "fn: {}", c.fn_);
    let _ = writeln!(out, "precision: {:.6}", r.precision);
    let _ = writeln!(out, "tpr: {:.6}", r.tpr);
    let _ = writeln!(out, "fpr: {:.6}", r.fpr);
    let _ = writeln!(out, "f1: {:.6}", r.f1);
    let _ = writeln!(out, "mcc: {:.6}", r.mcc);
    let _ = writeln!(out, "background_hours: {:.6}", r.background_hours);
    let _ = writeln!(out, "far_per_hour: {:.6}", r.far_per_hour);
    out
}

/// Reads one value back from a formatted report.
pub fn report_value<'a>(report: &'a str, key: &str) -> Option<&'a str> {
    report
        .lines()
        .find_map(|l| l.strip_prefix(key)?.strip_prefix(": "))
}
