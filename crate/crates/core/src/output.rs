//! On-disk artifacts: sample CSV, thresholds and verdict.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::Result;
use crate::functionals::{EnergyReport, Thresholds};
use crate::run::RunOutput;
use crate::classifier::Termination;

pub const CSV_HEADER: &str = "t,E,I,J,gamma,g_diamond_u,H,L,Lhat,u_p_norm,grad_u_norm,ut_norm,ut_boundary_norm,dissipation_residual";

/// Positional decimal with 17 significant digits (`NaN`, `inf`, `-inf` otherwise).
pub fn decimal(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent format");
    let exp: i32 = exp.parse().expect("integer exponent");
    let (sign, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => ("-", m),
        None => ("", mantissa),
    };
    let digits: String = mantissa.chars().filter(|c| *c != '.').collect();
    // value = 0.d₁d₂…d₁₇ × 10^(exp + 1)
    let point = exp + 1;
    let body = if point <= 0 {
        format!("0.{}{}", "0".repeat((-point) as usize), digits)
    } else if point as usize >= digits.len() {
        format!("{}{}", digits, "0".repeat(point as usize - digits.len()))
    } else {
        let (int, frac) = digits.split_at(point as usize);
        format!("{int}.{frac}")
    };
    let body = if body.contains('.') {
        body.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        body
    };
    format!("{sign}{body}")
}

pub fn csv(reports: &[EnergyReport]) -> String {
    let mut out = String::with_capacity(64 * (reports.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in reports {
        let row = [
            r.t,
            r.energy,
            r.i,
            r.j,
            r.gamma,
            r.g_diamond_u,
            r.h,
            r.l,
            r.l_hat.unwrap_or(f64::NAN),
            r.u_p_norm,
            r.grad_u_norm,
            r.ut_norm,
            r.ut_boundary_norm,
            r.dissipation_residual,
        ];
        let cells: Vec<String> = row.iter().map(|&x| decimal(x)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn thresholds_text(th: &Thresholds) -> String {
    let opt = |x: Option<f64>| x.unwrap_or(f64::NAN);
    let rows = [
        ("B", th.b),
        ("B1", th.b1),
        ("alpha1", th.alpha1),
        ("alpha2", opt(th.alpha2)),
        ("E1", th.e1),
        ("E2", th.e2),
        ("beta", th.beta),
        ("c1", opt(th.c1)),
        ("sigma_hat", opt(th.sigma_hat)),
        ("sigma", opt(th.sigma)),
        ("d", opt(th.d)),
        ("epsilon", th.epsilon),
    ];
    let mut out = String::new();
    for (k, v) in rows {
        writeln!(out, "{k} = {}", decimal(v)).unwrap();
    }
    out
}

pub fn verdict_text(out: &RunOutput) -> String {
    let mut s = String::new();
    writeln!(s, "[run]").unwrap();
    let (status, t, dt) = match out.termination {
        Termination::Completed => ("completed", out.final_state.t, out.smallest_dt),
        Termination::CapExceeded { t, dt } => ("cap_exceeded", t, dt),
        Termination::NonFinite { t, dt } => ("non_finite", t, dt),
        Termination::ResolvedToDtMin { t, dt } => ("blowup_resolved_to_dt_min", t, dt),
    };
    writeln!(s, "termination = {status}").unwrap();
    writeln!(s, "t_end = {}", decimal(t)).unwrap();
    writeln!(s, "last_dt = {}", decimal(dt)).unwrap();
    writeln!(s, "accepted_steps = {}", out.accepted_steps).unwrap();
    writeln!(s, "rejected_steps = {}", out.rejected_steps).unwrap();
    writeln!(s, "cap = {}", decimal(out.cap)).unwrap();
    let max_norm = out.norm_log.iter().map(|x| x.1).filter(|x| x.is_finite()).fold(0.0, f64::max);
    writeln!(s, "max_u_p_norm = {}", decimal(max_norm)).unwrap();
    writeln!(s, "{}", out.verdict).unwrap();
    s
}

pub fn write_run(dir: &Path, out: &RunOutput) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("run.csv"), csv(&out.reports))?;
    fs::write(dir.join("thresholds.txt"), thresholds_text(&out.thresholds))?;
    fs::write(dir.join("verdict.txt"), verdict_text(out))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn decimal_examples() {
        assert_eq!(decimal(0.0), "0");
        assert_eq!(decimal(1.0), "1");
        assert_eq!(decimal(-2.5), "-2.5");
        assert_eq!(decimal(1e-3), "0.001");
        assert_eq!(decimal(0.1), "0.10000000000000001");
        assert_eq!(decimal(1.5e20), "150000000000000000000");
        assert_eq!(decimal(f64::NAN), "NaN");
    }

    #[test]
    fn header_is_fixed() {
        assert_eq!(csv(&[]).trim_end(), CSV_HEADER);
        assert_eq!(CSV_HEADER.split(',').count(), 14);
    }

    proptest! {
        #[test]
        fn decimal_round_trips(x in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL) {
            let s = decimal(x);
            prop_assert_eq!(s.parse::<f64>().unwrap(), x);
            prop_assert!(!s.contains('e'));
        }
    }
}
