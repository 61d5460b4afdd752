//! CSV and JSON emission. Floats are written with Rust's shortest
//! round-trip formatting, so identical runs produce byte-identical files.

use crate::experiment::{FlowTrace, SolveReport};
use std::fmt::Write as _;

pub fn solve_csv(report: &SolveReport) -> String {
    let mut out = String::from("cycle,error_norm,residual_norm,factor\n");
    for row in &report.rows {
        let factor = row.factor.map(|f| f.to_string()).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{}",
            row.cycle, row.error_norm, row.residual_norm, factor
        );
    }
    out
}

pub fn flow_csv(trace: &FlowTrace) -> String {
    let ncols = trace
        .state
        .energies
        .first()
        .map(|row| row.len())
        .unwrap_or(0);
    let mut header = String::from("tau,residual");
    for j in 0..ncols {
        let _ = write!(header, ",energy_{j}");
    }
    header.push('\n');
    let mut out = header;
    for (tau, (res, energies)) in trace
        .state
        .residuals
        .iter()
        .zip(&trace.state.energies)
        .enumerate()
    {
        let _ = write!(out, "{tau},{res}");
        for e in energies {
            let _ = write!(out, ",{e}");
        }
        out.push('\n');
    }
    out
}

pub fn to_json<T: serde::Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("report structs serialize");
    text.push('\n');
    text
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::CycleRow;

    #[test]
    fn initial_row_has_empty_factor_field() {
        let report = SolveReport {
            scheme: "markovian",
            n: 4,
            n_coarse: 2,
            k: 1,
            cycles: 0,
            seed: 0,
            raq_norm: 0.0,
            cr_rho: 0.0,
            cr_decay: 0.0,
            rows: vec![CycleRow {
                cycle: 0,
                error_norm: 1.5,
                residual_norm: 2.0,
                factor: None,
            }],
            noise_norms: vec![],
            s_sigma_norms: vec![],
            final_error_norm: 1.5,
            last_factor: None,
        };
        let csv = solve_csv(&report);
        assert_eq!(csv, "cycle,error_norm,residual_norm,factor\n0,1.5,2,\n");
    }
}
