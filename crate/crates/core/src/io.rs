//! Plain-text exchange formats: dense target CSV, edge lists, schedule JSON and
//! mode tables.

use std::fmt::Write as _;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::compiler::{Cycle, CycleSchedule, TargetKind, TargetModel};
use crate::error::{Error, Result};
use crate::model::ModeSet;

pub const SCHEDULE_SCHEMA: &str = "hotline.schedule/1";

fn parse_err<T>(line: usize, msg: impl std::fmt::Display) -> Result<T> {
    Err(Error::Parse(format!("line {line}: {msg}")))
}

fn parse_f64(s: &str, line: usize) -> Result<f64> {
    match s.trim().parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => parse_err(line, format!("not a finite number: {s:?}")),
    }
}

/// Dense target matrix: a header row `N,<n>` followed by n rows of n values.
pub fn target_to_csv(t: &TargetModel) -> String {
    let n = t.n();
    let mut s = format!("N,{n}\n");
    for i in 0..n {
        let row: Vec<String> = (0..n).map(|j| format!("{:e}", t.w[(i, j)])).collect();
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

pub fn target_from_csv(text: &str) -> Result<TargetModel> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| Error::Parse("empty target file".into()))?;
    let fields: Vec<&str> = header.split(',').map(str::trim).collect();
    let n = match fields.as_slice() {
        ["N", n] => n.parse::<usize>().map_err(|_| Error::Parse(format!("bad N in header: {n:?}")))?,
        _ => return parse_err(1, "header must be `N,<n>`"),
    };
    let mut w = DMatrix::zeros(n, n);
    let mut rows = 0;
    for (idx, line) in lines {
        if rows == n {
            return parse_err(idx + 1, "more rows than N");
        }
        let vals: Vec<&str> = line.split(',').collect();
        if vals.len() != n {
            return parse_err(idx + 1, format!("expected {n} values, found {}", vals.len()));
        }
        for (j, v) in vals.iter().enumerate() {
            w[(rows, j)] = parse_f64(v, idx + 1)?;
        }
        rows += 1;
    }
    if rows != n {
        return Err(Error::Parse(format!("expected {n} rows, found {rows}")));
    }
    TargetModel::new(w, TargetKind::Custom)
}

/// Edge list with one `u v weight` (whitespace or comma separated) per line;
/// `#` starts a comment. Without `n`, the register size is the largest index + 1.
pub fn graph_from_edge_list(text: &str, n: Option<usize>) -> Result<TargetModel> {
    let mut edges = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()).collect();
        if parts.len() != 3 && parts.len() != 2 {
            return parse_err(idx + 1, "expected `u v [weight]`");
        }
        let u: usize = parts[0].parse().map_err(|_| Error::Parse(format!("line {}: bad vertex {:?}", idx + 1, parts[0])))?;
        let v: usize = parts[1].parse().map_err(|_| Error::Parse(format!("line {}: bad vertex {:?}", idx + 1, parts[1])))?;
        let w = if parts.len() == 3 { parse_f64(parts[2], idx + 1)? } else { 1.0 };
        if u == v {
            return parse_err(idx + 1, "self loop");
        }
        edges.push((u, v, w));
    }
    let size = edges.iter().map(|&(u, v, _)| u.max(v) + 1).max().unwrap_or(0);
    let n = n.unwrap_or(size);
    if size > n {
        return Err(Error::Parse(format!("vertex index {} outside register of {n}", size - 1)));
    }
    let mut w = DMatrix::zeros(n, n);
    for (u, v, x) in edges {
        w[(u, v)] += x;
        w[(v, u)] += x;
    }
    TargetModel::new(w, TargetKind::Graph)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct ScheduleCycle {
    amplitudes: Vec<f64>,
    sign: i8,
    p: u64,
    t_p: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct ScheduleDoc {
    schema: String,
    n_qubits: usize,
    omega1: f64,
    diagonal_shift: f64,
    cycles: Vec<ScheduleCycle>,
}

pub fn schedule_to_json(s: &CycleSchedule) -> Result<String> {
    let doc = ScheduleDoc {
        schema: SCHEDULE_SCHEMA.into(),
        n_qubits: s.n_qubits,
        omega1: s.omega1,
        diagonal_shift: s.diagonal_shift,
        cycles: s
            .cycles
            .iter()
            .map(|c| ScheduleCycle { amplitudes: c.amplitudes.clone(), sign: c.sign, p: c.p, t_p: c.duration })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).map_err(|e| Error::Parse(e.to_string()))
}

pub fn schedule_from_json(text: &str) -> Result<CycleSchedule> {
    let doc: ScheduleDoc = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    if doc.schema != SCHEDULE_SCHEMA {
        return Err(Error::Parse(format!("unknown schedule schema {:?}", doc.schema)));
    }
    if doc.cycles.iter().any(|c| c.amplitudes.len() != doc.n_qubits) {
        return Err(Error::Parse("cycle amplitude count differs from n_qubits".into()));
    }
    Ok(CycleSchedule {
        n_qubits: doc.n_qubits,
        omega1: doc.omega1,
        diagonal_shift: doc.diagonal_shift,
        cycles: doc
            .cycles
            .into_iter()
            .map(|c| Cycle { amplitudes: c.amplitudes, sign: c.sign, duration: c.t_p, p: c.p })
            .collect(),
    })
}

/// Mode table: index, wavevector, frequency, occupation and one coupling column
/// per qubit.
pub fn mode_table_csv(modes: &ModeSet) -> String {
    let mut s = String::from("n,k,omega,nbar");
    for i in 0..modes.n_qubits() {
        let _ = write!(s, ",g_{i}");
    }
    s.push('\n');
    for m in 0..modes.n_modes() {
        let _ = write!(s, "{},{:e},{:e},{:e}", m + 1, modes.k[m], modes.omega[m], modes.thermal_occ[m]);
        for i in 0..modes.n_qubits() {
            let _ = write!(s, ",{:e}", modes.couplings[(i, m)]);
        }
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compiler::{compile, powerlaw1d, CompileLimits, Strategy};

    #[test]
    fn target_round_trip() {
        let t = powerlaw1d(5, 1.5, false).unwrap();
        let back = target_from_csv(&target_to_csv(&t)).unwrap();
        assert_eq!(back.w, t.w);
    }

    #[test]
    fn schedule_round_trip() {
        let t = powerlaw1d(4, 1.0, false).unwrap();
        let s = compile(&t, CompileLimits { omega1: 1.0, j_max: 0.1, g_max: 1.0 }, Strategy::DiagonalShift).unwrap();
        assert_eq!(schedule_from_json(&schedule_to_json(&s).unwrap()).unwrap(), s);
    }

    #[test]
    fn edge_list() {
        let g = graph_from_edge_list("# triangle\n0 1\n1,2,2.5\n0 2 1\n", None).unwrap();
        assert_eq!(g.n(), 3);
        assert_eq!(g.w[(2, 1)], 2.5);
        assert!(graph_from_edge_list("0 0 1\n", None).is_err());
        assert!(target_from_csv("N,2\n1,2\n").is_err());
    }
}
