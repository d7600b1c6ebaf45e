//! The line-oriented solver output protocol: `s`, `o` and `v` lines.

use std::fmt;
use std::io::{self, Write};

use crate::engine::{Solver, SolverOptions, Status};
use crate::model::{Assignment, Instance};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ProtocolStatus {
    Satisfiable,
    Unsatisfiable,
    OptimumFound,
    Unknown,
}

impl ProtocolStatus {
    pub fn text(self) -> &'static str {
        match self {
            ProtocolStatus::Satisfiable => "SATISFIABLE",
            ProtocolStatus::Unsatisfiable => "UNSATISFIABLE",
            ProtocolStatus::OptimumFound => "OPTIMUM FOUND",
            ProtocolStatus::Unknown => "UNKNOWN",
        }
    }

    pub fn from_text(s: &str) -> Option<Self> {
        [Self::Satisfiable, Self::Unsatisfiable, Self::OptimumFound, Self::Unknown].into_iter().find(|st| st.text() == s)
    }
}

impl fmt::Display for ProtocolStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.text())
    }
}

/// What a solver reported, as read from its standard output.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SolverOutput {
    pub status: Option<ProtocolStatus>,
    /// Last `o` line.
    pub bound: Option<i64>,
    /// Last `v` line.
    pub values: Option<Vec<i64>>,
    /// Protocol violations, one message per offending line.
    pub violations: Vec<String>,
}

/// Reads solver output. Blank lines and lines starting with `c` are
/// ignored; `o` and `v` lines may repeat and the last one wins; a second
/// `s` line or any other line is a violation.
pub fn read_output(text: &str) -> SolverOutput {
    let mut out = SolverOutput::default();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.trim_end_matches('\r');
        let mut bad = |msg: &str| out.violations.push(format!("line {}: {msg}", no + 1));
        if line.trim().is_empty() {
            continue;
        }
        let (tag, rest) = match line.split_once(' ') {
            Some((t, r)) => (t, r.trim()),
            None => (line, ""),
        };
        match tag {
            "c" => {}
            "s" => {
                let Some(st) = ProtocolStatus::from_text(rest) else {
                    bad(&format!("unknown status {rest:?}"));
                    continue;
                };
                if out.status.is_some() {
                    bad("repeated s line");
                    continue;
                }
                out.status = Some(st);
            }
            "o" => match rest.parse::<i64>() {
                Ok(b) => out.bound = Some(b),
                Err(_) => bad(&format!("malformed bound {rest:?}")),
            },
            "v" => match rest.split_whitespace().map(str::parse::<i64>).collect::<Result<Vec<_>, _>>() {
                Ok(vs) => out.values = Some(vs),
                Err(_) => bad("malformed value line"),
            },
            _ => bad(&format!("unexpected line {line:?}")),
        }
    }
    out
}

pub fn value_line(a: &Assignment) -> String {
    let mut s = String::from("v");
    for v in a.values() {
        s.push(' ');
        s.push_str(&v.to_string());
    }
    s
}

/// Runs the built-in engine and writes its answer in protocol form. For
/// optimization problems an `o` line is written for every improving
/// solution as it is found.
pub fn engine_transcript(inst: &Instance, options: SolverOptions, out: &mut dyn Write) -> io::Result<ProtocolStatus> {
    let solver = Solver::new(inst, options);
    if inst.objective.is_none() {
        let r = solver.solve();
        let status = match &r.status {
            Status::Sat(_) => ProtocolStatus::Satisfiable,
            Status::Unsat => ProtocolStatus::Unsatisfiable,
            Status::Unknown => ProtocolStatus::Unknown,
        };
        writeln!(out, "s {status}")?;
        if let Status::Sat(a) = &r.status {
            writeln!(out, "{}", value_line(a))?;
        }
        return Ok(status);
    }
    let mut io_err = None;
    let r = solver.optimize(&mut |_, v| {
        if let Err(e) = writeln!(out, "o {v}").and_then(|_| out.flush()) {
            io_err.get_or_insert(e);
        }
    });
    if let Some(e) = io_err {
        return Err(e);
    }
    let status = match (&r.best, r.proved_optimal, &r.status) {
        (Some(_), true, _) => ProtocolStatus::OptimumFound,
        (Some(_), false, _) => ProtocolStatus::Satisfiable,
        (None, _, Status::Unsat) => ProtocolStatus::Unsatisfiable,
        (None, _, _) => ProtocolStatus::Unknown,
    };
    writeln!(out, "s {status}")?;
    if let Some((a, _)) = &r.best {
        writeln!(out, "{}", value_line(a))?;
    }
    Ok(status)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_last_bound_and_values() {
        let o = read_output("c hello\no 12\no 10\ns OPTIMUM FOUND\nv 1 2 -3\n");
        assert_eq!(o.status, Some(ProtocolStatus::OptimumFound));
        assert_eq!(o.bound, Some(10));
        assert_eq!(o.values, Some(vec![1, 2, -3]));
        assert!(o.violations.is_empty());
    }

    #[test]
    fn flags_violations() {
        let o = read_output("s SATISFIABLE\ns UNKNOWN\nv 1 x\nhello\no\ns MAYBE\n");
        assert_eq!(o.status, Some(ProtocolStatus::Satisfiable));
        assert_eq!(o.violations.len(), 5);
        assert_eq!(o.values, None);
    }

    #[test]
    fn empty_value_line_is_empty_assignment() {
        assert_eq!(read_output("s SATISFIABLE\nv\n").values, Some(vec![]));
    }
}
