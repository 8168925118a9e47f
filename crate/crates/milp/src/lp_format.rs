//! Writer for the CPLEX LP text format, for cross-checking models against
//! external solvers.

use std::collections::HashSet;
use std::io::{self, Write};

use crate::model::{ColumnKind, LinearModel, Relation};

const TERMS_PER_LINE: usize = 6;

fn sanitize(raw: &str, fallback: &str, taken: &mut HashSet<String>) -> String {
    let mut s: String = raw
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '_' || c == '.' {
                c
            } else {
                '_'
            }
        })
        .collect();
    let bad_start = s
        .chars()
        .next()
        .map_or(true, |c| c.is_ascii_digit() || c == '.' || c == 'e' || c == 'E');
    if s.is_empty() {
        s = fallback.to_string();
    } else if bad_start {
        s = format!("_{s}");
    }
    if !taken.insert(s.clone()) {
        s = format!("{s}__{fallback}");
        taken.insert(s.clone());
    }
    s
}

fn write_expr(out: &mut impl Write, terms: &[(usize, f64)], names: &[String]) -> io::Result<()> {
    if terms.is_empty() {
        return write!(out, " 0 {}", names.first().map_or("", |s| s.as_str()));
    }
    for (k, &(j, a)) in terms.iter().enumerate() {
        if k > 0 && k % TERMS_PER_LINE == 0 {
            write!(out, "\n   ")?;
        }
        let sign = if a < 0.0 { '-' } else { '+' };
        write!(out, " {sign} {} {}", a.abs(), names[j])?;
    }
    Ok(())
}

fn bound(v: f64) -> String {
    if v == f64::INFINITY {
        "+inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v}")
    }
}

/// Writes `model` in CPLEX LP format. Names are sanitized to the format's
/// identifier rules and made unique.
pub fn write_lp(model: &LinearModel, mut out: impl Write) -> io::Result<()> {
    let mut taken = HashSet::new();
    let names: Vec<String> = model
        .columns()
        .iter()
        .enumerate()
        .map(|(j, c)| sanitize(&c.name, &format!("C{j}"), &mut taken))
        .collect();

    writeln!(out, "\\ {} columns, {} rows", model.num_columns(), model.num_rows())?;
    writeln!(out, "Minimize")?;
    write!(out, " obj:")?;
    let obj: Vec<(usize, f64)> = model
        .columns()
        .iter()
        .enumerate()
        .filter(|(_, c)| c.objective != 0.0)
        .map(|(j, c)| (j, c.objective))
        .collect();
    if obj.is_empty() && model.num_columns() == 0 {
        write!(out, " 0")?;
    } else {
        write_expr(&mut out, &obj, &names)?;
    }
    let offset = model.objective_offset();
    if offset != 0.0 {
        write!(out, " {} {}", if offset < 0.0 { '-' } else { '+' }, offset.abs())?;
    }
    writeln!(out)?;

    writeln!(out, "Subject To")?;
    for (i, r) in model.rows().iter().enumerate() {
        let name = sanitize(&r.name, &format!("R{i}"), &mut taken);
        write!(out, " {name}:")?;
        write_expr(&mut out, &r.terms, &names)?;
        let rel = match r.relation {
            Relation::Le => "<=",
            Relation::Ge => ">=",
            Relation::Eq => "=",
        };
        writeln!(out, " {rel} {}", r.rhs)?;
    }

    writeln!(out, "Bounds")?;
    for (j, c) in model.columns().iter().enumerate() {
        if c.kind == ColumnKind::Binary {
            continue;
        }
        let name = &names[j];
        match (c.lower, c.upper) {
            (l, u) if l == 0.0 && u == f64::INFINITY => {}
            (l, u) if l == f64::NEG_INFINITY && u == f64::INFINITY => writeln!(out, " {name} free")?,
            (l, u) if l == u => writeln!(out, " {name} = {l}")?,
            (l, u) => writeln!(out, " {} <= {name} <= {}", bound(l), bound(u))?,
        }
    }
    let general: Vec<&str> = model
        .columns()
        .iter()
        .zip(&names)
        .filter(|(c, _)| c.kind == ColumnKind::Integer)
        .map(|(_, n)| n.as_str())
        .collect();
    if !general.is_empty() {
        writeln!(out, "General")?;
        for chunk in general.chunks(TERMS_PER_LINE) {
            writeln!(out, " {}", chunk.join(" "))?;
        }
    }
    let binary: Vec<&str> = model
        .columns()
        .iter()
        .zip(&names)
        .filter(|(c, _)| c.kind == ColumnKind::Binary)
        .map(|(_, n)| n.as_str())
        .collect();
    if !binary.is_empty() {
        writeln!(out, "Binary")?;
        for chunk in binary.chunks(TERMS_PER_LINE) {
            writeln!(out, " {}", chunk.join(" "))?;
        }
    }
    writeln!(out, "End")
}
