//! LP-format text export and re-import.
//!
//! The writer emits `Minimize`, `Subject To`, `Bounds`, `Generals`,
//! `Binaries` and `End` sections. Double-sided constraints become two rows
//! suffixed `_lo` and `_hi`. Coefficients use Rust's shortest round-trip
//! decimal form, so parsing a written file recovers every coefficient
//! bit for bit.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use thiserror::Error;

use super::model::{Domain, Family, MilpModel, Sense};

const WRAP: usize = 200;

#[derive(Debug, Error, PartialEq)]
pub enum LpError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("missing section {0}")]
    MissingSection(&'static str),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpRow {
    pub name: String,
    pub terms: Vec<(String, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

/// Parsed or to-be-written contents of an LP file.
#[derive(Debug, Clone, PartialEq)]
pub struct LpFile {
    /// Comment lines, without the leading backslash.
    pub comments: Vec<String>,
    pub objective: Vec<(String, f64)>,
    pub rows: Vec<LpRow>,
    /// Non-default lower bounds.
    pub lower_bounds: Vec<(String, f64)>,
    pub generals: Vec<String>,
    pub binaries: Vec<String>,
}

impl LpFile {
    pub fn from_model(model: &MilpModel) -> Self {
        let name = |i: super::model::VarIdx| model.variable(i).key.to_string();
        let mut rows = Vec::new();
        for c in model.constraints() {
            let suffixes: &[&str] = if c.rows.len() == 2 { &["_lo", "_hi"] } else { &[""] };
            for (row, suffix) in c.rows.iter().zip(suffixes) {
                rows.push(LpRow {
                    name: format!("{}{}", c.name, suffix),
                    terms: row.terms.iter().map(|&(v, k)| (name(v), k)).collect(),
                    sense: row.sense,
                    rhs: row.rhs,
                });
            }
        }
        let mut lower_bounds = Vec::new();
        let mut generals = Vec::new();
        let mut binaries = Vec::new();
        for v in model.variables() {
            match v.domain {
                Domain::Binary => binaries.push(v.key.to_string()),
                Domain::Integer => generals.push(v.key.to_string()),
                Domain::Continuous => {}
            }
            if v.domain != Domain::Binary && v.lower != 0.0 {
                lower_bounds.push((v.key.to_string(), v.lower));
            }
        }
        LpFile {
            comments: vec![
                " orbitlb load-balancing MILP".to_string(),
                format!(
                    " strict '> 0' rows (families 9, 10) are written as '>= {} * h_d'",
                    model.delta()
                ),
                format!(" big-M = {} (largest link capacity)", model.big_m()),
                format!(
                    " demands = {}, flows per demand = {}",
                    model.demand_count(),
                    model.flows_per_demand()
                ),
            ],
            objective: vec![(name(model.objective()), 1.0)],
            rows,
            lower_bounds,
            generals,
            binaries,
        }
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.comments {
            let _ = writeln!(out, "\\{c}");
        }
        out.push_str("Minimize\n");
        write_expr(&mut out, " obj:", &self.objective, None);
        out.push_str("Subject To\n");
        for r in &self.rows {
            write_expr(&mut out, &format!(" {}:", r.name), &r.terms, Some((r.sense, r.rhs)));
        }
        out.push_str("Bounds\n");
        for (v, lb) in &self.lower_bounds {
            let _ = writeln!(out, " {v} >= {lb}");
        }
        if !self.generals.is_empty() {
            out.push_str("Generals\n");
            write_names(&mut out, &self.generals);
        }
        if !self.binaries.is_empty() {
            out.push_str("Binaries\n");
            write_names(&mut out, &self.binaries);
        }
        out.push_str("End\n");
        out
    }

    /// Logical constraints per family, pairing `_lo`/`_hi` rows. Row names
    /// must follow the `c<family>_...` scheme of [`LpFile::from_model`].
    pub fn count_by_family(&self) -> BTreeMap<Family, usize> {
        let mut out = BTreeMap::new();
        for r in &self.rows {
            if r.name.ends_with("_hi") {
                continue;
            }
            let digits: String = r.name[1..].chars().take_while(char::is_ascii_digit).collect();
            if let Some(f) = digits.parse().ok().and_then(Family::from_number) {
                *out.entry(f).or_insert(0) += 1;
            }
        }
        out
    }

    pub fn parse(text: &str) -> Result<LpFile, LpError> {
        #[derive(PartialEq, Clone, Copy)]
        enum Section {
            Preamble,
            Objective,
            Constraints,
            Bounds,
            Generals,
            Binaries,
            Done,
        }
        let mut section = Section::Preamble;
        let mut file = LpFile {
            comments: Vec::new(),
            objective: Vec::new(),
            rows: Vec::new(),
            lower_bounds: Vec::new(),
            generals: Vec::new(),
            binaries: Vec::new(),
        };
        let mut saw_objective = false;
        let mut saw_constraints = false;
        // tokens of the statement being accumulated, with its first line
        let mut pending: Vec<(usize, String)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            if let Some(c) = raw.strip_prefix('\\') {
                file.comments.push(c.to_string());
                continue;
            }
            let trimmed = raw.trim();
            if trimmed.is_empty() {
                continue;
            }
            let next = match trimmed.to_ascii_lowercase().as_str() {
                "minimize" => Some(Section::Objective),
                "subject to" => Some(Section::Constraints),
                "bounds" => Some(Section::Bounds),
                "generals" => Some(Section::Generals),
                "binaries" => Some(Section::Binaries),
                "end" => Some(Section::Done),
                _ => None,
            };
            if let Some(next) = next {
                flush(section == Section::Objective, &mut pending, &mut file)?;
                section = next;
                saw_objective |= next == Section::Objective;
                saw_constraints |= next == Section::Constraints;
                continue;
            }
            match section {
                Section::Preamble | Section::Done => {
                    return Err(LpError::Syntax {
                        line,
                        message: "content outside a section".into(),
                    })
                }
                Section::Objective | Section::Constraints => {
                    for tok in trimmed.split_whitespace() {
                        if tok.ends_with(':') && !pending.is_empty() {
                            flush(section == Section::Objective, &mut pending, &mut file)?;
                        }
                        pending.push((line, tok.to_string()));
                    }
                }
                Section::Bounds => {
                    let toks: Vec<&str> = trimmed.split_whitespace().collect();
                    match toks[..] {
                        [v, ">=", lb] => file.lower_bounds.push((v.to_string(), num(lb, line)?)),
                        _ => {
                            return Err(LpError::Syntax {
                                line,
                                message: format!("unsupported bound {trimmed:?}"),
                            })
                        }
                    }
                }
                Section::Generals => file.generals.extend(trimmed.split_whitespace().map(String::from)),
                Section::Binaries => file.binaries.extend(trimmed.split_whitespace().map(String::from)),
            }
        }
        flush(section == Section::Objective, &mut pending, &mut file)?;
        if !saw_objective {
            return Err(LpError::MissingSection("Minimize"));
        }
        if !saw_constraints {
            return Err(LpError::MissingSection("Subject To"));
        }
        if section != Section::Done {
            return Err(LpError::MissingSection("End"));
        }
        Ok(file)
    }
}

fn num(tok: &str, line: usize) -> Result<f64, LpError> {
    tok.parse().map_err(|_| LpError::Syntax {
        line,
        message: format!("{tok:?} is not a number"),
    })
}

fn flush(objective: bool, pending: &mut Vec<(usize, String)>, file: &mut LpFile) -> Result<(), LpError> {
    if pending.is_empty() {
        return Ok(());
    }
    let toks = std::mem::take(pending);
    let line = toks[0].0;
    let err = |message: String| LpError::Syntax { line, message };
    let name = toks[0]
        .1
        .strip_suffix(':')
        .ok_or_else(|| err(format!("expected a row name, found {:?}", toks[0].1)))?
        .to_string();
    let mut terms = Vec::new();
    let mut sign = 1.0;
    let mut coef: Option<f64> = None;
    let mut it = toks[1..].iter().map(|(_, t)| t.as_str());
    let mut bound = None;
    while let Some(tok) = it.next() {
        match tok {
            "+" => sign = 1.0,
            "-" => sign = -1.0,
            "<=" | ">=" | "=" => {
                let sense = match tok {
                    "<=" => Sense::Le,
                    ">=" => Sense::Ge,
                    _ => Sense::Eq,
                };
                let rhs = it.next().ok_or_else(|| err("missing right-hand side".into()))?;
                bound = Some((sense, num(rhs, line)?));
                if let Some(extra) = it.next() {
                    return Err(err(format!("trailing token {extra:?}")));
                }
            }
            t if t.starts_with(|c: char| c.is_ascii_digit() || c == '.') => {
                coef = Some(num(t, line)?);
            }
            var => {
                let k = sign * coef.take().unwrap_or(1.0);
                if k != 0.0 {
                    terms.push((var.to_string(), k));
                }
                sign = 1.0;
            }
        }
    }
    if objective {
        file.objective = terms;
        return Ok(());
    }
    let (sense, rhs) = bound.ok_or_else(|| err(format!("row {name} has no sense")))?;
    file.rows.push(LpRow {
        name,
        terms,
        sense,
        rhs,
    });
    Ok(())
}

fn write_expr(out: &mut String, head: &str, terms: &[(String, f64)], bound: Option<(Sense, f64)>) {
    let mut line = head.to_string();
    let mut push = |line: &mut String, piece: &str| {
        if line.len() + piece.len() + 1 > WRAP {
            out.push_str(line);
            out.push('\n');
            *line = "   ".to_string();
        }
        line.push(' ');
        line.push_str(piece);
    };
    if terms.is_empty() {
        // LP syntax needs at least one term; `0 r` keeps the row explicit
        push(&mut line, "0 r");
    }
    for (i, (v, k)) in terms.iter().enumerate() {
        let piece = match (*k == 1.0, *k == -1.0, *k < 0.0, i == 0) {
            (true, _, _, true) => v.clone(),
            (true, _, _, false) => format!("+ {v}"),
            (_, true, _, _) => format!("- {v}"),
            (_, _, true, _) => format!("- {} {v}", -k),
            (_, _, false, true) => format!("{k} {v}"),
            (_, _, false, false) => format!("+ {k} {v}"),
        };
        push(&mut line, &piece);
    }
    if let Some((sense, rhs)) = bound {
        push(&mut line, &format!("{} {rhs}", sense.symbol()));
    }
    out.push_str(&line);
    out.push('\n');
}

fn write_names(out: &mut String, names: &[String]) {
    let mut line = String::new();
    for n in names {
        if line.len() + n.len() + 1 > WRAP {
            out.push_str(&line);
            out.push('\n');
            line.clear();
        }
        line.push(' ');
        line.push_str(n);
    }
    out.push_str(&line);
    out.push('\n');
}

/// Writes `model` to `path` in LP format.
pub fn export_lp(model: &MilpModel, path: impl AsRef<Path>) -> std::io::Result<()> {
    fs::write(path, LpFile::from_model(model).render())
}
