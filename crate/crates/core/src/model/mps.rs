//! MPS reader for the LP subset: NAME, OBJSENSE, ROWS, COLUMNS, RHS, RANGES,
//! BOUNDS, ENDATA. Integer markers are skipped, so a MIP file yields its
//! LP relaxation.

use std::collections::HashMap;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RowKind {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub name: String,
    pub kind: RowKind,
    pub rhs: f64,
    pub range: Option<f64>,
}

impl Row {
    /// `(lower, upper)` on the row activity, after applying RANGES.
    pub fn activity_bounds(&self) -> (f64, f64) {
        let inf = f64::INFINITY;
        match (self.kind, self.range) {
            (RowKind::Eq, None) => (self.rhs, self.rhs),
            (RowKind::Le, None) => (-inf, self.rhs),
            (RowKind::Ge, None) => (self.rhs, inf),
            (RowKind::Le, Some(r)) => (self.rhs - r.abs(), self.rhs),
            (RowKind::Ge, Some(r)) => (self.rhs, self.rhs + r.abs()),
            (RowKind::Eq, Some(r)) if r >= 0.0 => (self.rhs, self.rhs + r),
            (RowKind::Eq, Some(r)) => (self.rhs + r, self.rhs),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Column {
    pub name: String,
    pub cost: f64,
    pub lower: f64,
    pub upper: f64,
}

/// `min/max costᵀx + objective_constant` over general rows and bounds.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneralFormLP {
    pub name: String,
    pub sense: Sense,
    pub objective_constant: f64,
    pub rows: Vec<Row>,
    pub columns: Vec<Column>,
    /// `(row, column, value)`, one entry per pair.
    pub entries: Vec<(usize, usize, f64)>,
}

impl GeneralFormLP {
    pub fn new(name: impl Into<String>, sense: Sense) -> Self {
        GeneralFormLP {
            name: name.into(),
            sense,
            objective_constant: 0.0,
            rows: Vec::new(),
            columns: Vec::new(),
            entries: Vec::new(),
        }
    }

    pub fn add_row(&mut self, name: &str, kind: RowKind, rhs: f64) -> usize {
        self.rows.push(Row {
            name: name.to_string(),
            kind,
            rhs,
            range: None,
        });
        self.rows.len() - 1
    }

    pub fn add_column(&mut self, name: &str, cost: f64, lower: f64, upper: f64) -> usize {
        self.columns.push(Column {
            name: name.to_string(),
            cost,
            lower,
            upper,
        });
        self.columns.len() - 1
    }

    pub fn row_index(&self, name: &str) -> Option<usize> {
        self.rows.iter().position(|r| r.name == name)
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    /// Objective value of an original-space point.
    pub fn objective(&self, x: &[f64]) -> f64 {
        self.objective_constant
            + self
                .columns
                .iter()
                .zip(x)
                .map(|(c, v)| c.cost * v)
                .sum::<f64>()
    }

    /// Row activities `Σ_j a_ij x_j`.
    pub fn activities(&self, x: &[f64]) -> Vec<f64> {
        let mut act = vec![0.0; self.rows.len()];
        for &(i, j, v) in &self.entries {
            act[i] += v * x[j];
        }
        act
    }

    /// Largest violation of rows and bounds at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (row, a) in self.rows.iter().zip(self.activities(x)) {
            let (lo, hi) = row.activity_bounds();
            worst = worst.max(lo - a).max(a - hi);
        }
        for (col, v) in self.columns.iter().zip(x) {
            worst = worst.max(col.lower - v).max(v - col.upper);
        }
        worst
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Section {
    None,
    ObjSense,
    Rows,
    Columns,
    Rhs,
    Ranges,
    Bounds,
    End,
}

struct Parser {
    lp: GeneralFormLP,
    objective_row: Option<String>,
    row_lookup: HashMap<String, usize>,
    col_lookup: HashMap<String, usize>,
    seen: HashMap<(usize, usize), ()>,
    seen_cost: HashMap<usize, ()>,
    bounds_touched: Vec<bool>,
}

fn perr(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn number(tok: &str, line: usize) -> Result<f64> {
    let v: f64 = tok
        .parse()
        .map_err(|_| perr(line, format!("expected a number, found `{tok}`")))?;
    if v.is_nan() {
        return Err(perr(line, "NaN is not a valid value"));
    }
    Ok(v)
}

impl Parser {
    fn new() -> Self {
        Parser {
            lp: GeneralFormLP::new("", Sense::Minimize),
            objective_row: None,
            row_lookup: HashMap::new(),
            col_lookup: HashMap::new(),
            seen: HashMap::new(),
            seen_cost: HashMap::new(),
            bounds_touched: Vec::new(),
        }
    }

    fn row_entry(&mut self, line: usize, col: usize, row: &str, val: f64) -> Result<()> {
        if self.objective_row.as_deref() == Some(row) {
            if self.seen_cost.insert(col, ()).is_some() {
                return Err(perr(line, format!("duplicate objective entry for column `{}`", self.lp.columns[col].name)));
            }
            self.lp.columns[col].cost = val;
            return Ok(());
        }
        let i = *self
            .row_lookup
            .get(row)
            .ok_or_else(|| perr(line, format!("undeclared row `{row}`")))?;
        if self.seen.insert((i, col), ()).is_some() {
            return Err(perr(
                line,
                format!("duplicate entry for row `{row}`, column `{}`", self.lp.columns[col].name),
            ));
        }
        if val != 0.0 {
            self.lp.entries.push((i, col, val));
        }
        Ok(())
    }

    fn rows_line(&mut self, line: usize, f: &[&str]) -> Result<()> {
        if f.len() != 2 {
            return Err(perr(line, "ROWS lines need a type and a name"));
        }
        let name = f[1].to_string();
        let kind = match f[0].to_ascii_uppercase().as_str() {
            "N" => {
                // the first free row is the objective; later ones are ignored
                if self.objective_row.is_none() {
                    self.objective_row = Some(name);
                }
                return Ok(());
            }
            "E" => RowKind::Eq,
            "L" => RowKind::Le,
            "G" => RowKind::Ge,
            other => return Err(perr(line, format!("unknown row type `{other}`"))),
        };
        if self.row_lookup.contains_key(&name) || self.objective_row.as_deref() == Some(&name) {
            return Err(perr(line, format!("row `{name}` declared twice")));
        }
        let i = self.lp.add_row(&name, kind, 0.0);
        self.row_lookup.insert(name, i);
        Ok(())
    }

    fn columns_line(&mut self, line: usize, f: &[&str]) -> Result<()> {
        if f.len() >= 2 && f[1].trim_matches('\'').eq_ignore_ascii_case("MARKER") {
            return Ok(());
        }
        if f.len() != 3 && f.len() != 5 {
            return Err(perr(line, "COLUMNS lines need a column and one or two (row, value) pairs"));
        }
        let col = match self.col_lookup.get(f[0]) {
            Some(&j) => {
                if j + 1 != self.lp.columns.len() {
                    return Err(perr(line, format!("entries for column `{}` are not contiguous", f[0])));
                }
                j
            }
            None => {
                let j = self.lp.add_column(f[0], 0.0, 0.0, f64::INFINITY);
                self.col_lookup.insert(f[0].to_string(), j);
                self.bounds_touched.push(false);
                j
            }
        };
        for pair in f[1..].chunks(2) {
            let v = number(pair[1], line)?;
            self.row_entry(line, col, pair[0], v)?;
        }
        Ok(())
    }

    /// The set name is optional in RHS and RANGES lines; an odd token count means it is present.
    fn pairs<'a>(f: &'a [&'a str], line: usize, section: &str) -> Result<&'a [&'a str]> {
        let rest = if f.len() % 2 == 1 { &f[1..] } else { f };
        if rest.is_empty() || rest.len() > 4 {
            return Err(perr(line, format!("malformed {section} line")));
        }
        Ok(rest)
    }

    fn rhs_line(&mut self, line: usize, f: &[&str]) -> Result<()> {
        for pair in Self::pairs(f, line, "RHS")?.chunks(2) {
            let v = number(pair[1], line)?;
            if self.objective_row.as_deref() == Some(pair[0]) {
                self.lp.objective_constant = -v;
                continue;
            }
            let i = *self
                .row_lookup
                .get(pair[0])
                .ok_or_else(|| perr(line, format!("undeclared row `{}`", pair[0])))?;
            self.lp.rows[i].rhs = v;
        }
        Ok(())
    }

    fn ranges_line(&mut self, line: usize, f: &[&str]) -> Result<()> {
        for pair in Self::pairs(f, line, "RANGES")?.chunks(2) {
            let v = number(pair[1], line)?;
            let i = *self
                .row_lookup
                .get(pair[0])
                .ok_or_else(|| perr(line, format!("undeclared row `{}`", pair[0])))?;
            self.lp.rows[i].range = Some(v);
        }
        Ok(())
    }

    fn bounds_line(&mut self, line: usize, f: &[&str]) -> Result<()> {
        if f.is_empty() {
            return Ok(());
        }
        let key = f[0].to_ascii_uppercase();
        let needs_value = match key.as_str() {
            "LO" | "UP" | "FX" => true,
            "FR" | "MI" | "PL" | "BV" => false,
            other => return Err(perr(line, format!("unknown bound type `{other}`"))),
        };
        let (col_name, value) = match (needs_value, f.len()) {
            (true, 3) => (f[1], Some(number(f[2], line)?)),
            (true, 4) => (f[2], Some(number(f[3], line)?)),
            (false, 2) => (f[1], None),
            (false, 3) if key == "BV" => {
                // `BV col value` and `BV set col` are both in use; prefer the latter when the last token is not numeric
                if f[2].parse::<f64>().is_ok() && self.col_lookup.contains_key(f[1]) {
                    (f[1], None)
                } else {
                    (f[2], None)
                }
            }
            (false, 3) => (f[2], None),
            (false, 4) if key == "BV" => (f[2], None),
            _ => return Err(perr(line, format!("malformed {key} bound line"))),
        };
        let j = *self
            .col_lookup
            .get(col_name)
            .ok_or_else(|| perr(line, format!("undeclared column `{col_name}`")))?;
        let col = &mut self.lp.columns[j];
        let inf = f64::INFINITY;
        match key.as_str() {
            "LO" => col.lower = value.unwrap(),
            "UP" => {
                let v = value.unwrap();
                // usual MPS convention: a negative upper bound on a default-bounded variable frees its lower side
                if v < 0.0 && col.lower == 0.0 && !self.bounds_touched[j] {
                    col.lower = -inf;
                }
                col.upper = v;
            }
            "FX" => {
                let v = value.unwrap();
                col.lower = v;
                col.upper = v;
            }
            "FR" => {
                col.lower = -inf;
                col.upper = inf;
            }
            "MI" => col.lower = -inf,
            "PL" => col.upper = inf,
            "BV" => {
                col.lower = 0.0;
                col.upper = 1.0;
            }
            _ => unreachable!(),
        }
        self.bounds_touched[j] = true;
        Ok(())
    }

    fn finish(self) -> Result<GeneralFormLP> {
        for c in &self.lp.columns {
            if c.lower > c.upper {
                return Err(Error::InfeasibleBounds {
                    name: c.name.clone(),
                    lower: c.lower,
                    upper: c.upper,
                });
            }
        }
        Ok(self.lp)
    }
}

fn parse_with<'a>(text: &'a str, split: impl Fn(&'a str) -> Vec<&'a str>) -> Result<GeneralFormLP> {
    let mut p = Parser::new();
    let mut section = Section::None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim_end();
        if trimmed.trim().is_empty() || trimmed.starts_with('*') {
            continue;
        }
        if !raw.starts_with(' ') && !raw.starts_with('\t') {
            let mut it = trimmed.split_whitespace();
            let head = it.next().unwrap().to_ascii_uppercase();
            section = match head.as_str() {
                "NAME" => {
                    p.lp.name = it.collect::<Vec<_>>().join(" ");
                    Section::None
                }
                "OBJSENSE" => match it.next().map(|s| s.to_ascii_uppercase()) {
                    Some(s) => {
                        p.lp.sense = sense_word(&s, line)?;
                        Section::None
                    }
                    None => Section::ObjSense,
                },
                "ROWS" => Section::Rows,
                "COLUMNS" => Section::Columns,
                "RHS" => Section::Rhs,
                "RANGES" => Section::Ranges,
                "BOUNDS" => Section::Bounds,
                "ENDATA" => Section::End,
                other => return Err(perr(line, format!("unknown section `{other}`"))),
            };
            if section == Section::End {
                break;
            }
            continue;
        }
        let f = split(raw);
        match section {
            Section::ObjSense => {
                p.lp.sense = sense_word(&f[0].to_ascii_uppercase(), line)?;
            }
            Section::Rows => p.rows_line(line, &f)?,
            Section::Columns => p.columns_line(line, &f)?,
            Section::Rhs => p.rhs_line(line, &f)?,
            Section::Ranges => p.ranges_line(line, &f)?,
            Section::Bounds => p.bounds_line(line, &f)?,
            Section::None => return Err(perr(line, "data line outside of a section")),
            Section::End => unreachable!(),
        }
    }
    if p.objective_row.is_none() && p.lp.rows.is_empty() {
        return Err(perr(0, "no ROWS section"));
    }
    p.finish()
}

fn sense_word(s: &str, line: usize) -> Result<Sense> {
    match s {
        "MIN" | "MINIMIZE" => Ok(Sense::Minimize),
        "MAX" | "MAXIMIZE" => Ok(Sense::Maximize),
        other => Err(perr(line, format!("unknown objective sense `{other}`"))),
    }
}

/// Free-format MPS: fields are whitespace separated, names contain no spaces.
/// Fixed-format files whose names have no embedded blanks parse identically.
pub fn parse_mps(text: &str) -> Result<GeneralFormLP> {
    parse_with(text, |l| l.split_whitespace().collect())
}

/// Fixed-format MPS with the classic field columns 2-3, 5-12, 15-22, 25-36, 40-47, 50-61.
pub fn parse_mps_fixed(text: &str) -> Result<GeneralFormLP> {
    const FIELDS: [(usize, usize); 6] = [(1, 3), (4, 12), (14, 22), (24, 36), (39, 47), (49, 61)];
    parse_with(text, |l| {
        let bytes = l.len();
        let mut out = Vec::new();
        for (k, &(s, e)) in FIELDS.iter().enumerate() {
            if s >= bytes {
                break;
            }
            let tok = l.get(s..e.min(bytes)).unwrap_or("").trim();
            // the type field is empty in COLUMNS, RHS and RANGES lines
            if tok.is_empty() && k == 0 {
                continue;
            }
            if !tok.is_empty() {
                out.push(tok);
            }
        }
        out
    })
}
