use serde::{Deserialize, Serialize};

use super::mps::{GeneralFormLP, Sense};
use super::StandardFormLP;
use crate::error::{Error, Result};
use crate::linalg::SparseMatrixCSC;

/// How an original variable is rebuilt from standard-form columns.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum ColumnRecovery {
    /// `x = shift + sign · x'[col]`
    Shifted { col: usize, shift: f64, sign: f64 },
    /// `x = x'[pos] − x'[neg]`
    Split { pos: usize, neg: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
enum RowSlack {
    Dropped,
    None,
    /// `Σ + s = hi`
    Le(usize),
    /// `Σ − s = lo`
    Ge(usize),
    /// `Σ − s = lo`, `s + t = hi − lo`
    Range(usize, usize),
}

/// Maps standard-form points back to the original variables.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariableMap {
    pub columns: Vec<ColumnRecovery>,
    /// `+1` for minimisation, `−1` when the original problem maximises.
    pub sense_sign: f64,
    pub n_standard: usize,
    rows: Vec<RowSlack>,
    /// `(original column, slack column)` for each finite upper bound turned into a row.
    upper_rows: Vec<(usize, usize)>,
}

impl VariableMap {
    pub fn recover_x(&self, x_std: &[f64]) -> Vec<f64> {
        self.columns
            .iter()
            .map(|r| match *r {
                ColumnRecovery::Shifted { col, shift, sign } => shift + sign * x_std[col],
                ColumnRecovery::Split { pos, neg } => x_std[pos] - x_std[neg],
            })
            .collect()
    }

    /// Original objective from the reported standard-form objective (which includes the offset).
    pub fn original_objective(&self, standard_objective: f64) -> f64 {
        self.sense_sign * standard_objective
    }

    /// Standard-form point representing a feasible original point, slacks included.
    pub fn lift(&self, g: &GeneralFormLP, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_standard];
        for (r, &v) in self.columns.iter().zip(x) {
            match *r {
                ColumnRecovery::Shifted { col, shift, sign } => out[col] = sign * (v - shift),
                ColumnRecovery::Split { pos, neg } => {
                    out[pos] = v.max(0.0);
                    out[neg] = (-v).max(0.0);
                }
            }
        }
        let act = g.activities(x);
        for ((row, slack), a) in g.rows.iter().zip(&self.rows).zip(act) {
            let (lo, hi) = row.activity_bounds();
            match *slack {
                RowSlack::Le(s) => out[s] = hi - a,
                RowSlack::Ge(s) => out[s] = a - lo,
                RowSlack::Range(s, t) => {
                    out[s] = a - lo;
                    out[t] = hi - a;
                }
                RowSlack::None | RowSlack::Dropped => {}
            }
        }
        for &(j, s) in &self.upper_rows {
            out[s] = g.columns[j].upper - x[j];
        }
        out
    }
}

/// Converts to `min cᵀx s.t. Ax = b, x ≥ 0`.
///
/// Finite lower bounds are shifted to zero, variables with only an upper bound
/// are negated, free variables are split, finite upper bounds become rows with
/// slacks and inequality rows get slacks. A maximisation objective is negated.
pub fn to_standard_form(g: &GeneralFormLP) -> Result<(StandardFormLP, VariableMap)> {
    let sense_sign = match g.sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };
    let mut cost: Vec<f64> = Vec::new();
    let mut constant = g.objective_constant;
    let mut recov = Vec::with_capacity(g.columns.len());
    fn new_col(cost: &mut Vec<f64>, c: f64) -> usize {
        cost.push(c);
        cost.len() - 1
    }
    for col in &g.columns {
        if col.lower > col.upper {
            return Err(Error::InfeasibleBounds {
                name: col.name.clone(),
                lower: col.lower,
                upper: col.upper,
            });
        }
        let r = if col.lower.is_finite() {
            constant += col.cost * col.lower;
            ColumnRecovery::Shifted {
                col: new_col(&mut cost, col.cost),
                shift: col.lower,
                sign: 1.0,
            }
        } else if col.upper.is_finite() {
            constant += col.cost * col.upper;
            ColumnRecovery::Shifted {
                col: new_col(&mut cost, -col.cost),
                shift: col.upper,
                sign: -1.0,
            }
        } else {
            let pos = new_col(&mut cost, col.cost);
            let neg = new_col(&mut cost, -col.cost);
            ColumnRecovery::Split { pos, neg }
        };
        recov.push(r);
    }

    // row-wise assembly of the original rows in the new columns
    let mut row_entries: Vec<Vec<(usize, f64)>> = vec![Vec::new(); g.rows.len()];
    let mut row_shift = vec![0.0; g.rows.len()];
    for &(i, j, v) in &g.entries {
        match recov[j] {
            ColumnRecovery::Shifted { col, shift, sign } => {
                row_entries[i].push((col, sign * v));
                row_shift[i] += v * shift;
            }
            ColumnRecovery::Split { pos, neg } => {
                row_entries[i].push((pos, v));
                row_entries[i].push((neg, -v));
            }
        }
    }

    let mut trip: Vec<(usize, usize, f64)> = Vec::new();
    let mut b = Vec::new();
    let mut slacks = Vec::with_capacity(g.rows.len());
    for (i, row) in g.rows.iter().enumerate() {
        let (lo, hi) = row.activity_bounds();
        if lo > hi {
            return Err(Error::InfeasibleBounds {
                name: row.name.clone(),
                lower: lo,
                upper: hi,
            });
        }
        let (lo, hi) = (lo - row_shift[i], hi - row_shift[i]);
        if !lo.is_finite() && !hi.is_finite() {
            slacks.push(RowSlack::Dropped);
            continue;
        }
        let r = b.len();
        let entries = &row_entries[i];
        if lo == hi {
            if entries.iter().all(|e| e.1 == 0.0) {
                let tolerance = 1e-9 * (1.0 + row_shift[i].abs());
                if lo.abs() > tolerance {
                    return Err(Error::InfeasibleEquality {
                        residual: lo.abs(),
                        tolerance,
                    });
                }
                slacks.push(RowSlack::Dropped);
                continue;
            }
            trip.extend(entries.iter().map(|&(j, v)| (r, j, v)));
            b.push(lo);
            slacks.push(RowSlack::None);
        } else if !lo.is_finite() {
            trip.extend(entries.iter().map(|&(j, v)| (r, j, v)));
            let s = new_col(&mut cost, 0.0);
            trip.push((r, s, 1.0));
            b.push(hi);
            slacks.push(RowSlack::Le(s));
        } else {
            trip.extend(entries.iter().map(|&(j, v)| (r, j, v)));
            let s = new_col(&mut cost, 0.0);
            trip.push((r, s, -1.0));
            b.push(lo);
            if hi.is_finite() {
                let t = new_col(&mut cost, 0.0);
                let r2 = b.len();
                trip.push((r2, s, 1.0));
                trip.push((r2, t, 1.0));
                b.push(hi - lo);
                slacks.push(RowSlack::Range(s, t));
            } else {
                slacks.push(RowSlack::Ge(s));
            }
        }
    }

    let mut upper_rows = Vec::new();
    for (j, col) in g.columns.iter().enumerate() {
        if col.lower.is_finite() && col.upper.is_finite() {
            if let ColumnRecovery::Shifted { col: k, .. } = recov[j] {
                let r = b.len();
                let t = new_col(&mut cost, 0.0);
                trip.push((r, k, 1.0));
                trip.push((r, t, 1.0));
                b.push(col.upper - col.lower);
                upper_rows.push((j, t));
            }
        }
    }

    if b.is_empty() {
        return Err(Error::DegenerateInstance(
            "no constraints remain after conversion".into(),
        ));
    }
    let n = cost.len();
    let a = SparseMatrixCSC::from_triplets(b.len(), n, &trip)?;
    let c: Vec<f64> = cost.iter().map(|v| sense_sign * v).collect();
    let name = if g.name.is_empty() { "mps".to_string() } else { g.name.clone() };
    let lp = StandardFormLP::new(name, a, b, c)?.with_offset(sense_sign * constant);
    let map = VariableMap {
        columns: recov,
        sense_sign,
        n_standard: n,
        rows: slacks,
        upper_rows,
    };
    Ok((lp, map))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::mps::RowKind;

    const INF: f64 = f64::INFINITY;

    #[test]
    fn single_le_row_gets_slack() {
        let mut g = GeneralFormLP::new("t", Sense::Minimize);
        let r = g.add_row("r", RowKind::Le, 1.0);
        let x1 = g.add_column("x1", 0.0, 0.0, INF);
        let x2 = g.add_column("x2", 0.0, 0.0, INF);
        g.entries = vec![(r, x1, 1.0), (r, x2, 1.0)];
        let (lp, _) = to_standard_form(&g).unwrap();
        assert_eq!(lp.a().to_dmatrix().row(0).iter().cloned().collect::<Vec<_>>(), vec![1.0, 1.0, 1.0]);
        assert_eq!(lp.b(), &[1.0]);
    }

    #[test]
    fn free_variable_split() {
        let mut g = GeneralFormLP::new("t", Sense::Minimize);
        let r = g.add_row("r", RowKind::Eq, 1.0);
        let y = g.add_column("y", 1.0, -INF, INF);
        g.entries = vec![(r, y, 2.0)];
        let (lp, map) = to_standard_form(&g).unwrap();
        assert_eq!(lp.c(), &[1.0, -1.0]);
        let row: Vec<f64> = lp.a().to_dmatrix().row(0).iter().cloned().collect();
        assert_eq!(row, vec![2.0, -2.0]);
        assert_eq!(map.recover_x(&[0.0, 3.0]), vec![-3.0]);
    }

    #[test]
    fn lower_bound_shift() {
        let mut g = GeneralFormLP::new("t", Sense::Minimize);
        let r = g.add_row("r", RowKind::Eq, 7.0);
        let x = g.add_column("x", 3.0, 2.0, INF);
        g.entries = vec![(r, x, 1.5)];
        let (lp, map) = to_standard_form(&g).unwrap();
        assert_eq!(lp.b(), &[7.0 - 2.0 * 1.5]);
        assert_eq!(lp.objective_offset(), 6.0);
        let xs = [4.0 / 1.5];
        let x = map.recover_x(&xs);
        assert!((x[0] - (2.0 + 4.0 / 1.5)).abs() < 1e-15);
        assert!((map.original_objective(lp.objective(&xs)) - g.objective(&x)).abs() < 1e-12);
    }

    #[test]
    fn maximisation_and_upper_only_bound() {
        let mut g = GeneralFormLP::new("t", Sense::Maximize);
        let r = g.add_row("r", RowKind::Ge, -5.0);
        let x = g.add_column("x", 2.0, -INF, 4.0);
        g.entries = vec![(r, x, 1.0)];
        let (lp, map) = to_standard_form(&g).unwrap();
        // x = 4 − x', x' ≥ 0; max 2x ⇒ min −8 + 2x'
        assert_eq!(lp.c()[0], 2.0);
        assert_eq!(lp.objective_offset(), -8.0);
        let xs = map.lift(&g, &[1.0]);
        assert!((map.original_objective(lp.objective(&xs)) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn ranged_and_boxed() {
        let mut g = GeneralFormLP::new("t", Sense::Minimize);
        let r = g.add_row("r", RowKind::Eq, 1.0);
        g.rows[r].range = Some(2.0);
        let x = g.add_column("x", 1.0, -1.0, 5.0);
        g.entries = vec![(r, x, 1.0)];
        let (lp, map) = to_standard_form(&g).unwrap();
        // range row, its slack-box row, and the upper bound row
        assert_eq!(lp.m(), 3);
        for &x0 in &[1.0, 2.0, 3.0] {
            let xs = map.lift(&g, &[x0]);
            let ax = lp.a().matvec(&xs).unwrap();
            for (u, v) in ax.iter().zip(lp.b()) {
                assert!((u - v).abs() < 1e-12);
            }
            assert!(xs.iter().all(|v| *v >= 0.0));
            assert_eq!(map.recover_x(&xs), vec![x0]);
        }
    }

    #[test]
    fn empty_equality_rows() {
        let mut g = GeneralFormLP::new("t", Sense::Minimize);
        g.add_row("empty", RowKind::Eq, 0.0);
        let r = g.add_row("r", RowKind::Eq, 1.0);
        let x = g.add_column("x", 1.0, 0.0, INF);
        g.entries = vec![(r, x, 1.0)];
        let (lp, _) = to_standard_form(&g).unwrap();
        assert_eq!(lp.m(), 1);
        g.rows[0].rhs = 1.0;
        assert!(matches!(to_standard_form(&g), Err(Error::InfeasibleEquality { .. })));
    }
}
