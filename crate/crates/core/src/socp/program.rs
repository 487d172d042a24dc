//! Standard-form conic programs.
//!
//! A program is `minimize c'z subject to A z + s = b, s in K`, where `K` is
//! an ordered product of zero, nonnegative and second-order cones. A
//! second-order block `(t, u)` means `||u||_2 <= t`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::SolverError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConeKind {
    Zero,
    Nonneg,
    SecondOrder,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cone {
    pub kind: ConeKind,
    pub dim: usize,
}

impl Cone {
    pub fn zero(dim: usize) -> Self {
        Self { kind: ConeKind::Zero, dim }
    }

    pub fn nonneg(dim: usize) -> Self {
        Self { kind: ConeKind::Nonneg, dim }
    }

    pub fn second_order(dim: usize) -> Self {
        Self { kind: ConeKind::SecondOrder, dim }
    }
}

/// Row-major sparse matrix. Each row holds `(column, value)` pairs with
/// strictly increasing columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseMatrix {
    ncols: usize,
    rows: Vec<Vec<(usize, f64)>>,
}

impl SparseMatrix {
    pub fn new(ncols: usize) -> Self {
        Self { ncols, rows: Vec::new() }
    }

    pub fn from_dense(rows: &[Vec<f64>], ncols: usize) -> Self {
        let mut m = Self::new(ncols);
        for r in rows {
            m.push_row(r.iter().copied().enumerate().filter(|(_, v)| *v != 0.0));
        }
        m
    }

    /// Appends a row. Duplicate columns are summed and explicit zeros dropped.
    pub fn push_row<I: IntoIterator<Item = (usize, f64)>>(&mut self, entries: I) {
        let mut row: Vec<(usize, f64)> = entries.into_iter().collect();
        row.sort_by_key(|e| e.0);
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(row.len());
        for (c, v) in row {
            match merged.last_mut() {
                Some(last) if last.0 == c => last.1 += v,
                _ => merged.push((c, v)),
            }
        }
        merged.retain(|e| e.1 != 0.0);
        self.rows.push(merged);
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[(usize, f64)]> {
        self.rows.iter().map(Vec::as_slice)
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    /// `out = A x`
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        self.rows.iter().map(|r| r.iter().map(|&(c, v)| v * x[c]).sum()).collect()
    }

    /// `out = A' y`
    pub fn tr_mul_vec(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.ncols];
        for (r, &yi) in self.rows.iter().zip(y) {
            if yi == 0.0 {
                continue;
            }
            for &(c, v) in r {
                out[c] += v * yi;
            }
        }
        out
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        self.rows
            .iter()
            .map(|r| {
                let mut d = vec![0.0; self.ncols];
                for &(c, v) in r {
                    d[c] = v;
                }
                d
            })
            .collect()
    }

    fn scale_row(&mut self, i: usize, f: f64) {
        for e in &mut self.rows[i] {
            e.1 *= f;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConicProgram {
    pub c: Vec<f64>,
    pub a: SparseMatrix,
    pub b: Vec<f64>,
    pub cones: Vec<Cone>,
}

impl ConicProgram {
    pub fn n_var(&self) -> usize {
        self.c.len()
    }

    pub fn n_con(&self) -> usize {
        self.b.len()
    }

    /// Checks dimensions, cone sizes and finiteness of the data.
    pub fn validate(&self) -> Result<(), SolverError> {
        let malformed = |msg: String| Err(SolverError::MalformedProgram(msg));
        if self.a.ncols() != self.c.len() {
            return malformed(format!("A has {} columns but c has length {}", self.a.ncols(), self.c.len()));
        }
        if self.a.nrows() != self.b.len() {
            return malformed(format!("A has {} rows but b has length {}", self.a.nrows(), self.b.len()));
        }
        let total = self.cones.iter().fold(0usize, |t, k| t.saturating_add(k.dim));
        if total != self.b.len() {
            return malformed(format!("cone dimensions sum to {total} but there are {} constraints", self.b.len()));
        }
        if let Some(k) = self.cones.iter().find(|k| k.dim == 0) {
            return malformed(format!("{:?} cone with zero dimension", k.kind));
        }
        if self.c.iter().chain(&self.b).any(|v| !v.is_finite())
            || self.a.rows().flatten().any(|e| !e.1.is_finite() || e.0 >= self.c.len())
        {
            return malformed("non-finite entry or column index out of range".into());
        }
        Ok(())
    }

    /// Returns a copy with the objective multiplied by `factor`.
    pub fn with_scaled_objective(&self, factor: f64) -> Self {
        let mut p = self.clone();
        p.c.iter_mut().for_each(|v| *v *= factor);
        p
    }

    /// Returns a copy where every row belonging to a zero or nonnegative
    /// cone is multiplied by `factors[i]` (positive). Second-order rows keep
    /// their scale. Useful for testing invariance properties.
    pub fn with_scaled_linear_rows(&self, factors: &[f64]) -> Self {
        let mut p = self.clone();
        let mut row = 0;
        for k in &self.cones {
            for _ in 0..k.dim {
                if k.kind != ConeKind::SecondOrder {
                    p.a.scale_row(row, factors[row]);
                    p.b[row] *= factors[row];
                }
                row += 1;
            }
        }
        p
    }

    /// Plain-text dump, one line per constraint row.
    ///
    /// ```text
    /// conic-program v1
    /// n_var 2 n_con 3
    /// c 1 0
    /// cones zero:1 soc:2
    /// row 1 0:1 1:1
    /// ...
    /// ```
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str("conic-program v1\n");
        let _ = writeln!(out, "n_var {} n_con {}", self.n_var(), self.n_con());
        out.push('c');
        for v in &self.c {
            let _ = write!(out, " {v:?}");
        }
        out.push('\n');
        out.push_str("cones");
        for k in &self.cones {
            let tag = match k.kind {
                ConeKind::Zero => "zero",
                ConeKind::Nonneg => "nonneg",
                ConeKind::SecondOrder => "soc",
            };
            let _ = write!(out, " {tag}:{}", k.dim);
        }
        out.push('\n');
        for (i, r) in self.a.rows().enumerate() {
            let _ = write!(out, "row {:?}", self.b[i]);
            for &(c, v) in r {
                let _ = write!(out, " {c}:{v:?}");
            }
            out.push('\n');
        }
        out
    }

    /// Parses the format written by [`ConicProgram::to_text`].
    pub fn from_text(text: &str) -> Result<Self, SolverError> {
        let bad = |line: usize, msg: &str| SolverError::Parse { line, msg: msg.to_string() };
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

        let (ln, header) = lines.next().ok_or_else(|| bad(0, "empty input"))?;
        if header != "conic-program v1" {
            return Err(bad(ln, "missing `conic-program v1` header"));
        }

        let (ln, dims) = lines.next().ok_or_else(|| bad(ln, "missing dimensions"))?;
        let toks: Vec<&str> = dims.split_whitespace().collect();
        if toks.len() != 4 || toks[0] != "n_var" || toks[2] != "n_con" {
            return Err(bad(ln, "expected `n_var <n> n_con <m>`"));
        }
        let n_var: usize = toks[1].parse().map_err(|_| bad(ln, "bad n_var"))?;
        let n_con: usize = toks[3].parse().map_err(|_| bad(ln, "bad n_con"))?;

        let (ln, cline) = lines.next().ok_or_else(|| bad(ln, "missing objective"))?;
        let mut toks = cline.split_whitespace();
        if toks.next() != Some("c") {
            return Err(bad(ln, "expected objective line starting with `c`"));
        }
        let c: Vec<f64> =
            toks.map(|t| t.parse::<f64>().map_err(|_| bad(ln, "bad objective entry"))).collect::<Result<_, _>>()?;
        if c.len() != n_var {
            return Err(bad(ln, "objective length differs from n_var"));
        }

        let (ln, kline) = lines.next().ok_or_else(|| bad(ln, "missing cones"))?;
        let mut toks = kline.split_whitespace();
        if toks.next() != Some("cones") {
            return Err(bad(ln, "expected cone line starting with `cones`"));
        }
        let mut cones = Vec::new();
        for t in toks {
            let (tag, dim) = t.split_once(':').ok_or_else(|| bad(ln, "bad cone token"))?;
            let dim: usize = dim.parse().map_err(|_| bad(ln, "bad cone dimension"))?;
            let kind = match tag {
                "zero" => ConeKind::Zero,
                "nonneg" => ConeKind::Nonneg,
                "soc" => ConeKind::SecondOrder,
                _ => return Err(bad(ln, "unknown cone kind")),
            };
            cones.push(Cone { kind, dim });
        }

        let mut a = SparseMatrix::new(n_var);
        let mut b = Vec::with_capacity(n_con.min(1 << 16));
        for (ln, rline) in lines {
            let mut toks = rline.split_whitespace();
            if toks.next() != Some("row") {
                return Err(bad(ln, "expected `row`"));
            }
            let bi: f64 = toks
                .next()
                .ok_or_else(|| bad(ln, "missing right-hand side"))?
                .parse()
                .map_err(|_| bad(ln, "bad right-hand side"))?;
            let mut entries = Vec::new();
            for t in toks {
                let (col, val) = t.split_once(':').ok_or_else(|| bad(ln, "bad entry"))?;
                let col: usize = col.parse().map_err(|_| bad(ln, "bad column"))?;
                let val: f64 = val.parse().map_err(|_| bad(ln, "bad value"))?;
                if col >= n_var {
                    return Err(bad(ln, "column out of range"));
                }
                entries.push((col, val));
            }
            a.push_row(entries);
            b.push(bi);
        }
        if b.len() != n_con {
            return Err(bad(0, "row count differs from n_con"));
        }
        let prog = ConicProgram { c, a, b, cones };
        prog.validate()?;
        Ok(prog)
    }
}
