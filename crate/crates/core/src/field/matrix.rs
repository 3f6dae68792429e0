use std::fmt;

use super::{PrimeField, Symbol};
use crate::error::{Error, Result};

/// Dense row-major matrix over a prime field.
///
/// Vectors multiply from the left (`x·M`), matching the convention that
/// column `j` holds the coefficients of the `j`-th linear function.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Matrix {
    field: PrimeField,
    rows: usize,
    cols: usize,
    data: Vec<Symbol>,
}

impl Matrix {
    pub fn new(field: PrimeField, rows: usize, cols: usize, data: Vec<Symbol>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::LengthMismatch {
                left: data.len(),
                right: rows * cols,
            });
        }
        if let Some(&bad) = data.iter().find(|&&s| !field.contains(s)) {
            return Err(Error::SymbolOutOfRange {
                symbol: bad,
                q: field.q(),
            });
        }
        Ok(Matrix {
            field,
            rows,
            cols,
            data,
        })
    }

    pub fn zeros(field: PrimeField, rows: usize, cols: usize) -> Self {
        Matrix {
            field,
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(field: PrimeField, n: usize) -> Self {
        let mut m = Matrix::zeros(field, n, n);
        for i in 0..n {
            m.set(i, i, 1 % field.q());
        }
        m
    }

    pub fn from_rows(field: PrimeField, rows: &[Vec<Symbol>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some(r) = rows.iter().find(|r| r.len() != cols) {
            return Err(Error::LengthMismatch {
                left: r.len(),
                right: cols,
            });
        }
        Matrix::new(field, rows.len(), cols, rows.concat())
    }

    /// Builds a matrix whose columns are the given vectors (each of length `rows`).
    pub fn from_columns(field: PrimeField, rows: usize, columns: &[Vec<Symbol>]) -> Result<Self> {
        let mut m = Matrix::zeros(field, rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            if col.len() != rows {
                return Err(Error::LengthMismatch {
                    left: col.len(),
                    right: rows,
                });
            }
            for (i, &v) in col.iter().enumerate() {
                if !field.contains(v) {
                    return Err(Error::SymbolOutOfRange {
                        symbol: v,
                        q: field.q(),
                    });
                }
                m.set(i, j, v);
            }
        }
        Ok(m)
    }

    #[inline]
    pub fn field(&self) -> PrimeField {
        self.field
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Symbol {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: Symbol) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[Symbol] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<Symbol> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0)
    }

    /// `x·M`; `x` must have `rows` entries.
    pub fn vec_mul(&self, x: &[Symbol]) -> Vec<Symbol> {
        let mut out = vec![0; self.cols];
        self.vec_mul_into(x, &mut out);
        out
    }

    pub fn vec_mul_into(&self, x: &[Symbol], out: &mut [Symbol]) {
        debug_assert_eq!(x.len(), self.rows);
        debug_assert_eq!(out.len(), self.cols);
        let f = self.field;
        out.iter_mut().for_each(|o| *o = 0);
        for (r, &xr) in x.iter().enumerate() {
            if xr == 0 {
                continue;
            }
            for (o, &m) in out.iter_mut().zip(self.row(r)) {
                *o = f.add(*o, f.mul(xr, m));
            }
        }
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        if self.field != other.field {
            return Err(Error::DimensionMismatch(
                "matrices over different fields".into(),
            ));
        }
        let mut out = Matrix::zeros(self.field, self.rows, other.cols);
        for r in 0..self.rows {
            let row = other.vec_mul(self.row(r));
            out.data[r * other.cols..(r + 1) * other.cols].copy_from_slice(&row);
        }
        Ok(out)
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.field, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c));
            }
        }
        t
    }

    /// Concatenates matrices with equal row counts side by side.
    pub fn hstack(field: PrimeField, rows: usize, parts: &[Matrix]) -> Result<Matrix> {
        let cols: usize = parts.iter().map(Matrix::cols).sum();
        let mut out = Matrix::zeros(field, rows, cols);
        let mut offset = 0;
        for p in parts {
            if p.rows != rows {
                return Err(Error::LengthMismatch {
                    left: p.rows,
                    right: rows,
                });
            }
            for r in 0..rows {
                for c in 0..p.cols {
                    out.set(r, offset + c, p.get(r, c));
                }
            }
            offset += p.cols;
        }
        Ok(out)
    }

    /// Reduced row echelon form in place; returns the pivot columns.
    fn rref(&mut self) -> Vec<usize> {
        let f = self.field;
        let mut pivots = Vec::new();
        let mut lead = 0;
        for c in 0..self.cols {
            if lead == self.rows {
                break;
            }
            let Some(p) = (lead..self.rows).find(|&r| self.get(r, c) != 0) else {
                continue;
            };
            if p != lead {
                for k in 0..self.cols {
                    self.data.swap(p * self.cols + k, lead * self.cols + k);
                }
            }
            let inv = f.inv(self.get(lead, c)).expect("pivot is nonzero");
            for k in 0..self.cols {
                let v = f.mul(self.get(lead, k), inv);
                self.set(lead, k, v);
            }
            for r in 0..self.rows {
                let factor = self.get(r, c);
                if r == lead || factor == 0 {
                    continue;
                }
                for k in 0..self.cols {
                    let v = f.sub(self.get(r, k), f.mul(factor, self.get(lead, k)));
                    self.set(r, k, v);
                }
            }
            pivots.push(c);
            lead += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        self.clone().rref().len()
    }

    /// Basis of the left null space `{s : s·M = 0}`; each vector has `rows` entries.
    pub fn left_null_space(&self) -> Vec<Vec<Symbol>> {
        let f = self.field;
        let mut t = self.transpose();
        let pivots = t.rref();
        let n = self.rows;
        let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&fc| {
                let mut v = vec![0; n];
                v[fc] = 1 % f.q();
                for (pr, &pc) in pivots.iter().enumerate() {
                    v[pc] = f.neg(t.get(pr, fc));
                }
                v
            })
            .collect()
    }

    /// Parses the plain-text matrix format: a header line `q rows cols`
    /// followed by `rows` lines of space-separated symbols. Blank lines and
    /// `#` comments are ignored.
    pub fn parse(text: &str) -> Result<Matrix> {
        let mut lines = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .filter(|l| !l.is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Format("empty matrix file".into()))?;
        let nums: Vec<usize> = header
            .split_whitespace()
            .map(|t| {
                t.parse()
                    .map_err(|_| Error::Format(format!("bad header {header:?}")))
            })
            .collect::<Result<_>>()?;
        let [q, rows, cols] = nums[..] else {
            return Err(Error::Format(format!(
                "header must be `q rows cols`, got {header:?}"
            )));
        };
        let field = PrimeField::new(q as u32)?;
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            let line = lines
                .next()
                .ok_or_else(|| Error::Format(format!("missing row {}", r + 1)))?;
            let row: Vec<Symbol> = line
                .split_whitespace()
                .map(|t| {
                    t.parse()
                        .map_err(|_| Error::Format(format!("bad symbol {t:?}")))
                })
                .collect::<Result<_>>()?;
            if row.len() != cols {
                return Err(Error::Format(format!(
                    "row {} has {} entries, expected {cols}",
                    r + 1,
                    row.len()
                )));
            }
            data.extend(row);
        }
        if let Some(extra) = lines.next() {
            return Err(Error::Format(format!("trailing content {extra:?}")));
        }
        Matrix::new(field, rows, cols, data)
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} {} {}", self.field.q(), self.rows, self.cols)?;
        for r in 0..self.rows {
            let row: Vec<String> = self.row(r).iter().map(|v| v.to_string()).collect();
            writeln!(f, "{}", row.join(" "))?;
        }
        Ok(())
    }
}
