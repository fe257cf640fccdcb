use super::{FieldElement, Modulus};
use crate::error::{Error, Result};

/// Dense row-major matrix over `F_q`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    entries: Vec<FieldElement>,
    modulus: Modulus,
}

/// Outcome of [`Matrix::solve`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Solution {
    Unique(Vec<FieldElement>),
    NoSolution,
    /// Consistent but rank-deficient; carries one particular solution with
    /// every free variable set to zero.
    Underdetermined(Vec<FieldElement>),
}

impl Matrix {
    pub fn new(modulus: &Modulus, rows: usize, cols: usize, entries: Vec<FieldElement>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!("{} entries for a {rows}x{cols} matrix", entries.len())));
        }
        if entries.iter().any(|e| e.modulus() != modulus) {
            return Err(Error::ModulusMismatch);
        }
        Ok(Matrix { rows, cols, entries, modulus: modulus.clone() })
    }

    pub fn zeros(modulus: &Modulus, rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, entries: vec![modulus.zero(); rows * cols], modulus: modulus.clone() }
    }

    pub fn identity(modulus: &Modulus, n: usize) -> Self {
        let mut m = Self::zeros(modulus, n, n);
        for i in 0..n {
            m.entries[i * n + i] = modulus.one();
        }
        m
    }

    pub fn from_rows(modulus: &Modulus, cols: usize, rows: Vec<Vec<FieldElement>>) -> Result<Self> {
        let n = rows.len();
        let mut entries = Vec::with_capacity(n * cols);
        for row in rows {
            if row.len() != cols {
                return Err(Error::DimensionMismatch(format!("row of length {} in a {cols}-column matrix", row.len())));
            }
            entries.extend(row);
        }
        Self::new(modulus, n, cols, entries)
    }

    /// Small-integer convenience constructor, mostly for tests.
    pub fn from_u64_rows(modulus: &Modulus, rows: &[&[u64]]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        let rows = rows.iter().map(|r| r.iter().map(|&v| modulus.elem(v)).collect()).collect();
        Self::from_rows(modulus, cols, rows)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn modulus(&self) -> &Modulus {
        &self.modulus
    }

    pub fn get(&self, r: usize, c: usize) -> &FieldElement {
        &self.entries[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[FieldElement] {
        &self.entries[r * self.cols..(r + 1) * self.cols]
    }

    pub fn push_row(&mut self, row: Vec<FieldElement>) -> Result<()> {
        if row.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "row of length {} in a {}-column matrix",
                row.len(),
                self.cols
            )));
        }
        self.entries.extend(row);
        self.rows += 1;
        Ok(())
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for c in 0..self.cols {
                self.entries.swap(a * self.cols + c, b * self.cols + c);
            }
        }
    }

    pub fn scale_row(&mut self, r: usize, by: &FieldElement) {
        for c in 0..self.cols {
            let i = r * self.cols + c;
            self.entries[i] = &self.entries[i] * by;
        }
    }

    pub fn transpose(&self) -> Matrix {
        let mut entries = Vec::with_capacity(self.entries.len());
        for c in 0..self.cols {
            for r in 0..self.rows {
                entries.push(self.get(r, c).clone());
            }
        }
        Matrix { rows: self.cols, cols: self.rows, entries, modulus: self.modulus.clone() }
    }

    pub fn mul_vec(&self, v: &[FieldElement]) -> Result<Vec<FieldElement>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} against {} columns",
                v.len(),
                self.cols
            )));
        }
        Ok((0..self.rows)
            .map(|r| self.row(r).iter().zip(v).fold(self.modulus.zero(), |acc, (a, b)| &acc + &(a * b)))
            .collect())
    }

    /// Row rank over `F_q`.
    pub fn rank(&self) -> usize {
        let mut basis = RowBasis::new(&self.modulus, self.cols);
        for r in 0..self.rows {
            basis.insert(self.row(r));
        }
        basis.len()
    }

    /// Solves `self * x = rhs` by Gauss-Jordan elimination on the augmented
    /// matrix, pivoting on the first nonzero entry of each column.
    pub fn solve(&self, rhs: &[FieldElement]) -> Result<Solution> {
        if rhs.len() != self.rows {
            return Err(Error::DimensionMismatch(format!("rhs of length {} for {} rows", rhs.len(), self.rows)));
        }
        let width = self.cols + 1;
        let mut aug: Vec<Vec<FieldElement>> = (0..self.rows)
            .map(|r| {
                let mut row = self.row(r).to_vec();
                row.push(rhs[r].clone());
                row
            })
            .collect();

        let mut pivots = Vec::new();
        let mut top = 0;
        for col in 0..self.cols {
            let Some(p) = (top..self.rows).find(|&r| !aug[r][col].is_zero()) else {
                continue;
            };
            aug.swap(top, p);
            let inv = aug[top][col].inv()?;
            for x in aug[top].iter_mut() {
                *x = &*x * &inv;
            }
            let pivot_row = aug[top].clone();
            for (r, row) in aug.iter_mut().enumerate() {
                if r != top && !row[col].is_zero() {
                    let factor = row[col].clone();
                    for c in col..width {
                        row[c] = &row[c] - &(&factor * &pivot_row[c]);
                    }
                }
            }
            pivots.push(col);
            top += 1;
            if top == self.rows {
                break;
            }
        }

        if aug[top..].iter().any(|row| !row[self.cols].is_zero()) {
            return Ok(Solution::NoSolution);
        }
        let mut x = vec![self.modulus.zero(); self.cols];
        for (r, &c) in pivots.iter().enumerate() {
            x[c] = aug[r][self.cols].clone();
        }
        if pivots.len() == self.cols {
            Ok(Solution::Unique(x))
        } else {
            Ok(Solution::Underdetermined(x))
        }
    }

    /// True iff `v` is a linear combination of the rows.
    pub fn in_row_span(&self, v: &[FieldElement]) -> Result<bool> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} against {} columns",
                v.len(),
                self.cols
            )));
        }
        let mut basis = RowBasis::new(&self.modulus, self.cols);
        for r in 0..self.rows {
            basis.insert(self.row(r));
        }
        Ok(basis.contains(v))
    }

    /// Coefficients `c` with `sum_r c[r] * row[r] = v`, if `v` is in the row span.
    pub fn row_combination(&self, v: &[FieldElement]) -> Result<Option<Vec<FieldElement>>> {
        match self.transpose().solve(v)? {
            Solution::Unique(c) | Solution::Underdetermined(c) => Ok(Some(c)),
            Solution::NoSolution => Ok(None),
        }
    }
}

/// Incrementally built echelon basis of a row space.
///
/// Rows are stored normalized (pivot entry 1) and reduced against every
/// earlier row, so reduction of a new vector is one pass in insertion order.
/// `truncate` pops the most recent insertions, which makes the basis usable
/// as a stack during depth-first subset enumeration. Word-sized moduli are
/// reduced on raw `u64` rows.
#[derive(Clone, Debug)]
pub struct RowBasis {
    modulus: Modulus,
    cols: usize,
    rows: Rows,
}

#[derive(Clone, Debug)]
enum Rows {
    Word { q: u64, rows: Vec<(usize, Vec<u64>)> },
    Big(Vec<(usize, Vec<FieldElement>)>),
}

/// A row converted to a [`RowBasis`]'s internal representation.
#[derive(Clone, Debug)]
pub struct PreparedRow(Prepared);

#[derive(Clone, Debug)]
enum Prepared {
    Word(Vec<u64>),
    Big(Vec<FieldElement>),
}

fn mulmod(a: u64, b: u64, q: u64) -> u64 {
    if q <= 1 << 32 {
        a * b % q
    } else {
        ((a as u128 * b as u128) % q as u128) as u64
    }
}

fn reduce_word(rows: &[(usize, Vec<u64>)], v: &mut [u64], q: u64) {
    for (pivot, row) in rows {
        let factor = v[*pivot];
        if factor == 0 {
            continue;
        }
        for (x, &b) in v.iter_mut().zip(row).skip(*pivot) {
            if b != 0 {
                let t = mulmod(factor, b, q);
                *x = if *x >= t { *x - t } else { *x + (q - t) };
            }
        }
    }
}

fn reduce_big(rows: &[(usize, Vec<FieldElement>)], v: &mut [FieldElement]) {
    for (pivot, row) in rows {
        if v[*pivot].is_zero() {
            continue;
        }
        let factor = v[*pivot].clone();
        for (x, b) in v.iter_mut().zip(row).skip(*pivot) {
            if !b.is_zero() {
                *x = &*x - &(&factor * b);
            }
        }
    }
}

impl RowBasis {
    pub fn new(modulus: &Modulus, cols: usize) -> Self {
        let rows = match modulus.word() {
            Some(q) => Rows::Word { q, rows: Vec::new() },
            None => Rows::Big(Vec::new()),
        };
        RowBasis { modulus: modulus.clone(), cols, rows }
    }

    pub fn len(&self) -> usize {
        match &self.rows {
            Rows::Word { rows, .. } => rows.len(),
            Rows::Big(rows) => rows.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    fn words(v: &[FieldElement]) -> Vec<u64> {
        v.iter().map(|x| x.to_u64().expect("word modulus")).collect()
    }

    /// Converts `v` once for repeated [`RowBasis::insert_prepared`] /
    /// [`RowBasis::contains_prepared`] calls.
    pub fn prepare(&self, v: &[FieldElement]) -> PreparedRow {
        assert_eq!(v.len(), self.cols, "row length");
        match self.rows {
            Rows::Word { .. } => PreparedRow(Prepared::Word(Self::words(v))),
            Rows::Big(_) => PreparedRow(Prepared::Big(v.to_vec())),
        }
    }

    /// Adds `v`; returns whether it was independent of the current rows.
    pub fn insert(&mut self, v: &[FieldElement]) -> bool {
        let p = self.prepare(v);
        self.insert_prepared(&p)
    }

    pub fn insert_prepared(&mut self, v: &PreparedRow) -> bool {
        match (&mut self.rows, &v.0) {
            (Rows::Word { q, rows }, Prepared::Word(v)) => {
                let q = *q;
                let mut v = v.clone();
                reduce_word(rows, &mut v, q);
                let Some(pivot) = v.iter().position(|&x| x != 0) else {
                    return false;
                };
                let inv = self.modulus.elem(v[pivot]).inv().expect("pivot is nonzero").to_u64().unwrap();
                for x in v.iter_mut().skip(pivot) {
                    *x = mulmod(*x, inv, q);
                }
                rows.push((pivot, v));
                true
            }
            (Rows::Big(rows), Prepared::Big(v)) => {
                let mut v = v.clone();
                reduce_big(rows, &mut v);
                let Some(pivot) = v.iter().position(|x| !x.is_zero()) else {
                    return false;
                };
                let inv = v[pivot].inv().expect("pivot is nonzero");
                for x in v.iter_mut().skip(pivot) {
                    *x = &*x * &inv;
                }
                rows.push((pivot, v));
                true
            }
            _ => panic!("row prepared for a different basis"),
        }
    }

    pub fn contains(&self, v: &[FieldElement]) -> bool {
        self.contains_prepared(&self.prepare(v))
    }

    pub fn contains_prepared(&self, v: &PreparedRow) -> bool {
        match (&self.rows, &v.0) {
            (Rows::Word { q, rows }, Prepared::Word(v)) => {
                let mut v = v.clone();
                reduce_word(rows, &mut v, *q);
                v.iter().all(|&x| x == 0)
            }
            (Rows::Big(rows), Prepared::Big(v)) => {
                let mut v = v.clone();
                reduce_big(rows, &mut v);
                v.iter().all(FieldElement::is_zero)
            }
            _ => panic!("row prepared for a different basis"),
        }
    }

    pub fn truncate(&mut self, len: usize) {
        match &mut self.rows {
            Rows::Word { rows, .. } => rows.truncate(len),
            Rows::Big(rows) => rows.truncate(len),
        }
    }

    pub fn modulus(&self) -> &Modulus {
        &self.modulus
    }
}
