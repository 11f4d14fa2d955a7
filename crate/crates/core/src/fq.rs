//! Exact linear algebra over prime fields `F_q`.
//!
//! Entries are stored as reduced `u32` residues and every product is reduced
//! immediately through a `u64` intermediate, so any prime below `2^32` works.
//! All elimination routines pick the first nonzero pivot in column order.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("modulus {0} is not prime")]
    NotPrime(u32),
    #[error("value {value} is not a residue modulo {q}")]
    OutOfRange { value: u32, q: u32 },
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
    #[error("operands live in different fields (F_{left} and F_{right})")]
    ModulusMismatch { left: u32, right: u32 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
}

pub fn is_prime(q: u32) -> bool {
    if q < 2 {
        return false;
    }
    let q = u64::from(q);
    let mut p = 2u64;
    while p * p <= q {
        if q % p == 0 {
            return false;
        }
        p += 1;
    }
    true
}

/// A validated prime field `F_q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct Field {
    q: u32,
}

impl TryFrom<u32> for Field {
    type Error = FieldError;

    fn try_from(q: u32) -> Result<Self, Self::Error> {
        Field::new(q)
    }
}

impl From<Field> for u32 {
    fn from(f: Field) -> u32 {
        f.q
    }
}

impl Field {
    pub fn new(q: u32) -> Result<Self, FieldError> {
        if is_prime(q) {
            Ok(Field { q })
        } else {
            Err(FieldError::NotPrime(q))
        }
    }

    #[inline]
    pub fn modulus(self) -> u32 {
        self.q
    }

    #[inline]
    pub fn reduce(self, v: u64) -> u32 {
        (v % u64::from(self.q)) as u32
    }

    /// Reduces a signed integer into `[0, q)`.
    #[inline]
    pub fn reduce_signed(self, v: i64) -> u32 {
        v.rem_euclid(i64::from(self.q)) as u32
    }

    #[inline]
    pub fn add(self, a: u32, b: u32) -> u32 {
        self.reduce(u64::from(a) + u64::from(b))
    }

    #[inline]
    pub fn sub(self, a: u32, b: u32) -> u32 {
        self.reduce(u64::from(a) + u64::from(self.q) - u64::from(b))
    }

    #[inline]
    pub fn mul(self, a: u32, b: u32) -> u32 {
        self.reduce(u64::from(a) * u64::from(b))
    }

    #[inline]
    pub fn neg(self, a: u32) -> u32 {
        if a == 0 {
            0
        } else {
            self.q - a
        }
    }

    /// Multiplicative inverse by the extended Euclidean algorithm.
    pub fn inv(self, a: u32) -> Result<u32, FieldError> {
        let a = a % self.q;
        if a == 0 {
            return Err(FieldError::ZeroInverse);
        }
        let (mut r0, mut r1) = (i64::from(self.q), i64::from(a));
        let (mut t0, mut t1) = (0i64, 1i64);
        while r1 != 0 {
            let k = r0 / r1;
            (r0, r1) = (r1, r0 - k * r1);
            (t0, t1) = (t1, t0 - k * t1);
        }
        debug_assert_eq!(r0, 1);
        Ok(self.reduce_signed(t0))
    }

    pub fn pow(self, base: u32, mut exp: u64) -> u32 {
        let mut acc = 1 % self.q;
        let mut b = base % self.q;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, b);
            }
            b = self.mul(b, b);
            exp >>= 1;
        }
        acc
    }

    pub fn scalar(self, value: u64) -> FieldScalar {
        FieldScalar { value: self.reduce(value), q: self.q }
    }
}

/// An element of `F_q` that carries its modulus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FieldScalar {
    value: u32,
    q: u32,
}

impl FieldScalar {
    pub fn new(value: u32, q: u32) -> Result<Self, FieldError> {
        Field::new(q)?;
        if value >= q {
            return Err(FieldError::OutOfRange { value, q });
        }
        Ok(FieldScalar { value, q })
    }

    pub fn value(self) -> u32 {
        self.value
    }

    pub fn modulus(self) -> u32 {
        self.q
    }

    pub fn field(self) -> Field {
        Field { q: self.q }
    }

    pub fn is_zero(self) -> bool {
        self.value == 0
    }

    fn same_field(self, other: Self) -> Result<Field, FieldError> {
        if self.q == other.q {
            Ok(self.field())
        } else {
            Err(FieldError::ModulusMismatch { left: self.q, right: other.q })
        }
    }

    pub fn checked_add(self, rhs: Self) -> Result<Self, FieldError> {
        let f = self.same_field(rhs)?;
        Ok(FieldScalar { value: f.add(self.value, rhs.value), q: self.q })
    }

    pub fn checked_sub(self, rhs: Self) -> Result<Self, FieldError> {
        let f = self.same_field(rhs)?;
        Ok(FieldScalar { value: f.sub(self.value, rhs.value), q: self.q })
    }

    pub fn checked_mul(self, rhs: Self) -> Result<Self, FieldError> {
        let f = self.same_field(rhs)?;
        Ok(FieldScalar { value: f.mul(self.value, rhs.value), q: self.q })
    }

    pub fn neg(self) -> Self {
        FieldScalar { value: self.field().neg(self.value), q: self.q }
    }

    pub fn inv(self) -> Result<Self, FieldError> {
        Ok(FieldScalar { value: self.field().inv(self.value)?, q: self.q })
    }
}

impl fmt::Display for FieldScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (mod {})", self.value, self.q)
    }
}

/// Dense row-major matrix over `F_q`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FqMatrix {
    field: Field,
    rows: usize,
    cols: usize,
    data: Vec<u32>,
}

/// Result of [`FqMatrix::solve_affine`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AffineSolution {
    Solved { particular: Vec<u32>, kernel: Vec<Vec<u32>> },
    NoSolution,
}

impl AffineSolution {
    pub fn particular(&self) -> Option<&[u32]> {
        match self {
            AffineSolution::Solved { particular, .. } => Some(particular),
            AffineSolution::NoSolution => None,
        }
    }
}

impl FqMatrix {
    pub fn zeros(field: Field, rows: usize, cols: usize) -> Self {
        FqMatrix { field, rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(field: Field, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.data[i * n + i] = 1 % field.modulus();
        }
        m
    }

    /// Builds a matrix from row-major data; every entry must already be reduced.
    pub fn from_vec(field: Field, rows: usize, cols: usize, data: Vec<u32>) -> Result<Self, FieldError> {
        if data.len() != rows * cols {
            return Err(FieldError::DimensionMismatch { expected: rows * cols, found: data.len() });
        }
        if let Some(&value) = data.iter().find(|&&v| v >= field.modulus()) {
            return Err(FieldError::OutOfRange { value, q: field.modulus() });
        }
        Ok(FqMatrix { field, rows, cols, data })
    }

    pub fn from_rows(field: Field, rows: &[Vec<u32>]) -> Result<Self, FieldError> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(FieldError::DimensionMismatch { expected: cols, found: r.len() });
            }
            data.extend_from_slice(r);
        }
        Self::from_vec(field, rows.len(), cols, data)
    }

    /// Builds a matrix from arbitrary integers, reducing each one.
    pub fn from_fn(field: Field, rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> u32) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c) % field.modulus());
            }
        }
        FqMatrix { field, rows, cols, data }
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u32 {
        self.data[r * self.cols + c]
    }

    pub fn entry(&self, r: usize, c: usize) -> FieldScalar {
        FieldScalar { value: self.get(r, c), q: self.field.modulus() }
    }

    pub fn row(&self, r: usize) -> &[u32] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<u32> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.field, self.cols, self.rows, |r, c| self.get(c, r))
    }

    pub fn mul_vec(&self, v: &[u32]) -> Result<Vec<u32>, FieldError> {
        if v.len() != self.cols {
            return Err(FieldError::DimensionMismatch { expected: self.cols, found: v.len() });
        }
        let q = u64::from(self.field.modulus());
        Ok((0..self.rows)
            .map(|r| {
                let acc = self.row(r).iter().zip(v).fold(0u64, |acc, (&a, &b)| (acc + u64::from(a) * u64::from(b)) % q);
                acc as u32
            })
            .collect())
    }

    pub fn mul(&self, rhs: &FqMatrix) -> Result<FqMatrix, FieldError> {
        if self.field != rhs.field {
            return Err(FieldError::ModulusMismatch { left: self.field.modulus(), right: rhs.field.modulus() });
        }
        if self.cols != rhs.rows {
            return Err(FieldError::DimensionMismatch { expected: self.cols, found: rhs.rows });
        }
        let q = u64::from(self.field.modulus());
        Ok(Self::from_fn(self.field, self.rows, rhs.cols, |r, c| {
            let acc = (0..self.cols).fold(0u64, |acc, k| (acc + u64::from(self.get(r, k)) * u64::from(rhs.get(k, c))) % q);
            acc as u32
        }))
    }

    /// Appends the columns of `rhs` to the right of `self`.
    pub fn hstack(&self, rhs: &FqMatrix) -> Result<FqMatrix, FieldError> {
        if self.rows != rhs.rows {
            return Err(FieldError::DimensionMismatch { expected: self.rows, found: rhs.rows });
        }
        let cols = self.cols + rhs.cols;
        Ok(Self::from_fn(self.field, self.rows, cols, |r, c| {
            if c < self.cols {
                self.get(r, c)
            } else {
                rhs.get(r, c - self.cols)
            }
        }))
    }

    /// In-place reduced row echelon form; returns the pivot columns.
    fn rref_in_place(&mut self) -> Vec<usize> {
        let f = self.field;
        let mut pivots = Vec::new();
        let mut pivot_row = 0;
        for col in 0..self.cols {
            if pivot_row == self.rows {
                break;
            }
            let Some(found) = (pivot_row..self.rows).find(|&r| self.get(r, col) != 0) else {
                continue;
            };
            if found != pivot_row {
                for c in 0..self.cols {
                    self.data.swap(found * self.cols + c, pivot_row * self.cols + c);
                }
            }
            let inv = f.inv(self.get(pivot_row, col)).expect("pivot is nonzero");
            for c in col..self.cols {
                let idx = pivot_row * self.cols + c;
                self.data[idx] = f.mul(self.data[idx], inv);
            }
            for r in 0..self.rows {
                if r == pivot_row {
                    continue;
                }
                let factor = self.get(r, col);
                if factor == 0 {
                    continue;
                }
                for c in col..self.cols {
                    let p = self.data[pivot_row * self.cols + c];
                    let idx = r * self.cols + c;
                    self.data[idx] = f.sub(self.data[idx], f.mul(factor, p));
                }
            }
            pivots.push(col);
            pivot_row += 1;
        }
        pivots
    }

    pub fn rref(&self) -> (FqMatrix, Vec<usize>) {
        let mut m = self.clone();
        let pivots = m.rref_in_place();
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        // eliminate along the shorter side
        if self.rows > self.cols {
            self.transpose().rref().1.len()
        } else {
            self.rref().1.len()
        }
    }

    /// Basis of the right null space, one vector per free column.
    pub fn kernel_basis(&self) -> Vec<Vec<u32>> {
        let (r, pivots) = self.rref();
        let f = self.field;
        let mut is_pivot = vec![false; self.cols];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        (0..self.cols)
            .filter(|&c| !is_pivot[c])
            .map(|free| {
                let mut v = vec![0u32; self.cols];
                v[free] = 1 % f.modulus();
                for (row, &p) in pivots.iter().enumerate() {
                    v[p] = f.neg(r.get(row, free));
                }
                v
            })
            .collect()
    }

    /// Solves `self · x = b`. Free variables of the particular solution are zero.
    pub fn solve_affine(&self, b: &[u32]) -> Result<AffineSolution, FieldError> {
        if b.len() != self.rows {
            return Err(FieldError::DimensionMismatch { expected: self.rows, found: b.len() });
        }
        let q = self.field.modulus();
        let column = FqMatrix::from_fn(self.field, self.rows, 1, |r, _| b[r] % q);
        let aug = self.hstack(&column)?;
        let (r, pivots) = aug.rref();
        if pivots.last() == Some(&self.cols) {
            return Ok(AffineSolution::NoSolution);
        }
        let mut particular = vec![0u32; self.cols];
        for (row, &p) in pivots.iter().enumerate() {
            particular[p] = r.get(row, self.cols);
        }
        Ok(AffineSolution::Solved { particular, kernel: self.kernel_basis() })
    }

    /// Reduced column echelon form: same column space, nonzero columns first,
    /// each with a leading 1 whose row is zero in every other column.
    pub fn reduced_column_echelon(&self) -> FqMatrix {
        self.transpose().rref().0.transpose()
    }
}

impl fmt::Display for FqMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.rows {
            let row: Vec<String> = self.row(r).iter().map(u32::to_string).collect();
            writeln!(f, "[{}]", row.join(" "))?;
        }
        Ok(())
    }
}
