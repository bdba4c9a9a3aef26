//! Exact dense linear algebra over big integers and rationals.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Dense matrix of normalized big rationals.
#[derive(Clone, PartialEq, Eq)]
pub struct RationalMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigRational>,
}

impl fmt::Debug for RationalMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "RationalMatrix {}x{}", self.rows, self.cols)?;
        for r in 0..self.rows.min(12) {
            let row: Vec<String> = (0..self.cols.min(12))
                .map(|c| self.get(r, c).to_string())
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl RationalMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RationalMatrix {
            rows,
            cols,
            data: vec![BigRational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, BigRational::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<BigRational>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        if rows.iter().any(|x| x.len() != c) {
            return Err(Error::Shape("ragged rows".into()));
        }
        Ok(RationalMatrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn from_i64_rows<R: AsRef<[i64]>>(rows: &[R]) -> Result<Self> {
        Self::from_rows(
            rows.iter()
                .map(|r| r.as_ref().iter().map(|&x| BigRational::from_integer(x.into())).collect())
                .collect(),
        )
    }

    pub fn from_u8_rows<R: AsRef<[u8]>>(rows: &[R]) -> Result<Self> {
        Self::from_rows(
            rows.iter()
                .map(|r| r.as_ref().iter().map(|&x| BigRational::from_integer(x.into())).collect())
                .collect(),
        )
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &BigRational {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: BigRational) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[BigRational] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c).clone());
            }
        }
        t
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Shape(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        let cur = &out.data[i * other.cols + j];
                        out.data[i * other.cols + j] = cur + a * b;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[BigRational]) -> Result<Vec<BigRational>> {
        if v.len() != self.cols {
            return Err(Error::Shape(format!(
                "{}x{} times vector of length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        Ok((0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(v)
                    .filter(|(a, b)| !a.is_zero() && !b.is_zero())
                    .fold(BigRational::zero(), |acc, (a, b)| acc + a * b)
            })
            .collect())
    }

    /// Rows scaled to integers by their denominators' lcm.
    fn integer_rows(&self) -> Vec<Vec<BigInt>> {
        (0..self.rows)
            .map(|r| {
                let row = self.row(r);
                let l = row
                    .iter()
                    .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
                row.iter().map(|x| x.numer() * (&l / x.denom())).collect()
            })
            .collect()
    }
}

fn to_big_rows(rows: &[Vec<i64>]) -> Vec<Vec<BigInt>> {
    rows.iter()
        .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
        .collect()
}

/// Outcome of fraction-free forward elimination.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Echelon {
    pub rank: usize,
    /// Original indices of the rows used as pivots.
    pub pivot_rows: Vec<usize>,
    pub pivot_cols: Vec<usize>,
}

/// Bareiss elimination with pivoting on the smallest nonzero magnitude.
pub fn bareiss(mut a: Vec<Vec<BigInt>>) -> Echelon {
    let m = a.len();
    let n = a.first().map_or(0, |r| r.len());
    let mut order: Vec<usize> = (0..m).collect();
    let mut prev = BigInt::one();
    let mut r = 0;
    let mut pivot_cols = Vec::new();
    for c in 0..n {
        if r == m {
            break;
        }
        let best = (r..m)
            .filter(|&i| !a[i][c].is_zero())
            .min_by(|&i, &j| a[i][c].magnitude().cmp(a[j][c].magnitude()));
        let Some(p) = best else { continue };
        a.swap(r, p);
        order.swap(r, p);
        let (top, rest) = a.split_at_mut(r + 1);
        let piv_row = &top[r];
        let piv = piv_row[c].clone();
        for row in rest.iter_mut() {
            let f = row[c].clone();
            for j in c + 1..n {
                let x = &row[j];
                let y = &piv_row[j];
                if f.is_zero() || y.is_zero() {
                    if !x.is_zero() {
                        row[j] = (&piv * x) / &prev;
                    }
                } else {
                    row[j] = (&piv * x - &f * y) / &prev;
                }
            }
            row[c] = BigInt::zero();
        }
        prev = piv;
        pivot_cols.push(c);
        r += 1;
    }
    Echelon {
        rank: r,
        pivot_rows: order[..r].to_vec(),
        pivot_cols,
    }
}

/// Exact rank via fraction-free elimination.
pub fn rank(a: &RationalMatrix) -> usize {
    bareiss(a.integer_rows()).rank
}

pub fn rank_i64(rows: &[Vec<i64>]) -> usize {
    bareiss(to_big_rows(rows)).rank
}

fn mod_pow(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1u64;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = (acc as u128 * b as u128 % p as u128) as u64;
        }
        b = (b as u128 * b as u128 % p as u128) as u64;
        e >>= 1;
    }
    acc
}

/// Rank over `F_p` of an integer matrix; `p` must be prime.
pub fn rank_mod_p(rows: &[Vec<i64>], p: u64) -> usize {
    let n = rows.first().map_or(0, |r| r.len());
    let mut a: Vec<Vec<u64>> = rows
        .iter()
        .map(|r| r.iter().map(|&x| x.rem_euclid(p as i64) as u64).collect())
        .collect();
    let m = a.len();
    let mut r = 0;
    for c in 0..n {
        if r == m {
            break;
        }
        let Some(pr) = (r..m).find(|&i| a[i][c] != 0) else {
            continue;
        };
        a.swap(r, pr);
        let inv = mod_pow(a[r][c], p - 2, p);
        let piv: Vec<u64> = a[r]
            .iter()
            .map(|&x| (x as u128 * inv as u128 % p as u128) as u64)
            .collect();
        for row in a.iter_mut().skip(r + 1) {
            let f = row[c];
            if f != 0 {
                for (x, &y) in row.iter_mut().zip(&piv) {
                    let sub = (f as u128 * y as u128 % p as u128) as u64;
                    *x = (*x + p - sub) % p;
                }
            }
        }
        a[r] = piv;
        r += 1;
    }
    r
}

/// Fraction-free Gauss-Jordan; returns the reduced integer rows and pivots.
/// Row `k` divided by its pivot entry is row `k` of the RREF.
fn gauss_jordan(mut a: Vec<Vec<BigInt>>, ncols: usize) -> (Vec<Vec<BigInt>>, Vec<usize>) {
    let m = a.len();
    let n = a.first().map_or(0, |r| r.len());
    let mut prev = BigInt::one();
    let mut r = 0;
    let mut pivots = Vec::new();
    for c in 0..ncols.min(n) {
        if r == m {
            break;
        }
        let best = (r..m)
            .filter(|&i| !a[i][c].is_zero())
            .min_by(|&i, &j| a[i][c].magnitude().cmp(a[j][c].magnitude()));
        let Some(p) = best else { continue };
        a.swap(r, p);
        let piv_row = a[r].clone();
        let piv = piv_row[c].clone();
        for (i, row) in a.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c].clone();
            for j in 0..n {
                if j == c {
                    continue;
                }
                let x = &row[j];
                let y = &piv_row[j];
                let v = if f.is_zero() || y.is_zero() {
                    if x.is_zero() {
                        continue;
                    }
                    &piv * x
                } else {
                    &piv * x - &f * y
                };
                row[j] = v / &prev;
            }
            row[c] = BigInt::zero();
        }
        // Earlier pivot rows were scaled by piv/prev as well.
        prev = piv;
        pivots.push(c);
        r += 1;
    }
    a.truncate(r);
    (a, pivots)
}

fn primitive(v: Vec<BigInt>) -> Vec<BigInt> {
    let g = v.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() || g.is_one() {
        return v;
    }
    let sign = v.iter().find(|x| !x.is_zero()).is_some_and(|x| x.is_negative());
    let g = if sign { -g } else { g };
    v.into_iter().map(|x| x / &g).collect()
}

/// Reduced row echelon form over the rationals.
pub fn rref(a: &RationalMatrix) -> (RationalMatrix, Vec<usize>) {
    let (rows, pivots) = gauss_jordan(a.integer_rows(), a.cols);
    let out = rows
        .iter()
        .zip(&pivots)
        .map(|(row, &p)| {
            row.iter()
                .map(|x| BigRational::new(x.clone(), row[p].clone()))
                .collect()
        })
        .collect();
    let m = RationalMatrix::from_rows(out).unwrap_or_else(|_| RationalMatrix::zeros(0, a.cols));
    let m = if m.cols == 0 && a.cols > 0 {
        RationalMatrix::zeros(0, a.cols)
    } else {
        m
    };
    (m, pivots)
}

/// Some `y` with `A·y = b`, or `None`.
pub fn solve(a: &RationalMatrix, b: &[BigRational]) -> Result<Option<Vec<BigRational>>> {
    if b.len() != a.rows {
        return Err(Error::Shape(format!(
            "{}x{} system with right-hand side of length {}",
            a.rows,
            a.cols,
            b.len()
        )));
    }
    let mut aug = RationalMatrix::zeros(a.rows, a.cols + 1);
    for r in 0..a.rows {
        for c in 0..a.cols {
            aug.set(r, c, a.get(r, c).clone());
        }
        aug.set(r, a.cols, b[r].clone());
    }
    let (rows, pivots) = gauss_jordan(aug.integer_rows(), a.cols + 1);
    if pivots.last() == Some(&a.cols) {
        return Ok(None);
    }
    let mut y = vec![BigRational::zero(); a.cols];
    for (row, &p) in rows.iter().zip(&pivots) {
        y[p] = BigRational::new(row[a.cols].clone(), row[p].clone());
    }
    Ok(Some(y))
}

/// Basis of the right nullspace, one primitive integer vector per free column.
pub fn integer_nullspace(a: &RationalMatrix) -> Vec<Vec<BigInt>> {
    let (rows, pivots) = gauss_jordan(a.integer_rows(), a.cols);
    kernel_from_reduced(&rows, &pivots, a.cols)
}

fn kernel_from_reduced(rows: &[Vec<BigInt>], pivots: &[usize], n: usize) -> Vec<Vec<BigInt>> {
    let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
    let l = rows
        .iter()
        .zip(pivots)
        .fold(BigInt::one(), |acc, (row, &p)| acc.lcm(&row[p]));
    free.iter()
        .map(|&f| {
            let mut v = vec![BigInt::zero(); n];
            v[f] = l.clone();
            for (row, &p) in rows.iter().zip(pivots) {
                v[p] = -(&row[f] * (&l / &row[p]));
            }
            primitive(v)
        })
        .collect()
}

pub fn nullspace(a: &RationalMatrix) -> Vec<Vec<BigRational>> {
    integer_nullspace(a)
        .into_iter()
        .map(|v| v.into_iter().map(BigRational::from_integer).collect())
        .collect()
}

/// Repeated exact solves of `A·y = b` against one small-integer matrix.
///
/// Picks an invertible `r×r` block `A[R, C]`; a consistent `b` has a solution
/// supported on `C`, fixed by `b_R`, and every candidate is checked against
/// the full system.
#[derive(Clone, Debug)]
pub struct PreparedSolver {
    a: Vec<Vec<i64>>,
    cols: usize,
    pivot_rows: Vec<usize>,
    pivot_cols: Vec<usize>,
    /// `den · A[R,C]^{-1}`, rows indexed by `C`.
    inv_scaled: Vec<Vec<BigInt>>,
    den: BigInt,
}

impl PreparedSolver {
    pub fn new(a: Vec<Vec<i64>>) -> Result<Self> {
        let cols = a.first().map_or(0, |r| r.len());
        if a.iter().any(|r| r.len() != cols) {
            return Err(Error::Shape("ragged rows".into()));
        }
        let ech = bareiss(to_big_rows(&a));
        let r = ech.rank;
        let block: Vec<Vec<i64>> = ech
            .pivot_rows
            .iter()
            .map(|&i| ech.pivot_cols.iter().map(|&c| a[i][c]).collect())
            .collect();
        // [block | I] reduced fraction-free gives block^{-1} = row / pivot.
        let aug: Vec<Vec<BigInt>> = block
            .iter()
            .enumerate()
            .map(|(i, row)| {
                row.iter()
                    .map(|&x| BigInt::from(x))
                    .chain((0..r).map(|j| BigInt::from(i64::from(i == j))))
                    .collect()
            })
            .collect();
        let (red, piv) = gauss_jordan(aug, r);
        if piv.len() != r || piv.iter().enumerate().any(|(i, &p)| p != i) {
            return Err(Error::Inconsistent("pivot block is singular".into()));
        }
        let den = red
            .iter()
            .zip(&piv)
            .fold(BigInt::one(), |acc, (row, &p)| acc.lcm(&row[p]));
        let inv_scaled = red
            .iter()
            .zip(&piv)
            .map(|(row, &p)| {
                let s = &den / &row[p];
                row[r..].iter().map(|x| x * &s).collect()
            })
            .collect();
        Ok(PreparedSolver {
            a,
            cols,
            pivot_rows: ech.pivot_rows,
            pivot_cols: ech.pivot_cols,
            inv_scaled,
            den,
        })
    }

    pub fn rank(&self) -> usize {
        self.pivot_rows.len()
    }

    /// Exact solution or `None`; any returned `y` satisfies `A·y = b`.
    pub fn solve(&self, b: &[i64]) -> Result<Option<Vec<BigRational>>> {
        if b.len() != self.a.len() {
            return Err(Error::Shape(format!(
                "right-hand side of length {} for {} rows",
                b.len(),
                self.a.len()
            )));
        }
        let br: Vec<i64> = self.pivot_rows.iter().map(|&i| b[i]).collect();
        let mut y_scaled = vec![BigInt::zero(); self.cols];
        for (k, &c) in self.pivot_cols.iter().enumerate() {
            let row = &self.inv_scaled[k];
            let mut acc = BigInt::zero();
            for (x, &bv) in row.iter().zip(&br) {
                if bv != 0 && !x.is_zero() {
                    acc += x * bv;
                }
            }
            y_scaled[c] = acc;
        }
        for (row, &bv) in self.a.iter().zip(b) {
            let mut acc = BigInt::zero();
            for &c in &self.pivot_cols {
                if row[c] != 0 {
                    acc += &y_scaled[c] * row[c];
                }
            }
            if acc != &self.den * bv {
                return Ok(None);
            }
        }
        Ok(Some(
            y_scaled
                .into_iter()
                .map(|x| BigRational::new(x, self.den.clone()))
                .collect(),
        ))
    }
}
