//! Forms, canonical subspaces, totally isotropic subspaces and isometries.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{bound, Error, Result};
use crate::field::{field_of_order, gauss_binomial, FieldElement, FiniteField, HalfPowers};

pub type Vector = Vec<u8>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Case {
    Symplectic,
    Unitary,
    Orthogonal,
}

impl Case {
    /// Twice the parameter `e`.
    pub fn e2(self) -> u32 {
        match self {
            Case::Symplectic => 2,
            Case::Unitary => 1,
            Case::Orthogonal => 0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Case::Symplectic => "symplectic",
            Case::Unitary => "unitary",
            Case::Orthogonal => "orthogonal",
        }
    }
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Case {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "symplectic" | "sym" => Ok(Case::Symplectic),
            "unitary" | "uni" => Ok(Case::Unitary),
            "orthogonal" | "ort" => Ok(Case::Orthogonal),
            _ => Err(Error::UnsupportedConfig(format!("unknown case {s:?}"))),
        }
    }
}

/// A classical space `F_q^{2ν}` with its form.
#[derive(Clone)]
pub struct SpaceConfig {
    case: Case,
    q: u32,
    nu: usize,
    form: Vec<Vector>,
    field: Arc<FiniteField>,
    hp: HalfPowers,
}

impl fmt::Debug for SpaceConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(q={}, nu={})", self.case, self.q, self.nu)
    }
}

impl PartialEq for SpaceConfig {
    fn eq(&self, other: &Self) -> bool {
        (self.case, self.q, self.nu) == (other.case, other.q, other.nu)
    }
}

impl Eq for SpaceConfig {}

/// Largest `q^{2ν}` the library will enumerate points for.
pub const MAX_POINTS: u64 = 1 << 14;

impl SpaceConfig {
    pub fn new(case: Case, q: u32, nu: usize) -> Result<Self> {
        if nu == 0 {
            return Err(Error::UnsupportedConfig("nu must be at least 1".into()));
        }
        let field = Arc::new(field_of_order(q)?);
        match case {
            Case::Unitary if field.k() % 2 != 0 => return Err(Error::NotSquare(q)),
            Case::Orthogonal if field.p() == 2 => {
                return Err(Error::UnsupportedConfig(format!(
                    "orthogonal case needs odd characteristic, got q = {q}"
                )))
            }
            _ => {}
        }
        let points = (q as u64).checked_pow(2 * nu as u32).unwrap_or(u64::MAX);
        bound("q^(2nu)", points as u128, MAX_POINTS as u128)?;
        let n = 2 * nu;
        let mut form = vec![vec![0u8; n]; n];
        let minus_one = field.neg(1);
        for i in 0..nu {
            form[i][nu + i] = 1;
            form[nu + i][i] = if case == Case::Symplectic { minus_one } else { 1 };
        }
        let hp = HalfPowers::new(q as u64, case == Case::Unitary)?;
        Ok(SpaceConfig {
            case,
            q,
            nu,
            form,
            field,
            hp,
        })
    }

    pub fn case(&self) -> Case {
        self.case
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn nu(&self) -> usize {
        self.nu
    }

    pub fn e2(&self) -> u32 {
        self.case.e2()
    }

    pub fn dim(&self) -> usize {
        2 * self.nu
    }

    pub fn form(&self) -> &[Vector] {
        &self.form
    }

    pub fn field(&self) -> &FiniteField {
        &self.field
    }

    pub fn field_arc(&self) -> &Arc<FiniteField> {
        &self.field
    }

    pub fn half_powers(&self) -> HalfPowers {
        self.hp
    }

    pub fn num_points(&self) -> usize {
        (self.q as usize).pow(2 * self.nu as u32)
    }

    /// Coordinates of the point with index `idx` (big-endian base `q`).
    pub fn point(&self, mut idx: usize) -> Vector {
        let n = self.dim();
        let q = self.q as usize;
        let mut v = vec![0u8; n];
        for i in (0..n).rev() {
            v[i] = (idx % q) as u8;
            idx /= q;
        }
        v
    }

    pub fn point_index(&self, v: &[u8]) -> usize {
        v.iter()
            .fold(0usize, |acc, &c| acc * self.q as usize + c as usize)
    }

    /// `∏_{t=a..=b} (q^{t+e−1}+1)` as an integer.
    pub fn pencil_product(&self, a: i64, b: i64) -> BigInt {
        let mut acc = BigInt::from(1);
        for t in a..=b {
            acc *= self.hp.int(2 * t + self.e2() as i64 - 2).unwrap() + 1;
        }
        acc
    }

    /// Number of maximal totally isotropic subspaces.
    pub fn num_maximal(&self) -> BigInt {
        self.pencil_product(1, self.nu as i64)
    }

    /// `|O_i|`: number of type-`(i,0)` flats.
    pub fn flat_count(&self, i: usize) -> BigInt {
        let nu = self.nu as i64;
        let i = i as i64;
        crate::field::big_pow(self.q as u64, (2 * nu - i) as u64)
            * gauss_binomial(nu, i, self.q as u64)
            * self.pencil_product(nu - i + 1, nu)
    }

    /// `|O′_j(F)|` for `F` of type `(i,0)`.
    pub fn through_count(&self, i: usize, j: usize) -> BigInt {
        let nu = self.nu as i64;
        let (i, j) = (i as i64, j as i64);
        gauss_binomial(nu - i, j - i, self.q as u64) * self.pencil_product(nu - j + 1, nu - i)
    }

    /// Closed-form rank of the point–flat incidence matrix.
    pub fn incidence_rank(&self) -> BigInt {
        let q = self.q as u64;
        let nu = self.nu as i64;
        (crate::field::big_pow(q, nu as u64) - 1)
            * (self.hp.int(2 * (nu - 1) + self.e2() as i64).unwrap() + 1)
            + 1
    }

    pub fn check_vector(&self, v: &[u8]) -> Result<()> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: v.len(),
            });
        }
        if let Some(&bad) = v.iter().find(|&&c| c as u32 >= self.q) {
            return Err(Error::OutOfRange(format!("field element {bad}")));
        }
        Ok(())
    }

    /// `x·form·conj(y)ᵀ` without bounds checks.
    #[inline]
    pub fn form_raw(&self, x: &[u8], y: &[u8]) -> u8 {
        let f = &*self.field;
        let nu = self.nu;
        let mut acc = 0u8;
        match self.case {
            Case::Symplectic => {
                for i in 0..nu {
                    acc = f.add(acc, f.mul(x[i], y[nu + i]));
                    acc = f.sub(acc, f.mul(x[nu + i], y[i]));
                }
            }
            Case::Unitary => {
                for i in 0..nu {
                    acc = f.add(acc, f.mul(x[i], f.conj_or_id(y[nu + i])));
                    acc = f.add(acc, f.mul(x[nu + i], f.conj_or_id(y[i])));
                }
            }
            Case::Orthogonal => {
                for i in 0..nu {
                    acc = f.add(acc, f.mul(x[i], y[nu + i]));
                    acc = f.add(acc, f.mul(x[nu + i], y[i]));
                }
            }
        }
        acc
    }

    #[inline]
    pub fn is_isotropic(&self, x: &[u8]) -> bool {
        self.form_raw(x, x) == 0
    }
}

/// `x·form·conj(y)ᵀ`.
pub fn form_value(config: &SpaceConfig, x: &[u8], y: &[u8]) -> Result<FieldElement> {
    config.check_vector(x)?;
    config.check_vector(y)?;
    FieldElement::new(config.field_arc(), config.form_raw(x, y) as u32)
}

/// Row space in reduced row echelon form.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subspace {
    basis: Vec<Vector>,
    pivots: Vec<usize>,
    n: usize,
}

impl Subspace {
    pub fn zero(n: usize) -> Self {
        Subspace {
            basis: Vec::new(),
            pivots: Vec::new(),
            n,
        }
    }

    pub fn basis(&self) -> &[Vector] {
        &self.basis
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn ambient(&self) -> usize {
        self.n
    }

    /// `v` reduced so that its pivot-column coordinates vanish.
    pub fn reduce(&self, field: &FiniteField, v: &[u8]) -> Vector {
        let mut r = v.to_vec();
        for (row, &p) in self.basis.iter().zip(&self.pivots) {
            let c = r[p];
            if c != 0 {
                for (ri, &bi) in r.iter_mut().zip(row) {
                    *ri = field.sub(*ri, field.mul(c, bi));
                }
            }
        }
        r
    }

    pub fn contains(&self, field: &FiniteField, v: &[u8]) -> bool {
        self.reduce(field, v).iter().all(|&c| c == 0)
    }

    pub fn contains_subspace(&self, field: &FiniteField, other: &Subspace) -> bool {
        other.basis.iter().all(|b| self.contains(field, b))
    }

    pub fn sum(&self, field: &FiniteField, other: &Subspace) -> Subspace {
        let rows: Vec<Vector> = self.basis.iter().chain(&other.basis).cloned().collect();
        canonicalize_n(field, rows, self.n)
    }

    pub fn intersection_dim(&self, field: &FiniteField, other: &Subspace) -> usize {
        self.dim() + other.dim() - self.sum(field, other).dim()
    }

    pub fn intersection(&self, field: &FiniteField, other: &Subspace) -> Subspace {
        let rows: Vec<Vector> = self.basis.iter().chain(&other.basis).cloned().collect();
        let ker = left_kernel(field, &rows, self.n);
        let a = self.dim();
        let gens: Vec<Vector> = ker
            .iter()
            .map(|c| combine_rows(field, &c[..a], &self.basis, self.n))
            .collect();
        canonicalize_n(field, gens, self.n)
    }

    /// Every vector of the subspace, in coefficient order.
    pub fn vectors(&self, field: &FiniteField) -> Vec<Vector> {
        let q = field.order() as usize;
        let d = self.dim();
        let total = q.pow(d as u32);
        let mut out = Vec::with_capacity(total);
        let mut coeffs = vec![0u8; d];
        for _ in 0..total {
            out.push(combine_rows(field, &coeffs, &self.basis, self.n));
            for c in coeffs.iter_mut().rev() {
                *c += 1;
                if (*c as usize) < q {
                    break;
                }
                *c = 0;
            }
        }
        out
    }
}

fn combine_rows(field: &FiniteField, coeffs: &[u8], rows: &[Vector], n: usize) -> Vector {
    let mut v = vec![0u8; n];
    for (&c, row) in coeffs.iter().zip(rows) {
        if c != 0 {
            for (vi, &ri) in v.iter_mut().zip(row) {
                *vi = field.add(*vi, field.mul(c, ri));
            }
        }
    }
    v
}

/// In-place RREF; returns pivot columns and drops zero rows.
pub(crate) fn rref_in_place(field: &FiniteField, rows: &mut Vec<Vector>, n: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..n {
        if r == rows.len() {
            break;
        }
        let Some(pr) = (r..rows.len()).find(|&i| rows[i][col] != 0) else {
            continue;
        };
        rows.swap(r, pr);
        let inv = field.inv(rows[r][col]);
        for x in rows[r].iter_mut() {
            *x = field.mul(*x, inv);
        }
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r && row[col] != 0 {
                let c = row[col];
                for (x, &p) in row.iter_mut().zip(&pivot_row) {
                    *x = field.sub(*x, field.mul(c, p));
                }
            }
        }
        pivots.push(col);
        r += 1;
    }
    rows.truncate(r);
    pivots
}

pub(crate) fn canonicalize_n(field: &FiniteField, mut rows: Vec<Vector>, n: usize) -> Subspace {
    let pivots = rref_in_place(field, &mut rows, n);
    Subspace {
        basis: rows,
        pivots,
        n,
    }
}

/// Canonical RREF representative of the row space of `rows`.
pub fn canonicalize(config: &SpaceConfig, rows: &[Vector]) -> Result<Subspace> {
    for r in rows {
        config.check_vector(r)?;
    }
    Ok(canonicalize_n(config.field(), rows.to_vec(), config.dim()))
}

/// Rank over `F_q`.
pub fn rank_fq(field: &FiniteField, rows: &[Vector]) -> usize {
    let n = rows.first().map_or(0, |r| r.len());
    let mut m = rows.to_vec();
    rref_in_place(field, &mut m, n).len()
}

/// Basis of `{c : c·rows = 0}`.
pub(crate) fn left_kernel(field: &FiniteField, rows: &[Vector], n: usize) -> Vec<Vector> {
    let k = rows.len();
    let mut aug: Vec<Vector> = rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut v = r.clone();
            v.extend((0..k).map(|j| u8::from(i == j)));
            v
        })
        .collect();
    let pivots = rref_in_place(field, &mut aug, n + k);
    aug.into_iter()
        .zip(pivots)
        .filter(|(_, p)| *p >= n)
        .map(|(r, _)| r[n..].to_vec())
        .collect()
}

/// Right kernel `{x : rows·xᵀ = 0}`.
pub(crate) fn right_kernel(field: &FiniteField, rows: &[Vector], n: usize) -> Vec<Vector> {
    let mut m = rows.to_vec();
    let pivots = rref_in_place(field, &mut m, n);
    let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![0u8; n];
            v[f] = 1;
            for (row, &p) in m.iter().zip(&pivots) {
                v[p] = field.neg(row[f]);
            }
            v
        })
        .collect()
}

/// Dimension and Gram rank of a subspace.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SubspaceType {
    pub dim: usize,
    pub gram_rank: usize,
}

impl SubspaceType {
    pub fn is_totally_isotropic(&self) -> bool {
        self.gram_rank == 0
    }
}

pub fn gram_matrix(config: &SpaceConfig, p: &Subspace) -> Vec<Vector> {
    p.basis()
        .iter()
        .map(|a| p.basis().iter().map(|b| config.form_raw(a, b)).collect())
        .collect()
}

/// Type `(m, r)` with `r` the rank of `P·form·conj(P)ᵀ`.
pub fn subspace_type(config: &SpaceConfig, p: &Subspace) -> SubspaceType {
    let g = gram_matrix(config, p);
    SubspaceType {
        dim: p.dim(),
        gram_rank: if g.is_empty() { 0 } else { rank_fq(config.field(), &g) },
    }
}

pub fn is_totally_isotropic(config: &SpaceConfig, p: &Subspace) -> bool {
    p.basis()
        .iter()
        .all(|a| p.basis().iter().all(|b| config.form_raw(a, b) == 0))
}

/// `{x : form(x, v) = 0 for all v ∈ P}`.
pub fn perp(config: &SpaceConfig, p: &Subspace) -> Subspace {
    let n = config.dim();
    let f = config.field();
    // form(x, b) = Σ_k x_k (form·conj(b)ᵀ)_k
    let rows: Vec<Vector> = p
        .basis()
        .iter()
        .map(|b| {
            (0..n)
                .map(|k| {
                    let mut acc = 0u8;
                    for (l, &bl) in b.iter().enumerate() {
                        acc = f.add(acc, f.mul(config.form()[k][l], f.conj_or_id(bl)));
                    }
                    acc
                })
                .collect()
        })
        .collect();
    canonicalize_n(f, right_kernel(f, &rows, n), n)
}

/// All totally isotropic subspaces of dimension `m`, in canonical order.
pub fn enumerate_isotropic(config: &SpaceConfig, m: usize) -> Result<Vec<Subspace>> {
    if m > config.nu() {
        return Err(Error::OutOfRange(format!(
            "m = {m} exceeds nu = {}",
            config.nu()
        )));
    }
    let f = config.field();
    let n = config.dim();
    let iso: Vec<Vector> = (1..config.num_points())
        .map(|i| config.point(i))
        .filter(|v| config.is_isotropic(v) && v.iter().find(|&&c| c != 0) == Some(&1))
        .collect();
    let mut level: BTreeSet<Subspace> = BTreeSet::new();
    level.insert(Subspace::zero(n));
    for _ in 0..m {
        let mut next = BTreeSet::new();
        for w in &level {
            for v in &iso {
                if w.pivots().iter().any(|&p| v[p] != 0) {
                    continue;
                }
                if w.basis().iter().any(|b| config.form_raw(v, b) != 0) {
                    continue;
                }
                let mut rows = w.basis().to_vec();
                rows.push(v.clone());
                next.insert(canonicalize_n(f, rows, n));
            }
        }
        level = next;
    }
    Ok(level.into_iter().collect())
}

/// Form-preserving affine map `x ↦ x·T + v`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Isometry {
    t: Vec<Vector>,
    v: Vector,
}

impl Isometry {
    /// Validates `T·form·conj(T)ᵀ = form`.
    pub fn new(config: &SpaceConfig, t: Vec<Vector>, v: Vector) -> Result<Self> {
        let n = config.dim();
        if t.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: t.len(),
            });
        }
        for r in &t {
            config.check_vector(r)?;
        }
        config.check_vector(&v)?;
        for a in 0..n {
            for b in 0..n {
                if config.form_raw(&t[a], &t[b]) != config.form()[a][b] {
                    return Err(Error::Precondition(
                        "matrix does not preserve the form".into(),
                    ));
                }
            }
        }
        Ok(Isometry { t, v })
    }

    pub fn matrix(&self) -> &[Vector] {
        &self.t
    }

    pub fn translation(&self) -> &[u8] {
        &self.v
    }

    pub fn linear_part(&self, f: &FiniteField, x: &[u8]) -> Vector {
        combine_rows(f, x, &self.t, x.len())
    }

    pub fn apply(&self, f: &FiniteField, x: &[u8]) -> Vector {
        let mut y = self.linear_part(f, x);
        for (yi, &vi) in y.iter_mut().zip(&self.v) {
            *yi = f.add(*yi, vi);
        }
        y
    }

    pub fn apply_subspace(&self, f: &FiniteField, p: &Subspace) -> Subspace {
        let rows = p.basis().iter().map(|b| self.linear_part(f, b)).collect();
        canonicalize_n(f, rows, p.ambient())
    }
}

fn random_in(rng: &mut ChaCha8Rng, f: &FiniteField, w: &Subspace) -> Vector {
    let q = f.order();
    let coeffs: Vector = (0..w.dim()).map(|_| rng.gen_range(0..q) as u8).collect();
    combine_rows(f, &coeffs, w.basis(), w.ambient())
}

/// Seeded isometry built from hyperbolic pairs plus a translation.
pub fn random_isometry(config: &SpaceConfig, seed: u64) -> Isometry {
    let f = config.field();
    let n = config.dim();
    let nu = config.nu();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fs: Vec<Vector> = Vec::new();
    let mut gs: Vec<Vector> = Vec::new();
    let mut w = canonicalize_n(f, (0..n).map(|i| unit(n, i)).collect(), n);
    for _ in 0..nu {
        let fv = loop {
            let x = random_in(&mut rng, f, &w);
            if x.iter().any(|&c| c != 0) && config.is_isotropic(&x) {
                break x;
            }
        };
        let g = loop {
            let x = random_in(&mut rng, f, &w);
            let c = config.form_raw(&fv, &x);
            if c == 0 {
                continue;
            }
            let lambda = f.conj_or_id(f.inv(c));
            let g1: Vector = x.iter().map(|&a| f.mul(lambda, a)).collect();
            let fixed = f.elements().find_map(|mu| {
                let g: Vector = g1
                    .iter()
                    .zip(&fv)
                    .map(|(&a, &b)| f.add(a, f.mul(mu, b)))
                    .collect();
                config.is_isotropic(&g).then_some(g)
            });
            if let Some(g) = fixed {
                break g;
            }
        };
        let span = canonicalize_n(f, vec![fv.clone(), g.clone()], n);
        w = w.intersection(f, &perp(config, &span));
        fs.push(fv);
        gs.push(g);
    }
    let t: Vec<Vector> = fs.into_iter().chain(gs).collect();
    let v: Vector = (0..n).map(|_| rng.gen_range(0..config.q()) as u8).collect();
    Isometry::new(config, t, v).expect("hyperbolic basis preserves the form")
}

pub fn unit(n: usize, i: usize) -> Vector {
    let mut v = vec![0u8; n];
    v[i] = 1;
    v
}

/// Dense symmetric 0/1 matrix stored as bit rows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitMatrix {
    n: usize,
    words: usize,
    bits: Vec<u64>,
}

impl BitMatrix {
    pub fn new(n: usize) -> Self {
        let words = n.div_ceil(64);
        BitMatrix {
            n,
            words,
            bits: vec![0; n * words],
        }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.words + j / 64] >> (j % 64) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize) {
        self.bits[i * self.words + j / 64] |= 1 << (j % 64);
    }

    pub fn row(&self, i: usize) -> &[u64] {
        &self.bits[i * self.words..(i + 1) * self.words]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.row(i).iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn common(&self, i: usize, j: usize) -> usize {
        self.row(i)
            .iter()
            .zip(self.row(j))
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }
}

/// Graph on `F_q^{2ν}` with `x ~ y` iff `x − y` is nonzero isotropic.
pub fn point_graph(config: &SpaceConfig) -> Result<BitMatrix> {
    let n = config.num_points();
    bound("q^(2nu)", n as u128, MAX_POINTS as u128)?;
    let f = config.field();
    let iso: Vec<bool> = (0..n).map(|i| config.is_isotropic(&config.point(i))).collect();
    let pts: Vec<Vector> = (0..n).map(|i| config.point(i)).collect();
    let mut g = BitMatrix::new(n);
    for x in 0..n {
        for y in 0..n {
            if x == y {
                continue;
            }
            let d: Vector = pts[x].iter().zip(&pts[y]).map(|(&a, &b)| f.sub(a, b)).collect();
            if iso[config.point_index(&d)] {
                g.set(x, y);
            }
        }
    }
    Ok(g)
}

/// Strongly regular parameters `(n, k, λ, μ)` or `None`.
pub fn srg_parameters(g: &BitMatrix) -> Option<(usize, usize, usize, usize)> {
    let n = g.size();
    let k = g.degree(0);
    let mut lambda = None;
    let mut mu = None;
    for i in 0..n {
        if g.degree(i) != k {
            return None;
        }
        for j in i + 1..n {
            let c = g.common(i, j);
            let slot = if g.get(i, j) { &mut lambda } else { &mut mu };
            match slot {
                None => *slot = Some(c),
                Some(v) if *v != c => return None,
                _ => {}
            }
        }
    }
    Some((n, k, lambda.unwrap_or(0), mu.unwrap_or(0)))
}

/// Closed-form point graph parameters for the unitary and orthogonal cases.
pub fn srg_closed_form(config: &SpaceConfig) -> (BigInt, BigInt, BigInt, BigInt) {
    let h = config.half_powers();
    let nu = config.nu() as i64;
    let e2 = config.e2() as i64;
    let qn = h.int(2 * nu).unwrap();
    let a = h.int(2 * (nu - 1) + e2).unwrap();
    let n = h.int(4 * nu).unwrap();
    let k = (&qn - 1) * (&a + 1);
    let lambda = &a * &a + &qn - &a - 2;
    let mu = &a * (&a + 1);
    (n, k, lambda, mu)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::big_pow;

    pub(crate) fn configs() -> Vec<SpaceConfig> {
        [
            (Case::Symplectic, 2, 1),
            (Case::Symplectic, 3, 1),
            (Case::Symplectic, 2, 2),
            (Case::Symplectic, 3, 2),
            (Case::Symplectic, 2, 3),
            (Case::Unitary, 4, 1),
            (Case::Unitary, 4, 2),
            (Case::Orthogonal, 3, 1),
            (Case::Orthogonal, 5, 1),
            (Case::Orthogonal, 3, 2),
        ]
        .into_iter()
        .map(|(c, q, nu)| SpaceConfig::new(c, q, nu).unwrap())
        .collect()
    }

    #[test]
    fn config_guards() {
        assert!(SpaceConfig::new(Case::Orthogonal, 2, 2).is_err());
        assert!(SpaceConfig::new(Case::Unitary, 3, 1).is_err());
        assert!(SpaceConfig::new(Case::Unitary, 8, 1).is_err());
        assert!(SpaceConfig::new(Case::Symplectic, 2, 0).is_err());
        assert!(SpaceConfig::new(Case::Symplectic, 9, 3).is_err());
    }

    #[test]
    fn form_values() {
        let c = SpaceConfig::new(Case::Symplectic, 2, 1).unwrap();
        assert_eq!(form_value(&c, &[1, 0], &[0, 1]).unwrap().value(), 1);
        let o = SpaceConfig::new(Case::Orthogonal, 3, 1).unwrap();
        assert_eq!(form_value(&o, &[1, 0], &[1, 0]).unwrap().value(), 0);
        assert!(form_value(&o, &[1, 0, 0], &[1, 0]).is_err());
    }

    /// `x·F·conj(y)ᵀ` by explicit matrix products.
    fn form_generic(c: &SpaceConfig, x: &[u8], y: &[u8]) -> u8 {
        let f = c.field();
        let mut acc = 0;
        for (i, &xi) in x.iter().enumerate() {
            for (j, &yj) in y.iter().enumerate() {
                acc = f.add(acc, f.mul(xi, f.mul(c.form()[i][j], f.conj_or_id(yj))));
            }
        }
        acc
    }

    #[test]
    fn structured_form_matches_matrix_product() {
        for c in configs().into_iter().filter(|c| c.num_points() <= 256) {
            for a in 0..c.num_points() {
                for b in (0..c.num_points()).step_by(7) {
                    let (x, y) = (c.point(a), c.point(b));
                    assert_eq!(c.form_raw(&x, &y), form_generic(&c, &x, &y));
                }
                if c.case() == Case::Symplectic {
                    assert!(c.is_isotropic(&c.point(a)));
                }
            }
        }
    }

    #[test]
    fn canonical_examples() {
        let c = SpaceConfig::new(Case::Symplectic, 2, 1).unwrap();
        let s = canonicalize(&c, &[vec![1, 1], vec![0, 1]]).unwrap();
        assert_eq!(s.basis(), &[vec![1, 0], vec![0, 1]]);
        let t = canonicalize(&c, &[vec![0, 1], vec![1, 0]]).unwrap();
        assert_eq!(s, t);
    }

    #[test]
    fn types() {
        let c = SpaceConfig::new(Case::Symplectic, 2, 2).unwrap();
        let z = Subspace::zero(4);
        assert_eq!(subspace_type(&c, &z), SubspaceType { dim: 0, gram_rank: 0 });
        let p = canonicalize(&c, &[unit(4, 0), unit(4, 1)]).unwrap();
        assert_eq!(subspace_type(&c, &p), SubspaceType { dim: 2, gram_rank: 0 });
        let p = canonicalize(&c, &[unit(4, 0), unit(4, 2)]).unwrap();
        assert_eq!(subspace_type(&c, &p), SubspaceType { dim: 2, gram_rank: 2 });
    }

    /// Scan of all ordered `m`-tuples of vectors.
    fn brute_isotropic(c: &SpaceConfig, m: usize) -> Vec<Subspace> {
        let n = c.num_points();
        let mut out = BTreeSet::new();
        let mut idx = vec![0usize; m];
        loop {
            let rows: Vec<Vector> = idx.iter().map(|&i| c.point(i)).collect();
            let s = canonicalize_n(c.field(), rows, c.dim());
            if s.dim() == m && subspace_type(c, &s).gram_rank == 0 {
                out.insert(s);
            }
            let mut k = m;
            loop {
                if k == 0 {
                    return out.into_iter().collect();
                }
                k -= 1;
                idx[k] += 1;
                if idx[k] < n {
                    break;
                }
                idx[k] = 0;
            }
        }
    }

    #[test]
    fn isotropic_counts_and_oracle() {
        for c in configs() {
            for m in 0..=c.nu() {
                let subs = enumerate_isotropic(&c, m).unwrap();
                let expected = c.flat_count(m) / big_pow(c.q() as u64, (2 * c.nu() - m) as u64);
                assert_eq!(BigInt::from(subs.len()), expected, "{c:?} m={m}");
                for s in &subs {
                    assert_eq!(subspace_type(&c, s), SubspaceType { dim: m, gram_rank: 0 });
                }
                assert!(subs.windows(2).all(|w| w[0] < w[1]));
                if m <= 2 && c.num_points() <= 81 {
                    assert_eq!(subs, brute_isotropic(&c, m), "{c:?} m={m}");
                }
            }
            assert!(enumerate_isotropic(&c, c.nu() + 1).is_err());
        }
        let sym = SpaceConfig::new(Case::Symplectic, 2, 2).unwrap();
        assert_eq!(enumerate_isotropic(&sym, 2).unwrap().len(), 15);
        let uni = SpaceConfig::new(Case::Unitary, 4, 1).unwrap();
        assert_eq!(enumerate_isotropic(&uni, 1).unwrap().len(), 3);
    }

    #[test]
    fn isometries_preserve_and_permute() {
        for c in configs() {
            let maxl = enumerate_isotropic(&c, c.nu()).unwrap();
            let set: BTreeSet<_> = maxl.iter().cloned().collect();
            for seed in 0..50 {
                let g = random_isometry(&c, seed);
                assert_eq!(g, random_isometry(&c, seed));
                let image: BTreeSet<_> = maxl.iter().map(|p| g.apply_subspace(c.field(), p)).collect();
                assert_eq!(image, set, "{c:?} seed {seed}");
            }
        }
    }

    #[test]
    fn isometry_keeps_type() {
        let c = SpaceConfig::new(Case::Symplectic, 3, 2).unwrap();
        let p = canonicalize(&c, &[unit(4, 0), unit(4, 1)]).unwrap();
        for seed in 0..100 {
            let g = random_isometry(&c, seed);
            let img = g.apply_subspace(c.field(), &p);
            assert_eq!(subspace_type(&c, &img), SubspaceType { dim: 2, gram_rank: 0 });
        }
    }

    #[test]
    fn point_graph_parameters() {
        for c in configs() {
            let g = point_graph(&c).unwrap();
            let n = c.num_points();
            if c.case() == Case::Symplectic {
                assert!((0..n).all(|i| g.degree(i) == n - 1));
            } else {
                let (cn, k, l, m) = srg_closed_form(&c);
                let got = srg_parameters(&g).unwrap();
                assert_eq!(
                    (BigInt::from(got.0), BigInt::from(got.1), BigInt::from(got.2), BigInt::from(got.3)),
                    (cn, k, l, m)
                );
            }
        }
        let o = SpaceConfig::new(Case::Orthogonal, 3, 1).unwrap();
        assert_eq!(srg_parameters(&point_graph(&o).unwrap()), Some((9, 4, 1, 2)));
        let u = SpaceConfig::new(Case::Unitary, 4, 1).unwrap();
        assert_eq!(srg_parameters(&point_graph(&u).unwrap()), Some((16, 9, 4, 6)));
    }

    #[test]
    fn subspace_operations() {
        let c = SpaceConfig::new(Case::Symplectic, 3, 2).unwrap();
        let f = c.field();
        let a = canonicalize(&c, &[unit(4, 0), unit(4, 1)]).unwrap();
        let b = canonicalize(&c, &[unit(4, 0), unit(4, 3)]).unwrap();
        let i = a.intersection(f, &b);
        assert_eq!(i.basis(), &[unit(4, 0)]);
        assert_eq!(a.intersection_dim(f, &b), 1);
        assert_eq!(a.vectors(f).len(), 9);
        let p = perp(&c, &a);
        assert_eq!(p, a);
    }
}
