//! The association scheme of maximal totally isotropic flats.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{bound, Error, Result};
use crate::field::{big_pow, gauss_binomial, HalfPowers};
use crate::flats::{flat_meet, Flat, FlatId, Space};
use crate::geometry::{Case, SpaceConfig};

/// Relation `(i, ξ)`; `(ν, 1)` does not occur.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct RelationIndex {
    pub i: usize,
    pub xi: u8,
}

impl RelationIndex {
    pub fn new(i: usize, xi: u8) -> Self {
        RelationIndex { i, xi }
    }

    /// Position `2i + ξ` in the canonical order.
    pub fn position(self) -> usize {
        2 * self.i + self.xi as usize
    }

    pub fn from_position(k: usize) -> Self {
        RelationIndex {
            i: k / 2,
            xi: (k % 2) as u8,
        }
    }
}

impl fmt::Display for RelationIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.i, self.xi)
    }
}

/// `(0,0), (0,1), …, (ν−1,0), (ν−1,1), (ν,0)`.
pub fn relation_indices(nu: usize) -> Vec<RelationIndex> {
    (0..2 * nu + 1).map(RelationIndex::from_position).collect()
}

fn half_powers(case: Case, q: u32) -> Result<HalfPowers> {
    if q < 2 {
        return Err(Error::UnsupportedConfig(format!("q = {q}")));
    }
    HalfPowers::new(q as u64, case == Case::Unitary)
}

fn choose2(n: i64) -> i64 {
    n * (n - 1) / 2
}

/// Eigenvalue `p_i(j)` of the dual polar scheme on `F_q^{2ν′}`.
pub fn dual_polar_eigenvalue(case: Case, q: u32, nu: usize, i: usize, j: usize) -> Result<BigInt> {
    if j > nu {
        return Err(Error::OutOfRange(format!("j = {j} > nu' = {nu}")));
    }
    let hp = half_powers(case, q)?;
    let e2 = case.e2() as i64;
    let (nu, i, j) = (nu as i64, i as i64, j as i64);
    let q = q as u64;
    let mut acc = BigInt::zero();
    for s in (j - i).max(0)..=j.min(nu - i) {
        let t = i + s - j;
        let exp2 = e2 * t + 2 * choose2(j - s) + 2 * choose2(t);
        let term = gauss_binomial(j, s, q) * gauss_binomial(nu - j, nu - i - s, q) * hp.int(exp2)?;
        if (j + s) % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    Ok(acc)
}

/// Valency `v_i = q^{i(i+2e−1)/2}[ν′ i]_q` of the dual polar scheme.
pub fn dual_polar_valency(case: Case, q: u32, nu: usize, i: usize) -> Result<BigInt> {
    let hp = half_powers(case, q)?;
    let i = i as i64;
    Ok(hp.int(i * (i - 1) + case.e2() as i64 * i)? * gauss_binomial(nu as i64, i, q as u64))
}

/// Multiplicity `m_j` of the dual polar scheme on `F_q^{2ν′}`.
pub fn dual_polar_multiplicity(case: Case, q: u32, nu: usize, j: usize) -> Result<BigInt> {
    if j > nu {
        return Err(Error::OutOfRange(format!("j = {j} > nu' = {nu}")));
    }
    let hp = half_powers(case, q)?;
    let e2 = case.e2() as i64;
    let (nu, j) = (nu as i64, j as i64);
    let one = BigRational::one();
    let mut x = BigRational::from_integer(big_pow(q as u64, j as u64) * gauss_binomial(nu, j, q as u64));
    x *= hp.rat(2 * nu + e2 - 4 * j)? + &one;
    x /= hp.rat(2 * nu + e2 - 2 * j)? + &one;
    for s in 1..=j {
        x *= hp.rat(2 * nu + e2 - 2 * s)? + &one;
        x /= hp.rat(2 * s - e2)? + &one;
    }
    if !x.is_integer() {
        return Err(Error::NonIntegral(format!("m_{j} = {x}")));
    }
    Ok(x.to_integer())
}

/// Entry `c^{(ℓ)}_ξ(η)` of the complete graph on `q^ℓ` vertices.
pub fn complete_graph_eigenvalue(q: u32, ell: usize, xi: u8, eta: u8) -> BigInt {
    match (xi, eta) {
        (0, _) => BigInt::one(),
        (_, 0) => big_pow(q as u64, ell as u64) - 1,
        _ => BigInt::from(-1),
    }
}

fn check_index(nu: usize, r: RelationIndex) -> Result<()> {
    if r.i > nu || r.xi > 1 || (r.i == nu && r.xi == 1) {
        return Err(Error::OutOfRange(format!("relation {r} for nu = {nu}")));
    }
    Ok(())
}

/// `v_{(i,ξ)}`.
pub fn valency(case: Case, q: u32, nu: usize, r: RelationIndex) -> Result<BigInt> {
    check_index(nu, r)?;
    let hp = half_powers(case, q)?;
    let i = r.i as i64;
    let v0 = hp.int(i * (i + 1) + case.e2() as i64 * i)? * gauss_binomial(nu as i64, i, q as u64);
    Ok(if r.xi == 0 {
        v0
    } else {
        (big_pow(q as u64, (nu - r.i) as u64) - 1) * v0
    })
}

/// `p_{(i,ξ)}(j,η) = q^i c^{(ν−i)}_ξ(η) p_i^{(2ν−2η)}(j)`.
pub fn scheme_eigenvalue(
    case: Case,
    q: u32,
    nu: usize,
    r: RelationIndex,
    s: RelationIndex,
) -> Result<BigInt> {
    check_index(nu, r)?;
    check_index(nu, s)?;
    let c = complete_graph_eigenvalue(q, nu - r.i, r.xi, s.xi);
    let p = if r.i > nu - s.xi as usize {
        BigInt::zero()
    } else {
        dual_polar_eigenvalue(case, q, nu - s.xi as usize, r.i, s.i)?
    };
    Ok(big_pow(q as u64, r.i as u64) * c * p)
}

/// `m_{(j,η)}`.
pub fn scheme_multiplicity(case: Case, q: u32, nu: usize, s: RelationIndex) -> Result<BigInt> {
    check_index(nu, s)?;
    if s.xi == 0 {
        dual_polar_multiplicity(case, q, nu, s.i)
    } else {
        let hp = half_powers(case, q)?;
        let lead = (big_pow(q as u64, nu as u64) - 1)
            * (hp.int(2 * nu as i64 + case.e2() as i64 - 2)? + 1);
        Ok(lead * dual_polar_multiplicity(case, q, nu - 1, s.i)?)
    }
}

/// Closed-form eigen data of the flat scheme.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SchemeTables {
    pub case: Case,
    pub q: u32,
    pub nu: usize,
    pub indices: Vec<RelationIndex>,
    pub order: BigInt,
    pub valencies: Vec<BigInt>,
    pub multiplicities: Vec<BigInt>,
    /// `p[k][l] = p_k(l)`: relation `k`, eigenspace `l`.
    pub p: Vec<Vec<BigInt>>,
    /// `qm[l][k] = q_l(k) = m_l p_k(l) / v_k`.
    pub qm: Vec<Vec<BigRational>>,
}

impl SchemeTables {
    pub fn new(case: Case, q: u32, nu: usize) -> Result<Self> {
        if nu == 0 {
            return Err(Error::UnsupportedConfig("nu must be at least 1".into()));
        }
        let indices = relation_indices(nu);
        let valencies = indices
            .iter()
            .map(|&r| valency(case, q, nu, r))
            .collect::<Result<Vec<_>>>()?;
        let multiplicities = indices
            .iter()
            .map(|&s| scheme_multiplicity(case, q, nu, s))
            .collect::<Result<Vec<_>>>()?;
        let p = indices
            .iter()
            .map(|&r| {
                indices
                    .iter()
                    .map(|&s| scheme_eigenvalue(case, q, nu, r, s))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let qm = (0..indices.len())
            .map(|l| {
                (0..indices.len())
                    .map(|k| {
                        BigRational::new(&multiplicities[l] * &p[k][l], valencies[k].clone())
                    })
                    .collect()
            })
            .collect();
        let order = valencies.iter().sum();
        Ok(SchemeTables {
            case,
            q,
            nu,
            indices,
            order,
            valencies,
            multiplicities,
            p,
            qm,
        })
    }

    pub fn for_config(config: &SpaceConfig) -> Result<Self> {
        Self::new(config.case(), config.q(), config.nu())
    }

    pub fn classes(&self) -> usize {
        self.indices.len()
    }

    /// `P·Q = |X|·I`.
    pub fn orthogonality_holds(&self) -> bool {
        let d = self.classes();
        let n = BigRational::from_integer(self.order.clone());
        (0..d).all(|a| {
            (0..d).all(|b| {
                // (PQ)[a][b] with P indexed (eigenspace, relation)
                let s: BigRational = (0..d)
                    .map(|k| BigRational::from_integer(self.p[k][a].clone()) * &self.qm[b][k])
                    .sum();
                if a == b {
                    s == n
                } else {
                    s.is_zero()
                }
            })
        })
    }

    /// `Σ_k p_k(l) = |X|` for `l = (0,0)` and `0` otherwise.
    pub fn row_sums_hold(&self) -> bool {
        (0..self.classes()).all(|l| {
            let s: BigInt = (0..self.classes()).map(|k| &self.p[k][l]).sum();
            if l == 0 {
                s == self.order
            } else {
                s.is_zero()
            }
        })
    }

    pub fn basic_invariants_hold(&self) -> bool {
        let d = self.classes();
        (0..d).all(|l| self.p[0][l].is_one())
            && (0..d).all(|k| self.p[k][0] == self.valencies[k])
            && self.multiplicities.iter().sum::<BigInt>() == self.order
            && self.multiplicities[0].is_one()
    }

    pub fn to_json(&self, emit_q: bool) -> serde_json::Value {
        let s = |x: &BigInt| x.to_string();
        let labels: Vec<String> = self.indices.iter().map(|r| r.to_string()).collect();
        let mut v = serde_json::json!({
            "case": self.case,
            "q": self.q.to_string(),
            "nu": self.nu.to_string(),
            "order": s(&self.order),
            "indices": labels,
            "valencies": self.valencies.iter().map(s).collect::<Vec<_>>(),
            "multiplicities": self.multiplicities.iter().map(s).collect::<Vec<_>>(),
            "P": (0..self.classes())
                .map(|l| (0..self.classes()).map(|k| s(&self.p[k][l])).collect::<Vec<_>>())
                .collect::<Vec<_>>(),
        });
        if emit_q {
            v["Q"] = serde_json::json!(self
                .qm
                .iter()
                .map(|row| row.iter().map(|x| x.to_string()).collect::<Vec<_>>())
                .collect::<Vec<_>>());
        }
        v
    }
}

/// Exponent of `q` dividing an eigenvalue, stored doubled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Valuation {
    Finite { twice: i64 },
    Infinite,
}

impl Valuation {
    pub fn as_rational(&self) -> Option<BigRational> {
        match self {
            Valuation::Finite { twice } => Some(BigRational::new((*twice).into(), 2.into())),
            Valuation::Infinite => None,
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.as_rational() {
            Some(r) => write!(f, "{r}"),
            None => f.write_str("inf"),
        }
    }
}

/// Valuation of `x` in the case's base.
pub fn valuation_of(case: Case, q: u32, x: &BigInt) -> Result<Valuation> {
    if x.is_zero() {
        return Ok(Valuation::Infinite);
    }
    let hp = half_powers(case, q)?;
    let b = BigInt::from(hp.base());
    let mut y = x.abs();
    let mut count = 0i64;
    loop {
        let (d, r) = y.div_rem(&b);
        if !r.is_zero() {
            break;
        }
        y = d;
        count += 1;
    }
    Ok(Valuation::Finite {
        twice: count * 2 / hp.steps_per_q(),
    })
}

/// `φ_i(j)` read off the evaluated eigenvalue.
pub fn q_valuation(case: Case, q: u32, nu: usize, i: usize, j: usize) -> Result<Valuation> {
    if i > nu || j > nu {
        return Err(Error::OutOfRange(format!("(i, j) = ({i}, {j}), nu' = {nu}")));
    }
    valuation_of(case, q, &dual_polar_eigenvalue(case, q, nu, i, j)?)
}

/// `φ_i(j)` from the piecewise closed form; `None` outside its domain.
///
/// Covers `j = 0`, and `2 ≤ i ≤ ν′` with `1 ≤ j ≤ ν′`.
pub fn q_valuation_piecewise(case: Case, nu: usize, i: usize, j: usize) -> Option<Valuation> {
    let e2 = case.e2() as i64;
    let (nu, i, j) = (nu as i64, i as i64, j as i64);
    let fin = |twice: i64| Some(Valuation::Finite { twice });
    if i > nu || j > nu {
        return None;
    }
    if j == 0 {
        return fin(i * (i - 1) + e2 * i);
    }
    if j == 1 && i >= 2 {
        return fin((i - 1) * (i - 2) + e2 * (i - 1));
    }
    if i < 2 || j < 2 {
        return None;
    }
    // regime test on 4(j − i/2 − e/2)
    let t = 4 * j - 2 * i - e2;
    if t < 0 {
        return fin(i * (i - 1) + (j - i) * (2 * j - e2));
    }
    if t > 4 * (nu - i) {
        return fin((2 * j - e2 - 2 * nu + 2) * (j - nu + i - 1) + (i - 1) * (i - 2) + e2 * (i - 1));
    }
    match case {
        Case::Orthogonal if i % 2 == 0 => fin(i * (i - 2) / 2),
        Case::Orthogonal => {
            if 2 * j == nu {
                Some(Valuation::Infinite)
            } else {
                fin((i - 1) * (i - 1) / 2)
            }
        }
        Case::Unitary => fin(i * (i - 1) / 2),
        Case::Symplectic if i % 2 == 0 => {
            if 2 * (j - 1) == nu && 2 * i == nu && nu % 4 == 0 {
                Some(Valuation::Infinite)
            } else {
                fin(i * i / 2)
            }
        }
        Case::Symplectic => fin((i * i - 1) / 2),
    }
}

/// A disagreement between direct and closed-form valuations.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ValuationMismatch {
    pub case: Case,
    pub q: u32,
    pub nu: usize,
    pub i: usize,
    pub j: usize,
    pub eigenvalue: String,
    pub direct: String,
    pub closed_form: String,
}

/// Compares both valuations over `2 ≤ i, j ≤ ν′`.
pub fn valuation_mismatches(case: Case, q: u32, nu: usize) -> Result<Vec<ValuationMismatch>> {
    let mut out = Vec::new();
    for i in 2..=nu {
        for j in 2..=nu {
            let p = dual_polar_eigenvalue(case, q, nu, i, j)?;
            let direct = valuation_of(case, q, &p)?;
            let closed = q_valuation_piecewise(case, nu, i, j).expect("domain covered");
            if direct != closed {
                out.push(ValuationMismatch {
                    case,
                    q,
                    nu,
                    i,
                    j,
                    eigenvalue: p.to_string(),
                    direct: direct.to_string(),
                    closed_form: closed.to_string(),
                });
            }
        }
    }
    Ok(out)
}

/// Pairs `(i, j)`, `2 ≤ i ≤ ν′`, `1 ≤ j ≤ ν′`, with `φ_i(0) = φ_i(j)`.
pub fn valuation_coincidences(case: Case, q: u32, nu: usize) -> Result<Vec<(usize, usize)>> {
    let mut out = Vec::new();
    for i in 2..=nu {
        let v0 = q_valuation(case, q, nu, i, 0)?;
        for j in 1..=nu {
            if q_valuation(case, q, nu, i, j)? == v0 {
                out.push((i, j));
            }
        }
    }
    Ok(out)
}

/// The coincidence set allowed by the closed form: `j = ν′` when `e = 0`.
pub fn expected_coincidences(case: Case, nu: usize) -> Vec<(usize, usize)> {
    if case == Case::Orthogonal {
        (2..=nu).map(|i| (i, nu)).collect()
    } else {
        Vec::new()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Exception {
    A,
    B,
    C,
}

/// Listed exception for row `(i,ξ)`, if any.
pub fn listed_exception(nu: usize, r: RelationIndex) -> Option<Exception> {
    if nu >= 2 && r == RelationIndex::new(0, 1) {
        Some(Exception::A)
    } else if nu >= 2 && r == RelationIndex::new(nu, 0) {
        Some(Exception::B)
    } else if r.i.is_multiple_of(2) && 2 <= r.i && r.i < nu {
        Some(Exception::C)
    } else {
        None
    }
}

/// Whether `p_{(i,ξ)}(0,1)` occurs only in column `(0,1)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ColumnUniqueness {
    pub row: RelationIndex,
    pub unique: bool,
    /// Other columns carrying the same value.
    pub repeats: Vec<RelationIndex>,
    pub exception: Option<Exception>,
}

pub fn column_uniqueness(tables: &SchemeTables, r: RelationIndex) -> Result<ColumnUniqueness> {
    check_index(tables.nu, r)?;
    if r == RelationIndex::new(0, 0) {
        return Err(Error::Precondition("row (0,0) is excluded".into()));
    }
    let k = r.position();
    let target = &tables.p[k][1];
    let repeats: Vec<RelationIndex> = (0..tables.classes())
        .filter(|&l| l != 1 && &tables.p[k][l] == target)
        .map(RelationIndex::from_position)
        .collect();
    Ok(ColumnUniqueness {
        row: r,
        unique: repeats.is_empty(),
        repeats,
        exception: listed_exception(tables.nu, r),
    })
}

/// Relation of every ordered pair of `O_ν`, by position `2i+ξ`.
#[derive(Clone, Debug)]
pub struct RelationTable {
    n: usize,
    nu: usize,
    rel: Vec<u8>,
}

/// Relation of two maximal flats from the meet.
pub fn relation_of(config: &SpaceConfig, a: &Flat, b: &Flat) -> Result<RelationIndex> {
    let nu = config.nu();
    if a.dim() != nu || b.dim() != nu {
        return Err(Error::Precondition("flats must be maximal".into()));
    }
    let f = config.field();
    let i = nu - a.direction().intersection_dim(f, b.direction());
    let xi = u8::from(flat_meet(config, a, b).is_none());
    Ok(RelationIndex::new(i, xi))
}

impl RelationTable {
    /// Pairs of directions give `i`; cosets meet iff their reps agree modulo `P+Q`.
    pub fn build(space: &Space) -> Result<Self> {
        let n = space.len();
        bound("|O_nu| for relation table", n as u128, 20_000)?;
        let nu = space.config().nu();
        let f = space.field();
        let dirs = space.directions();
        let per = space.cosets_per_direction();
        let reps: Vec<Vec<u8>> = (0..n).map(|id| space.flat(id).rep().to_vec()).collect();
        let mut rel = vec![0u8; n * n];
        for (da, pa) in dirs.iter().enumerate() {
            for (db, pb) in dirs.iter().enumerate() {
                let sum = pa.sum(f, pb);
                let i = nu - (2 * nu - sum.dim());
                let ka: Vec<Vec<u8>> = (0..per).map(|t| sum.reduce(f, &reps[da * per + t])).collect();
                let kb: Vec<Vec<u8>> = (0..per).map(|t| sum.reduce(f, &reps[db * per + t])).collect();
                for (ta, x) in ka.iter().enumerate() {
                    let row = (da * per + ta) * n + db * per;
                    for (tb, y) in kb.iter().enumerate() {
                        rel[row + tb] = (2 * i + usize::from(x != y)) as u8;
                    }
                }
            }
        }
        Ok(RelationTable { n, nu, rel })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn classes(&self) -> usize {
        2 * self.nu + 1
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize) -> usize {
        self.rel[a * self.n + b] as usize
    }

    pub fn row(&self, a: usize) -> &[u8] {
        &self.rel[a * self.n..(a + 1) * self.n]
    }

    pub fn relation(&self, a: FlatId, b: FlatId) -> RelationIndex {
        RelationIndex::from_position(self.get(a, b))
    }

    /// Dense `A_{(i,ξ)}`.
    pub fn adjacency_matrix(&self, r: RelationIndex) -> Result<Vec<Vec<u8>>> {
        check_index(self.nu, r)?;
        bound("|O_nu| for dense adjacency", self.n as u128, 2_000)?;
        let k = r.position() as u8;
        Ok((0..self.n)
            .map(|a| self.row(a).iter().map(|&x| u8::from(x == k)).collect())
            .collect())
    }

    /// `(A_k·χ)` for every relation `k` at once: `out[k][a]`.
    pub fn relation_counts(&self, chi: &[i64]) -> Vec<Vec<i64>> {
        let mut out = vec![vec![0i64; self.n]; self.classes()];
        for a in 0..self.n {
            for (b, &k) in self.row(a).iter().enumerate() {
                if chi[b] != 0 {
                    out[k as usize][a] += chi[b];
                }
            }
        }
        out
    }

    fn relation_counts_i128(&self, v: &[i128]) -> Vec<Vec<i128>> {
        let mut out = vec![vec![0i128; self.n]; self.classes()];
        for a in 0..self.n {
            for (b, &k) in self.row(a).iter().enumerate() {
                out[k as usize][a] += v[b];
            }
        }
        out
    }

    /// `cnt[b][k][m] = #{c : rel(a,c)=k, rel(c,b)=m}` for fixed `a`.
    fn intersection_row(&self, a: usize) -> Vec<u32> {
        let d = self.classes();
        let mut cnt = vec![0u32; self.n * d * d];
        for c in 0..self.n {
            let k = self.get(a, c);
            for (b, &m) in self.row(c).iter().enumerate() {
                cnt[(b * d + k) * d + m as usize] += 1;
            }
        }
        cnt
    }

    fn intersection_pair(&self, a: usize, b: usize) -> Vec<u32> {
        let d = self.classes();
        let mut cnt = vec![0u32; d * d];
        for c in 0..self.n {
            cnt[self.get(a, c) * d + self.get(c, b)] += 1;
        }
        cnt
    }
}

/// Findings of a scheme verification.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SchemeReport {
    pub flats: usize,
    pub mode: String,
    pub pairs_checked: usize,
    pub failures: Vec<String>,
}

impl SchemeReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Brute-force association scheme axioms over the built relation table.
pub fn verify_scheme(space: &Space, table: &RelationTable, seed: u64) -> Result<SchemeReport> {
    let n = space.len();
    bound("|O_nu| for scheme verification", n as u128, 1100)?;
    let tables = SchemeTables::for_config(space.config())?;
    let d = table.classes();
    let mut rep = SchemeReport {
        flats: n,
        ..Default::default()
    };
    // partition, reflexivity, symmetry, valencies
    for a in 0..n {
        if table.get(a, a) != 0 {
            rep.failures.push(format!("flat {a} not in (0,0) with itself"));
        }
        let mut deg = vec![0usize; d];
        for b in 0..n {
            let k = table.get(a, b);
            if k >= d {
                rep.failures.push(format!("pair ({a},{b}) has no relation"));
                continue;
            }
            deg[k] += 1;
            if k == 0 && a != b {
                rep.failures.push(format!("distinct flats {a},{b} in (0,0)"));
            }
            if table.get(b, a) != k {
                rep.failures.push(format!("pair ({a},{b}) not symmetric"));
            }
        }
        for k in 0..d {
            if BigInt::from(deg[k]) != tables.valencies[k] {
                rep.failures.push(format!(
                    "flat {a}: relation {} has {} members, expected {}",
                    RelationIndex::from_position(k),
                    deg[k],
                    tables.valencies[k]
                ));
            }
        }
        if rep.failures.len() > 20 {
            return Ok(rep);
        }
    }
    // intersection numbers p^l_{km} constant on each class l
    let mut seen: Vec<Option<Vec<u32>>> = vec![None; d];
    let mut check = |a: usize, b: usize, cnt: &[u32], rep: &mut SchemeReport| {
        let l = table.get(a, b);
        match &seen[l] {
            None => seen[l] = Some(cnt.to_vec()),
            Some(s) if s.as_slice() != cnt => rep.failures.push(format!(
                "intersection numbers differ within class {} at ({a},{b})",
                RelationIndex::from_position(l)
            )),
            _ => {}
        }
        rep.pairs_checked += 1;
    };
    if n <= 120 {
        rep.mode = "exhaustive".into();
        for a in 0..n {
            let row = table.intersection_row(a);
            for b in 0..n {
                check(a, b, &row[b * d * d..(b + 1) * d * d], &mut rep);
            }
        }
    } else {
        rep.mode = format!("sampled 10000 pairs, seed {seed}");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..10_000 {
            let a = rng.gen_range(0..n);
            let b = rng.gen_range(0..n);
            let cnt = table.intersection_pair(a, b);
            check(a, b, &cnt, &mut rep);
        }
    }
    Ok(rep)
}

/// Idempotents `E_l = (m_l / (|X|·L)) Σ_k coeff[l][k] A_k` with integer `coeff`.
#[derive(Clone, Debug)]
pub struct Idempotents {
    /// `coeff[l][k] = p_k(l)·L / v_k`.
    pub coeff: Vec<Vec<i128>>,
    /// `L = lcm` of the valencies.
    pub lcm: i128,
    pub multiplicities: Vec<i128>,
    pub order: i128,
}

fn to_i128(x: &BigInt, what: &str) -> Result<i128> {
    x.to_i128()
        .ok_or_else(|| Error::Inconsistent(format!("{what} = {x} exceeds 128 bits")))
}

impl Idempotents {
    pub fn new(tables: &SchemeTables) -> Result<Self> {
        let d = tables.classes();
        let l = tables
            .valencies
            .iter()
            .fold(BigInt::one(), |acc, v| acc.lcm(v));
        let coeff = (0..d)
            .map(|e| {
                (0..d)
                    .map(|k| to_i128(&(&tables.p[k][e] * &l / &tables.valencies[k]), "coefficient"))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Idempotents {
            coeff,
            lcm: to_i128(&l, "lcm")?,
            multiplicities: tables
                .multiplicities
                .iter()
                .map(|m| to_i128(m, "multiplicity"))
                .collect::<Result<_>>()?,
            order: to_i128(&tables.order, "order")?,
        })
    }

    pub fn classes(&self) -> usize {
        self.coeff.len()
    }

    /// Entry `(a,b)` of `E_l` as an exact rational.
    pub fn entry(&self, table: &RelationTable, l: usize, a: usize, b: usize) -> BigRational {
        BigRational::new(
            BigInt::from(self.multiplicities[l]) * BigInt::from(self.coeff[l][table.get(a, b)]),
            BigInt::from(self.order) * BigInt::from(self.lcm),
        )
    }

    /// Dense `E_l` as an exact rational matrix.
    pub fn matrix(&self, table: &RelationTable, l: usize) -> Result<crate::exact::RationalMatrix> {
        let n = table.size();
        bound("|O_nu| for dense idempotent", n as u128, 500)?;
        crate::exact::RationalMatrix::from_rows(
            (0..n)
                .map(|a| (0..n).map(|b| self.entry(table, l, a, b)).collect())
                .collect(),
        )
    }

    /// `Ẽ_l·v`; `E_l·v = m_l/(|X| L) · Ẽ_l·v`.
    pub fn apply_scaled(&self, table: &RelationTable, l: usize, v: &[i128]) -> Vec<i128> {
        let c = &self.coeff[l];
        (0..table.size())
            .map(|a| {
                table
                    .row(a)
                    .iter()
                    .zip(v)
                    .map(|(&k, &x)| c[k as usize] * x)
                    .sum()
            })
            .collect()
    }

    /// Whether `E_l·χ = 0`.
    pub fn annihilates(&self, table: &RelationTable, l: usize, chi: &[i64]) -> bool {
        let v: Vec<i128> = chi.iter().map(|&x| x as i128).collect();
        self.apply_scaled(table, l, &v).iter().all(|&x| x == 0)
    }

    /// `E_l·χ` as exact rationals.
    pub fn project(&self, table: &RelationTable, l: usize, chi: &[i64]) -> Vec<BigRational> {
        let v: Vec<i128> = chi.iter().map(|&x| x as i128).collect();
        let den = BigInt::from(self.order) * BigInt::from(self.lcm);
        self.apply_scaled(table, l, &v)
            .into_iter()
            .map(|x| BigRational::new(BigInt::from(x) * BigInt::from(self.multiplicities[l]), den.clone()))
            .collect()
    }
}

/// Exact matrix identities of the idempotents against the built scheme.
pub fn verify_idempotents(
    tables: &SchemeTables,
    table: &RelationTable,
    idem: &Idempotents,
) -> Result<SchemeReport> {
    let n = table.size();
    bound("|O_nu| for exact idempotent products", n as u128, 500)?;
    let d = idem.classes();
    let p: Vec<Vec<i128>> = tables
        .p
        .iter()
        .map(|row| row.iter().map(|x| to_i128(x, "eigenvalue")).collect::<Result<_>>())
        .collect::<Result<_>>()?;
    let mut rep = SchemeReport {
        flats: n,
        mode: "exact products".into(),
        ..Default::default()
    };
    let xl = idem.order * idem.lcm;
    // Σ_l E_l = I, entrywise by relation class
    for k in 0..d {
        let s: i128 = (0..d).map(|l| idem.multiplicities[l] * idem.coeff[l][k]).sum();
        if s != if k == 0 { xl } else { 0 } {
            rep.failures.push(format!("sum of idempotents wrong on class {k}"));
        }
    }
    for l in 0..d {
        let diag: i128 = (0..n).map(|a| idem.coeff[l][table.get(a, a)]).sum();
        // trace E_l = m_l·diag/(|X| L)
        if idem.multiplicities[l] * diag != idem.multiplicities[l] * xl {
            rep.failures.push(format!("trace of E_{l} differs from m_{l}"));
        }
    }
    for a in 0..n {
        let cnt = table.intersection_row(a);
        for b in 0..n {
            let c = &cnt[b * d * d..(b + 1) * d * d];
            let rab = table.get(a, b);
            for l in 0..d {
                let el = idem.coeff[l][rab];
                for k in 0..d {
                    // (A_k Ẽ_l)[a][b]
                    let s: i128 = (0..d).map(|m| c[k * d + m] as i128 * idem.coeff[l][m]).sum();
                    if s != p[k][l] * el {
                        rep.failures.push(format!("A_{k} E_{l} != p E_{l} at ({a},{b})"));
                    }
                }
                for l2 in 0..d {
                    // (Ẽ_l Ẽ_l2)[a][b]
                    let mut s: i128 = 0;
                    for k in 0..d {
                        for m in 0..d {
                            let w = c[k * d + m] as i128;
                            if w != 0 {
                                s += w * idem.coeff[l][k] * idem.coeff[l2][m];
                            }
                        }
                    }
                    let want = if l == l2 { xl * el } else { 0 };
                    if idem.multiplicities[l2] * s != want {
                        rep.failures.push(format!("E_{l} E_{l2} wrong at ({a},{b})"));
                    }
                }
            }
            rep.pairs_checked += 1;
            if rep.failures.len() > 20 {
                return Ok(rep);
            }
        }
    }
    Ok(rep)
}

/// Eigen-identities of the idempotents on seeded integer probe vectors.
pub fn verify_idempotents_probe(
    tables: &SchemeTables,
    table: &RelationTable,
    idem: &Idempotents,
    probes: usize,
    seed: u64,
) -> Result<SchemeReport> {
    let n = table.size();
    let d = idem.classes();
    let p: Vec<Vec<i128>> = tables
        .p
        .iter()
        .map(|row| row.iter().map(|x| to_i128(x, "eigenvalue")).collect::<Result<_>>())
        .collect::<Result<_>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = SchemeReport {
        flats: n,
        mode: format!("{probes} probe vectors, seed {seed}"),
        ..Default::default()
    };
    let xl = idem.order * idem.lcm;
    for t in 0..probes {
        let v: Vec<i128> = (0..n).map(|_| rng.gen_range(-3i128..=3)).collect();
        let mut total = vec![0i128; n];
        for l in 0..d {
            let w = idem.apply_scaled(table, l, &v);
            let aw = table.relation_counts_i128(&w);
            for k in 0..d {
                if aw[k].iter().zip(&w).any(|(&x, &y)| x != p[k][l] * y) {
                    rep.failures.push(format!("probe {t}: A_{k} E_{l} v != p E_{l} v"));
                }
            }
            if t < 10 {
                let ww = idem.apply_scaled(table, l, &w);
                if ww.iter().zip(&w).any(|(&x, &y)| idem.multiplicities[l] * x != xl * y) {
                    rep.failures.push(format!("probe {t}: E_{l}^2 v != E_{l} v"));
                }
            }
            for (tot, x) in total.iter_mut().zip(&w) {
                *tot += idem.multiplicities[l] * x;
            }
        }
        if total.iter().zip(&v).any(|(&x, &y)| x != xl * y) {
            rep.failures.push(format!("probe {t}: sum of E_l v != v"));
        }
        rep.pairs_checked += 1;
    }
    Ok(rep)
}

/// Closed-form tables together with the relation table and idempotents of a space.
#[derive(Clone, Debug)]
pub struct BuiltScheme {
    pub tables: SchemeTables,
    pub relations: RelationTable,
    pub idempotents: Idempotents,
}

impl BuiltScheme {
    pub fn new(space: &Space) -> Result<Self> {
        let tables = SchemeTables::for_config(space.config())?;
        let idempotents = Idempotents::new(&tables)?;
        Ok(BuiltScheme {
            relations: RelationTable::build(space)?,
            tables,
            idempotents,
        })
    }

    /// Verifies the idempotents exactly, or by probes above 500 flats.
    pub fn verify_idempotents(&self, seed: u64) -> Result<SchemeReport> {
        if self.relations.size() <= 500 {
            verify_idempotents(&self.tables, &self.relations, &self.idempotents)
        } else {
            verify_idempotents_probe(&self.tables, &self.relations, &self.idempotents, 100, seed)
        }
    }

    /// Whether `E_l·χ = 0`.
    pub fn annihilates(&self, l: usize, chi: &[i64]) -> bool {
        self.idempotents.annihilates(&self.relations, l, chi)
    }
}

/// Inner distribution `u_k = χᵀ A_k χ / |S|`.
pub fn inner_distribution(table: &RelationTable, ids: &[FlatId]) -> Result<Vec<BigRational>> {
    if ids.is_empty() {
        return Err(Error::Precondition("inner distribution of the empty set".into()));
    }
    let mut cnt = vec![0i64; table.classes()];
    for &a in ids {
        for &b in ids {
            cnt[table.get(a, b)] += 1;
        }
    }
    let s = BigInt::from(ids.len());
    Ok(cnt
        .into_iter()
        .map(|c| BigRational::new(c.into(), s.clone()))
        .collect())
}

/// `(uQ)_l = Σ_k u_k q_l(k)`.
pub fn distribution_transform(tables: &SchemeTables, u: &[BigRational]) -> Vec<BigRational> {
    (0..tables.classes())
        .map(|l| {
            u.iter()
                .zip(&tables.qm[l])
                .map(|(a, b)| a * b)
                .sum()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{rank_i64, RationalMatrix};
    use crate::geometry::SpaceConfig;

    fn b(x: i64) -> BigInt {
        BigInt::from(x)
    }

    fn cases() -> Vec<(Case, u32)> {
        vec![
            (Case::Symplectic, 2),
            (Case::Symplectic, 3),
            (Case::Symplectic, 4),
            (Case::Unitary, 4),
            (Case::Unitary, 9),
            (Case::Orthogonal, 3),
            (Case::Orthogonal, 5),
        ]
    }

    #[test]
    fn dual_polar_examples() {
        let s = Case::Symplectic;
        let p1: Vec<_> = (0..3).map(|j| dual_polar_eigenvalue(s, 2, 2, 1, j).unwrap()).collect();
        assert_eq!(p1, vec![b(6), b(1), b(-3)]);
        let p2: Vec<_> = (0..3).map(|j| dual_polar_eigenvalue(s, 2, 2, 2, j).unwrap()).collect();
        assert_eq!(p2, vec![b(8), b(-2), b(2)]);
        let m: Vec<_> = (0..3).map(|j| dual_polar_multiplicity(s, 2, 2, j).unwrap()).collect();
        assert_eq!(m, vec![b(1), b(9), b(5)]);
    }

    /// `m_j = |X| / Σ_t p_t(j)^2 / v_t`.
    fn multiplicity_oracle(case: Case, q: u32, nu: usize, j: usize) -> BigRational {
        let mut s = BigRational::zero();
        let mut total = BigInt::zero();
        for t in 0..=nu {
            let v = dual_polar_valency(case, q, nu, t).unwrap();
            let p = dual_polar_eigenvalue(case, q, nu, t, j).unwrap();
            s += BigRational::new(&p * &p, v.clone());
            total += v;
        }
        BigRational::from_integer(total) / s
    }

    #[test]
    fn dual_polar_identities() {
        for (case, q) in cases() {
            for nu in 1..=5 {
                let mut total = BigInt::zero();
                for j in 0..=nu {
                    let m = dual_polar_multiplicity(case, q, nu, j).unwrap();
                    assert_eq!(BigRational::from_integer(m.clone()), multiplicity_oracle(case, q, nu, j));
                    total += &m;
                    let p1 = dual_polar_eigenvalue(case, q, nu, 1, j).unwrap();
                    let hp = half_powers(case, q).unwrap();
                    let want = hp.int(case.e2() as i64).unwrap() * gauss_binomial((nu - j) as i64, 1, q as u64)
                        - gauss_binomial(j as i64, 1, q as u64);
                    assert_eq!(p1, want);
                }
                let cfg_total: BigInt = (1..=nu as i64)
                    .map(|t| half_powers(case, q).unwrap().int(2 * t + case.e2() as i64 - 2).unwrap() + 1)
                    .product();
                assert_eq!(total, cfg_total);
                for i in 0..=nu {
                    assert_eq!(
                        dual_polar_eigenvalue(case, q, nu, i, 0).unwrap(),
                        dual_polar_valency(case, q, nu, i).unwrap()
                    );
                    if i > 0 {
                        let s: BigInt = (0..=nu)
                            .map(|j| {
                                dual_polar_multiplicity(case, q, nu, j).unwrap()
                                    * dual_polar_eigenvalue(case, q, nu, i, j).unwrap()
                            })
                            .sum();
                        assert!(s.is_zero());
                    }
                }
            }
        }
    }

    #[test]
    fn symplectic_22_tables() {
        let t = SchemeTables::new(Case::Symplectic, 2, 2).unwrap();
        assert_eq!(t.valencies, vec![b(1), b(3), b(12), b(12), b(32)]);
        assert_eq!(t.multiplicities, vec![b(1), b(15), b(9), b(30), b(5)]);
        assert_eq!(t.p[RelationIndex::new(1, 0).position()][1], b(4));
        assert_eq!(t.order, b(60));
        for l in 0..5 {
            assert_eq!(t.p[0][l], b(1));
        }
        assert!(t.orthogonality_holds());
        assert!(t.row_sums_hold());
        assert!(t.basic_invariants_hold());
        let q = 2u32;
        for l in 0..5 {
            let want = if l % 2 == 0 { b(3) } else { b(-1) };
            assert_eq!(t.p[1][l], want);
        }
        let _ = q;
        let o = SchemeTables::new(Case::Orthogonal, 3, 2).unwrap();
        assert_eq!(o.order, b(72));
    }

    #[test]
    fn tables_invariants_grid() {
        for (case, q) in cases() {
            for nu in 1..=5 {
                let t = SchemeTables::new(case, q, nu).unwrap();
                assert!(t.orthogonality_holds(), "{case} q={q} nu={nu}");
                assert!(t.row_sums_hold());
                assert!(t.basic_invariants_hold());
                let m01 = &t.multiplicities[1];
                let hp = half_powers(case, q).unwrap();
                let rank: BigInt = (big_pow(q as u64, nu as u64) - 1)
                    * (hp.int(2 * (nu as i64 - 1) + case.e2() as i64).unwrap() + 1)
                    + 1;
                assert_eq!(m01 + BigInt::one(), rank);
            }
        }
    }

    #[test]
    fn piecewise_low_j() {
        for (case, q) in cases() {
            for nu in 1..=8 {
                for i in 0..=nu {
                    for j in 0..=1.min(nu) {
                        if j == 1 && i < 2 {
                            continue;
                        }
                        assert_eq!(
                            q_valuation(case, q, nu, i, j).unwrap(),
                            q_valuation_piecewise(case, nu, i, j).unwrap(),
                            "{case} q={q} nu={nu} i={i} j={j}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn valuation_examples() {
        assert_eq!(q_valuation(Case::Symplectic, 2, 2, 2, 1).unwrap(), Valuation::Finite { twice: 2 });
        assert_eq!(valuation_of(Case::Unitary, 4, &b(8)).unwrap(), Valuation::Finite { twice: 3 });
        assert_eq!(valuation_of(Case::Orthogonal, 3, &b(0)).unwrap(), Valuation::Infinite);
        // orthogonal odd i at j = ν/2 in the middle regime
        assert_eq!(q_valuation(Case::Orthogonal, 3, 6, 3, 3).unwrap(), Valuation::Infinite);
        assert_eq!(q_valuation_piecewise(Case::Orthogonal, 6, 3, 3), Some(Valuation::Infinite));
        // a direct value the closed form misses: symplectic q=3, ν′=3, i=j=2
        assert_eq!(dual_polar_eigenvalue(Case::Symplectic, 3, 3, 2, 2).unwrap(), b(-9));
        assert_ne!(
            q_valuation(Case::Symplectic, 3, 3, 2, 2).unwrap(),
            q_valuation_piecewise(Case::Symplectic, 3, 2, 2).unwrap()
        );
    }

    #[test]
    fn column_uniqueness_examples() {
        let t = SchemeTables::new(Case::Symplectic, 2, 2).unwrap();
        assert!(column_uniqueness(&t, RelationIndex::new(1, 0)).unwrap().unique);
        let a = column_uniqueness(&t, RelationIndex::new(0, 1)).unwrap();
        assert!(!a.unique);
        assert_eq!(a.exception, Some(Exception::A));
        let bb = column_uniqueness(&t, RelationIndex::new(2, 0)).unwrap();
        assert!(!bb.unique);
        assert_eq!(bb.exception, Some(Exception::B));
        assert!(column_uniqueness(&t, RelationIndex::new(0, 0)).is_err());
    }

    fn small_spaces() -> Vec<Space> {
        [
            (Case::Symplectic, 2, 1),
            (Case::Symplectic, 3, 1),
            (Case::Symplectic, 2, 2),
            (Case::Unitary, 4, 1),
            (Case::Orthogonal, 3, 1),
            (Case::Orthogonal, 3, 2),
        ]
        .into_iter()
        .map(|(c, q, nu)| Space::new(SpaceConfig::new(c, q, nu).unwrap()).unwrap())
        .collect()
    }

    #[test]
    fn relation_table_matches_meet() {
        for space in small_spaces() {
            let t = RelationTable::build(&space).unwrap();
            let flats = space.flats();
            for a in 0..space.len() {
                for bb in 0..space.len() {
                    assert_eq!(
                        t.relation(a, bb),
                        relation_of(space.config(), &flats[a], &flats[bb]).unwrap()
                    );
                }
            }
        }
    }

    #[test]
    fn relation_examples() {
        use crate::flats::flat_make;
        use crate::geometry::{canonicalize, unit};
        let c = SpaceConfig::new(Case::Symplectic, 2, 2).unwrap();
        let a = flat_make(&c, &canonicalize(&c, &[unit(4, 0), unit(4, 1)]).unwrap(), &[0; 4]).unwrap();
        let bb = flat_make(&c, &canonicalize(&c, &[unit(4, 0), unit(4, 3)]).unwrap(), &unit(4, 1)).unwrap();
        // e₂ lies in both flats
        assert_eq!(relation_of(&c, &a, &bb).unwrap(), RelationIndex::new(1, 0));
        let b3 = flat_make(&c, bb.direction(), &unit(4, 2)).unwrap();
        assert_eq!(relation_of(&c, &a, &b3).unwrap(), RelationIndex::new(1, 1));
        assert_eq!(relation_of(&c, &a, &a).unwrap(), RelationIndex::new(0, 0));
        let a2 = flat_make(&c, a.direction(), &unit(4, 2)).unwrap();
        assert_eq!(relation_of(&c, &a, &a2).unwrap(), RelationIndex::new(0, 1));
    }

    #[test]
    fn scheme_axioms_and_idempotents() {
        for space in small_spaces() {
            let t = RelationTable::build(&space).unwrap();
            let rep = verify_scheme(&space, &t, 0).unwrap();
            assert!(rep.passed(), "{:?}", rep.failures);
            let tables = SchemeTables::for_config(space.config()).unwrap();
            let idem = Idempotents::new(&tables).unwrap();
            let rep = verify_idempotents(&tables, &t, &idem).unwrap();
            assert!(rep.passed(), "{:?}", rep.failures);
            let rep = verify_idempotents_probe(&tables, &t, &idem, 5, 1).unwrap();
            assert!(rep.passed(), "{:?}", rep.failures);
        }
    }

    #[test]
    fn adjacency_row_sums_22() {
        let space = small_spaces().remove(2);
        let t = RelationTable::build(&space).unwrap();
        let a = t.adjacency_matrix(RelationIndex::new(1, 0)).unwrap();
        assert!(a.iter().all(|r| r.iter().map(|&x| x as usize).sum::<usize>() == 12));
        let id = t.adjacency_matrix(RelationIndex::new(0, 0)).unwrap();
        assert!((0..60).all(|i| (0..60).all(|j| id[i][j] == u8::from(i == j))));
    }

    #[test]
    fn dense_idempotent_products_22() {
        let space = small_spaces().remove(2);
        let t = RelationTable::build(&space).unwrap();
        let tables = SchemeTables::for_config(space.config()).unwrap();
        let idem = Idempotents::new(&tables).unwrap();
        let e11 = idem.matrix(&t, 3).unwrap();
        let trace: BigRational = (0..60).map(|i| e11.get(i, i).clone()).sum();
        assert_eq!(trace, BigRational::from_integer(b(30)));
        let sq = e11.mul(&e11).unwrap();
        assert_eq!(sq, e11);
        let e00 = idem.matrix(&t, 0).unwrap();
        assert!((0..60).all(|i| (0..60).all(|j| *e00.get(i, j) == BigRational::new(b(1), b(60)))));
        // rank of E_l equals m_l
        for l in 0..5 {
            let m = idem.matrix(&t, l).unwrap();
            assert_eq!(BigInt::from(crate::exact::rank(&m)), tables.multiplicities[l]);
        }
        let _ = RationalMatrix::identity(1);
        let _ = rank_i64(&[vec![1]]);
    }

    #[test]
    fn inner_distributions() {
        let space = small_spaces().remove(2);
        let t = RelationTable::build(&space).unwrap();
        let tables = SchemeTables::for_config(space.config()).unwrap();
        let idem = Idempotents::new(&tables).unwrap();
        let pencil = space.pencil(0);
        let u = inner_distribution(&t, &pencil).unwrap();
        let r = |x: i64| BigRational::from_integer(b(x));
        assert_eq!(u, vec![r(1), r(0), r(6), r(0), r(8)]);
        let spread: Vec<usize> = (0..4).collect();
        let u = inner_distribution(&t, &spread).unwrap();
        assert_eq!(u, vec![r(1), r(3), r(0), r(0), r(0)]);
        assert_eq!(inner_distribution(&t, &[5]).unwrap(), vec![r(1), r(0), r(0), r(0), r(0)]);
        assert!(inner_distribution(&t, &[]).is_err());
        // (uQ)_l = 0 iff E_l χ = 0
        for ids in [pencil, spread, vec![0, 7, 22, 40]] {
            let u = inner_distribution(&t, &ids).unwrap();
            let uq = distribution_transform(&tables, &u);
            let mut chi = vec![0i64; space.len()];
            for &i in &ids {
                chi[i] = 1;
            }
            for l in 0..5 {
                assert_eq!(uq[l].is_zero(), idem.annihilates(&t, l, &chi));
            }
        }
    }
}
