//! Flats, the enumeration of `O_ν` and the point–flat incidence structure.

use std::collections::{BTreeSet, HashMap};

use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::error::{bound, Error, Result};
use crate::field::FiniteField;
use crate::geometry::{
    canonicalize_n, enumerate_isotropic, subspace_type, SpaceConfig, Subspace, Vector,
};

/// Position of a flat in the canonical enumeration of `O_ν`.
pub type FlatId = usize;

/// Largest `|O_m|` that will be enumerated.
pub const MAX_FLATS: u128 = 100_000;

/// The coset `direction + rep` with `rep` zero on the pivot columns.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Flat {
    direction: Subspace,
    rep: Vector,
}

impl Flat {
    pub fn direction(&self) -> &Subspace {
        &self.direction
    }

    pub fn rep(&self) -> &[u8] {
        &self.rep
    }

    pub fn dim(&self) -> usize {
        self.direction.dim()
    }

    pub fn contains_point(&self, f: &FiniteField, x: &[u8]) -> bool {
        self.direction.reduce(f, x) == self.rep
    }

    pub fn contains_flat(&self, f: &FiniteField, other: &Flat) -> bool {
        self.direction.contains_subspace(f, &other.direction) && self.contains_point(f, &other.rep)
    }

    pub fn points(&self, f: &FiniteField) -> Vec<Vector> {
        self.direction
            .vectors(f)
            .into_iter()
            .map(|v| v.iter().zip(&self.rep).map(|(&a, &b)| f.add(a, b)).collect())
            .collect()
    }

    pub fn to_json(&self) -> FlatJson {
        FlatJson {
            basis: self
                .direction
                .basis()
                .iter()
                .map(|r| r.iter().map(|&c| c as u32).collect())
                .collect(),
            rep: self.rep.iter().map(|&c| c as u32).collect(),
        }
    }
}

/// Wire form of a flat: field elements as integer encodings.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlatJson {
    pub basis: Vec<Vec<u32>>,
    pub rep: Vec<u32>,
}

impl FlatJson {
    pub fn to_flat(&self, config: &SpaceConfig) -> Result<Flat> {
        let to_vec = |r: &Vec<u32>| -> Result<Vector> {
            let v: Vector = r.iter().map(|&c| c.min(255) as u8).collect();
            if r.iter().any(|&c| c >= config.q()) {
                return Err(Error::OutOfRange(format!("field element in {r:?}")));
            }
            config.check_vector(&v)?;
            Ok(v)
        };
        let rows = self.basis.iter().map(to_vec).collect::<Result<Vec<_>>>()?;
        let p = canonicalize_n(config.field(), rows, config.dim());
        flat_make(config, &p, &to_vec(&self.rep)?)
    }
}

fn sub_vec(f: &FiniteField, a: &[u8], b: &[u8]) -> Vector {
    a.iter().zip(b).map(|(&x, &y)| f.sub(x, y)).collect()
}

/// Canonical flat `P + x`.
pub fn flat_make(config: &SpaceConfig, p: &Subspace, x: &[u8]) -> Result<Flat> {
    config.check_vector(x)?;
    if p.ambient() != config.dim() {
        return Err(Error::DimensionMismatch {
            expected: config.dim(),
            got: p.ambient(),
        });
    }
    Ok(Flat {
        direction: p.clone(),
        rep: p.reduce(config.field(), x),
    })
}

/// Intersection of two flats, `None` when empty.
pub fn flat_meet(config: &SpaceConfig, a: &Flat, b: &Flat) -> Option<Flat> {
    let f = config.field();
    let n = config.dim();
    let d = sub_vec(f, &b.rep, &a.rep);
    // Write d = u + w with u ∈ V1, w ∈ V2.
    let mut rows: Vec<Vector> = a.direction.basis().to_vec();
    rows.extend(b.direction.basis().iter().cloned());
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
    let pivots = crate::geometry::rref_in_place(f, &mut aug, n + k);
    // Express d in the echelon basis.
    let mut rem = d.clone();
    rem.extend(std::iter::repeat_n(0, k));
    for (row, &p) in aug.iter().zip(&pivots) {
        if p >= n {
            break;
        }
        let c = rem[p];
        if c != 0 {
            for (ri, &bi) in rem.iter_mut().zip(row) {
                *ri = f.sub(*ri, f.mul(c, bi));
            }
        }
    }
    if rem[..n].iter().any(|&c| c != 0) {
        return None;
    }
    let coeffs: Vector = rem[n..].iter().map(|&c| f.neg(c)).collect();
    let a_dim = a.direction.dim();
    let mut u = vec![0u8; n];
    for (c, row) in coeffs[..a_dim].iter().zip(a.direction.basis()) {
        for (ui, &ri) in u.iter_mut().zip(row) {
            *ui = f.add(*ui, f.mul(*c, ri));
        }
    }
    let point: Vector = a.rep.iter().zip(&u).map(|(&x, &y)| f.add(x, y)).collect();
    debug_assert!(a.contains_point(f, &point) && b.contains_point(f, &point));
    let dir = a.direction.intersection(f, &b.direction);
    Some(Flat {
        rep: dir.reduce(f, &point),
        direction: dir,
    })
}

/// Smallest flat containing both.
pub fn flat_join(config: &SpaceConfig, a: &Flat, b: &Flat) -> Flat {
    let f = config.field();
    let mut rows = a.direction.basis().to_vec();
    rows.extend(b.direction.basis().iter().cloned());
    rows.push(sub_vec(f, &b.rep, &a.rep));
    let dir = canonicalize_n(f, rows, config.dim());
    Flat {
        rep: dir.reduce(f, &a.rep),
        direction: dir,
    }
}

/// Vectors with zeros on `pivots`, free coordinates in lexicographic order.
fn coset_reps(config: &SpaceConfig, p: &Subspace) -> Vec<Vector> {
    let n = config.dim();
    let free: Vec<usize> = (0..n).filter(|c| !p.pivots().contains(c)).collect();
    let q = config.q() as usize;
    let total = q.pow(free.len() as u32);
    (0..total)
        .map(|mut r| {
            let mut v = vec![0u8; n];
            for &c in free.iter().rev() {
                v[c] = (r % q) as u8;
                r /= q;
            }
            v
        })
        .collect()
}

/// All type-`(m,0)` flats, in canonical order.
pub fn enumerate_flats(config: &SpaceConfig, m: usize) -> Result<Vec<Flat>> {
    if m > config.nu() {
        return Err(Error::OutOfRange(format!("m = {m} exceeds nu")));
    }
    let size = config.flat_count(m).to_u128().unwrap_or(u128::MAX);
    bound("|O_m|", size, MAX_FLATS)?;
    let mut out = Vec::with_capacity(size as usize);
    for p in enumerate_isotropic(config, m)? {
        for rep in coset_reps(config, &p) {
            out.push(Flat {
                direction: p.clone(),
                rep,
            });
        }
    }
    Ok(out)
}

/// All type-`(j,0)` flats containing `flat`.
pub fn flats_through(config: &SpaceConfig, flat: &Flat, j: usize) -> Result<Vec<Flat>> {
    if j < flat.dim() || j > config.nu() {
        return Err(Error::OutOfRange(format!(
            "j = {j} outside [{}, {}]",
            flat.dim(),
            config.nu()
        )));
    }
    let f = config.field();
    Ok(enumerate_isotropic(config, j)?
        .into_iter()
        .filter(|p| p.contains_subspace(f, &flat.direction))
        .map(|p| Flat {
            rep: p.reduce(f, &flat.rep),
            direction: p,
        })
        .collect())
}

/// All `k`-dimensional subspaces of `F_q^n`, by pivot pattern.
pub fn enumerate_subspaces(f: &FiniteField, n: usize, k: usize) -> Vec<Subspace> {
    let q = f.order() as usize;
    let mut out = Vec::new();
    let mut pivots: Vec<usize> = (0..k).collect();
    if k > n {
        return out;
    }
    loop {
        // free slots: row r, columns c > pivots[r] with c not a pivot
        let slots: Vec<(usize, usize)> = (0..k)
            .flat_map(|r| {
                let pv = pivots.clone();
                (pivots[r] + 1..n)
                    .filter(move |c| !pv.contains(c))
                    .map(move |c| (r, c))
            })
            .collect();
        let total = q.pow(slots.len() as u32);
        for mut code in 0..total {
            let mut rows = vec![vec![0u8; n]; k];
            for (r, &p) in pivots.iter().enumerate() {
                rows[r][p] = 1;
            }
            for &(r, c) in &slots {
                rows[r][c] = (code % q) as u8;
                code /= q;
            }
            out.push(canonicalize_n(f, rows, n));
        }
        // next pivot combination
        let mut i = k;
        loop {
            if i == 0 {
                out.sort();
                return out;
            }
            i -= 1;
            if pivots[i] < n - k + i {
                pivots[i] += 1;
                for j in i + 1..k {
                    pivots[j] = pivots[j - 1] + 1;
                }
                break;
            }
        }
        if k == 0 {
            out.sort();
            return out;
        }
    }
}

/// The flats of `O_ν` with O(1) id lookup.
#[derive(Clone, Debug)]
pub struct Space {
    config: SpaceConfig,
    directions: Vec<Subspace>,
    dir_index: HashMap<Subspace, usize>,
    free: Vec<Vec<usize>>,
    dir_vectors: Vec<Vec<Vector>>,
    qnu: usize,
}

impl Space {
    pub fn new(config: SpaceConfig) -> Result<Self> {
        let size = config.flat_count(config.nu()).to_u128().unwrap_or(u128::MAX);
        bound("|O_nu|", size, MAX_FLATS)?;
        let directions = enumerate_isotropic(&config, config.nu())?;
        let n = config.dim();
        let dir_index = directions
            .iter()
            .enumerate()
            .map(|(i, p)| (p.clone(), i))
            .collect();
        let free = directions
            .iter()
            .map(|p| (0..n).filter(|c| !p.pivots().contains(c)).collect())
            .collect();
        let dir_vectors = directions.iter().map(|p| p.vectors(config.field())).collect();
        let qnu = (config.q() as usize).pow(config.nu() as u32);
        Ok(Space {
            config,
            directions,
            dir_index,
            free,
            dir_vectors,
            qnu,
        })
    }

    pub fn config(&self) -> &SpaceConfig {
        &self.config
    }

    pub fn field(&self) -> &FiniteField {
        self.config.field()
    }

    pub fn len(&self) -> usize {
        self.directions.len() * self.qnu
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn num_points(&self) -> usize {
        self.config.num_points()
    }

    /// `q^ν`, the number of cosets per direction.
    pub fn cosets_per_direction(&self) -> usize {
        self.qnu
    }

    pub fn directions(&self) -> &[Subspace] {
        &self.directions
    }

    pub fn direction_index(&self, p: &Subspace) -> Option<usize> {
        self.dir_index.get(p).copied()
    }

    pub fn direction_of(&self, id: FlatId) -> usize {
        id / self.qnu
    }

    /// Id of `directions[dir] + x`.
    pub fn flat_through(&self, dir: usize, x: &[u8]) -> FlatId {
        let r = self.directions[dir].reduce(self.field(), x);
        let q = self.config.q() as usize;
        let rank = self.free[dir]
            .iter()
            .fold(0usize, |acc, &c| acc * q + r[c] as usize);
        dir * self.qnu + rank
    }

    pub fn flat(&self, id: FlatId) -> Flat {
        let dir = id / self.qnu;
        let mut rank = id % self.qnu;
        let q = self.config.q() as usize;
        let mut rep = vec![0u8; self.config.dim()];
        for &c in self.free[dir].iter().rev() {
            rep[c] = (rank % q) as u8;
            rank /= q;
        }
        Flat {
            direction: self.directions[dir].clone(),
            rep,
        }
    }

    pub fn flats(&self) -> Vec<Flat> {
        (0..self.len()).map(|i| self.flat(i)).collect()
    }

    pub fn flat_id(&self, flat: &Flat) -> Option<FlatId> {
        let dir = self.direction_index(&flat.direction)?;
        Some(self.flat_through(dir, &flat.rep))
    }

    /// Point indices of a flat.
    pub fn points_of(&self, id: FlatId) -> Vec<usize> {
        let f = self.field();
        let flat = self.flat(id);
        self.dir_vectors[id / self.qnu]
            .iter()
            .map(|v| {
                let p: Vector = v.iter().zip(&flat.rep).map(|(&a, &b)| f.add(a, b)).collect();
                self.config.point_index(&p)
            })
            .collect()
    }

    /// `O′_ν({a})` for the point with index `a`.
    pub fn pencil(&self, a: usize) -> Vec<FlatId> {
        let x = self.config.point(a);
        (0..self.directions.len())
            .map(|d| self.flat_through(d, &x))
            .collect()
    }

    pub fn incidence_matrix(&self) -> IncidenceMatrix {
        IncidenceMatrix {
            rows: self.num_points(),
            cols: (0..self.len()).map(|i| self.points_of(i)).collect(),
        }
    }

    /// Members of `O_ν` inside a type-`(ν+i,2i)` flat, ascending.
    pub fn flats_in(&self, big: &Flat) -> Result<Vec<FlatId>> {
        let i = self.container_index(big)?;
        let f = self.field();
        let mut ids = BTreeSet::new();
        let big_points = big.points(f);
        for (d, p) in self.directions.iter().enumerate() {
            if big.direction.contains_subspace(f, p) {
                for x in &big_points {
                    ids.insert(self.flat_through(d, x));
                }
            }
        }
        let expected = crate::field::big_pow(self.config.q() as u64, i as u64)
            * self.config.pencil_product(1, i as i64);
        if num_bigint::BigInt::from(ids.len()) != expected {
            return Err(Error::Inconsistent(format!(
                "container holds {} flats, expected {expected}",
                ids.len()
            )));
        }
        Ok(ids.into_iter().collect())
    }

    /// The `i` with `big` of type `(ν+i,2i)`, `1 ≤ i < ν`.
    pub fn container_index(&self, big: &Flat) -> Result<usize> {
        let nu = self.config.nu();
        let t = subspace_type(&self.config, &big.direction);
        if t.dim <= nu || t.dim >= 2 * nu || t.gram_rank != 2 * (t.dim - nu) {
            return Err(Error::Precondition(format!(
                "container must have type (nu+i, 2i) with 1 <= i < nu, got ({}, {})",
                t.dim, t.gram_rank
            )));
        }
        Ok(t.dim - nu)
    }

    /// Type-`(ν+i,2i)` flats containing flat `s`.
    pub fn container_flats(&self, s: FlatId, i: usize) -> Result<Vec<Flat>> {
        let nu = self.config.nu();
        if i == 0 || i >= nu {
            return Err(Error::OutOfRange(format!("i = {i} outside [1, nu)")));
        }
        let f = self.field();
        let n = self.config.dim();
        let sf = self.flat(s);
        let free = &self.free[s / self.qnu];
        let mut out = Vec::new();
        for u in enumerate_subspaces(f, free.len(), i) {
            let mut rows = sf.direction.basis().to_vec();
            for b in u.basis() {
                let mut v = vec![0u8; n];
                for (k, &c) in free.iter().enumerate() {
                    v[c] = b[k];
                }
                rows.push(v);
            }
            let w = canonicalize_n(f, rows, n);
            if subspace_type(&self.config, &w).gram_rank == 2 * i {
                out.push(Flat {
                    rep: w.reduce(f, &sf.rep),
                    direction: w,
                });
            }
        }
        out.sort();
        Ok(out)
    }

    /// Every type-`(ν+i,2i)` flat, in canonical order.
    pub fn all_containers(&self, i: usize) -> Result<Vec<Flat>> {
        let mut set = BTreeSet::new();
        for d in 0..self.directions.len() {
            for t in self.container_flats(d * self.qnu, i)? {
                let reps = coset_reps(&self.config, &t.direction);
                for r in reps {
                    set.insert(Flat {
                        direction: t.direction.clone(),
                        rep: r,
                    });
                }
            }
        }
        Ok(set.into_iter().collect())
    }

    /// Incidence between the points of `big` and `flats_in(big)`.
    pub fn incidence_matrix_in(&self, big: &Flat) -> Result<IncidenceMatrix> {
        let ids = self.flats_in(big)?;
        let pts: Vec<usize> = {
            let mut v: Vec<usize> = big
                .points(self.field())
                .iter()
                .map(|p| self.config.point_index(p))
                .collect();
            v.sort_unstable();
            v
        };
        let pos: HashMap<usize, usize> = pts.iter().enumerate().map(|(i, &p)| (p, i)).collect();
        Ok(IncidenceMatrix {
            rows: pts.len(),
            cols: ids
                .iter()
                .map(|&id| self.points_of(id).iter().map(|p| pos[p]).collect())
                .collect(),
        })
    }
}

/// 0/1 point–flat incidence, stored by column support.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IncidenceMatrix {
    rows: usize,
    cols: Vec<Vec<usize>>,
}

impl IncidenceMatrix {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols.len()
    }

    pub fn column(&self, j: usize) -> &[usize] {
        &self.cols[j]
    }

    pub fn dense(&self) -> Vec<Vec<u8>> {
        let mut m = vec![vec![0u8; self.cols.len()]; self.rows];
        for (j, c) in self.cols.iter().enumerate() {
            for &i in c {
                m[i][j] = 1;
            }
        }
        m
    }

    /// Rows of `Mᵀ` (one per flat).
    pub fn transpose_dense(&self) -> Vec<Vec<u8>> {
        self.cols
            .iter()
            .map(|c| {
                let mut r = vec![0u8; self.rows];
                for &i in c {
                    r[i] = 1;
                }
                r
            })
            .collect()
    }

    pub fn row_sums(&self) -> Vec<usize> {
        let mut s = vec![0; self.rows];
        for c in &self.cols {
            for &i in c {
                s[i] += 1;
            }
        }
        s
    }

    /// `M·Mᵀ` as a dense integer matrix.
    pub fn gram(&self) -> Vec<Vec<i64>> {
        let mut g = vec![vec![0i64; self.rows]; self.rows];
        for c in &self.cols {
            for &a in c {
                for &b in c {
                    g[a][b] += 1;
                }
            }
        }
        g
    }

    /// `M·y` for a column vector over flats.
    pub fn apply(&self, y: &[i64]) -> Vec<i64> {
        let mut out = vec![0i64; self.rows];
        for (c, &v) in self.cols.iter().zip(y) {
            if v != 0 {
                for &i in c {
                    out[i] += v;
                }
            }
        }
        out
    }
}

/// `MMᵀ = ∏_{t=1..ν}(q^{t+e−1}+1)·I + ∏_{t=1..ν−1}(q^{t+e−1}+1)·A` with `A` the point graph.
pub fn gram_identity_holds(space: &Space) -> Result<bool> {
    let c = space.config();
    let g = space.incidence_matrix().gram();
    let a = crate::geometry::point_graph(c)?;
    let diag = c.pencil_product(1, c.nu() as i64);
    let off = c.pencil_product(1, c.nu() as i64 - 1);
    Ok((0..g.len()).all(|x| {
        (0..g.len()).all(|y| {
            let want = if x == y {
                &diag
            } else if a.get(x, y) {
                &off
            } else {
                return g[x][y] == 0;
            };
            num_bigint::BigInt::from(g[x][y]) == *want
        })
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{canonicalize, point_graph, unit, Case};
    use num_bigint::BigInt;

    fn cfg(c: Case, q: u32, nu: usize) -> SpaceConfig {
        SpaceConfig::new(c, q, nu).unwrap()
    }

    fn small_configs() -> Vec<SpaceConfig> {
        vec![
            cfg(Case::Symplectic, 2, 1),
            cfg(Case::Symplectic, 3, 1),
            cfg(Case::Symplectic, 2, 2),
            cfg(Case::Unitary, 4, 1),
            cfg(Case::Orthogonal, 3, 1),
            cfg(Case::Orthogonal, 5, 1),
            cfg(Case::Orthogonal, 3, 2),
        ]
    }

    #[test]
    fn make_examples() {
        let c = cfg(Case::Symplectic, 2, 1);
        let p = canonicalize(&c, &[vec![1, 0]]).unwrap();
        assert_eq!(flat_make(&c, &p, &[1, 0]).unwrap().rep(), &[0, 0]);
        assert_eq!(flat_make(&c, &p, &[0, 1]).unwrap().rep(), &[0, 1]);
        assert_eq!(
            flat_make(&c, &p, &[1, 1]).unwrap(),
            flat_make(&c, &p, &[0, 1]).unwrap()
        );
        assert!(flat_make(&c, &p, &[1, 1, 0]).is_err());
    }

    #[test]
    fn meet_join_examples() {
        let c = cfg(Case::Symplectic, 2, 2);
        let f = c.field();
        let a = flat_make(&c, &canonicalize(&c, &[unit(4, 0), unit(4, 1)]).unwrap(), &[0; 4]).unwrap();
        let b = flat_make(&c, &canonicalize(&c, &[unit(4, 0), unit(4, 3)]).unwrap(), &[0; 4]).unwrap();
        let m = flat_meet(&c, &a, &b).unwrap();
        assert_eq!(m.direction().basis(), &[unit(4, 0)]);
        assert_eq!(m.rep(), &[0; 4]);
        assert_eq!(flat_meet(&c, &a, &a).unwrap(), a);
        let a2 = flat_make(&c, a.direction(), &unit(4, 2)).unwrap();
        assert!(flat_meet(&c, &a, &a2).is_none());
        assert_eq!(flat_join(&c, &a, &a2).dim(), 3);
        let pt = |v: Vector| flat_make(&c, &Subspace::zero(4), &v).unwrap();
        assert_eq!(flat_join(&c, &pt(unit(4, 1)), &pt(unit(4, 1))), pt(unit(4, 1)));
        let line = flat_join(&c, &pt(vec![0; 4]), &pt(unit(4, 1)));
        assert_eq!(line.dim(), 1);
        assert!(line.direction().basis().iter().all(|r| c.is_isotropic(r)));
        let _ = f;
    }

    fn point_set(c: &SpaceConfig, fl: &Flat) -> BTreeSet<Vector> {
        fl.points(c.field()).into_iter().collect()
    }

    #[test]
    fn meet_join_brute_force() {
        for c in small_configs().into_iter().filter(|c| c.flat_count(c.nu()) <= BigInt::from(100)) {
            let f = c.field();
            let all = enumerate_flats(&c, c.nu()).unwrap();
            let every: Vec<Flat> = (0..=c.nu())
                .flat_map(|m| enumerate_flats(&c, m).unwrap())
                .collect();
            for a in &all {
                for b in &all {
                    let inter: BTreeSet<Vector> =
                        point_set(&c, a).intersection(&point_set(&c, b)).cloned().collect();
                    match flat_meet(&c, a, b) {
                        None => assert!(inter.is_empty()),
                        Some(m) => assert_eq!(point_set(&c, &m), inter),
                    }
                    let j = flat_join(&c, a, b);
                    assert!(j.contains_flat(f, a) && j.contains_flat(f, b));
                    // no smaller totally isotropic flat contains both
                    let smallest = every
                        .iter()
                        .filter(|g| g.contains_flat(f, a) && g.contains_flat(f, b))
                        .map(|g| g.dim())
                        .min();
                    if let Some(d) = smallest {
                        assert_eq!(d, j.dim());
                    }
                }
            }
        }
    }

    #[test]
    fn join_dimension_rule_random() {
        use rand::{Rng, SeedableRng};
        for c in small_configs() {
            let space = Space::new(c.clone()).unwrap();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
            for _ in 0..10_000 {
                let a = space.flat(rng.gen_range(0..space.len()));
                let b = space.flat(rng.gen_range(0..space.len()));
                let eps = usize::from(flat_meet(&c, &a, &b).is_none());
                let inter = a.direction().intersection_dim(c.field(), b.direction());
                assert_eq!(flat_join(&c, &a, &b).dim(), a.dim() + b.dim() - inter + eps);
            }
        }
    }

    #[test]
    fn counts_match_closed_forms() {
        for c in small_configs() {
            for m in 0..=c.nu() {
                let fl = enumerate_flats(&c, m).unwrap();
                assert_eq!(BigInt::from(fl.len()), c.flat_count(m));
                assert!(fl.windows(2).all(|w| w[0] < w[1]));
                if let Some(first) = fl.first() {
                    for j in m..=c.nu() {
                        let t = flats_through(&c, first, j).unwrap();
                        assert_eq!(BigInt::from(t.len()), c.through_count(m, j));
                        assert!(t.iter().all(|g| g.contains_flat(c.field(), first)));
                    }
                }
            }
        }
        assert_eq!(enumerate_flats(&cfg(Case::Symplectic, 2, 2), 2).unwrap().len(), 60);
        assert_eq!(enumerate_flats(&cfg(Case::Orthogonal, 3, 2), 2).unwrap().len(), 72);
    }

    #[test]
    fn space_ids_round_trip() {
        for c in small_configs() {
            let space = Space::new(c.clone()).unwrap();
            let listed = enumerate_flats(&c, c.nu()).unwrap();
            assert_eq!(space.flats(), listed);
            for (i, fl) in listed.iter().enumerate() {
                assert_eq!(space.flat_id(fl), Some(i));
                assert_eq!(space.points_of(i).len(), space.cosets_per_direction());
            }
            for a in 0..c.num_points() {
                let p = space.pencil(a);
                assert_eq!(BigInt::from(p.len()), c.through_count(0, c.nu()));
                let x = c.point(a);
                assert!(p.iter().all(|&id| space.flat(id).contains_point(c.field(), &x)));
            }
        }
    }

    #[test]
    fn incidence_sums_and_gram() {
        for c in small_configs() {
            let space = Space::new(c.clone()).unwrap();
            let m = space.incidence_matrix();
            assert!((0..m.cols()).all(|j| m.column(j).len() == space.cosets_per_direction()));
            let pencil = c.pencil_product(1, c.nu() as i64);
            assert!(m.row_sums().iter().all(|&s| BigInt::from(s) == pencil));
            let g = m.gram();
            let a = point_graph(&c).unwrap();
            let inner = c.pencil_product(1, c.nu() as i64 - 1);
            for x in 0..m.rows() {
                for y in 0..m.rows() {
                    let want = if x == y {
                        pencil.clone()
                    } else if a.get(x, y) {
                        inner.clone()
                    } else {
                        BigInt::from(0)
                    };
                    assert_eq!(BigInt::from(g[x][y]), want);
                }
            }
        }
    }

    #[test]
    fn containers() {
        let c = cfg(Case::Symplectic, 2, 2);
        let space = Space::new(c.clone()).unwrap();
        let big = flat_make(
            &c,
            &canonicalize(&c, &[unit(4, 0), unit(4, 1), unit(4, 2)]).unwrap(),
            &[0; 4],
        )
        .unwrap();
        let inside = space.flats_in(&big).unwrap();
        assert_eq!(inside.len(), 6);
        let s = space.flat_id(&space.flat(inside[0])).unwrap();
        assert_eq!(space.container_flats(s, 1).unwrap().len(), 3);
        assert!(space.flats_in(&space.flat(0)).is_err());
        assert!(space.container_flats(0, 2).is_err());
        let inc = space.incidence_matrix_in(&big).unwrap();
        assert_eq!((inc.rows(), inc.cols()), (8, 6));

        let o = cfg(Case::Orthogonal, 3, 2);
        let so = Space::new(o).unwrap();
        for s in [0, 17, 71] {
            let ts = so.container_flats(s, 1).unwrap();
            assert_eq!(ts.len(), 4);
            for t in &ts {
                assert!(t.contains_flat(so.field(), &so.flat(s)));
                assert_eq!(so.flats_in(t).unwrap().len(), 6);
            }
        }
        let all = so.all_containers(1).unwrap();
        // each container holds 6 flats, each flat lies in 4 containers
        assert_eq!(all.len() * 6, 72 * 4);
    }

    #[test]
    fn subspace_enumeration_counts() {
        let f = crate::field::field_of_order(3).unwrap();
        for n in 0..5 {
            for k in 0..=n {
                let s = enumerate_subspaces(&f, n, k);
                assert_eq!(BigInt::from(s.len()), crate::field::gauss_binomial(n as i64, k as i64, 3));
                assert!(s.iter().all(|x| x.dim() == k));
            }
        }
    }
}
