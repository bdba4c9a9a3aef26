//! Spreads, partial spreads and switching sets of maximal flats.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use serde::Serialize;

use crate::error::{bound, Error, Result};
use crate::exact::rank_i64;
use crate::flats::{Flat, FlatId, Space};
use crate::geometry::{subspace_type, Subspace};
use crate::scheme::BuiltScheme;

/// Largest scope searched exhaustively.
pub const MAX_EXHAUSTIVE_POINTS: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum SpreadKind {
    I,
    II,
    #[serde(rename = "other")]
    Other,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Scope {
    Full,
    Container(Flat),
}

impl Scope {
    pub fn to_json(&self) -> serde_json::Value {
        match self {
            Scope::Full => serde_json::json!("full"),
            Scope::Container(f) => serde_json::json!({ "container": f.to_json() }),
        }
    }
}

/// A spread; members are ids into `O_ν` whatever the scope.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Spread {
    pub members: Vec<FlatId>,
    pub scope: Scope,
    pub kind: SpreadKind,
}

impl Spread {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, id: FlatId) -> bool {
        self.members.binary_search(&id).is_ok()
    }

    pub fn chi(&self, n: usize) -> Vec<i64> {
        let mut v = vec![0i64; n];
        for &m in &self.members {
            v[m] = 1;
        }
        v
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "kind": self.kind,
            "scope": self.scope.to_json(),
            "members": self.members.iter().map(|m| m.to_string()).collect::<Vec<_>>(),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SetClass {
    PartialSpread,
    FullSpread,
    Neither,
}

fn scope_points(space: &Space, scope: &Scope) -> Vec<usize> {
    match scope {
        Scope::Full => (0..space.num_points()).collect(),
        Scope::Container(f) => {
            let mut v: Vec<usize> = f
                .points(space.field())
                .iter()
                .map(|p| space.config().point_index(p))
                .collect();
            v.sort_unstable();
            v
        }
    }
}

/// Partial spread if pairwise disjoint, full if also covering the scope.
pub fn classify_in(space: &Space, members: &[FlatId], scope: &Scope) -> SetClass {
    let mut seen = BTreeSet::new();
    for &m in members {
        for p in space.points_of(m) {
            if !seen.insert(p) {
                return SetClass::Neither;
            }
        }
    }
    let pts = scope_points(space, scope);
    if seen.iter().any(|p| pts.binary_search(p).is_err()) {
        SetClass::Neither
    } else if seen.len() == pts.len() {
        SetClass::FullSpread
    } else {
        SetClass::PartialSpread
    }
}

pub fn classify_set(space: &Space, members: &[FlatId]) -> SetClass {
    classify_in(space, members, &Scope::Full)
}

/// Disjoint partial spreads covering the same points.
pub fn is_switching_pair(space: &Space, r: &[FlatId], r2: &[FlatId]) -> bool {
    let a: BTreeSet<FlatId> = r.iter().copied().collect();
    if r2.iter().any(|m| a.contains(m)) {
        return false;
    }
    if classify_set(space, r) == SetClass::Neither || classify_set(space, r2) == SetClass::Neither {
        return false;
    }
    let cover = |s: &[FlatId]| -> BTreeSet<usize> { s.iter().flat_map(|&m| space.points_of(m)).collect() };
    cover(r) == cover(r2)
}

/// All cosets of a maximal totally isotropic `P`.
pub fn spread_type_i(space: &Space, p: &Subspace) -> Result<Spread> {
    let d = space
        .direction_index(p)
        .ok_or_else(|| Error::Precondition("direction is not maximal totally isotropic".into()))?;
    let per = space.cosets_per_direction();
    Ok(Spread {
        members: (d * per..(d + 1) * per).collect(),
        scope: Scope::Full,
        kind: SpreadKind::I,
    })
}

/// `{P1+y : y ∈ Q} ∪ {P2+y : y ∉ Q}`.
pub fn spread_type_ii(space: &Space, q: &Subspace, p1: &Subspace, p2: &Subspace) -> Result<Spread> {
    let nu = space.config().nu();
    if nu < 2 {
        return Err(Error::Precondition("type II spreads need nu >= 2".into()));
    }
    let t = subspace_type(space.config(), q);
    if t.dim != nu + 1 || t.gram_rank != 2 {
        return Err(Error::Precondition(format!(
            "Q must have type (nu+1, 2), got ({}, {})",
            t.dim, t.gram_rank
        )));
    }
    let f = space.field();
    let d1 = space
        .direction_index(p1)
        .ok_or_else(|| Error::Precondition("P1 is not maximal totally isotropic".into()))?;
    let d2 = space
        .direction_index(p2)
        .ok_or_else(|| Error::Precondition("P2 is not maximal totally isotropic".into()))?;
    if d1 == d2 {
        return Err(Error::Precondition("P1 and P2 coincide".into()));
    }
    if !q.contains_subspace(f, p1) || !q.contains_subspace(f, p2) {
        return Err(Error::Precondition("P1 and P2 must lie in Q".into()));
    }
    let zero = vec![0u8; space.config().dim()];
    Ok(switched(space, q, d1, d2, &zero))
}

/// `P1`-cosets inside `Q + z`, `P2`-cosets elsewhere.
fn switched(space: &Space, q: &Subspace, d1: usize, d2: usize, z: &[u8]) -> Spread {
    let f = space.field();
    let per = space.cosets_per_direction();
    let target = q.reduce(f, z);
    let inside = |id: FlatId| q.reduce(f, space.flat(id).rep()) == target;
    let mut members: Vec<FlatId> = (d1 * per..(d1 + 1) * per)
        .filter(|&id| inside(id))
        .chain((d2 * per..(d2 + 1) * per).filter(|&id| !inside(id)))
        .collect();
    members.sort_unstable();
    Spread {
        members,
        scope: Scope::Full,
        kind: SpreadKind::II,
    }
}

/// Translate of a type II spread: the switched coset is `Q + z`.
pub fn spread_type_ii_translate(space: &Space, q: &Subspace, p1: &Subspace, p2: &Subspace, z: &[u8]) -> Result<Spread> {
    spread_type_ii(space, q, p1, p2)?;
    space.config().check_vector(z)?;
    let d = |p: &Subspace| space.direction_index(p).expect("checked above");
    Ok(switched(space, q, d(p1), d(p2), z))
}

/// A type-`(ν+1,2)` subspace with the maximal totally isotropic subspaces inside it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeIIFrame {
    pub q: Subspace,
    /// Direction indices of the interior maximal subspaces.
    pub interior: Vec<usize>,
}

/// Every `Q = P1 + P2` over pairs meeting in dimension `ν−1`.
pub fn type_ii_frames(space: &Space) -> Result<Vec<TypeIIFrame>> {
    let nu = space.config().nu();
    if nu < 2 {
        return Ok(Vec::new());
    }
    let f = space.field();
    let dirs = space.directions();
    let mut frames: BTreeMap<Subspace, BTreeSet<usize>> = BTreeMap::new();
    for a in 0..dirs.len() {
        for b in a + 1..dirs.len() {
            if dirs[a].intersection_dim(f, &dirs[b]) == nu - 1 {
                let q = dirs[a].sum(f, &dirs[b]);
                let e = frames.entry(q).or_default();
                e.insert(a);
                e.insert(b);
            }
        }
    }
    let expected = space.config().half_powers().int(space.config().e2() as i64)? + 1;
    frames
        .into_iter()
        .map(|(q, interior)| {
            let t = subspace_type(space.config(), &q);
            if t.gram_rank != 2 || BigInt::from(interior.len()) != expected {
                return Err(Error::Inconsistent(format!(
                    "type II frame has type ({}, {}) and {} interior subspaces",
                    t.dim,
                    t.gram_rank,
                    interior.len()
                )));
            }
            Ok(TypeIIFrame {
                q,
                interior: interior.into_iter().collect(),
            })
        })
        .collect()
}

pub fn type_i_spreads(space: &Space) -> Vec<Spread> {
    space
        .directions()
        .iter()
        .map(|p| spread_type_i(space, p).expect("enumerated direction"))
        .collect()
}

/// Type II spreads over every frame and ordered interior pair, deduplicated.
pub fn type_ii_spreads(space: &Space) -> Result<Vec<Spread>> {
    let dirs = space.directions();
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    let f = space.field();
    let c = space.config();
    for fr in type_ii_frames(space)? {
        let mut shifts: BTreeMap<Vec<u8>, Vec<u8>> = BTreeMap::new();
        for p in 0..c.num_points() {
            let v = c.point(p);
            shifts.entry(fr.q.reduce(f, &v)).or_insert(v);
        }
        for &a in &fr.interior {
            for &b in &fr.interior {
                if a == b {
                    continue;
                }
                spread_type_ii(space, &fr.q, &dirs[a], &dirs[b])?;
                for z in shifts.values() {
                    let s = switched(space, &fr.q, a, b, z);
                    if seen.insert(s.members.clone()) {
                        out.push(s);
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Tags a full-space spread: one direction is type I; two adjacent directions
/// with one covering a coset of their sum is type II (translates included).
pub fn kind_of(space: &Space, members: &[FlatId]) -> SpreadKind {
    let nu = space.config().nu();
    let f = space.field();
    let mut by_dir: BTreeMap<usize, Vec<FlatId>> = BTreeMap::new();
    for &m in members {
        by_dir.entry(space.direction_of(m)).or_default().push(m);
    }
    match by_dir.len() {
        1 => SpreadKind::I,
        2 => {
            let groups: Vec<(&usize, &Vec<FlatId>)> = by_dir.iter().collect();
            let (pa, pb) = (&space.directions()[*groups[0].0], &space.directions()[*groups[1].0]);
            if pa.intersection_dim(f, pb) + 1 != nu {
                return SpreadKind::Other;
            }
            let q = pa.sum(f, pb);
            let q_size = space.config().q() as usize;
            let covers_coset = |ids: &[FlatId]| {
                ids.len() == q_size && {
                    let r0 = q.reduce(f, space.flat(ids[0]).rep());
                    ids.iter().all(|&m| q.reduce(f, space.flat(m).rep()) == r0)
                }
            };
            if covers_coset(groups[0].1) || covers_coset(groups[1].1) {
                SpreadKind::II
            } else {
                SpreadKind::Other
            }
        }
        _ => SpreadKind::Other,
    }
}

/// Result of a spread enumeration.
#[derive(Clone, Debug)]
pub struct SpreadEnumeration {
    pub spreads: Vec<Spread>,
    /// False when only the constructive families were listed.
    pub exhaustive: bool,
}

fn flats_of_scope(space: &Space, scope: &Scope) -> Result<Vec<FlatId>> {
    match scope {
        Scope::Full => Ok((0..space.len()).collect()),
        Scope::Container(f) => space.flats_in(f),
    }
}

/// Exact covers of the scope, branching on the least uncovered point.
fn exact_covers(space: &Space, scope: &Scope) -> Result<Vec<Vec<FlatId>>> {
    let pts = scope_points(space, scope);
    bound("scope points for exhaustive spread search", pts.len() as u128, MAX_EXHAUSTIVE_POINTS as u128)?;
    let ids = flats_of_scope(space, scope)?;
    let local: BTreeMap<usize, usize> = pts.iter().enumerate().map(|(i, &p)| (p, i)).collect();
    let masks: Vec<u64> = ids
        .iter()
        .map(|&id| space.points_of(id).iter().fold(0u64, |m, p| m | 1 << local[p]))
        .collect();
    let mut by_point: Vec<Vec<usize>> = vec![Vec::new(); pts.len()];
    for (k, &m) in masks.iter().enumerate() {
        for (pt, list) in by_point.iter_mut().enumerate() {
            if m >> pt & 1 == 1 {
                list.push(k);
            }
        }
    }
    let full: u64 = if pts.len() == 64 { !0 } else { (1u64 << pts.len()) - 1 };
    let mut out = Vec::new();
    let mut stack = Vec::new();
    fn go(
        covered: u64,
        full: u64,
        masks: &[u64],
        by_point: &[Vec<usize>],
        ids: &[FlatId],
        stack: &mut Vec<FlatId>,
        out: &mut Vec<Vec<FlatId>>,
    ) {
        if covered == full {
            let mut s = stack.clone();
            s.sort_unstable();
            out.push(s);
            return;
        }
        let pt = (!covered).trailing_zeros() as usize;
        for &k in &by_point[pt] {
            if masks[k] & covered == 0 {
                stack.push(ids[k]);
                go(covered | masks[k], full, masks, by_point, ids, stack, out);
                stack.pop();
            }
        }
    }
    go(0, full, &masks, &by_point, &ids, &mut stack, &mut out);
    out.sort();
    out.dedup();
    Ok(out)
}

/// Cosets of each interior direction inside a container.
pub fn container_type_i_spreads(space: &Space, big: &Flat) -> Result<Vec<Spread>> {
    let mut groups: BTreeMap<usize, Vec<FlatId>> = BTreeMap::new();
    for id in space.flats_in(big)? {
        groups.entry(space.direction_of(id)).or_default().push(id);
    }
    Ok(groups
        .into_values()
        .map(|members| Spread {
            members,
            scope: Scope::Container(big.clone()),
            kind: SpreadKind::I,
        })
        .collect())
}

/// Spreads of a scope; exhaustive up to 32 points, else the constructive families.
pub fn enumerate_spreads(space: &Space, scope: &Scope) -> Result<SpreadEnumeration> {
    let pts = scope_points(space, scope).len();
    if pts <= MAX_EXHAUSTIVE_POINTS {
        let spreads = exact_covers(space, scope)?
            .into_iter()
            .map(|members| {
                let kind = match scope {
                    Scope::Full => kind_of(space, &members),
                    Scope::Container(_) => {
                        let d = space.direction_of(members[0]);
                        if members.iter().all(|&m| space.direction_of(m) == d) {
                            SpreadKind::I
                        } else {
                            SpreadKind::Other
                        }
                    }
                };
                Spread {
                    members,
                    scope: scope.clone(),
                    kind,
                }
            })
            .collect();
        return Ok(SpreadEnumeration {
            spreads,
            exhaustive: true,
        });
    }
    let spreads = match scope {
        Scope::Full => {
            let mut v = type_i_spreads(space);
            v.extend(type_ii_spreads(space)?);
            v
        }
        Scope::Container(big) => container_type_i_spreads(space, big)?,
    };
    Ok(SpreadEnumeration {
        spreads,
        exhaustive: false,
    })
}

/// Findings of a span check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SpanReport {
    pub spreads: usize,
    pub rank: usize,
    pub expected_rank: String,
    pub failures: Vec<String>,
}

impl SpanReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty() && BigInt::from(self.rank).to_string() == self.expected_rank
    }
}

fn stack_rank(space: &Space, spreads: &[Spread]) -> usize {
    let rows: Vec<Vec<i64>> = spreads.iter().map(|s| s.chi(space.len())).collect();
    rank_i64(&rows)
}

/// Type I spreads span `⊕_j V_(j,0)` and miss every `V_(j,1)`.
pub fn type_i_span_check(space: &Space, scheme: &BuiltScheme) -> Result<SpanReport> {
    bound("|O_nu| for span check", space.len() as u128, 1100)?;
    let spreads = type_i_spreads(space);
    let t = &scheme.tables;
    let expected: BigInt = (0..t.classes()).step_by(2).map(|l| &t.multiplicities[l]).sum();
    if expected != space.config().pencil_product(1, space.config().nu() as i64) {
        return Err(Error::Inconsistent("sum of m_(j,0) differs from the pencil size".into()));
    }
    let mut failures = Vec::new();
    for (k, s) in spreads.iter().enumerate() {
        let chi = s.chi(space.len());
        for l in (1..t.classes()).step_by(2) {
            if !scheme.annihilates(l, &chi) {
                failures.push(format!("E_{} chi != 0 for type I spread {k}", t.indices[l]));
            }
        }
    }
    Ok(SpanReport {
        spreads: spreads.len(),
        rank: stack_rank(space, &spreads),
        expected_rank: expected.to_string(),
        failures,
    })
}

/// Type II spreads span everything outside `V_(0,1)`.
pub fn type_ii_span_check(space: &Space, scheme: &BuiltScheme) -> Result<SpanReport> {
    if space.config().nu() < 2 {
        return Err(Error::Precondition("type II spreads need nu >= 2".into()));
    }
    bound("|O_nu| for span check", space.len() as u128, 1100)?;
    let spreads = type_ii_spreads(space)?;
    let t = &scheme.tables;
    let expected = &t.order - &t.multiplicities[1];
    let mut failures = Vec::new();
    for (k, s) in spreads.iter().enumerate() {
        let chi = s.chi(space.len());
        if !scheme.annihilates(1, &chi) {
            failures.push(format!("E_(0,1) chi != 0 for type II spread {k}"));
        }
        for l in 2..t.classes() {
            if scheme.annihilates(l, &chi) {
                failures.push(format!("E_{} chi = 0 for type II spread {k}", t.indices[l]));
            }
        }
    }
    Ok(SpanReport {
        spreads: spreads.len(),
        rank: stack_rank(space, &spreads),
        expected_rank: expected.to_string(),
        failures,
    })
}
