//! Cameron-Liebler sets of maximal flats: tests, constructions and structure.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{bound, Error, Result};
use crate::exact::{integer_nullspace, PreparedSolver, RationalMatrix};
use crate::field::{big_pow, gauss_binomial};
use crate::flats::{Flat, FlatId, IncidenceMatrix, Space};
use crate::geometry::{Isometry, SpaceConfig};
use crate::scheme::{BuiltScheme, RelationIndex};
use crate::spreads::{enumerate_spreads, type_i_spreads, type_ii_spreads, Scope, Spread};

/// Largest `|O_1|` for the exhaustive subset sweep.
pub const MAX_EXHAUSTIVE_FLATS: usize = 24;

fn rat(x: impl Into<BigInt>) -> BigRational {
    BigRational::from_integer(x.into())
}

/// `|L| / ∏_{t=1..ν}(q^{t+e−1}+1)`.
pub fn cl_parameter(config: &SpaceConfig, size: usize) -> BigRational {
    BigRational::new(size.into(), config.pencil_product(1, config.nu() as i64))
}

/// A subset of `O_ν` with its parameter.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct FlatSet {
    ids: Vec<FlatId>,
    universe: usize,
    x: BigRational,
}

impl FlatSet {
    pub fn new(space: &Space, ids: impl IntoIterator<Item = FlatId>) -> Result<Self> {
        let set: BTreeSet<FlatId> = ids.into_iter().collect();
        if let Some(&m) = set.iter().next_back() {
            if m >= space.len() {
                return Err(Error::OutOfRange(format!("flat id {m} >= {}", space.len())));
            }
        }
        Ok(FlatSet {
            x: cl_parameter(space.config(), set.len()),
            ids: set.into_iter().collect(),
            universe: space.len(),
        })
    }

    pub fn full(space: &Space) -> Self {
        FlatSet::new(space, 0..space.len()).expect("ids in range")
    }

    pub fn ids(&self) -> &[FlatId] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn contains(&self, id: FlatId) -> bool {
        self.ids.binary_search(&id).is_ok()
    }

    pub fn x(&self) -> &BigRational {
        &self.x
    }

    pub fn chi(&self) -> Vec<i64> {
        let mut v = vec![0i64; self.universe];
        for &i in &self.ids {
            v[i] = 1;
        }
        v
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "ids": self.ids.iter().map(|i| i.to_string()).collect::<Vec<_>>(),
            "size": self.ids.len().to_string(),
            "x": self.x.to_string(),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CombineMode {
    Complement,
    DisjointUnion,
    Difference,
}

/// Complement of `a`, `a ∪ b` for disjoint sets, or `a ∖ b` for `b ⊆ a`.
pub fn combine(space: &Space, a: &FlatSet, b: Option<&FlatSet>, mode: CombineMode) -> Result<FlatSet> {
    let need_b = || b.ok_or_else(|| Error::Precondition("second set required".into()));
    match mode {
        CombineMode::Complement => FlatSet::new(space, (0..space.len()).filter(|&i| !a.contains(i))),
        CombineMode::DisjointUnion => {
            let b = need_b()?;
            if b.ids.iter().any(|&i| a.contains(i)) {
                return Err(Error::Precondition("sets are not disjoint".into()));
            }
            FlatSet::new(space, a.ids.iter().chain(&b.ids).copied())
        }
        CombineMode::Difference => {
            let b = need_b()?;
            if b.ids.iter().any(|&i| !a.contains(i)) {
                return Err(Error::Precondition("second set is not contained in the first".into()));
            }
            FlatSet::new(space, a.ids.iter().copied().filter(|&i| !b.contains(i)))
        }
    }
}

/// The point pencil `O′_ν({a})`.
pub fn construct_pencil(space: &Space, a: usize) -> Result<FlatSet> {
    if a >= space.num_points() {
        return Err(Error::OutOfRange(format!("point {a} >= {}", space.num_points())));
    }
    FlatSet::new(space, space.pencil(a))
}

/// Image of every flat id under an isometry.
pub fn flat_permutation(space: &Space, g: &Isometry) -> Result<Vec<FlatId>> {
    let f = space.field();
    (0..space.len())
        .map(|id| {
            let fl = space.flat(id);
            let d = g.apply_subspace(f, fl.direction());
            let dir = space
                .direction_index(&d)
                .ok_or_else(|| Error::Inconsistent("isometry left O_nu".into()))?;
            Ok(space.flat_through(dir, &g.apply(f, fl.rep())))
        })
        .collect()
}

/// Verdicts of the independent membership tests.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Verdict {
    /// `Mᵀy = χ` solvable.
    pub image: bool,
    /// `χ ⊥ ker M`.
    pub kernel: bool,
    /// Supported on `V_(0,0) ⊕ V_(0,1)`.
    pub spectrum: bool,
    /// `(1,ξ)` neighbour counts.
    pub counts: bool,
}

impl Verdict {
    pub fn agree(&self) -> bool {
        self.image == self.kernel && self.image == self.spectrum && self.image == self.counts
    }

    pub fn is_cl(&self) -> bool {
        self.agree() && self.image
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SpreadFamily {
    TypeI,
    TypeII,
    Constructed,
    Exhaustive,
}

/// Outcome of the spread tests on one set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SpreadTest {
    /// Every spread meets the set in `x` members.
    pub spreads_pass: bool,
    /// Every switching pair meets the set equally.
    pub switching_pass: bool,
    /// Exhaustive family; otherwise the tests are necessary conditions only.
    pub conclusive: bool,
    pub spreads: usize,
    pub switching_pairs: usize,
    pub intersections: BTreeMap<usize, usize>,
}

impl SpreadTest {
    pub fn passed(&self) -> bool {
        self.spreads_pass && self.switching_pass
    }
}

/// `L ∩ O_ν(F)` for a container `F` of type `(ν+i,2i)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Restriction {
    pub container: Flat,
    pub i: usize,
    pub members: Vec<FlatId>,
    pub interior: usize,
    pub x_f: BigRational,
    /// Characteristic vector lies in the image of the container's transposed incidence.
    pub in_image: bool,
}

impl Restriction {
    pub fn integral(&self) -> bool {
        self.x_f.is_integer()
    }

    pub fn within(&self, x: &BigRational, q: u32) -> bool {
        let cap = rat(big_pow(q as u64, self.i as u64)).min(x.clone());
        !self.x_f.is_negative() && self.x_f <= cap
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "container": self.container.to_json(),
            "i": self.i.to_string(),
            "members": self.members.iter().map(|m| m.to_string()).collect::<Vec<_>>(),
            "x_F": self.x_f.to_string(),
            "in_image": self.in_image,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
/// `Tight` when `|T_1|` attains its bound, `Slack` otherwise.
#[serde(rename_all = "lowercase")]
pub enum ProfileCase {
    Tight,
    Slack,
}

/// Histogram of container parameters around one member.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PencilProfile {
    pub s: FlatId,
    pub i: usize,
    pub x: BigRational,
    pub containers: Vec<(Flat, BigRational)>,
    pub histogram: BTreeMap<BigInt, usize>,
    /// `Σ_θ |T_θ| = [ν ν−i]`.
    pub count_identity: bool,
    /// `(x−1)[ν−1 ν−i] = Σ (θ−1)|T_θ|`.
    pub weighted_identity: bool,
    /// Every `x_T` integral in `[1, min{x,q^i}]`.
    pub range_ok: bool,
    /// Bound checks apply only for integral `x ≥ 2`.
    pub bounds_apply: bool,
    pub bound_holds: bool,
    pub case: Option<ProfileCase>,
    pub ell: Option<BigInt>,
    /// Slack case: `1 ≤ ℓ < (q^ν−1)/(q^i−1) − (x−1)/(min{x,q^i}−1)`.
    pub ell_in_range: bool,
    /// Slack case: `x ≥ (q^ν−1)/(q^i−1) − ℓ + 2`.
    pub x_lower_bound: bool,
    pub case_consistent: bool,
}

impl PencilProfile {
    pub fn passed(&self) -> bool {
        self.identities_hold() && (!self.bounds_apply || self.case_consistent)
    }

    /// Everything except the case analysis.
    pub fn identities_hold(&self) -> bool {
        self.count_identity && self.weighted_identity && self.range_ok && (!self.bounds_apply || self.bound_holds)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "S": self.s.to_string(),
            "i": self.i.to_string(),
            "x": self.x.to_string(),
            "containers": self.containers.iter().map(|(f, x)| serde_json::json!({
                "flat": f.to_json(), "x_T": x.to_string()
            })).collect::<Vec<_>>(),
            "histogram": self.histogram.iter().map(|(t, n)| (t.to_string(), n.to_string()))
                .collect::<BTreeMap<_, _>>(),
            "count_identity": self.count_identity,
            "weighted_identity": self.weighted_identity,
            "range_ok": self.range_ok,
            "bounds_apply": self.bounds_apply,
            "bound_holds": self.bound_holds,
            "case": self.case,
            "ell": self.ell.as_ref().map(|l| l.to_string()),
            "ell_in_range": self.ell_in_range,
            "x_lower_bound": self.x_lower_bound,
            "case_consistent": self.case_consistent,
            "passed": self.passed(),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Intersecting {
    pub is_intersecting: bool,
    pub is_maximum: bool,
    /// `|C||A| ≤ |O_ν|` for a pencil and each type I spread, with `|C∩A| = 1` at equality.
    pub clique_coclique: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Exhaustive,
    PencilClosure,
    SeededRandom,
}

/// Result of the `ν = 1` sweep.
#[derive(Clone, Debug)]
pub struct Nu1Classification {
    pub sets: Vec<FlatSet>,
    pub by_x: BTreeMap<BigRational, usize>,
    /// Sets meeting every type I spread in the same number of members.
    pub spread_described: usize,
    /// Both descriptions select the same sets.
    pub descriptions_agree: bool,
}

/// Precomputed data for testing subsets of `O_ν`.
#[derive(Debug)]
pub struct Battery {
    space: Space,
    scheme: BuiltScheme,
    incidence: IncidenceMatrix,
    kernel: Vec<Vec<i64>>,
    solver: PreparedSolver,
    type_i: Vec<Spread>,
    type_ii: Vec<Spread>,
    exhaustive: Option<Vec<Spread>>,
}

impl Battery {
    pub fn new(space: Space) -> Result<Self> {
        bound("|O_nu| for the test battery", space.len() as u128, 1100)?;
        let scheme = BuiltScheme::new(&space)?;
        let incidence = space.incidence_matrix();
        let m = incidence.dense();
        let kernel = integer_nullspace(&RationalMatrix::from_u8_rows(&m)?)
            .into_iter()
            .map(|k| {
                k.iter()
                    .map(|x| {
                        x.to_i64()
                            .ok_or_else(|| Error::Inconsistent("kernel entry exceeds 64 bits".into()))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let mt: Vec<Vec<i64>> = incidence
            .transpose_dense()
            .into_iter()
            .map(|r| r.into_iter().map(i64::from).collect())
            .collect();
        let solver = PreparedSolver::new(mt)?;
        let type_i = type_i_spreads(&space);
        let type_ii = type_ii_spreads(&space)?;
        let exhaustive = if space.num_points() <= crate::spreads::MAX_EXHAUSTIVE_POINTS {
            Some(enumerate_spreads(&space, &Scope::Full)?.spreads)
        } else {
            None
        };
        Ok(Battery {
            space,
            scheme,
            incidence,
            kernel,
            solver,
            type_i,
            type_ii,
            exhaustive,
        })
    }

    pub fn for_config(config: SpaceConfig) -> Result<Self> {
        Battery::new(Space::new(config)?)
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn config(&self) -> &SpaceConfig {
        self.space.config()
    }

    pub fn scheme(&self) -> &BuiltScheme {
        &self.scheme
    }

    pub fn incidence(&self) -> &IncidenceMatrix {
        &self.incidence
    }

    pub fn kernel(&self) -> &[Vec<i64>] {
        &self.kernel
    }

    pub fn incidence_rank(&self) -> usize {
        self.solver.rank()
    }

    pub fn set(&self, ids: impl IntoIterator<Item = FlatId>) -> Result<FlatSet> {
        FlatSet::new(&self.space, ids)
    }

    fn check_universe(&self, l: &FlatSet) -> Result<()> {
        if l.universe != self.space.len() {
            return Err(Error::DimensionMismatch {
                expected: self.space.len(),
                got: l.universe,
            });
        }
        Ok(())
    }

    /// Exact solve of `Mᵀy = χ`.
    pub fn test_image_solve(&self, l: &FlatSet) -> Result<bool> {
        self.check_universe(l)?;
        Ok(self.solver.solve(&l.chi())?.is_some())
    }

    /// `χ·k = 0` for every kernel vector `k` of `M`.
    pub fn test_kernel(&self, l: &FlatSet) -> Result<bool> {
        self.check_universe(l)?;
        Ok(self
            .kernel
            .iter()
            .all(|k| l.ids.iter().map(|&i| k[i]).sum::<i64>() == 0))
    }

    /// Both image routes; they must agree.
    pub fn test_image(&self, l: &FlatSet) -> Result<bool> {
        let a = self.test_image_solve(l)?;
        let b = self.test_kernel(l)?;
        if a != b {
            return Err(Error::Inconsistent(format!(
                "image routes disagree: solve {a}, kernel {b}"
            )));
        }
        Ok(a)
    }

    /// `E_(j,η)χ = 0` off `(0,0),(0,1)` and `E_(0,0)χ = (|L|/|O_ν|)·j`.
    pub fn test_spectrum(&self, l: &FlatSet) -> Result<bool> {
        self.check_universe(l)?;
        let chi = l.chi();
        let idem = &self.scheme.idempotents;
        let rel = &self.scheme.relations;
        for k in 2..idem.classes() {
            if !idem.annihilates(rel, k, &chi) {
                return Ok(false);
            }
        }
        let e0 = idem.project(rel, 0, &chi);
        let want = BigRational::new(l.len().into(), self.space.len().into());
        Ok(e0.iter().all(|v| *v == want))
    }

    /// `χ − x q^{−ν} j`.
    pub fn centered(&self, l: &FlatSet) -> Vec<BigRational> {
        let shift = BigRational::new(l.len().into(), self.space.len().into());
        l.chi().into_iter().map(|c| rat(c) - &shift).collect()
    }

    /// Relation counts `(A_(i,ξ)χ)_F` against the general table.
    pub fn relation_counts_hold(&self, l: &FlatSet, r: RelationIndex) -> Result<bool> {
        self.check_universe(l)?;
        let nu = self.config().nu();
        if r.i > nu || (r.i == nu && r.xi == 1) || r.xi > 1 {
            return Err(Error::OutOfRange(format!("relation {r}")));
        }
        let (k0, k1) = self.count_constants(r.i)?;
        let d = self.config().pencil_product(1, nu as i64);
        let size = BigInt::from(l.len());
        let counts = self.scheme.relations.relation_counts(&l.chi());
        let row = &counts[r.position()];
        Ok((0..self.space.len()).all(|f| {
            let inside = l.contains(f);
            // every entry scaled by the pencil size
            let want = match (inside, r.xi) {
                (true, 0) => &d * &k0 + &size * &k1,
                (false, 0) => &size * &k1,
                (true, _) => (&size - &d) * &k0,
                (false, _) => &size * &k0,
            };
            &d * BigInt::from(row[f]) == want
        }))
    }

    /// `(q^{i(i+2e+1)/2}[ν−1 i], q^{i(i+2e−1)/2}[ν−1 i−1])`.
    fn count_constants(&self, i: usize) -> Result<(BigInt, BigInt)> {
        let c = self.config();
        let hp = c.half_powers();
        let (nu, i, e2, q) = (c.nu() as i64, i as i64, c.e2() as i64, c.q() as u64);
        Ok((
            hp.int(i * (i + 1) + e2 * i)? * gauss_binomial(nu - 1, i, q),
            hp.int(i * (i - 1) + e2 * i)? * gauss_binomial(nu - 1, i - 1, q),
        ))
    }

    /// Neighbour counts in `(1,0)` and `(1,1)`.
    pub fn test_counts(&self, l: &FlatSet) -> Result<bool> {
        let nu = self.config().nu();
        for xi in 0..=u8::from(nu > 1) {
            if !self.relation_counts_hold(l, RelationIndex::new(1, xi))? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn verdict(&self, l: &FlatSet) -> Result<Verdict> {
        Ok(Verdict {
            image: self.test_image_solve(l)?,
            kernel: self.test_kernel(l)?,
            spectrum: self.test_spectrum(l)?,
            counts: self.test_counts(l)?,
        })
    }

    /// All routes agree and accept.
    pub fn is_cl(&self, l: &FlatSet) -> Result<bool> {
        let v = self.verdict(l)?;
        if !v.agree() {
            return Err(Error::Inconsistent(format!("tests disagree: {v:?}")));
        }
        Ok(v.image)
    }

    pub fn family(&self, which: SpreadFamily) -> Result<(Vec<Spread>, bool)> {
        Ok(match which {
            SpreadFamily::TypeI => (self.type_i.clone(), false),
            SpreadFamily::TypeII => (self.type_ii.clone(), false),
            SpreadFamily::Constructed => {
                let mut v = self.type_i.clone();
                v.extend(self.type_ii.iter().cloned());
                (v, false)
            }
            SpreadFamily::Exhaustive => (
                self.exhaustive.clone().ok_or_else(|| {
                    Error::BoundExceeded {
                        what: "points for exhaustive spread search",
                        size: self.space.num_points() as u128,
                        limit: crate::spreads::MAX_EXHAUSTIVE_POINTS as u128,
                    }
                })?,
                true,
            ),
        })
    }

    /// Whether the exhaustive spread family is available.
    pub fn has_exhaustive_spreads(&self) -> bool {
        self.exhaustive.is_some()
    }

    /// Intersections with spreads and switching pairs of a family.
    pub fn test_spreads(&self, l: &FlatSet, family: &[Spread], conclusive: bool) -> Result<SpreadTest> {
        self.check_universe(l)?;
        let mut intersections = BTreeMap::new();
        let mut spreads_pass = true;
        let mut hits = Vec::with_capacity(family.len());
        for s in family {
            if crate::spreads::classify_set(&self.space, &s.members) != crate::spreads::SetClass::FullSpread {
                return Err(Error::Precondition("family member is not a spread".into()));
            }
            let h: Vec<FlatId> = s.members.iter().copied().filter(|&m| l.contains(m)).collect();
            *intersections.entry(h.len()).or_insert(0) += 1;
            if rat(h.len()) != l.x {
                spreads_pass = false;
            }
            hits.push(h);
        }
        let mut switching_pass = true;
        let mut pairs = 0;
        for a in 0..family.len() {
            for b in a + 1..family.len() {
                let (sa, sb) = (&family[a], &family[b]);
                let ca = hits[a].iter().filter(|&&m| !sb.contains(m)).count();
                let cb = hits[b].iter().filter(|&&m| !sa.contains(m)).count();
                pairs += 1;
                if ca != cb {
                    switching_pass = false;
                }
            }
        }
        Ok(SpreadTest {
            spreads_pass,
            switching_pass,
            conclusive,
            spreads: family.len(),
            switching_pairs: pairs,
            intersections,
        })
    }

    /// Pairwise meeting members, and the size bound.
    pub fn intersecting_check(&self, l: &FlatSet) -> Result<Intersecting> {
        self.check_universe(l)?;
        let rel = &self.scheme.relations;
        let is_intersecting = l
            .ids
            .iter()
            .all(|&a| l.ids.iter().all(|&b| rel.get(a, b).is_multiple_of(2)));
        let bound = self.config().pencil_product(1, self.config().nu() as i64);
        let pencil = self.space.pencil(0);
        let n = BigInt::from(self.space.len());
        let clique_coclique = self.type_i.iter().all(|a| {
            let prod = BigInt::from(pencil.len() * a.len());
            let meet = pencil.iter().filter(|&&p| a.contains(p)).count();
            prod <= n && (prod != n || meet == 1)
        });
        Ok(Intersecting {
            is_intersecting,
            is_maximum: is_intersecting && BigInt::from(l.len()) == bound,
            clique_coclique,
        })
    }

    /// Restriction to a container.
    pub fn restrict_cl(&self, l: &FlatSet, big: &Flat) -> Result<Restriction> {
        self.check_universe(l)?;
        let i = self.space.container_index(big)?;
        let interior = self.space.flats_in(big)?;
        let chi: Vec<i64> = interior.iter().map(|&id| i64::from(l.contains(id))).collect();
        let inc = self.space.incidence_matrix_in(big)?;
        let ft: Vec<Vec<i64>> = inc
            .transpose_dense()
            .into_iter()
            .map(|r| r.into_iter().map(i64::from).collect())
            .collect();
        let in_image = PreparedSolver::new(ft)?.solve(&chi)?.is_some();
        let members: Vec<FlatId> = interior.iter().copied().filter(|&id| l.contains(id)).collect();
        let x_f = BigRational::new(members.len().into(), self.config().pencil_product(1, i as i64));
        Ok(Restriction {
            container: big.clone(),
            i,
            interior: interior.len(),
            members,
            x_f,
            in_image,
        })
    }

    fn require_member(&self, l: &FlatSet, s: FlatId, i: usize) -> Result<()> {
        self.check_universe(l)?;
        if !l.contains(s) {
            return Err(Error::Precondition(format!("flat {s} is not in the set")));
        }
        if i == 0 || i >= self.config().nu() {
            return Err(Error::OutOfRange(format!("i = {i} outside [1, nu)")));
        }
        Ok(())
    }

    fn container_parameters(&self, l: &FlatSet, s: FlatId, i: usize) -> Result<Vec<(Flat, BigRational)>> {
        self.space
            .container_flats(s, i)?
            .into_iter()
            .map(|t| {
                let r = self.restrict_cl(l, &t)?;
                Ok((t, r.x_f))
            })
            .collect()
    }

    /// `x = Σ_T x_T / [ν−1 ν−i] − (q^ν−1)/(q^i−1) + 1`.
    pub fn degree_identity(&self, l: &FlatSet, s: FlatId, i: usize) -> Result<bool> {
        self.require_member(l, s, i)?;
        let c = self.config();
        let (nu, q) = (c.nu() as i64, c.q() as u64);
        let sum: BigRational = self
            .container_parameters(l, s, i)?
            .into_iter()
            .map(|(_, x)| x)
            .sum();
        let g = rat(gauss_binomial(nu - 1, nu - i as i64, q));
        let ratio = BigRational::new(big_pow(q, nu as u64) - 1, big_pow(q, i as u64) - 1);
        Ok(l.x == sum / g - ratio + rat(1))
    }

    /// Container parameter histogram with the distribution checks.
    pub fn pencil_distribution(&self, l: &FlatSet, s: FlatId, i: usize) -> Result<PencilProfile> {
        self.require_member(l, s, i)?;
        let c = self.config();
        let (nu, q) = (c.nu() as i64, c.q() as u64);
        let containers = self.container_parameters(l, s, i)?;
        let qi = big_pow(q, i as u64);
        let cap = rat(qi.clone()).min(l.x.clone());
        let range_ok = containers
            .iter()
            .all(|(_, x)| x.is_integer() && *x >= rat(1) && *x <= cap);
        let mut histogram: BTreeMap<BigInt, usize> = BTreeMap::new();
        for (_, x) in &containers {
            *histogram.entry(x.to_integer()).or_insert(0) += 1;
        }
        let total = gauss_binomial(nu, nu - i as i64, q);
        let g = gauss_binomial(nu - 1, nu - i as i64, q);
        let count_identity = BigInt::from(containers.len()) == total;
        let weighted: BigRational = containers.iter().map(|(_, x)| x - rat(1)).sum();
        let weighted_identity = weighted == (&l.x - rat(1)) * rat(g.clone());
        let bounds_apply = l.x.is_integer() && l.x >= rat(2);
        let (mut bound_holds, mut case, mut ell, mut case_consistent) = (true, None, None, true);
        let (mut ell_in_range, mut x_lower_bound) = (true, true);
        if bounds_apply {
            let m = cap.to_integer();
            let t = |theta: &BigInt| BigInt::from(histogram.get(theta).copied().unwrap_or(0));
            let t1 = t(&BigInt::one());
            let share = (&l.x - rat(1)) / rat(&m - 1) * rat(g.clone());
            let bound = rat(total.clone()) - &share;
            bound_holds = rat(t1.clone()) <= bound;
            let ratio = BigRational::new(big_pow(q, nu as u64) - 1, qi.clone() - 1);
            if rat(t1.clone()) == bound {
                case = Some(ProfileCase::Tight);
                let mut theta = BigInt::from(2);
                let mut ok = rat(t(&m)) == share;
                while theta < m {
                    ok &= t(&theta).is_zero();
                    theta += 1;
                }
                case_consistent = ok;
            } else if bound_holds {
                case = Some(ProfileCase::Slack);
                let l_val = t1.div_floor(&g) + BigInt::one();
                ell_in_range =
                    rat(l_val.clone()) >= rat(1) && rat(l_val.clone()) < &ratio - (&l.x - rat(1)) / rat(&m - 1);
                x_lower_bound = l.x >= &ratio - rat(l_val.clone()) + rat(2);
                let bracket = (&l_val - BigInt::one()) * &g <= t1 && t1 < &l_val * &g;
                ell = Some(l_val);
                case_consistent = ell_in_range && x_lower_bound && bracket;
            }
        }
        Ok(PencilProfile {
            s,
            i,
            x: l.x.clone(),
            containers,
            histogram,
            count_identity,
            weighted_identity,
            range_ok,
            bounds_apply,
            bound_holds,
            case,
            ell,
            ell_in_range,
            x_lower_bound,
            case_consistent,
        })
    }

    /// Image of a set under an isometry.
    pub fn relabel(&self, l: &FlatSet, g: &Isometry) -> Result<FlatSet> {
        let perm = flat_permutation(&self.space, g)?;
        self.set(l.ids.iter().map(|&i| perm[i]))
    }

    /// Pencils plus their complements, pairwise disjoint unions and differences.
    pub fn pencil_closure(&self) -> Result<Vec<FlatSet>> {
        let np = self.space.num_points();
        let graph = crate::geometry::point_graph(self.config())?;
        let pencils: Vec<FlatSet> = (0..np)
            .map(|a| construct_pencil(&self.space, a))
            .collect::<Result<_>>()?;
        let mut out: BTreeSet<FlatSet> = BTreeSet::new();
        out.insert(FlatSet::new(&self.space, [])?);
        out.insert(FlatSet::full(&self.space));
        for p in &pencils {
            out.insert(p.clone());
            out.insert(combine(&self.space, p, None, CombineMode::Complement)?);
        }
        for a in 0..np {
            for b in a + 1..np {
                // pencils at a and b are disjoint iff a − b is non-isotropic
                if a != b && !graph.get(a, b) {
                    let u = combine(&self.space, &pencils[a], Some(&pencils[b]), CombineMode::DisjointUnion)?;
                    out.insert(combine(&self.space, &u, None, CombineMode::Complement)?);
                    out.insert(u);
                }
            }
        }
        Ok(out.into_iter().collect())
    }
}

/// Exhaustive sweep of all subsets of `O_1`.
pub fn classify_nu1(b: &Battery) -> Result<Nu1Classification> {
    let c = b.config();
    if c.nu() != 1 {
        return Err(Error::Precondition("classification needs nu = 1".into()));
    }
    let n = b.space.len();
    bound("|O_1| for exhaustive classification", n as u128, MAX_EXHAUSTIVE_FLATS as u128)?;
    let mut sets = Vec::new();
    let mut by_x = BTreeMap::new();
    let mut spread_described = 0;
    let mut agree = true;
    for mask in 0u64..1 << n {
        let l = b.set((0..n).filter(|&i| mask >> i & 1 == 1))?;
        let cl = b.test_image(&l)?;
        let counts: BTreeSet<usize> = b
            .type_i
            .iter()
            .map(|s| s.members.iter().filter(|&&m| l.contains(m)).count())
            .collect();
        let described = counts.len() == 1;
        if described {
            spread_described += 1;
        }
        if described != cl {
            agree = false;
        }
        if cl {
            *by_x.entry(l.x.clone()).or_insert(0) += 1;
            sets.push(l);
        }
    }
    Ok(Nu1Classification {
        sets,
        by_x,
        spread_described,
        descriptions_agree: agree,
    })
}

/// Sets passing the full battery with parameter `x_target`; deterministic per seed.
pub fn search_cl(
    b: &Battery,
    x_target: &BigRational,
    strategy: Strategy,
    seed: u64,
    trials: usize,
) -> Result<Vec<FlatSet>> {
    let n = b.space.len();
    let size = x_target * rat(b.config().pencil_product(1, b.config().nu() as i64));
    let size = if size.is_integer() && !size.is_negative() {
        size.to_integer().to_usize()
    } else {
        None
    };
    let mut out = Vec::new();
    match strategy {
        Strategy::Exhaustive => {
            bound("|O_nu| for exhaustive search", n as u128, MAX_EXHAUSTIVE_FLATS as u128)?;
            let Some(size) = size.filter(|&s| s <= n) else {
                return Ok(out);
            };
            for mask in 0u64..1 << n {
                if mask.count_ones() as usize == size {
                    let l = b.set((0..n).filter(|&i| mask >> i & 1 == 1))?;
                    if b.is_cl(&l)? {
                        out.push(l);
                    }
                }
            }
        }
        Strategy::PencilClosure => {
            for l in b.pencil_closure()? {
                if &l.x == x_target && b.is_cl(&l)? {
                    out.push(l);
                }
            }
        }
        Strategy::SeededRandom => {
            let Some(size) = size.filter(|&s| s <= n) else {
                return Ok(out);
            };
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let all: Vec<FlatId> = (0..n).collect();
            let mut seen = BTreeSet::new();
            for _ in 0..trials {
                let ids: Vec<FlatId> = all.choose_multiple(&mut rng, size).copied().collect();
                let l = b.set(ids)?;
                if seen.insert(l.ids.clone()) && b.is_cl(&l)? {
                    out.push(l);
                }
            }
        }
    }
    Ok(out)
}

/// A seeded subset of `O_ν` with size uniform in `[0, |O_ν|]`.
pub fn random_subset(space: &Space, rng: &mut ChaCha8Rng) -> FlatSet {
    let n = space.len();
    let k = rng.gen_range(0..=n);
    let all: Vec<FlatId> = (0..n).collect();
    FlatSet::new(space, all.choose_multiple(rng, k).copied()).expect("ids in range")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{canonicalize, random_isometry, unit, Case};
    use std::sync::OnceLock;

    fn battery(c: Case, q: u32, nu: usize) -> Battery {
        Battery::for_config(SpaceConfig::new(c, q, nu).unwrap()).unwrap()
    }

    fn sym22() -> &'static Battery {
        static B: OnceLock<Battery> = OnceLock::new();
        B.get_or_init(|| battery(Case::Symplectic, 2, 2))
    }

    fn r(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    #[test]
    fn parameters() {
        let b = sym22();
        assert_eq!(b.set([]).unwrap().x(), &r(0, 1));
        assert_eq!(construct_pencil(b.space(), 0).unwrap().x(), &r(1, 1));
        assert_eq!(FlatSet::full(b.space()).x(), &r(4, 1));
        assert_eq!(construct_pencil(b.space(), 3).unwrap().len(), 15);
        assert!(b.set([60]).is_err());
    }

    #[test]
    fn pencil_and_complement() {
        let b = sym22();
        let p = construct_pencil(b.space(), 5).unwrap();
        let v = b.verdict(&p).unwrap();
        assert!(v.is_cl(), "{v:?}");
        let comp = combine(b.space(), &p, None, CombineMode::Complement).unwrap();
        assert_eq!(comp.x(), &r(3, 1));
        assert!(b.is_cl(&comp).unwrap());
        let vp = b.centered(&p);
        let vc = b.centered(&comp);
        assert!(vp.iter().zip(&vc).all(|(a, c)| *a == -c.clone()));
        let full = FlatSet::full(b.space());
        assert_eq!(combine(b.space(), &full, Some(&p), CombineMode::Difference).unwrap(), comp);
        assert!(combine(b.space(), &p, Some(&p), CombineMode::DisjointUnion).is_err());
        assert!(combine(b.space(), &p, Some(&full), CombineMode::Difference).is_err());
        assert!(b.test_image(&full).unwrap());
    }

    #[test]
    fn spectrum_of_pencil() {
        let b = sym22();
        let chi = construct_pencil(b.space(), 0).unwrap().chi();
        for l in 2..5 {
            assert!(b.scheme().annihilates(l, &chi));
        }
        assert!(!b.scheme().annihilates(1, &chi));
    }

    #[test]
    fn random_subsets_rejected_consistently() {
        let b = sym22();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let all: Vec<FlatId> = (0..60).collect();
        let ids: Vec<FlatId> = all.choose_multiple(&mut rng, 15).copied().collect();
        let l = b.set(ids).unwrap();
        let v = b.verdict(&l).unwrap();
        assert!(v.agree());
        assert!(!v.image);
        for _ in 0..50 {
            let l = random_subset(b.space(), &mut rng);
            assert!(b.verdict(&l).unwrap().agree());
        }
    }

    #[test]
    fn counts_table_examples() {
        let b = sym22();
        let p = construct_pencil(b.space(), 0).unwrap();
        let counts = b.scheme().relations.relation_counts(&p.chi());
        let inside = p.ids()[0];
        let outside = (0..60).find(|&i| !p.contains(i)).unwrap();
        assert_eq!(counts[RelationIndex::new(1, 0).position()][inside], 6);
        assert_eq!(counts[RelationIndex::new(1, 1).position()][inside], 0);
        assert_eq!(counts[RelationIndex::new(1, 1).position()][outside], 4);
        assert_eq!(counts[RelationIndex::new(2, 0).position()][inside], 8);
        assert_eq!(counts[RelationIndex::new(0, 1).position()][inside], 0);
        for r in crate::scheme::relation_indices(2) {
            assert!(b.relation_counts_hold(&p, r).unwrap());
            assert!(b.relation_counts_hold(&FlatSet::full(b.space()), r).unwrap());
        }
    }

    #[test]
    fn single_flat_nu1() {
        let b = battery(Case::Symplectic, 2, 1);
        let l = b.set([0]).unwrap();
        assert!(!b.test_image(&l).unwrap());
        let (fam, conclusive) = b.family(SpreadFamily::Exhaustive).unwrap();
        assert!(conclusive);
        let t = b.test_spreads(&l, &fam, true).unwrap();
        assert!(!t.passed());
        assert_eq!(t.intersections, BTreeMap::from([(0, 2), (1, 1)]));
    }

    #[test]
    fn pencil_meets_spreads_once() {
        let b = sym22();
        let p = construct_pencil(b.space(), 7).unwrap();
        let (fam, _) = b.family(SpreadFamily::Constructed).unwrap();
        let t = b.test_spreads(&p, &fam, false).unwrap();
        assert!(t.passed());
        assert_eq!(t.intersections.keys().copied().collect::<Vec<_>>(), vec![1]);
        let (all, _) = b.family(SpreadFamily::Exhaustive).unwrap();
        assert!(b.test_spreads(&p, &all, true).unwrap().passed());
        let full = FlatSet::full(b.space());
        assert!(b.test_spreads(&full, &all, true).unwrap().passed());
    }

    #[test]
    fn nu1_classifications() {
        let b = battery(Case::Symplectic, 2, 1);
        let c = classify_nu1(&b).unwrap();
        assert_eq!(c.sets.len(), 10);
        assert_eq!(c.by_x[&r(1, 1)], 8);
        assert!(c.descriptions_agree);
        for l in c.sets.iter().filter(|l| l.x() == &r(1, 1)) {
            let ic = b.intersecting_check(l).unwrap();
            assert!(ic.is_intersecting && ic.is_maximum && ic.clique_coclique);
        }
        assert_eq!(search_cl(&b, &r(1, 1), Strategy::Exhaustive, 0, 0).unwrap().len(), 8);
        let top = search_cl(&b, &r(2, 1), Strategy::Exhaustive, 0, 0).unwrap();
        assert_eq!(top, vec![FlatSet::full(b.space())]);
        let b3 = battery(Case::Symplectic, 3, 1);
        assert_eq!(classify_nu1(&b3).unwrap().by_x[&r(1, 1)], 81);
    }

    #[test]
    fn pencil_closure_contains_pencils() {
        let b = sym22();
        let found = search_cl(b, &r(1, 1), Strategy::PencilClosure, 0, 0).unwrap();
        for a in 0..16 {
            assert!(found.contains(&construct_pencil(b.space(), a).unwrap()));
        }
        assert!(search_cl(b, &r(1, 1), Strategy::SeededRandom, 1, 20).unwrap().is_empty());
    }

    #[test]
    fn disjoint_pencils_orthogonal() {
        let b = battery(Case::Orthogonal, 3, 2);
        let c = b.config();
        let g = crate::geometry::point_graph(c).unwrap();
        let (a, bb) = (0..81)
            .flat_map(|a| (0..81).map(move |b| (a, b)))
            .find(|&(a, b)| a != b && !g.get(a, b))
            .unwrap();
        let pa = construct_pencil(b.space(), a).unwrap();
        let pb = construct_pencil(b.space(), bb).unwrap();
        assert!(pa.ids().iter().all(|&i| !pb.contains(i)));
        let u = combine(b.space(), &pa, Some(&pb), CombineMode::DisjointUnion).unwrap();
        assert_eq!(u.x(), &r(2, 1));
        assert!(b.is_cl(&u).unwrap());
        for rr in crate::scheme::relation_indices(2) {
            assert!(b.relation_counts_hold(&u, rr).unwrap());
        }
    }

    #[test]
    fn isometry_invariance() {
        let b = sym22();
        let p = construct_pencil(b.space(), 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let noise = random_subset(b.space(), &mut rng);
        for seed in 0..5 {
            let g = random_isometry(b.config(), seed);
            let img = b.relabel(&p, &g).unwrap();
            assert_eq!(img.len(), 15);
            assert!(b.is_cl(&img).unwrap());
            let n2 = b.relabel(&noise, &g).unwrap();
            assert_eq!(b.is_cl(&n2).unwrap(), b.is_cl(&noise).unwrap());
        }
    }

    #[test]
    fn restrictions_22() {
        let b = sym22();
        let c = b.config();
        let big = crate::flats::flat_make(
            c,
            &canonicalize(c, &[unit(4, 0), unit(4, 1), unit(4, 2)]).unwrap(),
            &[0; 4],
        )
        .unwrap();
        let full = FlatSet::full(b.space());
        let rf = b.restrict_cl(&full, &big).unwrap();
        assert_eq!(rf.x_f, r(2, 1));
        assert!(rf.in_image);
        let inside = construct_pencil(b.space(), 0).unwrap();
        let ri = b.restrict_cl(&inside, &big).unwrap();
        assert_eq!(ri.x_f, r(1, 1));
        assert!(ri.in_image && ri.within(inside.x(), 2));
        let far = c.point_index(&unit(4, 3));
        let outside = construct_pencil(b.space(), far).unwrap();
        let ro = b.restrict_cl(&outside, &big).unwrap();
        assert_eq!(ro.x_f, r(0, 1));
        assert!(ro.in_image);
        let single = b.set([b.space().flats_in(&big).unwrap()[0]]).unwrap();
        assert!(!b.restrict_cl(&single, &big).unwrap().in_image);
    }

    #[test]
    fn degree_identity_and_profiles() {
        let b = sym22();
        let p = construct_pencil(b.space(), 0).unwrap();
        let s = p.ids()[0];
        assert!(b.degree_identity(&p, s, 1).unwrap());
        let sum: BigRational = b.container_parameters(&p, s, 1).unwrap().into_iter().map(|x| x.1).sum();
        assert_eq!(sum, r(3, 1));
        let full = FlatSet::full(b.space());
        let prof = b.pencil_distribution(&full, 0, 1).unwrap();
        assert_eq!(prof.histogram, BTreeMap::from([(BigInt::from(2), 3)]));
        assert!(prof.passed());
        assert_eq!(prof.case, Some(ProfileCase::Tight));
        let comp = combine(b.space(), &p, None, CombineMode::Complement).unwrap();
        for &s in comp.ids() {
            assert!(b.degree_identity(&comp, s, 1).unwrap());
            let prof = b.pencil_distribution(&comp, s, 1).unwrap();
            assert!(prof.passed(), "{prof:?}");
            assert_eq!(prof.histogram.values().sum::<usize>(), 3);
        }
        assert!(b.degree_identity(&p, comp.ids()[0], 1).is_err());
        assert!(b.pencil_distribution(&p, s, 2).is_err());
    }
}
