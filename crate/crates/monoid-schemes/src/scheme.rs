//! Monoid schemes of finite type as finite posets of pctf stalks.
//!
//! A point `y ≤ x` lies in the minimal open neighbourhood of `x`, and the
//! transition `A(x) → A(y)` realizes `A(y)` as a localization of `A(x)`.
//! Each stalk lives in its own lattice; transitions are lattice maps.

use crate::error::{Error, Result};
use crate::lattice::{self, LatticeVector};
use crate::monoid::{AffineMonoid, Membership, MonoidData, PrimeIdeal};
use crate::morphisms::{Construction, SchemeMorphism};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, VecDeque};

/// A lattice map as a list of images of basis vectors.
pub type LatticeMap = Vec<LatticeVector>;

pub fn identity_map(n: usize) -> LatticeMap {
    (0..n).map(|i| lattice::unit(n, i)).collect()
}

pub fn apply_map(m: &LatticeMap, v: &[i64], target_rank: usize) -> LatticeVector {
    (0..target_rank).map(|j| v.iter().zip(m).map(|(x, r)| x * r[j]).sum()).collect()
}

pub fn compose_maps(first: &LatticeMap, then: &LatticeMap, target_rank: usize) -> LatticeMap {
    first.iter().map(|r| apply_map(then, r, target_rank)).collect()
}

#[derive(Clone, Debug)]
pub struct Point {
    pub label: String,
    pub stalk: AffineMonoid,
}

#[derive(Clone, Debug)]
pub struct MonoidScheme {
    pub points: Vec<Point>,
    leq: Vec<Vec<bool>>,
    /// `(x, y)` with `y < x` ↦ lattice map of `A(x) → A(y)`.
    trans: BTreeMap<(usize, usize), LatticeMap>,
}

/// Per maximal point, generators of an ideal of its stalk; the zero vector
/// (the identity element) stands for the unit ideal.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdealSheaf {
    pub charts: BTreeMap<usize, Vec<LatticeVector>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Separation {
    Separated,
    NoGreatestLowerBound { x1: String, x2: String },
    NotSurjective { x1: String, x2: String, glb: String },
}

impl Separation {
    pub fn is_separated(&self) -> bool {
        matches!(self, Separation::Separated)
    }
}

/// A gluing of chart `i` at prime `p_i` with chart `j` at prime `p_j`;
/// `iso` maps the lattice of chart `i` onto that of chart `j`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Identification {
    pub chart_i: usize,
    pub face_i: Vec<usize>,
    pub chart_j: usize,
    pub face_j: Vec<usize>,
    pub iso: LatticeMap,
}

/// On-disk form of a scheme: charts and identifications.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemeData {
    pub charts: Vec<MonoidData>,
    #[serde(default)]
    pub identifications: Vec<IdentificationData>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdentificationData {
    pub chart_i: usize,
    pub face_i: Vec<usize>,
    pub chart_j: usize,
    pub face_j: Vec<usize>,
    pub iso: Vec<LatticeVector>,
}

impl MonoidScheme {
    pub fn from_parts(points: Vec<Point>, leq: Vec<Vec<bool>>, trans: BTreeMap<(usize, usize), LatticeMap>) -> Self {
        MonoidScheme { points, leq, trans }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn stalk(&self, x: usize) -> &AffineMonoid {
        &self.points[x].stalk
    }

    pub fn label(&self, x: usize) -> &str {
        &self.points[x].label
    }

    /// `y ≤ x`: y is a generization of x.
    pub fn leq(&self, y: usize, x: usize) -> bool {
        self.leq[y][x]
    }

    pub fn leq_matrix(&self) -> &Vec<Vec<bool>> {
        &self.leq
    }

    pub fn below(&self, x: usize) -> Vec<usize> {
        (0..self.len()).filter(|&y| self.leq[y][x]).collect()
    }

    pub fn above(&self, y: usize) -> Vec<usize> {
        (0..self.len()).filter(|&x| self.leq[y][x]).collect()
    }

    pub fn maximal_points(&self) -> Vec<usize> {
        (0..self.len()).filter(|&x| (0..self.len()).all(|z| z == x || !self.leq[x][z])).collect()
    }

    pub fn minimal_points(&self) -> Vec<usize> {
        (0..self.len()).filter(|&x| (0..self.len()).all(|z| z == x || !self.leq[z][x])).collect()
    }

    /// Length of the longest chain ending at each point.
    pub fn heights(&self) -> Vec<usize> {
        let n = self.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&x| self.below(x).len());
        let mut h = vec![0usize; n];
        for &x in &order {
            for y in 0..n {
                if y != x && self.leq[y][x] {
                    h[x] = h[x].max(h[y] + 1);
                }
            }
        }
        h
    }

    pub fn dimension(&self) -> usize {
        self.heights().into_iter().max().unwrap_or(0)
    }

    pub fn transition(&self, x: usize, y: usize) -> LatticeMap {
        if x == y {
            identity_map(self.stalk(x).rank)
        } else {
            self.trans[&(x, y)].clone()
        }
    }

    pub fn transport(&self, x: usize, y: usize, v: &[i64]) -> LatticeVector {
        apply_map(&self.transition(x, y), v, self.stalk(y).rank)
    }

    /// Indices of generators of `A(x)` that become units at `y ≤ x`: the
    /// face of the prime of `A(x)` corresponding to `y`.
    pub fn face_in(&self, x: usize, y: usize) -> Vec<usize> {
        let ay = self.stalk(y);
        self.stalk(x)
            .generators
            .iter()
            .enumerate()
            .filter(|(_, g)| {
                let img = self.transport(x, y, g);
                ay.member(&img).map(|m| m == Membership::InMonoid).unwrap_or(false) && ay.is_unit(&img)
            })
            .map(|(i, _)| i)
            .collect()
    }

    /// The point `y ≤ x` corresponding to the prime of `A(x)` with `face`.
    pub fn point_of_face(&self, x: usize, face: &[usize]) -> Option<usize> {
        self.below(x).into_iter().find(|&y| self.face_in(x, y) == face)
    }

    pub fn from_affine(a: &AffineMonoid) -> MonoidScheme {
        let spec = a.mspec();
        let points: Vec<Point> = spec
            .iter()
            .map(|p| Point { label: format!("p{:?}", p.face), stalk: a.localize(p).expect("localization at a prime") })
            .collect();
        let n = spec.len();
        let leq = (0..n).map(|i| (0..n).map(|j| spec[i].is_subset_of(&spec[j])).collect()).collect();
        let mut trans = BTreeMap::new();
        for x in 0..n {
            for y in 0..n {
                if x != y && spec[y].is_subset_of(&spec[x]) {
                    trans.insert((x, y), identity_map(a.rank));
                }
            }
        }
        MonoidScheme { points, leq, trans }
    }

    /// Sections at the unique maximal point, if there is one.
    pub fn affine_sections(&self) -> Option<&AffineMonoid> {
        match self.maximal_points().as_slice() {
            [x] => Some(self.stalk(*x)),
            _ => None,
        }
    }

    pub fn glue(charts: &[AffineMonoid], ids: &[Identification]) -> Result<MonoidScheme> {
        let specs: Vec<Vec<PrimeIdeal>> = charts.iter().map(|a| a.mspec()).collect();
        // global index of (chart, prime)
        let mut offset = vec![0];
        for s in &specs {
            offset.push(offset.last().unwrap() + s.len());
        }
        let total = *offset.last().unwrap();
        let locate = |c: usize, face: &[usize]| -> Result<usize> {
            specs[c]
                .iter()
                .position(|p| p.face == face)
                .map(|i| offset[c] + i)
                .ok_or_else(|| Error::BadGluing(format!("{face:?} is not a prime face of chart {c}")))
        };
        let chart_of = |g: usize| -> (usize, usize) {
            let c = (0..charts.len()).rfind(|&c| offset[c] <= g).unwrap();
            (c, g - offset[c])
        };
        // edges of the identification graph: (u, v, iso from u's lattice to v's)
        let mut adj: Vec<Vec<(usize, LatticeMap)>> = vec![Vec::new(); total];
        for id in ids {
            let (ai, aj) = (&charts[id.chart_i], &charts[id.chart_j]);
            if id.iso.len() != ai.rank || id.iso.iter().any(|r| r.len() != aj.rank) {
                return Err(Error::BadGluing("iso has the wrong shape".into()));
            }
            let inv = invert_unimodular(&id.iso).ok_or_else(|| Error::BadGluing("iso is not invertible".into()))?;
            let pi = locate(id.chart_i, &id.face_i)?;
            let pj = locate(id.chart_j, &id.face_j)?;
            let li = ai.localize(&specs[id.chart_i][pi - offset[id.chart_i]])?;
            let lj = aj.localize(&specs[id.chart_j][pj - offset[id.chart_j]])?;
            if transport_monoid(&li, &id.iso, aj.rank)? != lj {
                return Err(Error::BadGluing(format!(
                    "iso does not carry chart {} at {:?} onto chart {} at {:?}",
                    id.chart_i, id.face_i, id.chart_j, id.face_j
                )));
            }
            // match the primes below p_i with those below p_j
            let below_i: Vec<usize> = (0..specs[id.chart_i].len())
                .filter(|&q| specs[id.chart_i][q].is_subset_of(&specs[id.chart_i][pi - offset[id.chart_i]]))
                .collect();
            for q in below_i {
                let lq = transport_monoid(&ai.localize(&specs[id.chart_i][q])?, &id.iso, aj.rank)?;
                let partner = (0..specs[id.chart_j].len())
                    .filter(|&r| specs[id.chart_j][r].is_subset_of(&specs[id.chart_j][pj - offset[id.chart_j]]))
                    .find(|&r| aj.localize(&specs[id.chart_j][r]).map(|l| l == lq).unwrap_or(false))
                    .ok_or_else(|| Error::BadGluing("open neighbourhoods do not match".into()))?;
                let (u, v) = (offset[id.chart_i] + q, offset[id.chart_j] + partner);
                adj[u].push((v, id.iso.clone()));
                adj[v].push((u, inv.clone()));
            }
        }
        // classes by BFS; each member records the map from its chart lattice to the representative's
        let mut class = vec![usize::MAX; total];
        let mut to_rep: Vec<LatticeMap> = vec![Vec::new(); total];
        let mut reps = Vec::new();
        for start in 0..total {
            if class[start] != usize::MAX {
                continue;
            }
            let cid = reps.len();
            reps.push(start);
            let (c0, _) = chart_of(start);
            class[start] = cid;
            to_rep[start] = identity_map(charts[c0].rank);
            let mut queue = VecDeque::from([start]);
            let mut seen_charts = BTreeMap::from([(c0, start)]);
            while let Some(u) = queue.pop_front() {
                for (v, iso) in adj[u].clone() {
                    let (cv, _) = chart_of(v);
                    // map chart v → chart u is inverse of iso; chart v → rep is then composed
                    let inv = invert_unimodular(&iso).unwrap();
                    let cand = compose_maps(&inv, &to_rep[u], charts[chart_of(reps[cid]).0].rank);
                    if class[v] == usize::MAX {
                        if let Some(&other) = seen_charts.get(&cv) {
                            if other != v {
                                return Err(Error::BadGluing("identifications are not transitive".into()));
                            }
                        }
                        class[v] = cid;
                        to_rep[v] = cand;
                        seen_charts.insert(cv, v);
                        queue.push_back(v);
                    } else {
                        let (_, lv) = chart_of(v);
                        let stalk = charts[cv].localize(&specs[cv][lv])?;
                        for b in stalk.group() {
                            let r = charts[chart_of(reps[cid]).0].rank;
                            if apply_map(&to_rep[v], b, r) != apply_map(&cand, b, r) {
                                return Err(Error::BadGluing("identifications violate the cocycle condition".into()));
                            }
                        }
                    }
                }
            }
        }
        let n = reps.len();
        let mut points = Vec::new();
        for &r in &reps {
            let (c, l) = chart_of(r);
            points.push(Point { label: format!("c{c}p{:?}", specs[c][l].face), stalk: charts[c].localize(&specs[c][l])? });
        }
        let mut leq = vec![vec![false; n]; n];
        let mut trans: BTreeMap<(usize, usize), LatticeMap> = BTreeMap::new();
        for c in 0..charts.len() {
            for a in 0..specs[c].len() {
                for b in 0..specs[c].len() {
                    if specs[c][b].is_subset_of(&specs[c][a]) {
                        let (x, y) = (class[offset[c] + a], class[offset[c] + b]);
                        leq[y][x] = true;
                        if x != y && !trans.contains_key(&(x, y)) {
                            // rep(x) → chart c → rep(y)
                            let ry = reps[y];
                            let into_c = invert_unimodular(&to_rep[offset[c] + a]).unwrap();
                            let m = compose_maps(&into_c, &to_rep[offset[c] + b], charts[chart_of(ry).0].rank);
                            trans.insert((x, y), m);
                        }
                    }
                }
            }
        }
        let x = MonoidScheme { points, leq, trans };
        x.validate()?;
        Ok(x)
    }

    /// Checks the scheme-like condition at every point and composability.
    pub fn validate(&self) -> Result<()> {
        for x in 0..self.len() {
            let ax = self.stalk(x);
            let spec = ax.mspec();
            let below = self.below(x);
            if spec.len() != below.len() {
                return Err(Error::BadGluing(format!("point {} has {} generizations but {} primes", self.label(x), below.len(), spec.len())));
            }
            for &y in &below {
                let face = self.face_in(x, y);
                let p = spec.iter().find(|p| p.face == face).ok_or_else(|| {
                    Error::BadGluing(format!("{} ≤ {} does not correspond to a prime", self.label(y), self.label(x)))
                })?;
                let loc = transport_monoid(&ax.localize(p)?, &self.transition(x, y), self.stalk(y).rank)?;
                if loc != *self.stalk(y) {
                    return Err(Error::BadGluing(format!("stalk at {} is not the localization of {}", self.label(y), self.label(x))));
                }
            }
        }
        Ok(())
    }

    /// The subscheme on a down-closed set of points.
    pub fn open_subscheme(&self, pts: &[usize]) -> MonoidScheme {
        self.restrict(pts)
    }

    fn restrict(&self, pts: &[usize]) -> MonoidScheme {
        let points = pts.iter().map(|&i| self.points[i].clone()).collect();
        let leq = pts.iter().map(|&a| pts.iter().map(|&b| self.leq[a][b]).collect()).collect();
        let mut trans = BTreeMap::new();
        for (i, &a) in pts.iter().enumerate() {
            for (j, &b) in pts.iter().enumerate() {
                if a != b && self.leq[b][a] {
                    trans.insert((i, j), self.trans[&(a, b)].clone());
                }
            }
        }
        MonoidScheme { points, leq, trans }
    }

    pub fn is_down_closed(&self, pts: &[usize]) -> bool {
        pts.iter().all(|&x| self.below(x).iter().all(|y| pts.contains(y)))
    }

    pub fn disjoint_union(&self, other: &MonoidScheme) -> MonoidScheme {
        let n = self.len();
        let m = other.len();
        let mut points = self.points.clone();
        points.extend(other.points.iter().map(|p| Point { label: format!("{}'", p.label), stalk: p.stalk.clone() }));
        let mut leq = vec![vec![false; n + m]; n + m];
        for a in 0..n {
            for b in 0..n {
                leq[a][b] = self.leq[a][b];
            }
        }
        for a in 0..m {
            for b in 0..m {
                leq[n + a][n + b] = other.leq[a][b];
            }
        }
        let mut trans = self.trans.clone();
        for (&(x, y), t) in &other.trans {
            trans.insert((x + n, y + n), t.clone());
        }
        MonoidScheme { points, leq, trans }
    }

    pub fn is_cancellative(&self) -> bool {
        self.points.iter().all(|p| p.stalk.is_cancellative())
    }

    pub fn is_reduced(&self) -> Result<bool> {
        for x in self.maximal_points() {
            if !self.stalk(x).is_reduced()? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn is_connected(&self) -> bool {
        if self.is_empty() {
            return true;
        }
        let mut seen = vec![false; self.len()];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(x) = stack.pop() {
            for y in 0..self.len() {
                if !seen[y] && (self.leq[x][y] || self.leq[y][x]) {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Greatest lower bound of two points, if it exists.
    pub fn meet(&self, a: usize, b: usize) -> Option<usize> {
        let lower: Vec<usize> = (0..self.len()).filter(|&z| self.leq[z][a] && self.leq[z][b]).collect();
        lower.iter().copied().find(|&g| lower.iter().all(|&z| self.leq[z][g]))
    }

    pub fn separation(&self) -> Result<Separation> {
        let maxes = self.maximal_points();
        for (i, &x1) in maxes.iter().enumerate() {
            for &x2 in &maxes[i + 1..] {
                let common = (0..self.len()).any(|z| self.leq[z][x1] && self.leq[z][x2]);
                if !common {
                    continue;
                }
                let Some(x0) = self.meet(x1, x2) else {
                    return Ok(Separation::NoGreatestLowerBound {
                        x1: self.label(x1).to_string(),
                        x2: self.label(x2).to_string(),
                    });
                };
                let mut gens: Vec<LatticeVector> = Vec::new();
                for x in [x1, x2] {
                    for g in &self.stalk(x).generators {
                        gens.push(self.transport(x, x0, g));
                    }
                }
                let a0 = self.stalk(x0);
                let generated = AffineMonoid::new(a0.rank, gens, vec![])?;
                if generated != a0.cancellative_part() {
                    return Ok(Separation::NotSurjective {
                        x1: self.label(x1).to_string(),
                        x2: self.label(x2).to_string(),
                        glb: self.label(x0).to_string(),
                    });
                }
            }
        }
        Ok(Separation::Separated)
    }

    pub fn is_separated(&self) -> Result<bool> {
        Ok(self.separation()?.is_separated())
    }

    /// Transports a chart ideal from a maximal point `x` down to `y ≤ x`.
    /// Generators of the ideal at `y`, transported from a chart above it.
    pub fn ideal_at(&self, j: &IdealSheaf, y: usize) -> Option<Vec<LatticeVector>> {
        let x = self.above(y).into_iter().find(|x| j.charts.contains_key(x))?;
        Some(j.charts[&x].iter().map(|a| self.transport(x, y, a)).collect())
    }

    /// Whether the chart ideals agree after localization on overlaps.
    pub fn is_quasi_coherent(&self, j: &IdealSheaf) -> Result<bool> {
        for y in 0..self.len() {
            let ay = self.stalk(y);
            let mut seen: Option<Vec<LatticeVector>> = None;
            for x in self.above(y) {
                if let Some(gens) = j.charts.get(&x) {
                    let moved: Vec<LatticeVector> = gens.iter().map(|a| self.transport(x, y, a)).collect();
                    let canon = canonical_ideal(ay, &moved)?;
                    match &seen {
                        None => seen = Some(canon),
                        Some(s) if *s != canon => return Ok(false),
                        _ => {}
                    }
                }
            }
        }
        Ok(true)
    }

    /// Closed subscheme cut out by `j`, with its closed immersion.
    pub fn closed_subscheme(&self, j: &IdealSheaf) -> Result<(MonoidScheme, SchemeMorphism)> {
        let mut keep = Vec::new();
        let mut stalks = Vec::new();
        for y in 0..self.len() {
            let ay = self.stalk(y);
            let gens = self.ideal_at(j, y).unwrap_or_default();
            let mut unit = false;
            let mut proper = Vec::new();
            for a in gens {
                match ay.member(&a)? {
                    Membership::InMonoid if ay.is_unit(&a) => unit = true,
                    Membership::InMonoid => proper.push(a),
                    Membership::InIdeal => {}
                    Membership::Outside => {
                        return Err(Error::Invalid(format!("ideal generator {a:?} not in the stalk at {}", self.label(y))))
                    }
                }
            }
            if !unit {
                keep.push(y);
                stalks.push(ay.quotient_by_ideal(&proper)?);
            }
        }
        let mut z = self.restrict(&keep);
        for (p, s) in z.points.iter_mut().zip(stalks) {
            p.stalk = s;
        }
        let stalk_maps = keep.iter().map(|&y| identity_map(self.stalk(y).rank)).collect();
        let f = SchemeMorphism::new_unchecked(z.clone(), self.clone(), keep, stalk_maps, Construction::ClosedImmersion);
        Ok((z, f))
    }

    /// Equivariant closure of a set of points, with its (radical) ideal.
    pub fn equivariant_closure(&self, zs: &[usize]) -> Result<(MonoidScheme, IdealSheaf)> {
        let mut charts = BTreeMap::new();
        for x in self.maximal_points() {
            let faces: Vec<Vec<usize>> = zs.iter().filter(|&&z| self.leq[z][x]).map(|&z| self.face_in(x, z)).collect();
            let ax = self.stalk(x);
            let gens = if faces.is_empty() {
                vec![vec![0; ax.rank]]
            } else {
                let mut g = ax.intersect_primes(&faces)?;
                g.extend(ax.ideal.iter().cloned());
                ax.minimalize_ideal(&g)?
            };
            charts.insert(x, gens);
        }
        let j = IdealSheaf { charts };
        let (z, _) = self.closed_subscheme(&j)?;
        Ok((z, j))
    }

    /// Disjoint pieces indexed by minimal points (cancellative schemes).
    pub fn components(&self) -> Result<Vec<MonoidScheme>> {
        if !self.is_cancellative() {
            return Err(Error::NotCancellative);
        }
        Ok(self
            .minimal_points()
            .into_iter()
            .map(|eta| {
                let pts: Vec<usize> = self.above(eta);
                self.restrict(&pts)
            })
            .collect())
    }

    /// Smoothness of every stalk.
    pub fn smooth_points(&self) -> Result<Vec<bool>> {
        self.points.iter().map(|p| p.stalk.is_smooth()).collect()
    }

    pub fn is_smooth(&self) -> Result<bool> {
        for x in self.maximal_points() {
            if !self.stalk(x).is_smooth()? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Isomorphism for schemes whose stalks share lattices: a poset
    /// isomorphism matching equal stalks and transitions.
    pub fn isomorphic_same_lattice(&self, other: &MonoidScheme) -> bool {
        let n = self.len();
        if n != other.len() {
            return false;
        }
        let canon_a: Vec<_> = self.points.iter().map(|p| p.stalk.canonical_form()).collect();
        let canon_b: Vec<_> = other.points.iter().map(|p| p.stalk.canonical_form()).collect();
        let cands: Vec<Vec<usize>> = (0..n).map(|i| (0..n).filter(|&j| canon_a[i] == canon_b[j]).collect()).collect();
        let mut assign = vec![usize::MAX; n];
        let mut used = vec![false; n];
        fn go(a: &MonoidScheme, b: &MonoidScheme, cands: &[Vec<usize>], i: usize, assign: &mut Vec<usize>, used: &mut Vec<bool>) -> bool {
            if i == cands.len() {
                return true;
            }
            for &j in &cands[i] {
                if used[j] {
                    continue;
                }
                let ok = (0..i).all(|k| a.leq[k][i] == b.leq[assign[k]][j] && a.leq[i][k] == b.leq[j][assign[k]]);
                if !ok {
                    continue;
                }
                assign[i] = j;
                used[j] = true;
                if go(a, b, cands, i + 1, assign, used) {
                    return true;
                }
                used[j] = false;
            }
            assign[i] = usize::MAX;
            false
        }
        if !go(self, other, &cands, 0, &mut assign, &mut used) {
            return false;
        }
        // transitions must agree on the stalk groups
        for x in 0..n {
            for y in self.below(x) {
                for g in &self.stalk(x).generators {
                    if self.transport(x, y, g) != other.transport(assign[x], assign[y], g) {
                        return false;
                    }
                }
            }
        }
        true
    }

    pub fn to_dot(&self) -> String {
        let h = self.heights();
        let mut s = String::from("digraph scheme {\n  rankdir=BT;\n");
        for (i, p) in self.points.iter().enumerate() {
            s.push_str(&format!("  n{i} [label=\"{} (ht {})\"];\n", p.label, h[i]));
        }
        for y in 0..self.len() {
            for x in 0..self.len() {
                if x != y && self.leq[y][x] && !(0..self.len()).any(|z| z != x && z != y && self.leq[y][z] && self.leq[z][x]) {
                    s.push_str(&format!("  n{y} -> n{x};\n"));
                }
            }
        }
        s.push_str("}\n");
        s
    }

    /// Charts at maximal points with identifications along pairwise meets.
    pub fn to_data(&self) -> SchemeData {
        let maxes = self.maximal_points();
        let charts: Vec<MonoidData> = maxes.iter().map(|&x| self.stalk(x).to_data()).collect();
        let mut ids = Vec::new();
        for (i, &a) in maxes.iter().enumerate() {
            for (j, &b) in maxes.iter().enumerate().skip(i + 1) {
                for z in 0..self.len() {
                    // identify along each maximal common lower bound
                    let common = |w: usize| self.leq[w][a] && self.leq[w][b];
                    if common(z) && !(0..self.len()).any(|w| w != z && common(w) && self.leq[z][w]) {
                        // chart a → stalk at z → chart b
                        let back = invert_unimodular(&self.transition(b, z)).expect("gluing transitions are invertible");
                        let iso = compose_maps(&self.transition(a, z), &back, self.stalk(b).rank);
                        ids.push(IdentificationData { chart_i: i, face_i: self.face_in(a, z), chart_j: j, face_j: self.face_in(b, z), iso });
                    }
                }
            }
        }
        SchemeData { charts, identifications: ids }
    }

    pub fn from_data(d: &SchemeData) -> Result<MonoidScheme> {
        let charts: Vec<AffineMonoid> = d.charts.iter().map(AffineMonoid::from_data).collect::<Result<_>>()?;
        let ids: Vec<Identification> = d
            .identifications
            .iter()
            .map(|i| Identification { chart_i: i.chart_i, face_i: i.face_i.clone(), chart_j: i.chart_j, face_j: i.face_j.clone(), iso: i.iso.clone() })
            .collect();
        MonoidScheme::glue(&charts, &ids)
    }
}

/// Canonical minimal generators of an ideal in `a` (unit ideal as the zero
/// vector, ideal elements dropped).
pub fn canonical_ideal(a: &AffineMonoid, gens: &[LatticeVector]) -> Result<Vec<LatticeVector>> {
    let mut proper = Vec::new();
    for g in gens {
        match a.member(g)? {
            Membership::InMonoid if a.is_unit(g) => return Ok(vec![vec![0; a.rank]]),
            Membership::InMonoid => proper.push(g.clone()),
            _ => {}
        }
    }
    a.minimalize_ideal(&proper)
}

/// The monoid `a` carried along a lattice map.
pub fn transport_monoid(a: &AffineMonoid, m: &LatticeMap, rank: usize) -> Result<AffineMonoid> {
    let gens = a.generators.iter().map(|g| apply_map(m, g, rank)).collect();
    let ideal = a.ideal.iter().map(|g| apply_map(m, g, rank)).collect();
    AffineMonoid::new(rank, gens, ideal)
}

/// Inverse of a unimodular lattice map, if it is one.
pub fn invert_unimodular(m: &LatticeMap) -> Option<LatticeMap> {
    if m.is_empty() {
        return Some(vec![]);
    }
    if m.len() != m[0].len() {
        return None;
    }
    let inv = lattice::rational_inverse(&lattice::big_matrix(m))?;
    inv.iter()
        .map(|r| {
            r.iter()
                .map(|x| if x.is_integer() { num_traits::ToPrimitive::to_i64(&x.to_integer()) } else { None })
                .collect::<Option<Vec<i64>>>()
        })
        .collect()
}

/// Scheme-theoretic image of `f : Y → X`: per chart of X, the elements
/// that vanish on the whole preimage generate the ideal. Elements are
/// enumerated up to total multiplicity `degree_bound`.
pub fn scheme_theoretic_image(f: &SchemeMorphism, degree_bound: usize) -> Result<(MonoidScheme, SchemeMorphism)> {
    let x = &f.target;
    let y = &f.source;
    let mut charts = BTreeMap::new();
    for xm in x.maximal_points() {
        let pre: Vec<usize> = (0..y.len()).filter(|&q| x.leq(f.point_map[q], xm)).collect();
        let ax = x.stalk(xm);
        if pre.is_empty() {
            charts.insert(xm, vec![vec![0; ax.rank]]);
            continue;
        }
        let vanishes = |v: &LatticeVector| -> Result<bool> {
            for &q in &pre {
                let at = x.transport(xm, f.point_map[q], v);
                let img = apply_map(&f.stalk_maps[q], &at, y.stalk(q).rank);
                if y.stalk(q).member(&img)? != Membership::InIdeal {
                    return Ok(false);
                }
            }
            Ok(true)
        };
        let mut found = Vec::new();
        for v in bounded_elements(ax, degree_bound) {
            if !lattice::is_zero(&v) && vanishes(&v)? {
                found.push(v);
            }
        }
        if vanishes(&vec![0; ax.rank])? {
            found = vec![vec![0; ax.rank]];
        }
        charts.insert(xm, if found.iter().any(|v| lattice::is_zero(v)) { found } else { ax.minimalize_ideal(&found)? });
    }
    x.closed_subscheme(&IdealSheaf { charts })
}

/// Sums of generators with total multiplicity at most `d`.
pub fn bounded_elements(a: &AffineMonoid, d: usize) -> Vec<LatticeVector> {
    let mut out: BTreeSet<LatticeVector> = BTreeSet::from([vec![0; a.rank]]);
    let mut frontier = out.clone();
    for _ in 0..d {
        let mut next = BTreeSet::new();
        for e in &frontier {
            for g in &a.generators {
                let s = lattice::add(e, g);
                if out.insert(s.clone()) {
                    next.insert(s);
                }
            }
        }
        frontier = next;
    }
    out.into_iter().collect()
}
