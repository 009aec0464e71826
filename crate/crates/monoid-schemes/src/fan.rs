//! Fans, toric monoid schemes and their combinatorics: star and barycentric
//! subdivision, toric resolution, factorization through iterated
//! barycentric subdivisions and the fan criterion for properness.

use crate::cone::{self, RationalCone};
use crate::error::{Error, Result};
use crate::lattice::{self, dot, LatticeVector};
use crate::monoid::{saturated_monoid, Membership};
use crate::morphisms::{Construction, SchemeMorphism};
use crate::scheme::{identity_map, LatticeMap, MonoidScheme, Point};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

/// Upper bound on star subdivisions performed by `resolve`.
pub const RESOLVE_STEP_LIMIT: usize = 10_000;

/// A fan in `N_R = Q^rank`: primitive rays and the full list of cones
/// (closed under faces, the zero cone included), each a sorted list of
/// ray indices.
#[derive(Clone, Debug)]
pub struct Fan {
    pub rank: usize,
    pub rays: Vec<LatticeVector>,
    pub cones: Vec<Vec<usize>>,
}

/// File form of a fan: rays and maximal cones.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FanData {
    pub rank: usize,
    pub rays: Vec<LatticeVector>,
    pub cones: Vec<Vec<usize>>,
}

impl PartialEq for Fan {
    /// Equal as sets of cones of vectors; ray numbering is irrelevant.
    fn eq(&self, other: &Self) -> bool {
        self.rank == other.rank && self.cone_set() == other.cone_set()
    }
}
impl Eq for Fan {}

impl Fan {
    pub fn new(rank: usize, rays: Vec<LatticeVector>, cones: Vec<Vec<usize>>) -> Result<Fan> {
        let mut prim = Vec::with_capacity(rays.len());
        for r in &rays {
            if r.len() != rank {
                return Err(Error::Dimension(format!("ray {r:?} in rank {rank}")));
            }
            if lattice::is_zero(r) {
                return Err(Error::Invalid("zero ray".into()));
            }
            let p = lattice::primitive(r);
            if prim.contains(&p) {
                return Err(Error::Invalid(format!("repeated ray {p:?}")));
            }
            prim.push(p);
        }
        let index: BTreeMap<LatticeVector, usize> = prim.iter().cloned().enumerate().map(|(i, r)| (r, i)).collect();
        let mut all: BTreeSet<Vec<usize>> = BTreeSet::from([Vec::new()]);
        let mut tops = Vec::new();
        for c in &cones {
            if c.iter().any(|&i| i >= prim.len()) {
                return Err(Error::Invalid(format!("cone {c:?} refers to a missing ray")));
            }
            let vs: Vec<LatticeVector> = c.iter().map(|&i| prim[i].clone()).collect();
            let rc = RationalCone::new(rank, vs.clone())?;
            if !rc.is_pointed() {
                return Err(Error::NotPointed);
            }
            let mut sorted = vs.clone();
            sorted.sort();
            sorted.dedup();
            if sorted != rc.rays || sorted.len() != vs.len() {
                return Err(Error::Invalid(format!("cone {c:?} lists vectors that are not its extreme rays")));
            }
            for f in rc.face_lattice().faces {
                let mut idx: Vec<usize> = f.rays.iter().map(|&k| index[&rc.rays[k]]).collect();
                idx.sort_unstable();
                all.insert(idx);
            }
            tops.push(rc);
        }
        if !cone::meets_in_faces(&tops) {
            return Err(Error::Invalid("cones do not meet in common faces".into()));
        }
        let used: BTreeSet<usize> = all.iter().flatten().copied().collect();
        if used.len() != prim.len() {
            return Err(Error::Invalid("a ray lies in no cone".into()));
        }
        let mut cones: Vec<Vec<usize>> = all.into_iter().collect();
        cones.sort_by(|a, b| a.len().cmp(&b.len()).then(a.cmp(b)));
        Ok(Fan { rank, rays: prim, cones })
    }

    /// The fan of a single cone and its faces.
    pub fn from_cone(rank: usize, gens: Vec<LatticeVector>) -> Result<Fan> {
        let c = RationalCone::new(rank, gens)?;
        let n = c.rays.len();
        Fan::new(rank, c.rays, vec![(0..n).collect()])
    }

    /// The positive orthant of `Q^d` with its faces.
    pub fn orthant(d: usize) -> Fan {
        Fan::new(d, (0..d).map(|i| lattice::unit(d, i)).collect(), vec![(0..d).collect()]).expect("orthant")
    }

    pub fn from_data(d: &FanData) -> Result<Fan> {
        Fan::new(d.rank, d.rays.clone(), d.cones.clone())
    }

    pub fn to_data(&self) -> FanData {
        FanData { rank: self.rank, rays: self.rays.clone(), cones: self.maximal_cones() }
    }

    fn cone_set(&self) -> BTreeSet<Vec<LatticeVector>> {
        self.cones.iter().map(|c| self.cone_vectors(c)).collect()
    }

    fn cone_vectors(&self, c: &[usize]) -> Vec<LatticeVector> {
        let mut v: Vec<LatticeVector> = c.iter().map(|&i| self.rays[i].clone()).collect();
        v.sort();
        v
    }

    pub fn cone(&self, i: usize) -> RationalCone {
        RationalCone::new(self.rank, self.cone_vectors(&self.cones[i])).expect("consistent rank")
    }

    pub fn maximal_cones(&self) -> Vec<Vec<usize>> {
        self.cones
            .iter()
            .filter(|c| !self.cones.iter().any(|d| d.len() > c.len() && is_subset(c, d)))
            .cloned()
            .collect()
    }

    pub fn maximal_rational_cones(&self) -> Vec<RationalCone> {
        self.maximal_cones()
            .iter()
            .map(|c| RationalCone::new(self.rank, self.cone_vectors(c)).expect("consistent rank"))
            .collect()
    }

    pub fn dim(&self) -> usize {
        self.cones.iter().map(|c| self.cone(self.cones.iter().position(|d| d == c).unwrap()).dim()).max().unwrap_or(0)
    }

    /// Index of the cone containing `v` in its relative interior.
    pub fn cone_containing(&self, v: &[i64]) -> Option<usize> {
        (0..self.cones.len()).find(|&i| self.cone(i).contains_in_relative_interior(v))
    }

    pub fn in_support(&self, v: &[i64]) -> bool {
        self.cone_containing(v).is_some()
    }

    pub fn is_smooth(&self) -> bool {
        self.maximal_rational_cones().iter().all(|c| c.is_smooth())
    }

    pub fn is_simplicial(&self) -> bool {
        self.maximal_rational_cones().iter().all(|c| c.is_simplicial())
    }

    /// Star subdivision at a primitive vector of the support.
    pub fn star_subdivision(&self, v: &[i64]) -> Result<Fan> {
        if v.len() != self.rank {
            return Err(Error::Dimension(format!("vector {v:?} in rank {}", self.rank)));
        }
        if lattice::is_zero(v) || !self.in_support(v) {
            return Err(Error::NotInSupport(v.to_vec()));
        }
        let v = lattice::primitive(v);
        if self.rays.contains(&v) {
            return Ok(self.clone());
        }
        let new = self.rays.len();
        let mut rays = self.rays.clone();
        rays.push(v.clone());
        let holds: Vec<bool> = (0..self.cones.len()).map(|i| self.cone(i).contains(&v)).collect();
        let mut cones: BTreeSet<Vec<usize>> = BTreeSet::new();
        for (i, c) in self.cones.iter().enumerate() {
            if !holds[i] {
                cones.insert(c.clone());
                continue;
            }
            for (j, t) in self.cones.iter().enumerate() {
                if !holds[j] && is_subset(t, c) {
                    let mut s = t.clone();
                    s.push(new);
                    cones.insert(s);
                }
            }
        }
        let all: Vec<Vec<usize>> = cones.into_iter().collect();
        let maximal: Vec<Vec<usize>> =
            all.iter().filter(|c| !all.iter().any(|d| d.len() > c.len() && is_subset(c, d))).cloned().collect();
        Fan::new(self.rank, rays, maximal)
    }

    /// The barycentric subdivision together with its star subdivision steps.
    pub fn barycentric_steps(&self) -> Result<(Fan, Vec<Step>)> {
        if !self.is_simplicial() {
            return Err(Error::NotSimplicial);
        }
        let mut order: Vec<&Vec<usize>> = self.cones.iter().filter(|c| c.len() >= 2).collect();
        order.sort_by(|a, b| b.len().cmp(&a.len()).then(a.cmp(b)));
        let mut fan = self.clone();
        let mut steps = Vec::new();
        for c in order {
            let center = self.cone_vectors(c);
            let sum = center.iter().fold(vec![0; self.rank], |acc, r| lattice::add(&acc, r));
            let ray = lattice::primitive(&sum);
            fan = fan.star_subdivision(&ray)?;
            steps.push(Step { fan: fan.clone(), center, ray });
        }
        Ok((fan, steps))
    }

    pub fn barycentric_subdivision(&self) -> Result<Fan> {
        Ok(self.barycentric_steps()?.0)
    }

    /// The `i`-fold iterated barycentric subdivision.
    pub fn iterated(&self, i: usize) -> Result<Fan> {
        Ok(self.iterated_steps(i)?.0)
    }

    pub fn iterated_steps(&self, i: usize) -> Result<(Fan, Vec<Step>)> {
        let mut fan = self.clone();
        let mut steps = Vec::new();
        for _ in 0..i {
            let (f, s) = fan.barycentric_steps()?;
            fan = f;
            steps.extend(s);
        }
        Ok((fan, steps))
    }

    /// Toric resolution: repeatedly star-subdivide a non-smooth cone of
    /// minimal dimension at its interior Hilbert basis element of largest
    /// lattice depth (distance to the nearest facet).
    pub fn resolve(&self) -> Result<(Fan, Vec<LatticeVector>)> {
        let mut fan = self.clone();
        let mut centers = Vec::new();
        let ident: Vec<LatticeVector> = (0..self.rank).map(|i| lattice::unit(self.rank, i)).collect();
        loop {
            let bad = (0..fan.cones.len())
                .map(|i| fan.cone(i))
                .filter(|c| !c.is_smooth())
                .min_by_key(|c| c.dim());
            let c = match bad {
                None => return Ok((fan, centers)),
                Some(c) => c,
            };
            if centers.len() >= RESOLVE_STEP_LIMIT {
                return Err(Error::BudgetExceeded(format!("resolution needs more than {RESOLVE_STEP_LIMIT} steps")));
            }
            let hb = cone::hilbert_basis(&c, &ident)?;
            let depth = |v: &LatticeVector| c.facet_normals.iter().map(|n| dot(n, v)).min().unwrap_or(0);
            let v = hb
                .iter()
                .filter(|h| !c.rays.contains(h))
                .max_by(|a, b| depth(a).cmp(&depth(b)).then(b.cmp(a)))
                .cloned()
                .unwrap_or_else(|| lattice::primitive(&c.rays.iter().fold(vec![0; self.rank], |acc, r| lattice::add(&acc, r))));
            fan = fan.star_subdivision(&v)?;
            centers.push(v);
        }
    }

    /// Every cone of `self` lies in some cone of `other`.
    pub fn refines(&self, other: &Fan) -> bool {
        let theirs = other.maximal_rational_cones();
        self.maximal_rational_cones().iter().all(|c| theirs.iter().any(|d| d.contains_cone(c)))
    }

    /// `self` is a subdivision of `coarse`: it refines it and every coarse
    /// cone is the union of the fine cones it contains.
    pub fn is_subdivision_of(&self, coarse: &Fan) -> bool {
        if self.rank != coarse.rank || !self.refines(coarse) {
            return false;
        }
        let fine: Vec<RationalCone> = (0..self.cones.len()).map(|i| self.cone(i)).collect();
        coarse.maximal_rational_cones().iter().all(|s| {
            let inside: Vec<RationalCone> = fine.iter().filter(|c| s.contains_cone(c)).cloned().collect();
            cone::covers(&inside, s)
        })
    }

    /// For a subdivision `fine` of the smooth fan `self`: the least `i ≤
    /// max_i` such that the `i`-th barycentric subdivision refines `fine`,
    /// with the tower of star subdivisions at ray sums of smooth cones.
    pub fn factor_through(&self, fine: &Fan, max_i: usize) -> Result<(usize, Vec<Step>)> {
        if !self.is_smooth() {
            return Err(Error::Invalid("the coarse fan is not smooth".into()));
        }
        if !fine.is_subdivision_of(self) {
            return Err(Error::Invalid("not a subdivision of the coarse fan".into()));
        }
        for i in 0..=max_i {
            let (f, steps) = self.iterated_steps(i)?;
            if f.refines(fine) {
                return Ok((i, steps));
            }
        }
        Err(Error::BoundTooSmall(max_i))
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph fan {\n");
        for (i, c) in self.cones.iter().enumerate() {
            s.push_str(&format!("  c{i} [label=\"{:?}\\ndim {}\"];\n", self.cone_vectors(c), c.len()));
        }
        for (i, a) in self.cones.iter().enumerate() {
            for (j, b) in self.cones.iter().enumerate() {
                if b.len() == a.len() + 1 && is_subset(a, b) {
                    s.push_str(&format!("  c{i} -> c{j};\n"));
                }
            }
        }
        s.push_str("}\n");
        s
    }
}

/// One star subdivision of a tower: the resulting fan, the cone whose ray
/// sum was inserted, and the inserted ray.
#[derive(Clone, Debug)]
pub struct Step {
    pub fan: Fan,
    pub center: Vec<LatticeVector>,
    pub ray: LatticeVector,
}

/// Checks a tower over `start`: each step is the star subdivision at the
/// ray sum of a smooth cone of the previous fan and subdivides it.
pub fn verify_tower(start: &Fan, steps: &[Step]) -> Result<bool> {
    let mut prev = start.clone();
    for s in steps {
        let c = RationalCone::new(prev.rank, s.center.clone())?;
        let is_cone = prev.cones.iter().any(|k| prev.cone_vectors(k) == {
            let mut v = s.center.clone();
            v.sort();
            v
        });
        let sum = s.center.iter().fold(vec![0; prev.rank], |acc, r| lattice::add(&acc, r));
        if !is_cone || !c.is_smooth() || sum != s.ray {
            return Ok(false);
        }
        if prev.star_subdivision(&s.ray)? != s.fan || !s.fan.is_subdivision_of(&prev) {
            return Ok(false);
        }
        prev = s.fan.clone();
    }
    Ok(true)
}

fn is_subset(a: &[usize], b: &[usize]) -> bool {
    a.iter().all(|x| b.contains(x))
}

/// A linear map `N' → N` compatible with fans `Δ'` (source) and `Δ`.
#[derive(Clone, Debug)]
pub struct FanMorphism {
    pub source: Fan,
    pub target: Fan,
    /// Row `j` is the image of the `j`-th basis vector of `N'`.
    pub matrix: Vec<LatticeVector>,
}

impl FanMorphism {
    pub fn new(source: Fan, target: Fan, matrix: Vec<LatticeVector>) -> Result<FanMorphism> {
        if matrix.len() != source.rank || matrix.iter().any(|r| r.len() != target.rank) {
            return Err(Error::Dimension("fan map matrix shape".into()));
        }
        let f = FanMorphism { source, target, matrix };
        for c in &f.source.cones {
            if f.image_cone(c).is_none() {
                return Err(Error::Invalid(format!("cone {:?} does not map into a cone", f.source.cone_vectors(c))));
            }
        }
        Ok(f)
    }

    /// The identity of `N` between two fans in the same lattice.
    pub fn identity(source: Fan, target: Fan) -> Result<FanMorphism> {
        let n = source.rank;
        FanMorphism::new(source, target, (0..n).map(|i| lattice::unit(n, i)).collect())
    }

    pub fn apply(&self, v: &[i64]) -> LatticeVector {
        (0..self.target.rank).map(|i| v.iter().zip(&self.matrix).map(|(x, r)| x * r[i]).sum()).collect()
    }

    /// Smallest target cone containing the image of a source cone.
    pub fn image_cone(&self, c: &[usize]) -> Option<usize> {
        let sum = c.iter().fold(vec![0; self.source.rank], |acc, &i| lattice::add(&acc, &self.source.rays[i]));
        let img = self.apply(&sum);
        let imgs: Vec<LatticeVector> = c.iter().map(|&i| self.apply(&self.source.rays[i])).collect();
        let t = self.target.cone_containing(&img)?;
        let tc = self.target.cone(t);
        imgs.iter().all(|v| tc.contains(v)).then_some(t)
    }

    /// Dual map `M → M'` as rows: images of the basis of `M`.
    pub fn dual_matrix(&self) -> LatticeMap {
        (0..self.target.rank).map(|i| self.matrix.iter().map(|r| r[i]).collect()).collect()
    }

    fn is_lattice_iso(&self) -> bool {
        self.source.rank == self.target.rank && {
            let d = lattice::determinant(&lattice::big_matrix(&self.matrix));
            d == 1.into() || d == (-1).into()
        }
    }
}

/// `None` when the fan criterion holds; otherwise a description of a
/// target cone whose preimage is not the union of the cones over it.
pub fn proper_fan_map_witness(phi: &FanMorphism) -> Result<Option<String>> {
    let src = &phi.source;
    let pull = |n: &LatticeVector| -> LatticeVector { phi.matrix.iter().map(|r| dot(r, n)).collect() };
    for t in 0..phi.target.cones.len() {
        let sigma = phi.target.cone(t);
        let ineqs: Vec<LatticeVector> = sigma.facet_normals.iter().map(pull).collect();
        let eqs: Vec<LatticeVector> = sigma.perp.iter().map(pull).collect();
        let pre = RationalCone::from_inequalities(src.rank, &ineqs, &eqs);
        let over: Vec<RationalCone> = (0..src.cones.len())
            .map(|i| src.cone(i))
            .filter(|c| c.rays.iter().all(|r| sigma.contains(&phi.apply(r))))
            .collect();
        if !cone::covers(&over, &pre) {
            return Ok(Some(format!(
                "the preimage of the cone spanned by {:?} is not covered by the cones mapping into it",
                sigma.rays
            )));
        }
    }
    Ok(None)
}

pub fn is_proper_fan_map(phi: &FanMorphism) -> Result<bool> {
    Ok(proper_fan_map_witness(phi)?.is_none())
}

/// A lattice isomorphism carrying `Δ'` onto a subdivision of `Δ`.
pub fn is_birational_fan_map(phi: &FanMorphism) -> Result<bool> {
    Ok(phi.is_lattice_iso() && is_proper_fan_map(phi)?)
}

/// The toric monoid scheme of a fan: one point per cone, stalk
/// `σ^∨ ∩ M`, identity transitions, `τ ≤ σ` for faces.
pub fn scheme_from_fan(fan: &Fan) -> Result<MonoidScheme> {
    let ident: Vec<LatticeVector> = (0..fan.rank).map(|i| lattice::unit(fan.rank, i)).collect();
    let mut points = Vec::new();
    for i in 0..fan.cones.len() {
        let stalk = saturated_monoid(&fan.cone(i).dual(), &ident)?;
        points.push(Point { label: format!("cone{:?}", fan.cones[i]), stalk });
    }
    let n = fan.cones.len();
    let leq: Vec<Vec<bool>> = (0..n).map(|a| (0..n).map(|b| is_subset(&fan.cones[a], &fan.cones[b])).collect()).collect();
    let mut trans = BTreeMap::new();
    for x in 0..n {
        for y in 0..n {
            if x != y && leq[y][x] {
                trans.insert((x, y), identity_map(fan.rank));
            }
        }
    }
    Ok(MonoidScheme::from_parts(points, leq, trans))
}

/// The character lattice of a toric scheme (a basis of the generic stalk
/// group) and, per point, its cone in `N_R` in those coordinates.
fn point_cones(x: &MonoidScheme) -> Result<(Vec<LatticeVector>, Vec<RationalCone>)> {
    if !x.is_connected() {
        return Err(Error::NotToric("not connected".into()));
    }
    if !x.is_cancellative() {
        return Err(Error::NotToric("not cancellative".into()));
    }
    if !x.is_separated()? {
        return Err(Error::NotToric("not separated".into()));
    }
    let generic = match x.minimal_points().as_slice() {
        [g] => *g,
        _ => return Err(Error::NotToric("more than one generic point".into())),
    };
    let eta = x.stalk(generic);
    if !eta.generators.iter().all(|g| eta.is_unit(g)) {
        return Err(Error::NotToric("generic stalk is not a group".into()));
    }
    let basis = lattice::lattice_basis(&eta.generators, eta.rank);
    let k = basis.len();
    let ident: Vec<LatticeVector> = (0..k).map(|i| lattice::unit(k, i)).collect();
    let mut cones = Vec::new();
    for p in 0..x.len() {
        let a = x.stalk(p);
        if !a.is_normal()? {
            return Err(Error::NotToric(format!("stalk at {} is not normal", x.label(p))));
        }
        let coords = a
            .generators
            .iter()
            .map(|g| lattice::lattice_coords(&basis, &x.transport(p, generic, g)))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Error::NotToric("stalk does not embed in the generic stalk".into()))?;
        if lattice::lattice_basis(&coords, k) != ident {
            return Err(Error::NotToric(format!("stalk at {} does not generate the character lattice", x.label(p))));
        }
        cones.push(RationalCone::new(k, coords)?.dual());
    }
    Ok((basis, cones))
}

/// The fan of a connected separated normal toric monoid scheme.
pub fn fan_from_scheme(x: &MonoidScheme) -> Result<Fan> {
    let (basis, cones) = point_cones(x)?;
    let k = basis.len();
    let mut rays: Vec<LatticeVector> = cones.iter().flat_map(|c| c.rays.iter().cloned()).collect();
    rays.sort();
    rays.dedup();
    let idx = |c: &RationalCone| -> Vec<usize> { c.rays.iter().map(|r| rays.binary_search(r).unwrap()).collect() };
    let maximal: Vec<Vec<usize>> = x.maximal_points().iter().map(|&p| idx(&cones[p])).collect();
    let fan = Fan::new(k, rays.clone(), maximal)?;
    if fan.cones.len() != x.len() {
        return Err(Error::NotToric("points do not correspond to the cones of a fan".into()));
    }
    for c in &cones {
        let mut i = idx(c);
        i.sort_unstable();
        if !fan.cones.contains(&i) {
            return Err(Error::NotToric("a point has no cone in the fan".into()));
        }
    }
    Ok(fan)
}

/// The toric morphism `X(Δ') → X(Δ)` of a fan map.
pub fn morphism_from_fan_map(phi: &FanMorphism) -> Result<SchemeMorphism> {
    let y = scheme_from_fan(&phi.source)?;
    let x = scheme_from_fan(&phi.target)?;
    let point_map = phi
        .source
        .cones
        .iter()
        .map(|c| phi.image_cone(c).ok_or_else(|| Error::Invalid("cone does not map into a cone".into())))
        .collect::<Result<Vec<_>>>()?;
    let dual = phi.dual_matrix();
    let stalk_maps = vec![dual; y.len()];
    SchemeMorphism::new(y, x, point_map, stalk_maps, Construction::Toric)
}

/// The fan map of a morphism of toric schemes that sends the generic point
/// to the generic point and each point to the cone over its image.
pub fn fan_map_from_morphism(f: &SchemeMorphism) -> Result<FanMorphism> {
    let (by, cy) = point_cones(&f.source)?;
    let (bx, cx) = point_cones(&f.target)?;
    let gy = f.source.minimal_points()[0];
    let gx = f.target.minimal_points()[0];
    if f.point_map[gy] != gx {
        return Err(Error::NotGenericPreserving);
    }
    // M_X → M_Y in the chosen bases
    let rank_y = f.source.stalk(gy).rank;
    let t: Vec<LatticeVector> = bx
        .iter()
        .map(|b| {
            let img = crate::scheme::apply_map(&f.stalk_maps[gy], b, rank_y);
            lattice::lattice_coords(&by, &img).ok_or_else(|| Error::NotToric("generic stalk map leaves the lattice".into()))
        })
        .collect::<Result<_>>()?;
    let matrix: Vec<LatticeVector> = (0..by.len()).map(|j| t.iter().map(|r| r[j]).collect()).collect();
    let source = fan_from_scheme(&f.source)?;
    let target = fan_from_scheme(&f.target)?;
    let phi = FanMorphism::new(source, target, matrix)?;
    for y in 0..f.source.len() {
        let s = &cy[y];
        let sum = s.rays.iter().fold(vec![0; by.len()], |acc, r| lattice::add(&acc, r));
        let img = phi.apply(&sum);
        let tc = &cx[f.point_map[y]];
        if !tc.contains_in_relative_interior(&img) || !s.rays.iter().all(|r| tc.contains(&phi.apply(r))) {
            return Err(Error::NotToric("point map is not induced by the fan map".into()));
        }
    }
    Ok(phi)
}

/// The ideal sheaf of the orbit closure `V(τ)` for a cone `τ` of the fan,
/// on the charts of `scheme_from_fan`: the prime of `σ^∨ ∩ M` of
/// characters positive somewhere on `τ`, or the unit ideal when `τ ⊄ σ`.
pub fn orbit_closure_ideal(fan: &Fan, x: &MonoidScheme, tau: &[usize]) -> Result<crate::scheme::IdealSheaf> {
    let mut charts = BTreeMap::new();
    for p in x.maximal_points() {
        let a = x.stalk(p);
        if !is_subset(tau, &fan.cones[p]) {
            charts.insert(p, vec![vec![0; fan.rank]]);
            continue;
        }
        let gens: Vec<LatticeVector> = a
            .generators
            .iter()
            .filter(|g| tau.iter().any(|&r| dot(g, &fan.rays[r]) > 0))
            .cloned()
            .collect();
        debug_assert!(gens.iter().all(|g| a.member(g).map(|m| m == Membership::InMonoid).unwrap_or(false)));
        charts.insert(p, a.minimalize_ideal(&gens)?);
    }
    Ok(crate::scheme::IdealSheaf { charts })
}

/// A random complete simplicial fan in rank 2 (rays sorted by angle) or a
/// random subdivision of the 3-orthant (random star subdivisions).
pub fn random_fan(rng: &mut impl Rng, rank: usize, bound: i64) -> Fan {
    match rank {
        2 => loop {
            let k = rng.gen_range(3..=6);
            let mut rays: Vec<LatticeVector> = (0..k)
                .map(|_| lattice::primitive(&[rng.gen_range(-bound..=bound), rng.gen_range(-bound..=bound)]))
                .filter(|r| !lattice::is_zero(r))
                .collect();
            rays.sort_by(|a, b| angle(a).partial_cmp(&angle(b)).unwrap());
            rays.dedup();
            let n = rays.len();
            if n < 3 {
                continue;
            }
            // consecutive rays must span strictly convex cones
            let ok = (0..n).all(|i| {
                let (a, b) = (&rays[i], &rays[(i + 1) % n]);
                a[0] * b[1] - a[1] * b[0] > 0
            });
            if !ok {
                continue;
            }
            let cones = (0..n).map(|i| vec![i, (i + 1) % n]).collect();
            if let Ok(f) = Fan::new(2, rays, cones) {
                return f;
            }
        },
        _ => {
            let mut f = Fan::orthant(rank);
            for _ in 0..rng.gen_range(1..=3) {
                let v: LatticeVector = (0..rank).map(|_| rng.gen_range(0..=bound)).collect();
                if !lattice::is_zero(&v) {
                    f = f.star_subdivision(&v).expect("point of the orthant");
                }
            }
            f
        }
    }
}

fn angle(v: &[i64]) -> f64 {
    (v[1] as f64).atan2(v[0] as f64)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::monoid::tests::m;
    use crate::morphisms::Properness;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn fan(rank: usize, rays: &[&[i64]], cones: &[&[usize]]) -> Fan {
        Fan::new(rank, rays.iter().map(|r| r.to_vec()).collect(), cones.iter().map(|c| c.to_vec()).collect()).unwrap()
    }

    pub(crate) fn p1_fan() -> Fan {
        fan(1, &[&[1], &[-1]], &[&[0], &[1]])
    }

    pub(crate) fn p2_fan() -> Fan {
        fan(2, &[&[1, 0], &[0, 1], &[-1, -1]], &[&[0, 1], &[1, 2], &[2, 0]])
    }

    #[test]
    fn fan_validation() {
        assert!(Fan::new(2, vec![vec![1, 0], vec![1, 1], vec![0, 1]], vec![vec![0, 2], vec![1]]).is_err());
        assert!(Fan::new(2, vec![vec![1, 0], vec![-1, 0]], vec![vec![0, 1]]).is_err());
        assert_eq!(p2_fan().cones.len(), 7);
        assert!(p2_fan().is_smooth());
    }

    #[test]
    fn quadric_cone_stalk() {
        let f = Fan::from_cone(2, vec![vec![0, 1], vec![2, -1]]).unwrap();
        let x = scheme_from_fan(&f).unwrap();
        let top = x.maximal_points()[0];
        assert_eq!(x.stalk(top).generators, vec![vec![1, 0], vec![1, 1], vec![1, 2]]);
        assert!(!x.is_smooth().unwrap());
    }

    #[test]
    fn round_trips() {
        for f in [p1_fan(), p2_fan(), Fan::orthant(3), fan(2, &[&[1, 0], &[0, 1], &[-1, 2], &[0, -1]], &[&[0, 1], &[1, 2], &[2, 3], &[3, 0]])] {
            let x = scheme_from_fan(&f).unwrap();
            x.validate().unwrap();
            assert!(x.is_separated().unwrap());
            assert_eq!(fan_from_scheme(&x).unwrap(), f);
        }
    }

    #[test]
    fn star_subdivision_of_orthant() {
        let s = Fan::orthant(2).star_subdivision(&[1, 1]).unwrap();
        assert_eq!(s, fan(2, &[&[1, 0], &[1, 1], &[0, 1]], &[&[0, 1], &[1, 2]]));
        assert!(s.is_subdivision_of(&Fan::orthant(2)));
        assert!(Fan::orthant(2).star_subdivision(&[-1, 0]).is_err());
    }

    #[test]
    fn barycentric_counts() {
        let b = Fan::orthant(3).barycentric_subdivision().unwrap();
        assert_eq!(b.maximal_cones().len(), 6);
        assert!(b.is_smooth());
        assert!(b.is_subdivision_of(&Fan::orthant(3)));
    }

    #[test]
    fn resolution_of_quadric_cone() {
        let f = Fan::from_cone(2, vec![vec![0, 1], vec![2, -1]]).unwrap();
        let (r, centers) = f.resolve().unwrap();
        assert_eq!(centers, vec![vec![1, 0]]);
        assert!(r.is_smooth());
        let phi = FanMorphism::identity(r, f).unwrap();
        assert!(is_proper_fan_map(&phi).unwrap());
        assert!(is_birational_fan_map(&phi).unwrap());
    }

    #[test]
    fn factorization_examples() {
        let o = Fan::orthant(2);
        let (i, tower) = o.factor_through(&o.star_subdivision(&[1, 1]).unwrap(), 3).unwrap();
        assert_eq!(i, 1);
        assert!(verify_tower(&o, &tower).unwrap());
        let (i, tower) = o.factor_through(&o.star_subdivision(&[2, 1]).unwrap(), 3).unwrap();
        assert_eq!(i, 2);
        assert!(verify_tower(&o, &tower).unwrap());
    }

    #[test]
    fn fan_criterion_examples() {
        let pt = Fan::new(0, vec![], vec![]).unwrap();
        let p1 = FanMorphism::new(p1_fan(), pt.clone(), vec![vec![]]).unwrap();
        assert!(is_proper_fan_map(&p1).unwrap());
        let a1 = FanMorphism::new(fan(1, &[&[1]], &[&[0]]), pt, vec![vec![]]).unwrap();
        assert!(!is_proper_fan_map(&a1).unwrap());
        // open inclusion of a chart is not proper
        let inc = FanMorphism::identity(fan(1, &[&[1]], &[&[0]]), p1_fan()).unwrap();
        assert!(!is_proper_fan_map(&inc).unwrap());
    }

    #[test]
    fn toric_morphisms() {
        let s = Fan::orthant(2).star_subdivision(&[1, 1]).unwrap();
        let phi = FanMorphism::identity(s, Fan::orthant(2)).unwrap();
        let f = morphism_from_fan_map(&phi).unwrap();
        assert!(f.is_birational().unwrap());
        assert!(f.check_height_monotone());
        assert!(matches!(f.is_proper().unwrap(), Properness::Proper(_)));
        let back = fan_map_from_morphism(&f).unwrap();
        assert_eq!(back.matrix, phi.matrix);
        assert_eq!(back.source, phi.source);
    }

    #[test]
    fn orbit_closure_of_origin() {
        let o = Fan::orthant(2);
        let x = scheme_from_fan(&o).unwrap();
        let j = orbit_closure_ideal(&o, &x, &[0, 1]).unwrap();
        let top = x.maximal_points()[0];
        assert_eq!(j.charts[&top], vec![vec![0, 1], vec![1, 0]]);
        let _ = m(1, &[&[1]], &[]);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn random_fans_round_trip(seed in 0u64..1000, rank in 2usize..4) {
            let f = random_fan(&mut ChaCha8Rng::seed_from_u64(seed), rank, 4);
            let x = scheme_from_fan(&f).unwrap();
            prop_assert_eq!(fan_from_scheme(&x).unwrap(), f);
        }

        #[test]
        fn subdivisions_are_proper_and_heights_go_up(seed in 0u64..1000, a in 0i64..5, b in 0i64..5) {
            prop_assume!(a + b > 0);
            let f = random_fan(&mut ChaCha8Rng::seed_from_u64(seed), 2, 4);
            let v = vec![a, b];
            prop_assume!(f.in_support(&v));
            let s = f.star_subdivision(&v).unwrap();
            prop_assert!(s.is_subdivision_of(&f));
            let phi = FanMorphism::identity(s, f).unwrap();
            prop_assert!(is_proper_fan_map(&phi).unwrap());
            for c in &phi.source.cones {
                let t = phi.image_cone(c).unwrap();
                prop_assert!(c.len() <= phi.target.cones[t].len());
            }
        }

        #[test]
        fn resolution_is_smooth_subdivision(x1 in 1i64..7, y1 in -6i64..7, x2 in -6i64..7, y2 in 1i64..7) {
            let gens = vec![vec![x1, y1], vec![x2, y2]];
            prop_assume!(x1 * y2 - y1 * x2 > 0);
            let f = Fan::from_cone(2, gens).unwrap();
            let (r, _) = f.resolve().unwrap();
            prop_assert!(r.is_smooth());
            prop_assert!(r.is_subdivision_of(&f));
        }
    }
}
