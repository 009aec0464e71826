//! Pointed pctf monoids `B/I` with `B = ⟨G⟩ ⊆ Z^n` and `I` a monomial ideal.

use crate::cone::{self, RationalCone};
use crate::error::{Error, Result};
use crate::lattice::{self, dot, LatticeVector};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashSet};
use std::sync::atomic::{AtomicUsize, Ordering};

/// Default node budget for semigroup membership searches.
pub const DEFAULT_NODE_BUDGET: usize = 1_000_000;

static NODE_BUDGET: AtomicUsize = AtomicUsize::new(DEFAULT_NODE_BUDGET);

/// Sets the process-wide node budget for membership searches.
pub fn set_node_budget(n: usize) {
    NODE_BUDGET.store(n, Ordering::Relaxed);
}

pub fn node_budget() -> usize {
    NODE_BUDGET.load(Ordering::Relaxed)
}

/// On-disk form of a monoid: `rank`, `generators`, `ideal`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonoidData {
    pub rank: usize,
    pub generators: Vec<LatticeVector>,
    #[serde(default)]
    pub ideal: Vec<LatticeVector>,
}

#[derive(Clone, Debug)]
pub struct AffineMonoid {
    pub rank: usize,
    pub generators: Vec<LatticeVector>,
    pub ideal: Vec<LatticeVector>,
    cone: RationalCone,
    group: Vec<LatticeVector>,
    units: Vec<LatticeVector>,
    degree: LatticeVector,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Membership {
    InMonoid,
    InIdeal,
    Outside,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Finiteness {
    Finite,
    NotFinite,
    Unknown,
}

/// A prime ideal `p_F = B ∖ F`, recorded by the generators lying on the face F.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PrimeIdeal {
    /// Indices of the generators on the face (the complement of the prime).
    pub face: Vec<usize>,
    pub height: usize,
    /// Dimension of the face.
    pub face_dim: usize,
}

impl PrimeIdeal {
    /// Inclusion of primes: `self ⊆ other` iff the face of `other` lies in ours.
    pub fn is_subset_of(&self, other: &PrimeIdeal) -> bool {
        other.face.iter().all(|i| self.face.contains(i))
    }
}

impl PartialEq for AffineMonoid {
    fn eq(&self, other: &Self) -> bool {
        self.canonical_form() == other.canonical_form()
    }
}

impl AffineMonoid {
    pub fn new(rank: usize, generators: Vec<LatticeVector>, ideal: Vec<LatticeVector>) -> Result<Self> {
        for v in generators.iter().chain(&ideal) {
            if v.len() != rank {
                return Err(Error::Dimension(format!("vector {v:?} in rank {rank}")));
            }
        }
        let cone = RationalCone::new(rank, generators.clone())?;
        let group = lattice::lattice_basis(&generators, rank);
        let on_lineality: Vec<LatticeVector> = generators
            .iter()
            .filter(|g| cone.facet_normals.iter().all(|n| dot(n, g) == 0))
            .cloned()
            .collect();
        let units = lattice::lattice_basis(&on_lineality, rank);
        let degree = (0..rank).map(|i| cone.facet_normals.iter().map(|n| n[i]).sum()).collect();
        let m = AffineMonoid { rank, generators, ideal: vec![], cone, group, units, degree };
        for a in &ideal {
            if !m.in_semigroup(a)? {
                return Err(Error::Invalid(format!("ideal generator {a:?} is not in the semigroup")));
            }
            if m.is_unit(a) {
                return Err(Error::ZeroMonoid);
            }
        }
        Ok(AffineMonoid { ideal, ..m })
    }

    pub fn from_data(d: &MonoidData) -> Result<Self> {
        AffineMonoid::new(d.rank, d.generators.clone(), d.ideal.clone())
    }

    pub fn to_data(&self) -> MonoidData {
        MonoidData { rank: self.rank, generators: self.generators.clone(), ideal: self.ideal.clone() }
    }

    /// The free monoid `F_n` on the standard basis.
    pub fn free(n: usize) -> Self {
        AffineMonoid::new(n, (0..n).map(|i| lattice::unit(n, i)).collect(), vec![]).unwrap()
    }

    /// The two-element monoid `S⁰ = {0, 1}`.
    pub fn s0() -> Self {
        AffineMonoid::new(0, vec![], vec![]).unwrap()
    }

    pub fn cone(&self) -> &RationalCone {
        &self.cone
    }

    /// Hermite basis of the group completion of `B`.
    pub fn group(&self) -> &[LatticeVector] {
        &self.group
    }

    /// Hermite basis of the unit group of `B`.
    pub fn units(&self) -> &[LatticeVector] {
        &self.units
    }

    pub fn is_cancellative(&self) -> bool {
        self.ideal.is_empty()
    }

    pub fn is_unit(&self, v: &[i64]) -> bool {
        lattice::in_lattice(&lattice::big_matrix(&self.units), v)
    }

    fn reduce_mod_units(&self, v: &[i64]) -> LatticeVector {
        lattice::from_big(&lattice::hermite_reduce(&lattice::big_matrix(&self.units), &lattice::to_big(v)))
    }

    /// Whether `v` lies in the semigroup `B = ⟨G⟩`.
    pub fn in_semigroup(&self, v: &[i64]) -> Result<bool> {
        if v.len() != self.rank {
            return Err(Error::Dimension(format!("{v:?} in rank {}", self.rank)));
        }
        if !lattice::in_lattice(&lattice::big_matrix(&self.group), v) || !self.cone.contains(v) {
            return Ok(false);
        }
        let ubasis = lattice::big_matrix(&self.units);
        let reduce = |x: &[i64]| lattice::from_big(&lattice::hermite_reduce(&ubasis, &lattice::to_big(x)));
        let mut gens: Vec<LatticeVector> = self
            .generators
            .iter()
            .filter(|g| dot(&self.degree, g) > 0)
            .map(|g| reduce(g))
            .collect();
        gens.sort_by_key(|g| std::cmp::Reverse(dot(&self.degree, g)));
        gens.dedup();
        let budget = node_budget();
        let mut nodes = 0usize;
        let mut failed: HashSet<(usize, LatticeVector)> = HashSet::new();
        // explicit stack of (generator index, remainder)
        fn search(
            m: &AffineMonoid,
            gens: &[LatticeVector],
            i: usize,
            rem: LatticeVector,
            reduce: &dyn Fn(&[i64]) -> LatticeVector,
            failed: &mut HashSet<(usize, LatticeVector)>,
            nodes: &mut usize,
            budget: usize,
        ) -> Result<bool> {
            if lattice::is_zero(&rem) {
                return Ok(true);
            }
            if i == gens.len() || failed.contains(&(i, rem.clone())) {
                return Ok(false);
            }
            *nodes += 1;
            if *nodes > budget {
                return Err(Error::SearchBoundExceeded(budget));
            }
            let next = reduce(&lattice::sub(&rem, &gens[i]));
            if m.cone.contains(&next) && search(m, gens, i, next, reduce, failed, nodes, budget)? {
                return Ok(true);
            }
            if search(m, gens, i + 1, rem.clone(), reduce, failed, nodes, budget)? {
                return Ok(true);
            }
            failed.insert((i, rem));
            Ok(false)
        }
        search(self, &gens, 0, reduce(v), &reduce, &mut failed, &mut nodes, budget)
    }

    pub fn member(&self, v: &[i64]) -> Result<Membership> {
        if !self.in_semigroup(v)? {
            return Ok(Membership::Outside);
        }
        for a in &self.ideal {
            if self.in_semigroup(&lattice::sub(v, a))? {
                return Ok(Membership::InIdeal);
            }
        }
        Ok(Membership::InMonoid)
    }

    /// Whether `v` lies in the ideal generated by `gens` inside `B`.
    pub fn in_ideal_generated_by(&self, gens: &[LatticeVector], v: &[i64]) -> Result<bool> {
        for a in gens {
            if self.in_semigroup(&lattice::sub(v, a))? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// Minimal generators of the ideal generated by `gens` (reduced modulo
    /// units, sorted).
    pub fn minimalize_ideal(&self, gens: &[LatticeVector]) -> Result<Vec<LatticeVector>> {
        let mut sorted: Vec<LatticeVector> = gens.iter().map(|g| self.reduce_mod_units(g)).collect();
        sorted.sort_by_key(|g| (dot(&self.degree, g), g.clone()));
        sorted.dedup();
        let mut kept: Vec<LatticeVector> = Vec::new();
        for a in sorted {
            if !self.in_ideal_generated_by(&kept, &a)? {
                kept.push(a);
            }
        }
        kept.sort();
        Ok(kept)
    }

    /// Non-unit generators of `B` that are not sums of others, reduced
    /// modulo units and sorted.
    pub fn minimal_generators(&self) -> Result<Vec<LatticeVector>> {
        let mut gens: Vec<LatticeVector> = self
            .generators
            .iter()
            .filter(|g| dot(&self.degree, g) > 0)
            .map(|g| self.reduce_mod_units(g))
            .collect();
        gens.sort_by_key(|g| (dot(&self.degree, g), g.clone()));
        gens.dedup();
        let mut out = Vec::new();
        for (i, g) in gens.iter().enumerate() {
            let mut others: Vec<LatticeVector> = gens.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, h)| h.clone()).collect();
            for u in &self.units {
                others.push(u.clone());
                others.push(lattice::neg(u));
            }
            let sub = AffineMonoid::new(self.rank, others, vec![])?;
            if !sub.in_semigroup(g)? {
                out.push(g.clone());
            }
        }
        out.sort();
        Ok(out)
    }

    /// Canonical presentation: (units basis, minimal generators, minimal
    /// ideal generators), all reduced modulo units.
    pub fn canonical_form(&self) -> (usize, Vec<LatticeVector>, Vec<LatticeVector>, Vec<LatticeVector>) {
        let gens = self.minimal_generators().expect("canonical form within budget");
        let ideal = self.minimalize_ideal(&self.ideal).expect("canonical form within budget");
        (self.rank, self.units.clone(), gens, ideal)
    }

    /// Equivalent presentation with minimal generators (units as ± basis).
    pub fn canonical(&self) -> AffineMonoid {
        let (rank, units, gens, ideal) = self.canonical_form();
        let mut g = Vec::new();
        for u in &units {
            g.push(u.clone());
            g.push(lattice::neg(u));
        }
        g.extend(gens);
        AffineMonoid::new(rank, g, ideal).expect("canonical presentation is valid")
    }

    /// Generator indices lying on each face of `cone(G)`, with the face dims.
    fn faces(&self) -> Vec<(Vec<usize>, usize)> {
        let fl = self.cone.face_lattice();
        let mut out: Vec<(Vec<usize>, usize)> = fl
            .faces
            .iter()
            .map(|f| {
                let on: Vec<usize> = (0..self.generators.len())
                    .filter(|&i| f.normals.iter().all(|&j| dot(&self.cone.facet_normals[j], &self.generators[i]) == 0))
                    .collect();
                (on, f.dim)
            })
            .collect();
        out.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        out
    }

    fn face_avoids_ideal(&self, face: &[usize]) -> bool {
        let c = RationalCone::new(self.rank, face.iter().map(|&i| self.generators[i].clone()).collect()).unwrap();
        let fnorm: Vec<usize> = self.cone.vanishing_normals(&c.spanning_vectors());
        !self
            .ideal
            .iter()
            .any(|a| fnorm.iter().all(|&j| dot(&self.cone.facet_normals[j], a) == 0))
    }

    /// Prime spectrum, sorted by height; heights are poset heights.
    pub fn mspec(&self) -> Vec<PrimeIdeal> {
        let faces: Vec<(Vec<usize>, usize)> =
            self.faces().into_iter().filter(|(f, _)| self.face_avoids_ideal(f)).collect();
        // faces are sorted by decreasing dimension, so smaller primes come first
        let mut heights = vec![0usize; faces.len()];
        for i in 0..faces.len() {
            for j in 0..i {
                let sub = faces[i].0.iter().all(|g| faces[j].0.contains(g)) && faces[i].0 != faces[j].0;
                if sub {
                    heights[i] = heights[i].max(heights[j] + 1);
                }
            }
        }
        let mut primes: Vec<PrimeIdeal> = faces
            .into_iter()
            .zip(heights)
            .map(|((face, face_dim), height)| PrimeIdeal { face, height, face_dim })
            .collect();
        primes.sort_by(|a, b| a.height.cmp(&b.height).then(b.face_dim.cmp(&a.face_dim)).then(a.face.cmp(&b.face)));
        primes
    }

    /// The maximal ideal `𝔪 = A ∖ U(A)`, the prime of the minimal face.
    pub fn maximal_ideal(&self) -> PrimeIdeal {
        self.mspec().pop().expect("every monoid has a maximal ideal")
    }

    /// The prime generated by the complement of the face through `face`.
    pub fn prime_of_face(&self, face: &[usize]) -> Option<PrimeIdeal> {
        self.mspec().into_iter().find(|p| p.face == face)
    }

    /// Generators of a prime as an ideal: the generators off its face.
    pub fn prime_generators(&self, p: &PrimeIdeal) -> Vec<LatticeVector> {
        (0..self.generators.len())
            .filter(|i| !p.face.contains(i))
            .map(|i| self.generators[i].clone())
            .collect()
    }

    /// Krull dimension: the longest chain of primes.
    pub fn dimension(&self) -> usize {
        self.mspec().iter().map(|p| p.height).max().unwrap_or(0)
    }

    /// `A_p`: invert the generators on the face of `p`.
    pub fn localize(&self, p: &PrimeIdeal) -> Result<AffineMonoid> {
        self.localize_at_face(&p.face)
    }

    pub fn localize_at_face(&self, face: &[usize]) -> Result<AffineMonoid> {
        let mut gens = self.generators.clone();
        for &i in face {
            let neg = lattice::neg(&self.generators[i]);
            if !gens.contains(&neg) {
                gens.push(neg);
            }
        }
        AffineMonoid::new(self.rank, gens, self.ideal.clone())
    }

    /// `A[-s]` for an element s of B.
    pub fn invert(&self, s: &[i64]) -> Result<AffineMonoid> {
        let mut gens = self.generators.clone();
        gens.push(lattice::neg(s));
        AffineMonoid::new(self.rank, gens, self.ideal.clone())
    }

    /// Coproduct `A1 ∧ A2` in the direct sum lattice.
    pub fn smash(&self, other: &AffineMonoid) -> AffineMonoid {
        let n1 = self.rank;
        let n = n1 + other.rank;
        let left = |v: &LatticeVector| {
            let mut w = v.clone();
            w.resize(n, 0);
            w
        };
        let right = |v: &LatticeVector| {
            let mut w = vec![0; n1];
            w.extend(v.iter().copied());
            w
        };
        let gens = self.generators.iter().map(left).chain(other.generators.iter().map(right)).collect();
        let ideal = self.ideal.iter().map(left).chain(other.ideal.iter().map(right)).collect();
        AffineMonoid::new(n, gens, ideal).expect("smash of valid monoids")
    }

    /// `A / J`.
    pub fn quotient_by_ideal(&self, j: &[LatticeVector]) -> Result<AffineMonoid> {
        let mut all = self.ideal.clone();
        all.extend(j.iter().cloned());
        let ideal = self.minimalize_ideal(&all)?;
        AffineMonoid::new(self.rank, self.generators.clone(), ideal)
    }

    /// Minimal generators of the intersection of the primes whose faces are
    /// given: sums over minimal hitting sets of the off-face generators.
    pub fn intersect_primes(&self, faces: &[Vec<usize>]) -> Result<Vec<LatticeVector>> {
        let comps: Vec<BTreeSet<usize>> = faces
            .iter()
            .map(|f| (0..self.generators.len()).filter(|i| !f.contains(i)).collect())
            .collect();
        if comps.is_empty() || comps.iter().any(|c| c.is_empty()) {
            return Ok(vec![]);
        }
        let mut hitting: BTreeSet<BTreeSet<usize>> = BTreeSet::new();
        hitting_sets(&comps, 0, BTreeSet::new(), &mut hitting);
        let sums: Vec<LatticeVector> = hitting
            .iter()
            .map(|t| t.iter().fold(vec![0; self.rank], |acc, &i| lattice::add(&acc, &self.generators[i])))
            .collect();
        self.minimalize_ideal(&sums)
    }

    /// Nilradical as the intersection of the minimal primes.
    pub fn nilradical(&self) -> Result<Vec<LatticeVector>> {
        let spec = self.mspec();
        let minimal: Vec<Vec<usize>> = spec.iter().filter(|p| p.height == 0).map(|p| p.face.clone()).collect();
        self.intersect_primes(&minimal)
    }

    /// `B / √I`.
    pub fn reduce(&self) -> Result<AffineMonoid> {
        let nil = self.nilradical()?;
        AffineMonoid::new(self.rank, self.generators.clone(), nil)
    }

    pub fn is_reduced(&self) -> Result<bool> {
        let nil = self.nilradical()?;
        let own = self.minimalize_ideal(&self.ideal)?;
        Ok(nil == own)
    }

    /// Normalization `group(G) ∩ cone(G)` with its inclusion.
    pub fn normalization(&self) -> Result<(AffineMonoid, MonoidMap)> {
        if !self.is_cancellative() {
            return Err(Error::NotCancellative);
        }
        let nor = saturated_monoid(&self.cone, &self.group)?;
        let map = MonoidMap::identity_lattice(self, &nor);
        Ok((nor, map))
    }

    pub fn is_normal(&self) -> Result<bool> {
        if !self.is_cancellative() {
            return Ok(false);
        }
        let (nor, _) = self.normalization()?;
        Ok(nor.canonical_form() == self.canonical_form())
    }

    /// Smoothness of the stalk: `B` is `U × N^k` with the free part
    /// primitive, and `I` is empty or the prime of a face with smooth `⟨G∩F⟩`.
    pub fn is_smooth(&self) -> Result<bool> {
        if self.is_cancellative() {
            return self.semigroup_is_smooth();
        }
        let ideal = self.minimalize_ideal(&self.ideal)?;
        for p in self.cancellative_part().mspec() {
            let pg = self.minimalize_ideal(&self.prime_generators(&p))?;
            if pg == ideal && !pg.is_empty() {
                let face = AffineMonoid::new(self.rank, p.face.iter().map(|&i| self.generators[i].clone()).collect(), vec![])?;
                return face.semigroup_is_smooth();
            }
        }
        Ok(false)
    }

    fn semigroup_is_smooth(&self) -> Result<bool> {
        let gens = self.minimal_generators()?;
        let mut all = self.units.clone();
        all.extend(gens.iter().cloned());
        // free on the minimal generators times the unit group
        Ok(lattice::rank(&all, self.rank) == all.len() && lattice::lattice_basis(&all, self.rank) == self.group)
    }

    /// `B` with the ideal dropped.
    pub fn cancellative_part(&self) -> AffineMonoid {
        AffineMonoid { ideal: vec![], ..self.clone() }
    }

    /// The submonoid generated by a subset of generators (same lattice).
    pub fn submonoid(&self, idx: &[usize]) -> AffineMonoid {
        AffineMonoid::new(self.rank, idx.iter().map(|&i| self.generators[i].clone()).collect(), vec![]).unwrap()
    }
}

/// The monoid of lattice points `c ∩ L`, where `L` is spanned by `lat` and
/// `c` lies in the span of `L`: units `L ∩ lineality(c)` plus the Hilbert
/// basis of the pointed quotient, lifted back to `L`.
pub fn saturated_monoid(c: &RationalCone, lat: &[LatticeVector]) -> Result<AffineMonoid> {
    let n = c.rank;
    let group = lattice::lattice_basis(lat, n);
    let gk = group.len();
    let lin_perp = lattice::orthogonal_complement(&c.lineality, n);
    let k = lin_perp.len();
    let project = |v: &LatticeVector| -> LatticeVector { lin_perp.iter().map(|e| dot(e, v)).collect() };
    // units: kernel of the projection restricted to L
    let proj_rows: Vec<LatticeVector> = group.iter().map(|b| project(b)).collect();
    let kernel = lattice::integer_kernel(&lattice::big_matrix(&transpose_i64(&proj_rows, k)), gk);
    let combine = |y: &[i64], basis: &[LatticeVector]| -> LatticeVector {
        (0..n).map(|i| y.iter().zip(basis).map(|(c, b)| c * b[i]).sum()).collect()
    };
    let unit_basis: Vec<LatticeVector> = kernel.iter().map(|y| combine(&lattice::from_big(y), &group)).collect();
    let unit_basis = lattice::lattice_basis(&unit_basis, n);
    let qcone = RationalCone::new(k, c.spanning_vectors().iter().map(project).collect())?;
    let hb = cone::hilbert_basis(&qcone, &proj_rows)?;
    let qbasis = lattice::lattice_basis(&proj_rows, k);
    let lifts: Vec<LatticeVector> = qbasis
        .iter()
        .map(|q| combine(&solve_in_span(&proj_rows, q).expect("basis of the projected lattice"), &group))
        .collect();
    let mut gens: Vec<LatticeVector> = Vec::new();
    for u in &unit_basis {
        gens.push(u.clone());
        gens.push(lattice::neg(u));
    }
    for h in &hb {
        let coords = lattice::lattice_coords(&qbasis, h).expect("Hilbert basis lies in the lattice");
        gens.push(combine(&coords, &lifts));
    }
    Ok(AffineMonoid::new(n, gens, vec![])?.canonical())
}

fn transpose_i64(m: &[LatticeVector], cols: usize) -> Vec<LatticeVector> {
    (0..cols).map(|j| m.iter().map(|r| r[j]).collect()).collect()
}

/// Integer coefficients expressing `q` in terms of possibly dependent rows.
fn solve_in_span(rows: &[LatticeVector], q: &[i64]) -> Option<LatticeVector> {
    // Extended Hermite: track combinations of the rows.
    let k = rows.len();
    let n = q.len();
    let mut aug: Vec<LatticeVector> = rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut v = r.clone();
            v.extend((0..k).map(|j| (i == j) as i64));
            v
        })
        .collect();
    let h = lattice::hermite_basis(&lattice::big_matrix(&aug), n + k);
    aug = h.iter().map(|r| lattice::from_big(r)).collect();
    let mut rem: LatticeVector = q.to_vec();
    let mut coef = vec![0i64; k];
    for row in &aug {
        let Some(p) = row[..n].iter().position(|&x| x != 0) else { continue };
        if rem[p] % row[p] != 0 {
            return None;
        }
        let f = rem[p] / row[p];
        for c in 0..n {
            rem[c] -= f * row[c];
        }
        for j in 0..k {
            coef[j] += f * row[n + j];
        }
    }
    lattice::is_zero(&rem).then_some(coef)
}

fn hitting_sets(comps: &[BTreeSet<usize>], i: usize, cur: BTreeSet<usize>, out: &mut BTreeSet<BTreeSet<usize>>) {
    if i == comps.len() {
        // keep only inclusion-minimal sets
        if out.iter().any(|s| s.is_subset(&cur)) {
            return;
        }
        out.retain(|s| !cur.is_subset(s));
        out.insert(cur);
        return;
    }
    if comps[i].iter().any(|x| cur.contains(x)) {
        hitting_sets(comps, i + 1, cur, out);
        return;
    }
    for &x in &comps[i] {
        let mut next = cur.clone();
        next.insert(x);
        hitting_sets(comps, i + 1, next, out);
    }
}

/// A pointed monoid map given by a lattice map `Z^n → Z^m`; row i of
/// `matrix` is the image of the i-th basis vector.
#[derive(Clone, Debug)]
pub struct MonoidMap {
    pub source: AffineMonoid,
    pub target: AffineMonoid,
    pub matrix: Vec<LatticeVector>,
}

impl MonoidMap {
    pub fn new(source: AffineMonoid, target: AffineMonoid, matrix: Vec<LatticeVector>) -> Result<Self> {
        if matrix.len() != source.rank || matrix.iter().any(|r| r.len() != target.rank) {
            return Err(Error::Dimension("monoid map matrix shape".into()));
        }
        let f = MonoidMap { source, target, matrix };
        for g in &f.source.generators {
            if f.target.member(&f.apply(g))? == Membership::Outside {
                return Err(Error::Invalid(format!("generator {g:?} does not map into the target")));
            }
        }
        for a in &f.source.ideal {
            if f.target.member(&f.apply(a))? != Membership::InIdeal {
                return Err(Error::Invalid(format!("ideal generator {a:?} does not map to the basepoint")));
            }
        }
        Ok(f)
    }

    /// The map induced by the identity of the shared lattice.
    pub fn identity_lattice(source: &AffineMonoid, target: &AffineMonoid) -> MonoidMap {
        MonoidMap {
            source: source.clone(),
            target: target.clone(),
            matrix: (0..source.rank).map(|i| lattice::unit(source.rank, i)).collect(),
        }
    }

    pub fn apply(&self, v: &[i64]) -> LatticeVector {
        let m = self.target.rank;
        (0..m).map(|j| v.iter().zip(&self.matrix).map(|(x, r)| x * r[j]).sum()).collect()
    }

    /// The submonoid of the target generated by the images of the generators.
    pub fn image(&self) -> AffineMonoid {
        let gens = self.source.generators.iter().map(|g| self.apply(g)).collect();
        AffineMonoid::new(self.target.rank, gens, vec![]).unwrap()
    }

    /// Every target generator has a power in the image (or is nilpotent).
    pub fn is_integral(&self) -> Result<bool> {
        let im = self.image();
        let nil = self.target.nilradical()?;
        for g in &self.target.generators {
            // a rational cone point has a multiple in the semigroup
            if im.cone().contains(g) {
                continue;
            }
            if self.target.in_ideal_generated_by(&nil, g)? {
                continue;
            }
            return Ok(false);
        }
        Ok(true)
    }

    /// Smallest n ≤ bound with n·g in the image submonoid.
    pub fn integrality_witness(&self, g: &[i64], bound: usize) -> Result<Option<usize>> {
        let im = self.image();
        for n in 1..=bound {
            if im.in_semigroup(&lattice::scale(n as i64, g))? {
                return Ok(Some(n));
            }
        }
        Ok(None)
    }

    pub fn is_finite(&self) -> Result<Finiteness> {
        if self.is_integral()? {
            Ok(Finiteness::Finite)
        } else if self.target.is_cancellative() {
            Ok(Finiteness::NotFinite)
        } else {
            Ok(Finiteness::Unknown)
        }
    }

    /// Whether non-units go to non-units.
    pub fn is_local(&self) -> Result<bool> {
        for g in &self.source.generators {
            if !self.source.is_unit(g) {
                let img = self.apply(g);
                if self.target.member(&img)? == Membership::InMonoid && self.target.is_unit(&img) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    pub fn compose(&self, then: &MonoidMap) -> MonoidMap {
        let matrix = self.matrix.iter().map(|r| then.apply(r)).collect();
        MonoidMap { source: self.source.clone(), target: then.target.clone(), matrix }
    }

    /// Pullback of a target prime: the face of source generators mapping
    /// into the face of `q`.
    pub fn pullback_prime(&self, q: &PrimeIdeal) -> Result<PrimeIdeal> {
        let tface = self.target.submonoid(&q.face);
        let mut face = Vec::new();
        for (i, g) in self.source.generators.iter().enumerate() {
            let img = self.apply(g);
            if self.target.member(&img)? == Membership::InMonoid && tface.in_semigroup(&img)? {
                face.push(i);
            }
        }
        self.source
            .prime_of_face(&face)
            .ok_or_else(|| Error::Invalid("preimage of a prime is not prime".into()))
    }
}

/// `A1 ∧_A A/J = A1 / (f(J)·A1)`.
pub fn pushout_closed(f: &MonoidMap, j: &[LatticeVector]) -> Result<AffineMonoid> {
    let ext: Vec<LatticeVector> = j.iter().map(|a| f.apply(a)).collect();
    for e in &ext {
        if f.target.member(e)? == Membership::InMonoid && f.target.is_unit(e) {
            return Err(Error::ZeroMonoid);
        }
    }
    let ext: Vec<LatticeVector> = ext
        .into_iter()
        .filter(|e| f.target.member(e).map(|m| m == Membership::InMonoid).unwrap_or(false))
        .collect();
    f.target.quotient_by_ideal(&ext)
}

/// `A1 ∧_A A[-s] = A1[-f(s)]`.
pub fn pushout_localization(f: &MonoidMap, s: &[i64]) -> Result<AffineMonoid> {
    f.target.invert(&f.apply(s))
}
