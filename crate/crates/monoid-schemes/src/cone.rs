//! Rational polyhedral cones in double description: generators and facet
//! normals, the face lattice, Hilbert bases, and subdivision tests.

use crate::error::{Error, Result};
use crate::lattice::{self, big_dot, big_primitive, dot, from_big, to_big, BigMatrix, LatticeVector};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, HashSet};

/// Fixed-width bitset over constraint indices.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Bits(Vec<u64>);

impl Bits {
    fn new(len: usize) -> Self {
        Bits(vec![0; len.div_ceil(64).max(1)])
    }
    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }
    fn and(&self, o: &Bits) -> Bits {
        Bits(self.0.iter().zip(&o.0).map(|(a, b)| a & b).collect())
    }
    fn subset_of(&self, o: &Bits) -> bool {
        self.0.iter().zip(&o.0).all(|(a, b)| a & !b == 0)
    }
    fn count(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }
}

/// Double description: extreme rays and a lineality basis of
/// `{ x ∈ Q^n : a · x ≥ 0 for every a in ineqs }`.
pub(crate) fn double_description(n: usize, ineqs: &[Vec<BigInt>]) -> (BigMatrix, BigMatrix) {
    let m = ineqs.len();
    let mut lin: BigMatrix = lattice::identity(n);
    let mut rays: Vec<(Vec<BigInt>, Bits)> = Vec::new();
    for (t, a) in ineqs.iter().enumerate() {
        if let Some(p) = lin.iter().position(|l| !big_dot(a, l).is_zero()) {
            let mut l0 = lin.swap_remove(p);
            let mut s = big_dot(a, &l0);
            if s.is_negative() {
                l0 = l0.iter().map(|x| -x).collect();
                s = -s;
            }
            for l in lin.iter_mut() {
                let c = big_dot(a, l);
                if !c.is_zero() {
                    *l = big_primitive(&l.iter().zip(&l0).map(|(x, y)| &s * x - &c * y).collect::<Vec<_>>());
                }
            }
            for (r, z) in rays.iter_mut() {
                let c = big_dot(a, r);
                if !c.is_zero() {
                    *r = big_primitive(&r.iter().zip(&l0).map(|(x, y)| &s * x - &c * y).collect::<Vec<_>>());
                }
                z.set(t);
            }
            let mut z = Bits::new(m);
            for j in 0..t {
                z.set(j);
            }
            rays.push((l0, z));
            continue;
        }
        let vals: Vec<BigInt> = rays.iter().map(|(r, _)| big_dot(a, r)).collect();
        let pos: Vec<usize> = (0..rays.len()).filter(|&i| vals[i].is_positive()).collect();
        let neg: Vec<usize> = (0..rays.len()).filter(|&i| vals[i].is_negative()).collect();
        let pointed_dim = n - lin.len();
        let mut next: Vec<(Vec<BigInt>, Bits)> = Vec::new();
        for &p in &pos {
            for &q in &neg {
                let z = rays[p].1.and(&rays[q].1);
                if pointed_dim >= 2 && z.count() + 2 < pointed_dim {
                    continue;
                }
                let adjacent = (0..rays.len())
                    .all(|r| r == p || r == q || !z.subset_of(&rays[r].1));
                if !adjacent {
                    continue;
                }
                let w: Vec<BigInt> = rays[q]
                    .0
                    .iter()
                    .zip(&rays[p].0)
                    .map(|(x, y)| &vals[p] * x - &vals[q] * y)
                    .collect();
                let mut z = z;
                z.set(t);
                next.push((big_primitive(&w), z));
            }
        }
        let mut kept: Vec<(Vec<BigInt>, Bits)> = Vec::new();
        for (i, (r, mut z)) in rays.into_iter().enumerate() {
            if vals[i].is_negative() {
                continue;
            }
            if vals[i].is_zero() {
                z.set(t);
            }
            kept.push((r, z));
        }
        kept.extend(next);
        rays = kept;
    }
    let lin = lattice::hermite_basis(&lin, n);
    let rays = rays.into_iter().map(|(r, _)| project_off(&r, &lin)).collect();
    (rays, lin)
}

/// Orthogonal projection of `r` away from the span of `lin`, scaled to a
/// primitive integer vector (canonical representative modulo lineality).
fn project_off(r: &[BigInt], lin: &BigMatrix) -> Vec<BigInt> {
    if lin.is_empty() {
        return big_primitive(r);
    }
    let k = lin.len();
    let gram: BigMatrix = (0..k).map(|i| (0..k).map(|j| big_dot(&lin[i], &lin[j])).collect()).collect();
    let inv = lattice::rational_inverse(&gram).expect("lineality basis is independent");
    let rhs: Vec<BigInt> = lin.iter().map(|l| big_dot(l, r)).collect();
    let coef: Vec<BigRational> = (0..k)
        .map(|i| (0..k).map(|j| &inv[i][j] * BigRational::from_integer(rhs[j].clone())).sum())
        .collect();
    let mut v: Vec<BigRational> = r.iter().map(|x| BigRational::from_integer(x.clone())).collect();
    for (c, l) in coef.iter().zip(lin) {
        for (x, y) in v.iter_mut().zip(l) {
            *x -= c * BigRational::from_integer(y.clone());
        }
    }
    let den = v.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<BigInt> = v.iter().map(|x| (x * BigRational::from_integer(den.clone())).to_integer()).collect();
    big_primitive(&ints)
}

fn sorted_unique(mut v: Vec<LatticeVector>) -> Vec<LatticeVector> {
    v.sort();
    v.dedup();
    v
}

/// A rational polyhedral cone in Q^rank held in both descriptions.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RationalCone {
    pub rank: usize,
    /// Generators as supplied (or derived, for cones built from inequalities).
    pub generators: Vec<LatticeVector>,
    /// Primitive extreme rays, canonical modulo the lineality space.
    pub rays: Vec<LatticeVector>,
    /// Hermite basis of the lineality space.
    pub lineality: Vec<LatticeVector>,
    /// Primitive inner facet normals, canonical modulo `perp`.
    pub facet_normals: Vec<LatticeVector>,
    /// Hermite basis of the lattice orthogonal to the span of the cone.
    pub perp: Vec<LatticeVector>,
}

impl PartialEq for RationalCone {
    fn eq(&self, other: &Self) -> bool {
        self.rank == other.rank
            && self.rays == other.rays
            && self.lineality == other.lineality
    }
}
impl Eq for RationalCone {}

impl RationalCone {
    pub fn new(rank: usize, generators: Vec<LatticeVector>) -> Result<Self> {
        if let Some(g) = generators.iter().find(|g| g.len() != rank) {
            return Err(Error::Dimension(format!("generator {g:?} in rank {rank}")));
        }
        let (normals, perp) = double_description(rank, &lattice::big_matrix(&generators));
        let mut cons: BigMatrix = normals.clone();
        for e in &perp {
            cons.push(e.clone());
            cons.push(e.iter().map(|x| -x).collect());
        }
        let (rays, lin) = double_description(rank, &cons);
        Ok(RationalCone {
            rank,
            generators,
            rays: sorted_unique(rays.iter().map(|r| from_big(r)).collect()),
            lineality: lin.iter().map(|r| from_big(r)).collect(),
            facet_normals: sorted_unique(normals.iter().map(|r| from_big(r)).collect()),
            perp: perp.iter().map(|r| from_big(r)).collect(),
        })
    }

    /// The cone `{ x : a·x ≥ 0 (a ∈ ineqs), e·x = 0 (e ∈ eqs) }`.
    pub fn from_inequalities(rank: usize, ineqs: &[LatticeVector], eqs: &[LatticeVector]) -> Self {
        let mut cons = lattice::big_matrix(ineqs);
        for e in eqs {
            cons.push(to_big(e));
            cons.push(to_big(&lattice::neg(e)));
        }
        let (rays, lin) = double_description(rank, &cons);
        let mut gens: Vec<LatticeVector> = rays.iter().map(|r| from_big(r)).collect();
        for l in &lin {
            gens.push(from_big(l));
            gens.push(lattice::neg(&from_big(l)));
        }
        RationalCone::new(rank, gens).expect("consistent rank")
    }

    pub fn dim(&self) -> usize {
        self.rank - self.perp.len()
    }

    pub fn is_pointed(&self) -> bool {
        self.lineality.is_empty()
    }

    pub fn is_full_dimensional(&self) -> bool {
        self.perp.is_empty()
    }

    pub fn contains(&self, v: &[i64]) -> bool {
        self.facet_normals.iter().all(|n| dot(n, v) >= 0) && self.perp.iter().all(|e| dot(e, v) == 0)
    }

    pub fn contains_in_relative_interior(&self, v: &[i64]) -> bool {
        self.facet_normals.iter().all(|n| dot(n, v) > 0) && self.perp.iter().all(|e| dot(e, v) == 0)
    }

    pub fn contains_cone(&self, other: &RationalCone) -> bool {
        other.rays.iter().chain(&other.lineality).all(|r| self.contains(r))
            && other.lineality.iter().all(|l| self.contains(&lattice::neg(l)))
    }

    /// Generating vectors of the cone as a convex cone: rays and ± lineality.
    pub fn spanning_vectors(&self) -> Vec<LatticeVector> {
        let mut v = self.rays.clone();
        for l in &self.lineality {
            v.push(l.clone());
            v.push(lattice::neg(l));
        }
        v
    }

    /// `{ m : m(σ) ≥ 0 }`; its rays are the facet normals of `self`.
    pub fn dual(&self) -> RationalCone {
        let mut gens = self.facet_normals.clone();
        for e in &self.perp {
            gens.push(e.clone());
            gens.push(lattice::neg(e));
        }
        RationalCone {
            rank: self.rank,
            generators: gens,
            rays: self.facet_normals.clone(),
            lineality: self.perp.clone(),
            facet_normals: self.rays.clone(),
            perp: self.lineality.clone(),
        }
    }

    pub fn intersect(&self, other: &RationalCone) -> RationalCone {
        let mut ineqs = self.facet_normals.clone();
        ineqs.extend(other.facet_normals.iter().cloned());
        let mut eqs = self.perp.clone();
        eqs.extend(other.perp.iter().cloned());
        RationalCone::from_inequalities(self.rank, &ineqs, &eqs)
    }

    /// Indices of the facet normals vanishing on all of `vs`.
    pub fn vanishing_normals(&self, vs: &[LatticeVector]) -> Vec<usize> {
        (0..self.facet_normals.len())
            .filter(|&j| vs.iter().all(|v| dot(&self.facet_normals[j], v) == 0))
            .collect()
    }

    /// The face cut out by the given facet normals.
    pub fn face_by_normals(&self, normals: &[usize]) -> RationalCone {
        let rays: Vec<LatticeVector> = self
            .rays
            .iter()
            .filter(|r| normals.iter().all(|&j| dot(&self.facet_normals[j], r) == 0))
            .cloned()
            .collect();
        let mut gens = rays;
        for l in &self.lineality {
            gens.push(l.clone());
            gens.push(lattice::neg(l));
        }
        RationalCone::new(self.rank, gens).expect("consistent rank")
    }

    /// Smallest face of `self` containing all of `vs` (which must lie in `self`).
    pub fn minimal_face_containing(&self, vs: &[LatticeVector]) -> RationalCone {
        self.face_by_normals(&self.vanishing_normals(vs))
    }

    pub fn is_face(&self, f: &RationalCone) -> bool {
        self.contains_cone(f) && self.minimal_face_containing(&f.spanning_vectors()) == *f
    }

    pub fn is_simplicial(&self) -> bool {
        self.is_pointed() && self.rays.len() == self.dim()
    }

    /// Pointed, and the primitive rays form part of a lattice basis.
    pub fn is_smooth(&self) -> bool {
        self.is_pointed() && self.is_simplicial() && unimodular(&self.rays)
    }

    /// Face lattice, top face first, each face identified by its rays.
    pub fn face_lattice(&self) -> FaceLattice {
        let nr = self.rays.len();
        let tight: Vec<Vec<bool>> = self
            .rays
            .iter()
            .map(|r| self.facet_normals.iter().map(|n| dot(n, r) == 0).collect())
            .collect();
        let close = |rays: &BTreeSet<usize>| -> (BTreeSet<usize>, Vec<usize>) {
            let normals: Vec<usize> = (0..self.facet_normals.len())
                .filter(|&j| rays.iter().all(|&i| tight[i][j]))
                .collect();
            let closed = (0..nr).filter(|&i| normals.iter().all(|&j| tight[i][j])).collect();
            (closed, normals)
        };
        let top: BTreeSet<usize> = (0..nr).collect();
        let mut seen: BTreeMap<BTreeSet<usize>, Vec<usize>> = BTreeMap::new();
        let (top, tn) = close(&top);
        let mut queue = vec![top.clone()];
        seen.insert(top, tn);
        while let Some(f) = queue.pop() {
            let normals = seen[&f].clone();
            for j in 0..self.facet_normals.len() {
                if normals.contains(&j) {
                    continue;
                }
                let sub: BTreeSet<usize> = f.iter().copied().filter(|&i| tight[i][j]).collect();
                let (g, gn) = close(&sub);
                if !seen.contains_key(&g) {
                    seen.insert(g.clone(), gn);
                    queue.push(g);
                }
            }
        }
        let mut faces: Vec<Face> = seen
            .into_iter()
            .map(|(rays, normals)| {
                let mut vs: Vec<LatticeVector> = rays.iter().map(|&i| self.rays[i].clone()).collect();
                vs.extend(self.lineality.iter().cloned());
                Face { dim: lattice::rank(&vs, self.rank), rays: rays.into_iter().collect(), normals }
            })
            .collect();
        faces.sort_by(|a, b| b.dim.cmp(&a.dim).then(a.rays.cmp(&b.rays)));
        FaceLattice { faces }
    }
}

/// True iff the vectors are independent and extend to a lattice basis.
pub fn unimodular(vs: &[LatticeVector]) -> bool {
    if vs.is_empty() {
        return true;
    }
    let snf = lattice::smith_normal_form(vs);
    snf.diag.len() == vs.len() && snf.diag.iter().all(|d| d.is_one())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Face {
    /// Indices into the cone's rays.
    pub rays: Vec<usize>,
    /// Indices of facet normals vanishing on the face.
    pub normals: Vec<usize>,
    pub dim: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FaceLattice {
    pub faces: Vec<Face>,
}

impl FaceLattice {
    pub fn count_by_dim(&self) -> BTreeMap<usize, usize> {
        let mut m = BTreeMap::new();
        for f in &self.faces {
            *m.entry(f.dim).or_insert(0) += 1;
        }
        m
    }

    pub fn leq(&self, a: usize, b: usize) -> bool {
        let fb: HashSet<usize> = self.faces[b].rays.iter().copied().collect();
        self.faces[a].rays.iter().all(|r| fb.contains(r))
    }

    /// Covering pairs (a, b) with face a a facet of face b.
    pub fn covers(&self) -> Vec<(usize, usize)> {
        let n = self.faces.len();
        let mut out = Vec::new();
        for a in 0..n {
            for b in 0..n {
                if self.faces[a].dim + 1 == self.faces[b].dim && self.leq(a, b) {
                    out.push((a, b));
                }
            }
        }
        out
    }
}

/// Hilbert basis of the monoid `c ∩ sub`, where `sub` is spanned by the rows.
pub fn hilbert_basis(c: &RationalCone, sub: &[LatticeVector]) -> Result<Vec<LatticeVector>> {
    if !c.is_pointed() {
        return Err(Error::NotPointed);
    }
    let n = c.rank;
    let mut basis: Vec<LatticeVector> = lattice::lattice_basis(sub, n);
    // Re-coordinatize until the cone is full-dimensional in the sublattice.
    let (rays_y, normals_y, basis) = loop {
        let k = basis.len();
        let mut ineqs: Vec<LatticeVector> = c
            .facet_normals
            .iter()
            .map(|nm| basis.iter().map(|b| dot(nm, b)).collect())
            .collect();
        for e in &c.perp {
            let row: LatticeVector = basis.iter().map(|b| dot(e, b)).collect();
            ineqs.push(row.clone());
            ineqs.push(lattice::neg(&row));
        }
        let cy = RationalCone::from_inequalities(k, &ineqs, &[]);
        if cy.dim() == k {
            break (cy.rays.clone(), cy.facet_normals.clone(), basis);
        }
        let kernel = lattice::integer_kernel(&lattice::big_matrix(&cy.perp), k);
        let kernel = lattice::hermite_basis(&kernel, k);
        basis = kernel
            .iter()
            .map(|y| {
                let y = from_big(y);
                (0..n).map(|i| (0..k).map(|j| y[j] * basis[j][i]).sum()).collect()
            })
            .collect();
    };
    let k = basis.len();
    if k == 0 {
        return Ok(vec![]);
    }
    let hb_y = hilbert_basis_full(k, &rays_y, &normals_y);
    let mut out: Vec<LatticeVector> = hb_y
        .iter()
        .map(|y| (0..n).map(|i| (0..k).map(|j| y[j] * basis[j][i]).sum()).collect())
        .collect();
    out.sort();
    Ok(out)
}

/// Hilbert basis of a full-dimensional pointed cone in Z^k.
fn hilbert_basis_full(k: usize, rays: &[LatticeVector], normals: &[LatticeVector]) -> Vec<LatticeVector> {
    let cone = RationalCone {
        rank: k,
        generators: rays.to_vec(),
        rays: rays.to_vec(),
        lineality: vec![],
        facet_normals: normals.to_vec(),
        perp: vec![],
    };
    let mut cands: BTreeSet<LatticeVector> = rays.iter().cloned().collect();
    let all: Vec<usize> = (0..rays.len()).collect();
    for simplex in pulling_triangulation(&cone, &all, k) {
        let w: Vec<LatticeVector> = simplex.iter().map(|&i| rays[i].clone()).collect();
        for p in parallelepiped_points(&w) {
            if !lattice::is_zero(&p) {
                cands.insert(p);
            }
        }
    }
    let grading: LatticeVector = (0..k).map(|i| normals.iter().map(|nm| nm[i]).sum()).collect();
    let mut cands: Vec<LatticeVector> = cands.into_iter().collect();
    cands.sort_by_key(|v| (dot(&grading, v), v.clone()));
    let mut hb: Vec<LatticeVector> = Vec::new();
    for x in cands {
        let reducible = hb.iter().any(|h| {
            let d = lattice::sub(&x, h);
            !lattice::is_zero(&d) && cone.contains(&d)
        });
        if !reducible {
            hb.push(x);
        }
    }
    hb
}

/// Pulling triangulation of the face spanned by `face` (ray indices) of
/// dimension `dim`, pulling the lowest-index ray first.
fn pulling_triangulation(c: &RationalCone, face: &[usize], dim: usize) -> Vec<Vec<usize>> {
    if face.len() == dim {
        return vec![face.to_vec()];
    }
    let apex = face[0];
    let mut facets: BTreeSet<Vec<usize>> = BTreeSet::new();
    for nm in &c.facet_normals {
        if face.iter().all(|&i| dot(nm, &c.rays[i]) == 0) {
            continue;
        }
        let sub: Vec<usize> = face.iter().copied().filter(|&i| dot(nm, &c.rays[i]) == 0).collect();
        let vs: Vec<LatticeVector> = sub.iter().map(|&i| c.rays[i].clone()).collect();
        if !sub.contains(&apex) && lattice::rank(&vs, c.rank) + 1 == dim {
            facets.insert(sub);
        }
    }
    let mut out = Vec::new();
    for f in facets {
        for mut s in pulling_triangulation(c, &f, dim - 1) {
            s.insert(0, apex);
            s.sort();
            out.push(s);
        }
    }
    out
}

/// Lattice points `Σ λ_i w_i` with `0 ≤ λ_i < 1` for independent rows `w`
/// spanning Q^k (k = number of rows).
pub fn parallelepiped_points(w: &[LatticeVector]) -> Vec<LatticeVector> {
    let k = w.len();
    let wm = lattice::big_matrix(w);
    let snf = lattice::smith_big(&wm, k, k);
    let rinv = lattice::rational_inverse(&snf.right).expect("unimodular");
    let winv = lattice::rational_inverse(&wm).expect("simplex is full rank");
    let d: Vec<BigInt> = snf.diag.clone();
    let mut out = Vec::new();
    let mut y = vec![BigInt::zero(); k];
    loop {
        // x = y · R^{-1}
        let x: Vec<BigRational> = (0..k)
            .map(|j| (0..k).map(|i| BigRational::from_integer(y[i].clone()) * &rinv[i][j]).sum())
            .collect();
        let lam: Vec<BigRational> = (0..k).map(|j| (0..k).map(|i| &x[i] * &winv[i][j]).sum()).collect();
        let mut p = x.clone();
        for (i, l) in lam.iter().enumerate() {
            let f = l.floor();
            for j in 0..k {
                p[j] -= &f * BigRational::from_integer(wm[i][j].clone());
            }
        }
        out.push(p.iter().map(|v| v.to_integer().to_i64().expect("overflow")).collect());
        // odometer over 0 ≤ y_i < d_i
        let mut i = 0;
        loop {
            if i == k {
                return out;
            }
            y[i] += 1;
            if y[i] < d[i] {
                break;
            }
            y[i] = BigInt::zero();
            i += 1;
        }
    }
}

/// Whether every pairwise intersection of the cones is a face of both.
pub fn meets_in_faces(cones: &[RationalCone]) -> bool {
    for i in 0..cones.len() {
        for j in i + 1..cones.len() {
            let m = cones[i].intersect(&cones[j]);
            if !cones[i].is_face(&m) || !cones[j].is_face(&m) {
                return false;
            }
        }
    }
    true
}

/// Assuming the `fine` cones lie in `coarse` and meet in common faces,
/// decides whether their union is all of `coarse` by facet accounting.
pub fn covers(fine: &[RationalCone], coarse: &RationalCone) -> bool {
    let d = coarse.dim();
    let top: Vec<&RationalCone> = fine.iter().filter(|c| c.dim() == d).collect();
    if d == 0 {
        return !fine.is_empty();
    }
    if top.is_empty() {
        return false;
    }
    if top.iter().any(|c| !c.is_pointed()) {
        // a single cone with lineality must then be everything
        return top.iter().any(|c| c.contains_cone(coarse));
    }
    let mut count: BTreeMap<Vec<LatticeVector>, usize> = BTreeMap::new();
    for c in &top {
        let fl = c.face_lattice();
        for f in fl.faces.iter().filter(|f| f.dim + 1 == d) {
            let key: Vec<LatticeVector> = f.rays.iter().map(|&i| c.rays[i].clone()).collect();
            *count.entry(key).or_insert(0) += 1;
        }
    }
    count.iter().all(|(rays, &k)| {
        let on_boundary = coarse
            .facet_normals
            .iter()
            .any(|nm| rays.iter().all(|r| dot(nm, r) == 0));
        if on_boundary {
            k == 1
        } else {
            k == 2
        }
    })
}

/// `fine` is a subdivision of `coarse`: contained, face-to-face, covering.
pub fn is_subdivision(fine: &[RationalCone], coarse: &RationalCone) -> bool {
    fine.iter().all(|c| coarse.contains_cone(c)) && meets_in_faces(fine) && covers(fine, coarse)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cone(rank: usize, g: &[&[i64]]) -> RationalCone {
        RationalCone::new(rank, g.iter().map(|v| v.to_vec()).collect()).unwrap()
    }

    #[test]
    fn dual_of_orthant_is_orthant() {
        let c = cone(2, &[&[1, 0], &[0, 1]]);
        assert_eq!(c.dual().rays, vec![vec![0, 1], vec![1, 0]]);
        assert!(c.is_pointed() && c.is_full_dimensional());
    }

    #[test]
    fn dual_of_skew_cone() {
        let c = cone(2, &[&[0, 1], &[1, -2]]);
        assert_eq!(c.dual().rays, vec![vec![1, 0], vec![2, 1]]);
        let q = cone(2, &[&[0, 1], &[2, -1]]);
        assert_eq!(q.dual().rays, vec![vec![1, 0], vec![1, 2]]);
    }

    #[test]
    fn dual_of_origin_is_everything() {
        let c = RationalCone::new(2, vec![]).unwrap();
        let d = c.dual();
        assert_eq!(d.dim(), 2);
        assert_eq!(d.lineality.len(), 2);
        assert!(d.rays.is_empty());
        let dd = RationalCone::new(2, d.generators.clone()).unwrap();
        assert_eq!(dd.lineality.len(), 2);
    }

    #[test]
    fn non_pointed_cone() {
        let c = cone(2, &[&[1, 0], &[-1, 0], &[0, 1]]);
        assert_eq!(c.lineality, vec![vec![1, 0]]);
        assert_eq!(c.rays, vec![vec![0, 1]]);
        assert_eq!(c.facet_normals, vec![vec![0, 1]]);
        assert!(!c.is_pointed());
    }

    #[test]
    fn face_lattice_counts() {
        let c = cone(2, &[&[1, 0], &[0, 1]]);
        assert_eq!(c.face_lattice().faces.len(), 4);
        let c3 = cone(3, &[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]]);
        let fl = c3.face_lattice();
        assert_eq!(fl.faces.len(), 8);
        assert_eq!(fl.count_by_dim(), BTreeMap::from([(0, 1), (1, 3), (2, 3), (3, 1)]));
        assert_eq!(fl.covers().len(), 12);
        let ray = cone(2, &[&[1, 1]]);
        assert_eq!(ray.face_lattice().faces.len(), 2);
        let sq = cone(3, &[&[1, 0, 1], &[0, 1, 1], &[-1, 0, 1], &[0, -1, 1]]);
        assert_eq!(sq.face_lattice().count_by_dim(), BTreeMap::from([(0, 1), (1, 4), (2, 4), (3, 1)]));
    }

    #[test]
    fn hilbert_basis_examples() {
        let z2 = vec![vec![1, 0], vec![0, 1]];
        assert_eq!(
            hilbert_basis(&cone(2, &[&[1, 0], &[1, 2]]), &z2).unwrap(),
            vec![vec![1, 0], vec![1, 1], vec![1, 2]]
        );
        assert_eq!(hilbert_basis(&cone(2, &[&[1, 0], &[0, 1]]), &z2).unwrap(), vec![vec![0, 1], vec![1, 0]]);
        assert_eq!(hilbert_basis(&cone(1, &[&[1]]), &[vec![1]]).unwrap(), vec![vec![1]]);
        assert_eq!(hilbert_basis(&cone(1, &[&[1]]), &[vec![2], vec![3]]).unwrap(), vec![vec![1]]);
        assert_eq!(
            hilbert_basis(&cone(2, &[&[1, 0], &[-1, 0]]), &z2),
            Err(Error::NotPointed)
        );
        // a ray in a sublattice of a lower-dimensional span
        assert_eq!(hilbert_basis(&cone(3, &[&[2, 2, 0]]), &[vec![2, 0, 0], vec![0, 2, 0], vec![0, 0, 1]]).unwrap(), vec![vec![2, 2, 0]]);
        assert_eq!(hilbert_basis(&cone(2, &[&[1, 0], &[1, 3]]), &z2).unwrap().len(), 4);
    }

    #[test]
    fn subdivision_examples() {
        let orth = cone(2, &[&[1, 0], &[0, 1]]);
        let a = cone(2, &[&[1, 0], &[1, 1]]);
        let b = cone(2, &[&[0, 1], &[1, 1]]);
        assert!(is_subdivision(&[a.clone(), b.clone()], &orth));
        assert!(is_subdivision(&[orth.clone()], &orth));
        assert!(!is_subdivision(&[a.clone()], &orth));
        let overlapping = cone(2, &[&[1, 0], &[1, 2]]);
        assert!(!is_subdivision(&[overlapping, b.clone()], &orth));
        let line = RationalCone::new(1, vec![vec![1], vec![-1]]).unwrap();
        let halves = [cone(1, &[&[1]]), cone(1, &[&[-1]])];
        assert!(covers(&halves, &line));
        assert!(!covers(&halves[..1], &line));
    }

    /// Lattice points of the cone in the box of radius `r`.
    pub(crate) fn box_points(c: &RationalCone, r: i64) -> Vec<LatticeVector> {
        let n = c.rank;
        let mut out = Vec::new();
        let mut v = vec![-r; n];
        loop {
            if c.contains(&v) {
                out.push(v.clone());
            }
            let mut i = 0;
            loop {
                if i == n {
                    return out;
                }
                v[i] += 1;
                if v[i] <= r {
                    break;
                }
                v[i] = -r;
                i += 1;
            }
        }
    }

    /// Exhaustive irreducible elements among the cone's lattice points of
    /// sup-norm ≤ r; correct whenever r bounds the Hilbert basis.
    pub(crate) fn box_hilbert_basis(c: &RationalCone, r: i64) -> Vec<LatticeVector> {
        let pts: Vec<LatticeVector> = box_points(c, r).into_iter().filter(|p| !lattice::is_zero(p)).collect();
        let mut out: Vec<LatticeVector> = pts
            .iter()
            .filter(|x| !pts.iter().any(|y| y != *x && c.contains(&lattice::sub(x, y))))
            .cloned()
            .collect();
        out.sort();
        out
    }

    fn random_cone(rank: usize, gens: &[LatticeVector]) -> Option<RationalCone> {
        let c = RationalCone::new(rank, gens.to_vec()).ok()?;
        c.is_pointed().then_some(c)
    }

    fn hb_bound(c: &RationalCone) -> i64 {
        (0..c.rank).map(|i| c.rays.iter().map(|r| r[i].abs()).sum::<i64>()).max().unwrap_or(0)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn hilbert_basis_matches_box_oracle(rank in 2usize..4, raw in prop::collection::vec(prop::collection::vec(-4i64..5, 3), 2..5)) {
            let gens: Vec<LatticeVector> = raw.iter().map(|v| v[..rank].to_vec()).filter(|v| !lattice::is_zero(v)).collect();
            if let Some(c) = random_cone(rank, &gens) {
                let id: Vec<LatticeVector> = (0..rank).map(|i| lattice::unit(rank, i)).collect();
                let hb = hilbert_basis(&c, &id).unwrap();
                prop_assert_eq!(hb, box_hilbert_basis(&c, hb_bound(&c)));
            }
        }

        #[test]
        fn double_dual_has_same_points(rank in 1usize..4, raw in prop::collection::vec(prop::collection::vec(-3i64..4, 3), 0..5)) {
            let gens: Vec<LatticeVector> = raw.iter().map(|v| v[..rank].to_vec()).collect();
            let c = RationalCone::new(rank, gens).unwrap();
            let dd = RationalCone::new(rank, c.dual().generators.clone()).unwrap().dual();
            let dd = RationalCone::new(rank, dd.generators.clone()).unwrap();
            let r = if rank == 3 { 3 } else { 5 };
            prop_assert_eq!(box_points(&c, r), box_points(&dd, r));
        }

        #[test]
        fn face_counts_match_normal_subsets(rank in 1usize..4, raw in prop::collection::vec(prop::collection::vec(-3i64..4, 3), 0..6)) {
            let gens: Vec<LatticeVector> = raw.iter().map(|v| v[..rank].to_vec()).collect();
            let c = RationalCone::new(rank, gens).unwrap();
            // brute force: every subset of facet normals cuts out a face
            let m = c.facet_normals.len();
            let mut faces: BTreeSet<Vec<LatticeVector>> = BTreeSet::new();
            let mut dims: BTreeMap<Vec<LatticeVector>, usize> = BTreeMap::new();
            for mask in 0u32..(1 << m) {
                let sel: Vec<usize> = (0..m).filter(|j| mask & (1 << j) != 0).collect();
                let rays: Vec<LatticeVector> = c.rays.iter().filter(|r| sel.iter().all(|&j| dot(&c.facet_normals[j], r) == 0)).cloned().collect();
                let mut vs = rays.clone();
                vs.extend(c.lineality.iter().cloned());
                dims.insert(rays.clone(), lattice::rank(&vs, rank));
                faces.insert(rays);
            }
            let mut brute: BTreeMap<usize, usize> = BTreeMap::new();
            for f in &faces {
                *brute.entry(dims[f]).or_insert(0) += 1;
            }
            prop_assert_eq!(c.face_lattice().count_by_dim(), brute);
        }

        #[test]
        fn generators_satisfy_normals(rank in 1usize..4, raw in prop::collection::vec(prop::collection::vec(-5i64..6, 3), 0..6)) {
            let gens: Vec<LatticeVector> = raw.iter().map(|v| v[..rank].to_vec()).collect();
            let c = RationalCone::new(rank, gens.clone()).unwrap();
            for g in &gens {
                prop_assert!(c.contains(g));
            }
            prop_assert_eq!(c.is_pointed(), c.dual().is_full_dimensional());
        }
    }
}
