//! k-realization data: presentations of monoid algebras k[A] by binomial
//! and monomial relations, and gluing manifests for separated schemes.
//!
//! Nothing here computes over a field; the output is data describing
//! `k[x_1, …, x_m] / (binomials, monomials)` chart by chart.

use crate::blowup::BlowupResult;
use crate::error::{Error, Result};
use crate::lattice::{self, LatticeVector};
use crate::monoid::{node_budget, AffineMonoid, Membership};
use crate::scheme::{MonoidScheme, Separation};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::collections::BTreeMap;

/// Default degree bound for relation searches.
pub const DEFAULT_DEGREE_BOUND: usize = 6;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlgebraPresentation {
    pub variables: Vec<String>,
    /// The monoid generator behind each variable.
    pub generators: Vec<LatticeVector>,
    /// Pairs `(u, v)` meaning `x^u = x^v`, with `u` lexicographically larger.
    pub binomials: Vec<(Vec<u32>, Vec<u32>)>,
    /// Exponents `u` meaning `x^u = 0`.
    pub monomials: Vec<Vec<u32>>,
    /// Relations generate the kernel congruence on all monomials of at most
    /// this degree.
    pub degree_bound: usize,
    pub is_domain: bool,
    pub is_reduced: bool,
    pub is_normal_claimed: bool,
}

impl AlgebraPresentation {
    pub fn value(&self, u: &[u32]) -> LatticeVector {
        let n = self.generators.first().map_or(0, |g| g.len());
        u.iter()
            .zip(&self.generators)
            .fold(vec![0; n], |acc, (&k, g)| lattice::add(&acc, &lattice::scale(k as i64, g)))
    }

    /// Every binomial has both sides equal in the lattice.
    pub fn binomials_are_valid(&self) -> bool {
        self.binomials.iter().all(|(u, v)| self.value(u) == self.value(v))
    }

    pub fn monomial(&self, u: &[u32]) -> String {
        render(&self.variables, &u.iter().map(|&k| k as i64).collect::<Vec<_>>())
    }

    /// Relations as text, e.g. `x^3 = y^2` or `x^2 = 0`.
    pub fn relations(&self) -> Vec<String> {
        let mut out: Vec<String> =
            self.binomials.iter().map(|(u, v)| format!("{} = {}", self.monomial(u), self.monomial(v))).collect();
        out.extend(self.monomials.iter().map(|u| format!("{} = 0", self.monomial(u))));
        out
    }
}

fn variable_names(m: usize) -> Vec<String> {
    if m <= 4 {
        ["x", "y", "z", "w"][..m].iter().map(|s| s.to_string()).collect()
    } else {
        (1..=m).map(|i| format!("x{i}")).collect()
    }
}

/// A Laurent monomial; single-letter names are juxtaposed.
fn render(vars: &[String], u: &[i64]) -> String {
    let sep = if vars.iter().all(|v| v.len() == 1) { "" } else { "*" };
    let parts: Vec<String> = u
        .iter()
        .zip(vars)
        .filter(|(&k, _)| k != 0)
        .map(|(&k, v)| if k == 1 { v.clone() } else { format!("{v}^{k}") })
        .collect();
    if parts.is_empty() {
        "1".into()
    } else {
        parts.join(sep)
    }
}

/// All exponent vectors of total degree at most `bound`, by degree.
fn exponents(m: usize, bound: usize) -> Result<Vec<Vec<u32>>> {
    let mut count: u128 = 1;
    for i in 1..=m as u128 {
        count = count * (bound as u128 + i) / i;
    }
    if count > node_budget() as u128 {
        return Err(Error::SearchBoundExceeded(node_budget()));
    }
    let mut out = vec![vec![0u32; m]];
    let mut frontier = out.clone();
    for _ in 0..bound {
        let mut next = Vec::new();
        for u in &frontier {
            // extend only at or after the last non-zero slot to avoid repeats
            let start = u.iter().rposition(|&k| k > 0).unwrap_or(0);
            for i in start..m {
                let mut w = u.clone();
                w[i] += 1;
                next.push(w);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    Ok(out)
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, a: usize) -> usize {
        let mut r = a;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut c = a;
        while self.0[c] != r {
            let n = self.0[c];
            self.0[c] = r;
            c = n;
        }
        r
    }
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        self.0[ra] = rb;
        ra != rb
    }
}

/// Presents `k[A]` on one variable per minimal generator, plus a pair
/// `u, u⁻¹` for each basis vector of the unit group. Binomials come
/// from factorization collisions of degree at most `degree_bound`; each is
/// kept only if it is not implied by earlier ones at that bound.
///
/// For cancellative `A` the differences of the binomials must span the
/// kernel of `Z^m → L`; otherwise the search was truncated and
/// `BoundTooSmall` is returned.
pub fn present_algebra(a: &AffineMonoid, degree_bound: usize) -> Result<AlgebraPresentation> {
    let mut gens = a.minimal_generators()?;
    for u in a.units() {
        gens.push(u.clone());
        gens.push(lattice::neg(u));
    }
    let m = gens.len();
    let exps = exponents(m, degree_bound)?;
    let deg = |u: &[u32]| u.iter().map(|&k| k as usize).sum::<usize>();
    let value = |u: &[u32]| {
        u.iter().zip(&gens).fold(vec![0; a.rank], |acc, (&k, g)| lattice::add(&acc, &lattice::scale(k as i64, g)))
    };
    let index: BTreeMap<Vec<u32>, usize> = exps.iter().cloned().enumerate().map(|(i, u)| (u, i)).collect();

    let mut monomials: Vec<Vec<u32>> = Vec::new();
    let mut fibers: BTreeMap<LatticeVector, Vec<usize>> = BTreeMap::new();
    for (i, u) in exps.iter().enumerate() {
        let v = value(u);
        if a.member(&v)? == Membership::InIdeal {
            if !monomials.iter().any(|w| w.iter().zip(u).all(|(x, y)| x <= y)) {
                monomials.push(u.clone());
            }
        } else {
            fibers.entry(v).or_default().push(i);
        }
    }

    let mut uf = UnionFind((0..exps.len()).collect());
    let mut binomials: Vec<(Vec<u32>, Vec<u32>)> = Vec::new();
    for d in 1..=degree_bound {
        for members in fibers.values() {
            let rep = members[0];
            for &i in members.iter().filter(|&&i| deg(&exps[i]) == d) {
                if uf.find(i) == uf.find(rep) {
                    continue;
                }
                let (x, y) = (exps[i].clone(), exps[rep].clone());
                for w in &exps {
                    if deg(w) + d > degree_bound {
                        continue;
                    }
                    let wx: Vec<u32> = w.iter().zip(&x).map(|(p, q)| p + q).collect();
                    let wy: Vec<u32> = w.iter().zip(&y).map(|(p, q)| p + q).collect();
                    uf.union(index[&wx], index[&wy]);
                }
                binomials.push(if x > y { (x, y) } else { (y, x) });
            }
        }
    }

    if a.is_cancellative() && m > 0 {
        let kernel = lattice::orthogonal_complement(&transpose(&gens, a.rank), m);
        let diffs: Vec<LatticeVector> = binomials
            .iter()
            .map(|(u, v)| u.iter().zip(v).map(|(&p, &q)| p as i64 - q as i64).collect())
            .collect();
        let found = lattice::lattice_basis(&diffs, m);
        let want = lattice::lattice_basis(&kernel, m);
        if found != want {
            return Err(Error::BoundTooSmall(degree_bound));
        }
    }

    let is_domain = a.is_cancellative();
    Ok(AlgebraPresentation {
        variables: variable_names(m),
        generators: gens,
        binomials,
        monomials,
        degree_bound,
        is_domain,
        is_reduced: is_domain || a.is_reduced()?,
        is_normal_claimed: a.is_normal()?,
    })
}

/// Columns of the generator matrix as rows.
fn transpose(gens: &[LatticeVector], n: usize) -> Vec<LatticeVector> {
    (0..n).map(|c| gens.iter().map(|g| g[c]).collect()).collect()
}

/// One presentation per chart (maximal point) and, for each pair of
/// overlapping charts, the localization at their meet together with the
/// transition of coordinates as Laurent monomials.
pub fn realize_scheme_manifest(x: &MonoidScheme, degree_bound: usize) -> Result<Value> {
    match x.separation()? {
        Separation::Separated => {}
        other => return Err(Error::NotSeparated(format!("{other:?}"))),
    }
    let maxes = x.maximal_points();
    let mut pres = Vec::new();
    let mut charts = Vec::new();
    for &c in &maxes {
        let p = present_algebra(x.stalk(c), degree_bound)?;
        charts.push(json!({
            "point": x.label(c),
            "variables": p.variables,
            "generators": p.generators,
            "binomials": p.binomials,
            "monomials": p.monomials,
            "relations": p.relations(),
            "degree_bound": p.degree_bound,
            "is_domain": p.is_domain,
            "is_reduced": p.is_reduced,
            "is_normal_claimed": p.is_normal_claimed,
        }));
        pres.push(p);
    }
    let mut gluing = Vec::new();
    for i in 0..maxes.len() {
        for j in i + 1..maxes.len() {
            let (ci, cj) = (maxes[i], maxes[j]);
            let Some(z) = x.meet(ci, cj) else { continue };
            let gi: Vec<LatticeVector> = pres[i].generators.iter().map(|g| x.transport(ci, z, g)).collect();
            let gj: Vec<LatticeVector> = pres[j].generators.iter().map(|g| x.transport(cj, z, g)).collect();
            let az = x.stalk(z);
            let inverted = |p: &AlgebraPresentation, g: &[LatticeVector]| -> Vec<String> {
                g.iter().zip(&p.variables).filter(|(v, _)| az.is_unit(v)).map(|(_, n)| n.clone()).collect()
            };
            let mut map = BTreeMap::new();
            for (v, name) in gj.iter().zip(&pres[j].variables) {
                let c = lattice::integer_solution(&gi, v)
                    .ok_or_else(|| Error::BadGluing(format!("{name} is not a Laurent monomial in chart {i}")))?;
                map.insert(name.clone(), render(&pres[i].variables, &c));
            }
            gluing.push(json!({
                "charts": [i, j],
                "overlap": x.label(z),
                "invert_in_first": inverted(&pres[i], &gi),
                "invert_in_second": inverted(&pres[j], &gj),
                "second_in_first": map,
            }));
        }
    }
    Ok(json!({ "charts": charts, "gluing": gluing }))
}

/// The manifest of a blow-up, with a note that its realization is the
/// blow-up of the realization along the realized center.
pub fn realize_blowup_manifest(b: &BlowupResult, degree_bound: usize) -> Result<Value> {
    let mut doc = realize_scheme_manifest(&b.scheme, degree_bound)?;
    let center: BTreeMap<String, Vec<LatticeVector>> =
        b.center.charts.iter().map(|(k, v)| (b.morphism.target.label(*k).to_string(), v.clone())).collect();
    doc["blowup"] = json!({
        "center": center,
        "note": "the k-realization of this scheme is canonically the blow-up of the k-realization of the base along the monomial ideal of the center",
    });
    Ok(doc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blowup::blow_up;
    use crate::monoid::tests::{cusp, m};
    use crate::scheme::tests::{doubled_plane, p1};
    use crate::scheme::IdealSheaf;
    use proptest::prelude::*;

    #[test]
    fn cusp_relation() {
        let p = present_algebra(&cusp(), 6).unwrap();
        assert_eq!(p.variables, vec!["x", "y"]);
        assert_eq!(p.relations(), vec!["x^3 = y^2"]);
        assert!(p.is_domain && p.is_reduced && !p.is_normal_claimed);
        assert_eq!(present_algebra(&cusp(), 2), Err(Error::BoundTooSmall(2)));
    }

    #[test]
    fn quadric_relation() {
        let a = m(2, &[&[1, 0], &[1, 1], &[1, 2]], &[]);
        let p = present_algebra(&a, 4).unwrap();
        assert_eq!(p.relations(), vec!["xz = y^2"]);
        assert!(p.is_normal_claimed);
    }

    #[test]
    fn free_monoid_is_a_polynomial_ring() {
        let p = present_algebra(&AffineMonoid::free(3), 5).unwrap();
        assert!(p.binomials.is_empty() && p.monomials.is_empty());
        assert!(p.is_domain && p.is_normal_claimed);
    }

    #[test]
    fn normalization_of_the_cusp_is_the_line() {
        let (n, _) = cusp().normalization().unwrap();
        let p = present_algebra(&n, 4).unwrap();
        assert_eq!(p.variables.len(), 1);
        assert!(p.relations().is_empty() && p.is_normal_claimed);
        let doc = realize_scheme_manifest(&MonoidScheme::from_affine(&n), 4).unwrap();
        assert_eq!(doc["charts"].as_array().unwrap().len(), 1);
    }

    #[test]
    fn units_and_nilpotents() {
        let z = m(1, &[&[1], &[-1]], &[]);
        assert_eq!(present_algebra(&z, 3).unwrap().relations(), vec!["xy = 1"]);
        let fat = m(1, &[&[1]], &[&[2]]);
        let p = present_algebra(&fat, 4).unwrap();
        assert_eq!(p.relations(), vec!["x^2 = 0"]);
        assert!(!p.is_domain && !p.is_reduced);
        let axes = m(2, &[&[1, 0], &[0, 1]], &[&[1, 1]]);
        let p = present_algebra(&axes, 4).unwrap();
        assert_eq!(p.relations(), vec!["xy = 0"]);
        assert!(!p.is_domain && p.is_reduced);
    }

    #[test]
    fn p1_manifest() {
        let doc = realize_scheme_manifest(&p1(), 4).unwrap();
        assert_eq!(doc["charts"].as_array().unwrap().len(), 2);
        let g = &doc["gluing"][0];
        assert_eq!(g["second_in_first"]["x"], "x^-1");
        assert_eq!(g["invert_in_first"], json!(["x"]));
    }

    #[test]
    fn blowup_manifest_has_two_polynomial_charts() {
        let x = MonoidScheme::from_affine(&AffineMonoid::free(2));
        let top = x.maximal_points()[0];
        let j = IdealSheaf { charts: BTreeMap::from([(top, vec![vec![1, 0], vec![0, 1]])]) };
        let b = blow_up(&x, &j).unwrap();
        let doc = realize_blowup_manifest(&b, 4).unwrap();
        let charts = doc["charts"].as_array().unwrap();
        assert_eq!(charts.len(), 2);
        assert!(charts.iter().all(|c| c["relations"].as_array().unwrap().is_empty()));
        assert!(doc["blowup"]["note"].is_string());
        assert_eq!(doc["gluing"].as_array().unwrap().len(), 1);
    }

    #[test]
    fn doubled_plane_is_rejected() {
        assert!(matches!(realize_scheme_manifest(&doubled_plane(), 4), Err(Error::NotSeparated(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn binomials_are_lattice_valid(gs in prop::collection::vec((0i64..4, 0i64..4), 2..4)) {
            let gens: Vec<LatticeVector> = gs.iter().map(|&(a, b)| vec![a + 1, b]).collect();
            let a = AffineMonoid::new(2, gens, vec![]).unwrap();
            match present_algebra(&a, 4) {
                Ok(p) => {
                    prop_assert!(p.binomials_are_valid());
                    prop_assert!(p.is_domain);
                }
                Err(e) => prop_assert_eq!(e, Error::BoundTooSmall(4)),
            }
        }
    }
}
