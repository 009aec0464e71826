//! Graded monoids, `MProj`, projective space over a scheme, Rees monoids
//! and blow-ups along equivariant centers.
//!
//! Chart monoids keep the ambient lattice of the base: a fraction `a/s` of
//! degree zero is the lattice difference `a − s`, valid because the base
//! stalks are cancellative.

use crate::error::{Error, Result};
use crate::lattice::{self, LatticeVector};
use crate::monoid::{AffineMonoid, Membership};
use crate::morphisms::{Construction, SchemeMorphism};
use crate::scheme::{apply_map, IdealSheaf, LatticeMap, MonoidScheme, Point};
use std::collections::BTreeMap;

/// An `N`-graded monoid: `degree` is a linear functional, non-negative on
/// the generators.
#[derive(Clone, Debug)]
pub struct GradedAffineMonoid {
    pub base: AffineMonoid,
    pub degree: LatticeVector,
}

impl GradedAffineMonoid {
    pub fn new(base: AffineMonoid, degree: LatticeVector) -> Result<Self> {
        if degree.len() != base.rank {
            return Err(Error::Dimension("degree functional".into()));
        }
        if let Some(g) = base.generators.iter().find(|g| lattice::dot(&degree, g) < 0) {
            return Err(Error::Invalid(format!("generator {g:?} has negative degree")));
        }
        Ok(GradedAffineMonoid { base, degree })
    }

    pub fn deg(&self, v: &[i64]) -> i64 {
        lattice::dot(&self.degree, v)
    }

    /// `A[T_0, …, T_n]` with the `T_i` in degree one.
    pub fn polynomial(a: &AffineMonoid, n: usize) -> Self {
        let ext = a.smash(&AffineMonoid::free(n + 1));
        let mut degree = vec![0; a.rank];
        degree.extend(std::iter::repeat(1).take(n + 1));
        GradedAffineMonoid { base: ext, degree }
    }

    /// The degree-zero part of `A[1/s]` for a generator `s` of positive
    /// degree `d`: sums of at most `d` generators of total degree divisible
    /// by `d`, shifted down by the matching multiple of `s`.
    pub fn chart(&self, s: &[i64]) -> Result<AffineMonoid> {
        let d = self.deg(s);
        if d <= 0 {
            return Err(Error::Invalid("chart at an element of degree zero".into()));
        }
        let gens = &self.base.generators;
        let mut out: Vec<LatticeVector> = Vec::new();
        let mut stack: Vec<(usize, usize, LatticeVector, i64)> = vec![(0, 0, vec![0; self.base.rank], 0)];
        while let Some((start, used, sum, degsum)) = stack.pop() {
            if used > 0 && degsum % d == 0 {
                out.push(lattice::sub(&sum, &lattice::scale(degsum / d, s)));
            }
            if used as i64 == d {
                continue;
            }
            for (i, g) in gens.iter().enumerate().skip(start) {
                stack.push((i, used + 1, lattice::add(&sum, g), degsum + self.deg(g)));
            }
        }
        out.sort();
        out.dedup();
        out.retain(|v| !lattice::is_zero(v));
        let ideal: Vec<LatticeVector> = self
            .base
            .ideal
            .iter()
            .filter(|a| self.deg(a) % d == 0)
            .map(|a| lattice::sub(a, &lattice::scale(self.deg(a) / d, s)))
            .collect();
        Ok(AffineMonoid::new(self.base.rank, out, ideal)?.canonical())
    }

    /// The degree-zero submonoid `A_0`.
    pub fn degree_zero(&self) -> AffineMonoid {
        let gens = self.base.generators.iter().filter(|g| self.deg(g) == 0).cloned().collect();
        AffineMonoid::new(self.base.rank, gens, vec![]).expect("submonoid")
    }
}

/// The Rees monoid `A[It] = ⋁ Iⁿtⁿ` in rank `n + 1`, graded by `t`.
#[derive(Clone, Debug)]
pub struct ReesMonoid {
    pub graded: GradedAffineMonoid,
    pub center: Vec<LatticeVector>,
}

impl ReesMonoid {
    pub fn new(a: &AffineMonoid, center: &[LatticeVector]) -> Result<Self> {
        let n = a.rank;
        let mut gens: Vec<LatticeVector> = a.generators.iter().map(|g| extend(g, 0)).collect();
        for c in center {
            if a.member(c)? != Membership::InMonoid {
                return Err(Error::Invalid(format!("center generator {c:?} is not in the monoid")));
            }
            gens.push(extend(c, 1));
        }
        let ideal = a.ideal.iter().map(|i| extend(i, 0)).collect();
        let base = AffineMonoid::new(n + 1, gens, ideal)?;
        let graded = GradedAffineMonoid::new(base, lattice::unit(n + 1, n))?;
        Ok(ReesMonoid { graded, center: center.to_vec() })
    }

    /// Whether `(v, k)` lies in the Rees monoid, i.e. `v ∈ I^k`.
    pub fn in_degree(&self, v: &[i64], k: i64) -> Result<bool> {
        Ok(self.graded.base.member(&extend(v, k))? != Membership::Outside)
    }
}

fn extend(v: &[i64], t: i64) -> LatticeVector {
    let mut w = v.to_vec();
    w.push(t);
    w
}

/// `L_x ⊕ Z^ext → L_z ⊕ Z^ext` from a transition of the base.
fn extend_map(t: &LatticeMap, src_rank: usize, dst_rank: usize, ext: usize) -> LatticeMap {
    let mut m: LatticeMap = (0..src_rank)
        .map(|i| {
            let mut r = t[i].clone();
            r.extend(std::iter::repeat(0).take(ext));
            r
        })
        .collect();
    for k in 0..ext {
        m.push(lattice::unit(dst_rank + ext, dst_rank + k));
    }
    m
}

/// Assembles charts over the points of `x` into one scheme. Each chart
/// `(p, C)` lives in `L_p ⊕ Z^ext`; a chart point lies over the point of
/// `x` where the base generators that became units are inverted, and two
/// chart points are identified when they lie over the same base point with
/// the same stalk. Returns the scheme and the structure morphism.
fn assemble(x: &MonoidScheme, ext: usize, charts: &[(usize, AffineMonoid)], tag: &str) -> Result<(MonoidScheme, SchemeMorphism)> {
    let mut keys: BTreeMap<(usize, String), usize> = BTreeMap::new();
    let mut stalks: Vec<AffineMonoid> = Vec::new();
    let mut base: Vec<usize> = Vec::new();
    let mut labels: Vec<String> = Vec::new();
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for (ci, (p, c)) in charts.iter().enumerate() {
        let ap = x.stalk(*p);
        let spec = c.mspec();
        let mut ids = Vec::new();
        for (k, q) in spec.iter().enumerate() {
            let s = c.localize(q)?;
            let face: Vec<usize> =
                ap.generators.iter().enumerate().filter(|(_, g)| s.is_unit(&extend_zero(g, ext))).map(|(i, _)| i).collect();
            let z = x
                .point_of_face(*p, &face)
                .ok_or_else(|| Error::Invalid("chart point over no base point".into()))?;
            let rz = x.stalk(z).rank;
            let m = extend_map(&x.transition(*p, z), ap.rank, rz, ext);
            let moved = AffineMonoid::new(
                rz + ext,
                s.generators.iter().map(|g| apply_map(&m, g, rz + ext)).collect(),
                s.ideal.iter().map(|g| apply_map(&m, g, rz + ext)).collect(),
            )?
            .canonical();
            let key = (z, format!("{:?}", moved.canonical_form()));
            let id = *keys.entry(key).or_insert_with(|| {
                stalks.push(moved);
                base.push(z);
                labels.push(format!("{}:{}/{}", tag, ci, k));
                stalks.len() - 1
            });
            ids.push(id);
        }
        for (a, qa) in spec.iter().enumerate() {
            for (b, qb) in spec.iter().enumerate() {
                if qa.is_subset_of(qb) {
                    pairs.push((ids[a], ids[b]));
                }
            }
        }
    }
    let n = stalks.len();
    let mut leq = vec![vec![false; n]; n];
    for (a, b) in pairs {
        leq[a][b] = true;
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if leq[i][k] && leq[k][j] {
                    leq[i][j] = true;
                }
            }
        }
    }
    let mut trans = BTreeMap::new();
    for a in 0..n {
        for b in 0..n {
            if a != b && leq[b][a] {
                let (za, zb) = (base[a], base[b]);
                trans.insert((a, b), extend_map(&x.transition(za, zb), x.stalk(za).rank, x.stalk(zb).rank, ext));
            }
        }
    }
    let points = stalks.into_iter().zip(labels).map(|(stalk, label)| Point { label, stalk }).collect();
    let y = MonoidScheme::from_parts(points, leq, trans);
    y.validate()?;
    let maps = base
        .iter()
        .map(|&z| {
            let r = x.stalk(z).rank;
            (0..r).map(|i| extend_zero(&lattice::unit(r, i), ext)).collect()
        })
        .collect();
    let pi = SchemeMorphism::new(y.clone(), x.clone(), base, maps, Construction::Projective(tag.to_string()))?;
    Ok((y, pi))
}

fn extend_zero(v: &[i64], ext: usize) -> LatticeVector {
    let mut w = v.to_vec();
    w.extend(std::iter::repeat(0).take(ext));
    w
}

/// `MProj(A)`: charts `A⟨s⟩₀` at the generators of positive degree, glued
/// along common localizations, with the structure map to `MSpec(A₀)`.
pub fn mproj(a: &GradedAffineMonoid) -> Result<(MonoidScheme, SchemeMorphism)> {
    if !a.base.is_cancellative() {
        return Err(Error::NotCancellative);
    }
    let pos: Vec<&LatticeVector> = a.base.generators.iter().filter(|g| a.deg(g) > 0).collect();
    if pos.is_empty() {
        return Err(Error::EmptyProj);
    }
    let base = MonoidScheme::from_affine(&a.degree_zero());
    let top = base.maximal_points()[0];
    let charts = pos.iter().map(|s| Ok((top, a.chart(s)?))).collect::<Result<Vec<_>>>()?;
    assemble(&base, 0, &charts, "proj")
}

/// `P^n_X`: chartwise `MProj(A[T_0, …, T_n])` glued over `X`.
pub fn projective_space(x: &MonoidScheme, n: usize) -> Result<(MonoidScheme, SchemeMorphism)> {
    let mut charts = Vec::new();
    for p in x.maximal_points() {
        let g = GradedAffineMonoid::polynomial(x.stalk(p), n);
        let r = x.stalk(p).rank;
        for i in 0..=n {
            charts.push((p, g.chart(&lattice::unit(r + n + 1, r + i))?));
        }
    }
    assemble(x, n + 1, &charts, &format!("P{n}"))
}

#[derive(Clone, Debug)]
pub struct BlowupResult {
    pub scheme: MonoidScheme,
    pub morphism: SchemeMorphism,
    pub exceptional: MonoidScheme,
    pub exceptional_immersion: SchemeMorphism,
    pub center: IdealSheaf,
}

fn center_at(x: &MonoidScheme, z: &IdealSheaf, p: usize) -> Vec<LatticeVector> {
    match x.ideal_at(z, p) {
        Some(g) if !g.is_empty() => g,
        _ => vec![vec![0; x.stalk(p).rank]],
    }
}

/// Blow-up of `X` along the ideal sheaf `Z`: over a chart with center
/// `(a_0, …, a_k)` the charts are `A[a_j − a_i : j]`. A chart missing from
/// `Z` (or listing no generators) carries the unit ideal.
pub fn blow_up(x: &MonoidScheme, z: &IdealSheaf) -> Result<BlowupResult> {
    if !x.is_cancellative() {
        return Err(Error::NotCancellative);
    }
    let mut charts = Vec::new();
    for p in x.maximal_points() {
        let a = x.stalk(p);
        let gens = center_at(x, z, p);
        for c in &gens {
            if a.member(c)? != Membership::InMonoid {
                return Err(Error::Invalid(format!("center generator {c:?} is not in the stalk at {}", x.label(p))));
            }
        }
        for ai in &gens {
            let mut g = a.generators.clone();
            g.extend(gens.iter().map(|aj| lattice::sub(aj, ai)).filter(|v| !lattice::is_zero(v)));
            charts.push((p, AffineMonoid::new(a.rank, g, vec![])?.canonical()));
        }
    }
    let (y, pi) = assemble(x, 0, &charts, "bl")?;
    let mut ext = BTreeMap::new();
    for q in y.maximal_points() {
        let zq = pi.point_map[q];
        ext.insert(q, center_at(x, z, zq));
    }
    let (d, di) = y.closed_subscheme(&IdealSheaf { charts: ext })?;
    Ok(BlowupResult { scheme: y, morphism: pi, exceptional: d, exceptional_immersion: di, center: z.clone() })
}

/// Per maximal point of the blow-up: the extended center ideal is
/// principal, generated by one of its generators, in a cancellative stalk.
pub fn verify_inverts_charts(b: &BlowupResult) -> Result<Vec<bool>> {
    let (y, pi) = (&b.scheme, &b.morphism);
    let x = &pi.target;
    let mut out = Vec::new();
    for q in y.maximal_points() {
        let s = y.stalk(q);
        let zq = pi.point_map[q];
        let gens: Vec<LatticeVector> = center_at(x, &b.center, zq).iter().map(|a| apply_map(&pi.stalk_maps[q], a, s.rank)).collect();
        let principal = s.is_cancellative()
            && gens.iter().any(|g0| {
                gens.iter().all(|g| s.member(&lattice::sub(g, g0)).map(|m| m == Membership::InMonoid).unwrap_or(false))
            });
        out.push(principal);
    }
    Ok(out)
}

pub fn verify_inverts(b: &BlowupResult) -> Result<bool> {
    Ok(verify_inverts_charts(b)?.into_iter().all(|v| v))
}

/// For a finite `f : X' → X` and a center `Z` on `X`, the canonical map
/// `Bl_{f⁻¹Z} X' → Bl_Z X` over `f`.
pub fn finite_pullback_blowup(f: &SchemeMorphism, z: &IdealSheaf) -> Result<(BlowupResult, BlowupResult, SchemeMorphism)> {
    let (xp, x) = (&f.source, &f.target);
    let mut pulled = BTreeMap::new();
    for q in xp.maximal_points() {
        let gens = center_at(x, z, f.point_map[q]);
        pulled.insert(q, gens.iter().map(|a| apply_map(&f.stalk_maps[q], a, xp.stalk(q).rank)).collect());
    }
    let zp = IdealSheaf { charts: pulled };
    let bp = blow_up(xp, &zp)?;
    let b = blow_up(x, z)?;
    let (yp, y) = (&bp.scheme, &b.scheme);
    let mut point_map = Vec::new();
    let mut stalk_maps = Vec::new();
    for q in 0..yp.len() {
        let base = bp.morphism.point_map[q];
        let phi = f.stalk_maps[base].clone();
        let target_base = f.point_map[base];
        let cand: Vec<usize> = (0..y.len())
            .filter(|&p| b.morphism.point_map[p] == target_base)
            .filter(|&p| {
                crate::monoid::MonoidMap::new(y.stalk(p).clone(), yp.stalk(q).clone(), phi.clone())
                    .and_then(|m| m.is_local())
                    .unwrap_or(false)
            })
            .collect();
        match cand.as_slice() {
            [p] => {
                point_map.push(*p);
                stalk_maps.push(phi);
            }
            _ => return Err(Error::Invalid(format!("no unique image for the point {}", yp.label(q)))),
        }
    }
    let g = SchemeMorphism::new(yp.clone(), y.clone(), point_map, stalk_maps, Construction::Unknown)?;
    Ok((bp, b, g))
}
