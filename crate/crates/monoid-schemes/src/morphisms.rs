//! Morphisms of monoid schemes and the predicate suite: immersions,
//! finiteness, birationality, properness and the valuative lift check.
//!
//! A morphism `f : Y → X` is a monotone map on points together with, for
//! each point `y` of `Y`, a local monoid map `A_X(f(y)) → A_Y(y)` given by a
//! lattice map. The map commutes with the transition maps on both sides.

use crate::error::{Error, Result};
use crate::fan;
use crate::lattice::{self, LatticeVector};
use crate::monoid::{AffineMonoid, Finiteness, Membership, MonoidMap};
use crate::scheme::{self, apply_map, compose_maps, IdealSheaf, LatticeMap, MonoidScheme};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// How a morphism was built; used to certify properness of maps whose
/// properness is known from their construction.
#[derive(Clone, Debug)]
pub enum Construction {
    Unknown,
    Identity,
    ClosedImmersion,
    OpenImmersion,
    Normalization,
    /// Blow-up, MProj structure map or projective space; the string names it.
    Projective(String),
    /// Induced by a map of fans.
    Toric,
    /// `factors[0]` first, then `factors[1]`, ...
    Composite(Vec<SchemeMorphism>),
}

#[derive(Clone, Debug)]
pub struct SchemeMorphism {
    pub source: MonoidScheme,
    pub target: MonoidScheme,
    pub point_map: Vec<usize>,
    /// For each source point `y`: lattice map of `A_X(f(y)) → A_Y(y)`.
    pub stalk_maps: Vec<LatticeMap>,
    pub provenance: Construction,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub rule: String,
    pub detail: String,
}

impl Certificate {
    fn new(rule: &str, detail: impl Into<String>) -> Self {
        Certificate { rule: rule.to_string(), detail: detail.into() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Properness {
    Proper(Certificate),
    NotProper(Certificate),
    Unknown,
}

impl Properness {
    pub fn is_proper(&self) -> bool {
        matches!(self, Properness::Proper(_))
    }
}

/// A discrete valuation monoid `V = Z^u ⊕ N·t`, written in `Z^{u+1}` with
/// `t` the last coordinate, and a commutative square
/// `MSpec(V⁺) → Y`, `MSpec(V) → X`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DvmSquare {
    pub units_rank: usize,
    /// The point of `Y` hit by `MSpec(V⁺)` and the map `A_Y(y) → V⁺`.
    pub generic_point: usize,
    pub generic_map: LatticeMap,
    /// The point of `X` hit by the closed point of `MSpec(V)` and `A_X(x) → V`.
    pub closed_point: usize,
    pub closed_map: LatticeMap,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LiftResult {
    UniqueLift,
    NoLift,
    MultipleLifts,
}

/// Whether `a`, read in the DVM lattice, is a unit (`t`-order 0), a
/// non-unit (`t`-order > 0) or outside `V`.
fn valuation(v: &[i64]) -> i64 {
    *v.last().unwrap_or(&0)
}

impl SchemeMorphism {
    pub fn new_unchecked(
        source: MonoidScheme,
        target: MonoidScheme,
        point_map: Vec<usize>,
        stalk_maps: Vec<LatticeMap>,
        provenance: Construction,
    ) -> Self {
        SchemeMorphism { source, target, point_map, stalk_maps, provenance }
    }

    pub fn new(
        source: MonoidScheme,
        target: MonoidScheme,
        point_map: Vec<usize>,
        stalk_maps: Vec<LatticeMap>,
        provenance: Construction,
    ) -> Result<Self> {
        let f = Self::new_unchecked(source, target, point_map, stalk_maps, provenance);
        f.validate()?;
        Ok(f)
    }

    pub fn identity(x: &MonoidScheme) -> Self {
        let maps = (0..x.len()).map(|p| scheme::identity_map(x.stalk(p).rank)).collect();
        Self::new_unchecked(x.clone(), x.clone(), (0..x.len()).collect(), maps, Construction::Identity)
    }

    /// The monoid map `A_X(f(y)) → A_Y(y)`.
    pub fn stalk_map(&self, y: usize) -> MonoidMap {
        MonoidMap {
            source: self.target.stalk(self.point_map[y]).clone(),
            target: self.source.stalk(y).clone(),
            matrix: self.stalk_maps[y].clone(),
        }
    }

    /// `A_X(x) → A_X(f(y)) → A_Y(y)` for `f(y) ≤ x`.
    pub fn section_map(&self, x: usize, y: usize) -> MonoidMap {
        let fy = self.point_map[y];
        let t = self.target.transition(x, fy);
        MonoidMap {
            source: self.target.stalk(x).clone(),
            target: self.source.stalk(y).clone(),
            matrix: compose_maps(&t, &self.stalk_maps[y], self.source.stalk(y).rank),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (y, x) = (&self.source, &self.target);
        if self.point_map.len() != y.len() || self.stalk_maps.len() != y.len() {
            return Err(Error::Invalid("morphism data does not match the source points".into()));
        }
        for (p, &q) in self.point_map.iter().enumerate() {
            if q >= x.len() {
                return Err(Error::Invalid(format!("point {p} maps outside the target")));
            }
            let m = &self.stalk_maps[p];
            if m.len() != x.stalk(q).rank || m.iter().any(|r| r.len() != y.stalk(p).rank) {
                return Err(Error::Dimension(format!("stalk map at {}", y.label(p))));
            }
            let mm = MonoidMap::new(x.stalk(q).clone(), y.stalk(p).clone(), m.clone())?;
            if !mm.is_local()? {
                return Err(Error::Invalid(format!("stalk map at {} is not local", y.label(p))));
            }
        }
        for a in 0..y.len() {
            for b in y.below(a) {
                let (fa, fb) = (self.point_map[a], self.point_map[b]);
                if !x.leq(fb, fa) {
                    return Err(Error::Invalid(format!("point map is not monotone at {}", y.label(a))));
                }
                // A_X(fa) → A_Y(a) → A_Y(b)  equals  A_X(fa) → A_X(fb) → A_Y(b)
                let yb = y.stalk(b);
                for g in &x.stalk(fa).generators {
                    let left = y.transport(a, b, &apply_map(&self.stalk_maps[a], g, y.stalk(a).rank));
                    let right = apply_map(&self.stalk_maps[b], &x.transport(fa, fb, g), yb.rank);
                    let both_zero =
                        yb.member(&left)? == Membership::InIdeal && yb.member(&right)? == Membership::InIdeal;
                    if left != right && !both_zero {
                        return Err(Error::Invalid(format!(
                            "stalk maps do not commute with transitions at {} ≥ {}",
                            y.label(a),
                            y.label(b)
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn compose(&self, then: &SchemeMorphism) -> SchemeMorphism {
        let point_map: Vec<usize> = self.point_map.iter().map(|&q| then.point_map[q]).collect();
        let stalk_maps = (0..self.source.len())
            .map(|y| {
                let q = self.point_map[y];
                compose_maps(&then.stalk_maps[q], &self.stalk_maps[y], self.source.stalk(y).rank)
            })
            .collect();
        SchemeMorphism::new_unchecked(
            self.source.clone(),
            then.target.clone(),
            point_map,
            stalk_maps,
            Construction::Composite(vec![self.clone(), then.clone()]),
        )
    }

    /// The unique maximal point of `f⁻¹(U_x)` when the preimage is the
    /// affine open it generates; `Ok(None)` for an empty preimage.
    pub fn affine_preimage(&self, x: usize) -> std::result::Result<Option<usize>, ()> {
        let pre: Vec<usize> = (0..self.source.len()).filter(|&y| self.target.leq(self.point_map[y], x)).collect();
        if pre.is_empty() {
            return Ok(None);
        }
        let tops: Vec<usize> = pre.iter().copied().filter(|&y| pre.iter().all(|&z| self.source.leq(z, y))).collect();
        match tops.as_slice() {
            [t] if self.source.below(*t).len() == pre.len() => Ok(Some(*t)),
            _ => Err(()),
        }
    }

    fn is_order_embedding(&self) -> bool {
        let n = self.source.len();
        (0..n).all(|a| {
            (0..n).all(|b| {
                (a == b || self.point_map[a] != self.point_map[b])
                    && self.source.leq(a, b) == self.target.leq(self.point_map[a], self.point_map[b])
            })
        })
    }

    /// Order embedding; over every chart of the target the preimage is
    /// affine and the section map is surjective. The image need not be
    /// closed in the poset topology (the diagonal of the plane is not).
    pub fn is_closed_immersion(&self) -> Result<bool> {
        if !self.is_order_embedding() {
            return Ok(false);
        }
        for x in self.target.maximal_points() {
            let top = match self.affine_preimage(x) {
                Err(()) => return Ok(false),
                Ok(None) => continue,
                Ok(Some(t)) => t,
            };
            if !section_surjective(&self.section_map(x, top))? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// A closed immersion whose section maps are quotients by ideals.
    pub fn is_equivariant(&self) -> Result<bool> {
        if !self.is_closed_immersion()? {
            return Ok(false);
        }
        for x in self.target.maximal_points() {
            if let Ok(Some(t)) = self.affine_preimage(x) {
                if !kernel_is_ideal(&self.section_map(x, t))? {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// Injective with down-closed image and isomorphisms on stalks.
    pub fn is_open_immersion(&self) -> Result<bool> {
        if !self.is_order_embedding() {
            return Ok(false);
        }
        for y in 0..self.source.len() {
            for x in self.target.below(self.point_map[y]) {
                if !self.point_map.contains(&x) {
                    return Ok(false);
                }
            }
            if !stalk_is_iso(&self.stalk_map(y))? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Chartwise finiteness: affine preimages with finite section maps.
    pub fn is_finite(&self) -> Result<Finiteness> {
        let mut unknown = false;
        for x in self.target.maximal_points() {
            match self.affine_preimage(x) {
                Err(()) => return Ok(Finiteness::NotFinite),
                Ok(None) => {}
                Ok(Some(t)) => match self.section_map(x, t).is_finite()? {
                    Finiteness::Finite => {}
                    Finiteness::NotFinite => return Ok(Finiteness::NotFinite),
                    Finiteness::Unknown => unknown = true,
                },
            }
        }
        Ok(if unknown { Finiteness::Unknown } else { Finiteness::Finite })
    }

    /// Generic points biject onto generic points, only generic points map
    /// to generic points, and the stalk maps there are isomorphisms.
    pub fn is_birational(&self) -> Result<bool> {
        let gy = self.source.minimal_points();
        let gx = self.target.minimal_points();
        let mut hit: Vec<usize> = gy.iter().map(|&y| self.point_map[y]).collect();
        hit.sort_unstable();
        hit.dedup();
        if hit.len() != gy.len() || hit != gx {
            return Ok(false);
        }
        for y in 0..self.source.len() {
            if gx.contains(&self.point_map[y]) && !gy.contains(&y) {
                return Ok(false);
            }
        }
        for &y in &gy {
            if !stalk_is_iso(&self.stalk_map(y))? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn check_height_monotone(&self) -> bool {
        let hy = self.source.heights();
        let hx = self.target.heights();
        (0..self.source.len()).all(|y| hy[y] <= hx[self.point_map[y]])
    }

    /// Certified properness: recognized constructions, finite maps,
    /// equivariant closed immersions and the fan criterion for toric maps.
    pub fn is_proper(&self) -> Result<Properness> {
        match &self.provenance {
            Construction::Projective(name) => {
                return Ok(Properness::Proper(Certificate::new("projective", name.clone())));
            }
            Construction::Composite(fs) => {
                let mut rules = Vec::new();
                for f in fs {
                    match f.is_proper()? {
                        Properness::Proper(c) => rules.push(c.rule),
                        _ => {
                            rules.clear();
                            break;
                        }
                    }
                }
                if !rules.is_empty() {
                    return Ok(Properness::Proper(Certificate::new("composite", rules.join(" then "))));
                }
            }
            _ => {}
        }
        if self.is_equivariant()? {
            return Ok(Properness::Proper(Certificate::new("closed-immersion", "equivariant closed immersion")));
        }
        if self.is_finite()? == Finiteness::Finite {
            return Ok(Properness::Proper(Certificate::new("finite", "every chart is integral over its preimage")));
        }
        if let Ok(phi) = fan::fan_map_from_morphism(self) {
            return Ok(match fan::proper_fan_map_witness(&phi)? {
                None => Properness::Proper(Certificate::new("fan-criterion", "preimages of cones are unions of cones")),
                Some(w) => Properness::NotProper(Certificate::new("fan-criterion", w)),
            });
        }
        Ok(Properness::Unknown)
    }

    /// Lifts `MSpec(V) → Y` of a commutative DVM square; a lift is fixed by
    /// its closed point `y` since `V ⊂ V⁺`, so candidates are enumerated.
    pub fn dvm_lift_check(&self, sq: &DvmSquare) -> Result<LiftResult> {
        self.check_square(sq)?;
        let mut count = 0;
        for y in 0..self.source.len() {
            if self.point_map[y] != sq.closed_point || !self.source.leq(sq.generic_point, y) {
                continue;
            }
            if self.lift_at(sq, y) {
                count += 1;
            }
        }
        Ok(match count {
            0 => LiftResult::NoLift,
            1 => LiftResult::UniqueLift,
            _ => LiftResult::MultipleLifts,
        })
    }

    /// `A_Y(y) → A_Y(y_g) → V⁺` lands in `V` and is local.
    fn lift_at(&self, sq: &DvmSquare, y: usize) -> bool {
        let ay = self.source.stalk(y);
        if !ay.ideal.is_empty() {
            return false;
        }
        let t = self.source.transition(y, sq.generic_point);
        let psi = compose_maps(&t, &sq.generic_map, sq.units_rank + 1);
        ay.generators.iter().all(|g| {
            let v = valuation(&apply_map(&psi, g, sq.units_rank + 1));
            if ay.is_unit(g) {
                v == 0
            } else {
                v > 0
            }
        })
    }

    fn check_square(&self, sq: &DvmSquare) -> Result<()> {
        let r = sq.units_rank + 1;
        let bad = |s: &str| Err(Error::Invalid(format!("DVM square: {s}")));
        if sq.generic_point >= self.source.len() || sq.closed_point >= self.target.len() {
            return bad("point out of range");
        }
        let ayg = self.source.stalk(sq.generic_point);
        let ax = self.target.stalk(sq.closed_point);
        if sq.generic_map.len() != ayg.rank || sq.closed_map.len() != ax.rank {
            return bad("map shapes");
        }
        if sq.generic_map.iter().chain(&sq.closed_map).any(|row| row.len() != r) {
            return bad("map shapes");
        }
        if !ayg.ideal.is_empty() || !ax.ideal.is_empty() {
            return bad("stalks with a basepoint do not map to a valuation monoid");
        }
        // A_X(x) → V local
        for g in &ax.generators {
            let v = valuation(&apply_map(&sq.closed_map, g, r));
            if (ax.is_unit(g) && v != 0) || (!ax.is_unit(g) && v <= 0) {
                return bad("the map to V is not local");
            }
        }
        // the generic point of MSpec(V) goes to the point where the image is a unit
        let xg = self.point_map[sq.generic_point];
        if !self.target.leq(xg, sq.closed_point) {
            return bad("square does not commute on points");
        }
        let face: Vec<usize> = ax
            .generators
            .iter()
            .enumerate()
            .filter(|(_, g)| valuation(&apply_map(&sq.closed_map, g, r)) == 0)
            .map(|(i, _)| i)
            .collect();
        if self.target.face_in(sq.closed_point, xg) != face {
            return bad("square does not commute on points");
        }
        for g in &ax.generators {
            let via_y = apply_map(
                &sq.generic_map,
                &apply_map(
                    &self.stalk_maps[sq.generic_point],
                    &self.target.transport(sq.closed_point, xg, g),
                    ayg.rank,
                ),
                r,
            );
            if via_y != apply_map(&sq.closed_map, g, r) {
                return bad("square does not commute on stalks");
            }
        }
        Ok(())
    }

    /// A random commutative DVM square: a random map from a group stalk of
    /// `Y` to `V⁺`, completed by a point of `X` where the composite is local.
    pub fn random_dvm_square(&self, rng: &mut impl Rng, max_units_rank: usize, coef: i64) -> Option<DvmSquare> {
        let generic: Vec<usize> = (0..self.source.len())
            .filter(|&y| {
                let a = self.source.stalk(y);
                a.ideal.is_empty() && a.generators.iter().all(|g| a.is_unit(g))
            })
            .collect();
        if generic.is_empty() {
            return None;
        }
        for _ in 0..64 {
            let u = rng.gen_range(0..=max_units_rank);
            let r = u + 1;
            let yg = generic[rng.gen_range(0..generic.len())];
            let rank = self.source.stalk(yg).rank;
            let gmap: LatticeMap =
                (0..rank).map(|_| (0..r).map(|_| rng.gen_range(-coef..=coef)).collect()).collect();
            let xg = self.point_map[yg];
            let k = compose_maps(&self.stalk_maps[yg], &gmap, r);
            let candidates: Vec<usize> = self
                .target
                .above(xg)
                .into_iter()
                .filter(|&x| {
                    let ax = self.target.stalk(x);
                    let h = compose_maps(&self.target.transition(x, xg), &k, r);
                    ax.ideal.is_empty()
                        && ax.generators.iter().all(|g| {
                            let v = valuation(&apply_map(&h, g, r));
                            if ax.is_unit(g) {
                                v == 0
                            } else {
                                v > 0
                            }
                        })
                })
                .collect();
            let candidates: Vec<usize> = candidates
                .into_iter()
                .filter(|&x| {
                    let h = compose_maps(&self.target.transition(x, xg), &k, r);
                    let sq = DvmSquare {
                        units_rank: u,
                        generic_point: yg,
                        generic_map: gmap.clone(),
                        closed_point: x,
                        closed_map: h,
                    };
                    self.check_square(&sq).is_ok()
                })
                .collect();
            if candidates.is_empty() {
                continue;
            }
            let x = candidates[rng.gen_range(0..candidates.len())];
            let h = compose_maps(&self.target.transition(x, xg), &k, r);
            return Some(DvmSquare { units_rank: u, generic_point: yg, generic_map: gmap, closed_point: x, closed_map: h });
        }
        None
    }

    /// Runs `count` seeded random squares; returns the tally of outcomes.
    pub fn dvm_battery(&self, seed: u64, count: usize, max_units_rank: usize, coef: i64) -> Result<BTreeMap<String, usize>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut tally = BTreeMap::new();
        for _ in 0..count {
            let key = match self.random_dvm_square(&mut rng, max_units_rank, coef) {
                None => "NoSquare".to_string(),
                Some(sq) => format!("{:?}", self.dvm_lift_check(&sq)?),
            };
            *tally.entry(key).or_insert(0) += 1;
        }
        Ok(tally)
    }
}

/// Every target generator outside the basepoint ideal lies in the image
/// submonoid; if the target has a basepoint, some element maps onto it.
fn section_surjective(f: &MonoidMap) -> Result<bool> {
    let t = &f.target;
    let mut img = Vec::new();
    let mut hits_zero = f.source.ideal.iter().any(|_| true);
    for g in &f.source.generators {
        let v = f.apply(g);
        match t.member(&v)? {
            Membership::InIdeal => hits_zero = true,
            Membership::InMonoid => img.push(v),
            Membership::Outside => return Ok(false),
        }
    }
    let im = AffineMonoid::new(t.rank, img, vec![])?;
    for g in &t.generators {
        if t.member(g)? == Membership::InMonoid && !im.in_semigroup(g)? {
            return Ok(false);
        }
    }
    Ok(t.ideal.is_empty() || hits_zero)
}

/// Source generators not sent to the basepoint span a face on whose group
/// the lattice map is injective, so only basepoint-bound elements collide.
fn kernel_is_ideal(f: &MonoidMap) -> Result<bool> {
    let mut live = Vec::new();
    for g in &f.source.generators {
        if f.target.member(&f.apply(g))? != Membership::InIdeal {
            live.push(g.clone());
        }
    }
    let basis = lattice::lattice_basis(&live, f.source.rank);
    let images: Vec<LatticeVector> = basis.iter().map(|b| f.apply(b)).collect();
    Ok(lattice::rank(&images, f.target.rank) == basis.len())
}

/// The lattice map restricts to an isomorphism of monoids.
pub fn stalk_is_iso(f: &MonoidMap) -> Result<bool> {
    if !kernel_is_ideal(f)? || !section_surjective(f)? {
        return Ok(false);
    }
    let zero_src = !f.source.ideal.is_empty();
    let zero_tgt = !f.target.ideal.is_empty();
    if zero_src != zero_tgt {
        return Ok(false);
    }
    // no non-basepoint source element collapses to the basepoint
    for g in &f.source.generators {
        if f.source.member(g)? == Membership::InMonoid && f.target.member(&f.apply(g))? == Membership::InIdeal {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The ideal `J ⊆ A_X(g(z))` with `A_Z(z) = A_X(g(z)) / J` for an
/// equivariant closed immersion `g`.
fn closed_kernel(g: &SchemeMorphism, z: usize) -> Result<Vec<LatticeVector>> {
    let f = g.stalk_map(z);
    let mut j: Vec<LatticeVector> = f.source.ideal.clone();
    for a in &f.source.generators {
        if f.target.member(&f.apply(a))? == Membership::InIdeal {
            j.push(a.clone());
        }
    }
    if !f.target.ideal.is_empty() {
        let inv = scheme::invert_unimodular(&f.matrix).ok_or_else(|| {
            Error::UnsupportedPullback("closed leg whose stalk lattice map is not invertible".into())
        })?;
        for w in &f.target.ideal {
            let a = apply_map(&inv, w, f.source.rank);
            if f.source.member(&a)? == Membership::Outside {
                return Err(Error::UnsupportedPullback("ideal of the closed leg has no preimage".into()));
            }
            j.push(a);
        }
    }
    Ok(j)
}

/// `Y ×_X Z` when `g : Z → X` (or `f`) is an open immersion or an
/// equivariant closed immersion; the result sits inside the other factor.
pub fn fiber_product(f: &SchemeMorphism, g: &SchemeMorphism) -> Result<MonoidScheme> {
    if g.is_open_immersion()? || g.is_equivariant()? {
        Ok(pullback(f, g)?.0)
    } else if f.is_open_immersion()? || f.is_equivariant()? {
        Ok(pullback(g, f)?.0)
    } else {
        Err(Error::UnsupportedPullback("neither leg is an open or equivariant closed immersion".into()))
    }
}

/// The ideal sheaf of an equivariant closed immersion: the kernel ideal on
/// charts meeting the image, the unit ideal elsewhere.
pub fn closed_immersion_ideal(e: &SchemeMorphism) -> Result<IdealSheaf> {
    let mut charts = BTreeMap::new();
    for x in e.target.maximal_points() {
        let gens = match e.point_map.iter().position(|&q| q == x) {
            None => vec![vec![0; e.target.stalk(x).rank]],
            Some(z) => e.target.stalk(x).minimalize_ideal(&closed_kernel(e, z)?)?,
        };
        charts.insert(x, gens);
    }
    Ok(IdealSheaf { charts })
}

/// `D = Y ×_X Z` for `f : Y → X` and an immersion `g : Z → X` (open, or
/// equivariant closed with invertible stalk lattice maps), with both
/// projections. `D` is an open or closed subscheme of `Y`.
pub fn pullback(f: &SchemeMorphism, g: &SchemeMorphism) -> Result<(MonoidScheme, SchemeMorphism, SchemeMorphism)> {
    if f.target.len() != g.target.len() {
        return Err(Error::Invalid("morphisms have different targets".into()));
    }
    let y = &f.source;
    let (d, to_y) = if g.is_open_immersion()? {
        let pts: Vec<usize> = (0..y.len()).filter(|&p| g.point_map.contains(&f.point_map[p])).collect();
        let d = y.open_subscheme(&pts);
        let maps = pts.iter().map(|&p| scheme::identity_map(y.stalk(p).rank)).collect();
        let to_y = SchemeMorphism::new_unchecked(d.clone(), y.clone(), pts, maps, Construction::OpenImmersion);
        (d, to_y)
    } else if g.is_equivariant()? {
        let mut charts = BTreeMap::new();
        for ym in y.maximal_points() {
            let x = f.point_map[ym];
            let gens = match g.point_map.iter().position(|&q| q == x) {
                None => vec![vec![0; y.stalk(ym).rank]],
                Some(z) => closed_kernel(g, z)?
                    .iter()
                    .map(|a| apply_map(&f.stalk_maps[ym], a, y.stalk(ym).rank))
                    .collect(),
            };
            charts.insert(ym, gens);
        }
        y.closed_subscheme(&IdealSheaf { charts })?
    } else {
        return Err(Error::UnsupportedPullback("the second leg is not an open or equivariant closed immersion".into()));
    };
    let mut point_map = Vec::new();
    let mut stalk_maps = Vec::new();
    for q in 0..d.len() {
        let yq = to_y.point_map[q];
        let x = f.point_map[yq];
        let z = g.point_map.iter().position(|&c| c == x).expect("point over the image");
        let inv = scheme::invert_unimodular(&g.stalk_maps[z])
            .ok_or_else(|| Error::UnsupportedPullback("immersion with a non-invertible stalk lattice map".into()))?;
        stalk_maps.push(compose_maps(&inv, &f.stalk_maps[yq], y.stalk(yq).rank));
        point_map.push(z);
    }
    let to_z = SchemeMorphism::new(d.clone(), g.source.clone(), point_map, stalk_maps, Construction::Unknown)?;
    Ok((d, to_y, to_z))
}

/// The inclusion of a down-closed set of points as an open subscheme.
pub fn open_immersion(x: &MonoidScheme, pts: &[usize]) -> Result<SchemeMorphism> {
    if !x.is_down_closed(pts) {
        return Err(Error::Invalid("points do not form an open subset".into()));
    }
    let u = x.open_subscheme(pts);
    let maps = pts.iter().map(|&p| scheme::identity_map(x.stalk(p).rank)).collect();
    Ok(SchemeMorphism::new_unchecked(u, x.clone(), pts.to_vec(), maps, Construction::OpenImmersion))
}

/// The structure map `X → MSpec(S⁰)` to the point.
pub fn to_point(x: &MonoidScheme) -> SchemeMorphism {
    let pt = MonoidScheme::from_affine(&AffineMonoid::s0());
    let maps = (0..x.len()).map(|_| Vec::new()).collect();
    SchemeMorphism::new_unchecked(x.clone(), pt, vec![0; x.len()], maps, Construction::Unknown)
}

/// `MSpec(A) → MSpec(B)` for a monoid map `B → A`; points pull back primes.
pub fn affine_morphism(map: &MonoidMap) -> Result<SchemeMorphism> {
    let y = MonoidScheme::from_affine(&map.target);
    let x = MonoidScheme::from_affine(&map.source);
    let ys = map.target.mspec();
    let xs = map.source.mspec();
    let mut point_map = Vec::new();
    for q in &ys {
        let p = map.pullback_prime(q)?;
        let i = xs.iter().position(|r| r.face == p.face).ok_or_else(|| Error::Invalid("prime not found".into()))?;
        point_map.push(i);
    }
    let stalk_maps = (0..y.len()).map(|_| map.matrix.clone()).collect();
    SchemeMorphism::new(y, x, point_map, stalk_maps, Construction::Unknown)
}
