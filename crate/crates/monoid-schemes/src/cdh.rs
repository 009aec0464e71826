//! Cartesian squares of monoid schemes and the cd structures built from
//! them: Zariski squares, abstract blow-ups (finite or smooth), the
//! standard density structure and reducing refinements.
//!
//! A square is written
//!
//! ```text
//!   D ──→ Y
//!   │     │ p
//!   ↓     ↓
//!   C ──→ X
//!      e
//! ```

use crate::blowup::blow_up;
use crate::error::{Error, Result};
use crate::fan::{self, FanMorphism};
use crate::monoid::Finiteness;
use crate::morphisms::{self, affine_morphism, closed_immersion_ideal, open_immersion, pullback, stalk_is_iso, SchemeMorphism};
use crate::scheme::{scheme_theoretic_image, IdealSheaf, MonoidScheme};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Degree bound used when computing scheme-theoretic images of squares.
pub const IMAGE_DEGREE_BOUND: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SquareClass {
    Zariski,
    FiniteAbstractBlowup,
    SmoothBlowup,
    AbstractBlowup,
    Unclassified,
}

impl SquareClass {
    pub fn is_abstract_blowup(self) -> bool {
        matches!(self, SquareClass::AbstractBlowup | SquareClass::FiniteAbstractBlowup | SquareClass::SmoothBlowup)
    }
}

#[derive(Clone, Debug)]
pub struct CartesianSquare {
    pub d: MonoidScheme,
    pub y: MonoidScheme,
    pub c: MonoidScheme,
    pub x: MonoidScheme,
    pub d_to_y: SchemeMorphism,
    pub d_to_c: SchemeMorphism,
    pub p: SchemeMorphism,
    pub e: SchemeMorphism,
    /// Free-form origin of the square.
    pub note: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    pub class: SquareClass,
    pub certificates: Vec<String>,
}

/// An open subscheme `U ⊆ X` all of whose complement has height ≥ `index`.
#[derive(Clone, Debug)]
pub struct DensityWitness {
    pub scheme: MonoidScheme,
    pub index: usize,
    pub open: Vec<usize>,
}

impl DensityWitness {
    pub fn full(x: &MonoidScheme, index: usize) -> Self {
        DensityWitness { scheme: x.clone(), index, open: (0..x.len()).collect() }
    }

    pub fn is_valid(&self) -> bool {
        let h = self.scheme.heights();
        self.scheme.is_down_closed(&self.open)
            && (0..self.scheme.len()).all(|p| self.open.contains(&p) || h[p] >= self.index)
    }
}

impl CartesianSquare {
    /// Completes `p : Y → X` and the immersion `e : C → X` by the pullback.
    pub fn from_legs(p: SchemeMorphism, e: SchemeMorphism, note: &str) -> Result<Self> {
        let (d, d_to_y, d_to_c) = pullback(&p, &e)?;
        Ok(CartesianSquare {
            d,
            y: p.source.clone(),
            c: e.source.clone(),
            x: p.target.clone(),
            d_to_y,
            d_to_c,
            p,
            e,
            note: note.to_string(),
        })
    }

    /// Commutes, and `D` is the pullback of `e` along `p`.
    pub fn is_cartesian(&self) -> Result<bool> {
        let n = self.d.len();
        for q in 0..n {
            let a = self.p.point_map[self.d_to_y.point_map[q]];
            let b = self.e.point_map[self.d_to_c.point_map[q]];
            if a != b {
                return Ok(false);
            }
        }
        let top = self.d_to_y.compose(&self.p);
        let left = self.d_to_c.compose(&self.e);
        for q in 0..n {
            if top.stalk_maps[q] != left.stalk_maps[q] {
                return Ok(false);
            }
        }
        let (d, _, _) = match pullback(&self.p, &self.e) {
            Ok(r) => r,
            Err(Error::UnsupportedPullback(_)) => return Ok(false),
            Err(err) => return Err(err),
        };
        Ok(d.isomorphic_same_lattice(&self.d))
    }

    /// Points of `Y` outside the image of `D`, and of `X` outside `e(C)`.
    pub fn complements(&self) -> (Vec<usize>, Vec<usize>) {
        let yd: Vec<usize> = (0..self.y.len()).filter(|q| !self.d_to_y.point_map.contains(q)).collect();
        let xc: Vec<usize> = (0..self.x.len()).filter(|q| !self.e.point_map.contains(q)).collect();
        (yd, xc)
    }

    /// `p` restricts to an isomorphism `Y ∖ D → X ∖ C`: a bijection of
    /// points that is an order isomorphism with isomorphisms on stalks.
    pub fn complement_is_isomorphism(&self) -> Result<bool> {
        let (yd, xc) = self.complements();
        let mut img: Vec<usize> = yd.iter().map(|&q| self.p.point_map[q]).collect();
        img.sort_unstable();
        if img.len() != xc.len() || {
            let mut d = img.clone();
            d.dedup();
            d != xc
        } {
            return Ok(false);
        }
        for &a in &yd {
            for &b in &yd {
                if self.y.leq(a, b) != self.x.leq(self.p.point_map[a], self.p.point_map[b]) {
                    return Ok(false);
                }
            }
            if !stalk_is_iso(&self.p.stalk_map(a))? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// The strongest applicable tag; precedence Zariski, finite abstract
    /// blow-up, smooth blow-up, abstract blow-up.
    pub fn classify(&self) -> Result<Classification> {
        if !self.is_cartesian()? {
            return Err(Error::NotCartesian(self.note.clone()));
        }
        let mut certs = vec!["cartesian: D is the pullback of e along p".to_string()];
        if self.e.is_open_immersion()? && self.p.is_open_immersion()? {
            let covered = (0..self.x.len()).all(|q| self.e.point_map.contains(&q) || self.p.point_map.contains(&q));
            if covered {
                certs.push("e and p are open immersions covering X".into());
                return Ok(Classification { class: SquareClass::Zariski, certificates: certs });
            }
        }
        let proper = self.p.is_proper()?;
        if !self.e.is_equivariant()? || !proper.is_proper() || !self.complement_is_isomorphism()? {
            return Ok(Classification { class: SquareClass::Unclassified, certificates: certs });
        }
        certs.push("e is an equivariant closed immersion".into());
        if let morphisms::Properness::Proper(c) = &proper {
            certs.push(format!("p is proper ({}: {})", c.rule, c.detail));
        }
        certs.push("p maps Y∖D isomorphically onto X∖C".into());
        if self.p.is_finite()? == Finiteness::Finite {
            certs.push("p is finite".into());
            return Ok(Classification { class: SquareClass::FiniteAbstractBlowup, certificates: certs });
        }
        if self.c.is_smooth()? {
            let j = closed_immersion_ideal(&self.e)?;
            if let Ok(b) = blow_up(&self.x, &j) {
                if b.scheme.isomorphic_same_lattice(&self.y) {
                    certs.push("C is smooth and Y is the blow-up of X along C".into());
                    return Ok(Classification { class: SquareClass::SmoothBlowup, certificates: certs });
                }
            }
        }
        Ok(Classification { class: SquareClass::AbstractBlowup, certificates: certs })
    }

    /// Replaces `Y` by the scheme-theoretic image of `Y ∖ D` and `D` by its
    /// pullback, so that the complement of `D` is dense.
    pub fn reduced_refinement(&self) -> Result<CartesianSquare> {
        let (yd, _) = self.complements();
        let u = open_immersion(&self.y, &yd)?;
        let (_, ybar) = scheme_theoretic_image(&u, IMAGE_DEGREE_BOUND)?;
        let p = ybar.compose(&self.p);
        CartesianSquare::from_legs(p, self.e.clone(), &format!("{} (reduced)", self.note))
    }

    /// Given density witnesses `C0, Y0` (index `i`) and `D0` (index `i − 1`),
    /// removes from `X` the closure of the images of `C ∖ C0`, `D ∖ D0` and
    /// `Y ∖ Y0`. Returns the square over the rest `X'` and `X'` as a witness
    /// of index `i`.
    pub fn reducing_data(
        &self,
        c0: &DensityWitness,
        y0: &DensityWitness,
        d0: &DensityWitness,
    ) -> Result<(CartesianSquare, DensityWitness)> {
        let i = c0.index;
        if y0.index != i || d0.index + 1 != i.max(1) || !c0.is_valid() || !y0.is_valid() || !d0.is_valid() {
            return Err(Error::WitnessInvalid("witness indices or heights do not fit".into()));
        }
        if c0.scheme.len() != self.c.len() || y0.scheme.len() != self.y.len() || d0.scheme.len() != self.d.len() {
            return Err(Error::WitnessInvalid("witnesses are not on the square's schemes".into()));
        }
        let mut bad: Vec<usize> = Vec::new();
        bad.extend((0..self.c.len()).filter(|q| !c0.open.contains(q)).map(|q| self.e.point_map[q]));
        bad.extend((0..self.y.len()).filter(|q| !y0.open.contains(q)).map(|q| self.p.point_map[q]));
        bad.extend(
            (0..self.d.len()).filter(|q| !d0.open.contains(q)).map(|q| self.p.point_map[self.d_to_y.point_map[q]]),
        );
        let closed: Vec<usize> = (0..self.x.len()).filter(|&q| bad.iter().any(|&b| self.x.leq(b, q))).collect();
        let keep: Vec<usize> = (0..self.x.len()).filter(|q| !closed.contains(q)).collect();
        let witness = DensityWitness { scheme: self.x.clone(), index: i, open: keep.clone() };
        if !witness.is_valid() {
            return Err(Error::WitnessInvalid("the excised locus has points of height below the index".into()));
        }
        let sq = self.restrict_to(&keep)?;
        Ok((sq, witness))
    }

    /// The square pulled back to the open subscheme of `X` on `keep`.
    pub fn restrict_to(&self, keep: &[usize]) -> Result<CartesianSquare> {
        let xo = open_immersion(&self.x, keep)?;
        let xs = xo.source.clone();
        let restrict_leg = |f: &SchemeMorphism| -> Result<SchemeMorphism> {
            let pts: Vec<usize> = (0..f.source.len()).filter(|&q| keep.contains(&f.point_map[q])).collect();
            let src = f.source.open_subscheme(&pts);
            let point_map = pts.iter().map(|&q| keep.iter().position(|&k| k == f.point_map[q]).unwrap()).collect();
            let maps = pts.iter().map(|&q| f.stalk_maps[q].clone()).collect();
            Ok(SchemeMorphism::new_unchecked(src, xs.clone(), point_map, maps, f.provenance.clone()))
        };
        let p = restrict_leg(&self.p)?;
        let e = restrict_leg(&self.e)?;
        CartesianSquare::from_legs(p, e, &format!("{} (restricted)", self.note))
    }

    /// JSON description: the four schemes and the point maps.
    pub fn to_json(&self, class: Option<&Classification>) -> serde_json::Value {
        serde_json::json!({
            "note": self.note,
            "class": class.map(|c| format!("{:?}", c.class)),
            "certificates": class.map(|c| c.certificates.clone()),
            "D": self.d.to_data(),
            "Y": self.y.to_data(),
            "C": self.c.to_data(),
            "X": self.x.to_data(),
            "D_to_Y": self.d_to_y.point_map,
            "D_to_C": self.d_to_c.point_map,
            "p": self.p.point_map,
            "e": self.e.point_map,
        })
    }
}

/// The closed immersion of the reduced equivariant closure of `pts`.
fn closure_immersion(x: &MonoidScheme, pts: &[usize]) -> Result<SchemeMorphism> {
    let (_, j): (MonoidScheme, IdealSheaf) = x.equivariant_closure(pts)?;
    Ok(x.closed_subscheme(&j)?.1)
}

/// Squares attached to `X`: Zariski squares from covers by a maximal chart
/// and the remaining charts, a component cover when `X` is reduced and
/// reducible, the normalization square of a non-normal cancellative affine
/// `X`, and the squares of the toric resolution tower (at most `depth`).
pub fn generate_squares(x: &MonoidScheme, depth: usize) -> Result<Vec<(CartesianSquare, Classification)>> {
    let mut out = Vec::new();
    let maxes = x.maximal_points();
    // Zariski: U_{x_i} and the union of the other charts
    if maxes.len() >= 2 {
        let rounds = if maxes.len() == 2 { 1 } else { maxes.len() };
        for &m in maxes.iter().take(rounds) {
            let u = x.below(m);
            let v: Vec<usize> =
                (0..x.len()).filter(|&q| maxes.iter().any(|&o| o != m && x.leq(q, o))).collect();
            let sq = CartesianSquare::from_legs(open_immersion(x, &u)?, open_immersion(x, &v)?, &format!("Zariski cover at {}", x.label(m)))?;
            let c = sq.classify()?;
            out.push((sq, c));
        }
    }
    // components
    let generic = x.minimal_points();
    if generic.len() >= 2 && x.is_reduced()? {
        let e = closure_immersion(x, &generic[..1])?;
        let p = closure_immersion(x, &generic[1..])?;
        let sq = CartesianSquare::from_legs(p, e, "component cover")?;
        let c = sq.classify()?;
        out.push((sq, c));
    }
    // normalization
    if let [top] = maxes.as_slice() {
        let a = x.stalk(*top);
        if a.is_cancellative() && !a.is_normal()? {
            let (_, map) = a.normalization()?;
            let pnor = affine_morphism(&map)?;
            let pnor = align_target(pnor, x)?;
            let mut bad = Vec::new();
            for q in 0..x.len() {
                if !x.stalk(q).is_normal()? {
                    bad.push(q);
                }
            }
            let e = closure_immersion(x, &bad)?;
            let sq = CartesianSquare::from_legs(pnor, e, "normalization")?;
            let c = sq.classify()?;
            out.push((sq, c));
        }
    }
    // toric resolution tower
    if let Ok(f0) = fan::fan_from_scheme(x) {
        let (_, centers) = f0.resolve()?;
        let mut cur = f0;
        for v in centers.into_iter().take(depth) {
            let next = cur.star_subdivision(&v)?;
            let tau = cur.cone_containing(&v).expect("center in the support");
            let xs = fan::scheme_from_fan(&cur)?;
            let phi = FanMorphism::identity(next.clone(), cur.clone())?;
            let p = fan::morphism_from_fan_map(&phi)?;
            let j = fan::orbit_closure_ideal(&cur, &xs, &cur.cones[tau])?;
            let e = xs.closed_subscheme(&j)?.1;
            let sq = CartesianSquare::from_legs(p, e, &format!("resolution step at {v:?}"))?;
            let c = sq.classify()?;
            out.push((sq, c));
            cur = next;
        }
    }
    Ok(out)
}

/// Re-targets an affine morphism onto `x` when `x` is the affine scheme of
/// the same monoid (point numbering may differ).
fn align_target(f: SchemeMorphism, x: &MonoidScheme) -> Result<SchemeMorphism> {
    let t = &f.target;
    let mut perm = BTreeMap::new();
    for q in 0..t.len() {
        let canon = t.stalk(q).canonical_form();
        let hit = (0..x.len())
            .find(|&r| x.stalk(r).canonical_form() == canon)
            .ok_or_else(|| Error::Invalid("target is not the given scheme".into()))?;
        perm.insert(q, hit);
    }
    let point_map = f.point_map.iter().map(|q| perm[q]).collect();
    SchemeMorphism::new(f.source.clone(), x.clone(), point_map, f.stalk_maps.clone(), f.provenance.clone())
}
