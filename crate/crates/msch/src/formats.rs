//! Input documents understood by the driver. Monoid, scheme and fan files
//! are the library's data types; morphisms, ideals and squares are small
//! recipes built on top of them.

use monoid_schemes::blowup::{blow_up, projective_space};
use monoid_schemes::fan::{self, Fan, FanData, FanMorphism};
use monoid_schemes::lattice::LatticeVector;
use monoid_schemes::monoid::{AffineMonoid, MonoidData, MonoidMap};
use monoid_schemes::morphisms::{self, SchemeMorphism};
use monoid_schemes::scheme::{IdealSheaf, MonoidScheme, SchemeData};
use monoid_schemes::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Ideal generators per chart of a scheme file, keyed by the chart index
/// written as a string (`{"0": [[1, 0], [0, 1]]}`).
pub type IdealData = BTreeMap<String, Vec<LatticeVector>>;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MorphismData {
    /// The toric morphism of a map of fans.
    Toric { source: FanData, target: FanData, matrix: Vec<LatticeVector> },
    /// `MSpec(target) → MSpec(source)` for a monoid map `source → target`.
    Affine { source: MonoidData, target: MonoidData, matrix: Vec<LatticeVector> },
    /// `MSpec(A_nor) → MSpec(A)`.
    Normalization { monoid: MonoidData },
    /// The blow-up of a scheme along an ideal.
    Blowup { scheme: SchemeData, ideal: IdealData },
    /// The closed subscheme cut out by an ideal.
    Closed { scheme: SchemeData, ideal: IdealData },
    /// The union of the listed charts.
    Open { scheme: SchemeData, charts: Vec<usize> },
    /// `P^n_X → X`.
    Projective { scheme: SchemeData, n: usize },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SquareData {
    pub p: MorphismData,
    pub e: MorphismData,
}

/// The point of `x` carrying chart `c` of its file.
pub fn chart_point(x: &MonoidScheme, c: usize) -> Result<usize> {
    let prefix = format!("c{c}p");
    x.maximal_points()
        .into_iter()
        .find(|&p| x.label(p).starts_with(&prefix))
        .ok_or_else(|| Error::Invalid(format!("chart {c} is not a maximal point")))
}

pub fn ideal_sheaf(x: &MonoidScheme, d: &IdealData) -> Result<IdealSheaf> {
    let mut charts = BTreeMap::new();
    for (c, gens) in d {
        let c = c.parse().map_err(|_| Error::Invalid(format!("chart key {c:?} is not an index")))?;
        charts.insert(chart_point(x, c)?, gens.clone());
    }
    Ok(IdealSheaf { charts })
}

pub fn scheme(d: &SchemeData) -> Result<MonoidScheme> {
    MonoidScheme::from_data(d)
}

pub fn fan(d: &FanData) -> Result<Fan> {
    Fan::from_data(d)
}

pub fn monoid(d: &MonoidData) -> Result<AffineMonoid> {
    AffineMonoid::from_data(d)
}

pub fn morphism(d: &MorphismData) -> Result<SchemeMorphism> {
    match d {
        MorphismData::Toric { source, target, matrix } => {
            let phi = FanMorphism::new(fan(source)?, fan(target)?, matrix.clone())?;
            fan::morphism_from_fan_map(&phi)
        }
        MorphismData::Affine { source, target, matrix } => {
            let map = MonoidMap::new(monoid(source)?, monoid(target)?, matrix.clone())?;
            morphisms::affine_morphism(&map)
        }
        MorphismData::Normalization { monoid: m } => {
            let (_, map) = monoid(m)?.normalization()?;
            morphisms::affine_morphism(&map)
        }
        MorphismData::Blowup { scheme: s, ideal } => {
            let x = scheme(s)?;
            let j = ideal_sheaf(&x, ideal)?;
            Ok(blow_up(&x, &j)?.morphism)
        }
        MorphismData::Closed { scheme: s, ideal } => {
            let x = scheme(s)?;
            let j = ideal_sheaf(&x, ideal)?;
            Ok(x.closed_subscheme(&j)?.1)
        }
        MorphismData::Open { scheme: s, charts } => {
            let x = scheme(s)?;
            let mut pts = Vec::new();
            for &c in charts {
                for q in x.below(chart_point(&x, c)?) {
                    if !pts.contains(&q) {
                        pts.push(q);
                    }
                }
            }
            pts.sort_unstable();
            morphisms::open_immersion(&x, &pts)
        }
        MorphismData::Projective { scheme: s, n } => Ok(projective_space(&scheme(s)?, *n)?.1),
    }
}
