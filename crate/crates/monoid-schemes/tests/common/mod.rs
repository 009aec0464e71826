//! Shared corpus and brute-force oracles for the integration tests.
#![allow(dead_code)]

use monoid_schemes::blowup::projective_space;
use monoid_schemes::cone::RationalCone;
use monoid_schemes::fan::{self, Fan};
use monoid_schemes::lattice::{self, LatticeVector};
use monoid_schemes::monoid::AffineMonoid;
use monoid_schemes::scheme::{Identification, MonoidScheme};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;

pub fn monoid(rank: usize, gens: &[&[i64]], ideal: &[&[i64]]) -> AffineMonoid {
    AffineMonoid::new(rank, gens.iter().map(|v| v.to_vec()).collect(), ideal.iter().map(|v| v.to_vec()).collect()).unwrap()
}

pub fn cusp() -> AffineMonoid {
    monoid(1, &[&[2], &[3]], &[])
}

pub fn fan(rank: usize, rays: &[&[i64]], cones: &[&[usize]]) -> Fan {
    Fan::new(rank, rays.iter().map(|v| v.to_vec()).collect(), cones.iter().map(|c| c.to_vec()).collect()).unwrap()
}

pub fn p1_fan() -> Fan {
    fan(1, &[&[1], &[-1]], &[&[0], &[1]])
}

pub fn p2_fan() -> Fan {
    fan(2, &[&[1, 0], &[0, 1], &[-1, -1]], &[&[0, 1], &[1, 2], &[2, 0]])
}

/// The fan of the Hirzebruch surface F_a.
pub fn hirzebruch(a: i64) -> Fan {
    fan(2, &[&[1, 0], &[0, 1], &[-1, a], &[0, -1]], &[&[0, 1], &[1, 2], &[2, 3], &[3, 0]])
}

pub fn quadric_fan() -> Fan {
    Fan::from_cone(2, vec![vec![0, 1], vec![2, -1]]).unwrap()
}

/// P¹, P², two Hirzebruch surfaces, two blow-up fans and five seeded
/// random fans of rank 2 and 3.
pub fn fan_corpus() -> Vec<(String, Fan)> {
    let mut out = vec![
        ("P1".to_string(), p1_fan()),
        ("P2".to_string(), p2_fan()),
        ("F1".to_string(), hirzebruch(1)),
        ("F2".to_string(), hirzebruch(2)),
        ("Bl_pt P2".to_string(), p2_fan().star_subdivision(&[1, 1]).unwrap()),
        ("Bl_0 A3".to_string(), Fan::orthant(3).star_subdivision(&[1, 1, 1]).unwrap()),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for i in 0..5 {
        let rank = if i < 3 { 2 } else { 3 };
        out.push((format!("random{i} (rank {rank})"), fan::random_fan(&mut rng, rank, 4)));
    }
    out
}

pub fn p1() -> MonoidScheme {
    fan::scheme_from_fan(&p1_fan()).unwrap()
}

pub fn p2() -> MonoidScheme {
    fan::scheme_from_fan(&p2_fan()).unwrap()
}

pub fn point() -> MonoidScheme {
    MonoidScheme::from_affine(&AffineMonoid::s0())
}

pub fn projective_over_point(n: usize) -> MonoidScheme {
    projective_space(&point(), n).unwrap().0
}

pub fn doubled_plane() -> MonoidScheme {
    let f2 = AffineMonoid::free(2);
    let id = vec![vec![1, 0], vec![0, 1]];
    let ids = vec![
        Identification { chart_i: 0, face_i: vec![0], chart_j: 1, face_j: vec![0], iso: id.clone() },
        Identification { chart_i: 0, face_i: vec![1], chart_j: 1, face_j: vec![1], iso: id },
    ];
    MonoidScheme::glue(&[f2.clone(), f2], &ids).unwrap()
}

/// A pointed cone with `k` random generators with entries in `[-b, b]`,
/// full-dimensional if requested.
pub fn random_cone(rng: &mut impl Rng, rank: usize, k: usize, b: i64, full: bool) -> RationalCone {
    loop {
        let gens: Vec<LatticeVector> =
            (0..k).map(|_| (0..rank).map(|_| rng.gen_range(-b..=b)).collect()).filter(|v: &LatticeVector| !lattice::is_zero(v)).collect();
        let Ok(c) = RationalCone::new(rank, gens) else { continue };
        if c.is_pointed() && (!full || c.is_full_dimensional()) && !c.rays.is_empty() {
            return c;
        }
    }
}

/// A full-dimensional singular simplicial cone with rays in `[0, b]`-box
/// coordinates (shifted into a half-space to stay pointed).
pub fn random_singular_simplicial(rng: &mut impl Rng, rank: usize, b: i64) -> Vec<LatticeVector> {
    loop {
        let rays: Vec<LatticeVector> = (0..rank)
            .map(|_| {
                let mut v: LatticeVector = (0..rank).map(|_| rng.gen_range(-b..=b)).collect();
                v[0] = rng.gen_range(1..=b);
                lattice::primitive(&v)
            })
            .collect();
        let det = lattice::determinant(&lattice::big_matrix(&rays));
        if det.clone() * det.clone() > 1u32.into() && rays.iter().collect::<BTreeSet<_>>().len() == rank {
            return rays;
        }
    }
}

/// Irreducible lattice points of a full-dimensional pointed cone, found by
/// enumerating the box `|x_i| ≤ Σ_r |r_i|` (which contains the zonotope of
/// the rays, hence every irreducible element). A positive grading `w`
/// prunes the search: irreducibles have `w ≤ Σ w(r)`, and a decomposition
/// `x = y + z` has a summand with `w(y) ≤ w(x) / 2`.
pub fn box_hilbert_basis(c: &RationalCone) -> Vec<LatticeVector> {
    let n = c.rank;
    let w = c.dual().rays.iter().fold(vec![0; n], |acc, r| lattice::add(&acc, r));
    let wmax: i64 = c.rays.iter().map(|r| lattice::dot(&w, r)).sum();
    let bound: Vec<i64> = (0..n).map(|i| c.rays.iter().map(|r| r[i].abs()).sum()).collect();
    let mut pts: Vec<LatticeVector> = Vec::new();
    let mut v: Vec<i64> = bound.iter().map(|b| -b).collect();
    'outer: loop {
        let d = lattice::dot(&w, &v);
        if d > 0 && d <= wmax && c.contains(&v) {
            pts.push(v.clone());
        }
        let mut i = 0;
        loop {
            if i == n {
                break 'outer;
            }
            v[i] += 1;
            if v[i] <= bound[i] {
                break;
            }
            v[i] = -bound[i];
            i += 1;
        }
    }
    pts.sort_by_key(|p| lattice::dot(&w, p));
    let mut out: Vec<LatticeVector> = pts
        .iter()
        .filter(|x| {
            let dx = lattice::dot(&w, x);
            !pts.iter().take_while(|y| 2 * lattice::dot(&w, y) <= dx).any(|y| c.contains(&lattice::sub(x, y)))
        })
        .cloned()
        .collect();
    out.sort();
    out
}

/// Primes of `a` by brute force, as the index sets `S` of generators
/// outside the prime: subsets closed under membership in `⟨S⟩`, whose
/// complement is an ideal (no `c·Σ S − g` in `B` for `g ∉ S`, tested for
/// `c ≤ mult`) and which avoid the basepoint ideal.
pub fn brute_prime_sets(a: &AffineMonoid, mult: i64) -> BTreeSet<Vec<usize>> {
    let g = &a.generators;
    let k = g.len();
    let mut out = BTreeSet::new();
    for mask in 0u32..(1 << k) {
        let s: Vec<usize> = (0..k).filter(|i| mask & (1 << i) != 0).collect();
        let sub = a.submonoid(&s);
        if (0..k).any(|i| !s.contains(&i) && sub.in_semigroup(&g[i]).unwrap()) {
            continue;
        }
        let sum = s.iter().fold(vec![0; a.rank], |acc, &i| lattice::add(&acc, &g[i]));
        let closed = (0..k)
            .filter(|i| !s.contains(i))
            .all(|i| (0..=mult).all(|c| !a.in_semigroup(&lattice::sub(&lattice::scale(c, &sum), &g[i])).unwrap()));
        let avoids = a.ideal.iter().all(|x| !sub.in_semigroup(x).unwrap());
        if closed && avoids {
            out.insert(s);
        }
    }
    out
}

/// The brute-force primes as sorted generator vectors outside the prime.
pub fn brute_prime_faces(a: &AffineMonoid, mult: i64) -> BTreeSet<Vec<LatticeVector>> {
    brute_prime_sets(a, mult)
        .into_iter()
        .map(|s| {
            let mut vs: Vec<LatticeVector> = s.iter().map(|&i| a.generators[i].clone()).collect();
            vs.sort();
            vs
        })
        .collect()
}

/// Faces (as sorted generator vectors) of the primes `mspec` reports.
pub fn mspec_faces(a: &AffineMonoid) -> BTreeSet<Vec<LatticeVector>> {
    a.mspec()
        .iter()
        .map(|p| {
            let mut vs: Vec<LatticeVector> = p.face.iter().map(|&i| a.generators[i].clone()).collect();
            vs.sort();
            vs
        })
        .collect()
}
