//! Acceptance battery: one PASS/FAIL line per criterion.
//!
//! The process fails only if a criterion outside `KNOWN_RED` fails (or a
//! known-red one unexpectedly passes, which means the list is stale).

mod common;

use common::*;
use monoid_schemes::blowup::{blow_up, verify_inverts, BlowupResult};
use monoid_schemes::cdh::{generate_squares, SquareClass};
use monoid_schemes::cone::{hilbert_basis, RationalCone};
use monoid_schemes::fan::{self, Fan, FanMorphism};
use monoid_schemes::lattice::{self, LatticeVector};
use monoid_schemes::monoid::{pushout_closed, AffineMonoid, Finiteness, MonoidMap};
use monoid_schemes::morphisms::{self, LiftResult, Properness, SchemeMorphism};
use monoid_schemes::scheme::{IdealSheaf, MonoidScheme, Separation};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

/// Criteria expected to fail; each has a written analysis.
const KNOWN_RED: &[&str] = &["2"];

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn err<E: std::fmt::Debug>(e: E) -> String {
    format!("{e:?}")
}

fn within(t: Instant, limit: Duration) -> Result<(), String> {
    check(t.elapsed() < limit, format!("took {:.2?}, limit {limit:?}", t.elapsed()))
}

fn identity_lattice(n: usize) -> Vec<LatticeVector> {
    (0..n).map(|i| lattice::unit(n, i)).collect()
}

fn origin_blowup(d: usize) -> (MonoidScheme, BlowupResult) {
    let x = MonoidScheme::from_affine(&AffineMonoid::free(d));
    let top = x.maximal_points()[0];
    let j = IdealSheaf { charts: BTreeMap::from([(top, identity_lattice(d))]) };
    let b = blow_up(&x, &j).unwrap();
    (x, b)
}

fn spectra_counts() -> Outcome {
    let t = Instant::now();
    for n in 1..=5 {
        let a = AffineMonoid::free(n);
        let primes = a.mspec();
        check(primes.len() == 1 << n, format!("F_{n}: {} primes", primes.len()))?;
        // Boolean lattice: faces are exactly the subsets, height = n − |face|
        let faces: BTreeSet<Vec<usize>> = primes.iter().map(|p| p.face.clone()).collect();
        check(faces.len() == 1 << n, format!("F_{n}: repeated faces"))?;
        check(primes.iter().all(|p| p.height == n - p.face.len()), format!("F_{n}: heights"))?;
        for p in &primes {
            for q in &primes {
                let sub = p.face.iter().all(|i| q.face.contains(i));
                check(q.is_subset_of(p) == sub, format!("F_{n}: order between {:?} and {:?}", p.face, q.face))?;
            }
        }
    }
    within(t, Duration::from_secs(1))?;
    Ok("2^n primes in a Boolean lattice for n = 1..5".into())
}

fn quadric_basis(gens: Vec<LatticeVector>) -> Result<Vec<LatticeVector>, String> {
    let c = RationalCone::new(2, gens).map_err(err)?;
    hilbert_basis(&c.dual(), &identity_lattice(2)).map_err(err)
}

fn quadric_example() -> Outcome {
    let hb = quadric_basis(vec![vec![0, 1], vec![1, -2]])?;
    let want = vec![vec![1, 0], vec![1, 1], vec![1, 2]];
    check(hb == want, format!("dual of cone((0,1),(1,-2)) has Hilbert basis {hb:?}, expected {want:?}"))?;
    Ok("Hilbert basis {(1,0),(1,1),(1,2)}".into())
}

fn quadric_example_corrected() -> Outcome {
    let hb = quadric_basis(vec![vec![0, 1], vec![2, -1]])?;
    let want = vec![vec![1, 0], vec![1, 1], vec![1, 2]];
    check(hb == want, format!("got {hb:?}"))?;
    Ok("dual of cone((0,1),(2,-1)) has Hilbert basis {(1,0),(1,1),(1,2)}".into())
}

fn fan_roundtrip() -> Outcome {
    let t = Instant::now();
    let corpus = fan_corpus();
    for (name, f) in &corpus {
        let x = fan::scheme_from_fan(f).map_err(err)?;
        let g = fan::fan_from_scheme(&x).map_err(|e| format!("{name}: {e}"))?;
        check(&g == f, format!("{name}: round trip changed the fan"))?;
    }
    within(t, Duration::from_secs(5))?;
    Ok(format!("{} fans recovered exactly", corpus.len()))
}

fn blowup_is_star() -> Outcome {
    for d in [2, 3] {
        let (_, b) = origin_blowup(d);
        let star = Fan::orthant(d).star_subdivision(&vec![1; d]).map_err(err)?;
        let s = fan::scheme_from_fan(&star).map_err(err)?;
        check(b.scheme.isomorphic_same_lattice(&s), format!("d = {d}: blow-up differs from the star subdivision"))?;
    }
    Ok("Bl_0 A^d ≅ star subdivision at Σe_i for d = 2, 3".into())
}

fn separatedness() -> Outcome {
    match doubled_plane().separation().map_err(err)? {
        Separation::NoGreatestLowerBound { x1, x2 } | Separation::NotSurjective { x1, x2, .. } => {
            check(x1 != x2, "violating pair is not two points")?;
        }
        Separation::Separated => return Err("doubled plane reported separated".into()),
    }
    let mut good: Vec<(String, MonoidScheme)> = vec![("P1".into(), p1()), ("P2".into(), p2())];
    let affines = [
        AffineMonoid::free(2),
        cusp(),
        monoid(2, &[&[1, 0], &[1, 1], &[1, 2]], &[]),
        monoid(2, &[&[1, 0], &[0, 1]], &[&[1, 1]]),
        monoid(2, &[&[1, 0], &[0, 1], &[0, -1]], &[]),
    ];
    for (i, a) in affines.iter().enumerate() {
        good.push((format!("affine {i}"), MonoidScheme::from_affine(a)));
    }
    for (name, x) in &good {
        check(x.is_separated().map_err(err)?, format!("{name} reported non-separated"))?;
    }
    Ok(format!("doubled plane rejected with its two charts named; {} separated schemes accepted", good.len()))
}

fn normalization() -> Outcome {
    let (n, map) = cusp().normalization().map_err(err)?;
    check(n == AffineMonoid::free(1), format!("normalization is {n:?}"))?;
    let f = morphisms::affine_morphism(&map).map_err(err)?;
    check(f.is_finite().map_err(err)? == Finiteness::Finite, "not finite")?;
    check(f.is_birational().map_err(err)?, "not birational")?;
    Ok("⟨2,3⟩ → ⟨1⟩ is finite and birational".into())
}

/// The resolution corpus: 20 singular 2-d cones and 5 singular 3-d
/// simplicial cones with ray entries ≤ 6, each with its resolved fan.
fn resolution_corpus() -> Vec<(Fan, Fan, Vec<LatticeVector>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut out = Vec::new();
    while out.len() < 20 {
        let rays = random_singular_simplicial(&mut rng, 2, 6);
        let f = Fan::from_cone(2, rays).unwrap();
        let (g, centers) = f.resolve().unwrap();
        out.push((f, g, centers));
    }
    while out.len() < 25 {
        let rays = random_singular_simplicial(&mut rng, 3, 6);
        let f = Fan::from_cone(3, rays).unwrap();
        let (g, centers) = f.resolve().unwrap();
        out.push((f, g, centers));
    }
    out
}

fn resolution_morphism(fine: &Fan, coarse: &Fan) -> SchemeMorphism {
    fan::morphism_from_fan_map(&FanMorphism::identity(fine.clone(), coarse.clone()).unwrap()).unwrap()
}

fn resolution(corpus: &[(Fan, Fan, Vec<LatticeVector>)], t: Instant) -> Outcome {
    let mut steps = 0;
    for (i, (f, g, centers)) in corpus.iter().enumerate() {
        steps += centers.len();
        for c in g.maximal_cones() {
            let rays: Vec<LatticeVector> = c.iter().map(|&r| g.rays[r].clone()).collect();
            check(rays.len() == g.rank && lattice::determinant(&lattice::big_matrix(&rays)).magnitude() == &1u32.into(), format!("cone {i}: maximal cone {rays:?} is not unimodular"))?;
        }
        check(g.is_subdivision_of(f), format!("cone {i}: not a subdivision"))?;
        match resolution_morphism(g, f).is_proper().map_err(err)? {
            Properness::Proper(c) if c.rule == "fan-criterion" => {}
            other => return Err(format!("cone {i}: properness {other:?}")),
        }
    }
    within(t, Duration::from_secs(30))?;
    Ok(format!("{} cones resolved with {steps} star subdivisions; all smooth, subdivisions, proper", corpus.len()))
}

fn factorization() -> Outcome {
    let orth = Fan::orthant(2);
    let mut found = Vec::new();
    for v in [[1, 1], [2, 1]] {
        let fine = orth.star_subdivision(&v).map_err(err)?;
        let (i, steps) = orth.factor_through(&fine, 3).map_err(err)?;
        check(i <= 3, format!("{v:?}: i = {i}"))?;
        let mut prev = orth.clone();
        for s in &steps {
            let sum = s.center.iter().fold(vec![0; 2], |acc, r| lattice::add(&acc, r));
            check(s.ray == lattice::primitive(&sum), format!("{v:?}: step ray {:?} is not the ray sum", s.ray))?;
            let center = RationalCone::new(2, s.center.clone()).map_err(err)?;
            check(center.is_smooth(), format!("{v:?}: centre {:?} is not smooth", s.center))?;
            check(s.fan == prev.star_subdivision(&s.ray).map_err(err)?, format!("{v:?}: step is not a star subdivision"))?;
            check(s.fan.is_subdivision_of(&prev), format!("{v:?}: step is not a subdivision"))?;
            prev = s.fan.clone();
        }
        check(prev == orth.iterated(i).map_err(err)?, format!("{v:?}: tower does not end at Δ^({i})"))?;
        check(prev.is_subdivision_of(&fine), format!("{v:?}: Δ^({i}) does not subdivide Δ'"))?;
        found.push(format!("{v:?}→i={i}"));
    }
    Ok(format!("towers verified step by step: {}", found.join(", ")))
}

/// Primes of `A1 ∧_A A/J` against pairs of primes of `A1` and `A/J` with
/// a common inverse image in `A`.
fn pushout_primes() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut done = 0;
    while done < 10 {
        let k1 = rng.gen_range(2..=3);
        let c = random_cone(&mut rng, 2, k1, 3, false);
        let a1 = AffineMonoid::new(2, c.generators.clone(), vec![]).unwrap();
        if !a1.units().is_empty() {
            continue;
        }
        // A ⊆ A1 generated by sums of generators of A1
        let k = rng.gen_range(1..=3);
        let a_gens: Vec<LatticeVector> = (0..k)
            .map(|_| {
                let i = rng.gen_range(0..a1.generators.len());
                let j = rng.gen_range(0..a1.generators.len());
                if rng.gen_bool(0.5) { a1.generators[i].clone() } else { lattice::add(&a1.generators[i], &a1.generators[j]) }
            })
            .collect();
        let a = AffineMonoid::new(2, a_gens, vec![]).unwrap();
        let jgen = a.generators[rng.gen_range(0..a.generators.len())].clone();
        let f = MonoidMap::new(a.clone(), a1.clone(), identity_lattice(2)).unwrap();
        let Ok(p) = pushout_closed(&f, &[jgen.clone()]) else { continue };

        // the pushout's primes, recorded by the generators of A1 on the face
        let on_face = |vs: &[LatticeVector]| -> BTreeSet<LatticeVector> {
            let face = a1.submonoid(&(0..a1.generators.len()).filter(|&i| {
                let g = &a1.generators[i];
                RationalCone::new(2, vs.to_vec()).unwrap().contains(g) && (vs.is_empty() == false || lattice::is_zero(g))
            }).collect::<Vec<_>>());
            a1.generators.iter().filter(|g| face.in_semigroup(g).unwrap()).cloned().collect()
        };
        let computed: BTreeSet<BTreeSet<LatticeVector>> = mspec_faces(&p).iter().map(|vs| on_face(vs)).collect();

        // brute force: primes of A1 and of A/J, matched by inverse images
        let aj = a.quotient_by_ideal(&[jgen.clone()]).unwrap();
        let p1s = brute_prime_sets(&a1, 40);
        let qs = brute_prime_sets(&aj, 40);
        let inverse = |m: &AffineMonoid, s: &[usize], x: &LatticeVector| !m.submonoid(s).in_semigroup(x).unwrap();
        let mut brute = BTreeSet::new();
        for s1 in &p1s {
            let pre1: Vec<bool> = a.generators.iter().map(|g| inverse(&a1, s1, g)).collect();
            if qs.iter().any(|sq| a.generators.iter().map(|g| inverse(&aj, sq, g)).collect::<Vec<_>>() == pre1) {
                brute.insert(s1.iter().map(|&i| a1.generators[i].clone()).collect::<BTreeSet<_>>());
            }
        }
        check(computed == brute, format!("A1 = {:?}, A = {:?}, J = {jgen:?}: {computed:?} vs {brute:?}", a1.generators, a.generators))?;
        done += 1;
    }
    Ok("10 random pushouts match the brute-force prime pairs".into())
}

fn height_monotonicity(corpus: &[(Fan, Fan, Vec<LatticeVector>)]) -> Outcome {
    let mut points = 0;
    for (i, (f, g, _)) in corpus.iter().enumerate() {
        let m = resolution_morphism(g, f);
        check(m.is_birational().map_err(err)?, format!("cone {i}: not birational"))?;
        check(m.check_height_monotone(), format!("cone {i}: a height goes down"))?;
        points += m.source.len();
    }
    Ok(format!("ht_Y(y) ≤ ht_X(p(y)) at all {points} points"))
}

/// The orbit-closure blow-ups along a resolution: at each step, the blow-up
/// of the current toric scheme along the closure of the orbit of the cone
/// containing the new ray in its relative interior.
fn tower_blowups(f: &Fan, centers: &[LatticeVector]) -> Vec<BlowupResult> {
    let mut out = Vec::new();
    let mut cur = f.clone();
    for v in centers {
        let x = fan::scheme_from_fan(&cur).unwrap();
        let tau = cur.cone_containing(v).unwrap();
        let j = fan::orbit_closure_ideal(&cur, &x, &cur.cones[tau]).unwrap();
        out.push(blow_up(&x, &j).unwrap());
        cur = cur.star_subdivision(v).unwrap();
    }
    out
}

fn blowup_invertibility(corpus: &[(Fan, Fan, Vec<LatticeVector>)]) -> Outcome {
    let mut n = 0;
    for d in [2, 3] {
        check(verify_inverts(&origin_blowup(d).1).map_err(err)?, format!("Bl_0 A^{d}"))?;
        n += 1;
    }
    for (i, (f, _, centers)) in corpus.iter().enumerate() {
        for b in tower_blowups(f, centers) {
            check(verify_inverts(&b).map_err(err)?, format!("cone {i}: a tower blow-up fails"))?;
            n += 1;
        }
    }
    Ok(format!("centre invertible on every chart of {n} blow-ups"))
}

fn square_corpus() -> Vec<(String, MonoidScheme)> {
    let mut out: Vec<(String, MonoidScheme)> =
        fan_corpus().into_iter().map(|(n, f)| (n, fan::scheme_from_fan(&f).unwrap())).collect();
    out.push(("quadric cone".into(), fan::scheme_from_fan(&quadric_fan()).unwrap()));
    out.push(("cone((1,0),(1,3))".into(), fan::scheme_from_fan(&Fan::from_cone(2, vec![vec![1, 0], vec![1, 3]]).unwrap()).unwrap()));
    out.push(("cusp".into(), MonoidScheme::from_affine(&cusp())));
    out.push(("axes".into(), MonoidScheme::from_affine(&monoid(2, &[&[1, 0], &[0, 1]], &[&[1, 1]]))));
    out.push(("A2".into(), MonoidScheme::from_affine(&AffineMonoid::free(2))));
    out
}

fn abstract_blowups() -> Outcome {
    let t = Instant::now();
    let mut tally: BTreeMap<String, usize> = BTreeMap::new();
    for (name, x) in square_corpus() {
        for (sq, class) in generate_squares(&x, 6).map_err(|e| format!("{name}: {e}"))? {
            check(class.class != SquareClass::Unclassified, format!("{name}: square '{}' is unclassified", sq.note))?;
            if class.class.is_abstract_blowup() {
                check(sq.complement_is_isomorphism().map_err(err)?, format!("{name}: '{}' is not an isomorphism off the centre", sq.note))?;
            }
            *tally.entry(format!("{:?}", class.class)).or_default() += 1;
        }
    }
    within(t, Duration::from_secs(10))?;
    let summary: Vec<String> = tally.iter().map(|(k, v)| format!("{v} {k}")).collect();
    Ok(summary.join(", "))
}

fn hilbert_oracle() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for i in 0..50 {
        let rank = if i % 2 == 0 { 2 } else { 3 };
        let k = rng.gen_range(rank..=rank + 1);
        let c = random_cone(&mut rng, rank, k, 6, true);
        let hb = hilbert_basis(&c, &identity_lattice(rank)).map_err(err)?;
        let oracle = box_hilbert_basis(&c);
        check(hb == oracle, format!("cone {:?}: {hb:?} vs {oracle:?}", c.rays))?;
    }
    within(t, Duration::from_secs(60))?;
    Ok("50 random cones agree with the box enumeration".into())
}

/// Draws seeded squares until `count` exist; returns the outcome tally.
fn dvm_run(f: &SchemeMorphism, seed: u64, count: usize) -> Result<BTreeMap<String, usize>, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tally = BTreeMap::new();
    let mut drawn = 0;
    for _ in 0..count * 50 {
        if drawn == count {
            break;
        }
        if let Some(sq) = f.random_dvm_square(&mut rng, 2, 4) {
            let r = f.dvm_lift_check(&sq).map_err(err)?;
            *tally.entry(format!("{r:?}")).or_insert(0) += 1;
            drawn += 1;
        }
    }
    check(drawn == count, format!("only {drawn} squares could be drawn"))?;
    Ok(tally)
}

fn dvm_battery(corpus: &[(Fan, Fan, Vec<LatticeVector>)]) -> Outcome {
    let mut proper: Vec<(String, SchemeMorphism)> = vec![
        ("P1 → pt".into(), projective_over_point_map(1)),
        ("P2 → pt".into(), projective_over_point_map(2)),
        ("Bl_0 A2 → A2".into(), origin_blowup(2).1.morphism),
        ("Bl_0 A3 → A3".into(), origin_blowup(3).1.morphism),
        ("cusp normalization".into(), morphisms::affine_morphism(&cusp().normalization().unwrap().1).unwrap()),
        ("id P2".into(), SchemeMorphism::identity(&p2())),
    ];
    for (i, (f, g, _)) in corpus.iter().enumerate().step_by(5) {
        proper.push((format!("resolution {i}"), resolution_morphism(g, f)));
    }
    for (k, (name, f)) in proper.iter().enumerate() {
        check(f.is_proper().map_err(err)?.is_proper(), format!("{name} is not certified proper"))?;
        let tally = dvm_run(f, 100 + k as u64, 100)?;
        check(tally.get("UniqueLift") == Some(&100), format!("{name}: {tally:?}"))?;
    }
    let a1 = morphisms::to_point(&MonoidScheme::from_affine(&AffineMonoid::free(1)));
    let tally = dvm_run(&a1, 99, 100)?;
    let no = tally.get(&format!("{:?}", LiftResult::NoLift)).copied().unwrap_or(0);
    check(no > 0, format!("A1 → pt never failed to lift: {tally:?}"))?;
    Ok(format!("{} proper maps × 100 squares all lift uniquely; A1 → pt: {no}/100 NoLift", proper.len()))
}

fn projective_over_point_map(n: usize) -> SchemeMorphism {
    monoid_schemes::blowup::projective_space(&point(), n).unwrap().1
}

fn main() {
    let t = Instant::now();
    let corpus = resolution_corpus();
    let corpus = &corpus;
    let criteria: Vec<(&str, &str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("1", "spectra counts", Box::new(spectra_counts)),
        ("2", "quadric example", Box::new(quadric_example)),
        ("2'", "quadric example, cone((0,1),(2,-1))", Box::new(quadric_example_corrected)),
        ("3", "fan/scheme round trip", Box::new(fan_roundtrip)),
        ("4", "blow-up is star subdivision", Box::new(blowup_is_star)),
        ("5", "separatedness", Box::new(separatedness)),
        ("6", "normalization", Box::new(normalization)),
        ("7", "resolution", Box::new(move || resolution(corpus, t))),
        ("8", "factorization", Box::new(factorization)),
        ("9", "pushout primes", Box::new(pushout_primes)),
        ("10", "height monotonicity", Box::new(move || height_monotonicity(corpus))),
        ("11", "invertibility of blow-ups", Box::new(move || blowup_invertibility(corpus))),
        ("12", "abstract blow-up verification", Box::new(abstract_blowups)),
        ("13", "Hilbert basis oracle", Box::new(hilbert_oracle)),
        ("14", "DVM soundness battery", Box::new(move || dvm_battery(corpus))),
    ];
    let mut unexpected = 0;
    for (id, name, run) in criteria {
        let start = Instant::now();
        let r = run();
        let red = KNOWN_RED.contains(&id);
        let (tag, detail) = match &r {
            Ok(d) => ("PASS", d.as_str()),
            Err(d) => ("FAIL", d.as_str()),
        };
        let note = if red { " [known red]" } else { "" };
        println!("criterion {id:>3} {tag}  {name} ({:.2?}): {detail}{note}", start.elapsed());
        if r.is_ok() == red {
            unexpected += 1;
        }
    }
    println!("acceptance: {unexpected} unexpected result(s) in {:.2?}", t.elapsed());
    if unexpected > 0 {
        std::process::exit(1);
    }
}
