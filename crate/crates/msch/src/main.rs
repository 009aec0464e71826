//! `msch`: command-line driver for monoid scheme computations.
//!
//! Documents go to stdout as JSON (or DOT for `export dot`), diagnostics to
//! stderr. Exit status: 0 success, 1 unreadable input, 2 violated
//! precondition, 3 exhausted search budget. The optional environment
//! variables `SEED` and `BUDGET` set the random seed and the node budget.

mod formats;

use clap::{Parser, Subcommand, ValueEnum};
use formats::{IdealData, MorphismData, SquareData};
use monoid_schemes::blowup::{blow_up, verify_inverts_charts};
use monoid_schemes::cdh::{generate_squares, CartesianSquare};
use monoid_schemes::fan::Fan;
use monoid_schemes::fan::FanData;
use monoid_schemes::lattice::LatticeVector;
use monoid_schemes::monoid::{self, MonoidData};
use monoid_schemes::morphisms::Properness;
use monoid_schemes::realization::{present_algebra, realize_blowup_manifest, realize_scheme_manifest, DEFAULT_DEGREE_BOUND};
use monoid_schemes::scheme::{scheme_theoretic_image, IdealSheaf, MonoidScheme, SchemeData, Separation};
use monoid_schemes::Error;
use serde::de::DeserializeOwned;
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "msch", version, about = "Monoid schemes: spectra, fans, blow-ups, cdh squares")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Operations on a monoid file.
    #[command(subcommand)]
    Monoid(MonoidCmd),
    /// Operations on a scheme file.
    #[command(subcommand)]
    Scheme(SchemeCmd),
    /// Operations on a fan file.
    #[command(subcommand)]
    Fan(FanCmd),
    /// Blow-ups of a scheme file along an ideal file.
    #[command(subcommand)]
    Blowup(BlowupCmd),
    /// Decision procedures on a morphism file.
    #[command(subcommand)]
    Morphism(MorphismCmd),
    /// Cartesian squares.
    #[command(subcommand)]
    Square(SquareCmd),
    /// k-realization data.
    #[command(subcommand)]
    Realize(RealizeCmd),
    /// Re-emit a document as DOT or canonical JSON.
    #[command(subcommand)]
    Export(ExportCmd),
}

#[derive(Subcommand)]
enum MonoidCmd {
    /// The primes of the monoid with heights.
    Mspec { file: PathBuf },
    /// The normalization.
    Normalize { file: PathBuf },
    /// The reduction (quotient by the nilradical).
    Reduce { file: PathBuf },
}

#[derive(Subcommand)]
enum SchemeCmd {
    /// Glue the charts and list points with heights.
    Build { file: PathBuf },
    /// Separatedness, with the violating pair if any.
    Separated { file: PathBuf },
    /// Smoothness per point.
    Smooth { file: PathBuf },
    /// Equivariant closure of points given by label.
    Closure {
        file: PathBuf,
        #[arg(long = "point", required = true)]
        points: Vec<String>,
    },
    /// Scheme-theoretic image of a morphism file.
    Image {
        morphism: PathBuf,
        #[arg(long, default_value_t = 6)]
        bound: usize,
    },
}

#[derive(Subcommand)]
enum FanCmd {
    /// Validate and describe a fan.
    Check { file: PathBuf },
    /// The stalk monoid (dual cone ∩ lattice) of each maximal cone.
    Dual { file: PathBuf },
    /// Star subdivision at a lattice vector, e.g. `--at 1,1`.
    Star {
        file: PathBuf,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        at: Vec<i64>,
    },
    /// Iterated barycentric subdivision.
    Barycentric {
        file: PathBuf,
        #[arg(long, default_value_t = 1)]
        times: usize,
    },
    /// A smooth subdivision by star subdivisions; centres go to stderr.
    Resolve { file: PathBuf },
    /// Factor a subdivision of a fan through iterated barycentric subdivisions.
    Factor {
        coarse: PathBuf,
        fine: PathBuf,
        #[arg(long, default_value_t = 4)]
        max_iterations: usize,
    },
}

#[derive(Subcommand)]
enum BlowupCmd {
    /// The blow-up as a scheme file (or DOT with `--dot`).
    Run {
        scheme: PathBuf,
        ideal: PathBuf,
        #[arg(long)]
        dot: bool,
    },
    /// Check that the centre pulls back to an invertible ideal on every chart.
    Verify { scheme: PathBuf, ideal: PathBuf },
}

#[derive(Subcommand)]
enum MorphismCmd {
    /// Properness with the rule that decided it.
    Proper {
        file: PathBuf,
        /// Number of random DVM squares to test in addition.
        #[arg(long, default_value_t = 0)]
        dvm: usize,
    },
    /// Finiteness, chart by chart.
    Finite { file: PathBuf },
    /// Birationality.
    Birational { file: PathBuf },
    /// Whether heights never drop along the point map: ht(y) ≤ ht(f(y)).
    Heights { file: PathBuf },
}

#[derive(Subcommand)]
enum SquareCmd {
    /// Classify the square completed from the legs `p` and `e`.
    Classify { file: PathBuf },
    /// Squares attached to a scheme file.
    Generate {
        scheme: PathBuf,
        #[arg(long, default_value_t = 4)]
        depth: usize,
    },
    /// The reduced refinement of a square.
    Reduce { file: PathBuf },
}

#[derive(Subcommand)]
enum RealizeCmd {
    /// Binomial and monomial presentation of k[A] for a monoid file.
    Present {
        file: PathBuf,
        #[arg(long, default_value_t = DEFAULT_DEGREE_BOUND)]
        bound: usize,
    },
    /// Gluing manifest for a scheme file; with `--ideal`, of its blow-up.
    Manifest {
        scheme: PathBuf,
        #[arg(long)]
        ideal: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_DEGREE_BOUND)]
        bound: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Monoid,
    Scheme,
    Fan,
}

#[derive(Subcommand)]
enum ExportCmd {
    /// DOT rendering of a scheme's point poset or a fan's cone poset.
    Dot { kind: Kind, file: PathBuf },
    /// Canonical JSON of a monoid, scheme or fan file.
    Json { kind: Kind, file: PathBuf },
}

/// Failure of a command: unreadable input or a library error.
enum Failure {
    Parse(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Parse(_) => 1,
            Failure::Lib(e) => e.exit_code() as u8,
        }
    }

    fn document(&self) -> Value {
        match self {
            Failure::Parse(m) => json!({ "error": { "kind": "parse", "message": m } }),
            Failure::Lib(e) => json!({ "error": { "kind": format!("{e:?}").split(['(', ' ']).next(), "message": e.to_string() } }),
        }
    }
}

enum Output {
    Json(Value),
    Text(String),
}

type Run = std::result::Result<Output, Failure>;

fn read<T: DeserializeOwned>(path: &Path) -> std::result::Result<T, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Parse(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Parse(format!("{}: {e}", path.display())))
}

fn to_value<T: serde::Serialize>(t: &T) -> Value {
    serde_json::to_value(t).expect("serializable")
}

/// Chart index of a maximal point in the scheme's own file form.
fn chart_index(x: &MonoidScheme, p: usize) -> usize {
    x.maximal_points().iter().position(|&q| q == p).unwrap_or(p)
}

fn ideal_document(x: &MonoidScheme, j: &IdealSheaf) -> Value {
    let d: IdealData = j.charts.iter().map(|(&p, g)| (chart_index(x, p).to_string(), g.clone())).collect();
    to_value(&d)
}

fn points_document(x: &MonoidScheme) -> Value {
    let h = x.heights();
    let pts: Vec<Value> = (0..x.len())
        .map(|p| {
            json!({
                "label": x.label(p),
                "height": h[p],
                "stalk": x.stalk(p).to_data(),
                "generizations": x.below(p).into_iter().filter(|&q| q != p).map(|q| x.label(q).to_string()).collect::<Vec<_>>(),
            })
        })
        .collect();
    json!({ "points": pts, "dimension": x.dimension() })
}

fn fan_summary(f: &Fan) -> Value {
    let mut by_dim: BTreeMap<usize, usize> = BTreeMap::new();
    for i in 0..f.cones.len() {
        *by_dim.entry(f.cone(i).dim()).or_default() += 1;
    }
    json!({
        "valid": true,
        "rank": f.rank,
        "dimension": f.dim(),
        "rays": f.rays.len(),
        "cones_by_dimension": by_dim,
        "smooth": f.is_smooth(),
        "simplicial": f.is_simplicial(),
    })
}

fn square(file: &Path) -> std::result::Result<CartesianSquare, Failure> {
    let d: SquareData = read(file)?;
    let p = formats::morphism(&d.p)?;
    let e = formats::morphism(&d.e)?;
    Ok(CartesianSquare::from_legs(p, e, &file.display().to_string())?)
}

fn seed() -> u64 {
    std::env::var("SEED").ok().and_then(|s| s.parse().ok()).unwrap_or(0)
}

fn run(cmd: Command) -> Run {
    let out = match cmd {
        Command::Monoid(c) => match c {
            MonoidCmd::Mspec { file } => {
                let a = formats::monoid(&read::<MonoidData>(&file)?)?;
                let primes: Vec<Value> = a
                    .mspec()
                    .iter()
                    .map(|p| json!({ "face": p.face, "height": p.height, "generators": a.prime_generators(p) }))
                    .collect();
                Output::Json(json!({ "count": primes.len(), "dimension": a.dimension(), "primes": primes }))
            }
            MonoidCmd::Normalize { file } => {
                let a = formats::monoid(&read::<MonoidData>(&file)?)?;
                Output::Json(to_value(&a.normalization()?.0.to_data()))
            }
            MonoidCmd::Reduce { file } => {
                let a = formats::monoid(&read::<MonoidData>(&file)?)?;
                Output::Json(to_value(&a.reduce()?.to_data()))
            }
        },
        Command::Scheme(c) => match c {
            SchemeCmd::Build { file } => {
                let x = formats::scheme(&read::<SchemeData>(&file)?)?;
                Output::Json(points_document(&x))
            }
            SchemeCmd::Separated { file } => {
                let x = formats::scheme(&read::<SchemeData>(&file)?)?;
                let s = x.separation()?;
                let violation = match &s {
                    Separation::Separated => Value::Null,
                    other => to_value(other),
                };
                Output::Json(json!({ "separated": s.is_separated(), "violation": violation }))
            }
            SchemeCmd::Smooth { file } => {
                let x = formats::scheme(&read::<SchemeData>(&file)?)?;
                let sp = x.smooth_points()?;
                let singular: Vec<&str> = (0..x.len()).filter(|&p| !sp[p]).map(|p| x.label(p)).collect();
                Output::Json(json!({ "smooth": singular.is_empty(), "singular_points": singular }))
            }
            SchemeCmd::Closure { file, points } => {
                let x = formats::scheme(&read::<SchemeData>(&file)?)?;
                let mut pts = Vec::new();
                for l in &points {
                    let p = (0..x.len())
                        .find(|&p| x.label(p) == l)
                        .ok_or_else(|| Failure::Lib(Error::Invalid(format!("no point labelled {l}"))))?;
                    pts.push(p);
                }
                let (z, j) = x.equivariant_closure(&pts)?;
                Output::Json(json!({ "ideal": ideal_document(&x, &j), "closure": z.to_data() }))
            }
            SchemeCmd::Image { morphism, bound } => {
                let f = formats::morphism(&read::<MorphismData>(&morphism)?)?;
                let (z, _) = scheme_theoretic_image(&f, bound)?;
                Output::Json(to_value(&z.to_data()))
            }
        },
        Command::Fan(c) => match c {
            FanCmd::Check { file } => Output::Json(fan_summary(&formats::fan(&read::<FanData>(&file)?)?)),
            FanCmd::Dual { file } => {
                let f = formats::fan(&read::<FanData>(&file)?)?;
                let x = monoid_schemes::fan::scheme_from_fan(&f)?;
                let xs = monoid_schemes::fan::fan_from_scheme(&x).ok();
                let maximal = f.maximal_cones();
                let mut cones = Vec::new();
                for (i, c) in f.cones.iter().enumerate().filter(|(_, c)| maximal.contains(c)) {
                    let a = monoid::saturated_monoid(&f.cone(i).dual(), &identity_lattice(f.rank))?;
                    cones.push(json!({ "cone": c, "monoid": a.to_data() }));
                }
                Output::Json(json!({ "cones": cones, "round_trip": xs.map(|g| g == f) }))
            }
            FanCmd::Star { file, at } => {
                let f = formats::fan(&read::<FanData>(&file)?)?;
                Output::Json(to_value(&f.star_subdivision(&at)?.to_data()))
            }
            FanCmd::Barycentric { file, times } => {
                let f = formats::fan(&read::<FanData>(&file)?)?;
                Output::Json(to_value(&f.iterated(times)?.to_data()))
            }
            FanCmd::Resolve { file } => {
                let f = formats::fan(&read::<FanData>(&file)?)?;
                let (g, centers) = f.resolve()?;
                eprintln!("centres: {centers:?}");
                Output::Json(to_value(&g.to_data()))
            }
            FanCmd::Factor { coarse, fine, max_iterations } => {
                let c = formats::fan(&read::<FanData>(&coarse)?)?;
                let f = formats::fan(&read::<FanData>(&fine)?)?;
                let (i, steps) = c.factor_through(&f, max_iterations)?;
                let steps: Vec<Value> = steps.iter().map(|s| json!({ "center": s.center, "ray": s.ray })).collect();
                Output::Json(json!({ "iterations": i, "steps": steps }))
            }
        },
        Command::Blowup(c) => match c {
            BlowupCmd::Run { scheme, ideal, dot } => {
                let x = formats::scheme(&read::<SchemeData>(&scheme)?)?;
                let j = formats::ideal_sheaf(&x, &read::<IdealData>(&ideal)?)?;
                let b = blow_up(&x, &j)?;
                if dot {
                    Output::Text(b.scheme.to_dot())
                } else {
                    Output::Json(to_value(&b.scheme.to_data()))
                }
            }
            BlowupCmd::Verify { scheme, ideal } => {
                let x = formats::scheme(&read::<SchemeData>(&scheme)?)?;
                let j = formats::ideal_sheaf(&x, &read::<IdealData>(&ideal)?)?;
                let b = blow_up(&x, &j)?;
                let per = verify_inverts_charts(&b)?;
                Output::Json(json!({ "inverts": per.iter().all(|&v| v), "per_chart": per }))
            }
        },
        Command::Morphism(c) => match c {
            MorphismCmd::Proper { file, dvm } => {
                let f = formats::morphism(&read::<MorphismData>(&file)?)?;
                let p = f.is_proper()?;
                let (verdict, cert) = match &p {
                    Properness::Proper(c) => ("proper", to_value(c)),
                    Properness::NotProper(c) => ("not_proper", to_value(c)),
                    Properness::Unknown => ("unknown", Value::Null),
                };
                let battery = if dvm > 0 { to_value(&f.dvm_battery(seed(), dvm, 2, 3)?) } else { Value::Null };
                Output::Json(json!({ "proper": verdict, "certificate": cert, "dvm": battery }))
            }
            MorphismCmd::Finite { file } => {
                let f = formats::morphism(&read::<MorphismData>(&file)?)?;
                Output::Json(json!({ "finite": to_value(&f.is_finite()?) }))
            }
            MorphismCmd::Birational { file } => {
                let f = formats::morphism(&read::<MorphismData>(&file)?)?;
                Output::Json(json!({ "birational": f.is_birational()? }))
            }
            MorphismCmd::Heights { file } => {
                let f = formats::morphism(&read::<MorphismData>(&file)?)?;
                let hy = f.source.heights();
                let hx = f.target.heights();
                let pairs: Vec<Value> = (0..f.source.len())
                    .map(|y| json!([f.source.label(y), hy[y], f.target.label(f.point_map[y]), hx[f.point_map[y]]]))
                    .collect();
                Output::Json(json!({ "monotone": f.check_height_monotone(), "heights": pairs }))
            }
        },
        Command::Square(c) => match c {
            SquareCmd::Classify { file } => {
                let sq = square(&file)?;
                let class = sq.classify()?;
                Output::Json(json!({ "class": to_value(&class.class), "certificates": class.certificates }))
            }
            SquareCmd::Generate { scheme, depth } => {
                let x = formats::scheme(&read::<SchemeData>(&scheme)?)?;
                let sqs: Vec<Value> = generate_squares(&x, depth)?.iter().map(|(s, c)| s.to_json(Some(c))).collect();
                Output::Json(json!({ "squares": sqs }))
            }
            SquareCmd::Reduce { file } => {
                let r = square(&file)?.reduced_refinement()?;
                let class = r.classify()?;
                Output::Json(r.to_json(Some(&class)))
            }
        },
        Command::Realize(c) => match c {
            RealizeCmd::Present { file, bound } => {
                let a = formats::monoid(&read::<MonoidData>(&file)?)?;
                let p = present_algebra(&a, bound)?;
                let mut v = to_value(&p);
                v["relations"] = to_value(&p.relations());
                Output::Json(v)
            }
            RealizeCmd::Manifest { scheme, ideal, bound } => {
                let x = formats::scheme(&read::<SchemeData>(&scheme)?)?;
                match ideal {
                    Some(i) => {
                        let j = formats::ideal_sheaf(&x, &read::<IdealData>(&i)?)?;
                        Output::Json(realize_blowup_manifest(&blow_up(&x, &j)?, bound)?)
                    }
                    None => Output::Json(realize_scheme_manifest(&x, bound)?),
                }
            }
        },
        Command::Export(c) => match c {
            ExportCmd::Dot { kind, file } => match kind {
                Kind::Scheme => Output::Text(formats::scheme(&read::<SchemeData>(&file)?)?.to_dot()),
                Kind::Fan => Output::Text(formats::fan(&read::<FanData>(&file)?)?.to_dot()),
                Kind::Monoid => {
                    let a = formats::monoid(&read::<MonoidData>(&file)?)?;
                    Output::Text(MonoidScheme::from_affine(&a).to_dot())
                }
            },
            ExportCmd::Json { kind, file } => match kind {
                Kind::Monoid => Output::Json(to_value(&formats::monoid(&read::<MonoidData>(&file)?)?.to_data())),
                Kind::Scheme => Output::Json(to_value(&formats::scheme(&read::<SchemeData>(&file)?)?.to_data())),
                Kind::Fan => Output::Json(to_value(&formats::fan(&read::<FanData>(&file)?)?.to_data())),
            },
        },
    };
    Ok(out)
}

fn identity_lattice(n: usize) -> Vec<LatticeVector> {
    (0..n).map(|i| monoid_schemes::lattice::unit(n, i)).collect()
}

/// Writes a document to stdout; a closed pipe is not an error.
fn emit(s: &str) {
    let _ = std::io::stdout().lock().write_all(s.as_bytes());
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(b) = std::env::var("BUDGET").ok().and_then(|s| s.parse().ok()) {
        monoid::set_node_budget(b);
    }
    match run(cli.command) {
        Ok(Output::Json(v)) => {
            emit(&format!("{}\n", serde_json::to_string_pretty(&v).expect("serializable")));
            ExitCode::SUCCESS
        }
        Ok(Output::Text(t)) => {
            emit(&t);
            ExitCode::SUCCESS
        }
        Err(f) => {
            if let Failure::Lib(e) = &f {
                eprintln!("msch: {e}");
            } else if let Failure::Parse(m) = &f {
                eprintln!("msch: {m}");
            }
            emit(&format!("{}\n", serde_json::to_string_pretty(&f.document()).expect("serializable")));
            ExitCode::from(f.exit_code())
        }
    }
}
