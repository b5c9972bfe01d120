use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use tropzar::charp_curves::{
    analyze_singularities, intersect_oracle, intersect_sq, pullback, severi_numerology, singular_count_sqprime, CharpError,
    Character, ParamCurveCharP,
};
use tropzar::deformation::{
    certify_bound, classify_equality, default_beta, deformation_space, deformation_space_oriented, Orientation,
};
use tropzar::enumeration::{enumerate_types, DegreeSpec, EnumerationOptions};
use tropzar::field::{prime_power, Gf};
use tropzar::lattice_toric::{polygon_report, LatticePolygon, LatticeVec, SurfaceVariant};
use tropzar::trop_rational::{tropicalize, MarkedRationalMap};
use tropzar::tropical_curve::{degree, degree_to_json, edge_report, to_svg, validate, BBox, ParamTropCurve};
use tropzar::verify::{verify_paper, VerifyConfig};

/// Largest field on which `charp thm41` runs the exhaustive intersection scan by default.
const ORACLE_FIELD_LIMIT: u64 = 125;

#[derive(Parser)]
#[command(name = "tropzar", version, about = "Exact tropical curve and finite-field curve toolkit")]
struct Cli {
    /// Worker threads for parallel enumeration and oracle scans.
    #[arg(long, global = true, env = "TROPZAR_JOBS", default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    jobs: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Lattice polygon invariants and the dual fan.
    Polytope {
        #[arg(long)]
        file: PathBuf,
        /// Emit the full report (the default output lists vertices only).
        #[arg(long)]
        report: bool,
    },
    /// Validate, inspect or plot a parametrized tropical curve.
    Curve {
        #[arg(value_enum)]
        action: CurveAction,
        #[arg(long)]
        file: PathBuf,
        /// Plot window `xmin,ymin,xmax,ymax`.
        #[arg(long, allow_hyphen_values = true)]
        bbox: Option<String>,
        /// Write the SVG here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// The space of deformations preserving the combinatorial type.
    Deform {
        #[arg(long)]
        file: PathBuf,
        #[arg(long)]
        orient: Option<PathBuf>,
    },
    /// Trace the dimension-bound argument for `k` marked points.
    Certify {
        #[arg(long)]
        file: PathBuf,
        #[arg(long)]
        k: usize,
        /// JSON list of end names constrained to lines.
        #[arg(long)]
        alpha: Option<PathBuf>,
        /// JSON list of free end names (default: every unmarked end outside alpha).
        #[arg(long)]
        beta: Option<PathBuf>,
    },
    /// Enumerate combinatorial types of a given degree and genus.
    Enumerate {
        #[arg(long)]
        degree: PathBuf,
        #[arg(long)]
        genus: usize,
        /// Types have fewer than this many ends.
        #[arg(long)]
        ends: usize,
        #[arg(long, default_value_t = 0)]
        allow_contracted: usize,
        #[arg(long)]
        max_candidates: Option<usize>,
        #[arg(long)]
        allow_large: bool,
    },
    /// Tropicalize a marked rational map.
    Tropicalize {
        #[arg(long)]
        file: PathBuf,
        #[arg(long)]
        plot: Option<PathBuf>,
    },
    /// Curves on the finite-characteristic surfaces.
    Charp {
        #[command(subcommand)]
        command: CharpCommand,
    },
    /// Run every golden test and property suite.
    VerifyPaper {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Restrict to these checks (repeatable or comma separated).
        #[arg(long, value_delimiter = ',')]
        only: Vec<String>,
        #[arg(long)]
        p: Option<u64>,
        #[arg(long)]
        r: Option<u32>,
        /// Replacement golden file.
        #[arg(long)]
        golden: Option<PathBuf>,
        /// Also write the JSON report here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum CurveAction {
    Validate,
    Degree,
    Plot,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    S,
    Sprime,
}

#[derive(Subcommand)]
enum CharpCommand {
    /// A curve on `S_q`: its singular point and, given a second character, the intersection.
    Thm41 {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        r: u32,
        /// Degree of the working field over F_p (default r + 1).
        #[arg(long)]
        n: Option<u32>,
        /// Character values `chi(e1),chi(e2)` as field elements.
        #[arg(long, default_value = "1,1")]
        chi: String,
        /// Second character; adds the intersection report.
        #[arg(long)]
        chi2: Option<String>,
    },
    /// A curve on `S'_q`: its singular points and the genus budget.
    Thm42 {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        r: u32,
        #[arg(long)]
        xi: String,
        /// Degree of the working field over F_p (default 2r).
        #[arg(long)]
        n: Option<u32>,
        #[arg(long, default_value = "1,1")]
        chi: String,
    },
    /// Dimension bookkeeping for the reducible Severi varieties.
    Severi {
        #[arg(long)]
        d: i64,
        #[arg(long)]
        p: u64,
        #[arg(long)]
        r: u32,
        #[arg(long)]
        genus: i64,
        #[arg(long, value_enum)]
        variant: VariantArg,
    },
}

enum Failure {
    /// A check ran and failed (exit 1).
    Check(String),
    /// Bad input data or an unreadable file (exit 3).
    Input(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Input(e)
    }
}

fn read_json(path: &Path) -> anyhow::Result<Value> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn write_file(path: &Path, text: &str) -> anyhow::Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn print_json(v: &Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("JSON values serialize"));
}

fn load_curve(path: &Path) -> anyhow::Result<ParamTropCurve> {
    ParamTropCurve::from_json(&read_json(path)?).with_context(|| format!("curve in {}", path.display()))
}

fn load_polygon(path: &Path) -> anyhow::Result<LatticePolygon> {
    let v = read_json(path)?;
    let verts = v
        .get("vertices")
        .and_then(Value::as_array)
        .ok_or_else(|| anyhow!("{}: missing array \"vertices\"", path.display()))?
        .iter()
        .map(|p| match p.as_array().map(|a| a.iter().map(Value::as_i64).collect::<Vec<_>>()) {
            Some(xy) if xy.len() == 2 && xy.iter().all(Option::is_some) => Ok(LatticeVec::new(xy[0].unwrap(), xy[1].unwrap())),
            _ => Err(anyhow!("{}: vertices must be integer pairs", path.display())),
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    LatticePolygon::new(verts).with_context(|| format!("polygon in {}", path.display()))
}

fn load_names(path: &Path) -> anyhow::Result<Vec<String>> {
    let v = read_json(path)?;
    v.as_array()
        .ok_or_else(|| anyhow!("{}: expected a JSON list of end names", path.display()))?
        .iter()
        .map(|x| match x {
            Value::String(s) => Ok(s.clone()),
            Value::Number(n) => Ok(n.to_string()),
            _ => Err(anyhow!("{}: end names must be strings", path.display())),
        })
        .collect()
}

fn parse_character(f: &Gf, s: &str) -> anyhow::Result<Character> {
    let parts: Vec<&str> = s.split(',').collect();
    let [a, b] = parts[..] else { bail!("a character is given as two field elements `a,b`, got {s:?}") };
    Ok(Character::new(f.parse(a.trim())?, f.parse(b.trim())?)?)
}

fn field_for(p: u64, n: u32) -> anyhow::Result<Gf> {
    Gf::new(p, n).with_context(|| format!("field F_{p}^{n}"))
}

fn prime_power_of(p: u64, r: u32) -> anyhow::Result<u64> {
    if r == 0 {
        bail!("r must be at least 1");
    }
    let q = p.checked_pow(r).ok_or_else(|| anyhow!("{p}^{r} overflows"))?;
    prime_power(q).filter(|&(pp, _)| pp == p).ok_or_else(|| anyhow!("{p} is not prime"))?;
    Ok(q)
}

fn pullback_json(c: &ParamCurveCharP) -> Value {
    let f = &c.field;
    json!({
        "e1": pullback(c, LatticeVec::new(1, 0)).display(f),
        "e2": pullback(c, LatticeVec::new(0, 1)).display(f),
    })
}

fn run(cli: Cli) -> Result<(), Failure> {
    let jobs = cli.jobs as usize;
    match cli.command {
        Command::Polytope { file, report } => {
            let p = load_polygon(&file)?;
            if report {
                print_json(&polygon_report(&p));
            } else {
                print_json(&p.to_json());
            }
        }
        Command::Curve { action, file, bbox, out } => {
            let c = load_curve(&file)?;
            match action {
                CurveAction::Validate => {
                    let rep = validate(&c);
                    print_json(&rep.to_json());
                    if !rep.is_valid() {
                        return Err(Failure::Check(format!("{} is not a valid tropical curve", file.display())));
                    }
                }
                CurveAction::Degree => {
                    let deg = degree(&c).map_err(anyhow::Error::from)?;
                    print_json(&json!({"degree": degree_to_json(&deg), "edges": edge_report(&c)}));
                }
                CurveAction::Plot => {
                    let bb = match bbox {
                        Some(s) => BBox::parse(&s).ok_or_else(|| anyhow!("bad --bbox {s:?}; expected xmin,ymin,xmax,ymax"))?,
                        None => BBox::around(&c),
                    };
                    let svg = to_svg(&c, &bb);
                    match out {
                        Some(path) => write_file(&path, &svg)?,
                        None => print!("{svg}"),
                    }
                }
            }
        }
        Command::Deform { file, orient } => {
            let c = load_curve(&file)?;
            let ds = match orient {
                Some(o) => {
                    let o = Orientation::from_json(&c, &read_json(&o)?).map_err(anyhow::Error::from)?;
                    deformation_space_oriented(&c, &o)
                }
                None => deformation_space(&c),
            }
            .map_err(anyhow::Error::from)?;
            print_json(&ds.to_json(&c));
        }
        Command::Certify { file, k, alpha, beta } => {
            let c = load_curve(&file)?;
            let alpha = alpha.map(|p| load_names(&p)).transpose()?.unwrap_or_default();
            let beta = match beta {
                Some(p) => load_names(&p)?,
                None => default_beta(&c, k, &alpha),
            };
            let cert = certify_bound(&c, k, &alpha, &beta).map_err(anyhow::Error::from)?;
            let mut out = cert.to_json();
            if cert.bound == k as i64 {
                let eq = classify_equality(&c, k, &alpha, &beta).map_err(anyhow::Error::from)?;
                out["equality_case"] = eq.to_json();
            }
            print_json(&out);
        }
        Command::Enumerate { degree, genus, ends, allow_contracted, max_candidates, allow_large } => {
            let d = DegreeSpec::from_json(&read_json(&degree)?).map_err(anyhow::Error::from)?;
            let opts = EnumerationOptions { allow_contracted, jobs, max_candidates, allow_large };
            let res = enumerate_types(&d, genus, ends, &opts).map_err(anyhow::Error::from)?;
            let mut out = res.to_json();
            out["degree"] = d.to_json();
            print_json(&out);
        }
        Command::Tropicalize { file, plot } => {
            let map = MarkedRationalMap::from_json(&read_json(&file)?).with_context(|| format!("ratmap in {}", file.display()))?;
            let c = tropicalize(&map).map_err(anyhow::Error::from)?;
            if let Some(path) = plot {
                write_file(&path, &to_svg(&c, &BBox::around(&c)))?;
            }
            print_json(&c.to_json());
        }
        Command::Charp { command } => run_charp(command)?,
        Command::VerifyPaper { seed, only, p, r, golden, out } => {
            let mut cfg = VerifyConfig::new(seed);
            cfg.jobs = jobs;
            cfg.only = only;
            cfg.p = p;
            cfg.r = r;
            if let Some(path) = golden {
                let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
                cfg = cfg.with_golden_text(&text).with_context(|| format!("golden file {}", path.display()))?;
            }
            let report = verify_paper(&cfg).map_err(anyhow::Error::from)?;
            let text = serde_json::to_string_pretty(&report.to_json()).expect("JSON values serialize");
            if let Some(path) = out {
                write_file(&path, &text)?;
            }
            println!("{text}");
            for line in report.summary_lines() {
                eprintln!("{line}");
            }
            if !report.all_pass() {
                return Err(Failure::Check("at least one check failed".into()));
            }
        }
    }
    Ok(())
}

fn run_charp(command: CharpCommand) -> Result<(), Failure> {
    match command {
        CharpCommand::Thm41 { p, r, n, chi, chi2 } => {
            let q = prime_power_of(p, r)?;
            let f = field_for(p, n.unwrap_or(r + 1))?;
            let c = ParamCurveCharP::sq(&f, q, parse_character(&f, &chi)?).map_err(anyhow::Error::from)?;
            let sing = analyze_singularities(&c).map_err(anyhow::Error::from)?;
            let mut out = json!({
                "field": {"p": p, "degree": f.degree(), "size": f.size()},
                "q": q,
                "pullbacks": pullback_json(&c),
                "singularities": sing.to_json(&f),
            });
            if let Some(s) = chi2 {
                let c2 = ParamCurveCharP::sq(&f, q, parse_character(&f, &s)?).map_err(anyhow::Error::from)?;
                let x = intersect_sq(&c, &c2).map_err(anyhow::Error::from)?;
                out["intersection"] = x.to_json(&f);
                if f.size() <= ORACLE_FIELD_LIMIT {
                    let pts = intersect_oracle(&c, &c2);
                    out["intersection_oracle"] = json!({
                        "points": pts.iter().map(|(a, b)| json!([f.display(*a), f.display(*b)])).collect::<Vec<_>>(),
                        "agrees": pts == vec![(x.s, x.s_prime)],
                    });
                }
            }
            print_json(&out);
        }
        CharpCommand::Thm42 { p, r, xi, n, chi } => {
            let q = prime_power_of(p, r)?;
            let f = field_for(p, n.unwrap_or(2 * r))?;
            let xi = f.parse(xi.trim()).map_err(anyhow::Error::from)?;
            let c = ParamCurveCharP::sq_prime(&f, q, xi, parse_character(&f, &chi)?).map_err(anyhow::Error::from)?;
            let count = singular_count_sqprime(&c).map_err(anyhow::Error::from)?;
            let sing = analyze_singularities(&c).map_err(anyhow::Error::from)?;
            print_json(&json!({
                "field": {"p": p, "degree": f.degree(), "size": f.size()},
                "q": q,
                "xi": f.display(xi),
                "pullbacks": pullback_json(&c),
                "singular_count": count,
                "singularities": sing.to_json(&f),
            }));
        }
        CharpCommand::Severi { d, p, r, genus, variant } => {
            let q = prime_power_of(p, r)?;
            let variant = match variant {
                VariantArg::S => SurfaceVariant::Triangle,
                VariantArg::Sprime => SurfaceVariant::Parallelogram,
            };
            match severi_numerology(d, q, genus, variant) {
                Ok(rep) => print_json(&rep.to_json()),
                Err(CharpError::GenusOutOfRange { g, failing }) => {
                    print_json(&json!({"error": "genus out of range", "genus": g, "failing_bounds": failing}));
                    return Err(Failure::Input(anyhow!("genus {g} is outside the admissible range: {}", failing.join(", "))));
                }
                Err(e) => return Err(Failure::Input(e.into())),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    // a second pool initialisation can only fail if one already exists
    let _ = rayon::ThreadPoolBuilder::new().num_threads(cli.jobs as usize).build_global();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(msg)) => {
            eprintln!("check failed: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(3)
        }
    }
}
