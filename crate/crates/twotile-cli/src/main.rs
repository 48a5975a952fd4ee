use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use twotile::curve::{
    expansion_for_spec, find_candidate_curves_with, iterate_curve, Curve, ReplacementSpec, SearchOptions, DEFAULT_MAX_STEPS,
};
use twotile::engine::{generate, sft_matrix, Address, Tower};
use twotile::fixtures::{fixture, Fixture};
use twotile::measure::{enumerate_counts, entropy_report, measure_model};
use twotile::metrics::{ahlfors_exponent, brute_force_Dn, compute_Dn, expansion_report, orbit_report, ChainMetric};
use twotile::render::{export_json, render_svg};
use twotile::rule::{Diagnostic, RuleError};
use twotile::scalar::{parse_rational, rational_string, ExactScalar, Rational};
use twotile::{OrientedComplex, SubdivisionRule};

#[derive(Parser)]
#[command(name = "twotile", version, about = "Two-tile subdivision rules: generation, invariants and rendering")]
struct Cli {
    /// Print errors as JSON objects on stderr.
    #[arg(long, global = true)]
    json_errors: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a rule and print its diagnostics.
    Validate { rule: String },
    /// Generate level N and print it as JSON.
    Gen {
        rule: String,
        #[arg(long)]
        level: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cell counts of level N with the closed-form cross-check.
    Stats {
        rule: String,
        #[arg(long)]
        level: usize,
    },
    /// The values D_1..D_N.
    Dn {
        rule: String,
        #[arg(long)]
        max: usize,
        /// Also run the brute-force search and compare.
        #[arg(long)]
        oracle: bool,
    },
    /// Expansion report with the bounds on the expansion factor.
    Lambda0 {
        rule: String,
        #[arg(long)]
        max: usize,
    },
    /// Tile masses of the measure of maximal entropy.
    Measure {
        rule: String,
        #[arg(long)]
        level: usize,
        /// Address such as `w.3.7` (root color, then D¹ tile ids).
        #[arg(long)]
        address: Option<String>,
    },
    /// Orbit map, local degrees and periodic critical points.
    Degrees {
        rule: String,
        #[arg(long)]
        lambda: Option<f64>,
    },
    /// Transition matrix of the subshift, optionally as a DOT digraph.
    Sft {
        rule: String,
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Iterate a replacement spec (a file, or `identity`).
    Curve {
        rule: String,
        #[arg(long)]
        spec: String,
        #[arg(long)]
        iters: usize,
    },
    /// Simple closed curves through the base vertices in a 1-skeleton.
    FindCurves {
        rule: String,
        #[arg(long, default_value_t = 1)]
        level: usize,
        #[arg(long)]
        filter_joins: bool,
        /// Keep only curves whose arcs each stay in one 0-tile.
        #[arg(long)]
        single_host: bool,
        #[arg(long, default_value_t = 100)]
        max: usize,
    },
    /// Sampled m-values and chain distances with the bound check.
    Metric {
        rule: String,
        #[arg(long)]
        level: usize,
        /// Rational such as `2` or `3/2`.
        #[arg(long)]
        lambda: String,
        #[arg(long, default_value_t = 2000)]
        samples: usize,
    },
    /// Two-panel SVG of level N.
    Render {
        rule: String,
        #[arg(long)]
        level: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

struct Failure {
    exit: u8,
    code: String,
    message: String,
    diagnostics: Vec<Diagnostic>,
}

impl Failure {
    fn new(code: &str, message: impl Into<String>) -> Self {
        let exit = match code {
            "ResourceLimit" => 3,
            "Usage" | "UnknownFixture" | "BadGridParams" | "Io" | "BadArgument" => 2,
            _ => 1,
        };
        Self { exit, code: code.to_string(), message: message.into(), diagnostics: Vec::new() }
    }

    fn report(&self, json_errors: bool) {
        if json_errors {
            let diags: Vec<Value> =
                self.diagnostics.iter().map(|d| json!({"code": d.code, "message": d.message, "line": d.line})).collect();
            eprintln!("{}", json!({"error": self.code, "message": self.message, "diagnostics": diags}));
        } else {
            eprintln!("error: {}: {}", self.code, self.message);
            for d in &self.diagnostics {
                eprintln!("{d}");
            }
        }
    }
}

macro_rules! fail_from {
    ($($t:ty),*) => {$(
        impl From<$t> for Failure {
            fn from(e: $t) -> Self {
                Failure::new(e.code(), e.to_string())
            }
        }
    )*};
}

fail_from!(
    twotile::engine::EngineError,
    twotile::metrics::MetricsError,
    twotile::measure::MeasureError,
    twotile::curve::CurveError,
    twotile::render::RenderError,
    twotile::fixtures::FixtureError
);

impl From<RuleError> for Failure {
    fn from(e: RuleError) -> Self {
        let diagnostics = e.diagnostics();
        let code = diagnostics.first().map_or("InvalidRule", |d| d.code);
        Failure { diagnostics, ..Failure::new(code, e.to_string()) }
    }
}

fn io_error(path: &Path, e: std::io::Error) -> Failure {
    Failure::new("Io", format!("{}: {e}", path.display()))
}

enum Input {
    Rule(Box<SubdivisionRule>),
    Skeleton(OrientedComplex, Vec<usize>),
}

fn load(arg: &str) -> Result<Input, Failure> {
    let path = Path::new(arg);
    if path.is_file() {
        let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
        return Ok(Input::Rule(Box::new(SubdivisionRule::parse(&text)?)));
    }
    match fixture(arg)? {
        Fixture::Rule(r) => Ok(Input::Rule(r)),
        Fixture::Skeleton(s) => Ok(Input::Skeleton(s.complex, s.marked)),
    }
}

fn load_rule(arg: &str) -> Result<SubdivisionRule, Failure> {
    match load(arg)? {
        Input::Rule(r) => Ok(*r),
        Input::Skeleton(..) => Err(Failure::new("Usage", format!("`{arg}` is a skeleton, not a rule"))),
    }
}

fn write_out(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| io_error(path, e))
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("json values serialize")
}

fn run(cmd: Command) -> Result<String, Failure> {
    let mut buf = String::new();
    macro_rules! say {
        ($($arg:tt)*) => {
            writeln!(buf, $($arg)*).expect("writing to a string")
        };
    }
    match cmd {
        Command::Validate { rule } => {
            let r = load_rule(&rule)?;
            let c = r.counts();
            say!("ok: {} k={} deg={} tiles={} (w1={}, b1={}, w1'={}, b1'={})", r.name(), r.k(), r.deg(), r.d1().tile_count(), c.ww, c.wb, c.bw, c.bb);
        }
        Command::Gen { rule, level, out } => {
            let r = load_rule(&rule)?;
            let json = export_json(&generate(&r, level)?, &r);
            match out {
                Some(p) => write_out(&p, &json)?,
                None => buf.push_str(&json),
            }
        }
        Command::Stats { rule, level } => {
            let r = load_rule(&rule)?;
            let l = generate(&r, level)?;
            let c = &l.complex;
            let d = (r.deg() as u64).pow(level as u32);
            let k = r.k() as u64;
            let formulas = c.tile_count() as u64 == 2 * d && c.edge_count() as u64 == k * d && c.vertex_count() as u64 == (k - 2) * d + 2;
            let closed = measure_model(&r).closed_form_counts(level)? == enumerate_counts(&l);
            say!("rule {}", r.name());
            say!("level {level}");
            say!("tiles {}", c.tile_count());
            say!("edges {}", c.edge_count());
            say!("vertices {}", c.vertex_count());
            say!("count formulas {}", if formulas { "OK" } else { "FAILED" });
            say!("closed-form {}", if closed { "OK" } else { "FAILED" });
            if !(formulas && closed) {
                return Err(Failure::new("CountMismatch", "counts disagree with the formulas"));
            }
        }
        Command::Dn { rule, max, oracle } => {
            let r = load_rule(&rule)?;
            let mut mismatch = false;
            for n in 1..=max {
                let d = compute_Dn(&r, n)?;
                if oracle {
                    let b = brute_force_Dn(&r, n)?;
                    mismatch |= b != d;
                    say!("D_{n} = {d} (oracle {b})");
                } else {
                    say!("D_{n} = {d}");
                }
            }
            if mismatch {
                return Err(Failure::new("OracleMismatch", "breadth-first and brute-force values differ"));
            }
        }
        Command::Lambda0 { rule, max } => {
            let r = load_rule(&rule)?;
            say!("{}", pretty(&serde_json::to_value(expansion_report(&r, max)?).expect("serializable")));
        }
        Command::Measure { rule, level, address } => {
            let r = load_rule(&rule)?;
            let m = measure_model(&r);
            let mut out = json!({
                "w": rational_string(&m.w),
                "b": rational_string(&m.b),
                "deg": m.deg,
                "lambda2": m.lambda2,
                "counts": [m.w1, m.b1, m.w1p, m.b1p],
                "level": level,
                "white_tile_mass": rational_string(&m.mass_of(twotile::Color::White, level)),
                "black_tile_mass": rational_string(&m.mass_of(twotile::Color::Black, level)),
                "entropy": entropy_report(&m, &[level], None)?,
            });
            if let Some(a) = address {
                let addr = Address::parse(&a, &r).ok_or_else(|| Failure::new("BadArgument", format!("cannot parse address `{a}`")))?;
                if addr.len() != level {
                    return Err(Failure::new("LengthMismatch", format!("address has length {}, expected {level}", addr.len())));
                }
                out["address"] = json!(a);
                out["mass"] = json!(rational_string(&m.tile_mass(&r, &addr)?));
            } else {
                let l = generate(&r, level)?;
                let total: Rational = l.addresses.iter().map(|a| m.tile_mass(&r, a)).collect::<Result<Vec<_>, _>>()?.into_iter().sum();
                out["tiles"] = json!(l.tile_count());
                out["total_mass"] = json!(rational_string(&total));
            }
            say!("{}", pretty(&out));
        }
        Command::Degrees { rule, lambda } => {
            let r = load_rule(&rule)?;
            let mut v = serde_json::to_value(orbit_report(&r)).expect("serializable");
            if let Some(l) = lambda {
                v["q"] = json!(ahlfors_exponent(r.deg(), l)?);
            }
            say!("{}", pretty(&v));
        }
        Command::Sft { rule, dot } => {
            let r = load_rule(&rule)?;
            let m = sft_matrix(&r);
            let rows: Vec<Vec<u8>> = m.transitions.iter().map(|row| row.iter().map(|&b| u8::from(b)).collect()).collect();
            say!("{}", pretty(&json!({
                "alphabet": m.alphabet,
                "transitions": rows,
                "row_sums": m.row_sums(),
                "strongly_connected": m.strongly_connected,
                "periodic": m.periodic,
            })));
            if let Some(p) = dot {
                write_out(&p, &m.to_dot(r.name()))?;
            }
        }
        Command::Curve { rule, spec, iters } => {
            let r = load_rule(&rule)?;
            let spec = if spec == "identity" {
                ReplacementSpec::identity(&r)
            } else {
                let p = Path::new(&spec);
                ReplacementSpec::parse(&fs::read_to_string(p).map_err(|e| io_error(p, e))?, &r)?
            };
            let it = iterate_curve(&r, &spec, iters)?;
            let expansion = expansion_for_spec(&r, &spec, iters)?;
            say!("{}", pretty(&json!({
                "steps": it.steps,
                "non_jordan_at": it.non_jordan_at,
                "tile_joins": it.tile_joins,
                "expansion_level": expansion,
            })));
        }
        Command::FindCurves { rule, level, filter_joins, single_host, max } => {
            let (complex, marked, opts) = match load(&rule)? {
                Input::Skeleton(c, m) => {
                    let opts = SearchOptions { require_no_tile_joins: filter_joins, single_host: None, max_curves: max, max_steps: DEFAULT_MAX_STEPS };
                    (c, m, opts)
                }
                Input::Rule(r) if level == 1 => {
                    let marked = (0..r.k()).map(|i| r.base_vertex(i)).collect();
                    let mut opts = SearchOptions::single_host(&r, filter_joins);
                    if !single_host {
                        opts.single_host = None;
                    }
                    opts.max_curves = max;
                    (r.d1().clone(), marked, opts)
                }
                Input::Rule(r) => {
                    if single_host {
                        return Err(Failure::new("Usage", "--single-host needs --level 1"));
                    }
                    let l = generate(&r, level)?;
                    let opts = SearchOptions { require_no_tile_joins: filter_joins, single_host: None, max_curves: max, max_steps: DEFAULT_MAX_STEPS };
                    (l.complex, (0..r.k()).collect(), opts)
                }
            };
            let found = find_candidate_curves_with(&complex, &marked, &opts)?;
            let curves: Vec<Vec<String>> = found
                .curves
                .iter()
                .map(|w| Curve { level, walk: w.clone() }.signed_ids(&complex).iter().map(|s| s.to_string()).collect())
                .collect();
            say!("{}", pretty(&json!({"count": curves.len(), "truncated": found.truncated, "curves": curves})));
        }
        Command::Metric { rule, level, lambda, samples } => {
            let r = load_rule(&rule)?;
            let lam = parse_rational(&lambda).ok_or_else(|| Failure::new("BadArgument", format!("cannot parse `{lambda}`")))?;
            if lam <= Rational::from_int(1) {
                return Err(Failure::new("BadLambda", "lambda must exceed 1"));
            }
            let tower = Tower::generate(&r, level)?;
            let cm = ChainMetric::new(&tower);
            let nv = tower.top().complex.vertex_count();
            let pairs: Vec<(usize, usize)> = (0..nv).flat_map(|u| (u + 1..nv).map(move |v| (u, v))).collect();
            let stride = pairs.len().div_ceil(samples.max(1)).max(1);
            let mut violations = 0;
            let mut current = usize::MAX;
            let mut dist = Vec::new();
            say!("u\tv\tm\tdistance\tbounds");
            for &(u, v) in pairs.iter().step_by(stride) {
                if u != current {
                    dist = cm.distances_from(u, &lam)?;
                    current = u;
                }
                let m = cm.vertex_m_value(u, v)?;
                let lo = Rational::from_int(1) / lam.clone().powi(m as u32 + 1);
                let hi = Rational::from_int(2) / lam.clone().powi(m as u32);
                let ok = lo <= dist[v] && dist[v] <= hi;
                violations += usize::from(!ok);
                say!("{u}\t{v}\t{m}\t{}\t{}", rational_string(&dist[v]), if ok { "ok" } else { "VIOLATED" });
            }
            say!("violations {violations}");
        }
        Command::Render { rule, level, out } => {
            let r = load_rule(&rule)?;
            write_out(&out, &render_svg(&generate(&r, level)?)?)?;
        }
    }
    Ok(buf)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match run(cli.command) {
        Ok(out) => {
            // a closed pipe (e.g. `| head`) is not an error
            let _ = std::io::stdout().lock().write_all(out.as_bytes());
            ExitCode::SUCCESS
        }
        Err(f) => {
            f.report(cli.json_errors);
            ExitCode::from(f.exit)
        }
    }
}
