//! Command-line front end: loads catalog or file-defined algebras, runs the
//! Jacobi / half-derivation / transposed-Poisson checks and solvers, and
//! emits deterministic JSON reports.
//!
//! Exit codes: 0 — all checks passed or the solve completed; 1 — a checked
//! property was violated (the report carries witnesses); 2 — usage, parse,
//! or I/O error (diagnostic on stderr, no partial report).

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use wittkit::algebra::{BasisIndex, JacobiReport, RuleMap};
use wittkit::catalog::{catalog, CATALOG_NAMES};
use wittkit::dsl::{parse_document, render_document};
use wittkit::halfderiv::{
    check_half_derivation, classify_interior, default_core, family_hwn, family_w_ab,
    family_w_abs, family_wn, solve_half_derivations, Coeffs, HalfDerivReport, InteriorReport,
    ShiftMap, ShiftSeeds, ShiftTerm,
};
use wittkit::tps::{
    check_poisson, check_tps, natural_product, solve_tps, CommProduct, GeneratorCheck,
    MutationProduct, PoissonReport, Product, TpsReport, TpsSolveOutcome, TpsWitness,
};
use wittkit::{AlgebraDef, Element, GaussianRational, Window};

#[derive(Parser)]
#[command(name = "wittkit", version, about = "Exact workbench for graded Lie algebra structure")]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
    /// Write the JSON report here instead of standard output
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AlgebraArgs {
    /// Catalog algebra name (see alg-list)
    #[arg(long, conflicts_with = "file")]
    alg: Option<String>,
    /// Definition file in the .liealg format
    #[arg(long)]
    file: Option<PathBuf>,
    /// Value for catalog parameter a (exact scalar, e.g. 3/2-2i)
    #[arg(long, allow_hyphen_values = true)]
    a: Option<String>,
    /// Value for catalog parameter b
    #[arg(long, allow_hyphen_values = true)]
    b: Option<String>,
    /// Value for catalog parameter n
    #[arg(long, allow_hyphen_values = true)]
    n: Option<String>,
    /// Group generator for the group-graded algebras (repeatable)
    #[arg(long = "gen", allow_hyphen_values = true)]
    gens: Vec<String>,
}

#[derive(Args)]
struct WindowArgs {
    /// Lowest index in the window
    #[arg(long, allow_hyphen_values = true)]
    imin: i64,
    /// Highest index in the window
    #[arg(long, allow_hyphen_values = true)]
    imax: i64,
    /// Bound on each group coordinate (ungraded algebras use 0)
    #[arg(long, default_value_t = 0)]
    gen_bound: i64,
}

#[derive(Args)]
struct SampleArgs {
    /// Check this many randomly sampled basis pairs instead of all pairs
    #[arg(long)]
    pairs: Option<usize>,
    /// Seed for the pair sampler
    #[arg(long, default_value_t = 0)]
    rng_seed: u64,
}

#[derive(Args)]
struct FamilyArgs {
    /// L-shift coefficients, `t:coeff` entries joined by commas
    #[arg(long, allow_hyphen_values = true)]
    alphas: Option<String>,
    /// L-to-density coefficients, same syntax as --alphas
    #[arg(long, allow_hyphen_values = true)]
    betas: Option<String>,
    /// Half-shift coefficients (w_abs only), same syntax
    #[arg(long, allow_hyphen_values = true)]
    gammas: Option<String>,
    /// Group-cell seeds, `d:m:coeff` entries joined by semicolons
    /// (multi-generator degrees use commas inside d)
    #[arg(long, allow_hyphen_values = true)]
    seeds: Option<String>,
    /// Lowest retained index shift for truncated families
    #[arg(long, allow_hyphen_values = true)]
    kmin: Option<i64>,
    /// Highest retained index shift for truncated families
    #[arg(long, allow_hyphen_values = true)]
    kmax: Option<i64>,
}

#[derive(Copy, Clone, ValueEnum)]
enum ProductChoice {
    /// The natural function-style product on the algebra's own basis
    #[value(name = "plain-W")]
    PlainW,
    /// The zero product
    Zero,
    /// Mutation of the natural product by the element given with --w
    Mutation,
}

#[derive(Subcommand)]
enum Verb {
    /// List catalog algebras and their required parameters
    AlgList,
    /// Print an algebra's canonical definition text
    AlgShow {
        #[command(flatten)]
        alg: AlgebraArgs,
    },
    /// Parse a definition file and echo its canonical rendering
    AlgParse {
        /// Definition file in the .liealg format
        #[arg(long)]
        file: PathBuf,
    },
    /// Bracket two elements
    Bracket {
        #[command(flatten)]
        alg: AlgebraArgs,
        /// Left element, e.g. "2*L(1) - I(0)" or "L(1;3)" when group-graded
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        /// Right element
        #[arg(long, allow_hyphen_values = true)]
        y: String,
    },
    /// Check the Jacobi identity on all window triples
    Jacobi {
        #[command(flatten)]
        alg: AlgebraArgs,
        #[command(flatten)]
        window: WindowArgs,
    },
    /// Check a hand-specified shift map for the half-derivation law
    HalfderCheck {
        #[command(flatten)]
        alg: AlgebraArgs,
        #[command(flatten)]
        window: WindowArgs,
        #[command(flatten)]
        sample: SampleArgs,
        /// Map term `SRC:TGT:ISHIFT:COEFF` (graded: `SRC:TGT:DALPHA:ISHIFT:COEFF`,
        /// DALPHA comma-separated); repeatable
        #[arg(long = "term", allow_hyphen_values = true, required = true)]
        terms: Vec<String>,
    },
    /// Construct a built-in coefficient family and check it
    HalfderFamily {
        #[command(flatten)]
        alg: AlgebraArgs,
        #[command(flatten)]
        window: WindowArgs,
        #[command(flatten)]
        sample: SampleArgs,
        #[command(flatten)]
        family: FamilyArgs,
    },
    /// Solve for half-derivations at one grade shift and classify the interior
    HalfderSolve {
        #[command(flatten)]
        alg: AlgebraArgs,
        #[command(flatten)]
        window: WindowArgs,
        /// Grade shift of the unknown map (exact scalar)
        #[arg(long, allow_hyphen_values = true)]
        shift: String,
        /// Extra index slack for the output window
        #[arg(long, default_value_t = 0)]
        out_pad: i64,
    },
    /// Check commutativity, associativity, and bracket compatibility
    TpsCheck {
        #[command(flatten)]
        alg: AlgebraArgs,
        #[command(flatten)]
        window: WindowArgs,
        #[arg(long, value_enum)]
        product: ProductChoice,
        /// Mutation element (required when --product mutation)
        #[arg(long, allow_hyphen_values = true)]
        w: Option<String>,
    },
    /// Solve for transposed Poisson products over a half-derivation ansatz
    TpsSolve {
        #[command(flatten)]
        alg: AlgebraArgs,
        #[command(flatten)]
        window: WindowArgs,
        /// Bound on generator index and degree shifts
        #[arg(long, default_value_t = 1)]
        shift_bound: i64,
        /// Lowest retained index shift for truncated generator families
        #[arg(long, allow_hyphen_values = true)]
        kmin: Option<i64>,
        /// Highest retained index shift for truncated generator families
        #[arg(long, allow_hyphen_values = true)]
        kmax: Option<i64>,
    },
    /// Mutate the natural product by an element and run both product checks
    Mutation {
        #[command(flatten)]
        alg: AlgebraArgs,
        #[command(flatten)]
        window: WindowArgs,
        /// Mutation element
        #[arg(long, allow_hyphen_values = true)]
        w: String,
    },
}

/// A finished command: the report document plus whether a checked property
/// was violated (exit 1) or not (exit 0).
struct Outcome {
    report: Value,
    violated: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = cli.out.clone();
    match run(cli.verb) {
        Ok(outcome) => {
            let mut text =
                serde_json::to_string_pretty(&outcome.report).expect("report serializes");
            text.push('\n');
            if let Some(path) = out {
                if let Err(e) = fs::write(&path, text) {
                    eprintln!("wittkit: writing {}: {e}", path.display());
                    return ExitCode::from(2);
                }
            } else {
                print!("{text}");
            }
            ExitCode::from(u8::from(outcome.violated))
        }
        Err(message) => {
            eprintln!("wittkit: {message}");
            ExitCode::from(2)
        }
    }
}

fn run(verb: Verb) -> Result<Outcome, String> {
    match verb {
        Verb::AlgList => alg_list(),
        Verb::AlgShow { alg } => alg_show(&alg),
        Verb::AlgParse { file } => alg_parse(&file),
        Verb::Bracket { alg, x, y } => bracket(&alg, &x, &y),
        Verb::Jacobi { alg, window } => jacobi(&alg, &window),
        Verb::HalfderCheck { alg, window, sample, terms } => {
            halfder_check(&alg, &window, &sample, &terms)
        }
        Verb::HalfderFamily { alg, window, sample, family } => {
            halfder_family(&alg, &window, &sample, &family)
        }
        Verb::HalfderSolve { alg, window, shift, out_pad } => {
            halfder_solve(&alg, &window, &shift, out_pad)
        }
        Verb::TpsCheck { alg, window, product, w } => tps_check(&alg, &window, product, w.as_deref()),
        Verb::TpsSolve { alg, window, shift_bound, kmin, kmax } => {
            tps_solve(&alg, &window, shift_bound, kmin, kmax)
        }
        Verb::Mutation { alg, window, w } => mutation(&alg, &window, &w),
    }
}

// ---------------------------------------------------------------------------
// input plumbing

/// A loaded algebra: the definition, the product its file declared (if any),
/// and the identification block every report embeds.
struct Loaded {
    alg: AlgebraDef,
    file_product: Option<CommProduct>,
    id: Value,
}

fn scalar(text: &str) -> Result<GaussianRational, String> {
    GaussianRational::parse(text).map_err(|e| format!("scalar `{text}`: {e}"))
}

impl AlgebraArgs {
    fn load(&self) -> Result<Loaded, String> {
        match (&self.alg, &self.file) {
            (Some(name), None) => {
                let mut params = BTreeMap::new();
                for (key, value) in
                    [("a", &self.a), ("b", &self.b), ("n", &self.n)]
                {
                    if let Some(text) = value {
                        params.insert(key.to_string(), scalar(text)?);
                    }
                }
                let gens = self
                    .gens
                    .iter()
                    .map(|g| scalar(g))
                    .collect::<Result<Vec<_>, _>>()?;
                let alg = catalog(name, &params, &gens).map_err(|e| e.to_string())?;
                let id = identification(&alg, "catalog");
                Ok(Loaded { alg, file_product: None, id })
            }
            (None, Some(path)) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| format!("reading {}: {e}", path.display()))?;
                let doc = parse_document(&text).map_err(|e| e.to_string())?;
                let id = identification(&doc.algebra, &path.display().to_string());
                Ok(Loaded { alg: doc.algebra, file_product: doc.product, id })
            }
            _ => Err("exactly one of --alg or --file is required".to_string()),
        }
    }
}

fn identification(alg: &AlgebraDef, source: &str) -> Value {
    let params: BTreeMap<&str, String> =
        alg.sig.params.iter().map(|(k, v)| (k.as_str(), v.to_string())).collect();
    json!({
        "name": alg.name,
        "source": source,
        "params": params,
        "generators": alg.sig.generators.iter().map(|g| g.to_string()).collect::<Vec<_>>(),
    })
}

impl WindowArgs {
    fn window(&self) -> Result<Window, String> {
        Window::new(self.gen_bound, self.imin, self.imax).map_err(|e| e.to_string())
    }
}

impl SampleArgs {
    /// All window pairs, or a seeded random sample of them.
    fn pairs(
        &self,
        alg: &AlgebraDef,
        window: &Window,
    ) -> Result<Vec<(BasisIndex, BasisIndex)>, String> {
        let basis = alg.enumerate_basis(window);
        if basis.is_empty() {
            return Err("window contains no basis elements".to_string());
        }
        match self.pairs {
            None => {
                let mut all = Vec::new();
                for x in &basis {
                    for y in &basis {
                        all.push((x.clone(), y.clone()));
                    }
                }
                Ok(all)
            }
            Some(count) => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.rng_seed);
                Ok((0..count)
                    .map(|_| {
                        let x = basis.choose(&mut rng).expect("nonempty").clone();
                        let y = basis.choose(&mut rng).expect("nonempty").clone();
                        (x, y)
                    })
                    .collect())
            }
        }
    }
}

/// `t:coeff` entries joined by commas.
fn parse_coeffs(text: Option<&str>) -> Result<Coeffs, String> {
    let mut out = Coeffs::new();
    let Some(text) = text else { return Ok(out) };
    for entry in text.split(',').filter(|s| !s.trim().is_empty()) {
        let (t, c) = entry
            .split_once(':')
            .ok_or_else(|| format!("coefficient entry `{entry}`: expected `t:coeff`"))?;
        let t: i64 =
            t.trim().parse().map_err(|e| format!("shift `{t}` in `{entry}`: {e}"))?;
        if out.insert(t, scalar(c.trim())?).is_some() {
            return Err(format!("duplicate shift {t} in coefficient list"));
        }
    }
    Ok(out)
}

/// `d:m:coeff` entries joined by semicolons; multi-generator degrees are
/// comma-separated inside the `d` field.
fn parse_seeds(text: Option<&str>, arity: usize) -> Result<ShiftSeeds, String> {
    let mut out = ShiftSeeds::new();
    let Some(text) = text else { return Ok(out) };
    for entry in text.split(';').filter(|s| !s.trim().is_empty()) {
        let parts: Vec<&str> = entry.split(':').collect();
        let [d, m, c] = parts.as_slice() else {
            return Err(format!("seed entry `{entry}`: expected `d:m:coeff`"));
        };
        let coords = d
            .split(',')
            .map(|v| v.trim().parse::<i64>().map_err(|e| format!("degree `{v}`: {e}")))
            .collect::<Result<Vec<i64>, String>>()?;
        if coords.len() != arity {
            return Err(format!(
                "seed entry `{entry}`: degree has {} coordinates, algebra has {arity} generators",
                coords.len()
            ));
        }
        let m: i64 = m.trim().parse().map_err(|e| format!("shift `{m}` in `{entry}`: {e}"))?;
        if out.insert((coords, m), scalar(c.trim())?).is_some() {
            return Err(format!("duplicate seed cell in `{entry}`"));
        }
    }
    Ok(out)
}

/// `SRC:TGT:ISHIFT:COEFF`, with a comma-separated `DALPHA` field before
/// ISHIFT when the algebra is group-graded.
fn parse_term(alg: &AlgebraDef, text: &str) -> Result<ShiftTerm, String> {
    let arity = alg.sig.generators.len();
    let parts: Vec<&str> = text.split(':').collect();
    let expected = if arity > 0 { 5 } else { 4 };
    if parts.len() != expected {
        return Err(format!(
            "term `{text}`: expected {expected} colon-separated fields for this algebra"
        ));
    }
    let source = alg.family_id(parts[0].trim()).map_err(|e| e.to_string())?;
    let target = alg.family_id(parts[1].trim()).map_err(|e| e.to_string())?;
    let mut next = 2;
    let alpha_shift = if arity > 0 {
        next += 1;
        parts[2]
            .split(',')
            .map(|v| v.trim().parse::<i64>().map_err(|e| format!("degree `{v}`: {e}")))
            .collect::<Result<Vec<i64>, String>>()?
    } else {
        Vec::new()
    };
    let i_shift: i64 = parts[next]
        .trim()
        .parse()
        .map_err(|e| format!("shift `{}` in `{text}`: {e}", parts[next]))?;
    let coeff = scalar(parts[next + 1].trim())?;
    Ok(ShiftTerm { source, target, alpha_shift, i_shift, coeff })
}

// ---------------------------------------------------------------------------
// report serialization

fn window_json(w: &Window) -> Value {
    json!({
        "gen_bound": w.alpha_coeff_bound,
        "imin": w.i_min,
        "imax": w.i_max,
    })
}

fn basis_json(alg: &AlgebraDef, b: &BasisIndex) -> Value {
    json!({
        "family": alg.family_name(b.family()),
        "coords": b.coords(),
        "i": b.index(),
        "text": alg.render_basis(b),
    })
}

fn element_json(alg: &AlgebraDef, e: &Element) -> Value {
    let terms: Vec<Value> = e
        .terms()
        .map(|(b, c)| {
            json!({
                "family": alg.family_name(b.family()),
                "coords": b.coords(),
                "i": b.index(),
                "coeff": c.to_string(),
            })
        })
        .collect();
    json!({ "text": alg.render_element(e), "terms": terms })
}

fn shift_map_json(alg: &AlgebraDef, map: &ShiftMap) -> Value {
    let terms: Vec<Value> = map
        .terms()
        .iter()
        .map(|t| {
            json!({
                "source": alg.family_name(t.source),
                "target": alg.family_name(t.target),
                "alpha_shift": t.alpha_shift,
                "i_shift": t.i_shift,
                "coeff": t.coeff.to_string(),
            })
        })
        .collect();
    let grade_shift = match map.grade_shift(alg) {
        Ok(Some(d)) => Value::String(d.to_string()),
        Ok(None) => Value::Null,
        Err(_) => Value::String("mixed".to_string()),
    };
    json!({ "terms": terms, "grade_shift": grade_shift })
}

fn halfderiv_report_json(alg: &AlgebraDef, report: &HalfDerivReport) -> Value {
    let failures: Vec<Value> = report
        .failures
        .iter()
        .map(|f| {
            json!({
                "x": basis_json(alg, &f.x),
                "y": basis_json(alg, &f.y),
                "residual": element_json(alg, &f.residual),
            })
        })
        .collect();
    json!({ "pairs_checked": report.pairs_checked, "failures": failures })
}

fn jacobi_json(alg: &AlgebraDef, report: &JacobiReport) -> Value {
    let violations: Vec<Value> = report
        .violations
        .iter()
        .map(|v| {
            json!({
                "x": basis_json(alg, &v.x),
                "y": basis_json(alg, &v.y),
                "z": basis_json(alg, &v.z),
                "residual": element_json(alg, &v.residual),
            })
        })
        .collect();
    json!({ "triples_checked": report.triples_checked, "violations": violations })
}

fn witness_json(alg: &AlgebraDef, w: &Option<TpsWitness>) -> Value {
    match w {
        None => Value::Null,
        Some(w) => json!({
            "inputs": w.inputs.iter().map(|b| basis_json(alg, b)).collect::<Vec<_>>(),
            "lhs": element_json(alg, &w.lhs),
            "rhs": element_json(alg, &w.rhs),
        }),
    }
}

fn tps_report_json(alg: &AlgebraDef, r: &TpsReport) -> Value {
    json!({
        "pairs_checked": r.pairs_checked,
        "triples_checked": r.triples_checked,
        "commutative": r.commutative.is_none(),
        "associative": r.associative.is_none(),
        "compatible": r.compatible.is_none(),
        "leibniz": r.leibniz.is_none(),
        "witnesses": {
            "commutative": witness_json(alg, &r.commutative),
            "associative": witness_json(alg, &r.associative),
            "compatible": witness_json(alg, &r.compatible),
            "leibniz": witness_json(alg, &r.leibniz),
        },
    })
}

fn poisson_report_json(alg: &AlgebraDef, r: &PoissonReport) -> Value {
    json!({
        "triples_checked": r.triples_checked,
        "failures": r.failures,
        "first_failure": witness_json(alg, &r.first_failure),
    })
}

fn rules_json(alg: &AlgebraDef, rules: &RuleMap) -> Value {
    let names = ["p", "q", "m", "n"];
    let list: Vec<Value> = rules
        .iter()
        .map(|(&(fx, fy), terms)| {
            let terms: Vec<Value> = terms
                .iter()
                .map(|t| {
                    json!({
                        "target": alg.family_name(t.target),
                        "alpha_shift": t.alpha_const,
                        "i_shift": t.i_const,
                        "coeff": t.coeff.render(&names),
                    })
                })
                .collect();
            json!({
                "left": alg.family_name(fx),
                "right": alg.family_name(fy),
                "terms": terms,
            })
        })
        .collect();
    Value::Array(list)
}

fn interior_json(alg: &AlgebraDef, space_dim: usize, interior: &InteriorReport) -> Value {
    let fitted: Vec<Value> = interior
        .fitted
        .iter()
        .map(|f| {
            json!({
                "shift_type": f.shift_type,
                "map": shift_map_json(alg, &f.map),
            })
        })
        .collect();
    json!({
        "space_dimension": space_dim,
        "core": window_json(&interior.core),
        "dimension": interior.dimension,
        "fitted": fitted,
    })
}

fn report(id: Value, verb: &str, body: Value) -> Value {
    json!({
        "version": env!("CARGO_PKG_VERSION"),
        "verb": verb,
        "algebra": id,
        "result": body,
    })
}

// ---------------------------------------------------------------------------
// verbs

fn alg_list() -> Result<Outcome, String> {
    let entries: Vec<Value> = CATALOG_NAMES
        .iter()
        .map(|name| {
            let (params, graded): (&[&str], bool) = match *name {
                "witt" => (&[], false),
                "w_ab" | "w_abs" => (&["a", "b"], false),
                "wn_g" | "hwn_g" => (&["n"], true),
                _ => unreachable!("catalog names are fixed"),
            };
            json!({
                "name": name,
                "params": params,
                "group_graded": graded,
            })
        })
        .collect();
    let body = json!({ "algebras": entries });
    Ok(Outcome {
        report: json!({ "version": env!("CARGO_PKG_VERSION"), "verb": "alg-list", "result": body }),
        violated: false,
    })
}

fn alg_show(args: &AlgebraArgs) -> Result<Outcome, String> {
    let loaded = args.load()?;
    let text = render_document(&loaded.alg, loaded.file_product.as_ref());
    let body = json!({
        "definition": text,
        "families": loaded.alg.sig.families.iter().map(|f| f.name.clone()).collect::<Vec<_>>(),
    });
    Ok(Outcome { report: report(loaded.id, "alg-show", body), violated: false })
}

fn alg_parse(file: &PathBuf) -> Result<Outcome, String> {
    let text =
        fs::read_to_string(file).map_err(|e| format!("reading {}: {e}", file.display()))?;
    let doc = parse_document(&text).map_err(|e| e.to_string())?;
    let id = identification(&doc.algebra, &file.display().to_string());
    let body = json!({
        "canonical": render_document(&doc.algebra, doc.product.as_ref()),
        "has_product": doc.product.is_some(),
    });
    Ok(Outcome { report: report(id, "alg-parse", body), violated: false })
}

fn bracket(args: &AlgebraArgs, x: &str, y: &str) -> Result<Outcome, String> {
    let loaded = args.load()?;
    let x = loaded.alg.parse_element(x).map_err(|e| e.to_string())?;
    let y = loaded.alg.parse_element(y).map_err(|e| e.to_string())?;
    let z = loaded.alg.bracket(&x, &y);
    let body = json!({
        "x": element_json(&loaded.alg, &x),
        "y": element_json(&loaded.alg, &y),
        "bracket": element_json(&loaded.alg, &z),
    });
    Ok(Outcome { report: report(loaded.id, "bracket", body), violated: false })
}

fn jacobi(args: &AlgebraArgs, window: &WindowArgs) -> Result<Outcome, String> {
    let loaded = args.load()?;
    let w = window.window()?;
    let jr = loaded.alg.check_jacobi(&w);
    let violated = !jr.is_clean();
    let body = json!({
        "window": window_json(&w),
        "report": jacobi_json(&loaded.alg, &jr),
    });
    Ok(Outcome { report: report(loaded.id, "jacobi", body), violated })
}

fn check_map_outcome(
    loaded: &Loaded,
    verb: &str,
    window: &Window,
    sample: &SampleArgs,
    map: &ShiftMap,
    output_window: Option<&Window>,
) -> Result<Outcome, String> {
    let pairs = sample.pairs(&loaded.alg, window)?;
    let hr = check_half_derivation(&loaded.alg, map, &pairs, output_window)
        .map_err(|e| e.to_string())?;
    let violated = !hr.is_clean();
    let body = json!({
        "window": window_json(window),
        "map": shift_map_json(&loaded.alg, map),
        "output_window": output_window.map(window_json),
        "sampled_pairs": sample.pairs,
        "rng_seed": sample.pairs.map(|_| sample.rng_seed),
        "report": halfderiv_report_json(&loaded.alg, &hr),
    });
    Ok(Outcome { report: report(loaded.id.clone(), verb, body), violated })
}

fn halfder_check(
    args: &AlgebraArgs,
    window: &WindowArgs,
    sample: &SampleArgs,
    terms: &[String],
) -> Result<Outcome, String> {
    let loaded = args.load()?;
    let w = window.window()?;
    let terms = terms
        .iter()
        .map(|t| parse_term(&loaded.alg, t))
        .collect::<Result<Vec<_>, _>>()?;
    let map = ShiftMap::new(&loaded.alg, terms).map_err(|e| e.to_string())?;
    check_map_outcome(&loaded, "halfder-check", &w, sample, &map, None)
}

/// Index window a truncated coefficient family can be trusted on: every
/// contribution to an output index inside it comes from a retained shift.
fn trusted_window(
    window: &Window,
    n: i64,
    max_abs_d: i64,
    kmin: i64,
    kmax: i64,
) -> Result<Window, String> {
    let lo = kmin + 2 * window.i_max + n.max(0);
    let hi = kmax + 2 * window.i_min + n.min(0);
    let alpha = 2 * window.alpha_coeff_bound + max_abs_d;
    Window::new(alpha, lo, hi).map_err(|_| {
        format!(
            "retained shift range [{kmin}, {kmax}] is too narrow for index window \
             [{}, {}]; widen --kmin/--kmax",
            window.i_min, window.i_max
        )
    })
}

fn halfder_family(
    args: &AlgebraArgs,
    window: &WindowArgs,
    sample: &SampleArgs,
    family: &FamilyArgs,
) -> Result<Outcome, String> {
    let loaded = args.load()?;
    let w = window.window()?;
    let alg = &loaded.alg;
    let alphas = parse_coeffs(family.alphas.as_deref())?;
    let betas = parse_coeffs(family.betas.as_deref())?;
    let gammas = parse_coeffs(family.gammas.as_deref())?;
    let seeds = parse_seeds(family.seeds.as_deref(), alg.sig.generators.len())?;
    let (map, output) = match alg.name.as_str() {
        "witt" | "w_ab" => {
            let map = family_w_ab(alg, &alphas, &betas).map_err(|e| e.to_string())?;
            (map, None)
        }
        "w_abs" => {
            let map = family_w_abs(alg, &alphas, &betas, &gammas).map_err(|e| e.to_string())?;
            (map, None)
        }
        "wn_g" => {
            let map = family_wn(alg, &seeds).map_err(|e| e.to_string())?;
            (map, None)
        }
        "hwn_g" => {
            let n = alg.sig.params["n"]
                .to_i64()
                .ok_or_else(|| "parameter n must be an integer".to_string())?;
            let (kmin, kmax) = match (family.kmin, family.kmax) {
                (Some(lo), Some(hi)) if lo <= hi => (lo, hi),
                _ => return Err("hwn_g families need --kmin <= --kmax".to_string()),
            };
            let map = family_hwn(alg, &seeds, (kmin, kmax)).map_err(|e| e.to_string())?;
            if n == 0 {
                (map, None)
            } else {
                let max_d = seeds
                    .keys()
                    .map(|(d, _)| d.iter().map(|v| v.abs()).max().unwrap_or(0))
                    .max()
                    .unwrap_or(0);
                let trusted = trusted_window(&w, n, max_d, kmin, kmax)?;
                (map, Some(trusted))
            }
        }
        other => return Err(format!("no built-in coefficient family for algebra `{other}`")),
    };
    check_map_outcome(&loaded, "halfder-family", &w, sample, &map, output.as_ref())
}

fn halfder_solve(
    args: &AlgebraArgs,
    window: &WindowArgs,
    shift: &str,
    out_pad: i64,
) -> Result<Outcome, String> {
    let loaded = args.load()?;
    let w_in = window.window()?;
    let d = scalar(shift)?;
    // pad the group bound by the degree the shift reaches, if the grading
    // has a group part
    let alpha_pad = loaded
        .alg
        .sig
        .families
        .iter()
        .find(|f| !f.grade_u.is_zero())
        .map(|_| {
            // degree shift in generator units; non-integer reach rounds up
            loaded
                .alg
                .sig
                .generators
                .first()
                .and_then(|g| (&d * &g.inv().ok()?).to_i64())
                .map_or(1, |k| k.abs())
        })
        .unwrap_or(0);
    let w_out = Window::new(
        w_in.alpha_coeff_bound + alpha_pad,
        w_in.i_min - out_pad,
        w_in.i_max + out_pad,
    )
    .map_err(|e| e.to_string())?;
    let space = solve_half_derivations(&loaded.alg, &d, &w_in, &w_out)
        .map_err(|e| e.to_string())?;
    let core = default_core(&space).map_err(|e| e.to_string())?;
    let interior =
        classify_interior(&loaded.alg, &space, &core).map_err(|e| e.to_string())?;
    let body = json!({
        "window_in": window_json(&w_in),
        "window_out": window_json(&w_out),
        "grade_shift": d.to_string(),
        "interior": interior_json(&loaded.alg, space.dimension(), &interior),
    });
    Ok(Outcome { report: report(loaded.id, "halfder-solve", body), violated: false })
}

/// Resolves --product/--w into a concrete product for checking.
fn build_product(
    loaded: &Loaded,
    choice: ProductChoice,
    w: Option<&str>,
) -> Result<(Box<dyn Product>, Value), String> {
    let base = || -> Result<CommProduct, String> {
        match &loaded.file_product {
            Some(p) => Ok(p.clone()),
            None => natural_product(&loaded.alg).map_err(|e| e.to_string()),
        }
    };
    match choice {
        ProductChoice::PlainW => {
            let p = base()?;
            let id = json!({ "kind": "plain-W", "rules": rules_json(&loaded.alg, p.rules()) });
            Ok((Box::new(p), id))
        }
        ProductChoice::Zero => {
            let p = CommProduct::zero(&loaded.alg);
            Ok((Box::new(p), json!({ "kind": "zero" })))
        }
        ProductChoice::Mutation => {
            let text = w.ok_or("--product mutation requires --w")?;
            let w = loaded.alg.parse_element(text).map_err(|e| e.to_string())?;
            let p = MutationProduct { base: base()?, w: w.clone() };
            let id = json!({ "kind": "mutation", "w": element_json(&loaded.alg, &w) });
            Ok((Box::new(p), id))
        }
    }
}

fn tps_check(
    args: &AlgebraArgs,
    window: &WindowArgs,
    choice: ProductChoice,
    w: Option<&str>,
) -> Result<Outcome, String> {
    let loaded = args.load()?;
    let win = window.window()?;
    let (product, product_id) = build_product(&loaded, choice, w)?;
    let tr = check_tps(&loaded.alg, product.as_ref(), &win, None);
    let violated = !tr.passed();
    let body = json!({
        "window": window_json(&win),
        "product": product_id,
        "report": tps_report_json(&loaded.alg, &tr),
    });
    Ok(Outcome { report: report(loaded.id, "tps-check", body), violated })
}

fn mutation(args: &AlgebraArgs, window: &WindowArgs, w: &str) -> Result<Outcome, String> {
    let loaded = args.load()?;
    let win = window.window()?;
    let (product, product_id) = build_product(&loaded, ProductChoice::Mutation, Some(w))?;
    let tr = check_tps(&loaded.alg, product.as_ref(), &win, None);
    let pr = check_poisson(&loaded.alg, product.as_ref(), &win, None);
    let violated = !tr.passed();
    let body = json!({
        "window": window_json(&win),
        "product": product_id,
        "tps": tps_report_json(&loaded.alg, &tr),
        "poisson": poisson_report_json(&loaded.alg, &pr),
    });
    Ok(Outcome { report: report(loaded.id, "mutation", body), violated })
}

/// The standard half-derivation generator set for a catalog algebra: the
/// coefficient families with every shift in [-bound, bound], one generator
/// per free coefficient.
fn standard_generators(
    alg: &AlgebraDef,
    bound: i64,
    krange: Option<(i64, i64)>,
    window: &Window,
) -> Result<(Vec<ShiftMap>, Option<Window>), String> {
    let one = GaussianRational::one();
    let single = |t: i64| -> Coeffs { Coeffs::from([(t, one.clone())]) };
    match alg.name.as_str() {
        "witt" => {
            let gens = (-bound..=bound)
                .map(|t| family_w_ab(alg, &single(t), &Coeffs::new()))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| e.to_string())?;
            Ok((gens, None))
        }
        "w_ab" => {
            let b_is_minus_one = alg.sig.params["b"] == -&one;
            let mut gens = Vec::new();
            if b_is_minus_one {
                for t in -bound..=bound {
                    gens.push(family_w_ab(alg, &single(t), &Coeffs::new()));
                    gens.push(family_w_ab(alg, &Coeffs::new(), &single(t)));
                }
            } else {
                gens.push(family_w_ab(alg, &single(0), &Coeffs::new()));
            }
            let gens = gens.into_iter().collect::<Result<Vec<_>, _>>().map_err(|e| e.to_string())?;
            Ok((gens, None))
        }
        "w_abs" => {
            let b_is_minus_one = alg.sig.params["b"] == -&one;
            if !b_is_minus_one {
                return Ok((vec![ShiftMap::identity(alg, one)], None));
            }
            let empty = Coeffs::new();
            let mut gens = Vec::new();
            for t in -bound..=bound {
                gens.push(family_w_abs(alg, &single(t), &empty, &empty));
                gens.push(family_w_abs(alg, &empty, &single(t), &empty));
                gens.push(family_w_abs(alg, &empty, &empty, &single(t)));
            }
            let gens = gens.into_iter().collect::<Result<Vec<_>, _>>().map_err(|e| e.to_string())?;
            Ok((gens, None))
        }
        "wn_g" => {
            if alg.sig.generators.len() != 1 {
                return Err("generator construction needs exactly one group generator".into());
            }
            let mut gens = Vec::new();
            for d in -bound..=bound {
                for m in -bound..=bound {
                    let seeds = ShiftSeeds::from([((vec![d], m), one.clone())]);
                    gens.push(family_wn(alg, &seeds).map_err(|e| e.to_string())?);
                }
            }
            Ok((gens, None))
        }
        "hwn_g" => {
            if alg.sig.generators.len() != 1 {
                return Err("generator construction needs exactly one group generator".into());
            }
            let n = alg.sig.params["n"]
                .to_i64()
                .ok_or_else(|| "parameter n must be an integer".to_string())?;
            let mut gens = vec![
                family_hwn(alg, &ShiftSeeds::from([((vec![0], 0), one.clone())]), (0, 0))
                    .map_err(|e| e.to_string())?,
            ];
            if n == 0 {
                for d in (-bound..=bound).filter(|d| *d != 0) {
                    let seeds = ShiftSeeds::from([((vec![d], -d), one.clone())]);
                    gens.push(family_hwn(alg, &seeds, (-d, -d)).map_err(|e| e.to_string())?);
                }
                return Ok((gens, None));
            }
            let (kmin, kmax) = krange
                .filter(|(lo, hi)| lo <= hi)
                .ok_or("hwn_g generators need --kmin <= --kmax")?;
            for d in (-bound..=bound).filter(|d| *d != 0) {
                for m in 0..n.abs() {
                    let seeds = ShiftSeeds::from([((vec![d], m), one.clone())]);
                    gens.push(
                        family_hwn(alg, &seeds, (kmin, kmax)).map_err(|e| e.to_string())?,
                    );
                }
            }
            let trusted = trusted_window(window, n, bound, kmin, kmax)?;
            Ok((gens, Some(trusted)))
        }
        other => Err(format!("no standard generator set for algebra `{other}`")),
    }
}

fn tps_solve(
    args: &AlgebraArgs,
    window: &WindowArgs,
    shift_bound: i64,
    kmin: Option<i64>,
    kmax: Option<i64>,
) -> Result<Outcome, String> {
    let loaded = args.load()?;
    let win = window.window()?;
    let krange = match (kmin, kmax) {
        (Some(lo), Some(hi)) => Some((lo, hi)),
        (None, None) => None,
        _ => return Err("--kmin and --kmax must be given together".to_string()),
    };
    let (gens, trusted) = standard_generators(&loaded.alg, shift_bound, krange, &win)?;
    let check = match &trusted {
        Some(w) => GeneratorCheck::Windowed(w),
        None => GeneratorCheck::Exact,
    };
    let outcome = solve_tps(&loaded.alg, &gens, &win, check).map_err(|e| e.to_string())?;
    let body = json!({
        "window": window_json(&win),
        "shift_bound": shift_bound,
        "generators": gens.iter().map(|g| shift_map_json(&loaded.alg, g)).collect::<Vec<_>>(),
        "trusted_output_window": trusted.as_ref().map(window_json),
        "outcome": solve_outcome_json(&loaded.alg, &outcome),
    });
    Ok(Outcome { report: report(loaded.id, "tps-solve", body), violated: false })
}

fn solve_outcome_json(alg: &AlgebraDef, outcome: &TpsSolveOutcome) -> Value {
    let solutions: Vec<Value> = outcome
        .solutions
        .iter()
        .map(|s| {
            let coeffs: Vec<Value> = s
                .coefficients
                .iter()
                .map(|(b, k, c)| {
                    json!({
                        "basis": basis_json(alg, b),
                        "generator": k,
                        "coeff": c.to_string(),
                    })
                })
                .collect();
            json!({
                "trivial": s.trivial,
                "constant_fit": s.constant_fit,
                "coefficients": coeffs,
                "product_rules": s.product.as_ref().map(|p| rules_json(alg, p.rules())),
                "report": s.report.as_ref().map(|r| tps_report_json(alg, r)),
            })
        })
        .collect();
    json!({ "dimension": outcome.dimension, "solutions": solutions })
}
