//! Command-line driver: argument parsing, subcommand dispatch and reporting.
//!
//! [`run`] is the whole program minus process plumbing, so tests can drive it
//! directly. Exit codes: 0 success, 1 domain error, 2 usage error.

use std::io::Read;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use jetsym::algebra::{bracket, closure_check, flat_generators, span_dimension, Closure, FieldBasis};
use jetsym::determining::{
    generate_determining, solve_second_order, symmetry_algebra, InitialData, TaylorRecursion, UnknownCoefficientField,
};
use jetsym::expr::parse_poly;
use jetsym::jet::{involutivity_check, Involutivity};
use jetsym::prolong::lie_criterion_check;
use jetsym::segre::{
    cr_automorphism_algebra, segre_context, segre_system, totally_real_check, DefiningSeries, Signature, DEFAULT_TRUNCATION,
};

pub mod input;
pub mod report;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Domain(String),
}

impl From<jetsym::Error> for CliError {
    fn from(e: jetsym::Error) -> Self {
        CliError::Domain(e.to_string())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Parser, Debug)]
#[command(name = "jetsym", version, about = "Exact point symmetries of second-order PDE systems")]
struct Cli {
    /// Ansatz degree N for Taylor data and symmetry algebras.
    #[arg(long, global = true, default_value_t = jetsym::determining::DEFAULT_ORDER)]
    order: u32,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Base point as comma-separated scalars (x first, then u); default origin.
    #[arg(long, global = true)]
    point: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the cross-derivative compatibility conditions.
    Involutive {
        #[arg(long)]
        system: String,
    },
    /// Lie-criterion residuals of a point field against a system.
    SymmetryCheck {
        #[arg(long)]
        system: String,
        #[arg(long)]
        field: String,
    },
    /// Linear determining equations for the degree-N ansatz.
    Determining {
        #[arg(long)]
        system: String,
    },
    /// Degree-N Taylor polynomial of the symmetry with given initial data.
    Taylor {
        #[arg(long)]
        system: String,
        /// JSON array of (n+m+2)(n+m) scalars.
        #[arg(long)]
        omega: String,
    },
    /// Basis of the degree-N truncated symmetry algebra.
    SymmetryAlgebra {
        #[arg(long)]
        system: String,
    },
    /// Generators of the symmetry algebra of the flat system.
    FlatAlgebra {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
    },
    /// Lie bracket of two fields.
    Bracket {
        #[arg(long)]
        left: String,
        #[arg(long)]
        right: String,
    },
    /// Closure and structure constants of a basis (flat generators by default).
    Closure {
        #[arg(long, required_unless_present = "fields")]
        n: Option<usize>,
        #[arg(long, required_unless_present = "fields")]
        m: Option<usize>,
        #[arg(long, conflicts_with_all = ["n", "m"])]
        fields: Option<String>,
    },
    /// Segre-family system of a hypersurface in normal form.
    SegreDerive {
        /// Levi signature, e.g. `++` or `+-`.
        #[arg(long)]
        signature: String,
        /// Perturbation R(x, u1, zeta1..zeta{n+1}), total degree >= 3.
        #[arg(long, default_value = "0")]
        r: String,
        #[arg(long, default_value_t = DEFAULT_TRUNCATION)]
        truncation: u32,
    },
    /// Infinitesimal automorphisms of the hyperquadric.
    CrAut {
        #[arg(long)]
        signature: String,
    },
    /// Check that the real span of a family meets its i-multiple only in 0.
    TotallyReal {
        #[arg(long, required_unless_present = "signature")]
        fields: Option<String>,
        /// Use the hyperquadric automorphism basis of this signature.
        #[arg(long, conflicts_with = "fields")]
        signature: Option<String>,
    },
}

/// Result of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

struct Report {
    json: Value,
    text: String,
}

/// Runs the program on `argv` (including the program name).
pub fn run<I, S>(argv: I, stdin: &mut dyn Read) -> Outcome
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                Outcome { code, stdout: text, stderr: String::new() }
            } else {
                Outcome { code, stdout: String::new(), stderr: text }
            };
        }
    };
    let format = cli.format;
    match execute(cli, stdin) {
        Ok(r) => {
            let stdout = match format {
                Format::Json => serde_json::to_string_pretty(&r.json).expect("serializable") + "\n",
                Format::Text => r.text,
            };
            Outcome { code: 0, stdout, stderr: String::new() }
        }
        Err(CliError::Usage(msg)) => Outcome { code: 2, stdout: String::new(), stderr: format!("usage error: {msg}\n") },
        Err(CliError::Domain(msg)) => Outcome { code: 1, stdout: String::new(), stderr: format!("error: {msg}\n") },
    }
}

fn signature(s: &str) -> Result<Signature, CliError> {
    s.parse().map_err(|e: jetsym::Error| CliError::Usage(e.to_string()))
}

fn execute(cli: Cli, stdin: &mut dyn Read) -> Result<Report, CliError> {
    let order = cli.order;
    let point = cli.point.as_deref();
    match cli.command {
        Command::Involutive { system } => {
            let sys = input::system(&input::load(&system, stdin)?)?;
            let result = involutivity_check(&sys)?;
            let failures: Vec<_> = match &result {
                Involutivity::Involutive => vec![],
                Involutivity::Fails(f) => f.clone(),
            };
            let mut text = format!("involutive: {}\n", result.is_involutive());
            for f in &failures {
                text.push_str(&format!("  fails (k, i, j, l) = {f}\n"));
            }
            let json = json!({
                "involutive": result.is_involutive(),
                "failures": failures.iter().map(|f| json!({
                    "k": f.k + 1, "i": f.i + 1, "j": f.j + 1, "l": f.l + 1,
                    "difference": report::poly(&f.difference),
                })).collect::<Vec<_>>(),
            });
            Ok(Report { json, text })
        }
        Command::SymmetryCheck { system, field } => {
            let sys = input::system(&input::load(&system, stdin)?)?;
            let x = input::field(&input::load(&field, stdin)?)?;
            if x.ctx() != sys.ctx() {
                return Err(CliError::Domain("field and system have different (n, m)".into()));
            }
            let res = lie_criterion_check(&x, &sys)?;
            let symmetric = res.values().all(|r| r.is_zero());
            let mut text = format!("symmetry: {symmetric}\n");
            let mut rows = Vec::new();
            for (&(k, i, j), r) in &res {
                if !r.is_zero() {
                    text.push_str(&format!("  residual (k, i, j) = ({}, {}, {}): {r}\n", k + 1, i + 1, j + 1));
                }
                rows.push(json!({ "k": k + 1, "i": i + 1, "j": j + 1, "residual": report::poly(r) }));
            }
            Ok(Report { json: json!({ "symmetric": symmetric, "residuals": rows }), text })
        }
        Command::Determining { system } => {
            let sys = input::system(&input::load(&system, stdin)?)?;
            let (n, m) = (sys.ctx().n(), sys.ctx().m());
            let field = UnknownCoefficientField::new(sys.ctx(), input::point(point, n + m)?, order)?;
            let det = generate_determining(&sys, &field)?;
            let mut text = format!("unknowns: {}\nequations: {}\n", field.len(), det.rows());
            let mut rows = Vec::new();
            for r in 0..det.rows() {
                text.push_str(&format!("  [{}] {}    ({})\n", r + 1, det.equation_text(r), det.describe_row(r)));
                rows.push(json!({
                    "origin": det.describe_row(r),
                    "equation": det.equation_text(r),
                    "coefficients": det.row_in_derivatives(r).iter()
                        .map(|(l, c)| json!({ "unknown": l, "value": report::scalar(c) })).collect::<Vec<_>>(),
                }));
            }
            let second = if order >= 2 {
                match solve_second_order(&det) {
                    Ok(sol) => {
                        text.push_str("second-order layer:\n");
                        let mut entries = Vec::new();
                        for e in &sol.entries {
                            let mut terms: Vec<String> = e.form.gamma.iter().enumerate()
                                .filter(|(_, c)| !c.is_zero())
                                .map(|(l, c)| format!("({c})*gamma{}", l + 1))
                                .collect();
                            terms.extend(e.form.omega.iter().map(|(r, c)| format!("({c})*Omega{}", r + 1)));
                            let rhs = if terms.is_empty() { "0".to_string() } else { terms.join(" + ") };
                            text.push_str(&format!("  {} = {}\n", e.label, rhs));
                            entries.push(json!({
                                "unknown": e.label,
                                "gamma": report::scalars(&e.form.gamma),
                                "omega": e.form.omega.iter().map(|(r, c)| json!({ "row": r + 1, "value": report::scalar(c) })).collect::<Vec<_>>(),
                            }));
                        }
                        json!({
                            "selected_rows": sol.selected_rows.iter().map(|r| r + 1).collect::<Vec<_>>(),
                            "entries": entries,
                        })
                    }
                    Err(e) => {
                        text.push_str(&format!("second-order layer: {e}\n"));
                        json!({ "error": e.to_string() })
                    }
                }
            } else {
                Value::Null
            };
            let json = json!({
                "n": n, "m": m, "order": order,
                "unknowns": (0..field.len()).map(|k| field.label(k)).collect::<Vec<_>>(),
                "equations": rows,
                "second_order": second,
            });
            Ok(Report { json, text })
        }
        Command::Taylor { system, omega } => {
            let sys = input::system(&input::load(&system, stdin)?)?;
            let (n, m) = (sys.ctx().n(), sys.ctx().m());
            let base = input::point(point, n + m)?;
            let values = input::initial_data(&input::load(&omega, stdin)?)?;
            let data = InitialData::from_vec(n, m, &values)?;
            let rec = TaylorRecursion::new(&sys, base, order)?;
            let f = rec.field_for(&data.to_vec())?;
            let text = format!("{f}\n");
            Ok(Report { json: json!({ "order": order, "omega": report::scalars(&values), "field": report::field(&f) }), text })
        }
        Command::SymmetryAlgebra { system } => {
            let sys = input::system(&input::load(&system, stdin)?)?;
            let (n, m) = (sys.ctx().n(), sys.ctx().m());
            let base = input::point(point, n + m)?;
            let alg = symmetry_algebra(&sys, order, &base)?;
            let mut text = format!("dimension: {}\n", alg.dimension());
            for (k, f) in alg.basis.iter().enumerate() {
                text.push_str(&format!("  Z{} = {f}\n", k + 1));
            }
            let json = json!({
                "n": n, "m": m, "order": order,
                "point": report::scalars(&base),
                "dimension": alg.dimension(),
                "basis": alg.basis.iter().map(report::field).collect::<Vec<_>>(),
            });
            Ok(Report { json, text })
        }
        Command::FlatAlgebra { n, m } => {
            let g = flat_generators(n, m)?;
            let mut text = format!("dimension: {}\n", g.len());
            for (name, f) in g.names().iter().zip(g.fields()) {
                text.push_str(&format!("  {name} = {f}\n"));
            }
            let json = json!({
                "n": n, "m": m,
                "dimension": span_dimension(g.fields()),
                "generators": g.names().iter().zip(g.fields())
                    .map(|(name, f)| json!({ "name": name, "field": report::field(f) })).collect::<Vec<_>>(),
            });
            Ok(Report { json, text })
        }
        Command::Bracket { left, right } => {
            let x = input::field(&input::load(&left, stdin)?)?;
            let y = input::field(&input::load(&right, stdin)?)?;
            if x.ctx() != y.ctx() {
                return Err(CliError::Domain("fields have different (n, m)".into()));
            }
            let b = bracket(&x, &y);
            Ok(Report { text: format!("{b}\n"), json: json!({ "bracket": report::field(&b) }) })
        }
        Command::Closure { n, m, fields } => {
            let basis = match (fields, n, m) {
                (Some(f), _, _) => FieldBasis::new(input::fields(&input::load(&f, stdin)?)?)?,
                (None, Some(n), Some(m)) => flat_generators(n, m)?,
                _ => return Err(CliError::Usage("give --fields or both --n and --m".into())),
            };
            Ok(closure_report(&basis))
        }
        Command::SegreDerive { signature: sig, r, truncation } => {
            let sig = signature(&sig)?;
            let ctx = segre_context(sig.n())?;
            let r = parse_poly(&r, ctx.table())?;
            let def = DefiningSeries::new(sig.clone(), &r)?;
            let sys = segre_system(&def, truncation)?;
            let involutive = involutivity_check(&sys)?.is_involutive();
            let mut text = format!("signature: {sig}\ntruncation: {truncation}\ninvolutive: {involutive}\n");
            let mut entries = Vec::new();
            for (&(k, i, j), f) in sys.entries() {
                text.push_str(&format!("  F[{},{},{}] = {f}\n", k + 1, i + 1, j + 1));
                entries.push(json!({ "k": k + 1, "i": i + 1, "j": j + 1, "F": f.to_string(), "terms": report::poly(f)["terms"] }));
            }
            let json = json!({
                "n": sig.n(), "m": 1,
                "signature": sig.to_string(),
                "truncation": truncation,
                "involutive": involutive,
                "entries": entries,
            });
            Ok(Report { json, text })
        }
        Command::CrAut { signature: sig } => {
            let sig = signature(&sig)?;
            let aut = cr_automorphism_algebra(&sig)?;
            let real = totally_real_check(&aut.basis);
            let mut text = format!("real_dimension: {}\ntotally_real: {real}\n", aut.real_dimension());
            for (k, f) in aut.basis.iter().enumerate() {
                text.push_str(&format!("  R{} = {f}\n", k + 1));
            }
            let json = json!({
                "signature": sig.to_string(),
                "real_dimension": aut.real_dimension(),
                "totally_real": real,
                "basis": aut.basis.iter().map(report::field).collect::<Vec<_>>(),
            });
            Ok(Report { json, text })
        }
        Command::TotallyReal { fields, signature: sig } => {
            let basis = match (fields, sig) {
                (Some(f), _) => input::fields(&input::load(&f, stdin)?)?,
                (None, Some(s)) => cr_automorphism_algebra(&signature(&s)?)?.basis,
                _ => return Err(CliError::Usage("give --fields or --signature".into())),
            };
            let real = totally_real_check(&basis);
            Ok(Report { text: format!("totally_real: {real}\n"), json: json!({ "count": basis.len(), "totally_real": real }) })
        }
    }
}

fn closure_report(basis: &FieldBasis) -> Report {
    let names = basis.names();
    match closure_check(basis) {
        Closure::Closes(sc) => {
            let mut text = format!("closes: true\ndimension: {}\n", basis.len());
            let mut consts = Vec::new();
            for (a, b, c, v) in sc.nonzero() {
                text.push_str(&format!("  [{}, {}] += ({v})*{}\n", names[a], names[b], names[c]));
                consts.push(json!({ "a": names[a], "b": names[b], "c": names[c], "value": report::scalar(&v) }));
            }
            Report { json: json!({ "closes": true, "dimension": basis.len(), "structure_constants": consts }), text }
        }
        Closure::Fails { a, b, bracket, residual } => {
            let text = format!("closes: false\n  [{}, {}] = {bracket}\n  residual: {residual}\n", names[a], names[b]);
            let json = json!({
                "closes": false,
                "pair": [names[a], names[b]],
                "bracket": report::field(&bracket),
                "residual": report::field(&residual),
            });
            Report { json, text }
        }
    }
}
