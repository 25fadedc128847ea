use std::io::Write;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use isogenion::elliptic_curve::{classify_with_trace, curve_from_j, Curve};
use isogenion::finite_field::{field_create, Field};
use isogenion::hom_index_kernel::{corresponds_to_kernel_ideal, hom_index, kernel_round_trip};
use isogenion::isogeny::Isogeny;
use isogenion::isogeny_graph::{build_graph, verify_volcano};
use isogenion::minimal_degree::{md_between, md_classifier};
use isogenion::quadratic_order::{class_group, ideal_table, least_norms_per_class, minkowski_bound, QuadOrder};
use isogenion::walk::Walk;

mod repro;

#[derive(Parser)]
#[command(name = "isogenion", version, about = "Isogeny volcanoes, kernel ideals and minimal degrees")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Dot,
    Json,
}

#[derive(clap::Args)]
struct FieldArgs {
    /// Characteristic.
    #[arg(long)]
    p: u64,
    /// Extension degree.
    #[arg(long, default_value_t = 1)]
    r: usize,
    /// Trace of Frobenius.
    #[arg(long, allow_hyphen_values = true)]
    trace: i64,
}

#[derive(Subcommand)]
enum Command {
    /// The l-isogeny graph of all curves with the given trace.
    Volcano {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long)]
        ell: u64,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Index of the left ideal Hom(E1, E2) beta in End(E2).
    Index {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long, allow_hyphen_values = true)]
        j_source: i64,
        #[arg(long, allow_hyphen_values = true)]
        j_target: i64,
        /// Comma-separated prime degrees, applied left to right.
        #[arg(long, value_delimiter = ',', default_value = "")]
        degree_chain: Vec<String>,
    },
    /// Non-trivial minimal degree between two classes.
    Md {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long, allow_hyphen_values = true)]
        j_source: i64,
        #[arg(long, allow_hyphen_values = true)]
        j_target: i64,
        /// Search over the algebraic closure instead of k.
        #[arg(long)]
        closure: bool,
    },
    /// Invertible and non-invertible ideals of l-power norm in Z + Z f gamma.
    CountIdeals {
        #[arg(long, allow_hyphen_values = true)]
        d0: i64,
        #[arg(long)]
        f: u64,
        #[arg(long)]
        ell: u64,
        #[arg(long)]
        n: u32,
    },
    /// Md(E, E) from the CM table, checked against a direct search.
    ClassifyMd {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long, allow_hyphen_values = true)]
        j: i64,
    },
    /// Class group of the order of the given discriminant.
    ClassGroup {
        #[arg(long, allow_hyphen_values = true)]
        disc: i64,
    },
    /// Recompute a worked example and compare with the expected values.
    Repro {
        #[arg(value_parser = clap::value_parser!(u8).range(1..=4))]
        example: u8,
    },
}

pub enum Failure {
    Domain(String),
    Mismatch(serde_json::Value),
}

impl<E: std::error::Error> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Domain(e.to_string())
    }
}

fn field(args: &FieldArgs) -> Result<Arc<Field>, Failure> {
    Ok(field_create(args.p, args.r)?)
}

fn curve(f: &Arc<Field>, j: i64, t: i64) -> Result<Curve, Failure> {
    Ok(curve_from_j(f, &f.from_i64(j), t)?)
}

fn parse_chain(raw: &[String]) -> Result<Vec<u64>, Failure> {
    raw.iter()
        .filter(|s| !s.is_empty())
        .map(|s| s.trim().parse().map_err(|_| Failure::Domain(format!("bad degree {s:?}"))))
        .collect()
}

fn run(cmd: Command) -> Result<String, Failure> {
    match cmd {
        Command::Volcano { field: fa, ell, format } => {
            let g = build_graph(&field(&fa)?, fa.trace, ell)?;
            Ok(match format {
                Format::Dot => g.to_dot(),
                Format::Json => {
                    let mut v = g.to_json();
                    v["volcano"] = serde_json::to_value(verify_volcano(&g)).expect("serializable report");
                    pretty(&v)
                }
            })
        }
        Command::Index { field: fa, j_source, j_target, degree_chain } => {
            let f = field(&fa)?;
            let chain = parse_chain(&degree_chain)?;
            let e2 = curve(&f, j_source, fa.trace)?;
            let want = f.from_i64(j_target);
            let beta: Isogeny = Walk::along(&e2, fa.trace, &chain)?
                .into_iter()
                .map(|w| w.isogeny)
                .find(|b| b.target().j_invariant() == want)
                .ok_or_else(|| Failure::Domain(format!("no walk {chain:?} from j={j_source} reaches j={j_target}")))?;
            let e1 = classify_with_trace(beta.target(), fa.trace).representative;
            let d = hom_index(&e2, &e1, &beta)?;
            let mut v = d.to_json();
            v["agrees"] = json!(d.index == d.oracle_index);
            v["corresponds"] = json!(corresponds_to_kernel_ideal(&e2, &e1)?);
            v["round_trip"] = json!(kernel_round_trip(&beta)?);
            Ok(pretty(&v))
        }
        Command::Md { field: fa, j_source, j_target, closure } => {
            let f = field(&fa)?;
            let r = md_between(&curve(&f, j_source, fa.trace)?, &curve(&f, j_target, fa.trace)?, !closure)?;
            Ok(pretty(&r.to_json()))
        }
        Command::CountIdeals { d0, f, ell, n } => {
            let o = QuadOrder::new(d0, f)?;
            Ok(pretty(&json!(ideal_table(&o, ell, n)?)))
        }
        Command::ClassifyMd { field: fa, j } => {
            let f = field(&fa)?;
            let e = curve(&f, j, fa.trace)?;
            let table = md_classifier(&e)?;
            let search = md_between(&e, &e, false)?;
            let v = json!({
                "j": f.from_i64(j).to_string(),
                "trace": fa.trace,
                "md_classifier": table,
                "md_search": search.md,
                "witness_degree_chain": search.chain,
                "scalar": search.scalar,
            });
            if table != search.md {
                return Err(Failure::Mismatch(v));
            }
            Ok(pretty(&v))
        }
        Command::ClassGroup { disc } => {
            let o = QuadOrder::from_discriminant(disc)?;
            let cg = class_group(&o)?;
            let bound = minkowski_bound(&o);
            let norms: Vec<_> = least_norms_per_class(&o, bound)?
                .into_iter()
                .map(|(form, n)| json!({"form": [form.a, form.b, form.c], "least_norm": n}))
                .collect();
            Ok(pretty(&json!({
                "disc": disc,
                "d0": o.d0,
                "f": o.f,
                "h": cg.h,
                "forms": cg.forms,
                "bound": bound,
                "least_norms": norms,
            })))
        }
        Command::Repro { example } => repro::run(example),
    }
}

fn pretty(v: &serde_json::Value) -> String {
    serde_json::to_string_pretty(v).expect("json values serialize")
}

/// Writes to stdout, tolerating a closed pipe.
fn emit(text: &str) {
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(out) => {
            emit(&out);
            ExitCode::SUCCESS
        }
        Err(Failure::Mismatch(v)) => {
            emit(&pretty(&v));
            ExitCode::from(1)
        }
        Err(Failure::Domain(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
