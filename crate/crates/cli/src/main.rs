//! `phi-loop`: exact verification suites and bracket computations for the
//! deformed loop algebras of conformal algebras.
//!
//! Exit codes: 0 all checks pass, 1 at least one check failed or errored,
//! 2 usage or parse problems.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use phi_loop_core::conformal::{
    build_current, build_novikov, build_virasoro, parse_algebra, AlgebraData, ConformalAlgebra,
};
use phi_loop_core::field::{CycloScalar, FieldCtx};
use phi_loop_core::loop_alg::{LoopCtx, LoopElement};
use phi_loop_core::parse::parse_tagged_series;
use phi_loop_core::suite::{run_suite, SuiteConfig};
use phi_loop_core::{Deformation, LaurentSeries};

#[derive(Parser)]
#[command(
    name = "phi-loop",
    version,
    about = "Exact calculus for deformed loop algebras"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the canonical bracket of two loop-algebra elements.
    Bracket(BracketArgs),
    /// Print the coefficient table of a delta-type term as JSON arrays.
    DeltaTable(DeltaTableArgs),
    /// Run a verification suite and print its report.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct BracketArgs {
    /// Algebra definition file (JSON); defaults to the builtin sl2.
    #[arg(long)]
    algebra: Option<PathBuf>,
    /// Builtin algebra when no file is given: sl2, gl2, heisenberg,
    /// virasoro, novikov.
    #[arg(long, default_value = "sl2")]
    builtin: String,
    /// Deformation p(x), e.g. "x" or "1 - 3/2*x^-1 + x^2".
    #[arg(long, allow_hyphen_values = true)]
    p: String,
    /// First element, e.g. "e:(x^-1) + c:(1/2)".
    #[arg(long, allow_hyphen_values = true)]
    u: String,
    /// Second element.
    #[arg(long, allow_hyphen_values = true)]
    v: String,
    /// Cyclotomic order of the coefficient field.
    #[arg(long = "M", default_value_t = 1)]
    m: u64,
    /// Print machine-readable JSON instead of text.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct DeltaTableArgs {
    /// Deformation p(x).
    #[arg(long, allow_hyphen_values = true)]
    p: String,
    /// Scaling root lambda (a scalar, e.g. "2" or "w").
    #[arg(long, default_value = "1", allow_hyphen_values = true)]
    lambda: String,
    /// Derivative order of the term.
    #[arg(long, default_value_t = 0)]
    j: u32,
    /// Amplitude series A(w).
    #[arg(long, default_value = "1", allow_hyphen_values = true)]
    amplitude: String,
    /// Window radius: coefficients over |m|, |n| <= r.
    #[arg(long, default_value_t = 8)]
    window: i64,
    /// Cyclotomic order of the coefficient field.
    #[arg(long = "M", default_value_t = 1)]
    m: u64,
}

#[derive(Args)]
struct VerifyArgs {
    /// Suite name: phi, delta, conformal, loop, fields, affine, virasoro,
    /// novikov, twisted, quotient, fock, or all.
    suite: String,
    /// Deformation p(x).
    #[arg(long, default_value = "x", allow_hyphen_values = true)]
    p: String,
    /// Algebra definition file (JSON) for suites that accept one.
    #[arg(long)]
    algebra: Option<PathBuf>,
    /// Cyclotomic order of the coefficient field.
    #[arg(long = "M", default_value_t = 1)]
    m: u64,
    /// Number of random samples per sampled check.
    #[arg(long, default_value_t = 50)]
    samples: u32,
    /// Seed for the deterministic sampler.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Window radius for coefficient sweeps.
    #[arg(long, default_value_t = 8)]
    window: i64,
    /// Working precision floor for truncated inverses.
    #[arg(long, default_value_t = 32)]
    precision: i64,
    /// Central level for the Fock suite.
    #[arg(long, default_value = "1", allow_hyphen_values = true)]
    level: String,
    /// Oscillator degree bound for the Fock suite.
    #[arg(long, default_value_t = 6)]
    degree: u32,
    /// Print the full JSON report.
    #[arg(long)]
    json: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Bracket(args) => run_bracket(&args),
        Command::DeltaTable(args) => run_delta_table(&args),
        Command::Verify(args) => run_verify(&args),
    }
}

fn fail_usage(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {}", msg);
    ExitCode::from(2)
}

fn load_algebra(
    field: &Arc<FieldCtx>,
    path: &Option<PathBuf>,
    builtin: &str,
) -> Result<ConformalAlgebra, String> {
    if let Some(path) = path {
        let json = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read {}: {}", path.display(), e))?;
        return match parse_algebra(field, &json).map_err(|e| e.to_string())? {
            AlgebraData::Lie(d) => Ok(build_current(&d)),
            AlgebraData::Novikov(d) => Ok(build_novikov(&d)),
        };
    }
    match builtin {
        "sl2" => Ok(build_current(&phi_loop_core::conformal::LieData::sl2(
            field,
        ))),
        "gl2" => Ok(build_current(&phi_loop_core::conformal::LieData::gl2(
            field,
        ))),
        "heisenberg" => Ok(build_current(
            &phi_loop_core::conformal::LieData::heisenberg(field),
        )),
        "virasoro" => Ok(build_virasoro(field)),
        "novikov" => Ok(build_novikov(
            &phi_loop_core::conformal::NovikovData::one_dim(
                field,
                CycloScalar::one(field),
                CycloScalar::one(field),
            ),
        )),
        other => Err(format!("unknown builtin algebra `{}`", other)),
    }
}

fn parse_element(lc: &LoopCtx, field: &Arc<FieldCtx>, src: &str) -> Result<LoopElement, String> {
    let alg = lc.algebra();
    let tagged = parse_tagged_series(field, src).map_err(|e| e.to_string())?;
    let mut parts: Vec<(usize, LaurentSeries)> = Vec::new();
    let mut central = CycloScalar::zero(field);
    for (name, series) in tagged {
        if alg.central_name() == Some(name.as_str()) {
            let mut value = CycloScalar::zero(field);
            for (k, c) in series.terms() {
                if k != 0 {
                    return Err(format!(
                        "central coordinate `{}` must be a scalar, got a series",
                        name
                    ));
                }
                value = &value + c;
            }
            central = &central + &value;
        } else {
            let idx = alg.gen_index(&name).map_err(|e| e.to_string())?;
            parts.push((idx, series));
        }
    }
    Ok(LoopElement::from_parts(parts, central))
}

fn run_bracket(args: &BracketArgs) -> ExitCode {
    let field = FieldCtx::new(args.m.max(1));
    let def = match Deformation::parse(&field, &args.p) {
        Ok(d) => d,
        Err(e) => return fail_usage(format!("bad deformation: {}", e)),
    };
    let alg = match load_algebra(&field, &args.algebra, &args.builtin) {
        Ok(a) => a,
        Err(e) => return fail_usage(e),
    };
    let lc = match LoopCtx::new(Arc::new(alg), def) {
        Ok(lc) => lc,
        Err(e) => return fail_usage(e),
    };
    let u = match parse_element(&lc, &field, &args.u) {
        Ok(u) => u,
        Err(e) => return fail_usage(format!("bad --u: {}", e)),
    };
    let v = match parse_element(&lc, &field, &args.v) {
        Ok(v) => v,
        Err(e) => return fail_usage(format!("bad --v: {}", e)),
    };
    let result = match lc.bracket(&u, &v) {
        Ok(r) => r,
        Err(e) => return fail_usage(format!("bracket failed: {}", e)),
    };

    let mut parts: BTreeMap<String, String> = BTreeMap::new();
    for (gen, series) in result.parts() {
        parts.insert(lc.algebra().gens()[gen].clone(), series.to_string());
    }
    let central_name = lc.algebra().central_name().unwrap_or("c").to_string();
    if args.json {
        let out = serde_json::json!({
            "parts": parts,
            "central": result.central().to_string(),
            "central_name": central_name,
        });
        println!(
            "{}",
            serde_json::to_string_pretty(&out).expect("serializable")
        );
    } else {
        println!("[u, v] = {}", lc.render(&result));
    }
    ExitCode::SUCCESS
}

fn run_delta_table(args: &DeltaTableArgs) -> ExitCode {
    use phi_loop_core::delta::{DeltaSum, DeltaTerm, Window};
    use phi_loop_core::parse::{parse_scalar, parse_series};

    let field = FieldCtx::new(args.m.max(1));
    let def = match Deformation::parse(&field, &args.p) {
        Ok(d) => d,
        Err(e) => return fail_usage(format!("bad deformation: {}", e)),
    };
    let lambda = match parse_scalar(&field, &args.lambda) {
        Ok(l) => l,
        Err(e) => return fail_usage(format!("bad --lambda: {}", e)),
    };
    let amplitude = match parse_series(&field, &args.amplitude) {
        Ok(a) => a,
        Err(e) => return fail_usage(format!("bad --amplitude: {}", e)),
    };
    let term = match DeltaTerm::new(lambda, args.j, amplitude) {
        Ok(t) => t,
        Err(e) => return fail_usage(format!("bad term: {}", e)),
    };
    let sum = match DeltaSum::new(def, vec![term]) {
        Ok(s) => s,
        Err(e) => return fail_usage(e),
    };
    let table = match sum.coeff_table(Window::square(args.window.max(0))) {
        Ok(t) => t,
        Err(e) => return fail_usage(format!("extraction failed: {}", e)),
    };
    let rows: Vec<Vec<String>> = table
        .values
        .iter()
        .map(|row| row.iter().map(|c| c.to_string()).collect())
        .collect();
    let out = serde_json::json!({
        "window": {
            "m": [table.window.m_lo, table.window.m_hi],
            "n": [table.window.n_lo, table.window.n_hi],
        },
        "rows": rows,
    });
    println!(
        "{}",
        serde_json::to_string_pretty(&out).expect("serializable")
    );
    ExitCode::SUCCESS
}

fn run_verify(args: &VerifyArgs) -> ExitCode {
    let (algebra_json, algebra_label) = match &args.algebra {
        None => (None, None),
        Some(path) => match std::fs::read_to_string(path) {
            Ok(json) => (Some(json), Some(path.display().to_string())),
            Err(e) => return fail_usage(format!("cannot read {}: {}", path.display(), e)),
        },
    };
    let cfg = SuiteConfig {
        suite: args.suite.clone(),
        p: args.p.clone(),
        m: args.m.max(1),
        algebra_json,
        algebra_label,
        samples: args.samples,
        seed: args.seed,
        window: args.window,
        precision: args.precision,
        level: args.level.clone(),
        degree: args.degree,
    };
    let report = match run_suite(&cfg) {
        Ok(r) => r,
        Err(e) => return fail_usage(e),
    };

    if args.json {
        println!("{}", report.to_json());
    } else {
        let (pass, fail, error) = report.counts();
        println!(
            "suite {}: {} checks ({} pass, {} fail, {} error)",
            report.suite,
            pass + fail + error,
            pass,
            fail,
            error
        );
        for note in &report.notes {
            println!("note: {}", note);
        }
        for check in &report.checks {
            if check.status != phi_loop_core::report::Status::Pass {
                println!(
                    "{:?} {} :: {}",
                    check.status,
                    check.name,
                    check.witness.as_deref().unwrap_or("")
                );
            }
        }
        println!("result: {}", if report.passed { "PASS" } else { "FAIL" });
    }
    if report.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
