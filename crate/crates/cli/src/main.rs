use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use exotic_bv::arnold::basis_oracle;
use exotic_bv::darboux::{bv_axioms, leibniz_witness, nu5_match, random_poly, OddSymplecticContext};
use exotic_bv::diagrams::{bracketing_to_diagram, enumerate, prime_bracketings, Chord, ChordMonomial, DiagramClass};
use exotic_bv::exotic::{
    ainfty_check, compute_nu, derivation_check, prime_data, CheckConfig, IdentityReport, PeriodMode,
};
use exotic_bv::graphs::{appendix_identity, BVTerm};
use exotic_bv::mzv::RelationTable;
use exotic_bv::periods::{period, Method};
use exotic_bv::Error;

/// Version of the JSON documents written with `--format json`.
const SCHEMA_VERSION: u32 = 1;

#[derive(Parser, Debug)]
#[command(
    name = "exotic-bv",
    version,
    about = "Chord diagrams, MZV periods and the exotic A-infinity operations on BV algebras"
)]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Pretty)]
    format: Format,
    /// Print D instead of Δ.
    #[arg(long, global = true)]
    ascii: bool,
    /// Worker threads (defaults to the number of cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed for random inputs and Monte Carlo sampling.
    #[arg(long, global = true, default_value_t = 7)]
    seed: u64,
    /// MZV relation table (JSON); defaults to the built-in weight-4 table.
    #[arg(long, global = true, env = "EXOTIC_BV_MZV_TABLE")]
    mzv_table: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Pretty,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// List chord diagrams of a class.
    Enumerate(EnumerateArgs),
    /// Compute the operation ν_n.
    Nu(NuArgs),
    /// Run a verification suite.
    Verify {
        #[command(subcommand)]
        suite: Suite,
    },
    /// Period integrals of prime forms.
    Periods {
        #[command(subcommand)]
        command: PeriodsCommand,
    },
    /// Checks in the Darboux representation.
    Darboux {
        #[command(subcommand)]
        command: DarbouxCommand,
    },
    /// The exotic operations.
    Exotic {
        #[command(subcommand)]
        command: ExoticCommand,
    },
}

#[derive(Args, Debug)]
struct EnumerateArgs {
    #[arg(long)]
    n: usize,
    /// Number of chords; defaults to n-3 with --top, otherwise required.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value = "gravity")]
    class: DiagramClass,
    /// Top degree (k = n-3).
    #[arg(long)]
    top: bool,
}

#[derive(Args, Debug)]
struct NuArgs {
    #[arg(long)]
    n: usize,
    /// numeric or symbolic (fit periods to the MZV table).
    #[arg(long, default_value = "symbolic")]
    mode: PeriodMode,
}

#[derive(Args, Debug, Clone)]
struct CheckArgs {
    /// Number of conjugate pairs in the Darboux algebra.
    #[arg(long, default_value_t = 3)]
    d: usize,
    #[arg(long, default_value_t = 20)]
    trials: usize,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Use numerical periods instead of fitted MZVs.
    #[arg(long)]
    numeric: bool,
}

#[derive(Subcommand, Debug)]
enum Suite {
    /// Cyclic compatibility of γ.
    Appendix {
        #[arg(long, default_value_t = 9)]
        max_n: usize,
    },
    /// Gravity and prime counts against independent ranks.
    Bases {
        #[arg(long, default_value_t = 7)]
        max_n: usize,
    },
    /// A∞ relations for polygons 5..=max-n.
    Ainfty {
        #[arg(long, default_value_t = 7)]
        max_n: usize,
        #[command(flatten)]
        check: CheckArgs,
        /// Relative perturbation of one coefficient of the top operation.
        #[arg(long)]
        perturb: Option<f64>,
    },
    /// {f, -} acts on ν_n by derivations for Δ-closed f.
    Derivation {
        #[arg(long, value_delimiter = ',', default_value = "3,5")]
        n: Vec<usize>,
        #[command(flatten)]
        check: CheckArgs,
    },
    /// BV identities for Δ and the bracket.
    BvAxioms {
        #[arg(long, default_value_t = 3)]
        d: usize,
        #[arg(long, default_value_t = 100)]
        trials: usize,
    },
    /// Explicit-formula ν_5 against the operadic ν_5.
    Nu5Match {
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long, default_value_t = 50)]
        trials: usize,
    },
}

#[derive(Subcommand, Debug)]
enum PeriodsCommand {
    /// Integrate one prime form.
    Integrate {
        #[arg(long)]
        n: usize,
        /// 1-based index into the prime list of `enumerate --class prime --top`.
        #[arg(long, default_value_t = 1)]
        prime_index: usize,
        #[arg(long, value_enum, default_value_t = MethodArg::Nested)]
        method: MethodArg,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        /// Monte Carlo sample count.
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Nested,
    Montecarlo,
}

#[derive(Subcommand, Debug)]
enum DarbouxCommand {
    /// Run a representation check.
    Check {
        #[arg(long, value_enum)]
        suite: DarbouxSuite,
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long, default_value_t = 50)]
        trials: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum DarbouxSuite {
    BvAxioms,
    Nu5Match,
    Leibniz,
}

#[derive(Subcommand, Debug)]
enum ExoticCommand {
    /// Compute the operation ν_n.
    Nu(NuArgs),
}

/// A finished command: its JSON body, its pretty rendering and whether
/// every check in it passed.
struct Outcome {
    command: &'static str,
    body: Value,
    text: String,
    passed: bool,
}

impl Outcome {
    fn listing(command: &'static str, body: Value, text: String) -> Outcome {
        Outcome { command, body, text, passed: true }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(out) => {
            match cli.format {
                Format::Json => {
                    let doc = json!({
                        "schema_version": SCHEMA_VERSION,
                        "command": out.command,
                        "passed": out.passed,
                        "result": out.body,
                    });
                    emit(&serde_json::to_string_pretty(&doc).expect("JSON values serialize"));
                }
                Format::Pretty if out.text.is_empty() => {}
                Format::Pretty => emit(&out.text),
            }
            if out.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            let usage = e
                .downcast_ref::<Error>()
                .is_some_and(|e| matches!(e, Error::Domain(_) | Error::Parse(_) | Error::Io(_)));
            ExitCode::from(if usage { 2 } else { 1 })
        }
    }
}

/// Writes to stdout, ignoring a closed pipe.
fn emit(text: &str) {
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn run(cli: &Cli) -> anyhow::Result<Outcome> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global().context("configuring the worker pool")?;
    }
    let table = match &cli.mzv_table {
        Some(p) => RelationTable::load(p)?,
        None => RelationTable::builtin().clone(),
    };
    match &cli.command {
        Command::Enumerate(a) => cmd_enumerate(a),
        Command::Nu(a) | Command::Exotic { command: ExoticCommand::Nu(a) } => cmd_nu(a, cli.ascii, &table),
        Command::Verify { suite } => cmd_verify(suite, cli.seed, &table),
        Command::Periods { command: PeriodsCommand::Integrate { n, prime_index, method, tol, samples } } => {
            cmd_integrate(*n, *prime_index, *method, *tol, *samples, cli.seed, &table)
        }
        Command::Darboux { command: DarbouxCommand::Check { suite, d, trials } } => {
            let suite = match suite {
                DarbouxSuite::BvAxioms => Suite::BvAxioms { d: *d, trials: *trials },
                DarbouxSuite::Nu5Match => Suite::Nu5Match { d: *d, trials: *trials },
                DarbouxSuite::Leibniz => return cmd_leibniz(*d, *trials, cli.seed),
            };
            cmd_verify(&suite, cli.seed, &table)
        }
    }
}

fn chord_json(c: &Chord) -> Value {
    let (i, j) = c.endpoints();
    json!([i, j])
}

fn monomial_json(m: &ChordMonomial) -> Value {
    json!({ "sign": m.sign, "chords": m.chords.iter().map(chord_json).collect::<Vec<_>>() })
}

fn cmd_enumerate(a: &EnumerateArgs) -> anyhow::Result<Outcome> {
    let k = match (a.k, a.top) {
        (Some(k), _) => k,
        (None, true) => a.n.checked_sub(3).ok_or_else(|| Error::Domain(format!("n = {} is too small", a.n)))?,
        (None, false) => return Err(Error::Domain("pass --k or --top".into()).into()),
    };
    let diagrams = enumerate(a.n, k, a.class)?;
    let bracketings =
        if a.class == DiagramClass::Prime && k + 3 == a.n { prime_bracketings(a.n - 1) } else { Vec::new() };
    let mut entries = Vec::new();
    let mut lines = Vec::new();
    for m in &diagrams {
        let b = bracketings.iter().find(|b| bracketing_to_diagram(b).chords == m.chords);
        let mut e = monomial_json(m);
        if let Some(b) = b {
            e["bracketing"] = json!(b.to_string());
            lines.push(format!("{m}  {b}"));
        } else {
            lines.push(m.to_string());
        }
        entries.push(e);
    }
    lines.push(format!("{} diagrams", diagrams.len()));
    Ok(Outcome::listing(
        "enumerate",
        json!({ "n": a.n, "k": k, "class": a.class, "diagrams": entries }),
        lines.join("\n"),
    ))
}

fn cmd_nu(a: &NuArgs, ascii: bool, table: &RelationTable) -> anyhow::Result<Outcome> {
    let op = compute_nu(a.n, a.mode, table)?;
    let mut terms = Vec::new();
    for t in &op.terms {
        let bv = t.g.printed_terms()?;
        terms.push(json!({
            "prime": monomial_json(&t.prime),
            "coefficient": t.coefficient.exact.as_ref().map(|e| e.to_string()),
            "value": t.coefficient.value,
            "error": t.coefficient.error,
            "g": bv.iter().map(|(w, q)| json!({
                "coefficient": q.to_string(),
                "monomial": w.display_word().iter().map(|g| g.to_string()).collect::<Vec<_>>(),
                "pretty": render(w, ascii),
            })).collect::<Vec<_>>(),
        }));
    }
    let text = if op.is_empty() {
        String::new()
    } else if a.n == 3 {
        "m(1,2)".to_string()
    } else {
        op.pretty(ascii)?
    };
    Ok(Outcome::listing("nu", json!({ "n": a.n, "terms": terms, "pretty": text }), text))
}

fn render(t: &BVTerm, ascii: bool) -> String {
    t.render(ascii)
}

fn report_line(r: &IdentityReport) -> String {
    format!(
        "{} n={} d={}: {} (max residual {:.3e}, {} of {} trials nonzero, exact zero: {})",
        r.check.split_whitespace().next().unwrap_or(&r.check),
        r.n,
        r.d,
        if r.passed { "pass" } else { "FAIL" },
        r.max_residual,
        r.nonzero_trials,
        r.trials,
        r.exact_zero
    )
}

fn check_config(c: &CheckArgs, seed: u64) -> CheckConfig {
    CheckConfig {
        d: c.d,
        trials: c.trials,
        tol: c.tol,
        seed,
        mode: if c.numeric { PeriodMode::Numeric } else { PeriodMode::SymbolicKnown },
        ..CheckConfig::default()
    }
}

fn reports_outcome(command: &'static str, reports: Vec<IdentityReport>) -> Outcome {
    let passed = reports.iter().all(|r| r.passed);
    let text = reports.iter().map(report_line).collect::<Vec<_>>().join("\n");
    Outcome { command, body: json!({ "reports": reports }), text, passed }
}

fn cmd_verify(suite: &Suite, seed: u64, table: &RelationTable) -> anyhow::Result<Outcome> {
    match suite {
        Suite::Appendix { max_n } => {
            let cases = appendix_identity(*max_n)?;
            let failed: Vec<_> = cases.iter().filter(|c| !c.holds).collect();
            let text = if failed.is_empty() {
                format!("appendix: pass ({} cases, 4 <= n <= {max_n})", cases.len())
            } else {
                let list: Vec<String> = failed.iter().map(|c| format!("n={} r={}", c.n, c.r)).collect();
                format!("appendix: FAIL at {}", list.join(", "))
            };
            Ok(Outcome { command: "verify appendix", passed: failed.is_empty(), body: json!({ "cases": cases }), text })
        }
        Suite::Bases { max_n } => {
            let rows = basis_oracle(*max_n)?;
            let mut lines = Vec::new();
            for r in &rows {
                lines.push(format!(
                    "n={} k={}: gravity {} / quotient {}, prime {} / residue kernel {}{}",
                    r.n,
                    r.k,
                    r.gravity,
                    r.quotient_dimension,
                    r.prime,
                    r.residue_kernel_dimension,
                    if r.holds() { "" } else { "  MISMATCH" }
                ));
            }
            let passed = rows.iter().all(|r| r.holds());
            lines.push(format!("bases: {}", if passed { "pass" } else { "FAIL" }));
            Ok(Outcome { command: "verify bases", passed, body: json!({ "rows": rows }), text: lines.join("\n") })
        }
        Suite::Ainfty { max_n, check, perturb } => {
            let cfg = CheckConfig { perturbation: *perturb, ..check_config(check, seed) };
            let reports = (5..=*max_n).map(|n| ainfty_check(n, &cfg, table)).collect::<Result<Vec<_>, _>>()?;
            Ok(reports_outcome("verify ainfty", reports))
        }
        Suite::Derivation { n, check } => {
            let cfg = check_config(check, seed);
            let reports = n.iter().map(|&n| derivation_check(n, &cfg, table)).collect::<Result<Vec<_>, _>>()?;
            Ok(reports_outcome("verify derivation", reports))
        }
        Suite::BvAxioms { d, trials } => {
            let r = bv_axioms(*d, *trials, seed)?;
            let mut text = format!("bv-axioms d={d}: {} ({trials} trials)", if r.passed() { "pass" } else { "FAIL" });
            for f in &r.failures {
                text.push_str(&format!("\n  {f}"));
            }
            Ok(Outcome { command: "verify bv-axioms", passed: r.passed(), body: serde_json::to_value(&r)?, text })
        }
        Suite::Nu5Match { d, trials } => {
            let r = nu5_match(*d, *trials, seed, table)?;
            Ok(reports_outcome("verify nu5-match", vec![r]))
        }
    }
}

fn cmd_leibniz(d: usize, trials: usize, seed: u64) -> anyhow::Result<Outcome> {
    let ctx = OddSymplecticContext::new(d)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = Vec::new();
    for t in 0..trials {
        let fs: Vec<_> = (0..3).map(|_| random_poly(&ctx, &mut rng, 3)).collect();
        let g = random_poly(&ctx, &mut rng, 3);
        let w = leibniz_witness(&fs, &g)?;
        if !w.is_zero() {
            failures.push(format!("trial {t}: residual {w}"));
        }
    }
    let passed = failures.is_empty();
    let text = format!("leibniz d={d}: {} ({trials} trials)", if passed { "pass" } else { "FAIL" });
    Ok(Outcome {
        command: "darboux check leibniz",
        body: json!({ "d": d, "trials": trials, "failures": failures }),
        text,
        passed,
    })
}

fn cmd_integrate(
    n: usize,
    index: usize,
    method: MethodArg,
    tol: f64,
    samples: u64,
    seed: u64,
    table: &RelationTable,
) -> anyhow::Result<Outcome> {
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")).into());
    }
    if n < 5 {
        return Err(Error::Domain(format!("period integrals need n >= 5, got {n}")).into());
    }
    let data = prime_data(n)?;
    let p = index
        .checked_sub(1)
        .and_then(|i| data.get(i))
        .ok_or_else(|| Error::Domain(format!("prime index {index} out of range 1..={}", data.len())))?;
    let method = match method {
        MethodArg::Nested => Method::Nested,
        MethodArg::Montecarlo => Method::MonteCarlo { samples, seed },
    };
    let r = period(&p.prime, method, tol, table)?;
    let fitted = r.fitted.as_ref().map(|e| e.to_string());
    let text = format!(
        "P{index} = {}: {:.12} ± {:.2e}{}",
        p.prime,
        r.value,
        r.error,
        fitted.as_ref().map(|f| format!(" = {f}")).unwrap_or_default()
    );
    Ok(Outcome::listing(
        "periods integrate",
        json!({ "n": n, "prime": monomial_json(&p.prime), "value": r.value, "error": r.error, "fitted": fitted }),
        text,
    ))
}
