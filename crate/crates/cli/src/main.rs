//! Command-line front end: compile approximation plans, emit circuits,
//! run the two-party protocols over TCP, and print cost reports.
//!
//! Exit codes: 2 invalid configuration, 3 codomain violation,
//! 4 transport failure, 5 test-decode mismatch.

mod expr;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use pwstpc::account::{model_full_gc, model_hybrid, render_text, CostModel};
use pwstpc::circuit::{compose_full_gc, count_gates, write_circuit};
use pwstpc::encode::{encode_plan, reference_eval, reference_eval_raw};
use pwstpc::ot::GroupId;
use pwstpc::partition::{bisect, FitKind};
use pwstpc::protocol::{
    run_full_gc, run_hybrid, Role, SecurityConfig, SessionConfig, SessionResult,
};
use pwstpc::quantize::{quantize_function, FunctionSpec, QuantizeError};
use pwstpc::transport::TcpTransport;
use pwstpc::{ApproxPlan64, FunctionSpec64};

const EXIT_CONFIG: u8 = 2;
const EXIT_CODOMAIN: u8 = 3;
const EXIT_TRANSPORT: u8 = 4;
const EXIT_MISMATCH: u8 = 5;

#[derive(Parser)]
#[command(name = "pwstpc", version, about = "Piecewise-polynomial approximation, evaluated privately between two parties")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Quantize a function, partition its domain and write the plan.
    Approx(ApproxArgs),
    /// Compile a plan into the garbled-circuit text format.
    Compile(CompileArgs),
    /// Run one protocol endpoint over TCP.
    Run(RunArgs),
    /// Print the analytic communication/computation cost model.
    Report(ReportArgs),
    /// Run the exhaustive in-process equivalence suites.
    Selftest(SelftestArgs),
}

#[derive(Args)]
struct ApproxArgs {
    /// `sinc`, `table:FILE` (JSON samples) or `expr:EXPRESSION`.
    #[arg(long)]
    function: String,
    /// Input bits.
    #[arg(long, default_value_t = 8)]
    lx: u8,
    /// Output bits (defaults to --lx).
    #[arg(long)]
    ly: Option<u8>,
    /// Target relative approximation error.
    #[arg(long, default_value_t = 0.1)]
    eps: f64,
    /// Polynomial degree (0..=3).
    #[arg(long, default_value_t = 1)]
    degree: u8,
    /// Pin the fit to each segment's extreme samples (degree 1 or 2).
    #[arg(long)]
    continuous: bool,
    /// Domain bounds, required for `expr:`.
    #[arg(long)]
    xa: Option<f64>,
    #[arg(long)]
    xb: Option<f64>,
    /// Codomain bounds, required for `expr:`.
    #[arg(long)]
    ya: Option<f64>,
    #[arg(long)]
    yb: Option<f64>,
    /// Output plan path.
    #[arg(long, default_value = "plan.json")]
    out: PathBuf,
}

#[derive(Args)]
struct CompileArgs {
    #[arg(long)]
    plan: PathBuf,
    /// Output circuit path.
    #[arg(long, default_value = "circuit.txt")]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum RoleArg {
    Garbler,
    Evaluator,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProtocolArg {
    Gc,
    Hybrid,
}

#[derive(Clone, Copy, ValueEnum)]
enum OtGroupArg {
    Modp2048,
    Test512,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    role: RoleArg,
    #[arg(long, value_enum, default_value_t = ProtocolArg::Gc)]
    protocol: ProtocolArg,
    #[arg(long)]
    plan: PathBuf,
    /// Accept one connection on HOST:PORT.
    #[arg(long, conflicts_with = "connect")]
    listen: Option<String>,
    /// Connect to HOST:PORT.
    #[arg(long)]
    connect: Option<String>,
    /// The evaluator's private input x̂.
    #[arg(long)]
    input: Option<u32>,
    /// Session seed; falls back to $PWSTPC_SEED, then 0.
    #[arg(long)]
    seed: Option<u64>,
    /// Exchange decoded results and verify against the reference.
    #[arg(long)]
    test_decode: bool,
    #[arg(long, default_value_t = 80)]
    t: u16,
    #[arg(long, default_value_t = 80)]
    tau: u16,
    /// Paillier modulus bits (hybrid).
    #[arg(long, default_value_t = 1024)]
    he_bits: u64,
    /// Allow sub-production Paillier moduli.
    #[arg(long)]
    insecure_test_keys: bool,
    #[arg(long, value_enum, default_value_t = OtGroupArg::Modp2048)]
    ot_group: OtGroupArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Text,
    Json,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long)]
    plan: PathBuf,
    #[arg(long, value_enum, default_value_t = FormatArg::Text)]
    format: FormatArg,
    #[arg(long, default_value_t = 80)]
    t: u16,
    #[arg(long, default_value_t = 1024)]
    he_bits: u64,
    #[arg(long, default_value_t = 80)]
    tau: u16,
}

#[derive(Args)]
struct SelftestArgs {
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.cmd {
        Cmd::Approx(args) => cmd_approx(args),
        Cmd::Compile(args) => cmd_compile(args),
        Cmd::Run(args) => cmd_run(args),
        Cmd::Report(args) => cmd_report(args),
        Cmd::Selftest(args) => cmd_selftest(args),
    }
}

fn config_error(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(EXIT_CONFIG)
}

fn build_spec(args: &ApproxArgs) -> Result<FunctionSpec64, ExitCode> {
    let ly = args.ly.unwrap_or(args.lx);
    if let Some(rest) = args.function.strip_prefix("table:") {
        let doc = fs::read_to_string(rest).map_err(config_error)?;
        let json: serde_json::Value = serde_json::from_str(&doc).map_err(config_error)?;
        let get = |k: &str| -> Result<f64, ExitCode> {
            json.get(k)
                .and_then(|v| v.as_f64())
                .ok_or_else(|| config_error(format!("table file missing numeric `{k}`")))
        };
        let samples: Vec<f64> = json
            .get("samples")
            .and_then(|v| v.as_array())
            .ok_or_else(|| config_error("table file missing `samples` array"))?
            .iter()
            .map(|v| v.as_f64().ok_or_else(|| config_error("non-numeric sample")))
            .collect::<Result<_, _>>()?;
        return FunctionSpec::from_samples(
            samples,
            (get("xa")?, get("xb")?),
            (get("ya")?, get("yb")?),
            args.lx,
            ly,
        )
        .map_err(config_error);
    }
    if let Some(rest) = args.function.strip_prefix("expr:") {
        let parsed = expr::parse(rest).map_err(config_error)?;
        let (xa, xb, ya, yb) = match (args.xa, args.xb, args.ya, args.yb) {
            (Some(xa), Some(xb), Some(ya), Some(yb)) => (xa, xb, ya, yb),
            _ => {
                return Err(config_error(
                    "expr functions need --xa --xb --ya --yb bounds",
                ))
            }
        };
        return FunctionSpec::new(move |x| parsed.eval(x), (xa, xb), (ya, yb), args.lx, ly)
            .map_err(config_error);
    }
    if args.function == "sinc" {
        return FunctionSpec::sinc(args.lx, ly).map_err(config_error);
    }
    Err(config_error(format!(
        "unknown --function `{}` (expected sinc, table:FILE or expr:EXPR)",
        args.function
    )))
}

fn cmd_approx(args: ApproxArgs) -> ExitCode {
    let spec = match build_spec(&args) {
        Ok(s) => s,
        Err(code) => return code,
    };
    let table = match quantize_function(&spec) {
        Ok(t) => t,
        Err(e @ QuantizeError::CodomainViolation { .. }) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CODOMAIN);
        }
        Err(e) => return config_error(e),
    };
    let fit = if args.continuous { FitKind::Continuous } else { FitKind::Plain };
    let tree = match bisect(&table, args.degree, args.eps, fit) {
        Ok(t) => t,
        Err(e) => return config_error(e),
    };
    let plan = match encode_plan(tree) {
        Ok(p) => p,
        Err(e) => return config_error(e),
    };
    let doc = serde_json::to_string_pretty(&plan).expect("plan serializes");
    if let Err(e) = fs::write(&args.out, doc) {
        return config_error(e);
    }
    println!(
        "N={} lv={} lp={} (degree {}, {:?} fit, eps {})",
        plan.leaf_count(),
        plan.widths.lv,
        plan.widths.lp,
        plan.degree(),
        fit,
        args.eps,
    );
    println!("plan written to {}", args.out.display());
    ExitCode::SUCCESS
}

fn load_plan(path: &PathBuf) -> Result<ApproxPlan64, ExitCode> {
    let doc = fs::read_to_string(path).map_err(config_error)?;
    serde_json::from_str(&doc).map_err(config_error)
}

fn cmd_compile(args: CompileArgs) -> ExitCode {
    let plan = match load_plan(&args.plan) {
        Ok(p) => p,
        Err(code) => return code,
    };
    let composed = compose_full_gc(&plan);
    if let Err(e) = fs::write(&args.out, write_circuit(&composed.circuit)) {
        return config_error(e);
    }
    let total = count_gates(&composed.circuit);
    let s = composed.stages;
    println!(
        "non-XOR {} (tree {} + select {} + subtract {} + horner {} + clamp {}), XOR {}, NOT {}",
        total.non_xor_count,
        s.tree.non_xor_count,
        s.select.non_xor_count,
        s.subtract.non_xor_count,
        s.horner.non_xor_count,
        s.clamp.non_xor_count,
        total.xor_count,
        total.not_count,
    );
    println!("circuit written to {}", args.out.display());
    ExitCode::SUCCESS
}

fn session_seed(seed: Option<u64>) -> u64 {
    seed.or_else(|| {
        std::env::var("PWSTPC_SEED").ok().and_then(|v| v.parse().ok())
    })
    .unwrap_or(0)
}

fn print_stats(result: &SessionResult) {
    let s = &result.stats;
    println!(
        "transcript: sent {} bytes / {} messages, received {} bytes / {} messages",
        s.sent_bytes, s.sent_messages, s.received_bytes, s.received_messages
    );
    println!("garbled material: {} bytes", result.material_bytes);
}

fn cmd_run(args: RunArgs) -> ExitCode {
    let plan = match load_plan(&args.plan) {
        Ok(p) => p,
        Err(code) => return code,
    };
    let role = match args.role {
        RoleArg::Garbler => Role::Garbler,
        RoleArg::Evaluator => Role::Evaluator,
    };
    if matches!(role, Role::Evaluator) && args.input.is_none() {
        return config_error("--role evaluator requires --input");
    }
    let security = SecurityConfig {
        t: args.t,
        tau: args.tau,
        ot_group: match args.ot_group {
            OtGroupArg::Modp2048 => GroupId::Modp2048,
            OtGroupArg::Test512 => GroupId::InsecureTest512,
        },
        he_bits: args.he_bits,
        insecure_test_keys: args.insecure_test_keys,
    };
    let cfg = SessionConfig {
        security,
        seed: session_seed(args.seed),
        test_decode: args.test_decode,
    };
    let mut transport = match (&args.listen, &args.connect) {
        (Some(addr), None) => match TcpTransport::listen(addr.as_str()) {
            Ok(t) => t,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(EXIT_TRANSPORT);
            }
        },
        (None, Some(addr)) => match TcpTransport::connect(addr.as_str()) {
            Ok(t) => t,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(EXIT_TRANSPORT);
            }
        },
        _ => return config_error("exactly one of --listen or --connect is required"),
    };
    let outcome = match args.protocol {
        ProtocolArg::Gc => run_full_gc(&plan, role, args.input, &mut transport, &cfg),
        ProtocolArg::Hybrid => run_hybrid(&plan, role, args.input, &mut transport, &cfg),
    };
    let result = match outcome {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_TRANSPORT);
        }
    };
    print_stats(&result);
    if let Some(decoded) = result.decoded {
        println!("decoded output: {decoded}");
        if let Some(x) = args.input {
            let expect = reference_eval(&plan, x);
            if decoded != expect {
                eprintln!("error: decoded {decoded} but reference evaluator gives {expect}");
                return ExitCode::from(EXIT_MISMATCH);
            }
            println!("matches reference evaluator");
        }
    }
    if let Some(descaled) = &result.hybrid_descaled {
        println!("descaled hybrid output: {descaled}");
        if let Some(x) = args.input {
            let expect = reference_eval_raw(&plan, x);
            if *descaled != expect {
                eprintln!("error: descaled {descaled} but reference evaluator gives {expect}");
                return ExitCode::from(EXIT_MISMATCH);
            }
            println!("matches reference evaluator");
        }
    }
    ExitCode::SUCCESS
}

fn cmd_report(args: ReportArgs) -> ExitCode {
    let plan = match load_plan(&args.plan) {
        Ok(p) => p,
        Err(code) => return code,
    };
    let model = CostModel { t: args.t, he_bits: args.he_bits, tau: args.tau };
    let full = model_full_gc(&plan, &model);
    let hybrid = (plan.degree() >= 1).then(|| model_hybrid(&plan, &model));
    match args.format {
        FormatArg::Text => print!("{}", render_text(&plan, &full, hybrid.as_ref())),
        FormatArg::Json => {
            let doc = serde_json::json!({
                "model": model,
                "fullGc": full,
                "hybrid": hybrid,
            });
            println!("{}", serde_json::to_string_pretty(&doc).unwrap());
        }
    }
    ExitCode::SUCCESS
}

fn cmd_selftest(args: SelftestArgs) -> ExitCode {
    use pwstpc::circuit::plaintext_eval;
    use pwstpc::transport::InProcTransport;
    use std::thread;

    let seed = session_seed(args.seed);
    let table = quantize_function(&FunctionSpec::<f64>::sinc(8, 8).unwrap()).unwrap();
    let mut failures = 0u32;

    for d in [0u8, 1, 2] {
        let plan = encode_plan(bisect(&table, d, 0.1, FitKind::Plain).unwrap()).unwrap();
        let composed = compose_full_gc(&plan);
        // plaintext pipeline vs reference, exhaustive
        let mut first_fail = None;
        for xhat in 0..256u32 {
            let bits: Vec<bool> = (0..8).map(|b| (xhat >> b) & 1 == 1).collect();
            let out = plaintext_eval(&composed.circuit, &bits, &[]).unwrap();
            let got: u32 = out
                .iter()
                .enumerate()
                .fold(0, |acc, (i, &b)| acc | ((b as u32) << i));
            if got != reference_eval(&plan, xhat) {
                first_fail.get_or_insert(xhat);
            }
        }
        report_suite(&format!("plaintext pipeline d={d}"), first_fail, &mut failures);

        // full-GC protocol, exhaustive over the in-process transport
        let cfg = SessionConfig::new(SecurityConfig::for_tests(), seed);
        let mut first_fail = None;
        for xhat in 0..256u32 {
            let (mut ta, mut tb) = InProcTransport::pair();
            let plan_b = plan.clone();
            let cfg_b = cfg.clone();
            let garbler = thread::spawn(move || {
                run_full_gc(&plan_b, Role::Garbler, None, &mut tb, &cfg_b)
            });
            let ev = run_full_gc(&plan, Role::Evaluator, Some(xhat), &mut ta, &cfg);
            let ok = garbler.join().unwrap().is_ok()
                && ev.map(|r| r.decoded == Some(reference_eval(&plan, xhat))).unwrap_or(false);
            if !ok {
                first_fail.get_or_insert(xhat);
            }
        }
        report_suite(&format!("full-GC protocol d={d}"), first_fail, &mut failures);

        if d >= 1 {
            let mut first_fail = None;
            for xhat in 0..256u32 {
                let (mut ta, mut tb) = InProcTransport::pair();
                let plan_b = plan.clone();
                let cfg_b = cfg.clone();
                let garbler = thread::spawn(move || {
                    run_hybrid(&plan_b, Role::Garbler, None, &mut tb, &cfg_b)
                });
                let ev = run_hybrid(&plan, Role::Evaluator, Some(xhat), &mut ta, &cfg);
                let ok = garbler.join().unwrap().is_ok()
                    && ev
                        .map(|r| r.hybrid_descaled == Some(reference_eval_raw(&plan, xhat)))
                        .unwrap_or(false);
                if !ok {
                    first_fail.get_or_insert(xhat);
                }
            }
            report_suite(&format!("hybrid protocol d={d}"), first_fail, &mut failures);
        }
    }

    if failures == 0 {
        println!("selftest OK");
        ExitCode::SUCCESS
    } else {
        eprintln!("selftest FAILED ({failures} suites)");
        ExitCode::FAILURE
    }
}

fn report_suite(name: &str, first_fail: Option<u32>, failures: &mut u32) {
    match first_fail {
        None => println!("{name}: ok (256 inputs)"),
        Some(x) => {
            eprintln!("{name}: FAIL at input {x}");
            *failures += 1;
        }
    }
}
