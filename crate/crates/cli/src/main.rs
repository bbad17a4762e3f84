//! Command-line front end: run ELF images on the flat-memory platform,
//! enumerate litmus-test outcomes, drive the software-multiply
//! differential suite, decode single words.

use std::fmt::Display;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use rvsem_core::decode::{Decoder, ExtensionSet};
use rvsem_core::exec::{read_registers, run, run1, RunResult};
use rvsem_core::layers::{EarlyExitLayer, TraceLayer};
use rvsem_core::machine::{
    HaltSource, MachineInterface, MmioRange, PlatformConfig, StepOutcome, DEFAULT_UART_BASE,
    DEFAULT_UART_SIZE,
};
use rvsem_core::platform::elf::parse_elf;
use rvsem_core::platform::mmio::{MmioLayer, Uart};
use rvsem_core::platform::{EventKind, EventSink, MachineState};
use rvsem_core::softmul::{run_suite, BugKind, SuiteConfig};
use rvsem_core::xword::{MachineInt, Xlen};
use rvsem_memmodel::bruteforce::enumerate_bruteforce;
use rvsem_memmodel::explore::{explore_with, ExploreConfig, ExploreError};
use rvsem_memmodel::litmus::parse_litmus;
use rvsem_memmodel::report::evaluate_postcondition;

#[derive(Parser)]
#[command(name = "rvsem", version, about = "RISC-V semantics toolkit")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a RISC-V ELF image on the flat-memory platform.
    ///
    /// UART transmit bytes go to stdout. Exits 0 on a clean halt, 1 on a
    /// nonzero halt code, 2 when the step budget runs out, 3 on a machine
    /// failure, 64 when the image cannot be loaded.
    Run(RunArgs),
    /// Enumerate all outcomes of a litmus test.
    ///
    /// Exits 0 on success, 1 when --oracle or --bruteforce disagree, 65
    /// when the test cannot be parsed or set up, 69 when the exploration
    /// budget runs out.
    Litmus(LitmusArgs),
    /// Differentially test the software-multiply trap handler.
    ///
    /// Prints one line per case; exits 1 if any case fails.
    SoftmulDiff(SoftmulArgs),
    /// Decode one instruction word.
    Decode(DecodeArgs),
}

#[derive(clap::Args)]
struct RunArgs {
    /// ELF image to load
    image: PathBuf,
    /// Instruction set, e.g. rv32imzicsr
    #[arg(long, default_value = "rv64imzicsr", value_parser = ExtensionSet::parse)]
    isa: ExtensionSet,
    #[arg(long, default_value_t = 1_000_000)]
    max_steps: u64,
    /// Log every machine primitive to stderr
    #[arg(long)]
    trace: bool,
    /// Print x0..x31 and pc after the run
    #[arg(long)]
    dump_regs: bool,
    /// Print the MMIO event log after the run
    #[arg(long)]
    log_events: bool,
    /// File served byte-by-byte from the UART receive register
    #[arg(long)]
    uart_input: Option<PathBuf>,
    /// Treat running out of steps as success
    #[arg(long)]
    allow_timeout: bool,
}

#[derive(clap::Args)]
struct LitmusArgs {
    /// Litmus test file
    file: PathBuf,
    /// Expected report; exit 1 if the output differs
    #[arg(long)]
    oracle: Option<PathBuf>,
    /// Cross-check the explorer against brute-force enumeration
    #[arg(long)]
    bruteforce: bool,
    #[arg(long, default_value_t = 100_000)]
    max_partials: usize,
}

#[derive(clap::Args)]
struct SoftmulArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    count: u32,
    /// Longest generated program, in instructions
    #[arg(long, default_value_t = 40)]
    max_len: u32,
    #[arg(long, default_value_t = 1)]
    jobs: u32,
    /// Plant a known handler bug; the suite is expected to catch it
    #[arg(long, hide = true, value_parser = parse_bug)]
    inject_bug: Option<BugKind>,
}

#[derive(clap::Args)]
struct DecodeArgs {
    /// Instruction word in hex, with or without 0x
    word: String,
    #[arg(long, default_value = "rv64imzicsr", value_parser = ExtensionSet::parse)]
    isa: ExtensionSet,
}

fn parse_bug(s: &str) -> Result<BugKind, String> {
    BugKind::all().into_iter().find(|b| b.label() == s).ok_or_else(|| {
        let known: Vec<&str> = BugKind::all().iter().map(|b| b.label()).collect();
        format!("unknown bug '{s}'; known bugs: {}", known.join(", "))
    })
}

fn fail(code: u8, msg: impl Display) -> ExitCode {
    eprintln!("rvsem: {msg}");
    ExitCode::from(code)
}

fn main() -> ExitCode {
    match Cli::parse().cmd {
        Cmd::Run(a) => cmd_run(&a),
        Cmd::Litmus(a) => cmd_litmus(&a),
        Cmd::SoftmulDiff(a) => cmd_softmul(&a),
        Cmd::Decode(a) => cmd_decode(&a),
    }
}

fn cmd_run(a: &RunArgs) -> ExitCode {
    let bytes = match std::fs::read(&a.image) {
        Ok(b) => b,
        Err(e) => return fail(64, format!("{}: {e}", a.image.display())),
    };
    let image = match parse_elf(&bytes) {
        Ok(i) => i,
        Err(e) => return fail(64, format!("{}: {e}", a.image.display())),
    };
    if image.class64 != (a.isa.xlen == Xlen::X64) {
        let class = if image.class64 { 64 } else { 32 };
        return fail(64, format!("{class}-bit image does not fit the selected instruction set"));
    }
    let mut cfg = PlatformConfig::default_map(a.isa);
    if let Some(tohost) = image.tohost {
        cfg = cfg.with_tohost(tohost);
    }
    let state = match MachineState::new(cfg, &image.segments, image.entry) {
        Ok(m) => m,
        Err(e) => return fail(64, e),
    };
    let range = MmioRange { base: DEFAULT_UART_BASE, size: DEFAULT_UART_SIZE };
    let uart = match &a.uart_input {
        Some(path) => match std::fs::read(path) {
            Ok(input) => Uart::with_input(range, &input),
            Err(e) => return fail(64, format!("{}: {e}", path.display())),
        },
        None => Uart::new(range),
    };
    let machine = match MmioLayer::new(EarlyExitLayer::new(state), vec![Box::new(uart)]) {
        Ok(m) => m,
        Err(e) => return fail(64, e),
    };

    let dec = Decoder::new(a.isa);
    if a.trace {
        let mut m = TraceLayer::new(machine);
        let result = run_traced(&mut m, &dec, a.max_steps);
        finish_run(a, &mut m, result)
    } else {
        let mut m = machine;
        let result = run(&mut m, &dec, a.max_steps);
        finish_run(a, &mut m, result)
    }
}

/// `exec::run` with the trace drained to stderr after every step.
fn run_traced<M: MachineInterface + HaltSource>(
    m: &mut TraceLayer<M>,
    dec: &Decoder,
    max_steps: u64,
) -> RunResult {
    let mut steps = 0;
    while steps < max_steps {
        let out = run1(m, dec);
        for r in m.take_records() {
            eprintln!("{r}");
        }
        m.advance_step();
        if let StepOutcome::HardFailure(failure) = out {
            return RunResult::Failed { failure, steps: steps + 1 };
        }
        steps += 1;
        if let Some(code) = m.take_halt() {
            return RunResult::Halted { code, steps };
        }
    }
    RunResult::OutOfSteps { steps }
}

fn finish_run<M: MachineInterface + EventSink>(
    a: &RunArgs,
    m: &mut M,
    result: RunResult,
) -> ExitCode {
    let console: Vec<u8> = m
        .events()
        .iter()
        .filter(|e| {
            e.kind == EventKind::MmioStore
                && e.addr == DEFAULT_UART_BASE + Uart::TX_OFFSET
                && e.width == 1
        })
        .map(|e| e.value as u8)
        .collect();
    let mut out = std::io::stdout();
    out.write_all(&console).and_then(|()| out.flush()).expect("stdout");
    if a.log_events {
        for e in m.events().to_vec() {
            println!("{e}");
        }
    }
    if a.dump_regs {
        for (i, v) in read_registers(m).iter().enumerate() {
            println!("x{i}={:#x}", v.bits());
        }
        println!("pc={:#x}", m.get_pc().bits());
    }
    match result {
        RunResult::Halted { code: 0, steps } => {
            eprintln!("halted code=0 steps={steps}");
            ExitCode::SUCCESS
        }
        RunResult::Halted { code, steps } => {
            eprintln!("halted code={code} steps={steps}");
            ExitCode::from(1)
        }
        RunResult::OutOfSteps { steps } => {
            eprintln!("out of steps after {steps}");
            ExitCode::from(if a.allow_timeout { 0 } else { 2 })
        }
        RunResult::Failed { failure, steps } => {
            eprintln!("machine failure at step {steps}: {failure}");
            ExitCode::from(3)
        }
    }
}

fn cmd_litmus(a: &LitmusArgs) -> ExitCode {
    let text = match std::fs::read_to_string(&a.file) {
        Ok(t) => t,
        Err(e) => return fail(64, format!("{}: {e}", a.file.display())),
    };
    let test = match parse_litmus(&text) {
        Ok(t) => t,
        Err(e) => return fail(65, format!("{}: {e}", a.file.display())),
    };
    let cfg = ExploreConfig { max_partials: a.max_partials, ..ExploreConfig::default() };
    let graphs = match explore_with(&test, &cfg) {
        Ok(g) => g,
        Err(e @ ExploreError::Budget { .. }) => return fail(69, e),
        Err(e) => return fail(65, e),
    };
    let report = match evaluate_postcondition(&test, &graphs) {
        Ok(r) => r,
        Err(e) => return fail(65, e),
    };
    let rendered = report.to_string();
    print!("{rendered}");
    if a.bruteforce {
        let brute = match enumerate_bruteforce(&test) {
            Ok(g) => g,
            Err(e) => return fail(65, e),
        };
        let lhs: std::collections::BTreeSet<String> =
            graphs.iter().map(|g| g.outcome_key()).collect();
        let rhs: std::collections::BTreeSet<String> =
            brute.iter().map(|g| g.outcome_key()).collect();
        if lhs != rhs {
            return fail(
                1,
                format!(
                    "explorer found {} executions but brute force found {}",
                    lhs.len(),
                    rhs.len()
                ),
            );
        }
    }
    if let Some(oracle) = &a.oracle {
        let expected = match std::fs::read_to_string(oracle) {
            Ok(t) => t,
            Err(e) => return fail(64, format!("{}: {e}", oracle.display())),
        };
        if rendered != expected {
            return fail(1, format!("report differs from {}", oracle.display()));
        }
    }
    ExitCode::SUCCESS
}

fn cmd_softmul(a: &SoftmulArgs) -> ExitCode {
    let cfg = SuiteConfig {
        seed: a.seed,
        count: a.count,
        max_len: a.max_len,
        jobs: a.jobs,
        bug: a.inject_bug,
    };
    let results = run_suite(&cfg);
    let mut failed = 0u32;
    for r in &results {
        println!("seed={} idx={} {}", cfg.seed, r.idx, r.verdict);
        if !r.verdict.is_pass() {
            failed += 1;
        }
    }
    eprintln!("{} of {} cases passed", results.len() as u32 - failed, results.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn cmd_decode(a: &DecodeArgs) -> ExitCode {
    let digits = a.word.strip_prefix("0x").or_else(|| a.word.strip_prefix("0X")).unwrap_or(&a.word);
    let word = match u32::from_str_radix(digits, 16) {
        Ok(w) => w,
        Err(e) => return fail(64, format!("bad instruction word '{}': {e}", a.word)),
    };
    let inst = Decoder::new(a.isa).decode(word as MachineInt);
    println!("{inst:?}");
    ExitCode::SUCCESS
}
