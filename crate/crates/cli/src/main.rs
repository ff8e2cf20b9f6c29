use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use aes_pipeline::aes::{self, parse_hex16, Block};
use aes_pipeline::cost::{model_report, CostParams, MetricRow, Mode, PipelineConfig};
use aes_pipeline::sim::{simulate, simulate_functional, SimResult};
use aes_pipeline::sweep::{self, OutputFormat, SweepSpec};
use aes_pipeline::tables;
use aes_pipeline::time::{fmt_decimal, fmt_rational, parse_rational};
use aes_pipeline::{Error, Rational, TimeQuantum};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};

const EXIT_USAGE: u8 = 1;
const EXIT_AUDIT: u8 = 2;
const EXIT_CROSSCHECK: u8 = 3;

#[derive(Parser)]
#[command(name = "aespipe", version, about = "AES-128 pipeline cost model, simulator and table audit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Encrypt 16-byte blocks given as hex.
    Encrypt(CipherArgs),
    /// Decrypt 16-byte blocks given as hex.
    Decrypt(CipherArgs),
    /// Analytical times and metrics for one configuration.
    Model(PointArgs),
    /// Run the discrete-event simulator for one configuration.
    Simulate(SimulateArgs),
    /// Regenerate the timing tables and audit them against the published values.
    Tables(TablesArgs),
    /// Evaluate a grid of configurations.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct CipherArgs {
    /// 128-bit key, 32 hex characters.
    #[arg(long)]
    key: String,
    /// Blocks, 32 hex characters each.
    #[arg(required = true)]
    blocks: Vec<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Enc,
    Dec,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Enc => Mode::Encrypt,
            ModeArg::Dec => Mode::Decrypt,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
    Markdown,
}

impl From<FormatArg> for OutputFormat {
    fn from(f: FormatArg) -> OutputFormat {
        match f {
            FormatArg::Csv => OutputFormat::Csv,
            FormatArg::Json => OutputFormat::Json,
            FormatArg::Markdown => OutputFormat::Markdown,
        }
    }
}

#[derive(Args)]
struct PointArgs {
    #[arg(long, value_enum)]
    mode: ModeArg,
    /// Number of blocks L.
    #[arg(long)]
    blocks_count: usize,
    /// Processors per stage M_r.
    #[arg(long, default_value_t = 1)]
    pe: usize,
    /// Split Add_Round_Key and the mix-column step across the stage's processors.
    #[arg(long)]
    inner_parallel: bool,
    /// Per-element combine overhead in T_XOR units (e.g. 0, 1/2, 0.25).
    #[arg(long, default_value = "0")]
    t_ov: String,
    #[arg(long, value_enum, default_value = "markdown")]
    format: FormatArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    point: PointArgs,
    /// Carry real data through the task graph and compare with the reference cipher.
    #[arg(long)]
    functional: bool,
    #[arg(long, requires = "functional")]
    key: Option<String>,
    /// Comma-separated hex blocks; random blocks are used when omitted.
    #[arg(long, requires = "functional", value_delimiter = ',')]
    blocks: Vec<String>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Write the task trace as JSON lines.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct TablesArgs {
    #[arg(long, value_enum, default_value = "markdown")]
    format: FormatArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, value_enum, value_delimiter = ',', default_values = ["enc", "dec"])]
    mode: Vec<ModeArg>,
    #[arg(long, value_delimiter = ',', required = true)]
    blocks_count: Vec<usize>,
    #[arg(long, value_delimiter = ',', required = true)]
    pe: Vec<usize>,
    /// Include serial stages (default: both serial and inner-parallel).
    #[arg(long)]
    serial: bool,
    /// Include inner-parallel stages.
    #[arg(long)]
    inner_parallel: bool,
    #[arg(long, default_value = "0")]
    t_ov: String,
    /// Add a simulated makespan column.
    #[arg(long)]
    sim: bool,
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure { code: EXIT_USAGE, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::FunctionalMismatch { .. } => EXIT_CROSSCHECK,
            _ => EXIT_USAGE,
        };
        Failure { code, message: e.to_string() }
    }
}

type CmdResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Encrypt(a) => cmd_cipher(a, Mode::Encrypt),
        Command::Decrypt(a) => cmd_cipher(a, Mode::Decrypt),
        Command::Model(a) => cmd_model(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Tables(a) => cmd_tables(a),
        Command::Sweep(a) => cmd_sweep(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> CmdResult {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| Failure::usage(format!("cannot write to stdout: {e}")))
        }
    }
}

fn parse_hex_arg(what: &str, s: &str) -> Result<[u8; 16], Failure> {
    parse_hex16(s).map_err(|e| Failure::usage(format!("invalid {what}: {e}")))
}

fn cmd_cipher(a: CipherArgs, mode: Mode) -> CmdResult {
    let key = parse_hex_arg("key", &a.key)?;
    let ks = aes::key_expand(&key)?;
    let mut out = String::new();
    for (i, b) in a.blocks.iter().enumerate() {
        let block = Block(parse_hex_arg(&format!("block {} ({b:?})", i + 1), b)?);
        let r = match mode {
            Mode::Encrypt => aes::encrypt_block(&block, &ks),
            Mode::Decrypt => aes::decrypt_block(&block, &ks),
        };
        out.push_str(&r.to_hex());
        out.push('\n');
    }
    emit(&None, &out)
}

fn parse_overhead(s: &str) -> Result<TimeQuantum, Failure> {
    let r = parse_rational(s).map_err(|e| Failure::usage(format!("--t-ov: {e}")))?;
    if r < Rational::from_integer(0) {
        return Err(Failure::usage("--t-ov must be non-negative"));
    }
    Ok(TimeQuantum::xors(r))
}

fn config(p: &PointArgs) -> Result<PipelineConfig, Failure> {
    let params = CostParams::default().with_overhead(parse_overhead(&p.t_ov)?);
    let cfg = PipelineConfig::new(p.mode.into(), p.blocks_count, p.pe, p.inner_parallel, params)?;
    for w in cfg.warnings() {
        eprintln!("warning: {w}");
    }
    Ok(cfg)
}

fn txor(t: TimeQuantum) -> String {
    let r = t.in_xors();
    if r.is_integer() {
        format!("{} T_XOR", fmt_rational(r))
    } else {
        format!("{} T_XOR ({})", fmt_rational(r), fmt_decimal(r, 3))
    }
}

fn metric_line(label: &str, m: &MetricRow) -> String {
    let pct = m.improvement * 100;
    format!(
        "{label:<26} speedup {} ({})  efficiency {} ({})  improvement {}% (~{}%)\n",
        fmt_rational(m.speedup),
        fmt_decimal(m.speedup, 3),
        fmt_rational(m.efficiency),
        fmt_decimal(m.efficiency, 3),
        fmt_decimal(pct, 2),
        fmt_decimal(pct, 0),
    )
}

fn single_point_spec(cfg: &PipelineConfig, simulate: bool) -> SweepSpec {
    SweepSpec {
        modes: vec![cfg.mode],
        blocks: vec![cfg.num_blocks],
        pes: vec![cfg.pe_per_stage],
        inner_parallel: vec![cfg.inner_parallel],
        params: cfg.params,
        simulate,
    }
}

fn cmd_model(a: PointArgs) -> CmdResult {
    let cfg = config(&a)?;
    let text = match a.format {
        FormatArg::Markdown => {
            let rep = model_report(&cfg)?;
            let st = rep.stage_times;
            let mut s = format!(
                "mode {}  L={}  M_r={}  inner-parallel {}  t_ov {}\n",
                cfg.mode,
                cfg.num_blocks,
                cfg.pe_per_stage,
                if cfg.inner_parallel { "on" } else { "off" },
                txor(cfg.params.t_ov)
            );
            s.push_str(&format!(
                "stage times: initial {}, standard {}, final {}\n",
                txor(st.initial),
                txor(st.standard),
                txor(st.final_round)
            ));
            s.push_str(&format!("sequential time:          {}\n", txor(rep.sequential)));
            s.push_str(&format!("pipeline time:            {}\n", txor(rep.paper_pipeline)));
            s.push_str(&format!("flow-shop makespan:       {}\n", txor(rep.flowshop)));
            s.push_str(&format!("single-PE pipeline time:  {}\n", txor(rep.serial_pipeline)));
            s.push_str(&metric_line("vs sequential:", &rep.vs_sequential));
            s.push_str(&metric_line("vs single-PE pipeline:", &rep.vs_serial_pipeline));
            s.push_str(&metric_line("flow-shop vs sequential:", &rep.flowshop_vs_sequential));
            s
        }
        f => {
            let rows = sweep::run_sweep(&single_point_spec(&cfg, false))?;
            sweep::render(&rows, f.into(), false)
        }
    };
    emit(&a.out, &text)
}

fn random_blocks(seed: u64, n: usize) -> Vec<Block> {
    let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
    (0..n).map(|_| Block(rng.gen())).collect()
}

fn sim_report(cfg: &PipelineConfig, r: &SimResult, model: TimeQuantum) -> String {
    let agree = r.makespan == model;
    let mut s = format!("makespan: {}\n", txor(r.makespan));
    s.push_str(&format!(
        "flow-shop model: {}  agreement: {}\n",
        txor(model),
        if agree { "PASS" } else { "FAIL" }
    ));
    let st = cfg.stage_times();
    s.push_str("stage  service        model          busy fraction  mean PE utilization\n");
    for j in 0..r.per_stage_busy.len() {
        let busy = if r.makespan.is_zero() { Rational::from_integer(0) } else { r.per_stage_busy[j] / r.makespan };
        let util = &r.pe_utilization[j];
        let mean = util.iter().copied().sum::<Rational>() / Rational::from_integer(util.len() as i64);
        s.push_str(&format!(
            "{j:>5}  {:<13}  {:<13}  {:<13}  {}\n",
            fmt_rational(r.stage_service[j].in_xors()),
            fmt_rational(st.for_stage(j).in_xors()),
            fmt_decimal(busy, 3),
            fmt_decimal(mean, 3)
        ));
    }
    s
}

fn cmd_simulate(a: SimulateArgs) -> CmdResult {
    let cfg = config(&a.point)?;
    let model = aes_pipeline::cost::flowshop_makespan(&cfg);
    let result = if a.functional {
        let key = match &a.key {
            Some(k) => parse_hex_arg("key", k)?,
            None => return Err(Failure::usage("--functional requires --key")),
        };
        let blocks = if a.blocks.is_empty() {
            random_blocks(a.seed, cfg.num_blocks)
        } else {
            a.blocks
                .iter()
                .enumerate()
                .map(|(i, b)| parse_hex_arg(&format!("block {} ({b:?})", i + 1), b).map(Block))
                .collect::<Result<Vec<_>, _>>()?
        };
        simulate_functional(&cfg, &key, &blocks)
    } else {
        simulate(&cfg)
    };
    let r = match result {
        Ok(r) => r,
        Err(e @ Error::FunctionalMismatch { .. }) => {
            println!("functional: FAIL ({e})");
            return Err(e.into());
        }
        Err(e) => return Err(e.into()),
    };
    if let Some(path) = &a.trace {
        let file = fs::File::create(path).map_err(|e| Failure::usage(format!("cannot write {}: {e}", path.display())))?;
        r.write_trace(std::io::BufWriter::new(file))
            .map_err(|e| Failure::usage(format!("cannot write {}: {e}", path.display())))?;
    }
    let mut text = match a.point.format {
        FormatArg::Markdown => sim_report(&cfg, &r, model),
        f => {
            let rows = sweep::run_sweep(&single_point_spec(&cfg, true))?;
            sweep::render(&rows, f.into(), true)
        }
    };
    if let Some(outputs) = &r.outputs {
        text.push_str("functional: OK (aes_core match)\n");
        if matches!(a.point.format, FormatArg::Markdown) {
            for b in outputs {
                text.push_str(&format!("{}\n", b.to_hex()));
            }
        }
    }
    emit(&a.point.out, &text)?;
    if r.makespan != model {
        return Err(Failure {
            code: EXIT_CROSSCHECK,
            message: format!("simulated makespan {} differs from model {}", r.makespan, model),
        });
    }
    Ok(())
}

fn cmd_tables(a: TablesArgs) -> CmdResult {
    let params = CostParams::default();
    let report = tables::audit_with(&params)?;
    let regenerated = tables::regenerate(&params)?;
    let text = match a.format {
        FormatArg::Markdown => tables::render_markdown(&regenerated, &report),
        FormatArg::Csv => tables::render_csv(&report),
        FormatArg::Json => tables::render_json(&regenerated, &report),
    };
    emit(&a.out, &text)?;
    if report.is_clean() {
        Ok(())
    } else {
        let mut msg = String::from("audit does not match the errata catalog");
        for c in &report.undocumented {
            msg.push_str(&format!("\n  undocumented mismatch: {c}"));
        }
        for v in &report.vanished {
            msg.push_str(&format!("\n  vanished errata entry: {v:?}"));
        }
        Err(Failure { code: EXIT_AUDIT, message: msg })
    }
}

fn cmd_sweep(a: SweepArgs) -> CmdResult {
    let inner_parallel = match (a.serial, a.inner_parallel) {
        (false, false) | (true, true) => vec![false, true],
        (true, false) => vec![false],
        (false, true) => vec![true],
    };
    let spec = SweepSpec {
        modes: a.mode.iter().map(|&m| m.into()).collect(),
        blocks: a.blocks_count,
        pes: a.pe,
        inner_parallel,
        params: CostParams::default().with_overhead(parse_overhead(&a.t_ov)?),
        simulate: a.sim,
    };
    let rows = sweep::run_sweep(&spec)?;
    if a.sim {
        if let Some(r) = rows.iter().find(|r| r.simulated.is_some_and(|s| s != r.flowshop)) {
            return Err(Failure {
                code: EXIT_CROSSCHECK,
                message: format!("simulation disagrees with model at {} L={} M_r={}", r.mode, r.blocks, r.pes),
            });
        }
    }
    emit(&a.out, &sweep::render(&rows, a.format.into(), a.sim))
}
