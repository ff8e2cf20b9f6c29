//! Grid evaluation of the model (and optionally the simulator) with tabular output.

use std::thread;

use serde::Serialize;

use crate::cost::{model_report, CostParams, Mode, PipelineConfig};
use crate::error::{Error, Result};
use crate::sim::simulate;
use crate::time::{fmt_decimal, fmt_rational, Rational, RationalPair};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
    Markdown,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SweepSpec {
    pub modes: Vec<Mode>,
    pub blocks: Vec<usize>,
    pub pes: Vec<usize>,
    pub inner_parallel: Vec<bool>,
    pub params: CostParams,
    pub simulate: bool,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, empty) in [
            ("mode", self.modes.is_empty()),
            ("L", self.blocks.is_empty()),
            ("M_r", self.pes.is_empty()),
            ("inner-parallel", self.inner_parallel.is_empty()),
        ] {
            if empty {
                return Err(Error::Config(format!("sweep axis {name} is empty")));
            }
        }
        self.points().map(|_| ())
    }

    /// All configurations in output order: mode, L, M_r, then serial before parallel.
    pub fn points(&self) -> Result<Vec<PipelineConfig>> {
        let mut modes = self.modes.clone();
        let mut blocks = self.blocks.clone();
        let mut pes = self.pes.clone();
        let mut par = self.inner_parallel.clone();
        for v in [&mut blocks, &mut pes] {
            v.sort_unstable();
            v.dedup();
        }
        modes.sort();
        modes.dedup();
        par.sort();
        par.dedup();
        let mut out = Vec::new();
        for &mode in &modes {
            for &l in &blocks {
                for &m in &pes {
                    for &p in &par {
                        out.push(PipelineConfig::new(mode, l, m, p, self.params)?);
                    }
                }
            }
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SweepRow {
    pub mode: Mode,
    pub blocks: usize,
    pub pes: usize,
    pub inner_parallel: bool,
    /// All times in T_XOR.
    pub t_ov: Rational,
    pub sequential: Rational,
    pub paper_pipeline: Rational,
    pub flowshop: Rational,
    pub speedup: Rational,
    pub efficiency: Rational,
    pub improvement: Rational,
    /// Absent when not requested or when the stage cannot be split this way.
    pub simulated: Option<Rational>,
}

fn evaluate(cfg: &PipelineConfig, with_sim: bool) -> Result<SweepRow> {
    let rep = model_report(cfg)?;
    let x = |t| cfg.params.in_xors(t);
    let simulated = if with_sim {
        match simulate(cfg) {
            Ok(r) => Some(x(r.makespan)),
            Err(Error::Graph(_)) => None,
            Err(e) => return Err(e),
        }
    } else {
        None
    };
    Ok(SweepRow {
        mode: cfg.mode,
        blocks: cfg.num_blocks,
        pes: cfg.pe_per_stage,
        inner_parallel: cfg.inner_parallel,
        t_ov: x(cfg.params.t_ov),
        sequential: x(rep.sequential),
        paper_pipeline: x(rep.paper_pipeline),
        flowshop: x(rep.flowshop),
        speedup: rep.vs_sequential.speedup,
        efficiency: rep.vs_sequential.efficiency,
        improvement: rep.vs_sequential.improvement,
        simulated,
    })
}

/// Points are evaluated on worker threads; rows come back in `points()` order.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let points = spec.points()?;
    let workers = thread::available_parallelism().map_or(1, |n| n.get()).min(points.len().max(1));
    let chunk = points.len().div_ceil(workers).max(1);
    let results: Vec<Result<Vec<SweepRow>>> = thread::scope(|s| {
        let handles: Vec<_> = points
            .chunks(chunk)
            .map(|part| s.spawn(move || part.iter().map(|c| evaluate(c, spec.simulate)).collect()))
            .collect();
        handles.into_iter().map(|h| h.join().expect("sweep worker panicked")).collect()
    });
    let mut rows = Vec::with_capacity(points.len());
    for r in results {
        rows.extend(r?);
    }
    Ok(rows)
}

pub const CSV_HEADER: &str =
    "mode,L,M_r,inner_parallel,t_ov,seq_txor,paper_pipeline_txor,flowshop_txor,speedup,efficiency,improvement";

pub fn render_csv(rows: &[SweepRow], with_sim: bool) -> String {
    let mut s = String::from(CSV_HEADER);
    if with_sim {
        s.push_str(",sim_txor");
    }
    s.push('\n');
    for r in rows {
        let fields = [
            r.mode.as_str().to_string(),
            r.blocks.to_string(),
            r.pes.to_string(),
            r.inner_parallel.to_string(),
            fmt_rational(r.t_ov),
            fmt_rational(r.sequential),
            fmt_rational(r.paper_pipeline),
            fmt_rational(r.flowshop),
            fmt_rational(r.speedup),
            fmt_rational(r.efficiency),
            fmt_rational(r.improvement),
        ];
        s.push_str(&fields.join(","));
        if with_sim {
            s.push(',');
            if let Some(v) = r.simulated {
                s.push_str(&fmt_rational(v));
            }
        }
        s.push('\n');
    }
    s
}

#[derive(Serialize)]
struct JsonRow {
    mode: Mode,
    #[serde(rename = "L")]
    blocks: usize,
    #[serde(rename = "M_r")]
    pes: usize,
    inner_parallel: bool,
    t_ov: RationalPair,
    seq_txor: RationalPair,
    paper_pipeline_txor: RationalPair,
    flowshop_txor: RationalPair,
    speedup: RationalPair,
    efficiency: RationalPair,
    improvement: RationalPair,
    #[serde(skip_serializing_if = "Option::is_none")]
    sim_txor: Option<RationalPair>,
}

pub fn render_json(rows: &[SweepRow]) -> String {
    let out: Vec<JsonRow> = rows
        .iter()
        .map(|r| JsonRow {
            mode: r.mode,
            blocks: r.blocks,
            pes: r.pes,
            inner_parallel: r.inner_parallel,
            t_ov: r.t_ov.into(),
            seq_txor: r.sequential.into(),
            paper_pipeline_txor: r.paper_pipeline.into(),
            flowshop_txor: r.flowshop.into(),
            speedup: r.speedup.into(),
            efficiency: r.efficiency.into(),
            improvement: r.improvement.into(),
            sim_txor: r.simulated.map(Into::into),
        })
        .collect();
    serde_json::to_string_pretty(&out).expect("serializable")
}

pub fn render_markdown(rows: &[SweepRow], with_sim: bool) -> String {
    let mut s = String::from(
        "| mode | L | M_r | inner-parallel | t_ov | sequential | pipeline | flow-shop | speedup | efficiency | improvement |",
    );
    s.push_str(if with_sim { " simulated |\n" } else { "\n" });
    s.push_str(&"|---".repeat(if with_sim { 12 } else { 11 }));
    s.push_str("|\n");
    for r in rows {
        s.push_str(&format!(
            "| {} | {} | {} | {} | {} | {} | {} | {} | {} | {} | {}% |",
            r.mode,
            r.blocks,
            r.pes,
            if r.inner_parallel { "yes" } else { "no" },
            fmt_rational(r.t_ov),
            fmt_decimal(r.sequential, 2),
            fmt_decimal(r.paper_pipeline, 2),
            fmt_decimal(r.flowshop, 2),
            fmt_decimal(r.speedup, 3),
            fmt_decimal(r.efficiency, 3),
            fmt_decimal(r.improvement * 100, 2),
        ));
        if with_sim {
            let v = r.simulated.map_or_else(|| "n/a".to_string(), |v| fmt_decimal(v, 2));
            s.push_str(&format!(" {v} |"));
        }
        s.push('\n');
    }
    s
}

pub fn render(rows: &[SweepRow], format: OutputFormat, with_sim: bool) -> String {
    match format {
        OutputFormat::Csv => render_csv(rows, with_sim),
        OutputFormat::Json => render_json(rows),
        OutputFormat::Markdown => render_markdown(rows, with_sim),
    }
}
