//! Discrete-event execution of L blocks through the eleven-stage pipeline.
//!
//! Each stage holds at most one block. Blocks wait in an unbounded FIFO in front of each
//! stage. Inside a stage, every PE works through its static task list one task at a time,
//! starting a task as soon as the PE is idle and all producers have completed. Events are
//! ordered by (time, stage, task), which makes runs fully deterministic.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};
use std::io::Write;

use serde::Serialize;

use crate::aes::{self, Block, KeySchedule, State, ROUNDS};
use crate::cost::{Mode, PipelineConfig, StageKind, NUM_STAGES};
use crate::error::{Error, Result};
use crate::time::{Rational, TimeQuantum};

use super::graph::{apply_action, build_stage_graph, read_operand, TaskGraph, TaskId, TaskKind};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceEvent {
    pub block: usize,
    pub stage: usize,
    pub pe: usize,
    pub task: TaskId,
    pub kind: TaskKind,
    /// Start and end in shift units, as exact rationals.
    pub start: String,
    pub end: String,
    #[serde(skip)]
    pub start_time: TimeQuantum,
    #[serde(skip)]
    pub end_time: TimeQuantum,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimResult {
    pub config: PipelineConfig,
    pub makespan: TimeQuantum,
    /// Completion time of each block at the last stage.
    pub block_completion: Vec<TimeQuantum>,
    /// Time each stage spent holding a block.
    pub per_stage_busy: Vec<TimeQuantum>,
    /// Longest time any block spent in each stage.
    pub stage_service: Vec<TimeQuantum>,
    /// Busy fraction of every PE, indexed `[stage][pe]`.
    pub pe_utilization: Vec<Vec<Rational>>,
    pub trace: Vec<TraceEvent>,
    /// Final blocks, present only for functional runs.
    pub outputs: Option<Vec<Block>>,
}

impl SimResult {
    pub fn total_task_work(&self) -> TimeQuantum {
        self.trace.iter().map(|e| e.end_time - e.start_time).sum()
    }

    /// Trace as JSON lines, one task execution per line.
    pub fn write_trace<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for e in &self.trace {
            serde_json::to_writer(&mut w, e)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }
}

struct Functional<'a> {
    mode: Mode,
    keys: &'a KeySchedule,
    reference: Vec<[State; ROUNDS + 1]>,
}

impl Functional<'_> {
    fn stage_key(&self, stage: usize) -> &[u8; 16] {
        match self.mode {
            Mode::Encrypt => self.keys.round_key(stage),
            Mode::Decrypt => self.keys.round_key(ROUNDS - stage),
        }
    }
}

struct InFlight {
    block: usize,
    started: TimeQuantum,
    input: [u8; 16],
    remaining_preds: Vec<usize>,
    done: usize,
    pe_next: Vec<usize>,
    pe_busy: Vec<bool>,
    values: Vec<Vec<u8>>,
}

struct StageRt<'g> {
    graph: &'g TaskGraph,
    pe_lists: Vec<Vec<TaskId>>,
    succ: Vec<Vec<TaskId>>,
    waiting: VecDeque<(usize, [u8; 16])>,
    current: Option<InFlight>,
    busy: TimeQuantum,
    service_max: TimeQuantum,
    pe_busy_time: Vec<TimeQuantum>,
}

type Event = Reverse<(TimeQuantum, usize, TaskId)>;

struct Engine<'g, 'f> {
    stages: Vec<StageRt<'g>>,
    events: BinaryHeap<Event>,
    trace: Vec<TraceEvent>,
    completion: Vec<TimeQuantum>,
    outputs: Vec<[u8; 16]>,
    functional: Option<&'f Functional<'f>>,
}

impl Engine<'_, '_> {
    fn dispatch(&mut self, stage: usize, now: TimeQuantum) {
        let rt = &mut self.stages[stage];
        if rt.current.is_none() {
            if let Some((block, input)) = rt.waiting.pop_front() {
                let n = rt.graph.len();
                rt.current = Some(InFlight {
                    block,
                    started: now,
                    input,
                    remaining_preds: rt.graph.tasks.iter().map(|t| t.preds.len()).collect(),
                    done: 0,
                    pe_next: vec![0; rt.graph.pe_count],
                    pe_busy: vec![false; rt.graph.pe_count],
                    values: vec![Vec::new(); n],
                });
            }
        }
        let Some(cur) = rt.current.as_mut() else { return };
        for pe in 0..rt.graph.pe_count {
            if cur.pe_busy[pe] {
                continue;
            }
            let Some(&t) = rt.pe_lists[pe].get(cur.pe_next[pe]) else { continue };
            if cur.remaining_preds[t] > 0 {
                continue;
            }
            cur.pe_busy[pe] = true;
            cur.pe_next[pe] += 1;
            let task = &rt.graph.tasks[t];
            let end = now + task.cost;
            rt.pe_busy_time[pe] += task.cost;
            self.trace.push(TraceEvent {
                block: cur.block,
                stage,
                pe,
                task: t,
                kind: task.kind,
                start: now.to_string(),
                end: end.to_string(),
                start_time: now,
                end_time: end,
            });
            self.events.push(Reverse((end, stage, t)));
        }
    }

    fn complete(&mut self, now: TimeQuantum, stage: usize, t: TaskId) -> Result<()> {
        let key = self.functional.map(|f| *f.stage_key(stage));
        let rt = &mut self.stages[stage];
        let cur = rt.current.as_mut().expect("event for idle stage");
        let task = &rt.graph.tasks[t];
        cur.pe_busy[task.pe] = false;
        if let Some(key) = key {
            let out = apply_action(&task.action, |op| read_operand(op, &cur.input, &key, &cur.values));
            cur.values[t] = out;
        }
        for &s in &rt.succ[t] {
            cur.remaining_preds[s] -= 1;
        }
        cur.done += 1;

        if cur.done == rt.graph.len() {
            let cur = rt.current.take().expect("in flight");
            let service = now - cur.started;
            rt.busy += service;
            rt.service_max = rt.service_max.max(service);
            let mut out = [0u8; 16];
            if let (Some(key), Some(f)) = (key, self.functional) {
                for (o, op) in out.iter_mut().zip(rt.graph.outputs.iter()) {
                    *o = read_operand(*op, &cur.input, &key, &cur.values);
                }
                let expected = f.reference[cur.block][stage].to_block();
                if let Some(byte) = (0..16).find(|&i| expected.0[i] != out[i]) {
                    return Err(Error::FunctionalMismatch {
                        block: cur.block,
                        round: stage,
                        byte,
                        expected: expected.0[byte],
                        actual: out[byte],
                    });
                }
            }
            if stage + 1 < NUM_STAGES {
                self.stages[stage + 1].waiting.push_back((cur.block, out));
                self.dispatch(stage + 1, now);
            } else {
                self.completion[cur.block] = now;
                self.outputs[cur.block] = out;
            }
        }
        self.dispatch(stage, now);
        Ok(())
    }
}

fn stage_graphs(cfg: &PipelineConfig) -> Result<[TaskGraph; 3]> {
    let build = |kind| build_stage_graph(cfg.mode, kind, cfg.pe_per_stage, cfg.inner_parallel, &cfg.params);
    Ok([
        build(StageKind::Initial)?,
        build(StageKind::Standard)?,
        build(StageKind::Final)?,
    ])
}

fn run(cfg: &PipelineConfig, inputs: &[[u8; 16]], functional: Option<&Functional<'_>>) -> Result<SimResult> {
    cfg.validate()?;
    let graphs = stage_graphs(cfg)?;
    let graph_for = |stage: usize| match StageKind::of_stage(stage) {
        StageKind::Initial => &graphs[0],
        StageKind::Standard => &graphs[1],
        StageKind::Final => &graphs[2],
    };
    let stages: Vec<StageRt<'_>> = (0..NUM_STAGES)
        .map(|j| {
            let g = graph_for(j);
            StageRt {
                graph: g,
                pe_lists: g.pe_lists(),
                succ: g.successors(),
                waiting: VecDeque::new(),
                current: None,
                busy: TimeQuantum::ZERO,
                service_max: TimeQuantum::ZERO,
                pe_busy_time: vec![TimeQuantum::ZERO; g.pe_count],
            }
        })
        .collect();

    let l = cfg.num_blocks;
    let mut eng = Engine {
        stages,
        events: BinaryHeap::new(),
        trace: Vec::new(),
        completion: vec![TimeQuantum::ZERO; l],
        outputs: vec![[0u8; 16]; l],
        functional,
    };
    for (b, input) in inputs.iter().enumerate() {
        eng.stages[0].waiting.push_back((b, *input));
    }
    eng.dispatch(0, TimeQuantum::ZERO);
    while let Some(Reverse((now, stage, t))) = eng.events.pop() {
        eng.complete(now, stage, t)?;
    }

    if let Some(stuck) = eng.stages.iter().position(|s| s.current.is_some() || !s.waiting.is_empty()) {
        return Err(Error::Graph(format!("stage {stuck} deadlocked")));
    }

    let makespan = eng.completion.iter().copied().max().unwrap_or(TimeQuantum::ZERO);
    let pe_utilization = eng
        .stages
        .iter()
        .map(|s| {
            s.pe_busy_time
                .iter()
                .map(|&b| if makespan.is_zero() { Rational::from_integer(0) } else { b / makespan })
                .collect()
        })
        .collect();
    let mut trace = eng.trace;
    trace.sort_by(|a, b| {
        (a.start_time, a.stage, a.pe, a.task, a.block).cmp(&(b.start_time, b.stage, b.pe, b.task, b.block))
    });
    Ok(SimResult {
        config: *cfg,
        makespan,
        block_completion: eng.completion,
        per_stage_busy: eng.stages.iter().map(|s| s.busy).collect(),
        stage_service: eng.stages.iter().map(|s| s.service_max).collect(),
        pe_utilization,
        trace,
        outputs: functional.map(|_| eng.outputs.into_iter().map(Block).collect()),
    })
}

/// Timing-only simulation of `cfg.num_blocks` blocks.
pub fn simulate(cfg: &PipelineConfig) -> Result<SimResult> {
    let inputs = vec![[0u8; 16]; cfg.num_blocks];
    run(cfg, &inputs, None)
}

/// Simulation that also carries byte values through every task and checks each stage's
/// output against the reference cipher.
pub fn simulate_functional(cfg: &PipelineConfig, key: &[u8], blocks: &[Block]) -> Result<SimResult> {
    if blocks.len() != cfg.num_blocks {
        return Err(Error::Config(format!(
            "{} blocks supplied for L={}",
            blocks.len(),
            cfg.num_blocks
        )));
    }
    let keys = aes::key_expand(key)?;
    let reference = blocks
        .iter()
        .map(|b| match cfg.mode {
            Mode::Encrypt => aes::encrypt_trace(b, &keys),
            Mode::Decrypt => aes::decrypt_trace(b, &keys),
        })
        .collect();
    let f = Functional {
        mode: cfg.mode,
        keys: &keys,
        reference,
    };
    let inputs: Vec<[u8; 16]> = blocks.iter().map(|b| b.0).collect();
    run(cfg, &inputs, Some(&f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::{flowshop_makespan, CostParams};

    fn cfg(mode: Mode, l: usize, m: usize, par: bool) -> PipelineConfig {
        PipelineConfig::simple(mode, l, m, par).unwrap()
    }

    #[test]
    fn single_block_is_one_pass() {
        let r = simulate(&cfg(Mode::Encrypt, 1, 1, false)).unwrap();
        assert_eq!(r.makespan, TimeQuantum::xors(880));
        let r = simulate(&cfg(Mode::Decrypt, 1, 1, false)).unwrap();
        assert_eq!(r.makespan, TimeQuantum::xors(1984));
    }

    #[test]
    fn named_makespans() {
        assert_eq!(simulate(&cfg(Mode::Encrypt, 10, 1, false)).unwrap().makespan, TimeQuantum::xors(1720));
        assert_eq!(simulate(&cfg(Mode::Decrypt, 10, 16, true)).unwrap().makespan, TimeQuantum::xors(496));
    }

    #[test]
    fn matches_flowshop_with_overhead() {
        let p = CostParams::default().with_overhead(TimeQuantum::shifts(5));
        for (mode, m) in [(Mode::Encrypt, 4), (Mode::Decrypt, 8), (Mode::Encrypt, 32)] {
            let c = PipelineConfig::new(mode, 7, m, true, p).unwrap();
            let r = simulate(&c).unwrap();
            assert_eq!(r.makespan, flowshop_makespan(&c));
            let st = c.stage_times();
            for j in 0..NUM_STAGES {
                assert_eq!(r.stage_service[j], st.for_stage(j));
            }
        }
    }

    #[test]
    fn functional_run_reproduces_cipher() {
        let key = aes::parse_hex16("2b7e151628aed2a6abf7158809cf4f3c").unwrap();
        let blocks = vec![
            Block::from_hex("3243f6a8885a308d313198a2e0370734").unwrap(),
            Block([0u8; 16]),
            Block([0xff; 16]),
        ];
        let r = simulate_functional(&cfg(Mode::Encrypt, 3, 8, true), &key, &blocks).unwrap();
        let out = r.outputs.unwrap();
        assert_eq!(out[0].to_hex(), "3925841d02dc09fbdc118597196a0b32");
        let r = simulate_functional(&cfg(Mode::Decrypt, 3, 16, true), &key, &out).unwrap();
        assert_eq!(r.outputs.unwrap(), blocks);
    }

    #[test]
    fn trace_is_sorted_and_conserves_work() {
        let c = cfg(Mode::Decrypt, 4, 4, true);
        let r = simulate(&c).unwrap();
        assert!(r.trace.windows(2).all(|w| w[0].start_time <= w[1].start_time));
        let graphs = stage_graphs(&c).unwrap();
        let per_block: TimeQuantum = (0..NUM_STAGES)
            .map(|j| graphs[match StageKind::of_stage(j) {
                StageKind::Initial => 0,
                StageKind::Standard => 1,
                StageKind::Final => 2,
            }]
            .total_work())
            .sum();
        assert_eq!(r.total_task_work(), per_block * 4);
        let mut buf = Vec::new();
        r.write_trace(&mut buf).unwrap();
        assert_eq!(buf.iter().filter(|&&b| b == b'\n').count(), r.trace.len());
    }

    #[test]
    fn mismatched_block_count_is_rejected() {
        let key = [0u8; 16];
        assert!(simulate_functional(&cfg(Mode::Encrypt, 2, 1, false), &key, &[Block([0; 16])]).is_err());
    }
}
