//! Task-level model of the pipeline: stage graphs plus a discrete-event engine.

mod engine;
mod graph;

pub use engine::{simulate, simulate_functional, SimResult, TraceEvent};
pub use graph::{
    build_stage_graph, Action, OpCounts, Operand, StageSchedule, Task, TaskGraph, TaskId, TaskKind,
};
