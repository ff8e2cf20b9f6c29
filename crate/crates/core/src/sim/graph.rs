//! Per-stage dataflow graphs with costed, PE-assigned tasks.
//!
//! A stage graph is built once per (mode, stage kind, PE count) and reused for every block.
//! Tasks are numbered in a topological order, and each PE executes its own tasks in id
//! order. That static order is what makes the schedule length reproduce the closed-form
//! stage times.
//!
//! Layout of a split stage:
//! - Byte_Sub and Shift_Row run serially on PE 0 (one S-box task, 48 shift tasks).
//! - Add_Round_Key byte `j` runs on PE `j mod M_r`.
//! - Mix-column element `e` (column-major) goes to group `e mod (M_r / g)` where `g` is 2
//!   for encryption and 4 for decryption. Group members are PEs `g·k .. g·k + g`, the first
//!   one being the leader that merges partial products.
//! - Each merge of partial results from other PEs costs one NOP of length `t_ov` on the
//!   leader, charged once per element.

use serde::Serialize;

use crate::cost::{CostParams, Mode, StageKind, SHIFT_ROW_SHIFTS};
use crate::error::{Error, Result};
use crate::time::TimeQuantum;

pub type TaskId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum TaskKind {
    Xor,
    Shift,
    Sbox,
    Nop,
}

impl TaskKind {
    pub fn cost(self, params: &CostParams) -> TimeQuantum {
        match self {
            TaskKind::Xor => params.t_xor,
            TaskKind::Shift => params.t_shift,
            TaskKind::Sbox => params.t_byte_sub,
            TaskKind::Nop => params.t_ov,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            TaskKind::Xor => "XOR",
            TaskKind::Shift => "SHIFT",
            TaskKind::Sbox => "SBOX",
            TaskKind::Nop => "NOP",
        }
    }
}

/// Where a byte consumed by a task comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Operand {
    /// Byte `j` of the state entering the stage.
    Input(u8),
    /// Byte `j` of the stage's round key.
    Key(u8),
    /// Output byte `k` of an earlier task.
    Out(TaskId, u8),
}

/// Value-level meaning of a task, used by functional simulation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Action {
    /// Pure cost, no value produced.
    None,
    SubBytes { inputs: [Operand; 16], inverse: bool },
    /// Output `c` is input `(c + left) mod 4`.
    RotateRow { inputs: [Operand; 4], left: usize },
    Xtime(Operand),
    Xor(Operand, Operand),
}

impl Action {
    pub fn operands(&self) -> Vec<Operand> {
        match self {
            Action::None => Vec::new(),
            Action::SubBytes { inputs, .. } => inputs.to_vec(),
            Action::RotateRow { inputs, .. } => inputs.to_vec(),
            Action::Xtime(a) => vec![*a],
            Action::Xor(a, b) => vec![*a, *b],
        }
    }

    pub fn output_len(&self) -> usize {
        match self {
            Action::None => 0,
            Action::SubBytes { .. } => 16,
            Action::RotateRow { .. } => 4,
            Action::Xtime(_) | Action::Xor(..) => 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Task {
    pub id: TaskId,
    pub kind: TaskKind,
    pub cost: TimeQuantum,
    pub pe: usize,
    pub action: Action,
    /// Producers this task waits for (data and ordering edges).
    pub preds: Vec<TaskId>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct OpCounts {
    pub xor: usize,
    pub shift: usize,
    pub sbox: usize,
    pub nop: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TaskGraph {
    pub mode: Mode,
    pub stage_kind: StageKind,
    pub pe_count: usize,
    pub split: bool,
    pub combine_overhead: TimeQuantum,
    pub tasks: Vec<Task>,
    /// Where each byte of the outgoing state lives.
    pub outputs: [Operand; 16],
}

/// Start and end of every task for one block run in isolation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StageSchedule {
    pub start: Vec<TimeQuantum>,
    pub end: Vec<TimeQuantum>,
    pub makespan: TimeQuantum,
}

impl TaskGraph {
    pub fn len(&self) -> usize {
        self.tasks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tasks.is_empty()
    }

    pub fn edges(&self) -> impl Iterator<Item = (TaskId, TaskId)> + '_ {
        self.tasks
            .iter()
            .flat_map(|t| t.preds.iter().map(move |&p| (p, t.id)))
    }

    pub fn successors(&self) -> Vec<Vec<TaskId>> {
        let mut succ = vec![Vec::new(); self.tasks.len()];
        for (p, c) in self.edges() {
            succ[p].push(c);
        }
        succ
    }

    /// Task ids of each PE in execution order.
    pub fn pe_lists(&self) -> Vec<Vec<TaskId>> {
        let mut lists = vec![Vec::new(); self.pe_count];
        for t in &self.tasks {
            lists[t.pe].push(t.id);
        }
        lists
    }

    pub fn op_counts(&self) -> OpCounts {
        let mut c = OpCounts::default();
        for t in &self.tasks {
            match t.kind {
                TaskKind::Xor => c.xor += 1,
                TaskKind::Shift => c.shift += 1,
                TaskKind::Sbox => c.sbox += 1,
                TaskKind::Nop => c.nop += 1,
            }
        }
        c
    }

    /// Sum of all task costs.
    pub fn total_work(&self) -> TimeQuantum {
        self.tasks.iter().map(|t| t.cost).sum()
    }

    /// Work excluding combine overhead: what one PE would spend on the stage.
    pub fn serial_work(&self) -> TimeQuantum {
        self.tasks
            .iter()
            .filter(|t| t.kind != TaskKind::Nop)
            .map(|t| t.cost)
            .sum()
    }

    /// Every edge points from a lower id to a higher one, so id order is topological.
    pub fn is_topologically_numbered(&self) -> bool {
        self.tasks
            .iter()
            .enumerate()
            .all(|(i, t)| t.id == i && t.preds.iter().all(|&p| p < i))
    }

    /// Static-order list schedule of a single block: each task starts when its PE has
    /// finished the previous task in its list and all its producers are done.
    pub fn schedule(&self) -> StageSchedule {
        let n = self.tasks.len();
        let mut start = vec![TimeQuantum::ZERO; n];
        let mut end = vec![TimeQuantum::ZERO; n];
        let mut pe_free = vec![TimeQuantum::ZERO; self.pe_count];
        for t in &self.tasks {
            let ready = t
                .preds
                .iter()
                .map(|&p| end[p])
                .fold(pe_free[t.pe], TimeQuantum::max);
            start[t.id] = ready;
            end[t.id] = ready + t.cost;
            pe_free[t.pe] = end[t.id];
        }
        let makespan = end.iter().copied().max().unwrap_or(TimeQuantum::ZERO);
        StageSchedule { start, end, makespan }
    }

    pub fn critical_path(&self) -> TimeQuantum {
        self.schedule().makespan
    }

    /// Evaluate the graph's byte semantics on one input state, in id order.
    pub fn evaluate(&self, input: &[u8; 16], key: &[u8; 16]) -> [u8; 16] {
        let mut values: Vec<Vec<u8>> = Vec::with_capacity(self.tasks.len());
        for t in &self.tasks {
            let out = apply_action(&t.action, |op| read_operand(op, input, key, &values));
            values.push(out);
        }
        let mut out = [0u8; 16];
        for (o, op) in out.iter_mut().zip(self.outputs.iter()) {
            *o = read_operand(*op, input, key, &values);
        }
        out
    }
}

pub(crate) fn read_operand(op: Operand, input: &[u8; 16], key: &[u8; 16], values: &[Vec<u8>]) -> u8 {
    match op {
        Operand::Input(j) => input[j as usize],
        Operand::Key(j) => key[j as usize],
        Operand::Out(t, k) => values[t][k as usize],
    }
}

pub(crate) fn apply_action(action: &Action, mut read: impl FnMut(Operand) -> u8) -> Vec<u8> {
    use crate::aes::{INV_SBOX, SBOX};
    match action {
        Action::None => Vec::new(),
        Action::SubBytes { inputs, inverse } => {
            let table = if *inverse { &INV_SBOX } else { &SBOX };
            inputs.iter().map(|&op| table[read(op) as usize]).collect()
        }
        Action::RotateRow { inputs, left } => {
            let row: Vec<u8> = inputs.iter().map(|&op| read(op)).collect();
            (0..4).map(|c| row[(c + left) % 4]).collect()
        }
        Action::Xtime(a) => vec![crate::gf::xtime(read(*a))],
        Action::Xor(a, b) => vec![read(*a) ^ read(*b)],
    }
}

struct Builder<'p> {
    params: &'p CostParams,
    pe_count: usize,
    split: bool,
    tasks: Vec<Task>,
    cur: [Operand; 16],
    /// Last task of the serial Byte_Sub/Shift_Row chain on PE 0.
    serial_tail: Option<TaskId>,
    /// Ordering edge applied to every task of the phase that follows the serial chain.
    barrier: Option<TaskId>,
}

impl<'p> Builder<'p> {
    fn new(params: &'p CostParams, pe_count: usize, split: bool) -> Self {
        let mut cur = [Operand::Input(0); 16];
        for (j, c) in cur.iter_mut().enumerate() {
            *c = Operand::Input(j as u8);
        }
        Builder {
            params,
            pe_count,
            split,
            tasks: Vec::new(),
            cur,
            serial_tail: None,
            barrier: None,
        }
    }

    fn push(&mut self, kind: TaskKind, pe: usize, action: Action, extra: &[TaskId]) -> TaskId {
        let id = self.tasks.len();
        let mut preds: Vec<TaskId> = action
            .operands()
            .into_iter()
            .filter_map(|op| match op {
                Operand::Out(t, _) => Some(t),
                _ => None,
            })
            .chain(extra.iter().copied())
            .chain(self.barrier)
            .collect();
        preds.sort_unstable();
        preds.dedup();
        self.tasks.push(Task {
            id,
            kind,
            cost: kind.cost(self.params),
            pe,
            action,
            preds,
        });
        id
    }

    fn push_serial(&mut self, kind: TaskKind, action: Action) -> TaskId {
        let tail: Vec<TaskId> = self.serial_tail.into_iter().collect();
        let id = self.push(kind, 0, action, &tail);
        self.serial_tail = Some(id);
        id
    }

    fn end_serial_phase(&mut self) {
        self.barrier = self.serial_tail;
    }

    fn end_parallel_phase(&mut self) {
        self.barrier = None;
    }

    fn sub_bytes(&mut self, inverse: bool) {
        let t = self.push_serial(
            TaskKind::Sbox,
            Action::SubBytes {
                inputs: self.cur,
                inverse,
            },
        );
        for (j, c) in self.cur.iter_mut().enumerate() {
            *c = Operand::Out(t, j as u8);
        }
    }

    /// 48 shift tasks: rows 1..=3 get 15 filler shifts and one rotation each.
    fn shift_rows(&mut self, inverse: bool) {
        let per_row = SHIFT_ROW_SHIFTS as usize / 3;
        for row in 1..4usize {
            for _ in 0..per_row - 1 {
                self.push_serial(TaskKind::Shift, Action::None);
            }
            let inputs = [0, 1, 2, 3].map(|c| self.cur[4 * c + row]);
            let left = if inverse { 4 - row } else { row };
            let t = self.push_serial(TaskKind::Shift, Action::RotateRow { inputs, left });
            for c in 0..4 {
                self.cur[4 * c + row] = Operand::Out(t, c as u8);
            }
        }
    }

    fn add_round_key(&mut self) {
        for j in 0..16 {
            let pe = if self.split { j % self.pe_count } else { 0 };
            let t = self.push(TaskKind::Xor, pe, Action::Xor(self.cur[j], Operand::Key(j as u8)), &[]);
            self.cur[j] = Operand::Out(t, 0);
        }
    }

    fn group_pes(&self, element: usize, group: usize) -> Vec<usize> {
        if self.split {
            let groups = self.pe_count / group;
            let g = element % groups;
            (0..group).map(|i| group * g + i).collect()
        } else {
            vec![0; group]
        }
    }

    fn xtime(&mut self, pe: usize, a: Operand) -> Operand {
        Operand::Out(self.push(TaskKind::Shift, pe, Action::Xtime(a), &[]), 0)
    }

    fn xor(&mut self, pe: usize, a: Operand, b: Operand, extra: &[TaskId]) -> Operand {
        Operand::Out(self.push(TaskKind::Xor, pe, Action::Xor(a, b), extra), 0)
    }

    /// Leader-side merge cost, only when partial results cross PEs.
    fn combine_nop(&mut self, pe: usize, waits_for: Operand) -> Vec<TaskId> {
        if !self.split {
            return Vec::new();
        }
        let dep = match waits_for {
            Operand::Out(t, _) => vec![t],
            _ => Vec::new(),
        };
        vec![self.push(TaskKind::Nop, pe, Action::None, &dep)]
    }

    fn column_operands(&self, element: usize) -> [Operand; 4] {
        let col = element / 4;
        let row = element % 4;
        [0, 1, 2, 3].map(|k| self.cur[4 * col + (row + k) % 4])
    }

    /// `02·b0 ⊕ 03·b1 ⊕ b2 ⊕ b3`; leader: 1 shift + 3 XOR, helper: 1 shift + 1 XOR.
    fn mix_element(&mut self, element: usize) -> Operand {
        let [b0, b1, b2, b3] = self.column_operands(element);
        let pes = self.group_pes(element, 2);
        let (lead, help) = (pes[0], pes[1]);
        let two_b0 = self.xtime(lead, b0);
        let acc = self.xor(lead, two_b0, b2, &[]);
        let acc = self.xor(lead, acc, b3, &[]);
        let two_b1 = self.xtime(help, b1);
        let three_b1 = self.xor(help, two_b1, b1, &[]);
        let nop = self.combine_nop(lead, three_b1);
        self.xor(lead, acc, three_b1, &nop)
    }

    /// `0E·c0 ⊕ 0B·c1 ⊕ 0D·c2 ⊕ 09·c3` as four cooperating terms; member loads are
    /// 3 shifts plus 4, 2, 3 and 1 XORs.
    fn inv_mix_element(&mut self, element: usize) -> Operand {
        let [c0, c1, c2, c3] = self.column_operands(element);
        let pes = self.group_pes(element, 4);

        let x2 = self.xtime(pes[0], c0);
        let x4 = self.xtime(pes[0], x2);
        let x8 = self.xtime(pes[0], x4);
        let t = self.xor(pes[0], x8, x4, &[]);
        let term_e = self.xor(pes[0], t, x2, &[]);

        let x2 = self.xtime(pes[1], c1);
        let x4 = self.xtime(pes[1], x2);
        let x8 = self.xtime(pes[1], x4);
        let t = self.xor(pes[1], x8, x2, &[]);
        let term_b = self.xor(pes[1], t, c1, &[]);

        let x2 = self.xtime(pes[3], c3);
        let x4 = self.xtime(pes[3], x2);
        let x8 = self.xtime(pes[3], x4);
        let term_9 = self.xor(pes[3], x8, c3, &[]);

        let x2 = self.xtime(pes[2], c2);
        let x4 = self.xtime(pes[2], x2);
        let x8 = self.xtime(pes[2], x4);
        let t = self.xor(pes[2], x8, x4, &[]);
        let term_d = self.xor(pes[2], t, c2, &[]);
        let pair_d9 = self.xor(pes[2], term_d, term_9, &[]);

        let nop = self.combine_nop(pes[0], term_b);
        let acc = self.xor(pes[0], term_e, term_b, &nop);
        self.xor(pes[0], acc, pair_d9, &[])
    }

    fn mix_columns(&mut self, mode: Mode) {
        let mut next = self.cur;
        for (e, slot) in next.iter_mut().enumerate() {
            *slot = match mode {
                Mode::Encrypt => self.mix_element(e),
                Mode::Decrypt => self.inv_mix_element(e),
            };
        }
        self.cur = next;
    }

    fn finish(self, mode: Mode, stage_kind: StageKind) -> TaskGraph {
        TaskGraph {
            mode,
            stage_kind,
            pe_count: self.pe_count,
            split: self.split,
            combine_overhead: self.params.t_ov,
            tasks: self.tasks,
            outputs: self.cur,
        }
    }
}

/// Build the dataflow graph one block traverses in a stage of the given kind.
pub fn build_stage_graph(
    mode: Mode,
    stage_kind: StageKind,
    pe_count: usize,
    inner_parallel: bool,
    params: &CostParams,
) -> Result<TaskGraph> {
    if pe_count == 0 {
        return Err(Error::Graph("M_r must be at least 1".into()));
    }
    params.validate()?;
    let split = inner_parallel && pe_count > 1;
    if split {
        let g = mode.group_size();
        if !pe_count.is_power_of_two() {
            return Err(Error::Graph(format!("M_r={pe_count} is not a power of two")));
        }
        if !pe_count.is_multiple_of(g) {
            return Err(Error::Graph(format!(
                "M_r={pe_count} cannot be grouped into {}-PE teams for {mode}",
                g
            )));
        }
        if pe_count > mode.max_parallel_pes() {
            return Err(Error::Graph(format!(
                "M_r={pe_count} leaves PEs without a mix-column element (max {} for {mode})",
                mode.max_parallel_pes()
            )));
        }
    }

    let mut b = Builder::new(params, pe_count, split);
    match (mode, stage_kind) {
        (_, StageKind::Initial) => b.add_round_key(),
        (Mode::Encrypt, kind) => {
            b.sub_bytes(false);
            b.shift_rows(false);
            b.end_serial_phase();
            if kind == StageKind::Standard {
                b.mix_columns(mode);
                b.end_parallel_phase();
            }
            b.add_round_key();
        }
        (Mode::Decrypt, kind) => {
            b.shift_rows(true);
            b.sub_bytes(true);
            b.end_serial_phase();
            b.add_round_key();
            b.end_parallel_phase();
            if kind == StageKind::Standard {
                b.mix_columns(mode);
            }
        }
    }
    Ok(b.finish(mode, stage_kind))
}
