//! Closed-form timing model for the eleven-stage pipeline.
//!
//! Every quantity is an exact [`TimeQuantum`]. Stage times are assembled from the per-
//! transformation costs rather than from pre-summed constants, so changing one parameter
//! (say the S-box lookup time) flows through every derived figure.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::time::{Rational, TimeQuantum};

/// Pipeline stages: initial key addition, nine standard rounds, final round.
pub const NUM_STAGES: usize = 11;
pub const STANDARD_ROUNDS: i64 = 9;
/// State bytes touched by Add_Round_Key.
pub const STATE_BYTES: i64 = 16;
/// Shift operations charged to Shift_Row.
pub const SHIFT_ROW_SHIFTS: i64 = 48;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[serde(rename = "enc")]
    Encrypt,
    #[serde(rename = "dec")]
    Decrypt,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Encrypt => "enc",
            Mode::Decrypt => "dec",
        }
    }

    /// PEs that cooperate on one mix-column element when the stage is parallelized.
    pub fn group_size(self) -> usize {
        match self {
            Mode::Encrypt => 2,
            Mode::Decrypt => 4,
        }
    }

    /// Largest PE count the parallel formulas are defined for.
    pub fn max_parallel_pes(self) -> usize {
        match self {
            Mode::Encrypt => 32,
            Mode::Decrypt => 64,
        }
    }

    /// Smallest PE count covered by the published analysis of the parallel variant.
    pub fn min_published_pes(self) -> usize {
        match self {
            Mode::Encrypt => 2,
            Mode::Decrypt => 4,
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "enc" | "encrypt" => Ok(Mode::Encrypt),
            "dec" | "decrypt" => Ok(Mode::Decrypt),
            _ => Err(Error::Config(format!("unknown mode {s:?} (expected enc or dec)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StageKind {
    Initial,
    Standard,
    Final,
}

impl StageKind {
    pub fn of_stage(stage: usize) -> StageKind {
        match stage {
            0 => StageKind::Initial,
            s if s + 1 == NUM_STAGES => StageKind::Final,
            _ => StageKind::Standard,
        }
    }
}

/// Unit costs of the primitive operations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CostParams {
    pub t_shift: TimeQuantum,
    pub t_xor: TimeQuantum,
    /// Whole-state S-box pass (forward or inverse); negligible by default.
    pub t_byte_sub: TimeQuantum,
    /// Charged once per cooperatively computed mix-column element.
    pub t_ov: TimeQuantum,
}

impl Default for CostParams {
    fn default() -> Self {
        CostParams {
            t_shift: TimeQuantum::shifts(1),
            t_xor: TimeQuantum::shifts(6),
            t_byte_sub: TimeQuantum::ZERO,
            t_ov: TimeQuantum::ZERO,
        }
    }
}

impl CostParams {
    pub fn with_overhead(mut self, t_ov: TimeQuantum) -> Self {
        self.t_ov = t_ov;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.t_shift.is_negative()
            || self.t_xor.is_negative()
            || self.t_byte_sub.is_negative()
            || self.t_ov.is_negative()
        {
            return Err(Error::Config("cost parameters must be non-negative".into()));
        }
        if self.t_shift.is_zero() || self.t_xor.is_zero() {
            return Err(Error::Config("t_shift and t_xor must be positive".into()));
        }
        Ok(())
    }

    /// Every parameter multiplied by `k`.
    pub fn scaled(&self, k: Rational) -> CostParams {
        CostParams {
            t_shift: self.t_shift.scale(k),
            t_xor: self.t_xor.scale(k),
            t_byte_sub: self.t_byte_sub.scale(k),
            t_ov: self.t_ov.scale(k),
        }
    }

    /// Express `t` in units of this parameter set's XOR time.
    pub fn in_xors(&self, t: TimeQuantum) -> Rational {
        t.ratio_to(self.t_xor)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ConfigWarning {
    /// Inside the formulas' domain but outside the PE range the published analysis covers.
    OutsidePublishedRange { mode: Mode, pe_per_stage: usize },
    /// A single PE has nothing to split; the stage runs serially.
    SinglePeParallel,
}

impl fmt::Display for ConfigWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigWarning::OutsidePublishedRange { mode, pe_per_stage } => write!(
                f,
                "M_r={pe_per_stage} is outside the published range {}..={} for {mode}; formulas evaluated literally",
                mode.min_published_pes(),
                mode.max_parallel_pes()
            ),
            ConfigWarning::SinglePeParallel => {
                write!(f, "inner-parallel with M_r=1 degenerates to the serial stage")
            }
        }
    }
}

/// One experiment point.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PipelineConfig {
    pub mode: Mode,
    pub num_blocks: usize,
    pub pe_per_stage: usize,
    pub inner_parallel: bool,
    pub params: CostParams,
}

impl PipelineConfig {
    pub fn new(
        mode: Mode,
        num_blocks: usize,
        pe_per_stage: usize,
        inner_parallel: bool,
        params: CostParams,
    ) -> Result<Self> {
        let cfg = PipelineConfig {
            mode,
            num_blocks,
            pe_per_stage,
            inner_parallel,
            params,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Default cost parameters.
    pub fn simple(mode: Mode, num_blocks: usize, pe_per_stage: usize, inner_parallel: bool) -> Result<Self> {
        Self::new(mode, num_blocks, pe_per_stage, inner_parallel, CostParams::default())
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_blocks == 0 {
            return Err(Error::Config("number of blocks L must be at least 1".into()));
        }
        validate_pes(self.mode, self.pe_per_stage, self.inner_parallel)?;
        self.params.validate()
    }

    pub fn total_pes(&self) -> usize {
        NUM_STAGES * self.pe_per_stage
    }

    /// True when the stage really is split across PEs.
    pub fn splits_stages(&self) -> bool {
        self.inner_parallel && self.pe_per_stage > 1
    }

    pub fn warnings(&self) -> Vec<ConfigWarning> {
        let mut w = Vec::new();
        if self.inner_parallel {
            if self.pe_per_stage == 1 {
                w.push(ConfigWarning::SinglePeParallel);
            } else if self.pe_per_stage < self.mode.min_published_pes() {
                w.push(ConfigWarning::OutsidePublishedRange {
                    mode: self.mode,
                    pe_per_stage: self.pe_per_stage,
                });
            }
        }
        w
    }

    pub fn stage_times(&self) -> StageTimes {
        stage_times(self.mode, self.pe_per_stage, self.inner_parallel, &self.params)
            .expect("validated config")
    }
}

fn validate_pes(mode: Mode, pe_per_stage: usize, inner_parallel: bool) -> Result<()> {
    if pe_per_stage == 0 {
        return Err(Error::Config("M_r must be at least 1".into()));
    }
    if inner_parallel && pe_per_stage > 1 {
        if !pe_per_stage.is_power_of_two() {
            return Err(Error::Config(format!(
                "inner-parallel M_r must be a power of two, got {pe_per_stage}"
            )));
        }
        if pe_per_stage > mode.max_parallel_pes() {
            return Err(Error::Config(format!(
                "inner-parallel M_r={pe_per_stage} exceeds {} for {mode}",
                mode.max_parallel_pes()
            )));
        }
    }
    Ok(())
}

/// Per-stage service times: initial round, any standard round, final round.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StageTimes {
    pub initial: TimeQuantum,
    pub standard: TimeQuantum,
    pub final_round: TimeQuantum,
}

impl StageTimes {
    pub fn of_kind(&self, kind: StageKind) -> TimeQuantum {
        match kind {
            StageKind::Initial => self.initial,
            StageKind::Standard => self.standard,
            StageKind::Final => self.final_round,
        }
    }

    pub fn for_stage(&self, stage: usize) -> TimeQuantum {
        self.of_kind(StageKind::of_stage(stage))
    }

    /// One block through all eleven stages with no overlap.
    pub fn single_pass(&self) -> TimeQuantum {
        self.initial + self.standard * STANDARD_ROUNDS + self.final_round
    }

    pub fn bottleneck(&self) -> TimeQuantum {
        self.initial.max(self.standard).max(self.final_round)
    }
}

pub fn add_round_key_time(params: &CostParams) -> TimeQuantum {
    params.t_xor * STATE_BYTES
}

/// Add_Round_Key with the 16 XORs spread over `pes` PEs.
pub fn parallel_add_round_key_time(params: &CostParams, pes: usize) -> TimeQuantum {
    let per_pe = (STATE_BYTES as usize).div_ceil(pes) as i64;
    params.t_xor * per_pe
}

pub fn shift_row_time(params: &CostParams) -> TimeQuantum {
    params.t_shift * SHIFT_ROW_SHIFTS
}

/// Serial cost of one mix-column output element.
pub fn mix_element_time(mode: Mode, params: &CostParams) -> TimeQuantum {
    match mode {
        Mode::Encrypt => params.t_shift * 2 + params.t_xor * 4,
        Mode::Decrypt => params.t_shift * 12 + params.t_xor * 10,
    }
}

pub fn mix_column_time(mode: Mode, params: &CostParams) -> TimeQuantum {
    mix_element_time(mode, params) * STATE_BYTES
}

/// Work carried by each PE of a cooperating group for one element, group leader first.
pub fn element_pe_loads(mode: Mode, params: &CostParams) -> Vec<TimeQuantum> {
    let s = params.t_shift;
    let x = params.t_xor;
    match mode {
        Mode::Encrypt => vec![s + x * 3, s + x],
        Mode::Decrypt => vec![s * 3 + x * 4, s * 3 + x * 2, s * 3 + x * 3, s * 3 + x],
    }
}

/// Number of sequential element chunks each group handles: `32/M_r` or `64/M_r`.
pub fn element_chunks(mode: Mode, pes: usize) -> Rational {
    let work = (STATE_BYTES as usize * mode.group_size()) as i64;
    Rational::new(work, pes as i64)
}

pub fn parallel_mix_column_time(mode: Mode, pes: usize, params: &CostParams) -> TimeQuantum {
    let slowest = element_pe_loads(mode, params)
        .into_iter()
        .max()
        .unwrap_or(TimeQuantum::ZERO);
    (slowest + params.t_ov) * element_chunks(mode, pes)
}

/// Service time of each stage kind.
pub fn stage_times(mode: Mode, pe_per_stage: usize, inner_parallel: bool, params: &CostParams) -> Result<StageTimes> {
    validate_pes(mode, pe_per_stage, inner_parallel)?;
    params.validate()?;
    let split = inner_parallel && pe_per_stage > 1;
    let ark = if split {
        parallel_add_round_key_time(params, pe_per_stage)
    } else {
        add_round_key_time(params)
    };
    let mix = if split {
        parallel_mix_column_time(mode, pe_per_stage, params)
    } else {
        mix_column_time(mode, params)
    };
    let serial_part = params.t_byte_sub + shift_row_time(params);
    Ok(StageTimes {
        initial: ark,
        standard: serial_part + mix + ark,
        final_round: serial_part + ark,
    })
}

/// Time to process `num_blocks` blocks on one processor.
pub fn sequential_time(mode: Mode, num_blocks: usize, params: &CostParams) -> Result<TimeQuantum> {
    if num_blocks == 0 {
        return Err(Error::Config("number of blocks L must be at least 1".into()));
    }
    let one_block = stage_times(mode, 1, false, params)?.single_pass();
    Ok(one_block * num_blocks as i64)
}

/// `L·t_initial + 9·t_standard + t_final`, the published pipeline formula taken literally.
pub fn paper_pipeline_time(cfg: &PipelineConfig) -> TimeQuantum {
    let st = cfg.stage_times();
    st.initial * cfg.num_blocks as i64 + st.standard * STANDARD_ROUNDS + st.final_round
}

/// Completion time of a linear eleven-stage pipeline with unbounded buffers: one full pass
/// plus `L - 1` further departures paced by the slowest stage.
pub fn flowshop_makespan(cfg: &PipelineConfig) -> TimeQuantum {
    let st = cfg.stage_times();
    st.single_pass() + st.bottleneck() * (cfg.num_blocks as i64 - 1)
}

/// Speedup, efficiency and degree of improvement for one measurement.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MetricRow {
    pub exec_time: TimeQuantum,
    pub speedup: Rational,
    pub efficiency: Rational,
    pub improvement: Rational,
}

/// `baseline` is the reference time (fully sequential, or the single-PE row of a table).
pub fn metrics(baseline: TimeQuantum, par: TimeQuantum, pe_per_stage: usize) -> Result<MetricRow> {
    if par.is_zero() || par.is_negative() {
        return Err(Error::Invalid("parallel time must be positive".into()));
    }
    if baseline.is_zero() || baseline.is_negative() {
        return Err(Error::Invalid("baseline time must be positive".into()));
    }
    if pe_per_stage == 0 {
        return Err(Error::Invalid("M_r must be at least 1".into()));
    }
    let speedup = baseline / par;
    Ok(MetricRow {
        exec_time: par,
        speedup,
        efficiency: speedup / Rational::from_integer(pe_per_stage as i64),
        improvement: (baseline - par) / baseline,
    })
}

/// Everything the model says about one configuration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModelReport {
    pub config: PipelineConfig,
    pub stage_times: StageTimes,
    pub sequential: TimeQuantum,
    pub paper_pipeline: TimeQuantum,
    pub flowshop: TimeQuantum,
    /// Single-PE serial pipeline for the same `L` (the tables' `M_r = 1` row).
    pub serial_pipeline: TimeQuantum,
    pub vs_sequential: MetricRow,
    pub vs_serial_pipeline: MetricRow,
    pub flowshop_vs_sequential: MetricRow,
}

pub fn model_report(cfg: &PipelineConfig) -> Result<ModelReport> {
    cfg.validate()?;
    let sequential = sequential_time(cfg.mode, cfg.num_blocks, &cfg.params)?;
    let paper_pipeline = paper_pipeline_time(cfg);
    let flowshop = flowshop_makespan(cfg);
    let serial_cfg = PipelineConfig {
        pe_per_stage: 1,
        inner_parallel: false,
        ..*cfg
    };
    let serial_pipeline = paper_pipeline_time(&serial_cfg);
    Ok(ModelReport {
        config: *cfg,
        stage_times: cfg.stage_times(),
        sequential,
        paper_pipeline,
        flowshop,
        serial_pipeline,
        vs_sequential: metrics(sequential, paper_pipeline, cfg.pe_per_stage)?,
        vs_serial_pipeline: metrics(serial_pipeline, paper_pipeline, cfg.pe_per_stage)?,
        flowshop_vs_sequential: metrics(sequential, flowshop, cfg.pe_per_stage)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(n: i64, d: i64) -> TimeQuantum {
        TimeQuantum::xors(Rational::new(n, d))
    }

    fn cfg(mode: Mode, l: usize, m: usize, par: bool) -> PipelineConfig {
        PipelineConfig::simple(mode, l, m, par).unwrap()
    }

    #[test]
    fn sequential_times() {
        let p = CostParams::default();
        assert_eq!(sequential_time(Mode::Encrypt, 1, &p).unwrap(), x(880, 1));
        assert_eq!(sequential_time(Mode::Decrypt, 1, &p).unwrap(), x(1984, 1));
        assert_eq!(sequential_time(Mode::Encrypt, 25, &p).unwrap(), x(22000, 1));
        assert!(sequential_time(Mode::Encrypt, 0, &p).is_err());
    }

    #[test]
    fn byte_sub_enters_ten_times() {
        let p = CostParams {
            t_byte_sub: TimeQuantum::shifts(5),
            ..CostParams::default()
        };
        assert_eq!(
            sequential_time(Mode::Encrypt, 1, &p).unwrap(),
            x(880, 1) + TimeQuantum::shifts(50)
        );
    }

    #[test]
    fn serial_stage_times() {
        let st = stage_times(Mode::Encrypt, 1, false, &CostParams::default()).unwrap();
        assert_eq!(st.initial, x(16, 1));
        assert_eq!(st.standard, x(280, 3));
        assert_eq!(st.final_round, x(24, 1));
        assert_eq!(st.single_pass(), x(880, 1));
    }

    #[test]
    fn parallel_stage_times() {
        let p = CostParams::default();
        let st = stage_times(Mode::Encrypt, 4, true, &p).unwrap();
        assert_eq!(st.standard, x(112, 3));
        let st = stage_times(Mode::Decrypt, 16, true, &p).unwrap();
        assert_eq!((st.initial, st.standard, st.final_round), (x(1, 1), x(27, 1), x(9, 1)));
        // 16/64 rounds up to one XOR per PE.
        let st = stage_times(Mode::Decrypt, 64, true, &p).unwrap();
        assert_eq!(st.initial, x(1, 1));
        assert!(stage_times(Mode::Encrypt, 0, false, &p).is_err());
        assert!(stage_times(Mode::Encrypt, 64, true, &p).is_err());
        assert!(stage_times(Mode::Decrypt, 12, true, &p).is_err());
    }

    #[test]
    fn single_pe_parallel_is_serial() {
        let p = CostParams::default();
        assert_eq!(
            stage_times(Mode::Decrypt, 1, true, &p).unwrap(),
            stage_times(Mode::Decrypt, 1, false, &p).unwrap()
        );
        assert_eq!(cfg(Mode::Encrypt, 1, 1, true).warnings(), vec![ConfigWarning::SinglePeParallel]);
    }

    #[test]
    fn overhead_is_charged_per_chunk() {
        let p = CostParams::default().with_overhead(TimeQuantum::shifts(2));
        let st = stage_times(Mode::Encrypt, 8, true, &p).unwrap();
        // 48 + 4·(19 + 2) + 12
        assert_eq!(st.standard, TimeQuantum::shifts(48 + 84 + 12));
    }

    #[test]
    fn pipeline_formula_cells() {
        assert_eq!(paper_pipeline_time(&cfg(Mode::Encrypt, 10, 1, false)), x(1024, 1));
        assert_eq!(paper_pipeline_time(&cfg(Mode::Encrypt, 1, 1, false)), x(880, 1));
        assert_eq!(paper_pipeline_time(&cfg(Mode::Encrypt, 10, 2, true)), x(696, 1));
        assert_eq!(paper_pipeline_time(&cfg(Mode::Decrypt, 10, 8, true)), x(444, 1));
    }

    #[test]
    fn flowshop_cells() {
        assert_eq!(flowshop_makespan(&cfg(Mode::Encrypt, 1, 1, false)), x(880, 1));
        assert_eq!(flowshop_makespan(&cfg(Mode::Encrypt, 10, 1, false)), x(1720, 1));
        assert_eq!(flowshop_makespan(&cfg(Mode::Decrypt, 10, 16, true)), x(496, 1));
    }

    #[test]
    fn metric_examples() {
        let t = x(100, 1);
        let m = metrics(t, t, 1).unwrap();
        assert_eq!((m.speedup, m.improvement), (Rational::from_integer(1), Rational::from_integer(0)));
        let m = metrics(x(1024, 1), x(696, 1), 2).unwrap();
        assert_eq!(crate::time::round_to(m.speedup, 2), Rational::new(147, 100));
        assert_eq!(crate::time::truncate_to(m.efficiency, 2), Rational::new(73, 100));
        let m = metrics(x(8800, 1), x(1024, 1), 1).unwrap();
        assert_eq!(m.improvement, Rational::new(7776, 8800));
        assert!(metrics(t, TimeQuantum::ZERO, 1).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(PipelineConfig::simple(Mode::Encrypt, 0, 1, false).is_err());
        assert!(PipelineConfig::simple(Mode::Encrypt, 1, 0, false).is_err());
        assert!(PipelineConfig::simple(Mode::Encrypt, 1, 6, true).is_err());
        assert!(PipelineConfig::simple(Mode::Encrypt, 1, 6, false).is_ok());
        let c = cfg(Mode::Decrypt, 10, 2, true);
        assert_eq!(
            c.warnings(),
            vec![ConfigWarning::OutsidePublishedRange { mode: Mode::Decrypt, pe_per_stage: 2 }]
        );
        assert_eq!(c.total_pes(), 22);
        assert!(cfg(Mode::Encrypt, 10, 2, true).warnings().is_empty());
    }
}
