//! Per-round regret records, the recording environment wrapper and CSV
//! emission.

use std::collections::HashMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use stopbandit_core::environments::{Environment, PandoraAction, PhaseNote, ProphetAction, RoundKind};
use stopbandit_core::prophet_learner::Flag;
use stopbandit_core::Result as CoreResult;

use crate::HarnessError;

pub const CSV_HEADER: [&str; 8] = ["t", "phase", "epsilon", "action", "reward", "regret", "cum_regret", "flags"];

/// Actions the recorder can intern and print.
pub trait TraceAction: Clone {
    fn key(&self) -> Vec<u64>;
    fn label(&self) -> String;
}

impl TraceAction for ProphetAction {
    fn key(&self) -> Vec<u64> {
        self.thresholds.iter().map(|t| t.to_bits()).collect()
    }

    /// Thresholds joined by `;`.
    fn label(&self) -> String {
        self.thresholds.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(";")
    }
}

impl TraceAction for PandoraAction {
    fn key(&self) -> Vec<u64> {
        self.order.iter().map(|&b| b as u64).chain(self.thresholds.iter().map(|t| t.to_bits())).collect()
    }

    /// `box:threshold` in inspection order, joined by `;`.
    fn label(&self) -> String {
        self.order.iter().map(|&b| format!("{b}:{}", self.thresholds[b])).collect::<Vec<_>>().join(";")
    }
}

/// One round in compact form; the action is an index into
/// [`RegretTrace::actions`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Record {
    pub phase: u32,
    pub epsilon: f64,
    pub kind: RoundKind,
    pub action: u32,
    pub reward: f64,
    pub regret: f64,
    pub cum_regret: f64,
}

/// A distinct action with its oracle value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionEntry {
    pub label: String,
    pub value: f64,
    pub plays: u64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RegretTrace {
    /// Per-round value of the benchmark policy.
    pub best: f64,
    pub actions: Vec<ActionEntry>,
    /// Empty when the run kept totals only.
    pub records: Vec<Record>,
    pub rounds: u64,
    pub cum_regret: f64,
    pub total_reward: f64,
    /// Flags raised in each phase, by phase number.
    pub phase_flags: HashMap<u32, Vec<String>>,
}

/// A CSV row as written and read back.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub t: u64,
    pub phase: u32,
    pub epsilon: f64,
    pub action: String,
    pub reward: f64,
    pub regret: f64,
    pub cum_regret: f64,
    pub flags: String,
}

pub fn kind_name(kind: RoundKind) -> &'static str {
    match kind {
        RoundKind::Init => "init",
        RoundKind::Explore => "explore",
        RoundKind::Estimate => "estimate",
        RoundKind::Swap => "swap",
        RoundKind::Tail => "tail",
    }
}

pub fn flag_name(flag: &Flag) -> String {
    match flag {
        Flag::Degenerate { index } => format!("degenerate:{index}"),
        Flag::NonMonotone { index, .. } => format!("nonmonotone:{index}"),
        Flag::NoReach { index } => format!("noreach:{index}"),
        Flag::Truncated => "truncated".into(),
    }
}

impl RegretTrace {
    pub fn mean_reward(&self) -> f64 {
        self.total_reward / self.rounds.max(1) as f64
    }

    /// `T·best − Σ value(action_t)`, recomputed from the action counts.
    pub fn recomputed_regret(&self) -> f64 {
        let played: f64 = self.actions.iter().map(|a| a.plays as f64 * a.value).sum();
        self.rounds as f64 * self.best - played
    }

    pub fn rows(&self) -> impl Iterator<Item = CsvRow> + '_ {
        self.records.iter().enumerate().map(move |(k, r)| {
            let mut flags = kind_name(r.kind).to_string();
            if let Some(extra) = self.phase_flags.get(&r.phase) {
                for f in extra {
                    flags.push('|');
                    flags.push_str(f);
                }
            }
            CsvRow {
                t: k as u64 + 1,
                phase: r.phase,
                epsilon: r.epsilon,
                action: self.actions[r.action as usize].label.clone(),
                reward: r.reward,
                regret: r.regret,
                cum_regret: r.cum_regret,
                flags,
            }
        })
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), HarnessError> {
        if self.records.len() as u64 != self.rounds {
            return Err(HarnessError::Config("trace was run without per-round records".into()));
        }
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
        w.write_record(CSV_HEADER)?;
        for row in self.rows() {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<CsvRow>, HarnessError> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(String::from).collect();
    if header != CSV_HEADER {
        return Err(HarnessError::Config(format!("unexpected CSV header {header:?}")));
    }
    r.deserialize().map(|row| row.map_err(HarnessError::from)).collect()
}

/// Wraps an environment and charges every round its oracle regret.
pub struct Recorder<'a, E: Environment> {
    inner: E,
    value: Box<dyn Fn(&E::Action) -> CoreResult<f64> + 'a>,
    index: HashMap<Vec<u64>, u32>,
    note: PhaseNote,
    keep: bool,
    trace: RegretTrace,
}

impl<'a, E> Recorder<'a, E>
where
    E: Environment,
    E::Action: TraceAction,
{
    /// `value` gives the expected per-round value of an action and `best`
    /// that of the benchmark. With `keep` false only totals are tracked.
    pub fn new(inner: E, best: f64, value: impl Fn(&E::Action) -> CoreResult<f64> + 'a, keep: bool) -> Self {
        Recorder {
            inner,
            value: Box::new(value),
            index: HashMap::new(),
            note: PhaseNote::default(),
            keep,
            trace: RegretTrace { best, ..Default::default() },
        }
    }

    pub fn inner(&self) -> &E {
        &self.inner
    }

    pub fn trace(&self) -> &RegretTrace {
        &self.trace
    }

    pub fn into_trace(self) -> RegretTrace {
        self.trace
    }

    fn intern(&mut self, action: &E::Action) -> CoreResult<u32> {
        let key = action.key();
        if let Some(&id) = self.index.get(&key) {
            return Ok(id);
        }
        let value = (self.value)(action)?;
        let id = self.trace.actions.len() as u32;
        self.trace.actions.push(ActionEntry { label: action.label(), value, plays: 0 });
        self.index.insert(key, id);
        Ok(id)
    }
}

impl<E> Environment for Recorder<'_, E>
where
    E: Environment,
    E::Action: TraceAction,
{
    type Action = E::Action;

    fn horizon(&self) -> u64 {
        self.inner.horizon()
    }

    fn played(&self) -> u64 {
        self.inner.played()
    }

    fn budget(&self) -> u64 {
        self.inner.budget()
    }

    fn play(&mut self, action: &E::Action) -> CoreResult<f64> {
        let id = self.intern(action)?;
        let reward = self.inner.play(action)?;
        let entry = &mut self.trace.actions[id as usize];
        entry.plays += 1;
        let regret = self.trace.best - entry.value;
        let t = &mut self.trace;
        t.rounds += 1;
        t.cum_regret += regret;
        t.total_reward += reward;
        if self.keep {
            t.records.push(Record {
                phase: self.note.phase,
                epsilon: self.note.epsilon,
                kind: self.note.kind,
                action: id,
                reward,
                regret,
                cum_regret: t.cum_regret,
            });
        }
        Ok(reward)
    }

    fn note(&mut self, note: PhaseNote) {
        self.note = note;
        self.inner.note(note);
    }
}
