//! Model-based check of comparison edits.
//!
//! The reference model keeps dimensions and columns under stable ids and
//! stores cells in a map keyed by id pair, so it shares no layout with
//! [`Comparison`]. Every step applies the same command to both and compares
//! the observable state.

use std::collections::{HashMap, HashSet};

use proptest::prelude::*;
use proptest::sample::Index;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};

use crate::comparison::{Comparison, EditCommand, MergeStrategy, Origin};
use crate::ingest::{IngestColumn, ParsedIngest};
use crate::comparison::Dimension;

fn key(name: &str) -> String {
    name.split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}

fn word_count(name: &str) -> usize {
    let mut count = 0;
    let mut in_word = false;
    for c in name.chars() {
        if c.is_whitespace() {
            in_word = false;
        } else if !in_word {
            in_word = true;
            count += 1;
        }
    }
    count
}

#[derive(Debug, Clone)]
struct ModelDim {
    id: usize,
    name: String,
    definition: String,
    origin: Origin,
}

#[derive(Debug, Clone, Default)]
pub struct Model {
    dims: Vec<ModelDim>,
    cols: Vec<(usize, String)>,
    cells: HashMap<(usize, usize), String>,
    next_id: usize,
}

impl Model {
    fn fresh(&mut self) -> usize {
        self.next_id += 1;
        self.next_id
    }

    fn dim(&self, r: &str) -> Option<usize> {
        let k = key(r);
        self.dims.iter().position(|d| key(&d.name) == k)
    }

    fn col(&self, label: &str) -> Option<usize> {
        self.cols.iter().position(|(_, l)| l == label.trim())
    }

    /// Applies `cmd`; returns false and leaves the model untouched if the
    /// command is invalid in this state.
    pub fn apply(&mut self, cmd: &EditCommand) -> bool {
        let blank = |s: &str| s.trim().is_empty();
        match cmd {
            EditCommand::AddDimension { name, definition } => {
                if blank(name) || self.dim(name).is_some() {
                    return false;
                }
                let id = self.fresh();
                self.dims.push(ModelDim {
                    id,
                    name: name.trim().to_string(),
                    definition: definition.clone(),
                    origin: Origin::User,
                });
            }
            EditCommand::DeleteDimension { dimension } => match self.dim(dimension) {
                Some(d) => {
                    let id = self.dims.remove(d).id;
                    self.cells.retain(|(di, _), _| *di != id);
                }
                None => return false,
            },
            EditCommand::RenameDimension { dimension, to } => {
                let Some(d) = self.dim(dimension) else { return false };
                if blank(to) || self.dim(to).is_some_and(|other| other != d) {
                    return false;
                }
                self.dims[d].name = to.trim().to_string();
            }
            EditCommand::SetDefinition { dimension, definition } => match self.dim(dimension) {
                Some(d) => self.dims[d].definition = definition.clone(),
                None => return false,
            },
            EditCommand::AddColumn { label, .. } => {
                if blank(label) || self.col(label).is_some() {
                    return false;
                }
                let id = self.fresh();
                self.cols.push((id, label.trim().to_string()));
            }
            EditCommand::DeleteColumn { label } => match self.col(label) {
                Some(c) => {
                    let id = self.cols.remove(c).0;
                    self.cells.retain(|(_, ci), _| *ci != id);
                }
                None => return false,
            },
            EditCommand::RenameColumn { label, to } => {
                let Some(c) = self.col(label) else { return false };
                if blank(to) || self.col(to).is_some_and(|other| other != c) {
                    return false;
                }
                self.cols[c].1 = to.trim().to_string();
            }
            EditCommand::SetCell { dimension, column, value } => {
                let (Some(d), Some(c)) = (self.dim(dimension), self.col(column)) else {
                    return false;
                };
                self.cells.insert((self.dims[d].id, self.cols[c].0), value.clone());
            }
        }
        true
    }

    /// Compares every observable property of `cmp` with the model.
    pub fn agrees_with(&self, cmp: &Comparison) -> Result<(), String> {
        let dims = cmp.dimensions();
        let cols = cmp.columns();
        let rows = cmp.rows();
        if dims.len() != self.dims.len() || cols.len() != self.cols.len() {
            return Err(format!(
                "shape {}x{} but model has {}x{}",
                dims.len(),
                cols.len(),
                self.dims.len(),
                self.cols.len()
            ));
        }
        if rows.len() != dims.len() || rows.iter().any(|r| r.len() != cols.len()) {
            return Err("cells are not rectangular".into());
        }
        let mut keys = HashSet::new();
        for (got, want) in dims.iter().zip(&self.dims) {
            if got.name != want.name || got.definition != want.definition || got.origin != want.origin {
                return Err(format!("dimension {got:?} differs from model {want:?}"));
            }
            if got.key != key(&got.name) || !keys.insert(got.key.clone()) {
                return Err(format!("key `{}` is stale or duplicated", got.key));
            }
            let over = !(1..=3).contains(&word_count(&got.name));
            if got.needs_curation != over {
                return Err(format!("curation flag wrong for `{}`", got.name));
            }
        }
        let mut labels = HashSet::new();
        for (got, (_, want)) in cols.iter().zip(&self.cols) {
            if &got.label != want || !labels.insert(got.label.as_str()) {
                return Err(format!("column `{}` differs from model `{want}`", got.label));
            }
        }
        for (d, dim) in self.dims.iter().enumerate() {
            for (c, (col_id, _)) in self.cols.iter().enumerate() {
                let want = self.cells.get(&(dim.id, *col_id)).map_or("", String::as_str);
                if rows[d][c] != want {
                    return Err(format!("cell ({d}, {c}) is {:?}, model has {want:?}", rows[d][c]));
                }
            }
        }
        cmp.check_invariants()
    }
}

/// A seeded starting point: unique dimension names, unique labels, values.
#[derive(Debug, Clone)]
pub struct Seed {
    dims: Vec<(String, String)>,
    cols: Vec<String>,
    values: Vec<Vec<String>>,
}

impl Seed {
    pub fn build(&self) -> (Comparison, Model) {
        let mut model = Model::default();
        let dimensions: Vec<Dimension> = self
            .dims
            .iter()
            .map(|(n, d)| Dimension::new(n, d, Origin::Llm))
            .collect();
        let columns: Vec<IngestColumn> = self
            .cols
            .iter()
            .enumerate()
            .map(|(c, label)| IngestColumn {
                label: label.clone(),
                cells: self.values.iter().map(|row| row[c].clone()).collect(),
            })
            .collect();
        let parsed = ParsedIngest::from_parts(dimensions, columns);
        let cmp = Comparison::new("seed")
            .merge_ingest(&parsed, MergeStrategy::Replace)
            .expect("seed is valid");
        for (name, definition) in &self.dims {
            let id = model.fresh();
            model.dims.push(ModelDim {
                id,
                name: name.trim().to_string(),
                definition: definition.clone(),
                origin: Origin::Llm,
            });
        }
        for label in &self.cols {
            let id = model.fresh();
            model.cols.push((id, label.clone()));
        }
        for (d, row) in self.values.iter().enumerate() {
            for (c, v) in row.iter().enumerate() {
                let key = (model.dims[d].id, model.cols[c].0);
                model.cells.insert(key, v.clone());
            }
        }
        (cmp, model)
    }
}

fn name_strategy() -> BoxedStrategy<String> {
    prop_oneof![
        8 => "[a-d]{1,3}( [a-dA-D]{1,3}){0,2}",
        1 => "[a-d]{1,2}( [a-d]{1,2}){3,4}",
        1 => " {0,2}[a-d]{1,2}  [a-d]{1,2} {0,2}",
        1 => Just("  ".to_string()),
    ]
    .boxed()
}

fn label_strategy() -> BoxedStrategy<String> {
    prop_oneof![
        8 => "[A-D][0-9]?",
        1 => " [A-D][0-9]? ",
        1 => Just(String::new()),
    ]
    .boxed()
}

fn value_strategy() -> BoxedStrategy<String> {
    "\\PC{0,10}".boxed()
}

pub fn seed_strategy() -> impl Strategy<Value = Seed> {
    (0usize..6, 0usize..4).prop_flat_map(|(nd, nc)| {
        (
            proptest::collection::vec(("[a-z]{1,6}", "\\PC{0,12}"), nd),
            proptest::collection::vec(value_strategy(), nd * nc),
        )
            .prop_map(move |(names, flat)| {
                let dims = names
                    .into_iter()
                    .enumerate()
                    .map(|(i, (n, d))| (format!("{n} {i}"), d))
                    .collect();
                let cols = (0..nc).map(|c| format!("Seed {c}")).collect();
                let values = flat.chunks(nc.max(1)).take(nd).map(<[String]>::to_vec).collect();
                Seed { dims, cols, values: if nc == 0 { vec![Vec::new(); nd] } else { values } }
            })
    })
}

/// A reference to an existing item by position, or to one that is absent.
#[derive(Debug, Clone)]
pub enum Pick {
    Existing(Index, bool),
    Missing,
}

fn pick_strategy() -> BoxedStrategy<Pick> {
    prop_oneof![
        9 => (any::<Index>(), any::<bool>()).prop_map(|(i, alt)| Pick::Existing(i, alt)),
        1 => Just(Pick::Missing),
    ]
    .boxed()
}

#[derive(Debug, Clone)]
pub enum Op {
    AddDimension(String, String),
    DeleteDimension(Pick),
    RenameDimension(Pick, String),
    SetDefinition(Pick, String),
    AddColumn(String),
    DeleteColumn(Pick),
    RenameColumn(Pick, String),
    SetCell(Pick, Pick, String),
}

pub fn op_strategy() -> impl Strategy<Value = Op> {
    prop_oneof![
        3 => (name_strategy(), value_strategy()).prop_map(|(n, d)| Op::AddDimension(n, d)),
        1 => pick_strategy().prop_map(Op::DeleteDimension),
        2 => (pick_strategy(), name_strategy()).prop_map(|(p, n)| Op::RenameDimension(p, n)),
        2 => (pick_strategy(), value_strategy()).prop_map(|(p, d)| Op::SetDefinition(p, d)),
        2 => label_strategy().prop_map(Op::AddColumn),
        1 => pick_strategy().prop_map(Op::DeleteColumn),
        2 => (pick_strategy(), label_strategy()).prop_map(|(p, l)| Op::RenameColumn(p, l)),
        6 => (pick_strategy(), pick_strategy(), value_strategy()).prop_map(|(d, c, v)| Op::SetCell(d, c, v)),
    ]
}

impl Model {
    fn dim_ref(&self, pick: &Pick) -> String {
        match pick {
            Pick::Existing(i, alt) if !self.dims.is_empty() => {
                let name = &self.dims[i.index(self.dims.len())].name;
                // The alternate spelling exercises lookup by key.
                if *alt { format!(" {} ", name.to_uppercase().replace(' ', "  ")) } else { name.clone() }
            }
            _ => "no such dimension".into(),
        }
    }

    fn col_ref(&self, pick: &Pick) -> String {
        match pick {
            Pick::Existing(i, alt) if !self.cols.is_empty() => {
                let label = &self.cols[i.index(self.cols.len())].1;
                if *alt { format!(" {label} ") } else { label.clone() }
            }
            _ => "no such column".into(),
        }
    }

    /// Turns an abstract op into a concrete command against this state.
    pub fn concretize(&self, op: &Op) -> EditCommand {
        match op {
            Op::AddDimension(name, definition) => EditCommand::AddDimension {
                name: name.clone(),
                definition: definition.clone(),
            },
            Op::DeleteDimension(p) => EditCommand::DeleteDimension { dimension: self.dim_ref(p) },
            Op::RenameDimension(p, to) => EditCommand::RenameDimension {
                dimension: self.dim_ref(p),
                to: to.clone(),
            },
            Op::SetDefinition(p, d) => EditCommand::SetDefinition {
                dimension: self.dim_ref(p),
                definition: d.clone(),
            },
            Op::AddColumn(label) => EditCommand::AddColumn {
                label: label.clone(),
                source_ref: None,
            },
            Op::DeleteColumn(p) => EditCommand::DeleteColumn { label: self.col_ref(p) },
            Op::RenameColumn(p, to) => EditCommand::RenameColumn {
                label: self.col_ref(p),
                to: to.clone(),
            },
            Op::SetCell(d, c, v) => EditCommand::SetCell {
                dimension: self.dim_ref(d),
                column: self.col_ref(c),
                value: v.clone(),
            },
        }
    }
}

/// Replays `ops` from `seed`, checking agreement after every step. Returns
/// the number of commands that were valid.
pub fn replay(seed: &Seed, ops: &[Op]) -> Result<usize, String> {
    let (mut cmp, mut model) = seed.build();
    model.agrees_with(&cmp)?;
    let mut valid = 0;
    for (step, op) in ops.iter().enumerate() {
        let cmd = model.concretize(op);
        let before = cmp.clone();
        let accepted = model.apply(&cmd);
        match (cmp.apply_edit(&cmd), accepted) {
            (Ok(next), true) => {
                cmp = next;
                valid += 1;
            }
            (Err(_), false) => {}
            (got, _) => {
                return Err(format!("step {step}: {cmd:?}: model accepted={accepted}, comparison gave {got:?}"))
            }
        }
        if !accepted && cmp != before {
            return Err(format!("step {step}: rejected edit changed the comparison"));
        }
        model.agrees_with(&cmp).map_err(|e| format!("step {step}: {cmd:?}: {e}"))?;
    }
    let json = serde_json::to_string(&cmp).map_err(|e| e.to_string())?;
    let back: Comparison = serde_json::from_str(&json).map_err(|e| e.to_string())?;
    if back != cmp {
        return Err("comparison does not survive a serde round trip".into());
    }
    Ok(valid)
}

#[derive(Debug, Clone, Copy)]
pub struct Stats {
    pub sequences: u32,
    pub commands: usize,
    pub valid: usize,
}

/// Runs `cases` random sequences of up to `max_len` commands with a fixed seed.
pub fn run(cases: u32, max_len: usize) -> Result<Stats, String> {
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    let mut runner = TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha));
    let stats = std::cell::Cell::new(Stats {
        sequences: 0,
        commands: 0,
        valid: 0,
    });
    let strategy = (seed_strategy(), proptest::collection::vec(op_strategy(), 0..=max_len));
    runner
        .run(&strategy, |(seed, ops)| {
            let valid = replay(&seed, &ops).map_err(TestCaseError::fail)?;
            let mut s = stats.get();
            s.sequences += 1;
            s.commands += ops.len();
            s.valid += valid;
            stats.set(s);
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    Ok(stats.get())
}
