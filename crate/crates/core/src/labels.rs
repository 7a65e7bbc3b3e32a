//! Supervision for explicit interest transfer.
//!
//! Each exposure yields three labels:
//!
//! * `y_t`: target-domain purchase;
//! * `y_s`: aggregated source-domain purchase, the max over all source
//!   domains;
//! * `y_icl`: the interest combination label, which says how much of the
//!   user's source interest should show up in the target domain.
//!
//! | y_t | y_s | y_icl |
//! |-----|-----|-------|
//! | 0   | 0   | 0     |
//! | 1   | 0   | 1     |
//! | 0   | 1   | η     |
//! | 1   | 1   | 2     |
//!
//! η is the item's group consistency interest: the Jaccard overlap between
//! the users who bought the item in the target domain and those who bought it
//! in any source domain.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::datagen::{FeatureRow, InteractionRecord, Vocab};
use crate::{Error, Result};

/// Max over per-domain purchase labels.
pub fn aggregate_source(labels: &[u8]) -> Result<u8> {
    if labels.is_empty() {
        return Err(Error::Contract("aggregate_source over zero source domains".into()));
    }
    if let Some(bad) = labels.iter().find(|&&y| y > 1) {
        return Err(Error::Contract(format!("source label {bad} is not binary")));
    }
    Ok(labels.iter().copied().max().unwrap_or(0))
}

/// Item → group consistency interest η ∈ [0, 1].
#[derive(Clone, Debug, PartialEq)]
pub struct GciMap {
    values: BTreeMap<u32, f64>,
    default_value: f64,
}

impl Default for GciMap {
    fn default() -> Self {
        Self {
            values: BTreeMap::new(),
            default_value: 0.0,
        }
    }
}

impl GciMap {
    pub fn new(default_value: f64) -> Result<Self> {
        check_unit("default_value", default_value)?;
        Ok(Self {
            values: BTreeMap::new(),
            default_value,
        })
    }

    pub fn insert(&mut self, item: u32, eta: f64) -> Result<()> {
        check_unit("eta", eta)?;
        self.values.insert(item, eta);
        Ok(())
    }

    /// η of `item`, or the default for items never seen in training.
    pub fn get(&self, item: u32) -> f64 {
        self.values.get(&item).copied().unwrap_or(self.default_value)
    }

    pub fn default_value(&self) -> f64 {
        self.default_value
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.values.iter().map(|(&k, &v)| (k, v))
    }

    /// Header line with the default, then `item_id,eta` rows with η at six
    /// decimals.
    pub fn to_text(&self) -> String {
        let mut s = format!("default_value,{:.6}\nitem_id,eta\n", self.default_value);
        for (item, eta) in self.iter() {
            let _ = writeln!(s, "{item},{eta:.6}");
        }
        s
    }

    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
        let (n, first) = lines
            .next()
            .ok_or_else(|| Error::parse(origin, 1, "empty GCI file"))?;
        let default_value: f64 = first
            .strip_prefix("default_value,")
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| Error::parse(origin, n, "expected `default_value,<eta>`"))?;
        let mut map = Self::new(default_value).map_err(|e| Error::parse(origin, n, e.to_string()))?;
        for (n, line) in lines {
            if line.is_empty() || line == "item_id,eta" {
                continue;
            }
            let (item, eta) = line
                .split_once(',')
                .ok_or_else(|| Error::parse(origin, n, "expected `item_id,eta`"))?;
            let item: u32 = item
                .parse()
                .map_err(|_| Error::parse(origin, n, format!("bad item id `{item}`")))?;
            let eta: f64 = eta
                .parse()
                .map_err(|_| Error::parse(origin, n, format!("bad eta `{eta}`")))?;
            map.insert(item, eta)
                .map_err(|e| Error::parse(origin, n, e.to_string()))?;
        }
        Ok(map)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }
}

fn check_unit(what: &str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::Contract(format!("{what} = {v} outside [0, 1]")))
    }
}

/// Per-item payer sets. Partial accumulators built over disjoint shards of a
/// log merge by set union into exactly the single-pass result.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct GciAccumulator {
    payers: BTreeMap<u32, (BTreeSet<u32>, BTreeSet<u32>)>,
}

impl GciAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, record: &InteractionRecord) -> Result<()> {
        let y_s = aggregate_source(&record.y_sources)?;
        if record.y_target == 0 && y_s == 0 {
            return Ok(());
        }
        let (target, source) = self.payers.entry(record.item_id()).or_default();
        if record.y_target == 1 {
            target.insert(record.user_id());
        }
        if y_s == 1 {
            source.insert(record.user_id());
        }
        Ok(())
    }

    pub fn merge(&mut self, other: GciAccumulator) {
        for (item, (t, s)) in other.payers {
            let (target, source) = self.payers.entry(item).or_default();
            target.extend(t);
            source.extend(s);
        }
    }

    pub fn finish(self) -> GciMap {
        let mut map = GciMap::default();
        for (item, (target, source)) in self.payers {
            let union = target.union(&source).count();
            if union == 0 {
                continue;
            }
            let inter = target.intersection(&source).count();
            map.values.insert(item, inter as f64 / union as f64);
        }
        map
    }
}

/// Group consistency interest of every item with at least one purchase in
/// `records` (the training split). Items with no payers map to the default 0.
pub fn compute_gci(records: &[InteractionRecord]) -> Result<GciMap> {
    let mut acc = GciAccumulator::new();
    for r in records {
        acc.add(r)?;
    }
    Ok(acc.finish())
}

/// [`compute_gci`] over `shards` independent partitions, merged afterwards.
pub fn compute_gci_sharded(records: &[InteractionRecord], shards: usize) -> Result<GciMap> {
    let chunk = records.len().div_ceil(shards.max(1)).max(1);
    let mut total = GciAccumulator::new();
    for part in records.chunks(chunk) {
        let mut acc = GciAccumulator::new();
        for r in part {
            acc.add(r)?;
        }
        total.merge(acc);
    }
    Ok(total.finish())
}

/// Interest combination label for one exposure.
pub fn build_icl(y_t: u8, y_s: u8, eta: f64) -> Result<f64> {
    check_unit("eta", eta)?;
    match (y_t, y_s) {
        (0, 0) => Ok(0.0),
        (1, 0) => Ok(1.0),
        (0, 1) => Ok(f64::from(y_t) + eta),
        (1, 1) => Ok(2.0),
        _ => Err(Error::Contract(format!("labels ({y_t}, {y_s}) are not binary"))),
    }
}

/// How the combination label is built.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IclMode {
    /// The four-row table above.
    #[default]
    Standard,
    /// η treated as 0: only the user's own labels matter.
    EtaZero,
    /// `y_t + η` for every label pair: group interest alone decides transfer.
    AlwaysEta,
}

impl IclMode {
    pub fn name(self) -> &'static str {
        match self {
            IclMode::Standard => "standard",
            IclMode::EtaZero => "eta_zero",
            IclMode::AlwaysEta => "always_eta",
        }
    }
}

impl std::str::FromStr for IclMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard" => Ok(IclMode::Standard),
            "eta_zero" => Ok(IclMode::EtaZero),
            "always_eta" => Ok(IclMode::AlwaysEta),
            other => Err(Error::Config(format!(
                "unknown ICL mode `{other}` (expected standard, eta_zero or always_eta)"
            ))),
        }
    }
}

pub fn build_icl_variant(mode: IclMode, y_t: u8, y_s: u8, eta: f64) -> Result<f64> {
    match mode {
        IclMode::Standard => build_icl(y_t, y_s, eta),
        IclMode::EtaZero => {
            check_unit("eta", eta)?;
            build_icl(y_t, y_s, 0.0)
        }
        IclMode::AlwaysEta => {
            check_unit("eta", eta)?;
            if y_t > 1 || y_s > 1 {
                return Err(Error::Contract(format!("labels ({y_t}, {y_s}) are not binary")));
            }
            Ok(f64::from(y_t) + eta)
        }
    }
}

/// A training-ready exposure.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledExample {
    pub features: FeatureRow,
    pub y_t: f64,
    pub y_s: f64,
    pub y_icl: f64,
}

pub fn label_record(record: &InteractionRecord, gci: &GciMap, mode: IclMode, vocab: &Vocab) -> Result<LabeledExample> {
    vocab.check(&record.features)?;
    let y_s = aggregate_source(&record.y_sources)?;
    let eta = gci.get(record.item_id());
    Ok(LabeledExample {
        features: record.features,
        y_t: f64::from(record.y_target),
        y_s: f64::from(y_s),
        y_icl: build_icl_variant(mode, record.y_target, y_s, eta)?,
    })
}

pub fn label_dataset(
    records: &[InteractionRecord],
    gci: &GciMap,
    mode: IclMode,
    vocab: &Vocab,
) -> Result<Vec<LabeledExample>> {
    records
        .iter()
        .map(|r| label_record(r, gci, mode, vocab))
        .collect()
}
