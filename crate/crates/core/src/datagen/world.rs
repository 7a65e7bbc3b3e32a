use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::record::{FeatureRow, Field, InteractionRecord, Vocab, NUM_FIELDS};
use crate::{Error, Result};

/// Categories at or below this transferability are the negative-transfer plant.
pub const NEGATIVE_TRANSFER_MAX: f64 = 0.05;
/// Categories at or above this transferability are the positive plant.
pub const POSITIVE_TRANSFER_MIN: f64 = 0.8;

const HOUR_BUCKETS: usize = 4;
const WEEKDAYS_PER_WEEK: u32 = 5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CategorySpec {
    pub name: String,
    pub transferability: f64,
}

impl CategorySpec {
    pub fn new(name: &str, transferability: f64) -> Self {
        Self {
            name: name.to_string(),
            transferability,
        }
    }
}

/// Rates that shape each (segment, category, scene) cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InterestModel {
    /// Probability that a segment is interested in a category at all.
    pub interest_rate: f64,
    /// Number of scene buckets per category where transfer peaks.
    pub peak_scenes_per_category: usize,
    /// Per-source-domain purchase rate for interested, source-active cells.
    pub source_rate: f64,
    /// Added to `source_rate` in peak scenes of positive-plant categories.
    pub peak_source_boost: f64,
    /// Probability that a source purchase carries over, in peak scenes.
    pub transfer_peak: f64,
    /// Same, outside peak scenes.
    pub transfer_offpeak: f64,
    /// Uniform jitter applied per cell to the transfer rate.
    pub transfer_jitter: f64,
    /// Target purchase rate of `shared` cells without a source purchase.
    pub shared_own_rate: f64,
    /// Target purchase rate of `target_only` cells.
    pub target_home_rate: f64,
    /// Target purchase rate of uninterested cells.
    pub background_target_rate: f64,
}

impl Default for InterestModel {
    fn default() -> Self {
        Self {
            interest_rate: 0.6,
            peak_scenes_per_category: 4,
            source_rate: 0.45,
            peak_source_boost: 0.2,
            transfer_peak: 0.9,
            transfer_offpeak: 0.5,
            transfer_jitter: 0.05,
            shared_own_rate: 0.03,
            target_home_rate: 0.25,
            background_target_rate: 0.005,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WorldConfig {
    pub n_users: usize,
    pub n_items: usize,
    pub n_source_domains: usize,
    pub n_hours: usize,
    pub n_weekdays: usize,
    pub n_pages: usize,
    pub n_connections: usize,
    pub n_ages: usize,
    pub n_genders: usize,
    pub n_occupations: usize,
    pub n_cat2_per_cat1: usize,
    pub n_cat3_per_cat2: usize,
    pub n_businesses: usize,
    pub categories: Vec<CategorySpec>,
    /// Total exposures generated before the train/test split.
    pub exposures: usize,
    pub train_fraction: f64,
    pub seed: u64,
    pub interest: InterestModel,
}

impl Default for WorldConfig {
    fn default() -> Self {
        Self {
            n_users: 5000,
            n_items: 500,
            n_source_domains: 2,
            n_hours: 24,
            n_weekdays: 7,
            n_pages: 4,
            n_connections: 3,
            n_ages: 4,
            n_genders: 2,
            n_occupations: 4,
            n_cat2_per_cat1: 3,
            n_cat3_per_cat2: 2,
            n_businesses: 8,
            categories: vec![
                CategorySpec::new("food", 0.95),
                CategorySpec::new("group_deal", 0.85),
                CategorySpec::new("grocery", 0.5),
                CategorySpec::new("in_store", 0.3),
                CategorySpec::new("travel", 0.15),
                CategorySpec::new("medicine", 0.02),
            ],
            exposures: 100_000,
            train_fraction: 0.8,
            seed: 2024,
            interest: InterestModel::default(),
        }
    }
}

impl WorldConfig {
    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("n_users", self.n_users),
            ("n_items", self.n_items),
            ("n_source_domains", self.n_source_domains),
            ("n_hours", self.n_hours),
            ("n_weekdays", self.n_weekdays),
            ("n_pages", self.n_pages),
            ("n_connections", self.n_connections),
            ("n_ages", self.n_ages),
            ("n_genders", self.n_genders),
            ("n_occupations", self.n_occupations),
            ("n_cat2_per_cat1", self.n_cat2_per_cat1),
            ("n_cat3_per_cat2", self.n_cat3_per_cat2),
            ("n_businesses", self.n_businesses),
            ("categories", self.categories.len()),
        ];
        for (name, n) in counts {
            if n == 0 {
                return Err(Error::Config(format!("world.{name} must be positive")));
            }
        }
        for c in &self.categories {
            if !(0.0..=1.0).contains(&c.transferability) {
                return Err(Error::Config(format!(
                    "category `{}`: transferability {} outside [0, 1]",
                    c.name, c.transferability
                )));
            }
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::Config(format!(
                "world.train_fraction {} must lie in (0, 1)",
                self.train_fraction
            )));
        }
        let m = &self.interest;
        let rates = [
            ("interest_rate", m.interest_rate),
            ("source_rate", m.source_rate),
            ("source_rate + peak_source_boost", m.source_rate + m.peak_source_boost),
            ("transfer_peak", m.transfer_peak),
            ("transfer_offpeak", m.transfer_offpeak),
            ("shared_own_rate", m.shared_own_rate),
            ("target_home_rate", m.target_home_rate),
            ("background_target_rate", m.background_target_rate),
        ];
        for (name, r) in rates {
            if !(0.0..=1.0).contains(&r) {
                return Err(Error::Config(format!("world.interest.{name} = {r} outside [0, 1]")));
            }
        }
        if m.peak_source_boost < 0.0 || m.transfer_jitter < 0.0 {
            return Err(Error::Config("world.interest boosts and jitter must be >= 0".into()));
        }
        if m.peak_scenes_per_category > self.n_scenes() {
            return Err(Error::Config(format!(
                "world.interest.peak_scenes_per_category {} exceeds {} scene buckets",
                m.peak_scenes_per_category,
                self.n_scenes()
            )));
        }
        Ok(())
    }

    pub fn n_categories(&self) -> usize {
        self.categories.len()
    }

    pub fn n_segments(&self) -> usize {
        self.n_ages * self.n_genders * self.n_occupations
    }

    pub fn n_scenes(&self) -> usize {
        HOUR_BUCKETS * 2
    }

    pub fn vocab(&self) -> Vocab {
        let n_cat1 = self.n_categories();
        let n_cat2 = n_cat1 * self.n_cat2_per_cat1;
        let mut sizes = [0; NUM_FIELDS];
        for field in Field::ALL {
            sizes[field.index()] = match field {
                Field::UserId => self.n_users,
                Field::ItemId => self.n_items,
                Field::Hour => self.n_hours,
                Field::Weekday => self.n_weekdays,
                Field::Page => self.n_pages,
                Field::Connection => self.n_connections,
                Field::Age => self.n_ages,
                Field::Gender => self.n_genders,
                Field::Occupation => self.n_occupations,
                Field::Cat1 => n_cat1,
                Field::Cat2 => n_cat2,
                Field::Cat3 => n_cat2 * self.n_cat3_per_cat2,
                Field::Business => self.n_businesses,
            };
        }
        Vocab { sizes }
    }

    fn layout(&self) -> SceneLayout {
        SceneLayout {
            n_genders: self.n_genders,
            n_occupations: self.n_occupations,
            n_hours: self.n_hours,
        }
    }
}

/// Maps feature ids onto segment and scene-bucket indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct SceneLayout {
    n_genders: usize,
    n_occupations: usize,
    n_hours: usize,
}

impl SceneLayout {
    fn segment(&self, row: &FeatureRow) -> usize {
        let age = row[Field::Age.index()] as usize;
        let gender = row[Field::Gender.index()] as usize;
        let occupation = row[Field::Occupation.index()] as usize;
        (age * self.n_genders + gender) * self.n_occupations + occupation
    }

    fn scene(&self, row: &FeatureRow) -> usize {
        let hour = row[Field::Hour.index()] as usize;
        let bucket = (hour * HOUR_BUCKETS / self.n_hours).min(HOUR_BUCKETS - 1);
        let workday = usize::from(row[Field::Weekday.index()] < WEEKDAYS_PER_WEEK);
        bucket * 2 + workday
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterestMode {
    None,
    Shared,
    SourceOnly,
    TargetOnly,
}

impl InterestMode {
    fn name(self) -> &'static str {
        match self {
            InterestMode::None => "none",
            InterestMode::Shared => "shared",
            InterestMode::SourceOnly => "source_only",
            InterestMode::TargetOnly => "target_only",
        }
    }

    fn from_name(s: &str) -> Option<Self> {
        [
            InterestMode::None,
            InterestMode::Shared,
            InterestMode::SourceOnly,
            InterestMode::TargetOnly,
        ]
        .into_iter()
        .find(|m| m.name() == s)
    }
}

/// True purchase behavior of one (segment, category, scene) cell.
///
/// Each source domain fires independently with `source_domain_rate`. Given at
/// least one source purchase the target label fires with `transfer_rate`,
/// otherwise with `own_target_rate`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TruthCell {
    pub mode: InterestMode,
    pub source_domain_rate: f64,
    pub transfer_rate: f64,
    pub own_target_rate: f64,
    n_source_domains: usize,
}

impl TruthCell {
    /// Probability that at least one source domain purchases.
    pub fn p_source(&self) -> f64 {
        1.0 - (1.0 - self.source_domain_rate).powi(self.n_source_domains as i32)
    }

    /// Marginal target-domain purchase probability.
    pub fn p_target(&self) -> f64 {
        let s = self.p_source();
        s * self.transfer_rate + (1.0 - s) * self.own_target_rate
    }

    /// Draws `(y_target, y_sources)` for one exposure.
    pub fn sample_labels<R: Rng>(&self, rng: &mut R) -> (u8, Vec<u8>) {
        let sources: Vec<u8> = (0..self.n_source_domains)
            .map(|_| u8::from(rng.gen::<f64>() < self.source_domain_rate))
            .collect();
        let any = sources.contains(&1);
        let p = if any {
            self.transfer_rate
        } else {
            self.own_target_rate
        };
        (u8::from(rng.gen::<f64>() < p), sources)
    }
}

/// The generating interest model, keyed by (segment, category, scene bucket).
#[derive(Clone, Debug, PartialEq)]
pub struct GroundTruth {
    pub categories: Vec<CategorySpec>,
    pub n_segments: usize,
    pub n_scenes: usize,
    pub n_source_domains: usize,
    layout: SceneLayout,
    cells: Vec<TruthCell>,
}

impl GroundTruth {
    pub fn n_categories(&self) -> usize {
        self.categories.len()
    }

    fn index(&self, segment: usize, category: usize, scene: usize) -> usize {
        (segment * self.n_categories() + category) * self.n_scenes + scene
    }

    pub fn cell(&self, segment: usize, category: usize, scene: usize) -> Option<&TruthCell> {
        if segment >= self.n_segments || category >= self.n_categories() || scene >= self.n_scenes {
            return None;
        }
        self.cells.get(self.index(segment, category, scene))
    }

    pub fn segment_of(&self, row: &FeatureRow) -> usize {
        self.layout.segment(row)
    }

    pub fn scene_of(&self, row: &FeatureRow) -> usize {
        self.layout.scene(row)
    }

    /// The cell governing an exposure with these features.
    pub fn cell_for(&self, row: &FeatureRow) -> Result<&TruthCell> {
        let (seg, cat, scene) = (
            self.segment_of(row),
            row[Field::Cat1.index()] as usize,
            self.scene_of(row),
        );
        self.cell(seg, cat, scene).ok_or_else(|| {
            Error::Unsupported(format!(
                "no ground-truth cell for segment {seg}, category {cat}, scene {scene}"
            ))
        })
    }

    pub fn transferability(&self, category: usize) -> f64 {
        self.categories[category].transferability
    }

    pub fn negative_categories(&self) -> Vec<usize> {
        (0..self.n_categories())
            .filter(|&c| self.transferability(c) <= NEGATIVE_TRANSFER_MAX)
            .collect()
    }

    pub fn positive_categories(&self) -> Vec<usize> {
        (0..self.n_categories())
            .filter(|&c| self.transferability(c) >= POSITIVE_TRANSFER_MIN)
            .collect()
    }

    pub fn cells(&self) -> impl Iterator<Item = ((usize, usize, usize), &TruthCell)> {
        let (nc, ns) = (self.n_categories(), self.n_scenes);
        self.cells
            .iter()
            .enumerate()
            .map(move |(i, c)| ((i / (nc * ns), (i / ns) % nc, i % ns), c))
    }

    pub fn to_text(&self) -> String {
        let mut s = String::from("# exit-ground-truth-v1\n");
        let _ = writeln!(s, "n_segments,{}", self.n_segments);
        let _ = writeln!(s, "n_scenes,{}", self.n_scenes);
        let _ = writeln!(s, "n_source_domains,{}", self.n_source_domains);
        let _ = writeln!(s, "n_genders,{}", self.layout.n_genders);
        let _ = writeln!(s, "n_occupations,{}", self.layout.n_occupations);
        let _ = writeln!(s, "n_hours,{}", self.layout.n_hours);
        for (i, c) in self.categories.iter().enumerate() {
            let _ = writeln!(s, "category,{i},{},{}", c.name, c.transferability);
        }
        s.push_str(
            "segment,category,scene,mode,p_target,p_source,source_domain_rate,transfer_rate,own_target_rate\n",
        );
        for ((seg, cat, scene), c) in self.cells() {
            let _ = writeln!(
                s,
                "{seg},{cat},{scene},{},{},{},{},{},{}",
                c.mode.name(),
                c.p_target(),
                c.p_source(),
                c.source_domain_rate,
                c.transfer_rate,
                c.own_target_rate
            );
        }
        s
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        let bad = |line: usize, msg: &str| Error::parse(path, line, msg);
        match lines.next() {
            Some((_, "# exit-ground-truth-v1")) => {}
            Some((n, _)) => return Err(bad(n, "expected `# exit-ground-truth-v1` header")),
            None => return Err(bad(1, "empty ground-truth file")),
        }
        let mut dims = [0usize; 6];
        let keys = [
            "n_segments",
            "n_scenes",
            "n_source_domains",
            "n_genders",
            "n_occupations",
            "n_hours",
        ];
        for (slot, key) in dims.iter_mut().zip(keys) {
            let (n, line) = lines.next().ok_or_else(|| bad(0, "truncated header"))?;
            let value = line
                .strip_prefix(key)
                .and_then(|r| r.strip_prefix(','))
                .ok_or_else(|| bad(n, &format!("expected `{key},<n>`")))?;
            *slot = value.parse().map_err(|_| bad(n, &format!("bad {key}")))?;
        }
        let [n_segments, n_scenes, n_source_domains, n_genders, n_occupations, n_hours] = dims;
        let mut categories = Vec::new();
        let mut cells = Vec::new();
        for (n, line) in lines {
            let cols: Vec<&str> = line.split(',').collect();
            if cols[0] == "category" {
                if cols.len() != 4 || cols[1].parse::<usize>() != Ok(categories.len()) {
                    return Err(bad(n, "malformed category line"));
                }
                let tau: f64 = cols[3].parse().map_err(|_| bad(n, "bad transferability"))?;
                categories.push(CategorySpec::new(cols[2], tau));
                continue;
            }
            if cols[0] == "segment" {
                continue;
            }
            if cols.len() != 9 {
                return Err(bad(n, "expected 9 columns in cell line"));
            }
            let num = |i: usize| -> Result<f64> {
                cols[i]
                    .parse::<f64>()
                    .map_err(|_| bad(n, &format!("bad number `{}`", cols[i])))
            };
            let mode = InterestMode::from_name(cols[3]).ok_or_else(|| bad(n, "unknown mode"))?;
            let expected_index = cells.len();
            let cell = TruthCell {
                mode,
                source_domain_rate: num(6)?,
                transfer_rate: num(7)?,
                own_target_rate: num(8)?,
                n_source_domains,
            };
            let key: Vec<usize> = cols[..3]
                .iter()
                .map(|c| c.parse().map_err(|_| bad(n, "bad cell key")))
                .collect::<Result<_>>()?;
            let n_cat = categories.len();
            if n_cat == 0 || (key[0] * n_cat + key[1]) * n_scenes + key[2] != expected_index {
                return Err(bad(n, "cells out of order"));
            }
            cells.push(cell);
        }
        if cells.len() != n_segments * categories.len() * n_scenes {
            return Err(bad(0, "cell count does not match dimensions"));
        }
        Ok(Self {
            categories,
            n_segments,
            n_scenes,
            n_source_domains,
            layout: SceneLayout {
                n_genders,
                n_occupations,
                n_hours,
            },
            cells,
        })
    }
}

fn build_truth<R: Rng>(cfg: &WorldConfig, rng: &mut R) -> GroundTruth {
    let m = &cfg.interest;
    let n_scenes = cfg.n_scenes();
    let peaks: Vec<Vec<bool>> = cfg
        .categories
        .iter()
        .map(|_| {
            let mut order: Vec<usize> = (0..n_scenes).collect();
            order.shuffle(rng);
            let mut is_peak = vec![false; n_scenes];
            for &s in &order[..m.peak_scenes_per_category] {
                is_peak[s] = true;
            }
            is_peak
        })
        .collect();

    let mut cells = Vec::with_capacity(cfg.n_segments() * cfg.n_categories() * n_scenes);
    for _segment in 0..cfg.n_segments() {
        for (c, category) in cfg.categories.iter().enumerate() {
            let mode = if rng.gen::<f64>() >= m.interest_rate {
                InterestMode::None
            } else if rng.gen::<f64>() < category.transferability {
                InterestMode::Shared
            } else if rng.gen::<bool>() {
                InterestMode::SourceOnly
            } else {
                InterestMode::TargetOnly
            };
            let positive = category.transferability >= POSITIVE_TRANSFER_MIN;
            for &peak in &peaks[c] {
                let jitter = rng.gen_range(-1.0..=1.0) * m.transfer_jitter;
                let source = if peak && positive {
                    m.source_rate + m.peak_source_boost
                } else {
                    m.source_rate
                };
                let transfer = if peak {
                    m.transfer_peak
                } else {
                    m.transfer_offpeak
                };
                let (source_domain_rate, transfer_rate, own_target_rate) = match mode {
                    InterestMode::None => (0.0, 0.0, m.background_target_rate),
                    InterestMode::Shared => {
                        (source, (transfer + jitter).clamp(0.0, 1.0), m.shared_own_rate)
                    }
                    InterestMode::SourceOnly => (source, 0.0, 0.0),
                    InterestMode::TargetOnly => (0.0, 0.0, m.target_home_rate),
                };
                cells.push(TruthCell {
                    mode,
                    source_domain_rate,
                    transfer_rate,
                    own_target_rate,
                    n_source_domains: cfg.n_source_domains,
                });
            }
        }
    }
    GroundTruth {
        categories: cfg.categories.clone(),
        n_segments: cfg.n_segments(),
        n_scenes,
        n_source_domains: cfg.n_source_domains,
        layout: cfg.layout(),
        cells,
    }
}

/// Generates the exposure log and the interest model that produced it.
/// Deterministic in `cfg.seed`.
pub fn generate(cfg: &WorldConfig) -> Result<(Vec<InteractionRecord>, GroundTruth)> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let truth = build_truth(cfg, &mut rng);

    let users: Vec<[u32; 3]> = (0..cfg.n_users)
        .map(|_| {
            [
                rng.gen_range(0..cfg.n_ages) as u32,
                rng.gen_range(0..cfg.n_genders) as u32,
                rng.gen_range(0..cfg.n_occupations) as u32,
            ]
        })
        .collect();
    let items: Vec<[u32; 4]> = (0..cfg.n_items)
        .map(|_| {
            let cat1 = rng.gen_range(0..cfg.n_categories());
            let cat2 = cat1 * cfg.n_cat2_per_cat1 + rng.gen_range(0..cfg.n_cat2_per_cat1);
            let cat3 = cat2 * cfg.n_cat3_per_cat2 + rng.gen_range(0..cfg.n_cat3_per_cat2);
            let business = rng.gen_range(0..cfg.n_businesses);
            [cat1 as u32, cat2 as u32, cat3 as u32, business as u32]
        })
        .collect();

    let mut records = Vec::with_capacity(cfg.exposures);
    for _ in 0..cfg.exposures {
        let user = rng.gen_range(0..cfg.n_users);
        let item = rng.gen_range(0..cfg.n_items);
        let [age, gender, occupation] = users[user];
        let [cat1, cat2, cat3, business] = items[item];
        let mut features = [0u32; NUM_FIELDS];
        features[Field::UserId.index()] = user as u32;
        features[Field::ItemId.index()] = item as u32;
        features[Field::Hour.index()] = rng.gen_range(0..cfg.n_hours) as u32;
        features[Field::Weekday.index()] = rng.gen_range(0..cfg.n_weekdays) as u32;
        features[Field::Page.index()] = rng.gen_range(0..cfg.n_pages) as u32;
        features[Field::Connection.index()] = rng.gen_range(0..cfg.n_connections) as u32;
        features[Field::Age.index()] = age;
        features[Field::Gender.index()] = gender;
        features[Field::Occupation.index()] = occupation;
        features[Field::Cat1.index()] = cat1;
        features[Field::Cat2.index()] = cat2;
        features[Field::Cat3.index()] = cat3;
        features[Field::Business.index()] = business;
        let cell = truth.cell_for(&features)?;
        let (y_target, y_sources) = cell.sample_labels(&mut rng);
        records.push(InteractionRecord {
            features,
            y_target,
            y_sources,
        });
    }
    Ok((records, truth))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> WorldConfig {
        WorldConfig {
            n_users: 60,
            n_items: 40,
            exposures: 3000,
            ..WorldConfig::default()
        }
    }

    #[test]
    fn deterministic_in_seed() {
        let (a, ta) = generate(&small()).unwrap();
        let (b, tb) = generate(&small()).unwrap();
        assert_eq!(a, b);
        assert_eq!(ta, tb);
        let other = WorldConfig {
            seed: 99,
            ..small()
        };
        assert_ne!(generate(&other).unwrap().0, a);
    }

    #[test]
    fn ids_within_vocab_and_labels_binary() {
        let cfg = small();
        let vocab = cfg.vocab();
        let (records, _) = generate(&cfg).unwrap();
        for r in &records {
            vocab.check(&r.features).unwrap();
            assert!(r.y_target <= 1);
            assert_eq!(r.y_sources.len(), cfg.n_source_domains);
            assert!(r.y_sources.iter().all(|&y| y <= 1));
        }
    }

    #[test]
    fn zero_rates_give_zero_labels() {
        let cfg = WorldConfig {
            interest: InterestModel {
                interest_rate: 0.0,
                background_target_rate: 0.0,
                ..InterestModel::default()
            },
            ..small()
        };
        let (records, _) = generate(&cfg).unwrap();
        assert!(records
            .iter()
            .all(|r| r.y_target == 0 && r.y_sources.iter().all(|&y| y == 0)));
    }

    #[test]
    fn default_world_plants_both_transfer_extremes() {
        let cfg = WorldConfig::default();
        let (_, truth) = build_truth_only(&cfg);
        assert!(!truth.negative_categories().is_empty());
        assert!(!truth.positive_categories().is_empty());
    }

    fn build_truth_only(cfg: &WorldConfig) -> ((), GroundTruth) {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        ((), build_truth(cfg, &mut rng))
    }

    #[test]
    fn invalid_configs_rejected() {
        let mut cfg = small();
        cfg.n_source_domains = 0;
        assert!(matches!(generate(&cfg), Err(Error::Config(_))));
        let mut cfg = small();
        cfg.categories[0].transferability = 1.5;
        assert!(matches!(generate(&cfg), Err(Error::Config(_))));
        let mut cfg = small();
        cfg.train_fraction = 1.0;
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn ground_truth_text_round_trip() {
        let (_, truth) = generate(&small()).unwrap();
        let parsed = GroundTruth::parse(&truth.to_text(), Path::new("gt.txt")).unwrap();
        assert_eq!(parsed, truth);
    }

    #[test]
    fn shared_probabilities_are_consistent() {
        let (_, truth) = generate(&small()).unwrap();
        for (_, c) in truth.cells() {
            let (pt, ps) = (c.p_target(), c.p_source());
            assert!((0.0..=1.0).contains(&pt) && (0.0..=1.0).contains(&ps));
            match c.mode {
                InterestMode::SourceOnly => assert_eq!(pt, 0.0),
                InterestMode::TargetOnly | InterestMode::None => assert_eq!(ps, 0.0),
                InterestMode::Shared => assert!(ps > 0.0),
            }
        }
    }
}
