//! The interest prediction network, the scene selector and their explicit
//! combination.
//!
//! ```text
//!  feature ids ──► embeddings ──► V = [E^U ‖ E^M ‖ E^C]
//!                                   │
//!          ┌────────────────────────┼──────────────────────────┐
//!          ▼                        ▼                          ▼
//!    shared experts ──► gate_t ─► target tower ─► P_target     E^hid = FC(V)
//!          │          └ gate_s ─► source tower ─► P_source     │
//!          │                                                   ▼
//!          │                  scene embeddings E^scene ─► MLP([E^hid ‖ E^scene])
//!          │                                                   ▼
//!          │                                          P_trans = σ(FC(H))
//!          ▼
//!   P_whole = P_target + P_source · P_trans,  served as min(1, P_whole)
//! ```
//!
//! With stop-gradient on, `P_target` and `P_source` enter the combination as
//! constants and the selector reads the shared embeddings as constants, so the
//! combination-label loss only trains the scene selector and the embedding
//! tables nothing else reads.

use std::collections::BTreeMap;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::datagen::{FeatureRow, Field, FieldGroup, Vocab};
use crate::tensor::{
    embedding_uniform, xavier_uniform, ParamId, ParamStore, Tape, Tensor, Var, PRELU_INIT_SLOPE,
};
use crate::{Error, Result};

pub const CHECKPOINT_HEADER: &str = "exit-model-v1";

/// What the scene selector sees, if it exists at all.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SsnMode {
    /// Compressed embedding plus scene-feature embeddings.
    #[default]
    Scene,
    /// Compressed embedding only.
    HiddenOnly,
    /// No selector: `P_trans ≡ 1`.
    Off,
}

/// Which quantity is served as the ranking score.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ServingScore {
    /// `min(1, P_whole)`.
    #[default]
    Whole,
    /// `P_target` alone.
    TargetOnly,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelConfig {
    pub embedding_dim: usize,
    /// Fields embedded into V, grouped user ‖ item ‖ context in this order.
    pub ipn_fields: Vec<Field>,
    /// Fields whose embeddings form E^scene, in this order.
    pub scene_fields: Vec<Field>,
    pub n_experts: usize,
    pub expert_hidden: Vec<usize>,
    pub tower_hidden: Vec<usize>,
    /// Width of E^hid.
    pub ssn_compressed_width: usize,
    pub ssn_hidden: Vec<usize>,
    pub ssn: SsnMode,
    pub serving_score: ServingScore,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            embedding_dim: 8,
            ipn_fields: vec![
                Field::UserId,
                Field::ItemId,
                Field::Hour,
                Field::Weekday,
                Field::Page,
                Field::Connection,
            ],
            scene_fields: vec![
                Field::Gender,
                Field::Occupation,
                Field::Age,
                Field::Cat1,
                Field::Cat2,
                Field::Cat3,
                Field::Business,
                Field::Hour,
                Field::Weekday,
                Field::Page,
                Field::Connection,
            ],
            n_experts: 2,
            expert_hidden: vec![64, 32],
            tower_hidden: vec![64, 32],
            ssn_compressed_width: 32,
            ssn_hidden: vec![64],
            ssn: SsnMode::Scene,
            serving_score: ServingScore::Whole,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        if self.embedding_dim == 0 {
            return Err(Error::Config("model.embedding_dim must be >= 1".into()));
        }
        if self.n_experts == 0 {
            return Err(Error::Config("model.n_experts must be >= 1".into()));
        }
        if self.ipn_fields.is_empty() {
            return Err(Error::Config("model.ipn_fields must not be empty".into()));
        }
        if self.ssn == SsnMode::Scene && self.scene_fields.is_empty() {
            return Err(Error::Config("model.scene_fields must not be empty".into()));
        }
        for (name, list) in [("ipn_fields", &self.ipn_fields), ("scene_fields", &self.scene_fields)] {
            let mut seen = std::collections::BTreeSet::new();
            if let Some(dup) = list.iter().find(|f| !seen.insert(**f)) {
                return Err(Error::Config(format!("model.{name} lists `{}` twice", dup.name())));
            }
        }
        let widths = self
            .expert_hidden
            .iter()
            .chain(&self.tower_hidden)
            .chain(&self.ssn_hidden)
            .chain(std::iter::once(&self.ssn_compressed_width));
        if self.expert_hidden.is_empty() || widths.into_iter().any(|&w| w == 0) {
            return Err(Error::Config("model layer widths must be positive".into()));
        }
        Ok(())
    }

    /// IPN fields in V order: user group, then item, then context, each in
    /// declared order.
    pub fn v_layout(&self) -> Vec<Field> {
        [FieldGroup::User, FieldGroup::Item, FieldGroup::Context]
            .into_iter()
            .flat_map(|g| self.ipn_fields.iter().copied().filter(move |f| f.group() == g))
            .collect()
    }

    pub fn v_width(&self) -> usize {
        self.ipn_fields.len() * self.embedding_dim
    }

    fn embedded_fields(&self) -> Vec<Field> {
        let mut fields: Vec<Field> = self.v_layout();
        if self.ssn == SsnMode::Scene {
            for f in &self.scene_fields {
                if !fields.contains(f) {
                    fields.push(*f);
                }
            }
        }
        fields
    }
}

#[derive(Clone, Copy, Debug)]
struct Dense {
    weight: ParamId,
    bias: ParamId,
    slope: Option<ParamId>,
}

#[derive(Clone, Debug)]
struct Layout {
    embeddings: BTreeMap<Field, ParamId>,
    experts: Vec<Vec<Dense>>,
    gates: [Dense; 2],
    towers: [Vec<Dense>; 2],
    ssn_compress: Option<Dense>,
    ssn_mlp: Vec<Dense>,
    ssn_out: Option<Dense>,
}

const TASKS: [&str; 2] = ["target", "source"];

/// Parameters bound onto a tape for one forward pass, indexed by [`ParamId`].
#[derive(Clone, Debug)]
pub struct Bound {
    vars: Vec<Var>,
}

impl Bound {
    pub fn var(&self, id: ParamId) -> Var {
        self.vars[id.index()]
    }

    pub fn vars(&self) -> &[Var] {
        &self.vars
    }
}

/// Grouped field embeddings and the IPN input V.
#[derive(Clone, Debug)]
pub struct Embedded {
    pub fields: BTreeMap<Field, Var>,
    pub e_user: Option<Var>,
    pub e_item: Option<Var>,
    pub e_context: Option<Var>,
    pub v: Var,
}

#[derive(Clone, Debug)]
pub struct IpnOutput {
    pub experts: Vec<Var>,
    pub gates: [Var; 2],
    pub mixtures: [Var; 2],
    pub p_target: Var,
    pub p_source: Var,
}

#[derive(Clone, Debug)]
pub struct SsnOutput {
    pub e_hid: Option<Var>,
    pub e_scene: Option<Var>,
    pub h_ssn: Option<Var>,
    pub p_trans: Var,
}

/// Every intermediate of one forward pass.
#[derive(Clone, Debug)]
pub struct ForwardState {
    pub embedded: Embedded,
    pub ipn: IpnOutput,
    pub ssn: SsnOutput,
    /// `P_target + P_source · P_trans`, with the stop-gradient contract applied.
    pub p_whole: Var,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Prediction {
    pub p_target: f64,
    pub p_source: f64,
    pub p_trans: f64,
    pub p_whole: f64,
    pub p_whole_clamped: f64,
}

impl Prediction {
    pub fn new(p_target: f64, p_source: f64, p_trans: f64) -> Result<Self> {
        let p_whole = combine_values(p_target, p_source, p_trans);
        Ok(Self {
            p_target,
            p_source,
            p_trans,
            p_whole,
            p_whole_clamped: clamp_serving(p_whole)?,
        })
    }

    pub fn serving(&self, score: ServingScore) -> f64 {
        match score {
            ServingScore::Whole => self.p_whole_clamped,
            ServingScore::TargetOnly => self.p_target,
        }
    }
}

/// `P_target + P_source · P_trans`.
pub fn combine_values(p_target: f64, p_source: f64, p_trans: f64) -> f64 {
    p_target + p_source * p_trans
}

/// `min(1, P_whole)`; idempotent.
pub fn clamp_serving(p_whole: f64) -> Result<f64> {
    if !(p_whole >= 0.0) {
        return Err(Error::Contract(format!("serving score {p_whole} is negative")));
    }
    Ok(p_whole.min(1.0))
}

/// Explicit combination on the tape. With `stop_gradient`, the two interest
/// terms are detached so only `p_trans` receives gradient.
pub fn combine(tape: &mut Tape, p_target: Var, p_source: Var, p_trans: Var, stop_gradient: bool) -> Result<Var> {
    let (pt, ps) = if stop_gradient {
        (tape.stop_gradient(p_target), tape.stop_gradient(p_source))
    } else {
        (p_target, p_source)
    };
    let transferred = tape.mul(ps, p_trans)?;
    tape.add(pt, transferred)
}

#[derive(Clone, Debug)]
pub struct Model {
    config: ModelConfig,
    vocab: Vocab,
    params: ParamStore,
    layout: Layout,
}

struct Builder<'a> {
    params: &'a mut ParamStore,
    rng: &'a mut ChaCha8Rng,
}

impl Builder<'_> {
    fn dense(&mut self, name: &str, fan_in: usize, fan_out: usize, activation: bool) -> Result<Dense> {
        let weight = self
            .params
            .insert(format!("{name}.w"), xavier_uniform(fan_in, fan_out, self.rng))?;
        let bias = self
            .params
            .insert(format!("{name}.b"), Tensor::zeros(&[fan_out]))?;
        let slope = if activation {
            Some(
                self.params
                    .insert(format!("{name}.slope"), Tensor::full(&[fan_out], PRELU_INIT_SLOPE))?,
            )
        } else {
            None
        };
        Ok(Dense { weight, bias, slope })
    }

    fn mlp(&mut self, name: &str, input: usize, widths: &[usize]) -> Result<Vec<Dense>> {
        let mut layers = Vec::with_capacity(widths.len());
        let mut fan_in = input;
        for (j, &w) in widths.iter().enumerate() {
            layers.push(self.dense(&format!("{name}.l{j}"), fan_in, w, true)?);
            fan_in = w;
        }
        Ok(layers)
    }
}

impl Model {
    /// Fresh parameters: Glorot-uniform weights, zero biases, embeddings
    /// uniform in ±0.01, PReLU slopes 0.25.
    pub fn new(config: ModelConfig, vocab: Vocab, seed: u64) -> Result<Self> {
        config.validate()?;
        // separate streams keep the IPN initialization independent of the
        // selector's shape
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut ssn_rng = ChaCha8Rng::seed_from_u64(seed ^ 0x55a1_ec70);
        let mut params = ParamStore::new();
        let dim = config.embedding_dim;
        let mut embeddings = BTreeMap::new();
        for field in config.embedded_fields() {
            let stream = if config.ipn_fields.contains(&field) {
                &mut rng
            } else {
                &mut ssn_rng
            };
            let table = embedding_uniform(vocab.size(field), dim, stream);
            embeddings.insert(field, params.insert(format!("emb.{}", field.name()), table)?);
        }
        let mut b = Builder {
            params: &mut params,
            rng: &mut rng,
        };
        let v_width = config.v_width();
        let experts = (0..config.n_experts)
            .map(|k| b.mlp(&format!("expert.{k}"), v_width, &config.expert_hidden))
            .collect::<Result<Vec<_>>>()?;
        let expert_out = *config.expert_hidden.last().expect("validated non-empty");
        let gates = [
            b.dense("gate.target", v_width, config.n_experts, false)?,
            b.dense("gate.source", v_width, config.n_experts, false)?,
        ];
        let mut towers: [Vec<Dense>; 2] = Default::default();
        for (t, task) in TASKS.iter().enumerate() {
            let mut layers = b.mlp(&format!("tower.{task}"), expert_out, &config.tower_hidden)?;
            let last = config.tower_hidden.last().copied().unwrap_or(expert_out);
            layers.push(b.dense(&format!("tower.{task}.out"), last, 1, false)?);
            towers[t] = layers;
        }
        let mut b = Builder {
            params: &mut params,
            rng: &mut ssn_rng,
        };
        let (ssn_compress, ssn_mlp, ssn_out) = if config.ssn == SsnMode::Off {
            (None, Vec::new(), None)
        } else {
            let hid = config.ssn_compressed_width;
            let compress = b.dense("ssn.compress", v_width, hid, false)?;
            let scene_width = if config.ssn == SsnMode::Scene {
                config.scene_fields.len() * dim
            } else {
                0
            };
            let mlp = b.mlp("ssn.mlp", hid + scene_width, &config.ssn_hidden)?;
            let last = config.ssn_hidden.last().copied().unwrap_or(hid + scene_width);
            let out = b.dense("ssn.out", last, 1, false)?;
            (Some(compress), mlp, Some(out))
        };
        let layout = Layout {
            embeddings,
            experts,
            gates,
            towers,
            ssn_compress,
            ssn_mlp,
            ssn_out,
        };
        Ok(Self {
            config,
            vocab,
            params,
            layout,
        })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn vocab(&self) -> &Vocab {
        &self.vocab
    }

    pub fn params(&self) -> &ParamStore {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut ParamStore {
        &mut self.params
    }

    /// Ids of every IPN parameter (experts, gates, towers).
    pub fn ipn_param_ids(&self) -> Vec<ParamId> {
        self.params_with_prefix(&["expert.", "gate.", "tower."])
    }

    /// Embedding tables read by the IPN.
    pub fn ipn_embedding_ids(&self) -> Vec<ParamId> {
        self.config
            .ipn_fields
            .iter()
            .map(|f| self.layout.embeddings[f])
            .collect()
    }

    /// Ids of every scene-selector parameter.
    pub fn ssn_param_ids(&self) -> Vec<ParamId> {
        self.params_with_prefix(&["ssn."])
    }

    fn params_with_prefix(&self, prefixes: &[&str]) -> Vec<ParamId> {
        self.params
            .iter()
            .filter(|(_, name, _)| prefixes.iter().any(|p| name.starts_with(p)))
            .map(|(id, _, _)| id)
            .collect()
    }

    /// Puts every parameter on the tape, trainable or constant.
    pub fn bind(&self, tape: &mut Tape, trainable: bool) -> Bound {
        let vars = self
            .params
            .tensors()
            .iter()
            .map(|t| {
                if trainable {
                    tape.param(t.clone())
                } else {
                    tape.constant(t.clone())
                }
            })
            .collect();
        Bound { vars }
    }

    fn dense(&self, tape: &mut Tape, bound: &Bound, layer: &Dense, input: Var) -> Result<Var> {
        let out = tape.affine(input, bound.var(layer.weight), bound.var(layer.bias))?;
        match layer.slope {
            Some(s) => tape.prelu(out, bound.var(s)),
            None => Ok(out),
        }
    }

    fn run_layers(&self, tape: &mut Tape, bound: &Bound, layers: &[Dense], input: Var) -> Result<Var> {
        layers
            .iter()
            .try_fold(input, |x, layer| self.dense(tape, bound, layer, x))
    }

    pub fn embed(&self, tape: &mut Tape, bound: &Bound, rows: &[FeatureRow]) -> Result<Embedded> {
        let mut fields = BTreeMap::new();
        for (&field, &table) in &self.layout.embeddings {
            let size = self.vocab.size(field);
            let ids = rows
                .iter()
                .map(|r| {
                    let id = r[field.index()] as usize;
                    if id >= size {
                        Err(Error::Index {
                            what: format!("{} vocabulary", field.name()),
                            index: id,
                            len: size,
                        })
                    } else {
                        Ok(id)
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            fields.insert(field, tape.embedding_lookup(bound.var(table), &ids)?);
        }
        let group = |g: FieldGroup, tape: &mut Tape| -> Result<Option<Var>> {
            let parts: Vec<Var> = self
                .config
                .ipn_fields
                .iter()
                .filter(|f| f.group() == g)
                .map(|f| fields[f])
                .collect();
            match parts.len() {
                0 => Ok(None),
                1 => Ok(Some(parts[0])),
                _ => tape.concat(&parts).map(Some),
            }
        };
        let e_user = group(FieldGroup::User, tape)?;
        let e_item = group(FieldGroup::Item, tape)?;
        let e_context = group(FieldGroup::Context, tape)?;
        let groups: Vec<Var> = [e_user, e_item, e_context].into_iter().flatten().collect();
        let v = if groups.len() == 1 {
            groups[0]
        } else {
            tape.concat(&groups)?
        };
        Ok(Embedded {
            fields,
            e_user,
            e_item,
            e_context,
            v,
        })
    }

    pub fn ipn_forward(&self, tape: &mut Tape, bound: &Bound, v: Var) -> Result<IpnOutput> {
        let experts = self
            .layout
            .experts
            .iter()
            .map(|layers| self.run_layers(tape, bound, layers, v))
            .collect::<Result<Vec<_>>>()?;
        let mut gates = [v; 2];
        let mut mixtures = [v; 2];
        let mut probs = [v; 2];
        for t in 0..2 {
            let logits = self.dense(tape, bound, &self.layout.gates[t], v)?;
            gates[t] = tape.softmax(logits)?;
            mixtures[t] = tape.gate_mix(gates[t], &experts)?;
            let logit = self.run_layers(tape, bound, &self.layout.towers[t], mixtures[t])?;
            probs[t] = tape.sigmoid(logit)?;
        }
        Ok(IpnOutput {
            experts,
            gates,
            mixtures,
            p_target: probs[0],
            p_source: probs[1],
        })
    }

    /// With `detach_shared`, V and every scene embedding whose table the IPN
    /// also reads enter the selector as constants, so selector losses reach
    /// only selector-owned parameters.
    pub fn ssn_forward(
        &self,
        tape: &mut Tape,
        bound: &Bound,
        embedded: &Embedded,
        batch: usize,
        detach_shared: bool,
    ) -> Result<SsnOutput> {
        let (Some(compress), Some(out)) = (&self.layout.ssn_compress, &self.layout.ssn_out) else {
            let ones = tape.constant(Tensor::full(&[batch, 1], 1.0));
            return Ok(SsnOutput {
                e_hid: None,
                e_scene: None,
                h_ssn: None,
                p_trans: ones,
            });
        };
        let v = if detach_shared {
            tape.stop_gradient(embedded.v)
        } else {
            embedded.v
        };
        let e_hid = self.dense(tape, bound, compress, v)?;
        let (e_scene, mlp_in) = if self.config.ssn == SsnMode::Scene {
            let parts: Vec<Var> = self
                .config
                .scene_fields
                .iter()
                .map(|f| {
                    let e = embedded.fields[f];
                    if detach_shared && self.config.ipn_fields.contains(f) {
                        tape.stop_gradient(e)
                    } else {
                        e
                    }
                })
                .collect();
            let e_scene = tape.concat(&parts)?;
            (Some(e_scene), tape.concat(&[e_hid, e_scene])?)
        } else {
            (None, e_hid)
        };
        let h_ssn = self.run_layers(tape, bound, &self.layout.ssn_mlp, mlp_in)?;
        let logit = self.dense(tape, bound, out, h_ssn)?;
        Ok(SsnOutput {
            e_hid: Some(e_hid),
            e_scene,
            h_ssn: Some(h_ssn),
            p_trans: tape.sigmoid(logit)?,
        })
    }

    pub fn forward(&self, tape: &mut Tape, bound: &Bound, rows: &[FeatureRow], stop_gradient: bool) -> Result<ForwardState> {
        let embedded = self.embed(tape, bound, rows)?;
        let ipn = self.ipn_forward(tape, bound, embedded.v)?;
        let ssn = self.ssn_forward(tape, bound, &embedded, rows.len(), stop_gradient)?;
        let p_whole = combine(tape, ipn.p_target, ipn.p_source, ssn.p_trans, stop_gradient)?;
        Ok(ForwardState {
            embedded,
            ipn,
            ssn,
            p_whole,
        })
    }

    /// Inference without gradients, in chunks.
    pub fn predict(&self, rows: &[FeatureRow]) -> Result<Vec<Prediction>> {
        const CHUNK: usize = 2048;
        let mut out = Vec::with_capacity(rows.len());
        for chunk in rows.chunks(CHUNK) {
            let mut tape = Tape::new();
            let bound = self.bind(&mut tape, false);
            let state = self.forward(&mut tape, &bound, chunk, true)?;
            let pt = tape.value(state.ipn.p_target).data();
            let ps = tape.value(state.ipn.p_source).data();
            let ptr = tape.value(state.ssn.p_trans).data();
            for i in 0..chunk.len() {
                out.push(Prediction::new(pt[i], ps[i], ptr[i])?);
            }
        }
        Ok(out)
    }

    /// Serving scores under the configured [`ServingScore`].
    pub fn score(&self, rows: &[FeatureRow]) -> Result<Vec<f64>> {
        let mode = self.config.serving_score;
        Ok(self.predict(rows)?.iter().map(|p| p.serving(mode)).collect())
    }

    pub fn write_checkpoint<W: std::io::Write>(&self, mut out: W) -> Result<()> {
        let doc = CheckpointDoc {
            config: self.config.clone(),
            vocab: self.vocab.sizes.to_vec(),
            params: self
                .params
                .iter()
                .map(|(_, name, t)| NamedTensor {
                    name: name.to_string(),
                    shape: t.shape().to_vec(),
                    values: t.data().to_vec(),
                })
                .collect(),
        };
        let body = serde_json::to_string(&doc)
            .map_err(|e| Error::Contract(format!("checkpoint serialization: {e}")))?;
        writeln!(out, "{CHECKPOINT_HEADER}").and_then(|_| writeln!(out, "{body}"))
            .map_err(|e| Error::io("<checkpoint>", e))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::new();
        self.write_checkpoint(&mut buf)?;
        std::fs::write(path, buf).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_checkpoint_text(&text, path)
    }

    pub fn from_checkpoint_text(text: &str, origin: &Path) -> Result<Self> {
        let (header, body) = text.split_once('\n').unwrap_or((text, ""));
        if header.trim() != CHECKPOINT_HEADER {
            return Err(Error::parse(origin, 1, format!("expected `{CHECKPOINT_HEADER}` header")));
        }
        let doc: CheckpointDoc =
            serde_json::from_str(body).map_err(|e| Error::parse(origin, 2, e.to_string()))?;
        let sizes: [usize; crate::datagen::NUM_FIELDS] = doc
            .vocab
            .try_into()
            .map_err(|_| Error::parse(origin, 2, "vocab has wrong field count"))?;
        let mut model = Self::new(doc.config, Vocab { sizes }, 0)?;
        if doc.params.len() != model.params.len() {
            return Err(Error::parse(
                origin,
                2,
                format!("{} tensors, architecture needs {}", doc.params.len(), model.params.len()),
            ));
        }
        for nt in doc.params {
            let id = model
                .params
                .id(&nt.name)
                .ok_or_else(|| Error::parse(origin, 2, format!("unexpected tensor `{}`", nt.name)))?;
            let t = Tensor::new(nt.shape, nt.values).map_err(|e| Error::parse(origin, 2, e.to_string()))?;
            model
                .params
                .set(id, t)
                .map_err(|e| Error::parse(origin, 2, e.to_string()))?;
        }
        Ok(model)
    }
}

#[derive(Serialize, Deserialize)]
struct NamedTensor {
    name: String,
    shape: Vec<usize>,
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct CheckpointDoc {
    config: ModelConfig,
    vocab: Vec<usize>,
    params: Vec<NamedTensor>,
}
