//! Reverse-mode gradient tape.
//!
//! Ops are recorded in execution order into an arena of nodes; [`Tape::backward`]
//! walks the arena from the root back to index 0, so ops are always visited in
//! exact reverse execution order. Each op computes its forward value eagerly and
//! keeps just enough of its inputs to produce the vector-Jacobian product.
//!
//! Gradients accumulate across calls to `backward` until [`Tape::zero_grad`],
//! mirroring the usual `loss.backward(); loss2.backward()` semantics.

use super::Tensor;
use crate::{Error, Result};

/// Probabilities are clipped into `[PROB_CLIP_EPS, 1 - PROB_CLIP_EPS]` before
/// any logarithm.
pub const PROB_CLIP_EPS: f64 = 1e-7;

/// Handle to a node on a [`Tape`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug)]
enum Op {
    Leaf,
    Affine { input: Var, weight: Var, bias: Var },
    Concat { parts: Vec<Var> },
    SliceCols { input: Var, start: usize },
    Prelu { input: Var, slope: Var },
    Sigmoid { input: Var },
    Softmax { input: Var },
    Gather { table: Var, ids: Vec<usize> },
    GateMix { gate: Var, experts: Vec<Var> },
    Add { a: Var, b: Var },
    Mul { a: Var, b: Var },
    StopGradient,
    CrossEntropy { pred: Var, labels: Vec<f64> },
    L1 { pred: Var, target: Vec<f64> },
    WeightedSum { terms: Vec<(Var, f64)> },
}

impl Op {
    fn name(&self) -> &'static str {
        match self {
            Op::Leaf => "leaf",
            Op::Affine { .. } => "affine",
            Op::Concat { .. } => "concat",
            Op::SliceCols { .. } => "slice_cols",
            Op::Prelu { .. } => "prelu",
            Op::Sigmoid { .. } => "sigmoid",
            Op::Softmax { .. } => "softmax",
            Op::Gather { .. } => "embedding_lookup",
            Op::GateMix { .. } => "gate_mix",
            Op::Add { .. } => "add",
            Op::Mul { .. } => "mul",
            Op::StopGradient => "stop_gradient",
            Op::CrossEntropy { .. } => "cross_entropy",
            Op::L1 { .. } => "l1_loss",
            Op::WeightedSum { .. } => "weighted_sum",
        }
    }
}

#[derive(Debug)]
struct Node {
    value: Tensor,
    op: Op,
    requires_grad: bool,
}

#[derive(Debug, Default)]
pub struct Tape {
    nodes: Vec<Node>,
    grads: Vec<Option<Tensor>>,
    last_visit: Vec<usize>,
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// A trainable leaf: gradients flow into it.
    pub fn param(&mut self, value: Tensor) -> Var {
        self.push(value, Op::Leaf, true)
    }

    /// A leaf that never receives gradient.
    pub fn constant(&mut self, value: Tensor) -> Var {
        self.push(value, Op::Leaf, false)
    }

    pub fn value(&self, v: Var) -> &Tensor {
        &self.nodes[v.0].value
    }

    pub fn requires_grad(&self, v: Var) -> bool {
        self.nodes[v.0].requires_grad
    }

    /// Name of the op that produced `v`.
    pub fn op_name(&self, v: Var) -> &'static str {
        self.nodes[v.0].op.name()
    }

    /// Accumulated gradient of `v`, if any backward pass reached it.
    pub fn grad(&self, v: Var) -> Option<&Tensor> {
        self.grads.get(v.0).and_then(|g| g.as_ref())
    }

    /// Accumulated gradient of `v`, or zeros of its shape.
    pub fn grad_or_zeros(&self, v: Var) -> Tensor {
        self.grad(v)
            .cloned()
            .unwrap_or_else(|| Tensor::zeros(self.value(v).shape()))
    }

    pub fn zero_grad(&mut self) {
        self.grads.iter_mut().for_each(|g| *g = None);
    }

    /// Node indices whose backward rule ran during the most recent
    /// [`backward`](Self::backward) call, in visit order.
    pub fn last_backward_order(&self) -> &[usize] {
        &self.last_visit
    }

    fn push(&mut self, value: Tensor, op: Op, requires_grad: bool) -> Var {
        self.nodes.push(Node {
            value,
            op,
            requires_grad,
        });
        self.grads.push(None);
        Var(self.nodes.len() - 1)
    }

    fn record(&mut self, value: Tensor, op: Op, inputs: &[Var]) -> Result<Var> {
        if !value.is_finite() {
            return Err(Error::NonFinite(op.name().to_string()));
        }
        let requires_grad = inputs.iter().any(|v| self.nodes[v.0].requires_grad);
        Ok(self.push(value, op, requires_grad))
    }

    /// `out[b, o] = sum_i input[b, i] * weight[i, o] + bias[o]`.
    pub fn affine(&mut self, input: Var, weight: Var, bias: Var) -> Result<Var> {
        let x = self.value(input);
        let w = self.value(weight);
        let b = self.value(bias);
        let (batch, in_dim) = x.require_rank2("affine input")?;
        let (w_in, out_dim) = w.require_rank2("affine weight")?;
        if w_in != in_dim {
            return Err(Error::Dimension(format!(
                "affine: input width {in_dim} vs weight rows {w_in}"
            )));
        }
        if b.rank() != 1 || b.len() != out_dim {
            return Err(Error::Dimension(format!(
                "affine: bias shape {:?} vs output width {out_dim}",
                b.shape()
            )));
        }
        let mut out = vec![0.0; batch * out_dim];
        let (xd, wd, bd) = (x.data(), w.data(), b.data());
        for r in 0..batch {
            let orow = &mut out[r * out_dim..(r + 1) * out_dim];
            orow.copy_from_slice(bd);
            for (i, &xi) in xd[r * in_dim..(r + 1) * in_dim].iter().enumerate() {
                if xi == 0.0 {
                    continue;
                }
                let wrow = &wd[i * out_dim..(i + 1) * out_dim];
                for (o, &wv) in orow.iter_mut().zip(wrow) {
                    *o += xi * wv;
                }
            }
        }
        let value = Tensor::from_parts_unchecked(vec![batch, out_dim], out);
        self.record(
            value,
            Op::Affine {
                input,
                weight,
                bias,
            },
            &[input, weight, bias],
        )
    }

    /// Column-wise concatenation of `[B, D_i]` parts, in argument order.
    pub fn concat(&mut self, parts: &[Var]) -> Result<Var> {
        let first = parts
            .first()
            .ok_or_else(|| Error::Dimension("concat of zero parts".into()))?;
        let batch = self.value(*first).require_rank2("concat part")?.0;
        let mut widths = Vec::with_capacity(parts.len());
        for p in parts {
            let (b, w) = self.value(*p).require_rank2("concat part")?;
            if b != batch {
                return Err(Error::Dimension(format!(
                    "concat: batch {b} vs {batch}"
                )));
            }
            widths.push(w);
        }
        let total: usize = widths.iter().sum();
        let mut out = Vec::with_capacity(batch * total);
        for r in 0..batch {
            for p in parts {
                out.extend_from_slice(self.value(*p).row(r));
            }
        }
        let value = Tensor::from_parts_unchecked(vec![batch, total], out);
        self.record(
            value,
            Op::Concat {
                parts: parts.to_vec(),
            },
            parts,
        )
    }

    /// Columns `start..start + width` of a `[B, D]` tensor.
    pub fn slice_cols(&mut self, input: Var, start: usize, width: usize) -> Result<Var> {
        let x = self.value(input);
        let (batch, cols) = x.require_rank2("slice_cols")?;
        if start + width > cols {
            return Err(Error::Dimension(format!(
                "slice_cols: {start}+{width} exceeds width {cols}"
            )));
        }
        let mut out = Vec::with_capacity(batch * width);
        for r in 0..batch {
            out.extend_from_slice(&x.row(r)[start..start + width]);
        }
        let value = Tensor::from_parts_unchecked(vec![batch, width], out);
        self.record(value, Op::SliceCols { input, start }, &[input])
    }

    /// Parametric ReLU with one slope per column.
    pub fn prelu(&mut self, input: Var, slope: Var) -> Result<Var> {
        let x = self.value(input);
        let s = self.value(slope);
        let cols = x.cols();
        if s.rank() != 1 || s.len() != cols {
            return Err(Error::Dimension(format!(
                "prelu: slope shape {:?} vs width {cols}",
                s.shape()
            )));
        }
        let sd = s.data();
        let out = x
            .data()
            .iter()
            .enumerate()
            .map(|(k, &v)| if v > 0.0 { v } else { sd[k % cols] * v })
            .collect();
        let value = Tensor::from_parts_unchecked(x.shape().to_vec(), out);
        self.record(value, Op::Prelu { input, slope }, &[input, slope])
    }

    pub fn sigmoid(&mut self, input: Var) -> Result<Var> {
        let x = self.value(input);
        let out = x.data().iter().map(|&v| sigmoid(v)).collect();
        let value = Tensor::from_parts_unchecked(x.shape().to_vec(), out);
        self.record(value, Op::Sigmoid { input }, &[input])
    }

    /// Row-wise softmax of a `[B, K]` tensor.
    pub fn softmax(&mut self, input: Var) -> Result<Var> {
        let x = self.value(input);
        let (batch, k) = x.require_rank2("softmax")?;
        if k == 0 {
            return Err(Error::Dimension("softmax over zero columns".into()));
        }
        let mut out = Vec::with_capacity(batch * k);
        for r in 0..batch {
            out.extend(softmax_row(x.row(r)));
        }
        let value = Tensor::from_parts_unchecked(vec![batch, k], out);
        self.record(value, Op::Softmax { input }, &[input])
    }

    /// Row gather from a `[V, D]` table; gradients scatter-add back.
    pub fn embedding_lookup(&mut self, table: Var, ids: &[usize]) -> Result<Var> {
        let t = self.value(table);
        let (vocab, dim) = t.require_rank2("embedding table")?;
        let mut out = Vec::with_capacity(ids.len() * dim);
        for &id in ids {
            if id >= vocab {
                return Err(Error::Index {
                    what: "embedding table".into(),
                    index: id,
                    len: vocab,
                });
            }
            out.extend_from_slice(t.row(id));
        }
        let value = Tensor::from_parts_unchecked(vec![ids.len(), dim], out);
        self.record(
            value,
            Op::Gather {
                table,
                ids: ids.to_vec(),
            },
            &[table],
        )
    }

    /// Mixture of experts: `out[b, d] = sum_k gate[b, k] * experts[k][b, d]`.
    pub fn gate_mix(&mut self, gate: Var, experts: &[Var]) -> Result<Var> {
        let g = self.value(gate);
        let (batch, k) = g.require_rank2("gate")?;
        if k != experts.len() {
            return Err(Error::Dimension(format!(
                "gate_mix: {k} gate columns vs {} experts",
                experts.len()
            )));
        }
        let first = experts
            .first()
            .ok_or_else(|| Error::Dimension("gate_mix of zero experts".into()))?;
        let dim = self.value(*first).cols();
        for e in experts {
            let (b, d) = self.value(*e).require_rank2("expert output")?;
            if b != batch || d != dim {
                return Err(Error::Dimension(format!(
                    "gate_mix: expert shape [{b}, {d}] vs [{batch}, {dim}]"
                )));
            }
        }
        let mut out = vec![0.0; batch * dim];
        for (j, e) in experts.iter().enumerate() {
            let ed = self.value(*e).data();
            for r in 0..batch {
                let w = g.get(r, j);
                for (o, &v) in out[r * dim..(r + 1) * dim]
                    .iter_mut()
                    .zip(&ed[r * dim..(r + 1) * dim])
                {
                    *o += w * v;
                }
            }
        }
        let value = Tensor::from_parts_unchecked(vec![batch, dim], out);
        let mut inputs = vec![gate];
        inputs.extend_from_slice(experts);
        self.record(
            value,
            Op::GateMix {
                gate,
                experts: experts.to_vec(),
            },
            &inputs,
        )
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        let value = self.zip_same_shape(a, b, "add", |x, y| x + y)?;
        self.record(value, Op::Add { a, b }, &[a, b])
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        let value = self.zip_same_shape(a, b, "mul", |x, y| x * y)?;
        self.record(value, Op::Mul { a, b }, &[a, b])
    }

    /// Identity on values; blocks all gradient through this edge.
    pub fn stop_gradient(&mut self, input: Var) -> Var {
        let value = self.value(input).clone();
        self.push(value, Op::StopGradient, false)
    }

    /// Mean binary cross-entropy of probabilities against `{0, 1}` labels.
    /// Probabilities are clipped into `[eps, 1 - eps]`; the clip has zero
    /// derivative outside that band.
    pub fn cross_entropy(&mut self, pred: Var, labels: &[f64]) -> Result<Var> {
        let p = self.value(pred);
        if p.len() != labels.len() {
            return Err(Error::Dimension(format!(
                "cross_entropy: {} predictions vs {} labels",
                p.len(),
                labels.len()
            )));
        }
        let loss = mean_binary_cross_entropy(p.data(), labels);
        self.record(
            Tensor::scalar(loss),
            Op::CrossEntropy {
                pred,
                labels: labels.to_vec(),
            },
            &[pred],
        )
    }

    /// Mean absolute error; the subgradient at an exact tie is 0.
    pub fn l1_loss(&mut self, pred: Var, target: &[f64]) -> Result<Var> {
        let p = self.value(pred);
        if p.len() != target.len() {
            return Err(Error::Dimension(format!(
                "l1_loss: {} predictions vs {} targets",
                p.len(),
                target.len()
            )));
        }
        let n = p.len();
        let loss = if n == 0 {
            0.0
        } else {
            p.data()
                .iter()
                .zip(target)
                .map(|(a, b)| (a - b).abs())
                .sum::<f64>()
                / n as f64
        };
        self.record(
            Tensor::scalar(loss),
            Op::L1 {
                pred,
                target: target.to_vec(),
            },
            &[pred],
        )
    }

    /// `sum_i weight_i * term_i` over scalar terms.
    pub fn weighted_sum(&mut self, terms: &[(Var, f64)]) -> Result<Var> {
        let mut total = 0.0;
        for (v, w) in terms {
            total += w * self.value(*v).item()?;
        }
        let inputs: Vec<Var> = terms.iter().map(|t| t.0).collect();
        self.record(
            Tensor::scalar(total),
            Op::WeightedSum {
                terms: terms.to_vec(),
            },
            &inputs,
        )
    }

    fn zip_same_shape(
        &self,
        a: Var,
        b: Var,
        what: &str,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<Tensor> {
        let (x, y) = (self.value(a), self.value(b));
        if x.shape() != y.shape() {
            return Err(Error::Dimension(format!(
                "{what}: shapes {:?} and {:?}",
                x.shape(),
                y.shape()
            )));
        }
        let out = x.data().iter().zip(y.data()).map(|(&p, &q)| f(p, q)).collect();
        Ok(Tensor::from_parts_unchecked(x.shape().to_vec(), out))
    }

    /// Propagates d(root)/d(node) to every node reachable from `root`, adding
    /// the result into the per-node gradient accumulators.
    pub fn backward(&mut self, root: Var) -> Result<()> {
        if self.value(root).len() != 1 {
            return Err(Error::Contract(format!(
                "backward from non-scalar root of shape {:?}",
                self.value(root).shape()
            )));
        }
        let mut adj: Vec<Option<Tensor>> = vec![None; root.0 + 1];
        adj[root.0] = Some(Tensor::full(self.value(root).shape(), 1.0));
        self.last_visit.clear();

        for idx in (0..=root.0).rev() {
            let Some(g) = adj[idx].take() else { continue };
            let node = &self.nodes[idx];
            if !node.requires_grad {
                continue;
            }
            self.last_visit.push(idx);
            propagate(&self.nodes, node, &g, &mut adj);
            accumulate(&mut self.grads[idx], g);
        }
        Ok(())
    }
}

fn accumulate(slot: &mut Option<Tensor>, g: Tensor) {
    match slot {
        Some(existing) => existing.add_assign(&g),
        None => *slot = Some(g),
    }
}

fn accumulate_into(adj: &mut [Option<Tensor>], nodes: &[Node], v: Var, f: impl FnOnce(&mut Tensor)) {
    if !nodes[v.0].requires_grad {
        return;
    }
    let slot = &mut adj[v.0];
    let t = slot.get_or_insert_with(|| Tensor::zeros(nodes[v.0].value.shape()));
    f(t);
}

fn propagate(nodes: &[Node], node: &Node, g: &Tensor, adj: &mut [Option<Tensor>]) {
    let gd = g.data();
    match &node.op {
        Op::Leaf | Op::StopGradient => {}
        Op::Affine {
            input,
            weight,
            bias,
        } => {
            let x = &nodes[input.0].value;
            let w = &nodes[weight.0].value;
            let (batch, in_dim) = (x.rows(), x.cols());
            let out_dim = w.cols();
            let (xd, wd) = (x.data(), w.data());
            accumulate_into(adj, nodes, *input, |dx| {
                let dxd = dx.data_mut();
                for r in 0..batch {
                    let grow = &gd[r * out_dim..(r + 1) * out_dim];
                    for i in 0..in_dim {
                        let wrow = &wd[i * out_dim..(i + 1) * out_dim];
                        dxd[r * in_dim + i] += dot(grow, wrow);
                    }
                }
            });
            accumulate_into(adj, nodes, *weight, |dw| {
                let dwd = dw.data_mut();
                for r in 0..batch {
                    let grow = &gd[r * out_dim..(r + 1) * out_dim];
                    for (i, &xi) in xd[r * in_dim..(r + 1) * in_dim].iter().enumerate() {
                        if xi == 0.0 {
                            continue;
                        }
                        for (d, &gv) in dwd[i * out_dim..(i + 1) * out_dim].iter_mut().zip(grow) {
                            *d += xi * gv;
                        }
                    }
                }
            });
            accumulate_into(adj, nodes, *bias, |db| {
                let dbd = db.data_mut();
                for r in 0..batch {
                    for (d, &gv) in dbd.iter_mut().zip(&gd[r * out_dim..(r + 1) * out_dim]) {
                        *d += gv;
                    }
                }
            });
        }
        Op::Concat { parts } => {
            let batch = g.rows();
            let total = g.cols();
            let mut offset = 0;
            for p in parts {
                let width = nodes[p.0].value.cols();
                accumulate_into(adj, nodes, *p, |dp| {
                    let dpd = dp.data_mut();
                    for r in 0..batch {
                        let src = &gd[r * total + offset..r * total + offset + width];
                        for (d, &s) in dpd[r * width..(r + 1) * width].iter_mut().zip(src) {
                            *d += s;
                        }
                    }
                });
                offset += width;
            }
        }
        Op::SliceCols { input, start } => {
            let (batch, width) = (g.rows(), g.cols());
            let cols = nodes[input.0].value.cols();
            accumulate_into(adj, nodes, *input, |dx| {
                let dxd = dx.data_mut();
                for r in 0..batch {
                    for c in 0..width {
                        dxd[r * cols + start + c] += gd[r * width + c];
                    }
                }
            });
        }
        Op::Prelu { input, slope } => {
            let x = &nodes[input.0].value;
            let s = &nodes[slope.0].value;
            let cols = s.len();
            let (xd, sd) = (x.data(), s.data());
            accumulate_into(adj, nodes, *input, |dx| {
                for (k, d) in dx.data_mut().iter_mut().enumerate() {
                    *d += if xd[k] > 0.0 { gd[k] } else { sd[k % cols] * gd[k] };
                }
            });
            accumulate_into(adj, nodes, *slope, |ds| {
                let dsd = ds.data_mut();
                for (k, &xv) in xd.iter().enumerate() {
                    if xv <= 0.0 {
                        dsd[k % cols] += xv * gd[k];
                    }
                }
            });
        }
        Op::Sigmoid { input } => {
            let y = node.value.data();
            accumulate_into(adj, nodes, *input, |dx| {
                for ((d, &yv), &gv) in dx.data_mut().iter_mut().zip(y).zip(gd) {
                    *d += gv * yv * (1.0 - yv);
                }
            });
        }
        Op::Softmax { input } => {
            let y = &node.value;
            let k = y.cols();
            accumulate_into(adj, nodes, *input, |dx| {
                let dxd = dx.data_mut();
                for r in 0..y.rows() {
                    let yr = y.row(r);
                    let gr = &gd[r * k..(r + 1) * k];
                    let inner = dot(gr, yr);
                    for c in 0..k {
                        dxd[r * k + c] += yr[c] * (gr[c] - inner);
                    }
                }
            });
        }
        Op::Gather { table, ids } => {
            let dim = g.cols();
            accumulate_into(adj, nodes, *table, |dt| {
                let dtd = dt.data_mut();
                for (r, &id) in ids.iter().enumerate() {
                    for (d, &gv) in dtd[id * dim..(id + 1) * dim]
                        .iter_mut()
                        .zip(&gd[r * dim..(r + 1) * dim])
                    {
                        *d += gv;
                    }
                }
            });
        }
        Op::GateMix { gate, experts } => {
            let gt = &nodes[gate.0].value;
            let (batch, dim) = (g.rows(), g.cols());
            accumulate_into(adj, nodes, *gate, |dg| {
                let dgd = dg.data_mut();
                let k = experts.len();
                for (j, e) in experts.iter().enumerate() {
                    let ed = nodes[e.0].value.data();
                    for r in 0..batch {
                        dgd[r * k + j] +=
                            dot(&gd[r * dim..(r + 1) * dim], &ed[r * dim..(r + 1) * dim]);
                    }
                }
            });
            for (j, e) in experts.iter().enumerate() {
                accumulate_into(adj, nodes, *e, |de| {
                    let ded = de.data_mut();
                    for r in 0..batch {
                        let w = gt.get(r, j);
                        for (d, &gv) in ded[r * dim..(r + 1) * dim]
                            .iter_mut()
                            .zip(&gd[r * dim..(r + 1) * dim])
                        {
                            *d += w * gv;
                        }
                    }
                });
            }
        }
        Op::Add { a, b } => {
            for v in [a, b] {
                accumulate_into(adj, nodes, *v, |d| {
                    for (dv, &gv) in d.data_mut().iter_mut().zip(gd) {
                        *dv += gv;
                    }
                });
            }
        }
        Op::Mul { a, b } => {
            let (av, bv) = (nodes[a.0].value.data(), nodes[b.0].value.data());
            accumulate_into(adj, nodes, *a, |d| {
                for ((dv, &gv), &o) in d.data_mut().iter_mut().zip(gd).zip(bv) {
                    *dv += gv * o;
                }
            });
            accumulate_into(adj, nodes, *b, |d| {
                for ((dv, &gv), &o) in d.data_mut().iter_mut().zip(gd).zip(av) {
                    *dv += gv * o;
                }
            });
        }
        Op::CrossEntropy { pred, labels } => {
            let p = nodes[pred.0].value.data();
            let n = labels.len();
            if n == 0 {
                return;
            }
            let scale = gd[0] / n as f64;
            accumulate_into(adj, nodes, *pred, |d| {
                for ((dv, &pv), &y) in d.data_mut().iter_mut().zip(p).zip(labels) {
                    if pv > PROB_CLIP_EPS && pv < 1.0 - PROB_CLIP_EPS {
                        *dv += scale * (-y / pv + (1.0 - y) / (1.0 - pv));
                    }
                }
            });
        }
        Op::L1 { pred, target } => {
            let p = nodes[pred.0].value.data();
            let n = target.len();
            if n == 0 {
                return;
            }
            let scale = gd[0] / n as f64;
            accumulate_into(adj, nodes, *pred, |d| {
                for ((dv, &pv), &t) in d.data_mut().iter_mut().zip(p).zip(target) {
                    let diff = pv - t;
                    if diff > 0.0 {
                        *dv += scale;
                    } else if diff < 0.0 {
                        *dv -= scale;
                    }
                }
            });
        }
        Op::WeightedSum { terms } => {
            for (v, w) in terms {
                accumulate_into(adj, nodes, *v, |d| d.data_mut()[0] += w * gd[0]);
            }
        }
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Logistic function, evaluated on the branch that cannot overflow.
pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn softmax_row(row: &[f64]) -> impl Iterator<Item = f64> + '_ {
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = row.iter().map(|v| (v - max).exp()).sum();
    row.iter().map(move |v| (v - max).exp() / sum)
}

pub(crate) fn clip_prob(p: f64) -> f64 {
    p.clamp(PROB_CLIP_EPS, 1.0 - PROB_CLIP_EPS)
}

pub(crate) fn mean_binary_cross_entropy(pred: &[f64], labels: &[f64]) -> f64 {
    if pred.is_empty() {
        return 0.0;
    }
    let total: f64 = pred
        .iter()
        .zip(labels)
        .map(|(&p, &y)| {
            let p = clip_prob(p);
            -(y * p.ln() + (1.0 - y) * (1.0 - p).ln())
        })
        .sum();
    total / pred.len() as f64
}
