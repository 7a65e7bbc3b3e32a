use exit_core::datagen::FeatureRow;
use exit_core::model::Model;
use exit_core::tensor::{Tape, Tensor, Var};
use exit_core::training::{joint_loss_on_tape, BatchLabels, LossWeights};
use exit_core::Result;

use super::{close, rng, random_rows, tiny_model_config, tiny_vocab, with_value};

pub const H: f64 = 1e-5;
pub const REL_TOL: f64 = 1e-4;
pub const FLOOR: f64 = 1e-3;

/// Reduces any output to a scalar with a fixed random weighting.
/// `l1_loss` against a far-below target is linear in its input.
pub fn project(tape: &mut Tape, out: Var, weights: &Tensor) -> Result<Var> {
    let c = tape.constant(weights.clone());
    let weighted = tape.mul(out, c)?;
    let n = tape.value(weighted).len();
    tape.l1_loss(weighted, &vec![-1e3; n])
}

/// Compares d(build)/d(input) with central differences for every element of
/// every input. Returns the number of elements checked.
pub fn fd_check<F>(name: &str, inputs: &[Tensor], build: F) -> std::result::Result<usize, String>
where
    F: Fn(&mut Tape, &[Var]) -> Result<Var>,
{
    let eval = |ins: &[Tensor]| -> f64 {
        let mut tape = Tape::new();
        let vars: Vec<Var> = ins.iter().map(|t| tape.param(t.clone())).collect();
        let out = build(&mut tape, &vars).unwrap();
        tape.value(out).item().unwrap()
    };
    let mut tape = Tape::new();
    let vars: Vec<Var> = inputs.iter().map(|t| tape.param(t.clone())).collect();
    let out = build(&mut tape, &vars).map_err(|e| e.to_string())?;
    tape.backward(out).map_err(|e| e.to_string())?;
    let mut checked = 0;
    for (k, t) in inputs.iter().enumerate() {
        let g = tape.grad_or_zeros(vars[k]);
        for i in 0..t.len() {
            let x = t.data()[i];
            let mut plus = inputs.to_vec();
            plus[k] = with_value(t, i, x + H);
            let mut minus = inputs.to_vec();
            minus[k] = with_value(t, i, x - H);
            let numeric = (eval(&plus) - eval(&minus)) / (2.0 * H);
            let analytic = g.data()[i];
            if !close(analytic, numeric, REL_TOL, FLOOR) {
                return Err(format!("{name}: input {k} element {i}: analytic {analytic} vs numeric {numeric}"));
            }
            checked += 1;
        }
    }
    Ok(checked)
}

pub fn batch_labels() -> BatchLabels {
    BatchLabels {
        y_t: vec![1.0, 0.0, 0.0, 1.0, 0.0, 1.0],
        y_s: vec![1.0, 1.0, 0.0, 0.0, 1.0, 1.0],
        y_icl: vec![2.0, 0.4, 0.0, 1.0, 0.25, 2.0],
    }
}

fn model_loss(model: &Model, rows: &[FeatureRow], labels: &BatchLabels, w: &LossWeights) -> f64 {
    let mut tape = Tape::new();
    let bound = model.bind(&mut tape, false);
    let state = model.forward(&mut tape, &bound, rows, false).unwrap();
    let (loss, _) = joint_loss_on_tape(&mut tape, &state, labels, w).unwrap();
    tape.value(loss).item().unwrap()
}

/// Finite differences of the joint loss through the whole model, for every
/// element of the dense parameters and the touched embedding entries.
pub fn model_fd_check() -> std::result::Result<usize, String> {
    let vocab = tiny_vocab();
    let mut model = Model::new(tiny_model_config(), vocab, 17).unwrap();
    let rows = random_rows(6, &vocab, &mut rng(18));
    let labels = batch_labels();
    let w = LossWeights::new(0.8, 1.2, 1.5);

    let mut tape = Tape::new();
    let bound = model.bind(&mut tape, true);
    let state = model.forward(&mut tape, &bound, &rows, false).unwrap();
    let (loss, _) = joint_loss_on_tape(&mut tape, &state, &labels, &w).unwrap();
    tape.backward(loss).unwrap();
    let grads: Vec<Tensor> = bound.vars().iter().map(|&v| tape.grad_or_zeros(v)).collect();

    let ids: Vec<_> = model.params().iter().map(|(id, name, t)| (id, name.to_string(), t.len())).collect();
    let mut checked = 0;
    for (id, name, len) in ids {
        let g = &grads[id.index()];
        let elems: Vec<usize> = if name.starts_with("emb.") {
            (0..len).filter(|&i| g.data()[i] != 0.0).take(6).collect()
        } else {
            (0..len).collect()
        };
        for i in elems {
            let base = model.params().get(id).clone();
            let x = base.data()[i];
            model.params_mut().set(id, with_value(&base, i, x + H)).unwrap();
            let up = model_loss(&model, &rows, &labels, &w);
            model.params_mut().set(id, with_value(&base, i, x - H)).unwrap();
            let down = model_loss(&model, &rows, &labels, &w);
            model.params_mut().set(id, base).unwrap();
            let numeric = (up - down) / (2.0 * H);
            let analytic = g.data()[i];
            if !close(analytic, numeric, REL_TOL, FLOOR) {
                return Err(format!("{name}[{i}]: analytic {analytic} vs numeric {numeric}"));
            }
            checked += 1;
        }
    }
    Ok(checked)
}

/// With stop gradient on, the combination loss alone must leave every IPN
/// parameter and IPN embedding table with an exactly zero gradient while
/// still reaching the selector. Returns the selector gradient norm².
pub fn stop_gradient_check() -> std::result::Result<f64, String> {
    let vocab = tiny_vocab();
    let model = Model::new(tiny_model_config(), vocab, 5).unwrap();
    let rows = random_rows(6, &vocab, &mut rng(6));
    let mut tape = Tape::new();
    let bound = model.bind(&mut tape, true);
    let state = model.forward(&mut tape, &bound, &rows, true).unwrap();
    let (loss, _) = joint_loss_on_tape(&mut tape, &state, &batch_labels(), &LossWeights::new(0.0, 0.0, 1.0)).unwrap();
    tape.backward(loss).unwrap();
    for id in model.ipn_param_ids().into_iter().chain(model.ipn_embedding_ids()) {
        let g = tape.grad_or_zeros(bound.var(id));
        if let Some(x) = g.data().iter().find(|&&x| x != 0.0) {
            return Err(format!("{} received combination-loss gradient {x}", model.params().name(id)));
        }
    }
    let norm: f64 = model
        .ssn_param_ids()
        .into_iter()
        .map(|id| tape.grad_or_zeros(bound.var(id)).data().iter().map(|x| x * x).sum::<f64>())
        .sum();
    if norm > 0.0 {
        Ok(norm)
    } else {
        Err("selector received no gradient".into())
    }
}

/// One finite-difference check per tape layer type. Returns the number of
/// elements checked.
pub fn layer_checks() -> std::result::Result<usize, String> {
    use super::{away_from_zero, random_tensor};
    let mut r = rng(100);
    let mut n = 0;
    let w = |shape: &[usize], r: &mut rand_chacha::ChaCha8Rng| random_tensor(shape, 0.5, 2.0, r);

    let ins = [random_tensor(&[3, 4], -1.0, 1.0, &mut r), random_tensor(&[4, 2], -1.0, 1.0, &mut r), random_tensor(&[2], -1.0, 1.0, &mut r)];
    let c = w(&[3, 2], &mut r);
    n += fd_check("affine", &ins, |t, v| {
        let y = t.affine(v[0], v[1], v[2])?;
        project(t, y, &c)
    })?;

    let ins = [random_tensor(&[2, 3], -1.0, 1.0, &mut r), random_tensor(&[2, 2], -1.0, 1.0, &mut r)];
    let c = w(&[2, 3], &mut r);
    n += fd_check("concat/slice", &ins, |t, v| {
        let y = t.concat(&[v[0], v[1]])?;
        let y = t.slice_cols(y, 1, 3)?;
        project(t, y, &c)
    })?;

    let ins = [away_from_zero(&[4, 3], &mut r), random_tensor(&[3], 0.05, 0.5, &mut r)];
    let c = w(&[4, 3], &mut r);
    n += fd_check("prelu", &ins, |t, v| {
        let y = t.prelu(v[0], v[1])?;
        project(t, y, &c)
    })?;

    let ins = [random_tensor(&[3, 2], -3.0, 3.0, &mut r)];
    let c = w(&[3, 2], &mut r);
    n += fd_check("sigmoid", &ins, |t, v| {
        let y = t.sigmoid(v[0])?;
        project(t, y, &c)
    })?;

    let ins = [random_tensor(&[3, 4], -2.0, 2.0, &mut r)];
    let c = w(&[3, 4], &mut r);
    n += fd_check("softmax", &ins, |t, v| {
        let y = t.softmax(v[0])?;
        project(t, y, &c)
    })?;

    let ins = [random_tensor(&[5, 3], -1.0, 1.0, &mut r)];
    let c = w(&[6, 3], &mut r);
    n += fd_check("embedding", &ins, |t, v| {
        let y = t.embedding_lookup(v[0], &[0, 2, 2, 4, 0, 2])?;
        project(t, y, &c)
    })?;

    let ins = [random_tensor(&[3, 2], 0.0, 1.0, &mut r), random_tensor(&[3, 4], -1.0, 1.0, &mut r), random_tensor(&[3, 4], -1.0, 1.0, &mut r)];
    let c = w(&[3, 4], &mut r);
    n += fd_check("gate_mix", &ins, |t, v| {
        let y = t.gate_mix(v[0], &[v[1], v[2]])?;
        project(t, y, &c)
    })?;

    let ins = [random_tensor(&[4, 1], -1.0, 1.0, &mut r), random_tensor(&[4, 1], -1.0, 1.0, &mut r)];
    let c = w(&[4, 1], &mut r);
    n += fd_check("add/mul", &ins, |t, v| {
        let s = t.add(v[0], v[1])?;
        let p = t.mul(s, v[1])?;
        project(t, p, &c)
    })?;

    let ins = [random_tensor(&[5, 1], 0.05, 0.95, &mut r)];
    n += fd_check("cross_entropy", &ins, |t, v| t.cross_entropy(v[0], &[1.0, 0.0, 1.0, 1.0, 0.0]))?;

    let ins = [random_tensor(&[5, 1], 0.0, 1.0, &mut r)];
    n += fd_check("l1", &ins, |t, v| t.l1_loss(v[0], &[0.0, 2.0, 0.37, 1.0, -0.5]))?;

    let ins = [random_tensor(&[3, 1], 0.1, 0.9, &mut r), random_tensor(&[3, 1], 0.1, 0.9, &mut r)];
    n += fd_check("weighted_sum", &ins, |t, v| {
        let a = t.cross_entropy(v[0], &[1.0, 0.0, 1.0])?;
        let b = t.l1_loss(v[1], &[2.0, 2.0, -1.0])?;
        t.weighted_sum(&[(a, 0.7), (b, 1.9)])
    })?;
    Ok(n)
}
