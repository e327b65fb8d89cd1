use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng as _;

use super::vocab::{Vocabulary, BOS};
use super::EdError;
use crate::numerics::{glorot_uniform, ParamId, ParamSet, Rng, Tape, Tensor, Var};
use crate::phonology::Phoneme;

/// Layer sizes and regularization.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EdConfig {
    /// Embedding width, shared by encoder and decoder inputs.
    pub emb: usize,
    /// LSTM width: per direction in the encoder, and in the decoder.
    pub hidden: usize,
    /// Depth of both the encoder and the decoder stacks.
    pub layers: usize,
    /// Drop probability between stacked layers during training.
    pub dropout: f64,
    /// Hidden width of the attention scorer.
    pub attention: usize,
}

impl Default for EdConfig {
    fn default() -> Self {
        Self {
            emb: 300,
            hidden: 100,
            layers: 2,
            dropout: 0.3,
            attention: 100,
        }
    }
}

impl EdConfig {
    /// Small dimensions for tests and quick runs.
    pub fn test_scale() -> Self {
        Self {
            emb: 64,
            hidden: 64,
            attention: 64,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), EdError> {
        if self.emb == 0 || self.hidden == 0 || self.attention == 0 {
            return Err(EdError::BadConfig("layer sizes must be positive"));
        }
        if self.layers == 0 {
            return Err(EdError::BadConfig("at least one layer is required"));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(EdError::BadConfig("dropout must be in [0, 1)"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug)]
pub(super) struct Lstm {
    w: ParamId,
    b: ParamId,
}

#[derive(Clone, Debug)]
struct Ids {
    embed: ParamId,
    /// `[forward, backward]` per layer.
    enc: Vec<[Lstm; 2]>,
    /// Maps the final encoder states of a layer to the decoder's initial
    /// hidden state for the same layer.
    init: Vec<(ParamId, ParamId)>,
    att_s: ParamId,
    att_h: ParamId,
    att_b: ParamId,
    att_v: ParamId,
    dec: Vec<Lstm>,
    hid_w: ParamId,
    hid_b: ParamId,
    out_w: ParamId,
    out_b: ParamId,
}

/// The trainable encoder-decoder.
#[derive(Clone, Debug)]
pub struct EdModel {
    cfg: EdConfig,
    vocab: Vocabulary,
    params: ParamSet,
    ids: Ids,
}

/// Inverted dropout: kept units are scaled by `1 / (1 - p)`.
pub(super) struct Dropout<'r> {
    pub rng: &'r mut Rng,
    pub p: f64,
}

impl Dropout<'_> {
    fn apply(&mut self, t: &mut Tape, x: Var) -> Result<Var, EdError> {
        if self.p == 0.0 {
            return Ok(x);
        }
        let keep = 1.0 - self.p;
        let n = t.value(x).len();
        let mask = (0..n).map(|_| if self.rng.gen::<f64>() < keep { 1.0 / keep } else { 0.0 }).collect();
        let m = t.vector(mask);
        Ok(t.mul(x, m)?)
    }
}

/// Encoder outputs on a tape.
pub(super) struct Encoded {
    /// `[n, 2H]` context vectors.
    pub states: Var,
    /// `[n, A]` encoder half of the attention pre-activation, bias included.
    pub projected: Var,
    pub init: DecState,
}

/// Per-layer `(h, c)` of the decoder.
#[derive(Clone, Debug)]
pub(super) struct DecState {
    pub layers: Vec<(Var, Var)>,
}

impl DecState {
    fn top(&self) -> Var {
        self.layers.last().expect("at least one layer").0
    }
}

/// Shapes of every parameter, in insertion order.
fn layout(cfg: &EdConfig, vocab: &Vocabulary) -> Vec<(String, Vec<usize>)> {
    let (e, h, a) = (cfg.emb, cfg.hidden, cfg.attention);
    let mut out = vec![("embed".into(), vec![vocab.len(), e])];
    for l in 0..cfg.layers {
        let input = if l == 0 { e } else { 2 * h };
        for dir in ["fwd", "bwd"] {
            out.push((format!("enc.{l}.{dir}.w"), vec![4 * h, input + h]));
            out.push((format!("enc.{l}.{dir}.b"), vec![4 * h]));
        }
    }
    for l in 0..cfg.layers {
        out.push((format!("init.{l}.w"), vec![h, 2 * h]));
        out.push((format!("init.{l}.b"), vec![h]));
    }
    out.push(("att.s".into(), vec![a, h]));
    out.push(("att.h".into(), vec![2 * h, a]));
    out.push(("att.b".into(), vec![a]));
    out.push(("att.v".into(), vec![a]));
    for l in 0..cfg.layers {
        let input = if l == 0 { e + 2 * h } else { h };
        out.push((format!("dec.{l}.w"), vec![4 * h, input + h]));
        out.push((format!("dec.{l}.b"), vec![4 * h]));
    }
    out.push(("out.hid.w".into(), vec![h, e + 3 * h]));
    out.push(("out.hid.b".into(), vec![h]));
    out.push(("out.w".into(), vec![vocab.output_len(), h]));
    out.push(("out.b".into(), vec![vocab.output_len()]));
    out
}

impl EdModel {
    /// Glorot-uniform weights, zero biases except a forget-gate bias of 1.
    pub fn new(vocab: Vocabulary, cfg: EdConfig, rng: &mut Rng) -> Result<Self, EdError> {
        cfg.validate()?;
        let mut params = ParamSet::new();
        for (name, shape) in layout(&cfg, &vocab) {
            let t = match shape[..] {
                [rows, cols] => glorot_uniform(rows, cols, rng),
                [n] if name == "att.v" => Tensor::vector(glorot_uniform(n, 1, rng).into_data()),
                [n] if name.ends_with(".b") && (name.starts_with("enc.") || name.starts_with("dec.")) => {
                    let h = cfg.hidden;
                    Tensor::vector((0..n).map(|i| if (h..2 * h).contains(&i) { 1.0 } else { 0.0 }).collect())
                }
                _ => Tensor::zeros(&shape),
            };
            params.insert(name, t)?;
        }
        Self::from_params(vocab, cfg, params)
    }

    /// Wraps existing parameters, checking every name and shape.
    pub fn from_params(vocab: Vocabulary, cfg: EdConfig, params: ParamSet) -> Result<Self, EdError> {
        cfg.validate()?;
        for (name, shape) in layout(&cfg, &vocab) {
            let found = params.id(&name).map(|id| params.get(id).shape().to_vec());
            if found.as_deref() != Some(&shape[..]) {
                return Err(EdError::BadParameter {
                    name,
                    expected: shape,
                    found: found.unwrap_or_default(),
                });
            }
        }
        let id = |name: &str| params.id(name).expect("checked above");
        let lstm = |prefix: &str| Lstm {
            w: id(&format!("{prefix}.w")),
            b: id(&format!("{prefix}.b")),
        };
        let ids = Ids {
            embed: id("embed"),
            enc: (0..cfg.layers)
                .map(|l| [lstm(&format!("enc.{l}.fwd")), lstm(&format!("enc.{l}.bwd"))])
                .collect(),
            init: (0..cfg.layers)
                .map(|l| (id(&format!("init.{l}.w")), id(&format!("init.{l}.b"))))
                .collect(),
            att_s: id("att.s"),
            att_h: id("att.h"),
            att_b: id("att.b"),
            att_v: id("att.v"),
            dec: (0..cfg.layers).map(|l| lstm(&format!("dec.{l}"))).collect(),
            hid_w: id("out.hid.w"),
            hid_b: id("out.hid.b"),
            out_w: id("out.w"),
            out_b: id("out.b"),
        };
        Ok(Self { cfg, vocab, params, ids })
    }

    pub fn config(&self) -> &EdConfig {
        &self.cfg
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn params(&self) -> &ParamSet {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut ParamSet {
        &mut self.params
    }

    pub fn into_params(self) -> ParamSet {
        self.params
    }

    fn check_input(&self, input: &[usize]) -> Result<(), EdError> {
        if input.is_empty() {
            return Err(EdError::EmptyInput);
        }
        if let Some(&bad) = input.iter().find(|&&s| s >= self.vocab.len()) {
            return Err(EdError::UnknownSymbol(format!("#{bad}")));
        }
        Ok(())
    }

    fn lstm(&self, t: &mut Tape, cell: Lstm, x: Var, (h, c): (Var, Var)) -> Result<(Var, Var), EdError> {
        let n = self.cfg.hidden;
        let w = t.param(cell.w)?;
        let b = t.param(cell.b)?;
        let xh = t.concat(&[x, h])?;
        let z = t.matmul(w, xh)?;
        let z = t.add(z, b)?;
        let i = t.slice(z, 0, n)?;
        let i = t.sigmoid(i);
        let f = t.slice(z, n, n)?;
        let f = t.sigmoid(f);
        let g = t.slice(z, 2 * n, n)?;
        let g = t.tanh(g);
        let o = t.slice(z, 3 * n, n)?;
        let o = t.sigmoid(o);
        let fc = t.mul(f, c)?;
        let ig = t.mul(i, g)?;
        let c = t.add(fc, ig)?;
        let tc = t.tanh(c);
        let h = t.mul(o, tc)?;
        Ok((h, c))
    }

    fn zeros(&self, t: &mut Tape) -> Var {
        t.vector(vec![0.0; self.cfg.hidden])
    }

    pub(super) fn encode_on(
        &self,
        t: &mut Tape,
        input: &[usize],
        mut dropout: Option<&mut Dropout>,
    ) -> Result<Encoded, EdError> {
        self.check_input(input)?;
        let n = input.len();
        let embed = t.param(self.ids.embed)?;
        let mut layer_in = input.iter().map(|&s| t.row(embed, s)).collect::<Result<Vec<_>, _>>()?;
        let mut init = Vec::with_capacity(self.cfg.layers);
        for (l, [fwd, bwd]) in self.ids.enc.iter().enumerate() {
            let mut fo = Vec::with_capacity(n);
            let mut state = (self.zeros(t), self.zeros(t));
            for &x in &layer_in {
                state = self.lstm(t, *fwd, x, state)?;
                fo.push(state.0);
            }
            let mut bo = vec![fo[0]; n];
            let mut state = (self.zeros(t), self.zeros(t));
            for k in (0..n).rev() {
                state = self.lstm(t, *bwd, layer_in[k], state)?;
                bo[k] = state.0;
            }
            let (iw, ib) = self.ids.init[l];
            let (iw, ib) = (t.param(iw)?, t.param(ib)?);
            let ends = t.concat(&[fo[n - 1], bo[0]])?;
            let s0 = t.matmul(iw, ends)?;
            let s0 = t.add(s0, ib)?;
            let s0 = t.tanh(s0);
            init.push((s0, self.zeros(t)));

            let last = l + 1 == self.cfg.layers;
            layer_in = Vec::with_capacity(n);
            for k in 0..n {
                let mut v = t.concat(&[fo[k], bo[k]])?;
                if !last {
                    if let Some(d) = dropout.as_deref_mut() {
                        v = d.apply(t, v)?;
                    }
                }
                layer_in.push(v);
            }
        }
        let states = t.stack(&layer_in)?;
        let ah = t.param(self.ids.att_h)?;
        let ab = t.param(self.ids.att_b)?;
        let projected = t.matmul(states, ah)?;
        let projected = t.add_rows(projected, ab)?;
        Ok(Encoded {
            states,
            projected,
            init: DecState { layers: init },
        })
    }

    /// Attention weights and context for previous decoder state `s_prev`.
    pub(super) fn attend_on(&self, t: &mut Tape, enc: &Encoded, s_prev: Var) -> Result<(Var, Var), EdError> {
        let ws = t.param(self.ids.att_s)?;
        let v = t.param(self.ids.att_v)?;
        let q = t.matmul(ws, s_prev)?;
        let pre = t.add_rows(enc.projected, q)?;
        let act = t.tanh(pre);
        let scores = t.matmul(act, v)?;
        let alphas = t.softmax(scores)?;
        let c = t.weighted_sum(alphas, enc.states)?;
        Ok((alphas, c))
    }

    /// One decoder step from `state` after emitting symbol `prev`; returns
    /// the new state and log-probabilities over the output layer.
    pub(super) fn step_on(
        &self,
        t: &mut Tape,
        enc: &Encoded,
        state: &DecState,
        prev: usize,
        mut dropout: Option<&mut Dropout>,
    ) -> Result<(DecState, Var), EdError> {
        let embed = t.param(self.ids.embed)?;
        let e = t.row(embed, prev)?;
        let (_, c) = self.attend_on(t, enc, state.top())?;
        let mut x = t.concat(&[e, c])?;
        let mut layers = Vec::with_capacity(self.cfg.layers);
        for (l, cell) in self.ids.dec.iter().enumerate() {
            let hc = self.lstm(t, *cell, x, state.layers[l])?;
            layers.push(hc);
            x = hc.0;
            if l + 1 < self.cfg.layers {
                if let Some(d) = dropout.as_deref_mut() {
                    x = d.apply(t, x)?;
                }
            }
        }
        let s = layers.last().expect("at least one layer").0;
        let (hw, hb) = (t.param(self.ids.hid_w)?, t.param(self.ids.hid_b)?);
        let (ow, ob) = (t.param(self.ids.out_w)?, t.param(self.ids.out_b)?);
        let feats = t.concat(&[e, s, c])?;
        let hid = t.matmul(hw, feats)?;
        let hid = t.add(hid, hb)?;
        let hid = t.tanh(hid);
        let logits = t.matmul(ow, hid)?;
        let logits = t.add(logits, ob)?;
        let lp = t.log_softmax(logits)?;
        Ok((DecState { layers }, lp))
    }

    /// Teacher-forced sum of log-probabilities of output-layer indices
    /// `targets`, as a scalar node.
    pub(super) fn score_on(
        &self,
        t: &mut Tape,
        input: &[usize],
        targets: &[usize],
        mut dropout: Option<&mut Dropout>,
    ) -> Result<Var, EdError> {
        let enc = self.encode_on(t, input, dropout.as_deref_mut())?;
        let mut state = enc.init.clone();
        let mut prev = BOS;
        let mut total: Option<Var> = None;
        for &y in targets {
            let (next, lp) = self.step_on(t, &enc, &state, prev, dropout.as_deref_mut())?;
            let p = t.pick(lp, y)?;
            total = Some(match total {
                Some(acc) => t.add(acc, p)?,
                None => p,
            });
            state = next;
            prev = self.vocab.output_symbol(y);
        }
        match total {
            Some(v) => Ok(v),
            None => Ok(t.constant(Tensor::scalar(0.0))?),
        }
    }

    fn targets(&self, output: &[Phoneme], eos: bool) -> Result<Vec<usize>, EdError> {
        let mut out = output.iter().map(|&p| self.vocab.output_index(p)).collect::<Result<Vec<_>, _>>()?;
        if eos {
            out.push(0);
        }
        Ok(out)
    }

    /// The context vectors `h_k`, one per input position.
    pub fn encode(&self, input: &[usize]) -> Result<Vec<Vec<f64>>, EdError> {
        let mut t = Tape::new(&self.params);
        let enc = self.encode_on(&mut t, input, None)?;
        let w = 2 * self.cfg.hidden;
        Ok(t.value(enc.states).chunks(w).map(<[f64]>::to_vec).collect())
    }

    /// Attention weights and context for an arbitrary decoder state and set
    /// of context vectors.
    pub fn attend(&self, s_prev: &[f64], contexts: &[Vec<f64>]) -> Result<(Vec<f64>, Vec<f64>), EdError> {
        if contexts.is_empty() {
            return Err(EdError::EmptyContext);
        }
        let mut t = Tape::new(&self.params);
        let rows = contexts.iter().map(|h| t.vector(h.clone())).collect::<Vec<_>>();
        let states = t.stack(&rows)?;
        let ah = t.param(self.ids.att_h)?;
        let ab = t.param(self.ids.att_b)?;
        let projected = t.matmul(states, ah)?;
        let projected = t.add_rows(projected, ab)?;
        let enc = Encoded {
            states,
            projected,
            init: DecState { layers: Vec::new() },
        };
        let s = t.vector(s_prev.to_vec());
        let (alphas, c) = self.attend_on(&mut t, &enc, s)?;
        Ok((t.value(alphas).to_vec(), t.value(c).to_vec()))
    }

    /// `log p(output ++ EOS | input)`.
    pub fn sequence_log_prob(&self, input: &[usize], output: &[Phoneme]) -> Result<f64, EdError> {
        self.score(input, &self.targets(output, true)?)
    }

    /// Probability mass of all outputs that start with `prefix`.
    pub fn prefix_log_prob(&self, input: &[usize], prefix: &[Phoneme]) -> Result<f64, EdError> {
        self.score(input, &self.targets(prefix, false)?)
    }

    fn score(&self, input: &[usize], targets: &[usize]) -> Result<f64, EdError> {
        let mut t = Tape::new(&self.params);
        let s = self.score_on(&mut t, input, targets, None)?;
        Ok(t.scalar(s)?)
    }

    /// Distribution over the output layer after `prefix`.
    pub fn next_distribution(&self, input: &[usize], prefix: &[Phoneme]) -> Result<Vec<f64>, EdError> {
        let mut t = Tape::new(&self.params);
        let enc = self.encode_on(&mut t, input, None)?;
        let mut state = enc.init.clone();
        let mut prev = BOS;
        let mut lp = None;
        for y in self.targets(prefix, false)?.into_iter().map(Some).chain([None]) {
            let (next, l) = self.step_on(&mut t, &enc, &state, prev, None)?;
            state = next;
            lp = Some(l);
            if let Some(y) = y {
                prev = self.vocab.output_symbol(y);
            }
        }
        let lp = lp.expect("at least one step");
        Ok(t.value(lp).iter().map(|&v| libm::exp(v)).collect())
    }

    /// Negative log-likelihood of `output ++ EOS`, with gradients added into
    /// `grads` scaled by `scale`.
    pub(super) fn nll_grad(
        &self,
        input: &[usize],
        output: &[Phoneme],
        dropout: Option<&mut Dropout>,
        grads: &mut crate::numerics::ParamGrads,
        scale: f64,
    ) -> Result<f64, EdError> {
        let targets = self.targets(output, true)?;
        let mut t = Tape::new(&self.params);
        let s = self.score_on(&mut t, input, &targets, dropout)?;
        let nll = t.scale(s, -1.0);
        t.backward_into(nll, grads, scale)?;
        Ok(t.scalar(nll)?)
    }

    /// Gradient of the negative log-likelihood of one pair with dropout
    /// disabled.
    pub fn nll_gradient(&self, input: &[usize], output: &[Phoneme]) -> Result<(f64, crate::numerics::ParamGrads), EdError> {
        let mut g = crate::numerics::ParamGrads::zeros_like(&self.params);
        let nll = self.nll_grad(input, output, None, &mut g, 1.0)?;
        Ok((nll, g))
    }
}
