//! Reverse-mode automatic differentiation over a linear tape.
//!
//! Nodes are appended in evaluation order, so insertion order is already a
//! topological order and `backward` is a single reverse sweep. Parameters
//! live outside the tape in a [`ParamSet`]; the tape only borrows them, and
//! gradients land in a [`ParamGrads`] of matching shapes.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::mem;

use super::{kernels, NumericsError, Tensor};

/// Handle to a named parameter in a [`ParamSet`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ParamId(u32);

impl ParamId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Named trainable tensors.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ParamSet {
    names: Vec<String>,
    values: Vec<Tensor>,
}

impl ParamSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, name: impl Into<String>, value: Tensor) -> Result<ParamId, NumericsError> {
        let name = name.into();
        if self.names.contains(&name) {
            return Err(NumericsError::DuplicateParam(name));
        }
        self.names.push(name);
        self.values.push(value);
        Ok(ParamId(self.values.len() as u32 - 1))
    }

    pub fn get(&self, id: ParamId) -> &Tensor {
        &self.values[id.index()]
    }

    pub fn get_mut(&mut self, id: ParamId) -> &mut Tensor {
        &mut self.values[id.index()]
    }

    pub fn id(&self, name: &str) -> Option<ParamId> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| ParamId(i as u32))
    }

    pub fn name(&self, id: ParamId) -> &str {
        &self.names[id.index()]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Total number of scalar parameters.
    pub fn size(&self) -> usize {
        self.values.iter().map(Tensor::len).sum()
    }

    pub fn ids(&self) -> impl Iterator<Item = ParamId> {
        (0..self.values.len() as u32).map(ParamId)
    }

    pub fn iter(&self) -> impl Iterator<Item = (ParamId, &str, &Tensor)> {
        self.ids()
            .zip(self.names.iter().zip(&self.values))
            .map(|(id, (n, v))| (id, n.as_str(), v))
    }
}

/// Gradient buffers shaped like a [`ParamSet`].
#[derive(Clone, Debug, PartialEq)]
pub struct ParamGrads {
    grads: Vec<Tensor>,
}

impl ParamGrads {
    pub fn zeros_like(params: &ParamSet) -> Self {
        Self {
            grads: params.values.iter().map(|t| Tensor::zeros(t.shape())).collect(),
        }
    }

    pub fn get(&self, id: ParamId) -> &Tensor {
        &self.grads[id.index()]
    }

    pub fn get_mut(&mut self, id: ParamId) -> &mut Tensor {
        &mut self.grads[id.index()]
    }

    pub fn len(&self) -> usize {
        self.grads.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grads.is_empty()
    }

    pub fn clear(&mut self) {
        for g in &mut self.grads {
            g.data_mut().fill(0.0);
        }
    }

    pub fn scale(&mut self, s: f64) {
        for g in &mut self.grads {
            g.data_mut().iter_mut().for_each(|v| *v *= s);
        }
    }

    pub fn is_finite(&self) -> bool {
        self.grads.iter().all(Tensor::is_finite)
    }
}

/// Handle to a node on a [`Tape`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(u32);

impl Var {
    fn idx(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Dims {
    rank: u8,
    d: [usize; 2],
}

impl Dims {
    const SCALAR: Self = Self { rank: 0, d: [1, 1] };

    fn vector(n: usize) -> Self {
        Self { rank: 1, d: [n, 1] }
    }

    fn matrix(r: usize, c: usize) -> Self {
        Self { rank: 2, d: [r, c] }
    }

    fn of(shape: &[usize]) -> Option<Self> {
        match *shape {
            [] => Some(Self::SCALAR),
            [n] => Some(Self::vector(n)),
            [r, c] => Some(Self::matrix(r, c)),
            _ => None,
        }
    }

    fn len(self) -> usize {
        self.d[0] * self.d[1]
    }

    fn to_vec(self) -> Vec<usize> {
        self.d[..usize::from(self.rank)].to_vec()
    }
}

#[derive(Clone, Debug)]
enum Op {
    Constant,
    Param(ParamId),
    MatMul(Var, Var),
    Add(Var, Var),
    Sub(Var, Var),
    Mul(Var, Var),
    Scale(Var, f64),
    Tanh(Var),
    Sigmoid(Var),
    Softmax(Var),
    LogSoftmax(Var),
    Concat(Vec<Var>),
    Slice(Var, usize),
    Row(Var, usize),
    Pick(Var, usize),
    Sum(Var),
    Dot(Var, Var),
    Stack(Vec<Var>),
    WeightedSum(Var, Var),
    AddRows(Var, Var),
}

#[derive(Clone, Debug)]
struct Node {
    op: Op,
    dims: Dims,
    /// Empty for parameter nodes, whose value lives in the [`ParamSet`].
    value: Vec<f64>,
}

/// Gradients of a scalar with respect to every parameter and tape node.
#[derive(Clone, Debug)]
pub struct Gradients {
    params: ParamGrads,
    nodes: Vec<Vec<f64>>,
    dims: Vec<Dims>,
}

impl Gradients {
    pub fn param(&self, id: ParamId) -> &Tensor {
        self.params.get(id)
    }

    pub fn params(&self) -> &ParamGrads {
        &self.params
    }

    pub fn into_params(self) -> ParamGrads {
        self.params
    }

    /// Gradient with respect to a tape node; zeros if the node does not
    /// influence the loss.
    pub fn var(&self, v: Var) -> Tensor {
        let dims = self.dims[v.idx()];
        let g = &self.nodes[v.idx()];
        let data = if g.is_empty() {
            vec![0.0; dims.len()]
        } else {
            g.clone()
        };
        Tensor::new(dims.to_vec(), data).expect("gradient matches node shape")
    }
}

/// A single-use record of primitive operations.
pub struct Tape<'p> {
    params: &'p ParamSet,
    nodes: Vec<Node>,
    param_vars: Vec<Option<Var>>,
}

fn mismatch(op: &'static str, left: Dims, right: Dims) -> NumericsError {
    NumericsError::ShapeMismatch {
        op,
        left: left.to_vec(),
        right: right.to_vec(),
    }
}

impl<'p> Tape<'p> {
    pub fn new(params: &'p ParamSet) -> Self {
        Self {
            params,
            nodes: Vec::with_capacity(1024),
            param_vars: vec![None; params.len()],
        }
    }

    pub fn params(&self) -> &'p ParamSet {
        self.params
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, op: Op, dims: Dims, value: Vec<f64>) -> Var {
        debug_assert!(
            matches!(op, Op::Param(_)) || value.len() == dims.len(),
            "node value does not match its shape"
        );
        debug_assert!(value.iter().all(|v| v.is_finite()), "non-finite value in {op:?}");
        self.nodes.push(Node { op, dims, value });
        Var(self.nodes.len() as u32 - 1)
    }

    fn dims(&self, v: Var) -> Dims {
        self.nodes[v.idx()].dims
    }

    /// Forward value of a node, row-major.
    pub fn value(&self, v: Var) -> &[f64] {
        let node = &self.nodes[v.idx()];
        match node.op {
            Op::Param(id) => self.params.get(id).data(),
            _ => &node.value,
        }
    }

    pub fn shape(&self, v: Var) -> Vec<usize> {
        self.dims(v).to_vec()
    }

    pub fn tensor(&self, v: Var) -> Tensor {
        Tensor::new(self.shape(v), self.value(v).to_vec()).expect("node shape is consistent")
    }

    /// The value of a one-element node.
    pub fn scalar(&self, v: Var) -> Result<f64, NumericsError> {
        let value = self.value(v);
        if value.len() != 1 {
            return Err(NumericsError::NotScalar(self.shape(v)));
        }
        Ok(value[0])
    }

    /// A leaf that receives gradients but is not a parameter.
    pub fn constant(&mut self, t: Tensor) -> Result<Var, NumericsError> {
        let dims = Dims::of(t.shape()).ok_or_else(|| NumericsError::Rank(t.shape().to_vec()))?;
        Ok(self.push(Op::Constant, dims, t.into_data()))
    }

    pub fn vector(&mut self, data: Vec<f64>) -> Var {
        let dims = Dims::vector(data.len());
        self.push(Op::Constant, dims, data)
    }

    /// Leaf for a parameter; repeated calls return the same node.
    pub fn param(&mut self, id: ParamId) -> Result<Var, NumericsError> {
        if let Some(v) = self.param_vars[id.index()] {
            return Ok(v);
        }
        let t = self.params.get(id);
        let dims = Dims::of(t.shape()).ok_or_else(|| NumericsError::Rank(t.shape().to_vec()))?;
        let v = self.push(Op::Param(id), dims, Vec::new());
        self.param_vars[id.index()] = Some(v);
        Ok(v)
    }

    /// `[m, k] x [k] -> [m]` or `[m, k] x [k, n] -> [m, n]`.
    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var, NumericsError> {
        let (da, db) = (self.dims(a), self.dims(b));
        if da.rank != 2 || db.rank == 0 || da.d[1] != db.d[0] {
            return Err(mismatch("matmul", da, db));
        }
        let (m, k) = (da.d[0], da.d[1]);
        let (out, dims) = if db.rank == 1 {
            let mut out = vec![0.0; m];
            kernels::matvec(self.value(a), m, k, self.value(b), &mut out);
            (out, Dims::vector(m))
        } else {
            let n = db.d[1];
            let mut out = vec![0.0; m * n];
            kernels::matmul(self.value(a), self.value(b), m, k, n, &mut out);
            (out, Dims::matrix(m, n))
        };
        Ok(self.push(Op::MatMul(a, b), dims, out))
    }

    fn zip(&mut self, a: Var, b: Var, name: &'static str, op: Op, f: impl Fn(f64, f64) -> f64) -> Result<Var, NumericsError> {
        let (da, db) = (self.dims(a), self.dims(b));
        if da != db {
            return Err(mismatch(name, da, db));
        }
        let out = self.value(a).iter().zip(self.value(b)).map(|(&x, &y)| f(x, y)).collect();
        Ok(self.push(op, da, out))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var, NumericsError> {
        self.zip(a, b, "add", Op::Add(a, b), |x, y| x + y)
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var, NumericsError> {
        self.zip(a, b, "sub", Op::Sub(a, b), |x, y| x - y)
    }

    /// Elementwise product.
    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var, NumericsError> {
        self.zip(a, b, "mul", Op::Mul(a, b), |x, y| x * y)
    }

    pub fn scale(&mut self, a: Var, c: f64) -> Var {
        let out = self.value(a).iter().map(|&x| x * c).collect();
        let dims = self.dims(a);
        self.push(Op::Scale(a, c), dims, out)
    }

    pub fn tanh(&mut self, a: Var) -> Var {
        let out = self.value(a).iter().map(|&x| libm::tanh(x)).collect();
        let dims = self.dims(a);
        self.push(Op::Tanh(a), dims, out)
    }

    pub fn sigmoid(&mut self, a: Var) -> Var {
        let out = self.value(a).iter().map(|&x| kernels::sigmoid(x)).collect();
        let dims = self.dims(a);
        self.push(Op::Sigmoid(a), dims, out)
    }

    fn vector_dims(&self, a: Var, op: &'static str) -> Result<usize, NumericsError> {
        let d = self.dims(a);
        if d.rank != 1 {
            return Err(mismatch(op, d, Dims::SCALAR));
        }
        Ok(d.d[0])
    }

    pub fn softmax(&mut self, a: Var) -> Result<Var, NumericsError> {
        let n = self.vector_dims(a, "softmax")?;
        let mut out = self.value(a).to_vec();
        kernels::softmax_in_place(&mut out);
        Ok(self.push(Op::Softmax(a), Dims::vector(n), out))
    }

    pub fn log_softmax(&mut self, a: Var) -> Result<Var, NumericsError> {
        let n = self.vector_dims(a, "log_softmax")?;
        let lse = kernels::log_sum_exp(self.value(a));
        let out = self.value(a).iter().map(|&x| x - lse).collect();
        Ok(self.push(Op::LogSoftmax(a), Dims::vector(n), out))
    }

    /// Concatenates vectors.
    pub fn concat(&mut self, parts: &[Var]) -> Result<Var, NumericsError> {
        let mut out = Vec::new();
        for &p in parts {
            self.vector_dims(p, "concat")?;
            out.extend_from_slice(self.value(p));
        }
        let n = out.len();
        Ok(self.push(Op::Concat(parts.to_vec()), Dims::vector(n), out))
    }

    pub fn slice(&mut self, a: Var, start: usize, len: usize) -> Result<Var, NumericsError> {
        let n = self.vector_dims(a, "slice")?;
        if start + len > n {
            return Err(mismatch("slice", Dims::vector(n), Dims::matrix(start, len)));
        }
        let out = self.value(a)[start..start + len].to_vec();
        Ok(self.push(Op::Slice(a, start), Dims::vector(len), out))
    }

    /// Row `i` of a matrix, as a vector (embedding lookup).
    pub fn row(&mut self, m: Var, i: usize) -> Result<Var, NumericsError> {
        let d = self.dims(m);
        if d.rank != 2 || i >= d.d[0] {
            return Err(mismatch("row", d, Dims::vector(i)));
        }
        let c = d.d[1];
        let out = self.value(m)[i * c..(i + 1) * c].to_vec();
        Ok(self.push(Op::Row(m, i), Dims::vector(c), out))
    }

    /// Entry `i` of a vector, as a scalar.
    pub fn pick(&mut self, a: Var, i: usize) -> Result<Var, NumericsError> {
        let n = self.vector_dims(a, "pick")?;
        if i >= n {
            return Err(mismatch("pick", Dims::vector(n), Dims::vector(i)));
        }
        let out = vec![self.value(a)[i]];
        Ok(self.push(Op::Pick(a, i), Dims::SCALAR, out))
    }

    pub fn sum(&mut self, a: Var) -> Var {
        let s = self.value(a).iter().sum();
        self.push(Op::Sum(a), Dims::SCALAR, vec![s])
    }

    pub fn dot(&mut self, a: Var, b: Var) -> Result<Var, NumericsError> {
        let (da, db) = (self.dims(a), self.dims(b));
        if da.rank != 1 || da != db {
            return Err(mismatch("dot", da, db));
        }
        let s = kernels::dot(self.value(a), self.value(b));
        Ok(self.push(Op::Dot(a, b), Dims::SCALAR, vec![s]))
    }

    /// Stacks equal-length vectors as the rows of a matrix.
    pub fn stack(&mut self, rows: &[Var]) -> Result<Var, NumericsError> {
        let first = rows.first().ok_or(NumericsError::Empty("stack"))?;
        let n = self.vector_dims(*first, "stack")?;
        let mut out = Vec::with_capacity(n * rows.len());
        for &r in rows {
            let d = self.dims(r);
            if d != Dims::vector(n) {
                return Err(mismatch("stack", Dims::vector(n), d));
            }
            out.extend_from_slice(self.value(r));
        }
        Ok(self.push(Op::Stack(rows.to_vec()), Dims::matrix(rows.len(), n), out))
    }

    /// `sum_k weights[k] * rows[k, :]` for `weights: [k]`, `rows: [k, n]`.
    pub fn weighted_sum(&mut self, weights: Var, rows: Var) -> Result<Var, NumericsError> {
        let (dw, dr) = (self.dims(weights), self.dims(rows));
        if dw.rank != 1 || dr.rank != 2 || dw.d[0] != dr.d[0] {
            return Err(mismatch("weighted_sum", dw, dr));
        }
        let n = dr.d[1];
        let mut out = vec![0.0; n];
        let (w, m) = (self.value(weights), self.value(rows));
        for (k, &wk) in w.iter().enumerate() {
            kernels::axpy(wk, &m[k * n..(k + 1) * n], &mut out);
        }
        Ok(self.push(Op::WeightedSum(weights, rows), Dims::vector(n), out))
    }

    /// Adds vector `v: [n]` to every row of `m: [k, n]`.
    pub fn add_rows(&mut self, m: Var, v: Var) -> Result<Var, NumericsError> {
        let (dm, dv) = (self.dims(m), self.dims(v));
        if dm.rank != 2 || dv.rank != 1 || dm.d[1] != dv.d[0] {
            return Err(mismatch("add_rows", dm, dv));
        }
        let n = dv.d[0];
        let mut out = self.value(m).to_vec();
        let vv = self.value(v);
        for row in out.chunks_exact_mut(n) {
            kernels::axpy(1.0, vv, row);
        }
        Ok(self.push(Op::AddRows(m, v), dm, out))
    }

    /// Reverse sweep from `loss`, returning gradients for every parameter and
    /// node.
    pub fn backward(&self, loss: Var) -> Result<Gradients, NumericsError> {
        let nodes = self.sweep(loss)?;
        let mut params = ParamGrads::zeros_like(self.params);
        self.collect_params(&nodes, &mut params, 1.0);
        Ok(Gradients {
            params,
            nodes,
            dims: self.nodes.iter().map(|n| n.dims).collect(),
        })
    }

    /// Reverse sweep from `loss`, adding `scale * d loss / d param` into
    /// `grads`.
    pub fn backward_into(&self, loss: Var, grads: &mut ParamGrads, scale: f64) -> Result<(), NumericsError> {
        if grads.len() != self.params.len() {
            return Err(NumericsError::ShapeMismatch {
                op: "backward",
                left: vec![grads.len()],
                right: vec![self.params.len()],
            });
        }
        let nodes = self.sweep(loss)?;
        self.collect_params(&nodes, grads, scale);
        Ok(())
    }

    fn collect_params(&self, nodes: &[Vec<f64>], grads: &mut ParamGrads, scale: f64) {
        for (i, node) in self.nodes.iter().enumerate() {
            if let Op::Param(id) = node.op {
                if !nodes[i].is_empty() {
                    kernels::axpy(scale, &nodes[i], grads.get_mut(id).data_mut());
                }
            }
        }
    }

    fn sweep(&self, loss: Var) -> Result<Vec<Vec<f64>>, NumericsError> {
        let dl = self.dims(loss);
        if dl.len() != 1 {
            return Err(NumericsError::NotScalar(dl.to_vec()));
        }
        let mut grads: Vec<Vec<f64>> = vec![Vec::new(); self.nodes.len()];
        grads[loss.idx()] = vec![1.0];

        for i in (0..=loss.idx()).rev() {
            if grads[i].is_empty() {
                continue;
            }
            let node = &self.nodes[i];
            let g = mem::take(&mut grads[i]);
            let y = &node.value;
            match &node.op {
                Op::Constant | Op::Param(_) => {
                    grads[i] = g;
                    continue;
                }
                Op::Add(a, b) => {
                    kernels::axpy(1.0, &g, self.buf(&mut grads, *a));
                    kernels::axpy(1.0, &g, self.buf(&mut grads, *b));
                }
                Op::Sub(a, b) => {
                    kernels::axpy(1.0, &g, self.buf(&mut grads, *a));
                    kernels::axpy(-1.0, &g, self.buf(&mut grads, *b));
                }
                Op::Mul(a, b) => {
                    let (va, vb) = (self.value(*a), self.value(*b));
                    let ga = self.buf(&mut grads, *a);
                    for ((d, gi), bi) in ga.iter_mut().zip(&g).zip(vb) {
                        *d += gi * bi;
                    }
                    let gb = self.buf(&mut grads, *b);
                    for ((d, gi), ai) in gb.iter_mut().zip(&g).zip(va) {
                        *d += gi * ai;
                    }
                }
                Op::Scale(a, c) => kernels::axpy(*c, &g, self.buf(&mut grads, *a)),
                Op::Tanh(a) => {
                    let ga = self.buf(&mut grads, *a);
                    for ((d, gi), yi) in ga.iter_mut().zip(&g).zip(y) {
                        *d += gi * (1.0 - yi * yi);
                    }
                }
                Op::Sigmoid(a) => {
                    let ga = self.buf(&mut grads, *a);
                    for ((d, gi), yi) in ga.iter_mut().zip(&g).zip(y) {
                        *d += gi * yi * (1.0 - yi);
                    }
                }
                Op::Softmax(a) => {
                    let gy = kernels::dot(&g, y);
                    let ga = self.buf(&mut grads, *a);
                    for ((d, gi), yi) in ga.iter_mut().zip(&g).zip(y) {
                        *d += yi * (gi - gy);
                    }
                }
                Op::LogSoftmax(a) => {
                    let total: f64 = g.iter().sum();
                    let ga = self.buf(&mut grads, *a);
                    for ((d, gi), yi) in ga.iter_mut().zip(&g).zip(y) {
                        *d += gi - libm::exp(*yi) * total;
                    }
                }
                Op::Concat(parts) => {
                    let mut off = 0;
                    for &p in parts {
                        let n = self.dims(p).len();
                        kernels::axpy(1.0, &g[off..off + n], self.buf(&mut grads, p));
                        off += n;
                    }
                }
                Op::Slice(a, start) => {
                    let ga = self.buf(&mut grads, *a);
                    kernels::axpy(1.0, &g, &mut ga[*start..*start + g.len()]);
                }
                Op::Row(m, r) => {
                    let c = g.len();
                    let gm = self.buf(&mut grads, *m);
                    kernels::axpy(1.0, &g, &mut gm[r * c..(r + 1) * c]);
                }
                Op::Pick(a, k) => self.buf(&mut grads, *a)[*k] += g[0],
                Op::Sum(a) => self.buf(&mut grads, *a).iter_mut().for_each(|d| *d += g[0]),
                Op::Dot(a, b) => {
                    let (va, vb) = (self.value(*a), self.value(*b));
                    kernels::axpy(g[0], vb, self.buf(&mut grads, *a));
                    kernels::axpy(g[0], va, self.buf(&mut grads, *b));
                }
                Op::Stack(rows) => {
                    let n = self.dims(rows[0]).len();
                    for (k, &r) in rows.iter().enumerate() {
                        kernels::axpy(1.0, &g[k * n..(k + 1) * n], self.buf(&mut grads, r));
                    }
                }
                Op::WeightedSum(w, m) => {
                    let (vw, vm) = (self.value(*w), self.value(*m));
                    let n = g.len();
                    let gw = self.buf(&mut grads, *w);
                    for (k, d) in gw.iter_mut().enumerate() {
                        *d += kernels::dot(&g, &vm[k * n..(k + 1) * n]);
                    }
                    let gm = self.buf(&mut grads, *m);
                    for (k, &wk) in vw.iter().enumerate() {
                        kernels::axpy(wk, &g, &mut gm[k * n..(k + 1) * n]);
                    }
                }
                Op::AddRows(m, v) => {
                    kernels::axpy(1.0, &g, self.buf(&mut grads, *m));
                    let gv = self.buf(&mut grads, *v);
                    let n = gv.len();
                    for row in g.chunks_exact(n) {
                        kernels::axpy(1.0, row, gv);
                    }
                }
                Op::MatMul(a, b) => self.matmul_backward(&mut grads, *a, *b, &g),
            }
        }
        Ok(grads)
    }

    fn buf<'g>(&self, grads: &'g mut [Vec<f64>], v: Var) -> &'g mut [f64] {
        let slot = &mut grads[v.idx()];
        if slot.is_empty() {
            *slot = vec![0.0; self.dims(v).len()];
        }
        slot
    }

    fn matmul_backward(&self, grads: &mut [Vec<f64>], a: Var, b: Var, g: &[f64]) {
        let (da, db) = (self.dims(a), self.dims(b));
        let (m, k) = (da.d[0], da.d[1]);
        let n = if db.rank == 1 { 1 } else { db.d[1] };
        let (va, vb) = (self.value(a), self.value(b));
        // Take both buffers out so they can be updated in one pass.
        self.buf(grads, a);
        let mut ga = mem::take(&mut grads[a.idx()]);
        let mut gb = if a == b {
            vec![0.0; db.len()]
        } else {
            self.buf(grads, b);
            mem::take(&mut grads[b.idx()])
        };
        if n == 1 {
            for i in 0..m {
                let gi = g[i];
                if gi == 0.0 {
                    continue;
                }
                let arow = &va[i * k..(i + 1) * k];
                let garow = &mut ga[i * k..(i + 1) * k];
                for j in 0..k {
                    garow[j] += gi * vb[j];
                    gb[j] += gi * arow[j];
                }
            }
        } else {
            for i in 0..m {
                let grow = &g[i * n..(i + 1) * n];
                for p in 0..k {
                    // dA[i, p] += g[i, :] . B[p, :]
                    ga[i * k + p] += kernels::dot(grow, &vb[p * n..(p + 1) * n]);
                    // dB[p, :] += A[i, p] g[i, :]
                    kernels::axpy(va[i * k + p], grow, &mut gb[p * n..(p + 1) * n]);
                }
            }
        }
        if a == b {
            kernels::axpy(1.0, &gb, &mut ga);
            grads[a.idx()] = ga;
        } else {
            grads[a.idx()] = ga;
            grads[b.idx()] = gb;
        }
    }
}
