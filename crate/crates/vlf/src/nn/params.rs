use super::NnError;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Dense row-major matrix. Small enough a hand-rolled type beats pulling
/// a linear algebra stack into the training hot path.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn at_mut(&mut self, r: usize, c: usize) -> &mut f64 {
        &mut self.data[r * self.cols + c]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// out += A x
    pub fn matvec_acc(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(out.len(), self.rows);
        for (row, o) in self.data.chunks_exact(self.cols).zip(out.iter_mut()) {
            let mut acc = 0.0;
            for (a, b) in row.iter().zip(x.iter()) {
                acc += a * b;
            }
            *o += acc;
        }
    }

    /// out += A^T y
    pub fn tr_matvec_acc(&self, y: &[f64], out: &mut [f64]) {
        debug_assert_eq!(y.len(), self.rows);
        debug_assert_eq!(out.len(), self.cols);
        for (row, yi) in self.data.chunks_exact(self.cols).zip(y.iter()) {
            if *yi == 0.0 {
                continue;
            }
            for (a, o) in row.iter().zip(out.iter_mut()) {
                *o += a * yi;
            }
        }
    }

    /// A += y x^T
    pub fn add_outer(&mut self, y: &[f64], x: &[f64]) {
        debug_assert_eq!(y.len(), self.rows);
        debug_assert_eq!(x.len(), self.cols);
        for (row, yi) in self.data.chunks_exact_mut(self.cols).zip(y.iter()) {
            if *yi == 0.0 {
                continue;
            }
            for (a, xj) in row.iter_mut().zip(x.iter()) {
                *a += yi * xj;
            }
        }
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }
}

/// Model shape. `input` is the transition feature width, `hidden` the LSTM
/// width, `embed` the vessel-type embedding width, `dense` the width of the
/// ReLU layer, `output` the displacement dimensionality, `vocab` the number
/// of distinct vessel-type ids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelDims {
    pub input: usize,
    pub hidden: usize,
    pub embed: usize,
    pub dense: usize,
    pub output: usize,
    pub vocab: usize,
}

impl ModelDims {
    /// Production shape: 6 -> LSTM(350) -> concat embed(6) -> dense(150) -> 2.
    pub fn standard(vocab: usize) -> Self {
        ModelDims {
            input: 6,
            hidden: 350,
            embed: 6,
            dense: 150,
            output: 2,
            vocab,
        }
    }

    pub fn validate(&self) -> Result<(), NnError> {
        let all = [self.input, self.hidden, self.embed, self.dense, self.output, self.vocab];
        if all.iter().any(|&d| d == 0) {
            return Err(NnError::DimMismatch(format!("zero dimension in {self:?}")));
        }
        Ok(())
    }
}

/// Closed-form parameter count for a shape.
pub fn param_count(d: &ModelDims) -> usize {
    4 * (d.hidden * d.input + d.hidden * d.hidden + d.hidden)
        + d.vocab * d.embed
        + d.dense * (d.hidden + d.embed)
        + d.dense
        + d.output * d.dense
        + d.output
}

pub const GATE_NAMES: [&str; 4] = ["forget", "input", "output", "candidate"];

/// One LSTM gate: input weights, recurrent weights, bias.
#[derive(Debug, Clone, PartialEq)]
pub struct GateParams {
    pub w: Mat,
    pub r: Mat,
    pub b: Vec<f64>,
}

/// All trainable parameters. The same struct doubles as gradient storage.
/// Block order (gates forget/input/output/candidate, each w then r then b;
/// embedding; dense w, b; output w, b) is the canonical order used by the
/// optimizer, the aggregator, and the serializer.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub dims: ModelDims,
    pub gates: [GateParams; 4],
    pub embedding: Mat,
    pub dense_w: Mat,
    pub dense_b: Vec<f64>,
    pub out_w: Mat,
    pub out_b: Vec<f64>,
}

impl ModelParams {
    pub fn zeros(dims: ModelDims) -> Self {
        let gate = || GateParams {
            w: Mat::zeros(dims.hidden, dims.input),
            r: Mat::zeros(dims.hidden, dims.hidden),
            b: vec![0.0; dims.hidden],
        };
        ModelParams {
            dims,
            gates: [gate(), gate(), gate(), gate()],
            embedding: Mat::zeros(dims.vocab, dims.embed),
            dense_w: Mat::zeros(dims.dense, dims.hidden + dims.embed),
            dense_b: vec![0.0; dims.dense],
            out_w: Mat::zeros(dims.output, dims.dense),
            out_b: vec![0.0; dims.output],
        }
    }

    /// Seeded uniform init in +-1/sqrt(fan_in) per block, where fan_in is
    /// the width feeding the block's matmul (embedding rows use the embed
    /// width). Values are quantized to f32 so a freshly initialized model
    /// survives the 32-bit wire format bit-for-bit.
    pub fn init(dims: ModelDims, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut p = ModelParams::zeros(dims);
        let fill = |slice: &mut [f64], fan_in: usize, rng: &mut ChaCha8Rng| {
            let bound = 1.0 / (fan_in as f64).sqrt();
            for v in slice {
                *v = (rng.gen_range(-bound..=bound) as f32) as f64;
            }
        };
        for gate in p.gates.iter_mut() {
            fill(gate.w.as_mut_slice(), dims.input, &mut rng);
            fill(gate.r.as_mut_slice(), dims.hidden, &mut rng);
            fill(&mut gate.b, dims.hidden, &mut rng);
        }
        fill(p.embedding.as_mut_slice(), dims.embed, &mut rng);
        fill(p.dense_w.as_mut_slice(), dims.hidden + dims.embed, &mut rng);
        fill(&mut p.dense_b, dims.hidden + dims.embed, &mut rng);
        fill(p.out_w.as_mut_slice(), dims.dense, &mut rng);
        fill(&mut p.out_b, dims.dense, &mut rng);
        p
    }

    pub fn param_count(&self) -> usize {
        param_count(&self.dims)
    }

    /// Parameter blocks in canonical order.
    pub fn block_slices(&self) -> Vec<&[f64]> {
        let mut out: Vec<&[f64]> = Vec::with_capacity(17);
        for gate in &self.gates {
            out.push(gate.w.as_slice());
            out.push(gate.r.as_slice());
            out.push(&gate.b);
        }
        out.push(self.embedding.as_slice());
        out.push(self.dense_w.as_slice());
        out.push(&self.dense_b);
        out.push(self.out_w.as_slice());
        out.push(&self.out_b);
        out
    }

    pub fn block_slices_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out: Vec<&mut [f64]> = Vec::with_capacity(17);
        for gate in self.gates.iter_mut() {
            out.push(gate.w.as_mut_slice());
            out.push(gate.r.as_mut_slice());
            out.push(&mut gate.b);
        }
        out.push(self.embedding.as_mut_slice());
        out.push(self.dense_w.as_mut_slice());
        out.push(&mut self.dense_b);
        out.push(self.out_w.as_mut_slice());
        out.push(&mut self.out_b);
        out
    }

    pub fn same_dims(&self, other: &ModelParams) -> bool {
        self.dims == other.dims
    }

    pub fn is_finite(&self) -> bool {
        self.block_slices()
            .iter()
            .all(|b| b.iter().all(|v| v.is_finite()))
    }
}

/// Euclidean distance between two parameter sets; the client-drift metric.
pub fn l2_distance(a: &ModelParams, b: &ModelParams) -> Result<f64, NnError> {
    if !a.same_dims(b) {
        return Err(NnError::DimMismatch(format!("{:?} vs {:?}", a.dims, b.dims)));
    }
    let mut acc = 0.0;
    for (ba, bb) in a.block_slices().iter().zip(b.block_slices().iter()) {
        for (x, y) in ba.iter().zip(bb.iter()) {
            let d = x - y;
            acc += d * d;
        }
    }
    Ok(acc.sqrt())
}
