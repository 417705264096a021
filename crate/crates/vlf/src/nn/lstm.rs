use super::params::ModelParams;

pub const GATE_F: usize = 0;
pub const GATE_I: usize = 1;
pub const GATE_O: usize = 2;
pub const GATE_G: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct LstmState {
    pub h: Vec<f64>,
    pub c: Vec<f64>,
}

impl LstmState {
    pub fn zeros(hidden: usize) -> Self {
        LstmState {
            h: vec![0.0; hidden],
            c: vec![0.0; hidden],
        }
    }
}

/// Gate activations of one step, kept for backpropagation.
#[derive(Debug, Clone)]
pub struct GateActs {
    pub f: Vec<f64>,
    pub i: Vec<f64>,
    pub o: Vec<f64>,
    pub g: Vec<f64>,
}

#[inline]
pub(crate) fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// One LSTM step:
///   f = sig(Wf x + Rf h + bf)     i = sig(Wi x + Ri h + bi)
///   o = sig(Wo x + Ro h + bo)     g = tanh(Wg x + Rg h + bg)
///   c' = f*c + i*g                h' = o*tanh(c')
pub fn lstm_cell_forward(
    x: &[f64],
    prev: &LstmState,
    params: &ModelParams,
) -> (LstmState, GateActs) {
    let hidden = params.dims.hidden;
    assert_eq!(x.len(), params.dims.input, "input width mismatch");
    assert_eq!(prev.h.len(), hidden);

    let mut pre = [
        params.gates[GATE_F].b.clone(),
        params.gates[GATE_I].b.clone(),
        params.gates[GATE_O].b.clone(),
        params.gates[GATE_G].b.clone(),
    ];
    for (gate, z) in params.gates.iter().zip(pre.iter_mut()) {
        gate.w.matvec_acc(x, z);
        gate.r.matvec_acc(&prev.h, z);
    }
    let [zf, zi, zo, zg] = pre;
    let f: Vec<f64> = zf.into_iter().map(sigmoid).collect();
    let i: Vec<f64> = zi.into_iter().map(sigmoid).collect();
    let o: Vec<f64> = zo.into_iter().map(sigmoid).collect();
    let g: Vec<f64> = zg.into_iter().map(f64::tanh).collect();

    let mut c = vec![0.0; hidden];
    let mut h = vec![0.0; hidden];
    for j in 0..hidden {
        c[j] = f[j] * prev.c[j] + i[j] * g[j];
        h[j] = o[j] * c[j].tanh();
    }
    (LstmState { h, c }, GateActs { f, i, o, g })
}
