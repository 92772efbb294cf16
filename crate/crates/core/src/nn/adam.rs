use serde::{Deserialize, Serialize};

use super::NetParams;
use crate::{Error, Result};

/// Adam moment estimates with bias correction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub m: NetParams,
    pub v: NetParams,
    pub t: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl AdamState {
    pub fn new(params: &NetParams) -> Self {
        AdamState {
            m: params.zeros_like(),
            v: params.zeros_like(),
            t: 0,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }

    /// One update of `params` against `grads` with step size `lr`.
    pub fn step(&mut self, params: &mut NetParams, grads: &NetParams, lr: f64) -> Result<()> {
        if params.shapes() != grads.shapes() || params.shapes() != self.m.shapes() {
            return Err(Error::ShapeMismatch {
                expected: self.m.len(),
                actual: grads.len(),
            });
        }
        self.t += 1;
        let (b1, b2, eps) = (self.beta1, self.beta2, self.epsilon);
        let c1 = 1.0 - b1.powi(self.t as i32);
        let c2 = 1.0 - b2.powi(self.t as i32);
        let slices = params
            .slices_mut()
            .zip(grads.slices())
            .zip(self.m.slices_mut().zip(self.v.slices_mut()));
        for ((p, g), (m, v)) in slices {
            for i in 0..p.len() {
                let gi = g[i];
                m[i] = b1 * m[i] + (1.0 - b1) * gi;
                v[i] = b2 * v[i] + (1.0 - b2) * gi * gi;
                let m_hat = m[i] / c1;
                let v_hat = v[i] / c2;
                p[i] -= lr * m_hat / (v_hat.sqrt() + eps);
            }
        }
        Ok(())
    }
}
