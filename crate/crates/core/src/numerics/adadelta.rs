use alloc::vec::Vec;

use super::{NumericsError, ParamGrads, ParamSet, Tensor};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdadeltaConfig {
    pub lr: f64,
    pub rho: f64,
    pub eps: f64,
}

impl Default for AdadeltaConfig {
    fn default() -> Self {
        Self {
            lr: 1.0,
            rho: 0.95,
            eps: 1e-6,
        }
    }
}

/// Running averages `E[g^2]` and `E[dx^2]` for one tensor.
#[derive(Clone, Debug, PartialEq)]
pub struct AdadeltaState {
    pub sq_grad: Tensor,
    pub sq_delta: Tensor,
}

impl AdadeltaState {
    pub fn zeros_like(param: &Tensor) -> Self {
        Self {
            sq_grad: Tensor::zeros(param.shape()),
            sq_delta: Tensor::zeros(param.shape()),
        }
    }
}

/// One Adadelta update of `param` in place.
///
/// ```text
/// E[g²]  = rho E[g²]  + (1 - rho) g²
/// dx     = -sqrt(E[dx²] + eps) / sqrt(E[g²] + eps) * g
/// E[dx²] = rho E[dx²] + (1 - rho) dx²
/// x     += lr dx
/// ```
pub fn adadelta_step(
    param: &mut Tensor,
    grad: &Tensor,
    state: &mut AdadeltaState,
    cfg: AdadeltaConfig,
) -> Result<(), NumericsError> {
    for other in [grad, &state.sq_grad, &state.sq_delta] {
        if other.shape() != param.shape() {
            return Err(NumericsError::ShapeMismatch {
                op: "adadelta_step",
                left: param.shape().to_vec(),
                right: other.shape().to_vec(),
            });
        }
    }
    let AdadeltaConfig { lr, rho, eps } = cfg;
    let eg = state.sq_grad.data_mut();
    let ed = state.sq_delta.data_mut();
    for (((x, &g), eg), ed) in param.data_mut().iter_mut().zip(grad.data()).zip(eg).zip(ed) {
        *eg = rho * *eg + (1.0 - rho) * g * g;
        let dx = -libm::sqrt(*ed + eps) / libm::sqrt(*eg + eps) * g;
        *ed = rho * *ed + (1.0 - rho) * dx * dx;
        *x += lr * dx;
    }
    Ok(())
}

/// Adadelta over a whole [`ParamSet`].
#[derive(Clone, Debug, PartialEq)]
pub struct Adadelta {
    cfg: AdadeltaConfig,
    states: Vec<AdadeltaState>,
}

impl Adadelta {
    pub fn new(params: &ParamSet, cfg: AdadeltaConfig) -> Self {
        Self {
            cfg,
            states: params.iter().map(|(_, _, t)| AdadeltaState::zeros_like(t)).collect(),
        }
    }

    pub fn config(&self) -> AdadeltaConfig {
        self.cfg
    }

    pub fn step(&mut self, params: &mut ParamSet, grads: &ParamGrads) -> Result<(), NumericsError> {
        if grads.len() != params.len() || self.states.len() != params.len() {
            return Err(NumericsError::ShapeMismatch {
                op: "adadelta",
                left: alloc::vec![params.len()],
                right: alloc::vec![grads.len()],
            });
        }
        let ids: Vec<_> = params.ids().collect();
        for id in ids {
            adadelta_step(params.get_mut(id), grads.get(id), &mut self.states[id.index()], self.cfg)?;
        }
        Ok(())
    }
}
