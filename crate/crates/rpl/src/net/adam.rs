use crate::net::{GradientTape, Mlp};
use crate::{Error, Result};

/// Bias-corrected Adam state for one [`Mlp`].
///
/// Moment buffers start at zero and mirror the network's parameter shapes;
/// `step_count` increases by exactly one per update.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub step_count: u64,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    first_moment: GradientTape,
    second_moment: GradientTape,
}

impl AdamState {
    pub fn new(net: &Mlp, learning_rate: f64) -> AdamState {
        AdamState {
            step_count: 0,
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            first_moment: GradientTape::zeros_like(net),
            second_moment: GradientTape::zeros_like(net),
        }
    }

    pub(crate) fn moments(&self) -> (&GradientTape, &GradientTape) {
        (&self.first_moment, &self.second_moment)
    }

    pub(crate) fn moments_mut(&mut self) -> (&mut GradientTape, &mut GradientTape) {
        (&mut self.first_moment, &mut self.second_moment)
    }
}

/// One bias-corrected Adam update of `net` from the accumulated `tape`.
///
/// Rejects non-finite gradients, naming the offending layer.
pub fn adam_step(net: &mut Mlp, state: &mut AdamState, tape: &GradientTape) -> Result<()> {
    for (l, (dw, db)) in tape.d_weights.iter().zip(tape.d_biases.iter()).enumerate() {
        if dw.iter().chain(db.iter()).any(|g| !g.is_finite()) {
            return Err(Error::Numeric(format!(
                "non-finite gradient in layer {l} (weights {}x? / biases {})",
                dw.len(),
                db.len()
            )));
        }
    }
    state.step_count += 1;
    let t = state.step_count as i32;
    let (lr, b1, b2, eps) = (state.learning_rate, state.beta1, state.beta2, state.epsilon);
    let bias1 = 1.0 - b1.powi(t);
    let bias2 = 1.0 - b2.powi(t);

    let update = |p: &mut [f64], m: &mut [f64], v: &mut [f64], g: &[f64]| {
        for i in 0..p.len() {
            m[i] = b1 * m[i] + (1.0 - b1) * g[i];
            v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
            let m_hat = m[i] / bias1;
            let v_hat = v[i] / bias2;
            p[i] -= lr * m_hat / (v_hat.sqrt() + eps);
        }
    };

    for l in 0..tape.d_weights.len() {
        update(
            &mut net.weights_mut()[l],
            &mut state.first_moment.d_weights[l],
            &mut state.second_moment.d_weights[l],
            &tape.d_weights[l],
        );
        update(
            &mut net.biases_mut()[l],
            &mut state.first_moment.d_biases[l],
            &mut state.second_moment.d_biases[l],
            &tape.d_biases[l],
        );
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_tape_changes_nothing() {
        let mut net = Mlp::new(&[2, 3, 1], 9);
        let before = net.clone();
        let mut state = AdamState::new(&net, 1e-3);
        let tape = GradientTape::zeros_like(&net);
        adam_step(&mut net, &mut state, &tape).unwrap();
        assert_eq!(net, before);
        assert!(state.moments().0.iter().all(|m| m == 0.0));
        assert!(state.moments().1.iter().all(|m| m == 0.0));
        assert_eq!(state.step_count, 1);
    }

    #[test]
    fn first_step_matches_hand_evaluation() {
        // theta = 0, g = 1, lr = 1e-3: bias correction makes m_hat = v_hat = 1,
        // so theta becomes -lr / (1 + eps).
        let mut net = Mlp::new(&[1, 1], 0);
        net.weights_mut()[0][0] = 0.0;
        net.biases_mut()[0][0] = 0.0;
        let mut state = AdamState::new(&net, 1e-3);
        let mut tape = GradientTape::zeros_like(&net);
        tape.d_weights[0][0] = 1.0;
        adam_step(&mut net, &mut state, &tape).unwrap();
        let expected = -1e-3 / (1.0 + 1e-8);
        assert!((net.weights()[0][0] - expected).abs() < 1e-18);
        assert!((net.weights()[0][0] + 1e-3).abs() < 1e-10);
    }

    #[test]
    fn constant_gradient_moves_monotonically_against_its_sign() {
        let mut net = Mlp::new(&[1, 1], 0);
        net.weights_mut()[0][0] = 0.0;
        let mut state = AdamState::new(&net, 1e-3);
        let mut tape = GradientTape::zeros_like(&net);
        tape.d_weights[0][0] = 2.5;
        adam_step(&mut net, &mut state, &tape).unwrap();
        let after_one = net.weights()[0][0];
        adam_step(&mut net, &mut state, &tape).unwrap();
        let after_two = net.weights()[0][0];
        assert!(after_one < 0.0);
        assert!(after_two < after_one);
        assert_eq!(state.step_count, 2);
    }

    #[test]
    fn non_finite_gradient_names_the_layer() {
        let mut net = Mlp::new(&[2, 3, 1], 1);
        let mut state = AdamState::new(&net, 1e-3);
        let mut tape = GradientTape::zeros_like(&net);
        tape.d_biases[1][0] = f64::NAN;
        let err = adam_step(&mut net, &mut state, &tape).unwrap_err();
        assert!(err.to_string().contains("layer 1"), "got: {err}");
    }

    #[test]
    fn adam_step_is_deterministic() {
        let run = || {
            let mut net = Mlp::new(&[2, 4, 1], 3);
            let mut state = AdamState::new(&net, 1e-3);
            let (tape, _) = net.backward_new(&[0.3, -0.8], &[1.0]);
            adam_step(&mut net, &mut state, &tape).unwrap();
            net
        };
        assert_eq!(run(), run());
    }
}
