//! Finite-difference checks of the MLP gradients.

use compnli::models::Mlp;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::oracle::{naive_loss, relative_error};

pub const STEP: f64 = 1e-6;
pub const TOLERANCE: f64 = 1e-4;

pub struct Instance {
    pub mlp: Mlp,
    pub inputs: Vec<f64>,
    pub targets: Vec<usize>,
}

pub fn instance(seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let input = rng.random_range(1..7);
    let hidden = rng.random_range(1..7);
    let batch = rng.random_range(1..5);
    let mut mlp = Mlp::init(input, hidden, &mut rng);
    mlp.b1.iter_mut().for_each(|b| *b += 0.1);
    Instance {
        inputs: (0..batch * input)
            .map(|_| rng.random_range(-2.0..2.0))
            .collect(),
        targets: (0..batch).map(|_| rng.random_range(0..3)).collect(),
        mlp,
    }
}

pub fn parameter_gradient_error(seed: u64) -> f64 {
    let Instance {
        mut mlp,
        inputs,
        targets,
    } = instance(seed);
    let (_, analytic, _) = mlp.loss_and_gradients(&inputs, &targets);
    let numeric: Vec<f64> = (0..mlp.parameter_count())
        .map(|i| {
            let original = *mlp.param_mut(i);
            *mlp.param_mut(i) = original + STEP;
            let up = naive_loss(&mlp, &inputs, &targets);
            *mlp.param_mut(i) = original - STEP;
            let down = naive_loss(&mlp, &inputs, &targets);
            *mlp.param_mut(i) = original;
            (up - down) / (2.0 * STEP)
        })
        .collect();
    relative_error(&analytic.flat(), &numeric)
}

pub fn input_gradient_error(seed: u64) -> f64 {
    let Instance {
        mlp,
        mut inputs,
        targets,
    } = instance(seed);
    let analytic = mlp.input_gradients(&inputs, &targets);
    let numeric: Vec<f64> = (0..inputs.len())
        .map(|i| {
            let original = inputs[i];
            inputs[i] = original + STEP;
            let up = naive_loss(&mlp, &inputs, &targets);
            inputs[i] = original - STEP;
            let down = naive_loss(&mlp, &inputs, &targets);
            inputs[i] = original;
            (up - down) / (2.0 * STEP)
        })
        .collect();
    relative_error(&analytic, &numeric)
}
