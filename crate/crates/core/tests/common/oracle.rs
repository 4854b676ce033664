//! Reference implementations used to check the library.

use compnli::corpus::Label;
use compnli::models::Mlp;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// The label a comparison hypothesis must carry, derived from raw strings.
/// `None` when either sentence does not fit a known template.
pub fn comparison_label(premise: &str, hypothesis: &str) -> Option<Label> {
    let (x, y, z) = parse_clause(premise, "more")?;
    for modifier in ["more", "less", "not more"] {
        let Some((a, b, c)) = parse_clause(hypothesis, modifier) else {
            continue;
        };
        if b != y {
            return None;
        }
        let (when_swapped, when_kept) = if modifier == "more" {
            (Label::Contradiction, Label::Entailment)
        } else {
            (Label::Entailment, Label::Contradiction)
        };
        return if a == z && c == x {
            Some(when_swapped)
        } else if a == x && c == z {
            Some(when_kept)
        } else {
            None
        };
    }
    None
}

fn parse_clause<'a>(sentence: &'a str, modifier: &str) -> Option<(&'a str, &'a str, &'a str)> {
    let rest = sentence.strip_prefix("The ")?;
    let marker = format!(" is {modifier} ");
    let (first, rest) = rest.split_once(&marker)?;
    let (adjective, second) = rest.split_once(" than the ")?;
    if [first, adjective, second]
        .iter()
        .any(|s| s.is_empty() || s.contains(" is "))
    {
        return None;
    }
    Some((first, adjective, second))
}

fn ln_factorial(n: u64) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

fn ln_choose(n: u64, k: u64) -> f64 {
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// Two-sided Fisher exact test on the 2×2 table of successes and failures.
pub fn fisher_exact(successes_a: u64, n_a: u64, successes_b: u64, n_b: u64) -> f64 {
    let n = n_a + n_b;
    let k = successes_a + successes_b;
    let lo = k.saturating_sub(n_b);
    let hi = k.min(n_a);
    let ln_denominator = ln_choose(n, n_a);
    let prob = |x: u64| (ln_choose(k, x) + ln_choose(n - k, n_a - x) - ln_denominator).exp();
    let observed = prob(successes_a);
    let p: f64 = (lo..=hi)
        .map(prob)
        .filter(|&q| q <= observed * (1.0 + 1e-7))
        .sum();
    p.min(1.0)
}

/// Summed cross-entropy with plain loops, no shared code with the library.
pub fn naive_loss(mlp: &Mlp, inputs: &[f64], targets: &[usize]) -> f64 {
    let (d, h) = (mlp.input_dim, mlp.hidden_dim);
    let mut total = 0.0;
    for (x, &t) in inputs.chunks(d).zip(targets) {
        let hidden: Vec<f64> = (0..h)
            .map(|j| (mlp.b1[j] + (0..d).map(|i| mlp.w1[j * d + i] * x[i]).sum::<f64>()).max(0.0))
            .collect();
        let logits: Vec<f64> = (0..3)
            .map(|c| mlp.b2[c] + (0..h).map(|j| mlp.w2[c * h + j] * hidden[j]).sum::<f64>())
            .collect();
        let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let log_sum = logits.iter().map(|z| (z - max).exp()).sum::<f64>().ln() + max;
        total += log_sum - logits[t];
    }
    total
}

pub fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let diff = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt();
    let scale = a
        .iter()
        .map(|x| x * x)
        .sum::<f64>()
        .sqrt()
        .max(b.iter().map(|x| x * x).sum::<f64>().sqrt());
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

/// Count tables with moderate effects: both arms share a base rate in
/// [0.2, 0.8] and differ by at most 0.1.
pub fn random_tables(count: usize, seed: u64) -> Vec<(u64, u64, u64, u64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let n_a = rng.random_range(30..=200u64);
            let n_b = rng.random_range(30..=200u64);
            let base: f64 = rng.random_range(0.2..0.8);
            let effect: f64 = rng.random_range(-0.1..0.1);
            let draw = |rng: &mut ChaCha8Rng, n: u64, p: f64| {
                (0..n).filter(|_| rng.random_bool(p)).count() as u64
            };
            let s_a = draw(&mut rng, n_a, base + effect / 2.0);
            let s_b = draw(&mut rng, n_b, base - effect / 2.0);
            (s_a, n_a, s_b, n_b)
        })
        .collect()
}
