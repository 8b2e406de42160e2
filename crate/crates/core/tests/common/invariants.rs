//! Core invariants as reusable property bodies, with their input strategies.

use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

use tcsum::classifier::{softmax, CategoryDistribution};
use tcsum::numerics::{cosine, Rng, Tensor2};
use tcsum::selection::{greedy_select, Budget};
use tcsum::summarizer::{compose_transform, style_similarity};
use tcsum::textdata::tokenize_sentence;

pub const CASES: u32 = 1000;

type Check = std::result::Result<(), TestCaseError>;

pub fn vector(len: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0f64..10.0, len)
}

pub fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = Tensor2> {
    prop::collection::vec(-1.0f64..1.0, rows * cols)
        .prop_map(move |d| Tensor2::from_vec(rows, cols, d).unwrap())
}

pub fn distribution(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..1.0, n).prop_map(|mut w| {
        let s: f64 = w.iter().sum();
        if s == 0.0 {
            w[0] = 1.0;
        } else {
            w.iter_mut().for_each(|x| *x /= s);
        }
        w
    })
}

pub fn word() -> impl Strategy<Value = String> {
    prop::sample::select(vec![
        "the", "a", "storm", "hit", "coast", "mr.", "u.s.", "fire", "2024", "city", "of",
    ])
    .prop_map(String::from)
}

pub fn sentences() -> impl Strategy<Value = Vec<Vec<String>>> {
    prop::collection::vec(prop::collection::vec(word(), 1..15), 1..12)
}

pub fn softmax_is_a_distribution(logits: &[f64], shift: f64) -> Check {
    let p = softmax(logits);
    prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    prop_assert!(p.iter().all(|x| (0.0..=1.0).contains(x)));
    let shifted: Vec<f64> = logits.iter().map(|x| x + shift).collect();
    for (a, b) in p.iter().zip(softmax(&shifted)) {
        prop_assert!((a - b).abs() < 1e-9);
    }
    Ok(())
}

pub fn cosine_is_bounded_and_symmetric(a: &[f64], b_seed: u64, scale: f64) -> Check {
    let mut rng = Rng::new(b_seed);
    let b: Vec<f64> = a.iter().map(|_| rng.uniform(-10.0, 10.0)).collect();
    match (cosine(a, &b), cosine(&b, a)) {
        (Some(x), Some(y)) => {
            prop_assert!((-1.0..=1.0).contains(&x));
            prop_assert_eq!(x, y);
            let scaled: Vec<f64> = a.iter().map(|v| v * scale).collect();
            prop_assert!((cosine(&scaled, &b).unwrap() - x).abs() < 1e-9);
        }
        (None, None) => {
            prop_assert!(a.iter().all(|v| *v == 0.0) || b.iter().all(|v| *v == 0.0))
        }
        _ => prop_assert!(false, "asymmetric degeneracy"),
    }
    let zeros = vec![0.0; a.len()];
    prop_assert!(cosine(&zeros, &b).is_none());
    Ok(())
}

pub fn identical_sub_matrices_collapse(w: &Tensor2, p: Vec<f64>) -> Check {
    let subs = vec![w.clone(); p.len()];
    let composed = compose_transform(&CategoryDistribution { probs: p }, &subs).unwrap();
    prop_assert!(composed.max_abs_diff(w).unwrap() < 1e-12);
    Ok(())
}

pub fn composition_is_the_weighted_sum(subs: &[Tensor2], p: Vec<f64>, k: usize) -> Check {
    let composed = compose_transform(&CategoryDistribution { probs: p.clone() }, subs).unwrap();
    let (rows, cols) = subs[0].shape();
    for r in 0..rows {
        for c in 0..cols {
            let expected: f64 = (0..subs.len()).map(|i| p[i] * subs[i].get(r, c)).sum();
            prop_assert!((composed.get(r, c) - expected).abs() < 1e-12);
        }
    }
    let one_hot = CategoryDistribution::one_hot(subs.len(), k).unwrap();
    prop_assert_eq!(compose_transform(&one_hot, subs).unwrap(), subs[k].clone());
    Ok(())
}

pub fn budget_is_never_exceeded(
    sentences: &[Vec<String>],
    seed: u64,
    value: u64,
    bytes: bool,
    threshold: f64,
) -> Check {
    let sents: Vec<_> = sentences
        .iter()
        .map(|s| tokenize_sentence(&s.join(" ")))
        .collect();
    let mut rng = Rng::new(seed);
    let scores: Vec<f64> = sents.iter().map(|_| rng.uniform(-1.0, 1.0)).collect();
    let budget = if bytes {
        Budget::bytes(value * 6)
    } else {
        Budget::words(value)
    };
    let s = greedy_select(&sents, &scores, budget, threshold);
    prop_assert!(s.used <= budget.value);
    prop_assert_eq!(budget.measure(&s.text), s.used);
    prop_assert!(s.selected.windows(2).all(|w| w[0] < w[1]));
    Ok(())
}

pub fn style_similarity_is_symmetric(subs: &[Tensor2]) -> Check {
    let s = style_similarity(subs).unwrap();
    let n = subs.len();
    prop_assert_eq!(s.shape(), (n, n));
    for i in 0..n {
        prop_assert_eq!(s.get(i, i), 0.0);
        for j in 0..n {
            prop_assert_eq!(s.get(i, j), s.get(j, i));
            prop_assert!((-1.0..=1.0).contains(&s.get(i, j)));
        }
    }
    Ok(())
}

fn run<S: Strategy>(
    name: &'static str,
    strategy: S,
    test: impl Fn(S::Value) -> Check,
) -> (&'static str, Result<(), String>) {
    let mut runner = TestRunner::new(Config {
        cases: CASES,
        failure_persistence: None,
        ..Config::default()
    });
    (name, runner.run(&strategy, test).map_err(|e| e.to_string()))
}

/// Run every invariant for [`CASES`] random cases outside the test harness.
pub fn run_all() -> Vec<(&'static str, Result<(), String>)> {
    vec![
        run(
            "softmax normalization",
            (vector(1..=12), -100.0f64..100.0),
            |(l, s)| softmax_is_a_distribution(&l, s),
        ),
        run(
            "cosine bounds",
            (vector(1..=16), any::<u64>(), 0.01f64..100.0),
            |(a, b, s)| cosine_is_bounded_and_symmetric(&a, b, s),
        ),
        run(
            "mixture collapse",
            (matrix(4, 4), distribution(5)),
            |(w, p)| identical_sub_matrices_collapse(&w, p),
        ),
        run(
            "mixture weighted sum",
            (
                prop::collection::vec(matrix(3, 3), 4),
                distribution(4),
                0usize..4,
            ),
            |(subs, p, k)| composition_is_the_weighted_sum(&subs, p, k),
        ),
        run(
            "budget never exceeded",
            (
                sentences(),
                any::<u64>(),
                0u64..120,
                any::<bool>(),
                0.0f64..1.0,
            ),
            |(s, seed, v, b, t)| budget_is_never_exceeded(&s, seed, v, b, t),
        ),
        run(
            "style similarity symmetry",
            prop::collection::vec(matrix(3, 3), 2..6),
            |subs| style_similarity_is_symmetric(&subs),
        ),
    ]
}
