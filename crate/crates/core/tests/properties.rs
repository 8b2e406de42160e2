//! Randomized invariant checks, 1000 cases each.

mod common;

use proptest::prelude::*;

use common::invariants::{self, distribution, matrix, sentences, vector, word};

use tcsum::numerics::{AdaGrad, Rng, Tensor2};
use tcsum::rouge::{rouge_n, RougeConfig};
use tcsum::summarizer::pairwise_loss;
use tcsum::textdata::{
    synth_corpus, tokenize, ClassificationCorpus, ClusterCorpus, EmbeddingTable, SynthConfig,
};

fn config() -> ProptestConfig {
    ProptestConfig::with_cases(invariants::CASES)
}

fn chunk() -> impl Strategy<Value = String> {
    (
        prop::sample::select(vec!["", "\"", "(", "'"]),
        word(),
        prop::sample::select(vec!["", ".", ",", "!", "?", ".\"", "?!", ")", ";", "..."]),
    )
        .prop_map(|(a, w, b)| format!("{a}{w}{b}"))
}

fn text() -> impl Strategy<Value = String> {
    prop::collection::vec(chunk(), 0..30).prop_map(|c| c.join(" "))
}

fn tokens(len: std::ops::Range<usize>) -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec(
        prop::sample::select(vec!["w", "x", "y", "z", "storms", "storm"]).prop_map(String::from),
        len,
    )
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn softmax_is_a_distribution(logits in vector(1..=12), shift in -100.0f64..100.0) {
        invariants::softmax_is_a_distribution(&logits, shift)?;
    }

    #[test]
    fn cosine_is_bounded_and_symmetric(a in vector(1..=16), b_seed in any::<u64>(), scale in 0.01f64..100.0) {
        invariants::cosine_is_bounded_and_symmetric(&a, b_seed, scale)?;
    }

    #[test]
    fn identical_sub_matrices_collapse(w in matrix(4, 4), p in distribution(5)) {
        invariants::identical_sub_matrices_collapse(&w, p)?;
    }

    #[test]
    fn composition_is_the_weighted_sum(
        subs in prop::collection::vec(matrix(3, 3), 4),
        p in distribution(4),
        k in 0usize..4,
    ) {
        invariants::composition_is_the_weighted_sum(&subs, p, k)?;
    }

    #[test]
    fn budget_is_never_exceeded(
        sentences in sentences(),
        seed in any::<u64>(),
        value in 0u64..120,
        bytes in any::<bool>(),
        threshold in 0.0f64..1.0,
    ) {
        invariants::budget_is_never_exceeded(&sentences, seed, value, bytes, threshold)?;
    }

    #[test]
    fn style_similarity_is_symmetric_with_zero_diagonal(subs in prop::collection::vec(matrix(3, 3), 2..6)) {
        invariants::style_similarity_is_symmetric(&subs)?;
    }

    #[test]
    fn retokenizing_is_idempotent(t in text()) {
        let first = tokenize(&t);
        for s in &first {
            prop_assert!(!s.tokens.is_empty());
            let again = tokenize(&s.tokens.join(" "));
            prop_assert_eq!(again.len(), 1);
            prop_assert_eq!(&again[0].tokens, &s.tokens);
        }
        // A detached quote may move across a sentence boundary; the token
        // stream itself is unchanged.
        let flat: Vec<String> = first.into_iter().flat_map(|s| s.tokens).collect();
        let again: Vec<String> = tokenize(&flat.join(" ")).into_iter().flat_map(|s| s.tokens).collect();
        prop_assert_eq!(again, flat);
    }

    #[test]
    fn corpora_round_trip(seed in any::<u64>(), categories in 2usize..5, style in 0.0f64..=1.0) {
        let cfg = SynthConfig {
            categories,
            docs_per_cat: 1,
            clusters_per_cat: 1,
            docs_per_cluster: 1,
            sents_per_doc: 3,
            filler_vocab: 10,
            vocab_per_cat: 3,
            salient_vocab: 3,
            dim: 2,
            style_signal: style,
            ..SynthConfig::default()
        };
        let s = synth_corpus(seed, &cfg).unwrap();
        let mut buf = Vec::new();
        s.clusters.write_to(&mut buf).unwrap();
        prop_assert_eq!(ClusterCorpus::from_reader(&buf[..], "mem", None).unwrap(), s.clusters);
        let mut buf = Vec::new();
        s.classification.write_to(&mut buf).unwrap();
        let back = ClassificationCorpus::from_reader(&buf[..], "mem", Some(&s.classification.categories)).unwrap();
        prop_assert_eq!(back, s.classification);
        let mut buf = Vec::new();
        s.embeddings.write_to(&mut buf).unwrap();
        prop_assert_eq!(EmbeddingTable::read_from(&buf[..], "mem").unwrap(), s.embeddings);
    }

    #[test]
    fn embed_token_is_deterministic(token in "[a-z]{1,12}") {
        let mut table = EmbeddingTable::new(4);
        table.insert("known", &[1.0, 2.0, 3.0, 4.0]).unwrap();
        let a = table.embed_token(&token).into_owned();
        let b = table.clone().embed_token(&token).into_owned();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(a.len(), 4);
        if token != "known" {
            prop_assert!(a.iter().all(|v| v.abs() <= 0.1));
        }
    }

    #[test]
    fn rouge_recall_properties(
        cand in tokens(0..12),
        extra in tokens(0..6),
        refs in prop::collection::vec(tokens(2..12), 1..4),
        n in 1usize..3,
    ) {
        let config = RougeConfig::new(n);
        let r = rouge_n(&cand, &refs, &config).unwrap();
        prop_assert!((0.0..=1.0).contains(&r));
        let mut longer = cand.clone();
        longer.extend(extra);
        prop_assert!(rouge_n(&longer, &refs, &config).unwrap() >= r);
        let mut reversed = refs.clone();
        reversed.reverse();
        prop_assert!((rouge_n(&cand, &reversed, &config).unwrap() - r).abs() < 1e-12);
        prop_assert_eq!(rouge_n(&refs[0], &refs[..1], &config).unwrap(), 1.0);
        let doubled: Vec<String> = cand.iter().chain(cand.iter()).cloned().collect();
        let single = rouge_n(&cand, &refs[..1], &RougeConfig::new(1)).unwrap();
        prop_assert!(rouge_n(&doubled, &refs[..1], &RougeConfig::new(1)).unwrap() <= 2.0 * single + 1e-12);
    }

    #[test]
    fn adagrad_properties(theta in matrix(2, 3), g in matrix(2, 3), acc in prop::collection::vec(0.0f64..5.0, 6)) {
        let mut opt = AdaGrad::new(&[&theta], 0.1, 1e-8).unwrap();
        opt.accumulators_mut()[0] = Tensor2::from_vec(2, 3, acc).unwrap();
        let before = opt.accumulators()[0].clone();
        let mut p = theta.clone();
        opt.step(&mut [&mut p], &[Tensor2::zeros(2, 3)]).unwrap();
        prop_assert_eq!(&p, &theta);
        opt.step(&mut [&mut p], std::slice::from_ref(&g)).unwrap();
        for i in 0..6 {
            prop_assert!(opt.accumulators()[0].data()[i] >= before.data()[i]);
            let delta = p.data()[i] - theta.data()[i];
            prop_assert!(delta * g.data()[i] <= 0.0);
            prop_assert!(delta.abs() <= 0.1 + 1e-12);
        }
    }

    #[test]
    fn hinge_is_non_negative(a in -1.0f64..1.0, b in -1.0f64..1.0, omega in 0.0f64..1.0) {
        let l = pairwise_loss(a, b, omega);
        prop_assert!(l >= 0.0);
        prop_assert!((pairwise_loss(a, a, omega) - omega).abs() < 1e-15);
        prop_assert!(l >= omega - a + b - 1e-15);
    }

    #[test]
    fn shuffle_is_a_permutation(seed in any::<u64>(), n in 0usize..50) {
        let mut v: Vec<usize> = (0..n).collect();
        Rng::new(seed).shuffle(&mut v);
        let mut sorted = v.clone();
        sorted.sort_unstable();
        prop_assert_eq!(sorted, (0..n).collect::<Vec<_>>());
    }
}
