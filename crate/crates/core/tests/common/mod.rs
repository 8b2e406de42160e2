//! Fixtures shared by the integration and acceptance tests.

#![allow(dead_code)]

pub mod invariants;

use tcsum::classifier::{classification_loss_and_grad, embed_sentences};
use tcsum::encoder::{encode_embedded_document, EmbeddedSentence};
use tcsum::numerics::{grad_check, init_uniform, Rng, Tensor2};
use tcsum::rouge::{rouge_units, ReferenceSet, RougeConfig};
use tcsum::summarizer::{pairwise_objective, PreparedCluster, TrainPair};
use tcsum::textdata::{tokenize, tokenize_sentence};
use tcsum::{ClassifierParams, EmbeddingTable, EncoderParams};

pub const STEP: f64 = 1e-4;
pub const TOLERANCE: f64 = 1e-3;

/// Large enough that every pair is inside the margin, so the hinge is smooth
/// around the check point.
const WIDE_MARGIN: f64 = 2.5;

const WORDS: [&str; 8] = ["a", "b", "c", "d", "e", "f", "g", "h"];

fn table(rng: &mut Rng, dim: usize) -> EmbeddingTable {
    let mut table = EmbeddingTable::new(dim);
    for w in WORDS {
        let v: Vec<f64> = (0..dim).map(|_| rng.uniform(-0.5, 0.5)).collect();
        table.insert(w, &v).unwrap();
    }
    table
}

fn random_sentence(rng: &mut Rng) -> String {
    let len = 2 + rng.below(4);
    let words: Vec<&str> = (0..len).map(|_| WORDS[rng.below(WORDS.len())]).collect();
    format!("{}.", words.join(" "))
}

/// Max relative error of the joint classification gradient over `W_alpha`
/// and `W_beta`.
pub fn classification_grad_error(seed: u64) -> f64 {
    let mut rng = Rng::new(seed);
    let table = table(&mut rng, 3);
    let cats: Vec<String> = vec!["x".into(), "y".into(), "z".into()];
    let enc = EncoderParams::new(init_uniform(4, 6, 0.5, &mut rng).unwrap(), 2).unwrap();
    let cls =
        ClassifierParams::new(init_uniform(3, 4, 0.5, &mut rng).unwrap(), cats.clone()).unwrap();
    let docs: Vec<(Vec<EmbeddedSentence>, usize)> = (0..3)
        .map(|i| {
            let text: Vec<String> = (0..2 + i).map(|_| random_sentence(&mut rng)).collect();
            (
                embed_sentences(&tokenize(&text.join(" ")), &table, 2).unwrap(),
                i % 3,
            )
        })
        .collect();
    let (_, ga, gb) = classification_loss_and_grad(&enc, &cls, &docs).unwrap();
    let f = |p: &[Tensor2]| {
        let e = EncoderParams::new(p[0].clone(), 2).unwrap();
        let c = ClassifierParams::new(p[1].clone(), cats.clone()).unwrap();
        classification_loss_and_grad(&e, &c, &docs).unwrap().0
    };
    grad_check(
        f,
        &[ga, gb],
        &[enc.w_alpha.clone(), cls.w_beta.clone()],
        STEP,
    )
    .unwrap()
}

struct PairFixture {
    encoder: EncoderParams,
    subs: Vec<Tensor2>,
    clusters: Vec<PreparedCluster>,
    pairs: Vec<TrainPair>,
}

fn pair_fixture(seed: u64, categories: usize) -> PairFixture {
    let mut rng = Rng::new(seed);
    let table = table(&mut rng, 3);
    let encoder = EncoderParams::new(init_uniform(4, 6, 0.5, &mut rng).unwrap(), 2).unwrap();
    let subs: Vec<Tensor2> = (0..categories)
        .map(|_| init_uniform(4, 4, 0.5, &mut rng).unwrap())
        .collect();
    let mut clusters = Vec::new();
    let mut pairs = Vec::new();
    for ci in 0..2 {
        let sentences: Vec<_> = (0..5)
            .map(|_| tokenize_sentence(&random_sentence(&mut rng)))
            .collect();
        let inputs = embed_sentences(&sentences, &table, 2).unwrap();
        let doc = encode_embedded_document(&inputs, &encoder).unwrap();
        let mut weights: Vec<f64> = (0..categories).map(|_| rng.uniform(0.1, 1.0)).collect();
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        clusters.push(PreparedCluster {
            inputs,
            doc: Some(doc),
            weights,
        });
        for _ in 0..4 {
            let plus = rng.below(5);
            let minus = (plus + 1 + rng.below(4)) % 5;
            pairs.push(TrainPair {
                cluster: ci,
                plus,
                minus,
                label_plus: 0.5,
                label_minus: 0.1,
            });
        }
    }
    PairFixture {
        encoder,
        subs,
        clusters,
        pairs,
    }
}

/// Max relative error of the pairwise hinge gradient over every sub-matrix
/// of a category mixture, with the encoder frozen.
pub fn pairwise_grad_error(seed: u64) -> f64 {
    let fx = pair_fixture(seed, 3);
    let obj = pairwise_objective(
        &fx.encoder,
        &fx.subs,
        &fx.clusters,
        &fx.pairs,
        WIDE_MARGIN,
        false,
    )
    .unwrap();
    let f = |p: &[Tensor2]| {
        pairwise_objective(&fx.encoder, p, &fx.clusters, &fx.pairs, WIDE_MARGIN, false)
            .unwrap()
            .loss
    };
    grad_check(f, &obj.sub_grads, &fx.subs, STEP).unwrap()
}

/// Max relative error of the pairwise hinge gradient over `W_alpha` and a
/// single transformation matrix, with the encoder trained.
pub fn pairwise_encoder_grad_error(seed: u64) -> f64 {
    let mut fx = pair_fixture(seed, 1);
    for c in &mut fx.clusters {
        c.doc = None;
        c.weights = vec![1.0];
    }
    let obj = pairwise_objective(
        &fx.encoder,
        &fx.subs,
        &fx.clusters,
        &fx.pairs,
        WIDE_MARGIN,
        true,
    )
    .unwrap();
    let f = |p: &[Tensor2]| {
        let e = EncoderParams::new(p[0].clone(), 2).unwrap();
        pairwise_objective(&e, &p[1..], &fx.clusters, &fx.pairs, WIDE_MARGIN, true)
            .unwrap()
            .loss
    };
    let analytic = [obj.encoder_grad.unwrap(), obj.sub_grads[0].clone()];
    grad_check(
        f,
        &analytic,
        &[fx.encoder.w_alpha.clone(), fx.subs[0].clone()],
        STEP,
    )
    .unwrap()
}

const ALPHABET: [&str; 4] = ["w", "x", "y", "z"];
const MAX_LEN: usize = 6;

pub fn all_sequences() -> Vec<Vec<String>> {
    let mut out: Vec<Vec<String>> = vec![vec![]];
    let mut frontier: Vec<Vec<String>> = vec![vec![]];
    for _ in 0..MAX_LEN {
        let mut next = Vec::new();
        for s in &frontier {
            for a in ALPHABET {
                let mut t = s.clone();
                t.push(a.to_string());
                next.push(t);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// Clipped n-gram matches over reference n-gram count, counted by nested scans.
pub fn brute_force(candidate: &[String], reference: &[String], n: usize) -> Option<f64> {
    if reference.len() < n {
        return None;
    }
    let ref_grams: Vec<&[String]> = reference.windows(n).collect();
    let cand_grams: Vec<&[String]> = if candidate.len() >= n {
        candidate.windows(n).collect()
    } else {
        vec![]
    };
    let mut hits = 0usize;
    for (i, g) in ref_grams.iter().enumerate() {
        if ref_grams[..i].contains(g) {
            continue;
        }
        let in_ref = ref_grams.iter().filter(|h| *h == g).count();
        let in_cand = cand_grams.iter().filter(|h| *h == g).count();
        hits += in_ref.min(in_cand);
    }
    Some(hits as f64 / ref_grams.len() as f64)
}

/// Compare every candidate against every reference; returns the number of
/// pairs checked.
pub fn rouge_sweep(n: usize) -> Result<usize, String> {
    let seqs = all_sequences();
    if seqs.len() != (0..=MAX_LEN as u32).map(|l| 4usize.pow(l)).sum::<usize>() {
        return Err(format!("{} sequences generated", seqs.len()));
    }
    let config = RougeConfig::new(n);
    let units: Vec<Vec<String>> = seqs.iter().map(|s| rouge_units(s, &config)).collect();
    if units != seqs {
        return Err("single letters must pass through unit reduction unchanged".into());
    }
    let mut checked = 0usize;
    for reference in &seqs {
        let set = ReferenceSet::new(std::slice::from_ref(reference), config);
        match brute_force(&[], reference, n) {
            None => {
                if set.is_ok() {
                    return Err(format!(
                        "reference {reference:?} shorter than {n} must be rejected"
                    ));
                }
            }
            Some(_) => {
                let set = set.unwrap();
                for cand in &units {
                    let expected = brute_force(cand, reference, n).unwrap();
                    let got = set.recall_units(cand);
                    if got != expected {
                        return Err(format!(
                            "n={n} cand={cand:?} ref={reference:?}: {got} != {expected}"
                        ));
                    }
                    checked += 1;
                }
            }
        }
    }
    Ok(checked)
}
