//! Seeded synthetic corpora and participant responses.
//!
//! Used by the test suites and the `make_synthetic` example. Participants
//! answer from a latent status path (topic → I, mention → A, silence decays
//! one tier) with click noise, so learned tables carry real structure.

use std::collections::BTreeSet;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::baselines::{fsm_init, DecayPolicy};
use crate::coding::ParticipantResponse;
use crate::ids::{DialogueId, ObjectId, UtteranceIndex};
use crate::io::{Dialogue, DialogueCorpus, Mention, MentionRole, Utterance};
use crate::status::CognitiveStatus;

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub objects: usize,
    pub dialogues: usize,
    /// Utterances per dialogue, drawn uniformly from this inclusive range.
    pub utterances: (usize, usize),
    /// Participants per (dialogue, prefix), drawn uniformly from this range.
    pub participants: (usize, usize),
    /// Probability that any given click deviates from the latent status.
    pub noise: f64,
    /// Fraction of responses marked as failing the attention check.
    pub failed_check_rate: f64,
}

impl SyntheticSpec {
    /// 8 objects, 4 dialogues of 4 utterances, roughly 10 participants per prefix.
    pub fn full_size() -> Self {
        Self {
            objects: 8,
            dialogues: 4,
            utterances: (4, 4),
            participants: (8, 12),
            noise: 0.15,
            failed_check_rate: 0.01,
        }
    }
}

fn object_id(i: usize) -> ObjectId {
    ObjectId::from(format!("o{}", i + 1).as_str())
}

pub fn generate(spec: &SyntheticSpec, seed: u64) -> (DialogueCorpus, Vec<ParticipantResponse>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let objects: Vec<ObjectId> = (0..spec.objects).map(object_id).collect();
    let mut dialogues = Vec::with_capacity(spec.dialogues);
    for d in 0..spec.dialogues {
        let n_utt = rng.random_range(spec.utterances.0..=spec.utterances.1);
        let utterances = (1..=n_utt)
            .map(|t| {
                let n_mentions = rng.random_range(0..=2.min(spec.objects));
                let chosen: Vec<&ObjectId> =
                    objects.choose_multiple(&mut rng, n_mentions).collect();
                let mentions = chosen
                    .into_iter()
                    .enumerate()
                    .map(|(k, o)| Mention {
                        object: o.clone(),
                        role: if k == 0 && rng.random_bool(0.7) {
                            MentionRole::Topic
                        } else {
                            MentionRole::Nontopic
                        },
                        votes: None,
                    })
                    .collect();
                Utterance {
                    index: UtteranceIndex::new(t as u32).expect("t >= 1"),
                    text: format!("utterance {t} of monologue {}", d + 1),
                    mentions,
                }
            })
            .collect();
        dialogues.push(Dialogue {
            id: DialogueId::from(format!("M{}", d + 1).as_str()),
            utterances,
        });
    }
    let corpus =
        DialogueCorpus::new(objects.clone(), dialogues).expect("generated corpus is valid");

    let mut responses = Vec::new();
    let mut pid = 0usize;
    for d in corpus.dialogues() {
        let mut fsms: Vec<_> = objects
            .iter()
            .map(|_| fsm_init(CognitiveStatus::Familiar, DecayPolicy::DecayOne))
            .collect();
        for u in &d.utterances {
            let latent: Vec<CognitiveStatus> = objects
                .iter()
                .zip(fsms.iter_mut())
                .map(|(o, f)| f.step(corpus.linguistic_status(o, &d.id, u.index)))
                .collect();
            let n = rng.random_range(spec.participants.0..=spec.participants.1);
            for _ in 0..n {
                pid += 1;
                let focused: Vec<usize> = (0..objects.len())
                    .filter(|&i| latent[i] == CognitiveStatus::InFocus)
                    .collect();
                let q1 = match focused.choose(&mut rng) {
                    Some(&i) if !rng.random_bool(spec.noise) => i,
                    _ => rng.random_range(0..objects.len()),
                };
                let mut q2 = BTreeSet::new();
                for (i, s) in latent.iter().enumerate() {
                    let salient = *s != CognitiveStatus::Familiar;
                    if salient != rng.random_bool(spec.noise) {
                        q2.insert(objects[i].clone());
                    }
                }
                if rng.random_bool(0.8) {
                    q2.insert(objects[q1].clone());
                }
                responses.push(ParticipantResponse {
                    participant: format!("p{pid:04}"),
                    dialogue: d.id.clone(),
                    prefix_len: u.index,
                    q1: objects[q1].clone(),
                    q2,
                    passed_check: !rng.random_bool(spec.failed_check_rate),
                });
            }
        }
    }
    (corpus, responses)
}
