//! Per-object recursive status estimation and the engine holding one filter
//! per object that is Familiar or higher.
//!
//! The soft update marginalizes over the previous status:
//!
//! ```text
//! belief'(s) ∝ Σ_{s'} belief(s') · table[(s', l)](s)
//! ```
//!
//! with the observation probability absorbed by the normalizer. The hard
//! update conditions on the most probable previous status instead.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ids::{DialogueId, ObjectId, UtteranceIndex};
use crate::scalar::Scalar;
use crate::status::{
    argmax_status, normalize, CognitiveStatus, ConditionalStatusTable, LinguisticStatus,
    StatusDistribution, StatusError,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FilterError {
    #[error(transparent)]
    Status(#[from] StatusError),
    #[error("object {0} already has a filter")]
    DuplicateObject(ObjectId),
    #[error("object {0} observed as NotMentioned; mentions must be M or T")]
    NotAMention(ObjectId),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UpdateMode {
    #[default]
    Soft,
    Hard,
}

impl std::str::FromStr for UpdateMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "soft" => Ok(Self::Soft),
            "hard" => Ok(Self::Hard),
            other => Err(format!(
                "unknown update mode {other:?} (expected soft|hard)"
            )),
        }
    }
}

/// Recursive estimator of one object's status distribution.
#[derive(Debug, Clone)]
pub struct CognitiveStatusFilter<T> {
    object: ObjectId,
    belief: StatusDistribution<T>,
    table: Arc<ConditionalStatusTable<T>>,
    mode: UpdateMode,
    step: u64,
}

impl<T: Scalar> CognitiveStatusFilter<T> {
    pub fn new(
        object: ObjectId,
        prior: StatusDistribution<T>,
        table: Arc<ConditionalStatusTable<T>>,
        mode: UpdateMode,
    ) -> Self {
        Self {
            object,
            belief: prior,
            table,
            mode,
            step: 0,
        }
    }

    pub fn object(&self) -> &ObjectId {
        &self.object
    }

    pub fn belief(&self) -> &StatusDistribution<T> {
        &self.belief
    }

    pub fn mode(&self) -> UpdateMode {
        self.mode
    }

    /// Number of updates applied so far.
    pub fn step(&self) -> u64 {
        self.step
    }

    pub fn status(&self) -> CognitiveStatus {
        argmax_status(&self.belief)
    }

    /// Soft-mode prediction weights before normalization.
    pub fn unnormalized_update(&self, ling: LinguisticStatus) -> [T; 3] {
        predict_weights(&self.belief, ling, &self.table)
    }

    pub fn update(&mut self, ling: LinguisticStatus) -> Result<StatusDistribution<T>, FilterError> {
        let next = match self.mode {
            UpdateMode::Soft => normalize(self.unnormalized_update(ling))?,
            UpdateMode::Hard => *self.table.row(argmax_status(&self.belief), ling),
        };
        self.belief = next;
        self.step += 1;
        Ok(next)
    }
}

/// Convenience constructor mirroring [`CognitiveStatusFilter::new`].
pub fn init_filter<T: Scalar>(
    object: ObjectId,
    prior: StatusDistribution<T>,
    table: Arc<ConditionalStatusTable<T>>,
    mode: UpdateMode,
) -> CognitiveStatusFilter<T> {
    CognitiveStatusFilter::new(object, prior, table, mode)
}

/// `Σ_{s'} belief(s') · table[(s', l)]`, one entry per current status.
pub fn predict_weights<T: Scalar>(
    belief: &StatusDistribution<T>,
    ling: LinguisticStatus,
    table: &ConditionalStatusTable<T>,
) -> [T; 3] {
    let mut out = [T::zero(); 3];
    for prev in CognitiveStatus::ALL {
        let w = belief.get(prev);
        let row = table.row(prev, ling).as_array();
        for (o, r) in out.iter_mut().zip(row) {
            *o = *o + w * r;
        }
    }
    out
}

/// Mentions of objects in one utterance; unlisted objects are NotMentioned.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UtteranceObservation {
    pub dialogue: DialogueId,
    pub index: UtteranceIndex,
    mentions: BTreeMap<ObjectId, LinguisticStatus>,
}

impl UtteranceObservation {
    pub fn new(
        dialogue: DialogueId,
        index: UtteranceIndex,
        mentions: BTreeMap<ObjectId, LinguisticStatus>,
    ) -> Result<Self, FilterError> {
        if let Some((o, _)) = mentions.iter().find(|(_, l)| !l.is_mention()) {
            return Err(FilterError::NotAMention(o.clone()));
        }
        Ok(Self {
            dialogue,
            index,
            mentions,
        })
    }

    pub fn mentions(&self) -> &BTreeMap<ObjectId, LinguisticStatus> {
        &self.mentions
    }

    pub fn status_of(&self, object: &ObjectId) -> LinguisticStatus {
        self.mentions
            .get(object)
            .copied()
            .unwrap_or(LinguisticStatus::NotMentioned)
    }
}

/// Result of asking the engine about one object.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StatusQuery<T> {
    /// No filter exists: the object is below Familiar.
    NotFamiliar,
    Tracked {
        status: CognitiveStatus,
        belief: StatusDistribution<T>,
    },
}

impl<T> StatusQuery<T> {
    pub fn status(&self) -> Option<CognitiveStatus> {
        match self {
            Self::NotFamiliar => None,
            Self::Tracked { status, .. } => Some(*status),
        }
    }
}

/// One filter per object believed Familiar or higher.
#[derive(Debug, Clone)]
pub struct StatusEngine<T> {
    filters: BTreeMap<ObjectId, CognitiveStatusFilter<T>>,
    prior: StatusDistribution<T>,
    table: Arc<ConditionalStatusTable<T>>,
    mode: UpdateMode,
}

impl<T: Scalar> StatusEngine<T> {
    pub fn new(
        prior: StatusDistribution<T>,
        table: Arc<ConditionalStatusTable<T>>,
        mode: UpdateMode,
    ) -> Self {
        Self {
            filters: BTreeMap::new(),
            prior,
            table,
            mode,
        }
    }

    pub fn prior(&self) -> &StatusDistribution<T> {
        &self.prior
    }

    pub fn len(&self) -> usize {
        self.filters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.filters.is_empty()
    }

    pub fn filter(&self, object: &ObjectId) -> Option<&CognitiveStatusFilter<T>> {
        self.filters.get(object)
    }

    pub fn filters(&self) -> impl Iterator<Item = &CognitiveStatusFilter<T>> {
        self.filters.values()
    }

    /// Marks an object Familiar ahead of any mention (scene exposure).
    pub fn register_familiar(&mut self, object: ObjectId) -> Result<(), FilterError> {
        if self.filters.contains_key(&object) {
            return Err(FilterError::DuplicateObject(object));
        }
        let filter = self.new_filter(object.clone());
        self.filters.insert(object, filter);
        Ok(())
    }

    fn new_filter(&self, object: ObjectId) -> CognitiveStatusFilter<T> {
        CognitiveStatusFilter::new(object, self.prior, Arc::clone(&self.table), self.mode)
    }

    /// Creates filters for newly mentioned objects, then updates every filter.
    pub fn observe_utterance(
        &mut self,
        obs: &UtteranceObservation,
    ) -> Result<BTreeMap<ObjectId, StatusDistribution<T>>, FilterError> {
        for object in obs.mentions().keys() {
            if !self.filters.contains_key(object) {
                let filter = self.new_filter(object.clone());
                self.filters.insert(object.clone(), filter);
            }
        }
        let mut beliefs = BTreeMap::new();
        for (object, filter) in self.filters.iter_mut() {
            let belief = filter.update(obs.status_of(object))?;
            beliefs.insert(object.clone(), belief);
        }
        Ok(beliefs)
    }

    pub fn query_status(&self, object: &ObjectId) -> StatusQuery<T> {
        match self.filters.get(object) {
            None => StatusQuery::NotFamiliar,
            Some(f) => StatusQuery::Tracked {
                status: f.status(),
                belief: *f.belief(),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::status::row_index;
    use proptest::prelude::*;
    use CognitiveStatus::*;
    use LinguisticStatus::*;

    fn dist(a: f64, b: f64, c: f64) -> StatusDistribution<f64> {
        StatusDistribution::new(a, b, c).unwrap()
    }

    fn informed() -> StatusDistribution<f64> {
        dist(0.05, 0.10, 0.85)
    }

    fn mention_table() -> ConditionalStatusTable<f64> {
        let mut rows = [[1.0 / 3.0; 3]; 9];
        rows[row_index(InFocus, MentionedNonTopic)] = [0.2, 0.7, 0.1];
        rows[row_index(Activated, MentionedNonTopic)] = [0.1, 0.8, 0.1];
        rows[row_index(Familiar, MentionedNonTopic)] = [0.05, 0.75, 0.2];
        ConditionalStatusTable::from_rows(rows).unwrap()
    }

    #[test]
    fn init_sets_prior_and_zero_step() {
        let table = Arc::new(ConditionalStatusTable::uniform());
        let u = init_filter(
            "o1".into(),
            StatusDistribution::uniform(),
            table.clone(),
            UpdateMode::Soft,
        );
        assert_eq!(u.belief().as_array(), [1.0 / 3.0; 3]);
        assert_eq!(u.step(), 0);
        let i = init_filter("o1".into(), informed(), table, UpdateMode::Soft);
        assert_eq!(i.belief().as_array(), [0.05, 0.10, 0.85]);
        assert_eq!(i.step(), 0);
    }

    #[test]
    fn uniform_fixed_point() {
        let table = Arc::new(ConditionalStatusTable::<f64>::uniform());
        let mut f = init_filter(
            "o".into(),
            StatusDistribution::uniform(),
            table,
            UpdateMode::Soft,
        );
        for l in LinguisticStatus::ALL {
            let b = f.update(l).unwrap();
            assert!(b.max_abs_diff(&StatusDistribution::uniform()) < 1e-15);
        }
        assert_eq!(f.step(), 3);
    }

    #[test]
    fn soft_update_matches_hand_multiply() {
        // hand oracle:
        // I: .05*.2  + .10*.1 + .85*.05 = .0625
        // A: .05*.7  + .10*.8 + .85*.75 = .7525
        // F: .05*.1  + .10*.1 + .85*.2  = .185
        let expected = [0.0625, 0.7525, 0.185];
        let mut f = init_filter(
            "o".into(),
            informed(),
            Arc::new(mention_table()),
            UpdateMode::Soft,
        );
        let raw = f.unnormalized_update(MentionedNonTopic);
        for i in 0..3 {
            assert!((raw[i] - expected[i]).abs() < 1e-12);
        }
        let b = f.update(MentionedNonTopic).unwrap();
        for (got, want) in b.as_array().iter().zip(expected) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn hard_update_uses_argmax_row() {
        let mut f = init_filter(
            "o".into(),
            informed(),
            Arc::new(mention_table()),
            UpdateMode::Hard,
        );
        let b = f.update(MentionedNonTopic).unwrap();
        assert_eq!(b.as_array(), [0.05, 0.75, 0.2]);
        let b = f.update(MentionedNonTopic).unwrap();
        assert_eq!(b.as_array(), [0.1, 0.8, 0.1]);
    }

    #[test]
    fn engine_creates_filters_on_mention() {
        let mut e = StatusEngine::new(
            StatusDistribution::uniform(),
            Arc::new(mention_table()),
            UpdateMode::Soft,
        );
        let obs = UtteranceObservation::new(
            "M1".into(),
            UtteranceIndex::new(1).unwrap(),
            [(ObjectId::from("o1"), MentionedTopic)].into(),
        )
        .unwrap();
        let out = e.observe_utterance(&obs).unwrap();
        assert_eq!(e.len(), 1);
        assert_eq!(out.len(), 1);
        assert_eq!(e.filter(&"o1".into()).unwrap().step(), 1);
    }

    #[test]
    fn engine_updates_unmentioned_with_not_mentioned() {
        let table = Arc::new(mention_table());
        let mut e = StatusEngine::new(informed(), table.clone(), UpdateMode::Soft);
        e.register_familiar("o1".into()).unwrap();
        e.register_familiar("o2".into()).unwrap();
        let obs = UtteranceObservation::new(
            "M1".into(),
            UtteranceIndex::new(1).unwrap(),
            [(ObjectId::from("o1"), MentionedNonTopic)].into(),
        )
        .unwrap();
        let out = e.observe_utterance(&obs).unwrap();
        let mut reference = init_filter("o2".into(), informed(), table, UpdateMode::Soft);
        let expected = reference.update(NotMentioned).unwrap();
        assert_eq!(out[&ObjectId::from("o2")], expected);
        assert_eq!(e.filter(&"o2".into()).unwrap().step(), 1);
    }

    #[test]
    fn register_rejects_duplicates() {
        let mut e = StatusEngine::new(
            StatusDistribution::<f64>::uniform(),
            Arc::new(ConditionalStatusTable::uniform()),
            UpdateMode::Soft,
        );
        for i in 1..=8 {
            e.register_familiar(ObjectId::from(format!("o{i}").as_str()))
                .unwrap();
        }
        assert_eq!(e.len(), 8);
        assert!(e
            .filters()
            .all(|f| f.step() == 0 && *f.belief() == StatusDistribution::uniform()));
        assert_eq!(
            e.register_familiar("o3".into()),
            Err(FilterError::DuplicateObject("o3".into()))
        );
    }

    #[test]
    fn empty_utterance_applies_one_not_mentioned_update() {
        let table = Arc::new(mention_table());
        let mut e = StatusEngine::new(informed(), table.clone(), UpdateMode::Soft);
        e.register_familiar("o1".into()).unwrap();
        let obs =
            UtteranceObservation::new("M".into(), UtteranceIndex::new(1).unwrap(), BTreeMap::new())
                .unwrap();
        e.observe_utterance(&obs).unwrap();
        let expected = normalize(predict_weights(&informed(), NotMentioned, &table)).unwrap();
        assert_eq!(*e.filter(&"o1".into()).unwrap().belief(), expected);
    }

    #[test]
    fn query_status_cases() {
        let table = Arc::new(ConditionalStatusTable::uniform());
        let mut e = StatusEngine::new(informed(), table.clone(), UpdateMode::Soft);
        assert_eq!(e.query_status(&"ghost".into()), StatusQuery::NotFamiliar);
        e.register_familiar("o1".into()).unwrap();
        assert_eq!(e.query_status(&"o1".into()).status(), Some(Familiar));

        let mut e = StatusEngine::new(dist(0.7, 0.2, 0.1), table, UpdateMode::Soft);
        e.register_familiar("o1".into()).unwrap();
        assert_eq!(e.query_status(&"o1".into()).status(), Some(InFocus));
    }

    #[test]
    fn observation_rejects_explicit_not_mentioned() {
        let err = UtteranceObservation::new(
            "M".into(),
            UtteranceIndex::new(1).unwrap(),
            [(ObjectId::from("o1"), NotMentioned)].into(),
        );
        assert!(matches!(err, Err(FilterError::NotAMention(_))));
    }

    fn arb_table() -> impl Strategy<Value = ConditionalStatusTable<f64>> {
        prop::array::uniform9(prop::array::uniform3(0.01f64..1.0)).prop_map(|rows| {
            ConditionalStatusTable::from_rows(rows.map(|r| normalize(r).unwrap().as_array()))
                .unwrap()
        })
    }

    fn arb_dist() -> impl Strategy<Value = StatusDistribution<f64>> {
        prop::array::uniform3(0.0f64..1.0)
            .prop_filter("non-zero", |w| w.iter().sum::<f64>() > 1e-3)
            .prop_map(|w| normalize(w).unwrap())
    }

    fn arb_ling() -> impl Strategy<Value = LinguisticStatus> {
        prop::sample::select(LinguisticStatus::ALL.to_vec())
    }

    proptest! {
        #[test]
        fn belief_stays_valid(
            table in arb_table(),
            prior in arb_dist(),
            seq in prop::collection::vec(arb_ling(), 0..20),
            hard in any::<bool>(),
        ) {
            let mode = if hard { UpdateMode::Hard } else { UpdateMode::Soft };
            let mut f = init_filter("o".into(), prior, Arc::new(table), mode);
            for (n, l) in seq.iter().enumerate() {
                let b = f.update(*l).unwrap();
                let s: f64 = b.as_array().iter().sum();
                prop_assert!((s - 1.0).abs() <= 1e-9);
                prop_assert!(b.as_array().iter().all(|p| *p >= 0.0));
                prop_assert_eq!(f.step(), n as u64 + 1);
            }
        }

        #[test]
        fn soft_prediction_is_linear(
            table in arb_table(),
            a in arb_dist(),
            b in arb_dist(),
            lambda in 0.0f64..1.0,
            l in arb_ling(),
        ) {
            let mix = StatusDistribution::from_array(std::array::from_fn(|i| {
                lambda * a.as_array()[i] + (1.0 - lambda) * b.as_array()[i]
            })).unwrap();
            let wa = predict_weights(&a, l, &table);
            let wb = predict_weights(&b, l, &table);
            let wm = predict_weights(&mix, l, &table);
            for i in 0..3 {
                prop_assert!((wm[i] - (lambda * wa[i] + (1.0 - lambda) * wb[i])).abs() <= 1e-12);
            }
        }

        #[test]
        fn replay_is_bit_identical(
            table in arb_table(),
            prior in arb_dist(),
            seq in prop::collection::vec(arb_ling(), 0..12),
        ) {
            let table = Arc::new(table);
            let mut f1 = init_filter("o".into(), prior, table.clone(), UpdateMode::Soft);
            let mut f2 = init_filter("o".into(), prior, table, UpdateMode::Soft);
            for l in &seq {
                let b1 = f1.update(*l).unwrap();
                let b2 = f2.update(*l).unwrap();
                for i in 0..3 {
                    prop_assert_eq!(b1.as_array()[i].to_bits(), b2.as_array()[i].to_bits());
                }
            }
        }
    }

    #[test]
    fn works_with_f32() {
        let table = Arc::new(ConditionalStatusTable::<f32>::uniform());
        let prior = StatusDistribution::new(0.05_f32, 0.10, 0.85).unwrap();
        let mut f = init_filter("o".into(), prior, table, UpdateMode::Soft);
        let b = f.update(MentionedTopic).unwrap();
        assert!(b.max_abs_diff(&StatusDistribution::uniform()) < 1e-6);
    }
}
