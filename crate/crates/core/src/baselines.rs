//! Rule-based FSM and seeded random baselines.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;
use crate::status::{
    CognitiveStatus, ConditionalStatusTable, LinguisticStatus, StatusDistribution,
};

/// Identifier of the pseudorandom stream, echoed in reports.
pub const RNG_ALGORITHM: &str = "chacha8";

/// What happens to an object that goes unmentioned.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecayPolicy {
    /// Drop one tier: I → A → F.
    #[default]
    DecayOne,
    Persist,
}

impl std::str::FromStr for DecayPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "decay-one" => Ok(Self::DecayOne),
            "persist" => Ok(Self::Persist),
            other => Err(format!(
                "unknown decay policy {other:?} (expected decay-one|persist)"
            )),
        }
    }
}

/// Total map `(state, linguistic status) → next state`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FsmTransitionTable {
    next: [[CognitiveStatus; 3]; 3],
    decay_policy: DecayPolicy,
}

impl FsmTransitionTable {
    /// Topic mention → InFocus, non-topic mention → Activated, and no
    /// mention per `decay_policy`.
    pub fn standard(decay_policy: DecayPolicy) -> Self {
        use CognitiveStatus::*;
        let next = CognitiveStatus::ALL.map(|state| {
            LinguisticStatus::ALL.map(|ling| match ling {
                LinguisticStatus::MentionedTopic => InFocus,
                LinguisticStatus::MentionedNonTopic => Activated,
                LinguisticStatus::NotMentioned => match (decay_policy, state) {
                    (DecayPolicy::Persist, s) => s,
                    (DecayPolicy::DecayOne, InFocus) => Activated,
                    (DecayPolicy::DecayOne, _) => Familiar,
                },
            })
        });
        Self { next, decay_policy }
    }

    pub fn decay_policy(&self) -> DecayPolicy {
        self.decay_policy
    }

    pub fn next(&self, state: CognitiveStatus, ling: LinguisticStatus) -> CognitiveStatus {
        self.next[state.index()][ling.index()]
    }

    /// The conditional table that puts all mass on the FSM's next state.
    pub fn to_one_hot_table<T: Scalar>(&self) -> ConditionalStatusTable<T> {
        ConditionalStatusTable::from_fn(|prev, ling| {
            StatusDistribution::certain(self.next(prev, ling))
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FsmModel {
    state: CognitiveStatus,
    table: FsmTransitionTable,
}

impl FsmModel {
    pub fn new(start: CognitiveStatus, table: FsmTransitionTable) -> Self {
        Self {
            state: start,
            table,
        }
    }

    pub fn state(&self) -> CognitiveStatus {
        self.state
    }

    pub fn step(&mut self, ling: LinguisticStatus) -> CognitiveStatus {
        self.state = self.table.next(self.state, ling);
        self.state
    }
}

pub fn fsm_init(start: CognitiveStatus, policy: DecayPolicy) -> FsmModel {
    FsmModel::new(start, FsmTransitionTable::standard(policy))
}

/// Scene objects start out Familiar.
impl Default for FsmModel {
    fn default() -> Self {
        fsm_init(CognitiveStatus::Familiar, DecayPolicy::default())
    }
}

pub fn fsm_step(model: &mut FsmModel, ling: LinguisticStatus) -> CognitiveStatus {
    model.step(ling)
}

/// Uniform guesses over `{I, A, F}` from a seeded generator.
#[derive(Debug, Clone)]
pub struct RandomBaseline {
    seed: u64,
    rng: ChaCha8Rng,
}

impl RandomBaseline {
    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    /// Independent stream `stream` under the same seed.
    pub fn with_stream(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { seed, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn predict(&mut self) -> CognitiveStatus {
        CognitiveStatus::ALL[self.rng.random_range(0..3)]
    }
}

pub fn random_predict(b: &mut RandomBaseline) -> CognitiveStatus {
    b.predict()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use CognitiveStatus::*;
    use LinguisticStatus::*;

    #[test]
    fn standard_transitions() {
        let mut m = fsm_init(Familiar, DecayPolicy::DecayOne);
        assert_eq!(fsm_step(&mut m, MentionedTopic), InFocus);
        let mut m = fsm_init(Familiar, DecayPolicy::DecayOne);
        assert_eq!(fsm_step(&mut m, MentionedNonTopic), Activated);
        let mut m = fsm_init(InFocus, DecayPolicy::DecayOne);
        assert_eq!(fsm_step(&mut m, NotMentioned), Activated);
        assert_eq!(fsm_step(&mut m, NotMentioned), Familiar);
        assert_eq!(fsm_step(&mut m, NotMentioned), Familiar);
        let mut m = fsm_init(InFocus, DecayPolicy::Persist);
        assert_eq!(fsm_step(&mut m, NotMentioned), InFocus);
        let mut m = fsm_init(InFocus, DecayPolicy::Persist);
        assert_eq!(fsm_step(&mut m, MentionedNonTopic), Activated);
    }

    #[test]
    fn init_states() {
        assert_eq!(fsm_init(Familiar, DecayPolicy::Persist).state(), Familiar);
        assert_eq!(
            fsm_init(Activated, DecayPolicy::DecayOne).state(),
            Activated
        );
        assert_eq!(FsmModel::default().state(), Familiar);
    }

    #[test]
    fn mention_rules_hold_for_both_policies() {
        for policy in [DecayPolicy::DecayOne, DecayPolicy::Persist] {
            let t = FsmTransitionTable::standard(policy);
            for s in CognitiveStatus::ALL {
                assert_eq!(t.next(s, MentionedTopic), InFocus);
                assert_eq!(t.next(s, MentionedNonTopic), Activated);
            }
        }
    }

    #[test]
    fn one_hot_table_lookup() {
        let t: ConditionalStatusTable<f64> =
            FsmTransitionTable::standard(DecayPolicy::DecayOne).to_one_hot_table();
        assert_eq!(t.row(Familiar, MentionedTopic).as_array(), [1.0, 0.0, 0.0]);
        assert_eq!(t.row(InFocus, NotMentioned).as_array(), [0.0, 1.0, 0.0]);
        assert!(t.max_row_sum_error() == 0.0);
    }

    #[test]
    fn random_is_reproducible() {
        let mut a = RandomBaseline::new(42);
        let mut b = RandomBaseline::new(42);
        let xs: Vec<_> = (0..3).map(|_| random_predict(&mut a)).collect();
        let ys: Vec<_> = (0..3).map(|_| random_predict(&mut b)).collect();
        assert_eq!(xs, ys);
        let mut c = RandomBaseline::with_stream(42, 1);
        let zs: Vec<_> = (0..64).map(|_| c.predict()).collect();
        let ws: Vec<_> = (0..64).map(|_| RandomBaseline::new(42).predict()).collect();
        assert_ne!(zs, ws);
    }

    #[test]
    fn random_is_uniform() {
        let mut b = RandomBaseline::new(7);
        let mut counts = [0usize; 3];
        let n = 30_000;
        for _ in 0..n {
            counts[b.predict().index()] += 1;
        }
        for c in counts {
            assert!((c as f64 / n as f64 - 1.0 / 3.0).abs() < 0.02, "{counts:?}");
        }
    }

    fn arb_ling() -> impl Strategy<Value = LinguisticStatus> {
        prop::sample::select(LinguisticStatus::ALL.to_vec())
    }

    proptest! {
        #[test]
        fn fsm_replay(seq in prop::collection::vec(arb_ling(), 0..16), start in 0usize..3) {
            let start = CognitiveStatus::ALL[start];
            let mut a = fsm_init(start, DecayPolicy::DecayOne);
            let mut b = fsm_init(start, DecayPolicy::DecayOne);
            for l in seq {
                prop_assert_eq!(a.step(l), b.step(l));
            }
        }
    }
}
