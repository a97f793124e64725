//! Statuses, distributions over statuses, and the conditional status table.
//!
//! Cognitive statuses follow the Givenness Hierarchy nesting
//! `Familiar < Activated < InFocus`. Vectors over statuses are always laid
//! out in the canonical column order `I, A, F`, and table rows in the order
//! `(I,N), (I,M), (I,T), (A,N), ... (F,T)`.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatusError {
    #[error("all weights are zero")]
    AllZeroWeights,
    #[error("weight {index} is negative or not finite")]
    InvalidWeight { index: usize },
    #[error("distribution sums to {sum}, expected 1")]
    NotNormalized { sum: f64 },
    #[error("table row {row} is invalid: {source}")]
    InvalidRow {
        row: &'static str,
        #[source]
        source: Box<StatusError>,
    },
}

/// Assumed standing of a referent in the listener's memory and attention.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CognitiveStatus {
    #[serde(rename = "I")]
    InFocus,
    #[serde(rename = "A")]
    Activated,
    #[serde(rename = "F")]
    Familiar,
}

impl CognitiveStatus {
    /// Canonical column order.
    pub const ALL: [CognitiveStatus; 3] = [Self::InFocus, Self::Activated, Self::Familiar];

    /// Column index in the canonical `I, A, F` order.
    pub fn index(self) -> usize {
        match self {
            Self::InFocus => 0,
            Self::Activated => 1,
            Self::Familiar => 2,
        }
    }

    pub fn from_index(index: usize) -> Option<Self> {
        Self::ALL.get(index).copied()
    }

    /// Position in the hierarchy; higher means more salient.
    pub fn rank(self) -> u8 {
        match self {
            Self::Familiar => 0,
            Self::Activated => 1,
            Self::InFocus => 2,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Self::InFocus => 'I',
            Self::Activated => 'A',
            Self::Familiar => 'F',
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::InFocus => "InFocus",
            Self::Activated => "Activated",
            Self::Familiar => "Familiar",
        }
    }
}

impl PartialOrd for CognitiveStatus {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for CognitiveStatus {
    fn cmp(&self, other: &Self) -> Ordering {
        self.rank().cmp(&other.rank())
    }
}

impl fmt::Display for CognitiveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// How an object figures in a single utterance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum LinguisticStatus {
    #[serde(rename = "N")]
    NotMentioned,
    #[serde(rename = "M")]
    MentionedNonTopic,
    #[serde(rename = "T")]
    MentionedTopic,
}

impl LinguisticStatus {
    pub const ALL: [LinguisticStatus; 3] = [
        Self::NotMentioned,
        Self::MentionedNonTopic,
        Self::MentionedTopic,
    ];

    pub fn index(self) -> usize {
        match self {
            Self::NotMentioned => 0,
            Self::MentionedNonTopic => 1,
            Self::MentionedTopic => 2,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Self::NotMentioned => 'N',
            Self::MentionedNonTopic => 'M',
            Self::MentionedTopic => 'T',
        }
    }

    pub fn is_mention(self) -> bool {
        self != Self::NotMentioned
    }
}

impl fmt::Display for LinguisticStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

impl FromStr for CognitiveStatus {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "I" => Ok(Self::InFocus),
            "A" => Ok(Self::Activated),
            "F" => Ok(Self::Familiar),
            other => Err(format!("unknown cognitive status {other:?}")),
        }
    }
}

impl FromStr for LinguisticStatus {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "N" => Ok(Self::NotMentioned),
            "M" => Ok(Self::MentionedNonTopic),
            "T" => Ok(Self::MentionedTopic),
            other => Err(format!("unknown linguistic status {other:?}")),
        }
    }
}

/// Probability vector over `{I, A, F}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StatusDistribution<T> {
    probs: [T; 3],
}

impl<T: Scalar> StatusDistribution<T> {
    /// Validates an explicit distribution; components must be non-negative
    /// and sum to one within [`Scalar::sum_tolerance`].
    pub fn new(p_in_focus: T, p_activated: T, p_familiar: T) -> Result<Self, StatusError> {
        Self::from_array([p_in_focus, p_activated, p_familiar])
    }

    pub fn from_array(probs: [T; 3]) -> Result<Self, StatusError> {
        for (index, p) in probs.iter().enumerate() {
            if !p.is_finite() || *p < T::zero() {
                return Err(StatusError::InvalidWeight { index });
            }
        }
        let sum = probs[0] + probs[1] + probs[2];
        if (sum - T::one()).abs() > T::sum_tolerance() {
            return Err(StatusError::NotNormalized {
                sum: sum.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(Self { probs })
    }

    pub fn uniform() -> Self {
        let third = T::one() / T::lit(3.0);
        Self { probs: [third; 3] }
    }

    /// Point mass on one status.
    pub fn certain(status: CognitiveStatus) -> Self {
        let mut probs = [T::zero(); 3];
        probs[status.index()] = T::one();
        Self { probs }
    }

    pub fn get(&self, status: CognitiveStatus) -> T {
        self.probs[status.index()]
    }

    pub fn as_array(&self) -> [T; 3] {
        self.probs
    }

    pub fn argmax(&self) -> CognitiveStatus {
        argmax_status(self)
    }

    /// Largest absolute component-wise difference.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        (0..3)
            .map(|i| (self.probs[i] - other.probs[i]).abs())
            .fold(T::zero(), T::max)
    }
}

/// Scales non-negative weights into a distribution.
pub fn normalize<T: Scalar>(weights: [T; 3]) -> Result<StatusDistribution<T>, StatusError> {
    for (index, w) in weights.iter().enumerate() {
        if !w.is_finite() || *w < T::zero() {
            return Err(StatusError::InvalidWeight { index });
        }
    }
    let sum = weights[0] + weights[1] + weights[2];
    if sum <= T::zero() {
        return Err(StatusError::AllZeroWeights);
    }
    Ok(StatusDistribution {
        probs: weights.map(|w| w / sum),
    })
}

/// Most probable status; exact ties go to the lower status (F before A before I).
pub fn argmax_status<T: Scalar>(dist: &StatusDistribution<T>) -> CognitiveStatus {
    let mut best = CognitiveStatus::Familiar;
    for status in [CognitiveStatus::Activated, CognitiveStatus::InFocus] {
        if dist.get(status) > dist.get(best) {
            best = status;
        }
    }
    best
}

/// Canonical row position of a `(previous status, linguistic status)` key.
pub fn row_index(prev: CognitiveStatus, ling: LinguisticStatus) -> usize {
    prev.index() * 3 + ling.index()
}

/// Inverse of [`row_index`].
pub fn row_key(index: usize) -> (CognitiveStatus, LinguisticStatus) {
    (
        CognitiveStatus::ALL[index / 3],
        LinguisticStatus::ALL[index % 3],
    )
}

const ROW_LABELS: [&str; 9] = [
    "(I,N)", "(I,M)", "(I,T)", "(A,N)", "(A,M)", "(A,T)", "(F,N)", "(F,M)", "(F,T)",
];

pub fn row_label(index: usize) -> &'static str {
    ROW_LABELS[index]
}

/// One row of a [`ConditionalStatusTable`].
#[derive(Debug, Clone, PartialEq)]
pub struct TableRow<T> {
    pub dist: StatusDistribution<T>,
    /// Raw training counts behind `dist`, when the row was learned.
    pub counts: Option<[u64; 3]>,
}

/// `p(S_t | S_{t-1}, L_t)` as nine row-stochastic rows.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalStatusTable<T> {
    rows: [TableRow<T>; 9],
}

impl<T: Scalar> ConditionalStatusTable<T> {
    pub fn uniform() -> Self {
        Self::from_fn(|_, _| StatusDistribution::uniform())
    }

    pub fn from_fn(
        mut f: impl FnMut(CognitiveStatus, LinguisticStatus) -> StatusDistribution<T>,
    ) -> Self {
        let rows = std::array::from_fn(|i| {
            let (prev, ling) = row_key(i);
            TableRow {
                dist: f(prev, ling),
                counts: None,
            }
        });
        Self { rows }
    }

    /// Builds a table from raw probability rows in canonical order.
    pub fn from_rows(rows: [[T; 3]; 9]) -> Result<Self, StatusError> {
        let mut out = Vec::with_capacity(9);
        for (i, row) in rows.into_iter().enumerate() {
            let dist =
                StatusDistribution::from_array(row).map_err(|e| StatusError::InvalidRow {
                    row: row_label(i),
                    source: Box::new(e),
                })?;
            out.push(TableRow { dist, counts: None });
        }
        Ok(Self {
            rows: out.try_into().expect("nine rows"),
        })
    }

    pub fn from_table_rows(rows: [TableRow<T>; 9]) -> Self {
        Self { rows }
    }

    pub fn row(&self, prev: CognitiveStatus, ling: LinguisticStatus) -> &StatusDistribution<T> {
        &self.rows[row_index(prev, ling)].dist
    }

    pub fn rows(&self) -> &[TableRow<T>; 9] {
        &self.rows
    }

    /// Largest deviation of any row sum from one.
    pub fn max_row_sum_error(&self) -> T {
        self.rows
            .iter()
            .map(|r| {
                let p = r.dist.as_array();
                (p[0] + p[1] + p[2] - T::one()).abs()
            })
            .fold(T::zero(), T::max)
    }
}

/// Row lookup for `(prev, ling)`.
pub fn table_row<T: Scalar>(
    table: &ConditionalStatusTable<T>,
    prev: CognitiveStatus,
    ling: LinguisticStatus,
) -> StatusDistribution<T> {
    *table.row(prev, ling)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use CognitiveStatus::*;

    fn dist(a: f64, b: f64, c: f64) -> StatusDistribution<f64> {
        StatusDistribution::new(a, b, c).unwrap()
    }

    #[test]
    fn order_follows_hierarchy() {
        assert!(Familiar < Activated && Activated < InFocus);
        let mut v = vec![InFocus, Familiar, Activated];
        v.sort();
        assert_eq!(v, vec![Familiar, Activated, InFocus]);
    }

    #[test]
    fn normalize_examples() {
        let u = normalize([1.0, 1.0, 1.0]).unwrap();
        assert!(u.max_abs_diff(&StatusDistribution::uniform()) < 1e-15);
        assert_eq!(
            normalize([0.0, 0.0, 2.0]).unwrap().as_array(),
            [0.0, 0.0, 1.0]
        );
        let d = normalize([0.2, 0.3, 0.5]).unwrap();
        assert!(d.max_abs_diff(&dist(0.2, 0.3, 0.5)) < 1e-15);
    }

    #[test]
    fn normalize_rejects_bad_weights() {
        assert_eq!(normalize([0.0_f64; 3]), Err(StatusError::AllZeroWeights));
        assert_eq!(
            normalize([1.0, -0.5, 1.0]),
            Err(StatusError::InvalidWeight { index: 1 })
        );
        assert!(normalize([f64::NAN, 1.0, 1.0]).is_err());
    }

    #[test]
    fn argmax_examples() {
        assert_eq!(argmax_status(&dist(0.6, 0.3, 0.1)), InFocus);
        assert_eq!(
            argmax_status(&StatusDistribution::<f64>::uniform()),
            Familiar
        );
        assert_eq!(argmax_status(&dist(0.45, 0.45, 0.10)), Activated);
        assert_eq!(argmax_status(&dist(0.1, 0.45, 0.45)), Familiar);
        assert_eq!(argmax_status(&dist(0.45, 0.1, 0.45)), Familiar);
    }

    #[test]
    fn distribution_validation() {
        assert!(StatusDistribution::new(0.5, 0.5, 0.1).is_err());
        assert!(StatusDistribution::new(1.1, -0.1, 0.0).is_err());
        assert!(StatusDistribution::new(0.05_f32, 0.10, 0.85).is_ok());
    }

    #[test]
    fn table_lookup() {
        let mut rows = [[1.0 / 3.0; 3]; 9];
        rows[row_index(InFocus, LinguisticStatus::NotMentioned)] = [0.1, 0.7, 0.2];
        let t = ConditionalStatusTable::from_rows(rows).unwrap();
        assert_eq!(
            table_row(&t, InFocus, LinguisticStatus::NotMentioned).as_array(),
            [0.1, 0.7, 0.2]
        );
        let u = ConditionalStatusTable::<f64>::uniform();
        for i in 0..9 {
            let (p, l) = row_key(i);
            assert_eq!(table_row(&u, p, l), StatusDistribution::uniform());
        }
    }

    #[test]
    fn bad_row_is_rejected() {
        let mut rows = [[1.0 / 3.0; 3]; 9];
        rows[4] = [0.3, 0.3, 0.3];
        match ConditionalStatusTable::from_rows(rows) {
            Err(StatusError::InvalidRow { row, .. }) => assert_eq!(row, "(A,M)"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn row_keys_are_canonical() {
        for i in 0..9 {
            let (p, l) = row_key(i);
            assert_eq!(row_index(p, l), i);
            assert_eq!(row_label(i), format!("({},{})", p.symbol(), l.symbol()));
        }
    }

    proptest! {
        #[test]
        fn normalize_is_scale_invariant(
            w in prop::array::uniform3(0.0f64..100.0),
            k in 1e-3f64..1e3,
        ) {
            prop_assume!(w.iter().sum::<f64>() > 1e-6);
            let a = normalize(w).unwrap();
            let b = normalize(w.map(|x| x * k)).unwrap();
            prop_assert!(a.max_abs_diff(&b) <= 1e-12);
            let s: f64 = a.as_array().iter().sum();
            prop_assert!((s - 1.0).abs() <= 1e-9);
        }

        #[test]
        fn argmax_tie_order_is_stable(p in 0.0f64..0.5) {
            // two equal components; swapping them never changes the winner
            let rest = 1.0 - 2.0 * p;
            let d1 = dist(p, p, rest);
            let d2 = dist(p, rest, p);
            let d3 = dist(rest, p, p);
            for d in [d1, d2, d3] {
                let got = argmax_status(&d);
                let max = d.as_array().iter().cloned().fold(f64::MIN, f64::max);
                let lowest = [Familiar, Activated, InFocus]
                    .into_iter()
                    .find(|s| d.get(*s) == max)
                    .unwrap();
                prop_assert_eq!(got, lowest);
            }
        }
    }
}
