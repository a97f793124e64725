//! Conditional status table file.
//!
//! ```json
//! {
//!   "format_version": 1,
//!   "columns": ["I", "A", "F"],
//!   "rows": [
//!     {"prev": "I", "ling": "N", "probs": [0.1, 0.7, 0.2], "counts": [2, 14, 4]},
//!     ...
//!   ]
//! }
//! ```
//!
//! Rows appear in canonical order `(I,N) … (F,T)`; `counts` may be `null`.

use serde::{Deserialize, Serialize};

use super::{check_version, from_json, to_json, IoError, FORMAT_VERSION};
use crate::status::{
    row_key, row_label, CognitiveStatus, ConditionalStatusTable, LinguisticStatus,
    StatusDistribution, TableRow,
};

/// Rows may be off by this much on read (hand-edited decimals).
pub const READ_ROW_TOLERANCE: f64 = 1e-6;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRow {
    prev: CognitiveStatus,
    ling: LinguisticStatus,
    probs: [f64; 3],
    counts: Option<[u64; 3]>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTable {
    format_version: u32,
    columns: [CognitiveStatus; 3],
    rows: Vec<RawRow>,
}

pub fn write_table(table: &ConditionalStatusTable<f64>) -> String {
    let rows = table
        .rows()
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let (prev, ling) = row_key(i);
            RawRow {
                prev,
                ling,
                probs: r.dist.as_array(),
                counts: r.counts,
            }
        })
        .collect();
    to_json(&RawTable {
        format_version: FORMAT_VERSION,
        columns: CognitiveStatus::ALL,
        rows,
    })
}

pub fn read_table(bytes: &[u8]) -> Result<ConditionalStatusTable<f64>, IoError> {
    let raw: RawTable = from_json(bytes)?;
    check_version(raw.format_version)?;
    if raw.columns != CognitiveStatus::ALL {
        return Err(IoError::Schema {
            path: "columns".into(),
            message: "columns must be [\"I\", \"A\", \"F\"]".into(),
        });
    }
    if raw.rows.len() != 9 {
        return Err(IoError::Schema {
            path: "rows".into(),
            message: format!("expected 9 rows, found {}", raw.rows.len()),
        });
    }
    let mut rows = Vec::with_capacity(9);
    for (i, r) in raw.rows.into_iter().enumerate() {
        let label = row_label(i);
        if (r.prev, r.ling) != row_key(i) {
            return Err(IoError::Schema {
                path: format!("rows[{i}]"),
                message: format!("expected row {label}"),
            });
        }
        if r.probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(IoError::InvalidRow {
                row: label.into(),
                message: "probabilities must be finite and non-negative".into(),
            });
        }
        let sum: f64 = r.probs.iter().sum();
        if (sum - 1.0).abs() > READ_ROW_TOLERANCE {
            return Err(IoError::RowSumError {
                row: label.into(),
                sum,
            });
        }
        let dist = match StatusDistribution::from_array(r.probs) {
            Ok(d) => d,
            // within read tolerance but outside the in-memory one
            Err(_) => crate::status::normalize(r.probs).expect("positive row sum"),
        };
        rows.push(TableRow {
            dist,
            counts: r.counts,
        });
    }
    Ok(ConditionalStatusTable::from_table_rows(
        rows.try_into().expect("nine rows"),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::train::{normalize_counts, TransitionCounts};
    use proptest::prelude::*;

    #[test]
    fn uniform_round_trip() {
        let t = ConditionalStatusTable::<f64>::uniform();
        assert_eq!(read_table(write_table(&t).as_bytes()).unwrap(), t);
    }

    #[test]
    fn short_row_is_rejected() {
        let text = write_table(&ConditionalStatusTable::uniform());
        let mut doc: serde_json::Value = serde_json::from_str(&text).unwrap();
        doc["rows"][2]["probs"] = serde_json::json!([0.3, 0.3, 0.3]);
        let err = read_table(doc.to_string().as_bytes()).unwrap_err();
        assert!(
            matches!(err, IoError::RowSumError { ref row, .. } if row == "(I,T)"),
            "{err}"
        );
    }

    #[test]
    fn rounded_decimals_are_accepted() {
        let text = write_table(&ConditionalStatusTable::uniform());
        let mut doc: serde_json::Value = serde_json::from_str(&text).unwrap();
        doc["rows"][0]["probs"] = serde_json::json!([0.3333333, 0.3333333, 0.3333334]);
        let t = read_table(doc.to_string().as_bytes()).unwrap();
        assert!(t.max_row_sum_error() < 1e-12);
    }

    #[test]
    fn row_order_is_enforced() {
        let text = write_table(&ConditionalStatusTable::uniform());
        let mut doc: serde_json::Value = serde_json::from_str(&text).unwrap();
        doc["rows"][0]["ling"] = serde_json::json!("T");
        assert!(read_table(doc.to_string().as_bytes())
            .unwrap_err()
            .is_parse_error());
        let mut doc: serde_json::Value = serde_json::from_str(&text).unwrap();
        doc["rows"].as_array_mut().unwrap().pop();
        assert!(read_table(doc.to_string().as_bytes())
            .unwrap_err()
            .is_parse_error());
    }

    proptest! {
        #[test]
        fn trained_tables_round_trip_bit_exact(
            cells in prop::array::uniform9(prop::array::uniform3(0u64..10_000)),
            alpha in prop::sample::select(vec![0.0, 0.5, 1.0, 0.1]),
        ) {
            let t = normalize_counts(&TransitionCounts::from_cells(cells), alpha).unwrap().table;
            let text = write_table(&t);
            let back = read_table(text.as_bytes()).unwrap();
            for (a, b) in t.rows().iter().zip(back.rows()) {
                for (x, y) in a.dist.as_array().iter().zip(b.dist.as_array()) {
                    prop_assert_eq!(x.to_bits(), y.to_bits());
                }
                prop_assert_eq!(a.counts, b.counts);
            }
            prop_assert_eq!(write_table(&back), text);
        }
    }
}
