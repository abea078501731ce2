//! Average-rank aggregation over (dataset, metric) cells.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::classify::average_ranks;
use crate::error::bail;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Metric {
    Accuracy,
    F1,
    #[serde(rename = "AUROC")]
    Auroc,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::Accuracy, Metric::F1, Metric::Auroc];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Accuracy => "Accuracy",
            Metric::F1 => "F1",
            Metric::Auroc => "AUROC",
        }
    }

    pub fn of(self, m: &crate::classify::MetricSet) -> f64 {
        match self {
            Metric::Accuracy => m.accuracy,
            Metric::F1 => m.f1_macro,
            Metric::Auroc => m.auroc,
        }
    }
}

/// `(dataset, metric) → method → score`.
pub type ScoreTable = BTreeMap<(String, Metric), BTreeMap<String, f64>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankTable {
    pub entries: BTreeMap<(String, Metric, String), f64>,
    pub avg_rank: BTreeMap<String, f64>,
    pub n_cells: usize,
}

impl RankTable {
    /// Methods sorted by average rank, best first; ties keep name order.
    pub fn ordered(&self) -> Vec<(&str, f64)> {
        let mut v: Vec<(&str, f64)> = self
            .avg_rank
            .iter()
            .map(|(m, r)| (m.as_str(), *r))
            .collect();
        v.sort_by(|a, b| a.1.total_cmp(&b.1));
        v
    }
}

/// Ranks methods within each cell (highest score = rank 1, ties averaged) and
/// averages over cells.
pub fn aggregate_and_rank(table: &ScoreTable) -> Result<RankTable> {
    let mut cells = table.iter();
    let Some((_, first)) = cells.next() else {
        bail!(Coverage, "no evaluation cells");
    };
    let methods: Vec<&String> = first.keys().collect();
    if methods.is_empty() {
        bail!(Coverage, "cells contain no methods");
    }
    for ((dataset, metric), scores) in table {
        if !scores.keys().eq(methods.iter().copied()) {
            bail!(
                Coverage,
                "{dataset}/{} covers a different method set",
                metric.name()
            );
        }
        if scores.values().any(|v| !v.is_finite()) {
            bail!(Data, "{dataset}/{} holds a non-finite score", metric.name());
        }
    }
    let mut entries = BTreeMap::new();
    let mut sums: BTreeMap<String, f64> = methods.iter().map(|m| ((*m).clone(), 0.0)).collect();
    for ((dataset, metric), scores) in table {
        let negated: Vec<f64> = scores.values().map(|v| -v).collect();
        for ((method, _), r) in scores.iter().zip(average_ranks(&negated)) {
            entries.insert((dataset.clone(), *metric, method.clone()), r);
            *sums.get_mut(method).unwrap() += r;
        }
    }
    let n_cells = table.len();
    let avg_rank = sums
        .into_iter()
        .map(|(m, s)| (m, s / n_cells as f64))
        .collect();
    Ok(RankTable {
        entries,
        avg_rank,
        n_cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::format;
    use alloc::vec;
    use proptest::prelude::*;

    fn table(cells: &[&[(&str, f64)]]) -> ScoreTable {
        cells
            .iter()
            .enumerate()
            .map(|(i, c)| {
                (
                    (format!("d{i}"), Metric::F1),
                    c.iter().map(|(m, v)| (String::from(*m), *v)).collect(),
                )
            })
            .collect()
    }

    #[test]
    fn trivial_cases() {
        let t = aggregate_and_rank(&table(&[&[("a", 0.3)], &[("a", 0.9)]])).unwrap();
        assert_eq!(t.avg_rank["a"], 1.0);
        let t = aggregate_and_rank(&table(&[
            &[("a", 0.3), ("b", 0.3)],
            &[("a", 0.5), ("b", 0.5)],
        ]))
        .unwrap();
        assert_eq!((t.avg_rank["a"], t.avg_rank["b"]), (1.5, 1.5));
        let t = aggregate_and_rank(&table(&[&[("a", 0.1), ("b", 0.9), ("c", 0.5)]])).unwrap();
        assert_eq!(t.ordered(), vec![("b", 1.0), ("c", 2.0), ("a", 3.0)]);
    }

    #[test]
    fn coverage_mismatch() {
        let t = table(&[&[("a", 0.3), ("b", 0.1)], &[("a", 0.9)]]);
        assert!(matches!(
            aggregate_and_rank(&t),
            Err(crate::Error::Coverage(_))
        ));
        assert!(aggregate_and_rank(&ScoreTable::new()).is_err());
    }

    proptest! {
        #[test]
        fn rank_sums(scores in proptest::collection::vec(proptest::collection::vec(0u8..6, 7), 1..6)) {
            let names = ["a", "b", "c", "d", "e", "f", "g"];
            let owned: Vec<Vec<(&str, f64)>> = scores.iter().map(|c| names.iter().zip(c).map(|(n, v)| (*n, f64::from(*v))).collect()).collect();
            let refs: Vec<&[(&str, f64)]> = owned.iter().map(|v| v.as_slice()).collect();
            let t = aggregate_and_rank(&table(&refs)).unwrap();
            for i in 0..scores.len() {
                let d = format!("d{i}");
                let s: f64 = t.entries.iter().filter(|((ds, _, _), _)| *ds == d).map(|(_, r)| r).sum();
                prop_assert_eq!(s, 28.0);
            }
        }
    }
}
