//! The published per-dataset scores used to reproduce the average ranks.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use erpbench_core::harness::{Metric, ScoreTable};

use super::{io_err, json_err, Error, Result};

pub const FIXTURE_DATASETS: usize = 12;
pub const FIXTURE_METHODS: usize = 15;

/// `dataset → metric → method → score` in percent.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreTableFixture {
    pub cells: BTreeMap<String, BTreeMap<Metric, BTreeMap<String, f64>>>,
}

impl ScoreTableFixture {
    pub fn get(&self, dataset: &str, metric: Metric, method: &str) -> Option<f64> {
        self.cells.get(dataset)?.get(&metric)?.get(method).copied()
    }

    pub fn n_cells(&self) -> usize {
        self.cells
            .values()
            .flat_map(|m| m.values())
            .map(|m| m.len())
            .sum()
    }

    pub fn score_table(&self) -> ScoreTable {
        let mut t = ScoreTable::new();
        for (dataset, metrics) in &self.cells {
            for (metric, methods) in metrics {
                t.insert((dataset.clone(), *metric), methods.clone());
            }
        }
        t
    }

    /// Every dataset must carry all three metrics over one common method set
    /// of the expected size.
    pub fn validate(&self) -> Result<()> {
        if self.cells.len() != FIXTURE_DATASETS {
            return Err(Error::Coverage(format!(
                "{} datasets, expected {FIXTURE_DATASETS}",
                self.cells.len()
            )));
        }
        let mut methods: Option<Vec<&String>> = None;
        for (dataset, metrics) in &self.cells {
            for metric in Metric::ALL {
                let Some(cell) = metrics.get(&metric) else {
                    return Err(Error::Coverage(format!(
                        "{dataset} lacks {}",
                        metric.name()
                    )));
                };
                let names: Vec<&String> = cell.keys().collect();
                match &methods {
                    None if names.len() != FIXTURE_METHODS => {
                        return Err(Error::Coverage(format!(
                            "{dataset}/{} has {} methods, expected {FIXTURE_METHODS}",
                            metric.name(),
                            names.len()
                        )))
                    }
                    None => methods = Some(names),
                    Some(m) if *m != names => {
                        let missing: Vec<&&String> =
                            m.iter().filter(|x| !names.contains(x)).collect();
                        return Err(Error::Coverage(format!(
                            "{dataset}/{} is missing {missing:?}",
                            metric.name()
                        )));
                    }
                    Some(_) => {}
                }
                if let Some((method, v)) = cell.iter().find(|(_, v)| !v.is_finite()) {
                    return Err(Error::Coverage(format!(
                        "{dataset}/{}/{method} is {v}",
                        metric.name()
                    )));
                }
            }
            if metrics.len() != Metric::ALL.len() {
                return Err(Error::Coverage(format!("{dataset} has unexpected metrics")));
            }
        }
        Ok(())
    }
}

pub fn load_fixture(path: &Path) -> Result<ScoreTableFixture> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let cells = serde_json::from_str(&text).map_err(json_err(path))?;
    let fixture = ScoreTableFixture { cells };
    fixture.validate()?;
    Ok(fixture)
}
