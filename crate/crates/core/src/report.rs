//! Structured experiment and run reports.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

/// One measurement: a method evaluated at one level of the swept variable in one trial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub method: String,
    /// Name of the swept variable, e.g. `preserved_pct` or `ratio`.
    pub variable: String,
    pub level: f64,
    pub trial: usize,
    pub metrics: BTreeMap<String, f64>,
}

/// Mean of one metric over all trials at one (method, level).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub method: String,
    pub variable: String,
    pub level: f64,
    pub metric: String,
    pub mean: f64,
    pub trials: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub kind: String,
    pub version: String,
    /// Effective configuration; enough to rerun the producing command.
    pub params: BTreeMap<String, Value>,
    /// Run-level scalar or structured outputs (spectra, residuals, timings).
    pub metrics: BTreeMap<String, Value>,
    pub trials: Vec<TrialRecord>,
    pub aggregates: Vec<Aggregate>,
    pub notes: Vec<String>,
}

impl Report {
    pub fn new(kind: impl Into<String>) -> Self {
        Self {
            kind: kind.into(),
            version: crate::VERSION.to_string(),
            ..Default::default()
        }
    }

    pub fn param(&mut self, key: impl Into<String>, value: impl Serialize) -> &mut Self {
        self.params
            .insert(key.into(), serde_json::to_value(value).unwrap_or(Value::Null));
        self
    }

    pub fn metric(&mut self, key: impl Into<String>, value: impl Serialize) -> &mut Self {
        self.metrics
            .insert(key.into(), serde_json::to_value(value).unwrap_or(Value::Null));
        self
    }

    pub fn push_trial(&mut self, record: TrialRecord) {
        self.trials.push(record);
    }

    /// Recomputes `aggregates` as per-(method, variable, level, metric) means.
    /// Groups appear in first-seen order.
    pub fn aggregate(&mut self) {
        let mut order: Vec<(String, String, u64, String)> = Vec::new();
        let mut sums: BTreeMap<(String, String, u64, String), (f64, usize)> = BTreeMap::new();
        for t in &self.trials {
            for (m, v) in &t.metrics {
                let key = (t.method.clone(), t.variable.clone(), t.level.to_bits(), m.clone());
                let e = sums.entry(key.clone()).or_insert_with(|| {
                    order.push(key.clone());
                    (0.0, 0)
                });
                e.0 += v;
                e.1 += 1;
            }
        }
        self.aggregates = order
            .into_iter()
            .map(|key| {
                let (sum, n) = sums[&key];
                Aggregate {
                    method: key.0,
                    variable: key.1,
                    level: f64::from_bits(key.2),
                    metric: key.3,
                    mean: sum / n as f64,
                    trials: n,
                }
            })
            .collect();
    }

    /// Mean of `metric` for `method` at `level`, if recorded.
    pub fn mean(&self, method: &str, level: f64, metric: &str) -> Option<f64> {
        self.aggregates
            .iter()
            .find(|a| a.method == method && a.level == level && a.metric == metric)
            .map(|a| a.mean)
    }

    /// Plot-ready rows `level,method,trial,metric` for one metric.
    pub fn trial_table(&self, metric: &str) -> crate::io::Table {
        let variable = self
            .trials
            .first()
            .map(|t| t.variable.clone())
            .unwrap_or_else(|| "level".into());
        let header = if variable == "preserved_pct" {
            "p".to_string()
        } else {
            variable
        };
        crate::io::Table {
            header: vec![header, "method".into(), "trial".into(), metric.into()],
            rows: self
                .trials
                .iter()
                .filter_map(|t| {
                    t.metrics.get(metric).map(|v| {
                        vec![
                            t.level.to_string(),
                            t.method.clone(),
                            t.trial.to_string(),
                            v.to_string(),
                        ]
                    })
                })
                .collect(),
        }
    }
}
