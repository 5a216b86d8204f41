//! Per-episode learning metrics and their CSV forms.

use std::fmt::Write as _;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    /// Number of episodes completed when the row was logged.
    pub episode: u64,
    /// `V*_1(s1) − V^{π̂}_1(s1)` on the true model, for the policy in use.
    pub value_gap: f64,
    pub cumulative_regret: f64,
    /// Expected advice count of the policy in use, on the true model.
    pub advice_count: f64,
    /// Number of policy recomputations so far.
    pub num_updates: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w_root: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stopped: Option<bool>,
}

/// Which column set a log is written with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CsvSchema {
    /// `episode,value_gap,cumulative_regret,num_updates`
    Regret,
    /// `episode,W_root,stopped,value_gap_beta0`
    Exploration,
}

impl CsvSchema {
    pub fn header(self) -> &'static str {
        match self {
            CsvSchema::Regret => "episode,value_gap,cumulative_regret,num_updates",
            CsvSchema::Exploration => "episode,W_root,stopped,value_gap_beta0",
        }
    }

    pub fn format_row(self, row: &MetricRow) -> String {
        match self {
            CsvSchema::Regret => format!(
                "{},{},{},{}",
                row.episode, row.value_gap, row.cumulative_regret, row.num_updates
            ),
            CsvSchema::Exploration => format!(
                "{},{},{},{}",
                row.episode,
                row.w_root.map_or(String::new(), |w| w.to_string()),
                row.stopped.map_or(String::new(), |s| s.to_string()),
                row.value_gap
            ),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsLog {
    pub rows: Vec<MetricRow>,
}

impl MetricsLog {
    pub fn last(&self) -> Option<&MetricRow> {
        self.rows.last()
    }

    pub fn final_regret(&self) -> f64 {
        self.last().map_or(0.0, |r| r.cumulative_regret)
    }

    pub fn to_csv(&self, schema: CsvSchema) -> String {
        let mut out = String::with_capacity(32 * (self.rows.len() + 1));
        out.push_str(schema.header());
        out.push('\n');
        for row in &self.rows {
            let _ = writeln!(out, "{}", schema.format_row(row));
        }
        out
    }

    /// Row-wise mean over logs; truncated to the shortest log. Episode and
    /// update counters are taken from the first log.
    pub fn mean(logs: &[MetricsLog]) -> MetricsLog {
        let Some(first) = logs.first() else {
            return MetricsLog::default();
        };
        let len = logs.iter().map(|l| l.rows.len()).min().unwrap_or(0);
        let k = logs.len() as f64;
        let mean = |f: &dyn Fn(&MetricRow) -> f64, i: usize| {
            logs.iter().map(|l| f(&l.rows[i])).sum::<f64>() / k
        };
        let rows = (0..len)
            .map(|i| {
                let base = &first.rows[i];
                MetricRow {
                    episode: base.episode,
                    value_gap: mean(&|r| r.value_gap, i),
                    cumulative_regret: mean(&|r| r.cumulative_regret, i),
                    advice_count: mean(&|r| r.advice_count, i),
                    num_updates: base.num_updates,
                    w_root: base.w_root.map(|_| mean(&|r| r.w_root.unwrap_or(0.0), i)),
                    stopped: base
                        .stopped
                        .map(|_| logs.iter().all(|l| l.rows[i].stopped == Some(true))),
                }
            })
            .collect();
        MetricsLog { rows }
    }
}

/// Accumulates regret and keeps the log, optionally streaming CSV rows.
///
/// Regret at a logged row is the previous regret plus the row's value gap
/// times the number of episodes since the previous row.
pub struct Recorder {
    log: MetricsLog,
    cumulative: f64,
    last_episode: u64,
    sink: Option<(CsvSchema, Box<dyn Write + Send>)>,
}

impl std::fmt::Debug for Recorder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Recorder")
            .field("rows", &self.log.rows.len())
            .field("cumulative", &self.cumulative)
            .finish()
    }
}

impl Default for Recorder {
    fn default() -> Self {
        Self::new()
    }
}

impl Recorder {
    pub fn new() -> Self {
        Recorder {
            log: MetricsLog::default(),
            cumulative: 0.0,
            last_episode: 0,
            sink: None,
        }
    }

    /// Streams rows as CSV to `writer` as they are recorded.
    pub fn streaming(schema: CsvSchema, mut writer: Box<dyn Write + Send>) -> Result<Self> {
        writeln!(writer, "{}", schema.header()).map_err(|e| Error::io("<metrics sink>", e))?;
        let mut r = Self::new();
        r.sink = Some((schema, writer));
        Ok(r)
    }

    #[allow(clippy::too_many_arguments)]
    pub fn record(
        &mut self,
        episode: u64,
        value_gap: f64,
        advice_count: f64,
        num_updates: u64,
        w_root: Option<f64>,
        stopped: Option<bool>,
    ) -> Result<()> {
        // exact evaluation can undershoot zero by rounding
        let value_gap = value_gap.max(0.0);
        self.cumulative += value_gap * (episode - self.last_episode) as f64;
        self.last_episode = episode;
        let row = MetricRow {
            episode,
            value_gap,
            cumulative_regret: self.cumulative,
            advice_count,
            num_updates,
            w_root,
            stopped,
        };
        if let Some((schema, w)) = self.sink.as_mut() {
            writeln!(w, "{}", schema.format_row(&row))
                .map_err(|e| Error::io("<metrics sink>", e))?;
        }
        self.log.rows.push(row);
        Ok(())
    }

    pub fn finish(mut self) -> Result<MetricsLog> {
        if let Some((_, w)) = self.sink.as_mut() {
            w.flush().map_err(|e| Error::io("<metrics sink>", e))?;
        }
        Ok(self.log)
    }
}
