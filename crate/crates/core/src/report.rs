use serde::{Deserialize, Serialize};

/// Location of a sample in `(s, t)` and optionally `r`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplePoint {
    pub s: f64,
    pub t: f64,
    pub r: Option<f64>,
}

impl SamplePoint {
    pub fn st(s: f64, t: f64) -> Self {
        Self { s, t, r: None }
    }

    pub fn str(s: f64, t: f64, r: f64) -> Self {
        Self { s, t, r: Some(r) }
    }
}

/// Statistics of one residual condition over the sampled points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub name: String,
    pub max: f64,
    pub mean: f64,
    pub worst: Option<SamplePoint>,
}

/// Per-condition defects over a sample grid with a pass verdict.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub conditions: Vec<Condition>,
    /// Samples that entered the statistics.
    pub samples: usize,
    /// Samples left out because the frame there is degenerate.
    pub excluded: usize,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(default)]
    pub warnings: Vec<String>,
}

impl ResidualReport {
    pub(crate) fn from_tallies(
        named: Vec<(&str, Tally)>,
        excluded: usize,
        tolerance: f64,
    ) -> Self {
        let samples = named.first().map_or(0, |(_, t)| t.count);
        let conditions: Vec<Condition> = named
            .into_iter()
            .map(|(name, t)| Condition {
                name: name.to_string(),
                max: t.max,
                mean: t.mean(),
                worst: t.worst,
            })
            .collect();
        let pass = samples > 0 && conditions.iter().all(|c| c.max < tolerance);
        Self {
            conditions,
            samples,
            excluded,
            tolerance,
            pass,
            warnings: Vec::new(),
        }
    }

    /// Largest defect over all conditions.
    pub fn max(&self) -> f64 {
        self.conditions.iter().map(|c| c.max).fold(0.0, f64::max)
    }

    pub fn condition(&self, name: &str) -> Option<&Condition> {
        self.conditions.iter().find(|c| c.name == name)
    }

    /// Names of the conditions at or above tolerance.
    pub fn failing(&self) -> Vec<&str> {
        self.conditions
            .iter()
            .filter(|c| !(c.max < self.tolerance))
            .map(|c| c.name.as_str())
            .collect()
    }
}

/// Running max/mean of a nonnegative defect. Non-finite values count as
/// infinite.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct Tally {
    pub max: f64,
    pub sum: f64,
    pub count: usize,
    pub worst: Option<SamplePoint>,
}

impl Tally {
    pub fn push(&mut self, value: f64, at: SamplePoint) {
        let v = if value.is_finite() { value } else { f64::INFINITY };
        if self.worst.is_none() || v > self.max {
            self.max = v;
            self.worst = Some(at);
        }
        self.sum += v;
        self.count += 1;
    }

    pub fn merge(&mut self, other: &Tally) {
        if other.count == 0 {
            return;
        }
        if self.worst.is_none() || other.max > self.max {
            self.max = other.max;
            self.worst = other.worst;
        }
        self.sum += other.sum;
        self.count += other.count;
    }

    pub fn mean(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            self.sum / self.count as f64
        }
    }
}
