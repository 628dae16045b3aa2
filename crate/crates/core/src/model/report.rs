use serde::Serialize;

use crate::exprjet::DomainError;
use crate::par::{map_points, Execution};

/// Residual statistics of one check over a set of sample points.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub points: usize,
    pub max_residual: f64,
    pub mean_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub worst_point: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl CheckReport {
    /// Builds a report; a NaN residual counts as an infinite one.
    pub fn from_residuals(
        name: impl Into<String>,
        tolerance: f64,
        points: &[Vec<f64>],
        residuals: &[f64],
    ) -> CheckReport {
        assert_eq!(points.len(), residuals.len());
        let mut max = 0.0f64;
        let mut worst = None;
        let mut total = 0.0;
        for (p, &r) in points.iter().zip(residuals) {
            let r = if r.is_nan() { f64::INFINITY } else { r };
            total += r;
            if worst.is_none() || r > max {
                max = r;
                worst = Some(p.clone());
            }
        }
        let mean = if residuals.is_empty() { 0.0 } else { total / residuals.len() as f64 };
        CheckReport {
            name: name.into(),
            points: points.len(),
            max_residual: max,
            mean_residual: mean,
            tolerance,
            pass: max <= tolerance,
            worst_point: worst,
            note: None,
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> CheckReport {
        self.note = Some(note.into());
        self
    }
}

/// Evaluates a per-point residual over `points` and summarises it.
/// The first domain error in point order is returned.
pub fn run_check<F>(name: &str, tolerance: f64, points: &[Vec<f64>], residual: F) -> Result<CheckReport, DomainError>
where
    F: Fn(&[f64]) -> Result<f64, DomainError> + Sync + Send,
{
    let values = map_points(Execution::current(), points, residual).into_iter().collect::<Result<Vec<f64>, _>>()?;
    Ok(CheckReport::from_residuals(name, tolerance, points, &values))
}
