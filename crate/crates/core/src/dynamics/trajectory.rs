//! Propagation output: sampled populations plus run metadata.

use super::integrator::IntegratorStats;
use crate::error::{Error, Result};
use crate::spin::StateLabel;
use nalgebra::DVector;
use num_complex::Complex64 as C64;
use serde_json::json;
use std::io::Write;

#[derive(Clone, Debug)]
pub struct Trajectory {
    /// Sample times, s.
    pub times: Vec<f64>,
    /// Level labels, fixed ordering for the population columns.
    pub labels: Vec<StateLabel>,
    /// `populations[k][i]` = population of level `i` at `times[k]`.
    pub populations: Vec<Vec<f64>>,
    /// State vector at the final sample.
    pub final_state: DVector<C64>,
    /// Max `| ||psi|| - 1 |` over all samples.
    pub norm_drift: f64,
    /// Frame descriptor for the metadata sidecar.
    pub frame: String,
    pub stats: IntegratorStats,
}

impl Trajectory {
    fn column(&self, label: StateLabel) -> Result<usize> {
        self.labels
            .iter()
            .position(|&l| l == label)
            .ok_or(Error::UnknownLabel(label))
    }

    /// Population time series of one level.
    pub fn population(&self, label: StateLabel) -> Result<Vec<f64>> {
        let c = self.column(label)?;
        Ok(self.populations.iter().map(|row| row[c]).collect())
    }

    pub fn final_population(&self, label: StateLabel) -> Result<f64> {
        let c = self.column(label)?;
        Ok(self.populations.last().map(|row| row[c]).unwrap_or(0.0))
    }

    /// Largest population any level reaches over the run.
    pub fn peak_population(&self, label: StateLabel) -> Result<f64> {
        let c = self.column(label)?;
        Ok(self
            .populations
            .iter()
            .map(|row| row[c])
            .fold(0.0, f64::max))
    }

    /// CSV export: `time_us` then one population column per labeled state.
    pub fn write_csv<W: Write>(&self, sink: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(sink);
        let mut header = vec!["time_us".to_string()];
        header.extend(self.labels.iter().map(|l| format!("p{l}")));
        w.write_record(&header).map_err(csv_err)?;
        for (k, t) in self.times.iter().enumerate() {
            let mut row = vec![format!("{:.9}", t * 1e6)];
            row.extend(self.populations[k].iter().map(|p| format!("{p:.12e}")));
            w.write_record(&row).map_err(csv_err)?;
        }
        w.flush().map_err(|e| Error::InvalidConfig(e.to_string()))?;
        Ok(())
    }

    /// Run metadata for the JSON sidecar.
    pub fn metadata(&self) -> serde_json::Value {
        json!({
            "frame": self.frame,
            "samples": self.times.len(),
            "duration_us": self.times.last().map(|t| t * 1e6).unwrap_or(0.0),
            "norm_drift": self.norm_drift,
            "integrator": {
                "steps": self.stats.steps,
                "rejected": self.stats.rejected,
                "rhs_evals": self.stats.rhs_evals,
            },
        })
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::InvalidConfig(format!("csv write: {e}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_has_header_and_rows() {
        let traj = Trajectory {
            times: vec![0.0, 1e-6],
            labels: vec![StateLabel::new(1, 0), StateLabel::new(2, 0)],
            populations: vec![vec![1.0, 0.0], vec![0.25, 0.75]],
            final_state: DVector::from_vec(vec![C64::new(0.5, 0.0), C64::new(0.75f64.sqrt(), 0.0)]),
            norm_drift: 1e-12,
            frame: "rotating".into(),
            stats: IntegratorStats::default(),
        };
        let mut buf = Vec::new();
        traj.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "time_us,\"p|1,0>\",\"p|2,0>\"");
        assert!(lines.next().unwrap().starts_with("0.000000000,"));
        assert_eq!(text.lines().count(), 3);
        assert_eq!(traj.final_population(StateLabel::new(2, 0)).unwrap(), 0.75);
        assert!(traj.population(StateLabel::new(3, 0)).is_err());
    }
}
