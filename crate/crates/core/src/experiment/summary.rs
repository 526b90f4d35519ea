use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::ReplicationStats;

/// Two-sided 95% Student-t critical value for `df` degrees of freedom.
pub fn student_t_975(df: usize) -> f64 {
    StudentsT::new(0.0, 1.0, df as f64)
        .expect("positive degrees of freedom")
        .inverse_cdf(0.975)
}

/// Mean over replications with its 95% confidence half-width.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Metric {
    pub mean: f64,
    /// Absent with fewer than two observations.
    pub half_width: Option<f64>,
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

impl Metric {
    pub fn from_samples(xs: &[f64]) -> Option<Metric> {
        let n = xs.len();
        if n == 0 {
            return None;
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        let half_width = (n > 1).then(|| {
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            student_t_975(n - 1) * (var / n as f64).sqrt()
        });
        Some(Metric {
            // Rounding can push a constant sample's mean a hair outside [min, max].
            mean: mean.clamp(
                xs.iter().copied().fold(f64::INFINITY, f64::min),
                xs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            ),
            half_width,
            min: xs.iter().copied().fold(f64::INFINITY, f64::min),
            max: xs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            n,
        })
    }

    fn from_counts(xs: impl Iterator<Item = u64>) -> Metric {
        let v: Vec<f64> = xs.map(|x| x as f64).collect();
        Metric::from_samples(&v).expect("at least one replication")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResourceSummary {
    pub name: String,
    pub capacity: u32,
    /// Mean over replications of each replication's average served wait.
    pub avg_wait: Option<Metric>,
    /// Largest served wait seen in any replication.
    pub max_wait: Option<f64>,
    pub utilization: Option<Metric>,
    pub renege_pct: Option<Metric>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FlowSummary {
    pub arrivals: Metric,
    pub bsy_arrivals: Metric,
    pub nbsy_arrivals: Metric,
    pub served_then_left: Metric,
    pub left_unserved: Metric,
    pub bed_renege_exit: Metric,
    pub bed_renege_stayed: Metric,
    pub still_in_system: Metric,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScenarioSummary {
    pub replications: usize,
    pub resources: Vec<ResourceSummary>,
    pub flow: FlowSummary,
    /// Per-replication results in index order.
    pub per_replication: Vec<ReplicationStats>,
}

impl ScenarioSummary {
    /// `reps` must be non-empty and in index order.
    pub fn from_replications(reps: Vec<ReplicationStats>) -> ScenarioSummary {
        assert!(!reps.is_empty(), "no replications to summarise");
        let resources = (0..reps[0].resources.len())
            .map(|k| {
                let col = |f: &dyn Fn(&super::ResourceReport) -> Option<f64>| -> Vec<f64> {
                    reps.iter().filter_map(|r| f(&r.resources[k])).collect()
                };
                let first = &reps[0].resources[k];
                ResourceSummary {
                    name: first.name.clone(),
                    capacity: first.capacity,
                    avg_wait: Metric::from_samples(&col(&|r| r.avg_wait)),
                    max_wait: col(&|r| r.max_wait).into_iter().reduce(f64::max),
                    utilization: Metric::from_samples(&col(&|r| r.utilization)),
                    renege_pct: Metric::from_samples(&col(&|r| r.renege_pct)),
                }
            })
            .collect();
        let flow = FlowSummary {
            arrivals: Metric::from_counts(reps.iter().map(|r| r.flow.arrivals)),
            bsy_arrivals: Metric::from_counts(reps.iter().map(|r| r.flow.bsy_arrivals)),
            nbsy_arrivals: Metric::from_counts(reps.iter().map(|r| r.flow.nbsy_arrivals)),
            served_then_left: Metric::from_counts(reps.iter().map(|r| r.flow.served_then_left)),
            left_unserved: Metric::from_counts(reps.iter().map(|r| r.flow.left_unserved)),
            bed_renege_exit: Metric::from_counts(reps.iter().map(|r| r.flow.bed_renege_exit)),
            bed_renege_stayed: Metric::from_counts(reps.iter().map(|r| r.flow.bed_renege_stayed)),
            still_in_system: Metric::from_counts(reps.iter().map(|r| r.flow.still_in_system)),
        };
        ScenarioSummary {
            replications: reps.len(),
            resources,
            flow,
            per_replication: reps,
        }
    }

    pub fn resource(&self, name: &str) -> Option<&ResourceSummary> {
        self.resources.iter().find(|r| r.name == name)
    }
}
