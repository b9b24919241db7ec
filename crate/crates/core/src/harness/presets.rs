use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ExperimentConfig, Inference};
use crate::acquisition::{AcquisitionKind, AcquisitionSpec};
use crate::distances::{DistanceSpec, Metric};

/// Predefined benchmark suites.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    /// Active-learning functions with SAL and the Bayesian AL baselines.
    Al,
    /// Optimization functions with SCoreBO and noisy-EI baselines.
    Bo,
}

const AL_TASKS: [&str; 6] = ["gramacy1d", "higdon", "gramacy2d", "branin-al", "ishigami", "hartmann6-al"];
const BO_TASKS: [&str; 6] = ["branin-bo", "rosenbrock2", "hartmann3", "rosenbrock4", "hartmann4", "hartmann6-bo"];

/// Repetitions per task and method.
pub const SUITE_SEEDS: u64 = 25;

fn method(label: &str, spec: AcquisitionSpec, inference: Inference) -> (String, AcquisitionSpec, Inference) {
    (label.to_string(), spec, inference)
}

/// One configuration per (task, method) pair of `suite`, writing to
/// `<root>/<suite>/<task>/<method>/`.
pub fn bench_suite(suite: Suite, root: &Path) -> Vec<ExperimentConfig> {
    let (tasks, methods, name) = match suite {
        Suite::Al => {
            let sal = |metric| AcquisitionSpec {
                distance: DistanceSpec::moment_matched(metric),
                ..AcquisitionSpec::of_kind(AcquisitionKind::Sal)
            };
            (
                &AL_TASKS,
                vec![
                    method("sal-hr", sal(Metric::Hellinger), Inference::Mcmc),
                    method("sal-ws", sal(Metric::Wasserstein2), Inference::Mcmc),
                    method("bald", AcquisitionSpec::of_kind(AcquisitionKind::Bald), Inference::Mcmc),
                    method("bqbc", AcquisitionSpec::of_kind(AcquisitionKind::Bqbc), Inference::Mcmc),
                    method("qbmgp", AcquisitionSpec::of_kind(AcquisitionKind::Qbmgp), Inference::Mcmc),
                    method("random", AcquisitionSpec::of_kind(AcquisitionKind::Random), Inference::Mcmc),
                ],
                "al",
            )
        }
        Suite::Bo => (
            &BO_TASKS,
            vec![
                method("scorebo-hr", AcquisitionSpec::of_kind(AcquisitionKind::Scorebo), Inference::Mcmc),
                method("nei", AcquisitionSpec::of_kind(AcquisitionKind::Nei), Inference::Mcmc),
                method("nei-map", AcquisitionSpec::of_kind(AcquisitionKind::Nei), Inference::Map),
                method("random", AcquisitionSpec::of_kind(AcquisitionKind::Random), Inference::Mcmc),
            ],
            "bo",
        ),
    };
    tasks
        .iter()
        .flat_map(|task| {
            methods.iter().map(move |(label, spec, inference)| ExperimentConfig {
                label: Some(label.clone()),
                task: task.to_string(),
                acquisition: *spec,
                inference: *inference,
                seeds: (0..SUITE_SEEDS).collect(),
                output_dir: root.join(name).join(task),
                ..ExperimentConfig::default()
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks::{make_task, TaskOverrides};

    #[test]
    fn suites_are_valid_and_resolve_tasks() {
        for suite in [Suite::Al, Suite::Bo] {
            let cfgs = bench_suite(suite, Path::new("out"));
            assert!(!cfgs.is_empty());
            for c in &cfgs {
                c.validate().unwrap();
                make_task(&c.task, &TaskOverrides::default()).unwrap();
            }
        }
        let al = bench_suite(Suite::Al, Path::new("out"));
        assert_eq!(al.len(), 36);
        assert_eq!(al[0].run_dir(), Path::new("out/al/gramacy1d/sal-hr"));
    }
}
