//! Synthetic benchmark: scenario generator with planted ground truth,
//! metrics, ablations and baselines.

pub mod generator;
pub mod hmm;
pub mod metrics;
pub mod suite;

pub use generator::{generate_synthetic, planted_groups, ActorPool, ScenarioConfig, ScenarioKind};
pub use hmm::{static_baseline, HmmBaseline, HmmConfig};
pub use metrics::{avg_joint_distance, boundary_recovery, sequence_distance};
pub use suite::{
    hmm_baseline, model_boundary_recovery, null_frequency, planted_contact_group, planted_type, run_ablation,
    run_suite, scenario_data, shares_group, static_eval, EvalReport, Method, MethodEval, SuiteConfig,
};
