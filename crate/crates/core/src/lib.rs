//! Single-source many-targets shortest paths with learned distance predictions.
//!
//! The crate provides random instance generation, an addressable priority
//! queue with operation counters, the Dijkstra baselines, Dijkstra-Prediction
//! with naive and smart restarts, trace-based and graph-based predictors,
//! training utilities and the analytic savings bounds.

pub mod bounds;
pub mod instances;
pub mod pq;
pub mod predict;
pub mod predictors;
pub mod sssp;
pub mod training;

pub use bounds::{
    identify_l_theta, inrp_bound, inrr_bound, key_lemma_check, lemma1_monte_carlo, measure_inr,
    BoundsError, BoundsParams, InrReport, KeyLemmaReport, Lemma1Report,
};
pub use instances::{
    accept_instance, derive_seed, gen_adversarial_no_savings, gen_random_instance, load_instance,
    min_hops_to_target, save_instance, AcceptedInstances, GenParams, Instance, InstanceError,
    InstanceMeta,
};
pub use pq::{AddressablePq, PqCounters, PqError};
pub use predict::{
    dijkstra_prediction, dijkstra_prediction_observed, lockstep_check, LockstepFailure,
    LockstepProperty, LockstepReport, PredictConfig, PredictError, PredictionRun, PredictionSearch,
    ReserveSet, RestartMode,
};
pub use predictors::{
    avg_benchmark_fit, bfs_predictor, trace_to_features, wbfs_predictor, ConstantPredictor,
    FeatureVector, GraphPredictor, MlpConfig, Normalizer, Optimizer, Predictor, PredictorError,
    TrainedModel,
};
pub use sssp::{
    bellman_ford_oracle, dijkstra, dijkstra_pruning, oracle_run, IterEvent, Observer, PruningRun,
    PruningSearch, RunStats, Step, Trace,
};
pub use training::{
    build_dataset, evaluate, evaluate_model, kfold_select, CvReport, Dataset, Metrics, Split,
    TrainingError,
};
