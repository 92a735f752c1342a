//! Cox proportional-hazards models for the simulator's death and
//! recurrence/remission events.

mod cox;
mod datasets;
mod model;
mod schema;

pub use cox::{
    evaluate_partial_likelihood, fit_cox, Evaluation, SurvivalDataset, Ties, GRADIENT_TOLERANCE,
    LOGLIK_TOLERANCE, MAX_ITERATIONS,
};
pub use datasets::{
    action_universe, death_dataset, fit_death_model, fit_recurrence_model, recurrence_dataset,
    DEFAULT_PENALTY,
};
pub use model::{CoxModel, FitDiagnostics, Timescale, MODEL_FORMAT_VERSION};
pub use schema::{
    demographics_by_patient, CovariateInput, CovariateSchema, Feature, Field, HEALTH_LEVELS,
};
