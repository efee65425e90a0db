//! Training loop, metrics, cross-validation, ablations and prediction export.

mod compare;
mod cv;
mod eval;
mod metrics;
mod trainer;

pub use compare::{compare_ablations, AblationEntry, AblationReport, SplitMetrics};
pub use cv::{cross_validate, CvCandidate, CvPlan, CvResult, CvRound};
pub use eval::{
    daily_predictions_to_jsonl, evaluate, export_predictions, parse_daily_predictions, persistence_mse,
    predict, price_mse, price_rows, price_rows_to_csv, DailyPrediction, PriceRow, PREDICTIONS_CSV_HEADER,
};
pub use metrics::{render_table, ClassMetrics, ConfusionMatrix, MetricsReport};
pub use trainer::{history_to_jsonl, mean_loss, train, write_history, EpochRecord, LossSummary, TrainConfig, TrainOutcome};
