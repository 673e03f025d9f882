from gailkit.harness.experiments import (
    RunConfig,
    ScoreRecord,
    evaluate,
    exact_match,
    imitate,
    run_experiment,
    sample_trajectories,
    scaled_score,
    train_env_expert,
)
from gailkit.harness.plot import emit_plot
