from src.trainer.ablation import run_ablation
from src.trainer.grid import grid_search
from src.trainer.metrics import (
    EvaluationResult,
    evaluate,
    evaluate_mae,
    global_mean_baseline,
    mean_absolute_error,
    predict_examples,
    root_mean_squared_error,
)
from src.trainer.optim import SGD, Adam, make_optimizer
from src.trainer.training import (
    CorpusSplits,
    Trainer,
    TrainingDivergedError,
    TrainingResult,
    batch_loss,
    save_run,
    train,
)
