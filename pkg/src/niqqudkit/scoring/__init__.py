from .model import (  # noqa: F401
    Example,
    ScoreDistribution,
    Scorer,
    ScorerConfig,
    load_checkpoint,
    save_checkpoint,
    score,
)
from .gradcheck import grad_check  # noqa: F401
from .training import (  # noqa: F401
    TrainConfig,
    TrainingSet,
    TrainResult,
    build_training_set,
    oracle_accuracy,
    train,
)
