"""Hebrew diacritics restoration as word-level candidate ranking.

The toolkit builds a diacritization-pattern lexicon from a corpus, generates
candidate sets via positional KNN, renders candidates as fixed-geometry
images, scores them against a contextual embedding with a trainable
dual-encoder, and evaluates systems with the DEC/CHA/WOR/VOC metrics.
"""

__version__ = "0.1.0"

from .hebrew import (  # noqa: F401
    DiacritizationPattern,
    DiacritizedWord,
    LetterCluster,
    apply_pattern,
    extract_pattern,
    parse_word,
    strip,
    to_text,
)
from .corpus import (  # noqa: F401
    Lexicon,
    Sentence,
    Token,
    balanced_cap,
    build_lexicon,
    build_sampling_table,
    chunk_text,
    read_corpus,
    sampling_weight,
    tokenize,
)
from .candidates import (  # noqa: F401
    CandidateSet,
    KnnIndex,
    coverage,
    generate_candidates,
    knn_neighbors,
    oracle_candidates,
)
from .rendering import (  # noqa: F401
    RenderConfig,
    RenderedImage,
    mirror_rtl,
    patchify,
    render_text,
)
from .metrics import (  # noqa: F401
    EvalReport,
    WordJudgment,
    evaluate_texts,
    judge_word,
    knn1_predict,
    majority_predict,
    run_baseline,
    run_scheme,
)
from .scoring import (  # noqa: F401
    Scorer,
    ScorerConfig,
    TrainConfig,
    build_training_set,
    grad_check,
    load_checkpoint,
    save_checkpoint,
    score,
    train,
)
