"""Knowledge-graph link prediction with taxonomy-constrained embeddings.

Models: SimplE, SimplE+ (non-negative entity embeddings with delta-tied
relations enforcing subsumption rules) and ComplEx, plus a pure
rule-closure inference baseline, contrastive training, ranking-based
evaluation, and executable checks of the expressivity and subsumption
guarantees.
"""

from .data import (
    Dataset,
    Direction,
    ParseError,
    SubsumptionRule,
    Triple,
    TripleStore,
    Vocabulary,
    dataset_stats,
    load_dataset,
    parse_rule_file,
    parse_triple_file,
    subsample_train,
)
from .evaluation import EvalReport, evaluate, rank_triple
from .logic import ClosureResult, forward_closure, logical_hit1, strip_redundant
from .models import (
    EmbeddingModel,
    ModelKind,
    Nonlinearity,
    effective_relation,
    embed_entity,
    init_params,
    load_checkpoint,
    multilinear_product,
    probability,
    save_checkpoint,
    score,
    score_complex,
    score_simple,
)
from .training import LossTrace, TrainConfig, negative_batch, batch_loss, train

__version__ = "0.1.0"

__all__ = [
    "Dataset",
    "Direction",
    "ParseError",
    "SubsumptionRule",
    "Triple",
    "TripleStore",
    "Vocabulary",
    "dataset_stats",
    "load_dataset",
    "parse_rule_file",
    "parse_triple_file",
    "subsample_train",
    "EvalReport",
    "evaluate",
    "rank_triple",
    "ClosureResult",
    "forward_closure",
    "logical_hit1",
    "strip_redundant",
    "EmbeddingModel",
    "ModelKind",
    "Nonlinearity",
    "effective_relation",
    "embed_entity",
    "init_params",
    "load_checkpoint",
    "multilinear_product",
    "probability",
    "save_checkpoint",
    "score",
    "score_complex",
    "score_simple",
    "LossTrace",
    "TrainConfig",
    "negative_batch",
    "batch_loss",
    "train",
]
