"""meir: categorical content-based retrieval evaluation engine."""

from .fusion import (
    FusionMode,
    FusionSpec,
    PcaModel,
    average_features,
    concat_features,
    pca_fit,
    pca_project,
    score_fusion,
    select_best_two,
)
from .index import (
    ExactIndex,
    Metric,
    RankedList,
    RunResult,
    TimingReport,
    build_index,
    naive_search,
    search,
    search_batch,
    timed_search,
    timing_noise,
)
from .metrics import (
    EvalTable,
    RelevanceJudger,
    evaluate_run,
    ndcg_at_k,
    precision_at_k,
    recall_at_k,
)
from .splitter import Partition, SplitAssignment, SplitRatios, stratified_split
from .stats import (
    BootstrapResult,
    TestResult,
    bootstrap_ci,
    cohens_d,
    mann_whitney_u,
    paired_t_test,
)
from .store import (
    EmbeddingSet,
    LabelSpace,
    Manifest,
    assert_disjoint,
    l2_normalize,
    load_embedding_set,
    read_manifest,
    save_embedding_set,
)

__version__ = "0.1.0"
