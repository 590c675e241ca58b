"""scenecheck: semantic consistency verification for segmentation label maps.

The pipeline: parse a label grid, extract scene objects, compute
pairwise relational observations, evaluate them against smoothed
co-occurrence statistics, and let a linear contradiction detector
(global or context-specific) vote on whether the scene is consistent.
"""

from .context import (
    DEFAULT_SCHEMA,
    PLACEHOLDER,
    AttributeTable,
    ContextSelectionReport,
    load_attributes,
    mutual_information,
    partition_corpus,
    score_attributes,
)
from .corpus import (
    ClassSpec,
    ContextSpec,
    Corpus,
    SyntheticConfig,
    default_synthetic_config,
    generate_contradiction,
    load_model,
    save_model,
    synth_corpus,
)
from .errors import (
    ConsistencyError,
    DegeneratePairError,
    DegenerateTrainingError,
    DimensionError,
    DuplicateError,
    EmptyCorpusError,
    EmptyDistributionError,
    FormatError,
    NotEnoughObjectsError,
    PlacementError,
    SceneCheckError,
    SchemaError,
    UnknownClassError,
    VersionError,
)
from .labelgrid import (
    DEFAULT_MIN_AREA,
    LabelGrid,
    SceneObject,
    extract_objects,
    grid_from_array,
    load_label_grid,
    parse_label_grid,
    trace_boundary,
)
from .relations import (
    K_DIST,
    OCTANTS,
    PROXIMITY_LABELS,
    PairRelation,
    ShapeHistogram,
    contact,
    norm_distance,
    octant,
    opposite_octant,
    pair_relation,
    proximity_relation,
    relations_for_objects,
    shape_histogram,
    size_log_ratio,
)
from .seeds import derive_seed
from .stats import (
    ALPHA_DEFAULT,
    SIGMA_FLOOR,
    CooccurrenceModel,
    StatsBuilder,
    accumulate,
    finalize,
    merge,
    query,
    query_size_zscore,
)
from .verifier import (
    FEATURE_NAMES,
    GLOBAL_LABEL,
    Hyperparams,
    LinearModel,
    Verdict,
    VerifierRegistry,
    aggregate,
    featurize,
    score,
    train_linear,
    train_registry,
    verify,
)

__version__ = "0.1.0"
