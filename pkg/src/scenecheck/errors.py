"""Exception hierarchy shared by all scenecheck modules.

Every error raised on bad input derives from SceneCheckError so callers
(and the CLI) can distinguish validation failures from genuine bugs.
"""


class SceneCheckError(Exception):
    """Base class for all input-validation errors raised by this package."""


class FormatError(SceneCheckError):
    """Malformed text or JSON document (ragged rows, bad tokens, corrupt file)."""


class UnknownClassError(SceneCheckError):
    """A class id is not present in the class map / model universe."""


class DegeneratePairError(SceneCheckError):
    """An object pair has no defined direction (identical centroids)."""


class ConsistencyError(SceneCheckError):
    """Relations and objects passed together do not describe the same scene."""


class SchemaError(SceneCheckError):
    """A value or field violates the declared schema."""


class DuplicateError(SceneCheckError):
    """Duplicate image id in an annotation file."""


class EmptyCorpusError(SceneCheckError):
    """An operation requiring at least one image got none."""


class EmptyDistributionError(SceneCheckError):
    """A count table is all zero where a distribution is required."""


class DegenerateTrainingError(SceneCheckError):
    """Training data contains only one label class."""


class DimensionError(SceneCheckError):
    """Feature vector length does not match the model."""


class NotEnoughObjectsError(SceneCheckError):
    """Contradiction generation needs at least two objects."""


class PlacementError(SceneCheckError):
    """Synthetic object placement failed after bounded retries."""


class VersionError(SceneCheckError):
    """Serialized document carries an unsupported schema version."""
