from __future__ import annotations

import os
import typing as t
from pathlib import Path

import pydantic
from loguru import logger

from testmet import utils
from testmet.classfile import DEFAULT_MAX_MAJOR_VERSION
from testmet.classifiers import (
    ClassifierKind,
    ClassifierParams,
    ForestParams,
    MlpParams,
    TreeParams,
)
from testmet.exc import InputError
from testmet.models import FeatureSet, MetricId, TestmetModel
from testmet.ranking import ALL_ALGORITHMS, RankingAlgorithm
from testmet.stats import DEFAULT_THRESHOLD, Population

if t.TYPE_CHECKING:
    import collections.abc as c

type PositiveInt = t.Annotated[int, pydantic.Field(ge=1)]

# keys whose values are comma separated lists in a config file
_LIST_KEYS = frozenset(
    {"src", "classes", "features", "classifiers", "ranking", "quartiles"}
)
# never part of a manifest; they change where or how fast, not what
_RUNTIME_KEYS = frozenset({"out", "jobs"})


class RunConfig(TestmetModel, frozen=True):
    """Everything a command needs, config file and flags merged."""

    src: tuple[Path, ...] = ()
    """Java source roots; the metric source when no dataset is given."""
    classes: tuple[Path, ...] = ()
    """Compiled class directories or archives, for NBI."""
    pairs: Path | None = None
    scores: Path | None = None
    dataset: Path | None = None
    out: Path = Path("out")
    seed: t.Annotated[int, pydantic.Field(ge=0, lt=2**32)] | None = None

    quartiles: tuple[float, float] | None = None
    """Fixed ``(q1, q3)`` thresholds instead of the dataset's quartiles."""
    features: tuple[MetricId, ...] | None = None
    """Explicit feature list; overrides ``feature_set``."""
    feature_set: FeatureSet = FeatureSet.ALL
    classifiers: tuple[ClassifierKind, ...] = tuple(ClassifierKind)
    k: t.Annotated[int, pydantic.Field(ge=2)] = 10

    trees: PositiveInt = 100
    features_per_split: PositiveInt | None = None
    forest_min_leaf: PositiveInt = 1
    bootstrap: bool = True
    tree_min_leaf: PositiveInt = 2
    tree_max_depth: t.Annotated[int, pydantic.Field(ge=0)] | None = None
    mlp_hidden: PositiveInt | None = None
    learning_rate: t.Annotated[float, pydantic.Field(gt=0)] = 0.3
    momentum: t.Annotated[float, pydantic.Field(ge=0, lt=1)] = 0.2
    epochs: t.Annotated[int, pydantic.Field(ge=0)] = 500
    batch_size: t.Annotated[int, pydantic.Field(ge=0)] = 32

    ranking: tuple[RankingAlgorithm, ...] = ALL_ALGORITHMS
    top: PositiveInt = 10
    population: Population = Population.RAW
    threshold: t.Annotated[float, pydantic.Field(ge=0, le=1)] = (
        DEFAULT_THRESHOLD
    )

    require_nbi: bool = True
    lenient: bool = False
    max_class_version: PositiveInt = DEFAULT_MAX_MAJOR_VERSION
    jobs: PositiveInt = os.cpu_count() or 1

    @pydantic.model_validator(mode="after")
    def _one_metric_source(self) -> t.Self:
        if self.src and self.dataset is not None:
            raise ValueError(
                "give either source directories or a dataset, not both"
            )
        return self

    @property
    def feature_ids(self) -> tuple[MetricId, ...]:
        if self.features is not None:
            return self.features
        return self.feature_set.metrics

    @property
    def ranking_algorithms(self) -> tuple[RankingAlgorithm, ...]:
        """Requested algorithms in report column order."""
        return tuple(a for a in RankingAlgorithm if a in self.ranking)

    def require_seed(self, command: str) -> int:
        """The configured seed.

        Raises:
            InputError: No seed was configured.
        """
        if self.seed is None:
            raise InputError(f"`{command}` needs a seed (--seed or seed=...)")
        return self.seed

    def params_for(self, kind: ClassifierKind) -> ClassifierParams:
        match kind:
            case ClassifierKind.DECISION_TREE:
                return TreeParams(
                    min_leaf=self.tree_min_leaf, max_depth=self.tree_max_depth
                )
            case ClassifierKind.RANDOM_FOREST:
                return ForestParams(
                    trees=self.trees,
                    features_per_split=self.features_per_split,
                    min_leaf=self.forest_min_leaf,
                    bootstrap=self.bootstrap,
                )
            case ClassifierKind.MULTILAYER_PERCEPTRON:
                return MlpParams(
                    hidden=self.mlp_hidden,
                    learning_rate=self.learning_rate,
                    momentum=self.momentum,
                    epochs=self.epochs,
                    batch_size=self.batch_size,
                )

    def manifest_parameters(self) -> dict[str, t.Any]:
        """Settings echoed into a run manifest."""
        return self.model_dump(mode="json", exclude=set(_RUNTIME_KEYS))


def parse_config_text(
    text: str, *, source: str = "<config>"
) -> dict[str, t.Any]:
    """Parse ``key = value`` lines.

    Blank lines and ``#`` comments are skipped, dashes in keys become
    underscores, list values are comma separated and an empty value
    means unset.

    Raises:
        InputError: A line is not ``key = value`` or a key repeats.
    """
    values: dict[str, t.Any] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if not sep or not key:
            raise InputError(
                f"{source}:{number}: expected `key = value`, got {raw!r}"
            )
        if key in values:
            raise InputError(f"{source}:{number}: {key} is set twice")
        value = value.strip()
        if key in _LIST_KEYS:
            values[key] = [
                item.strip() for item in value.split(",") if item.strip()
            ]
        else:
            values[key] = value or None
    return values


def load_config(
    path: os.PathLike[str] | None = None,
    overrides: c.Mapping[str, t.Any] | None = None,
) -> RunConfig:
    """Merge a config file with overrides; ``None`` overrides are ignored.

    Raises:
        InputError: The file is unreadable or the merged values are invalid.
    """
    values: dict[str, t.Any] = {}
    if path is not None:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except (OSError, UnicodeDecodeError) as e:
            raise InputError(f"cannot read config {path}: {e}") from e
        values.update(parse_config_text(text, source=str(path)))
        logger.debug(f"Loaded {len(values)} setting(s) from {path}")
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    # an unset optional in the file falls back to its default
    values = {k: v for k, v in values.items() if v is not None}

    try:
        return RunConfig.model_validate(values)
    except pydantic.ValidationError as e:
        raise InputError(f"invalid configuration:\n{e}") from e


def override(config: RunConfig, **changes: t.Any) -> RunConfig:
    """``config`` with the non-``None`` ``changes`` applied and revalidated.

    Raises:
        InputError: The result is invalid.
    """
    try:
        return utils.replace(
            config, **{k: v for k, v in changes.items() if v is not None}
        )
    except (TypeError, pydantic.ValidationError) as e:
        raise InputError(f"invalid configuration:\n{e}") from e
