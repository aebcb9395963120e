import collections.abc as c
import dataclasses
import os
import typing as t
from pathlib import Path

import cyclopts
import inject
from loguru import logger

import testmet.logs
from testmet import utils
from testmet.base import Testmet
from testmet.classifiers import ClassifierKind
from testmet.config import RunConfig, load_config, override
from testmet.exc import TestmetError
from testmet.injections import inject_configure

app = cyclopts.App(
    console=utils.console,
    help="Static metrics of Java classes and their tests, and models predicting"
    + " test effectiveness from them.",
)
_JOBS = os.cpu_count() or 1


def _split(value: str | None) -> list[str] | None:
    if value is None:
        return None
    return [item.strip() for item in value.split(",") if item.strip()]


@cyclopts.Parameter(name="*")
@dataclasses.dataclass
class Sources:
    dataset: t.Annotated[
        cyclopts.types.ResolvedExistingFile | None,
        cyclopts.Parameter(help="Metrics dataset CSV."),
    ] = None
    src: t.Annotated[
        list[cyclopts.types.ResolvedExistingDirectory] | None,
        cyclopts.Parameter(help="Java source root; repeat for several."),
    ] = None
    classes: t.Annotated[
        list[cyclopts.types.ResolvedExistingPath] | None,
        cyclopts.Parameter(help="Class directory, .jar or .zip, for NBI."),
    ] = None
    pairs: t.Annotated[
        cyclopts.types.ResolvedExistingFile | None,
        cyclopts.Parameter(help="Pairing file: `production,test` per line."),
    ] = None
    scores: t.Annotated[
        cyclopts.types.ResolvedExistingFile | None,
        cyclopts.Parameter(help="Test-quality scores CSV (class_id,L,B,M)."),
    ] = None

    def overrides(self) -> dict[str, t.Any]:
        return {
            "dataset": self.dataset,
            "src": self.src,
            "classes": self.classes,
            "pairs": self.pairs,
            "scores": self.scores,
        }


@cyclopts.Parameter(name="*")
@dataclasses.dataclass
class Modeling:
    quartiles: t.Annotated[
        str | None,
        cyclopts.Parameter(help="Fixed labeling thresholds `q1,q3`."),
    ] = None
    features: t.Annotated[
        str | None,
        cyclopts.Parameter(help="Comma separated metric ids, e.g. `LOC,WMC`."),
    ] = None
    feature_set: t.Annotated[
        str | None,
        cyclopts.Parameter(help="Feature preset: all, code or test-effort."),
    ] = None
    classifier: t.Annotated[
        str | None,
        cyclopts.Parameter(
            help="Comma separated classifiers:"
            + " DecisionTree, RandomForest, MultilayerPerceptron."
        ),
    ] = None
    k: t.Annotated[
        int | None, cyclopts.Parameter(help="Cross-validation folds.")
    ] = None
    ranking: t.Annotated[
        str | None,
        cyclopts.Parameter(
            help="Comma separated rankers:"
            + " GainRatio, InfoGain, SymmetricUncertainty, OneR."
        ),
    ] = None
    top: t.Annotated[
        int | None, cyclopts.Parameter(help="Ranks shown per algorithm.")
    ] = None
    threshold: t.Annotated[
        float | None,
        cyclopts.Parameter(help="Minimum |rho| of a reported correlation."),
    ] = None
    population: t.Annotated[
        str | None,
        cyclopts.Parameter(help="Correlate over `raw` or `labeled` records."),
    ] = None

    def overrides(self) -> dict[str, t.Any]:
        return {
            "quartiles": _split(self.quartiles),
            "features": _split(self.features),
            "feature_set": self.feature_set,
            "classifiers": _split(self.classifier),
            "k": self.k,
            "ranking": _split(self.ranking),
            "top": self.top,
            "threshold": self.threshold,
            "population": self.population,
        }


def _overrides(sources: Sources, modeling: Modeling) -> dict[str, t.Any]:
    return {**sources.overrides(), **modeling.overrides()}


def _run[T](
    command: c.Callable[[Testmet], T], overrides: c.Mapping[str, t.Any]
) -> T:
    """Run ``command`` with the command-line overrides applied.

    Domain errors become a single error line and their exit code.
    """
    try:
        config = override(inject.instance(RunConfig), **overrides)
        return command(Testmet(config=config))
    except TestmetError as e:
        logger.error(str(e))
        raise SystemExit(e.exit_code) from e


@app.meta.default
def callback(
    *tokens: t.Annotated[
        str, cyclopts.Parameter(show=False, allow_leading_hyphen=True)
    ],
    config: t.Annotated[
        cyclopts.types.ResolvedExistingFile | None,
        cyclopts.Parameter(alias="-c", help="A `key = value` settings file."),
    ] = None,
    seed: t.Annotated[
        int | None,
        cyclopts.Parameter(help="Master seed; required to train or evaluate."),
    ] = None,
    out: t.Annotated[
        Path | None,
        cyclopts.Parameter(
            alias="-o", help="Output directory.", show_default="./out"
        ),
    ] = None,
    jobs: t.Annotated[
        int | None,
        cyclopts.Parameter(
            alias="-j",
            help="Parallel jobs. Results do not depend on it.",
            show_default=str(_JOBS),
        ),
    ] = None,
    log_level: testmet.logs.LoggingLevel = testmet.logs.LoggingLevel.INFO,
    log_file: t.Annotated[
        Path | None,
        cyclopts.Parameter(help="Also write a plain-text debug log here."),
    ] = None,
) -> None:
    # if there are no arguments
    if not tokens:
        app(tokens)
        return

    testmet.logs.setup_logging(log_level, log_file)

    try:
        run_config = load_config(
            config, {"seed": seed, "out": out, "jobs": jobs}
        )
    except TestmetError as e:
        logger.error(str(e))
        raise SystemExit(e.exit_code) from e
    _ = inject.configure(inject_configure(run_config), allow_override=True)

    app(tokens)


@app.command()
@logger.catch(reraise=True)
def extract(
    *,
    sources: Sources = Sources(),  # noqa: B008 # flattened options
    output: t.Annotated[
        Path | None,
        cyclopts.Parameter(
            help="Metrics CSV.", show_default="<out>/metrics.csv"
        ),
    ] = None,
) -> None:
    """Compute code and test-effort metrics for every paired class."""
    _ = _run(lambda tm: tm.extract_cmd(output), sources.overrides())


@app.command()
@logger.catch(reraise=True)
def label(
    *,
    sources: Sources = Sources(),  # noqa: B008 # flattened options
    modeling: Modeling = Modeling(),  # noqa: B008 # flattened options
) -> None:
    """Label records effective or non-effective by mutation score quartiles."""
    _ = _run(Testmet.label_cmd, _overrides(sources, modeling))


@app.command()
@logger.catch(reraise=True)
def correlate(
    *,
    sources: Sources = Sources(),  # noqa: B008 # flattened options
    modeling: Modeling = Modeling(),  # noqa: B008 # flattened options
) -> None:
    """Spearman correlation of every metric with the mutation score."""
    _ = _run(Testmet.correlate_cmd, _overrides(sources, modeling))


@app.command()
@logger.catch(reraise=True)
def train(
    *,
    sources: Sources = Sources(),  # noqa: B008 # flattened options
    modeling: Modeling = Modeling(),  # noqa: B008 # flattened options
    output: t.Annotated[
        Path | None,
        cyclopts.Parameter(help="Model file.", show_default="<out>/model.json"),
    ] = None,
) -> None:
    """Train one classifier on the labeled data and save it."""
    kinds = _split(modeling.classifier) or [ClassifierKind.RANDOM_FOREST.value]
    if len(kinds) != 1:
        logger.error("train takes exactly one classifier")
        raise SystemExit(2)
    try:
        kind = ClassifierKind(kinds[0])
    except ValueError:
        logger.error(f"unknown classifier {kinds[0]!r}")
        raise SystemExit(2) from None
    _ = _run(
        lambda tm: tm.train_cmd(kind, output),
        {**sources.overrides(), **modeling.overrides()},
    )


@app.command()
@logger.catch(reraise=True)
def evaluate(
    *,
    sources: Sources = Sources(),  # noqa: B008 # flattened options
    modeling: Modeling = Modeling(),  # noqa: B008 # flattened options
) -> None:
    """Stratified k-fold cross-validation of the configured classifiers."""
    _ = _run(Testmet.evaluate_cmd, _overrides(sources, modeling))


@app.command()
@logger.catch(reraise=True)
def rank(
    *,
    sources: Sources = Sources(),  # noqa: B008 # flattened options
    modeling: Modeling = Modeling(),  # noqa: B008 # flattened options
) -> None:
    """Rank features by gain ratio, information gain, SU and OneR."""
    _ = _run(Testmet.rank_cmd, _overrides(sources, modeling))


@app.command()
@logger.catch(reraise=True)
def predict(
    *,
    model: t.Annotated[
        cyclopts.types.ResolvedExistingFile,
        cyclopts.Parameter(help="Model written by `train`."),
    ],
    input: t.Annotated[
        cyclopts.types.ResolvedExistingFile,
        cyclopts.Parameter(help="CSV with the model's feature columns."),
    ],
) -> None:
    """Score classes with a trained model."""
    _ = _run(lambda tm: tm.predict_cmd(model, input), {})


@app.command()
@logger.catch(reraise=True)
def pipeline(
    *,
    sources: Sources = Sources(),  # noqa: B008 # flattened options
    modeling: Modeling = Modeling(),  # noqa: B008 # flattened options
) -> None:
    """Correlations, classifier evaluation and feature ranking in one bundle."""
    _ = _run(Testmet.pipeline_cmd, _overrides(sources, modeling))


def main() -> None:  # pragma: no cover
    app.meta()


if __name__ == "__main__":  # pragma: no cover
    main()
