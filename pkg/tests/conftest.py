import collections.abc as c
import os
import sys
import typing as t
from pathlib import Path

import inject
import numpy as np
import pytest
from loguru import logger
from pytest_mock import MockerFixture

from testmet.config import RunConfig
from testmet.injections import inject_configure
from testmet.logs import LoggingLevel
from testmet.models import INDEPENDENT_METRICS, ClassRecord, MetricId


@pytest.fixture(scope="session", autouse=True)
def configure_injections() -> None:
    _ = inject.configure(
        inject_configure(RunConfig(out=Path("/nonexistent/out"), jobs=1)),
        clear=True,
    )


def pytest_addoption(parser: pytest.Parser) -> None:
    parser.addoption(
        "--loguru-log-level",
        action="store",
        default="debug",
        choices=[level.value for level in LoggingLevel],
    )


@pytest.fixture(scope="session", autouse=True)
def configure_loguru(request: pytest.FixtureRequest) -> None:
    log_level = request.config.getoption("--loguru-log-level")
    logger.remove()
    _ = logger.add(
        sys.stdout,
        level=LoggingLevel(log_level).as_int(),
        colorize=True,
        backtrace=True,
        diagnose=True,
    )


T = t.TypeVar("T")
type MOCK_INJECT = c.Callable[[type[T], T], None]  # pyright: ignore[reportGeneralTypeIssues]


@pytest.fixture
def mock_inject(mocker: MockerFixture) -> MOCK_INJECT:
    def wrapped[T](type_: type[T], value: T) -> None:
        real_impl = inject.instance

        def my_impl(
            type_to_get: type[t.Any], *args: t.Any, **kwargs: t.Any
        ) -> t.Any:
            if type_to_get == type_:
                return value
            return real_impl(type_to_get, *args, **kwargs)

        _ = mocker.patch("inject.instance", my_impl)

    return wrapped


@pytest.fixture(scope="session")
def published_dataset() -> Path:
    path = os.environ.get("TESTMET_DATASET")
    if not path:
        pytest.skip("TESTMET_DATASET is not set")
    return Path(path)


def make_record(
    class_id: str,
    mutation_score: float,
    *,
    seed: int = 0,
    **metrics: float,
) -> ClassRecord:
    """A record with plausible random metric values and the given overrides.

    Metric overrides use the metric id with ``-`` replaced by ``_``.
    """
    rng = np.random.default_rng(seed)
    values: dict[MetricId, float] = {}
    for metric in INDEPENDENT_METRICS:
        values[metric] = float(rng.integers(1, 50))
    values.update(
        {
            MetricId.LCOM3: float(rng.uniform(0, 2)),
            MetricId.CAM: float(rng.uniform(0.1, 1)),
            MetricId.DAM: float(rng.uniform(0, 1)),
            MetricId.MFA: float(rng.uniform(0, 1)),
            MetricId.AMC: float(rng.uniform(1, 20)),
            MetricId.M: mutation_score,
        }
    )
    for name, value in metrics.items():
        values[MetricId(name.replace("_", "-"))] = value
    if "NMC" not in metrics:
        values[MetricId.NMC] = values[MetricId.NMCI] + values[MetricId.NMCE]
    return ClassRecord(
        class_id=class_id, test_id=f"{class_id}Test", metrics=values
    )
