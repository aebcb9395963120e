from __future__ import annotations

import contextlib
import copy
import math
import os
import tempfile
import typing as t
from pathlib import Path

import numpy as np
import pydantic_core
import rich.progress
from frozendict import frozendict
from pydantic import BaseModel
from rich.console import Console

if t.TYPE_CHECKING:
    import collections.abc as c

    import pydantic

console = Console(stderr=True)


class _PydanticFrozenDictAnnotation[K, V]:
    """Fix frozendict type annotations for Pydantic.

    See https://github.com/pydantic/pydantic/discussions/8721#discussioncomment-9753166.
    """

    @classmethod
    def __get_pydantic_core_schema__(
        cls, source_type: t.Any, handler: pydantic.GetCoreSchemaHandler
    ) -> pydantic_core.core_schema.CoreSchema:
        def validate_from_dict(
            d: dict[K, V] | frozendict[K, V],
        ) -> frozendict[K, V]:
            return frozendict(d)

        frozendict_schema = pydantic_core.core_schema.chain_schema(
            [
                handler.generate_schema(dict[*t.get_args(source_type)]),  # pyright: ignore[reportInvalidTypeArguments]
                pydantic_core.core_schema.no_info_plain_validator_function(
                    validate_from_dict
                ),
                pydantic_core.core_schema.is_instance_schema(frozendict),
            ]
        )
        return pydantic_core.core_schema.json_or_python_schema(
            json_schema=frozendict_schema,
            python_schema=frozendict_schema,
            serialization=pydantic_core.core_schema.plain_serializer_function_ser_schema(
                dict
            ),
        )


type FrozenDict[K, V] = t.Annotated[
    frozendict[K, V], _PydanticFrozenDictAnnotation
]


def replace[T](obj: T, **changes: t.Any) -> T:
    """:func:`copy.replace`, revalidating pydantic models.

    Raises:
        TypeError: ``obj`` cannot be replaced or lacks a changed field.
        pydantic.ValidationError: A changed value is invalid.
    """
    if not isinstance(obj, BaseModel):
        return copy.replace(obj, **changes)  # pyright: ignore[reportArgumentType]

    unknown = changes.keys() - type(obj).model_fields.keys()
    if unknown:
        raise TypeError(
            f"{type(obj).__name__} has no field(s) {', '.join(sorted(unknown))}"
        )
    return type(obj).model_validate(obj.model_dump() | changes)


def format_number(value: float) -> str:
    """Format a metric value for CSV output.

    Integral values lose their fraction (``7.0`` -> ``7``), everything else
    uses the shortest representation that parses back to the same float.
    """
    if math.isfinite(value) and value.is_integer():
        return str(int(value))
    return repr(float(value))


def derive_seeds(seed: int, count: int) -> list[int]:
    """Derive ``count`` independent sub-seeds from a master seed.

    The same master seed always yields the same list, so work that is
    distributed over processes stays reproducible.
    """
    children = np.random.SeedSequence(seed).spawn(count)
    return [
        int(child.generate_state(1, dtype=np.uint32)[0]) for child in children
    ]


@contextlib.contextmanager
def atomic_write(
    path: os.PathLike[str], *, newline: str = "\n"
) -> c.Iterator[t.TextIO]:
    """Open a temporary file next to ``path`` and move it into place on success.

    Readers never observe a partially written file; if the body raises, the
    temporary file is removed and ``path`` stays untouched.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(
        prefix=f".{path.name}.", suffix=".tmp", dir=path.parent
    )
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline=newline) as f:
            yield f
        Path(tmp_name).replace(path)
    except BaseException:
        Path(tmp_name).unlink(missing_ok=True)
        raise


def get_formatted_progress_bar() -> tuple[
    str | rich.progress.ProgressColumn, ...
]:
    return (
        "[progress.description]{task.description}",
        rich.progress.MofNCompleteColumn(),
        rich.progress.BarColumn(),
        "[",
        rich.progress.TimeElapsedColumn(),
        rich.progress.TimeRemainingColumn(),
        "]",
    )
