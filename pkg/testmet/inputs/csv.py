import collections.abc as c
import csv
import dataclasses
import os
import typing as t
from pathlib import Path

from testmet import utils
from testmet.exc import InputError


def _uncommented(lines: c.Iterable[str]) -> c.Iterator[str]:
    return (line for line in lines if not line.startswith("#"))


def read_rows[T](
    stream: c.Iterable[str],
    parse: c.Callable[[int, c.Mapping[str, str]], T],
    *,
    check_header: c.Callable[[c.Sequence[str]], None] | None = None,
    **kwargs: t.Any,
) -> c.Iterator[T]:
    """Parse every data row of a CSV stream.

    Lines starting with ``#`` (report manifests) are skipped before parsing.

    Arguments:
        parse:
            Called with the 1-based data row number and the row.

            .. warning::

              An empty cell is an empty string, not a None.
        check_header: Called once with the header before any row is parsed.

    Raises:
        InputError: The stream has no header row.
    """
    kwargs.setdefault("restval", "")
    reader = csv.DictReader(_uncommented(stream), **kwargs)
    if reader.fieldnames is None:
        raise InputError("CSV input has no header row")
    if check_header is not None:
        check_header([name.strip() for name in reader.fieldnames])

    for number, row in enumerate(reader, start=1):
        if None in row:
            raise InputError(f"row {number} has more cells than the header")
        yield parse(number, {key.strip(): value for key, value in row.items()})


def write_rows[T](
    stream: t.TextIO,
    entries: c.Iterable[T],
    serialize: c.Callable[[T], c.Mapping[str, str]],
    *,
    fieldnames: c.Sequence[str],
    preamble: c.Iterable[str] = (),
    **kwargs: t.Any,
) -> None:
    """Write a header and one row per entry, in the given order.

    ``preamble`` lines are written first, each prefixed with ``#``.
    """
    for line in preamble:
        _ = stream.write(f"# {line}\n")
    writer = csv.DictWriter(
        stream, fieldnames=fieldnames, lineterminator="\n", **kwargs
    )
    writer.writeheader()
    for entry in entries:
        writer.writerow(serialize(entry))


@dataclasses.dataclass
class CsvInput[T]:
    file: os.PathLike[str]
    kwargs: dict[str, t.Any] = dataclasses.field(default_factory=dict)
    """Kwargs, passed to `csv` functions."""

    def __post_init__(self) -> None:
        self.file = Path(self.file).resolve()

    def read(
        self,
        parse: c.Callable[[int, c.Mapping[str, str]], T],
        *,
        check_header: c.Callable[[c.Sequence[str]], None] | None = None,
    ) -> c.Iterable[T]:
        """Read provided CSV file.

        Raises:
            InputError: The file cannot be read.
        """
        try:
            with Path(self.file).open("r", newline="", encoding="utf-8") as f:
                yield from read_rows(
                    f, parse, check_header=check_header, **self.kwargs
                )
        except (OSError, UnicodeDecodeError) as e:
            raise InputError(f"cannot read {self.file}: {e}") from e

    def write(
        self,
        entries: c.Iterable[T],
        serialize: c.Callable[[T], c.Mapping[str, str]],
        *,
        fieldnames: c.Sequence[str],
        preamble: c.Iterable[str] = (),
    ) -> None:
        """Atomically replace the file with the given entries."""
        with utils.atomic_write(self.file, newline="") as f:
            write_rows(
                f,
                entries,
                serialize,
                fieldnames=fieldnames,
                preamble=preamble,
                **self.kwargs,
            )
