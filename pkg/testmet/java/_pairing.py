from __future__ import annotations

import typing as t
from pathlib import Path

from loguru import logger

from testmet.exc import InputError

if t.TYPE_CHECKING:
    import collections.abc as c
    import os


def read_pairing_file(path: os.PathLike[str]) -> dict[str, str]:
    """Read ``production-class-id,test-class-id`` lines.

    Blank lines and lines starting with ``#`` are skipped.
    """
    pairs: dict[str, str] = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise InputError(f"cannot read pairing file {path}: {e}") from e

    for number, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        production, sep, test = (
            part.strip() for part in stripped.partition(",")
        )
        if not sep or not production or not test or "," in test:
            raise InputError(f"{path}:{number}: expected 'production,test'")
        if production in pairs:
            raise InputError(f"{path}:{number}: {production} is paired twice")
        pairs[production] = test
    return pairs


def _split(name: str) -> tuple[str, str]:
    package, _, simple = name.rpartition(".")
    return package, simple


def _join(package: str, simple: str) -> str:
    return f"{package}.{simple}" if package else simple


def pair_tests(
    classes: c.Iterable[str], overrides: c.Mapping[str, str] | None = None
) -> dict[str, str]:
    """Map production classes to their test classes.

    A class ``p.Name`` is paired with ``p.NameTest``, or ``p.TestName`` when
    the former does not exist. Entries of ``overrides`` replace conventional
    pairs and must name known classes.

    Returns:
        Production class id to test class id, sorted by production id.
    """
    known = frozenset(classes)
    pairs: dict[str, str] = {}
    for name in sorted(known):
        package, simple = _split(name)
        for candidate in (f"{simple}Test", f"Test{simple}"):
            if (test := _join(package, candidate)) in known:
                pairs[name] = test
                break

    for production, test in (overrides or {}).items():
        unknown = [n for n in (production, test) if n not in known]
        if unknown:
            raise InputError(
                f"pairing names unknown class(es): {', '.join(unknown)}"
            )
        pairs[production] = test

    tests = frozenset(pairs.values())
    for production in [p for p in pairs if p in tests]:
        logger.debug(f"{production} is itself a test class, not pairing it")
        del pairs[production]

    return dict(sorted(pairs.items()))
