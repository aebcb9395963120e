from __future__ import annotations

import dataclasses
import struct
import typing as t
import zipfile
from pathlib import Path

from loguru import logger

from testmet.classfile._errors import (
    MalformedClassFileError,
    UnsupportedMajorVersionError,
)
from testmet.classfile._opcodes import count_instructions
from testmet.models import TestmetModel

if t.TYPE_CHECKING:
    import collections.abc as c
    import os

MAGIC = 0xCAFEBABE
DEFAULT_MAX_MAJOR_VERSION = 69
"""Java 25."""

_UTF8 = 1
_LONG = 5
_DOUBLE = 6
_CLASS = 7
# tag -> payload size in bytes; Utf8 is length prefixed
_CONSTANT_SIZES: dict[int, int] = {
    3: 4,
    4: 4,
    _LONG: 8,
    _DOUBLE: 8,
    _CLASS: 2,
    8: 2,
    9: 4,
    10: 4,
    11: 4,
    12: 4,
    15: 3,
    16: 2,
    17: 4,
    18: 4,
    19: 2,
    20: 2,
}


class MethodSummary(TestmetModel, frozen=True):
    name: str
    descriptor: str
    instruction_count: int


class ClassFileSummary(TestmetModel, frozen=True):
    class_name: str
    """Binary name with dots, e.g. ``com.example.Outer$Inner``."""
    major_version: int
    methods: tuple[MethodSummary, ...]


@dataclasses.dataclass
class _Cursor:
    data: bytes
    source: str
    offset: int = 0

    def take(self, fmt: str) -> tuple[int, ...]:
        layout = struct.Struct(f">{fmt}")
        if self.offset + layout.size > len(self.data):
            raise MalformedClassFileError(
                f"{self.source}: truncated at byte {self.offset}"
            )
        values = layout.unpack_from(self.data, self.offset)
        self.offset += layout.size
        return values

    def u2(self) -> int:
        return self.take("H")[0]

    def u4(self) -> int:
        return self.take("I")[0]

    def raw(self, size: int) -> bytes:
        if self.offset + size > len(self.data):
            raise MalformedClassFileError(
                f"{self.source}: {size} bytes requested at {self.offset}"
                + f" but only {len(self.data) - self.offset} remain"
            )
        chunk = self.data[self.offset : self.offset + size]
        self.offset += size
        return chunk


@dataclasses.dataclass(frozen=True)
class _ConstantPool:
    utf8: dict[int, str]
    classes: dict[int, int]
    source: str

    def text(self, index: int) -> str:
        try:
            return self.utf8[index]
        except KeyError:
            raise MalformedClassFileError(
                f"{self.source}: constant #{index} is not a Utf8 entry"
            ) from None

    def class_name(self, index: int) -> str:
        try:
            name_index = self.classes[index]
        except KeyError:
            raise MalformedClassFileError(
                f"{self.source}: constant #{index} is not a Class entry"
            ) from None
        return self.text(name_index).replace("/", ".")


def _read_constant_pool(cursor: _Cursor) -> _ConstantPool:
    count = cursor.u2()
    utf8: dict[int, str] = {}
    classes: dict[int, int] = {}
    index = 1
    while index < count:
        (tag,) = cursor.take("B")
        if tag == _UTF8:
            encoded = cursor.raw(cursor.u2())
            utf8[index] = encoded.decode("utf-8", errors="replace")
        elif tag == _CLASS:
            classes[index] = cursor.u2()
        elif tag in _CONSTANT_SIZES:
            _ = cursor.raw(_CONSTANT_SIZES[tag])
        else:
            raise MalformedClassFileError(
                f"{cursor.source}: unknown constant pool tag {tag} at #{index}"
            )
        index += 2 if tag in {_LONG, _DOUBLE} else 1
    return _ConstantPool(utf8=utf8, classes=classes, source=cursor.source)


def _skip_attributes(cursor: _Cursor) -> None:
    for _ in range(cursor.u2()):
        _ = cursor.u2()
        _ = cursor.raw(cursor.u4())


def _code_instruction_count(info: bytes, source: str, method: str) -> int:
    code = _Cursor(info, f"{source}: {method}: Code")
    _ = code.take("HH")  # max_stack, max_locals
    code_length = code.u4()
    body = code.raw(code_length)
    _ = code.raw(8 * code.u2())  # exception table
    _skip_attributes(code)
    if code.offset != len(info):
        raise MalformedClassFileError(
            f"{source}: {method}: Code attribute length {len(info)}"
            + f" disagrees with its contents ({code.offset} bytes)"
        )
    try:
        return count_instructions(body)
    except MalformedClassFileError as e:
        raise MalformedClassFileError(f"{source}: {method}: {e}") from e


def parse_classfile(
    data: bytes | t.BinaryIO,
    *,
    source: str = "<bytes>",
    max_major_version: int = DEFAULT_MAX_MAJOR_VERSION,
) -> ClassFileSummary:
    """Decode the method table of a class file and count instructions.

    Methods without a Code attribute (abstract, native) count 0.

    Raises:
        MalformedClassFileError: Bad magic, truncated data or attribute
            lengths that disagree with their contents.
        UnsupportedMajorVersionError: Major version above
            ``max_major_version``.
    """
    if not isinstance(data, bytes):
        data = data.read()
    cursor = _Cursor(data, source)
    if len(data) < 4 or cursor.u4() != MAGIC:
        raise MalformedClassFileError(f"{source}: not a class file (bad magic)")
    _minor, major = cursor.take("HH")
    if major > max_major_version:
        raise UnsupportedMajorVersionError(source, major, max_major_version)

    pool = _read_constant_pool(cursor)
    _access, this_class, _super_class = cursor.take("HHH")
    _ = cursor.raw(2 * cursor.u2())  # interfaces

    for _ in range(cursor.u2()):  # fields
        _ = cursor.take("HHH")
        _skip_attributes(cursor)

    methods: list[MethodSummary] = []
    for _ in range(cursor.u2()):
        _access, name_index, descriptor_index = cursor.take("HHH")
        name = pool.text(name_index)
        descriptor = pool.text(descriptor_index)
        count = 0
        for _ in range(cursor.u2()):
            attribute = pool.text(cursor.u2())
            info = cursor.raw(cursor.u4())
            if attribute == "Code":
                count = _code_instruction_count(info, source, name + descriptor)
        methods.append(
            MethodSummary(
                name=name, descriptor=descriptor, instruction_count=count
            )
        )

    _skip_attributes(cursor)
    if cursor.offset != len(data):
        raise MalformedClassFileError(
            f"{source}: {len(data) - cursor.offset} trailing byte(s)"
        )

    return ClassFileSummary(
        class_name=pool.class_name(this_class),
        major_version=major,
        methods=tuple(methods),
    )


def count_nbi(summary: ClassFileSummary) -> int:
    """Instructions over every method, ``<init>`` and ``<clinit>`` included."""
    return sum(method.instruction_count for method in summary.methods)


def read_classfiles(
    paths: c.Iterable[os.PathLike[str]],
    *,
    max_major_version: int = DEFAULT_MAX_MAJOR_VERSION,
) -> list[ClassFileSummary]:
    """Read ``.class`` files, directories and ``.jar``/``.zip`` archives.

    Results are sorted by class name, independent of the input order.
    """
    summaries: list[ClassFileSummary] = []
    for path in map(Path, paths):
        if not path.exists():
            raise MalformedClassFileError(f"{path}: no such file or directory")
        if path.is_dir():
            files = sorted(f for f in path.rglob("*.class") if f.is_file())
        elif path.suffix in {".jar", ".zip"}:
            summaries.extend(_read_archive(path, max_major_version))
            continue
        else:
            files = [path]
        summaries.extend(
            parse_classfile(
                _read_bytes(file),
                source=str(file),
                max_major_version=max_major_version,
            )
            for file in files
        )

    logger.debug(f"Read {len(summaries)} class file(s)")
    return sorted(summaries, key=lambda s: s.class_name)


def _read_bytes(path: Path) -> bytes:
    try:
        return path.read_bytes()
    except OSError as e:
        raise MalformedClassFileError(f"{path}: cannot read: {e}") from e


def _read_archive(
    path: Path, max_major_version: int
) -> c.Iterator[ClassFileSummary]:
    try:
        with zipfile.ZipFile(path) as archive:
            for entry in sorted(archive.namelist()):
                if not entry.endswith(".class"):
                    continue
                yield parse_classfile(
                    archive.read(entry),
                    source=f"{path}!{entry}",
                    max_major_version=max_major_version,
                )
    except (zipfile.BadZipFile, OSError) as e:
        raise MalformedClassFileError(f"{path}: {e}") from e


def nbi_by_top_level_class(
    summaries: c.Iterable[ClassFileSummary],
) -> dict[str, int]:
    """Sum NBI per top-level class; ``Outer$Inner`` counts toward ``Outer``."""
    totals: dict[str, int] = {}
    for summary in summaries:
        top_level = summary.class_name.split("$", 1)[0]
        totals[top_level] = totals.get(top_level, 0) + count_nbi(summary)
    return dict(sorted(totals.items()))
