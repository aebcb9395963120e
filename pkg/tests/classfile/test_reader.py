import io
import struct
import zipfile
from pathlib import Path

import pytest

from testmet.classfile import (
    ClassFileSummary,
    MalformedClassFileError,
    MethodSummary,
    UnsupportedMajorVersionError,
    count_nbi,
    nbi_by_top_level_class,
    parse_classfile,
    read_classfiles,
)
from tests.classfile import INIT_CODE, RETURN_CODE, class_bytes

SHAPE = [
    ("<init>", "()V", INIT_CODE),
    ("run", "()V", RETURN_CODE),
    ("plan", "(I)I", None),
]


def test_parse_classfile() -> None:
    summary = parse_classfile(class_bytes("org.x.Shape", SHAPE))

    assert summary == ClassFileSummary(
        class_name="org.x.Shape",
        major_version=52,
        methods=(
            MethodSummary(name="<init>", descriptor="()V", instruction_count=3),
            MethodSummary(name="run", descriptor="()V", instruction_count=1),
            MethodSummary(name="plan", descriptor="(I)I", instruction_count=0),
        ),
    )
    assert count_nbi(summary) == 4


def test_parse_classfile_stream_with_wide_constant() -> None:
    data = class_bytes("a.B", SHAPE, with_long_constant=True)

    summary = parse_classfile(io.BytesIO(data))

    assert summary.class_name == "a.B"
    assert count_nbi(summary) == 4


def test_unsupported_major_version() -> None:
    data = class_bytes("a.B", SHAPE, major=70)

    with pytest.raises(
        UnsupportedMajorVersionError, match="major version 70"
    ) as e:
        _ = parse_classfile(data, source="B.class")
    assert e.value.ceiling == 69
    assert parse_classfile(data, max_major_version=70).major_version == 70


@pytest.mark.parametrize(
    ("data", "match"),
    [
        (b"", "bad magic"),
        (b"\xca\xfe\xba\xbf" + bytes(8), "bad magic"),
        (class_bytes("a.B", SHAPE)[:-7], "truncated|requested"),
        (class_bytes("a.B", SHAPE) + b"\x00", "1 trailing byte"),
    ],
)
def test_malformed_classfile(data: bytes, match: str) -> None:
    with pytest.raises(MalformedClassFileError, match=match):
        _ = parse_classfile(data)


def test_malformed_code_names_the_method() -> None:
    data = class_bytes("a.B", [("bad", "()V", bytes.fromhex("ca"))])

    with pytest.raises(
        MalformedClassFileError, match=r"B.class: bad\(\)V: unknown"
    ):
        _ = parse_classfile(data, source="B.class")


def test_code_attribute_length_mismatch() -> None:
    data = bytearray(class_bytes("a.B", [("run", "()V", RETURN_CODE)]))
    info = data.find(struct.pack(">HHI", 2, 2, 1) + RETURN_CODE)
    # two stray bytes after the Code attribute's own attributes
    data[info + 13 : info + 13] = bytes(2)
    struct.pack_into(">I", data, info - 4, 15)

    with pytest.raises(
        MalformedClassFileError, match="disagrees with its contents"
    ):
        _ = parse_classfile(bytes(data))


def test_read_classfiles(tmp_path: Path) -> None:
    classes = tmp_path / "classes" / "org" / "x"
    classes.mkdir(parents=True)
    _ = (classes / "Shape.class").write_bytes(class_bytes("org.x.Shape", SHAPE))
    _ = (classes / "Shape$Side.class").write_bytes(
        class_bytes("org.x.Shape$Side", [("<init>", "()V", INIT_CODE)])
    )
    _ = (classes / "notes.txt").write_text("not a class")
    jar = tmp_path / "lib.jar"
    with zipfile.ZipFile(jar, "w") as archive:
        archive.writestr("a/Alpha.class", class_bytes("a.Alpha", SHAPE[1:]))
        archive.writestr("META-INF/MANIFEST.MF", "Manifest-Version: 1.0\n")

    summaries = read_classfiles([jar, tmp_path / "classes"])

    assert [s.class_name for s in summaries] == [
        "a.Alpha",
        "org.x.Shape",
        "org.x.Shape$Side",
    ]
    assert nbi_by_top_level_class(summaries) == {"a.Alpha": 1, "org.x.Shape": 7}


def test_read_single_classfile(tmp_path: Path) -> None:
    path = tmp_path / "B.class"
    _ = path.write_bytes(class_bytes("a.B", SHAPE))

    assert [s.class_name for s in read_classfiles([path])] == ["a.B"]


@pytest.mark.parametrize(
    ("name", "content", "match"),
    [
        ("absent", None, "no such file"),
        ("broken.jar", b"not a zip", "broken.jar"),
    ],
)
def test_read_classfiles_errors(
    tmp_path: Path, name: str, content: bytes | None, match: str
) -> None:
    path = tmp_path / name
    if content is not None:
        _ = path.write_bytes(content)

    with pytest.raises(MalformedClassFileError, match=match):
        _ = read_classfiles([path])


def test_read_classfiles_unreadable(
    tmp_path: Path, monkeypatch: pytest.MonkeyPatch
) -> None:
    path = tmp_path / "Shape.class"
    _ = path.write_bytes(class_bytes("org.x.Shape", SHAPE))

    def denied(self: Path) -> bytes:
        raise PermissionError(13, "Permission denied", str(self))

    monkeypatch.setattr(Path, "read_bytes", denied)

    with pytest.raises(MalformedClassFileError, match="cannot read") as e:
        _ = read_classfiles([path])
    assert e.value.exit_code == 2
    with pytest.raises(MalformedClassFileError, match="cannot read"):
        _ = read_classfiles([tmp_path])


def test_read_archive_unreadable(
    tmp_path: Path, monkeypatch: pytest.MonkeyPatch
) -> None:
    path = tmp_path / "classes.jar"
    _ = path.write_bytes(b"")

    def denied(*_: object, **__: object) -> zipfile.ZipFile:
        raise PermissionError(13, "Permission denied", str(path))

    monkeypatch.setattr(zipfile, "ZipFile", denied)

    with pytest.raises(MalformedClassFileError, match="classes.jar"):
        _ = read_classfiles([path])
