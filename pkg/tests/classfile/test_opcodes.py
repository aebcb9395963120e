import pytest

from testmet.classfile import (
    MalformedClassFileError,
    count_instructions,
    decode,
    instruction_length,
)
from tests.classfile import INIT_CODE, RETURN_CODE


def _tableswitch(pc: int, low: int, high: int) -> bytes:
    padding = (4 - (pc + 1) % 4) % 4
    operands = [0, low, high, *([8] * (high - low + 1))]
    return (
        b"\xaa"
        + b"\x00" * padding
        + b"".join(v.to_bytes(4, "big", signed=True) for v in operands)
    )


def test_constructor_and_return() -> None:
    assert count_instructions(INIT_CODE) == 3
    assert list(decode(INIT_CODE)) == [(0, 0x2A), (1, 0xB7), (4, 0xB1)]
    assert count_instructions(RETURN_CODE) == 1
    assert count_instructions(b"") == 0


@pytest.mark.parametrize("pc", [0, 1, 2, 3])
def test_tableswitch_padding(pc: int) -> None:
    code = b"\x00" * pc + _tableswitch(pc, 0, 2) + RETURN_CODE

    assert instruction_length(code, pc) == len(code) - pc - 1
    assert count_instructions(code) == pc + 2


def test_lookupswitch() -> None:
    pairs = [(1, 20), (5, 20)]
    operands = [0, len(pairs), *(v for pair in pairs for v in pair)]
    code = (
        b"\xab\x00\x00\x00"
        + b"".join(v.to_bytes(4, "big") for v in operands)
        + RETURN_CODE
    )

    assert instruction_length(code, 0) == 4 + 8 + 16
    assert count_instructions(code) == 2


@pytest.mark.parametrize(
    ("code", "length"),
    [
        (bytes.fromhex("c415 0001"), 4),  # wide iload
        (bytes.fromhex("c484 0001 0005"), 6),  # wide iinc
        (bytes.fromhex("1005"), 2),  # bipush
        (bytes.fromhex("b9 0001 0100"), 5),  # invokeinterface
        (bytes.fromhex("c5 0001 02"), 4),  # multianewarray
        (bytes.fromhex("c8 0000 0000"), 5),  # goto_w
    ],
)
def test_operand_sizes(code: bytes, length: int) -> None:
    assert instruction_length(code, 0) == length
    assert count_instructions(code) == 1


@pytest.mark.parametrize(
    ("code", "match"),
    [
        (bytes.fromhex("ca"), "unknown opcode 0xca"),
        (bytes.fromhex("b700"), "overruns code_length 2"),
        (bytes.fromhex("c400"), "modifies opcode 0x00"),
        (bytes.fromhex("c4"), "wide at 0 is truncated"),
        (bytes.fromhex("aa000000"), "switch operands truncated"),
        (_tableswitch(0, 3, 1), "high < low"),
    ],
)
def test_malformed_code(code: bytes, match: str) -> None:
    with pytest.raises(MalformedClassFileError, match=match):
        _ = count_instructions(code)
