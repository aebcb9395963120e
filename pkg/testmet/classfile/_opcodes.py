"""JVM opcode operand sizes and exact instruction boundary decoding."""

from __future__ import annotations

import struct
import typing as t

from testmet.classfile._errors import MalformedClassFileError

if t.TYPE_CHECKING:
    import collections.abc as c

TABLESWITCH = 0xAA
LOOKUPSWITCH = 0xAB
WIDE = 0xC4
IINC = 0x84
LAST_OPCODE = 0xC9
"""``jsr_w``; everything above is reserved or unused."""

_OPERAND_BYTES: dict[int, int] = {
    0x10: 1,  # bipush
    0x11: 2,  # sipush
    0x12: 1,  # ldc
    0x13: 2,  # ldc_w
    0x14: 2,  # ldc2_w
    **dict.fromkeys(range(0x15, 0x1A), 1),  # iload .. aload
    **dict.fromkeys(range(0x36, 0x3B), 1),  # istore .. astore
    IINC: 2,
    **dict.fromkeys(range(0x99, 0xA9), 2),  # if<cond>, if_<cmp>, goto, jsr
    0xA9: 1,  # ret
    **dict.fromkeys(range(0xB2, 0xB9), 2),  # get/put field/static, invoke*
    0xB9: 4,  # invokeinterface
    0xBA: 4,  # invokedynamic
    0xBB: 2,  # new
    0xBC: 1,  # newarray
    0xBD: 2,  # anewarray
    0xC0: 2,  # checkcast
    0xC1: 2,  # instanceof
    0xC5: 3,  # multianewarray
    0xC6: 2,  # ifnull
    0xC7: 2,  # ifnonnull
    0xC8: 4,  # goto_w
    0xC9: 4,  # jsr_w
}
_WIDENABLE = frozenset({*range(0x15, 0x1A), *range(0x36, 0x3B), 0xA9})
_I32 = struct.Struct(">i")


def _read_i32(code: bytes, offset: int) -> int:
    if offset + 4 > len(code):
        raise MalformedClassFileError(
            f"switch operands truncated at byte {offset}"
        )
    return _I32.unpack_from(code, offset)[0]


def instruction_length(code: bytes, pc: int) -> int:
    """Length in bytes of the instruction starting at ``pc``."""
    opcode = code[pc]
    if opcode == TABLESWITCH:
        base = pc + 1 + (4 - (pc + 1) % 4) % 4
        low = _read_i32(code, base + 4)
        high = _read_i32(code, base + 8)
        if high < low:
            raise MalformedClassFileError(f"tableswitch at {pc} has high < low")
        return base + 12 + 4 * (high - low + 1) - pc
    if opcode == LOOKUPSWITCH:
        base = pc + 1 + (4 - (pc + 1) % 4) % 4
        pairs = _read_i32(code, base + 4)
        if pairs < 0:
            raise MalformedClassFileError(
                f"lookupswitch at {pc} has negative npairs"
            )
        return base + 8 + 8 * pairs - pc
    if opcode == WIDE:
        if pc + 1 >= len(code):
            raise MalformedClassFileError(f"wide at {pc} is truncated")
        modified = code[pc + 1]
        if modified == IINC:
            return 6
        if modified in _WIDENABLE:
            return 4
        raise MalformedClassFileError(
            f"wide at {pc} modifies opcode {modified:#04x}"
        )
    if opcode > LAST_OPCODE:
        raise MalformedClassFileError(f"unknown opcode {opcode:#04x} at {pc}")
    return 1 + _OPERAND_BYTES.get(opcode, 0)


def decode(code: bytes) -> c.Iterator[tuple[int, int]]:
    """Yield ``(pc, opcode)`` for every instruction of a Code attribute.

    Raises:
        MalformedClassFileError: The last instruction runs past the end of
            the code array, so boundaries do not add up to ``code_length``.
    """
    pc = 0
    while pc < len(code):
        length = instruction_length(code, pc)
        if pc + length > len(code):
            raise MalformedClassFileError(
                f"instruction at {pc} overruns code_length {len(code)}"
            )
        yield pc, code[pc]
        pc += length


def count_instructions(code: bytes) -> int:
    return sum(1 for _ in decode(code))
