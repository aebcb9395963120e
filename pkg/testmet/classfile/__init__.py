from ._errors import MalformedClassFileError, UnsupportedMajorVersionError
from ._opcodes import count_instructions, decode, instruction_length
from ._reader import (
    DEFAULT_MAX_MAJOR_VERSION,
    ClassFileSummary,
    MethodSummary,
    count_nbi,
    nbi_by_top_level_class,
    parse_classfile,
    read_classfiles,
)

__all__ = [
    "DEFAULT_MAX_MAJOR_VERSION",
    "ClassFileSummary",
    "MalformedClassFileError",
    "MethodSummary",
    "UnsupportedMajorVersionError",
    "count_instructions",
    "count_nbi",
    "decode",
    "instruction_length",
    "nbi_by_top_level_class",
    "parse_classfile",
    "read_classfiles",
]
