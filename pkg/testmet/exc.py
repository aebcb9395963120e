import typing as t


class TestmetError(Exception):
    exit_code: t.ClassVar[int] = 1


class InputError(TestmetError):
    """Unreadable, malformed or inconsistent input."""

    exit_code: t.ClassVar[int] = 2


class LabelingError(TestmetError):
    exit_code: t.ClassVar[int] = 3


class TrainingError(TestmetError):
    exit_code: t.ClassVar[int] = 4


class PredictionSchemaError(TestmetError):
    exit_code: t.ClassVar[int] = 5
