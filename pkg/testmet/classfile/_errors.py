from testmet.exc import InputError


class MalformedClassFileError(InputError): ...


class UnsupportedMajorVersionError(InputError):
    def __init__(self, source: str, major: int, ceiling: int) -> None:
        super().__init__(
            f"{source}: class file major version {major}"
            + f" is above the supported {ceiling}"
        )
        self.major = major
        self.ceiling = ceiling
