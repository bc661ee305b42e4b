from app.core import DatasetError


class LibSVMParseError(DatasetError):
    """A line of a LIBSVM file could not be parsed."""

    def __init__(self, line_number: int, message: str | None = None):
        """
        :param line_number: The 1-based number of the offending line.
        :param message: What is wrong with the line.
        """
        self._line_number: int = line_number
        super().__init__(
            message="Line %d: %s"
            % (line_number, message or "malformed line."),
        )

    @property
    def line_number(self) -> int:
        return self._line_number
