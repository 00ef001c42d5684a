class HarnessError(Exception):
    """Base for every error this package raises on purpose."""


class DataError(HarnessError):
    """Corpus, manifest, or pairs file violates its schema."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class CheckpointError(HarnessError):
    """The pretrained base model could not be loaded."""
