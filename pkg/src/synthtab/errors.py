"""Exception hierarchy shared across the package."""


class SynthTabError(Exception):
    pass


class SchemaError(SynthTabError):
    """Malformed interchange document. ``path`` locates the bad field."""

    def __init__(self, message, path=""):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class InvariantError(SynthTabError):
    pass


class DslError(SynthTabError):
    def __init__(self, message, line):
        self.line = line
        super().__init__(f"line {line}: {message}")


class CompileError(SynthTabError):
    pass


class ExportError(SynthTabError):
    pass


class RenderError(SynthTabError):
    pass


class MixError(SynthTabError):
    pass


class LabelError(SynthTabError):
    pass


class ShapeError(SynthTabError):
    pass


class EmptyInputError(SynthTabError):
    pass


class SplitError(SynthTabError):
    pass


class ConfigError(SynthTabError):
    pass
