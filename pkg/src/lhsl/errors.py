class DomainError(ValueError):
    """Raised when an argument lies outside the region where a formula holds."""


class ConfigError(ValueError):
    """Invalid run configuration. ``key`` names the offending entry, ``line``
    is the 1-based line in the source file when known."""

    def __init__(self, message, key=None, line=None):
        super().__init__(message)
        self.key = key
        self.line = line

    def to_dict(self):
        return {"error": "config", "message": str(self), "key": self.key, "line": self.line}
