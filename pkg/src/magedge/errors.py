class MagEdgeError(Exception):
    """Base class for package errors."""


class ConfigError(MagEdgeError, ValueError):
    """Invalid run configuration; ``path`` names the offending field."""

    def __init__(self, path, message):
        super().__init__(f"{path}: {message}")
        self.path = path


class PreconditionError(MagEdgeError, ValueError):
    pass


class ConvergenceError(MagEdgeError, RuntimeError):
    """A numerical resolution check failed (basis, quadrature, truncation)."""


class NearDegeneracyError(ConvergenceError):
    def __init__(self, pair, gap):
        super().__init__(
            f"eigenvalues {pair[0]} and {pair[1]} are within {gap:.3e}; "
            "basis too small or input pathological"
        )
        self.pair = pair


class ConstantBandError(MagEdgeError, ValueError):
    pass


class DegenerateExtremumError(MagEdgeError, ValueError):
    pass


class NoiseFloorError(MagEdgeError, ValueError):
    pass
