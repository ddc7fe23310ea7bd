"""Exception types shared across the package."""


class Cascade4Error(Exception):
    """Base class for all package-specific errors."""


class InvalidParams(Cascade4Error):
    """Physical parameters violate their constraints (negative rate, zero Gamma)."""


class InvalidLevel(Cascade4Error):
    """Preparation level outside {1, 2, 3, 4}."""


class SingularGenerator(Cascade4Error):
    """The drift matrix is numerically singular; no unique steady state."""


class StepFailure(Cascade4Error):
    """Adaptive integrator could not reach the requested accuracy."""


class ZeroSteadyState(Cascade4Error):
    """A correlation denominator population vanishes; g2 undefined for these drives."""


class GridMismatch(Cascade4Error):
    """Series combined on different tau grids."""


class NoPeak(Cascade4Error):
    """Series is monotone on the grid; no interior local maximum."""


class NonzeroDetuning(Cascade4Error):
    """Perturbative solutions are only defined on resonance."""


class NearPole(Cascade4Error):
    """Laplace-domain solve requested too close to a pole (ill-conditioned)."""


class NotCatalogued(Cascade4Error):
    """No transcribed Laplace-space expression for this combination."""


class IllConditionedPoles(Cascade4Error):
    """Pole clustering is ambiguous within the tolerance band."""


class ConfigError(Cascade4Error):
    """Base class for configuration-file problems (exit code 2 in the CLI)."""


class ParseError(ConfigError):
    """Malformed config line; carries the 1-based line number."""

    def __init__(self, lineno, message):
        self.lineno = lineno
        super().__init__(f"line {lineno}: {message}")


class UnknownKey(ConfigError):
    """Config key not recognised in its section."""


class RangeError(ConfigError):
    """Config value outside its allowed range."""
