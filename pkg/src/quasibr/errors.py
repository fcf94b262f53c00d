"""Exception taxonomy shared by all modules.

The CLI maps these onto process exit codes:
0 success, 2 threshold failure, 3 configuration/geometry error,
4 numerical-resolution error.
"""


class ConfigError(ValueError):
    """Invalid configuration: bad parameters, inadmissible delta, coarse grids."""


class GeometryError(ValueError):
    """Geometric preconditions violated: nonconvex data, graph condition, ..."""


class IncompatiblePairError(GeometryError):
    """Domain/dilation pair fails the compatibility requirements."""


class ResolutionError(RuntimeError):
    """Grid window or resolution insufficient for the requested computation."""


class ThresholdFailure(RuntimeError):
    """An experiment ran fine but missed its quantitative threshold."""
