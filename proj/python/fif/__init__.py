"""Fractal interpolation on hyperrectangular grids.

Thin wrapper over the compiled extension: constructs self-referential
perturbations of continuous seed functions, runs convergence studies, samples
attractors, and inverts the fractal operator.
"""

from ._fif import (
    Expression,
    FifError,
    FractalResult,
    Grid,
    SampledFunction,
    SolveDiagnostics,
    __version__,
    apply_operator,
    attractor,
    construct,
    invert_roundtrip,
    study,
)

__all__ = [
    "Expression",
    "FifError",
    "FractalResult",
    "Grid",
    "SampledFunction",
    "SolveDiagnostics",
    "__version__",
    "apply_operator",
    "attractor",
    "construct",
    "invert_roundtrip",
    "study",
]
