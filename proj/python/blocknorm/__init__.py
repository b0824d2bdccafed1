"""Block-anisotropic summing norms of multilinear operators on finite-dimensional l_p spaces."""

import json as _json

from ._core import (
    Block,
    InputError,
    LpSpace,
    MultiOperator,
    NonvoidViolation,
    UnsupportedClassPosition,
    __version__,
    block_value,
    class_norm,
    compatibility_margin,
    find_incompatibility_witness,
    finite_type,
    lp_norm,
    run_config,
    run_suite,
    suite_names,
    sup_norm,
    summing_norm,
)
from ._core import strip_timing as _strip_timing


def strip_timing(report):
    """Copy of a report dict without its "elapsed_ms" fields."""
    return _strip_timing(_json.dumps(report))


__all__ = [
    "Block",
    "InputError",
    "LpSpace",
    "MultiOperator",
    "NonvoidViolation",
    "UnsupportedClassPosition",
    "__version__",
    "block_value",
    "class_norm",
    "compatibility_margin",
    "find_incompatibility_witness",
    "finite_type",
    "lp_norm",
    "run_config",
    "run_suite",
    "strip_timing",
    "suite_names",
    "sup_norm",
    "summing_norm",
]
