from .base import Measure
from .jacobi import JacobiMeasure, Weight, gauss_jacobi, make_jacobi
from .discrete import DiscreteMeasure, PointMass
from .edges import EdgeConstants, edge_constants


def measure_from_dict(spec: dict) -> Measure:
    """Build a measure from its JSON spec.

    Jacobi specs look like {"a": 2, "b": 2, "d": {"poly": [1]}, "quadrature_order": 128};
    {"point_mass": 0} gives δ₀ and {"atoms": [...], "weights": [...]} a discrete measure.
    """
    if "point_mass" in spec:
        return PointMass(float(spec["point_mass"]))
    if "atoms" in spec:
        return DiscreteMeasure(spec["atoms"], spec.get("weights"))
    missing = [key for key in ("a", "b") if key not in spec]
    if missing:
        raise ValueError(f"Measure spec is missing {', '.join(missing)}.")
    return JacobiMeasure(
        spec["a"], spec["b"], spec.get("d"), spec.get("quadrature_order")
    )
