"""Rational functions with nodes: fixed-point data, noded spheres, reduced
index decorations, numerical degeneration and reopening of families of
generic rational maps."""

from .degeneration import DegenerationReport, FamilySample, cluster_fixed_points, degenerate, limit_decoration
from .errors import (
    BudgetExhausted,
    NodedRationalError,
    NoLimitError,
    UnsupportedError,
    ValidationError,
    Violation,
)
from .functions import (
    NodedFunction,
    NormalizationConvention,
    ReducedDecoration,
    adjacent_convention,
    component_index_sums,
    decoration_distance,
    embed_vm,
    reduced_decoration,
    structures_equal,
    validate_noded_function,
)
from .rational import (
    FixedPointData,
    Mobius,
    PrincipalPart,
    RationalMap,
    dynamical_index,
    fixed_points,
    from_fixed_point_data,
    from_principal_parts,
    is_polynomial_like,
    mobius_conjugate,
    mobius_from_triple,
    principal_part,
    residue,
)
from .reopening import reopen_family, solve_lambdas, sym_inverse, sym_matrix
from .scalars import INF, context
from .spheres import (
    Component,
    CrushData,
    Marking,
    NodedSphere,
    PartialCrush,
    Puncture,
    canonical_form,
    crush_data,
    is_connected_realization,
    validate_all,
    validate_crush,
    validate_marking,
    validate_sphere,
)

__version__ = "0.1.0"
