"""Exact computations for invariant Poisson brackets on semisimple coadjoint orbits."""

from __future__ import annotations

from .cohomology import (
    ChainBasis,
    CohomologyProfile,
    cohomology_dims,
    delta_matrix,
    invariant_chain_basis,
    pencil_cohomology,
)
from .errors import (
    DegenerateFormError,
    DegenerateOrbitError,
    ExtractionFailedError,
    InadmissibleSeedError,
    InternalInconsistencyError,
    NotInvariantError,
    OrbitForgeError,
    ParameterError,
    PreconditionError,
    ResourceError,
)
from .levi import (
    LeviDatum,
    PositiveSystem,
    adapted_positive_system,
    betti_numbers,
    make_levi,
    quotient_by,
    standard_positive,
    subset_classify,
)
from .moduli import (
    Parametrization,
    classify_good_pair,
    extract_parametrization,
    from_parametrization,
    good_bracket_family,
    solve_ff,
    tangent_basis,
    verify_ff,
)
from .multivec import (
    BracketCoefficients,
    Multivector,
    bivector_from_coefficients,
    coefficients_of,
    is_invariant,
    kks,
    phi_M,
    schouten,
    schouten_closed_form,
    verify_cybe,
)
from .rootsystem import RootSystem, SimpleType, build_root_system, cartan_involution, lie_bracket

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
