"""Fat-point linear systems on P^n with at most n+3 general points.

Dimension counts (vdim, ldim, sldim), base-locus multiplicities, Cremona and
cone reductions, effective and movable cones, and a finite-field oracle that
measures the true dimensions.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .core import DivisorClass, InvalidSystemError, JoinCycle, LinearSystemSpec, binom_or_zero, enumerate_join_cycles
from .formulas import (
    DimReport,
    dim_report,
    k_join,
    k_linear,
    k_rnc,
    ldim,
    linear_nonspecial_sufficient,
    lvdim,
    predicted_dim,
    sldim,
    sldim_p2_closed_form,
    slvdim,
    vdim,
)
from .cones import (
    canonical_class,
    degree,
    facets_effective,
    facets_movable,
    is_effective,
    is_effective_system,
    is_movable,
    pairing,
    rays,
)
from .cremona import clamp, cone_reduce, cremona_c, cremona_reduce, cremona_transform, is_cremona_reduced, reduce_fully
from .baselocus import (
    BaseLocusEntry,
    NotEffectiveError,
    base_locus_table,
    divisorial_fixed_components,
    residual_remove,
    secant_geometry,
)
from .modp import EchelonBasis, rank_mod_p
from .oracle import (
    OracleConfig,
    OracleResult,
    conditions_matrix,
    is_effective_oracle,
    multiplicity_probe,
    multiplicity_probes,
    oracle_dim,
    sample_points,
)
