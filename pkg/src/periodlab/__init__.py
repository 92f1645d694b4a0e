"""Polarized Hodge frames, period-domain Lie theory, and orbit bounds.

The package builds a reference frame for given Hodge numbers, derives
the graded Lie algebra with its root system and a maximal strongly
orthogonal set of noncompact roots, and then verifies numerically that
one-parameter orbits of the associated commuting sl2 triples stay in a
bounded polydisc inside the open cell of the flag variety.
"""

from .bigcell import (CellError, FlagPoint, cell_coordinate, exp_nilpotent,
                      log_unipotent, membership_in_big_cell, project_cell,
                      unipotent_from_flag)
from .frame import (FrameError, HodgeFrame, HodgeNumbers,
                    build_reference_frame, check_hodge_riemann,
                    frame_from_json, frame_to_json)
from .harness import (PRESETS, ConfigError, TrialConfig, VerificationReport,
                      build_structures, emit_report, run_pipeline)
from .liealg import (AlgebraError, GradedLieAlgebra, bracket, grade,
                     killing_form, lie_algebra_basis)
from .orbits import (OrbitError, TrialReport, exp_real, expm_stack,
                     horizontal_abelian_trial, polydisc_trial,
                     sl2_orbit_coordinate, verify_sl2_decomposition)
from .roots import (RootSystem, RootSystemError, WeylNormalizationError,
                    check_sum_relations, compute_roots, normalize_weyl_basis,
                    set_lexicographic_order)
from .strongorth import (StrongOrthSet, centralizer_check,
                         greedy_strongly_orthogonal,
                         reduce_to_maximal_abelian, strongly_orthogonal)

__version__ = "0.1.0"

__all__ = [
    "AlgebraError", "CellError", "ConfigError", "FlagPoint", "FrameError",
    "GradedLieAlgebra", "HodgeFrame", "HodgeNumbers", "OrbitError",
    "PRESETS", "RootSystem", "RootSystemError", "StrongOrthSet",
    "TrialConfig", "TrialReport", "VerificationReport",
    "WeylNormalizationError", "bracket", "build_reference_frame",
    "build_structures", "cell_coordinate", "centralizer_check",
    "check_hodge_riemann", "check_sum_relations", "compute_roots",
    "emit_report", "exp_nilpotent", "exp_real", "expm_stack",
    "frame_from_json", "frame_to_json", "grade",
    "greedy_strongly_orthogonal", "horizontal_abelian_trial",
    "killing_form", "lie_algebra_basis", "log_unipotent",
    "membership_in_big_cell", "normalize_weyl_basis", "polydisc_trial",
    "project_cell", "reduce_to_maximal_abelian", "run_pipeline",
    "set_lexicographic_order", "sl2_orbit_coordinate",
    "strongly_orthogonal", "unipotent_from_flag",
    "verify_sl2_decomposition",
]
