"""Exact commutator calculus for SL_n and Chevalley groups, subgroup oracles
and recurrence probes."""

from .errors import (BoomerangError, BudgetExhausted, CentralOnlyError, CertificateError, DimensionError,
                     IdentityFailure, ParseError, PreconditionError, SingularMatrixError)
from .linalg import Matrix, commutator, det, inverse, kernel, rank, solve_commutant, stabilization_power
from .sln import BruhatForm, ElementaryMatrix, bruhat_decompose, elementary, elementary_commutator
from .roots import Base, RootSystem, adjacent_base_path, highest_root
from .chevalley import ChevalleyBasis, build_adjoint, commutator_expand
from .oracles import (CongruenceOracle, FoldedAutomaton, FreeSubgroup, SubgroupHandle, contains, conjugate,
                      group_order_mod, intersect, principal_congruence)
from .probe import ProbeBounds, WitnessReport, direction_report, env_witnesses, normalizer_power
from .derivation import (DerivationTranscript, climb_center, derive_elementary, find_big_cell_element,
                         propagate, tits_certificate)
from .dynamics import ProjectivePoint, ProximalData, fixed_point_obstruction, general_position, proximal_analyze

__version__ = "0.1.0"
