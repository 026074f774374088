"""Computational operator theory on the truncated Drury-Arveson space.

Koszul homology of commuting tuples, Dirac operators, Taylor spectra, ball
automorphisms with their composition unitaries, and localized free
resolutions, all at finite (truncated) dimension with gap-certified ranks.
"""
from .basis import (GradedBasis, MultiIndex, TruncatedSeries, WedgeIndex, enumerate_basis, geometric_inverse,
                    series_mul, substitute, wedge_basis)
from .dspace import (CommutingTuple, DASpace, DAVector, NonCommutingError, QuotientModule, da_inner, evaluate,
                     kernel_vector, purity_defect, quotient_module, row_contraction_defect, shift_matrix,
                     weighted_adjoint)
from .koszul import (DiracReport, HomologyReport, KoszulComplex, augmented_shift_complex, build_koszul,
                     dirac_report, fredholm_index, homology_dims, shift_strand_homology, spectrum_membership,
                     taylor_invertible)
from .moebius import (CompositionUnitary, MoebiusMap, apply_moebius_to_tuple, base_point_transport_defect,
                      build_composition_unitary, ergodicity_scan, kernel_identity_residual, moebius_eval,
                      row_moebius_check, unitarity_defect)
from .rank import GapWarning, RankDecision, UnreliableRankError, numerical_rank
from .resolution import (ComparisonReport, LocalizedComplex, MultiplierMatrix, ResolutionSpec,
                         adjoint_kernel_residual, apply_multiplier, compare_theorem_39_25, compare_theorem_87,
                         compose, koszul_resolution_of_point, localize, localized_homology,
                         multiplier_norm_bound_check, taylor_resolution_monomial, verify_exactness)

__version__ = "0.1.0"
