"""Finite perimeter-measure spaces: N-Cheeger constants, curvature and spectra.

The central object is :class:`FiniteSpace`, a finite set with positive point
masses and a perimeter oracle (a graph cut or an explicit table).  On top of
it the package provides exhaustive axiom checks, coarea-exact total
variation, exact and brute-force Cheeger solvers, prescribed-curvature
minimization by min-cut, p-eigenvalue and torsion solvers, a catalog of
concrete spaces and an experiment runner.
"""
from .axioms import AxiomReport, IsoperimetricProfile, check_axioms, isoperimetric_profile
from .bv import BVFunction, symmetric_coarea, variation
from .cheeger import (CheegerCertificate, Cluster, brute_force_hN, dinkelbach_h1, local_search_hN,
                      maximal_minimal_cheeger, verify_cluster_inequalities)
from .curvature import kappa_threshold_scan, minimize_J, minimize_Jkappa, pmc_certificate
from .errors import (AdmissibilityError, AxiomMissingError, ConfigError, PMSpaceError, SizeError,
                     TheoremViolationError)
from .space import CutPerimeter, FiniteSpace, TablePerimeter, load_space, save_space
from .spectral import lambda_11, lambda_1p, lambda_N, torsion

__version__ = "0.1.0"

__all__ = [
    "AdmissibilityError", "AxiomMissingError", "AxiomReport", "BVFunction", "CheegerCertificate",
    "Cluster", "ConfigError", "CutPerimeter", "FiniteSpace", "IsoperimetricProfile", "PMSpaceError",
    "SizeError", "TablePerimeter", "TheoremViolationError", "brute_force_hN", "check_axioms",
    "dinkelbach_h1", "isoperimetric_profile", "kappa_threshold_scan", "lambda_11", "lambda_1p",
    "lambda_N", "load_space", "local_search_hN", "maximal_minimal_cheeger", "minimize_J",
    "minimize_Jkappa", "pmc_certificate", "save_space", "symmetric_coarea", "torsion", "variation",
    "verify_cluster_inequalities",
]
