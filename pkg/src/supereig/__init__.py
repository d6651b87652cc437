"""Eigenvalue approximations of the Laplacian by CR, ECR, P1 and RT0 elements,
with gradient recovery, asymptotically exact error estimators, recovering
and combining eigenvalues, and extrapolation."""

__version__ = "0.1.0"

from .mesh import Triangulation, build_domain, uniform_refine, element_geometry  # noqa: E402
from .fespaces import ElementKind, FEFunction, build_dofmap, canonical_interpolate  # noqa: E402
from .assembly import assemble_stiffness, assemble_mass, assemble_load, assemble_rt_saddle  # noqa: E402
from .solver import solve_evp, solve_source, solve_rt_source, eigenpairs  # noqa: E402
from .recovery import recover_Kh, recover_ppr, project_p1star, recovered_hessian  # noqa: E402
from .estimators import (  # noqa: E402
    taylor_P, rt_expansion_norm, estimator_F, recovering_eigenvalue,
    combining_eigenvalue, extrapolate,
)

__all__ = [
    "Triangulation", "build_domain", "uniform_refine", "element_geometry",
    "ElementKind", "FEFunction", "build_dofmap", "canonical_interpolate",
    "assemble_stiffness", "assemble_mass", "assemble_load", "assemble_rt_saddle",
    "solve_evp", "solve_source", "solve_rt_source", "eigenpairs",
    "recover_Kh", "recover_ppr", "project_p1star", "recovered_hessian",
    "taylor_P", "rt_expansion_norm", "estimator_F", "recovering_eigenvalue",
    "combining_eigenvalue", "extrapolate",
]
