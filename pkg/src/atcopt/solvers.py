"""Direct solves for the chain: full problems, subdomain problems, bounds.

All assembled systems are symmetric positive definite, so they are
factored by banded Cholesky without pivoting; one step of iterative
refinement keeps residuals near rounding level.  A dense fallback with
the same contract serves as a cross-check oracle in the tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.linalg import cho_solve_banded, cholesky_banded

from .lattice import ChainModel, Decomposition, DisplacementField, OuterBoundary
from .operators import (
    BandedSystem,
    assemble_atomistic,
    assemble_continuum,
    delta1_squared_array,
)

__all__ = [
    "SolverError",
    "FactorizationError",
    "ResidualError",
    "SolveReport",
    "solve_banded",
    "solve_dense",
    "solve_full_atomistic",
    "solve_full_continuum",
    "solve_atomistic_subproblem",
    "solve_continuum_subproblem",
    "solve_atomistic_on_continuum",
    "ModelingErrorReport",
    "modeling_error_bound",
    "displacement_csv_text",
    "write_displacement_csv",
]

RESIDUAL_RTOL = 1e-10


class SolverError(RuntimeError):
    """Base class for direct-solve failures."""


class FactorizationError(SolverError):
    """Cholesky factorization hit a non-positive pivot (invalid system upstream)."""


class ResidualError(SolverError):
    """Computed solution failed the residual acceptance check."""


@dataclass(frozen=True)
class SolveReport:
    solution: DisplacementField
    residual_inf: float
    factorization_ok: bool


def _check_residual(system: BandedSystem, x: np.ndarray) -> float:
    residual = float(np.max(np.abs(system.rhs - system.matvec(x))))
    tol = RESIDUAL_RTOL * (1.0 + float(np.max(np.abs(system.rhs))))
    if residual > tol:
        raise ResidualError(
            f"residual {residual:.3e} exceeds acceptance threshold {tol:.3e}"
        )
    return residual


def solve_banded(system: BandedSystem, domain_tag: str = "global") -> SolveReport:
    """Solve by symmetric banded Cholesky with one refinement step."""
    try:
        factor = cholesky_banded(system.bands, lower=True)
    except np.linalg.LinAlgError as exc:
        raise FactorizationError(f"banded Cholesky failed: {exc}") from exc
    x = cho_solve_banded((factor, True), system.rhs)
    x += cho_solve_banded((factor, True), system.rhs - system.matvec(x))
    residual = _check_residual(system, x)
    field = DisplacementField(
        system.index_offset, system.index_offset + system.size - 1, x, domain_tag
    )
    return SolveReport(field, residual, True)


def solve_dense(system: BandedSystem, domain_tag: str = "global") -> SolveReport:
    """Dense-factorization fallback with the same contract (test oracle)."""
    a = system.to_dense()
    try:
        x = np.linalg.solve(a, system.rhs)
    except np.linalg.LinAlgError as exc:
        raise FactorizationError(f"dense solve failed: {exc}") from exc
    x += np.linalg.solve(a, system.rhs - system.matvec(x))
    residual = _check_residual(system, x)
    field = DisplacementField(
        system.index_offset, system.index_offset + system.size - 1, x, domain_tag
    )
    return SolveReport(field, residual, True)


def _with_boundary(
    left: tuple[int, ...],
    left_vals: tuple[float, ...],
    report: SolveReport,
    right: tuple[int, ...],
    right_vals: tuple[float, ...],
    domain_tag: str,
) -> DisplacementField:
    values = np.concatenate([left_vals, report.solution.values, right_vals])
    return DisplacementField(left[0], right[-1], values, domain_tag)


def solve_full_atomistic(
    chain: ChainModel, bc: OuterBoundary | None = None, method=solve_banded
) -> DisplacementField:
    """Displacements of the fully atomistic chain on ``[0, N]``."""
    bc = bc or OuterBoundary()
    N = chain.N
    dirichlet = {0: bc.u0, 1: bc.u1, N - 1: bc.u_nm1, N: bc.u_n}
    report = method(assemble_atomistic(chain, chain.interior, dirichlet))
    return _with_boundary(
        (0, 1), (bc.u0, bc.u1), report, (N - 1, N), (bc.u_nm1, bc.u_n), "global"
    )


def solve_full_continuum(
    chain: ChainModel, bc: OuterBoundary | None = None, method=solve_banded
) -> DisplacementField:
    """Displacements of the fully continuum chain on ``[0, N]``."""
    bc = bc or OuterBoundary()
    N = chain.N
    dirichlet = {1: bc.u1, N - 1: bc.u_nm1}
    report = method(assemble_continuum(chain, chain.interior, dirichlet))
    return _with_boundary(
        (0, 1), (bc.u0, bc.u1), report, (N - 1, N), (bc.u_nm1, bc.u_n), "global"
    )


def solve_atomistic_subproblem(
    chain: ChainModel,
    decomp: Decomposition,
    theta_a: tuple[float, float],
    gamma_minus: tuple[float, float] = (0.0, 0.0),
    load: np.ndarray | None = None,
    method=solve_banded,
) -> DisplacementField:
    """Atomistic window solve on ``[0, L]`` with interface values ``theta_a``.

    ``theta_a`` are the virtual Dirichlet values at ``{L-1, L}``;
    ``gamma_minus`` are the (normally zero) values at the true boundary
    pair ``{0, 1}``.
    """
    L = decomp.L
    dirichlet = {0: gamma_minus[0], 1: gamma_minus[1], L - 1: theta_a[0], L: theta_a[1]}
    report = method(assemble_atomistic(chain, decomp.atom_interior, dirichlet, load))
    return _with_boundary(
        (0, 1), gamma_minus, report, (L - 1, L), tuple(theta_a), "atomistic"
    )


def solve_continuum_subproblem(
    chain: ChainModel,
    decomp: Decomposition,
    theta_c: float,
    gamma_plus: float = 0.0,
    load: np.ndarray | None = None,
    method=solve_banded,
) -> DisplacementField:
    """Continuum window solve on ``[K, N-1]`` with interface value ``theta_c``.

    The right end carries the true boundary value at ``N - 1``
    (``gamma_plus``, normally zero); the value at atom ``N`` never enters
    the three-point stencil.
    """
    K, nbar = decomp.K, decomp.N - 1
    dirichlet = {K: theta_c, nbar: gamma_plus}
    report = method(assemble_continuum(chain, decomp.cont_interior, dirichlet, load))
    return _with_boundary((K,), (theta_c,), report, (nbar,), (gamma_plus,), "continuum")


def solve_atomistic_on_continuum(
    chain: ChainModel,
    decomp: Decomposition,
    theta_pair: tuple[float, float],
    gamma_plus_pair: tuple[float, float] = (0.0, 0.0),
    load: np.ndarray | None = None,
    method=solve_banded,
) -> DisplacementField:
    """Atomistic-operator solve on the continuum window ``[K, N]``.

    This is the two-node-interface variant used by the consistency check
    that recovers the global atomistic solution: Dirichlet pairs at
    ``{K, K+1}`` (``theta_pair``) and ``{N-1, N}``.
    """
    K, N = decomp.K, decomp.N
    dirichlet = {
        K: theta_pair[0],
        K + 1: theta_pair[1],
        N - 1: gamma_plus_pair[0],
        N: gamma_plus_pair[1],
    }
    report = method(assemble_atomistic(chain, decomp.cont_interior_pair, dirichlet, load))
    return _with_boundary(
        (K, K + 1), tuple(theta_pair), report, (N - 1, N), tuple(gamma_plus_pair), "continuum"
    )


# ---------------------------------------------------------------------------
# continuum modeling-error bound


@dataclass(frozen=True)
class ModelingErrorReport:
    """Upper bounds on the continuum modeling error for a reference field.

    ``sharp_bound`` uses the exact minimum eigenvalue of the continuum
    operator on the domain; ``asymptotic_bound`` is the informational
    ``c0 * size**2`` envelope.
    """

    sharp_bound: float
    sharp_prefactor: float  # |k2| / lambda_min
    asymptotic_bound: float
    c0: float
    lambda_min: float
    n_sites: int
    curvature_norm: float  # l2 norm of D1^2 u over the domain rows


def continuum_min_eigenvalue(k_c: float, n: int) -> float:
    """Smallest eigenvalue of the n-site discrete Laplacian scaled by ``k_c``."""
    return 4.0 * k_c * math.sin(math.pi / (2.0 * (n + 1))) ** 2


def modeling_error_bound(
    chain: ChainModel,
    u_ref: DisplacementField,
    domain: str = "global",
    decomp: Decomposition | None = None,
) -> ModelingErrorReport:
    """Bound ``|u_ref - continuum solution|`` by the curvature of ``u_ref``.

    ``domain`` selects the full chain (rows ``[2, N-2]``) or, with a
    decomposition, the continuum window (rows ``[K+1, N-2]``).
    """
    N = chain.N
    if domain == "global":
        rows = (2, N - 2)
        size_scale = N
    elif domain == "continuum":
        if decomp is None:
            raise ValueError("continuum-domain bound needs a decomposition")
        rows = decomp.cont_interior
        size_scale = N - decomp.K
    else:
        raise ValueError(f"unknown domain {domain!r}; expected 'global' or 'continuum'")
    lo, hi = rows
    if hi < lo:
        raise ValueError(f"domain rows [{lo}, {hi}] are empty")
    if u_ref.lo > lo - 2 or u_ref.hi < hi + 2:
        raise ValueError("reference field does not support the five-point stencil rows")
    window = u_ref.window(lo - 2, hi + 2)
    curvature = float(np.linalg.norm(delta1_squared_array(window)))
    n = hi - lo + 1
    lam = continuum_min_eigenvalue(chain.k_c, n)
    prefactor = abs(chain.k2) / lam
    c0 = abs(chain.k2) / (chain.k_c * math.pi**2)
    return ModelingErrorReport(
        sharp_bound=prefactor * curvature,
        sharp_prefactor=prefactor,
        asymptotic_bound=c0 * size_scale**2 * curvature,
        c0=c0,
        lambda_min=lam,
        n_sites=n,
        curvature_norm=curvature,
    )


# ---------------------------------------------------------------------------
# CSV export


def displacement_csv_text(field: DisplacementField) -> str:
    """CSV with columns ``atom_index, displacement`` at full precision."""
    if not np.all(np.isfinite(field.values)):
        raise ValueError("refusing to write non-finite displacements")
    lines = ["atom_index,displacement"]
    for i, v in zip(range(field.lo, field.hi + 1), field.values):
        lines.append(f"{i},{v:.17g}")
    return "\n".join(lines) + "\n"


def write_displacement_csv(field: DisplacementField, path) -> None:
    Path(path).write_text(displacement_csv_text(field))
