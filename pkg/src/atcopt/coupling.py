"""Virtual-control coupling of the atomistic and continuum windows.

The coupled problem minimizes the squared l2 mismatch of the two
subdomain states over the overlap ``[K, L]`` with respect to three
virtual Dirichlet controls: the pair ``(theta_a[L-1], theta_a[L])`` on
the atomistic interface and ``theta_c[K]`` on the continuum interface.
Because the subdomain solves are linear, the reduced objective is a
positive definite quadratic in the controls; it is assembled from three
basis lifting solves and minimized by one small symmetric solve.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass

import numpy as np

from .lattice import ChainModel, Decomposition, DisplacementField, OuterBoundary, _readonly
from .operators import _apply_atomistic, _apply_continuum
from .solvers import (
    solve_atomistic_on_continuum,
    solve_atomistic_subproblem,
    solve_continuum_subproblem,
)

__all__ = [
    "ControlPair",
    "ReducedSystem",
    "MismatchReport",
    "AtcResult",
    "CouplingError",
    "homogeneous_states",
    "lift_atomistic",
    "lift_continuum",
    "mismatch_norm",
    "assemble_reduced_system",
    "solve_controls",
    "compose_atc",
    "trace",
    "solve_atc",
    "solve_atc_consistent",
    "apply_q",
    "apply_p",
    "continuum_trace_lifting",
    "gram_norm",
    "atc_csv_text",
    "atc_summary_dict",
    "atc_summary_json",
]

GRAM_CONDITION_WARN = 1e12


class CouplingError(RuntimeError):
    """The reduced interface system violated a structural guarantee."""


@dataclass(frozen=True)
class ControlPair:
    """Virtual interface values: ``(theta_a_lm1, theta_a_l)`` and ``theta_c_k``."""

    theta_a_lm1: float
    theta_a_l: float
    theta_c_k: float

    def __post_init__(self) -> None:
        for name in ("theta_a_lm1", "theta_a_l", "theta_c_k"):
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"control {name} is not finite")

    def as_array(self) -> np.ndarray:
        return np.array([self.theta_a_lm1, self.theta_a_l, self.theta_c_k])

    @classmethod
    def from_array(cls, a) -> "ControlPair":
        a = np.asarray(a, dtype=float)
        return cls(float(a[0]), float(a[1]), float(a[2]))

    @property
    def theta_a(self) -> tuple[float, float]:
        return (self.theta_a_lm1, self.theta_a_l)


@dataclass(frozen=True)
class ReducedSystem:
    """Quadratic reduced problem in the controls.

    ``gram[i, j]`` is the overlap inner product of the basis responses
    ``w1 = lift_a(1, 0)``, ``w2 = lift_a(0, 1)``, ``w3 = -lift_c(1)``;
    ``rhs`` is minus the overlap inner product of the homogeneous-state
    gap with each response.
    """

    gram: np.ndarray
    rhs: np.ndarray
    basis_liftings: tuple[DisplacementField, ...]
    u_a0: DisplacementField
    u_c0: DisplacementField
    decomp: Decomposition
    bc: OuterBoundary
    min_eigenvalue: float
    condition: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "gram", _readonly(self.gram))
        object.__setattr__(self, "rhs", _readonly(self.rhs))


@dataclass(frozen=True)
class MismatchReport:
    """Overlap mismatch energy and its interface/interior split.

    ``total`` is the squared l2 norm of ``u_a - u_c`` over ``[K, L]``;
    the three terms cover the continuum interface node ``K``, the
    interior ``[K+1, L-2]``, and the atomistic interface pair
    ``{L-1, L}``.
    """

    total: float
    at_cont_interface: float
    interior: float
    at_atom_interface: float


@dataclass(frozen=True)
class AtcResult:
    controls: ControlPair
    u_a_op: DisplacementField
    u_c_op: DisplacementField
    u_atc: DisplacementField
    mismatch: float
    mismatch_split: MismatchReport
    diagnostics: dict


def homogeneous_states(
    chain: ChainModel, decomp: Decomposition, bc: OuterBoundary | None = None
) -> tuple[DisplacementField, DisplacementField]:
    """Subdomain states carrying the load with zero virtual interface values."""
    bc = bc or OuterBoundary()
    u_a0 = solve_atomistic_subproblem(
        chain, decomp, (0.0, 0.0), gamma_minus=(bc.u0, bc.u1)
    )
    u_c0 = solve_continuum_subproblem(chain, decomp, 0.0, gamma_plus=bc.u_nm1)
    return u_a0, u_c0


def lift_atomistic(
    chain: ChainModel, decomp: Decomposition, theta_a: tuple[float, float]
) -> DisplacementField:
    """Zero-load atomistic response to interface values ``theta_a`` at ``{L-1, L}``."""
    zero = np.zeros(chain.N + 1)
    return solve_atomistic_subproblem(chain, decomp, theta_a, load=zero)


def lift_continuum(decomp: Decomposition, theta_c: float) -> DisplacementField:
    """Zero-load continuum response: the exact linear ramp, no solve needed."""
    if not np.isfinite(theta_c):
        raise ValueError("theta_c is not finite")
    K, nbar = decomp.K, decomp.N - 1
    i = np.arange(K, nbar + 1, dtype=float)
    values = theta_c * (nbar - i) / (nbar - K)
    return DisplacementField(K, nbar, values, "continuum")


def mismatch_norm(
    u_a: DisplacementField, u_c: DisplacementField, decomp: Decomposition
) -> MismatchReport:
    """Squared l2 mismatch over the overlap ``[K, L]`` with its three-way split."""
    K, L = decomp.K, decomp.L
    d = u_a.window(K, L) - u_c.window(K, L)
    sq = d * d
    at_cont = float(sq[0])
    interior = float(np.sum(sq[1 : L - 1 - K]))
    at_atom = float(sq[L - 1 - K] + sq[L - K])
    return MismatchReport(float(np.sum(sq)), at_cont, interior, at_atom)


def assemble_reduced_system(
    chain: ChainModel, decomp: Decomposition, bc: OuterBoundary | None = None
) -> ReducedSystem:
    """Build the 3x3 reduced quadratic from basis lifting responses."""
    bc = bc or OuterBoundary()
    u_a0, u_c0 = homogeneous_states(chain, decomp, bc)
    w1 = lift_atomistic(chain, decomp, (1.0, 0.0))
    w2 = lift_atomistic(chain, decomp, (0.0, 1.0))
    w3 = lift_continuum(decomp, 1.0)
    K, L = decomp.K, decomp.L
    responses = np.vstack(
        [w1.window(K, L), w2.window(K, L), -w3.window(K, L)]
    )
    gram = responses @ responses.T
    gap = u_a0.window(K, L) - u_c0.window(K, L)
    rhs = -(responses @ gap)
    eigenvalues = np.linalg.eigvalsh(gram)
    min_eig = float(eigenvalues[0])
    if min_eig <= 0.0:
        raise CouplingError(
            f"reduced interface system is not positive definite (min eig {min_eig:.3e})"
        )
    condition = float(eigenvalues[-1] / min_eig)
    if condition > GRAM_CONDITION_WARN:
        warnings.warn(
            f"reduced interface system condition {condition:.3e} exceeds "
            f"{GRAM_CONDITION_WARN:.0e}; controls may lose accuracy",
            RuntimeWarning,
            stacklevel=2,
        )
    return ReducedSystem(gram, rhs, (w1, w2, w3), u_a0, u_c0, decomp, bc, min_eig, condition)


def _solve_sym(gram: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    x = np.linalg.solve(gram, rhs)
    x += np.linalg.solve(gram, rhs - gram @ x)
    return x


def solve_controls(system: ReducedSystem) -> ControlPair:
    """Minimize the reduced quadratic: one symmetric 3x3 solve plus refinement."""
    return ControlPair.from_array(_solve_sym(system.gram, system.rhs))


def trace(u: DisplacementField, decomp: Decomposition) -> ControlPair:
    """Interface values ``(u[L-1], u[L] | u[K])`` of a field covering them."""
    return ControlPair(u[decomp.L - 1], u[decomp.L], u[decomp.K])


def gram_norm(system: ReducedSystem, delta: np.ndarray | ControlPair) -> float:
    """Control-space norm induced by the overlap mismatch inner product."""
    d = delta.as_array() if isinstance(delta, ControlPair) else np.asarray(delta, dtype=float)
    return float(np.sqrt(max(d @ system.gram @ d, 0.0)))


def _state_residuals(
    chain: ChainModel,
    u_a: DisplacementField,
    u_c: DisplacementField,
    continuum_operator: bool = True,
) -> dict:
    """Max-norm force-balance residuals of the recovered window states."""
    f = chain.force
    res_a = _apply_atomistic(chain, u_a.values) - f[u_a.lo + 2 : u_a.hi - 1]
    apply_c = _apply_continuum if continuum_operator else _apply_atomistic
    off = 1 if continuum_operator else 2
    res_c = apply_c(chain, u_c.values) - f[u_c.lo + off : u_c.hi - off + 1]
    return {
        "state_residual_atom": float(np.max(np.abs(res_a))),
        "state_residual_cont": float(np.max(np.abs(res_c))),
    }


def _compose(
    decomp: Decomposition,
    u_a: DisplacementField,
    u_c: DisplacementField,
    u_last: float,
) -> DisplacementField:
    """Glue subdomain states into a chain-wide field (atomistic wins on overlap)."""
    L, N = decomp.L, decomp.N
    hi_c = u_c.hi
    values = np.concatenate(
        [u_a.values, u_c.window(L + 1, hi_c), [u_last] if hi_c < N else []]
    )
    return DisplacementField(0, N, values, "global")


def compose_atc(
    chain: ChainModel,
    decomp: Decomposition,
    controls: ControlPair,
    bc: OuterBoundary | None = None,
    system: ReducedSystem | None = None,
) -> AtcResult:
    """Recover subdomain states from controls and glue the chain-wide field."""
    bc = bc or OuterBoundary()
    u_a_op = solve_atomistic_subproblem(
        chain, decomp, controls.theta_a, gamma_minus=(bc.u0, bc.u1)
    )
    u_c_op = solve_continuum_subproblem(
        chain, decomp, controls.theta_c_k, gamma_plus=bc.u_nm1
    )
    u_atc = _compose(decomp, u_a_op, u_c_op, bc.u_n)
    split = mismatch_norm(u_a_op, u_c_op, decomp)
    diagnostics = {
        "gamma": decomp.gamma,
        "variant": "cauchy-born",
        **_state_residuals(chain, u_a_op, u_c_op),
    }
    if system is not None:
        diagnostics["gram_condition"] = system.condition
        diagnostics["gram_min_eigenvalue"] = system.min_eigenvalue
    return AtcResult(controls, u_a_op, u_c_op, u_atc, split.total, split, diagnostics)


def solve_atc(
    chain: ChainModel, decomp: Decomposition, bc: OuterBoundary | None = None
) -> AtcResult:
    """End-to-end coupled solve: assemble, minimize, recover states, glue."""
    bc = bc or OuterBoundary()
    system = assemble_reduced_system(chain, decomp, bc)
    controls = solve_controls(system)
    return compose_atc(chain, decomp, controls, bc, system)


def solve_atc_consistent(
    chain: ChainModel, decomp: Decomposition, bc: OuterBoundary | None = None
) -> AtcResult:
    """Coupled solve with the atomistic operator on both windows.

    The continuum window keeps the full five-point operator, so its
    artificial interface needs the two-node pair ``{K, K+1}`` and the
    control space is four-dimensional.  The optimum reproduces the
    global atomistic solution; this is the built-in consistency check.
    """
    bc = bc or OuterBoundary()
    N, K, L = decomp.N, decomp.K, decomp.L
    zero = np.zeros(N + 1)
    right = (bc.u_nm1, bc.u_n)

    u_a0 = solve_atomistic_subproblem(chain, decomp, (0.0, 0.0), gamma_minus=(bc.u0, bc.u1))
    u_c0 = solve_atomistic_on_continuum(chain, decomp, (0.0, 0.0), gamma_plus_pair=right)
    lifts = [
        lift_atomistic(chain, decomp, (1.0, 0.0)),
        lift_atomistic(chain, decomp, (0.0, 1.0)),
        solve_atomistic_on_continuum(chain, decomp, (1.0, 0.0), load=zero),
        solve_atomistic_on_continuum(chain, decomp, (0.0, 1.0), load=zero),
    ]
    signs = (1.0, 1.0, -1.0, -1.0)
    responses = np.vstack([s * w.window(K, L) for s, w in zip(signs, lifts)])
    gram = responses @ responses.T
    gap = u_a0.window(K, L) - u_c0.window(K, L)
    eigenvalues = np.linalg.eigvalsh(gram)
    if eigenvalues[0] <= 0.0:
        raise CouplingError(
            "consistent-variant interface system is not positive definite "
            f"(min eig {eigenvalues[0]:.3e})"
        )
    theta = _solve_sym(gram, -(responses @ gap))

    u_a_op = solve_atomistic_subproblem(
        chain, decomp, (theta[0], theta[1]), gamma_minus=(bc.u0, bc.u1)
    )
    u_c_op = solve_atomistic_on_continuum(
        chain, decomp, (theta[2], theta[3]), gamma_plus_pair=right
    )
    u_atc = _compose(decomp, u_a_op, u_c_op, bc.u_n)
    split = mismatch_norm(u_a_op, u_c_op, decomp)
    controls = ControlPair(float(theta[0]), float(theta[1]), float(theta[2]))
    diagnostics = {
        "gamma": decomp.gamma,
        "variant": "atomistic-consistent",
        "theta_c_kp1": float(theta[3]),
        "gram_condition": float(eigenvalues[-1] / eigenvalues[0]),
        "gram_min_eigenvalue": float(eigenvalues[0]),
        **_state_residuals(chain, u_a_op, u_c_op, continuum_operator=False),
    }
    return AtcResult(controls, u_a_op, u_c_op, u_atc, split.total, split, diagnostics)


# ---------------------------------------------------------------------------
# the affine recovery operator and its linear part


def apply_q(chain: ChainModel, decomp: Decomposition, mu: ControlPair) -> DisplacementField:
    """Linear part of the recovery: pure liftings glued over the chain."""
    v_a = lift_atomistic(chain, decomp, mu.theta_a)
    v_c = lift_continuum(decomp, mu.theta_c_k)
    return _compose(decomp, v_a, v_c, 0.0)


def apply_p(
    chain: ChainModel,
    decomp: Decomposition,
    mu: ControlPair,
    bc: OuterBoundary | None = None,
) -> DisplacementField:
    """Affine recovery: liftings plus homogeneous states, glued over the chain."""
    bc = bc or OuterBoundary()
    return compose_atc(chain, decomp, mu, bc).u_atc


def continuum_trace_lifting(
    chain: ChainModel,
    decomp: Decomposition,
    u_ref: DisplacementField,
    bc: OuterBoundary | None = None,
) -> DisplacementField:
    """Continuum window state whose interface value copies ``u_ref`` at ``K``."""
    bc = bc or OuterBoundary()
    return solve_continuum_subproblem(
        chain, decomp, u_ref[decomp.K], gamma_plus=bc.u_nm1
    )


# ---------------------------------------------------------------------------
# exports


def atc_csv_text(result: AtcResult, decomp: Decomposition) -> str:
    """CSV rows ``atom_index, u_atc, u_a_op, u_c_op`` (blank outside windows)."""
    u_atc, u_a, u_c = result.u_atc, result.u_a_op, result.u_c_op
    for f in (u_atc, u_a, u_c):
        if not np.all(np.isfinite(f.values)):
            raise ValueError("refusing to write non-finite displacements")
    lines = ["atom_index,u_atc,u_a_op,u_c_op"]
    for i in range(u_atc.lo, u_atc.hi + 1):
        a = f"{u_a[i]:.17g}" if u_a.lo <= i <= u_a.hi else ""
        c = f"{u_c[i]:.17g}" if u_c.lo <= i <= u_c.hi else ""
        lines.append(f"{i},{u_atc[i]:.17g},{a},{c}")
    return "\n".join(lines) + "\n"


def atc_summary_dict(result: AtcResult, decomp: Decomposition) -> dict:
    return {
        "N": decomp.N,
        "K": decomp.K,
        "L": decomp.L,
        "gamma": decomp.gamma,
        "controls": {
            "theta_a_lm1": result.controls.theta_a_lm1,
            "theta_a_l": result.controls.theta_a_l,
            "theta_c_k": result.controls.theta_c_k,
        },
        "mismatch": result.mismatch,
        "mismatch_split": {
            "at_cont_interface": result.mismatch_split.at_cont_interface,
            "interior": result.mismatch_split.interior,
            "at_atom_interface": result.mismatch_split.at_atom_interface,
        },
        "norms": {
            "u_atc": result.u_atc.norm(),
            "u_a_op": result.u_a_op.norm(),
            "u_c_op": result.u_c_op.norm(),
        },
        "diagnostics": result.diagnostics,
    }


def atc_summary_json(result: AtcResult, decomp: Decomposition) -> str:
    return json.dumps(atc_summary_dict(result, decomp), indent=2, sort_keys=True) + "\n"
