"""Shareability checks built from the measures module.

The pipeline: the entropy/formation/correlation duality on pure tripartite
states, the single-step inequality EoF(A:BC) >= EoF(A:B) + G(A:C), its
iteration along an n-extension, and the resulting party bound
N = floor(S(A) / G(A:B)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .measures import (
    OptBudget,
    classical_correlation,
    entropy,
    eof_2q,
    eof_convex_roof,
    g_arrow,
    ppt_entangled,
)
from .qmat import DensityMatrix, PureState, partial_trace

G_FLOOR = 2e-3
TIE_TOL = 1e-6


@dataclass(frozen=True)
class DualityReport:
    """Terms of S(A) = EoF(A:B) + C(A:C) with the signed residual."""

    s_a: float
    eof_ab: float
    cc_ac: float
    residual: float
    eof_exact: bool


@dataclass(frozen=True)
class ChainReport:
    """Iterated-inequality audit of an n-extension.

    ``final_margin`` is S(A) - n G(A:B), the primary assertion (both terms
    have controlled error direction).  Per-step EoF estimates are advisory
    upper estimates.
    """

    n: int
    s_a: float
    g_arrow_ab: float
    final_margin: float
    ef_estimates: tuple
    step_slacks: tuple
    marginal_deviation: float


@dataclass(frozen=True)
class BoundReport:
    """Shareability bound N = floor(S(A)/G(A:B)) with its caveats.

    status: "bounded" (n_max set), "unbounded" (separable), or
    "unreliable" (entangled verdict but G below optimizer resolution).
    margin is the signed distance of S/G to the nearest integer (None when
    not bounded); ``tie`` flags a ratio within 1e-6 of an integer, which is
    then reported as that integer.
    """

    s_a: float
    g_arrow_ab: float
    separability_verdict: str
    status: str
    n_max: int | None
    margin: float | None
    tie: bool
    restarts_used: int
    best_gap: float
    seed: int


def _require_tripartite(dims):
    if len(dims) != 3:
        raise ValueError("tripartite state required")


def duality_check(phi: PureState, budget: OptBudget) -> DualityReport:
    """Evaluate S(A) - EoF(A:B) - C(A:C) on a pure tripartite state.

    S(A) is exact, EoF is exact for qubit A and B (closed form) and an
    upper estimate otherwise, C(A:C) is the optimizer's lower estimate, so
    the residual inherits only the optimizer error.
    """
    _require_tripartite(phi.dims)
    if any(d < 2 for d in phi.dims):
        raise ValueError("tripartite state required")
    rho = phi.density()
    rho_ab = partial_trace(rho, [0, 1])
    rho_ac = partial_trace(rho, [0, 2])
    s_a = entropy(partial_trace(rho, [0]))
    if rho_ab.dims == (2, 2):
        eof = eof_2q(rho_ab)
        exact = True
    else:
        eof = eof_convex_roof(rho_ab, [0], budget).value
        exact = False
    cc = classical_correlation(rho_ac, 1, budget).value
    return DualityReport(s_a, eof, cc, s_a - eof - cc, exact)


def monogamy_step_check(rho: DensityMatrix, budget: OptBudget) -> float:
    """Slack of EoF(A:BC) >= EoF(A:B) + G(A:C) from best-found estimates.

    The left side is an upper estimate and G is an upper estimate, so small
    negative slacks within optimizer tolerance are expected; large negative
    values indicate a real failure.
    """
    _require_tripartite(rho.dims)
    ef_abc = eof_convex_roof(rho, [0], budget).value
    rho_ab = partial_trace(rho, [0, 1])
    rho_ac = partial_trace(rho, [0, 2])
    if rho_ab.dims == (2, 2):
        ef_ab = eof_2q(rho_ab)
    else:
        ef_ab = eof_convex_roof(rho_ab, [0], budget).value
    g_ac = g_arrow(rho_ac, 1, budget).value
    return float(ef_abc - ef_ab - g_ac)


def chain_verify(rho_ext: DensityMatrix, budget: OptBudget,
                 marginal_tol: float = 1e-8) -> ChainReport:
    """Audit S(A) >= EoF(A:B_1..B_n) >= n G(A:B) on an n-extension.

    All (A, B_k) marginals must agree within ``marginal_tol``; otherwise
    the input is rejected as not a valid extension.
    """
    dims = rho_ext.dims
    n = len(dims) - 1
    if n < 1:
        raise ValueError("extension must carry at least one share")
    if any(d != dims[1] for d in dims[1:]):
        raise ValueError("shape mismatch")
    marginals = [partial_trace(rho_ext, [0, k]) for k in range(1, n + 1)]
    dev = 0.0
    for k in range(1, n):
        dev = max(dev, float(np.max(np.abs(marginals[k].matrix - marginals[0].matrix))))
    if dev > marginal_tol:
        raise ValueError(
            f"not a valid extension: marginals differ by {dev:.3e} (> {marginal_tol:g})"
        )
    target = marginals[0]
    s_a = entropy(partial_trace(rho_ext, [0]))
    g_ab = g_arrow(target, 1, budget).value
    final_margin = s_a - n * g_ab

    ef_estimates = []
    for k in range(1, n + 1):
        reduced = partial_trace(rho_ext, [0] + list(range(k, n + 1)))
        if reduced.dims == (2, 2):
            ef_estimates.append(eof_2q(reduced))
        else:
            ef_estimates.append(eof_convex_roof(reduced, [0], budget).value)
    step_slacks = []
    for k in range(n - 1):
        step_slacks.append(ef_estimates[k] - ef_estimates[k + 1] - g_ab)
    step_slacks.append(ef_estimates[-1] - g_ab)

    return ChainReport(
        n=n,
        s_a=s_a,
        g_arrow_ab=g_ab,
        final_margin=float(final_margin),
        ef_estimates=tuple(float(x) for x in ef_estimates),
        step_slacks=tuple(float(x) for x in step_slacks),
        marginal_deviation=dev,
    )


def sharability_bound(rho: DensityMatrix, budget: OptBudget) -> BoundReport:
    """Bound on how many parties can share the B side of a bipartite state.

    Separable states (by the partial-transpose verdict) are unbounded.  An
    entangled state whose best-found G falls below the optimizer resolution
    floor is reported "unreliable" rather than given a huge N.
    """
    if len(rho.dims) != 2:
        raise ValueError("bipartite state required")
    s_a = entropy(partial_trace(rho, [0]))
    verdict = ppt_entangled(rho, [0])
    res = g_arrow(rho, 1, budget)
    g = res.value

    status = "bounded"
    n_max: int | None = None
    margin: float | None = None
    tie = False
    if verdict == "separable":
        status = "unbounded"
    elif g < G_FLOOR:
        status = "unreliable" if verdict == "entangled" else "unbounded"
    else:
        ratio = s_a / g
        nearest = round(ratio)
        margin = float(ratio - nearest)
        if abs(margin) <= TIE_TOL:
            tie = True
            n_max = int(nearest)
        else:
            n_max = int(math.floor(ratio))
    return BoundReport(
        s_a=s_a,
        g_arrow_ab=g,
        separability_verdict=verdict,
        status=status,
        n_max=n_max,
        margin=margin,
        tie=tie,
        restarts_used=res.restarts_used,
        best_gap=res.best_gap,
        seed=budget.seed,
    )
