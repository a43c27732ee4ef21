"""Construction, validation, and search of symmetric n-extensions.

A bipartite state is n-sharable when some global state on A x B_1..B_n has
every (A, B_k) marginal equal to it.  ``build`` realizes the explicit
extension that exists for any separable state, ``validate`` checks a
claimed extension marginal by marginal, and ``search_extension`` looks for
share-symmetric extensions by alternating projections.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations

import numpy as np

from .measures import OptBudget
from .qmat import (
    MAX_TOTAL_DIM,
    DensityMatrix,
    PureState,
    StateInvariantError,
    partial_trace,
)

MARGINAL_TOL = 1e-8
FOUND_TOL = 1e-6
MAX_ROUNDS = 2000
STALL_TOL = 1e-10

_SALT_SEARCH = 505

# alternating projections keep the full state dense and twirl over all
# share permutations, so the practical search envelope is small
_SEARCH_DIM_CAP = 256
_SEARCH_N_CAP = 6


@dataclass(frozen=True, eq=False)
class SeparableDecomposition:
    """Product-state mixture: weights with pure A and B factors."""

    weights: np.ndarray
    a_states: tuple
    b_states: tuple

    def __init__(self, weights, a_states, b_states):
        w = np.asarray(weights, dtype=float)
        if w.ndim != 1 or len(a_states) != w.size or len(b_states) != w.size:
            raise StateInvariantError("weights and states must align")
        if np.any(w < -1e-12):
            raise StateInvariantError("weights must be non-negative")
        if abs(w.sum() - 1.0) > 1e-9:
            raise StateInvariantError("weights must sum to 1")
        object.__setattr__(self, "weights", np.clip(w, 0.0, None))
        object.__setattr__(self, "a_states", tuple(a_states))
        object.__setattr__(self, "b_states", tuple(b_states))

    def target(self) -> DensityMatrix:
        """The mixture the decomposition claims to represent."""
        da = self.a_states[0].dim
        db = self.b_states[0].dim
        out = np.zeros((da * db, da * db), dtype=complex)
        for w, a, b in zip(self.weights, self.a_states, self.b_states):
            v = np.kron(a.amplitudes, b.amplitudes)
            out += w * np.outer(v, v.conj())
        return DensityMatrix(out, (da, db))


@dataclass(frozen=True)
class ExtensionValidation:
    valid: bool
    k: int | None          # first offending share (1-based) when invalid
    deviation: float       # max marginal deviation over all shares


@dataclass(frozen=True)
class SearchResult:
    found: bool
    state: DensityMatrix | None
    best_deviation: float
    rounds: int
    starts_used: int


def build(decomp: SeparableDecomposition, n: int, *, max_dim=None) -> DensityMatrix:
    """Extend a product mixture to n shares by repeating each B factor."""
    if n < 1:
        raise ValueError("n must be at least 1")
    cap = MAX_TOTAL_DIM if max_dim is None else max_dim
    da = decomp.a_states[0].dim
    db = decomp.b_states[0].dim
    total = da * db**n
    if total > cap:
        raise ValueError("dimension limit")
    out = np.zeros((total, total), dtype=complex)
    for w, a, b in zip(decomp.weights, decomp.a_states, decomp.b_states):
        v = a.amplitudes
        for _ in range(n):
            v = np.kron(v, b.amplitudes)
        out += w * np.outer(v, v.conj())
    return DensityMatrix(out, (da,) + (db,) * n)


def validate(rho_ext: DensityMatrix, target: DensityMatrix,
             tol: float = MARGINAL_TOL) -> ExtensionValidation:
    """Check every (A, B_k) marginal of a claimed extension against target."""
    if len(target.dims) != 2:
        raise ValueError("shape mismatch")
    dims = rho_ext.dims
    n = len(dims) - 1
    if n < 1 or dims[0] != target.dims[0] or any(d != target.dims[1] for d in dims[1:]):
        raise ValueError("shape mismatch")
    worst = 0.0
    first_bad = None
    for k in range(1, n + 1):
        marg = partial_trace(rho_ext, [0, k])
        dev = float(np.max(np.abs(marg.matrix - target.matrix)))
        worst = max(worst, dev)
        if dev > tol and first_bad is None:
            first_bad = k
    return ExtensionValidation(first_bad is None, first_bad, worst)


# ---------------------------------------------------------------------------
# alternating-projection search
# ---------------------------------------------------------------------------

def _twirl_ops(dims):
    n = len(dims) - 1
    nsub = len(dims)
    perms = []
    for p in permutations(range(1, n + 1)):
        order = [0] + list(p)
        perms.append(order + [nsub + i for i in order])
    return perms


def _twirl(x, dims, perms):
    t = x.reshape(dims + dims)
    acc = np.zeros_like(t)
    for axes in perms:
        acc += t.transpose(axes)
    d = x.shape[0]
    return (acc / len(perms)).reshape(d, d)


def _psd_unit(x):
    """Metric projection onto {X >= 0, tr X = 1}: eigenvalues are clipped at
    a common shift chosen so the kept part renormalizes to unit trace."""
    w, v = np.linalg.eigh(0.5 * (x + x.conj().T))
    u = np.sort(w)[::-1]
    css = np.cumsum(u)
    idx = np.nonzero(u * np.arange(1, u.size + 1) > (css - 1.0))[0]
    if idx.size == 0:
        w = np.full_like(w, 1.0 / w.size)
    else:
        theta = (css[idx[-1]] - 1.0) / (idx[-1] + 1)
        w = np.clip(w - theta, 0.0, None)
    return (v * w) @ v.conj().T


def _embed(y, dims, k):
    """Lift an (A, B_k) operator to the full space with identity elsewhere."""
    nsub = len(dims)
    da = dims[0]
    db = dims[k]
    rest = [i for i in range(1, nsub) if i != k]
    drest = int(np.prod([dims[i] for i in rest])) if rest else 1
    z = np.kron(y, np.eye(drest))
    # current ordering: A, B_k, rest...; permute back to canonical
    order = [0, k] + rest
    inv = np.argsort(order)
    zt = z.reshape([dims[i] for i in order] * 2)
    axes = list(inv) + [nsub + i for i in inv]
    d = int(np.prod(dims))
    return zt.transpose(axes).reshape(d, d)


def _marginals_vec(x, dims):
    n = len(dims) - 1
    d = x.shape[0]
    parts = []
    for k in range(1, n + 1):
        keep = [0, k]
        traced = [i for i in range(len(dims)) if i not in keep]
        dk = dims[0] * dims[k]
        dt = d // dk
        perm = keep + traced
        t = x.reshape(dims + dims).transpose(perm + [len(dims) + i for i in perm])
        parts.append(t.reshape(dk, dt, dk, dt).trace(axis1=1, axis2=3).reshape(-1))
    return np.concatenate(parts)


def _marginal_projector(dims):
    """Pseudo-inverse of the stacked marginal map's Gram operator."""
    n = len(dims) - 1
    m = dims[0] * dims[1]
    cols = []
    for k in range(1, n + 1):
        for idx in range(m * m):
            y = np.zeros((m * m,), dtype=complex)
            y[idx] = 1.0
            x = _embed(y.reshape(m, m), dims, k)
            cols.append(_marginals_vec(x, dims))
    gram = np.column_stack(cols)
    return np.linalg.pinv(gram, rcond=1e-10)


def search_extension(target: DensityMatrix, n: int, budget: OptBudget) -> SearchResult:
    """Look for a share-symmetric n-extension by alternating projections.

    Projects between the convex set of symmetric unit-trace PSD operators
    and the affine set matching every (A, B_k) marginal to the target.
    budget.restarts counts starting points (the first is the symmetrized
    product padding), budget.seed drives the random restarts.  A miss is
    evidence, not a certificate: the report labels it best_deviation.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    if len(target.dims) != 2:
        raise ValueError("shape mismatch")
    budget.require_nonempty()
    da, db = target.dims
    dims = (da,) + (db,) * n
    d = int(np.prod(dims))
    if d > min(MAX_TOTAL_DIM, _SEARCH_DIM_CAP) or n > _SEARCH_N_CAP:
        raise ValueError("dimension limit")

    perms = _twirl_ops(dims)
    pinv = _marginal_projector(dims)
    tvec = np.tile(target.matrix.reshape(-1), n)
    rho_b = partial_trace(target, [1]).matrix

    best_dev = np.inf
    best_state = None
    rounds_total = 0
    starts = 0
    for j in range(budget.restarts):
        starts = j + 1
        if j == 0:
            x = target.matrix.copy()
            for _ in range(n - 1):
                x = np.kron(x, rho_b)
        else:
            rng = np.random.default_rng([budget.seed, _SALT_SEARCH, j])
            g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
            x = g @ g.conj().T
            x /= x.trace().real
        prev = None
        for _ in range(MAX_ROUNDS):
            rounds_total += 1
            x = _psd_unit(_twirl(x, dims, perms))
            dev = float(np.max(np.abs(_marginals_vec(x, dims) - tvec)))
            if dev < best_dev:
                best_dev = dev
                best_state = x.copy()
            if dev <= FOUND_TOL:
                state = DensityMatrix(x, dims)
                check = validate(state, target, tol=FOUND_TOL)
                if check.valid:
                    return SearchResult(True, state, check.deviation, rounds_total, starts)
            resid = tvec - _marginals_vec(x, dims)
            c = pinv @ resid
            m = da * db
            for k in range(1, n + 1):
                y = c[(k - 1) * m * m : k * m * m].reshape(m, m)
                y = 0.5 * (y + y.conj().T)
                x = x + _embed(y, dims, k)
            x = 0.5 * (x + x.conj().T)
            if prev is not None and float(np.max(np.abs(x - prev))) < STALL_TOL:
                break
            prev = x.copy()

    return SearchResult(False, None, best_dev, rounds_total, starts)
