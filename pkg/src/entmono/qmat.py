"""Dense complex linear algebra for multipartite quantum states.

Subsystem ordering is fixed: the first entry of ``dims`` is the A party,
followed by the B parties left to right.  Composite indices are row-major
over that ordering, so for dims (dA, dB) the basis state |a, b> sits at
flat index a * dB + b.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MAX_TOTAL_DIM = 4096

TOL_HERM = 1e-10
TOL_TRACE = 1e-9
TOL_PSD = 1e-9
TOL_NORM = 1e-12
EIG_CUTOFF = 1e-12


class StateInvariantError(ValueError):
    """A constructed object violates one of its declared invariants."""


def _as_complex(a):
    m = np.array(a, dtype=complex, order="C")
    if not np.all(np.isfinite(m.view(float))):
        raise StateInvariantError("entries must be finite")
    return m


def _check_dims(dims, total, *, min_dim=2):
    dims = tuple(int(d) for d in dims)
    if len(dims) == 0:
        raise StateInvariantError("dims must be non-empty")
    if any(d < min_dim for d in dims):
        raise StateInvariantError(f"subsystem dimensions must be >= {min_dim}")
    prod = 1
    for d in dims:
        prod *= d
    if prod != total:
        raise StateInvariantError(
            f"dims product {prod} does not match size {total}"
        )
    return dims


def _min_eig_floor(m):
    d = m.shape[0]
    if d >= 256:
        # Cholesky probe: rho + tol*I is positive definite iff the smallest
        # eigenvalue exceeds -tol
        try:
            np.linalg.cholesky(m + 2.0 * TOL_PSD * np.eye(d))
            return 0.0
        except np.linalg.LinAlgError:
            return -np.inf
    return float(np.linalg.eigvalsh(m)[0])


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Positive unit-trace Hermitian operator with a subsystem signature."""

    matrix: np.ndarray
    dims: tuple

    def __init__(self, matrix, dims):
        m = _as_complex(matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise StateInvariantError("density matrix must be square")
        dims = _check_dims(dims, m.shape[0])
        if np.max(np.abs(m - m.conj().T)) > TOL_HERM:
            raise StateInvariantError("not Hermitian")
        tr = m.trace().real
        if abs(tr - 1.0) > TOL_TRACE:
            raise StateInvariantError(f"trace {tr} is not 1")
        if _min_eig_floor(m) < -TOL_PSD:
            raise StateInvariantError("not positive semidefinite")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "dims", dims)

    @property
    def dim(self):
        return self.matrix.shape[0]

    def eigenvalues(self):
        return np.linalg.eigvalsh(self.matrix)[::-1]


@dataclass(frozen=True, eq=False)
class PureState:
    """Normalized complex vector with a subsystem signature.

    Unlike DensityMatrix, purifier legs of dimension 1 are allowed.
    """

    amplitudes: np.ndarray
    dims: tuple

    def __init__(self, amplitudes, dims):
        v = _as_complex(amplitudes).reshape(-1)
        dims = _check_dims(dims, v.size, min_dim=1)
        nrm = float(np.linalg.norm(v))
        if abs(nrm - 1.0) > TOL_NORM:
            raise StateInvariantError(f"norm {nrm} is not 1")
        v.setflags(write=False)
        object.__setattr__(self, "amplitudes", v)
        object.__setattr__(self, "dims", dims)

    @property
    def dim(self):
        return self.amplitudes.size

    def density(self):
        """|psi><psi| as a DensityMatrix (dimension-1 legs are dropped)."""
        dims = tuple(d for d in self.dims if d > 1) or (self.dim,)
        return DensityMatrix(np.outer(self.amplitudes, self.amplitudes.conj()), dims)


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Eigenvalues in descending order plus the matching unitary columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def tensor(a, b, *, max_dim=None):
    """Kronecker product with block-row ordering; dims concatenate."""
    cap = MAX_TOTAL_DIM if max_dim is None else max_dim
    if isinstance(a, DensityMatrix) and isinstance(b, DensityMatrix):
        if a.dim * b.dim > cap:
            raise ValueError("dimension limit")
        return DensityMatrix(np.kron(a.matrix, b.matrix), a.dims + b.dims)
    if isinstance(a, PureState) and isinstance(b, PureState):
        if a.dim * b.dim > cap:
            raise ValueError("dimension limit")
        return PureState(np.kron(a.amplitudes, b.amplitudes), a.dims + b.dims)
    am = np.asarray(a, dtype=complex)
    bm = np.asarray(b, dtype=complex)
    if am.ndim == 2 and am.shape[0] * bm.shape[0] > cap:
        raise ValueError("dimension limit")
    return np.kron(am, bm)


def partial_trace(rho: DensityMatrix, keep) -> DensityMatrix:
    """Reduce to the subsystems in ``keep`` (kept in original order)."""
    keep = sorted(set(int(i) for i in keep))
    n = len(rho.dims)
    if not keep:
        raise ValueError("must keep at least one subsystem")
    if keep[0] < 0 or keep[-1] >= n:
        raise ValueError("no such subsystem")
    if len(keep) == n:
        return rho
    traced = [i for i in range(n) if i not in keep]
    dims = rho.dims
    dk = int(np.prod([dims[i] for i in keep]))
    dt = int(np.prod([dims[i] for i in traced]))
    perm = keep + traced
    t = rho.matrix.reshape(dims + dims)
    t = t.transpose(perm + [n + i for i in perm])
    t = t.reshape(dk, dt, dk, dt)
    red = t.trace(axis1=1, axis2=3)
    return DensityMatrix(red, tuple(dims[i] for i in keep))


def permute_subsystems(state, order):
    """Reorder subsystems; ``order`` lists old indices in their new positions."""
    order = [int(i) for i in order]
    n = len(state.dims)
    if sorted(order) != list(range(n)):
        raise ValueError("order must be a permutation of subsystem indices")
    dims = state.dims
    new_dims = tuple(dims[i] for i in order)
    if isinstance(state, PureState):
        v = state.amplitudes.reshape(dims).transpose(order).reshape(-1)
        return PureState(v, new_dims)
    m = state.matrix.reshape(dims + dims)
    m = m.transpose(order + [n + i for i in order])
    d = state.dim
    return DensityMatrix(m.reshape(d, d), new_dims)


def purify(rho: DensityMatrix) -> PureState:
    """Pure state on dims + (rank,) whose purifier trace-out returns rho.

    Eigenvalues below 1e-12 are treated as zero, so a pure input gets a
    trivial dimension-1 purifier.
    """
    w, v = np.linalg.eigh(rho.matrix)
    w = w[::-1]
    v = v[:, ::-1]
    r = int(np.sum(w > EIG_CUTOFF))
    if r == 0:
        r = 1
    amp = (v[:, :r] * np.sqrt(np.clip(w[:r], 0.0, None))).reshape(-1)
    amp = amp / np.linalg.norm(amp)
    return PureState(amp, rho.dims + (r,))


def amplitude_matrix(rho: DensityMatrix) -> np.ndarray:
    """(d x rank) matrix M with rho = M M+; columns sorted by eigenvalue."""
    w, v = np.linalg.eigh(rho.matrix)
    w = w[::-1]
    v = v[:, ::-1]
    r = max(1, int(np.sum(w > EIG_CUTOFF)))
    return v[:, :r] * np.sqrt(np.clip(w[:r], 0.0, None))


def eigh(m) -> Spectrum:
    """Deterministic Hermitian eigendecomposition, eigenvalues descending."""
    a = m.matrix if isinstance(m, DensityMatrix) else np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("matrix must be square")
    if np.max(np.abs(a - a.conj().T)) > TOL_HERM:
        raise ValueError("not Hermitian")
    w, v = np.linalg.eigh(a)
    return Spectrum(np.ascontiguousarray(w[::-1]), np.ascontiguousarray(v[:, ::-1]))


def random_state(dims, measure="hilbert-schmidt", seed=0, rank=None) -> DensityMatrix:
    """Seeded random density matrix.

    measure:
      * "haar-pure":       rank-1 projector onto a Haar-random vector,
      * "hilbert-schmidt": G G+ / tr with G square complex Gaussian,
      * "rank-limited":    as above with G rectangular (``rank`` columns).
    """
    dims = tuple(int(d) for d in dims)
    d = int(np.prod(dims))
    rng = np.random.default_rng(seed)
    if measure == "haar-pure":
        z = rng.normal(size=d) + 1j * rng.normal(size=d)
        z /= np.linalg.norm(z)
        return DensityMatrix(np.outer(z, z.conj()), dims)
    if measure == "hilbert-schmidt":
        r = d
    elif measure == "rank-limited":
        if rank is None:
            raise ValueError("rank-limited measure requires rank")
        r = int(rank)
        if r > d:
            raise ValueError("rank exceeds dimension")
        if r < 1:
            raise ValueError("rank must be positive")
    else:
        raise ValueError(f"unknown measure: {measure}")
    g = rng.normal(size=(d, r)) + 1j * rng.normal(size=(d, r))
    m = g @ g.conj().T
    return DensityMatrix(m / m.trace().real, dims)


def random_pure_state(dims, seed=0) -> PureState:
    """Seeded Haar-random pure state."""
    dims = tuple(int(d) for d in dims)
    d = int(np.prod(dims))
    rng = np.random.default_rng(seed)
    z = rng.normal(size=d) + 1j * rng.normal(size=d)
    return PureState(z / np.linalg.norm(z), dims)
