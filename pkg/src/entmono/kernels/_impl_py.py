"""Pure-numpy compute kernels.

Fallback backend used when the compiled extension is unavailable (or
disabled via ENTMONO_BACKEND=python).  Every public function here has a
drop-in twin in ``_impl_cy``; the two must agree numerically, which the
kernel parity tests enforce.

Conventions shared by both backends:

* rank-1 POVMs with ``k`` outcomes on a ``d``-level system are encoded as
  the first ``d`` columns of a ``k x k`` unitary ``U = exp(iH)``; the
  Hermitian generator ``H`` is packed into ``k*k`` reals (diagonal first,
  then re/im of the upper triangle row by row),
* rank-1 purifier POVMs for ensemble searches are encoded as a ``k x r``
  complex matrix (``2*k*r`` reals) orthonormalized column by column,
* two-outcome POVMs of unrestricted rank are encoded as ``r*r + r`` reals:
  a unitary eigenbasis plus per-direction logits.

All objectives are exact functions of their parameter vector, so every
optimizer run is reproducible.
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"

PROB_FLOOR = 1e-12
EVAL_CLIP = 1e-12
RANK_TOL = 1e-9

_LCG_MULT = 6364136223846793005
_LCG_INC = 1442695040888963407
_MASK = (1 << 64) - 1


# ---------------------------------------------------------------------------
# scalar helpers
# ---------------------------------------------------------------------------

def entropy_from_evals(w):
    """Shannon entropy (bits) of a spectrum; values below 1e-12 are dropped."""
    w = np.asarray(w, dtype=float)
    w = w[w > EVAL_CLIP]
    if w.size == 0:
        return 0.0
    return float(-np.sum(w * np.log2(w)))


def binary_entropy(x):
    if x <= 0.0 or x >= 1.0:
        return 0.0
    return float(-x * np.log2(x) - (1.0 - x) * np.log2(1.0 - x))


def _entropy_2x2(m):
    # closed-form eigenvalues of a Hermitian 2x2 block
    a = m[0, 0].real
    d = m[1, 1].real
    off = abs(m[0, 1])
    h = 0.5 * np.hypot(a - d, 2.0 * off)
    mid = 0.5 * (a + d)
    return entropy_from_evals(np.array([mid + h, mid - h]))


def state_entropy(rho):
    """Von Neumann entropy (bits) of a density matrix given as ndarray."""
    rho = np.asarray(rho)
    if rho.shape[0] == 2:
        return _entropy_2x2(rho)
    return entropy_from_evals(np.linalg.eigvalsh(rho))


def concurrence4(rho):
    """Concurrence of a two-qubit density matrix (4x4 ndarray)."""
    rho = np.asarray(rho, dtype=complex)
    s = np.array([-1.0, 1.0, 1.0, -1.0])
    rt = (s[:, None] * s[None, :]) * rho.conj()[::-1, ::-1]
    w, v = np.linalg.eigh(rho)
    w = np.clip(w, 0.0, None)
    rs = (v * np.sqrt(w)) @ v.conj().T
    h = rs @ rt @ rs
    mu = np.clip(np.linalg.eigvalsh(h), 0.0, None)
    lam = np.sqrt(mu)[::-1]
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


def eof4(rho):
    """Entanglement of formation (bits) of a two-qubit density matrix."""
    c = concurrence4(rho)
    t = 1.0 - c * c
    if t < 0.0:
        t = 0.0
    return binary_entropy(0.5 * (1.0 + np.sqrt(t)))


# ---------------------------------------------------------------------------
# parametrizations
# ---------------------------------------------------------------------------

def expi_h(theta, m):
    """Unitary exp(iH) from m*m packed real parameters of Hermitian H."""
    theta = np.asarray(theta, dtype=float)
    h = np.zeros((m, m), dtype=complex)
    h[np.diag_indices(m)] = theta[:m]
    t = m
    for i in range(m):
        for j in range(i + 1, m):
            h[i, j] = theta[t] + 1j * theta[t + 1]
            h[j, i] = theta[t] - 1j * theta[t + 1]
            t += 2
    w, v = np.linalg.eigh(h)
    return (v * np.exp(1j * w)) @ v.conj().T


def qr_isometry(theta, k, r):
    """k x r matrix with orthonormal columns from 2*k*r real parameters.

    Modified Gram-Schmidt with a deterministic basis-vector fallback for
    (near-)dependent columns, so the map is total.
    """
    theta = np.asarray(theta, dtype=float)
    a = (theta[0::2] + 1j * theta[1::2]).reshape(k, r).copy()
    fallback = 0
    for j in range(r):
        col = a[:, j]
        for i in range(j):
            col -= a[:, i] * (a[:, i].conj() @ col)
        nrm = np.linalg.norm(col)
        while nrm < 1e-10:
            col = np.zeros(k, dtype=complex)
            col[(j + fallback) % k] = 1.0
            fallback += 1
            for i in range(j):
                col -= a[:, i] * (a[:, i].conj() @ col)
            nrm = np.linalg.norm(col)
        a[:, j] = col / nrm
    return a


def spec2_povm(theta, r):
    """Two-outcome POVM {E, I-E} on dim r from r*r + r real parameters."""
    theta = np.asarray(theta, dtype=float)
    u = expi_h(theta[: r * r], r)
    s = 1.0 / (1.0 + np.exp(-theta[r * r : r * r + r]))
    e1 = (u * s) @ u.conj().T
    e1 = 0.5 * (e1 + e1.conj().T)
    return e1, np.eye(r) - e1


# ---------------------------------------------------------------------------
# deterministic restart streams (shared integer recipe with the C backend)
# ---------------------------------------------------------------------------

def mix_seed(seed, outcome, restart):
    return (
        seed * 0x9E3779B97F4A7C15
        + outcome * 0xBF58476D1CE4E5B9
        + restart * 0x94D049BB133111EB
    ) & _MASK


def lcg_uniform(state, n):
    """n doubles in [-pi, pi) from a 64-bit LCG; returns (array, new_state)."""
    out = np.empty(n, dtype=float)
    state &= _MASK
    state = (state * _LCG_MULT + _LCG_INC) & _MASK
    for i in range(n):
        state = (state * _LCG_MULT + _LCG_INC) & _MASK
        out[i] = ((state >> 11) / float(1 << 53)) * (2.0 * np.pi) - np.pi
    return out, state


# ---------------------------------------------------------------------------
# Nelder-Mead
# ---------------------------------------------------------------------------

def nelder_mead(f, x0, step, max_iter, ftol):
    """Minimize f over R^n from x0; returns (fbest, xbest, nfev).

    Classic simplex moves (reflect 1, expand 2, contract 0.5, shrink 0.5);
    stops when the simplex value spread drops below ftol.  Fully
    deterministic for a given (f, x0).
    """
    x0 = np.asarray(x0, dtype=float)
    n = x0.size
    pts = np.tile(x0, (n + 1, 1))
    for i in range(n):
        pts[i + 1, i] += step
    vals = np.array([f(p) for p in pts])
    nfev = n + 1

    for _ in range(max_iter):
        order = np.argsort(vals, kind="stable")
        pts = pts[order]
        vals = vals[order]
        if vals[-1] - vals[0] <= ftol:
            break
        cen = pts[:-1].mean(axis=0)
        xr = cen + (cen - pts[-1])
        fr = f(xr)
        nfev += 1
        if fr < vals[0]:
            xe = cen + 2.0 * (cen - pts[-1])
            fe = f(xe)
            nfev += 1
            if fe < fr:
                pts[-1], vals[-1] = xe, fe
            else:
                pts[-1], vals[-1] = xr, fr
        elif fr < vals[-2]:
            pts[-1], vals[-1] = xr, fr
        else:
            if fr < vals[-1]:
                xc = cen + 0.5 * (xr - cen)
            else:
                xc = cen + 0.5 * (pts[-1] - cen)
            fc = f(xc)
            nfev += 1
            if fc < min(fr, vals[-1]):
                pts[-1], vals[-1] = xc, fc
            else:
                for i in range(1, n + 1):
                    pts[i] = pts[0] + 0.5 * (pts[i] - pts[0])
                    vals[i] = f(pts[i])
                nfev += n

    best = int(np.argmin(vals))
    return float(vals[best]), pts[best].copy(), nfev


# ---------------------------------------------------------------------------
# measurement-conditioned entropy (classical correlation inner objective)
# ---------------------------------------------------------------------------

def cc_objective(rho, d_a, d_c, n_out, theta):
    """Average post-measurement entropy of the kept side.

    rho lives on kept (dim d_a) x measured (dim d_c); the POVM has n_out
    rank-1 outcomes.  Outcomes with probability below 1e-12 contribute 0.
    """
    rho = np.asarray(rho, dtype=complex)
    u = expi_h(theta, n_out)
    w = u[:, :d_c]
    r4 = rho.reshape(d_a, d_c, d_a, d_c)
    conds = np.einsum("ic,acbd,id->iab", w, r4, w.conj(), optimize=True)
    total = 0.0
    for i in range(n_out):
        p = conds[i].trace().real
        if p < PROB_FLOOR:
            continue
        total += p * state_entropy(conds[i] / p)
    return total


def cc_optimize(rho, d_a, d_c, n_out, x0, max_iter, ftol, step):
    rho = np.asarray(rho, dtype=complex)

    def f(theta):
        return cc_objective(rho, d_a, d_c, n_out, theta)

    return nelder_mead(f, x0, step, max_iter, ftol)


# ---------------------------------------------------------------------------
# pure-ensemble roof objective (EoF estimate / pure-member correlation roof)
# ---------------------------------------------------------------------------

def roof_pure_objective(amp, d1, d2, n_out, theta):
    """Average reduced entropy over a steered pure ensemble.

    amp is the (d1*d2) x r amplitude matrix of a purification (rho = amp
    amp+); a rank-1 POVM with n_out outcomes on the purifier steers the
    pure ensemble; each member contributes its entanglement entropy across
    the d1|d2 split, weighted by its probability.
    """
    amp = np.asarray(amp, dtype=complex)
    r = amp.shape[1]
    w = qr_isometry(theta, n_out, r)
    members = amp @ w.T
    total = 0.0
    for i in range(n_out):
        u = members[:, i]
        p = float(np.vdot(u, u).real)
        if p < PROB_FLOOR:
            continue
        x = u.reshape(d1, d2)
        g = (x @ x.conj().T) / p
        total += p * state_entropy(g)
    return total


def roof_pure_optimize(amp, d1, d2, n_out, x0, max_iter, ftol, step):
    amp = np.asarray(amp, dtype=complex)

    def f(theta):
        return roof_pure_objective(amp, d1, d2, n_out, theta)

    return nelder_mead(f, x0, step, max_iter, ftol)


# ---------------------------------------------------------------------------
# mixed-ensemble roof objective (two-outcome steering of any rank)
# ---------------------------------------------------------------------------

def _cc_closed_rank2(sigma, d2, evals, evecs, s_member):
    # exact one-way classical correlation for a qubit|d2 state of rank <= 2,
    # via the purification identity S(A) = EoF(A:P) + C(A:C) with a qubit
    # purifier P and the two-qubit concurrence formula on rho_AP
    w = np.clip(evals[-2:][::-1], 0.0, None)
    n = evecs[:, -2:][:, ::-1] * np.sqrt(w)
    n4 = n.reshape(2, d2, 2)
    rho_ap = np.einsum("acp,bcq->apbq", n4, n4.conj()).reshape(4, 4)
    val = s_member - eof4(rho_ap)
    return float(min(max(val, 0.0), s_member))


def _cc_nested(sigma, d1, d2, s_member, inner_restarts, inner_iters, inner_ftol, seed, outcome):
    k = d2 * d2
    npar = k * k
    best = np.inf
    for j in range(inner_restarts):
        if j == 0:
            x0 = np.zeros(npar)
        else:
            x0, _ = lcg_uniform(mix_seed(seed, outcome, j), npar)
        fv, _, _ = cc_optimize(sigma, d1, d2, k, x0, inner_iters, inner_ftol, 0.5)
        if fv < best:
            best = fv
    val = s_member - best
    return float(min(max(val, 0.0), s_member))


def g_mixed_objective(amp, d1, d2, theta, inner_restarts, inner_iters, inner_ftol, seed):
    """Average one-way classical correlation of a steered two-member ensemble.

    Members of rank <= 2 on a qubit|d2 split are scored exactly through the
    purification identity; higher-rank members fall back to a nested
    measurement optimization with deterministic restart seeds.
    """
    amp = np.asarray(amp, dtype=complex)
    r = amp.shape[1]
    e1, e2 = spec2_povm(theta, r)
    total = 0.0
    for outcome, e in enumerate((e1, e2)):
        sigma = amp @ e.T @ amp.conj().T
        p = sigma.trace().real
        if p < PROB_FLOOR:
            continue
        sigma = sigma / p
        sigma = 0.5 * (sigma + sigma.conj().T)
        s_a = sigma.reshape(d1, d2, d1, d2).trace(axis1=1, axis2=3)
        s_member = state_entropy(s_a)
        evals, evecs = np.linalg.eigh(sigma)
        rank = int(np.sum(evals > RANK_TOL))
        if d1 == 2 and rank <= 2:
            ccv = _cc_closed_rank2(sigma, d2, evals, evecs, s_member)
        else:
            ccv = _cc_nested(
                sigma, d1, d2, s_member,
                inner_restarts, inner_iters, inner_ftol, seed, outcome,
            )
        total += p * ccv
    return total


def g_mixed_optimize(amp, d1, d2, x0, max_iter, ftol, step,
                     inner_restarts, inner_iters, inner_ftol, seed):
    amp = np.asarray(amp, dtype=complex)

    def f(theta):
        return g_mixed_objective(
            amp, d1, d2, theta, inner_restarts, inner_iters, inner_ftol, seed
        )

    return nelder_mead(f, x0, step, max_iter, ftol)
