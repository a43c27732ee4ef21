"""Kernel backend selection.

The compiled Cython backend is preferred when it imports and the problem
fits its fixed-size work buffers; otherwise calls fall through to the
pure-numpy implementation.  Set ENTMONO_BACKEND=python to force the
fallback (useful for benchmarking and debugging).
"""

from __future__ import annotations

import os

from . import _impl_py

_cy = None
if os.environ.get("ENTMONO_BACKEND", "").lower() not in ("python", "py"):
    try:
        from . import _impl_cy as _cy  # type: ignore[no-redef]
    except ImportError:
        _cy = None

# fixed buffer limits of the compiled kernels
_CY_DMAX = 24   # max side of any matrix eigendecomposed inside the kernels
_CY_KMAX = 64   # max POVM outcome count

entropy_from_evals = _impl_py.entropy_from_evals
binary_entropy = _impl_py.binary_entropy
expi_h = _impl_py.expi_h
qr_isometry = _impl_py.qr_isometry
spec2_povm = _impl_py.spec2_povm
mix_seed = _impl_py.mix_seed
lcg_uniform = _impl_py.lcg_uniform


def backend_name():
    return "cython" if _cy is not None else "python"


def has_compiled():
    return _cy is not None


def state_entropy(rho):
    if _cy is not None and rho.shape[0] <= _CY_DMAX:
        return _cy.state_entropy(rho)
    return _impl_py.state_entropy(rho)


def concurrence4(rho):
    if _cy is not None:
        return _cy.concurrence4(rho)
    return _impl_py.concurrence4(rho)


def eof4(rho):
    if _cy is not None:
        return _cy.eof4(rho)
    return _impl_py.eof4(rho)


def cc_objective(rho, d_a, d_c, n_out, theta):
    if _cy is not None and d_a <= _CY_DMAX and n_out <= _CY_KMAX:
        return _cy.cc_objective(rho, d_a, d_c, n_out, theta)
    return _impl_py.cc_objective(rho, d_a, d_c, n_out, theta)


def cc_optimize(rho, d_a, d_c, n_out, x0, max_iter, ftol, step):
    if _cy is not None and d_a <= _CY_DMAX and n_out <= _CY_KMAX:
        return _cy.cc_optimize(rho, d_a, d_c, n_out, x0, max_iter, ftol, step)
    return _impl_py.cc_optimize(rho, d_a, d_c, n_out, x0, max_iter, ftol, step)


def roof_pure_objective(amp, d1, d2, n_out, theta):
    if _cy is not None and d1 <= _CY_DMAX and n_out <= _CY_KMAX:
        return _cy.roof_pure_objective(amp, d1, d2, n_out, theta)
    return _impl_py.roof_pure_objective(amp, d1, d2, n_out, theta)


def roof_pure_optimize(amp, d1, d2, n_out, x0, max_iter, ftol, step):
    if _cy is not None and d1 <= _CY_DMAX and n_out <= _CY_KMAX:
        return _cy.roof_pure_optimize(amp, d1, d2, n_out, x0, max_iter, ftol, step)
    return _impl_py.roof_pure_optimize(amp, d1, d2, n_out, x0, max_iter, ftol, step)


def g_mixed_objective(amp, d1, d2, theta, inner_restarts, inner_iters, inner_ftol, seed):
    d = amp.shape[0]
    if _cy is not None and d <= _CY_DMAX and (d // d1) ** 2 <= _CY_KMAX:
        return _cy.g_mixed_objective(
            amp, d1, d2, theta, inner_restarts, inner_iters, inner_ftol, seed
        )
    return _impl_py.g_mixed_objective(
        amp, d1, d2, theta, inner_restarts, inner_iters, inner_ftol, seed
    )


def g_mixed_optimize(amp, d1, d2, x0, max_iter, ftol, step,
                     inner_restarts, inner_iters, inner_ftol, seed):
    d = amp.shape[0]
    if _cy is not None and d <= _CY_DMAX and (d // d1) ** 2 <= _CY_KMAX:
        return _cy.g_mixed_optimize(
            amp, d1, d2, x0, max_iter, ftol, step,
            inner_restarts, inner_iters, inner_ftol, seed,
        )
    return _impl_py.g_mixed_optimize(
        amp, d1, d2, x0, max_iter, ftol, step,
        inner_restarts, inner_iters, inner_ftol, seed,
    )
