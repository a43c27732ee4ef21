# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
# cython: initializedcheck=False
"""Compiled compute kernels.

Mirrors _impl_py function by function; see that module for the parameter
packing conventions.  Hermitian eigenproblems use a fixed cyclic Jacobi
sweep, so results are deterministic for a given input.
"""

from libc.stdlib cimport malloc, free
from libc.string cimport memcpy, memset
from libc.math cimport log2, sqrt, fabs, exp, cos, sin, atan2, M_PI

import numpy as np

ctypedef double complex cplx

BACKEND = "cython"

cdef double PROB_FLOOR = 1e-12
cdef double EVAL_CLIP = 1e-12
cdef double RANK_TOL = 1e-9

cdef unsigned long long LCG_MULT = 6364136223846793005ULL
cdef unsigned long long LCG_INC = 1442695040888963407ULL


# ---------------------------------------------------------------------------
# Hermitian eigensolver: cyclic Jacobi with deterministic sweep order
# ---------------------------------------------------------------------------

cdef void c_eigh(cplx* a, int n, double* w, cplx* v, bint vectors) noexcept:
    cdef int p, q, k, i, j, sweep, best
    cdef double off, norm, apqa, app, aqq, tau, t, c, tmp
    cdef cplx apq, s, colp, colq, phase, cswap

    if vectors:
        memset(v, 0, n * n * sizeof(cplx))
        for i in range(n):
            v[i * n + i] = 1.0

    norm = 0.0
    for i in range(n):
        for j in range(n):
            norm += (a[i * n + j].real * a[i * n + j].real
                     + a[i * n + j].imag * a[i * n + j].imag)
    norm = sqrt(norm)
    if norm == 0.0:
        norm = 1.0

    for sweep in range(60):
        off = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                off += (a[p * n + q].real * a[p * n + q].real
                        + a[p * n + q].imag * a[p * n + q].imag)
        if sqrt(off) <= 1e-14 * norm:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p * n + q]
                apqa = sqrt(apq.real * apq.real + apq.imag * apq.imag)
                if apqa <= 1e-18 * norm:
                    continue
                phase = apq / apqa
                app = a[p * n + p].real
                aqq = a[q * n + q].real
                tau = (aqq - app) / (2.0 * apqa)
                if tau >= 0.0:
                    t = 1.0 / (tau + sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + sqrt(1.0 + tau * tau))
                c = 1.0 / sqrt(1.0 + t * t)
                s = (t * c) * phase
                # A <- R+ A R in two passes: columns then rows
                for k in range(n):
                    colp = a[k * n + p]
                    colq = a[k * n + q]
                    a[k * n + p] = c * colp - s.conjugate() * colq
                    a[k * n + q] = s * colp + c * colq
                for k in range(n):
                    colp = a[p * n + k]
                    colq = a[q * n + k]
                    a[p * n + k] = c * colp - s * colq
                    a[q * n + k] = s.conjugate() * colp + c * colq
                a[p * n + p] = a[p * n + p].real
                a[q * n + q] = a[q * n + q].real
                a[p * n + q] = 0.0
                a[q * n + p] = 0.0
                if vectors:
                    for k in range(n):
                        colp = v[k * n + p]
                        colq = v[k * n + q]
                        v[k * n + p] = c * colp - s.conjugate() * colq
                        v[k * n + q] = s * colp + c * colq

    for i in range(n):
        w[i] = a[i * n + i].real

    # descending selection sort (deterministic, ties keep earlier index)
    for i in range(n - 1):
        best = i
        for j in range(i + 1, n):
            if w[j] > w[best]:
                best = j
        if best != i:
            tmp = w[i]; w[i] = w[best]; w[best] = tmp
            if vectors:
                for k in range(n):
                    cswap = v[k * n + i]
                    v[k * n + i] = v[k * n + best]
                    v[k * n + best] = cswap


cdef double c_entropy_w(double* w, int n) noexcept:
    cdef double total = 0.0
    cdef int i
    for i in range(n):
        if w[i] > EVAL_CLIP:
            total -= w[i] * log2(w[i])
    return total


cdef double c_entropy_2x2(cplx* m) noexcept:
    cdef double a = m[0].real
    cdef double d = m[3].real
    cdef double offr = m[1].real
    cdef double offi = m[1].imag
    cdef double off = sqrt(offr * offr + offi * offi)
    cdef double diff = a - d
    cdef double h = 0.5 * sqrt(diff * diff + 4.0 * off * off)
    cdef double mid = 0.5 * (a + d)
    cdef double w[2]
    w[0] = mid + h
    w[1] = mid - h
    return c_entropy_w(w, 2)


cdef double c_state_entropy_buf(cplx* m, int n, cplx* scratch, double* w) noexcept:
    if n == 2:
        return c_entropy_2x2(m)
    memcpy(scratch, m, n * n * sizeof(cplx))
    c_eigh(scratch, n, w, NULL, 0)
    return c_entropy_w(w, n)


# ---------------------------------------------------------------------------
# two-qubit closed forms
# ---------------------------------------------------------------------------

cdef double c_binary_entropy(double x) noexcept:
    if x <= 0.0 or x >= 1.0:
        return 0.0
    return -x * log2(x) - (1.0 - x) * log2(1.0 - x)


cdef double c_conc4(cplx* rho) noexcept:
    cdef cplx rt[16]
    cdef cplx work[16]
    cdef cplx rs[16]
    cdef cplx h[16]
    cdef cplx acc
    cdef double w[4]
    cdef double sgn[4]
    cdef double lam[4]
    cdef int i, j, k
    sgn[0] = -1.0; sgn[1] = 1.0; sgn[2] = 1.0; sgn[3] = -1.0
    for i in range(4):
        for j in range(4):
            rt[i * 4 + j] = sgn[i] * sgn[j] * rho[(3 - i) * 4 + (3 - j)].conjugate()
    memcpy(work, rho, 16 * sizeof(cplx))
    c_eigh(work, 4, w, h, 1)   # h holds eigenvectors here
    for i in range(4):
        if w[i] < 0.0:
            w[i] = 0.0
        w[i] = sqrt(w[i])
    # rs = V sqrt(w) V+
    for i in range(4):
        for j in range(4):
            acc = 0.0
            for k in range(4):
                acc += h[i * 4 + k] * w[k] * h[j * 4 + k].conjugate()
            rs[i * 4 + j] = acc
    # work = rs @ rt, h = work @ rs
    for i in range(4):
        for j in range(4):
            acc = 0.0
            for k in range(4):
                acc += rs[i * 4 + k] * rt[k * 4 + j]
            work[i * 4 + j] = acc
    for i in range(4):
        for j in range(4):
            acc = 0.0
            for k in range(4):
                acc += work[i * 4 + k] * rs[k * 4 + j]
            h[i * 4 + j] = acc
    c_eigh(h, 4, w, NULL, 0)
    for i in range(4):
        lam[i] = sqrt(w[i]) if w[i] > 0.0 else 0.0
    cdef double c = lam[0] - lam[1] - lam[2] - lam[3]
    return c if c > 0.0 else 0.0


cdef double c_eof4(cplx* rho) noexcept:
    cdef double c = c_conc4(rho)
    cdef double t = 1.0 - c * c
    if t < 0.0:
        t = 0.0
    return c_binary_entropy(0.5 * (1.0 + sqrt(t)))


# ---------------------------------------------------------------------------
# parametrizations
# ---------------------------------------------------------------------------

cdef void c_expi_h(double* theta, int m, cplx* u, cplx* h, double* w) noexcept:
    # h: m*m scratch (eigenvectors after c_eigh); u: output m*m
    cdef int i, j, k, t
    cdef cplx acc
    cdef cplx phases[64]
    memset(u, 0, m * m * sizeof(cplx))
    for i in range(m):
        u[i * m + i] = theta[i]
    t = m
    for i in range(m):
        for j in range(i + 1, m):
            u[i * m + j] = theta[t] + 1j * theta[t + 1]
            u[j * m + i] = theta[t] - 1j * theta[t + 1]
            t += 2
    c_eigh(u, m, w, h, 1)
    for k in range(m):
        phases[k] = cos(w[k]) + 1j * sin(w[k])
    for i in range(m):
        for j in range(m):
            acc = 0.0
            for k in range(m):
                acc += h[i * m + k] * phases[k] * h[j * m + k].conjugate()
            u[i * m + j] = acc


cdef void c_mgs(cplx* a, int k, int r) noexcept:
    # orthonormalize r columns of a (k x r row-major), deterministic fallback
    cdef int i, j, t, fallback = 0
    cdef double nrm
    cdef cplx dot
    for j in range(r):
        for i in range(j):
            dot = 0.0
            for t in range(k):
                dot += a[t * r + i].conjugate() * a[t * r + j]
            for t in range(k):
                a[t * r + j] = a[t * r + j] - a[t * r + i] * dot
        nrm = 0.0
        for t in range(k):
            nrm += (a[t * r + j].real * a[t * r + j].real
                    + a[t * r + j].imag * a[t * r + j].imag)
        nrm = sqrt(nrm)
        while nrm < 1e-10:
            for t in range(k):
                a[t * r + j] = 0.0
            a[((j + fallback) % k) * r + j] = 1.0
            fallback += 1
            for i in range(j):
                dot = 0.0
                for t in range(k):
                    dot += a[t * r + i].conjugate() * a[t * r + j]
                for t in range(k):
                    a[t * r + j] = a[t * r + j] - a[t * r + i] * dot
            nrm = 0.0
            for t in range(k):
                nrm += (a[t * r + j].real * a[t * r + j].real
                        + a[t * r + j].imag * a[t * r + j].imag)
            nrm = sqrt(nrm)
        for t in range(k):
            a[t * r + j] = a[t * r + j] / nrm


# ---------------------------------------------------------------------------
# deterministic restart streams
# ---------------------------------------------------------------------------

cdef unsigned long long c_mix_seed(unsigned long long seed,
                                   unsigned long long outcome,
                                   unsigned long long restart) noexcept:
    return (seed * 0x9E3779B97F4A7C15ULL
            + outcome * 0xBF58476D1CE4E5B9ULL
            + restart * 0x94D049BB133111EBULL)


cdef void c_lcg_uniform(unsigned long long state, double* out, int n) noexcept:
    cdef int i
    state = state * LCG_MULT + LCG_INC
    for i in range(n):
        state = state * LCG_MULT + LCG_INC
        out[i] = ((state >> 11) / 9007199254740992.0) * (2.0 * M_PI) - M_PI


# ---------------------------------------------------------------------------
# Nelder-Mead
# ---------------------------------------------------------------------------

ctypedef double (*objfn)(void* ctx, double* x) noexcept

cdef double c_nelder_mead(objfn f, void* ctx, int n, double* x0, double step,
                          int max_iter, double ftol, double* xbest) noexcept:
    cdef double* pts = <double*> malloc((n + 1) * n * sizeof(double))
    cdef double* vals = <double*> malloc((n + 1) * sizeof(double))
    cdef int* order = <int*> malloc((n + 1) * sizeof(int))
    cdef double* cen = <double*> malloc(n * sizeof(double))
    cdef double* xr = <double*> malloc(n * sizeof(double))
    cdef double* xe = <double*> malloc(n * sizeof(double))
    cdef int i, j, it, key, worst, best, second
    cdef double fr, fe, fc, keyv, fbest

    for i in range(n + 1):
        for j in range(n):
            pts[i * n + j] = x0[j]
        if i >= 1:
            pts[i * n + (i - 1)] += step
        vals[i] = f(ctx, pts + i * n)

    for it in range(max_iter):
        for i in range(n + 1):
            order[i] = i
        # stable insertion sort of indices by value
        for i in range(1, n + 1):
            key = order[i]
            keyv = vals[key]
            j = i - 1
            while j >= 0 and vals[order[j]] > keyv:
                order[j + 1] = order[j]
                j -= 1
            order[j + 1] = key
        best = order[0]
        second = order[n - 1]
        worst = order[n]
        if vals[worst] - vals[best] <= ftol:
            break
        for j in range(n):
            cen[j] = 0.0
        for i in range(n + 1):
            if i == worst:
                continue
            for j in range(n):
                cen[j] += pts[i * n + j]
        for j in range(n):
            cen[j] /= n
            xr[j] = cen[j] + (cen[j] - pts[worst * n + j])
        fr = f(ctx, xr)
        if fr < vals[best]:
            for j in range(n):
                xe[j] = cen[j] + 2.0 * (cen[j] - pts[worst * n + j])
            fe = f(ctx, xe)
            if fe < fr:
                memcpy(pts + worst * n, xe, n * sizeof(double))
                vals[worst] = fe
            else:
                memcpy(pts + worst * n, xr, n * sizeof(double))
                vals[worst] = fr
        elif fr < vals[second]:
            memcpy(pts + worst * n, xr, n * sizeof(double))
            vals[worst] = fr
        else:
            if fr < vals[worst]:
                for j in range(n):
                    xe[j] = cen[j] + 0.5 * (xr[j] - cen[j])
            else:
                for j in range(n):
                    xe[j] = cen[j] + 0.5 * (pts[worst * n + j] - cen[j])
            fc = f(ctx, xe)
            if fc < (fr if fr < vals[worst] else vals[worst]):
                memcpy(pts + worst * n, xe, n * sizeof(double))
                vals[worst] = fc
            else:
                for i in range(n + 1):
                    if i == best:
                        continue
                    for j in range(n):
                        pts[i * n + j] = pts[best * n + j] + 0.5 * (pts[i * n + j] - pts[best * n + j])
                    vals[i] = f(ctx, pts + i * n)

    best = 0
    for i in range(1, n + 1):
        if vals[i] < vals[best]:
            best = i
    fbest = vals[best]
    memcpy(xbest, pts + best * n, n * sizeof(double))
    free(pts); free(vals); free(order); free(cen); free(xr); free(xe)
    return fbest


# ---------------------------------------------------------------------------
# measurement-conditioned entropy objective
# ---------------------------------------------------------------------------

cdef struct CCtx:
    cplx* rho            # (dA*dC)^2
    int d_a
    int d_c
    int k
    cplx* u              # k*k
    cplx* h              # k*k scratch
    double* w            # k
    cplx* cond           # dA*dA
    cplx* scr            # dA*dA
    double* wa           # dA

cdef double c_cc_obj(void* vctx, double* theta) noexcept:
    cdef CCtx* ctx = <CCtx*> vctx
    cdef int d_a = ctx.d_a, d_c = ctx.d_c, k = ctx.k
    cdef int i, a, b, c, cp
    cdef double total = 0.0, p
    cdef cplx acc, wc
    c_expi_h(theta, k, ctx.u, ctx.h, ctx.w)
    for i in range(k):
        for a in range(d_a):
            for b in range(d_a):
                acc = 0.0
                for c in range(d_c):
                    wc = ctx.u[i * k + c]
                    for cp in range(d_c):
                        acc += (wc * ctx.rho[(a * d_c + c) * d_a * d_c + (b * d_c + cp)]
                                * ctx.u[i * k + cp].conjugate())
                ctx.cond[a * d_a + b] = acc
        p = 0.0
        for a in range(d_a):
            p += ctx.cond[a * d_a + a].real
        if p < PROB_FLOOR:
            continue
        for a in range(d_a * d_a):
            ctx.cond[a] = ctx.cond[a] / p
        total += p * c_state_entropy_buf(ctx.cond, d_a, ctx.scr, ctx.wa)
    return total


cdef double c_cc_best(cplx* rho, int d_a, int d_c, int k,
                      int restarts, int max_iter, double ftol,
                      unsigned long long seed, unsigned long long outcome,
                      CCtx* ctx, double* x0, double* xb) noexcept:
    # multi-restart minimum of the conditioned-entropy objective
    cdef int npar = k * k
    cdef int j, i
    cdef double best = 1e300, f
    ctx.rho = rho
    ctx.d_a = d_a
    ctx.d_c = d_c
    ctx.k = k
    for j in range(restarts):
        if j == 0:
            for i in range(npar):
                x0[i] = 0.0
        else:
            c_lcg_uniform(c_mix_seed(seed, outcome, <unsigned long long> j), x0, npar)
        f = c_nelder_mead(c_cc_obj, <void*> ctx, npar, x0, 0.5, max_iter, ftol, xb)
        if f < best:
            best = f
    return best


# ---------------------------------------------------------------------------
# steered pure-ensemble objective
# ---------------------------------------------------------------------------

cdef struct RoofCtx:
    cplx* amp            # d x r
    int d
    int d1
    int d2
    int r
    int k
    cplx* wmat           # k x r
    cplx* u              # d (member vector)
    cplx* g              # d1*d1
    cplx* scr            # d1*d1
    double* wa           # d1

cdef double c_roof_obj(void* vctx, double* theta) noexcept:
    cdef RoofCtx* ctx = <RoofCtx*> vctx
    cdef int d = ctx.d, d1 = ctx.d1, d2 = ctx.d2, r = ctx.r, k = ctx.k
    cdef int i, s, x, a, b, c
    cdef double total = 0.0, p
    cdef cplx acc
    for i in range(k * r):
        ctx.wmat[i] = theta[2 * i] + 1j * theta[2 * i + 1]
    c_mgs(ctx.wmat, k, r)
    for i in range(k):
        for x in range(d):
            acc = 0.0
            for s in range(r):
                acc += ctx.amp[x * r + s] * ctx.wmat[i * r + s]
            ctx.u[x] = acc
        p = 0.0
        for x in range(d):
            p += ctx.u[x].real * ctx.u[x].real + ctx.u[x].imag * ctx.u[x].imag
        if p < PROB_FLOOR:
            continue
        for a in range(d1):
            for b in range(d1):
                acc = 0.0
                for c in range(d2):
                    acc += ctx.u[a * d2 + c] * ctx.u[b * d2 + c].conjugate()
                ctx.g[a * d1 + b] = acc / p
        total += p * c_state_entropy_buf(ctx.g, d1, ctx.scr, ctx.wa)
    return total


# ---------------------------------------------------------------------------
# steered mixed-ensemble objective (two outcomes, any element rank)
# ---------------------------------------------------------------------------

cdef struct GCtx:
    cplx* amp            # d x r
    int d
    int d1
    int d2
    int r
    int inner_restarts
    int inner_iters
    double inner_ftol
    unsigned long long seed
    cplx* uq             # r*r
    cplx* hq             # r*r
    double* wq           # r
    cplx* e1             # r*r
    cplx* e2             # r*r
    cplx* sigma          # d*d
    cplx* sigwork        # d*d
    cplx* vec            # d*d eigenvectors
    double* wd           # d
    cplx* siga           # d1*d1
    cplx* scr            # max(d,d1)^2
    double* wa           # max(d,d1)
    cplx* nmat           # d*2
    cplx* rho_ap         # 16
    CCtx inner_ctx
    cplx* inner_cond     # d1*d1
    cplx* inner_scr      # d1*d1
    double* inner_wa     # d1
    cplx* inner_u        # kin*kin
    cplx* inner_h        # kin*kin
    double* inner_w      # kin
    double* inner_x0     # kin^2
    double* inner_xb     # kin^2

cdef double c_g_obj(void* vctx, double* theta) noexcept:
    cdef GCtx* ctx = <GCtx*> vctx
    cdef int d = ctx.d, d1 = ctx.d1, d2 = ctx.d2, r = ctx.r
    cdef int i, j, x, y, s, t, a, b, c, outcome, rank, kin
    cdef double total = 0.0, p, sig, s_member, ccv, best
    cdef cplx acc
    cdef cplx* e
    # two-outcome POVM from unitary eigenbasis plus logits
    c_expi_h(theta, r, ctx.uq, ctx.hq, ctx.wq)
    for j in range(r):
        ctx.wd[j] = 1.0 / (1.0 + exp(-theta[r * r + j]))
    for x in range(r):
        for y in range(r):
            acc = 0.0
            for j in range(r):
                acc += ctx.uq[x * r + j] * ctx.wd[j] * ctx.uq[y * r + j].conjugate()
            ctx.e1[x * r + y] = acc
    for x in range(r):
        for y in range(r):
            ctx.e2[x * r + y] = -ctx.e1[x * r + y]
        ctx.e2[x * r + x] = 1.0 + ctx.e2[x * r + x]

    for outcome in range(2):
        e = ctx.e1 if outcome == 0 else ctx.e2
        for x in range(d):
            for y in range(d):
                acc = 0.0
                for s in range(r):
                    for t in range(r):
                        acc += (ctx.amp[x * r + s] * e[t * r + s]
                                * ctx.amp[y * r + t].conjugate())
                ctx.sigma[x * d + y] = acc
        p = 0.0
        for x in range(d):
            p += ctx.sigma[x * d + x].real
        if p < PROB_FLOOR:
            continue
        for x in range(d):
            for y in range(d):
                acc = 0.5 * (ctx.sigma[x * d + y] + ctx.sigma[y * d + x].conjugate())
                ctx.sigma[x * d + y] = acc / p
        for x in range(d):
            for y in range(x + 1, d):
                ctx.sigma[y * d + x] = ctx.sigma[x * d + y].conjugate()
        # reduced state on the kept side
        for a in range(d1):
            for b in range(d1):
                acc = 0.0
                for c in range(d2):
                    acc += ctx.sigma[(a * d2 + c) * d + (b * d2 + c)]
                ctx.siga[a * d1 + b] = acc
        s_member = c_state_entropy_buf(ctx.siga, d1, ctx.scr, ctx.wa)
        memcpy(ctx.sigwork, ctx.sigma, d * d * sizeof(cplx))
        c_eigh(ctx.sigwork, d, ctx.wd, ctx.vec, 1)
        rank = 0
        for x in range(d):
            if ctx.wd[x] > RANK_TOL:
                rank += 1
        if d1 == 2 and rank <= 2:
            for x in range(d):
                for j in range(2):
                    sig = ctx.wd[j] if ctx.wd[j] > 0.0 else 0.0
                    ctx.nmat[x * 2 + j] = sqrt(sig) * ctx.vec[x * d + j]
            for a in range(2):
                for j in range(2):
                    for b in range(2):
                        for t in range(2):
                            acc = 0.0
                            for c in range(d2):
                                acc += (ctx.nmat[(a * d2 + c) * 2 + j]
                                        * ctx.nmat[(b * d2 + c) * 2 + t].conjugate())
                            ctx.rho_ap[(a * 2 + j) * 4 + (b * 2 + t)] = acc
            ccv = s_member - c_eof4(ctx.rho_ap)
        else:
            kin = d2 * d2
            ctx.inner_ctx.u = ctx.inner_u
            ctx.inner_ctx.h = ctx.inner_h
            ctx.inner_ctx.w = ctx.inner_w
            ctx.inner_ctx.cond = ctx.inner_cond
            ctx.inner_ctx.scr = ctx.inner_scr
            ctx.inner_ctx.wa = ctx.inner_wa
            best = c_cc_best(ctx.sigma, d1, d2, kin,
                             ctx.inner_restarts, ctx.inner_iters, ctx.inner_ftol,
                             ctx.seed, <unsigned long long> outcome,
                             &ctx.inner_ctx, ctx.inner_x0, ctx.inner_xb)
            ccv = s_member - best
        if ccv < 0.0:
            ccv = 0.0
        if ccv > s_member:
            ccv = s_member
        total += p * ccv
    return total


# ---------------------------------------------------------------------------
# python-facing wrappers
# ---------------------------------------------------------------------------

def _carr(a, dt):
    out = np.ascontiguousarray(a, dtype=dt)
    if not out.flags.writeable:
        out = out.copy()
    return out


def entropy_from_evals(w):
    w = _carr(w, float)
    cdef double[::1] wv = w
    return c_entropy_w(&wv[0], wv.shape[0])


def state_entropy(rho):
    rho = _carr(rho, complex)
    cdef cplx[:, ::1] m = rho
    cdef int n = m.shape[0]
    cdef cplx* scr = <cplx*> malloc(n * n * sizeof(cplx))
    cdef double* w = <double*> malloc(n * sizeof(double))
    cdef double out
    try:
        out = c_state_entropy_buf(&m[0, 0], n, scr, w)
    finally:
        free(scr); free(w)
    return out


def jacobi_eigh(a):
    """(eigenvalues desc, eigenvector columns) via the cyclic Jacobi solver."""
    a = _carr(a, complex)
    cdef cplx[:, ::1] m = a.copy()
    cdef int n = m.shape[0]
    wout = np.empty(n, dtype=float)
    vout = np.empty((n, n), dtype=complex)
    cdef double[::1] wv = wout
    cdef cplx[:, ::1] vv = vout
    c_eigh(&m[0, 0], n, &wv[0], &vv[0, 0], 1)
    return wout, vout


def concurrence4(rho):
    rho = _carr(rho, complex)
    cdef cplx[:, ::1] m = rho
    return c_conc4(&m[0, 0])


def eof4(rho):
    rho = _carr(rho, complex)
    cdef cplx[:, ::1] m = rho
    return c_eof4(&m[0, 0])


def expi_h(theta, m):
    theta = _carr(theta, float)
    cdef double[::1] tv = theta
    out = np.empty((m, m), dtype=complex)
    cdef cplx[:, ::1] uv = out
    cdef cplx* h = <cplx*> malloc(m * m * sizeof(cplx))
    cdef double* w = <double*> malloc(m * sizeof(double))
    try:
        c_expi_h(&tv[0], m, &uv[0, 0], h, w)
    finally:
        free(h); free(w)
    return out


def qr_isometry(theta, k, r):
    theta = _carr(theta, float)
    cdef double[::1] tv = theta
    out = np.empty((k, r), dtype=complex)
    cdef cplx[:, ::1] av = out
    cdef int i
    for i in range(k * r):
        av[i // r, i % r] = tv[2 * i] + 1j * tv[2 * i + 1]
    c_mgs(&av[0, 0], k, r)
    return out


cdef CCtx* _alloc_cctx(int d_a, int k):
    cdef CCtx* ctx = <CCtx*> malloc(sizeof(CCtx))
    ctx.u = <cplx*> malloc(k * k * sizeof(cplx))
    ctx.h = <cplx*> malloc(k * k * sizeof(cplx))
    ctx.w = <double*> malloc(k * sizeof(double))
    ctx.cond = <cplx*> malloc(d_a * d_a * sizeof(cplx))
    ctx.scr = <cplx*> malloc(d_a * d_a * sizeof(cplx))
    ctx.wa = <double*> malloc(d_a * sizeof(double))
    return ctx


cdef void _free_cctx(CCtx* ctx):
    free(ctx.u); free(ctx.h); free(ctx.w)
    free(ctx.cond); free(ctx.scr); free(ctx.wa)
    free(ctx)


def cc_objective(rho, d_a, d_c, n_out, theta):
    rho = _carr(rho, complex)
    theta = _carr(theta, float)
    cdef cplx[:, ::1] rv = rho
    cdef double[::1] tv = theta
    cdef CCtx* ctx = _alloc_cctx(d_a, n_out)
    cdef double out
    ctx.rho = &rv[0, 0]
    ctx.d_a = d_a
    ctx.d_c = d_c
    ctx.k = n_out
    try:
        out = c_cc_obj(<void*> ctx, &tv[0])
    finally:
        _free_cctx(ctx)
    return out


def cc_optimize(rho, d_a, d_c, n_out, x0, max_iter, ftol, step):
    rho = _carr(rho, complex)
    x0 = _carr(x0, float)
    cdef cplx[:, ::1] rv = rho
    cdef double[::1] xv = x0
    cdef int npar = x0.shape[0]
    xb = np.empty(npar, dtype=float)
    cdef double[::1] xbv = xb
    cdef CCtx* ctx = _alloc_cctx(d_a, n_out)
    cdef double out
    ctx.rho = &rv[0, 0]
    ctx.d_a = d_a
    ctx.d_c = d_c
    ctx.k = n_out
    try:
        out = c_nelder_mead(c_cc_obj, <void*> ctx, npar, &xv[0], step,
                            max_iter, ftol, &xbv[0])
    finally:
        _free_cctx(ctx)
    return out, xb, 0


cdef RoofCtx* _alloc_roofctx(int d, int d1, int r, int k):
    cdef RoofCtx* ctx = <RoofCtx*> malloc(sizeof(RoofCtx))
    ctx.wmat = <cplx*> malloc(k * r * sizeof(cplx))
    ctx.u = <cplx*> malloc(d * sizeof(cplx))
    ctx.g = <cplx*> malloc(d1 * d1 * sizeof(cplx))
    ctx.scr = <cplx*> malloc(d1 * d1 * sizeof(cplx))
    ctx.wa = <double*> malloc(d1 * sizeof(double))
    return ctx


cdef void _free_roofctx(RoofCtx* ctx):
    free(ctx.wmat); free(ctx.u); free(ctx.g); free(ctx.scr); free(ctx.wa)
    free(ctx)


def roof_pure_objective(amp, d1, d2, n_out, theta):
    amp = _carr(amp, complex)
    theta = _carr(theta, float)
    cdef cplx[:, ::1] av = amp
    cdef double[::1] tv = theta
    cdef int d = av.shape[0], r = av.shape[1]
    cdef RoofCtx* ctx = _alloc_roofctx(d, d1, r, n_out)
    cdef double out
    ctx.amp = &av[0, 0]
    ctx.d = d
    ctx.d1 = d1
    ctx.d2 = d2
    ctx.r = r
    ctx.k = n_out
    try:
        out = c_roof_obj(<void*> ctx, &tv[0])
    finally:
        _free_roofctx(ctx)
    return out


def roof_pure_optimize(amp, d1, d2, n_out, x0, max_iter, ftol, step):
    amp = _carr(amp, complex)
    x0 = _carr(x0, float)
    cdef cplx[:, ::1] av = amp
    cdef double[::1] xv = x0
    cdef int d = av.shape[0], r = av.shape[1]
    cdef int npar = x0.shape[0]
    xb = np.empty(npar, dtype=float)
    cdef double[::1] xbv = xb
    cdef RoofCtx* ctx = _alloc_roofctx(d, d1, r, n_out)
    cdef double out
    ctx.amp = &av[0, 0]
    ctx.d = d
    ctx.d1 = d1
    ctx.d2 = d2
    ctx.r = r
    ctx.k = n_out
    try:
        out = c_nelder_mead(c_roof_obj, <void*> ctx, npar, &xv[0], step,
                            max_iter, ftol, &xbv[0])
    finally:
        _free_roofctx(ctx)
    return out, xb, 0


cdef GCtx* _alloc_gctx(int d, int d1, int d2, int r,
                       int inner_restarts, int inner_iters, double inner_ftol,
                       unsigned long long seed):
    cdef GCtx* ctx = <GCtx*> malloc(sizeof(GCtx))
    cdef int kin = d2 * d2
    cdef int dmax = d if d > d1 else d1
    ctx.d = d
    ctx.d1 = d1
    ctx.d2 = d2
    ctx.r = r
    ctx.inner_restarts = inner_restarts
    ctx.inner_iters = inner_iters
    ctx.inner_ftol = inner_ftol
    ctx.seed = seed
    ctx.uq = <cplx*> malloc(r * r * sizeof(cplx))
    ctx.hq = <cplx*> malloc(r * r * sizeof(cplx))
    ctx.wq = <double*> malloc(r * sizeof(double))
    ctx.e1 = <cplx*> malloc(r * r * sizeof(cplx))
    ctx.e2 = <cplx*> malloc(r * r * sizeof(cplx))
    ctx.sigma = <cplx*> malloc(d * d * sizeof(cplx))
    ctx.sigwork = <cplx*> malloc(d * d * sizeof(cplx))
    ctx.vec = <cplx*> malloc(d * d * sizeof(cplx))
    ctx.wd = <double*> malloc((d if d > r else r) * sizeof(double))
    ctx.siga = <cplx*> malloc(d1 * d1 * sizeof(cplx))
    ctx.scr = <cplx*> malloc(dmax * dmax * sizeof(cplx))
    ctx.wa = <double*> malloc(dmax * sizeof(double))
    ctx.nmat = <cplx*> malloc(d * 2 * sizeof(cplx))
    ctx.rho_ap = <cplx*> malloc(16 * sizeof(cplx))
    ctx.inner_cond = <cplx*> malloc(d1 * d1 * sizeof(cplx))
    ctx.inner_scr = <cplx*> malloc(d1 * d1 * sizeof(cplx))
    ctx.inner_wa = <double*> malloc(d1 * sizeof(double))
    ctx.inner_u = <cplx*> malloc(kin * kin * sizeof(cplx))
    ctx.inner_h = <cplx*> malloc(kin * kin * sizeof(cplx))
    ctx.inner_w = <double*> malloc(kin * sizeof(double))
    ctx.inner_x0 = <double*> malloc(kin * kin * sizeof(double))
    ctx.inner_xb = <double*> malloc(kin * kin * sizeof(double))
    return ctx


cdef void _free_gctx(GCtx* ctx):
    free(ctx.uq); free(ctx.hq); free(ctx.wq); free(ctx.e1); free(ctx.e2)
    free(ctx.sigma); free(ctx.sigwork); free(ctx.vec); free(ctx.wd)
    free(ctx.siga); free(ctx.scr); free(ctx.wa); free(ctx.nmat); free(ctx.rho_ap)
    free(ctx.inner_cond); free(ctx.inner_scr); free(ctx.inner_wa)
    free(ctx.inner_u); free(ctx.inner_h); free(ctx.inner_w)
    free(ctx.inner_x0); free(ctx.inner_xb)
    free(ctx)


def g_mixed_objective(amp, d1, d2, theta, inner_restarts, inner_iters, inner_ftol, seed):
    amp = _carr(amp, complex)
    theta = _carr(theta, float)
    cdef cplx[:, ::1] av = amp
    cdef double[::1] tv = theta
    cdef int d = av.shape[0], r = av.shape[1]
    cdef GCtx* ctx = _alloc_gctx(d, d1, d2, r, inner_restarts, inner_iters,
                                 inner_ftol, <unsigned long long> (seed & ((1 << 64) - 1)))
    cdef double out
    ctx.amp = &av[0, 0]
    try:
        out = c_g_obj(<void*> ctx, &tv[0])
    finally:
        _free_gctx(ctx)
    return out


def g_mixed_optimize(amp, d1, d2, x0, max_iter, ftol, step,
                     inner_restarts, inner_iters, inner_ftol, seed):
    amp = _carr(amp, complex)
    x0 = _carr(x0, float)
    cdef cplx[:, ::1] av = amp
    cdef double[::1] xv = x0
    cdef int d = av.shape[0], r = av.shape[1]
    cdef int npar = x0.shape[0]
    xb = np.empty(npar, dtype=float)
    cdef double[::1] xbv = xb
    cdef GCtx* ctx = _alloc_gctx(d, d1, d2, r, inner_restarts, inner_iters,
                                 inner_ftol, <unsigned long long> (seed & ((1 << 64) - 1)))
    cdef double out
    ctx.amp = &av[0, 0]
    try:
        out = c_nelder_mead(c_g_obj, <void*> ctx, npar, &xv[0], step,
                            max_iter, ftol, &xbv[0])
    finally:
        _free_gctx(ctx)
    return out, xb, 0


def mix_seed(seed, outcome, restart):
    return int(c_mix_seed(<unsigned long long> (seed & ((1 << 64) - 1)),
                          <unsigned long long> (outcome & ((1 << 64) - 1)),
                          <unsigned long long> (restart & ((1 << 64) - 1))))


def lcg_uniform(state, n):
    out = np.empty(n, dtype=float)
    cdef double[::1] ov = out
    c_lcg_uniform(<unsigned long long> (state & ((1 << 64) - 1)), &ov[0], n)
    return out, 0
