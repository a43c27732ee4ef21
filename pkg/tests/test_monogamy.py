import numpy as np
import pytest

from entmono.extension import SeparableDecomposition, build
from entmono.measures import OptBudget
from entmono.monogamy import (
    chain_verify,
    duality_check,
    monogamy_step_check,
    sharability_bound,
)
from entmono.qmat import DensityMatrix, PureState, random_pure_state, random_state, tensor

from conftest import bell_dm, bell_pure, ghz_pure, state_seed, werner

FAST = OptBudget(restarts=8, iters=200, seed=5)


# ---------------------------------------------------------------------------
# duality
# ---------------------------------------------------------------------------

def test_duality_decoupled_third_party():
    phi = tensor(bell_pure(), PureState([1, 0], (2,)))
    rep = duality_check(phi, FAST)
    assert abs(rep.s_a - 1) < 1e-12
    assert abs(rep.eof_ab - 1) < 1e-12
    assert abs(rep.cc_ac) < 1e-9
    assert abs(rep.residual) < 1e-9


def test_duality_trivial_first_party():
    phi = tensor(PureState([1, 0], (2,)), random_pure_state((2, 2), seed=4))
    rep = duality_check(phi, FAST)
    assert abs(rep.s_a) < 1e-9
    assert abs(rep.eof_ab) < 1e-9
    assert abs(rep.cc_ac) < 1e-9


def test_duality_ghz():
    rep = duality_check(ghz_pure(), FAST)
    assert abs(rep.s_a - 1) < 1e-12
    assert abs(rep.eof_ab) < 1e-9
    assert abs(rep.cc_ac - 1) < 1e-6
    assert abs(rep.residual) < 2e-3


def test_duality_random_haar_states():
    worst = 0.0
    for seed in range(15):
        phi = random_pure_state((2, 2, 2), seed=seed)
        rep = duality_check(phi, OptBudget(restarts=16, iters=300, seed=7))
        assert rep.eof_exact
        worst = max(worst, abs(rep.residual))
    assert worst <= 2e-3


def test_duality_requires_tripartite():
    with pytest.raises(ValueError, match="tripartite"):
        duality_check(bell_pure(), FAST)
    with pytest.raises(ValueError, match="tripartite"):
        duality_check(random_pure_state((2, 2, 2, 2), seed=0), FAST)


# ---------------------------------------------------------------------------
# single-step inequality
# ---------------------------------------------------------------------------

def test_step_decoupled_third_party():
    rng = np.random.default_rng(20)
    g = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    rc = g @ g.conj().T
    rc = DensityMatrix(rc / rc.trace().real, (2,))
    rho = tensor(bell_dm(), rc)
    slack = monogamy_step_check(rho, FAST)
    assert abs(slack) <= 2e-3


def test_step_random_rank2_sweep():
    for i in range(6):
        rho = random_state((2, 2, 2), "rank-limited", seed=state_seed(11, i), rank=2)
        slack = monogamy_step_check(rho, OptBudget(restarts=16, iters=300,
                                                   seed=state_seed(11, i)))
        assert slack >= -2e-3


def test_step_requires_tripartite():
    with pytest.raises(ValueError, match="tripartite"):
        monogamy_step_check(bell_dm(), FAST)


# ---------------------------------------------------------------------------
# chain
# ---------------------------------------------------------------------------

def _classical_decomp():
    e0 = PureState([1, 0], (2,))
    e1 = PureState([0, 1], (2,))
    return SeparableDecomposition([0.5, 0.5], [e0, e1], [e0, e1])


def test_chain_on_built_extension():
    ext = build(_classical_decomp(), 3)
    rep = chain_verify(ext, FAST)
    assert rep.n == 3
    assert rep.g_arrow_ab <= 2e-3
    assert rep.final_margin >= rep.s_a - 3 * 2e-3
    assert rep.marginal_deviation <= 1e-12
    assert len(rep.ef_estimates) == 3
    assert len(rep.step_slacks) == 3


def test_chain_degenerate_single_share():
    rep = chain_verify(bell_dm(), FAST)
    assert rep.n == 1
    assert rep.final_margin >= -2e-3


def test_chain_rejects_unequal_marginals():
    # product padding is not an extension of an entangled state
    pad = tensor(bell_dm(), DensityMatrix(np.eye(2) / 2, (2,)))
    with pytest.raises(ValueError, match="not a valid extension"):
        chain_verify(pad, FAST)


def test_chain_rejects_mixed_share_dims():
    rho = DensityMatrix(np.eye(12) / 12, (2, 2, 3))
    with pytest.raises(ValueError, match="shape mismatch"):
        chain_verify(rho, FAST)


def test_chain_on_searched_extension():
    from entmono.extension import search_extension

    res = search_extension(werner(0.5), 2, OptBudget(restarts=4, iters=200, seed=3))
    assert res.found
    rep = chain_verify(res.state, FAST, marginal_tol=2e-6)
    assert rep.final_margin >= -2e-3


# ---------------------------------------------------------------------------
# shareability bound
# ---------------------------------------------------------------------------

def test_bound_bell():
    rep = sharability_bound(bell_dm(), FAST)
    assert rep.status == "bounded"
    assert rep.n_max == 1
    assert rep.separability_verdict == "entangled"
    assert abs(rep.s_a - 1) < 1e-12
    assert abs(rep.g_arrow_ab - 1) < 2e-3


def test_bound_product_unbounded():
    rng = np.random.default_rng(21)
    g = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    ra = g @ g.conj().T
    ra = DensityMatrix(ra / ra.trace().real, (2,))
    rho = tensor(ra, DensityMatrix(np.eye(2) / 2, (2,)))
    rep = sharability_bound(rho, FAST)
    assert rep.status == "unbounded"
    assert rep.n_max is None
    assert rep.separability_verdict == "separable"


def test_bound_pure_entangled_partial():
    phi = PureState([np.sqrt(0.9), 0, 0, np.sqrt(0.1)], (2, 2))
    rep = sharability_bound(phi.density(), FAST)
    # S(A) and the correlation ceiling coincide for pure states
    assert rep.status == "bounded"
    assert rep.n_max == 1


def test_bound_werner_regression():
    rep = sharability_bound(werner(0.8), OptBudget(restarts=16, iters=300, seed=6))
    assert rep.status == "bounded"
    assert rep.n_max == 1
    assert abs(rep.g_arrow_ab - 0.5310044064107189) < 5e-3


def test_bound_near_separable_unreliable():
    rep = sharability_bound(werner(0.335), FAST)
    assert rep.separability_verdict == "entangled"
    assert rep.status == "unreliable"
    assert rep.n_max is None


def test_bound_antitone_quick():
    ns = []
    for i, p in enumerate((0.5, 0.7, 0.9)):
        rep = sharability_bound(werner(p), OptBudget(restarts=8, iters=200,
                                                     seed=state_seed(3, i)))
        assert rep.status == "bounded"
        ns.append(rep.n_max)
    assert ns[0] >= ns[1] >= ns[2]


def test_bound_deterministic():
    a = sharability_bound(werner(0.7), FAST)
    b = sharability_bound(werner(0.7), FAST)
    assert a == b


def test_bound_requires_bipartite():
    with pytest.raises(ValueError, match="bipartite"):
        sharability_bound(random_state((2, 2, 2), "hilbert-schmidt", seed=0), FAST)
