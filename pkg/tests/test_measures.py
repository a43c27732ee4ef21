import numpy as np
import pytest

from entmono.measures import (
    Ensemble,
    OptBudget,
    Povm,
    classical_correlation,
    concurrence_2q,
    entropy,
    eof_2q,
    eof_convex_roof,
    g_arrow,
    ppt_entangled,
    pure_entanglement,
    wootters_decomposition,
)
from entmono.qmat import (
    DensityMatrix,
    PureState,
    StateInvariantError,
    partial_trace,
    random_pure_state,
    random_state,
    tensor,
)

from conftest import bell_dm, bell_pure, entangled_rank2, product_mixture, werner

FAST = OptBudget(restarts=8, iters=200, seed=9)


def h2(x):
    if x <= 0 or x >= 1:
        return 0.0
    return float(-x * np.log2(x) - (1 - x) * np.log2(1 - x))


def _rand_dm(rng, d, dims):
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    m = g @ g.conj().T
    return DensityMatrix(m / m.trace().real, dims)


# ---------------------------------------------------------------------------
# entropy and pure-state entanglement
# ---------------------------------------------------------------------------

def test_entropy_maximally_mixed_qubit():
    assert entropy(DensityMatrix(np.eye(2) / 2, (2,))) == 1.0


def test_entropy_rank_one():
    assert entropy(bell_dm()) < 1e-12


def test_entropy_derived_value():
    rho = DensityMatrix(np.diag([0.75, 0.25]), (2,))
    oracle = -(0.75 * np.log2(0.75) + 0.25 * np.log2(0.25))
    assert abs(entropy(rho) - oracle) < 1e-12
    assert abs(entropy(rho) - 0.811278) < 1e-6


def test_entropy_concave():
    rng = np.random.default_rng(11)
    for _ in range(20):
        a = _rand_dm(rng, 4, (4,))
        b = _rand_dm(rng, 4, (4,))
        mixed = DensityMatrix(0.5 * a.matrix + 0.5 * b.matrix, (4,))
        assert entropy(mixed) >= 0.5 * entropy(a) + 0.5 * entropy(b) - 1e-9


def test_pure_entanglement_bell():
    assert pure_entanglement(bell_pure(), [0]) == 1.0


def test_pure_entanglement_product():
    phi = PureState(np.kron([1, 0], [1, 1] / np.sqrt(2)), (2, 2))
    assert pure_entanglement(phi, [0]) < 1e-12


def test_pure_entanglement_derived():
    phi = PureState([np.sqrt(0.9), 0, 0, np.sqrt(0.1)], (2, 2))
    assert abs(pure_entanglement(phi, [0]) - h2(0.1)) < 1e-12
    assert abs(pure_entanglement(phi, [0]) - 0.468996) < 1e-6


def test_pure_entanglement_symmetric_under_swap():
    rng = np.random.default_rng(12)
    for seed in range(5):
        phi = random_pure_state((2, 3), seed=seed)
        assert abs(pure_entanglement(phi, [0]) - pure_entanglement(phi, [1])) < 1e-12


def test_pure_entanglement_bad_cut():
    with pytest.raises(ValueError, match="bipartition"):
        pure_entanglement(bell_pure(), [0, 1])
    with pytest.raises(ValueError, match="bipartition"):
        pure_entanglement(bell_pure(), [])


# ---------------------------------------------------------------------------
# two-qubit closed forms
# ---------------------------------------------------------------------------

def test_concurrence_bell():
    assert abs(concurrence_2q(bell_dm()) - 1.0) < 1e-12


def test_concurrence_separable_products():
    for seed in range(4):
        assert concurrence_2q(product_mixture(seed)) < 1e-8


def test_concurrence_werner_closed_form():
    for p in (0.5, 0.8):
        assert abs(concurrence_2q(werner(p)) - (3 * p - 1) / 2) < 1e-10


def test_concurrence_wrong_dims():
    with pytest.raises(ValueError, match="two-qubit only"):
        concurrence_2q(DensityMatrix(np.eye(4) / 4, (4,)))


def test_eof_2q_values():
    assert abs(eof_2q(bell_dm()) - 1.0) < 1e-12
    assert eof_2q(product_mixture(1)) < 1e-8
    c = 0.7
    oracle = h2(0.5 * (1 + np.sqrt(1 - c * c)))
    assert abs(eof_2q(werner(0.8)) - oracle) < 1e-9
    assert abs(eof_2q(werner(0.8)) - 0.5919) < 1e-3


# ---------------------------------------------------------------------------
# optimal two-qubit decomposition
# ---------------------------------------------------------------------------

def _check_wootters(rho):
    ens = wootters_decomposition(rho)
    assert ens.max_deviation(rho) < 1e-8
    c = concurrence_2q(rho)
    avg_e = 0.0
    for w, m in zip(ens.weights, ens.members):
        assert np.linalg.eigvalsh(m.matrix)[-1] > 1 - 1e-8  # pure member
        assert abs(concurrence_2q(m) - c) < 1e-6
        avg_e += w * eof_2q(m)
    assert abs(avg_e - eof_2q(rho)) < 1e-7


def test_wootters_random_full_rank():
    rng = np.random.default_rng(13)
    for _ in range(15):
        _check_wootters(_rand_dm(rng, 4, (2, 2)))


def test_wootters_low_rank():
    for seed in range(6):
        _check_wootters(random_state((2, 2), "rank-limited", seed=seed, rank=2))
        _check_wootters(random_state((2, 2), "rank-limited", seed=seed + 50, rank=3))


def test_wootters_werner_family():
    # degenerate spin-flip spectra exercise the symmetric factorization
    for p in (0.0, 1 / 3, 0.4, 0.8, 1.0):
        _check_wootters(werner(p))


def test_wootters_separable_members_are_product():
    for seed in range(6):
        rho = product_mixture(seed)
        ens = wootters_decomposition(rho)
        assert ens.max_deviation(rho) < 1e-8
        for m in ens.members:
            assert concurrence_2q(m) < 1e-6


def test_wootters_pure_input():
    ens = wootters_decomposition(bell_dm())
    assert len(ens.members) == 1
    assert ens.max_deviation(bell_dm()) < 1e-12


# ---------------------------------------------------------------------------
# convex-roof entanglement of formation
# ---------------------------------------------------------------------------

def test_roof_pure_input_exact():
    res = eof_convex_roof(bell_dm(), [0], FAST)
    assert res.value == pure_entanglement(bell_pure(), [0])
    assert res.restarts_used == 0
    assert len(res.argument.members) == 1


def test_roof_matches_wootters_on_werner():
    res = eof_convex_roof(werner(0.8), [0], OptBudget(restarts=16, iters=300, seed=2))
    assert res.value >= eof_2q(werner(0.8)) - 5e-3
    assert abs(res.value - eof_2q(werner(0.8))) < 5e-3


def test_roof_separable_witness():
    for seed in range(3):
        rho = product_mixture(seed)
        res = eof_convex_roof(rho, [0], OptBudget(restarts=16, iters=400, seed=9))
        assert res.value <= 1e-3


def test_roof_returns_consistent_ensemble():
    rho = werner(0.7)
    res = eof_convex_roof(rho, [0], FAST)
    assert res.argument.max_deviation(rho) < 1e-8
    avg = sum(w * pure_entanglement_of(m) for w, m in
              zip(res.argument.weights, res.argument.members))
    assert abs(avg - res.value) < 1e-6


def pure_entanglement_of(member):
    # members are rank-1; score them through the reduced-state entropy
    w, v = np.linalg.eigh(member.matrix)
    vec = v[:, -1]
    return pure_entanglement(PureState(vec / np.linalg.norm(vec), member.dims), [0])


def test_roof_empty_budget():
    with pytest.raises(ValueError, match="empty budget"):
        eof_convex_roof(werner(0.8), [0], OptBudget(restarts=0))


def test_roof_deterministic_and_monotone():
    rho = werner(0.6)
    a = eof_convex_roof(rho, [0], FAST)
    b = eof_convex_roof(rho, [0], FAST)
    assert a.value == b.value
    small = eof_convex_roof(rho, [0], OptBudget(restarts=4, iters=200, seed=9))
    assert a.value <= small.value + 1e-15


def test_roof_multipartite_cut():
    rho = random_state((2, 2, 2), "rank-limited", seed=3, rank=2)
    res = eof_convex_roof(rho, [0], FAST)
    assert 0.0 <= res.value <= 1.0 + 1e-9
    assert res.argument.max_deviation(rho) < 1e-8


# ---------------------------------------------------------------------------
# classical correlation
# ---------------------------------------------------------------------------

def test_cc_product_state_is_zero():
    rng = np.random.default_rng(14)
    ra = _rand_dm(rng, 2, (2,))
    rb = _rand_dm(rng, 2, (2,))
    res = classical_correlation(tensor(ra, rb), 1, FAST)
    assert 0.0 <= res.value <= 1e-9


def test_cc_bell_reaches_ceiling():
    res = classical_correlation(bell_dm(), 1, FAST)
    assert res.value >= 1 - 1e-4
    assert res.value <= 1.0


def test_cc_classically_correlated():
    rho = DensityMatrix(np.diag([0.5, 0, 0, 0.5]), (2, 2))
    res = classical_correlation(rho, 1, FAST)
    assert abs(res.value - 1.0) < 1e-9


def test_cc_ceiling_invariant():
    rng = np.random.default_rng(15)
    for _ in range(4):
        rho = _rand_dm(rng, 4, (2, 2))
        s_a = entropy(partial_trace(rho, [0]))
        res = classical_correlation(rho, 1, OptBudget(restarts=4, iters=150, seed=1))
        assert res.value <= s_a + 1e-9


def test_cc_pure_state_coincidence():
    for seed in range(4):
        phi = random_pure_state((2, 2), seed=seed)
        res = classical_correlation(phi.density(), 1, FAST)
        assert abs(res.value - pure_entanglement(phi, [0])) < 1e-3


def test_cc_werner_closed_form_oracle():
    # for this family the best measurement yields 1 - h((1+p)/2)
    for p in (0.5, 0.8):
        oracle = 1 - h2((1 + p) / 2)
        res = classical_correlation(werner(p), 1, FAST)
        assert res.value >= oracle - 1e-3
        assert res.value <= oracle + 1e-6


def test_cc_purification_identity_oracle():
    # C(A:C) = S(A) - EoF(A:B) for a pure tripartite state, with EoF exact
    for seed in range(5):
        phi = random_pure_state((2, 2, 2), seed=seed)
        rho = phi.density()
        truth = entropy(partial_trace(rho, [0])) - eof_2q(partial_trace(rho, [0, 1]))
        res = classical_correlation(partial_trace(rho, [0, 2]), 1, FAST)
        assert abs(res.value - truth) < 2e-3


def test_cc_povm_argument_is_valid():
    res = classical_correlation(werner(0.8), 1, FAST)
    povm = res.argument
    assert isinstance(povm, Povm)
    total = sum(povm.elements)
    assert np.max(np.abs(total - np.eye(2))) < 1e-9


def test_cc_measured_side_matters():
    rho = random_state((2, 2), "hilbert-schmidt", seed=77)
    a = classical_correlation(rho, 0, FAST)
    b = classical_correlation(rho, 1, FAST)
    assert a.value >= 0 and b.value >= 0


def test_cc_errors():
    with pytest.raises(ValueError, match="no such subsystem"):
        classical_correlation(bell_dm(), 3, FAST)
    with pytest.raises(ValueError, match="empty budget"):
        classical_correlation(bell_dm(), 1, OptBudget(restarts=0))


def test_cc_deterministic_and_monotone():
    rho = werner(0.7)
    a = classical_correlation(rho, 1, FAST)
    b = classical_correlation(rho, 1, FAST)
    assert a.value == b.value
    small = classical_correlation(rho, 1, OptBudget(restarts=4, iters=200, seed=9))
    assert a.value >= small.value - 1e-15


# ---------------------------------------------------------------------------
# classical-correlation roof over mixed ensembles
# ---------------------------------------------------------------------------

def test_g_pure_input_equals_cc():
    cc = classical_correlation(bell_dm(), 1, FAST)
    g = g_arrow(bell_dm(), 1, FAST)
    assert g.value == cc.value
    assert abs(g.value - 1.0) < 2e-3
    assert len(g.argument.members) == 1


def test_g_separable_reaches_zero():
    for seed in range(5):
        rho = product_mixture(seed)
        res = g_arrow(rho, 1, FAST)
        assert 0.0 <= res.value <= 2e-3


def test_g_entangled_stays_positive():
    for seed in range(3):
        rho = entangled_rank2(seed, cmin=0.3)
        res = g_arrow(rho, 1, FAST)
        assert res.value >= 1e-2


def test_g_below_cc_invariant():
    rng = np.random.default_rng(16)
    for _ in range(3):
        rho = _rand_dm(rng, 4, (2, 2))
        cc = classical_correlation(rho, 1, FAST)
        g = g_arrow(rho, 1, FAST)
        assert g.value <= cc.value + 2e-3


def test_g_werner_regression():
    # frozen after a 64-restart run; equals the trivial-ensemble value
    # 1 - h(0.9) for this state
    res = g_arrow(werner(0.8), 1, OptBudget(restarts=16, iters=300, seed=4))
    assert abs(res.value - 0.5310044064107189) < 5e-3


def test_g_seed_stability():
    a = g_arrow(werner(0.8), 1, OptBudget(restarts=16, iters=300, seed=4))
    b = g_arrow(werner(0.8), 1, OptBudget(restarts=16, iters=300, seed=1234))
    assert abs(a.value - b.value) < 5e-3


def test_g_deterministic_and_monotone():
    rho = werner(0.8)
    a = g_arrow(rho, 1, FAST)
    b = g_arrow(rho, 1, FAST)
    assert a.value == b.value
    big = g_arrow(rho, 1, OptBudget(restarts=16, iters=200, seed=9))
    assert big.value <= a.value + 1e-15


def test_g_ensemble_reproduces_state():
    rho = werner(0.8)
    res = g_arrow(rho, 1, FAST)
    assert res.argument.max_deviation(rho) < 1e-8


def test_g_errors():
    with pytest.raises(ValueError, match="no such subsystem"):
        g_arrow(bell_dm(), 2, FAST)
    with pytest.raises(ValueError, match="empty budget"):
        g_arrow(bell_dm(), 1, OptBudget(restarts=0))


# ---------------------------------------------------------------------------
# separability verdicts
# ---------------------------------------------------------------------------

def test_ppt_bell_entangled():
    assert ppt_entangled(bell_dm(), [0]) == "entangled"


def test_ppt_product_separable():
    rng = np.random.default_rng(17)
    rho = tensor(_rand_dm(rng, 2, (2,)), _rand_dm(rng, 2, (2,)))
    assert ppt_entangled(rho, [0]) == "separable"


def test_ppt_werner_threshold():
    assert ppt_entangled(werner(1 / 3), [0]) == "separable"
    assert ppt_entangled(werner(0.34), [0]) == "entangled"
    assert ppt_entangled(werner(0.32), [0]) == "separable"


def test_ppt_2x3_decidable_2x4_not():
    rng = np.random.default_rng(18)
    r23 = tensor(_rand_dm(rng, 2, (2,)), _rand_dm(rng, 3, (3,)))
    assert ppt_entangled(r23, [0]) == "separable"
    r24 = tensor(_rand_dm(rng, 2, (2,)), _rand_dm(rng, 4, (4,)))
    assert ppt_entangled(r24, [0]) == "indeterminate"


def test_ppt_grouped_cut():
    rho = random_state((2, 2, 2), "rank-limited", seed=1, rank=2)
    assert ppt_entangled(rho, [0]) in ("entangled", "indeterminate")


# ---------------------------------------------------------------------------
# container invariants
# ---------------------------------------------------------------------------

def test_povm_validation():
    with pytest.raises(StateInvariantError, match="sum to identity"):
        Povm([np.eye(2) * 0.5], 0)
    with pytest.raises(StateInvariantError, match="not positive"):
        Povm([np.diag([1.5, 1.0]), np.diag([-0.5, 0.0])], 0)


def test_ensemble_validation():
    rho = bell_dm()
    with pytest.raises(StateInvariantError, match="sum to 1"):
        Ensemble([0.5, 0.4], [rho, rho])
    with pytest.raises(StateInvariantError, match="align"):
        Ensemble([1.0], [rho, rho])
    ens = Ensemble([0.5, 0.5], [rho, rho])
    assert ens.max_deviation(rho) < 1e-15
