import contextlib
import io
import json
import os
import re

import numpy as np
import pytest

from entmono import cli
from entmono.kernels import _impl_py as PK
from entmono.qmat import DensityMatrix, PureState

FIXTURES = os.path.join(os.path.dirname(__file__), "..", "fixtures")

SQ2 = 1.0 / np.sqrt(2.0)


def bell_pure():
    return PureState(np.array([1, 0, 0, 1]) * SQ2, (2, 2))


def bell_dm():
    return bell_pure().density()


def ghz_pure():
    v = np.zeros(8)
    v[0] = v[7] = SQ2
    return PureState(v, (2, 2, 2))


def werner(p):
    return DensityMatrix(p * bell_dm().matrix + (1 - p) * np.eye(4) / 4, (2, 2))


def random_qubit(rng):
    z = rng.normal(size=2) + 1j * rng.normal(size=2)
    return z / np.linalg.norm(z)


def product_mixture(seed, members=6):
    """Random separable two-qubit state: mixture of pure product states."""
    rng = np.random.default_rng(seed)
    wts = rng.dirichlet(np.ones(members))
    m = np.zeros((4, 4), dtype=complex)
    for i in range(members):
        v = np.kron(random_qubit(rng), random_qubit(rng))
        m += wts[i] * np.outer(v, v.conj())
    return DensityMatrix(m, (2, 2))


def entangled_rank2(seed, cmin=0.3):
    from entmono.measures import concurrence_2q
    from entmono.qmat import random_state

    k = 0
    while True:
        st = random_state((2, 2), "rank-limited",
                          seed=PK.mix_seed(seed, 33, k) % (2**63), rank=2)
        if concurrence_2q(st) >= cmin:
            return st
        k += 1


def entangled_fullrank(seed, cmin=0.3):
    from entmono.measures import concurrence_2q

    k = 0
    while True:
        rng = np.random.default_rng(PK.mix_seed(seed, 44, k) % (2**63))
        z = rng.normal(size=4) + 1j * rng.normal(size=4)
        z /= np.linalg.norm(z)
        p = rng.uniform(0.6, 0.95)
        st = DensityMatrix(p * np.outer(z, z.conj()) + (1 - p) * np.eye(4) / 4, (2, 2))
        if concurrence_2q(st) >= cmin:
            return st
        k += 1


def state_seed(master, index):
    return PK.mix_seed(master, 7001 + index, 0) % (2**63)


def run_cli(argv):
    """Invoke the CLI in-process; returns (exit_code, stdout, stderr)."""
    out, err = io.StringIO(), io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
        code = cli.main(argv)
    return code, out.getvalue(), err.getvalue()


def run_cli_json(argv):
    code, out, err = run_cli(list(argv) + ["--format", "structured"])
    report = json.loads(out) if out.strip() else None
    return code, report, err


_WALL = re.compile(r'"wall_time_ms": [^,\n]+')


def strip_timing(text):
    return _WALL.sub('"wall_time_ms": X', text)


@pytest.fixture
def fixture_path():
    def get(name):
        return os.path.join(FIXTURES, name)

    return get
