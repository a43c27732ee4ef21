#!/usr/bin/env python3
"""Regenerate the fixture state files in this directory.

Run from the repository root after an editable install:

    python3 fixtures/make_fixtures.py
"""

import os
import sys

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from entmono.extension import SeparableDecomposition  # noqa: E402
from entmono.qmat import DensityMatrix, PureState  # noqa: E402
from entmono.statefile import save_state  # noqa: E402

HERE = os.path.dirname(os.path.abspath(__file__))

SQ2 = 1.0 / np.sqrt(2.0)

KET0 = PureState([1, 0], (2,))
KET1 = PureState([0, 1], (2,))
PLUS = PureState([SQ2, SQ2], (2,))
MINUS = PureState([SQ2, -SQ2], (2,))
PLUS_I = PureState([SQ2, SQ2 * 1j], (2,))
MINUS_I = PureState([SQ2, -SQ2 * 1j], (2,))
TILT = PureState([np.cos(0.3), np.sin(0.3)], (2,))


def _mixture(decomp):
    return decomp.target()


def main():
    out = lambda name: os.path.join(HERE, name)

    bell = PureState(np.array([1, 0, 0, 1]) * SQ2, (2, 2))
    save_state(out("bell.json"), bell)

    ghz = PureState(np.array([1, 0, 0, 0, 0, 0, 0, 1]) * SQ2, (2, 2, 2))
    save_state(out("ghz.json"), ghz)

    p = 0.8
    bell_m = np.outer(bell.amplitudes, bell.amplitudes.conj())
    werner = DensityMatrix(p * bell_m + (1 - p) * np.eye(4) / 4, (2, 2))
    save_state(out("werner_p08.json"), werner)

    # five separable states with explicit product decompositions
    classical = SeparableDecomposition([0.5, 0.5], [KET0, KET1], [KET0, KET1])
    save_state(out("classical_corr.json"), _mixture(classical), classical)

    product = SeparableDecomposition([0.25, 0.75], [PLUS, PLUS], [KET0, KET1])
    save_state(out("product.json"), _mixture(product), product)

    maxmix = SeparableDecomposition(
        [0.25, 0.25, 0.25, 0.25],
        [KET0, KET0, KET1, KET1],
        [KET0, KET1, KET0, KET1],
    )
    save_state(out("maxmix.json"), _mixture(maxmix), maxmix)

    tetra = SeparableDecomposition(
        [0.4, 0.3, 0.2, 0.1],
        [KET0, PLUS, KET1, MINUS],
        [KET0, KET1, PLUS, MINUS_I],
    )
    save_state(out("sep_tetra.json"), _mixture(tetra), tetra)

    skew = SeparableDecomposition(
        [0.25, 0.2, 0.2, 0.15, 0.1, 0.1],
        [KET0, KET1, PLUS, MINUS, PLUS_I, TILT],
        [TILT, PLUS, MINUS_I, KET0, KET1, MINUS],
    )
    save_state(out("sep_skew.json"), _mixture(skew), skew)

    print("fixtures written to", HERE)


if __name__ == "__main__":
    main()
