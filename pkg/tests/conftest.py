"""Shared random-case generators for the randomized suites.

Two flavours of random piecewise potentials:

* ``random_multistep``        edges anywhere in I (bounds suites); pieces at
                              least 2% of L wide so the coarsest grid resolves
                              them;
* ``random_lattice_multistep`` edges on the 1/64 lattice (solver-vs-oracle
                              equivalence at 1e-6, where jump cells must not
                              add sampling noise on dyadically refined grids).
"""

import numpy as np

from gaplab import InverseSquareCapped, MultiStep, Step


def random_multistep(rng, L, min_width_frac=0.02, height_max=3.0):
    k = int(rng.integers(1, 5))
    half = 0.5 * L
    edges = None
    for _ in range(64):
        cand = np.sort(rng.uniform(-half, half, 2 * k))
        if np.all(cand[1::2] - cand[0::2] >= min_width_frac * L):
            edges = cand
            break
    pieces = []
    if edges is not None:
        for i in range(k):
            a, b = float(edges[2 * i]), float(edges[2 * i + 1])
            pieces.append(Step(float(rng.uniform(0.0, height_max)), (a, b)))
    if not pieces:
        pieces = [Step(float(rng.uniform(0.1, height_max)), (-0.25 * L, 0.25 * L))]
    return MultiStep(tuple(pieces)) if len(pieces) > 1 else pieces[0]


def random_lattice_multistep(rng, L, height_max=2.5, max_exponent=18.0):
    """Pieces with edges at multiples of 1/64 inside I (L must be an integer).

    ``max_exponent`` caps 4 L ||v||_1 so that inf(phi0) stays resolvable by
    the finite-difference eigenvector (its additive noise floor is about
    1e-16 of the peak).
    """
    assert L == int(L), "lattice alignment needs integer L"
    ticks = int(64 * L)
    k = int(rng.integers(1, 4))
    idx = np.sort(rng.choice(np.arange(1, ticks), size=2 * k, replace=False))
    half = 0.5 * L
    pieces = []
    budget = max_exponent / (4.0 * L)  # remaining l1 allowance
    for i in range(k):
        a = float(idx[2 * i]) / 64.0 - half
        b = float(idx[2 * i + 1]) / 64.0 - half
        if b - a <= 0:
            continue
        hmax = min(height_max, budget / (b - a))
        if hmax <= 0:
            break
        height = float(rng.uniform(0.1, max(0.2, hmax)))
        height = min(height, hmax)
        budget -= height * (b - a)
        pieces.append(Step(height, (a, b)))
    if not pieces:
        pieces = [Step(min(1.0, budget * 2.0 / L + 0.1), (-0.25 * L, 0.25 * L))]
    return MultiStep(tuple(pieces)) if len(pieces) > 1 else pieces[0]


def random_capped(rng, decay_range=(0.05, 5.0), cap_range=(0.5, 8.0)):
    return InverseSquareCapped(
        float(rng.uniform(*decay_range)), float(rng.uniform(*cap_range))
    )
