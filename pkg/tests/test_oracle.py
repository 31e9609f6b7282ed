import json
import math
import pathlib

import numpy as np
import pytest

from gaplab import (
    Constant,
    InverseSquareCapped,
    MultiStep,
    Step,
    Zero,
    decompose,
    eigenvalues_exact,
    ground_state_profile,
    match_function,
    match_value,
    prufer_count,
    solve_extrapolated,
)
from conftest import random_lattice_multistep

PI_SQ = math.pi * math.pi
GOLDEN = json.loads(
    (pathlib.Path(__file__).parent / "golden" / "step_L10_eigenvalues.json").read_text()
)


def test_decompose_free_single_layer():
    lay = decompose(Zero(), 3.0)
    np.testing.assert_allclose(lay.breaks, [-1.5, 1.5])
    np.testing.assert_allclose(lay.values, [0.0])


def test_decompose_step_three_layers():
    lay = decompose(Step(1.0, (-0.5, 0.5)), 4.0)
    np.testing.assert_allclose(lay.breaks, [-2.0, -0.5, 0.5, 2.0])
    np.testing.assert_allclose(lay.values, [0.0, 1.0, 0.0])


def test_decompose_clips_to_interval():
    lay = decompose(Step(1.0, (-0.5, 3.0)), 4.0)
    np.testing.assert_allclose(lay.breaks, [-2.0, -0.5, 2.0])
    np.testing.assert_allclose(lay.values, [0.0, 1.0])


def test_decompose_merges_equal_layers():
    p = MultiStep((Step(1.0, (-1.0, 0.0)), Step(1.0, (0.0, 1.0))))
    lay = decompose(p, 4.0)
    np.testing.assert_allclose(lay.breaks, [-2.0, -1.0, 1.0, 2.0])
    np.testing.assert_allclose(lay.values, [0.0, 1.0, 0.0])


def test_decompose_rejects_capped():
    with pytest.raises(ValueError, match="piecewise"):
        decompose(InverseSquareCapped(1.0, 4.0), 2.0)


@pytest.mark.parametrize("L", [1.0, 3.0, 20.0])
def test_free_eigenvalues_exact(L):
    lam0, lam1 = eigenvalues_exact(decompose(Zero(), L), 2)
    assert abs(lam0) < 1e-12
    assert lam1 == pytest.approx(PI_SQ / L**2, rel=1e-12)


def test_constant_shift():
    c, L = 2.3, 4.0
    lam0, lam1 = eigenvalues_exact(decompose(Constant(c), L), 2)
    assert lam0 == pytest.approx(c, rel=1e-12)
    assert lam1 == pytest.approx(c + PI_SQ / L**2, rel=1e-12)


def test_match_function_free_closed_form():
    # D(lam) = -sqrt(lam) sin(sqrt(lam) L) for the free operator
    L = 2.0
    lay = decompose(Zero(), L)
    for lam in (0.3, 1.7, 5.0):
        expected = -math.sqrt(lam) * math.sin(math.sqrt(lam) * L)
        assert match_value(lay, lam) == pytest.approx(expected, rel=1e-12)


def test_match_sign_alternates_across_eigenvalues():
    lay = decompose(Step(1.0, (-0.5, 0.5)), 10.0)
    lam0, lam1 = eigenvalues_exact(lay, 2)
    f = match_function(lay)
    d = max(1e-7, 1e-7 * lam1)
    assert f(lam0 - d) > 0 > f(lam0 + d)
    assert f(lam1 - d) < 0 < f(lam1 + d)


def test_step_golden_values():
    lay = decompose(Step(1.0, (-0.5, 0.5)), 10.0)
    lam0, lam1 = eigenvalues_exact(lay, 2)
    assert lam0 == pytest.approx(GOLDEN["lambda0"], rel=1e-11)
    assert lam1 == pytest.approx(GOLDEN["lambda1"], rel=1e-11)


def test_fd_matches_golden_on_aligned_grid():
    r = solve_extrapolated(Step(1.0, (-0.5, 0.5)), 10.0, n0=640, levels=3)
    assert r.lambda0 == pytest.approx(GOLDEN["lambda0"], rel=1e-7)
    assert r.lambda1 == pytest.approx(GOLDEN["lambda1"], rel=1e-7)


def test_prufer_counts_free_interval():
    assert prufer_count(Zero(), 1.0, 5.0) == 1
    assert prufer_count(Zero(), 1.0, 50.0) == 3  # {0, pi^2, 4 pi^2} < 50
    assert prufer_count(Zero(), 1.0, -1.0) == 0


def test_prufer_monotone_and_unit_jumps():
    p = Step(1.0, (-0.5, 0.5))
    L = 10.0
    lam0, lam1 = eigenvalues_exact(decompose(p, L), 2)
    lams = np.linspace(-0.1, lam1 * 1.5, 60)
    counts = [prufer_count(p, L, float(x)) for x in lams]
    assert all(b >= a for a, b in zip(counts, counts[1:]))
    d = 1e-6 * max(1.0, lam1)
    assert prufer_count(p, L, lam0 - d) == 0
    assert prufer_count(p, L, lam0 + d) == 1
    assert prufer_count(p, L, lam1 - d) == 1
    assert prufer_count(p, L, lam1 + d) == 2


def test_prufer_counts_capped_potential():
    p = InverseSquareCapped(1.0, 4.0)
    L = 8.0
    r = solve_extrapolated(p, L, n0=512, levels=3)
    gap = r.gap
    assert prufer_count(p, L, r.lambda0 - 0.5 * gap) == 0
    assert prufer_count(p, L, 0.5 * (r.lambda0 + r.lambda1)) == 1
    assert prufer_count(p, L, r.lambda1 + 0.5 * gap) >= 2


def test_prufer_rejects_huge_lambda():
    with pytest.raises(ValueError, match="underflow"):
        prufer_count(Zero(), 1.0, 2e12)


def test_profile_free_is_flat():
    prof = ground_state_profile(Zero(), 3.0, 0.0)
    assert prof.ratio == pytest.approx(1.0, abs=1e-12)
    assert prof.values[0] == 1.0
    np.testing.assert_allclose(prof.values, 1.0, rtol=1e-12)


def test_profile_constant_shift_invariance():
    prof = ground_state_profile(Constant(2.0), 3.0, 2.0)
    assert prof.ratio == pytest.approx(1.0, abs=1e-10)


def test_profile_step_matches_fd_ratio():
    p = Step(1.0, (-0.5, 0.5))
    L = 10.0
    lam0, _ = eigenvalues_exact(decompose(p, L), 2)
    prof = ground_state_profile(p, L, lam0, samples=4097)
    assert math.exp(-4.0 * L * 1.0) < prof.ratio < 1.0
    r = solve_extrapolated(p, L, n0=640, levels=3)
    fd_ratio = r.inf_phi0 / r.sup_phi0
    assert prof.ratio == pytest.approx(fd_ratio, rel=1e-4)


def test_profile_capped_matches_fd_ratio():
    p = InverseSquareCapped(1.0, 4.0)
    L = 8.0
    r = solve_extrapolated(p, L, n0=1024, levels=3)
    prof = ground_state_profile(p, L, r.lambda0, samples=4097)
    assert prof.ratio == pytest.approx(r.inf_phi0 / r.sup_phi0, rel=1e-4)


def test_profile_renormalization_guard():
    # a barrier against the left end makes the left-Neumann solution grow by
    # ~exp(40) before reaching the free region; the 1e15 guard must rescale,
    # keeping samples finite and bounded while the ratio stays meaningful
    p = Step(4.0, (-30.0, -10.0))
    L = 60.0
    lam0, _ = eigenvalues_exact(decompose(p, L), 2)
    prof = ground_state_profile(p, L, lam0, samples=1025)
    assert np.all(np.isfinite(prof.values))
    assert 0.0 < prof.ratio <= 1.0
    assert prof.max_abs < 1e16  # unrescaled growth would reach ~2e17


def test_profile_detuned_lambda_stays_finite():
    # a wrong eigenvalue guess must not crash the integrator
    prof = ground_state_profile(Step(2.0, (-0.5, 0.5)), 60.0, 0.9, samples=513)
    assert np.all(np.isfinite(prof.values))
    assert 0.0 < prof.ratio <= 1.0


def test_match_value_renormalization_guard():
    # hyperbolic growth through a wide tall barrier passes 1e50; the rescale
    # keeps D finite with its sign structure intact
    lay = decompose(Step(9.0, (-25.0, 15.0)), 60.0)
    assert math.isfinite(match_value(lay, 0.1))
    lam0, lam1 = eigenvalues_exact(lay, 2)
    assert 0.0 < lam0 < lam1
    f = match_function(lay)
    d = 1e-9 * max(1.0, lam1)
    assert f(lam0 - d) > 0 > f(lam0 + d)


def test_profile_multistep_matches_fd_ratio():
    p = MultiStep((Step(1.2, (-3.0, -1.5)), Step(0.7, (0.5, 2.0))))
    L = 8.0
    lam0, _ = eigenvalues_exact(decompose(p, L), 2)
    prof = ground_state_profile(p, L, lam0, samples=4097)
    r = solve_extrapolated(p, L, n0=1024, levels=3)
    assert prof.ratio == pytest.approx(r.inf_phi0 / r.sup_phi0, rel=1e-4)


def test_profile_input_validation():
    with pytest.raises(ValueError):
        ground_state_profile(Zero(), -1.0, 0.0)
    with pytest.raises(ValueError):
        ground_state_profile(Zero(), 1.0, 0.0, samples=4)


def test_eigenvalues_exact_rejects_higher_counts():
    with pytest.raises(ValueError):
        eigenvalues_exact(decompose(Zero(), 1.0), 3)


def test_cross_method_agreement_quick():
    rng = np.random.default_rng(99)
    for L in (1.0, 5.0, 20.0):
        p = random_lattice_multistep(rng, L)
        lay = decompose(p, L)
        ex0, ex1 = eigenvalues_exact(lay, 2)
        n0 = int(64 * L * max(1, math.ceil(256 / (64 * L))))
        r = solve_extrapolated(p, L, n0=n0, levels=3)
        scale = max(abs(ex1), PI_SQ / L**2)
        assert abs(r.lambda0 - ex0) / scale < 1e-6
        assert abs(r.lambda1 - ex1) / scale < 1e-6


def test_near_degenerate_pair_large_interval():
    # at L = 200 the unit step's gap has closed to ~8e-6 while both
    # eigenvalues sit near pi^2/L^2; the two routes must still agree on the
    # tiny difference
    p = Step(1.0, (-0.5, 0.5))
    L = 200.0
    ex0, ex1 = eigenvalues_exact(decompose(p, L), 2)
    gap_exact = ex1 - ex0
    assert 0.0 < gap_exact < 2e-5
    r = solve_extrapolated(p, L, n0=12800, levels=3)
    assert r.gap == pytest.approx(gap_exact, rel=1e-4)
    # each eigenvalue individually is limited by the bisection floor (~1e-12
    # absolute per level), far below the gap scale
    assert r.lambda0 == pytest.approx(ex0, rel=1e-7, abs=1e-11)
