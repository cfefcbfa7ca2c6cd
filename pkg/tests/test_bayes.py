import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad, trapezoid
from scipy.special import eval_legendre

from fockphase.analysis import likelihood
from fockphase.bayes import (LikelihoodSpec, PhaseDistribution, asymptotic_likelihood,
                             bayes_update, local_maxima, phase_mean, phase_std,
                             posterior_from_record, raise_to_n, uniform_prior)
from fockphase.condprob import CondProbTable, PhiGrid, table_for
from fockphase.errors import ModelContradictionError
from fockphase.fileio import read_csv
from fockphase.state import StatePrep

GRID = PhiGrid()
SMALL = PhiGrid(257)


def legendre_std(J, n):
    """std of P_J(cos phi)^(2n) on [-pi/2, pi/2] by adaptive quadrature."""
    f = lambda p: eval_legendre(J, math.cos(p)) ** (2 * n)
    z = quad(f, -math.pi / 2, math.pi / 2, limit=400, points=[0])[0]
    m2 = quad(lambda p: p * p * f(p), -math.pi / 2, math.pi / 2, limit=400, points=[0])[0]
    return math.sqrt(m2 / z)


def test_uniform_prior_moments():
    p = uniform_prior(GRID)
    assert np.allclose(p.density, 1 / math.pi, rtol=1e-12)
    assert p.integral() == pytest.approx(1, abs=1e-12)
    assert phase_std(p) == pytest.approx(math.pi / math.sqrt(12), rel=1e-6)


def test_update_with_m0_peaks_at_zero():
    post = bayes_update(uniform_prior(GRID), 0, table_for(StatePrep(10), GRID))
    assert post.argmax() == 0.0


def test_central_width_scales_as_inverse_j():
    # the peak width is O(1/J); the std is dominated by the 1/phi^2 tails instead
    from fockphase.condprob import central_fwhm
    widths = [J * central_fwhm(table_for(StatePrep(J), GRID)) for J in (10, 20, 40)]
    assert max(widths) / min(widths) < 1.1


def test_flat_table_leaves_prior_unchanged():
    flat = CondProbTable(SMALL, 1, np.full((3, SMALL.count), 1 / 3))
    prior = uniform_prior(SMALL)
    assert np.allclose(bayes_update(prior, 1, flat).density, prior.density, rtol=1e-14)


def test_impossible_outcome_raises():
    with pytest.raises(ModelContradictionError):
        bayes_update(uniform_prior(SMALL), 5, table_for(StatePrep(3), SMALL))


def test_grid_mismatch_rejected():
    with pytest.raises(ValueError):
        bayes_update(uniform_prior(SMALL), 0, table_for(StatePrep(3), PhiGrid(129)))
    with pytest.raises(ValueError):
        LikelihoodSpec(table_for(StatePrep(3), SMALL), table_for(StatePrep(3), PhiGrid(129)))


def test_sequential_equals_product():
    t = table_for(StatePrep(10, 0, 1), SMALL)
    two = bayes_update(bayes_update(uniform_prior(SMALL), 1, t), -2, t)
    direct = PhaseDistribution.from_unnormalized(SMALL, t.row(1) * t.row(-2))
    assert np.abs(two.density - direct.density).max() < 1e-12


@settings(max_examples=25, deadline=None)
@given(record=st.lists(st.integers(-3, 3), min_size=1, max_size=12), data=st.data())
def test_order_invariance(record, data):
    t = table_for(StatePrep(10, 0, 1), SMALL)
    shuffled = data.draw(st.permutations(record))
    a = b = uniform_prior(SMALL)
    for m in record:
        a = bayes_update(a, m, t)
    for m in shuffled:
        b = bayes_update(b, m, t)
    assert np.abs(a.density - b.density).max() < 1e-12 * max(1.0, a.density.max())
    assert a.integral() == pytest.approx(1, abs=1e-9)
    one_pass = posterior_from_record(record, t)
    assert np.abs(a.density - one_pass.density).max() < 1e-10 * max(1.0, a.density.max())


@pytest.mark.parametrize("J", [10, 20])
def test_pure_likelihood_is_legendre_power(J):
    # matched pure case: F = P_J(cos phi)^2
    F = likelihood(StatePrep(J), grid=GRID)
    ref = eval_legendre(J, np.cos(GRID.points)) ** 2
    ref /= trapezoid(ref, GRID.points)
    assert np.abs(F.density - ref).max() < 1e-9


def test_zero_log_zero_convention():
    # truth places no weight on rows where the model vanishes: F stays finite
    F = likelihood(StatePrep(10), StatePrep(10, 0, 1), grid=SMALL)
    assert np.isfinite(F.density).all() and F.density.max() > 0


def test_impossible_under_model_gives_exact_zero():
    # narrower model than truth: outcomes |m| >= 1 are impossible at phi = 0 for a pure model
    F = likelihood(StatePrep(10, 0, 1), StatePrep(10), theta=0.0, grid=GRID)
    assert F.density[GRID.nearest_index(0.0)] == 0.0
    assert (F.density >= 0).all()


@pytest.mark.parametrize("prep", [StatePrep(10), StatePrep(10, 0, 1)])
def test_matched_argmax_at_zero(prep):
    assert likelihood(prep, grid=GRID).argmax() == 0.0


@pytest.mark.parametrize("theta", [0.1, 0.3])
@pytest.mark.parametrize("prep", [StatePrep(10), StatePrep(10, 0, 1)])
def test_matched_true_phase_attains_maximum(prep, theta):
    F = likelihood(prep, theta=theta, grid=GRID)
    k = GRID.nearest_index(theta)
    assert F.density[k] >= F.density.max() * (1 - 1e-9)
    # symmetric inputs cannot tell theta from -theta
    assert F.density[GRID.nearest_index(-theta)] == pytest.approx(F.density[k], rel=1e-9)


@pytest.mark.xfail(strict=True, reason="F(phi|theta) is even in phi for m-symmetric states, "
                   "so the first global maximum on the grid is at -theta")
@pytest.mark.parametrize("theta", [0.1, 0.3])
def test_matched_argmax_literally_at_theta(theta):
    F = likelihood(StatePrep(10, 0, 1), theta=theta, grid=GRID)
    assert F.argmax() == GRID.points[GRID.nearest_index(theta)]


def test_mismatch_shapes():
    bi = likelihood(StatePrep(20, 0, 2), StatePrep(20, 0, 1), grid=GRID)
    peaks = local_maxima(bi)
    assert len(peaks) >= 2 and bi.argmax() != 0.0
    c = GRID.nearest_index(0.0)
    assert bi.density[c] < bi.density[c - 1] and bi.density[c] < bi.density[c + 1]
    broad = likelihood(StatePrep(20, 0, 2), StatePrep(20, 0, 3), grid=GRID)
    matched = likelihood(StatePrep(20, 0, 2), grid=GRID)
    assert len(local_maxima(broad)) == 1 and broad.argmax() == 0.0
    assert phase_std(broad) > phase_std(matched)


def test_raise_to_n_basics():
    F = likelihood(StatePrep(10), grid=GRID)
    assert raise_to_n(F, 1) is F
    u = uniform_prior(GRID)
    assert np.allclose(raise_to_n(u, 7).density, u.density, rtol=1e-12)
    with pytest.raises(ValueError):
        raise_to_n(F, 0)


@pytest.mark.parametrize("J,n", [(10, 1), (10, 5), (20, 5), (10, 20)])
def test_phase_std_matches_quadrature(J, n):
    F = raise_to_n(likelihood(StatePrep(J), grid=GRID), n)
    assert phase_std(F) == pytest.approx(legendre_std(J, n), rel=1e-4)


def test_heisenberg_scale_at_n5():
    F = raise_to_n(likelihood(StatePrep(10), grid=GRID), 5)
    assert math.sqrt(5) * phase_std(F) == pytest.approx(0.1, rel=0.10)


def test_std_shrink_from_n5_to_n20():
    F = likelihood(StatePrep(10), grid=GRID)
    ratio = phase_std(raise_to_n(F, 20)) / phase_std(raise_to_n(F, 5))
    assert ratio == pytest.approx(0.5, rel=0.10)


@pytest.mark.xfail(strict=True, reason="F = P_J(cos phi)^2 has 1/phi^2 tails, so std(F) at n=1 "
                   "is far from the Gaussian limit")
def test_std_shrink_from_n1_to_n5():
    F = likelihood(StatePrep(10), grid=GRID)
    ratio = phase_std(raise_to_n(F, 5)) / phase_std(F)
    assert ratio == pytest.approx(1 / math.sqrt(5), rel=0.10)


def test_symmetric_mean_zero():
    F = likelihood(StatePrep(10, 0, 1), grid=GRID)
    assert abs(phase_mean(F)) < 1e-12


def test_local_maxima_floor():
    y = np.array([0, 1, 0, 1e-5, 0, 0.5, 0.0])
    d = PhaseDistribution.from_unnormalized(PhiGrid(7), y)
    assert local_maxima(d).tolist() == [1, 5]


def test_no_support_raises():
    with pytest.raises(ModelContradictionError):
        PhaseDistribution.from_unnormalized(SMALL, np.zeros(SMALL.count))
    with pytest.raises(ModelContradictionError):
        PhaseDistribution.from_log(SMALL, np.full(SMALL.count, -np.inf))


def test_distribution_csv(tmp_path):
    d = uniform_prior(SMALL)
    meta, header, data = read_csv(d.to_csv(tmp_path / "d.csv", note="x"))
    assert header == ["phi", "density"] and meta["note"] == "x"
    assert np.array_equal(data[:, 1], d.density)
