# pylint: disable=missing-function-docstring,missing-module-docstring

import math
from fractions import Fraction

import numpy as np
import pytest

from conftest import THETA_DEWET, perturbed_semicircle, semicircle

import dewet_pfem
from dewet_pfem import PolygonalCurve, SchemeParams, scheme_type
from dewet_pfem.curve import discrete_energy, enclosed_area
from dewet_pfem.metrics import manifold_distance
from dewet_pfem.schemes import (
    BDF2Stepper,
    CurveHistory,
    PCStepper,
    ZJBStepper,
    bdf_coefficients,
    bdf_step,
    bootstrap,
    bootstrap_substeps,
    equilibrium_residual,
    initial_curvature,
    make_stepper,
    pc_step,
    zjb_step,
)


@pytest.mark.parametrize('k', [1, 2, 3, 4])
def test_bdf_coefficients_are_consistent(k):
    a, weights = bdf_coefficients(k)
    assert len(weights) == k
    assert a - sum(weights) == 0


@pytest.mark.parametrize('k', [1, 2, 3, 4])
def test_bdf_stencil_is_exact_on_polynomials(k):
    # a p(0) - sum_p w_p p(-(p+1)) = p'(0) for every polynomial of degree <= k
    a, weights = bdf_coefficients(k)
    for degree in range(k + 1):
        value = a * (1 if degree == 0 else 0)
        value -= sum(w * Fraction(-(p + 1)) ** degree for p, w in enumerate(weights))
        assert value == (1 if degree == 1 else 0)


def test_bdf_coefficients_out_of_range():
    with pytest.raises(dewet_pfem.ParameterError):
        bdf_coefficients(5)


def test_scheme_params():
    params = SchemeParams.from_degrees(0.01, 150.0)
    assert params.sigma == pytest.approx(math.cos(5.0 * math.pi / 6.0))
    assert params.eta == 100.0
    half = params.with_tau(0.005)
    assert half.tau == 0.005 and half.sigma == params.sigma
    with pytest.raises(dewet_pfem.ParameterError):
        SchemeParams(tau=0.0, theta_young=1.0)
    with pytest.raises(dewet_pfem.ParameterError):
        SchemeParams(tau=0.1, theta_young=math.pi)
    with pytest.raises(dewet_pfem.ParameterError):
        SchemeParams(tau=0.1, theta_young=1.0, eta=-1.0)


def test_history_extrapolation(square):
    history = CurveHistory(3)
    with pytest.raises(dewet_pfem.HistoryError):
        history.extrapolate(2)
    for _ in range(4):
        history.push(square)
    assert history.depth == 3

    a, x_hat = history.extrapolate(3)
    assert a == pytest.approx(11.0 / 6.0)
    assert np.allclose(x_hat, a * square.nodes)


def test_history_extrapolates_linear_motion(square):
    history = CurveHistory(2)
    history.push(square)
    history.push(square.translated(1.0))
    a, x_hat = history.extrapolate(2)
    # 2 X^m - X^{m-1}/2 for a uniform translation
    assert np.allclose(x_hat[:, 0] / a, square.x + 1.0 + 1.0 / 3.0)


def test_history_rejects_mixed_resolution(square, semicircle_64):
    history = CurveHistory(2, curves=[square])
    with pytest.raises(dewet_pfem.HistoryError):
        history.push(semicircle_64)


def test_initial_curvature_of_a_circle(semicircle_64):
    kappa = initial_curvature(semicircle_64)
    assert kappa.shape == (65,)
    assert np.allclose(kappa, 1.0, atol=1e-3)


def test_initial_curvature_scales_with_radius():
    kappa = initial_curvature(semicircle(64, radius=2.0))
    assert np.allclose(kappa, 0.5, atol=1e-3)


def test_initial_curvature_of_flat_chord(flat_chord, caplog):
    with caplog.at_level('WARNING', logger='dewet_pfem.schemes'):
        kappa = initial_curvature(flat_chord)
    assert np.all(kappa == 0.0)
    assert 'end segment horizontal' in caplog.text


def test_initial_curvature_rank_deficient():
    folded = PolygonalCurve([(0.0, 0.0), (0.0, 1.0), (1.0, 1.0), (0.0, 1.0), (0.5, 0.0)])
    with pytest.raises(dewet_pfem.RankDeficientError):
        initial_curvature(folded)


def test_zjb_step_dissipates_energy(semi_ellipse_32, dewet_params):
    curve, kappa = zjb_step(semi_ellipse_32, dewet_params)
    assert curve.N == 32
    assert kappa.shape == (33,)
    sigma = dewet_params.sigma
    assert discrete_energy(curve, sigma) <= discrete_energy(semi_ellipse_32, sigma) + 1e-12


def test_pc_and_bdf_steps_move_the_curve(semi_ellipse_32, dewet_params):
    area0 = enclosed_area(semi_ellipse_32)
    pc_curve, pc_kappa = pc_step(semi_ellipse_32, initial_curvature(semi_ellipse_32),
                                 dewet_params)
    history = bootstrap(semi_ellipse_32, 2, dewet_params)
    bdf_curve, _ = bdf_step(history, 2, dewet_params)

    for curve in (pc_curve, bdf_curve):
        assert curve.N == 32
        assert curve.y[0] == 0.0 and curve.y[-1] == 0.0
        assert manifold_distance(curve, semi_ellipse_32) > 0.0
        assert abs(enclosed_area(curve) - area0) < 0.1 * area0
    assert np.all(np.isfinite(pc_kappa))


def test_bdf_step_needs_history(semi_ellipse_32, dewet_params):
    history = CurveHistory(3, curves=[semi_ellipse_32])
    with pytest.raises(dewet_pfem.HistoryError):
        bdf_step(history, 3, dewet_params)
    with pytest.raises(dewet_pfem.ParameterError):
        bdf_step(history, 5, dewet_params)


def test_bootstrap_substeps():
    assert bootstrap_substeps(0.01, 2) == 1
    assert bootstrap_substeps(0.01, 3) == 1
    assert bootstrap_substeps(1.0 / 320.0, 4) == 7


@pytest.mark.parametrize('k', [2, 3, 4])
def test_bootstrap_fills_history(semi_ellipse_32, dewet_params, k):
    history = bootstrap(semi_ellipse_32, k, dewet_params)
    assert history.depth == k
    assert history.curves[0] == semi_ellipse_32
    assert all(kappa is not None for kappa in history.kappas)


def test_bootstrap_order_domain(semi_ellipse_32, dewet_params):
    with pytest.raises(dewet_pfem.ParameterError):
        bootstrap(semi_ellipse_32, 1, dewet_params)


def test_equilibrium_residual(flat_chord):
    kappa = np.zeros(4)
    assert equilibrium_residual(flat_chord, kappa, 1.0) == pytest.approx(0.0, abs=1e-15)
    assert equilibrium_residual(flat_chord, kappa, 0.0) == pytest.approx(1.0)


def test_make_stepper(semi_ellipse_32, dewet_params):
    for scheme, stepper_class in ((scheme_type.ZJB, ZJBStepper), (scheme_type.PC, PCStepper),
                                  (scheme_type.BDF2, BDF2Stepper)):
        stepper = make_stepper(scheme, semi_ellipse_32, dewet_params)
        assert isinstance(stepper, stepper_class)
        assert stepper.scheme == scheme
        assert stepper.order == scheme_type.ORDER[scheme]
    with pytest.raises(dewet_pfem.ParameterError):
        make_stepper('rk4', semi_ellipse_32, dewet_params)


def test_stepper_iteration(semi_ellipse_32, dewet_params):
    stepper = make_stepper(scheme_type.ZJB, semi_ellipse_32, dewet_params)
    assert stepper.kappa is None
    curves = [next(stepper) for _ in range(3)]
    assert stepper.step_index == 3
    assert stepper.time == pytest.approx(0.03)
    assert stepper.curve is curves[-1]
    assert stepper.kappa.shape == (33,)


def test_pc_stepper_starts_from_least_squares_curvature(semi_ellipse_32, dewet_params):
    stepper = make_stepper(scheme_type.PC, semi_ellipse_32, dewet_params)
    assert np.allclose(stepper.kappa, initial_curvature(semi_ellipse_32))


def test_bdf_stepper_replays_bootstrap(semi_ellipse_32, dewet_params):
    stepper = make_stepper(scheme_type.BDF3, semi_ellipse_32, dewet_params)
    history = bootstrap(semi_ellipse_32, 3, dewet_params)
    assert stepper.step() == history.curves[1]
    assert stepper.step() == history.curves[2]
    third = stepper.step()
    assert third == bdf_step(history, 3, dewet_params)[0]
    assert stepper.history.latest is third


def test_stepper_rejects_bad_initial_curves(flat_chord, triangle, dewet_params):
    with pytest.raises(dewet_pfem.WellPosednessError):
        make_stepper(scheme_type.ZJB, flat_chord, dewet_params)
    with pytest.raises(dewet_pfem.ParameterError):
        make_stepper(scheme_type.ZJB, triangle, dewet_params)


def test_step_failure_message():
    exc = dewet_pfem.StepFailure("singular", step=12, phase='corrector')
    assert str(exc) == "step 12: [corrector] singular"
    assert exc.reason == "singular"
    assert isinstance(exc, dewet_pfem.SchemeError)


SHIFT = 0.75


def _assert_shifted(result, shifted_result, shift=SHIFT):
    curve, kappa = result
    shifted_curve, shifted_kappa = shifted_result
    assert np.allclose(shifted_curve.nodes, curve.translated(shift).nodes, rtol=0.0, atol=1e-9)
    assert np.allclose(shifted_kappa, kappa, rtol=0.0, atol=1e-7)


def test_zjb_step_commutes_with_horizontal_shift(semi_ellipse_32, dewet_params):
    _assert_shifted(zjb_step(semi_ellipse_32, dewet_params),
                    zjb_step(semi_ellipse_32.translated(SHIFT), dewet_params))


def test_pc_step_commutes_with_horizontal_shift(semi_ellipse_32, dewet_params):
    kappa = initial_curvature(semi_ellipse_32)
    _assert_shifted(pc_step(semi_ellipse_32, kappa, dewet_params),
                    pc_step(semi_ellipse_32.translated(SHIFT), kappa, dewet_params))


@pytest.mark.parametrize('k', [2, 3])
def test_bdf_step_commutes_with_horizontal_shift(semi_ellipse_32, dewet_params, k):
    history = bootstrap(semi_ellipse_32, k, dewet_params)
    shifted = CurveHistory(k, curves=[curve.translated(SHIFT) for curve in history.curves],
                           kappas=history.kappas)
    _assert_shifted(bdf_step(history, k, dewet_params), bdf_step(shifted, k, dewet_params))


def test_zjb_step_keeps_symmetric_curves_symmetric(semi_ellipse_32):
    params = SchemeParams(0.01, math.pi / 2)
    assert params.sigma == pytest.approx(0.0, abs=1e-15)
    curve = semi_ellipse_32
    for _ in range(5):
        curve, kappa = zjb_step(curve, params)
        assert np.allclose(curve.nodes, curve.reflected().nodes, rtol=0.0, atol=1e-9)
        assert np.allclose(kappa, kappa[::-1], rtol=0.0, atol=1e-7)


def test_zjb_step_commutes_with_reflection(rng):
    params = SchemeParams(0.01, math.pi / 2)
    curve = perturbed_semicircle(rng, 16)
    new_curve, kappa = zjb_step(curve, params)
    mirrored_curve, mirrored_kappa = zjb_step(curve.reflected(), params)
    assert np.allclose(mirrored_curve.nodes, new_curve.reflected().nodes, rtol=0.0, atol=1e-9)
    assert np.allclose(mirrored_kappa, kappa[::-1], rtol=0.0, atol=1e-7)


def test_pc_and_zjb_differ_at_second_order():
    curve = semicircle(8)
    distances = []
    for tau in (1e-4, 5e-5, 2.5e-5):
        params = SchemeParams(tau, 2.0 * math.pi / 3.0)
        pc_curve, _ = pc_step(curve, initial_curvature(curve), params)
        zjb_curve, _ = zjb_step(curve, params)
        distances.append(float(np.max(np.abs(pc_curve.nodes - zjb_curve.nodes))))
    for coarse, fine in zip(distances, distances[1:]):
        assert 3.0 <= coarse / fine <= 5.0, distances


def test_initial_curvature_of_a_fine_circle():
    assert np.allclose(initial_curvature(semicircle(256)), 1.0, rtol=0.0, atol=1e-3)


def test_initial_curvature_scaling_law(semi_ellipse_32):
    kappa = initial_curvature(semi_ellipse_32)
    assert np.allclose(initial_curvature(semi_ellipse_32.scaled(2.0)), 0.5 * kappa,
                       rtol=1e-8, atol=0.0)


def test_steps_follow_the_surface_diffusion_scaling(semi_ellipse_32):
    # x -> s x, t -> s^4 t, kappa -> kappa / s, eta -> eta / s^3
    s = 2.0
    params = SchemeParams(0.01, THETA_DEWET)
    scaled_params = SchemeParams(0.01 * s ** 4, THETA_DEWET, eta=params.eta / s ** 3)
    scaled = semi_ellipse_32.scaled(s)

    curve, kappa = zjb_step(semi_ellipse_32, params)
    scaled_curve, scaled_kappa = zjb_step(scaled, scaled_params)
    assert np.allclose(scaled_curve.nodes, s * curve.nodes, rtol=1e-8, atol=1e-12)
    assert np.allclose(scaled_kappa, kappa / s, rtol=1e-8, atol=1e-12)

    kappa0 = initial_curvature(semi_ellipse_32)
    curve, kappa = pc_step(semi_ellipse_32, kappa0, params)
    scaled_curve, scaled_kappa = pc_step(scaled, kappa0 / s, scaled_params)
    assert np.allclose(scaled_curve.nodes, s * curve.nodes, rtol=1e-8, atol=1e-12)
    assert np.allclose(scaled_kappa, kappa / s, rtol=1e-8, atol=1e-12)


def test_bootstrap_substeps_follow_the_starter_order():
    assert bootstrap_substeps(1.0 / 320.0, 4, order_used=3) == 1
    assert bootstrap_substeps(1.0 / 320.0, 3, order_used=2) == 1
    assert bootstrap_substeps(0.01, 4, order_used=1) == 100
    with pytest.raises(dewet_pfem.ParameterError):
        bootstrap_substeps(0.01, 3, order_used=0)


def test_bootstrap_history_matches_substepped_starters(semi_ellipse_32):
    params = SchemeParams(1.0 / 320.0, THETA_DEWET)
    history = bootstrap(semi_ellipse_32, 4, params)
    fine = params.with_tau(params.tau / 7)
    curve, kappa = semi_ellipse_32, initial_curvature(semi_ellipse_32)
    for _ in range(7):
        curve, kappa = pc_step(curve, kappa, fine)
    assert history.curves[1] == curve
    assert np.array_equal(history.kappas[1], kappa)


def test_pc_stepper_averages_curvature_for_the_residual(semi_ellipse_32, dewet_params):
    stepper = make_stepper(scheme_type.PC, semi_ellipse_32, dewet_params)
    assert stepper.equilibrium_kappa is stepper.kappa
    kappa0 = stepper.kappa
    stepper.step()
    assert np.allclose(stepper.equilibrium_kappa, 0.5 * (kappa0 + stepper.kappa))
    zjb = make_stepper(scheme_type.ZJB, semi_ellipse_32, dewet_params)
    zjb.step()
    assert zjb.equilibrium_kappa is zjb.kappa


def test_pc_fixed_point_balances_with_averaged_curvature():
    # a regular polygon is a discrete equilibrium at theta = pi/2
    curve = semicircle(16)
    params = SchemeParams(0.01, math.pi / 2)
    stepper = make_stepper(scheme_type.PC, curve, params)
    for _ in range(4):
        stepper.step()
    assert equilibrium_residual(stepper.curve, stepper.equilibrium_kappa, params.sigma) < 1e-8


def test_every_library_error_shares_one_root():
    errors = [obj for obj in vars(dewet_pfem.exceptions).values()
              if isinstance(obj, type) and issubclass(obj, Exception)]
    assert len(errors) > 10
    assert all(issubclass(error, dewet_pfem.Error) for error in errors)
    assert 'DB-API' not in dewet_pfem.exceptions.__doc__
