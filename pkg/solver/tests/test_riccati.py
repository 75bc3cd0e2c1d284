"""Primal and dual Riccati integration against the constant-coefficient closed forms."""

import math

import numpy as np
import pytest

from riccati_spectrum.core.exceptions import DomainError, FloorReached, TimeOutOfRange
from riccati_spectrum.schemas.common import Equation, Representation
from riccati_spectrum.schemas.riccati import TerminationKind
from riccati_spectrum.services import riccati_service as rs
from riccati_spectrum.services.reference_systems import example8_T2

BLOWUP_TOL = 1e-8
REL_TOL = 1e-8


def _const(v):
    return lambda t: v


class TestRightHandSides:
    def test_primal_at_zero_is_minus_H11(self, diagonal, example8_frozen):
        assert rs.primal_rhs(diagonal, 7.0, 0.4, 0.0) == pytest.approx(-1.0)
        assert rs.primal_rhs(example8_frozen, 7.0, 0.4, 0.0) == pytest.approx(-3.0)

    def test_dual_diagonal(self, diagonal):
        assert rs.dual_rhs(diagonal, 2.0, 0.3, -1.0) == pytest.approx(2.0)

    def test_dual_at_zero_is_q(self, example8, example8_T1):
        assert rs.dual_rhs(example8, 3.0, example8_T1, 0.0) == pytest.approx(1.0, abs=1e-12)
        red = example8.reduced
        for t in (0.0, 0.5 * example8_T1, example8.T):
            assert rs.dual_rhs(example8, 3.0, t, 0.0) == pytest.approx(red.q(3.0, t))

    def test_dual_on_ramp(self, example8, example8_T1):
        t, kt = 0.5 * example8_T1, -0.2
        expected = kt + 3.0 * kt**2 + 30.0 * (t - example8_T1) + 1.0
        assert rs.dual_rhs(example8, 3.0, t, kt) == pytest.approx(expected, abs=1e-12)


class TestClosedForm:
    def test_tan_branch(self):
        assert rs.closed_form_constant_riccati(0.0, 0.5, 2.0, 1.0, 0.5) == pytest.approx(
            0.5 * math.tan(0.5), rel=1e-14
        )

    def test_linear(self):
        assert rs.closed_form_constant_riccati(0.0, 1.0, 0.0, 1.0, 0.25) == pytest.approx(0.75)

    def test_terminal_value(self):
        assert rs.closed_form_constant_riccati(1.0, 3.0, 1.0, 2.0, 2.0) == pytest.approx(0.0, abs=1e-15)

    def test_rational_branch(self):
        # 4 b cq = a^2: k = s / (1 - s)
        assert rs.closed_form_constant_riccati(2.0, 1.0, 1.0, 1.0, 0.5) == pytest.approx(1.0)
        assert rs.closed_form_blowup_time(2.0, 1.0, 1.0, 1.0) == pytest.approx(0.0)

    def test_section_blowup_length(self):
        assert 1.0 - rs.closed_form_blowup_time(1.0, 3.0, 1.0, 1.0) == pytest.approx(
            example8_T2(), abs=1e-14
        )
        assert example8_T2() == pytest.approx(0.7706349894, abs=1e-10)

    def test_no_blowup_when_quadratic_vanishes(self):
        assert rs.closed_form_blowup_time(1.0, 1.0, 0.0, 1.0) is None

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            rs.closed_form_constant_riccati(0.0, 1.0, 1.0, 1.0, 1.5)
        with pytest.raises(DomainError):
            rs.closed_form_constant_riccati(0.0, 1.0, 1.0, 1.0, 1.0 - math.pi / 2.0 - 0.1)


class TestIntegratePrimal:
    def test_scalar_tan_solution(self):
        sol = rs.integrate_scalar_riccati(_const(0.0), _const(0.5), _const(2.0), 1.0, 0.0, -1.0)
        assert sol.termination.kind == TerminationKind.BLOWUP_PLUS_INF
        assert sol.termination.t_star == pytest.approx(1.0 - math.pi / 2.0, abs=BLOWUP_TOL)
        for t in (0.9, 0.5, 0.0, -0.3):
            assert sol.value_at(t) == pytest.approx(0.5 * math.tan(1.0 - t), rel=REL_TOL)

    def test_diagonal_blowup(self, diagonal):
        sol = rs.integrate_primal(diagonal, 5.0, 1.0)
        assert sol.equation == Equation.PRIMAL
        assert sol.termination.kind == TerminationKind.BLOWUP_PLUS_INF
        assert sol.termination.t_star == pytest.approx(1.0 - math.pi / 4.0, abs=BLOWUP_TOL)
        assert sol.termination.repr == Representation.RECIPROCAL

    def test_section_primal(self, example8, example8_T1):
        lam, T = 3.0, example8.T
        sol = rs.integrate_primal(example8, lam, T)
        assert sol.termination.kind == TerminationKind.BLOWUP_PLUS_INF
        assert sol.termination.t_star == pytest.approx(example8_T1, abs=1e-8)
        r = math.sqrt(11.0) / 2.0
        for s in (0.1, 0.3, 0.5):
            exact = r * math.tan(r * s + math.atan(1.0 / math.sqrt(11.0))) - 0.5
            assert sol.value_at(T - s) == pytest.approx(exact, rel=REL_TOL)

    @pytest.mark.parametrize(
        "a, b, cq",
        [(0.5, 1.0, 2.0), (-1.0, 2.0, 0.5), (3.0, 1.0, 1.0)],
    )
    def test_matches_closed_form(self, a, b, cq):
        t_bar = 1.0
        t_star = rs.closed_form_blowup_time(a, b, cq, t_bar)
        sol = rs.integrate_scalar_riccati(_const(a), _const(b), _const(cq), t_bar, 0.0, t_star - 1.0)
        assert sol.termination.t_star == pytest.approx(t_star, abs=BLOWUP_TOL)
        for frac in (0.2, 0.5, 0.8):
            t = t_bar - frac * (t_bar - t_star)
            exact = rs.closed_form_constant_riccati(a, b, cq, t_bar, t)
            assert abs(sol.value_at(t) - exact) <= REL_TOL * max(1.0, abs(exact))

    def test_floor_reached_below_lambda_b(self, diagonal):
        with pytest.raises(FloorReached) as info:
            rs.integrate_primal(diagonal, 0.5, 1.0)
        solution = info.value.solution
        assert solution.termination.kind == TerminationKind.REACHED_TIME_LIMIT
        assert solution.t_end == pytest.approx(-1.0)

    def test_explicit_stop_does_not_raise(self, diagonal):
        sol = rs.integrate_primal(diagonal, 0.5, 1.0, t_stop=0.0)
        assert sol.termination.kind == TerminationKind.REACHED_TIME_LIMIT
        assert sol.t_end == pytest.approx(0.0)

    def test_start_beyond_horizon(self, diagonal):
        with pytest.raises(TimeOutOfRange):
            rs.integrate_primal(diagonal, 2.0, 1.5)

    def test_direct_samples_stay_nonnegative(self, example8_frozen):
        sol = rs.integrate_primal(example8_frozen, 4.0, example8_frozen.T)
        direct = sol.value[~sol.reciprocal]
        assert np.all(direct >= -1e-12)
        assert sol.anomalies == []

    def test_f0_bound_along_trajectory(self, example8_frozen):
        sol = rs.integrate_primal(example8_frozen, 4.0, example8_frozen.T)
        for t, v, rep in sol.samples():
            if rep == Representation.DIRECT and v >= 0:
                f0 = rs.f0_bound(v, -2.0)
                assert 0.0 <= f0 <= 0.5 + 1e-12

    def test_comparison_of_ordered_data(self):
        upper = rs.integrate_scalar_riccati(_const(0.0), _const(1.0), _const(1.0), 1.0, 0.0, 0.2)
        lower = rs.integrate_scalar_riccati(_const(0.0), _const(0.8), _const(0.5), 1.0, 0.0, 0.2)
        ts = np.linspace(1.0, 0.2, 17)
        assert np.all(upper.value_at(ts) >= lower.value_at(ts) - 1e-10)

    def test_comparison_on_random_instances(self):
        rng = np.random.default_rng(7)
        t_bar = 1.0
        for _ in range(50):
            a = rng.uniform(-1.0, 1.0)
            b_lo, cq_lo = rng.uniform(0.1, 1.5, size=2)
            b_hi, cq_hi = b_lo + rng.uniform(0.0, 1.0), cq_lo + rng.uniform(0.0, 1.0)
            upper = rs.integrate_scalar_riccati(_const(a), _const(b_hi), _const(cq_hi), t_bar, 0.0, -1.0)
            lower = rs.integrate_scalar_riccati(_const(a), _const(b_lo), _const(cq_lo), t_bar, 0.0, -1.0)
            # compare only where both are still finite
            t_min = max(upper.termination.t_star, lower.termination.t_star)
            ts = t_min + (t_bar - t_min) * np.linspace(0.1, 1.0, 12)
            hi, lo = upper.value_at(ts), lower.value_at(ts)
            assert np.all(hi >= lo - 1e-9 * np.maximum(1.0, np.abs(lo)))

    def test_later_start_never_blows_up_earlier(self, example8):
        stars = [
            rs.integrate_primal(example8, 8.0, t_bar).termination.t_star
            for t_bar in (0.5, 0.7, example8.T)
        ]
        assert all(a <= b + 1e-9 for a, b in zip(stars, stars[1:]))


class TestIntegrateDual:
    def test_diagonal_blows_to_minus_infinity(self, diagonal):
        sol = rs.integrate_dual(diagonal, 2.0, 1.0)
        assert sol.termination.kind == TerminationKind.BLOWUP_MINUS_INF
        assert sol.termination.t_star == pytest.approx(1.0 - math.pi / 2.0, abs=BLOWUP_TOL)
        assert sol.value_at(0.5) == pytest.approx(-math.tan(0.5), rel=REL_TOL)

    def test_initial_slope(self, diagonal):
        sol = rs.integrate_dual(diagonal, 2.0, 1.0)
        # dk̃/dt = 1 > 0 at t_bar, so k̃ is negative just below it
        assert sol.value_at(0.99) < 0.0

    def test_section_zero_return(self, example8, example8_T1):
        sol = rs.integrate_dual(example8, 3.0, example8_T1)
        assert sol.termination.kind == TerminationKind.ZERO_RETURN
        assert sol.termination.t_star == pytest.approx(0.0, abs=1e-6)

    def test_legendre_reciprocity(self, diagonal):
        primal = rs.integrate_primal(diagonal, 5.0, 1.0)
        k_mid = primal.value_at(0.5)
        dual = rs.integrate_dual(diagonal, 5.0, 0.5, kt0=1.0 / k_mid, t_stop=0.4)
        assert dual.value_at(0.4) * primal.value_at(0.4) == pytest.approx(1.0, abs=1e-8)
        assert primal.dual_value(0.4) == pytest.approx(dual.value_at(0.4), rel=1e-8)


class TestDualCoefficients:
    def test_section_entries(self, example8_frozen):
        dual = rs.dual_coefficients(example8_frozen, 3.0)
        assert dual.H33(0.1) == pytest.approx(-0.5)
        assert dual.H13(0.1) == pytest.approx(1.0)
        assert dual.H23(0.1) == pytest.approx(0.5)
        assert dual.H11(0.1) == pytest.approx(-2.0 + 4.0 - 3.0)
        assert dual.h22(0.1) == 0.0

    def test_zero_H13_propagates(self, diagonal):
        dual = rs.dual_coefficients(diagonal, 2.0)
        assert dual.H13(0.5) == 0.0
        assert dual.H23(0.5) == 0.0

    def test_structural_identity(self, time_dependent, example8):
        for c in (time_dependent, example8):
            dual = rs.dual_coefficients(c, 3.0)
            grid = np.linspace(0.0, c.T, 33)
            gap = dual.H23.evaluate(grid) + dual.H33.evaluate(grid) * dual.H13.evaluate(grid)
            assert np.max(np.abs(gap)) <= 1e-10
