"""Eigenfunction simulation: interval assembly, boundary values and residuals."""

import math

import numpy as np
import pytest

from riccati_spectrum.core.exceptions import ChainNotEigen, SingularDenominator
from riccati_spectrum.schemas.chain import ChainOptions
from riccati_spectrum.schemas.coefficients import CoefficientSet
from riccati_spectrum.schemas.common import Equation
from riccati_spectrum.schemas.spectrum import Eigenvalue, RootKind
from riccati_spectrum.services import fbsde_service as fs
from riccati_spectrum.services.chain_service import compute_chain
from riccati_spectrum.services.riccati_service import dual_coefficients
from riccati_spectrum.services.spectrum_service import enumerate_eigenvalues
from riccati_spectrum.utils.rng import brownian_increments, path_generator


@pytest.fixture(scope="module")
def diagonal_eig(diagonal):
    return enumerate_eigenvalues(diagonal, 10.0).eigenvalues[0]


@pytest.fixture(scope="module")
def section_eig(example8):
    chain =compute_chain(example8, 3.0, opts=ChainOptions().with_slack(1e-6))
    return Eigenvalue(
        order_index=1,
        lam=3.0,
        bracket=(3.0, 3.0),
        defect_residual=chain.termination.defect,
        chain=chain,
        method="defect_root",
        root_kind=RootKind.defect(),
    )


class TestAlgebraicRelation:
    def test_section_values(self, example8_frozen):
        assert fs.algebraic_m(example8_frozen, 0.1, 1.0) == pytest.approx(1.0)
        assert fs.algebraic_m(example8_frozen, 0.1, 0.0) == 0.0

    def test_array_matches_scalar(self, example8_frozen):
        ts = np.linspace(0.0, 0.5, 6)
        ks = np.linspace(0.0, 2.0, 6)
        values = fs.algebraic_m_array(example8_frozen, ts, ks)
        for t, k, v in zip(ts, ks, values):
            assert v == pytest.approx(fs.algebraic_m(example8_frozen, float(t), float(k)))

    def test_singular_denominator(self):
        c = CoefficientSet.constant(1.0, H11=1.0, H33=1.0, H31=1.0)
        with pytest.raises(SingularDenominator):
            fs.algebraic_m(c, 0.5, 1.0)
        with pytest.raises(SingularDenominator):
            fs.algebraic_m_array(c, np.array([0.2, 0.5]), np.array([0.0, 1.0]))

    def test_legendre_swap(self, example8_frozen):
        dual = dual_coefficients(example8_frozen, 3.0)
        t = np.array([0.1])
        x, y, z = fs.legendre_to_primal(np.array([2.0]), np.array([3.0]), np.array([5.0]), dual, t)
        assert (x[0], y[0]) == (3.0, 2.0)
        # H̃31 x̃ + H̃32 ỹ + H̃33 z̃ = 1*2 + 0.5*3 - 0.5*5
        assert z[0] == pytest.approx(1.0)


class TestIntervals:
    def test_section_split(self, section_eig, example8, example8_T1):
        intervals = fs.segment_intervals(section_eig.chain)
        mid = 0.5 * (example8_T1 + example8.T)
        assert [kind for _, _, kind in intervals] == [Equation.DUAL, Equation.PRIMAL]
        assert intervals[0][0] == 0.0 and intervals[-1][1] == example8.T
        assert intervals[0][1] == pytest.approx(mid, abs=1e-6)
        assert intervals[1][0] == intervals[0][1]

    def test_primal_chain_ending_at_zero(self, diagonal_eig):
        intervals = fs.segment_intervals(diagonal_eig.chain)
        assert intervals == [(0.0, 0.5, Equation.DUAL), (0.5, 1.0, Equation.PRIMAL)]

    def test_rejects_non_eigen_chain(self, diagonal):
        with pytest.raises(ChainNotEigen):
            fs.segment_intervals(compute_chain(diagonal, 2.0))

    def test_grid_keeps_interval_ends(self):
        intervals = [(0.0, 0.5, Equation.DUAL), (0.5, 1.0, Equation.PRIMAL)]
        grid = fs.simulation_grid(intervals, 1.0, 10)
        assert grid.size == 11
        assert 0.5 in grid
        assert grid[0] == 0.0 and grid[-1] == 1.0
        assert np.all(np.diff(grid) > 0)


class TestSimulation:
    def test_diagonal_closed_form(self, diagonal, diagonal_eig):
        path = fs.simulate_eigenfunction(diagonal, diagonal_eig, n_steps=2000, n_paths=2, y0=1.5)
        u = math.sqrt(diagonal_eig.lam - 1.0)
        t = path.grid
        np.testing.assert_allclose(path.y[0], 1.5 * np.cos(u * t), atol=1e-2)
        np.testing.assert_allclose(path.x[0], 1.5 * u * np.sin(u * t), atol=1e-2)
        # no noise: every path is the same
        np.testing.assert_array_equal(path.x[0], path.x[1])

    def test_boundary_values(self, example8, section_eig):
        path = fs.simulate_eigenfunction(example8, section_eig, n_steps=400, n_paths=4, seed=3)
        assert np.all(path.x[:, 0] == 0.0)
        assert np.all(path.y[:, 0] == 1.0)
        assert np.all(path.y[:, -1] == 0.0)
        assert path.kind_at(0) == Equation.DUAL
        assert path.kind_at(path.grid.size - 1) == Equation.PRIMAL

    def test_primal_interval_follows_closed_form(self, example8, section_eig):
        path = fs.simulate_eigenfunction(example8, section_eig, n_steps=400, n_paths=3, seed=5)
        r = math.sqrt(11.0) / 2.0
        top = path.segments[-1][0]
        for i in np.nonzero(path.grid >= top)[0]:
            s = example8.T - path.grid[i]
            k = r * math.tan(r * s + math.atan(1.0 / math.sqrt(11.0))) - 0.5
            assert path.riccati[i] == pytest.approx(k, abs=1e-7)
            np.testing.assert_array_equal(path.y[:, i], path.riccati[i] * path.x[:, i])

    def test_linear_in_y0(self, example8, section_eig):
        one = fs.simulate_eigenfunction(example8, section_eig, n_steps=300, n_paths=3, seed=11, y0=1.0)
        two = fs.simulate_eigenfunction(example8, section_eig, n_steps=300, n_paths=3, seed=11, y0=2.0)
        np.testing.assert_allclose(two.x, 2.0 * one.x, rtol=1e-12, atol=0)
        np.testing.assert_allclose(two.z, 2.0 * one.z, rtol=1e-12, atol=0)

    def test_zero_scale_gives_zero_paths(self, example8, section_eig):
        path = fs.simulate_eigenfunction(example8, section_eig, n_steps=200, n_paths=2, y0=0.0)
        assert not path.x.any() and not path.y.any() and not path.z.any()

    def test_paths_do_not_depend_on_path_count(self, example8, section_eig):
        few = fs.simulate_eigenfunction(example8, section_eig, n_steps=200, n_paths=2, seed=9)
        many = fs.simulate_eigenfunction(example8, section_eig, n_steps=200, n_paths=5, seed=9)
        np.testing.assert_array_equal(few.x, many.x[:2])
        other = fs.simulate_eigenfunction(example8, section_eig, n_steps=200, n_paths=2, seed=10)
        assert not np.array_equal(few.dB, other.dB)

    def test_recomputes_missing_segments(self, example8, section_eig):
        bare = section_eig.model_copy(
            update={"chain": section_eig.chain.model_copy(update={"segments": ()})}
        )
        a = fs.simulate_eigenfunction(example8, bare, n_steps=200, n_paths=2, seed=1)
        b = fs.simulate_eigenfunction(example8, section_eig, n_steps=200, n_paths=2, seed=1)
        np.testing.assert_allclose(a.y, b.y, rtol=1e-6, atol=1e-9)

    def test_non_eigenvalue_rejected(self, diagonal):
        chain = compute_chain(diagonal, 2.0)
        eig = Eigenvalue(
            order_index=1,
            lam=2.0,
            bracket=(2.0, 2.0),
            defect_residual=math.nan,
            chain=chain,
            method="chain_root",
            root_kind=RootKind.chain_time(1),
        )
        with pytest.raises(ChainNotEigen):
            fs.simulate_eigenfunction(diagonal, eig, n_steps=50, n_paths=1)


class TestResiduals:
    def test_refinement_shrinks_residual(self, diagonal, diagonal_eig):
        coarse = fs.bsde_residual(
            fs.simulate_eigenfunction(diagonal, diagonal_eig, n_steps=250, n_paths=1),
            diagonal,
            diagonal_eig.lam,
        )
        fine = fs.bsde_residual(
            fs.simulate_eigenfunction(diagonal, diagonal_eig, n_steps=2000, n_paths=1),
            diagonal,
            diagonal_eig.lam,
        )
        assert fine.backward_rms < coarse.backward_rms
        assert fine.forward_rms < coarse.forward_rms
        assert fine.n_steps > coarse.n_steps

    def test_stochastic_residual_is_small(self, example8, section_eig):
        path = fs.simulate_eigenfunction(example8, section_eig, n_steps=1000, n_paths=4, seed=2)
        report = fs.bsde_residual(path, example8, 3.0)
        assert report.n_paths == 4
        assert report.forward_rms < 1e-2
        assert report.backward_rms < 1e-2

    def test_statistics_shapes(self, example8, section_eig):
        path = fs.simulate_eigenfunction(example8, section_eig, n_steps=100, n_paths=3)
        stats = fs.path_statistics(path)
        assert stats.x_mean.shape == path.grid.shape
        np.testing.assert_allclose(stats.y_mean, path.y.mean(axis=0))


class TestBrownian:
    def test_moments(self):
        dB = brownian_increments(3, 2000, np.full(50, 0.01))
        assert dB.shape == (2000, 50)
        assert abs(dB.mean()) < 2e-3
        assert dB.var() == pytest.approx(0.01, rel=0.05)

    def test_streams_are_keyed(self):
        a = path_generator(4, 1).standard_normal(3)
        b = path_generator(4, 1).standard_normal(3)
        c = path_generator(4, 2).standard_normal(3)
        np.testing.assert_array_equal(a, b)
        assert not np.array_equal(a, c)

    def test_negative_seed_rejected(self):
        with pytest.raises(ValueError):
            path_generator(-1, 0)
