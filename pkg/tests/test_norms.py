"""Exponent bookkeeping, norms, trajectories, and fitting helpers.

Oracles used here:

* single-mode Lebesgue norms against the moment identity
  mean |cos|^q = Gamma((q+1)/2) / (sqrt(pi) Gamma(q/2 + 1)), which trig
  quadrature reproduces exactly for even integer q;
* the heat-flow Besov characterization of a single mode against its
  one-line maximization in t;
* Parseval between the physical L2 norm and the coefficient sum.
"""

import numpy as np
import numpy.testing as npt
import pytest
from scipy.special import gamma as gamma_fn

from mildns import (
    ConfigError,
    DataError,
    DatumSpec,
    MeshError,
    ScalarField,
    Trajectory,
    VectorField,
    besov_norm_heat,
    build_exponent_book,
    decay_exponent_fit,
    dyadic_grid,
    heat_trajectory,
    kato_norm,
    lebesgue_norm,
    make_lattice,
    n_norm,
    quadratic_mesh,
    realize_datum,
    sobolev_embedding_check,
    sobolev_norm,
    to_spectral,
    vanishing_at_zero,
)
from mildns.lattice import PHYSICAL


def cosine_moment(q: float) -> float:
    """Spatial mean of |cos|^q over a full period."""
    return gamma_fn((q + 1) / 2.0) / (np.sqrt(np.pi) * gamma_fn(q / 2.0 + 1.0))


class TestExponentBook:
    def test_critical_2d(self):
        book = build_exponent_book(d=2, p=2.0, s=0.0, q_tilde=4.0)
        assert book.q == 2.0
        assert book.alpha == 0.5
        npt.assert_allclose(book.young_h, 4.0 / 3.0)
        assert book.young_r == 1.0
        assert book.gamma_kato == 0.75
        assert book.gamma_sobolev == 0.5
        assert book.horizon_exponent == 0.0
        assert book.is_critical
        assert not book.is_calibrated
        assert book.key == "d2-p2-s0-qt4"

    def test_critical_3d(self):
        book = build_exponent_book(d=3, p=3.0, s=0.0, q_tilde=6.0)
        assert book.q == 3.0
        assert book.alpha == 0.5
        assert book.gamma_kato == 0.75
        assert book.horizon_exponent == 0.0
        assert book.is_critical

    def test_subcritical_2d(self):
        book = build_exponent_book(d=2, p=2.0, s=0.25, q_tilde=8.0)
        npt.assert_allclose(book.q, 8.0 / 3.0)
        assert book.horizon_exponent == 0.125
        assert book.young_r is None  # q_tilde > 2p drops the second Young pair
        assert not book.is_critical

    def test_integrability_floor(self):
        with pytest.raises(ConfigError, match="p > d/2"):
            build_exponent_book(d=2, p=1.0, s=0.0, q_tilde=4.0)

    def test_smoothness_window(self):
        with pytest.raises(ConfigError, match="admissible window"):
            build_exponent_book(d=2, p=2.0, s=-0.5, q_tilde=4.0)
        with pytest.raises(ConfigError, match="admissible window"):
            build_exponent_book(d=2, p=2.0, s=0.5, q_tilde=8.0)

    def test_auxiliary_exponent_floor(self):
        with pytest.raises(ConfigError, match="q_tilde > q"):
            build_exponent_book(d=2, p=2.0, s=0.0, q_tilde=2.0)

    def test_with_calibration(self):
        book = build_exponent_book(d=2, p=2.0, s=0.0, q_tilde=4.0)
        cal = book.with_calibration(0.1, 2.5, 2.4, 0.96, "abc")
        assert cal.is_calibrated
        assert cal.delta == 2.5
        assert not book.is_calibrated  # original untouched


class TestLebesgueNorm:
    def test_exponent_validation(self, lat2, rng):
        f = ScalarField(lat2, rng.standard_normal((16, 16)), PHYSICAL)
        with pytest.raises(ConfigError, match="Lebesgue exponent"):
            lebesgue_norm(f, 0.5)

    @pytest.mark.parametrize("p", [1.0, 2.0, 3.5, np.inf])
    def test_constant_field(self, lat2, p):
        f = ScalarField(lat2, np.full((16, 16), 2.0), PHYSICAL)
        vol = lat2.box_len**2
        expected = 2.0 if p == np.inf else 2.0 * vol ** (1.0 / p)
        npt.assert_allclose(lebesgue_norm(f, p), expected, rtol=1e-13)

    @pytest.mark.parametrize("q", [2, 4, 6, 8])
    def test_single_mode_moment_identity_even(self, lat2, q):
        """Trig quadrature is exact for |cos|^q at even integer q."""
        u = realize_datum(DatumSpec(kind="single_mode", mode=(1, 2), amplitude=1.5), lat2)
        expected = 1.5 * (lat2.box_len**2 * cosine_moment(q)) ** (1.0 / q)
        npt.assert_allclose(lebesgue_norm(u, q), expected, rtol=1e-13)

    def test_single_mode_moment_identity_odd(self):
        # odd powers are not band-limited, so exactness degrades to the
        # trig-quadrature error of the lattice, which falls fast with n
        lat = make_lattice(2, 64, 2.0 * np.pi)
        u = realize_datum(DatumSpec(kind="single_mode", mode=(1, 2)), lat)
        expected = (lat.box_len**2 * cosine_moment(3)) ** (1.0 / 3.0)
        npt.assert_allclose(lebesgue_norm(u, 3), expected, rtol=1e-5)

    def test_components_aggregate_in_l2(self, lat2, rng):
        data = rng.standard_normal((16, 16))
        single = ScalarField(lat2, data, PHYSICAL)
        double = VectorField(lat2, np.stack([data, data]), PHYSICAL)
        npt.assert_allclose(
            lebesgue_norm(double, 3.0), np.sqrt(2.0) * lebesgue_norm(single, 3.0)
        )

    def test_parseval(self, lat2, rng):
        f = ScalarField(lat2, rng.standard_normal((16, 16)), PHYSICAL)
        coeff = to_spectral(f).data
        spectral_side = np.sqrt(lat2.box_len**2 * np.sum(np.abs(coeff) ** 2))
        npt.assert_allclose(lebesgue_norm(f, 2), spectral_side, rtol=1e-12)

    def test_homogeneity(self, lat2, rng):
        f = ScalarField(lat2, rng.standard_normal((16, 16)), PHYSICAL)
        npt.assert_allclose(
            lebesgue_norm(7.0 * f, 4.0), 7.0 * lebesgue_norm(f, 4.0), rtol=1e-13
        )


class TestSobolevNorm:
    def test_zero_smoothness_is_lebesgue(self, lat2, divfree_datum):
        u = divfree_datum(lat2, seed=4)
        npt.assert_allclose(sobolev_norm(u, 0.0, 2.0), lebesgue_norm(u, 2.0))

    def test_single_mode_scaling(self, lat2):
        u = realize_datum(DatumSpec(kind="single_mode", mode=(1, 2)), lat2)
        npt.assert_allclose(
            sobolev_norm(u, 0.5, 2.0),
            5.0**0.25 * lebesgue_norm(u, 2.0),
            rtol=1e-13,
        )


class TestBesovHeat:
    def test_rejects_nonnegative_smoothness(self, lat2, divfree_datum):
        u = divfree_datum(lat2, seed=1)
        with pytest.raises(ConfigError, match="negative smoothness"):
            besov_norm_heat(u, 0.0, 2.0)

    def test_single_mode_closed_form(self):
        """sup_t t^beta e^(-|k|^2 t) peaks at t* = beta/|k|^2 with value
        (beta/(e |k|^2))^beta; putting t* on the grid makes the sup exact."""
        lat = make_lattice(2, 32, 2.0 * np.pi)
        amp = 2.0
        u = realize_datum(DatumSpec(kind="single_mode", mode=(1, 2), amplitude=amp), lat)
        s, ksq = -0.5, 5.0
        beta = -s / 2.0
        t_star = beta / ksq
        grid = np.sort(np.concatenate([np.geomspace(1e-3, 0.3, 25), [t_star]]))
        report = besov_norm_heat(u, s, 2.0, t_grid=grid)
        closed = (beta / (np.e * ksq)) ** beta * amp * (
            lat.box_len**2 * cosine_moment(2)
        ) ** 0.5
        npt.assert_allclose(report.value, closed, rtol=1e-12)
        npt.assert_allclose(report.argmax_t, t_star)

    def test_argmax_invariant_under_amplitude(self, lat2):
        spec = dict(kind="single_mode", mode=(1, 2), divergence_free=True)
        a = besov_norm_heat(realize_datum(DatumSpec(**spec, amplitude=1.0), lat2), -0.5, 4.0)
        b = besov_norm_heat(realize_datum(DatumSpec(**spec, amplitude=30.0), lat2), -0.5, 4.0)
        assert a.argmax_t == b.argmax_t
        npt.assert_allclose(b.value, 30.0 * a.value, rtol=1e-12)

    def test_window_flag(self, lat2, divfree_datum):
        u = divfree_datum(lat2, seed=2)
        ok = besov_norm_heat(u, -0.5, 2.0)
        assert ok.window_ok
        wide = besov_norm_heat(u, -0.5, 2.0, t_grid=[0.1, lat2.box_len**2])
        assert not wide.window_ok


class TestTrajectory:
    def test_mesh_validation(self, lat2, divfree_datum):
        u = divfree_datum(lat2, seed=3)
        with pytest.raises(MeshError, match="positive"):
            Trajectory(lat2, [0.0, 1.0], [u, u])
        with pytest.raises(MeshError, match="increasing"):
            Trajectory(lat2, [1.0, 1.0], [u, u])
        with pytest.raises(MeshError, match="fields for"):
            Trajectory(lat2, [1.0, 2.0], [u])

    def test_field_validation(self, lat2, lat3, divfree_datum):
        u3 = divfree_datum(lat3, seed=3)
        with pytest.raises(DataError, match="lattice"):
            Trajectory(lat2, [1.0], [u3])

    def test_node_index(self, lat2, divfree_datum):
        traj = heat_trajectory(divfree_datum(lat2, seed=5), [0.1, 0.2, 0.4])
        assert traj.node_index(0.2) == 1
        with pytest.raises(MeshError, match="not a node"):
            traj.node_index(0.3)

    def test_value_at_power_interpolation(self, lat2, divfree_datum):
        """Interpolation is exact for c * t**w trajectories when queried
        with interp_power = w."""
        u = divfree_datum(lat2, seed=6)
        times = np.array([0.1, 0.4, 0.9])
        w = -0.25
        traj = Trajectory(lat2, times, [(t**w) * u for t in times])
        got = traj.value_at(0.2, interp_power=w)
        npt.assert_allclose(got.data, (0.2**w) * u.data, rtol=1e-12)

    def test_value_at_log_interpolation(self, lat2, divfree_datum):
        u = divfree_datum(lat2, seed=7)
        times = np.array([0.1, 0.4, 0.9])
        traj = Trajectory(lat2, times, [np.log(t) * u for t in times])
        got = traj.value_at(0.2)
        npt.assert_allclose(got.data, np.log(0.2) * u.data, rtol=1e-12, atol=1e-14)

    def test_value_at_clamps_below_first_node(self, lat2, divfree_datum):
        u = divfree_datum(lat2, seed=8)
        traj = heat_trajectory(u, [0.1, 0.2])
        npt.assert_array_equal(traj.value_at(0.01).data, traj.fields[0].data)

    def test_value_at_rejects_beyond_horizon(self, lat2, divfree_datum):
        traj = heat_trajectory(divfree_datum(lat2, seed=9), [0.1, 0.2])
        with pytest.raises(MeshError, match="horizon"):
            traj.value_at(0.5)

    def test_arithmetic(self, lat2, divfree_datum):
        u = divfree_datum(lat2, seed=10)
        traj = heat_trajectory(u, [0.1, 0.2])
        doubled = traj + traj
        npt.assert_allclose(doubled.fields[0].data, 2.0 * traj.fields[0].data)
        diff = doubled - 2.0 * traj
        assert max(np.abs(f.data).max() for f in diff.fields) < 1e-15

    def test_arithmetic_mesh_mismatch(self, lat2, divfree_datum):
        u = divfree_datum(lat2, seed=11)
        a = heat_trajectory(u, [0.1, 0.2])
        b = heat_trajectory(u, [0.1, 0.3])
        with pytest.raises(DataError, match="identical meshes"):
            a + b


class TestMeshes:
    def test_quadratic_mesh(self):
        mesh = quadratic_mesh(2.0, 4)
        npt.assert_allclose(mesh, 2.0 * (np.arange(1, 5) / 4.0) ** 2)
        with pytest.raises(MeshError):
            quadratic_mesh(-1.0, 4)
        with pytest.raises(MeshError):
            quadratic_mesh(1.0, 1)

    def test_dyadic_grid_anchored_at_top(self):
        grid = dyadic_grid(1.0, 0.01, per_octave=4)
        assert grid[-1] == 1.0
        ratios = grid[1:] / grid[:-1]
        npt.assert_allclose(ratios, 2.0**0.25, rtol=1e-12)
        assert grid[0] >= 0.01 * (1 - 1e-12)

    def test_dyadic_grids_correspond_under_scaling(self):
        # grids for T and T/4 match element-wise after the lambda^2 shift
        a = dyadic_grid(1.0, 0.01)
        b = dyadic_grid(0.25, 0.0025)
        npt.assert_allclose(a[: b.size] if a.size > b.size else a, 4.0 * b[-a.size :], rtol=1e-12)

    def test_dyadic_grid_validation(self):
        with pytest.raises(ConfigError):
            dyadic_grid(0.1, 0.2)


class TestTimeWeightedNorms:
    def test_kato_requires_ordered_exponents(self, lat2, divfree_datum):
        traj = heat_trajectory(divfree_datum(lat2, seed=12), [0.01, 0.02])
        with pytest.raises(ConfigError, match="q_tilde >= q"):
            kato_norm(traj, 4.0, 2.0)

    def test_kato_single_mode_closed_form(self):
        lat = make_lattice(2, 32, 4.0 * np.pi)
        amp = 1.3
        u = realize_datum(
            DatumSpec(kind="single_mode", mode=(1, 2), amplitude=amp, divergence_free=True),
            lat,
        )
        ksq = (2.0 * np.pi / lat.box_len) ** 2 * 5.0
        times = quadratic_mesh(1.0, 12)
        report = kato_norm(heat_trajectory(u, times), 2.0, 4.0)
        c4 = lebesgue_norm(u, 4.0)
        expected = max(t**0.25 * np.exp(-ksq * t) * c4 for t in times)
        npt.assert_allclose(report.value, expected, rtol=1e-12)
        assert report.exponents["alpha"] == 0.5

    def test_n_norm_peaks_early_for_heat_flow(self, lat2, divfree_datum):
        traj = heat_trajectory(divfree_datum(lat2, seed=13), [0.01, 0.05, 0.1])
        report = n_norm(traj, 0.0, 2.0)
        assert report.argmax_t == 0.01
        npt.assert_allclose(report.value, lebesgue_norm(traj.fields[0], 2.0))

    def test_window_flag_tracks_horizon(self, lat2, divfree_datum):
        u = divfree_datum(lat2, seed=14)
        inside = heat_trajectory(u, [0.1, 0.3])
        outside = heat_trajectory(u, [0.1, lat2.box_len**2])
        assert kato_norm(inside, 2.0, 4.0).window_ok
        assert not kato_norm(outside, 2.0, 4.0).window_ok
        assert not n_norm(outside, 0.0, 2.0).window_ok


class TestVanishing:
    def test_needs_early_nodes(self, lat2, divfree_datum):
        traj = heat_trajectory(divfree_datum(lat2, seed=15), [0.5, 1.0])
        with pytest.raises(MeshError, match="below horizon/100"):
            vanishing_at_zero(traj, 0.25)

    def test_heat_flow_vanishes_in_the_kato_weight(self, lat2, divfree_datum):
        u = divfree_datum(lat2, seed=16)
        traj = heat_trajectory(u, quadratic_mesh(1.0, 64))
        report = vanishing_at_zero(traj, 0.25, r=4.0)
        assert report.vanishing
        assert report.values[0] < report.values[-1]


class TestDecayFit:
    def test_exact_power_law(self):
        t = np.geomspace(0.1, 10.0, 20)
        fit = decay_exponent_fit(t, 3.0 * t**-0.75, window=(0.1, 10.0))
        npt.assert_allclose(fit.slope, -0.75, rtol=1e-12)
        npt.assert_allclose(np.exp(fit.intercept), 3.0, rtol=1e-12)
        assert fit.power_law
        assert fit.residual < 1e-12

    def test_needs_enough_samples(self):
        t = np.geomspace(0.1, 10.0, 20)
        with pytest.raises(ConfigError, match="at least 8"):
            decay_exponent_fit(t, t, window=(5.0, 6.0))

    def test_rejects_nonpositive_values(self):
        t = np.linspace(1.0, 2.0, 10)
        with pytest.raises(DataError, match="positive"):
            decay_exponent_fit(t, np.zeros(10), window=(1.0, 2.0))

    def test_flags_non_power_law(self, rng):
        t = np.geomspace(0.1, 10.0, 30)
        wavy = t**-0.5 * np.exp(np.sin(3 * np.log(t)))
        fit = decay_exponent_fit(t, wavy, window=(0.1, 10.0))
        assert not fit.power_law


class TestEmbedding:
    def make_corpus(self, lat, count=6):
        return [
            realize_datum(
                DatumSpec(kind="random_band", seed=100 + i, k_min=1.0, k_max=5.0),
                lat,
            )
            for i in range(count)
        ]

    def test_scaling_line_enforced(self, lat2):
        corpus = self.make_corpus(lat2, 2)
        with pytest.raises(ConfigError, match="scaling line"):
            sobolev_embedding_check(corpus, 0.5, 2.0, 0.0, 3.0)
        with pytest.raises(ConfigError, match="s1 > s2"):
            sobolev_embedding_check(corpus, 0.0, 4.0, 0.5, 2.0)

    def test_measured_constant_is_finite_and_positive(self, lat2):
        # H^{1/2} into L^4 along the d = 2 scaling line
        corpus = self.make_corpus(lat2)
        report = sobolev_embedding_check(corpus, 0.5, 2.0, 0.0, 4.0)
        assert report.ratios.shape == (6,)
        assert np.all(report.ratios > 0)
        assert np.isfinite(report.max_ratio)
        npt.assert_allclose(report.max_ratio, report.ratios.max())

    def test_zero_field_rejected(self, lat2):
        zero = VectorField(lat2, np.zeros((2, 16, 16)), PHYSICAL)
        with pytest.raises(DataError, match="zero source norm"):
            sobolev_embedding_check([zero], 0.5, 2.0, 0.0, 4.0)
