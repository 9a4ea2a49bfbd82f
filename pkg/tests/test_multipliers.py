"""Fourier multiplier operators.

The composite operator gets a hand-derived single-mode oracle: for input
T_00 = cos(k.x) with k = (1, 2) on the 2 pi box, the exact output of
|k|^s exp(-t |k|^2) P (i k . ) at s = 1/2, t = 0.3 is

    (-0.8, 0.4) * 5**0.25 * exp(-1.5) * sin(x + 2 y),

worked out by projecting the tensor coefficient (i/2 in component 0 at
mode +k) through the Leray matrix at k and doubling against the conjugate
mode. Everything else checks operator identities and closed forms.
"""

import numpy as np
import numpy.testing as npt
import pytest

from mildns import (
    ConfigError,
    DatumSpec,
    ScalarField,
    TensorField,
    VectorField,
    WindowError,
    composite_apply,
    divergence_defect,
    divergence_of_tensor,
    fractional_laplacian,
    heat_flow,
    kernel_profile,
    lebesgue_norm,
    leray_project,
    make_lattice,
    realize_datum,
    riesz_transform,
    to_physical,
    to_spectral,
)
from mildns.lattice import PHYSICAL


def random_vector(lattice, seed):
    rng = np.random.default_rng(seed)
    return VectorField(
        lattice, rng.standard_normal((lattice.d,) + lattice.spatial_shape), PHYSICAL
    )


class TestHeatFlow:
    def test_time_validation(self, lat2, rng):
        f = ScalarField(lat2, rng.standard_normal((16, 16)), PHYSICAL)
        with pytest.raises(ConfigError, match="heat flow time"):
            heat_flow(f, -0.1)
        with pytest.raises(ConfigError, match="heat flow time"):
            heat_flow(f, np.nan)

    def test_zero_time_is_identity(self, lat2, rng):
        f = ScalarField(lat2, rng.standard_normal((16, 16)), PHYSICAL)
        npt.assert_array_equal(heat_flow(f, 0.0).data, f.data)

    def test_single_mode_decay_rate(self, lat2):
        # mode (1, 2) decays like exp(-5 t)
        u0 = realize_datum(DatumSpec(kind="single_mode", mode=(1, 2)), lat2)
        t = 0.37
        flowed = heat_flow(u0, t)
        npt.assert_allclose(flowed.data, np.exp(-5.0 * t) * u0.data, atol=1e-14)

    def test_semigroup_property(self, lat2, rng):
        f = random_vector(lat2, 5)
        once = heat_flow(f, 0.7)
        twice = heat_flow(heat_flow(f, 0.3), 0.4)
        npt.assert_allclose(to_physical(once).data, to_physical(twice).data, atol=1e-13)

    def test_preserves_mean(self, lat2, rng):
        f = ScalarField(lat2, 3.0 + rng.standard_normal((16, 16)), PHYSICAL)
        npt.assert_allclose(heat_flow(f, 10.0).data.mean(), f.data.mean(), rtol=1e-12)


class TestFractionalLaplacian:
    def test_order_must_be_finite(self, lat2, rng):
        f = ScalarField(lat2, rng.standard_normal((16, 16)), PHYSICAL)
        with pytest.raises(ConfigError, match="fractional order"):
            fractional_laplacian(f, np.inf)

    def test_zero_order_is_identity(self, lat2, rng):
        f = ScalarField(lat2, rng.standard_normal((16, 16)), PHYSICAL)
        npt.assert_array_equal(fractional_laplacian(f, 0.0).data, f.data)

    @pytest.mark.parametrize("s", [-0.5, 0.5, 1.0, 2.0])
    def test_single_mode_symbol(self, lat2, s):
        """|k|^s scales the mode (1, 2) by 5^(s/2) exactly."""
        u0 = realize_datum(DatumSpec(kind="single_mode", mode=(1, 2)), lat2)
        out = fractional_laplacian(u0, s)
        npt.assert_allclose(out.data, 5.0 ** (s / 2.0) * u0.data, atol=1e-13)

    def test_annihilates_constants(self, lat2):
        f = ScalarField(lat2, np.full((16, 16), 4.0), PHYSICAL)
        assert np.abs(fractional_laplacian(f, 1.0).data).max() < 1e-13

    def test_composition_adds_orders(self, lat2, divfree_datum):
        u = divfree_datum(lat2, seed=3)
        ab = fractional_laplacian(fractional_laplacian(u, 0.3), 0.9)
        direct = fractional_laplacian(u, 1.2)
        npt.assert_allclose(to_physical(ab).data, to_physical(direct).data, atol=1e-12)


class TestRiesz:
    def test_axis_validation(self, lat2, rng):
        f = ScalarField(lat2, rng.standard_normal((16, 16)), PHYSICAL)
        with pytest.raises(ConfigError, match="riesz axis"):
            riesz_transform(f, 2)

    def test_real_fields_stay_real(self, lat2, rng):
        # the zeroed Nyquist entry keeps the odd symbol Hermitian
        f = ScalarField(lat2, rng.standard_normal((16, 16)), PHYSICAL)
        out = riesz_transform(f, 0)
        assert out.representation == PHYSICAL
        assert np.isrealobj(out.data)

    def test_riesz_identity_on_band_limited_field(self, lat2, divfree_datum):
        """sum_i R_i R_i = -identity away from the mean."""
        u = divfree_datum(lat2, seed=8)
        acc = np.zeros_like(u.data)
        for axis in range(2):
            acc += to_physical(riesz_transform(riesz_transform(u, axis), axis)).data
        npt.assert_allclose(acc, -u.data, atol=1e-12)


class TestLeray:
    def test_rank_validation(self, lat2, rng):
        f = ScalarField(lat2, rng.standard_normal((16, 16)), PHYSICAL)
        with pytest.raises(ConfigError, match="vector field"):
            leray_project(f)

    def test_output_divergence_free(self, lat2):
        for seed in range(5):
            u = random_vector(lat2, seed)
            assert divergence_defect(leray_project(u)) < 1e-12

    def test_idempotent(self, lat2):
        for seed in range(5):
            u = random_vector(lat2, seed)
            once = to_physical(leray_project(u))
            twice = to_physical(leray_project(once))
            scale = np.abs(once.data).max()
            assert np.abs(twice.data - once.data).max() < 1e-13 * scale

    def test_fixes_divergence_free_fields(self, lat2):
        u = realize_datum(DatumSpec(kind="taylor_green"), lat2)
        projected = to_physical(leray_project(u))
        npt.assert_allclose(projected.data, u.data, atol=1e-14)

    def test_gradient_fields_annihilated(self, lat2):
        # grad of cos(x + 2y) is purely curl-free
        x, y = lat2.meshgrid()
        phase = x + 2 * y
        grad = np.stack([-np.sin(phase), -2.0 * np.sin(phase)])
        u = VectorField(lat2, grad, PHYSICAL)
        assert np.abs(to_physical(leray_project(u)).data).max() < 1e-13

    def test_mean_passes_through(self, lat2):
        data = np.zeros((2, 16, 16))
        data[0] = 1.5
        u = VectorField(lat2, data, PHYSICAL)
        npt.assert_allclose(to_physical(leray_project(u)).data, data, atol=1e-14)


class TestDivergence:
    def test_rank_validation(self, lat2, rng):
        u = VectorField(lat2, rng.standard_normal((2, 16, 16)), PHYSICAL)
        with pytest.raises(ConfigError, match="rank-2"):
            divergence_of_tensor(u)

    def test_hand_oracle(self, lat2):
        """T_00 = sin(x), T_01 = sin(y) gives (div T)_0 = cos(x) + cos(y)."""
        x, y = lat2.meshgrid()
        data = np.zeros((2, 2, 16, 16))
        data[0, 0] = np.sin(np.broadcast_to(x, (16, 16)))
        data[0, 1] = np.sin(np.broadcast_to(y, (16, 16)))
        out = divergence_of_tensor(TensorField(lat2, data, PHYSICAL))
        npt.assert_allclose(out.data[0], np.cos(x) + np.cos(y), atol=1e-13)
        npt.assert_allclose(out.data[1], 0.0, atol=1e-14)

    def test_defect_zero_field(self, lat2):
        u = VectorField(lat2, np.zeros((2, 16, 16)), PHYSICAL)
        assert divergence_defect(u) == 0.0

    def test_defect_flags_gradients(self, lat2):
        x, y = lat2.meshgrid()
        phase = x + 2 * y
        u = VectorField(lat2, np.stack([-np.sin(phase), -2.0 * np.sin(phase)]), PHYSICAL)
        assert divergence_defect(u) > 1.0


class TestComposite:
    def test_validation(self, lat2, rng):
        T = TensorField(lat2, rng.standard_normal((2, 2, 16, 16)), PHYSICAL)
        with pytest.raises(ConfigError, match="s > -1"):
            composite_apply(T, -1.0, 0.1)
        with pytest.raises(ConfigError, match="t > 0"):
            composite_apply(T, 0.0, 0.0)

    def test_single_mode_oracle(self):
        lat = make_lattice(2, 16, 2.0 * np.pi)
        x, y = lat.meshgrid()
        phase = x + 2 * y
        data = np.zeros((2, 2, 16, 16))
        data[0, 0] = np.cos(phase)
        out = composite_apply(TensorField(lat, data, PHYSICAL), s=0.5, t=0.3)
        m = 5.0**0.25 * np.exp(-1.5)
        npt.assert_allclose(out.data[0], -0.8 * m * np.sin(phase), atol=1e-14)
        npt.assert_allclose(out.data[1], 0.4 * m * np.sin(phase), atol=1e-14)

    def test_matches_composition_of_parts(self, lat2, rng):
        T = TensorField(lat2, rng.standard_normal((2, 2, 16, 16)), PHYSICAL)
        s, t = 0.4, 0.2
        fused = composite_apply(T, s, t)
        composed = fractional_laplacian(
            heat_flow(leray_project(divergence_of_tensor(T)), t), s
        )
        scale = np.abs(to_physical(fused).data).max()
        defect = np.abs(to_physical(fused).data - to_physical(composed).data).max()
        assert defect < 1e-12 * scale

    def test_output_divergence_free(self, lat2, rng):
        T = TensorField(lat2, rng.standard_normal((2, 2, 16, 16)), PHYSICAL)
        assert divergence_defect(composite_apply(T, 0.0, 0.05)) < 1e-12


class TestKernelProfile:
    def test_radius_window_guard(self):
        with pytest.raises(WindowError, match="box_len/4"):
            kernel_profile(0.0, 2, radii=[5.0], resolution=128, box_len=16.0)

    def test_resolution_guard(self):
        with pytest.raises(ConfigError, match="too coarse"):
            kernel_profile(0.0, 2, radii=[1.0], resolution=16, box_len=16.0, t=0.01)

    def test_parameter_validation(self):
        with pytest.raises(ConfigError, match="s > -1"):
            kernel_profile(-1.5, 2, radii=[1.0], resolution=128)
        with pytest.raises(ConfigError, match="t > 0"):
            kernel_profile(0.0, 2, radii=[1.0], resolution=128, t=0.0)
        with pytest.raises(ConfigError, match="positive"):
            kernel_profile(0.0, 2, radii=[-1.0, 1.0], resolution=128)

    def test_tail_slope_tracks_algebraic_decay(self):
        """s = 0 in d = 2 decays like r^-3 once r clears the heat width."""
        radii = np.geomspace(0.5, 16.0, 30)
        prof = kernel_profile(
            0.0, 2, radii=radii, resolution=512, box_len=64.0, tail_window=(4.0, 16.0)
        )
        assert np.all(np.isfinite(prof.bound_ratio))
        assert abs(prof.tail_slope - (-3.0)) < 0.05
        assert prof.tail_residual < 0.05

    def test_csv_output(self, tmp_path):
        prof = kernel_profile(0.0, 2, radii=[0.5, 1.0, 2.0], resolution=256, box_len=16.0)
        path = tmp_path / "profile.csv"
        prof.to_csv(path)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "radius,kernel_value,bound_ratio"
        assert len(lines) == 4
        first = [float(v) for v in lines[1].split(",")]
        npt.assert_allclose(first[0], 0.5)
