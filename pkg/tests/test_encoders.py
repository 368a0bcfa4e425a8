import numpy as np
import pytest

from qkoopman import (
    FormatError,
    LayoutError,
    ShapeError,
    SymmetryError,
    TrajectoryDataset,
    build_layout,
    wrap_phase,
)
from qkoopman.encoders import (
    FourierEncoder,
    IdentityPhaseEncoder,
    encode_trajectory,
    get_encoder,
    load_latent_trajectory,
)
from qkoopman.layout import ObservableState


class TestIdentityPhaseEncoder:
    def test_zero_angles(self):
        enc = IdentityPhaseEncoder(4)
        obs = enc.encode(np.zeros(4))
        np.testing.assert_array_equal(obs.modulus, np.ones(4))
        np.testing.assert_array_equal(obs.phase, np.zeros(4))

    def test_round_trip_is_wrap(self):
        enc = IdentityPhaseEncoder(8)
        x = np.linspace(-7, 7, 8)
        np.testing.assert_allclose(enc.decode(enc.encode(x)), wrap_phase(x), atol=1e-15)

    def test_pass_through_values(self):
        enc = IdentityPhaseEncoder(2)
        obs = enc.encode(np.array([np.pi / 3, -np.pi / 4]))
        np.testing.assert_allclose(obs.phase, [np.pi / 3, -np.pi / 4])
        np.testing.assert_array_equal(obs.modulus, [1.0, 1.0])

    def test_wrong_length(self):
        with pytest.raises(LayoutError):
            IdentityPhaseEncoder(4).encode(np.zeros(5))

    def test_circular_prediction_error(self):
        enc = IdentityPhaseEncoder(4)
        truth = np.array([0.5, 1.0, -0.5, 2.0])
        # predictions off by exact turns are perfect on the torus
        assert enc.prediction_error(truth + 2 * np.pi, truth) < 1e-12


class TestFourierEncoder:
    def test_constant_field(self):
        enc = FourierEncoder(4)
        obs = enc.encode(np.full(4, 2.5))
        np.testing.assert_allclose(obs.modulus, [10.0, 0, 0, 0], atol=1e-12)
        assert obs.phase[0] == pytest.approx(0.0, abs=1e-12)

    def test_pure_cosine_occupies_conjugate_bins(self):
        d = 16
        x = np.arange(d)
        field = np.cos(2 * np.pi * x / d)
        obs = FourierEncoder(d).encode(field)
        expected = np.zeros(d)
        expected[1] = expected[d - 1] = d / 2
        np.testing.assert_allclose(obs.modulus, expected, atol=1e-12)

    def test_negative_spectral_value_becomes_pi_phase(self):
        d = 8
        x = np.arange(d)
        field = -np.cos(2 * np.pi * x / d)
        obs = FourierEncoder(d).encode(field)
        assert obs.modulus[1] == pytest.approx(d / 2)
        assert abs(obs.phase[1]) == pytest.approx(np.pi, abs=1e-12)

    def test_round_trip_random_fields(self):
        rng = np.random.default_rng(4)
        enc = FourierEncoder(64)
        for _ in range(5):
            x = rng.normal(size=64)
            np.testing.assert_allclose(enc.decode(enc.encode(x)), x, atol=1e-12)

    def test_parseval(self):
        rng = np.random.default_rng(6)
        d = 128
        x = rng.normal(size=d)
        obs = FourierEncoder(d).encode(x)
        assert np.sum(obs.modulus**2) == pytest.approx(d * np.sum(x**2), rel=1e-9)

    def test_manual_symmetric_single_mode_decodes_to_cosine(self):
        d = 16
        lo = build_layout(d, 1, 1)
        r = np.zeros(d)
        phi = np.zeros(d)
        r[2] = r[d - 2] = d / 2
        obs = ObservableState(layout=lo, modulus=r, phase=phi)
        field = FourierEncoder(d).decode(obs)
        x = np.arange(d)
        np.testing.assert_allclose(field, np.cos(2 * np.pi * 2 * x / d), atol=1e-12)

    def test_asymmetric_spectrum_raises(self):
        d = 8
        lo = build_layout(d, 1, 1)
        r = np.zeros(d)
        r[1] = 1.0  # no conjugate partner
        obs = ObservableState(layout=lo, modulus=r, phase=np.zeros(d))
        with pytest.raises(SymmetryError):
            FourierEncoder(d).decode(obs)

    def test_zero_modulus_bins_snapped(self):
        d = 32
        x = np.cos(2 * np.pi * 3 * np.arange(d) / d)
        obs = FourierEncoder(d).encode(x)
        dead = obs.modulus == 0.0
        assert dead.sum() == d - 2
        np.testing.assert_array_equal(obs.phase[dead], 0.0)
        mask = FourierEncoder(d).modulus_mask(obs)
        assert mask.sum() == 2

    def test_field_shape_round_trip(self):
        rng = np.random.default_rng(10)
        field = rng.normal(size=(2, 4, 8))
        enc = FourierEncoder(64, field_shape=(2, 4, 8))
        out = enc.decode(enc.encode(field))
        assert out.shape == (2, 4, 8)
        np.testing.assert_allclose(out, field, atol=1e-12)

    def test_wrong_size(self):
        with pytest.raises(ShapeError):
            FourierEncoder(8).encode(np.zeros(7))


class TestLatentLoader:
    def _latent_dataset(self, modulus, phase, dt=0.5):
        snaps = np.stack([np.stack([m, p]) for m, p in zip(modulus, phase)])
        return TrajectoryDataset(snapshots=snaps, dt=dt, kind="latent")

    def test_constant_modulus_zero_drift(self):
        lo = build_layout(8, 1, 1)
        r = np.ones((4, 8))
        phi = np.cumsum(np.ones((4, 8)), axis=0)
        latent = load_latent_trajectory(self._latent_dataset(r, phi), lo)
        assert latent.modulus_drift == 0.0
        assert latent.state_at(2).phase[0] == pytest.approx(3.0)

    def test_drift_reported(self):
        lo = build_layout(8, 1, 1)
        r = np.ones((3, 8))
        r[2, 0] += 0.05
        latent = load_latent_trajectory(self._latent_dataset(r, np.zeros((3, 8))), lo)
        assert latent.modulus_drift == pytest.approx(0.05)

    def test_wrong_kind_rejected(self):
        lo = build_layout(8, 1, 1)
        ds = TrajectoryDataset(snapshots=np.zeros((3, 2, 8)), dt=1.0, kind="raw")
        with pytest.raises(FormatError):
            load_latent_trajectory(ds, lo)

    def test_wrong_width_rejected(self):
        lo = build_layout(16, 1, 1)
        ds = TrajectoryDataset(snapshots=np.zeros((3, 2, 8)), dt=1.0, kind="latent")
        with pytest.raises(FormatError):
            load_latent_trajectory(ds, lo)

    def test_negative_modulus_rejected(self):
        lo = build_layout(8, 1, 1)
        snaps = np.zeros((3, 2, 8))
        snaps[1, 0, 3] = -0.1
        ds = TrajectoryDataset(snapshots=snaps, dt=1.0, kind="latent")
        with pytest.raises(FormatError):
            load_latent_trajectory(ds, lo)


def test_encode_trajectory_stacks():
    rng = np.random.default_rng(2)
    snaps = rng.normal(size=(5, 16))
    r, phi = encode_trajectory(FourierEncoder(16), snaps)
    assert r.shape == (5, 16) and phi.shape == (5, 16)


def test_get_encoder_factory():
    assert isinstance(get_encoder("identity", 8), IdentityPhaseEncoder)
    assert isinstance(get_encoder("fourier", 8), FourierEncoder)
    with pytest.raises(LayoutError):
        get_encoder("neural", 8)
