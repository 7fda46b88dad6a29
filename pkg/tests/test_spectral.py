import math

import numpy as np
import pytest

from cavitywalk.bloch import gap, winding_pair
from cavitywalk.errors import ValidationError
from cavitywalk.model import CavityScattering, CoinProfile, SpinorField, WalkConfig
from cavitywalk.spectral import (
    build_dense_operator,
    detect_boundary_modes,
    eigenphases,
    ring_sites,
    ring_walls,
)
from cavitywalk.walk import walk_step

from conftest import WALL_CASES

PI = math.pi


def column_error(size, profile, scattering=None):
    sc = scattering or CavityScattering.ideal()
    u = build_dense_operator(size, profile, sc)
    cfg = WalkConfig(profile, 1, sc)
    worst = 0.0
    for j in range(2 * size):
        basis = np.zeros(2 * size, complex)
        basis[j] = 1
        psi = SpinorField(-(size // 2), basis.reshape(size, 2), periodic=True)
        out = walk_step(psi, cfg).amplitudes.reshape(-1)
        worst = max(worst, np.max(np.abs(out - u[:, j])))
    return worst


def report_for(profile, size=40, **kw):
    modes = eigenphases(build_dense_operator(size, profile))
    return detect_boundary_modes(modes, ring_walls(size, profile), **kw)


class TestDenseOperator:
    def test_free_ring_is_signed_permutation(self):
        u = build_dense_operator(8, CoinProfile.homogeneous(0, 0))
        expected = np.zeros((16, 16))
        for i in range(8):
            expected[2 * ((i + 2) % 8), 2 * i] = 1
            expected[2 * ((i - 2) % 8) + 1, 2 * i + 1] = 1
        np.testing.assert_array_equal(u, expected)

    def test_column_oracle_wall_cases(self, wall_case):
        assert column_error(16, wall_case[1]) < 1e-12

    def test_column_oracle_random(self):
        rng = np.random.default_rng(2)
        for _ in range(5):
            t = rng.uniform(-2 * PI, 2 * PI, 4)
            sc = CavityScattering.from_polar(*rng.uniform(0.5, 1, 1), rng.uniform(0, 2 * PI),
                                             *rng.uniform(0.5, 1, 1), rng.uniform(0, 2 * PI))
            profile = CoinProfile(*t, wall_position=int(rng.integers(-3, 4)))
            assert column_error(12, profile, sc) < 1e-12

    def test_unitary(self, wall_case):
        u = build_dense_operator(40, wall_case[1])
        np.testing.assert_allclose(u.conj().T @ u, np.eye(80), atol=1e-10)

    @pytest.mark.parametrize("size", [7, 9, 6])
    def test_rejects_bad_size(self, size):
        with pytest.raises(ValidationError):
            build_dense_operator(size, CoinProfile.homogeneous(0, 0))


class TestEigenphases:
    def test_free_ring_spectrum(self):
        modes = eigenphases(build_dense_operator(8, CoinProfile.homogeneous(0, 0)))
        e = np.array([m.quasienergy for m in modes])
        e = np.where(e < -PI + 1e-9, PI, e)
        distinct = sorted({round(float(v), 9) + 0.0 for v in e})
        assert distinct == pytest.approx([-PI / 2, 0.0, PI / 2, PI])

    def test_flat_band(self):
        modes = eigenphases(build_dense_operator(24, CoinProfile.homogeneous(PI / 3, PI)))
        np.testing.assert_allclose(np.abs([m.quasienergy for m in modes]), PI / 3, atol=1e-8)

    def test_unit_modulus(self):
        rng = np.random.default_rng(4)
        profile = CoinProfile(*rng.uniform(-2 * PI, 2 * PI, 4))
        modes = eigenphases(build_dense_operator(20, profile))
        assert sum(abs(m.eigenvalue) ** 2 for m in modes) == pytest.approx(40, abs=1e-6)
        assert all(abs(m.modulus - 1) < 1e-8 for m in modes)
        assert all(abs(np.linalg.norm(m.vector) - 1) < 1e-10 for m in modes)

    def test_sorted_and_chiral_pairs(self, wall_case):
        e = np.array([m.quasienergy for m in eigenphases(build_dense_operator(40, wall_case[1]))])
        assert np.all(np.diff(e) >= 0)
        folded = np.sort(np.where(np.abs(e) > PI - 1e-9, PI, e))
        mirrored = np.sort(np.where(np.abs(-e) > PI - 1e-9, PI, -e))
        np.testing.assert_allclose(folded, mirrored, atol=1e-8)

    def test_lossy_inside_disk(self, realistic):
        modes = eigenphases(build_dense_operator(20, CoinProfile.from_pi(*WALL_CASES["zero_modes"]), realistic))
        mods = np.array([m.modulus for m in modes])
        assert np.all(mods < 1)
        np.testing.assert_allclose(mods, 0.98**2, atol=1e-8)


class TestBoundaryModes:
    def test_zero_mode_case(self):
        r = report_for(CoinProfile.from_pi(*WALL_CASES["zero_modes"]))
        assert [w.count_zero for w in r.walls] == [2, 2]
        assert r.count_pi == 0 and r.candidates_pi == 0

    def test_pi_mode_case(self):
        r = report_for(CoinProfile.from_pi(*WALL_CASES["pi_modes"]))
        assert [w.count_pi for w in r.walls] == [2, 2]
        assert r.count_zero == 0 and r.candidates_zero == 0

    def test_same_phase_case(self):
        r = report_for(CoinProfile.from_pi(*WALL_CASES["same_phase"]))
        assert r.count_zero == r.count_pi == 0

    def test_finite_size_stable(self, wall_case):
        small = report_for(wall_case[1], 40)
        large = report_for(wall_case[1], 80)
        assert [(w.count_zero, w.count_pi) for w in small.walls] == [(w.count_zero, w.count_pi) for w in large.walls]

    def test_boundary_modes_localized(self):
        profile = CoinProfile.from_pi(*WALL_CASES["zero_modes"])
        modes = eigenphases(build_dense_operator(80, profile))
        zero = [m for m in modes if abs(m.quasienergy) < 0.05]
        assert zero and all(m.localization_length < 5 for m in zero)

    def test_bulk_edge_correspondence(self, wall_case):
        profile = wall_case[1]
        left, right = winding_pair(*profile.left), winding_pair(*profile.right)
        r = report_for(profile)
        for w in r.walls:
            assert w.count_zero == abs(left.nu0 - right.nu0)
            assert w.count_pi == abs(left.nu_pi - right.nu_pi)

    def test_bulk_edge_random_pairs(self):
        rng = np.random.default_rng(2024)
        found = 0
        while found < 5:
            t = rng.uniform(-2 * PI, 2 * PI, 4)
            if min(*gap(t[0], t[1]), *gap(t[2], t[3])) < 0.4:
                continue
            profile = CoinProfile(*t)
            left, right = winding_pair(*profile.left), winding_pair(*profile.right)
            r = report_for(profile, 60, e_tol=0.1)
            for w in r.walls:
                assert w.count_zero == abs(left.nu0 - right.nu0)
                assert w.count_pi == abs(left.nu_pi - right.nu_pi)
            found += 1

    def test_ring_geometry(self):
        assert ring_sites(8).tolist() == [-4, -3, -2, -1, 0, 1, 2, 3]
        assert ring_walls(40, CoinProfile.homogeneous(0, 0)) == [0, -20]
