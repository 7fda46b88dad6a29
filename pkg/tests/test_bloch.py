import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import ndimage

from cavitywalk.bloch import (
    bloch_bands,
    bloch_operator,
    cos_quasienergy,
    frame_winding,
    gap,
    phase_diagram,
    quasienergy_and_vector,
    winding_pair,
)
from cavitywalk.errors import UndefinedInvariantError, ValidationError

PI = math.pi
SX = np.array([[0, 1], [1, 0]], complex)
SY = np.array([[0, -1j], [1j, 0]])
SZ = np.diag([1.0, -1.0]).astype(complex)

angles = st.floats(-2 * PI, 2 * PI, allow_nan=False)


def eq9_cos(t1, t2, k):
    return math.cos(t2 / 2) * math.cos(t1 / 2) * math.cos(2 * k) + math.sin(t2 / 2) * math.sin(t1 / 2)


def numeric_vector(u):
    """n and E from U = cos E - i sin E n.sigma."""
    cos_e = np.real(np.trace(u)) / 2
    e = math.acos(max(-1.0, min(1.0, cos_e)))
    ns = 1j * (u - cos_e * np.eye(2)) / math.sin(e)
    return e, np.array([np.real(np.trace(s @ ns)) / 2 for s in (SX, SY, SZ)])


class TestBlochOperator:
    def test_free_walk(self):
        k = 0.37
        u = bloch_operator(0, 0, k)
        np.testing.assert_allclose(u, np.diag([np.exp(-2j * k), np.exp(2j * k)]), atol=1e-15)
        assert np.real(np.trace(u)) / 2 == pytest.approx(math.cos(2 * k))

    def test_unitary(self):
        rng = np.random.default_rng(0)
        for t1, t2, k in rng.uniform(-2 * PI, 2 * PI, (200, 3)):
            u = bloch_operator(t1, t2, k)
            np.testing.assert_allclose(u.conj().T @ u, np.eye(2), atol=1e-12)

    def test_trace_matches_closed_form(self):
        rng = np.random.default_rng(1)
        err = max(
            abs(np.real(np.trace(bloch_operator(t1, t2, k))) / 2 - eq9_cos(t1, t2, k))
            for t1, t2, k in rng.uniform(-2 * PI, 2 * PI, (1000, 3))
        )
        assert err < 1e-12

    def test_vectorized(self):
        k = np.linspace(-PI, PI, 7)
        u = bloch_operator(0.4, -1.2, k)
        assert u.shape == (7, 2, 2)
        np.testing.assert_allclose(u[3], bloch_operator(0.4, -1.2, k[3]))


class TestQuasienergy:
    def test_free_quarter(self):
        assert quasienergy_and_vector(0, 0, PI / 4).E == pytest.approx(PI / 2)

    @pytest.mark.parametrize("k", [-2.0, 0.0, 0.4, 1.3, 3.0])
    def test_flat_band(self, k):
        assert quasienergy_and_vector(PI / 3, PI, k).E == pytest.approx(PI / 3, abs=1e-12)

    def test_angle_difference_at_k0(self):
        d = quasienergy_and_vector(-PI / 4, 3 * PI / 8, 0.0)
        assert d.E == pytest.approx(5 * PI / 16, abs=1e-12)
        assert d.E == pytest.approx(0.9817, abs=1e-4)

    def test_degenerate_flagged(self):
        d = quasienergy_and_vector(PI / 3, PI / 3, 0.0)
        assert not d.defined
        assert d.E == pytest.approx(0, abs=1e-7)

    @settings(max_examples=100, deadline=None)
    @given(angles, angles, st.floats(-PI, PI))
    def test_unit_chiral_vector(self, t1, t2, k):
        d = quasienergy_and_vector(t1, t2, k)
        if math.sin(d.E) > 1e-6:
            assert d.n[0] == 0
            assert np.linalg.norm(d.n) == pytest.approx(1.0, abs=1e-10)

    @settings(max_examples=100, deadline=None)
    @given(angles, angles, st.floats(-PI, PI))
    def test_closed_form_vector_is_mirror_of_operator(self, t1, t2, k):
        d = quasienergy_and_vector(t1, t2, k)
        if math.sin(d.E) < 1e-4:
            return
        e, n = numeric_vector(bloch_operator(t1, t2, -k))
        assert e == pytest.approx(d.E, abs=1e-9)
        np.testing.assert_allclose(n, d.n, atol=1e-8)

    @settings(max_examples=100, deadline=None)
    @given(angles, angles, st.floats(-PI, PI))
    def test_chiral_symmetry_of_effective_hamiltonian(self, t1, t2, k):
        u = bloch_operator(t1, t2, k)
        e, n = numeric_vector(u) if abs(np.real(np.trace(u))) / 2 < 1 - 1e-8 else (0.0, np.zeros(3))
        h = e * (n[0] * SX + n[1] * SY + n[2] * SZ)
        np.testing.assert_allclose(SX @ h @ SX, -h, atol=1e-9)

    def test_bands_match_scalar(self):
        k = np.linspace(-PI, PI, 11)
        e, ny, nz, ok = bloch_bands(0.7, -1.1, k)
        for i, kk in enumerate(k):
            d = quasienergy_and_vector(0.7, -1.1, kk)
            assert e[i] == d.E and ny[i] == d.n[1] and nz[i] == d.n[2]
        np.testing.assert_allclose(np.cos(e), cos_quasienergy(0.7, -1.1, k), atol=1e-12)


class TestGap:
    def test_gap_zero_closes(self):
        assert gap(PI / 3, PI / 3).gap0 == pytest.approx(0, abs=1e-7)

    def test_gap_pi_closes(self):
        assert gap(PI / 3, -PI / 3).gap_pi == pytest.approx(0, abs=1e-7)

    def test_gapped_plateau_point(self):
        g0, gpi = gap(PI / 3, 0)
        assert g0 > 0.1 and gpi > 0.1

    @settings(max_examples=60, deadline=None)
    @given(angles, angles)
    def test_band_extremes_at_zone_centre_and_edge(self, t1, t2):
        # band extremes sit at cos 2k = +-1
        a = math.cos((t1 - t2) / 2)
        b = -math.cos((t1 + t2) / 2)
        g0, gpi = gap(t1, t2)
        assert g0 == pytest.approx(math.acos(min(1, max(a, b))), abs=1e-6)
        assert gpi == pytest.approx(PI - math.acos(max(-1, min(a, b))), abs=1e-6)

    def test_rejects_few_samples(self):
        with pytest.raises(ValidationError):
            gap(0.1, 0.2, 32)


class TestWinding:
    @pytest.mark.parametrize(
        "t1, t2, label",
        [
            (-PI / 4, 3 * PI / 8, (1, -1)),
            (3 * PI / 4, -5 * PI / 8, (-1, -1)),
            (-3 * PI / 4, -5 * PI / 8, (1, 1)),
            (PI / 3, 0.0, (-1, -1)),
            (PI / 4, 3 * PI / 8, (1, -1)),
        ],
    )
    def test_quoted_labels(self, t1, t2, label):
        assert tuple(winding_pair(t1, t2)) == label

    @pytest.mark.parametrize("t2, label", [(PI / 2, (1, -1)), (-PI / 2, (-1, 1)), (1.9 * PI, (-1, -1))])
    def test_moment_cut_regions(self, t2, label):
        assert tuple(winding_pair(PI / 3, t2)) == label

    def test_gapless_raises(self):
        with pytest.raises(UndefinedInvariantError):
            winding_pair(PI / 3, PI / 3)

    @settings(max_examples=40, deadline=None)
    @given(angles, angles)
    def test_integral_same_parity(self, t1, t2):
        g0, gpi = gap(t1, t2)
        if min(g0, gpi) < 1e-3:
            return
        a, b = frame_winding(t1, t2), frame_winding(t2, t1)
        assert abs(a - round(a)) < 1e-6 and abs(b - round(b)) < 1e-6
        assert (round(a) - round(b)) % 2 == 0

    @settings(max_examples=40, deadline=None)
    @given(angles, angles, st.floats(-PI, PI))
    def test_frames_share_spectrum(self, t1, t2, k):
        ea = np.sort(np.angle(np.linalg.eigvals(bloch_operator(t1, t2, k))))
        eb = np.sort(np.angle(np.linalg.eigvals(bloch_operator(t2, t1, k))))
        np.testing.assert_allclose(ea, eb, atol=1e-10)

    def test_fixed_theta2_transitions(self):
        # along theta2 = 3pi/2 the gaps close at theta1 = -3pi/2, -pi/2, pi/2, 3pi/2
        t2 = 1.5 * PI
        for t1 in (-1.5 * PI, -0.5 * PI, 0.5 * PI, 1.5 * PI):
            assert min(gap(t1, t2)) < 1e-7
        labels = [tuple(winding_pair(t1, t2)) for t1 in (-1.75 * PI, -PI, 0.0, PI, 1.75 * PI)]
        assert all(a != b for a, b in zip(labels, labels[1:]))


@pytest.fixture(scope="module")
def diagram():
    return phase_diagram(25, workers=4)


class TestPhaseDiagram:
    def test_boundary_matches_analytic_lines(self, diagram):
        t1, t2 = np.meshgrid(diagram.theta1, diagram.theta2, indexing="ij")
        closeness = np.minimum(
            1 - np.abs(np.cos((t1 - t2) / 2)), 1 - np.abs(np.cos((t1 + t2) / 2))
        )
        # gap < 1e-3 <=> 1 - |cos| < 1 - cos(1e-3)
        analytic = closeness < 1 - math.cos(1e-3)
        assert np.array_equal(diagram.boundary, analytic)
        assert diagram.boundary.any()

    def test_wrap_symmetry(self, diagram):
        for field in (diagram.nu0, diagram.nu_pi, diagram.boundary):
            assert np.array_equal(field[0], field[-1])
            assert np.array_equal(field[:, 0], field[:, -1])

    def test_labels_constant_on_regions(self, diagram):
        regions, count = ndimage.label(~diagram.boundary)
        assert count > 1
        for r in range(1, count + 1):
            cells = regions == r
            assert len(set(diagram.nu0[cells])) == 1
            assert len(set(diagram.nu_pi[cells])) == 1

    def test_parallel_matches_serial(self, diagram):
        serial = phase_diagram(25)
        assert np.array_equal(serial.nu0, diagram.nu0)
        assert np.array_equal(serial.nu_pi, diagram.nu_pi)

    def test_rejects_coarse_grid(self):
        with pytest.raises(ValidationError):
            phase_diagram(8)
