import numpy as np
import pytest

from plasmon_biphoton.film import (
    FilmModel,
    ResonanceFamily,
    default_film,
    film_matrix,
    load_tabulated,
    resonance_wavelength,
    save_tabulated,
    transmittance,
)
from plasmon_biphoton.jones import linear_pol, rotation


@pytest.fixture(scope="module")
def film():
    return default_film()


def diagonal_family(film):
    return film.families[0]


def axis_family(film):
    return film.families[1]


# --- resonance wavelengths -------------------------------------------------

def test_diagonal_resonance_calibrated_to_797(film):
    lam = resonance_wavelength(diagonal_family(film), (1, 1), (0.0, 0.0), film.period)
    assert lam == pytest.approx(797.0, abs=1e-9)


def test_axis_resonance_calibrated_to_728(film):
    lam = resonance_wavelength(axis_family(film), (1, 0), (0.0, 0.0), film.period)
    assert lam == pytest.approx(728.0, abs=1e-9)


def test_resonance_formula_at_normal_incidence(film):
    for fam, order in [(diagonal_family(film), (1, -1)), (axis_family(film), (0, 1))]:
        m1, m2 = order
        expected = fam.n_eff * film.period / np.hypot(m1, m2)
        got = resonance_wavelength(fam, order, (0.0, 0.0), film.period)
        assert got == pytest.approx(expected, rel=1e-14)


def test_singular_order_raises(film):
    fam = axis_family(film)
    g = 2.0 * np.pi / film.period
    with pytest.raises(ValueError):
        resonance_wavelength(fam, (1, 0), (-g, 0.0), film.period)


def test_resonance_split_slope_matches_finite_differences(film):
    # along the diagonal the (1,1) and (-1,-1) resonances move oppositely,
    # linearly in |q|; oracle: central finite differences of the exact formula
    fam = diagonal_family(film)
    direction = np.array([1.0, 1.0]) / np.sqrt(2.0)
    h = 1e-7

    def lam_along(order, t):
        return resonance_wavelength(fam, order, t * direction, film.period)

    slope_pp = (lam_along((1, 1), h) - lam_along((1, 1), -h)) / (2 * h)
    slope_mm = (lam_along((-1, -1), h) - lam_along((-1, -1), -h)) / (2 * h)
    g_norm = 2.0 * np.pi * np.sqrt(2.0) / film.period
    analytic = -797.0 / g_norm
    assert slope_pp == pytest.approx(analytic, rel=1e-5)
    assert slope_mm == pytest.approx(-analytic, rel=1e-5)


# --- film matrix symmetries ------------------------------------------------

def test_normal_incidence_matrix_proportional_to_identity(film):
    for lam in (728.0, 797.0, 813.0, 850.0):
        m = film_matrix(film, (0.0, 0.0), lam)
        scale = abs(m[0, 0])
        assert abs(m[0, 1]) <= 1e-12 * scale
        assert abs(m[1, 0]) <= 1e-12 * scale
        assert abs(m[0, 0] - m[1, 1]) <= 1e-12 * scale


def test_diagonal_dyads_sum_to_identity_times_two():
    amp = 0.1
    fam = ResonanceFamily.make((1, 1), 797.0, 5.0, amp, 700.0)
    lone = FilmModel(period=700.0, direct_amplitude=0.0, families=(fam,))
    for lam in (770.0, 797.0, 820.0):
        m = film_matrix(lone, (0.0, 0.0), lam)
        lorentz = 1j * 5.0 / (lam - 797.0 + 1j * 5.0)
        assert np.allclose(m, 2.0 * amp * lorentz * np.eye(2), atol=1e-15)


def test_point_group_equivariance(film):
    rng = np.random.default_rng(3)
    q = rng.uniform(-8e-4, 8e-4, size=2)
    lam = 795.0
    base = film_matrix(film, q, lam)
    group = [np.round(rotation(k * np.pi / 2).real) for k in range(4)]
    group += [np.diag([1.0, -1.0]) @ g for g in group]
    for g in group:
        lhs = film_matrix(film, g @ q, lam)
        rhs = g @ base @ g.T
        assert np.allclose(lhs, rhs, atol=1e-12 * np.max(np.abs(base)))


def test_matrix_is_symmetric(film):
    m = film_matrix(film, (3e-4, -1e-4), 790.0)
    assert m[0, 1] == pytest.approx(m[1, 0], abs=1e-16)


def test_energy_bound(film):
    # largest singular value over a (q, lambda) scan stays below 1
    qs = np.linspace(-1.1e-3, 1.1e-3, 21)
    worst = 0.0
    for lam in np.linspace(700.0, 860.0, 33):
        for qx in qs:
            for qy in qs[::4]:
                m = film_matrix(film, (qx, qy), lam)
                worst = max(worst, np.linalg.svd(m, compute_uv=False)[0])
    assert worst <= 1.0


# --- transmittance ---------------------------------------------------------

def test_opaque_film_transmits_nothing():
    opaque = FilmModel(period=700.0, direct_amplitude=0.0, families=())
    assert transmittance(opaque, (2e-4, 0.0), 800.0, linear_pol(0.3)) == 0.0


def test_normal_incidence_transmittance_polarization_independent(film):
    t0 = transmittance(film, (0.0, 0.0), 797.0, linear_pol(0.0))
    for ang in (0.3, 1.0, 2.2):
        assert transmittance(film, (0.0, 0.0), 797.0, linear_pol(ang)) == pytest.approx(t0)


def test_peak_transmittance_is_a_few_percent(film):
    t = transmittance(film, (0.0, 0.0), 797.0, linear_pol(0.7))
    assert 0.01 < t < 0.1


# --- tabulated grids -------------------------------------------------------

def sample_tabulated(tmp_path):
    film = default_film()
    qs = np.linspace(-5e-4, 5e-4, 5)
    lams = np.array([790.0, 797.0, 804.0])
    rows = []
    for lam in lams:
        for qx in qs:
            for qy in qs:
                m = film_matrix(film, (qx, qy), lam)
                rows.append([qx, qy, lam,
                             m[0, 0].real, m[0, 0].imag, m[0, 1].real, m[0, 1].imag,
                             m[1, 0].real, m[1, 0].imag, m[1, 1].real, m[1, 1].imag])
    path = tmp_path / "film.csv"
    header = "qx,qy,lambda_nm,re_xx,im_xx,re_xy,im_xy,re_yx,im_yx,re_yy,im_yy"
    path.write_text(header + "\n" + "\n".join(
        ",".join(f"{v:.8e}" for v in row) for row in rows) + "\n")
    return path


def test_tabulated_round_trip(tmp_path):
    path = sample_tabulated(tmp_path)
    model = load_tabulated(path)
    out = tmp_path / "roundtrip.csv"
    save_tabulated(model, out)
    assert out.read_text() == path.read_text()


def test_tabulated_interpolation_midpoint(tmp_path):
    model = load_tabulated(sample_tabulated(tmp_path))
    g = model.tabulated
    lam_mid = 0.5 * (g.lam[0] + g.lam[1])
    got = film_matrix(model, (g.qx[1], g.qy[2]), lam_mid)
    expected = 0.5 * (g.matrices[0, 1, 2] + g.matrices[1, 1, 2])
    assert np.allclose(got, expected, atol=1e-15)


def test_tabulated_matches_grid_nodes(tmp_path):
    model = load_tabulated(sample_tabulated(tmp_path))
    g = model.tabulated
    got = film_matrix(model, (g.qx[3], g.qy[0]), g.lam[2])
    assert np.allclose(got, g.matrices[2, 3, 0], atol=1e-14)


def test_tabulated_refuses_extrapolation(tmp_path):
    model = load_tabulated(sample_tabulated(tmp_path))
    with pytest.raises(ValueError):
        film_matrix(model, (0.0, 0.0), 700.0)
    with pytest.raises(ValueError):
        film_matrix(model, (1.0, 0.0), 797.0)


def test_tabulated_rejects_non_rectangular(tmp_path):
    path = sample_tabulated(tmp_path)
    lines = path.read_text().splitlines()
    path.write_text("\n".join(lines[:-1]) + "\n")  # drop one row
    with pytest.raises(ValueError):
        load_tabulated(path)


def test_tabulated_rejects_nan(tmp_path):
    path = sample_tabulated(tmp_path)
    text = path.read_text().splitlines()
    parts = text[1].split(",")
    parts[3] = "nan"
    text[1] = ",".join(parts)
    path.write_text("\n".join(text) + "\n")
    with pytest.raises(ValueError):
        load_tabulated(path)


# --- family validation -----------------------------------------------------

def test_family_requires_effective_index_above_one():
    with pytest.raises(ValueError):
        ResonanceFamily.make((1, 0), 650.0, 5.0, 0.1, 700.0)


def test_family_orders_are_point_group_closed(film):
    fam = diagonal_family(film)
    assert fam.orders == frozenset({(1, 1), (1, -1), (-1, 1), (-1, -1)})
    fam = axis_family(film)
    assert fam.orders == frozenset({(1, 0), (-1, 0), (0, 1), (0, -1)})
