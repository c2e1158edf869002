from __future__ import annotations

import math

import numpy as np
import pytest
from scipy import integrate

from inls.errors import BadExponent, BadSize, FieldFormatError, TailTooFat
from inls.grid import (ComplexField, Grid, cell_average_factor, gaussian_data, lattice_zeta,
                       make_grid, read_field, sample_weight, spectral_gradient, transform_forward,
                       transform_inverse, write_field)


def rand_field(grid, seed=0):
    rng = np.random.default_rng(seed)
    return ComplexField(grid, rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape))


# ------------------------------------------------------------------ grid

def test_grid_coordinates():
    g = make_grid(1, 16, 16)
    assert g.h == 1.0 and g.x[0] == -8.0 and g.x[-1] == 7.0
    g2 = make_grid(2, 2 * math.pi, 8)
    assert sorted(np.rint(g2.k).astype(int)) == list(range(-4, 4))
    assert np.allclose(g2.k, np.rint(g2.k))
    assert g2.shape == (8, 8)


@pytest.mark.parametrize("args", [(3, 16, 4), (1, 16, 12), (1, 16, 6), (4, 16, 8), (1, 0, 16),
                                  (1, -1, 16), (1, 16, 16.0)])
def test_grid_bad_size(args):
    with pytest.raises(BadSize):
        make_grid(*args)


def test_field_validation():
    g = make_grid(1, 16, 16)
    with pytest.raises(ValueError):
        ComplexField(g, np.zeros(15))
    v = np.zeros(16, complex)
    v[3] = np.nan
    with pytest.raises(ValueError):
        ComplexField(g, v)


# ---------------------------------------------------------------- weight

def test_weight_values_and_symmetry():
    for d, n in ((1, 64), (2, 32), (3, 16)):
        g = make_grid(d, float(n), n)  # h = 1
        w = sample_weight(g, 0.5)
        assert np.all(w.values > 0)
        # off-origin nodes hold |x|^-b exactly
        idx = list(g.origin_index)
        idx[0] += 1
        assert w.values[tuple(idx)] == pytest.approx(1.0, abs=1e-15)
        # negation symmetry excluding the unpaired -L/2 plane
        inner = w.values[(slice(1, None),) * d]
        assert np.array_equal(inner, np.flip(inner))


def test_weight_bad_exponent():
    with pytest.raises(BadExponent):
        sample_weight(make_grid(1, 16, 16), 1.0)
    with pytest.raises(BadExponent):
        sample_weight(make_grid(1, 16, 16), 1.5)
    with pytest.raises(ValueError):
        sample_weight(make_grid(1, 16, 16), 0.5, origin="cap")


def test_weight_zero_power_is_one():
    w = sample_weight(make_grid(2, 16, 16), 0.0)
    assert np.all(w.values == 1.0)
    w = sample_weight(make_grid(2, 16, 16), 1e-9)
    assert np.allclose(w.values, 1.0, atol=1e-7)


def test_cell_average_origin():
    g = make_grid(1, 16, 64)
    w = sample_weight(g, 0.5, origin="cell_average")
    h = g.h
    # (1/h) * integral over [-h/2, h/2] of |x|^-1/2 = (1/h) * 4 sqrt(h/2)
    exact = 4 * math.sqrt(h / 2) / h
    assert w.values[g.origin_index] == pytest.approx(exact, rel=1e-12)
    quad, _ = integrate.quad(lambda x: abs(x) ** -0.5, -h / 2, h / 2, points=[0.0])
    assert w.values[g.origin_index] == pytest.approx(quad / h, rel=1e-10)


@pytest.mark.parametrize("d,b", [(1, 0.25), (1, 0.75), (2, 0.5), (2, 1.5), (3, 1.0), (3, 1.9)])
def test_cell_average_dominates_neighbour(d, b):
    g = make_grid(d, 16.0, 16)
    w = sample_weight(g, b, origin="cell_average")
    idx = list(g.origin_index)
    idx[0] += 1
    assert w.values[g.origin_index] >= w.values[tuple(idx)]


def test_cell_average_factor_2d_quadrature():
    b = 0.5
    val, _ = integrate.dblquad(lambda y, x: (x * x + y * y) ** (-b / 2), 0, 1, 0, 1)
    assert cell_average_factor(2, b) == pytest.approx(val, rel=1e-8)


def test_lattice_zeta_known_values():
    from mpmath import zeta
    assert lattice_zeta(1, 0.5) == pytest.approx(2 * float(zeta(0.5)), rel=1e-12)
    # Z_2(s) = 4 zeta(s/2) beta(s/2) with the Dirichlet beta function
    from mpmath import dirichlet
    s = 3.0
    exact = 4 * float(zeta(s / 2)) * float(dirichlet(s / 2, [0, 1, 0, -1]))
    assert lattice_zeta(2, s) == pytest.approx(exact, rel=1e-10)


def test_lattice_weight_quadrature_order():
    # discrete integral of |x|^-b g(x) against the exact value: error ~ h^2 with the lattice
    # origin, only ~ h^(d-b) with the cell average
    b = 0.5
    exact = 2 * integrate.quad(lambda x: x ** -b * math.exp(-x * x), 0, np.inf)[0]
    errs = {}
    for origin in ("lattice", "cell_average"):
        e = []
        for n in (128, 256, 512):
            g = make_grid(1, 16.0, n)
            w = sample_weight(g, b, origin=origin)
            e.append(abs(np.sum(w.values * np.exp(-g.x ** 2)) * g.h - exact))
        errs[origin] = e
    lat = errs["lattice"]
    assert lat[0] / lat[1] > 3.5 and lat[1] / lat[2] > 3.5
    assert lat[-1] < errs["cell_average"][-1]


# ------------------------------------------------------------ transforms

@pytest.mark.parametrize("d,n", [(1, 64), (2, 32), (3, 16)])
def test_round_trip_and_parseval(d, n):
    g = make_grid(d, 10.0, n)
    f = rand_field(g, seed=d)
    c = transform_forward(f)
    back = transform_inverse(c, g)
    assert np.max(np.abs(back.values - f.values)) < 1e-12
    lhs = np.sum(np.abs(f.values) ** 2) * g.cell_volume
    rhs = np.sum(np.abs(c) ** 2) * g.L ** d
    assert abs(lhs - rhs) / lhs < 1e-12


def test_constant_and_plane_wave_coefficients():
    g = make_grid(1, 2 * math.pi, 16)
    c = transform_forward(ComplexField(g, np.full(16, 3.0 + 0j)))
    assert abs(c[0] - 3.0) < 1e-14 and np.max(np.abs(c[1:])) < 1e-14
    c = transform_forward(ComplexField(g, np.exp(1j * g.x)))
    assert abs(c[1] - 1.0) < 1e-14
    mask = np.ones(16, bool)
    mask[1] = False
    assert np.max(np.abs(c[mask])) < 1e-14


def test_spectral_gradient():
    g = make_grid(1, 2 * math.pi, 32)
    assert np.max(np.abs(spectral_gradient(ComplexField(g, np.ones(32)))[0].values)) < 1e-14
    dx = spectral_gradient(ComplexField(g, np.exp(1j * g.x)))[0].values
    assert np.max(np.abs(dx - 1j * np.exp(1j * g.x))) < 1e-12
    g = make_grid(2, 20.0, 64)
    f = gaussian_data(g, 1.0, 1.0)
    grads = spectral_gradient(f)
    x, y = g.axis_coords()
    assert len(grads) == 2
    assert np.max(np.abs(grads[0].values - (-x) * f.values)) < 1e-8
    assert np.max(np.abs(grads[1].values - (-y) * f.values)) < 1e-8


# -------------------------------------------------------------- gaussian

def test_gaussian_mass_and_shape():
    g = make_grid(1, 16.0, 256)
    f = gaussian_data(g, 1.0, 1.0)
    assert abs(np.sum(np.abs(f.values) ** 2) * g.h - math.sqrt(math.pi)) < 1e-10
    z = gaussian_data(g, 0.0, 1.0)
    assert not np.any(z.values)
    p = gaussian_data(g, 2.0, 1.0, center=0.5, phase=3.0)
    assert np.allclose(p.values, 2 * np.exp(-(g.x - 0.5) ** 2 / 2) * np.exp(3j * g.x))


def test_gaussian_tail_too_fat():
    g = make_grid(1, 16.0, 64)
    with pytest.raises(TailTooFat):
        gaussian_data(g, 1.0, 32.0)
    with pytest.raises(TailTooFat):
        gaussian_data(g, 1.0, 1.0, center=7.5)
    gaussian_data(g, 1.0, 1.0)  # e^-32 at the edge is below the threshold


# ------------------------------------------------------------------- I/O

def test_field_binary_round_trip(tmp_path):
    g = make_grid(2, 12.5, 16)
    f = rand_field(g, 3)
    path = tmp_path / "u.bin"
    write_field(path, f)
    raw = path.read_bytes()
    assert len(raw) == 24 + 16 * 256
    import struct
    assert struct.unpack_from("<QQd", raw) == (2, 16, 12.5)
    assert np.frombuffer(raw[24:], "<c16")[17] == f.values[1, 1]
    back = read_field(path)
    assert back.grid == g and np.array_equal(back.values, f.values)


def test_field_format_errors(tmp_path):
    g = make_grid(1, 8.0, 8)
    path = tmp_path / "u.bin"
    write_field(path, rand_field(g))
    raw = path.read_bytes()
    (tmp_path / "short.bin").write_bytes(raw[:10])
    (tmp_path / "trunc.bin").write_bytes(raw[:-8])
    import struct
    (tmp_path / "badn.bin").write_bytes(struct.pack("<QQd", 1, 7, 8.0) + raw[24:])
    for name in ("short.bin", "trunc.bin", "badn.bin"):
        with pytest.raises(FieldFormatError):
            read_field(tmp_path / name)


def test_grid_equality_is_value_based():
    assert Grid(1, 16, 16) == Grid(1, 16.0, 16)
