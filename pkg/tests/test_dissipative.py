import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nlpspec.charfn import Controls, ProblemSpec, char_residual
from nlpspec.dissipative import (
    check_dissipative,
    construct_real_eigen,
    constructed_spec,
    real_eigen_census,
)
from nlpspec.eigensystem import eigen_residual, eigenfunction
from nlpspec.errors import HypothesisViolationError, ParameterError, TheoremViolationError
from nlpspec.funcspace import Grid, GridFunction
from nlpspec.localization import Spectrum, spectrum_of
from nlpspec.rootfinder import LocatedZero, Rectangle

TWO_PI = 2 * np.pi


def const_i(grid=None):
    return GridFunction.from_callable(lambda x: 1j + 0 * x, grid)


def test_margin_examples():
    zero = lambda x: 0 * x
    r = check_dissipative(ProblemSpec.from_callables(lambda x: 1j + 0 * x, 1.0, zero))
    assert r.admissible and abs(r.margin) < 1e-9
    r = check_dissipative(ProblemSpec.from_callables(lambda x: 1j + 0 * x, 1.1, zero))
    assert not r.admissible and abs(r.margin + 0.21) < 1e-9
    k = lambda x: -2j * np.exp(-(TWO_PI - x))
    r = check_dissipative(ProblemSpec.from_callables(lambda x: 1j + 0 * x, np.exp(-TWO_PI), k))
    assert r.admissible and abs(r.margin) < 1e-9


def test_hypothesis_violation():
    with pytest.raises(HypothesisViolationError):
        check_dissipative(ProblemSpec.from_callables(lambda x: -0.1j + 0 * x, 0.5, lambda x: 0 * x))


def test_range_proxy():
    # k nonzero where V_I vanishes fails the range proxy
    spec = ProblemSpec.from_callables(lambda x: 1j * np.sin(x) ** 2, 0.1, lambda x: 0.01 + 0 * x)
    r = check_dissipative(spec)
    assert not r.range_ok and not r.admissible
    assert r.details["cut_points"] > 0


def test_construct_examples():
    V = const_i()
    x = V.grid.x
    rho, k, g = construct_real_eigen(V, 0.0)
    assert abs(rho - np.exp(-TWO_PI)) < 1e-10
    want = -2j * np.exp(-(TWO_PI - x))
    assert np.max(np.abs(k.values - want)) < 1e-10
    assert np.max(np.abs(g.values - want)) < 1e-10
    assert abs(g.end + 2j) < 1e-14
    rho1, k1, g1 = construct_real_eigen(V, 1.0)
    assert abs(rho1 - np.exp(-TWO_PI)) < 1e-10
    assert np.max(np.abs(g1.values - want * np.exp(1j * (TWO_PI - x)))) < 1e-10
    spec = constructed_spec(V, 1.0)
    assert abs(char_residual(spec, 1.0)) < 1e-7
    r, bc = eigen_residual(spec, 1.0, eigenfunction(spec, 1.0))
    assert r < 1e-6 and bc < 1e-8


def test_construct_vanishing_VI():
    V = GridFunction.from_callable(lambda x: 1j * np.sin(x) ** 2)
    spec = constructed_spec(V, 0.0)
    r = check_dissipative(spec)
    assert r.range_ok and abs(r.margin) < 1e-9
    assert abs(char_residual(spec, 0.0)) < 1e-7


def test_construct_rejects_complex_lambda():
    with pytest.raises(ParameterError):
        construct_real_eigen(const_i(), 0.5 + 0.1j)


def test_census_examples():
    damped = ProblemSpec.from_callables(lambda x: 1j + 0 * x, 1.0, lambda x: 0 * x, Controls(window=6))
    s, _ = spectrum_of(damped)
    assert real_eigen_census(s).count == 0
    spec = constructed_spec(const_i(), 0.0, Controls(window=6))
    s, _ = spectrum_of(spec)
    c = real_eigen_census(s)
    assert c.count == 1 and abs(c.witnesses[0]) < 1e-8
    scaled = ProblemSpec(spec.V, spec.rho, 0.9 * spec.k, spec.controls)
    s, _ = spectrum_of(scaled)
    assert real_eigen_census(s, tol=1e-4).count == 0


def test_census_alarm():
    zs = (LocatedZero(0.1 + 0j, 1, 0.0), LocatedZero(2.0 + 0j, 1, 0.0))
    with pytest.raises(TheoremViolationError):
        real_eigen_census(Spectrum(zs, 0, Rectangle.centred(0, 1), {}))


def _perturbed(spec, rng):
    x = spec.grid.x
    bump = rng.normal(size=3) + 1j * rng.normal(size=3)
    shape = bump[0] + bump[1] * np.cos(x) + bump[2] * np.sin(x)
    k = GridFunction(spec.k.values * (1 + 0.01 * shape), spec.grid)
    rho = spec.rho * (1 + 0.01 * (rng.normal() + 1j * rng.normal()))
    trial = ProblemSpec(spec.V, rho, k, spec.controls)
    w = check_dissipative(trial).details["weighted_norm_sq"]
    room = 1 - abs(rho) ** 2
    if 0.5 * w > room:
        k = np.sqrt(room / (0.5 * w)) * 0.999 * k
    return ProblemSpec(spec.V, rho, k, spec.controls)


def test_uniqueness_probe():
    base = constructed_spec(const_i(), 0.0, Controls(window=4))
    rng = np.random.default_rng(2024)
    for _ in range(5):
        spec = _perturbed(base, rng)
        assert check_dissipative(spec).admissible
        s, _ = spectrum_of(spec)
        assert real_eigen_census(s).count == 0


@given(st.floats(0.05, 2.0), st.floats(0.0, 2.0), st.floats(-5, 5))
def test_construction_equality(a, b, lam):
    g = Grid(512)
    V = GridFunction.from_callable(lambda x: 0.3 * np.cos(x) + 1j * (a + b * np.sin(x) ** 2), g)
    spec = ProblemSpec(V, *construct_real_eigen(V, lam)[:2], Controls(grid=512))
    r = check_dissipative(spec)
    assert r.admissible and abs(r.margin) < 1e-9
    assert abs(char_residual(spec, lam)) < 1e-7


@settings(max_examples=10)
@given(st.floats(0.05, 2.0), st.floats(0.0, 0.99))
def test_gate_soundness(a, s):
    V = GridFunction.from_callable(lambda x: 1j * (a + 0.5 * np.sin(x) ** 2), Grid(512))
    base = ProblemSpec(V, *construct_real_eigen(V, 0.0)[:2], Controls(grid=512, window=4))
    spec = ProblemSpec(V, base.rho, s * base.k, base.controls)
    assert check_dissipative(spec).admissible
    sp, _ = spectrum_of(spec)
    assert np.all(sp.values.imag >= -1e-8)
