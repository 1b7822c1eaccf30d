import numpy as np
import pytest

from nlpspec.charfn import CoeffSequence, Controls, ProblemSpec, ReducedProblem, char_residual, phi_eval
from nlpspec.dissipative import check_dissipative, constructed_spec
from nlpspec.errors import ParameterError, SingularityError, StateError, ThresholdNotFoundError
from nlpspec.funcspace import GridFunction, fourier_coeff
from nlpspec.localization import (
    Spectrum,
    assemble_spectrum,
    certify_height,
    disk_radius,
    hilbert_row,
    map_spectrum,
    spectrum_of,
    tail_threshold,
    threshold_report,
)
from nlpspec.rootfinder import LocatedZero, Rectangle, isolate_zeros
from oracles import KTILDE_ZEROS


@pytest.fixture(scope="module")
def tilde_spectrum(red_tilde):
    return assemble_spectrum(red_tilde, b=1.4, window=8, N=3)


def test_disk_radius_examples(red_zero, red_tilde):
    assert disk_radius(red_zero, 7) == 0
    assert abs(disk_radius(red_tilde, 4) - np.sqrt(np.pi) / 4) < 1e-13
    assert disk_radius(red_tilde, 0) < 1e-14


def test_disk_radius_ktilde_law(red_tilde):
    for n in range(1, 40):
        assert abs(disk_radius(red_tilde, n) - np.sqrt(np.pi) / n) < 1e-12


def test_hilbert_row_examples(red_tilde):
    a = CoeffSequence.from_modes({0: 1.0})
    assert abs(hilbert_row(a, 0.5, 2) - 0.4) < 1e-15
    assert abs(hilbert_row(a, 0.5, -1) + 2) < 1e-15
    m = np.arange(-64, 65)
    coeffs = [fourier_coeff(red_tilde.K, -int(j)) for j in m]
    brute = sum(c / (j + 5 + 0.25) for c, j in zip(coeffs, m))
    assert abs(hilbert_row(red_tilde.a, 0.25, 5) - brute) < 1e-12


def test_hilbert_row_singular():
    with pytest.raises(SingularityError):
        hilbert_row(CoeffSequence.from_modes({2: 1.0}), 0.0, -2)


def test_tail_threshold_examples(red_zero, red_03, red_tilde, grid):
    assert tail_threshold(red_zero) == 0
    assert tail_threshold(red_03) == 0
    assert tail_threshold(red_tilde) == 3
    assert tail_threshold(ReducedProblem.from_K(GridFunction.constant(-0.7, grid))) == 1


def test_threshold_not_found(grid):
    big = ReducedProblem.from_K(GridFunction.from_callable(lambda t: 10 * (t - np.pi), grid))
    with pytest.raises(ThresholdNotFoundError):
        tail_threshold(big, n_max=20)
    rep = threshold_report(big, n_max=20)
    assert rep.N == 20


def test_certify_height_grows_b(red_tilde):
    b = certify_height(red_tilde, 3, 1.4)
    assert b >= 1.4
    assert certify_height(red_tilde, 3, b) == b


def test_assemble_free(red_zero):
    s = assemble_spectrum(red_zero, b=1.0, window=16)
    assert np.allclose(s.values, np.arange(-16, 17), atol=1e-10)
    assert np.all(s.multiplicities == 1)
    assert s.tail_threshold == 0


def test_assemble_constant(red_03):
    s = assemble_spectrum(red_03, window=8)
    want = sorted([n for n in range(-8, 9) if n] + [0.3])
    assert np.allclose(s.values, want, atol=1e-10)


def test_assemble_ktilde(tilde_spectrum, red_tilde):
    s = tilde_spectrum
    assert s.tail_threshold == 3
    assert sum(z.multiplicity for z in s.in_rectangle()) == 7
    assert min(abs(v) for v in s.values) < 1e-8
    assert s.b_requested == 1.4 and s.b_certified >= 1.4
    for n in (4, 5, 6, -4, -5, -6):
        inside = [v for v in s.values if abs(v - n) <= np.sqrt(np.pi) / abs(n)]
        assert len(inside) == 1
    want = KTILDE_ZEROS + [-z for z in KTILDE_ZEROS[1:]]
    for w in want:
        assert np.min(np.abs(s.values - w)) < 1e-10


def test_disk_certification(tilde_spectrum, red_tilde):
    for z in tilde_spectrum.eigenvalues:
        if z.provenance == "disk-certified":
            _, n, r = z.enclosure
            assert abs(z.value - n) <= disk_radius(red_tilde, n) + 1e-9
            assert z.multiplicity == 1


def test_zero_coefficient_case(red_03):
    s = assemble_spectrum(red_03, window=6)
    for n, r in s.disks.items():
        assert r < 1e-12
        assert abs(phi_eval(red_03, n)) < 1e-10
        z = isolate_zeros(red_03, Rectangle.square(n, 0.5 - 1e-6))
        assert len(z) == 1


def test_rectangle_census_b_and_2b(red_tilde):
    for b in (2.2, 4.4):
        s = assemble_spectrum(red_tilde, b=b, window=3, N=3)
        assert sum(z.multiplicity for z in s.in_rectangle()) == 7


def test_N_below_certified_rejected(red_tilde):
    with pytest.raises(ParameterError):
        assemble_spectrum(red_tilde, N=2)


def test_map_spectrum_examples(red_zero, grid):
    s = Spectrum(
        (LocatedZero(0j, 1, 0.0), LocatedZero(1 + 0j, 1, 0.0)), 0, Rectangle.centred(0, 1), {}
    )
    m = map_spectrum(s, 1j)
    assert np.allclose(m.values, [1j, 1 + 1j]) and m.eta_shift == 1j
    with pytest.raises(StateError):
        map_spectrum(m, 1j)
    empty = Spectrum((), 0, Rectangle.centred(0, 1), {})
    assert len(map_spectrum(empty, 2.0)) == 0
    spec = ProblemSpec.from_callables(lambda x: 1j + 0 * x, np.exp(-2 * np.pi), lambda x: 0 * x)
    shifted, red = spectrum_of(spec, window=5)
    assert abs(red.eta - 2j) < 1e-12
    assert np.allclose(shifted.values, np.arange(-5, 6) + 2j, atol=1e-10)
    assert np.allclose(shifted.unshifted(), np.arange(-5, 6), atol=1e-10)


def test_dissipative_positivity():
    V = GridFunction.from_callable(lambda x: 1j + 0 * x)
    spec = constructed_spec(V, 0.0, Controls(window=6))
    assert check_dissipative(spec).admissible
    s, _ = spectrum_of(spec)
    vals = s.values
    assert np.all(vals.imag >= -1e-9)
    nonreal = vals[np.abs(vals.imag) > 1e-6]
    zeta = nonreal.imag.min()
    assert np.all(nonreal.imag >= zeta - 1e-6)


def test_spectrum_of_reduces_general_spec():
    spec = ProblemSpec.from_callables(
        lambda x: 0.4 * np.sin(x) + 0.3j, 0.8 + 0.1j, lambda x: (0.3 - 0.1j) * np.cos(x), Controls(window=5)
    )
    s, red = spectrum_of(spec)
    for v in s.values:
        assert abs(char_residual(spec, v)) < 1e-8
    assert s.eta_shift == red.eta
