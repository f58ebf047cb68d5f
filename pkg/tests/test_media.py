import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nlham.errors import DomainError
from nlham.kk import FrequencyGrid, linear_kk_residual
from nlham.media import PermittivityModel, Resonance, noise_amplitude, permittivity, susceptibility

resonance = st.builds(Resonance, st.floats(0.05, 3.0), st.floats(0.2, 3.0), st.floats(0.05, 1.0))
models = st.lists(resonance, min_size=1, max_size=3).map(PermittivityModel)
# the 1e-3 KK budget on the [-50, 50] x 20001 grid needs gamma >= 20 spacings
# and gamma * wr <= 2 for the boundary decay precondition
kk_resonance = st.builds(Resonance, st.floats(0.05, 3.0), st.floats(0.2, 2.0), st.floats(0.1, 1.0))
kk_models = st.lists(kk_resonance, min_size=1, max_size=3).map(PermittivityModel)


def test_vacuum():
    m = PermittivityModel.vacuum()
    assert m.is_vacuum
    assert np.all(permittivity(m, np.linspace(-5, 5, 11)) == 1)
    assert noise_amplitude(m, 1.3) == 0


def test_static_limit_real():
    m = PermittivityModel((Resonance(1.0, 2.0, 0.1), Resonance(0.5, 1.0, 0.3)))
    assert permittivity(m, 0.0) == 1 + 1 / 4 + 0.25


def test_on_resonance():
    assert permittivity(PermittivityModel.single(1.0, 2.0, 0.1), 2.0) == pytest.approx(1 + 5j, rel=1e-14)


def test_noise_amplitude_at_resonance():
    wp, wr, g = 1.3, 0.9, 0.07
    amp = noise_amplitude(PermittivityModel.single(wp, wr, g), wr)
    mpmath.mp.dps = 30
    ref = float(mpmath.sqrt(mpmath.mpf(wp) ** 2 / (mpmath.mpf(g) * wr) / mpmath.pi))
    assert amp == pytest.approx(ref, rel=1e-13)


@pytest.mark.parametrize("bad", [dict(plasma_freq=-1, resonance_freq=1, damping=1),
                                 dict(plasma_freq=1, resonance_freq=0, damping=1),
                                 dict(plasma_freq=1, resonance_freq=1, damping=0)])
def test_resonance_validation(bad):
    with pytest.raises(ValueError):
        Resonance(**bad)


def test_noise_amplitude_needs_positive_frequency():
    with pytest.raises(DomainError):
        noise_amplitude(PermittivityModel.single(1, 1, 0.1), 0.0)


def test_absorption_scale_touches_only_imaginary_part():
    m = PermittivityModel.single(1.0, 2.0, 0.3)
    e, e2 = permittivity(m, 1.7), permittivity(m.with_absorption_scale(0.01), 1.7)
    assert e2.real == e.real and e2.imag == pytest.approx(0.01 * e.imag, rel=1e-15)


@settings(max_examples=30, deadline=None)
@given(models)
def test_schwarz_reflection(m):
    w = np.random.default_rng(0).uniform(-10, 10, 100)
    assert np.allclose(permittivity(m, -w), np.conj(permittivity(m, w)), rtol=1e-14, atol=0)


@settings(max_examples=30, deadline=None)
@given(models)
def test_passivity(m):
    w = np.geomspace(1e-3, 1e3, 200)
    assert np.all(permittivity(m, w).imag > 0)


@settings(max_examples=5, deadline=None)
@given(kk_models)
def test_linear_kk_from_media(m):
    grid = FrequencyGrid.symmetric(50.0, 20001)
    assert linear_kk_residual(lambda w: susceptibility(m, w), grid) <= 1e-3


def test_linear_kk_narrow_line_is_resolution_limited():
    m = PermittivityModel.single(1.0, 1.0, 0.05)
    coarse = linear_kk_residual(lambda w: susceptibility(m, w), FrequencyGrid.symmetric(50.0, 20001))
    fine = linear_kk_residual(lambda w: susceptibility(m, w), FrequencyGrid.symmetric(50.0, 80001))
    assert coarse > 1e-3
    assert fine <= 1e-3
