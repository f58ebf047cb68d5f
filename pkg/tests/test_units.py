import math

import pytest
from scipy import constants

from nlham import UnitSystem, natural_units, si_units
from nlham.lfc import noise_lfc_factor
from nlham.media import PermittivityModel, noise_amplitude


def test_natural_units_are_all_one():
    u = natural_units()
    assert (u.hbar, u.eps0, u.c) == (1.0, 1.0, 1.0)
    assert UnitSystem() == u


def test_si_constants():
    u = si_units()
    assert u.hbar == constants.hbar and u.eps0 == constants.epsilon_0 and u.c == constants.c


@pytest.mark.parametrize("field", ["hbar", "eps0", "c"])
@pytest.mark.parametrize("value", [0.0, -1.0])
def test_rejects_nonpositive(field, value):
    with pytest.raises(ValueError):
        UnitSystem(**{field: value})


def test_noise_prefactor_natural_units():
    # eps'' = pi at resonance: wp^2 / (gamma wr) = pi
    host = PermittivityModel.single(math.sqrt(math.pi * 0.5 * 2.0), 2.0, 0.5)
    assert noise_amplitude(host, 2.0) == pytest.approx(1.0, rel=1e-14)


def test_vacuum_noise_factor_zero_in_any_units():
    for u in (natural_units(), si_units(), UnitSystem(2.0, 3.0, 5.0)):
        assert noise_lfc_factor(1.0, u) == 0


def test_scaled():
    u = UnitSystem(2.0, 3.0, 5.0).scaled(hbar=2.0, c=0.5)
    assert (u.hbar, u.eps0, u.c) == (4.0, 3.0, 2.5)
