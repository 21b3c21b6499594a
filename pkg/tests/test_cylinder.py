"""Cylinder function wrapper: oracle values, identities, domain policing.

Reference values were generated offline with mpmath at 40 significant
digits (besselj / besselj+i*bessely and the standard derivative
recurrence) and frozen here as literals.
"""

import cmath

import numpy as np
import pytest

from bandedge.errors import AccuracyLossError, DomainError
from bandedge.numerics import (CylinderKind, bessel_j_pair, cylinder_bessel,
                               hankel1_pair)

# (order, argument, value, derivative), mpmath dps=40
BESSEL_J_ORACLE = [
    (0, (0.7 + 0.2j), (0.8894451256435696 - 0.06612637717468128j),
     (-0.33390960915708295 - 0.08264356695768678j)),
    (1, (2 - 1.5j), (1.0991874287695151 + 0.15226199452092193j),
     (-0.18390863400690424 + 0.7989739401766279j)),
    (3, (0.001 + 0j), (2.0833332031250035e-11 + 0j),
     (6.249999348958356e-08 + 0j)),
    (5, (-4 + 3j), (0.3781975345907804 + 0.5339073993539543j),
     (0.2908755451060389 - 0.6101902813956429j)),
    (16, (12 + 5j), (-0.029886802688154905 - 0.08169136840955428j),
     (-0.07887930774173207 - 0.04284185782768929j)),
    (2, (300 - 40j), (3617066952258596 + 4000724566566346.5j),
     (-4005675881285046.5 + 3609675454507478j)),
    (0, (1e-06 + 0j), (0.99999999999975 + 0j),
     (-4.999999999999375e-07 + 0j)),
    (4, 8j, (150.53941576155648 + 0j), -160.8055131386995j),
]

HANKEL1_ORACLE = [
    (0, (0.7 + 0.2j), (0.6727395903004846 - 0.23004075005945268j),
     (-0.07547306221068653 + 0.9635704327976504j)),
    (1, (2 - 1.5j), (2.0952548468072147 + 0.23663876290235586j),
     (-0.4223121677910204 + 1.7272345729522744j)),
    (3, (0.001 + 0j), (2.0833332031250035e-11 - 5092958815.560502j),
     (6.249999348958356e-08 + 15278875173441.645j)),
    (5, (-4 + 3j), (-0.08711962756709195 - 0.014250485678811492j),
     (-0.028485896662041415 - 0.0995138700310214j)),
    (16, (12 + 5j), (0.20474294300941198 + 0.17623346832714096j),
     (-0.28367512481805385 + 0.021507163414107626j)),
    (2, (300 - 40j), (7234133904517192 + 8001449133132693j),
     (-8011351762570093 + 7219350909014956j)),
    (0, (1e-06 + 0j), (0.99999999999975 - 8.869031481659444j),
     (-4.999999999999375e-07 + 636619.772372175j)),
    (4, 8j, -0.00023639748117489524j, (0.0002760968153799407 + 0j)),
]


def _rel(a: complex, b: complex) -> float:
    return abs(a - b) / max(abs(b), 1e-300)


@pytest.mark.parametrize("order,z,value,derivative", BESSEL_J_ORACLE)
def test_bessel_j_matches_highprecision_oracle(order, z, value, derivative):
    v, d = cylinder_bessel(CylinderKind.BESSEL_J, order, z)
    assert _rel(v, value) < 1e-10
    assert _rel(d, derivative) < 1e-10


@pytest.mark.parametrize("order,z,value,derivative", HANKEL1_ORACLE)
def test_hankel1_matches_highprecision_oracle(order, z, value, derivative):
    v, d = cylinder_bessel(CylinderKind.HANKEL1, order, z)
    assert _rel(v, value) < 1e-10
    assert _rel(d, derivative) < 1e-10


def test_bessel_j_at_origin():
    v, d = cylinder_bessel(CylinderKind.BESSEL_J, 0, 0.0)
    assert v == 1.0 + 0.0j
    assert d == 0.0 + 0.0j


@pytest.mark.parametrize("order", range(0, 6))
@pytest.mark.parametrize("x", [0.1, 1.0, 10.0, 100.0])
def test_wronskian_identity(order, x):
    # J_n H1_n' - J_n' H1_n = 2i/(pi x) for real x > 0
    jv, jd = bessel_j_pair(order, x)
    hv, hd = hankel1_pair(order, x)
    lhs = jv * hd - jd * hv
    rhs = 2j / (np.pi * x)
    assert abs(lhs - rhs) / abs(rhs) < 1e-10


@pytest.mark.parametrize("phase_deg", [0, 30, 60, 120, 170])
def test_hankel1_outgoing_asymptotic_at_moderate_argument(phase_deg):
    # H1_0(z) ~ sqrt(2/(pi z)) e^{i(z - pi/4)} to within 1% at |z| = 50
    # for phases in the upper half plane where the wave is outgoing.
    z = 50.0 * cmath.exp(1j * cmath.pi * phase_deg / 180.0)
    v, _ = hankel1_pair(0, z)
    asym = cmath.sqrt(2.0 / (cmath.pi * z)) * cmath.exp(1j * (z - cmath.pi / 4))
    assert abs(v - asym) / abs(asym) < 0.01


def test_hankel1_rejects_origin():
    with pytest.raises(DomainError):
        hankel1_pair(0, 0.0)


@pytest.mark.parametrize("order", [-1, 17, 40])
def test_order_outside_supported_range_rejected(order):
    with pytest.raises(DomainError):
        bessel_j_pair(order, 1.0)


def test_non_integer_order_rejected():
    with pytest.raises(DomainError):
        bessel_j_pair(1.5, 1.0)


def test_overflowing_argument_signals_accuracy_loss():
    # e^{|Im z|} overflows double precision near |Im z| ~ 710
    with pytest.raises(AccuracyLossError):
        bessel_j_pair(0, 800j)


def test_pair_helpers_match_enum_dispatch():
    z = 1.3 - 0.4j
    assert bessel_j_pair(2, z) == cylinder_bessel(CylinderKind.BESSEL_J, 2, z)
    assert hankel1_pair(2, z) == cylinder_bessel(CylinderKind.HANKEL1, 2, z)
