import numpy as np
import pytest

import systems
from responsum.errors import DegenerateMinimum, HypothesisViolation, ValidationError
from responsum.model import (Polynomial, SystemSpec, TrigPolynomialFamily, TrigVectorField, build_U, check_hypothesis,
                             find_minimum, gradient, locate_center, taylor_tensors)

P = Polynomial.parse


def test_gradient_examples():
    assert gradient(P("0.5 x1^2", 1))[0].close_to(P("x1", 1))
    g = gradient(P("0.5 x1^2 + 0.5 x2^2 + x1^2 x2", 2))
    assert g[0].close_to(P("x1 + 2 x1 x2", 2))
    assert g[1].close_to(P("x2 + x1^2", 2))
    assert all(gi.is_zero for gi in gradient(Polynomial.constant(2, 3.0)))


def test_build_U():
    V = P("0.5 x1^2", 1)
    assert build_U(V, [0.0]).close_to(V)
    assert build_U(V, [1.0]).close_to(P("0.5 x1^2 - x1", 1))
    assert build_U(P("0.25 x1^4", 1), [0.0]).close_to(P("0.25 x1^4", 1))


def test_find_minimum():
    assert find_minimum(P("0.5 x1^2 - x1", 1), [0.9]) == pytest.approx([1.0], abs=1e-14)
    assert find_minimum(P("0.5 x1^2 + 0.25 x1^4", 1), [0.1]) == pytest.approx([0.0], abs=1e-14)
    with pytest.raises(DegenerateMinimum):
        find_minimum(P("0.25 x1^4", 1), [0.1])


def test_polynomial_parse_and_eval():
    p = P("1.5 x1^2 x2 - x2^3 + 2", 2)
    assert p.degree == 3
    assert p([2.0, 1.0]) == pytest.approx(1.5 * 4 - 1 + 2)
    assert (p - p).is_zero
    q = p * P("x1 + 1", 2)
    assert q([0.5, -1.0]) == pytest.approx(p([0.5, -1.0]) * 1.5)
    with pytest.raises(ValueError):
        P("x3^2", 2)


def test_polynomial_shift_matches_evaluation():
    p = P("0.5 x1^2 + 0.25 x1^4 + x1 x2 + x2^3", 2)
    c = np.array([0.3, -0.7])
    q = p.shift(c)
    y = np.array([0.11, 0.42])
    assert q(y) == pytest.approx(p(c + y), rel=1e-14)


def test_polynomial_json_round_trip():
    p = Polynomial.from_json([{"exp": [2, 1], "coeff": [0.5, -1.0]}, {"exp": [0, 0], "coeff": 2.0}], 2)
    assert not p.is_real
    assert Polynomial.from_json(p.to_terms(), 2).close_to(p)
    with pytest.raises(ValidationError):
        Polynomial.from_terms(1, [((1,), 1.0), ((1,), 2.0)])


def test_taylor_cubic():
    T = taylor_tensors(systems.cubic(), [0.0])
    assert T.p_max == 3
    assert T.G(0) == pytest.approx([0.0])
    assert T.A == pytest.approx(np.eye(1))
    assert T.G(2) == pytest.approx(np.zeros((1, 1, 1)))
    assert T.G(3) == pytest.approx(np.ones((1, 1, 1, 1)))


def test_taylor_coupled_second_order():
    T = taylor_tensors(systems.coupled(), [0.0, 0.0])
    G2 = T.G(2)
    expected = np.zeros((2, 2, 2))
    expected[0, 0, 1] = expected[0, 1, 0] = expected[1, 0, 0] = 1.0
    assert G2 == pytest.approx(expected)
    assert T.A == pytest.approx(np.eye(2))
    # finite-difference check of the second derivative of g_1
    g = [gi for gi in gradient(systems.coupled().potential)]
    h = 1e-4
    fd = (g[0]([h, h]) - g[0]([h, -h]) - g[0]([-h, h]) + g[0]([-h, -h])) / (4 * h * h)
    assert fd == pytest.approx(2 * G2[0, 0, 1], rel=1e-8)


def test_taylor_linear_shifted():
    T = taylor_tensors(systems.linear(), [5.0])
    assert T.G(0) == pytest.approx([5.0])
    assert T.A == pytest.approx(np.eye(1))
    assert T.p_max == 1


def test_center_includes_forcing_mean():
    spec = systems.autonomous("0.5 x1^2", forcing=[{"nu": [0], "re": [2.0], "im": [0.0]},
                                                  {"nu": [1], "re": [1.0], "im": [0.0]}])
    assert locate_center(spec) == pytest.approx([2.0], abs=1e-13)


def test_hypothesis_check():
    check_hypothesis(np.eye(2))
    with pytest.raises(HypothesisViolation):
        check_hypothesis(np.diag([1.0, -1.0]))


def test_spec_validation():
    with pytest.raises(ValidationError, match="damping not symmetric"):
        systems.autonomous("0.5 x1^2 + 0.5 x2^2", m=2, damping=[[1.0, 2.0], [0.0, 1.0]], forcing=[])
    with pytest.raises(ValidationError, match="damping not positive definite"):
        systems.autonomous("0.5 x1^2 + 0.5 x2^2", m=2, damping=[[1.0, 2.0], [2.0, 1.0]], forcing=[])


def test_forcing_hermitian_completion():
    f = TrigVectorField(1, 1, {(1,): [0.5 - 0.25j]}, complete=True)
    assert f[(-1,)] == pytest.approx([0.5 + 0.25j])
    psi = np.linspace(0, 6, 7)[:, None]
    vals = f.evaluate(psi)
    assert np.max(np.abs(vals.imag)) < 1e-15
    assert vals[:, 0].real == pytest.approx(np.cos(psi[:, 0]) + 0.5 * np.sin(psi[:, 0]))


def test_forced_kind_force_matches_gradient():
    spec = systems.forced_potential()
    assert spec.is_forced
    x = np.array([0.2, -0.1])
    psi = np.array([0.4, 1.3])
    h = 1e-6
    Vt = lambda y: spec.potential(y, psi).real  # noqa: E731
    fd = np.array([(Vt(x + h * e) - Vt(x - h * e)) / (2 * h) for e in np.eye(2)])
    assert spec.force(x, psi) == pytest.approx(-fd, rel=1e-7, abs=1e-10)


def test_forced_family_mean_is_effective_potential():
    spec = systems.forced_potential()
    assert isinstance(spec.potential, TrigPolynomialFamily)
    assert spec.effective_potential().close_to(P("0.5 x1^2 + 0.5 x2^2 + 0.2 x1^3 + 0.1 x1 x2^2 + 0.25 x2^4", 2))
    assert isinstance(spec, SystemSpec)
