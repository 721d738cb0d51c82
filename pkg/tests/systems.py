"""Test systems shared by the suite."""
import math

from responsum.config import build_system

SQRT2 = math.sqrt(2.0)
PHI = (1.0 + math.sqrt(5.0)) / 2.0
COS1 = [{"nu": [1], "re": [1.0], "im": [0.0]}]


def autonomous(potential, m=1, d=1, omega=(1.0,), damping=None, forcing=None, mass=None, name=""):
    obj = {
        "m": m, "d": d, "omega": list(omega), "kind": "gradient-autonomous",
        "damping": damping if damping is not None else [[1.0 if i == j else 0.0 for j in range(m)] for i in range(m)],
        "potential": potential,
        "forcing": COS1 if forcing is None else forcing,
        "name": name,
    }
    if mass is not None:
        obj["mass"] = mass
    return build_system(obj)


def linear():
    """x'' eps + x' + eps x = 2 eps cos t."""
    return autonomous("0.5 x1^2", name="linear")


def cubic():
    """g = x + x^3."""
    return autonomous("0.5 x1^2 + 0.25 x1^4", name="cubic")


def asymmetric_cubic():
    """g = x + x^2 + x^3."""
    return autonomous([{"exp": [2], "coeff": 0.5}, {"exp": [3], "coeff": 1.0 / 3.0}, {"exp": [4], "coeff": 0.25}],
                      name="asymmetric cubic")


def coupled():
    """V = (x1^2 + x2^2)/2 + x1^2 x2 with non-diagonal damping."""
    return autonomous("0.5 x1^2 + 0.5 x2^2 + x1^2 x2", m=2, damping=[[2.0, 1.0], [1.0, 2.0]],
                      forcing=[{"nu": [1], "re": [1.0, 0.0], "im": [0.0, 0.5]}], name="coupled")


def two_frequency(omega=(1.0, SQRT2)):
    return autonomous([{"exp": [2], "coeff": 0.5}, {"exp": [3], "coeff": 1.0 / 3.0}, {"exp": [4], "coeff": 0.25}],
                      d=2, omega=omega,
                      forcing=[{"nu": [1, 0], "re": [0.5], "im": [0.0]}, {"nu": [0, 1], "re": [0.5], "im": [0.0]}],
                      name="two-frequency asymmetric cubic")


def forced_potential():
    """M = diag(1, 2); V(x, psi) = V0(x) + cos(psi1) (x1^2 x2 / 2 + x1 x2 / 5 - x1 / 2) - sin(psi2) x2 / 2."""
    return build_system({
        "m": 2, "d": 2, "omega": [1.0, PHI], "kind": "gradient-forced",
        "damping": [[2.0, 1.0], [1.0, 2.0]], "mass": [[1.0, 0.0], [0.0, 2.0]],
        "potential": [
            {"nu": [0, 0], "poly": "0.5 x1^2 + 0.5 x2^2 + 0.2 x1^3 + 0.1 x1 x2^2 + 0.25 x2^4"},
            {"nu": [1, 0], "poly": [{"exp": [2, 1], "coeff": 0.25}, {"exp": [1, 1], "coeff": 0.1}, {"exp": [1, 0], "coeff": -0.25}]},
            {"nu": [0, 1], "poly": [{"exp": [0, 1], "coeff": [0.0, 0.25]}]},
        ],
        "name": "forced potential",
    })
