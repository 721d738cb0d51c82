import json

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

import systems
from responsum import series
from responsum.config import dumps
from responsum.fourier import FourierMap, ball_modes
from responsum.model import Polynomial, locate_center, taylor_tensors
from responsum.propagator import inverse_norm, norm_bound, small_divisor_scan, spectral_data

coef = st.floats(-2.0, 2.0, allow_nan=False)
small = st.floats(-0.5, 0.5, allow_nan=False)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 3), st.integers(0, 3), coef), min_size=1, max_size=6),
       small, small, small, small)
def test_shift_is_translation(terms, c1, c2, y1, y2):
    table = {}
    for a, b, v in terms:
        table[(a, b)] = table.get((a, b), 0.0) + v
    p = Polynomial(2, table)
    c = np.array([c1, c2])
    y = np.array([y1, y2])
    assert np.isclose(p.shift(c)(y), p(c + y), rtol=1e-12, atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 2), st.integers(0, 2), st.integers(0, 2), st.integers(0, 10_000))
def test_product_commutes_and_matches_pointwise(d, ra, rb, seed):
    rng = np.random.default_rng(seed)

    def rand(r):
        u = FourierMap(1, d, r)
        for nu in ball_modes(d, r):
            u[nu] = rng.normal(size=1) + 1j * rng.normal(size=1)
        return u

    a, b = rand(ra), rand(rb)
    ab, ba = a.product(b), b.product(a)
    assert ab.allclose(ba, atol=1e-14)
    psi = rng.uniform(0, 2 * np.pi, size=(5, d))
    assert np.allclose(ab.evaluate(psi), a.evaluate(psi) * b.evaluate(psi), atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.2, 5.0), st.floats(0.2, 5.0), st.floats(0.2, 5.0), st.floats(0.01, 0.99),
       st.floats(0.0, 50.0))
def test_scalar_propagator_bound(gamma, a, mass, eps_frac, s):
    sd = spectral_data(np.array([[gamma]]), np.array([[a]]), mass=np.array([[mass]]))
    eps = eps_frac * sd.eps1
    assert inverse_norm(eps, s, sd) <= norm_bound(eps, s, sd) * (1 + 1e-12)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.001, 0.1), st.floats(-0.05, 0.05))
def test_orders_hermitian_for_real_systems(eps, z):
    spec = systems.asymmetric_cubic()
    T = taylor_tensors(spec, locate_center(spec))
    orders = series.compute_orders(eps, spec, T, np.array([z]), 6)
    for k in range(1, 7):
        assert orders[k].hermitian_defect() <= 1e-15 * max(1.0, orders[k].sup_norm())
    assert orders[2].l1_norm() == 0.0


@settings(max_examples=25, deadline=None)
@given(st.floats(0.5, 3.0), st.integers(1, 6))
def test_small_divisor_bounded_by_one_over_integers(w2, N):
    rep = small_divisor_scan([1.0, w2], N, 1.0)
    nu = np.array(rep.argmin)
    assert abs(nu).sum() <= N
    assert np.isclose(abs(nu @ np.array([1.0, w2])), rep.sN)
    assert rep.sN <= 1.0 + 1e-15


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(allow_nan=False, allow_infinity=False, width=64), max_size=5))
def test_dumps_round_trips_floats(values):
    back = json.loads(dumps({"v": values}))["v"]
    assert back == [float(v) for v in values]
