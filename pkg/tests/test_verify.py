import numpy as np
import pytest

import systems
from responsum import series, verify
from responsum.bifurcation import solve_zeta
from responsum.errors import InsufficientData
from responsum.fourier import FourierMap
from responsum.model import locate_center, taylor_tensors


def setup(spec):
    return taylor_tensors(spec, locate_center(spec))


def linear_solution(eps):
    return FourierMap.from_dict(1, 1, {(1,): [-1j * eps], (-1,): [1j * eps]})


def test_residual_exact_linear():
    spec = systems.linear()
    rep = verify.ode_residual(linear_solution(0.1), [0.0], [0.0], 0.1, spec)
    assert rep.sup_norm <= 1e-15
    assert rep.zero_mode == pytest.approx([0.0])


def test_residual_pure_forcing():
    spec = systems.linear()
    rep = verify.ode_residual(FourierMap(1, 1, 2), [0.0], [0.0], 0.1, spec)
    assert rep.per_mode[(1,)] == pytest.approx([-0.1])
    assert rep.per_mode[(-1,)] == pytest.approx([-0.1])
    assert rep.sup_norm == pytest.approx(0.1)


def test_residual_decreases_with_kmax():
    spec = systems.cubic()
    T = setup(spec)
    res = []
    for K in (2, 4, 8):
        u, _ = series.sum_series(series.compute_orders(0.01, spec, T, np.zeros(1), K))
        res.append(verify.ode_residual(u, [0.0], [0.0], 0.01, spec, T).sup_norm)
    assert res[-1] <= 1e-8
    assert res[0] > res[1] > res[2]


def test_residual_independent_of_tensors_argument():
    spec = systems.coupled()
    T = setup(spec)
    rec = solve_zeta(0.01, spec, T)
    a = verify.ode_residual(rec.u, rec.zeta, T.center, 0.01, spec, T)
    b = verify.ode_residual(rec.u, rec.zeta, T.center, 0.01, spec)
    assert a.sup_norm == pytest.approx(b.sup_norm, rel=1e-6, abs=1e-18)
    assert a.sup_norm <= 1e-12


def test_damped_oscillator_decays():
    spec = systems.autonomous("0.5 x1^2", forcing=[])
    traj = verify.integrate_reference(0.1, spec, [1.0], [0.0], 100.0)
    assert abs(traj.x[-1, 0]) < 1e-4
    assert traj.steps > 0 and traj.rejected >= 0
    E = verify.energy(traj, spec)
    assert np.all(np.diff(E) <= 1e-12)


def test_energy_nonincreasing_nonlinear():
    spec = systems.autonomous("0.5 x1^2 + 0.5 x2^2 + x1^2 x2", m=2, damping=[[2.0, 1.0], [1.0, 2.0]], forcing=[])
    traj = verify.integrate_reference(0.05, spec, [0.2, 0.1], [1.0, -1.0], 30.0)
    E = verify.energy(traj, spec)
    assert np.all(np.diff(E) <= 1e-12)
    assert E[-1] < E[0]


def test_attractor_linear():
    spec = systems.linear()
    eps = 0.1
    t_end = verify.transient_time(eps, spec, np.eye(1))
    traj = verify.integrate_reference(eps, spec, [0.0], [0.0], t_end)
    u = linear_solution(eps)
    assert verify.attractor_compare(traj, u, [0.0], [0.0], spec.omega) <= 1e-6
    assert verify.attractor_compare(traj, u, [0.1], [0.0], spec.omega) >= 0.05
    fc = verify.frequency_content(traj, u, spec.omega)
    assert fc["ratio"] < 1e-4


def test_solution_state_starts_on_attractor():
    spec = systems.linear()
    eps = 0.1
    u = linear_solution(eps)
    x0, v0 = verify.solution_state(u, [0.0], [0.0], spec.omega)
    assert x0 == pytest.approx([0.0]) and v0 == pytest.approx([0.2])
    traj = verify.integrate_reference(eps, spec, x0, v0, 20.0)
    assert verify.attractor_compare(traj, u, [0.0], [0.0], spec.omega, transient_fraction=0.0) <= 1e-6


def test_resample_hermite():
    spec = systems.autonomous("0.5 x1^2", forcing=[])
    traj = verify.integrate_reference(1.0, spec, [1.0], [0.0], 5.0, step_tol=1e-10)
    # eps x'' + x' + eps x = 0 with eps = 1: x = e^(-t/2)(cos wt + sin(wt)/(2w)), w = sqrt(3)/2
    w = np.sqrt(3) / 2
    t = np.array([0.7, 2.5, 4.1])
    exact = np.exp(-t / 2) * (np.cos(w * t) + np.sin(w * t) / (2 * w))
    assert traj.resample(t)[:, 0] == pytest.approx(exact, abs=1e-7)


def test_decay_report():
    spec = systems.cubic()
    T = setup(spec)
    rep = verify.decay_report(series.compute_orders(0.01, spec, T, np.zeros(1), 10), spec, tensors=T)
    assert rep.xi_fit > 0 and rep.ratio < 1
    assert rep.support_radius[:4] == [1, 0, 0, 3]
    assert set(rep.to_dict()) >= {"xi_fit", "ratio", "Phi", "Delta"}
    lin = systems.linear()
    with pytest.raises(InsufficientData):
        verify.decay_report(series.compute_orders(0.1, lin, setup(lin), np.zeros(1), 4), lin)


def test_size_constants_linear():
    spec = systems.linear()
    T = setup(spec)
    Phi, Delta = verify.size_constants(spec, T, xi=1.0)
    assert Phi == pytest.approx(2 * np.e)
    assert Delta == pytest.approx(1.0)
