"""Density/warping ODE system, the 5(4) integrator, and closed forms."""

import csv
import math
from dataclasses import replace

import numpy as np
import pytest

from wefe import ode
from wefe.errors import DegenerateState, ParameterOutOfRange, StepFailure


def test_rhs_constant_solution():
    # h, phi constant with tau = 0 is a fixed point
    st = ode.OdeState(t=0.0, h=2.0, hp=0.0, phi=1.5, phip=0.0, tau=0.0)
    hpp, phipp = ode.rhs(st)
    assert hpp == 0.0 and phipp == 0.0


def test_rhs_matches_hand_values():
    st = ode.OdeState(t=0.0, h=2.0, hp=1.0, phi=1.0, phip=3.0,
                      n=4, eps=-1.0, tau=6.0)
    hpp, phipp = ode.rhs(st)
    assert phipp == pytest.approx(1.0 * 3.0 / 2.0)
    assert hpp == pytest.approx(-3 * 2.0 * 1.5 / 1.0 - (-1.0) * 6.0 * 2.0 / 3)


def test_rhs_degenerate_density():
    st = ode.OdeState(t=0.0, h=0.0, hp=1.0, phi=1.0, phip=0.0)
    with pytest.raises(DegenerateState):
        ode.rhs(st)
    st = ode.OdeState(t=0.0, h=1.0, hp=1.0, phi=-1.0, phip=0.0)
    with pytest.raises(DegenerateState):
        ode.rhs(st)


@pytest.mark.parametrize("branch, params", [
    ("direct", dict(eps=1.0, kappa=1.0, c1=0.3, c2=1.0)),
    ("direct", dict(eps=-1.0, kappa=1.0, c1=0.7, c2=0.4)),
    ("warped", dict(eps=1.0, tau=6.0, kappa=1.0, c1=0.2, c2=0.1, A=1.0)),
    ("warped", dict(eps=-1.0, tau=3.0, kappa=1.0, c1=1.2, c2=0.3, A=0.5)),
    ("warped", dict(eps=1.0, tau=0.0, kappa=1.0, c1=3.0, c2=3.0, A=1.0)),
])
def test_closed_forms_satisfy_system(branch, params):
    # second differences of the closed form against rhs
    dt = 1e-4
    for t in (-0.4, 0.0, 0.3):
        sm = ode.closed_form(branch, params, t - dt)
        s0 = ode.closed_form(branch, params, t)
        sp = ode.closed_form(branch, params, t + dt)
        hpp_fd = (sp.h - 2 * s0.h + sm.h) / dt ** 2
        ppp_fd = (sp.phi - 2 * s0.phi + sm.phi) / dt ** 2
        hpp, phipp = ode.rhs(s0)
        assert hpp_fd == pytest.approx(hpp, abs=1e-5)
        assert ppp_fd == pytest.approx(phipp, abs=1e-5)


@pytest.mark.parametrize("branch, params", [
    ("direct", dict(eps=1.0, kappa=1.0, c1=0.3, c2=1.0)),
    ("warped", dict(eps=-1.0, tau=3.0, kappa=1.0, c1=1.2, c2=0.3, A=0.5)),
])
def test_integrator_reproduces_closed_form(branch, params):
    start = ode.closed_form(branch, params, -0.5)
    traj = ode.integrate(start, 0.5)
    assert not traj.terminated_early
    end = traj.final()
    ref = ode.closed_form(branch, params, 0.5)
    for attr in ("h", "hp", "phi", "phip"):
        assert getattr(end, attr) == pytest.approx(getattr(ref, attr),
                                                   abs=1e-8)


def test_integrator_reversible():
    start = ode.closed_form(
        "warped", dict(eps=1.0, tau=6.0, kappa=1.0, c1=0.2, c2=0.1, A=1.0),
        0.0)
    fwd = ode.integrate(start, 0.4).final()
    back = ode.integrate(fwd, 0.0).final()
    for attr in ("h", "hp", "phi", "phip"):
        assert getattr(back, attr) == pytest.approx(getattr(start, attr),
                                                    abs=1e-8)


def test_first_integrals_conserved():
    start = ode.closed_form(
        "warped", dict(eps=-1.0, tau=3.0, kappa=1.0, c1=1.2, c2=0.3, A=0.5),
        -0.5)
    traj = ode.integrate(start, 0.5)
    dg, dk = traj.max_drift()
    assert dg < 1e-8
    assert dk < 1e-8


def test_kappa_recovered_matches_input():
    for branch, params in [
            ("direct", dict(eps=1.0, kappa=2.0, c1=0.3, c2=1.0)),
            ("warped", dict(eps=1.0, tau=6.0, kappa=1.0, c1=0.2, c2=0.1,
                            A=1.0))]:
        st = ode.closed_form(branch, params, 0.2)
        _, k = ode.first_integrals(st)
        assert k == pytest.approx(params["kappa"], abs=1e-12)


def test_warped_invariant_manifold():
    # h = A phi' is preserved along the flow
    params = dict(eps=1.0, tau=6.0, kappa=1.0, c1=0.2, c2=0.1, A=2.0)
    traj = ode.integrate(ode.closed_form("warped", params, 0.0), 0.3)
    for st in traj.states:
        assert st.h == pytest.approx(2.0 * st.phip, abs=1e-8)


def test_early_termination_at_density_zero():
    # sin crosses zero: integration stops with the flag instead of raising
    start = ode.direct_product_state(eps=1.0, kappa=1.0, c1=1.0, c2=0.0,
                                     t=0.5)
    traj = ode.integrate(start, 4.0)
    assert traj.terminated_early
    assert traj.final().t < 4.0
    assert traj.final().h < 1e-6


def test_step_budget_exhausted():
    start = ode.direct_product_state(eps=1.0, kappa=1.0, c1=0.3, c2=1.0,
                                     t=0.0)
    with pytest.raises(StepFailure):
        ode.integrate(start, 1.0, max_steps=2)


def test_direct_branch_needs_curvature():
    with pytest.raises(ParameterOutOfRange):
        ode.direct_product_state(eps=1.0, kappa=0.0, c1=1.0, c2=1.0, t=0.0)


def test_warped_flat_configuration_rejected():
    # c1^2 = 4 eps kappa c2 makes phi affine and the geometry flat
    with pytest.raises(ParameterOutOfRange):
        ode.warped_state(eps=1.0, tau=0.0, kappa=1.0, c1=2.0, c2=1.0,
                         A=1.0, t=0.0)


def test_warped_negative_square_rejected():
    with pytest.raises(DegenerateState):
        ode.warped_state(eps=1.0, tau=0.0, kappa=-1.0, c1=0.0, c2=0.25,
                         A=1.0, t=3.0)


def test_unknown_branch():
    with pytest.raises(ParameterOutOfRange):
        ode.closed_form("spiral", {}, 0.0)


def test_zero_span():
    st = ode.direct_product_state(eps=1.0, kappa=1.0, c1=0.3, c2=1.0, t=0.2)
    traj = ode.integrate(st, 0.2)
    assert len(traj.states) == 1
    assert traj.final() is st


def test_csv_output(tmp_path):
    start = ode.closed_form(
        "direct", dict(eps=1.0, kappa=1.0, c1=0.3, c2=1.0), 0.0)
    traj = ode.integrate(start, 0.3)
    path = tmp_path / "run.csv"
    traj.to_csv(path)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["t", "h", "hp", "phi", "phip", "gamma",
                       "kappa_recovered"]
    assert len(rows) == len(traj.states) + 1
    assert float(rows[-1][0]) == pytest.approx(0.3)
    # kappa column recovers the input curvature everywhere
    assert all(float(r[6]) == pytest.approx(1.0, abs=1e-8)
               for r in rows[1:])


def test_tolerance_scaling():
    params = dict(eps=-1.0, tau=3.0, kappa=1.0, c1=1.2, c2=0.3, A=0.5)
    start = ode.closed_form("warped", params, -0.5)
    ref = ode.closed_form("warped", params, 0.5)
    err = []
    for tol in (1e-6, 1e-10):
        end = ode.integrate(start, 0.5, tol=tol).final()
        err.append(abs(end.h - ref.h) + abs(end.phi - ref.phi))
    assert err[1] < err[0] or err[1] < 1e-12
