"""Warped-product density ODEs, their first integrals, and closed-form branches.

The system governs a density h and warping function phi on an interval factor:

    phi'' = h' phi' / h
    h''   = -(n-1) h phi''/phi - eps tau h / (n-1)

Both quantities must stay positive along accepted trajectories.  Two first
integrals (gamma and the recovered fiber curvature kappa) are conserved and
used as drift diagnostics.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import DegenerateState, ParameterOutOfRange, StepFailure

H_FLOOR = 1e-12
TERMINATION_FLOOR = 1e-9
DEFAULT_TOL = 1e-10
BRANCH_DEADBAND = 1e-12


@dataclass(frozen=True)
class OdeState:
    t: float
    h: float
    hp: float
    phi: float
    phip: float
    n: int = 4
    eps: float = 1.0
    tau: float = 0.0
    kappa: float = 0.0


def rhs(state: OdeState) -> tuple[float, float]:
    """Return (h'', phi'') at the given state."""
    if state.h < H_FLOOR:
        raise DegenerateState(f"density {state.h!r} below floor at t={state.t!r}")
    if state.phi <= 0.0:
        raise DegenerateState(f"warping {state.phi!r} non-positive at t={state.t!r}")
    phipp = state.hp * state.phip / state.h
    hpp = -(state.n - 1) * state.h * phipp / state.phi \
        - state.eps * state.tau * state.h / (state.n - 1)
    return hpp, phipp


def first_integrals(state: OdeState) -> tuple[float, float]:
    """Conserved quantities (gamma, kappa_recovered) at a state."""
    _, phipp = rhs(state)
    n, eps, tau = state.n, state.eps, state.tau
    gamma = state.phi ** (n - 1) * phipp + eps * tau / (n * (n - 1)) * state.phi ** n
    # sectional-curvature normalization: a fiber of constant curvature kappa
    # has Ricci (n-2) kappa g^N, which cancels the (n-2) in the identity
    kappa = eps * (
        state.phip ** 2
        + 2.0 * gamma / (n - 2) * state.phi ** (2 - n)
        + eps * tau / (n * (n - 1)) * state.phi ** 2
    )
    return gamma, kappa


# Dormand-Prince 5(4) tableau.
_DP_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_DP_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_DP_B5 = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_DP_B4 = (5179 / 57600, 0.0, 7571 / 16695, 393 / 640,
          -92097 / 339200, 187 / 2100, 1 / 40)


def _f(t: float, y: np.ndarray, proto: OdeState) -> np.ndarray:
    st = replace(proto, t=t, h=y[0], hp=y[1], phi=y[2], phip=y[3])
    hpp, phipp = rhs(st)
    return np.array([y[1], hpp, y[3], phipp])


@dataclass
class Trajectory:
    states: list
    terminated_early: bool

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "h", "hp", "phi", "phip", "gamma", "kappa_recovered"])
            for st in self.states:
                gamma, kappa = first_integrals(st)
                w.writerow([f"{v:.15g}" for v in
                            (st.t, st.h, st.hp, st.phi, st.phip, gamma, kappa)])

    def final(self) -> OdeState:
        return self.states[-1]

    def max_drift(self) -> tuple[float, float]:
        """Max absolute deviation of (gamma, kappa_recovered) from their
        initial values over the whole trajectory."""
        g0, k0 = first_integrals(self.states[0])
        dg = dk = 0.0
        for st in self.states[1:]:
            g, k = first_integrals(st)
            dg = max(dg, abs(g - g0))
            dk = max(dk, abs(k - k0))
        return dg, dk


def integrate(state: OdeState, t_end: float, tol: float = DEFAULT_TOL,
              max_steps: int = 100000) -> Trajectory:
    """Adaptive 5(4) embedded Runge-Kutta from state.t to t_end.

    Local error per step is kept below tol.  Terminates early (with a flag)
    if h or phi falls below 1e-9.  Raises StepFailure on step underflow.
    """
    t = state.t
    y = np.array([state.h, state.hp, state.phi, state.phip])
    direction = 1.0 if t_end >= t else -1.0
    span = abs(t_end - t)
    if span == 0.0:
        return Trajectory([state], False)
    dt = direction * min(1e-3, span)
    states = [state]
    k = [None] * 7
    k[0] = _f(t, y, state)
    for _ in range(max_steps):
        if abs(dt) < 1e-14 * max(1.0, abs(t)):
            raise StepFailure(f"step size underflow at t={t!r}")
        if direction * (t + dt - t_end) > 0:
            dt = t_end - t
        try:
            for i in range(1, 7):
                yi = y + dt * sum(a * k[j] for j, a in enumerate(_DP_A[i]))
                k[i] = _f(t + _DP_C[i] * dt, yi, state)
        except DegenerateState:
            dt *= 0.5
            continue
        y5 = y + dt * sum(b * ki for b, ki in zip(_DP_B5, k))
        y4 = y + dt * sum(b * ki for b, ki in zip(_DP_B4, k))
        scale = tol * (1.0 + np.abs(y))
        err = float(np.max(np.abs(y5 - y4) / scale))
        if err <= 1.0:
            t = t + dt
            y = y5
            k[0] = k[6]  # FSAL
            states.append(replace(state, t=t, h=y[0], hp=y[1],
                                  phi=y[2], phip=y[3]))
            if y[0] < TERMINATION_FLOOR or y[2] < TERMINATION_FLOOR:
                return Trajectory(states, True)
            if direction * (t - t_end) >= 0:
                return Trajectory(states, False)
        factor = 0.9 * err ** -0.2 if err > 0 else 5.0
        dt *= min(5.0, max(0.2, factor))
    raise StepFailure(f"no convergence within {max_steps} steps")


def direct_product_state(eps: float, kappa: float, c1: float, c2: float,
                         t: float, phi: float = 1.0, n: int = 4) -> OdeState:
    """Closed form for the direct-product branch (phi constant).

    h solves h'' + 2 eps kappa / phi^2 h = 0; oscillatory for eps*kappa > 0,
    exponential for eps*kappa < 0.  The kappa = 0 case is flat and excluded.
    """
    ek = eps * kappa
    if abs(ek) <= BRANCH_DEADBAND:
        raise ParameterOutOfRange("direct-product branch needs eps*kappa != 0",
                                  "eps*kappa != 0")
    # scalar curvature of eps dt^2 + phi^2 g^N with constant phi; 6k/phi^2 at n=4
    tau = (n - 1) * (n - 2) * kappa / phi ** 2
    w = math.sqrt(2.0 * abs(ek)) / phi
    if ek > 0:
        h = c1 * math.sin(w * t) + c2 * math.cos(w * t)
        hp = w * (c1 * math.cos(w * t) - c2 * math.sin(w * t))
    else:
        h = c1 * math.exp(w * t) + c2 * math.exp(-w * t)
        hp = w * (c1 * math.exp(w * t) - c2 * math.exp(-w * t))
    return OdeState(t=t, h=h, hp=hp, phi=phi, phip=0.0,
                    n=n, eps=eps, tau=tau, kappa=kappa)


def warped_state(eps: float, tau: float, kappa: float, c1: float, c2: float,
                 A: float, t: float, n: int = 4) -> OdeState:
    """Closed form for the warped branch h = A phi'.

    phi^2 is selected by the sign of eps*tau (dead-band 1e-12 maps to the
    tau = 0 polynomial form eps*kappa t^2 + c1 t + c2).
    """
    et = eps * tau
    if et > BRANCH_DEADBAND:
        w = math.sqrt(et / 3.0)
        F = 6.0 * kappa / tau + c1 * math.sin(w * t) + c2 * math.cos(w * t)
        Fp = w * (c1 * math.cos(w * t) - c2 * math.sin(w * t))
        Fpp = -w * w * (F - 6.0 * kappa / tau)
    elif et < -BRANCH_DEADBAND:
        w = math.sqrt(-et / 3.0)
        F = 6.0 * kappa / tau + c1 * math.exp(w * t) + c2 * math.exp(-w * t)
        Fp = w * (c1 * math.exp(w * t) - c2 * math.exp(-w * t))
        Fpp = w * w * (F - 6.0 * kappa / tau)
    else:
        ek = eps * kappa
        if abs(c1 * c1 - 4.0 * ek * c2) <= BRANCH_DEADBAND:
            raise ParameterOutOfRange("tau=0 branch with c1^2 = 4 eps kappa c2 is flat",
                                      "c1^2 != 4 eps kappa c2")
        F = ek * t * t + c1 * t + c2
        Fp = 2.0 * ek * t + c1
        Fpp = 2.0 * ek
    if F <= 0.0:
        raise DegenerateState(f"phi^2 = {F!r} non-positive at t={t!r}")
    phi = math.sqrt(F)
    phip = Fp / (2.0 * phi)
    phipp = (Fpp - 2.0 * phip * phip) / (2.0 * phi)
    return OdeState(t=t, h=A * phip, hp=A * phipp, phi=phi, phip=phip,
                    n=n, eps=eps, tau=tau, kappa=kappa)


BRANCHES = {
    "direct": direct_product_state,
    "warped": warped_state,
}


def closed_form(branch: str, params: dict, t: float) -> OdeState:
    """Evaluate a named closed-form branch at t.

    branch 'direct' takes eps, kappa, c1, c2 (optional phi, n);
    branch 'warped' takes eps, tau, kappa, c1, c2, A (optional n).
    """
    if branch not in BRANCHES:
        raise ParameterOutOfRange(f"unknown branch {branch!r}",
                                  f"branch in {sorted(BRANCHES)}")
    return BRANCHES[branch](t=t, **params)
