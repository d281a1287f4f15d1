"""Power-flow set-point machinery.

Angles are always relative to node 1 (theta[0] is node 2's angle, etc.).
Node 1 acts as the slack node: the angle solver matches the active-power
equations of nodes 2..N and reports the residual of the full system.
"""

import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InfeasibleSetpointsError, InputError
from .graph import Graph
from .network import NetworkSpec
from .planar import rot

# Residual below which an externally supplied bundle counts as feasible
# (Table-style inputs are printed to 4 decimals).
FEASIBILITY_TOL = 1e-6

# Agreement required between the direct and the impedance-angle form of
# the power-flow equations (pure floating-point noise).
SELF_CHECK_TOL = 1e-10

NEWTON_TOL = 1e-10
NEWTON_MAX_ITER = 50
NEWTON_MAX_HALVINGS = 30


@dataclass(frozen=True)
class SetpointBundle:
    """Per-node power and voltage set-points, optionally with angles."""

    p_star: np.ndarray
    q_star: np.ndarray
    v_star: np.ndarray
    theta_star: Optional[np.ndarray] = None  # N-1 relative angles, radians

    def __post_init__(self):
        p = np.asarray(self.p_star, dtype=float)
        q = np.asarray(self.q_star, dtype=float)
        v = np.asarray(self.v_star, dtype=float)
        if not (p.shape == q.shape == v.shape):
            raise InputError("set-point arrays must have equal length")
        if np.any(v <= 0):
            raise InputError("voltage set-points must be positive")
        object.__setattr__(self, "p_star", p)
        object.__setattr__(self, "q_star", q)
        object.__setattr__(self, "v_star", v)
        if self.theta_star is not None:
            th = wrap_angle(np.asarray(self.theta_star, dtype=float))
            if th.shape != (len(v) - 1,):
                raise InputError("theta_star must have one angle per node 2..N")
            object.__setattr__(self, "theta_star", th)

    @property
    def n_nodes(self) -> int:
        return len(self.v_star)


def wrap_angle(theta):
    """Wrap angles to (-pi, pi]."""
    wrapped = np.remainder(np.asarray(theta, dtype=float) + math.pi, 2 * math.pi) - math.pi
    return np.where(wrapped == -math.pi, math.pi, wrapped)


def _full_angles(theta_rel: np.ndarray) -> np.ndarray:
    return np.concatenate(([0.0], np.asarray(theta_rel, dtype=float)))


def _powers_direct(net: NetworkSpec, v_star, theta_full):
    """Power-flow equations written in (r, ell) line parameters."""
    n = net.n_nodes
    p = np.zeros(n)
    q = np.zeros(n)
    for (j, k), line in zip(net.topology, net.lines):
        r, x = line.r, net.omega0 * line.ell
        d2 = r * r + x * x
        for a, b in ((k - 1, j - 1), (j - 1, k - 1)):
            tjk = theta_full[b] - theta_full[a]
            va, vb = v_star[a], v_star[b]
            p[a] += (va * va * r - va * vb * (r * math.cos(tjk) + x * math.sin(tjk))) / d2
            q[a] += (va * va * x - va * vb * (x * math.cos(tjk) - r * math.sin(tjk))) / d2
    return p, q


def _powers_kappa_form(net: NetworkSpec, v_star, theta_full):
    """Same equations via per-line weight and impedance angle."""
    n = net.n_nodes
    p = np.zeros(n)
    q = np.zeros(n)
    kappas = net.edge_kappas()
    weights = [1.0 / math.hypot(ln.r, net.omega0 * ln.ell) for ln in net.lines]
    for (j, k), w, kap in zip(net.topology, weights, kappas):
        for a, b in ((k - 1, j - 1), (j - 1, k - 1)):
            tjk = theta_full[b] - theta_full[a]
            va, vb = v_star[a], v_star[b]
            p[a] += va * va * w * (math.cos(kap) - (vb / va) * math.cos(tjk - kap))
            q[a] += va * va * w * (math.sin(kap) + (vb / va) * math.sin(tjk - kap))
    return p, q


def power_from_angles(net: NetworkSpec, v_star, theta_star):
    """Evaluate the power-flow equations for given magnitudes and angles.

    Returns (p_star, q_star). The direct and impedance-angle forms are
    both evaluated and must agree to SELF_CHECK_TOL.
    """
    v_star = np.asarray(v_star, dtype=float)
    if np.any(v_star <= 0):
        raise InputError("voltage set-points must be positive")
    theta_full = _full_angles(theta_star)
    p, q = _powers_direct(net, v_star, theta_full)
    p2, q2 = _powers_kappa_form(net, v_star, theta_full)
    err = max(np.abs(p - p2).max(), np.abs(q - q2).max())
    if err > SELF_CHECK_TOL:
        raise AssertionError(f"power-flow form self-check failed: {err:.3e}")
    return p, q


def _active_power_jacobian(net: NetworkSpec, v_star, theta_full):
    """d p_a / d theta_b for the unknown angles of nodes 2..N."""
    n = net.n_nodes
    jac = np.zeros((n, n))
    kappas = net.edge_kappas()
    weights = [1.0 / math.hypot(ln.r, net.omega0 * ln.ell) for ln in net.lines]
    for (j, k), w, kap in zip(net.topology, weights, kappas):
        for a, b in ((k - 1, j - 1), (j - 1, k - 1)):
            va, vb = v_star[a], v_star[b]
            tjk = theta_full[b] - theta_full[a]
            d = va * vb * w * math.sin(tjk - kap)
            jac[a, b] += d
            jac[a, a] -= d
    return jac[1:, 1:]


def solve_angles(net: NetworkSpec, p_star, q_star, v_star) -> np.ndarray:
    """Solve the active-power equations of nodes 2..N for the relative angles.

    Damped Newton iteration started at zero angles, so among multiple
    power-flow branches the one continuously connected to the zero-angle
    solution is selected.
    """
    p_star = np.asarray(p_star, dtype=float)
    v_star = np.asarray(v_star, dtype=float)
    theta = np.zeros(net.n_nodes - 1)

    def residual(th):
        p, _ = _powers_direct(net, v_star, _full_angles(th))
        return p[1:] - p_star[1:]

    res = residual(theta)
    for _ in range(NEWTON_MAX_ITER):
        if np.abs(res).max() < NEWTON_TOL:
            break
        jac = _active_power_jacobian(net, v_star, _full_angles(theta))
        try:
            step = np.linalg.solve(jac, -res)
        except np.linalg.LinAlgError:
            raise InfeasibleSetpointsError(
                "infeasible or ill-conditioned set-points: singular Jacobian",
                residual=float(np.abs(res).max()),
            )
        scale = 1.0
        for _ in range(NEWTON_MAX_HALVINGS):
            trial = theta + scale * step
            trial_res = residual(trial)
            if np.abs(trial_res).max() < np.abs(res).max():
                break
            scale *= 0.5
        theta = theta + scale * step
        res = residual(theta)
    else:
        raise InfeasibleSetpointsError(
            "infeasible or ill-conditioned set-points: Newton did not converge",
            residual=float(np.abs(res).max()),
        )

    theta = wrap_angle(theta)
    theta_full = _full_angles(theta)
    for j, k in net.topology:
        rel = theta_full[j - 1] - theta_full[k - 1]
        if not -math.pi / 2 < rel < math.pi / 2:
            warnings.warn(
                f"relative angle of edge ({j},{k}) outside Condition 1 branch",
                stacklevel=2,
            )
    return theta


def feasibility_residual(net: NetworkSpec, sp: SetpointBundle) -> float:
    """Infinity norm of the full 2N power-flow residual of a bundle."""
    if sp.theta_star is None:
        raise InputError("bundle carries no angles to check")
    p, q = power_from_angles(net, sp.v_star, sp.theta_star)
    return float(max(np.abs(p - sp.p_star).max(), np.abs(q - sp.q_star).max()))


def K_from_angles(graph: Graph, v_star, theta_star):
    """Per-node gain matrices built from the graph and angle set-points."""
    v_star = np.asarray(v_star, dtype=float)
    theta_full = _full_angles(theta_star)
    mats = []
    for k in range(1, graph.n_nodes + 1):
        K = np.zeros((2, 2))
        for j, w in graph.neighbors(k):
            tjk = theta_full[j - 1] - theta_full[k - 1]
            K += w * (np.eye(2) - (v_star[j - 1] / v_star[k - 1]) * rot(tjk))
        mats.append(K)
    return mats


def K_from_power(p_star_k: float, q_star_k: float, v_star_k: float, kap: float) -> np.ndarray:
    """Gain matrix of one node from its own power and voltage set-points."""
    if v_star_k <= 0:
        raise InputError("voltage set-point must be positive")
    pq = np.array([[p_star_k, q_star_k], [-q_star_k, p_star_k]])
    return rot(kap) @ pq / v_star_k**2
