"""Controller and closed-loop vector fields.

The Cartesian stacked state is the source of truth; the rotating-frame,
projected (Kuramoto) and polar (droop) fields are derived views of the
same dynamics.

Gain convention: eta and alpha are per-unit gains. The rates that enter
the vector field are eta * omega0 and alpha * omega0, so that the
correction terms scale with the nominal frequency exactly like the
rotation term does. With omega0 = 1 (per-unit time) the two coincide.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ChartSingularError, InputError
from .graph import Graph, build_laplacian, extend
from .network import NetworkSpec, admittance_matrix, network_laplacian, nodal_powers
from .planar import J2, node_norms, rot
from .setpoints import K_from_power, SetpointBundle, _full_angles

# Below this node magnitude the polar chart and the orthogonal projector
# are treated as singular.
CHART_GUARD = 1e-9

# Tolerance of the built-in error-decomposition self-checks.
IDENTITY_TOL = 1e-12


@dataclass(frozen=True)
class GainSet:
    """Controller gains: synchronization, magnitude, nominal frequency."""

    eta: float
    alpha: float
    omega0: float

    def __post_init__(self):
        if self.eta < 0 or self.alpha < 0:
            raise InputError("gains must be non-negative")
        if self.omega0 < 0:
            raise InputError("omega0 must be non-negative")

    @property
    def eta_eff(self) -> float:
        """Synchronization rate entering the vector field."""
        return self.eta * self.omega0

    @property
    def alpha_eff(self) -> float:
        """Magnitude-correction rate entering the vector field."""
        return self.alpha * self.omega0


@dataclass(frozen=True)
class PolarState:
    """Per-node polar view (nu_k, theta_k) of a stacked Cartesian state."""

    nu: np.ndarray
    theta: np.ndarray

    def __post_init__(self):
        nu = np.asarray(self.nu, dtype=float)
        theta = np.asarray(self.theta, dtype=float)
        if nu.shape != theta.shape:
            raise InputError("nu and theta must have the same length")
        if np.any(nu < 0):
            raise InputError("magnitudes must be non-negative")
        object.__setattr__(self, "nu", nu)
        object.__setattr__(self, "theta", theta)

    @classmethod
    def from_state(cls, v: np.ndarray) -> "PolarState":
        v = np.asarray(v, dtype=float)
        nu = node_norms(v)
        if np.any(nu < CHART_GUARD):
            raise ChartSingularError("polar chart singular: node magnitude below guard")
        return cls(nu, np.arctan2(v[1::2], v[0::2]))

    def to_state(self) -> np.ndarray:
        v = np.empty(2 * len(self.nu))
        v[0::2] = self.nu * np.cos(self.theta)
        v[1::2] = self.nu * np.sin(self.theta)
        return v


@dataclass(frozen=True)
class FieldContext:
    """Immutable precomputed quantities shared by all field evaluations."""

    net: NetworkSpec
    gains: GainSet
    setpoints: SetpointBundle
    graph: Graph
    Y: np.ndarray  # 2N x 2N admittance
    L_ext: np.ndarray  # 2N x 2N network Laplacian
    K_ext: np.ndarray  # 2N x 2N block-diagonal gain matrix
    K_blocks: tuple  # per-node 2x2 matrices
    kappa: float
    KL: np.ndarray = None  # K_ext - L_ext, precomputed
    A_static: np.ndarray = None  # omega0 J + eta_eff (K - L)

    def __post_init__(self):
        if self.KL is None:
            object.__setattr__(self, "KL", self.K_ext - self.L_ext)
        if self.A_static is None:
            n = self.net.n_nodes
            A = self.gains.eta_eff * self.KL.copy()
            A[0::2, 1::2] -= self.gains.omega0 * np.eye(n)
            A[1::2, 0::2] += self.gains.omega0 * np.eye(n)
            object.__setattr__(self, "A_static", A)

    @property
    def n_nodes(self) -> int:
        return self.net.n_nodes


def make_context(net: NetworkSpec, gains: GainSet, sp: SetpointBundle) -> FieldContext:
    """Assemble a field-evaluation context.

    The per-node gain matrices are built from the power set-points
    (the implementable form), which requires a uniform-ratio network.
    """
    if sp.n_nodes != net.n_nodes:
        raise InputError("set-point bundle and network disagree on node count")
    L_ext, graph = network_laplacian(net)
    kap = net.kappa()
    K_blocks = tuple(
        K_from_power(sp.p_star[k], sp.q_star[k], sp.v_star[k], kap)
        for k in range(net.n_nodes)
    )
    K_ext = np.zeros_like(L_ext)
    for k, K in enumerate(K_blocks):
        K_ext[2 * k : 2 * k + 2, 2 * k : 2 * k + 2] = K
    return FieldContext(
        net=net,
        gains=gains,
        setpoints=sp,
        graph=graph,
        Y=admittance_matrix(net),
        L_ext=L_ext,
        K_ext=K_ext,
        K_blocks=K_blocks,
        kappa=kap,
    )


def phi(v_k: np.ndarray, v_star_k: float) -> float:
    """Scaled magnitude error (v*_k - ||v_k||) / v*_k."""
    if v_star_k <= 0:
        raise InputError("voltage set-point must be positive")
    return (v_star_k - float(np.hypot(*v_k))) / v_star_k


def phi_all(v: np.ndarray, v_star: np.ndarray) -> np.ndarray:
    """Per-node scaled magnitude errors of a stacked state."""
    return (v_star - node_norms(v)) / v_star


def rotate_stack(v: np.ndarray) -> np.ndarray:
    """Apply the block rotation generator (I kron J) to a stacked state."""
    out = np.empty_like(v)
    out[0::2] = -v[1::2]
    out[1::2] = v[0::2]
    return out


def phase_error(v: np.ndarray, graph: Graph, v_star, theta_star) -> np.ndarray:
    """Per-node phase error, stacked: sum_j w_jk (v_j - (v*_j/v*_k) R(theta*_jk) v_k).

    Cross-checked against the matrix form (K - L) v.
    """
    v = np.asarray(v, dtype=float)
    v_star = np.asarray(v_star, dtype=float)
    theta_full = _full_angles(theta_star)
    n = graph.n_nodes
    e = np.zeros(2 * n)
    for k in range(1, n + 1):
        vk = v[2 * (k - 1) : 2 * k]
        acc = np.zeros(2)
        for j, w in graph.neighbors(k):
            tjk = theta_full[j - 1] - theta_full[k - 1]
            vj = v[2 * (j - 1) : 2 * j]
            acc += w * (vj - (v_star[j - 1] / v_star[k - 1]) * (rot(tjk) @ vk))
        e[2 * (k - 1) : 2 * k] = acc
    # matrix-form identity (K - L) v
    from .setpoints import K_from_angles

    L_ext = extend(build_laplacian(graph))
    K_blocks = K_from_angles(graph, v_star, theta_star)
    ref = -L_ext @ v
    for k, K in enumerate(K_blocks):
        ref[2 * k : 2 * k + 2] += K @ v[2 * k : 2 * k + 2]
    # K - L annihilates the target direction; |v| sets the error scale
    scale = max(1.0, float(np.abs(v).max()))
    if np.abs(e - ref).max() > IDENTITY_TOL * scale * max(
        1.0, float(np.abs(L_ext).max())
    ):
        raise AssertionError("phase-error decomposition self-check failed")
    return e


def magnitude_error(v: np.ndarray, v_star) -> np.ndarray:
    """Per-node magnitude error Phi_k(v_k) v_k, stacked."""
    v = np.asarray(v, dtype=float)
    ph = phi_all(v, np.asarray(v_star, dtype=float))
    out = np.empty_like(v)
    out[0::2] = ph * v[0::2]
    out[1::2] = ph * v[1::2]
    return out


def control_law(v_k, y_k, K_k, gains: GainSet, v_star_k: float) -> np.ndarray:
    """Single-node control input u_k."""
    v_k = np.asarray(v_k, dtype=float)
    y_k = np.asarray(y_k, dtype=float)
    return (
        gains.omega0 * (J2 @ v_k)
        + gains.eta_eff * (K_k @ v_k - y_k)
        + gains.alpha_eff * phi(v_k, v_star_k) * v_k
    )


def closed_loop_field(v: np.ndarray, ctx: FieldContext) -> np.ndarray:
    """Stacked closed-loop field in the stationary frame."""
    v = np.asarray(v, dtype=float)
    g = ctx.gains
    ph = np.repeat(phi_all(v, ctx.setpoints.v_star), 2)
    # single-matrix form of the dynamics
    f = ctx.A_static @ v + g.alpha_eff * ph * v
    # self-check: agrees with the three-term error decomposition
    ref = g.omega0 * rotate_stack(v) + g.eta_eff * (ctx.KL @ v)
    ref += g.alpha_eff * ph * v
    scale = max(1.0, float(np.abs(f).max()))
    assert np.abs(ref - f).max() <= 1e-11 * scale * max(
        1.0, g.omega0
    ), "closed-loop decomposition self-check failed"
    return f


def rotating_frame_field(v_bar: np.ndarray, ctx: FieldContext) -> np.ndarray:
    """Closed-loop field in coordinates co-rotating at omega0."""
    v_bar = np.asarray(v_bar, dtype=float)
    g = ctx.gains
    f = g.eta_eff * (ctx.KL @ v_bar)
    f += g.alpha_eff * magnitude_error(v_bar, ctx.setpoints.v_star)
    return f


def kuramoto_natural_freqs(graph: Graph, theta_star, gains: GainSet) -> np.ndarray:
    """Natural frequencies omega_k = omega0 + eta sum_j w_jk sin(theta*_kj).

    The sign convention is fixed by requiring theta = theta* to rotate
    at exactly omega0 in the equivalent phase model.
    """
    theta_full = _full_angles(theta_star)
    omega = np.full(graph.n_nodes, gains.omega0, dtype=float)
    for k in range(1, graph.n_nodes + 1):
        for j, w in graph.neighbors(k):
            omega[k - 1] += gains.eta_eff * w * np.sin(theta_full[k - 1] - theta_full[j - 1])
    return omega


def kuramoto_field(theta, natural_freqs, graph: Graph, eta: float) -> np.ndarray:
    """Kuramoto phase dynamics on the weighted graph."""
    theta = np.asarray(theta, dtype=float)
    tdot = np.array(natural_freqs, dtype=float)
    for k in range(1, graph.n_nodes + 1):
        for j, w in graph.neighbors(k):
            tdot[k - 1] += eta * w * np.sin(theta[j - 1] - theta[k - 1])
    return tdot


def projected_field(v: np.ndarray, ctx: FieldContext) -> np.ndarray:
    """Closed-loop field projected orthogonally to each node's radial direction."""
    v = np.asarray(v, dtype=float)
    norms2 = v[0::2] ** 2 + v[1::2] ** 2
    if np.any(norms2 < CHART_GUARD**2):
        raise ChartSingularError("projection undefined at origin")
    f = closed_loop_field(v, ctx)
    radial = (v[0::2] * f[0::2] + v[1::2] * f[1::2]) / norms2
    out = f - np.repeat(radial, 2) * v
    return out


def droop_field(state: PolarState, ctx: FieldContext):
    """Polar form of the closed loop on a pure-inductive network.

    Returns (nu_dot, theta_dot).
    """
    if not ctx.net.is_pure_inductive():
        raise InputError("droop form requires a pure-inductive network")
    if np.any(state.nu < CHART_GUARD):
        raise ChartSingularError("polar chart singular: node magnitude below guard")
    sp = ctx.setpoints
    g = ctx.gains
    v = state.to_state()
    p, q = nodal_powers(v, ctx.Y)
    nu, vs = state.nu, sp.v_star
    nu_dot = g.eta_eff * (sp.q_star / vs**2 - q / nu**2) * nu
    nu_dot += (g.alpha_eff / vs) * (vs - nu) * nu
    theta_dot = g.omega0 + g.eta_eff * (sp.p_star / vs**2 - p / nu**2)
    return nu_dot, theta_dot


def instantaneous_frequency(v: np.ndarray, v_dot: np.ndarray) -> np.ndarray:
    """Per-node angle rates (rad/s); NaN where the magnitude guard trips."""
    v = np.asarray(v, dtype=float)
    v_dot = np.asarray(v_dot, dtype=float)
    norms2 = v[0::2] ** 2 + v[1::2] ** 2
    num = v[0::2] * v_dot[1::2] - v[1::2] * v_dot[0::2]
    with np.errstate(invalid="ignore", divide="ignore"):
        omega = np.where(norms2 >= CHART_GUARD**2, num / norms2, np.nan)
    return omega
