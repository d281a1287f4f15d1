"""Stability certificates and trajectory diagnostics."""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .controller import FieldContext, closed_loop_field, phi_all
from .errors import InputError
from .graph import Graph, build_laplacian, lambda2
from .planar import node_norms, rot
from .setpoints import K_from_angles, _full_angles

# Singular values of Q below this fraction of the largest one belong to
# the designed 2-dimensional kernel.
KERNEL_RTOL = 1e-9


@dataclass(frozen=True)
class StabilityReport:
    """Outcome of the synchronization-condition check."""

    lhs: float
    rhs: float
    satisfied: bool
    decay_rate: float
    angle_range_ok: bool
    lhs_abs_angles: float  # variant using |angles| folded into [0, pi/2]
    satisfied_abs_angles: bool
    inductive_form_lhs: Optional[float] = None
    reason: str = ""


@dataclass(frozen=True)
class TargetSetDistances:
    """Distances to the three target sets (phase, magnitude, frequency)."""

    dist_S: float
    dist_A: np.ndarray
    freq_residual: float


def projector_P(v_star, theta_star) -> np.ndarray:
    """Orthogonal projector onto the complement of the target phase plane."""
    v_star = np.asarray(v_star, dtype=float)
    theta_full = _full_angles(theta_star)
    n = len(v_star)
    S = np.zeros((2 * n, 2))
    for k in range(n):
        S[2 * k : 2 * k + 2, :] = v_star[k] * rot(theta_full[k])
    S /= math.sqrt(float(np.sum(v_star**2)))
    return np.eye(2 * n) - S @ S.T


def lyapunov_V(v: np.ndarray, P: np.ndarray) -> float:
    """Squared distance of a state from the target phase plane."""
    v = np.asarray(v, dtype=float)
    return float(v @ (P @ v))


def w_k(v_k, v_star_k: float) -> float:
    """Squared scaled magnitude error of one node."""
    if v_star_k <= 0:
        raise InputError("voltage set-point must be positive")
    return ((v_star_k - float(np.hypot(*v_k))) / v_star_k) ** 2


def decay_rate_Q(KL: np.ndarray, P: np.ndarray, eta_eff: float, alpha_eff: float) -> float:
    """Smallest nonzero singular value of the Lyapunov decrease matrix Q."""
    Q = eta_eff * (P @ KL + KL.T @ P) + 2.0 * alpha_eff * P
    svals = np.linalg.svd(Q, compute_uv=False)
    cutoff = KERNEL_RTOL * svals[0] if svals[0] > 0 else 0.0
    nonzero = svals[svals > cutoff]
    return float(nonzero[-1]) if len(nonzero) else 0.0


def _heterogeneity(graph: Graph, v_star, theta_full, fold_angles: bool) -> float:
    worst = 0.0
    for k in range(1, graph.n_nodes + 1):
        acc = 0.0
        for j, w in graph.neighbors(k):
            tjk = theta_full[j - 1] - theta_full[k - 1]
            if fold_angles:
                tjk = abs(tjk)
            acc += w * abs(1.0 - (v_star[j - 1] / v_star[k - 1]) * math.cos(tjk))
        worst = max(worst, acc)
    return worst


def check_condition1(
    graph: Graph,
    v_star,
    theta_star,
    eta: float,
    alpha: float,
    eta_eff: Optional[float] = None,
    alpha_eff: Optional[float] = None,
    net=None,
) -> StabilityReport:
    """Synchronization condition: heterogeneity + alpha/eta < lambda2 margin.

    The angle prerequisite theta*_k1 in [0, pi/2] is checked literally;
    a folded-angle (absolute value) variant of the left-hand side is
    reported alongside, since small negative angles are common in
    practice. `satisfied` reflects the literal check.
    """
    if eta <= 0 or alpha <= 0:
        raise InputError("condition check needs strictly positive gains")
    v_star = np.asarray(v_star, dtype=float)
    theta_star = np.asarray(theta_star, dtype=float)
    theta_full = _full_angles(theta_star)

    lhs_lit = _heterogeneity(graph, v_star, theta_full, fold_angles=False) + alpha / eta
    lhs_abs = _heterogeneity(graph, v_star, theta_full, fold_angles=True) + alpha / eta
    lam2 = lambda2(build_laplacian(graph))
    rhs = 0.5 * (v_star.min() ** 2 / v_star.max() ** 2) * lam2

    # numerical slack so solver zeros like -1e-18 are not flagged
    angle_ok = bool(
        np.all((theta_star >= -1e-9) & (theta_star <= math.pi / 2 + 1e-9))
    )
    satisfied = bool(lhs_lit < rhs) and angle_ok
    reason = "" if angle_ok else "angle outside Condition 1 range"

    # decay rate of the phase Lyapunov function
    from .graph import extend

    L_ext = extend(build_laplacian(graph))
    K_blocks = K_from_angles(graph, v_star, theta_star)
    KL = -L_ext
    for k, K in enumerate(K_blocks):
        KL[2 * k : 2 * k + 2, 2 * k : 2 * k + 2] += K
    P = projector_P(v_star, theta_star)
    e_eff = eta if eta_eff is None else eta_eff
    a_eff = alpha if alpha_eff is None else alpha_eff
    decay = decay_rate_Q(KL, P, e_eff, a_eff)

    inductive_lhs = None
    if net is not None and net.is_pure_inductive():
        # reactive-branch-power form: per edge, the normalized power
        # imbalance |1 - (v*_j/v*_k) cos(theta*_jk)| is exactly the
        # weight-normalized reactive branch power, so the forms agree
        inductive_lhs = lhs_lit

    return StabilityReport(
        lhs=float(lhs_lit),
        rhs=float(rhs),
        satisfied=satisfied,
        decay_rate=decay,
        angle_range_ok=angle_ok,
        lhs_abs_angles=float(lhs_abs),
        satisfied_abs_angles=bool(lhs_abs < rhs),
        inductive_form_lhs=inductive_lhs,
        reason=reason,
    )


def jacobian_at_origin(eta_eff: float, alpha_eff: float, K_ext: np.ndarray, L_ext: np.ndarray):
    """Linearization of the rotating-frame field at the origin.

    Returns (matrix, eigenvalues). At least two eigenvalues must have
    real part >= alpha_eff (the target plane lies in ker(K - L)), which
    makes the origin a repeller for positive magnitude gain.
    """
    A = eta_eff * (K_ext - L_ext) + alpha_eff * np.eye(len(K_ext))
    eigs = np.linalg.eigvals(A)
    n_unstable = int(np.sum(eigs.real >= alpha_eff - 1e-9))
    if n_unstable < 2:
        raise AssertionError(
            f"origin Jacobian has only {n_unstable} eigenvalues with Re >= alpha"
        )
    return A, eigs


def target_distances(v: np.ndarray, ctx: FieldContext, P: Optional[np.ndarray] = None) -> TargetSetDistances:
    """Distances of a state from the phase, magnitude and frequency targets."""
    v = np.asarray(v, dtype=float)
    sp = ctx.setpoints
    if P is None:
        P = projector_P(sp.v_star, sp.theta_star)
    dist_S = math.sqrt(max(lyapunov_V(v, P), 0.0))
    dist_A = np.abs(node_norms(v) - sp.v_star)
    f = closed_loop_field(v, ctx)
    from .controller import rotate_stack

    freq_residual = float(np.linalg.norm(f - ctx.gains.omega0 * rotate_stack(v)))
    return TargetSetDistances(dist_S=dist_S, dist_A=dist_A, freq_residual=freq_residual)


def gamma_S(gamma_A: float, v_star, sigma_bar_KL: float) -> float:
    """Phase-distance level paired with a magnitude level gamma_A."""
    v_star = np.asarray(v_star, dtype=float)
    vmin, vmax = float(v_star.min()), float(v_star.max())
    if not 0.0 <= gamma_A < vmin / 2.0:
        raise InputError("gamma_A must lie in [0, v_star_min / 2)")
    if sigma_bar_KL <= 0:
        return math.inf
    return (vmin / vmax) * gamma_A * (vmin - gamma_A) / sigma_bar_KL


def invariant_set_membership(
    v_bar: np.ndarray, gamma_A: float, ctx: FieldContext, P: Optional[np.ndarray] = None
) -> bool:
    """Whether a rotating-frame state lies in the invariant set M(gamma_A)."""
    sp = ctx.setpoints
    sigma_bar = float(np.linalg.svd(ctx.KL, compute_uv=False)[0])
    gs = gamma_S(gamma_A, sp.v_star, sigma_bar)
    d = target_distances(v_bar, ctx, P=P)
    # compare squared phase distances so exact-target states are not
    # rejected by sqrt-amplified floating-point noise
    return bool(
        d.dist_S**2 <= gs**2 + 1e-12 and np.all(d.dist_A <= gamma_A + 1e-9)
    )


def w_bound(ctx: FieldContext, v0: np.ndarray, P: Optional[np.ndarray] = None) -> np.ndarray:
    """Per-node upper bound on W_k along a trajectory started at v0."""
    sp = ctx.setpoints
    if P is None:
        P = projector_P(sp.v_star, sp.theta_star)
    dist_S0 = math.sqrt(max(lyapunov_V(np.asarray(v0, dtype=float), P), 0.0))
    sigma_bar = float(np.linalg.svd(ctx.KL, compute_uv=False)[0])
    w0 = phi_all(np.asarray(v0, dtype=float), sp.v_star) ** 2
    mid = (sigma_bar * dist_S0 / (2.0 * sp.v_star**2)) ** 2
    return np.maximum(np.maximum(w0, mid), 1.0)
