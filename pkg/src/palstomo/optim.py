"""Shape evolution by Levenberg-Marquardt or gradient descent.

The data-misfit cost is ``F(mu) = 0.5 ||R||^2`` with residual
``R = forward(p(mu)) - data``.  With ``J = S @ P`` (physics sensitivity
times property-image parameter sensitivities) the gradient and the
Gauss-Newton Hessian are

    g = Re(J^H R),      H = Re(J^H J),

H being a Gramian and hence positive semidefinite.  One LM iteration solves

    (H + lam I) d = -g,

accepts the step if the trial cost strictly decreases (then lam shrinks) and
otherwise re-solves with lam grown, within a bounded retry budget.  Every
accepted step is a descent step, ``d . g < 0``.

Narrow banding: only parameters of bumps whose support meets the transition
band (plus the contrast pair when it is unknown) enter the system; the
remaining parameters keep their exact bit pattern for that iteration.
Iterations stop at the discrepancy level ``||R|| <= target`` (noise norm),
on stagnation, or at the iteration cap.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from . import pals
from .forward import ForwardModel, SolverFailure
from .pals import PalsModel, ParamIndex

logger = logging.getLogger(__name__)

STOP_DISCREPANCY = "discrepancy"
STOP_MAX_ITERS = "max_iters"
STOP_STAGNATION = "stagnation"


@dataclass
class SolverConfig:
    scheme: str = "lm"                  # "lm" | "gd"
    lambda0: float | None = None        # None: 1e-2 * trace(H0)/m
    lambda_up: float = 10.0
    lambda_down: float = 0.1
    max_iters: int = 50
    discrepancy_target: float = 0.0
    stagnation_tol: float = 1e-6
    stagnation_patience: int = 5
    step_norm_tol: float = 1e-10
    max_retries: int = 30
    unknown_contrasts: bool = False

    def __post_init__(self):
        if self.scheme not in ("lm", "gd"):
            raise ValueError("scheme must be 'lm' or 'gd'")
        if self.lambda0 is not None and self.lambda0 <= 0:
            raise ValueError("lambda0 must be positive")
        if not (self.lambda_up > 1.0 > self.lambda_down > 0.0):
            raise ValueError("need lambda_up > 1 > lambda_down > 0")
        if self.max_iters < 0:
            raise ValueError("max_iters must be nonnegative")


@dataclass
class SolverState:
    model: PalsModel
    iteration: int = 0
    cost: float = np.inf
    lam: float = 0.0
    cost_history: list[float] = field(default_factory=list)
    active_mask: np.ndarray | None = None
    stop_reason: str | None = None
    model_history: list[PalsModel] = field(default_factory=list)


def gradient(J: np.ndarray, r: np.ndarray) -> np.ndarray:
    """Cost gradient ``Re(J^H r)``."""
    return np.real(J.conj().T @ r)


def gauss_newton_hessian(J: np.ndarray) -> np.ndarray:
    """Approximate Hessian ``Re(J^H J)`` (PSD Gramian)."""
    return np.real(J.conj().T @ J)


def active_params(model: PalsModel, active: np.ndarray,
                  unknown_contrasts: bool) -> list[ParamIndex]:
    """Flat-order parameter list restricted to the active bumps."""
    sel = set(int(j) for j in active)
    out = [idx for idx in pals.param_indices(model.m0, unknown_contrasts)
           if (not idx.is_bump_bound) or idx.bump in sel]
    return out


def assemble_jacobian(model: PalsModel, grid, fwd: ForwardModel,
                      params: list[ParamIndex],
                      S: np.ndarray | None = None,
                      phi: np.ndarray | None = None) -> np.ndarray:
    """Residual Jacobian columns ``S @ dp/dmu`` for the given parameters."""
    if S is None:
        S = fwd.sensitivity(pals.property_map(model, grid, phi))
    P = pals.property_sensitivity_matrix(model, grid, params, phi)
    return S @ P


def _solve_damped(H: np.ndarray, g: np.ndarray, lam: float) -> np.ndarray:
    """Solve ``(H + lam I) d = -g`` by Cholesky (the system is SPD)."""
    n = H.shape[0]
    c, low = sla.cho_factor(H + lam * np.eye(n), lower=True)
    return sla.cho_solve((c, low), -g)


def lm_step(mu: np.ndarray, cost: float, g: np.ndarray, H: np.ndarray,
            lam: float, eval_cost, config: SolverConfig):
    """One Levenberg-Marquardt update of the flat parameter vector.

    Returns ``(mu, cost, lam, accepted, tries, step)``; on ``g = 0`` the
    state is returned unchanged with a zero step.
    """
    if not np.any(g):
        return mu, cost, lam, True, 0, np.zeros_like(mu)
    for attempt in range(1, config.max_retries + 1):
        try:
            d = _solve_damped(H, g, lam)
        except np.linalg.LinAlgError:
            lam *= config.lambda_up
            continue
        trial = mu + d
        trial_cost = eval_cost(trial)
        if trial_cost < cost:
            return trial, trial_cost, lam * config.lambda_down, True, attempt, d
        lam *= config.lambda_up
    return mu, cost, lam, False, config.max_retries, np.zeros_like(mu)


def gd_step(mu: np.ndarray, cost: float, g: np.ndarray, step: float,
            eval_cost, config: SolverConfig):
    """One gradient-descent update with backtracking halving of the step."""
    if not np.any(g):
        return mu, cost, step, True, 0, np.zeros_like(mu)
    for attempt in range(1, config.max_retries + 1):
        d = -step * g
        trial = mu + d
        trial_cost = eval_cost(trial)
        if trial_cost < cost:
            return trial, trial_cost, step * 2.0, True, attempt, d
        step *= 0.5
    return mu, cost, step, False, config.max_retries, np.zeros_like(mu)


def run(config: SolverConfig, model0: PalsModel, fwd: ForwardModel,
        data: np.ndarray):
    """Evolve the PaLS parameters against one data vector.

    Returns ``(SolverState, log)`` where ``log`` has one dict per accepted
    iteration (cost, residual norm, lambda, active bump count, contrasts).
    """
    grid = fwd.grid
    model = model0
    r = fwd.residual(pals.property_map(model, grid), data)
    cost = 0.5 * float(np.real(np.vdot(r, r)))
    state = SolverState(model=model, cost=cost, lam=config.lambda0 or 0.0,
                        cost_history=[cost],
                        active_mask=np.zeros(model.m0, dtype=bool))
    log: list[dict] = []

    def snapshot(it, res_norm, n_active, tries):
        log.append({
            "iteration": it,
            "cost": state.cost,
            "residual_norm": res_norm,
            "lambda": state.lam,
            "active_bumps": n_active,
            "contrast_in": state.model.contrast_in,
            "contrast_out": state.model.contrast_out,
            "tries": tries,
        })
        state.model_history.append(state.model)

    res_norm = float(np.linalg.norm(r))
    snapshot(0, res_norm, 0, 0)
    if config.discrepancy_target > 0 and res_norm <= config.discrepancy_target:
        state.stop_reason = STOP_DISCREPANCY
        return state, log

    lam = config.lambda0
    gd_step_size = config.lambda0 or 1.0
    flat_since_progress = 0

    for t in range(1, config.max_iters + 1):
        phi = pals.eval_phi(model, grid)
        active = pals.active_bumps(model, grid, phi)
        state.active_mask = np.zeros(model.m0, dtype=bool)
        state.active_mask[active] = True
        params = active_params(model, active, config.unknown_contrasts)
        if not params:
            state.stop_reason = STOP_STAGNATION
            break
        p_img = pals.property_map(model, grid, phi)
        _, S = fwd.forward_and_sensitivity(p_img)
        J = assemble_jacobian(model, grid, fwd, params, S=S, phi=phi)
        g = gradient(J, r)
        mu = pals.pack_params(model, params)

        trial_cache: dict[bytes, tuple[PalsModel, np.ndarray]] = {}

        def eval_cost(mu_trial):
            # an infeasible trial (non-physical property image or a failed
            # solve) is rejected, not fatal: LM raises the damping and retries
            m_trial = pals.apply_params(model, params, mu_trial)
            try:
                r_trial = fwd.residual(pals.property_map(m_trial, grid), data)
            except (ValueError, SolverFailure):
                return np.inf
            trial_cache[mu_trial.tobytes()] = (m_trial, r_trial)
            return 0.5 * float(np.real(np.vdot(r_trial, r_trial)))

        if config.scheme == "lm":
            H = gauss_newton_hessian(J)
            if lam is None:
                lam = 1e-2 * float(np.trace(H)) / max(len(params), 1)
                lam = max(lam, 1e-300)
            mu_new, cost_new, lam, accepted, tries, step_vec = lm_step(
                mu, cost, g, H, lam, eval_cost, config)
        else:
            mu_new, cost_new, gd_step_size, accepted, tries, step_vec = gd_step(
                mu, cost, g, gd_step_size, eval_cost, config)

        if not accepted:
            state.stop_reason = STOP_STAGNATION
            break
        if not np.any(step_vec):
            state.stop_reason = STOP_STAGNATION
            break

        prev_cost = cost
        model, r = trial_cache[mu_new.tobytes()]
        cost = cost_new
        state.model = model
        state.cost = cost
        state.lam = lam if config.scheme == "lm" else gd_step_size
        state.iteration = t
        state.cost_history.append(cost)
        res_norm = float(np.linalg.norm(r))
        snapshot(t, res_norm, len(active), tries)
        logger.info("iter %d cost %.6e |r| %.6e lam %.3e active %d",
                    t, cost, res_norm, state.lam, len(active))

        if config.discrepancy_target > 0 and res_norm <= config.discrepancy_target:
            state.stop_reason = STOP_DISCREPANCY
            break
        if np.linalg.norm(step_vec) < config.step_norm_tol:
            state.stop_reason = STOP_STAGNATION
            break
        rel_drop = (prev_cost - cost) / max(prev_cost, 1e-300)
        flat_since_progress = flat_since_progress + 1 if rel_drop < config.stagnation_tol else 0
        if flat_since_progress >= config.stagnation_patience:
            state.stop_reason = STOP_STAGNATION
            break
    if state.stop_reason is None:
        state.stop_reason = STOP_MAX_ITERS
    return state, log
