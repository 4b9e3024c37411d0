"""Constrained minimization of the interface energy over the discrete admissible set.

The admissible set is an affine hyperplane of the free DOFs (single linear
area constraint; clamped boundary DOFs are excluded from the variable set).
Descent runs in the constraint null space with Armijo backtracking; an
optional limited-memory quasi-Newton direction (two-loop recursion) can be
toggled off to fall back to plain projected steepest descent.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .energy import (
    EnergyBreakdown,
    constraint_gradient,
    constraint_value,
    energy_gradient,
    total_energy,
)
from .geometry import Profile, ProblemParams, free_dofs, with_free_dofs

_STEP_UNDERFLOW = 1e-16


@dataclass(frozen=True)
class OptimizationConfig:
    grad_tol: float = 1e-8
    max_iters: int = 10000
    armijo_c: float = 1e-4
    backtrack_factor: float = 0.5
    initial_step: float = 1.0
    use_lbfgs: bool = True
    lbfgs_memory: int = 10

    def __post_init__(self):
        if self.grad_tol <= 0 or self.max_iters <= 0 or self.initial_step <= 0:
            raise ValueError("grad_tol, max_iters and initial_step must be positive")
        if not (0.0 < self.armijo_c < 1.0):
            raise ValueError("armijo_c must lie in (0, 1)")
        if not (0.0 < self.backtrack_factor < 1.0):
            raise ValueError("backtrack_factor must lie in (0, 1)")
        if self.lbfgs_memory < 1:
            raise ValueError("lbfgs_memory must be >= 1")


class LambdaRecovery(NamedTuple):
    lam: float
    residual_norm: float


@dataclass
class OptimizationResult:
    profile: Profile
    lam: float
    energy: EnergyBreakdown
    iterations: int
    history: list[tuple[float, float]]
    converged: bool
    message: str = ""


def seed_profile(params: ProblemParams, n_elements: int) -> Profile:
    """Quartic bump c*(a^2 - x^2)^2 interpolated and projected onto the constraint.

    c = 15*A0 / (16*a^5) makes the analytic area equal A0; the bump and its
    slope vanish at both endpoints, so the boundary DOFs are exactly zero.
    """
    if n_elements < 4:
        raise ValueError("n_elements must be >= 4")
    a, A0 = params.a, params.A0
    c = 15.0 * A0 / (16.0 * a**5)
    x = np.linspace(-a, a, n_elements + 1)
    r = a * a - x * x
    prof = Profile(params, n_elements, c * r * r, -4.0 * c * x * r)
    return project_to_constraint(prof)


def project_to_constraint(profile: Profile) -> Profile:
    """Minimal Euclidean free-DOF correction onto {area = A0}.

    The constraint is affine, so one step along its (constant) gradient is
    exact; boundary DOFs are untouched.
    """
    g = constraint_gradient(profile)
    gg = float(g @ g)
    if gg <= 0.0:
        raise RuntimeError("degenerate constraint gradient")
    violation = constraint_value(profile)
    if violation == 0.0:
        return profile
    u = free_dofs(profile) - (violation / gg) * g
    return with_free_dofs(profile, u)


def recover_lambda(profile: Profile) -> LambdaRecovery:
    """Least-squares multiplier: lambda minimizing ||grad J + lambda * g||."""
    grad = energy_gradient(profile)
    g = constraint_gradient(profile)
    lam = -float(grad @ g) / float(g @ g)
    residual = float(np.linalg.norm(grad + lam * g))
    return LambdaRecovery(lam=lam, residual_norm=residual)


def flat_state_hessian(profile: Profile) -> np.ndarray:
    """Exact energy Hessian at the flat profile, over the free DOFs.

    The second variation of J at f = 0 is integral of phi'^2 + 2*gamma*phi''^2,
    i.e. the Hermite string stiffness plus 2*gamma times the bending stiffness.
    Used as the quasi-Newton seed matrix; the fourth-order term makes the raw
    problem too ill-conditioned for unscaled descent directions.
    """
    n = profile.n_elements
    h = profile.element_width
    gamma = profile.params.gamma
    k2 = (1.0 / (30.0 * h)) * np.array(
        [
            [36.0, 3.0 * h, -36.0, 3.0 * h],
            [3.0 * h, 4.0 * h * h, -3.0 * h, -h * h],
            [-36.0, -3.0 * h, 36.0, -3.0 * h],
            [3.0 * h, -h * h, -3.0 * h, 4.0 * h * h],
        ]
    )
    k4 = (1.0 / h**3) * np.array(
        [
            [12.0, 6.0 * h, -12.0, 6.0 * h],
            [6.0 * h, 4.0 * h * h, -6.0 * h, 2.0 * h * h],
            [-12.0, -6.0 * h, 12.0, -6.0 * h],
            [6.0 * h, 2.0 * h * h, -6.0 * h, 4.0 * h * h],
        ]
    )
    local = k2 + 2.0 * gamma * k4
    full = np.zeros((2 * (n + 1), 2 * (n + 1)))
    for e in range(n):
        i = 2 * e
        full[i : i + 4, i : i + 4] += local
    return full[2:-2, 2:-2]


class _LbfgsMemory:
    """Two-loop recursion over projected (s, y) pairs, seeded with a fixed H0 map."""

    def __init__(self, size: int, h0_apply):
        self.size = size
        self.h0_apply = h0_apply
        self.s: list[np.ndarray] = []
        self.y: list[np.ndarray] = []

    def clear(self):
        self.s.clear()
        self.y.clear()

    def push(self, s: np.ndarray, y: np.ndarray):
        # Skip pairs without positive curvature; Armijo-only line search
        # does not guarantee the secant condition.
        sy = float(s @ y)
        if sy <= 1e-12 * float(np.linalg.norm(s)) * float(np.linalg.norm(y)):
            return
        self.s.append(s)
        self.y.append(y)
        if len(self.s) > self.size:
            self.s.pop(0)
            self.y.pop(0)

    def direction(self, grad: np.ndarray) -> np.ndarray:
        q = grad.copy()
        alphas = []
        rhos = [1.0 / float(s @ y) for s, y in zip(self.s, self.y)]
        for s, y, rho in zip(reversed(self.s), reversed(self.y), reversed(rhos)):
            alpha = rho * float(s @ q)
            alphas.append(alpha)
            q -= alpha * y
        q = self.h0_apply(q)
        for s, y, rho, alpha in zip(self.s, self.y, rhos, reversed(alphas)):
            beta = rho * float(y @ q)
            q += (alpha - beta) * s
        return -q


def _descend(start: Profile, config: OptimizationConfig) -> OptimizationResult:
    g_con = constraint_gradient(start)
    g_con_sq = float(g_con @ g_con)
    target = start.params.A0

    def project_tangent(v: np.ndarray) -> np.ndarray:
        return v - (float(v @ g_con) / g_con_sq) * g_con

    def make_profile(u: np.ndarray) -> Profile:
        return with_free_dofs(start, u)

    def objective(u: np.ndarray) -> float:
        return total_energy(make_profile(u)).total

    u = free_dofs(project_to_constraint(start))
    J = objective(u)
    grad = energy_gradient(make_profile(u))
    pgrad = project_tangent(grad)
    pnorm = float(np.linalg.norm(pgrad))
    history = [(J, pnorm)]

    if config.use_lbfgs:
        h0_inv = np.linalg.inv(flat_state_hessian(start))

        def h0_apply(v: np.ndarray) -> np.ndarray:
            return project_tangent(h0_inv @ project_tangent(v))

    else:
        h0_apply = project_tangent
    memory = _LbfgsMemory(config.lbfgs_memory, h0_apply)
    converged = pnorm <= config.grad_tol
    message = "" if not converged else "stationary at start"
    iterations = 0
    step_prev = config.initial_step

    while not converged and iterations < config.max_iters:
        tried_fallback = False
        if config.use_lbfgs:
            d = project_tangent(memory.direction(pgrad))
            t0 = config.initial_step
        else:
            d = -pgrad
            t0 = min(config.initial_step, 4.0 * step_prev)
        slope = float(grad @ d)
        if slope >= 0.0:
            memory.clear()
            d = -pgrad
            slope = -pnorm * pnorm
            tried_fallback = True
            t0 = config.initial_step

        while True:
            t = t0
            u_new = None
            while t >= _STEP_UNDERFLOW:
                candidate = u + t * d
                # Exact re-projection guards against drift off the hyperplane.
                candidate -= ((float(candidate @ g_con) - target) / g_con_sq) * g_con
                J_new = objective(candidate)
                if J_new <= J + config.armijo_c * t * slope:
                    u_new = candidate
                    break
                t *= config.backtrack_factor
            if u_new is not None or tried_fallback or not config.use_lbfgs:
                break
            # Quasi-Newton direction failed; retry once with steepest descent.
            memory.clear()
            d = -pgrad
            slope = -pnorm * pnorm
            tried_fallback = True
            t0 = config.initial_step

        if u_new is None:
            message = f"line search step underflow below {_STEP_UNDERFLOW:g}"
            break

        grad_new = energy_gradient(make_profile(u_new))
        pgrad_new = project_tangent(grad_new)
        if config.use_lbfgs:
            memory.push(u_new - u, pgrad_new - pgrad)
        step_prev = t
        u, J, grad, pgrad = u_new, J_new, grad_new, pgrad_new
        pnorm = float(np.linalg.norm(pgrad))
        iterations += 1
        history.append((J, pnorm))
        if pnorm <= config.grad_tol:
            converged = True

    profile = project_to_constraint(make_profile(u))
    lam, _ = recover_lambda(profile)
    return OptimizationResult(
        profile=profile,
        lam=lam,
        energy=total_energy(profile),
        iterations=iterations,
        history=history,
        converged=converged,
        message=message,
    )


def minimize(
    params: ProblemParams,
    n_elements: int = 64,
    config: OptimizationConfig | None = None,
    multi_start: bool = False,
) -> OptimizationResult:
    """Minimize the interface energy from the quartic seed.

    With multi_start, the seed is also scaled by 0.5x and 2x (then
    reprojected onto the constraint) and the best of the three local
    minimizers is returned. Deterministic for fixed inputs.
    """
    if config is None:
        config = OptimizationConfig()
    seed = seed_profile(params, n_elements)
    scales = (1.0, 0.5, 2.0) if multi_start else (1.0,)
    best: OptimizationResult | None = None
    for s in scales:
        if s == 1.0:
            start = seed
        else:
            start = project_to_constraint(
                Profile(params, n_elements, s * seed.nodal_values, s * seed.nodal_derivatives)
            )
        result = _descend(start, config)
        if best is None or result.energy.total < best.energy.total:
            best = result
    return best
