"""Cubic Hermite profile representation and pointwise geometric quantities.

A profile is the graph y = f(x) over [-a, a], discretized with C1 cubic
Hermite elements on a uniform grid. Degrees of freedom are the nodal values
of f and f'. The second derivative of the interpolant is piecewise linear,
so every representable profile has square-integrable curvature; corner
(slope-jump) geometries are structurally unrepresentable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# 5-point Gauss-Legendre rule on [0, 1], used for all element quadrature.
_GAUSS_T, _GAUSS_W = np.polynomial.legendre.leggauss(5)
_GAUSS_T = 0.5 * (_GAUSS_T + 1.0)
_GAUSS_W = 0.5 * _GAUSS_W


@dataclass(frozen=True)
class ProblemParams:
    """One problem instance: half-width a, curvature weight gamma, target area A0."""

    a: float
    gamma: float
    A0: float

    def __post_init__(self):
        if not (self.a > 0.0):
            raise ValueError(f"half-width a must be positive, got {self.a}")
        if not (self.gamma > 0.0):
            raise ValueError(f"curvature weight gamma must be positive, got {self.gamma}")


@dataclass(frozen=True)
class Profile:
    """Discretized graph profile on a uniform mesh over [-a, a].

    nodal_values[i] and nodal_derivatives[i] hold f and f' at node i; the
    interpolant between adjacent nodes is the cubic Hermite matching both.
    """

    params: ProblemParams
    n_elements: int
    nodal_values: np.ndarray
    nodal_derivatives: np.ndarray

    def __post_init__(self):
        if self.n_elements < 1:
            raise ValueError("n_elements must be >= 1")
        values = np.asarray(self.nodal_values, dtype=float)
        derivs = np.asarray(self.nodal_derivatives, dtype=float)
        if values.shape != (self.n_elements + 1,) or derivs.shape != (self.n_elements + 1,):
            raise ValueError(
                f"expected {self.n_elements + 1} nodal values and derivatives, "
                f"got shapes {values.shape} and {derivs.shape}"
            )
        object.__setattr__(self, "nodal_values", values)
        object.__setattr__(self, "nodal_derivatives", derivs)

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(-self.params.a, self.params.a, self.n_elements + 1)

    @property
    def element_width(self) -> float:
        return 2.0 * self.params.a / self.n_elements

    @property
    def is_admissible(self) -> bool:
        """True when value and slope vanish at both boundary nodes."""
        return (
            self.nodal_values[0] == 0.0
            and self.nodal_values[-1] == 0.0
            and self.nodal_derivatives[0] == 0.0
            and self.nodal_derivatives[-1] == 0.0
        )


def flat_profile(params: ProblemParams, n_elements: int) -> Profile:
    """The zero profile (all DOFs zero)."""
    z = np.zeros(n_elements + 1)
    return Profile(params, n_elements, z, z.copy())


def interpolate_function(params: ProblemParams, n_elements: int, f, fp) -> Profile:
    """Profile whose nodal data are sampled from callables f(x) and fp(x)."""
    x = np.linspace(-params.a, params.a, n_elements + 1)
    values = np.array([float(f(xi)) for xi in x])
    derivs = np.array([float(fp(xi)) for xi in x])
    return Profile(params, n_elements, values, derivs)


# ---------------------------------------------------------------------------
# DOF vector layout
#
# The full DOF vector interleaves (value, derivative) per node:
# [v0, m0, v1, m1, ..., vn, mn]. Admissible variations live in the free
# slice [2:-2] (all interior nodes); the four boundary DOFs are clamped.
# ---------------------------------------------------------------------------


def profile_dofs(profile: Profile) -> np.ndarray:
    """Full interleaved DOF vector of length 2*(n_elements + 1)."""
    dofs = np.empty(2 * (profile.n_elements + 1))
    dofs[0::2] = profile.nodal_values
    dofs[1::2] = profile.nodal_derivatives
    return dofs


def free_dofs(profile: Profile) -> np.ndarray:
    """Interior DOF vector of length 2*(n_elements - 1)."""
    return profile_dofs(profile)[2:-2]


def with_free_dofs(profile: Profile, free: np.ndarray) -> Profile:
    """New profile with the interior DOFs replaced; boundary DOFs forced to zero."""
    free = np.asarray(free, dtype=float)
    if free.shape != (2 * (profile.n_elements - 1),):
        raise ValueError(f"free DOF vector has wrong length {free.shape}")
    dofs = np.zeros(2 * (profile.n_elements + 1))
    dofs[2:-2] = free
    return Profile(profile.params, profile.n_elements, dofs[0::2], dofs[1::2])


# ---------------------------------------------------------------------------
# Hermite basis on the reference interval t in [0, 1]
# ---------------------------------------------------------------------------


def _hermite_rows(t: np.ndarray, h: float):
    """Basis rows for (f, f', f'') against element DOFs [v0, h-scaled m0, v1, m1].

    Returns three (4, len(t)) arrays N, Np, Npp such that, for element DOFs
    d = [v0, m0, v1, m1] on an element of width h,
    f = d @ N, f' = d @ Np, f'' = d @ Npp.
    """
    t = np.asarray(t, dtype=float)
    n = np.empty((4, t.size))
    n[0] = 2 * t**3 - 3 * t**2 + 1
    n[1] = h * (t**3 - 2 * t**2 + t)
    n[2] = -2 * t**3 + 3 * t**2
    n[3] = h * (t**3 - t**2)
    np_ = np.empty((4, t.size))
    np_[0] = (6 * t**2 - 6 * t) / h
    np_[1] = 3 * t**2 - 4 * t + 1
    np_[2] = (-6 * t**2 + 6 * t) / h
    np_[3] = 3 * t**2 - 2 * t
    npp = np.empty((4, t.size))
    npp[0] = (12 * t - 6) / h**2
    npp[1] = (6 * t - 4) / h
    npp[2] = (-12 * t + 6) / h**2
    npp[3] = (6 * t - 2) / h
    return n, np_, npp


def element_dof_matrix(profile: Profile) -> np.ndarray:
    """(n_elements, 4) array of per-element DOFs [v0, m0, v1, m1]."""
    v = profile.nodal_values
    m = profile.nodal_derivatives
    return np.column_stack([v[:-1], m[:-1], v[1:], m[1:]])


def gauss_points(profile: Profile):
    """All Gauss abscissae, f', f'' there, and dx-weights, per element.

    Returns (x, fp, fpp, w) with shape (n_elements, 5) each; w already
    includes the element Jacobian h/2 ... here h since the rule lives on [0,1].
    """
    h = profile.element_width
    _, np_, npp = _hermite_rows(_GAUSS_T, h)
    dofs = element_dof_matrix(profile)
    fp = dofs @ np_
    fpp = dofs @ npp
    left = profile.nodes[:-1]
    x = left[:, None] + h * _GAUSS_T[None, :]
    w = np.broadcast_to(h * _GAUSS_W[None, :], fp.shape)
    return x, fp, fpp, w


def _symmetric_element_sums(contrib: np.ndarray) -> float:
    """Sum per-element Gauss contributions so mirrored meshes sum bit-identically.

    Pairs symmetric Gauss points within each element, then uses fsum across
    elements (order-independent, correctly rounded).
    """
    per_element = (
        (contrib[:, 0] + contrib[:, 4]) + (contrib[:, 1] + contrib[:, 3]) + contrib[:, 2]
    )
    return math.fsum(per_element.tolist())


def _locate(profile: Profile, x) -> tuple[np.ndarray, np.ndarray]:
    """Element index and local coordinate for each x; validates the domain."""
    a = profile.params.a
    x = np.asarray(x, dtype=float)
    tol = 1e-12 * a
    if np.any(x < -a - tol) or np.any(x > a + tol):
        bad = x[(x < -a - tol) | (x > a + tol)]
        raise ValueError(f"coordinate {float(bad.flat[0])!r} outside [-{a}, {a}]")
    xc = np.clip(x, -a, a)
    h = profile.element_width
    k = np.clip(((xc + a) / h).astype(int), 0, profile.n_elements - 1)
    t = (xc - (-a + k * h)) / h
    return k, t


def evaluate(profile: Profile, x):
    """Interpolant value and first two derivatives at x (scalar or array).

    f'' comes from the piecewise-linear second derivative of the cubic and is
    taken from the element owning x (right-continuous at interior nodes).
    """
    scalar = np.isscalar(x) or np.ndim(x) == 0
    k, t = _locate(profile, x)
    k = np.atleast_1d(k)
    t = np.atleast_1d(t)
    h = profile.element_width
    n, np_, npp = _hermite_rows(t, h)
    dofs = element_dof_matrix(profile)[k]
    f = np.einsum("ij,ji->i", dofs, n)
    fp = np.einsum("ij,ji->i", dofs, np_)
    fpp = np.einsum("ij,ji->i", dofs, npp)
    if scalar:
        return float(f[0]), float(fp[0]), float(fpp[0])
    return f, fp, fpp


def curvature(profile: Profile, x):
    """Signed curvature f'' / (1 + f'^2)^(3/2); positive where concave up."""
    _, fp, fpp = evaluate(profile, x)
    return fpp / (1.0 + fp**2) ** 1.5


def tangent_angle(profile: Profile, x):
    """Tangent angle arctan(f'), in (-pi/2, pi/2)."""
    _, fp, _ = evaluate(profile, x)
    return np.arctan(fp) if not np.isscalar(fp) else math.atan(fp)


def arc_length(profile: Profile) -> float:
    """Total curve length, 5-point Gauss quadrature of sqrt(1 + f'^2) per element."""
    _, fp, _, w = gauss_points(profile)
    return _symmetric_element_sums(w * np.sqrt(1.0 + fp**2))


def area(profile: Profile) -> float:
    """Exact integral of the piecewise cubic over [-a, a] (closed form per element)."""
    h = profile.element_width
    v = profile.nodal_values
    m = profile.nodal_derivatives
    per_element = 0.5 * h * (v[:-1] + v[1:]) + (h * h / 12.0) * (m[:-1] - m[1:])
    return math.fsum(per_element.tolist())


def refine(profile: Profile, factor: int) -> Profile:
    """Re-mesh onto factor-times more elements, reproducing the interpolant exactly."""
    if factor < 1:
        raise ValueError("refinement factor must be >= 1")
    if factor == 1:
        return Profile(
            profile.params,
            profile.n_elements,
            profile.nodal_values.copy(),
            profile.nodal_derivatives.copy(),
        )
    n_new = profile.n_elements * factor
    x_new = np.linspace(-profile.params.a, profile.params.a, n_new + 1)
    f, fp, _ = evaluate(profile, x_new)
    # Old nodes transfer their DOFs verbatim to dodge roundoff in re-evaluation.
    f[::factor] = profile.nodal_values
    fp[::factor] = profile.nodal_derivatives
    return Profile(profile.params, n_new, f, fp)


# ---------------------------------------------------------------------------
# CSV serialization: header "x,f,fp", one row per node, full precision.
# ---------------------------------------------------------------------------


def profile_to_csv(profile: Profile) -> str:
    lines = ["x,f,fp"]
    for x, f, fp in zip(profile.nodes, profile.nodal_values, profile.nodal_derivatives):
        lines.append(f"{x:.17e},{f:.17e},{fp:.17e}")
    return "\n".join(lines) + "\n"


def save_profile_csv(profile: Profile, path) -> None:
    with open(path, "w") as fh:
        fh.write(profile_to_csv(profile))


def parse_profile_csv(text: str):
    """Parse node table text into (x, f, fp) arrays.

    Raises ValueError naming the 1-based offending row on malformed input.
    """
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError("row 1: empty profile file")
    header = [c.strip() for c in lines[0].split(",")]
    if header != ["x", "f", "fp"]:
        raise ValueError(f"row 1: expected header 'x,f,fp', got {lines[0]!r}")
    rows = []
    for i, ln in enumerate(lines[1:], start=2):
        parts = ln.split(",")
        if len(parts) != 3:
            raise ValueError(f"row {i}: expected 3 comma-separated fields, got {len(parts)}")
        try:
            rows.append([float(p) for p in parts])
        except ValueError:
            raise ValueError(f"row {i}: non-numeric field in {ln!r}") from None
    if len(rows) < 2:
        raise ValueError(f"row {len(lines)}: need at least 2 nodes")
    data = np.array(rows)
    return data[:, 0], data[:, 1], data[:, 2]


def profile_from_csv(path, gamma: float, A0: float | None = None) -> Profile:
    """Load a profile node table; a and the mesh come from the x column.

    A0 defaults to the loaded profile's own area, which makes the profile
    feasible by construction (multiplier recovery does not depend on A0).
    """
    with open(path) as fh:
        x, f, fp = parse_profile_csv(fh.read())
    n = len(x) - 1
    a = 0.5 * (x[-1] - x[0])
    if a <= 0:
        raise ValueError("row 2: node coordinates must be increasing")
    if abs(x[0] + a) > 1e-9 * a:
        raise ValueError("row 2: node table must span a symmetric interval [-a, a]")
    spacing = np.diff(x)
    if np.any(np.abs(spacing - 2 * a / n) > 1e-9 * a):
        bad = int(np.argmax(np.abs(spacing - 2 * a / n) > 1e-9 * a)) + 3
        raise ValueError(f"row {bad}: nodes are not uniformly spaced")
    prof = Profile(ProblemParams(a=a, gamma=gamma, A0=0.0), n, f, fp)
    if A0 is None:
        A0 = area(prof)
    return Profile(ProblemParams(a=a, gamma=gamma, A0=A0), n, f, fp)
