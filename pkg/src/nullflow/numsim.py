"""Grid evolution of curvature flows and null-curve reconstruction.

Curvatures live on a uniform periodic grid.  Spatial derivatives use
centered finite differences whose weights are solved exactly over the
rationals, so the stencil choice (central4 or central6) is a config
field rather than a table.  Time stepping is fixed-step classical RK4;
the stability bound stability_c * dx^3 for third-order flows is
recorded in the run report, and dt = 0 asks for exactly that bound.

Reconstruction integrates the frame equations

    gamma' = T,   T' = a W1,   W1' = -k1 T + a eps1 N,
    N' = -eps1 k1 W1 + eps2 k2 W2,   W2' = k2 T

along sigma with RK4 substeps, sampling the curvature arrays between
nodes by 6-point Lagrange interpolation.  Frames are never projected
back onto the pairing table (<T,T> = <N,N> = 0, <T,N> = -1,
<Wi,Wi> = eps_i); the drift is measured per node and reported.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .diffalg import DiffPoly, FlowPair


class UnboundParameter(ValueError):
    """A flow mentions a named constant the bindings do not cover."""

    def __init__(self, name: str):
        super().__init__("parameter %r has no numeric value" % (name,))
        self.name = name


class BlowUp(RuntimeError):
    """The evolution left the finite range; carries the last good state."""

    def __init__(self, time: float, step: int, last_good: "CurvatureGrid"):
        super().__init__("solution blew up at t=%.6g (step %d)" % (time, step))
        self.time = time
        self.step = step
        self.last_good = last_good


_STENCIL_ACCURACY = {"central4": 4, "central6": 6}


@dataclass(frozen=True)
class SimConfig:
    """Domain, signature, and discretization choices for one run.

    dt = 0 means "use the recorded stability bound"; output_stride = 0
    keeps only the initial and final states.
    """

    domain_length: float
    grid_points: int = 512
    dt: float = 0.0
    t_end: float = 0.0
    a: float = 1.0
    eps1: int = 1
    eps2: int = 1
    derivative_stencil: str = "central4"
    output_stride: int = 0
    stability_c: float = 0.1

    def __post_init__(self):
        if self.domain_length <= 0:
            raise ValueError("domain_length must be positive")
        if self.grid_points < 16:
            raise ValueError("need at least 16 grid points")
        if self.eps1 not in (-1, 1) or self.eps2 not in (-1, 1):
            raise ValueError("eps1 and eps2 must be +1 or -1")
        if (self.eps1, self.eps2) == (-1, -1):
            raise ValueError("signature (-1, -1) admits no null frame here")
        if self.derivative_stencil not in _STENCIL_ACCURACY:
            raise ValueError("derivative_stencil must be central4 or central6")
        if self.a <= 0:
            raise ValueError("a must be positive")
        if self.dt < 0 or self.t_end < 0:
            raise ValueError("dt and t_end must be nonnegative")
        if self.output_stride < 0:
            raise ValueError("output_stride must be nonnegative")

    @property
    def dx(self) -> float:
        return self.domain_length / self.grid_points

    @property
    def accuracy(self) -> int:
        return _STENCIL_ACCURACY[self.derivative_stencil]

    def stability_bound(self) -> float:
        """Largest dt the third-order stiffness scale admits."""
        return self.stability_c * self.dx**3

    def bindings(self) -> dict:
        return {"a": float(self.a), "eps1": float(self.eps1), "eps2": float(self.eps2)}


@dataclass(frozen=True, eq=False)
class CurvatureGrid:
    """Periodic samples of (k1, k2) at one time."""

    sigma: np.ndarray
    k1: np.ndarray
    k2: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        if not (len(self.sigma) == len(self.k1) == len(self.k2)):
            raise ValueError("sigma, k1, k2 must have equal length")

    @property
    def dx(self) -> float:
        return float(self.sigma[1] - self.sigma[0])

    def mass(self, variable: str = "k1") -> float:
        values = self.k1 if variable == "k1" else self.k2
        return float(values.sum() * self.dx)


def uniform_grid(config: SimConfig, k1, k2=None, time: float = 0.0) -> CurvatureGrid:
    """Sample callables (or broadcastable values) on the periodic grid."""
    sigma = np.arange(config.grid_points) * config.dx
    k1v = np.asarray(k1(sigma) if callable(k1) else k1, dtype=float)
    k1v = np.broadcast_to(k1v, sigma.shape).copy()
    if k2 is None:
        k2v = np.zeros_like(sigma)
    else:
        k2v = np.asarray(k2(sigma) if callable(k2) else k2, dtype=float)
        k2v = np.broadcast_to(k2v, sigma.shape).copy()
    return CurvatureGrid(sigma, k1v, k2v, time)


# -- finite differences ----------------------------------------------------

_WEIGHTS: dict = {}


def fd_weights(m: int, accuracy: int) -> tuple[list[int], list[Fraction]]:
    """Centered stencil offsets and exact weights for d^m/dx^m."""
    if m < 1:
        raise ValueError("derivative order must be >= 1")
    key = (m, accuracy)
    if key in _WEIGHTS:
        return _WEIGHTS[key]
    npts = 2 * ((m + 1) // 2) - 1 + accuracy
    r = npts // 2
    offsets = list(range(-r, r + 1))
    rows = [[Fraction(j) ** i for j in offsets] for i in range(npts)]
    rhs = [Fraction(math.factorial(m)) if i == m else Fraction(0) for i in range(npts)]
    # Gaussian elimination with exact pivots; the Vandermonde matrix on
    # distinct offsets is nonsingular, so a nonzero pivot always exists.
    for col in range(npts):
        pivot = next(k for k in range(col, npts) if rows[k][col] != 0)
        rows[col], rows[pivot] = rows[pivot], rows[col]
        rhs[col], rhs[pivot] = rhs[pivot], rhs[col]
        inv = 1 / rows[col][col]
        rows[col] = [x * inv for x in rows[col]]
        rhs[col] *= inv
        for k in range(npts):
            if k != col and rows[k][col] != 0:
                factor = rows[k][col]
                rows[k] = [x - factor * y for x, y in zip(rows[k], rows[col])]
                rhs[k] -= factor * rhs[col]
    _WEIGHTS[key] = (offsets, rhs)
    return _WEIGHTS[key]


def spatial_derivative(values: np.ndarray, m: int, dx: float, accuracy: int = 4) -> np.ndarray:
    """m-th periodic derivative of a sampled profile."""
    if m == 0:
        return values.copy()
    offsets, weights = fd_weights(m, accuracy)
    if len(offsets) > len(values):
        raise ValueError("stencil wider than the grid")
    out = np.zeros_like(values)
    for j, w in zip(offsets, weights):
        if w:
            out += float(w) * np.roll(values, -j)
    return out / dx**m


# -- compiling flows to grid functions --------------------------------------

class _CompiledPoly:
    def __init__(self, poly: DiffPoly, bindings: dict, variables: Sequence[str]):
        index = {name: i for i, name in enumerate(variables)}
        self.terms = []
        for gens, coeff in poly.terms():
            value = float(coeff.rational)
            for name, exp in coeff.powers:
                if name not in bindings:
                    raise UnboundParameter(name)
                value *= bindings[name] ** exp
            if coeff.eps1:
                value *= bindings["eps1"]
            if coeff.eps2:
                value *= bindings["eps2"]
            factors = tuple(
                (index[var], order, exp) for (var, order), exp in gens
            )
            self.terms.append((value, factors))

    def __call__(self, derivs: list) -> np.ndarray:
        n = len(derivs[0][0])
        total = np.zeros(n)
        for value, factors in self.terms:
            term = np.full(n, value)
            for vi, order, exp in factors:
                term *= derivs[vi][order] ** exp
            total += term
        return total


def compile_flow(flow: FlowPair, params: dict, config: SimConfig) -> Callable:
    """Bind parameters and return rhs(k1, k2) -> (dk1/dt, dk2/dt).

    a, eps1, eps2 come from the config; params supplies the rest and may
    not rebind those three to different values.
    """
    bindings = config.bindings()
    for name, value in params.items():
        if name in bindings and float(value) != bindings[name]:
            raise ValueError("%s is fixed by the config" % (name,))
        bindings[name] = float(value)
    p1 = _CompiledPoly(flow.p1, bindings, flow.variables)
    p2 = _CompiledPoly(flow.p2, bindings, flow.variables)
    orders = [
        sorted(
            {o for c in (p1, p2) for t in c.terms for vi, o, _ in t[1] if vi == i and o}
        )
        for i in range(2)
    ]
    dx = config.dx
    acc = config.accuracy

    def rhs(k1: np.ndarray, k2: np.ndarray):
        derivs = [{0: k1}, {0: k2}]
        for vi, base in ((0, k1), (1, k2)):
            for m in orders[vi]:
                derivs[vi][m] = spatial_derivative(base, m, dx, acc)
        return p1(derivs), p2(derivs)

    return rhs


# -- time stepping -----------------------------------------------------------

def evolve(
    grid0: CurvatureGrid,
    rhs: Callable,
    config: SimConfig,
    blowup_threshold: float = 1e8,
) -> list[CurvatureGrid]:
    """March to t_end with fixed-step RK4; returns the saved trajectory.

    The actual step divides t_end exactly and is as close to config.dt
    as that allows (dt = 0 requests the stability bound).  States are
    saved every output_stride steps; initial and final are always kept.
    """
    if config.t_end <= 0:
        raise ValueError("config.t_end must be positive to evolve")
    dt = config.dt if config.dt > 0 else config.stability_bound()
    steps = max(1, math.ceil(config.t_end / dt - 1e-12))
    dt = config.t_end / steps
    stride = config.output_stride if config.output_stride > 0 else steps

    k1, k2 = grid0.k1.copy(), grid0.k2.copy()
    time = grid0.time
    history = [CurvatureGrid(grid0.sigma, k1.copy(), k2.copy(), time)]
    for step in range(1, steps + 1):
        a1, b1 = rhs(k1, k2)
        a2, b2 = rhs(k1 + 0.5 * dt * a1, k2 + 0.5 * dt * b1)
        a3, b3 = rhs(k1 + 0.5 * dt * a2, k2 + 0.5 * dt * b2)
        a4, b4 = rhs(k1 + dt * a3, k2 + dt * b3)
        new_k1 = k1 + (dt / 6.0) * (a1 + 2.0 * a2 + 2.0 * a3 + a4)
        new_k2 = k2 + (dt / 6.0) * (b1 + 2.0 * b2 + 2.0 * b3 + b4)
        new_time = grid0.time + step * dt
        finite = np.isfinite(new_k1).all() and np.isfinite(new_k2).all()
        if not finite or max(np.abs(new_k1).max(), np.abs(new_k2).max()) > blowup_threshold:
            raise BlowUp(new_time, step, CurvatureGrid(grid0.sigma, k1, k2, time))
        k1, k2, time = new_k1, new_k2, new_time
        if step % stride == 0 or step == steps:
            history.append(CurvatureGrid(grid0.sigma, k1.copy(), k2.copy(), time))
    return history


# -- frames and reconstruction ----------------------------------------------

def standard_initial_frame(eps1: int, eps2: int):
    """A null frame at the origin adapted to the signature.

    Returns (gamma0, T0, W10, N0, W20, eta) with eta the diagonal ambient
    metric: (-,+,+,+) for eps1 = eps2 = 1 and (-,-,+,+) for the mixed
    cases; (-1,-1) is rejected.
    """
    s = 1.0 / math.sqrt(2.0)
    if (eps1, eps2) == (1, 1):
        eta = np.diag([-1.0, 1.0, 1.0, 1.0])
        tangent = np.array([s, s, 0.0, 0.0])
        normal = np.array([s, -s, 0.0, 0.0])
        w1 = np.array([0.0, 0.0, 1.0, 0.0])
        w2 = np.array([0.0, 0.0, 0.0, 1.0])
    elif (eps1, eps2) in ((1, -1), (-1, 1)):
        eta = np.diag([-1.0, -1.0, 1.0, 1.0])
        tangent = np.array([s, 0.0, s, 0.0])
        normal = np.array([s, 0.0, -s, 0.0])
        plus = np.array([0.0, 0.0, 0.0, 1.0])
        minus = np.array([0.0, 1.0, 0.0, 0.0])
        w1, w2 = (plus, minus) if eps1 == 1 else (minus, plus)
    else:
        raise ValueError("signature (-1, -1) admits no null frame here")
    return np.zeros(4), tangent, w1, normal, w2, eta


@dataclass(frozen=True, eq=False)
class FramePath:
    """Frames and curve points sampled along sigma (endpoint included)."""

    sigma: np.ndarray
    gamma: np.ndarray
    tangent: np.ndarray
    w1: np.ndarray
    normal: np.ndarray
    w2: np.ndarray
    eta: np.ndarray
    a: float
    eps1: int
    eps2: int

    def inner(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        return np.einsum("...i,ij,...j->...", x, self.eta, y)

    def gram_drift_series(self) -> np.ndarray:
        """Per-node worst deviation of any frame pairing from its value."""
        frames = (self.tangent, self.w1, self.normal, self.w2)
        expected = np.array(
            [
                [0.0, 0.0, -1.0, 0.0],
                [0.0, float(self.eps1), 0.0, 0.0],
                [-1.0, 0.0, 0.0, 0.0],
                [0.0, 0.0, 0.0, float(self.eps2)],
            ]
        )
        worst = np.zeros(len(self.sigma))
        for i in range(4):
            for j in range(i, 4):
                drift = np.abs(self.inner(frames[i], frames[j]) - expected[i, j])
                worst = np.maximum(worst, drift)
        return worst

    def null_series(self) -> np.ndarray:
        """Per-node |<gamma', gamma'>| = |<T, T>|."""
        return np.abs(self.inner(self.tangent, self.tangent))

    def accel_series(self) -> np.ndarray:
        """Per-node |<gamma'', gamma''> - eps1 a^2| (gamma'' = a W1)."""
        target = self.eps1 * self.a**2
        return np.abs(self.a**2 * self.inner(self.w1, self.w1) - target)

    def gram_drift(self) -> float:
        return float(self.gram_drift_series().max())

    def null_drift(self) -> float:
        return float(self.null_series().max())


def _periodic_sampler(values: np.ndarray):
    """6-point Lagrange interpolation in grid units (s = sigma / dx)."""
    n = len(values)
    nodes = list(range(-2, 4))

    def at(s: float) -> float:
        j0 = math.floor(s)
        u = s - j0
        total = 0.0
        for i in nodes:
            w = 1.0
            for m in nodes:
                if m != i:
                    w *= (u - m) / (i - m)
            total += w * values[(j0 + i) % n]
        return total

    return at


def reconstruct_curve(
    grid: CurvatureGrid,
    config: SimConfig,
    initial_frame=None,
    substeps: int = 4,
) -> FramePath:
    """Integrate the frame equations across one period of the grid.

    initial_frame is a (gamma0, T0, W10, N0, W20, eta) tuple satisfying
    the pairing table exactly, or None for the standard frame of the
    configured signature.
    """
    if substeps < 1:
        raise ValueError("substeps must be >= 1")
    if initial_frame is None:
        initial_frame = standard_initial_frame(config.eps1, config.eps2)
    gamma0, t0, w10, n0, w20, eta = initial_frame
    a = float(config.a)
    e1, e2 = float(config.eps1), float(config.eps2)
    k1_at = _periodic_sampler(grid.k1)
    k2_at = _periodic_sampler(grid.k2)
    dx = grid.dx
    n = len(grid.sigma)

    def rate(s: float, y: np.ndarray) -> np.ndarray:
        k1v, k2v = k1_at(s), k2_at(s)
        gamma, tangent, w1, normal, w2 = y.reshape(5, 4)
        return np.concatenate(
            [
                tangent,
                a * w1,
                -k1v * tangent + a * e1 * normal,
                -e1 * k1v * w1 + e2 * k2v * w2,
                k2v * tangent,
            ]
        )

    y = np.concatenate([gamma0, t0, w10, n0, w20]).astype(float)
    h = 1.0 / substeps  # in grid units; the physical step is h * dx
    out = np.empty((n + 1, 5, 4))
    out[0] = y.reshape(5, 4)
    s = 0.0
    for node in range(1, n + 1):
        for _ in range(substeps):
            f1 = rate(s, y)
            f2 = rate(s + 0.5 * h, y + 0.5 * h * dx * f1)
            f3 = rate(s + 0.5 * h, y + 0.5 * h * dx * f2)
            f4 = rate(s + h, y + h * dx * f3)
            y = y + (h * dx / 6.0) * (f1 + 2.0 * f2 + 2.0 * f3 + f4)
            s += h
        s = float(node)  # fight accumulation of representation error
        out[node] = y.reshape(5, 4)
    sigma = np.arange(n + 1) * dx
    return FramePath(
        sigma,
        out[:, 0],
        out[:, 1],
        out[:, 2],
        out[:, 3],
        out[:, 4],
        eta,
        a,
        config.eps1,
        config.eps2,
    )


def nlie_run(
    config: SimConfig,
    k1,
    k2=None,
    c: float = 1.0,
    substeps: int = 4,
) -> tuple[list[CurvatureGrid], list[FramePath]]:
    """Evolve under the third-order flow and reconstruct each saved state.

    All snapshots share the standard initial frame, so successive curves
    are comparable up to the rigid motion that frame fixes.
    """
    from .hierarchy import seed

    grid0 = uniform_grid(config, k1, k2)
    rhs = compile_flow(seed(1).flow, {"c": c}, config)
    history = evolve(grid0, rhs, config)
    paths = [reconstruct_curve(g, config, substeps=substeps) for g in history]
    return history, paths


# -- run reports and output ---------------------------------------------------

def run_report(
    config: SimConfig,
    history: Sequence[CurvatureGrid],
    paths: Sequence[FramePath] = (),
    error_norms: dict | None = None,
) -> dict:
    """Config echo, mass and drift series, stability bound, error norms."""
    report = {
        "config": asdict(config),
        "stability_bound": config.stability_bound(),
        "times": [g.time for g in history],
        "mass_k1": [g.mass("k1") for g in history],
        "mass_k2": [g.mass("k2") for g in history],
    }
    if paths:
        report["gram_drift"] = [p.gram_drift() for p in paths]
        report["null_drift"] = [p.null_drift() for p in paths]
        report["accel_drift"] = [float(p.accel_series().max()) for p in paths]
    if error_norms:
        report["error_norms"] = dict(error_norms)
    return report


def write_curvature_csv(path: str, history: Sequence[CurvatureGrid], variable: str) -> None:
    """One quantity per file: column sigma, then one column per saved t."""
    if variable not in ("k1", "k2"):
        raise ValueError("variable must be k1 or k2")
    header = ["sigma"] + ["t=%.9g" % g.time for g in history]
    sigma = history[0].sigma
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for i in range(len(sigma)):
            row = ["%.12g" % sigma[i]]
            row.extend("%.16g" % getattr(g, variable)[i] for g in history)
            writer.writerow(row)


def write_path_csv(path: str, frame_path: FramePath) -> None:
    """One row per sampled sigma with all frame components."""
    header = ["sigma"]
    blocks = [
        ("gamma", frame_path.gamma),
        ("T", frame_path.tangent),
        ("W1", frame_path.w1),
        ("N", frame_path.normal),
        ("W2", frame_path.w2),
    ]
    for name, _ in blocks:
        header.extend("%s_%d" % (name, i) for i in range(4))
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for i in range(len(frame_path.sigma)):
            row = ["%.12g" % frame_path.sigma[i]]
            for _, block in blocks:
                row.extend("%.16g" % v for v in block[i])
            writer.writerow(row)


def write_report_json(path: str, data: dict) -> None:
    with open(path, "w") as fh:
        json.dump(data, fh, indent=2, sort_keys=True)
        fh.write("\n")
