"""Best-fit tropical polytopes for samples of ultrametric vectors.

The objective is the sum of tropical distances between the observations and
their projections onto the polytope spanned by s vertices.  Vertices are
fitted by projected subgradient descent: each step moves a vertex along the
negative subgradient of the objective and projects it back onto tree space,
keeping every iterate a valid ultrametric.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .treespace import (
    default_tolerance,
    is_ultrametric,
    leaf_count_from_dim,
    project_to_treespace,
)

__all__ = [
    "TropicalPolytope",
    "FitConfig",
    "FitTrace",
    "project_to_polytope",
    "objective",
    "grad_dist",
    "jacobian_w",
    "subgradient",
    "fit",
    "baseline_random_search",
]


class TropicalPolytope:
    """Tropical convex hull of an ordered list of vertices (one per row)."""

    __slots__ = ("vertices",)

    def __init__(self, vertices):
        v = np.array(vertices, dtype=float)
        if v.ndim != 2:
            raise ValueError("vertices must form a 2-D array (one vertex per row)")
        s, e = v.shape
        if s < 1 or e < 2:
            raise ValueError(f"invalid vertex array of shape {v.shape}")
        if s > e:
            raise ValueError(f"more vertices than coordinates: s={s} > e={e}")
        v.setflags(write=False)
        self.vertices = v

    @property
    def s(self) -> int:
        return self.vertices.shape[0]

    @property
    def e(self) -> int:
        return self.vertices.shape[1]

    @property
    def m(self) -> int:
        return leaf_count_from_dim(self.e)

    def __eq__(self, other) -> bool:
        return isinstance(other, TropicalPolytope) and np.array_equal(self.vertices, other.vertices)

    def __repr__(self) -> str:
        return f"TropicalPolytope(s={self.s}, e={self.e})"


def _sample_matrix(sample, e: int | None = None) -> np.ndarray:
    u = np.asarray(sample, dtype=float)
    if u.ndim == 1:
        u = u[None, :]
    if u.ndim != 2 or u.shape[0] < 1:
        raise ValueError("sample must be a nonempty list of vectors")
    if e is not None and u.shape[1] != e:
        raise ValueError(f"dimension mismatch: sample has {u.shape[1]} coordinates, expected {e}")
    return u


def project_to_polytope(u, polytope: TropicalPolytope) -> tuple[np.ndarray, np.ndarray]:
    """Projection of u onto the polytope and its coordinates over the vertices.

    Returns (w, lam) with lam[k] = min(u - D_k) and w = max_k(lam[k] + D_k).
    w lies in the polytope, satisfies w <= u coordinatewise with equality at
    each vertex's minimizing coordinate, and is a closest polytope point to
    u in the tropical metric.
    """
    v = polytope.vertices
    u = np.asarray(u, dtype=float)
    if u.shape != (polytope.e,):
        raise ValueError(f"dimension mismatch: point has shape {u.shape}, expected ({polytope.e},)")
    lam = (u[None, :] - v).min(axis=1)
    w = (lam[:, None] + v).max(axis=0)
    return w, lam


def objective(sample, polytope: TropicalPolytope) -> float:
    """Sum of tropical distances from each observation to its projection."""
    u = _sample_matrix(sample, polytope.e)
    v = polytope.vertices
    lam = (u[:, None, :] - v[None, :, :]).min(axis=2)
    w = (lam[:, :, None] + v[None, :, :]).max(axis=1)
    d = u - w
    return float(np.sum(d.max(axis=1) - d.min(axis=1)))


def grad_dist(p, x) -> np.ndarray:
    """Gradient at x of the tropical distance to p.

    Equals e_t - e_t' with t the first argmax and t' the first argmin of
    x - p; at a tie-free x this is the exact gradient, at ties it is one
    valid subgradient, and for x = p (up to a constant) it is zero.
    """
    p = np.asarray(p, dtype=float)
    x = np.asarray(x, dtype=float)
    if p.shape != x.shape or p.ndim != 1:
        raise ValueError(f"dimension mismatch: {p.shape} vs {x.shape}")
    d = x - p
    t = int(np.argmax(d))
    t_min = int(np.argmin(d))
    g = np.zeros_like(d)
    if t != t_min:
        g[t] = 1.0
        g[t_min] = -1.0
    return g


def _attribution(u: np.ndarray, v: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-vertex lambda, per-vertex first argmin of u - D_k, per-coordinate winning vertex."""
    diff = u[None, :] - v
    lam = diff.min(axis=1)
    jstar = diff.argmin(axis=1)
    kstar = (lam[:, None] + v).argmax(axis=0)
    return lam, jstar, kstar


def jacobian_w(u, polytope: TropicalPolytope) -> dict[tuple[int, int, int], float]:
    """Nonzero partial derivatives of the projection w with respect to the vertices.

    Key (k, l, l2) holds d w[l2] / d D_k[l].  Vertex k contributes to output
    coordinate l2 only when it wins the max there; within a winning row the
    entry is +1 on the diagonal l == l2 and -1 in the column of vertex k's
    minimizing coordinate, and the (l == l2 == argmin) cell stays 0.
    All argmax/argmin ties break to the lowest index.
    """
    v = polytope.vertices
    u = np.asarray(u, dtype=float)
    if u.shape != (polytope.e,):
        raise ValueError(f"dimension mismatch: point has shape {u.shape}, expected ({polytope.e},)")
    _, jstar, kstar = _attribution(u, v)
    entries: dict[tuple[int, int, int], float] = {}
    for l2 in range(polytope.e):
        k = int(kstar[l2])
        j = int(jstar[k])
        if l2 == j:
            continue
        entries[(k, j, l2)] = -1.0
        entries[(k, l2, l2)] = 1.0
    return entries


def subgradient(sample, polytope: TropicalPolytope) -> np.ndarray:
    """Subgradient of the objective with respect to every vertex, one row per vertex.

    Chains the distance gradient through the projection map by direct
    accumulation (the sparse Jacobian is never materialized).  Observations
    are accumulated in ascending index order, so the result is deterministic.
    """
    u = _sample_matrix(sample, polytope.e)
    v = polytope.vertices
    n = u.shape[0]
    diff = u[:, None, :] - v[None, :, :]
    lam = diff.min(axis=2)
    jstar = diff.argmin(axis=2)
    contrib = lam[:, :, None] + v[None, :, :]
    kstar = contrib.argmax(axis=1)
    d = contrib.max(axis=1) - u  # w_i - u_i
    t_max = d.argmax(axis=1)
    t_min = d.argmin(axis=1)
    g = np.zeros_like(v)
    for i in range(n):
        if t_max[i] == t_min[i]:
            continue  # observation sits on the polytope
        for l2, coeff in ((int(t_max[i]), 1.0), (int(t_min[i]), -1.0)):
            k = int(kstar[i, l2])
            j = int(jstar[i, k])
            if l2 != j:
                g[k, l2] += coeff
                g[k, j] -= coeff
    return g


@dataclass(frozen=True)
class FitConfig:
    """Settings for the projected subgradient fit."""

    s: int
    max_iters: int = 100
    lr0: float = 0.01
    decay: float = 0.999
    seed: int = 42
    init: str = "sample-points"  # or "user-supplied"
    init_vertices: object = None
    update_mode: str = "simultaneous"  # or "cyclic"

    def __post_init__(self):
        if self.s < 2:
            raise ValueError(f"s must be at least 2, got {self.s}")
        if self.max_iters < 1:
            raise ValueError("max_iters must be positive")
        if self.lr0 <= 0:
            raise ValueError("lr0 must be positive")
        if not 0 < self.decay <= 1:
            raise ValueError("decay must lie in (0, 1]")
        if self.init not in ("sample-points", "user-supplied"):
            raise ValueError(f"unknown init mode {self.init!r}")
        if self.update_mode not in ("simultaneous", "cyclic"):
            raise ValueError(f"unknown update mode {self.update_mode!r}")
        if (self.init == "user-supplied") != (self.init_vertices is not None):
            raise ValueError("init_vertices must be given exactly when init='user-supplied'")


@dataclass
class FitTrace:
    """Per-iteration record of a fit, plus the best-so-far summary."""

    initial_se: float
    se: list[float] = field(default_factory=list)
    alpha: list[float] = field(default_factory=list)
    improved: list[bool] = field(default_factory=list)
    best_se: float = float("inf")
    best_iteration: int = -1  # -1 refers to the initial vertex set
    wall_time_s: float = 0.0

    @property
    def final_se(self) -> float:
        return self.se[-1] if self.se else self.initial_se

    def __len__(self) -> int:
        return len(self.se)


def _validate_ultrametric_rows(u: np.ndarray, what: str) -> None:
    bad = [i for i in range(u.shape[0]) if not is_ultrametric(u[i])]
    if bad:
        shown = ", ".join(map(str, bad[:10]))
        more = "" if len(bad) <= 10 else f" (+{len(bad) - 10} more)"
        raise ValueError(f"{what} at indices {shown}{more} fail the three-point condition")


def fit(sample, cfg: FitConfig) -> tuple[TropicalPolytope, FitTrace]:
    """Fit the best-fit tropical polytope with cfg.s vertices to the sample.

    Starts from cfg.s distinct sample points drawn by cfg.seed (or the
    user-supplied vertices), then iterates t = 0..max_iters-1 with step
    alpha_t = lr0 * decay**t: every vertex (simultaneous mode) or one
    round-robin vertex (cyclic mode) moves to
    project_to_treespace(D_k - alpha_t * g_k).  The returned polytope is the
    best iterate by objective value, which for a subgradient method is not
    necessarily the last.  Runs are deterministic given (sample, cfg).
    """
    u = _sample_matrix(sample)
    n, e = u.shape
    leaf_count_from_dim(e)
    if cfg.s > n:
        raise ValueError(f"need at least s observations (s={cfg.s}, n={n})")
    _validate_ultrametric_rows(u, "sample vectors")

    start = time.perf_counter()
    if cfg.init == "sample-points":
        rng = np.random.default_rng(cfg.seed)
        chosen = rng.choice(n, size=cfg.s, replace=False)
        vertices = u[chosen].copy()
    else:
        vertices = np.array(cfg.init_vertices, dtype=float)
        if vertices.shape != (cfg.s, e):
            raise ValueError(f"init_vertices must have shape ({cfg.s}, {e})")
        _validate_ultrametric_rows(vertices, "initial vertices")

    polytope = TropicalPolytope(vertices)
    best_se = objective(u, polytope)
    best_vertices = polytope.vertices.copy()
    trace = FitTrace(initial_se=best_se, best_se=best_se, best_iteration=-1)

    alpha = cfg.lr0
    for t in range(cfg.max_iters):
        g = subgradient(u, polytope)
        updated = polytope.vertices.copy()
        if cfg.update_mode == "simultaneous":
            for k in range(cfg.s):
                updated[k] = project_to_treespace(updated[k] - alpha * g[k])
        else:
            k = t % cfg.s
            updated[k] = project_to_treespace(updated[k] - alpha * g[k])
        polytope = TropicalPolytope(updated)
        se = objective(u, polytope)
        improved = se < best_se
        if improved:
            best_se = se
            best_vertices = polytope.vertices.copy()
            trace.best_iteration = t
        trace.se.append(se)
        trace.alpha.append(alpha)
        trace.improved.append(improved)
        alpha *= cfg.decay  # iterative product keeps consecutive step ratios exact

    trace.best_se = best_se
    trace.wall_time_s = time.perf_counter() - start
    return TropicalPolytope(best_vertices), trace


def baseline_random_search(sample, s: int, budget_evals: int, seed: int) -> tuple[TropicalPolytope, float]:
    """Best polytope among budget_evals random s-subsets of the sample.

    Candidates are drawn from one seeded stream, so the result for a larger
    budget with the same seed is never worse.
    """
    u = _sample_matrix(sample)
    n = u.shape[0]
    if budget_evals < 1:
        raise ValueError("budget_evals must be positive")
    if s < 1 or s > n:
        raise ValueError(f"need at least s observations (s={s}, n={n})")
    rng = np.random.default_rng(seed)
    best_se = np.inf
    best_vertices = None
    for _ in range(budget_evals):
        chosen = rng.choice(n, size=s, replace=False)
        candidate = TropicalPolytope(u[chosen])
        se = objective(u, candidate)
        if se < best_se:
            best_se = se
            best_vertices = candidate.vertices
    return TropicalPolytope(best_vertices), float(best_se)
