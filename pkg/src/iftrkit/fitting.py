"""Multi-objective fitting of model densities to empirical ones.

A fit scores a candidate density against the empirical one with four
pointwise metrics (MSE, RMSE, MAE and the maximum deviation ``KS``),
explores the parameter box with NSGA-II and picks one solution from the
final Pareto front by the equal-weight mean of front-normalized metrics.

The GTR-V fit runs in two steps: a von Mises law is fitted to the
phase-difference histogram, then NSGA-II searches ``(K, Delta)`` with the
phase law frozen.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
from scipy import optimize, special

from . import kernels
from .channel_lab import CircularDensity
from .fading import (
    AmplitudePdf,
    GtrvParams,
    IftrCfEvaluator,
    IftrParams,
    IftrQuadrature,
    gtrv_pdf,
    von_mises_pdf,
)

__all__ = [
    "ObjectiveVector",
    "SearchBounds",
    "GtrvBounds",
    "GaSettings",
    "ParetoFront",
    "FitResult",
    "VonMisesFit",
    "FitError",
    "objectives",
    "objective_matrix",
    "is_nondominated_set",
    "nsga2",
    "select_solution",
    "fit_iftr",
    "fit_von_mises",
    "fit_gtrv",
]

OBJECTIVE_NAMES = ("mse", "rmse", "mae", "ks")


class FitError(ValueError):
    """The empirical input cannot be fitted."""


# ---------------------------------------------------------------------------
# Objectives
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ObjectiveVector:
    """The four goodness-of-fit metrics of one candidate."""

    mse: float
    rmse: float
    mae: float
    ks: float

    def as_array(self) -> np.ndarray:
        return np.array([self.mse, self.rmse, self.mae, self.ks])

    @classmethod
    def from_array(cls, a) -> "ObjectiveVector":
        a = np.asarray(a, dtype=float)
        return cls(float(a[0]), float(a[1]), float(a[2]), float(a[3]))


def _metrics(diff: np.ndarray) -> np.ndarray:
    """Metrics of residual rows; ``diff`` has shape ``(..., n)``."""
    ad = np.abs(diff)
    mse = np.mean(ad * ad, axis=-1)
    return np.stack([mse, np.sqrt(mse), np.mean(ad, axis=-1), np.max(ad, axis=-1)], axis=-1)


def objectives(f_exp: AmplitudePdf, f_mod: AmplitudePdf) -> ObjectiveVector:
    """MSE, RMSE, MAE and KS between two densities on the same grid.

    ``KS`` here is the largest absolute pointwise density deviation.
    """
    if f_exp.grid.shape != f_mod.grid.shape or not np.array_equal(f_exp.grid, f_mod.grid):
        raise FitError("densities must share the same grid")
    return ObjectiveVector.from_array(_metrics(f_mod.density - f_exp.density))


def objective_matrix(target: np.ndarray, models: np.ndarray) -> np.ndarray:
    """Metrics of many model density rows against one target row."""
    return _metrics(np.asarray(models, dtype=float) - np.asarray(target, dtype=float)[None, :])


# ---------------------------------------------------------------------------
# Settings and results
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SearchBounds:
    """Box constraints of the IFTR search (linear K)."""

    k: tuple[float, float] = (0.0, 1000.0)
    delta: tuple[float, float] = (0.0, 1.0)
    m1: tuple[float, float] = (0.05, 50.0)
    m2: tuple[float, float] = (0.05, 50.0)

    def __post_init__(self):
        for name in ("k", "delta", "m1", "m2"):
            lo, hi = getattr(self, name)
            if not lo <= hi:
                raise ValueError(f"bound {name} has lo > hi")
        if self.k[0] < 0 or self.delta[0] < 0 or self.delta[1] > 1:
            raise ValueError("K must be >= 0 and Delta inside [0, 1]")
        if self.m1[0] <= 0 or self.m2[0] <= 0:
            raise ValueError("shape bounds must be positive")

    @property
    def lower(self) -> np.ndarray:
        return np.array([self.k[0], self.delta[0], self.m1[0], self.m2[0]])

    @property
    def upper(self) -> np.ndarray:
        return np.array([self.k[1], self.delta[1], self.m1[1], self.m2[1]])


@dataclass(frozen=True)
class GtrvBounds:
    """Box constraints of the GTR-V ``(K, Delta)`` search."""

    k: tuple[float, float] = (0.0, 1000.0)
    delta: tuple[float, float] = (0.0, 1.0)

    @property
    def lower(self) -> np.ndarray:
        return np.array([self.k[0], self.delta[0]])

    @property
    def upper(self) -> np.ndarray:
        return np.array([self.k[1], self.delta[1]])


@dataclass(frozen=True)
class GaSettings:
    """NSGA-II settings.

    Parameters
    ----------
    population, generations : int
    elite_fraction : float
        Share of the parent population copied unchanged into the offspring.
    stall_window : int
        Generations without significant change before stopping.
    stall_tol : float
        Relative change of the selected solution's metrics regarded as
        significant.
    crossover_prob, mutation_prob : float
        Per-pair SBX probability and per-gene mutation probability.
    eta_c, eta_m : float
        Distribution indices of SBX and polynomial mutation.
    quantum : float
        Resolution of the evaluation cache, relative to each bound width.
    jobs : int
        Worker threads for objective evaluation.
    polish : bool
        Refine the selected solution with a bounded Nelder-Mead search on
        the MSE and add it to the front.
    """

    population: int = 200
    generations: int = 400
    elite_fraction: float = 0.05
    stall_window: int = 100
    stall_tol: float = 1e-6
    crossover_prob: float = 0.9
    mutation_prob: float = 0.25
    eta_c: float = 20.0
    eta_m: float = 20.0
    quantum: float = 1e-6
    jobs: int = 1
    polish: bool = False

    def __post_init__(self):
        if self.population < 4 or self.population % 2:
            raise ValueError("population must be an even number >= 4")
        if self.generations < 1 or self.stall_window < 1:
            raise ValueError("generations and stall_window must be positive")
        if not 0 <= self.elite_fraction < 1:
            raise ValueError("elite_fraction must lie in [0, 1)")


@dataclass
class ParetoFront:
    """Mutually non-dominated solutions of a fit.

    ``genomes`` holds the parameter tuples (``(K, Delta, m1, m2)`` for
    IFTR, ``(K, Delta)`` for GTR-V), ``values`` the matching metrics.
    """

    genomes: np.ndarray
    values: np.ndarray
    names: tuple[str, ...]
    lower: np.ndarray
    upper: np.ndarray
    generations: int = 0
    stalled: bool = False
    make_params: Callable[[np.ndarray], object] | None = field(default=None, repr=False)

    def __post_init__(self):
        self.genomes = np.atleast_2d(np.asarray(self.genomes, dtype=float))
        self.values = np.atleast_2d(np.asarray(self.values, dtype=float))
        if self.genomes.shape[0] != self.values.shape[0]:
            raise ValueError("genomes and values must have the same number of rows")

    def __len__(self) -> int:
        return self.genomes.shape[0]

    @property
    def solutions(self) -> list[tuple[object, ObjectiveVector]]:
        make = self.make_params or (lambda g: tuple(float(v) for v in g))
        return [(make(g), ObjectiveVector.from_array(v)) for g, v in zip(self.genomes, self.values)]


@dataclass
class FitResult:
    """Selected solution of a fit and the front it came from."""

    selected: object
    selected_objectives: ObjectiveVector
    epsilon_n: float
    front: ParetoFront
    index: int
    omega: float = float("nan")
    evaluations: int = 0


# ---------------------------------------------------------------------------
# Pareto machinery
# ---------------------------------------------------------------------------

def is_nondominated_set(values: np.ndarray) -> bool:
    """Exhaustive pairwise check that no row dominates another."""
    v = np.asarray(values, dtype=float)
    for i in range(v.shape[0]):
        le = np.all(v[i] <= v, axis=1)
        lt = np.any(v[i] < v, axis=1)
        if np.any(le & lt):
            return False
    return True


def _crowding(values: np.ndarray) -> np.ndarray:
    n, d = values.shape
    dist = np.zeros(n)
    if n <= 2:
        dist[:] = np.inf
        return dist
    for j in range(d):
        order = np.argsort(values[:, j], kind="stable")
        col = values[order, j]
        span = col[-1] - col[0]
        dist[order[0]] = dist[order[-1]] = np.inf
        if span > 0:
            dist[order[1:-1]] += (col[2:] - col[:-2]) / span
    return dist


def _rank_and_crowd(values: np.ndarray):
    rank = np.asarray(kernels.nondominated_ranks(np.ascontiguousarray(values, dtype=float)))
    crowd = np.zeros(values.shape[0])
    for r in np.unique(rank):
        idx = np.flatnonzero(rank == r)
        crowd[idx] = _crowding(values[idx])
    return rank, crowd


def _epsilon(values: np.ndarray) -> np.ndarray:
    vmax = values.max(axis=0)
    safe = np.where(vmax > 0, vmax, 1.0)
    norm = np.where(vmax > 0, values / safe, 0.0)
    return norm.mean(axis=1)


def _select_index(genomes: np.ndarray, values: np.ndarray) -> tuple[int, float]:
    eps = _epsilon(values)
    # lexicographic order of the parameters decides ties
    order = np.lexsort(genomes.T[::-1])
    best = float(eps.min())
    tied = np.flatnonzero(np.isclose(eps, best, rtol=1e-12, atol=0.0))
    pos = np.empty_like(order)
    pos[order] = np.arange(order.size)
    idx = int(tied[np.argmin(pos[tied])])
    return idx, float(eps[idx])


def select_solution(front: ParetoFront) -> FitResult:
    """Pick the solution minimizing the normalized mean error ``eps_n``.

    Each metric is divided by its maximum over the front (metrics that are
    zero for every solution contribute zero) and ``eps_n`` is their mean.
    Ties within a relative ``1e-12`` go to the lexicographically smallest
    parameter tuple.
    """
    if len(front) == 0:
        raise FitError("cannot select from an empty front")
    idx, eps = _select_index(front.genomes, front.values)
    make = front.make_params or (lambda g: tuple(float(v) for v in g))
    return FitResult(make(front.genomes[idx]), ObjectiveVector.from_array(front.values[idx]), eps, front, idx)


def _sbx(p1, p2, lo, hi, eta, rng):
    """Simulated binary crossover with bounds, gene by gene."""
    c1, c2 = p1.copy(), p2.copy()
    for j in range(p1.size):
        if rng.random() > 0.5 or abs(p1[j] - p2[j]) < 1e-14 or hi[j] <= lo[j]:
            continue
        y1, y2 = min(p1[j], p2[j]), max(p1[j], p2[j])
        span = y2 - y1
        u = rng.random()
        beta = 1.0 + 2.0 * (y1 - lo[j]) / span
        alpha = 2.0 - beta ** -(eta + 1.0)
        bq = (u * alpha) ** (1.0 / (eta + 1.0)) if u <= 1.0 / alpha else (1.0 / (2.0 - u * alpha)) ** (1.0 / (eta + 1.0))
        a = 0.5 * ((y1 + y2) - bq * span)
        beta = 1.0 + 2.0 * (hi[j] - y2) / span
        alpha = 2.0 - beta ** -(eta + 1.0)
        bq = (u * alpha) ** (1.0 / (eta + 1.0)) if u <= 1.0 / alpha else (1.0 / (2.0 - u * alpha)) ** (1.0 / (eta + 1.0))
        b = 0.5 * ((y1 + y2) + bq * span)
        a, b = min(max(a, lo[j]), hi[j]), min(max(b, lo[j]), hi[j])
        if rng.random() < 0.5:
            a, b = b, a
        c1[j], c2[j] = a, b
    return c1, c2


def _mutate(x, lo, hi, prob, eta, rng):
    """Polynomial mutation with bounds."""
    y = x.copy()
    for j in range(x.size):
        if rng.random() >= prob or hi[j] <= lo[j]:
            continue
        span = hi[j] - lo[j]
        d1 = (y[j] - lo[j]) / span
        d2 = (hi[j] - y[j]) / span
        u = rng.random()
        power = 1.0 / (eta + 1.0)
        if u < 0.5:
            val = 2.0 * u + (1.0 - 2.0 * u) * (1.0 - d1) ** (eta + 1.0)
            dq = val ** power - 1.0
        else:
            val = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * (1.0 - d2) ** (eta + 1.0)
            dq = 1.0 - val ** power
        y[j] = min(max(y[j] + dq * span, lo[j]), hi[j])
    return y


class _CachedObjective:
    """Batch objective with a cache keyed by quantized genomes."""

    def __init__(self, func: Callable[[np.ndarray], np.ndarray], lower, upper, quantum, jobs):
        self.func = func
        self.lower = np.asarray(lower, dtype=float)
        self.width = np.where(np.asarray(upper) > self.lower, np.asarray(upper) - self.lower, 1.0)
        self.quantum = quantum
        self.jobs = max(1, int(jobs))
        self.cache: dict[tuple, np.ndarray] = {}
        self.calls = 0

    def key(self, x) -> tuple:
        return tuple(np.round((x - self.lower) / (self.width * self.quantum)).astype(np.int64).tolist())

    def __call__(self, pop: np.ndarray) -> np.ndarray:
        keys = [self.key(x) for x in pop]
        todo = {}
        for k, x in zip(keys, pop):
            if k not in self.cache and k not in todo:
                todo[k] = x
        items = list(todo.items())
        if self.jobs > 1 and len(items) > 1:
            with ThreadPoolExecutor(self.jobs) as ex:
                results = list(ex.map(lambda kv: self.func(kv[1]), items))
        else:
            results = [self.func(x) for _, x in items]
        for (k, _), v in zip(items, results):
            self.cache[k] = np.asarray(v, dtype=float)
        self.calls += len(items)
        return np.stack([self.cache[k] for k in keys])


@dataclass
class _GaState:
    genomes: np.ndarray
    values: np.ndarray
    generations: int
    stalled: bool
    best_history: np.ndarray
    evaluations: int = 0


def nsga2(objective: Callable[[np.ndarray], np.ndarray], lower, upper, settings: GaSettings,
          seed, initial: np.ndarray | None = None) -> _GaState:
    """Minimize a vector objective over a box with NSGA-II.

    Parameters
    ----------
    objective : callable
        Maps a genome (1-D array) to its objective vector.
    lower, upper : array_like
        Box constraints.
    settings : GaSettings
    seed : int
    initial : ndarray, optional
        Genomes placed at the start of the first population.

    Returns
    -------
    state
        Final population (``genomes``, ``values``), generations run, stall
        flag and the per-generation best value of every objective
        (``best_history``).
    """
    lo = np.asarray(lower, dtype=float)
    hi = np.asarray(upper, dtype=float)
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 2]))
    cached = _CachedObjective(objective, lo, hi, settings.quantum, settings.jobs)
    n = settings.population
    pop = lo + rng.random((n, lo.size)) * (hi - lo)
    if initial is not None:
        init = np.clip(np.atleast_2d(np.asarray(initial, dtype=float)), lo, hi)[:n]
        pop[: init.shape[0]] = init
    vals = cached(pop)
    rank, crowd = _rank_and_crowd(vals)
    n_elite = int(round(settings.elite_fraction * n))
    history = [vals.min(axis=0)]
    tracked = []
    stalled = False
    gen = 0
    for gen in range(1, settings.generations + 1):
        # binary tournaments on (rank, -crowding)
        a = rng.integers(0, n, n)
        b = rng.integers(0, n, n)
        better = (rank[a] < rank[b]) | ((rank[a] == rank[b]) & (crowd[a] > crowd[b]))
        parents = np.where(better, a, b)
        children = np.empty((n, lo.size))
        for i in range(0, n, 2):
            p1, p2 = pop[parents[i]], pop[parents[i + 1]]
            if rng.random() < settings.crossover_prob:
                c1, c2 = _sbx(p1, p2, lo, hi, settings.eta_c, rng)
            else:
                c1, c2 = p1.copy(), p2.copy()
            children[i] = _mutate(c1, lo, hi, settings.mutation_prob, settings.eta_m, rng)
            children[i + 1] = _mutate(c2, lo, hi, settings.mutation_prob, settings.eta_m, rng)
        if n_elite:
            elite = np.lexsort((-crowd, rank))[:n_elite]
            children[:n_elite] = pop[elite]
        child_vals = cached(children)
        all_pop = np.vstack([pop, children])
        all_vals = np.vstack([vals, child_vals])
        all_rank, all_crowd = _rank_and_crowd(all_vals)
        order = np.lexsort((-all_crowd, all_rank))
        # fill by fronts; the last front is cut by crowding distance
        keep = order[:n]
        pop, vals = all_pop[keep], all_vals[keep]
        rank, crowd = _rank_and_crowd(vals)
        history.append(vals.min(axis=0))
        front = rank == 0
        idx, _ = _select_index(pop[front], vals[front])
        tracked.append(vals[front][idx])
        if len(tracked) > settings.stall_window:
            old, new = tracked[-settings.stall_window - 1], tracked[-1]
            rel = np.max(np.abs(new - old) / np.maximum(np.abs(old), 1e-300))
            if rel < settings.stall_tol:
                stalled = True
                break
    return _GaState(pop, vals, gen, stalled, np.array(history), cached.calls)


def _front_of(state: _GaState, names, lower, upper, make) -> ParetoFront:
    rank = np.asarray(kernels.nondominated_ranks(np.ascontiguousarray(state.values)))
    idx = np.flatnonzero(rank == 0)
    genomes, values = state.genomes[idx], state.values[idx]
    _, uniq = np.unique(genomes, axis=0, return_index=True)
    uniq = np.sort(uniq)
    return ParetoFront(genomes[uniq], values[uniq], names, np.asarray(lower), np.asarray(upper),
                       state.generations, state.stalled, make)


def _polish(front: ParetoFront, objective, start: np.ndarray) -> ParetoFront:
    lo, hi = front.lower, front.upper
    width = np.where(hi > lo, hi - lo, 1.0)

    def mse(z):
        x = np.clip(lo + z * width, lo, hi)
        return float(objective(x)[0])

    z0 = (start - lo) / width
    res = optimize.minimize(mse, z0, method="Nelder-Mead", bounds=[(0.0, 1.0)] * lo.size,
                            options={"xatol": 1e-9, "fatol": 1e-16, "maxiter": 4000})
    x = np.clip(lo + res.x * width, lo, hi)
    genomes = np.vstack([front.genomes, x])
    values = np.vstack([front.values, objective(x)])
    rank = np.asarray(kernels.nondominated_ranks(np.ascontiguousarray(values)))
    keep = np.flatnonzero(rank == 0)
    return replace(front, genomes=genomes[keep], values=values[keep])


def _target_density(f_exp: AmplitudePdf) -> np.ndarray:
    if not np.any(f_exp.density > 0):
        raise FitError("empirical density is zero everywhere")
    return f_exp.density


# ---------------------------------------------------------------------------
# IFTR fit
# ---------------------------------------------------------------------------

def fit_iftr(f_exp: AmplitudePdf, ga: GaSettings = GaSettings(), seed: int = 0,
             bounds: SearchBounds = SearchBounds(), method: str = "cf") -> FitResult:
    """Fit ``(K, Delta, m1, m2)`` of the IFTR model to an empirical density.

    ``Omega`` is fixed to the empirical mean power (``f_exp.power``, or the
    second moment of the density when the power is unknown).  Model
    densities are evaluated on the empirical grid.

    Parameters
    ----------
    f_exp : AmplitudePdf
    ga : GaSettings
    seed : int
    bounds : SearchBounds
    method : {"cf", "quadrature"}
        Density evaluator used in the search: the characteristic-function
        inversion with a cached Bessel matrix (default) or the conditional
        quadrature.
    """
    target = _target_density(f_exp)
    omega = f_exp.second_moment()
    if not omega > 0:
        raise FitError("empirical mean power must be positive")
    grid = f_exp.grid
    if method == "cf":
        evaluator = IftrCfEvaluator(grid, omega, k_max=max(bounds.k[1], 1e-12))

        def density(x):
            return evaluator.pdf(x[0], x[1], x[2], x[3])
    elif method == "quadrature":
        def density(x):
            q = IftrQuadrature(IftrParams(x[0], x[1], x[2], x[3], omega), 1e-7)
            return q.evaluate(grid)[0]
    else:
        raise ValueError(f"unknown method {method!r}")

    def objective(x):
        return _metrics(density(x) - target)

    def make(g):
        return IftrParams(float(g[0]), float(g[1]), float(g[2]), float(g[3]), omega)

    state = nsga2(objective, bounds.lower, bounds.upper, ga, seed)
    front = _front_of(state, ("k_factor", "delta", "m1", "m2"), bounds.lower, bounds.upper, make)
    if ga.polish:
        first = select_solution(front)
        front = _polish(front, objective, front.genomes[first.index])
    result = select_solution(front)
    result.omega = omega
    result.evaluations = state.evaluations
    return result


# ---------------------------------------------------------------------------
# Von Mises and GTR-V fits
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class VonMisesFit:
    """Phase-difference fit: concentration, mean, residual MSE and a flag.

    ``multimodal`` is set when the resultant length is near zero while the
    histogram is clearly not flat, in which case ``kappa`` is 0.
    """

    kappa: float
    phi: float
    mse: float
    multimodal: bool = False

    def __iter__(self):
        return iter((self.kappa, self.phi, self.mse))


def _a1_inverse(r: float) -> float:
    """Approximate inverse of ``I1(k) / I0(k)`` (Best and Fisher)."""
    if r < 0.53:
        return 2 * r + r ** 3 + 5 * r ** 5 / 6
    if r < 0.85:
        return -0.4 + 1.39 * r + 0.43 / (1 - r)
    return 1.0 / (r ** 3 - 4 * r ** 2 + 3 * r)


def _binned_von_mises(kappa, phi, edges, n_sub=8):
    xg, wg = np.polynomial.legendre.leggauss(n_sub)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    pts = mid[:, None] + half[:, None] * xg[None, :]
    vals = von_mises_pdf(kappa, phi, np.angle(np.exp(1j * pts)))
    return (vals @ wg) * 0.5


def fit_von_mises(phase_pdf: CircularDensity) -> VonMisesFit:
    """Fit a von Mises law to a phase-difference histogram.

    The circular mean and the inverted mean resultant length give the
    starting point; a bounded least-squares fit of the bin-averaged von
    Mises density to the histogram refines it.
    """
    dens = np.asarray(phase_pdf.density, dtype=float)
    if not np.any(dens > 0):
        raise FitError("phase density is zero everywhere")
    w = dens * phase_pdf.widths
    w = w / w.sum()
    c = phase_pdf.centers
    cm, sm = float(np.sum(w * np.cos(c))), float(np.sum(w * np.sin(c)))
    r_len = math.hypot(cm, sm)
    flat = 1.0 / (2.0 * np.pi)
    if r_len < 0.05:
        multimodal = float(np.max(np.abs(dens - flat))) > 0.25 * flat
        if multimodal:
            warnings.warn("phase density has near-zero resultant length but is not flat", RuntimeWarning)
        mse = float(np.mean((dens - flat) ** 2))
        return VonMisesFit(0.0, 0.0, mse, multimodal)
    phi0 = math.atan2(sm, cm)
    # correct the resultant length for the binning of the angles
    width = float(np.mean(phase_pdf.widths))
    r_len = min(r_len / np.sinc(width / (2.0 * np.pi)), 0.999999)
    kappa0 = _a1_inverse(r_len)

    def resid(z):
        return _binned_von_mises(z[0], z[1], phase_pdf.edges) - dens

    res = optimize.least_squares(resid, [kappa0, phi0], bounds=([0.0, -2 * np.pi], [1e4, 2 * np.pi]),
                                 xtol=1e-12, ftol=1e-12)
    kappa, phi = float(res.x[0]), float(np.angle(np.exp(1j * res.x[1])))
    mse = float(np.mean(resid([kappa, phi]) ** 2))
    return VonMisesFit(kappa, phi, mse, False)


def gtrv_omega(power: float, k_factor: float, delta: float, kappa: float, phi: float) -> float:
    """``Omega`` parameter of GTR-V that reproduces a given mean power.

    GTR-V derives ``sigma^2 = Omega / (2 (1 + K))``; with a non-uniform phase
    the mean power is ``2 sigma^2 (1 + K + K Delta A(kappa) cos(phi))``.
    """
    a = special.i1e(kappa) / special.i0e(kappa)
    return power * (1.0 + k_factor) / (1.0 + k_factor + k_factor * delta * a * math.cos(phi))


def fit_gtrv(f_exp: AmplitudePdf, vm, ga: GaSettings = GaSettings(), seed: int = 0,
             bounds: GtrvBounds = GtrvBounds(), tol: float = 1e-7) -> FitResult:
    """Fit ``(K, Delta)`` of GTR-V with the phase law fixed by ``vm``.

    Parameters
    ----------
    f_exp : AmplitudePdf
    vm : VonMisesFit or (kappa, phi[, mse])
    ga : GaSettings
    seed : int
    bounds : GtrvBounds
    tol : float
        Accuracy of the phase quadrature inside the search.
    """
    target = _target_density(f_exp)
    kappa, phi = float(tuple(vm)[0]), float(tuple(vm)[1])
    power = f_exp.second_moment()
    if not power > 0:
        raise FitError("empirical mean power must be positive")
    grid = f_exp.grid

    def make(g):
        k, d = float(g[0]), float(g[1])
        return GtrvParams(k, d, kappa, phi, gtrv_omega(power, k, d, kappa, phi))

    def objective(x):
        return _metrics(gtrv_pdf(make(x), grid, tol) - target)

    state = nsga2(objective, bounds.lower, bounds.upper, ga, seed)
    front = _front_of(state, ("k_factor", "delta"), bounds.lower, bounds.upper, make)
    if ga.polish:
        first = select_solution(front)
        front = _polish(front, objective, front.genomes[first.index])
    result = select_solution(front)
    result.omega = power
    result.evaluations = state.evaluations
    return result
