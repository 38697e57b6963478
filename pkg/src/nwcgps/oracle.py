"""Brute-force ground truth: truncated CTMC stationary solve and discrete-event simulation."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numba
import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy import stats

from .errors import NonConvergence, WindowUnreliable
from .model import ModelParams, TransitionRates, transition_rates

RESIDUAL_TARGET = 1e-12


def _rates(model):
    """(lambda1, lambda2, interior/boundary departure rates) from params or TransitionRates."""
    tr = model if isinstance(model, TransitionRates) else transition_rates(model)
    return (tr.origin.get((1, 0), 0.0), tr.origin.get((0, 1), 0.0),
            tr.interior[(-1, 0)], tr.h_boundary[(-1, 0)],
            tr.interior[(0, -1)], tr.v_boundary[(0, -1)])


@dataclass
class StationaryGrid:
    N: int
    p: np.ndarray
    boundary_mass: float
    balance_residual: float

    def to_csv(self, path) -> None:
        n1, n2 = np.meshgrid(np.arange(self.N), np.arange(self.N), indexing="ij")
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["n1", "n2", "probability"])
            for a, b, v in zip(n1.ravel(), n2.ravel(), self.p.ravel()):
                w.writerow([int(a), int(b), repr(float(v))])


def generator(model, N: int) -> sp.csr_matrix:
    """Generator of the chain on {0..N-1}^2 with outward transitions removed."""
    l1, l2, d1_in, d1_b, d2_in, d2_b = _rates(model)
    i, j = np.meshgrid(np.arange(N), np.arange(N), indexing="ij")
    i, j = i.ravel(), j.ravel()
    rows, cols, vals = [], [], []

    def add(mask, di, dj, rate):
        s = np.flatnonzero(mask)
        rows.append(s)
        cols.append((i[s] + di) * N + j[s] + dj)
        vals.append(np.broadcast_to(np.asarray(rate, float), mask.shape)[s])

    add(i < N - 1, 1, 0, l1)
    add(j < N - 1, 0, 1, l2)
    add(i > 0, -1, 0, np.where(j > 0, d1_in, d1_b))
    add(j > 0, 0, -1, np.where(i > 0, d2_in, d2_b))
    Q = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                      shape=(N * N, N * N))
    return (Q - sp.diags(np.asarray(Q.sum(axis=1)).ravel())).tocsr()


def solve_stationary(model, N: int) -> StationaryGrid:
    """Stationary vector of the truncated chain by a direct sparse LU solve.

    The balance equation of the origin is replaced by p(0,0) = 1 and the result is
    normalized afterwards. Two steps of iterative refinement follow the solve.
    """
    if N < 2:
        raise ValueError("N must be at least 2")
    Q = generator(model, N)
    QT = Q.T.tocsr()
    A = QT.tolil()
    A[0, :] = 0
    A[0, 0] = 1.0
    lu = spla.splu(A.tocsc(), permc_spec="MMD_AT_PLUS_A")
    b = np.zeros(N * N)
    b[0] = 1.0
    x = lu.solve(b)
    for _ in range(2):
        r = b - A @ x
        x = x + lu.solve(r)
    x = np.maximum(x, 0.0)
    p = x / x.sum()
    flow = QT @ p
    scale = np.abs(Q.diagonal()).max()
    residual = float(np.abs(flow).max())
    if residual > RESIDUAL_TARGET * scale:
        raise NonConvergence(f"balance residual {residual:.3e} above target")
    grid = p.reshape(N, N)
    bmass = float(grid[N - 1, :].sum() + grid[:, N - 1].sum() - grid[N - 1, N - 1])
    return StationaryGrid(N, grid, bmass, residual)


def marginal_pmf(grid: StationaryGrid, axis: int) -> np.ndarray:
    """pmf of N1 (axis=1) or N2 (axis=2)."""
    if axis == 1:
        return grid.p.sum(axis=1)
    if axis == 2:
        return grid.p.sum(axis=0)
    raise ValueError("axis must be 1 or 2")


def marginal_gf(grid: StationaryGrid, axis: int, z):
    pmf = marginal_pmf(grid, axis)
    return np.polynomial.polynomial.polyval(z, pmf)


def tail_slope(grid: StationaryGrid, axis: int, window=(20, 60), power: float = 0.0,
               max_boundary_mass: float = 1e-12) -> float:
    """Least-squares slope of log p(n) - power*log(n) over the window."""
    a, b = window
    if a < 1 or b <= a:
        raise ValueError("window must satisfy 1 <= a < b")
    if b >= grid.N - 1:
        raise WindowUnreliable(f"window end {b} reaches the truncation boundary N={grid.N}")
    if grid.boundary_mass > max_boundary_mass:
        raise WindowUnreliable(f"boundary mass {grid.boundary_mass:.3e} pollutes the tail")
    n = np.arange(a, b + 1)
    pmf = marginal_pmf(grid, axis)[n]
    if np.any(pmf <= 0):
        raise WindowUnreliable("tail probabilities in the window underflow to zero")
    slope, _ = np.polyfit(n, np.log(pmf) - power * np.log(n), 1)
    return float(slope)


# ------------------------------------------------------------------ simulation

@numba.njit(cache=True)
def _simulate_chunk(state, acc, exps, unif, l1, l2, d1_in, d1_b, d2_in, d2_b, levels):
    n1, n2 = state[0], state[1]
    for e in range(exps.shape[0]):
        if n1 > 0:
            d1 = d1_in if n2 > 0 else d1_b
        else:
            d1 = 0.0
        if n2 > 0:
            d2 = d2_in if n1 > 0 else d2_b
        else:
            d2 = 0.0
        q = l1 + l2 + d1 + d2
        if q <= 0.0:
            acc[0] += 1.0
            acc[1] += 1.0
            continue
        dt = exps[e] / q
        acc[0] += dt
        if n1 == 0 and n2 == 0:
            acc[1] += dt
        acc[2] += dt * n1
        acc[3] += dt * n2
        for k in range(levels.shape[0]):
            if n2 >= levels[k]:
                acc[4 + k] += dt
        u = unif[e] * q
        if u < l1:
            n1 += 1
        elif u < l1 + l2:
            n2 += 1
        elif u < l1 + l2 + d1:
            n1 -= 1
        else:
            n2 -= 1
    state[0] = n1
    state[1] = n2


@dataclass
class Estimate:
    mean: float
    half_width: float

    def covers(self, value: float) -> bool:
        return abs(value - self.mean) <= self.half_width


@dataclass
class SimResult:
    horizon: int
    replications: int
    seed: int
    p00: Estimate
    mean_N1: Estimate
    mean_N2: Estimate
    tail_N2: dict = field(default_factory=dict)
    per_replication: np.ndarray | None = None

    def rows(self):
        yield ("p00", "", self.p00.mean, self.p00.half_width)
        yield ("mean_N1", "", self.mean_N1.mean, self.mean_N1.half_width)
        yield ("mean_N2", "", self.mean_N2.mean, self.mean_N2.half_width)
        for n, est in self.tail_N2.items():
            yield ("P(N2>=n)", n, est.mean, est.half_width)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["quantity", "n", "estimate", "ci_half_width_95"])
            for q, n, m, h in self.rows():
                w.writerow([q, n, repr(float(m)), repr(float(h))])


def _estimate(samples: np.ndarray) -> Estimate:
    r = samples.shape[0]
    sd = samples.std(ddof=1) if r > 1 else float("inf")
    return Estimate(float(samples.mean()), float(stats.t.ppf(0.975, r - 1) * sd / np.sqrt(r)))


def simulate(model, horizon: int = 1_000_000, replications: int = 30, seed: int = 0,
             tail_levels=(5, 10, 20), chunk: int = 1 << 18) -> SimResult:
    """Independent replications started empty, each ``horizon`` transitions long.

    Every replication draws from its own Philox stream spawned from ``seed``; the 95%
    intervals use the Student t spread of the replication averages.
    """
    horizon = int(horizon)
    if horizon < 1 or replications < 2:
        raise ValueError("need horizon >= 1 and at least two replications")
    rates = _rates(model)
    levels = np.asarray(tail_levels, dtype=np.int64)
    streams = np.random.SeedSequence(seed).spawn(replications)
    out = np.empty((replications, 4 + len(levels)))
    for r, ss in enumerate(streams):
        rng = np.random.Generator(np.random.Philox(ss))
        state = np.zeros(2, dtype=np.int64)
        acc = np.zeros(4 + len(levels))
        left = horizon
        while left > 0:
            m = min(chunk, left)
            _simulate_chunk(state, acc, rng.standard_exponential(m), rng.random(m), *rates, levels)
            left -= m
        out[r] = acc
    T = out[:, 0]
    per = out[:, 1:] / T[:, None]
    tails = {int(n): _estimate(per[:, 3 + k]) for k, n in enumerate(levels)}
    return SimResult(horizon, replications, int(seed), _estimate(per[:, 0]), _estimate(per[:, 1]),
                     _estimate(per[:, 2]), tails, per)
