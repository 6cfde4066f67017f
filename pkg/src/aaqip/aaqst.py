"""Ancilla-assisted state tomography from single-quantum readouts.

The unknown deviation matrix on the tomography spins is expanded in N^2-1
real coordinates: N-1 diagonal populations (the last one is fixed by the
trace), then the real parts R_mm' and imaginary parts S_mm' of every
m < m' coherence.  Ancilla spins start maximally mixed, so each unknown
maps linearly onto the line amplitudes of the whole register.
"""

from __future__ import annotations

import math
from functools import lru_cache
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import minimize

from .core import (DimensionError, PulseSpec, SpinSystem, check_size, compose_pulse_program,
                   embed)
from .measurement import SpectralReadout, line_indices

RCOND = 1e-10
RANK_TOL = 1e-8
SINGULAR_RATIO = 1e-12


def deviation_basis(dim: int) -> tuple[np.ndarray, list[str]]:
    """Real-coordinate basis of traceless Hermitian dim x dim matrices.

    Returns a stack of shape (dim**2 - 1, dim, dim) and matching labels.
    """
    mats, labels = [], []
    last = dim - 1
    for m in range(last):
        b = np.zeros((dim, dim), dtype=complex)
        b[m, m], b[last, last] = 1, -1
        mats.append(b)
        labels.append(f"rho_{m}{m}")
    pairs = [(m, mp) for m in range(dim) for mp in range(m + 1, dim)]
    for m, mp in pairs:
        b = np.zeros((dim, dim), dtype=complex)
        b[m, mp] = b[mp, m] = 1
        mats.append(b)
        labels.append(f"R_{m},{mp}")
    for m, mp in pairs:
        b = np.zeros((dim, dim), dtype=complex)
        b[m, mp], b[mp, m] = 1j, -1j
        mats.append(b)
        labels.append(f"S_{m},{mp}")
    return np.array(mats), labels


def coordinates(rho: np.ndarray) -> np.ndarray:
    """Inverse of ``assemble``: the N^2-1 real unknowns of a deviation matrix."""
    rho = np.asarray(rho)
    dim = rho.shape[0]
    iu, ju = np.triu_indices(dim, k=1)
    off = rho[iu, ju]
    return np.concatenate([np.real(np.diag(rho))[:-1], off.real, off.imag])


def assemble(x: np.ndarray, dim: int) -> np.ndarray:
    """Hermitian traceless matrix from its real coordinates."""
    x = np.asarray(x, dtype=float)
    if x.size != dim * dim - 1:
        raise DimensionError(f"expected {dim * dim - 1} coordinates, got {x.size}")
    rho = np.zeros((dim, dim), dtype=complex)
    diag = x[:dim - 1]
    rho[np.arange(dim - 1), np.arange(dim - 1)] = diag
    rho[dim - 1, dim - 1] = -diag.sum()
    npair = dim * (dim - 1) // 2
    iu, ju = np.triu_indices(dim, k=1)
    vals = x[dim - 1:dim - 1 + npair] + 1j * x[dim - 1 + npair:]
    rho[iu, ju] = vals
    rho[ju, iu] = vals.conj()
    return rho


@dataclass(frozen=True)
class ConstraintMatrix:
    entries: np.ndarray
    column_map: list
    row_map: list
    tomography_spins: tuple
    n_spins: int

    @property
    def dim(self) -> int:
        return 2 ** len(self.tomography_spins)

    @property
    def n_experiments(self) -> int:
        return len(self.row_map) // (self.n_spins * 2 ** self.n_spins)

    def rank(self, tol: float = RANK_TOL) -> int:
        s = np.linalg.svd(self.entries, compute_uv=False)
        if s.size == 0 or s[0] == 0:
            return 0
        return int(np.sum(s > tol * s[0]))

    def predict(self, rho: np.ndarray) -> np.ndarray:
        return self.entries @ coordinates(rho)


def tomography_spins(system: SpinSystem) -> list[int]:
    spins = [i for i, lab in enumerate(system.labels) if lab != "aaqst-ancilla"]
    if not spins:
        raise ValueError("no tomography spins: every spin is labelled aaqst-ancilla")
    return spins


@lru_cache(maxsize=32)
def _embedded_basis(n: int, spins: tuple) -> tuple[np.ndarray, list[str]]:
    anc = [s for s in range(n) if s not in spins]
    basis, labels = deviation_basis(2 ** len(spins))
    mixed = np.eye(2 ** len(anc)) / 2 ** len(anc)
    full = np.array([embed(np.kron(b, mixed), list(spins) + anc, n) for b in basis])
    full.flags.writeable = False
    return full, labels


def build_constraint_matrix(system: SpinSystem, unitaries: Sequence[np.ndarray]) -> ConstraintMatrix:
    n = system.n_spins
    check_size(n)
    spins = tomography_spins(system)
    full, labels = _embedded_basis(n, tuple(spins))
    spin_idx, nu, i0, i1 = line_indices(n)
    re_blocks, im_blocks, rows_re, rows_im = [], [], [], []
    unitaries = list(unitaries)
    if not unitaries:
        raise ValueError("at least one experiment unitary is required")
    for k, u in enumerate(unitaries):
        u = np.asarray(u)
        if u.shape != (2 ** n, 2 ** n):
            raise DimensionError(f"unitary {k} has shape {u.shape}, register is {2 ** n}")
        evolved = u @ full @ u.conj().T
        lines = evolved[:, i0, i1]  # (unknowns, lines)
        re_blocks.append(lines.real.T)
        im_blocks.append(lines.imag.T)
        rows_re += [(k, int(j), int(v), "Re") for j, v in zip(spin_idx, nu)]
        rows_im += [(k, int(j), int(v), "Im") for j, v in zip(spin_idx, nu)]
    entries = np.vstack(re_blocks + im_blocks)
    return ConstraintMatrix(entries, list(labels), rows_re + rows_im, tuple(spins), n)


def condition_number(M) -> float:
    """sigma_max / sigma_min, or inf when fewer rows than unknowns or singular."""
    a = M.entries if isinstance(M, ConstraintMatrix) else np.asarray(M, dtype=float)
    if a.size == 0:
        raise ValueError("empty constraint matrix")
    if a.shape[0] < a.shape[1]:
        return math.inf
    s = np.linalg.svd(a, compute_uv=False)
    if s[-1] < SINGULAR_RATIO * s[0] or s[0] == 0:
        return math.inf
    return float(s[0] / s[-1])


def reconstruct_state(M: ConstraintMatrix, readouts) -> np.ndarray:
    """Least-squares deviation matrix on the tomography spins."""
    if isinstance(readouts, SpectralReadout):
        readouts = [readouts]
    readouts = list(readouts)
    # R entries of every experiment first, then every S entry, as in M.
    b = np.concatenate([np.concatenate([r.R for r in readouts]),
                        np.concatenate([r.S for r in readouts])])
    if b.size != M.entries.shape[0]:
        raise DimensionError(f"readout has {b.size} values, constraint matrix has "
                             f"{M.entries.shape[0]} rows")
    x, _, rank, _ = np.linalg.lstsq(M.entries, b, rcond=RCOND)
    if rank < M.entries.shape[1]:
        raise np.linalg.LinAlgError(
            f"constraint matrix rank {rank} < {M.entries.shape[1]} unknowns")
    return assemble(x, M.dim)


def min_experiments(n_system: int, n_ancilla: int) -> int:
    if n_system < 1 or n_ancilla < 0:
        raise ValueError("need n_system >= 1 and n_ancilla >= 0")
    n_tot = n_system + n_ancilla
    unknowns = 4 ** n_system - 1
    per_scan = n_tot * 2 ** n_tot
    return -(-unknowns // per_scan)


# ---------------------------------------------------------------- optimizer

@dataclass(frozen=True)
class ParamPulse:
    """Pulse whose rotation angle is a model parameter."""

    param: str
    axis: str = "x"
    targets: tuple | None = None


@dataclass(frozen=True)
class UnitaryModel:
    """Parameterized pulse programs, one per experiment.

    Each experiment is a chronological step list.  A step is a PulseSpec, a
    fixed delay (float), a parameter name (delay in seconds) or a ParamPulse.
    """

    experiments: tuple
    params: tuple
    bounds: np.ndarray = field(default=None)

    def __post_init__(self):
        params = tuple(self.params)
        if len(params) < 1:
            raise ValueError("a unitary model needs at least one parameter")
        bounds = np.asarray(self.bounds, dtype=float)
        if bounds.shape != (len(params), 2):
            raise ValueError(f"bounds must have shape ({len(params)}, 2)")
        if not np.all(np.isfinite(bounds)) or np.any(bounds[:, 0] < 0) or np.any(bounds[:, 1] < bounds[:, 0]):
            raise ValueError("bounds must be finite with 0 <= min <= max")
        exps = tuple(tuple(e) for e in self.experiments)
        for e in exps:
            for step in e:
                name = step.param if isinstance(step, ParamPulse) else step
                if isinstance(name, str) and name not in params:
                    raise ValueError(f"step references unknown parameter {name!r}")
        object.__setattr__(self, "experiments", exps)
        object.__setattr__(self, "params", params)
        object.__setattr__(self, "bounds", bounds)

    def unitaries(self, system: SpinSystem, values) -> list[np.ndarray]:
        vals = dict(zip(self.params, np.asarray(values, dtype=float)))
        out = []
        for e in self.experiments:
            steps = []
            for step in e:
                if isinstance(step, ParamPulse):
                    steps.append(PulseSpec(vals[step.param], step.axis, step.targets))
                elif isinstance(step, str):
                    steps.append(vals[step])
                else:
                    steps.append(step)
            out.append(compose_pulse_program(system, steps))
        return out

    def objective(self, system: SpinSystem, values) -> float:
        return condition_number(build_constraint_matrix(system, self.unitaries(system, values)))


def two_delay_model(bounds=((0.0, 0.02), (0.0, 0.02))) -> UnitaryModel:
    """(pi/2)_y U(tau2) (pi/2)_x U(tau1), non-selective pulses."""
    steps = ("tau1", PulseSpec(np.pi / 2, "x"), "tau2", PulseSpec(np.pi / 2, "y"))
    return UnitaryModel((steps,), ("tau1", "tau2"), np.asarray(bounds, dtype=float))


@dataclass(frozen=True)
class GAConfig:
    population: int = 64
    tournament: int = 3
    mutation: float = 0.05
    crossover: float = 0.5
    elitism: int = 2
    polish: bool = True


def _rank_order(costs: np.ndarray, pop: np.ndarray) -> np.ndarray:
    # lexsort keys go last-to-first: C, then total duration, then index
    return np.lexsort((np.arange(len(costs)), pop.sum(axis=1), costs))


def optimize_delays(system: SpinSystem, model: UnitaryModel, budget: int, seed: int,
                    config: GAConfig | None = None) -> tuple[np.ndarray, float]:
    """Genetic search for the parameters minimizing the condition number.

    ``budget`` is the number of generations.  The best candidate is
    optionally refined by a bounded Nelder-Mead run; the refinement is
    kept only if it improves C.
    """
    if budget < 1:
        raise ValueError("budget must be at least one generation")
    if seed is None:
        raise ValueError("a seed is required for reproducible optimization")
    cfg = config or GAConfig()
    rng = np.random.default_rng(seed)
    lo, hi = model.bounds[:, 0], model.bounds[:, 1]
    width = hi - lo
    p = len(model.params)

    def evaluate(pop):
        return np.array([model.objective(system, x) for x in pop])

    pop = lo + rng.random((cfg.population, p)) * width
    costs = evaluate(pop)
    best_x, best_c = None, math.inf
    for _ in range(budget):
        order = _rank_order(costs, pop)
        if costs[order[0]] < best_c:
            best_x, best_c = pop[order[0]].copy(), float(costs[order[0]])
        elite = pop[order[:cfg.elitism]]
        rank_of = np.empty(len(pop), dtype=int)
        rank_of[order] = np.arange(len(pop))
        n_child = cfg.population - len(elite)
        contenders = rng.integers(0, len(pop), size=(n_child, 2, cfg.tournament))
        winners = np.take_along_axis(contenders, np.argmin(rank_of[contenders], axis=2)[..., None],
                                     axis=2)[..., 0]
        mask = rng.random((n_child, p)) < cfg.crossover
        children = np.where(mask, pop[winners[:, 0]], pop[winners[:, 1]])
        children += rng.normal(0.0, cfg.mutation, size=children.shape) * width
        children = np.clip(children, lo, hi)
        pop = np.vstack([elite, children])
        costs = np.concatenate([costs[order[:cfg.elitism]], evaluate(children)])
    order = _rank_order(costs, pop)
    if costs[order[0]] < best_c:
        best_x, best_c = pop[order[0]].copy(), float(costs[order[0]])
    if not math.isfinite(best_c):
        raise np.linalg.LinAlgError(
            f"every candidate gave a singular constraint matrix after {budget} generations; "
            "widen the bounds or add experiments")
    if cfg.polish:
        res = minimize(lambda x: model.objective(system, x), best_x, method="Nelder-Mead",
                       bounds=list(zip(lo, hi)),
                       options={"xatol": 1e-9 * max(width.max(), 1e-300), "fatol": 1e-10,
                                "maxiter": 400 * p})
        x = np.clip(res.x, lo, hi)
        c = model.objective(system, x)
        if math.isfinite(c) and c < best_c:
            best_x, best_c = x, float(c)
    return best_x, best_c
