"""Sequential-measurement probabilities for a precessing spin-1/2.

The dichotomic observable at time t is X(t) = V_t sigma_z V_t^+ with
V_t = exp(-i omega t sigma_x / 2).  Outcome +1 is the |0> projection.
Entropies are in bits.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .core import I2, SX, SY, SZ

DEFAULT_OMEGA = 2 * np.pi * 100.0
CLAMP = 1e-12

OUTCOMES = (1, -1)
OUTCOMES_3 = tuple(itertools.product(OUTCOMES, repeat=3))


def outcome_label(key) -> str:
    return "".join("+" if x > 0 else "-" for x in key)


@dataclass(frozen=True)
class ProbabilityTable:
    """Joint distribution over {+1, -1}^arity."""

    arity: int
    values: Mapping

    def __post_init__(self):
        if self.arity not in (1, 2, 3):
            raise ValueError("arity must be 1, 2 or 3")
        vals = {tuple(int(x) for x in k): float(v) for k, v in dict(self.values).items()}
        for key in vals:
            if len(key) != self.arity or any(x not in OUTCOMES for x in key):
                raise ValueError(f"bad outcome tuple {key} for arity {self.arity}")
        for key in itertools.product(OUTCOMES, repeat=self.arity):
            vals.setdefault(key, 0.0)
        object.__setattr__(self, "values", vals)

    def __getitem__(self, key) -> float:
        return self.values[tuple(key)]

    def array(self) -> np.ndarray:
        """Values as an array indexed by bit (0 for +1, 1 for -1)."""
        out = np.zeros((2,) * self.arity)
        for key, v in self.values.items():
            out[tuple((1 - x) // 2 for x in key)] = v
        return out

    @classmethod
    def from_array(cls, arr) -> "ProbabilityTable":
        arr = np.asarray(arr, dtype=float)
        vals = {tuple(1 - 2 * b for b in idx): arr[idx] for idx in np.ndindex(arr.shape)}
        return cls(arr.ndim, vals)

    def total(self) -> float:
        return float(sum(self.values.values()))

    def check(self, atol: float = 1e-9) -> None:
        if min(self.values.values()) < -CLAMP:
            raise ValueError("negative probability")
        if abs(self.total() - 1) > atol:
            raise ValueError(f"probabilities sum to {self.total()}")


def observable(t: float, omega: float = DEFAULT_OMEGA) -> np.ndarray:
    v = np.cos(omega * t / 2) * I2 - 1j * np.sin(omega * t / 2) * SX
    return v @ SZ @ v.conj().T


def projector(x: int, t: float, omega: float = DEFAULT_OMEGA) -> np.ndarray:
    return (I2 + x * observable(t, omega)) / 2


def sequential_jp(times, omega: float = DEFAULT_OMEGA, rho_in=None) -> ProbabilityTable:
    """Projective-collapse chain probabilities Tr[P_k..P_1 rho P_1..P_k]."""
    times = [float(t) for t in times]
    if len(times) not in (1, 2, 3):
        raise ValueError("between one and three measurement times are supported")
    if any(b <= a for a, b in zip(times, times[1:])):
        raise ValueError("measurement times must be strictly increasing")
    rho = I2 / 2 if rho_in is None else np.asarray(rho_in, dtype=complex)
    projs = [{x: projector(x, t, omega) for x in OUTCOMES} for t in times]
    vals = {}
    for key in itertools.product(OUTCOMES, repeat=len(times)):
        chain = I2
        for p, x in zip(projs, key):
            chain = p[x] @ chain
        vals[key] = float(np.real(np.trace(chain @ rho @ chain.conj().T)))
    return ProbabilityTable(len(times), vals)


def pair_table(theta: float) -> ProbabilityTable:
    """Closed-form two-time table of a maximally mixed spin."""
    c, s = np.cos(theta / 2) ** 2 / 2, np.sin(theta / 2) ** 2 / 2
    return ProbabilityTable(2, {(1, 1): c, (-1, -1): c, (1, -1): s, (-1, 1): s})


def direct_three_time(theta: float) -> ProbabilityTable:
    """Closed-form three-time table, equal steps theta, maximally mixed start."""
    c = np.cos(theta)
    return ProbabilityTable(3, {k: (1 + k[0] * k[1] * c + k[1] * k[2] * c + k[0] * k[2] * c * c) / 8
                                for k in itertools.product(OUTCOMES, repeat=3)})


# ------------------------------------------------------------- ancilla encoding

def _two_qubit(op_s, op_a):
    return np.kron(op_s, op_a)


_CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
_ANTI_CNOT = np.array([[0, 1, 0, 0], [1, 0, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]], dtype=complex)


def _encoded_populations(theta: float, gate: np.ndarray) -> np.ndarray:
    """Diagonal of (system, ancilla) after gate and a theta x-rotation of the system.

    The system starts maximally mixed and already rotated into the first
    measurement basis, so only the relative precession theta matters.
    """
    rho = np.kron(I2 / 2, np.diag([1.0, 0.0]).astype(complex))
    rho = gate @ rho @ gate.conj().T
    r = np.cos(theta / 2) * I2 - 1j * np.sin(theta / 2) * SX
    u = _two_qubit(r, I2)
    rho = u @ rho @ u.conj().T
    return np.real(np.diag(rho)).reshape(2, 2)  # [system bit, ancilla bit]


def inrm_jp(theta: float, variant: str = "inrm-combined") -> ProbabilityTable:
    """Two-time table from ancilla encoding of the first measurement.

    ``cnot`` and ``anticnot`` decode the full table from one circuit.
    ``inrm-combined`` keeps only unflipped-ancilla outcomes: P(+1, q) from
    the CNOT run and P(-1, q) from the anti-CNOT run.
    """
    cn = _encoded_populations(theta, _CNOT)
    an = _encoded_populations(theta, _ANTI_CNOT)
    arr = np.zeros((2, 2))  # [first bit, second bit]
    if variant == "cnot":
        arr = cn.T.copy()  # ancilla bit = first outcome
    elif variant == "anticnot":
        arr = an.T[::-1].copy()  # ancilla bit = NOT first outcome
    elif variant == "inrm-combined":
        arr[0] = cn[:, 0]  # ancilla unflipped in CNOT run -> first outcome 0
        arr[1] = an[:, 0]  # ancilla unflipped in anti-CNOT run -> first outcome 1
    else:
        raise ValueError(f"unknown INRM variant {variant!r}")
    return ProbabilityTable.from_array(arr)


# ---------------------------------------------------------------- entropies

def shannon(p) -> float:
    """Entropy in bits of a table or a sequence of probabilities."""
    vals = np.array(list(p.values.values()) if isinstance(p, ProbabilityTable) else p, dtype=float)
    vals = np.where(vals < CLAMP, 0.0, vals)
    nz = vals[vals > 0]
    return float(-np.sum(nz * np.log2(nz)))


def conditional_entropy(theta: float) -> float:
    """H(Q_{k+1} | Q_k) for a step theta; the single-time entropy is one bit."""
    joint = pair_table(theta)
    first = joint.array().sum(axis=1)
    return shannon(joint) - shannon(first)


def information_deficit(theta: float, n_measurements: int = 3) -> float:
    """D_n = (n-1) H[theta/(n-1)] - H[theta]; negative values violate macrorealism."""
    if n_measurements < 3:
        raise ValueError("the deficit needs at least three measurements")
    k = n_measurements - 1
    return k * conditional_entropy(theta / k) - conditional_entropy(theta)


def deficit_from_tables(p12: ProbabilityTable, p13: ProbabilityTable) -> float:
    """D_3 = 2 H(Q2|Q1) - H(Q3|Q1) for uniform steps, from measured tables."""
    h1 = shannon(p12.array().sum(axis=1))
    return 2 * (shannon(p12) - h1) - (shannon(p13) - shannon(p13.array().sum(axis=1)))


def marginalize(p3: ProbabilityTable, drop: int) -> ProbabilityTable:
    if p3.arity != 3:
        raise ValueError("marginalize expects a three-time table")
    if drop not in (0, 1, 2):
        raise ValueError(f"index to drop must be 0, 1 or 2, got {drop}")
    return ProbabilityTable.from_array(p3.array().sum(axis=drop))


# ------------------------------------------------------------------ moments

MOMENT_KEYS = tuple(itertools.product((0, 1), repeat=3))


def moments_of(p3: ProbabilityTable) -> dict:
    arr = p3.array()
    signs = np.array([1, -1])
    out = {}
    for n in MOMENT_KEYS:
        w = np.einsum("i,j,k->ijk", signs ** n[0], signs ** n[1], signs ** n[2])
        out[n] = float(np.sum(w * arr))
    return out


def invert_moments(m) -> ProbabilityTable:
    """P(x) = (1/8) sum_n x1^n1 x2^n2 x3^n3 mu_n; no clipping of negatives."""
    m = {tuple(k): float(v) for k, v in dict(m).items()}
    if abs(m.get((0, 0, 0), 0.0) - 1) > 1e-12:
        raise ValueError("mu_000 must equal 1")
    vals = {}
    for x in itertools.product(OUTCOMES, repeat=3):
        vals[x] = sum(m.get(n, 0.0) * x[0] ** n[0] * x[1] ** n[1] * x[2] ** n[2]
                      for n in MOMENT_KEYS) / 8
    return ProbabilityTable(3, vals)


def moussa_correlator(times, omega: float = DEFAULT_OMEGA, rho_in=None) -> complex:
    """Tr[X_k ... X_1 rho] read off an ancilla prepared in |+>.

    Controlled-X_i gates (ancilla control, first time first) are applied to
    |+><+| (x) rho; the ancilla transverse magnetization <sx> + i<sy> equals
    the ordered correlator.
    """
    rho = I2 / 2 if rho_in is None else np.asarray(rho_in, dtype=complex)
    plus = np.full((2, 2), 0.5, dtype=complex)
    state = np.kron(plus, rho)
    p0, p1 = np.diag([1.0, 0.0]), np.diag([0.0, 1.0])
    for t in times:
        cu = np.kron(p0, I2) + np.kron(p1, observable(t, omega))
        state = cu @ state @ cu.conj().T
    rho_a = np.einsum("aibi->ab", state.reshape(2, 2, 2, 2))
    return complex(np.trace(rho_a @ SX) + 1j * np.trace(rho_a @ SY))


def moussa_moments(observable_times, omega: float = DEFAULT_OMEGA, rho_in=None) -> float:
    """Real part of the ordered correlator; the symmetrized moment."""
    if not 1 <= len(observable_times) <= 3:
        raise ValueError("one to three observables are supported")
    return float(np.real(moussa_correlator(observable_times, omega, rho_in)))


def quantum_moments(theta: float, omega: float = DEFAULT_OMEGA, rho_in=None) -> dict:
    """All eight moments for equally spaced times with step theta."""
    dt = theta / omega
    times = (0.0, dt, 2 * dt)
    out = {}
    for n in MOMENT_KEYS:
        picked = [t for t, k in zip(times, n) if k]
        out[n] = 1.0 if not picked else moussa_moments(picked, omega, rho_in)
    return out


def d3_sweep(theta_max: float = np.pi, points: int = 97):
    thetas = np.linspace(0.0, theta_max, points)
    return thetas, np.array([information_deficit(t, 3) for t in thetas])
