"""Dense matrix representation of small spin registers.

Basis states |m_1 ... m_n> are indexed by the decimal value of the bit
string with spin 1 as the most significant bit.  Frequencies are stored in
Hz and converted to rad/s when Hamiltonians are built.  Density matrices
are deviation matrices (the identity background is dropped) unless a
function says otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

MAX_SPINS = 12

ROLES = ("system", "aapt-ancilla", "aaqst-ancilla")

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = {"I": I2, "X": SX, "Y": SY, "Z": SZ}


class DimensionError(ValueError):
    """Raised when operator dimensions do not match a register."""


@dataclass(frozen=True)
class SpinSystem:
    """Register description: offsets and couplings in Hz, one role per spin.

    ``gammas`` (rad T^-1 s^-1) is optional and only used by the NOON models.
    """

    offsets: np.ndarray
    couplings: np.ndarray
    labels: tuple = ()
    gammas: np.ndarray | None = None

    def __post_init__(self):
        offsets = np.asarray(self.offsets, dtype=float).reshape(-1)
        n = offsets.size
        if n < 1:
            raise ValueError("a spin system needs at least one spin")
        couplings = np.asarray(self.couplings, dtype=float)
        if couplings.size == 0 and n == 1:
            couplings = np.zeros((1, 1))
        if couplings.shape != (n, n):
            raise ValueError(f"couplings must be {n}x{n}, got {couplings.shape}")
        if not np.allclose(couplings, couplings.T, rtol=0, atol=1e-12):
            raise ValueError("couplings must be symmetric")
        if np.any(np.diag(couplings) != 0):
            raise ValueError("couplings must have a zero diagonal")
        labels = tuple(self.labels) if self.labels else ("system",) * n
        if len(labels) != n:
            raise ValueError(f"expected {n} labels, got {len(labels)}")
        for lab in labels:
            if lab not in ROLES:
                raise ValueError(f"unknown spin role {lab!r}; expected one of {ROLES}")
        gammas = self.gammas
        if gammas is not None:
            gammas = np.asarray(gammas, dtype=float).reshape(-1)
            if gammas.size != n:
                raise ValueError(f"expected {n} gyromagnetic ratios, got {gammas.size}")
        offsets.flags.writeable = False
        couplings = couplings.copy()
        couplings.flags.writeable = False
        object.__setattr__(self, "offsets", offsets)
        object.__setattr__(self, "couplings", couplings)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "gammas", gammas)

    @property
    def n_spins(self) -> int:
        return self.offsets.size

    @property
    def dim(self) -> int:
        return 2 ** self.n_spins

    def spins_with(self, *roles: str) -> list[int]:
        return [i for i, lab in enumerate(self.labels) if lab in roles]


def check_size(n_spins: int, max_spins: int = MAX_SPINS) -> None:
    if n_spins > max_spins:
        raise DimensionError(
            f"{n_spins} spins exceeds the dense-matrix cap of {max_spins}")


def n_spins_of(op: np.ndarray) -> int:
    dim = op.shape[-1]
    n = int(round(np.log2(dim)))
    if 2 ** n != dim or op.shape[-2] != dim:
        raise DimensionError(f"operator of shape {op.shape} is not a qubit register operator")
    return n


def operator_on(single: np.ndarray, spin: int, n_spins: int) -> np.ndarray:
    """Kronecker-embed a 2x2 operator acting on one spin."""
    out = np.ones((1, 1), dtype=complex)
    for k in range(n_spins):
        out = np.kron(out, single if k == spin else I2)
    return out


def pauli_string(label: str) -> np.ndarray:
    """Tensor product like ``pauli_string("XZI")``."""
    out = np.ones((1, 1), dtype=complex)
    for ch in label:
        out = np.kron(out, PAULI[ch.upper()])
    return out


def z_parities(n_spins: int) -> np.ndarray:
    """Eigenvalues of sigma_z on each spin, shape (n_spins, 2**n)."""
    idx = np.arange(2 ** n_spins)
    bits = (idx[None, :] >> (n_spins - 1 - np.arange(n_spins))[:, None]) & 1
    return 1 - 2 * bits


def hamiltonian_diagonal(system: SpinSystem, max_spins: int = MAX_SPINS) -> np.ndarray:
    n = system.n_spins
    check_size(n, max_spins)
    z = z_parities(n).astype(float)
    diag = -np.pi * (system.offsets[:, None] * z).sum(axis=0)
    iu, ju = np.triu_indices(n, k=1)
    diag += (0.5 * np.pi * system.couplings[iu, ju][:, None] * z[iu] * z[ju]).sum(axis=0)
    return diag


def build_hamiltonian(system: SpinSystem, max_spins: int = MAX_SPINS) -> np.ndarray:
    """Weak-coupling Hamiltonian in rad/s.

    H = -pi sum_i nu_i Z_i + (pi/2) sum_{i<j} J_ij Z_i Z_j
    """
    return np.diag(hamiltonian_diagonal(system, max_spins)).astype(complex)


def free_evolution(system: SpinSystem, tau: float) -> np.ndarray:
    if tau < 0:
        raise ValueError(f"negative delay {tau}")
    return np.diag(np.exp(-1j * hamiltonian_diagonal(system) * tau))


def expm_hermitian(generator: np.ndarray, t: float = 1.0) -> np.ndarray:
    """exp(-i G t) for Hermitian G via eigendecomposition."""
    w, v = np.linalg.eigh(generator)
    return (v * np.exp(-1j * w * t)) @ v.conj().T


_AXIS_PHASE = {"x": 0.0, "y": np.pi / 2, "-x": np.pi, "-y": 3 * np.pi / 2}


@dataclass(frozen=True)
class PulseSpec:
    """Ideal hard pulse: rotation by ``angle`` about ``axis``.

    ``axis`` is one of x, y, -x, -y, z or a float giving the transverse
    phase in radians.  ``targets`` lists spin indices; None means all spins.
    """

    angle: float
    axis: Union[str, float] = "x"
    targets: tuple | None = None

    def __post_init__(self):
        if not np.isfinite(self.angle):
            raise ValueError("pulse angle must be finite")
        if isinstance(self.axis, str) and self.axis not in (*_AXIS_PHASE, "z"):
            raise ValueError(f"unknown pulse axis {self.axis!r}")
        if self.targets is not None:
            object.__setattr__(self, "targets", tuple(int(t) for t in self.targets))
            if not self.targets:
                raise ValueError("pulse targets must be non-empty")

    def single_spin(self) -> np.ndarray:
        half = self.angle / 2
        if self.axis == "z":
            return np.diag([np.exp(-1j * half), np.exp(1j * half)])
        phi = _AXIS_PHASE[self.axis] if isinstance(self.axis, str) else float(self.axis)
        gen = np.cos(phi) * SX + np.sin(phi) * SY
        return np.cos(half) * I2 - 1j * np.sin(half) * gen

    def unitary(self, n_spins: int) -> np.ndarray:
        targets = range(n_spins) if self.targets is None else self.targets
        for t in targets:
            if not 0 <= t < n_spins:
                raise ValueError(f"pulse target {t} outside register of {n_spins} spins")
        r = self.single_spin()
        out = np.ones((1, 1), dtype=complex)
        for k in range(n_spins):
            out = np.kron(out, r if k in targets else I2)
        return out


Step = Union[PulseSpec, float, np.ndarray]


def compose_pulse_program(system: SpinSystem, steps: Sequence[Step]) -> np.ndarray:
    """Unitary of a chronological list of steps (first step acts first).

    A step is a PulseSpec, a free-evolution delay in seconds, or an explicit
    unitary matrix.
    """
    n = system.n_spins
    check_size(n)
    u = np.eye(2 ** n, dtype=complex)
    for step in steps:
        if isinstance(step, PulseSpec):
            v = step.unitary(n)
        elif isinstance(step, np.ndarray):
            if step.shape != u.shape:
                raise DimensionError(f"step of shape {step.shape} on a {u.shape} register")
            v = step
        else:
            v = free_evolution(system, float(step))
        u = v @ u
    return u


def is_unitary(u: np.ndarray, atol: float = 1e-9) -> bool:
    return bool(np.max(np.abs(u @ u.conj().T - np.eye(u.shape[0]))) < atol)


def evolve(rho: np.ndarray, u: np.ndarray) -> np.ndarray:
    rho = np.asarray(rho)
    if rho.shape[-2:] != u.shape:
        raise DimensionError(f"state {rho.shape} and unitary {u.shape} do not match")
    return u @ rho @ u.conj().T


def state_fidelity(a: np.ndarray, b: np.ndarray) -> float:
    """Normalized Hilbert-Schmidt overlap |Tr(a b^+)| / sqrt(Tr(a a^+) Tr(b b^+))."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise DimensionError(f"shapes {a.shape} and {b.shape} differ")
    na = np.vdot(a, a).real
    nb = np.vdot(b, b).real
    if na == 0 or nb == 0:
        raise ValueError("fidelity undefined for a zero matrix")
    return float(min(1.0, abs(np.vdot(b, a)) / np.sqrt(na * nb)))


def check_deviation(rho: np.ndarray, atol: float = 1e-10) -> None:
    rho = np.asarray(rho)
    if np.max(np.abs(rho - rho.conj().T), initial=0) > atol:
        raise ValueError("deviation matrix is not Hermitian")
    if abs(np.trace(rho)) > atol:
        raise ValueError("deviation matrix is not traceless")


def deviation(rho: np.ndarray) -> np.ndarray:
    """Drop the identity background of a density matrix."""
    rho = np.asarray(rho)
    return rho - np.trace(rho) / rho.shape[0] * np.eye(rho.shape[0])


def permute_spins(op: np.ndarray, order: Sequence[int]) -> np.ndarray:
    """Reorder tensor factors: new spin k is old spin ``order[k]``."""
    n = n_spins_of(op)
    order = list(order)
    if sorted(order) != list(range(n)):
        raise ValueError(f"{order} is not a permutation of {n} spins")
    t = op.reshape((2,) * (2 * n))
    t = t.transpose(order + [n + k for k in order])
    return t.reshape(op.shape)


def embed(op: np.ndarray, spins: Sequence[int], n_total: int) -> np.ndarray:
    """Place ``op`` on the listed spins (in that order), identity elsewhere."""
    spins = list(spins)
    k = n_spins_of(op)
    if len(spins) != k:
        raise DimensionError(f"operator acts on {k} spins but {len(spins)} were given")
    rest = [s for s in range(n_total) if s not in spins]
    full = np.kron(op, np.eye(2 ** len(rest)))
    # full currently has factor order spins + rest
    current = spins + rest
    order = [current.index(s) for s in range(n_total)]
    return permute_spins(full, order)


def partial_trace(op: np.ndarray, keep: Sequence[int]) -> np.ndarray:
    """Trace out every spin not listed in ``keep`` (result ordered as ``keep``)."""
    n = n_spins_of(op)
    keep = list(keep)
    drop = [s for s in range(n) if s not in keep]
    t = op.reshape((2,) * (2 * n)).transpose(keep + drop + [n + s for s in keep] + [n + s for s in drop])
    dk, dd = 2 ** len(keep), 2 ** len(drop)
    t = t.reshape(dk, dd, dk, dd)
    return np.einsum("iaja->ij", t)


def thermal_deviation(n_spins: int, spins: Sequence[int] | None = None) -> np.ndarray:
    """High-temperature equilibrium deviation sum_i Z_i / 2 over ``spins``."""
    spins = range(n_spins) if spins is None else spins
    return sum(operator_on(SZ, s, n_spins) for s in spins) / 2
