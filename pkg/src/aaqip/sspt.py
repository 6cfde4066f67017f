"""Single-scan process tomography.

The system qubits are paired with an equal number of encoding ancillas in
the maximally entangled state sum_a |a>_A |a>_S / sqrt(d).  Registers are
ordered ancilla-major: all A spins, then all S spins.  After the channel
acts on S, block (a, a') of the joint state holds eps(|a><a'|) / d, so one
state tomography yields the whole lambda matrix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import aaqst
from .core import (DimensionError, SX, SY, SZ, I2, SpinSystem, embed, n_spins_of, permute_spins,
                   z_parities)
from .measurement import NoiseSpec, add_noise, single_quantum_lines

FIXED_LABELS_1Q = ("E", "X", "Y", "Z")
FIXED_OPS_1Q = (I2, SX, -1j * SY, SZ)

# Two-delay readout program, seconds.  The default pair was found with
# optimize_delays (seed 7, 200 generations) for the shipped synthetic
# register and gives C = 2.93; the reference pair gives C = 241 there.
DEFAULT_DELAYS = (9.8171e-3, 5.3526e-3)
REFERENCE_DELAYS = (6.7783e-3, 8.0182e-3)


@dataclass(frozen=True)
class ProcessBasis:
    rho_basis: np.ndarray
    fixed_ops: np.ndarray
    labels: tuple

    @property
    def dim(self) -> int:
        return self.rho_basis.shape[-1]


def process_basis(n_system: int = 1) -> ProcessBasis:
    """|m><m'| basis (row-major in m, m') and tensor products of {I, X, -iY, Z}."""
    d = 2 ** n_system
    rho = np.zeros((d * d, d, d), dtype=complex)
    for j in range(d * d):
        rho[j, j // d, j % d] = 1
    ops, labels = [np.ones((1, 1), dtype=complex)], [""]
    for _ in range(n_system):
        ops = [np.kron(a, b) for a in ops for b in FIXED_OPS_1Q]
        labels = [a + b for a in labels for b in FIXED_LABELS_1Q]
    return ProcessBasis(rho, np.array(ops), tuple(labels))


@dataclass(frozen=True)
class QuantumChannel:
    """A unitary, a Kraus set, or a z-rotation twirl of half-width ``phi``."""

    kind: str
    operators: tuple = ()
    phi: float = 0.0

    def __post_init__(self):
        ops = tuple(np.asarray(o, dtype=complex) for o in self.operators)
        object.__setattr__(self, "operators", ops)
        if self.kind == "unitary":
            if len(ops) != 1:
                raise ValueError("a unitary channel takes exactly one operator")
            u = ops[0]
            if np.max(np.abs(u @ u.conj().T - np.eye(u.shape[0]))) > 1e-9:
                raise ValueError("unitary channel operator is not unitary")
        elif self.kind == "kraus":
            if not ops:
                raise ValueError("a Kraus channel needs at least one operator")
            total = sum(k.conj().T @ k for k in ops)
            if np.max(np.abs(total - np.eye(total.shape[0]))) > 1e-9:
                raise ValueError("Kraus operators are not complete (sum E^+E != I)")
        elif self.kind == "twirl":
            if not np.isfinite(self.phi) or self.phi < 0:
                raise ValueError("twirl half-width must be finite and >= 0")
        else:
            raise ValueError(f"unknown channel kind {self.kind!r}")

    def kraus(self) -> tuple:
        if self.kind == "twirl":
            raise ValueError("a twirl is applied element-wise, not through Kraus operators")
        return self.operators


def unitary_channel(u) -> QuantumChannel:
    return QuantumChannel("unitary", (u,))


def kraus_channel(ops) -> QuantumChannel:
    return QuantumChannel("kraus", tuple(ops))


def twirl_channel(phi: float) -> QuantumChannel:
    return QuantumChannel("twirl", (), float(phi))


def _rz(angle):
    return np.diag([np.exp(-1j * angle / 2), np.exp(1j * angle / 2)])


def _rot(pauli, angle):
    return np.cos(angle / 2) * I2 - 1j * np.sin(angle / 2) * pauli


GATES = {
    "NOP": I2,
    "NOT-X": _rot(SX, np.pi),
    "NOT-Y": _rot(SY, np.pi),
    "Hadamard": (SX + SZ) / np.sqrt(2),
    "Phase-pi": _rz(-np.pi),
    "Phase-pi/4": _rz(-np.pi / 4),
}


def encode_basis(n_system: int = 1) -> np.ndarray:
    """Projector onto sum_a |a>_A |a>_S / sqrt(d), ancilla spins first."""
    if n_system < 1:
        raise ValueError("need at least one system qubit")
    d = 2 ** n_system
    psi = np.zeros(d * d, dtype=complex)
    psi[np.arange(d) * d + np.arange(d)] = 1 / np.sqrt(d)
    return np.outer(psi, psi.conj())


def twirl(state: np.ndarray, phi: float, spins=None) -> np.ndarray:
    """Scale element (l, m) by sinc(q phi), q the coherence order over ``spins``."""
    n = n_spins_of(state)
    spins = list(range(n)) if spins is None else list(spins)
    z = z_parities(n)[spins].sum(axis=0)
    q = (z[:, None] - z[None, :]) / 2
    return state * np.sinc(q * phi / np.pi)


def apply_channel(state: np.ndarray, channel: QuantumChannel, target) -> np.ndarray:
    state = np.asarray(state)
    n = n_spins_of(state)
    target = [target] if isinstance(target, (int, np.integer)) else list(target)
    if channel.kind == "twirl":
        return twirl(state, channel.phi, target)
    out = np.zeros_like(state, dtype=complex)
    for e in channel.kraus():
        if e.shape != (2 ** len(target),) * 2:
            raise DimensionError(f"channel operator {e.shape} does not act on {len(target)} spins")
        big = embed(e, target, n)
        out += big @ state @ big.conj().T
    return out


def extract_lambda(rho_as: np.ndarray) -> np.ndarray:
    """lambda[j, k] with j = a d + a', k = b d + b' and rho_AS[(a,b),(a',b')] = lambda/d."""
    rho_as = np.asarray(rho_as)
    n2 = n_spins_of(rho_as)
    if n2 % 2:
        raise DimensionError(f"joint state on {n2} spins cannot split into ancilla and system")
    d = 2 ** (n2 // 2)
    t = rho_as.reshape(d, d, d, d)  # a, b, a', b'
    return d * t.transpose(0, 2, 1, 3).reshape(d * d, d * d)


def beta_tensor(basis: ProcessBasis) -> np.ndarray:
    """beta[m, n, j, k]: coefficients of E_m rho_j E_n^+ in the rho_k basis."""
    rb = basis.rho_basis
    flat = rb.reshape(len(rb), -1)
    gram = flat.conj() @ flat.T
    if np.linalg.cond(gram) > 1e12:
        raise np.linalg.LinAlgError("process state basis is not linearly independent")
    e = basis.fixed_ops
    prod = np.einsum("mab,jbc,ndc->mnjad", e, rb, e.conj())
    overlaps = np.einsum("kad,mnjad->mnjk", rb.conj(), prod)
    return np.einsum("mnjl,kl->mnjk", overlaps, np.linalg.inv(gram))


def solve_chi(beta: np.ndarray, lam: np.ndarray) -> np.ndarray:
    """Least-squares chi from beta chi = lambda."""
    n_ops = beta.shape[0]
    n_rho = beta.shape[2]
    a = beta.transpose(2, 3, 0, 1).reshape(n_rho * n_rho, n_ops * n_ops)
    b = np.asarray(lam).reshape(-1)
    x, _, rank, _ = np.linalg.lstsq(a, b, rcond=1e-10)
    if rank < n_ops * n_ops:
        raise np.linalg.LinAlgError(f"beta has rank {rank} < {n_ops * n_ops}")
    return x.reshape(n_ops, n_ops)


def chi_of_kraus(ops, basis: ProcessBasis | None = None) -> np.ndarray:
    """Analytic chi by expanding each Kraus operator in the fixed basis."""
    basis = basis or process_basis(n_spins_of(np.asarray(ops[0])))
    e = basis.fixed_ops.reshape(len(basis.fixed_ops), -1)
    chi = np.zeros((len(e), len(e)), dtype=complex)
    for k in ops:
        c = np.linalg.solve(e.T, np.asarray(k, dtype=complex).reshape(-1))
        chi += np.outer(c, c.conj())
    return chi


def chi_of_twirl(phi: float) -> np.ndarray:
    s = np.sinc(2 * phi / np.pi)
    return np.diag([(1 + s) / 2, 0, 0, (1 - s) / 2]).astype(complex)


def gate_fidelity(chi_exp: np.ndarray, chi_th: np.ndarray) -> float:
    a = np.asarray(chi_exp)
    b = np.asarray(chi_th)
    if a.shape != b.shape:
        raise DimensionError(f"chi shapes {a.shape} and {b.shape} differ")
    na, nb = np.vdot(a, a).real, np.vdot(b, b).real
    if na == 0 or nb == 0:
        raise ValueError("gate fidelity undefined for a zero chi matrix")
    return float(min(1.0, abs(np.vdot(b, a)) / np.sqrt(na * nb)))


def trace_residual(chi: np.ndarray, basis: ProcessBasis | None = None) -> float:
    """max |sum_mn chi_mn E_n^+ E_m - I|."""
    basis = basis or process_basis(int(round(np.log2(chi.shape[0]) / 2)))
    e = basis.fixed_ops
    total = np.einsum("mn,nba,mbc->ac", chi, e.conj(), e)
    return float(np.max(np.abs(total - np.eye(e.shape[-1]))))


def readout_ancillas(n_system: int) -> int:
    """Fewest readout ancillas that let one spectrum fix the 2n-qubit joint state."""
    n_readout = 0
    while aaqst.min_experiments(2 * n_system, n_readout) > 1:
        n_readout += 1
    return n_readout


def measurement_count(n_system: int, n_readout: int | None = None) -> int:
    """Independent scans needed by single-scan process tomography.

    n encoding ancillas pair with the n system qubits; ``n_readout``
    defaults to ``readout_ancillas(n_system)``, which makes this one.
    """
    if n_readout is None:
        n_readout = readout_ancillas(n_system)
    return aaqst.min_experiments(2 * n_system, n_readout)


@dataclass(frozen=True)
class SSPTResult:
    chi: np.ndarray
    lam: np.ndarray
    rho_as: np.ndarray
    condition_number: float


def _roles(system: SpinSystem):
    s = system.spins_with("system")
    a = system.spins_with("aapt-ancilla")
    b = system.spins_with("aaqst-ancilla")
    if len(s) != 1 or len(a) != 1:
        raise ValueError("single-scan process tomography needs one system spin and one "
                         "encoding ancilla")
    return s[0], a[0], b


def readout_program(system: SpinSystem, delays=DEFAULT_DELAYS) -> np.ndarray:
    return aaqst.two_delay_model().unitaries(system, delays)[0]


def run_sspt(system: SpinSystem, channel: QuantumChannel, noise: NoiseSpec | None = None,
             delays=DEFAULT_DELAYS, full: bool = False):
    """Encode, apply the channel, read one spectrum, reconstruct, solve for chi.

    A twirl acts on both encoded spins (a non-selective z-rotation average);
    unitary and Kraus channels act on the system spin only.  Noise
    half-width is relative to the largest noiseless line magnitude.
    """
    s, a, b = _roles(system)
    n = system.n_spins
    rho_as = encode_basis(1)
    if channel.kind == "twirl":
        rho_as = apply_channel(rho_as, channel, [0, 1])
    else:
        rho_as = apply_channel(rho_as, channel, [1])
    state = embed(np.kron(rho_as, np.eye(2 ** len(b)) / 2 ** len(b)), [a, s] + b, n)
    dev = state - np.eye(2 ** n) / 2 ** n
    u = readout_program(system, delays)
    M = aaqst.build_constraint_matrix(system, [u])
    lines = single_quantum_lines(u @ dev @ u.conj().T, n)
    if noise is not None and noise.eta > 0:
        scale = max(np.max(np.abs(lines.R)), np.max(np.abs(lines.S)))
        noisy = add_noise(lines.with_values(lines.R / scale, lines.S / scale), noise)
        lines = noisy.with_values(noisy.R * scale, noisy.S * scale)
    rec = aaqst.reconstruct_state(M, lines)
    tspins = list(M.tomography_spins)
    rec = permute_spins(rec, [tspins.index(a), tspins.index(s)]) + np.eye(4) / 4
    lam = extract_lambda(rec)
    chi = solve_chi(beta_tensor(process_basis(1)), lam)
    if full:
        return SSPTResult(chi, lam, rec, aaqst.condition_number(M))
    return chi
