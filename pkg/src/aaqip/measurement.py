"""Single-quantum line readout and additive noise."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .core import DimensionError, n_spins_of


@dataclass(frozen=True)
class SpectralReadout:
    """Ordered line amplitudes.

    Parallel arrays, one entry per line.  Within an experiment ``nu`` runs
    fastest, then ``spin``; experiments are concatenated in order.
    """

    experiment: np.ndarray
    spin: np.ndarray
    nu: np.ndarray
    R: np.ndarray
    S: np.ndarray

    def __len__(self) -> int:
        return len(self.R)

    def vector(self) -> np.ndarray:
        """Stacked observable vector [R..., S...]."""
        return np.concatenate([self.R, self.S])

    def with_values(self, R, S) -> "SpectralReadout":
        return SpectralReadout(self.experiment, self.spin, self.nu,
                               np.asarray(R, dtype=float), np.asarray(S, dtype=float))

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("experiment_k,spin_j,nu,R,S\n")
        for k, j, nu, r, s in zip(self.experiment, self.spin, self.nu, self.R, self.S):
            buf.write(f"{k},{j},{nu},{r:.17g},{s:.17g}\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "SpectralReadout":
        rows = [ln for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
        reader = csv.DictReader(rows)
        cols = {"experiment_k": [], "spin_j": [], "nu": [], "R": [], "S": []}
        for lineno, row in enumerate(reader, start=2):
            try:
                for key in cols:
                    cols[key].append(row[key])
            except KeyError as exc:
                raise ValueError(f"readout row {lineno}: missing column {exc}") from None
        return cls(np.array(cols["experiment_k"], dtype=int), np.array(cols["spin_j"], dtype=int),
                   np.array(cols["nu"], dtype=int), np.array(cols["R"], dtype=float),
                   np.array(cols["S"], dtype=float))

    @classmethod
    def concatenate(cls, parts) -> "SpectralReadout":
        parts = list(parts)
        return cls(*(np.concatenate([getattr(p, f) for p in parts])
                     for f in ("experiment", "spin", "nu", "R", "S")))


@dataclass(frozen=True)
class NoiseSpec:
    eta: float
    seed: int = 0

    def __post_init__(self):
        if not np.isfinite(self.eta) or self.eta < 0:
            raise ValueError(f"noise half-width must be finite and >= 0, got {self.eta}")


def line_indices(n_spins: int) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Row/column indices of every single-quantum transition.

    Returns (spin, nu, idx0, idx1) where idx0 has the flipped spin in |0>
    and idx1 in |1>; ``nu`` is the (n-1)-bit value of the other spins.
    """
    half = 2 ** (n_spins - 1)
    nu = np.tile(np.arange(half), n_spins)
    spin = np.repeat(np.arange(n_spins), half)
    shift = n_spins - 1 - spin
    high = nu >> shift
    low = nu & ((1 << shift) - 1)
    idx0 = (high << (shift + 1)) | low
    idx1 = idx0 | (1 << shift)
    return spin, nu, idx0, idx1


def single_quantum_lines(rho: np.ndarray, n_spins: int | None = None,
                         experiment: int = 0) -> SpectralReadout:
    rho = np.asarray(rho)
    if n_spins is None:
        n_spins = n_spins_of(rho)
    if rho.shape != (2 ** n_spins, 2 ** n_spins):
        raise DimensionError(f"state of shape {rho.shape} is not a {n_spins}-spin operator")
    spin, nu, i0, i1 = line_indices(n_spins)
    vals = rho[i0, i1]
    return SpectralReadout(np.full(spin.size, experiment), spin, nu,
                           np.ascontiguousarray(vals.real, dtype=float),
                           np.ascontiguousarray(vals.imag, dtype=float))


def add_noise(readout: SpectralReadout, noise: NoiseSpec) -> SpectralReadout:
    """Perturb every R and S by an independent uniform draw in [-eta, eta]."""
    if noise.eta == 0:
        return readout
    rng = np.random.default_rng(noise.seed)
    d = rng.uniform(-noise.eta, noise.eta, size=(2, len(readout)))
    return readout.with_values(readout.R + d[0], readout.S + d[1])


def diagonal_populations(rho: np.ndarray) -> np.ndarray:
    return np.real(np.diag(np.asarray(rho))).copy()
