"""NOON-state phase amplification, diffusion decay and RF-inhomogeneity models.

A star register has one central spin A coupled to N - 1 equivalent
satellites M.  Gyromagnetic ratios are in rad/T/s, gradients in T/m,
times in s and RF amplitudes in Hz.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares
from scipy.stats import t as student_t

from .core import z_parities
from .sysfile import load_gyromagnetic


@dataclass(frozen=True)
class StarSystem:
    gamma_A: float
    gamma_M: float
    N_total: int

    def __post_init__(self):
        # N_total = 1 is kept as the plain single-quantum limit
        if self.N_total < 1:
            raise ValueError("a star system needs at least the central spin")
        if self.gamma_A == 0 or (self.N_total > 1 and self.gamma_M == 0):
            raise ValueError("gyromagnetic ratios must be nonzero")

    @classmethod
    def from_species(cls, central: str, satellite: str, n_satellites: int) -> "StarSystem":
        g = load_gyromagnetic()
        for name in (central, satellite):
            if name not in g:
                raise KeyError(f"unknown nucleus {name!r}; known: {sorted(g)}")
        return cls(g[central], g[satellite], n_satellites + 1)


def effective_gamma(sys: StarSystem) -> tuple[float, float]:
    """gamma_eff = gamma_A + (N - 1) gamma_M and the gain g = gamma_eff / gamma_A."""
    if sys.gamma_A == 0:
        raise ValueError("gamma_A must be nonzero")
    ge = sys.gamma_A + (sys.N_total - 1) * sys.gamma_M
    return ge, ge / sys.gamma_A


def gradient_phase(gamma_eff: float, dz: float, G1: float, delta: float) -> float:
    """Relative phase picked up across a slice dz during a gradient pulse."""
    return gamma_eff * dz * G1 * delta


# ------------------------------------------------------------------ diffusion

@dataclass(frozen=True)
class DiffusionParams:
    D: float
    delta: float
    Delta: float
    gamma_eff: float

    def __post_init__(self):
        if min(self.D, self.delta, self.Delta, self.gamma_eff) <= 0:
            raise ValueError("diffusion parameters must be positive")
        if self.Delta <= self.delta / 3:
            raise ValueError("need Delta > delta / 3")

    @property
    def b_per_G2(self) -> float:
        return self.gamma_eff ** 2 * self.delta ** 2 * (self.Delta - self.delta / 3)


def diffusion_signal(G1, p: DiffusionParams):
    """S / S0 = exp(-gamma^2 G^2 delta^2 D (Delta - delta / 3))."""
    G1 = np.asarray(G1, dtype=float)
    if np.any(G1 < 0):
        raise ValueError("gradient strength must be non-negative")
    return np.exp(-p.b_per_G2 * p.D * G1 ** 2)


def fit_diffusion(G1, S, delta: float, Delta: float, gamma_eff: float) -> tuple[float, float]:
    """Linear fit of ln S against G^2 (free intercept).

    Returns D and its standard error from the residual variance; the error
    is nan when only two points are given.
    """
    G1 = np.asarray(G1, dtype=float)
    S = np.asarray(S, dtype=float)
    if G1.shape != S.shape or G1.ndim != 1:
        raise ValueError("G1 and S must be 1-d arrays of equal length")
    if G1.size < 2:
        raise ValueError("at least two points are needed")
    if np.any(S <= 0):
        raise ValueError("signal values must be positive for a log-linear fit")
    x = G1 ** 2
    if np.ptp(x) <= 1e-12 * max(np.max(x), 1e-300):
        raise ValueError("gradient values are degenerate; need at least two distinct G1")
    y = np.log(S)
    A = np.column_stack([np.ones_like(x), x])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    scale = DiffusionParams(1.0, delta, Delta, gamma_eff).b_per_G2
    D = -coef[1] / scale
    dof = x.size - 2
    if dof == 0:
        return float(D), float("nan")
    resid = y - A @ coef
    s2 = resid @ resid / dof
    cov = s2 * np.linalg.inv(A.T @ A)
    return float(D), float(np.sqrt(cov[1, 1]) / scale)


def confidence_halfwidth(sigma: float, n_points: int, level: float = 0.95) -> float:
    """Half-width of the Student-t interval for a two-parameter line fit."""
    return float(student_t.ppf(0.5 + level / 2, n_points - 2) * sigma)


# ------------------------------------------------------------------------ RFI

@dataclass(frozen=True)
class RfiProfile:
    nu0: float
    lambda_minus: float
    lambda_plus: float

    def __post_init__(self):
        if self.nu0 <= 0 or self.lambda_minus <= 0 or self.lambda_plus <= 0:
            raise ValueError("nu0 and widths must be positive")

    @property
    def a(self) -> float:
        """Normalizes the density over [0, 3 nu0]."""
        lm, lp = self.lambda_minus, self.lambda_plus
        return 1.0 / (self.nu0 * (lm * np.arctan(1 / lm) + lp * np.arctan(2 / lp)))


def _rfi_shape(nu, nu0, lm, lp):
    u = 1 - np.asarray(nu, dtype=float) / nu0
    lam = np.where(u > 0, lm, lp)
    return lam ** 2 / (u ** 2 + lam ** 2)


def rfi_pdf(nu, prof: RfiProfile):
    """Asymmetric Lorentzian: width lambda_minus below nu0, lambda_plus above."""
    nu = np.asarray(nu, dtype=float)
    if np.any(nu < 0):
        raise ValueError("RF amplitude must be non-negative")
    return prof.a * _rfi_shape(nu, prof.nu0, prof.lambda_minus, prof.lambda_plus)


def _half_width(x, y, peak_at):
    """Distance from ``peak_at`` to the half-maximum crossing along sorted x."""
    half = 0.5 * np.max(y)
    idx = np.where(y >= half)[0]
    if idx.size == 0:
        return None
    i = idx[-1]
    if i + 1 >= x.size:
        return None
    # linear interpolation between the last point above and the first below
    x0, x1, y0, y1 = x[i], x[i + 1], y[i], y[i + 1]
    xc = x0 + (half - y0) * (x1 - x0) / (y1 - y0)
    return abs(xc - peak_at)


def rfi_fit(nu, p, nu0: float) -> RfiProfile:
    """Fit (lambda_minus, lambda_plus) to a normalized profile sampled on a grid."""
    nu = np.asarray(nu, dtype=float)
    p = np.asarray(p, dtype=float)
    if nu.size < 16 or nu.shape != p.shape:
        raise ValueError("need at least 16 matching (nu, p) samples")
    order = np.argsort(nu)
    nu, p = nu[order], p[order]
    u = nu / nu0 - 1
    above = u >= 0
    guesses = []
    for side, mask, sign in (("minus", ~above, -1), ("plus", above, 1)):
        xs, ys = (-u[mask])[::-1], p[mask][::-1]
        if sign > 0:
            xs, ys = u[mask], p[mask]
        w = _half_width(xs, ys, 0.0) if xs.size >= 2 else None
        guesses.append(w if w and w > 0 else 0.02)
    peak = np.max(p)

    def resid(theta):
        lm, lp = np.exp(theta)
        return RfiProfile(nu0, lm, lp).a * _rfi_shape(nu, nu0, lm, lp) - p

    res = least_squares(resid, np.log(guesses), method="lm", x_scale=1.0,
                        xtol=1e-14, ftol=1e-14, gtol=1e-14, max_nfev=2000)
    if not res.success or not np.all(np.isfinite(res.x)):
        raise RuntimeError(f"RFI fit did not converge: {res.message}")
    if np.sqrt(np.mean(res.fun ** 2)) > 0.5 * peak:
        raise RuntimeError("RFI fit diverged: residuals comparable to the profile")
    lm, lp = np.exp(res.x)
    return RfiProfile(nu0, float(lm), float(lp))


@dataclass(frozen=True)
class RfiCorrProfile:
    """Two-channel RFI correlation profile.

    lam_H and lam_P are (lambda_minus, lambda_plus) pairs; minus applies
    below the nominal amplitude of that channel.
    """

    lambda0: float
    lam_H: tuple
    lam_P: tuple
    nu0_H: float = 1.0
    nu0_P: float = 1.0

    def __post_init__(self):
        vals = (self.lambda0, *self.lam_H, *self.lam_P)
        if len(self.lam_H) != 2 or len(self.lam_P) != 2:
            raise ValueError("lam_H and lam_P are (minus, plus) pairs")
        if min(vals) <= 0:
            raise ValueError("all widths must be positive")
        object.__setattr__(self, "lam_H", tuple(float(v) for v in self.lam_H))
        object.__setattr__(self, "lam_P", tuple(float(v) for v in self.lam_P))

    def ratios(self) -> np.ndarray:
        """lambda / lambda0^2 for (H-, H+, P-, P+): the identifiable combinations."""
        return np.array([*self.lam_H, *self.lam_P]) / self.lambda0 ** 2


def _corr_shape(nuH, nuP, lambda0, hm, hp, pm, pp, nu0H, nu0P):
    uH = 1 - np.asarray(nuH, dtype=float) / nu0H
    uP = 1 - np.asarray(nuP, dtype=float) / nu0P
    lh = np.where(uH > 0, hm, hp)
    lp = np.where(uP > 0, pm, pp)
    d2 = lh * uH ** 2 + lp * uP ** 2
    return lambda0 ** 2 / (d2 + lambda0 ** 2)


def rfi_corr_pdf(nuH, nuP, prof: RfiCorrProfile):
    """lambda0^2 / (d^2 + lambda0^2) with quadrant-selected widths; 1 at the nominal point."""
    if np.any(np.asarray(nuH) <= 0) or np.any(np.asarray(nuP) <= 0):
        raise ValueError("RF amplitudes must be positive")
    return _corr_shape(nuH, nuP, prof.lambda0, *prof.lam_H, *prof.lam_P, prof.nu0_H, prof.nu0_P)


def corr_fit(nuH, nuP, p, nu0_H: float = 1.0, nu0_P: float = 1.0,
             lambda0: float | None = None) -> RfiCorrProfile:
    """Least-squares fit of the correlation profile on a 2-d grid.

    The profile depends on the widths only through lambda / lambda0^2, so
    lambda0 cannot be determined from the data.  When ``lambda0`` is None
    the fit reports the gauge lambda0 = 1; pass the known value to recover
    the four widths themselves.
    """
    nuH, nuP, p = (np.asarray(a, dtype=float).ravel() for a in np.broadcast_arrays(nuH, nuP, p))
    if p.size < 16:
        raise ValueError("need at least 16 grid samples")
    l0 = 1.0 if lambda0 is None else float(lambda0)
    uH, uP = 1 - nuH / nu0_H, 1 - nuP / nu0_P
    # initial ratios from the half-maximum distance along each half-axis
    init = []
    for u, other, sign in ((uH, uP, 1), (uH, uP, -1), (uP, uH, 1), (uP, uH, -1)):
        mask = (np.abs(other) <= np.min(np.abs(other)) + 1e-15) & (sign * u > 0)
        w = _half_width(np.sort(sign * u[mask]), p[mask][np.argsort(sign * u[mask])], 0.0) \
            if mask.sum() >= 2 else None
        init.append(1.0 / w ** 2 if w else 1.0)

    def resid(theta):
        r = np.exp(theta)
        return _corr_shape(nuH, nuP, 1.0, *r, nu0_H, nu0_P) - p

    res = least_squares(resid, np.log(init), method="lm", xtol=1e-14, ftol=1e-14, gtol=1e-14,
                        max_nfev=4000)
    if not res.success or not np.all(np.isfinite(res.x)):
        raise RuntimeError(f"correlation fit did not converge: {res.message}")
    if np.sqrt(np.mean(res.fun ** 2)) > 0.25:
        raise RuntimeError("correlation fit diverged")
    r = np.exp(res.x) * l0 ** 2
    return RfiCorrProfile(l0, (r[0], r[1]), (r[2], r[3]), nu0_H, nu0_P)


# ----------------------------------------------------------------- NOON phase

def noon_phase(N: int, phi_z: float) -> float:
    """Phase of the NOON coherence after a z-rotation phi_z on the N - 1 satellites.

    Builds the N-spin NOON projector (central spin first), applies
    exp(-i phi_z sigma_z / 2) to every satellite and returns the angle of
    the |1..1><0..0| element, wrapped to (-pi, pi].
    """
    if N < 2:
        raise ValueError("a NOON register needs at least two spins")
    dim = 2 ** N
    psi = np.zeros(dim, dtype=complex)
    psi[0] = psi[-1] = 1 / np.sqrt(2)
    z = z_parities(N)[1:].sum(axis=0)
    psi = np.exp(-0.5j * phi_z * z) * psi
    rho = np.outer(psi, psi.conj())
    return float(np.angle(rho[-1, 0]))


def wrap_phase(x):
    """Wrap to (-pi, pi]."""
    return -((-np.asarray(x) + np.pi) % (2 * np.pi) - np.pi)
