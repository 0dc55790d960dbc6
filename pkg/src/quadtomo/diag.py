"""Bogoliubov decomposition of eta*M.

Columns of ``eigvecs`` are the right eigenvectors |E_k> of eta*M, i.e. the
columns of T^-1. The first N energies are positive and ascending; column
``k + N`` is the mirror partner of column ``k`` with energy ``-E_k``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .core import QuadraticHamiltonian, Statistics, assemble_m, complex_to_json, signature_metric
from .errors import DegenerateSpectrum, ZeroMode

DEFAULT_GAP = 1e-8
VANISHING_ENTRY = 1e-10


class SurfaceEntryWarning(UserWarning):
    """An eigenvector has (numerically) no weight on a probed site."""


@dataclass(frozen=True)
class BogoliubovDecomposition:
    energies: np.ndarray
    eigvecs: np.ndarray
    statistics: Statistics

    @property
    def n_sites(self) -> int:
        return self.energies.shape[0] // 2

    @property
    def eps(self) -> int:
        return self.statistics.eps

    @property
    def eta(self) -> np.ndarray:
        return signature_metric(self.n_sites, self.statistics)

    def transform(self) -> np.ndarray:
        """T = eta V^+ eta, the inverse of the eigenvector matrix V."""
        eta = self.eta
        return eta[:, None] * self.eigvecs.conj().T * eta[None, :]

    def to_dict(self) -> dict:
        return {
            "energies": [float(e) for e in self.energies],
            "vectors": [[complex_to_json(z) for z in col] for col in self.eigvecs.T],
        }


def mirror(vecs: np.ndarray) -> np.ndarray:
    """Swap upper/lower halves and conjugate: <n|E_{k+N}> = <n+N|E_k>*."""
    n = vecs.shape[0] // 2
    return np.concatenate([vecs[n:], vecs[:n]]).conj()


def _positive_modes(h: QuadraticHamiltonian):
    m = assemble_m(h)
    n = h.n_sites
    if h.eps == 1:
        w, v = np.linalg.eigh(m)
        keep = w > 0
        return w[keep], v[:, keep], w
    eta = signature_metric(n, h.statistics)
    # M = L L^+ turns eta M into the Hermitian L^+ eta L with the same spectrum
    chol = np.linalg.cholesky(0.5 * (m + m.conj().T))
    k = chol.conj().T @ (eta[:, None] * chol)
    w, u = np.linalg.eigh(0.5 * (k + k.conj().T))
    vecs = np.linalg.solve(chol.conj().T, u) * np.sqrt(np.abs(w))[None, :]
    keep = w > 0
    return w[keep], vecs[:, keep], w


def _check_spectrum(all_w: np.ndarray, n: int, gap: float):
    scale = max(np.max(np.abs(all_w)), 1.0)
    tol = gap * scale
    if np.min(np.abs(all_w)) < tol:
        raise ZeroMode(f"energy {all_w[np.argmin(np.abs(all_w))]:.3g} below gap {tol:.3g}")
    if np.count_nonzero(all_w > 0) != n:
        raise DegenerateSpectrum("energies do not split into N positive/negative pairs")
    srt = np.sort(all_w)
    d = np.diff(srt)
    if d.size and np.min(d) < tol:
        i = int(np.argmin(d))
        raise DegenerateSpectrum(f"energies {srt[i]:.12g} and {srt[i + 1]:.12g} closer than {tol:.3g}")
    pos = np.sort(all_w[all_w > 0])
    neg = np.sort(-all_w[all_w < 0])
    if np.max(np.abs(pos - neg)) > max(1e-9 * scale, tol):
        raise DegenerateSpectrum("spectrum is not symmetric under negation")


def _fix_phase(vecs: np.ndarray, row: int) -> np.ndarray:
    out = vecs.copy()
    for k in range(out.shape[1]):
        z = out[row, k]
        if abs(z) > 0:
            out[:, k] *= abs(z) / z
            out[row, k] = abs(z)
    return out


def diagonalize(h: QuadraticHamiltonian, gap: float = DEFAULT_GAP) -> BogoliubovDecomposition:
    """Paired energies and eta-normalised eigenvectors of eta*M.

    Positive modes get the phase that makes <1|E_k> real and nonnegative;
    their partners follow from the mirror relation, so <1|E_{k+N}> equals
    <N+1|E_k>* and is in general complex. Use :func:`anchor_gauge` to rephase
    every column instead.
    """
    n = h.n_sites
    w, vecs, all_w = _positive_modes(h)
    _check_spectrum(all_w, n, gap)
    order = np.argsort(w)
    w = w[order]
    vecs = _fix_phase(vecs[:, order], 0)
    full = np.concatenate([vecs, mirror(vecs)], axis=1)
    energies = np.concatenate([w, -w])
    return BogoliubovDecomposition(energies, full, h.statistics)


def anchor_gauge(d: BogoliubovDecomposition, site: int = 1) -> BogoliubovDecomposition:
    """Rephase every column so that <site|E_k> is real and nonnegative."""
    return BogoliubovDecomposition(d.energies, _fix_phase(d.eigvecs, site - 1), d.statistics)


def surface_row(d: BogoliubovDecomposition, site: int):
    """Rows ``site`` and ``site + N`` of T^-1 (entries for every mode k).

    Warns when a mode pair (k, k+-N) has no weight on ``site``: such a pair
    never shows up in the signal measured there.
    """
    n = d.n_sites
    if not 1 <= site <= n:
        raise ValueError(f"site {site} outside 1..{n}")
    upper = d.eigvecs[site - 1].copy()
    lower = d.eigvecs[site - 1 + n].copy()
    partner = np.roll(np.arange(2 * n), n)
    weak = np.abs(upper) < VANISHING_ENTRY
    small = np.flatnonzero(weak & weak[partner])
    if small.size:
        warnings.warn(
            f"<{site}|E_k> vanishes for k in {list(small + 1)}; reconstruction from site {site} will fail",
            SurfaceEntryWarning,
            stacklevel=2,
        )
    return upper, lower


def verify_decomposition(d: BogoliubovDecomposition, h: QuadraticHamiltonian) -> dict:
    """Maximum residuals of the eigen equation, normalisation, completeness,
    pairing and the mirror relation."""
    n = d.n_sites
    eta = d.eta
    V = d.eigvecs
    E = d.energies
    etam = eta[:, None] * assemble_m(h)
    eig = np.max(np.abs(etam @ V - V * E[None, :]), axis=0).max()
    gram = V.conj().T @ (eta[:, None] * V)
    norm = np.max(np.abs(gram - np.diag(eta)))
    comp = np.max(np.abs((V * eta[None, :]) @ V.conj().T @ np.diag(eta) - np.eye(2 * n)))
    pairing = np.max(np.abs(E[n:] + E[:n]))
    mirr = np.max(np.abs(V[:, n:] - mirror(V[:, :n])))
    return {
        "eigen": float(eig),
        "normalization": float(norm),
        "completeness": float(comp),
        "pairing": float(pairing),
        "mirror": float(mirr),
    }
