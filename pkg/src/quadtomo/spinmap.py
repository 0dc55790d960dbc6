"""Open XY spin chains in a transverse field and their fermionic form.

    H = sum_n c_n [(1+g_n) S^x_n S^x_{n+1} + (1-g_n) S^y_n S^y_{n+1}] + sum_n b_n S^z_n

with S = sigma/2. Jordan-Wigner uses a_n = (prod_{m<n} Z_m) sigma^+_n, so an
occupied site is spin down and S^z_n = 1/2 - a_n^+ a_n. That gives

    A_{n,n+1} = c_n / 2,  B_{n,n+1} = g_n c_n / 2,  A_nn = -b_n,  constant = sum_n b_n / 2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .core import QuadraticHamiltonian, Statistics
from .diag import BogoliubovDecomposition
from .errors import ParseError, SizeLimit

MAX_SPECTRUM_SITES = 14
MAX_STATE_SITES = 10


@dataclass(frozen=True)
class SpinChain:
    c: np.ndarray
    gamma: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        b = np.atleast_1d(np.asarray(self.b, dtype=float))
        n = b.shape[0]
        c = np.atleast_1d(np.asarray(self.c, dtype=float))
        g = np.asarray(self.gamma, dtype=float)
        if g.ndim == 0:
            g = np.full(max(n - 1, 0), float(g))
        if n < 1:
            raise ValueError("chain needs at least one site")
        if c.shape != (n - 1,) or g.shape != (n - 1,):
            raise ValueError(f"need {n - 1} couplings and anisotropies for {n} sites")
        if not (np.all(np.isfinite(c)) and np.all(np.isfinite(g)) and np.all(np.isfinite(b))):
            raise ValueError("spin chain entries must be finite")
        for name, v in (("c", c), ("gamma", g), ("b", b)):
            v.setflags(write=False)
            object.__setattr__(self, name, v)

    @property
    def n_sites(self) -> int:
        return self.b.shape[0]

    def to_dict(self) -> dict:
        return {"n": self.n_sites, "c": self.c.tolist(), "gamma": self.gamma.tolist(), "b": self.b.tolist()}

    @classmethod
    def from_dict(cls, doc: dict) -> "SpinChain":
        try:
            s = cls(doc["c"], doc["gamma"], doc["b"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"malformed spin chain document: {exc}") from exc
        if s.n_sites != int(doc.get("n", s.n_sites)):
            raise ParseError("field 'n' disagrees with the number of fields b")
        return s


def jw_to_fermion(s: SpinChain):
    """(fermionic Hamiltonian, scalar constant)."""
    n = s.n_sites
    A = np.diag(-s.b).astype(np.complex128)
    B = np.zeros((n, n), dtype=np.complex128)
    for i in range(n - 1):
        A[i, i + 1] = A[i + 1, i] = s.c[i] / 2
        B[i, i + 1] = s.gamma[i] * s.c[i] / 2
        B[i + 1, i] = -B[i, i + 1]
    return QuadraticHamiltonian(A, B, Statistics.FERMION), float(s.b.sum() / 2)


def fermion_to_spin(h: QuadraticHamiltonian) -> SpinChain:
    """Inverse of :func:`jw_to_fermion` for real tridiagonal fermion chains."""
    A, B = h.A.real, h.B.real
    c = 2 * np.diag(A, 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        g = np.where(c != 0, 2 * np.diag(B, 1) / np.where(c != 0, c, 1), 0.0)
    return SpinChain(c, g, -np.diag(A))


def ground_offset(h: QuadraticHamiltonian, d: BogoliubovDecomposition) -> float:
    """H = sum_k E_k n_k + offset, with offset = (tr A - sum_k E_k) / 2 for fermions."""
    return float(0.5 * (np.trace(h.A).real - d.energies[: d.n_sites].sum()))


def many_body_spectrum(d: BogoliubovDecomposition, constant: float = 0.0) -> np.ndarray:
    """Sorted ``constant + sum_k n_k E_k`` over all occupations of the N modes."""
    if d.n_sites > MAX_SPECTRUM_SITES:
        raise SizeLimit(f"2^{d.n_sites} levels exceed the 2^{MAX_SPECTRUM_SITES} limit")
    return np.sort(kernels.many_body_levels(d.energies[: d.n_sites], constant))


def spin_hamiltonian(s: SpinChain) -> np.ndarray:
    if s.n_sites > MAX_SPECTRUM_SITES:
        raise SizeLimit(f"2^{s.n_sites} dimensional matrix exceeds the limit")
    return kernels.xy_chain_hamiltonian(s.c, s.gamma, s.b)


def spin_spectrum(s: SpinChain) -> np.ndarray:
    return np.linalg.eigvalsh(spin_hamiltonian(s))


def quasiparticle_spectrum(s: SpinChain) -> np.ndarray:
    """Many-body spectrum of ``s`` through the fermionic modes."""
    from .diag import diagonalize

    h, const = jw_to_fermion(s)
    d = diagonalize(h)
    return many_body_spectrum(d, const + ground_offset(h, d))


_Z = np.diag([1.0, -1.0])
_SIGMA_PLUS = np.array([[0.0, 1.0], [0.0, 0.0]])


def _kron_all(ops):
    out = np.ones((1, 1))
    for op in ops:
        out = np.kron(out, op)
    return out


def jw_annihilator(n_sites: int, site: int) -> np.ndarray:
    """Dense a_site = (prod_{m<site} Z_m) sigma^+_site."""
    ops = [_Z] * (site - 1) + [_SIGMA_PLUS] + [np.eye(2)] * (n_sites - site)
    return _kron_all(ops)


def local_init_check(s: SpinChain, seed: int = 0, state: np.ndarray | None = None) -> dict:
    """Project site 1 onto an X eigenstate and report <a_n> for n > 1.

    ``state`` may be a state vector or a density matrix; by default a random
    full-rank density matrix is drawn from ``seed``.
    """
    n = s.n_sites
    if n > MAX_STATE_SITES:
        raise SizeLimit(f"{n} sites exceed the {MAX_STATE_SITES}-site limit for dense states")
    dim = 1 << n
    if state is None:
        rng = np.random.default_rng(seed)
        g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        rho = g @ g.conj().T
    else:
        st = np.asarray(state, dtype=np.complex128)
        rho = np.outer(st, st.conj()) if st.ndim == 1 else st
    plus = np.full((2, 2), 0.5)
    proj = _kron_all([plus] + [np.eye(2)] * (n - 1))
    rho = proj @ rho @ proj
    rho = rho / np.trace(rho)
    values = [complex(np.trace(rho @ jw_annihilator(n, m))) for m in range(1, n + 1)]
    tail = max((abs(v) for v in values[1:]), default=0.0)
    return {"n": n, "expectations": values, "max_abs_beyond_first": float(tail)}
