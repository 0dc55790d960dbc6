"""Quadratic Hamiltonian data model, the 2N x 2N matrix M and coupling graphs.

Sites are 1-indexed in every public interface. Row ``n + N`` of M belongs to
the creation operator of site ``n``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import (
    AnomalousSymmetryViolated,
    BosonicMNotPositiveDefinite,
    NotHermitian,
    ParseError,
)

STRUCT_TOL = 1e-12
ZERO_TOL = 1e-10


class Statistics(Enum):
    FERMION = "fermion"
    BOSON = "boson"

    @property
    def eps(self) -> int:
        return 1 if self is Statistics.FERMION else -1

    @classmethod
    def parse(cls, value) -> "Statistics":
        if isinstance(value, Statistics):
            return value
        if value in (1, "+1"):
            return cls.FERMION
        if value == -1:
            return cls.BOSON
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ParseError(f"unknown statistics {value!r}") from None


@dataclass(frozen=True)
class QuadraticHamiltonian:
    """``H = sum A_nm a_n^+ a_m + 1/2 sum (B_nm a_n^+ a_m^+ + h.c.)``."""

    A: np.ndarray
    B: np.ndarray
    statistics: Statistics = Statistics.FERMION

    def __post_init__(self):
        A = np.array(self.A, dtype=np.complex128)
        B = np.array(self.B, dtype=np.complex128)
        if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] == 0:
            raise ParseError(f"A must be a non-empty square matrix, got shape {A.shape}")
        if B.shape != A.shape:
            raise ParseError(f"B shape {B.shape} does not match A shape {A.shape}")
        A.setflags(write=False)
        B.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "statistics", Statistics.parse(self.statistics))

    @property
    def n_sites(self) -> int:
        return self.A.shape[0]

    @property
    def eps(self) -> int:
        return self.statistics.eps

    def is_real(self, tol=STRUCT_TOL) -> bool:
        return bool(np.all(np.abs(self.A.imag) <= tol) and np.all(np.abs(self.B.imag) <= tol))

    def to_dict(self) -> dict:
        return {
            "statistics": self.statistics.value,
            "n": self.n_sites,
            "A": complex_matrix_to_json(self.A),
            "B": complex_matrix_to_json(self.B),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "QuadraticHamiltonian":
        try:
            n = int(doc["n"])
            A = complex_matrix_from_json(doc["A"])
            B = complex_matrix_from_json(doc["B"])
            stats = Statistics.parse(doc["statistics"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"malformed Hamiltonian document: {exc}") from exc
        if A.shape != (n, n) or B.shape != (n, n):
            raise ParseError(f"matrices must be {n}x{n}")
        return cls(A, B, stats)


def signature_metric(n_sites: int, statistics) -> np.ndarray:
    """Diagonal of eta: ones, then eps * ones."""
    eps = Statistics.parse(statistics).eps
    return np.concatenate([np.ones(n_sites), eps * np.ones(n_sites)])


def _raw_m(h: QuadraticHamiltonian) -> np.ndarray:
    eps = h.eps
    A, B = h.A, h.B
    return np.block([[A, B], [-eps * B.conj(), -eps * A.conj()]])


def validate(h: QuadraticHamiltonian, tol: float = STRUCT_TOL) -> None:
    """Raise a :class:`ValidationError` subclass unless ``h`` is physical."""
    A, B, eps = h.A, h.B, h.eps
    if np.max(np.abs(A - A.conj().T)) > tol:
        raise NotHermitian("A is not Hermitian")
    if np.max(np.abs(B.T + eps * B)) > tol:
        kind = "antisymmetric" if eps == 1 else "symmetric"
        raise AnomalousSymmetryViolated(f"B must be {kind}")
    if eps == -1:
        m = _raw_m(h)
        w = np.linalg.eigvalsh(0.5 * (m + m.conj().T))
        lowest = w[0]
        # a singular M is not positive-definite, whatever the rounding says
        if lowest <= tol * max(1.0, abs(w[-1])):
            raise BosonicMNotPositiveDefinite(f"smallest eigenvalue of M is {lowest:.3g}")


def assemble_m(h: QuadraticHamiltonian) -> np.ndarray:
    validate(h)
    return _raw_m(h)


@dataclass(frozen=True)
class CouplingGraph:
    n_sites: int
    edges: frozenset = field(default_factory=frozenset)
    access: frozenset = field(default_factory=lambda: frozenset({1}))

    def __post_init__(self):
        if self.n_sites < 1:
            raise ValueError("graph needs at least one site")
        edges = frozenset(tuple(sorted(e)) for e in self.edges)
        for i, j in edges:
            if i == j:
                raise ValueError(f"self loop at {i}")
            if not (1 <= i <= self.n_sites and 1 <= j <= self.n_sites):
                raise ValueError(f"edge ({i}, {j}) out of range")
        access = frozenset(int(c) for c in self.access)
        if not access:
            raise ValueError("access set must be non-empty")
        if any(not 1 <= c <= self.n_sites for c in access):
            raise ValueError("access site out of range")
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "access", access)

    def neighbors(self, v: int) -> list[int]:
        return sorted({j for i, j in self.edges if i == v} | {i for i, j in self.edges if j == v})

    def with_access(self, access) -> "CouplingGraph":
        return CouplingGraph(self.n_sites, self.edges, frozenset(access))

    def adjacency_masks(self) -> np.ndarray:
        """Bit ``j-1`` of entry ``i-1`` is set when sites i and j are coupled."""
        adj = np.zeros(self.n_sites, dtype=np.int64)
        for i, j in self.edges:
            adj[i - 1] |= 1 << (j - 1)
            adj[j - 1] |= 1 << (i - 1)
        return adj

    def to_dict(self) -> dict:
        return {
            "n": self.n_sites,
            "edges": [list(e) for e in sorted(self.edges)],
            "access": sorted(self.access),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "CouplingGraph":
        try:
            return cls(int(doc["n"]), frozenset(tuple(e) for e in doc["edges"]), frozenset(doc["access"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"malformed graph document: {exc}") from exc


def path_graph(n: int) -> CouplingGraph:
    return CouplingGraph(n, frozenset((i, i + 1) for i in range(1, n)))


def support_graph(h: QuadraticHamiltonian, zero_tol: float = ZERO_TOL) -> CouplingGraph:
    mask = (np.abs(h.A) > zero_tol) | (np.abs(h.B) > zero_tol)
    n = h.n_sites
    edges = {(i + 1, j + 1) for i in range(n) for j in range(i + 1, n) if mask[i, j] or mask[j, i]}
    return CouplingGraph(n, frozenset(edges), frozenset({1}))


def is_chain(g: CouplingGraph) -> bool:
    return g.edges == path_graph(g.n_sites).edges


# ------------------------------------------------------------------ JSON helpers

def complex_to_json(z) -> dict:
    z = complex(z)
    return {"re": z.real, "im": z.imag}


def complex_from_json(d) -> complex:
    if isinstance(d, (int, float)):
        return complex(d)
    return complex(float(d["re"]), float(d["im"]))


def complex_matrix_to_json(m) -> list:
    return [[complex_to_json(z) for z in row] for row in np.asarray(m)]


def complex_matrix_from_json(rows) -> np.ndarray:
    return np.array([[complex_from_json(z) for z in row] for row in rows], dtype=np.complex128)


def dumps(doc) -> str:
    return json.dumps(doc, indent=1, sort_keys=True)


def load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc
