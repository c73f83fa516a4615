"""Pure states of distinguishable qudits, bosons, and fermions.

Basis conventions (these fix the on-disk amplitude ordering):

* distinguishable -- product kets ``|i1 ... iL>`` in lexicographic order with
  the first party most significant, digits ``0..N-1``;
* bosonic -- occupation vectors ``(n1, ..., nN)`` with ``sum nj = L``, in
  lexicographically decreasing order, stored as the orthonormal symmetrized
  basis vectors;
* fermionic -- L-element subsets of ``{1..N}`` in lexicographic order, stored
  as orthonormal wedge vectors with ascending-index sign convention.

Amplitudes of identical-particle states are coefficients in the orthonormal
sector basis, so inner products are plain vector dot products in every sector.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import (
    IndexOutOfRange,
    SectorMismatch,
    ShapeMismatch,
    ZeroState,
)

ZERO_TOL = 1e-14

DISTINGUISHABLE = "distinguishable"
BOSONIC = "bosonic"
FERMIONIC = "fermionic"
_KINDS = (DISTINGUISHABLE, BOSONIC, FERMIONIC)


def _frozen(array: np.ndarray, dtype=complex) -> np.ndarray:
    out = np.array(array, dtype=dtype)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class Sector:
    """Particle content of a Hilbert space: kind, party count, local dimension."""

    kind: str
    parties: int
    local_dim: int

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown sector kind {self.kind!r}")
        # parties == 0 is admitted only as the fermionic scalar line, the
        # codomain of the top-form Hodge dual.
        min_parties = 0 if self.kind == FERMIONIC else 1
        if self.parties < min_parties or self.local_dim < 1:
            raise ValueError("parties and local_dim must be positive")
        if self.kind == FERMIONIC and self.local_dim < self.parties:
            raise ValueError("fermionic sector requires local_dim >= parties")

    @property
    def identical(self) -> bool:
        return self.kind != DISTINGUISHABLE

    @property
    def dim(self) -> int:
        L, N = self.parties, self.local_dim
        if self.kind == DISTINGUISHABLE:
            return N**L
        if self.kind == BOSONIC:
            return math.comb(N + L - 1, L)
        return math.comb(N, L)

    def basis_labels(self) -> tuple[tuple[int, ...], ...]:
        return _basis_labels(self)

    def __str__(self) -> str:
        return f"{self.kind}(L={self.parties}, N={self.local_dim})"


def distinguishable(parties: int, local_dim: int) -> Sector:
    return Sector(DISTINGUISHABLE, parties, local_dim)


def bosonic(parties: int, local_dim: int) -> Sector:
    return Sector(BOSONIC, parties, local_dim)


def fermionic(parties: int, local_dim: int) -> Sector:
    return Sector(FERMIONIC, parties, local_dim)


@lru_cache(maxsize=None)
def _basis_labels(sector: Sector) -> tuple[tuple[int, ...], ...]:
    L, N = sector.parties, sector.local_dim
    if sector.kind == DISTINGUISHABLE:
        return tuple(itertools.product(range(N), repeat=L))
    if sector.kind == BOSONIC:
        occupations = [
            occ
            for occ in itertools.product(range(L + 1), repeat=N)
            if sum(occ) == L
        ]
        return tuple(sorted(occupations, reverse=True))
    return tuple(itertools.combinations(range(1, N + 1), L))


@lru_cache(maxsize=None)
def _basis_index(sector: Sector) -> dict[tuple[int, ...], int]:
    return {label: i for i, label in enumerate(_basis_labels(sector))}


def _permutation_sign(perm: tuple[int, ...]) -> int:
    sign = 1
    for i in range(len(perm)):
        for j in range(i + 1, len(perm)):
            if perm[i] > perm[j]:
                sign = -sign
    return sign


@lru_cache(maxsize=None)
def embedding_isometry(sector: Sector) -> np.ndarray:
    """Isometry from the sector basis into the full tensor power ``(C^N)^L``.

    Columns are the orthonormal (anti)symmetrized basis vectors; for
    distinguishable particles this is the identity.
    """
    L, N = sector.parties, sector.local_dim
    full = N**L
    if sector.kind == DISTINGUISHABLE:
        return _frozen(np.eye(full))
    labels = _basis_labels(sector)
    V = np.zeros((full, len(labels)), dtype=complex)
    radix = N ** np.arange(L - 1, -1, -1)
    if sector.kind == BOSONIC:
        for col, occ in enumerate(labels):
            word = tuple(
                letter for letter, count in enumerate(occ) for _ in range(count)
            )
            perms = set(itertools.permutations(word))
            coeff = 1.0 / math.sqrt(len(perms))
            for perm in perms:
                V[int(np.dot(perm, radix)), col] = coeff
    else:
        coeff = 1.0 / math.sqrt(math.factorial(L))
        for col, subset in enumerate(labels):
            for perm in itertools.permutations(range(L)):
                digits = tuple(subset[p] - 1 for p in perm)
                V[int(np.dot(digits, radix)), col] += (
                    _permutation_sign(perm) * coeff
                )
    V.setflags(write=False)
    return V


@dataclass(frozen=True)
class PureState:
    """Normalized-or-not amplitude vector over a sector's canonical basis."""

    sector: Sector
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if amps.shape[0] != self.sector.dim:
            raise ShapeMismatch(
                f"expected {self.sector.dim} amplitudes for {self.sector}, "
                f"got {amps.shape[0]}"
            )
        object.__setattr__(self, "amplitudes", _frozen(amps))

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def to_tensor(self) -> np.ndarray:
        """Amplitudes embedded in the full tensor power, shaped ``(N,)*L``."""
        L, N = self.sector.parties, self.sector.local_dim
        flat = embedding_isometry(self.sector) @ self.amplitudes
        return flat.reshape((N,) * L)

    def overlap_distance(self, other: "PureState") -> float:
        """Projective distance ``min_phase ||a - e^{i t} b||`` between unit states.

        Computed from the phase-aligned difference vector, which stays
        accurate far below the rounding floor of ``2 - 2|<a|b>|``.
        """
        if self.sector != other.sector:
            raise SectorMismatch("states live in different sectors")
        ov = np.vdot(other.amplitudes, self.amplitudes)
        phase = ov / abs(ov) if abs(ov) > 0 else 1.0
        return float(np.linalg.norm(self.amplitudes - phase * other.amplitudes))

    def to_json(self) -> dict:
        return {
            "sector": self.sector.kind,
            "parties": self.sector.parties,
            "local_dim": self.sector.local_dim,
            "amplitudes": [[float(a.real), float(a.imag)] for a in self.amplitudes],
        }


@dataclass(frozen=True)
class LocalOperator:
    """Single-party operator; the party index is ignored for identical particles."""

    party: int
    matrix: np.ndarray

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=complex)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ShapeMismatch("local operator must be a square matrix")
        object.__setattr__(self, "matrix", _frozen(mat))


def state_from_tensor(sector: Sector, tensor: np.ndarray) -> PureState:
    """Project a full tensor back onto the sector basis."""
    flat = np.asarray(tensor, dtype=complex).reshape(-1)
    if flat.shape[0] != sector.local_dim**sector.parties:
        raise ShapeMismatch("tensor size does not match the sector")
    return PureState(sector, embedding_isometry(sector).conj().T @ flat)


def normalize(state: PureState) -> PureState:
    """Scale to unit norm; raises ZeroState below the zero tolerance."""
    norm = state.norm
    if norm < ZERO_TOL:
        raise ZeroState("cannot normalize a (numerically) zero state")
    return PureState(state.sector, state.amplitudes / norm)


def inner(a: PureState, b: PureState) -> complex:
    """Hermitian inner product, conjugate-linear in the first argument."""
    if a.sector != b.sector:
        raise SectorMismatch(f"sectors differ: {a.sector} vs {b.sector}")
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def _tensor_apply(tensor: np.ndarray, matrices: list[np.ndarray]) -> np.ndarray:
    """Apply one matrix per tensor axis."""
    out = tensor
    L = tensor.ndim
    for axis, mat in enumerate(matrices):
        out = np.tensordot(mat, out, axes=([1], [axis]))
        out = np.moveaxis(out, 0, axis)
    return out


def apply_local(ops: list[LocalOperator] | LocalOperator, state: PureState) -> PureState:
    """Act with local operators: one per party, or one applied diagonally.

    The output is re-expressed in the sector basis; symmetric and
    antisymmetric subspaces are invariant under diagonal actions, so no
    component is lost for identical particles.
    """
    if isinstance(ops, LocalOperator):
        ops = [ops]
    sector = state.sector
    L, N = sector.parties, sector.local_dim
    for op in ops:
        if op.matrix.shape != (N, N):
            raise ShapeMismatch(
                f"operator shape {op.matrix.shape} does not match local dim {N}"
            )
    if sector.identical:
        if len(ops) != 1:
            raise ShapeMismatch(
                "identical particles take exactly one diagonal operator"
            )
        matrices = [ops[0].matrix] * L
    else:
        if len(ops) != L or sorted(op.party for op in ops) != list(range(L)):
            raise ShapeMismatch(
                f"need exactly one operator per party 0..{L - 1}"
            )
        matrices = [op.matrix for op in sorted(ops, key=lambda o: o.party)]
    out = _tensor_apply(state.to_tensor(), matrices)
    return state_from_tensor(sector, out)


def dicke(k: int, parties: int) -> PureState:
    """Symmetric two-state bosonic state with exactly ``k`` excitations."""
    if not 0 <= k <= parties:
        raise IndexOutOfRange(f"need 0 <= k <= {parties}, got {k}")
    sector = bosonic(parties, 2)
    amps = np.zeros(sector.dim, dtype=complex)
    amps[_basis_index(sector)[(parties - k, k)]] = 1.0
    return PureState(sector, amps)


def hodge_dual(state: PureState) -> PureState:
    """Map an L-fermion state to its (N-L)-fermion complement state.

    Basis-level linear map: each occupied subset goes to its complement with
    the sign of the permutation that concatenates subset and complement in
    ascending order.  Applying it twice returns the original up to global sign.
    """
    sector = state.sector
    if sector.kind != FERMIONIC:
        raise SectorMismatch("hodge_dual requires a fermionic sector")
    N = sector.local_dim
    dual_sector = fermionic(N - sector.parties, N)
    index = _basis_index(dual_sector)
    amps = np.zeros(dual_sector.dim, dtype=complex)
    everything = set(range(1, N + 1))
    for i, subset in enumerate(sector.basis_labels()):
        comp = tuple(sorted(everything - set(subset)))
        sign = _permutation_sign(subset + comp)
        amps[index[comp]] += sign * state.amplitudes[i]
    return PureState(dual_sector, amps)


def random_state(sector: Sector, rng: np.random.Generator) -> PureState:
    """Gaussian-amplitude (Haar on the sphere) normalized random state."""
    amps = rng.standard_normal(sector.dim) + 1j * rng.standard_normal(sector.dim)
    return normalize(PureState(sector, amps))


def state_from_json(document: dict | str) -> PureState:
    """Load a state from the JSON document format; normalizes on load."""
    if isinstance(document, str):
        document = json.loads(document)
    try:
        sector = Sector(
            str(document["sector"]),
            int(document["parties"]),
            int(document["local_dim"]),
        )
        pairs = document["amplitudes"]
        amps = np.array([complex(re, im) for re, im in pairs], dtype=complex)
    except (KeyError, TypeError, ValueError) as exc:
        raise ShapeMismatch(f"malformed state document: {exc}") from exc
    return normalize(PureState(sector, amps))


def basis_state(sector: Sector, label: tuple[int, ...]) -> PureState:
    """Unit amplitude on one canonical basis element."""
    index = _basis_index(sector)
    if tuple(label) not in index:
        raise IndexOutOfRange(f"{label} is not a basis label of {sector}")
    amps = np.zeros(sector.dim, dtype=complex)
    amps[index[tuple(label)]] = 1.0
    return PureState(sector, amps)
