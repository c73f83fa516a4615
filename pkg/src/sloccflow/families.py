"""Critical-family enumeration for the worked sectors.

Each function returns one record per inequivalent critical family: the most
entangled representative of the family, its polytope distance, Morse index,
and stratum label.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .critical import (
    alpha_star_eigenspaces,
    qubit_spectrum_point,
    qubit_weyl_grid,
    self_consistent_critical,
)
from .flow import FlowConfig, flow_to_critical
from .momentum import SpectrumPoint, momentum, psi
from .morse import morse_index
from .statespace import (
    PureState,
    basis_state,
    bosonic,
    distinguishable,
    fermionic,
    normalize,
    random_state,
)


@dataclass(frozen=True)
class FamilyRecord:
    """One critical family: representative state and its invariants."""

    label: str
    state: PureState
    stratum: SpectrumPoint
    d_value: float
    morse_index: int

    @property
    def lambda_value(self) -> float:
        return self.d_value**2


def _record(label: str, state: PureState, index_tol: float = 1e-8) -> FamilyRecord:
    state = normalize(state)
    return FamilyRecord(
        label=label,
        state=state,
        stratum=psi(state),
        d_value=math.sqrt(max(momentum(state).norm_sq(), 0.0)),
        morse_index=morse_index(state, tol=index_tol),
    )


def bipartite_rank_state(N: int, k: int) -> PureState:
    """Equal-weight rank-``k`` state ``sum_{i<=k} |i,i> / sqrt(k)``."""
    sector = distinguishable(2, N)
    amps = np.zeros(sector.dim, dtype=complex)
    for i in range(k):
        amps[i * N + i] = 1.0
    return normalize(PureState(sector, amps))


def bipartite_families(N: int) -> list[FamilyRecord]:
    """Rank-``k`` critical families of two ``N``-state distinguishable particles."""
    return [_record(f"rank-{k}", bipartite_rank_state(N, k)) for k in range(1, N + 1)]


def boson_pair_state(N: int, k: int) -> PureState:
    """Two-boson rank-``k`` critical state in doubly occupied modes."""
    sector = bosonic(2, N)
    labels = sector.basis_labels()
    amps = np.zeros(sector.dim, dtype=complex)
    for i in range(k):
        occ = tuple(2 if j == i else 0 for j in range(N))
        amps[labels.index(occ)] = 1.0
    return normalize(PureState(sector, amps))


def boson_pair_families(N: int) -> list[FamilyRecord]:
    return [_record(f"rank-{k}", boson_pair_state(N, k)) for k in range(1, N + 1)]


def fermion_pair_state(N: int, k: int) -> PureState:
    """Two-fermion rank-``k`` critical state on consecutive mode pairs."""
    sector = fermionic(2, N)
    labels = sector.basis_labels()
    amps = np.zeros(sector.dim, dtype=complex)
    for i in range(k):
        amps[labels.index((2 * i + 1, 2 * i + 2))] = 1.0
    return normalize(PureState(sector, amps))


def fermion_pair_families(N: int) -> list[FamilyRecord]:
    return [
        _record(f"rank-{k}", fermion_pair_state(N, k)) for k in range(1, N // 2 + 1)
    ]


def fermion_zero_level_empty(N: int, tol: float = 1e-10) -> bool:
    """Whether no two-fermion family reaches the zero momentum level."""
    return all(rec.d_value > tol for rec in fermion_pair_families(N))


def dicke_families(L: int) -> list[FamilyRecord]:
    """Inequivalent critical families of ``L`` two-state bosons.

    Every chamber operator is nondegenerate on the excitation basis, so the
    candidates are exactly the excitation eigenstates; those with chamber
    momentum image (at most half excited) represent the families.
    """
    sector = bosonic(L, 2)
    out = []
    for k in range(L + 1):
        state = basis_state(sector, (L - k, k))
        diag = momentum(state).matrices[0].diagonal().real
        if diag[0] < diag[1] - 1e-12:
            continue  # image below the chamber; equivalent to L-k excitations
        out.append(_record(f"dicke-{k}", state))
    return out


def dicke_rho_eigenvalues(record: FamilyRecord) -> tuple[float, float]:
    """Ordered reduced-density eigenvalues of a Dicke family representative."""
    spectrum = record.stratum.spectra[0]
    return (0.5 + float(spectrum[0]), 0.5 + float(spectrum[1]))


@dataclass(frozen=True)
class QubitScanResult:
    """Outcome of the chamber-grid scan over a distinguishable qubit sector."""

    families: list[FamilyRecord]
    zero_family: FamilyRecord | None
    grid_size: int
    max_multiplicity: int


def scan_qubit_families(
    parties: int,
    max_denominator: int = 12,
    seed: int = 0,
    config: FlowConfig | None = None,
    self_consistency_tol: float = 1e-8,
) -> QubitScanResult:
    """Null-cone family scan for ``parties`` distinguishable qubits.

    Walks the rational chamber grid, enumerates eigenvalue blocks of each
    chamber operator, solves the momentum self-consistency inside every
    feasible block, and groups the surviving critical states by stratum.
    The zero-level family, when present, is located by flowing a seeded
    random state.
    """
    sector = distinguishable(parties, 2)
    grid = qubit_weyl_grid(parties, max_denominator)
    found: dict[tuple[float, ...], FamilyRecord] = {}
    max_multiplicity = 0
    for lambdas in grid:
        alpha = qubit_spectrum_point(sector, lambdas)
        for report in alpha_star_eigenspaces(alpha):
            max_multiplicity = max(max_multiplicity, report.multiplicity)
            states = self_consistent_critical(
                report, tol=self_consistency_tol, seed=seed
            )
            for state in states:
                key = tuple(round(v, 9) for v in lambdas)
                if key not in found:
                    state = normalize(state)
                    # Label with the exact scanned chamber point; the
                    # self-consistency filter already pinned psi to it.
                    found[key] = FamilyRecord(
                        label=f"alpha={key}",
                        state=state,
                        stratum=alpha,
                        d_value=math.sqrt(max(momentum(state).norm_sq(), 0.0)),
                        morse_index=morse_index(state, tol=1e-6),
                    )
    zero_family = None
    rng = np.random.default_rng(seed)
    probe = random_state(sector, rng)
    terminal, _ = flow_to_critical(probe, config)
    if momentum(terminal).norm_sq() < 1e-8:
        zero_family = FamilyRecord(
            label="alpha=0",
            state=terminal,
            stratum=SpectrumPoint(
                sector, tuple(np.zeros(2) for _ in range(parties))
            ),
            d_value=0.0,
            morse_index=0,
        )
    families = sorted(found.values(), key=lambda r: (r.d_value, r.label))
    return QubitScanResult(families, zero_family, len(grid), max_multiplicity)


def qubit_degeneracy_bound(parties: int, max_denominator: int = 12) -> int:
    """Largest chamber-operator eigenspace multiplicity over the nonzero grid."""
    sector = distinguishable(parties, 2)
    worst = 0
    for lambdas in qubit_weyl_grid(parties, max_denominator):
        alpha = qubit_spectrum_point(sector, lambdas)
        for report in alpha_star_eigenspaces(alpha):
            worst = max(worst, report.multiplicity)
    return worst


def ghz_state(parties: int) -> PureState:
    sector = distinguishable(parties, 2)
    amps = np.zeros(sector.dim, dtype=complex)
    amps[0] = amps[-1] = 1.0
    return normalize(PureState(sector, amps))


def w_state(parties: int) -> PureState:
    sector = distinguishable(parties, 2)
    amps = np.zeros(sector.dim, dtype=complex)
    for p in range(parties):
        amps[1 << p] = 1.0
    return normalize(PureState(sector, amps))
