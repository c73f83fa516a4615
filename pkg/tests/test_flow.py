import json
import math

import numpy as np
import pytest

from sloccflow.canonical import (
    four_qubit_family,
    four_qubit_family_parts,
    gabcd_span_distance,
)
from sloccflow.errors import Divergent, NotConverged, ShapeMismatch
from sloccflow.flow import (
    FlowConfig,
    flow_step,
    flow_to_critical,
    gradient_norm,
    one_param_limit,
    slocc_distance,
    stratum_label,
)
from sloccflow.momentum import momentum, mu_norm_sq, psi
from sloccflow.statespace import (
    LocalOperator,
    PureState,
    apply_local,
    bosonic,
    distinguishable,
    normalize,
    random_state,
)

from conftest import qubits, random_special_linear


def perturbed_w(w3, g=None):
    g = np.diag([2.0, 0.5]) if g is None else g
    ops = [LocalOperator(0, g), LocalOperator(1, np.eye(2)), LocalOperator(2, np.eye(2))]
    return normalize(apply_local(ops, w3))


class TestFlowStep:
    def test_critical_state_fixed(self, w3):
        out = flow_step(w3, 0.07)
        assert out.overlap_distance(w3) < 1e-12

    def test_zero_momentum_fixed(self, ghz3):
        out = flow_step(ghz3, 0.07)
        assert out.overlap_distance(ghz3) < 1e-14

    def test_descent(self):
        v = qubits([2, 0, 0, 0, 0, 0, 0, 1], 3)
        assert mu_norm_sq(flow_step(v, 0.1)) < mu_norm_sq(v)

    def test_orbit_confinement(self, rng):
        # The step must equal applying explicit unit-determinant factors.
        v = random_state(distinguishable(3, 2), rng)
        step = 0.05
        factors = []
        for m in momentum(v).coadjoint_matrices():
            vals, vecs = np.linalg.eigh(m)
            factor = (vecs * np.exp(-step * vals)) @ vecs.conj().T
            assert abs(np.linalg.det(factor) - 1.0) < 1e-12
            factors.append(factor)
        manual = normalize(
            apply_local([LocalOperator(p, f) for p, f in enumerate(factors)], v)
        )
        assert flow_step(v, step).overlap_distance(manual) < 1e-10

    def test_monotone_for_small_steps(self, rng):
        for sector in (distinguishable(3, 2), bosonic(3, 2)):
            v = random_state(sector, rng)
            previous = mu_norm_sq(v)
            for _ in range(60):
                v = flow_step(v, 0.1)
                current = mu_norm_sq(v)
                assert current <= previous + 1e-12
                previous = current


class TestGradientNorm:
    def test_zero_momentum(self, ghz3):
        assert gradient_norm(ghz3) < 1e-14

    def test_w_critical(self, w3):
        assert gradient_norm(w3) < 1e-14

    def test_noncritical(self):
        v = qubits([2, 0, 0, 0, 0, 0, 0, 1], 3)
        assert gradient_norm(v) > 1e-3

    def test_fixed_point_iff_small_gradient(self, rng):
        v = random_state(distinguishable(3, 2), rng)
        moved = flow_step(v, 0.05).overlap_distance(v)
        assert (moved < 1e-9) == (gradient_norm(v) < 1e-8)
        terminal, _ = flow_to_critical(v)
        if gradient_norm(terminal) <= 1e-9:
            assert flow_step(terminal, 0.05).overlap_distance(terminal) < 1e-8


class TestFlowToCritical:
    def test_ghz_class_reaches_zero_level(self):
        v = qubits([2, 0, 0, 0, 0, 0, 0, 1], 3)
        terminal, trace = flow_to_critical(v)
        assert trace.converged
        assert mu_norm_sq(terminal) <= 1e-8

    def test_already_critical(self, w3):
        terminal, trace = flow_to_critical(w3)
        assert trace.converged and len(trace.samples) == 1
        assert terminal.overlap_distance(w3) < 1e-12

    def test_perturbed_w_returns_to_w_orbit(self, w3):
        terminal, trace = flow_to_critical(perturbed_w(w3))
        assert abs(mu_norm_sq(terminal) - 1 / 6) < 1e-6
        for s in psi(terminal).spectra:
            assert np.max(np.abs(s - np.array([1 / 6, -1 / 6]))) < 1e-6

    def test_terminal_rayleigh_consistency(self, rng, w3):
        for state in (perturbed_w(w3), random_state(distinguishable(3, 2), rng)):
            terminal, _ = flow_to_critical(state)
            from sloccflow.momentum import mu_star_apply

            image = mu_star_apply(momentum(terminal), terminal)
            lam = float(np.vdot(terminal.amplitudes, image).real)
            assert abs(lam - mu_norm_sq(terminal)) < 1e-8

    def test_trace_monotone(self, w3):
        _, trace = flow_to_critical(perturbed_w(w3))
        values = [m for _, m, _ in trace.samples]
        assert all(b <= a + 1e-12 for a, b in zip(values, values[1:]))

    def test_not_converged(self, w3):
        config = FlowConfig(max_iterations=3)
        with pytest.raises(NotConverged) as excinfo:
            flow_to_critical(perturbed_w(w3), config)
        assert excinfo.value.trace is not None
        assert not excinfo.value.trace.converged


class TestSloccDistance:
    def test_w(self, w3):
        assert abs(slocc_distance(w3) - math.sqrt(1 / 6)) < 1e-9

    def test_biseparable(self, b1_3):
        assert abs(slocc_distance(b1_3) - math.sqrt(1 / 2)) < 1e-9

    @pytest.mark.parametrize("N,k", [(2, 1), (3, 1), (3, 3), (4, 2)])
    def test_bipartite_formula(self, N, k):
        sector = distinguishable(2, N)
        amps = np.zeros(N * N, dtype=complex)
        for i in range(k):
            amps[i * N + i] = 1.0
        v = normalize(PureState(sector, amps))
        expected = math.sqrt(2 * (k * (N - k) ** 2 + k * k * (N - k))) / (N * k)
        assert abs(slocc_distance(v) - expected) < 1e-9

    def test_class_invariance_under_random_slocc(self, rng, w3):
        for _ in range(4):
            ops = [
                LocalOperator(p, random_special_linear(rng, 2)) for p in range(3)
            ]
            moved = normalize(apply_local(ops, w3))
            assert abs(slocc_distance(moved) - math.sqrt(1 / 6)) < 1e-5


class TestStratumLabel:
    def test_ghz_class_zero(self):
        v = qubits([2, 0, 0, 0, 0, 0, 0, 1], 3)
        assert stratum_label(v).is_zero(0.0)

    def test_w_class(self, w3):
        label = stratum_label(perturbed_w(w3))
        for s in label.spectra:
            assert np.max(np.abs(s - np.array([1 / 6, -1 / 6]))) < 1e-6

    def test_separable(self, sep3):
        label = stratum_label(sep3)
        for s in label.spectra:
            assert np.max(np.abs(s - np.array([0.5, -0.5]))) < 1e-12


class TestOneParamLimit:
    def test_l_abc2_limit_hits_span_component(self):
        state = four_qubit_family("L_abc2", (1.0, 1.0, 1.0))
        v_part, _, pattern = four_qubit_family_parts("L_abc2", (1.0, 1.0, 1.0))
        limit, residuals = one_param_limit(
            state, [np.array([s, -s]) for s in pattern]
        )
        target = normalize(PureState(state.sector, v_part))
        assert limit.overlap_distance(target) < 1e-8
        assert residuals[-2] < 1e-8
        assert all(b <= a + 1e-12 for a, b in zip(residuals[:-1], residuals[1:]))

    def test_l_a2b2_limit_in_span(self):
        state = four_qubit_family("L_a2b2", (1.0, 1.0))
        _, _, pattern = four_qubit_family_parts("L_a2b2", (1.0, 1.0))
        limit, residuals = one_param_limit(
            state, [np.array([s, -s]) for s in pattern]
        )
        assert gabcd_span_distance(limit) < 1e-8
        assert residuals[-2] < 1e-8

    def test_fixed_state_unchanged(self):
        # The family's own span component is stabilized by its subgroup.
        v_part, _, pattern = four_qubit_family_parts("L_a2b2", (1.0, 0.7))
        state = normalize(
            PureState(four_qubit_family("L_a2b2", (1.0, 0.7)).sector, v_part)
        )
        limit, _ = one_param_limit(state, [np.array([s, -s]) for s in pattern])
        assert limit.overlap_distance(state) < 1e-10

    def test_divergent(self):
        v = qubits([0, 1, 0, 0], 2)  # |01>: both weights negative below
        with pytest.raises(Divergent):
            one_param_limit(
                v,
                [np.array([-40.0, 40.0]), np.array([40.0, -40.0])],
                t_max=20.0,
                samples=4,
            )

    def test_traceless_required(self, bell):
        with pytest.raises(ShapeMismatch):
            one_param_limit(bell, [np.array([1.0, 0.0]), np.array([0.0, -1.0])])


class TestTraceSerialization:
    def test_json_lines(self, w3):
        _, trace = flow_to_critical(perturbed_w(w3))
        lines = trace.to_json_lines().splitlines()
        assert len(lines) == len(trace.samples)
        first = json.loads(lines[0])
        assert set(first) == {"iteration", "mu_norm_sq", "grad_norm"}
