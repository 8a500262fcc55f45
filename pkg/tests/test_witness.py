import math

import numpy as np
import pytest

from spinstar import model, propagate, witness
from spinstar.errors import BracketError, DomainError, EngineError
from spinstar.model import (
    ModelConfig,
    SitesConstant,
    SiteTimeExponential,
    TimeExponential,
    TimePolynomial,
)
from spinstar.propagate import TimeGrid
from spinstar.witness import Verdict, detect_revival, entanglement_trace

rng = np.random.default_rng(5)


def synthetic_trace(values):
    values = np.asarray(values, dtype=float)
    return witness.EntanglementTrace(np.arange(values.size, dtype=float),
                                     values, -values, "synthetic")


class TestNegativity:
    def test_bell(self):
        e, lam = witness.negativity(propagate.bell_state())
        assert abs(e - 0.5) < 1e-12 and abs(lam + 0.5) < 1e-12

    def test_product_state(self):
        rho = np.diag([1.0, 0, 0, 0]).astype(complex)
        e, lam = witness.negativity(rho)
        assert e == 0.0 and lam >= -1e-12

    def test_quarter_period_value(self):
        # analytic state at Omega = pi/2 and zero temperature for any n:
        # E matches the closed-form eigenvalue branch
        cfg = ModelConfig(n=3, alpha=1.0, coupling=SitesConstant((1,) * 3), p=1.0)
        t = (math.pi / 2) / math.sqrt(3)
        e, _ = witness.negativity(propagate.closed_form_rho_as(cfg, t))
        lam = propagate.lambda_closed_form(cfg, t)
        assert abs(e - max(0.0, -lam)) < 1e-12


class TestTraceInvariants:
    def test_range_and_initial_value(self):
        cfg = ModelConfig(n=4, alpha=1.0, coupling=SitesConstant((1,) * 4), p=0.6)
        grid = TimeGrid(0.0, 5.0, 101, 1)
        for engine in ("fast", "oracle", "closed_form"):
            tr = entanglement_trace(cfg, grid, engine)
            assert abs(tr.entanglement[0] - 0.5) <= 1e-10
            assert np.all(tr.entanglement >= -1e-12)
            assert np.all(tr.entanglement <= 0.5 + 1e-10)
            assert np.allclose(tr.entanglement, np.maximum(0.0, -tr.lambda_min))

    def test_zero_coupling_constant_half(self):
        cfg = ModelConfig(n=3, alpha=1.0, coupling=SitesConstant((0, 0, 0)), p=0.6)
        tr = entanglement_trace(cfg, TimeGrid(0.0, 5.0, 21, 1), "fast")
        assert np.abs(tr.entanglement - 0.5).max() == 0.0
        assert not detect_revival(tr).fired

    def test_unknown_engine(self):
        cfg = ModelConfig(n=2, alpha=1.0, coupling=SitesConstant((1, 1)), p=0.6)
        with pytest.raises(EngineError):
            entanglement_trace(cfg, TimeGrid(0.0, 1.0, 5, 1), "magic")

    def test_closed_form_gate(self):
        cfg = ModelConfig(n=2, alpha=1.0, coupling=SiteTimeExponential(0.5), p=0.6)
        with pytest.raises(EngineError):
            entanglement_trace(cfg, TimeGrid(0.0, 1.0, 5, 1), "closed_form")


class TestDetectRevival:
    def test_monotone_trace(self):
        rep = detect_revival(synthetic_trace(np.linspace(0.5, 0.1, 30)))
        assert rep.verdict is Verdict.NO_REVIVAL_DETECTED
        assert rep.revivals == [] and rep.total_revival == 0.0

    def test_single_revival_magnitude(self):
        values = np.concatenate([np.linspace(0.5, 0.2, 10),
                                 np.linspace(0.2, 0.34, 8)[1:]])
        rep = detect_revival(synthetic_trace(values))
        assert rep.fired and len(rep.revivals) == 1
        ev = rep.revivals[0]
        assert ev.t_min == 9.0 and abs(ev.magnitude - 0.14) < 1e-12

    def test_two_revivals(self):
        values = np.concatenate([
            np.linspace(0.5, 0.2, 6), np.linspace(0.2, 0.3, 5)[1:],
            np.linspace(0.3, 0.1, 6)[1:], np.linspace(0.1, 0.25, 5)[1:],
        ])
        rep = detect_revival(synthetic_trace(values))
        assert len(rep.revivals) == 2

    def test_sub_tolerance_rise_ignored(self):
        values = np.concatenate([np.linspace(0.5, 0.2, 10),
                                 0.2 + np.linspace(0.0, 5e-8, 5)[1:]])
        rep = detect_revival(synthetic_trace(values), tol=1e-7)
        assert not rep.fired

    def test_monotone_in_tolerance(self):
        for _ in range(20):
            walk = np.abs(np.cumsum(rng.normal(size=60))) / 20 + 0.05
            trace = synthetic_trace(np.minimum(walk, 0.5))
            counts = [len(detect_revival(trace, tol).revivals)
                      for tol in (1e-7, 1e-3, 1e-2, 1e-1)]
            assert all(a >= b for a, b in zip(counts, counts[1:]))

    def test_needs_three_samples(self):
        with pytest.raises(DomainError):
            detect_revival(synthetic_trace([0.5, 0.4]))


class TestCaseVerdicts:
    def test_case1_always_fires(self):
        for n, p in [(2, 0.5), (4, 0.6), (7, 1.0)]:
            g = rng.normal(size=n) + 1j * rng.normal(size=n)
            g = tuple(g / np.linalg.norm(g) * rng.uniform(0.5, 2.0))
            cfg = ModelConfig(n=n, alpha=1.0, coupling=SitesConstant(g), p=p)
            period = 2 * math.pi / model.coupling_norm_energy(cfg, 0.0)
            tr = entanglement_trace(cfg, TimeGrid(0.0, 1.2 * period, 301, 1), "fast")
            assert detect_revival(tr).fired

    def test_case2_exemplar_rates(self):
        grid = TimeGrid(0.0, 40.0, 1601, 2)
        slow = ModelConfig(n=6, alpha=1.0, coupling=TimeExponential(0.7), p=0.6)
        fast_decay = ModelConfig(n=6, alpha=1.0, coupling=TimeExponential(2.7), p=0.6)
        assert witness.witness_verdict(slow, grid, engine="fast").fired
        assert not witness.witness_verdict(fast_decay, grid, engine="fast").fired

    def test_case2_polynomial_fires(self):
        cfg = ModelConfig(n=6, alpha=1.0, coupling=TimePolynomial(0.01), p=0.6)
        tr = entanglement_trace(cfg, TimeGrid(0.0, 6.0, 601, 1), "fast")
        assert detect_revival(tr).fired

    def test_verdict_stable_under_grid_refinement(self):
        for gamma, fired in ((0.7, True), (2.7, False)):
            cfg = ModelConfig(n=6, alpha=1.0, coupling=TimeExponential(gamma), p=0.6)
            for samples in (801, 1601):
                tr = entanglement_trace(cfg, TimeGrid(0.0, 40.0, samples, 1),
                                        "closed_form")
                assert detect_revival(tr).fired is fired


class TestFindTransition:
    def test_exponential_threshold(self):
        cfg = ModelConfig(n=6, alpha=1.0, coupling=TimeExponential(1.0), p=0.6)
        grid = TimeGrid(0.0, 40.0, 2001, 1)
        res = witness.find_transition(cfg, "gamma_r", 0.1, 3.0, grid, tol=1e-3,
                                      engine="closed_form", revival_tol=1e-10)
        ref = math.sqrt(6) / math.pi
        assert abs(res.value - ref) / ref < 0.02
        assert res.fired_at_lo and res.orientation == "fires_below"

    def test_deterministic(self):
        cfg = ModelConfig(n=3, alpha=1.0, coupling=SiteTimeExponential(1.0), p=1.0)
        grid = TimeGrid(0.0, 40.0, 801, 4)
        a = witness.find_transition(cfg, "gamma1", 0.05, 4.0, grid, tol=2e-3)
        b = witness.find_transition(cfg, "gamma1", 0.05, 4.0, grid, tol=2e-3)
        assert a.value == b.value and a.evaluations == b.evaluations

    def test_bracket_error(self):
        cfg = ModelConfig(n=6, alpha=1.0, coupling=TimeExponential(1.0), p=0.6)
        grid = TimeGrid(0.0, 30.0, 601, 1)
        with pytest.raises(BracketError):
            witness.find_transition(cfg, "gamma_r", 2.5, 3.5, grid,
                                    engine="closed_form")

    def test_verdict_monotone_over_gamma1(self):
        # scan confirms a single transition inside the bracket
        grid = TimeGrid(0.0, 50.0, 1001, 4)
        cfg = ModelConfig(n=3, alpha=1.0, coupling=SiteTimeExponential(1.0), p=1.0)
        fires = []
        for g1 in np.geomspace(0.05, 4.0, 12):
            c = witness.config_with_parameter(cfg, "gamma1", float(g1))
            fires.append(witness.witness_verdict(c, grid, engine="fast").fired)
        flips = sum(a != b for a, b in zip(fires, fires[1:]))
        assert fires[0] and not fires[-1] and flips == 1

    def test_parameter_family_mismatch(self):
        cfg = ModelConfig(n=3, alpha=1.0, coupling=TimePolynomial(0.5), p=0.6)
        with pytest.raises(DomainError):
            witness.config_with_parameter(cfg, "gamma1", 1.0)

    def test_parameter_swap_on_beta_built_config(self):
        cfg = ModelConfig(n=3, alpha=1.0, coupling=SiteTimeExponential(1.0),
                          beta=math.log(3))
        swapped = witness.config_with_parameter(cfg, "gamma1", 0.4)
        assert swapped.coupling.gamma1 == 0.4 and abs(swapped.p - 0.75) < 1e-15

    def test_inverted_orientation_recorded(self, monkeypatch):
        # none of the physical families fires only at the high end, so the
        # mirrored-orientation path is exercised with a synthetic verdict
        def fake_verdict(config, grid, **kwargs):
            fired = config.coupling.gamma.real > 1.25
            verdict = Verdict.NON_MARKOVIAN if fired else Verdict.NO_REVIVAL_DETECTED
            return witness.WitnessReport(verdict, [], 0.0, 1e-7)

        monkeypatch.setattr(witness, "witness_verdict", fake_verdict)
        cfg = ModelConfig(n=2, alpha=1.0, coupling=TimeExponential(1.0), p=0.6)
        res = witness.find_transition(cfg, "gamma_r", 0.5, 2.0,
                                      TimeGrid(0.0, 1.0, 5, 1), tol=1e-3)
        assert not res.fired_at_lo
        assert res.orientation == "fires_above"
        assert abs(res.value - 1.25) <= 1e-3


class TestTransitionCurve:
    def test_single_cell_reduces_to_find_transition(self):
        grid = TimeGrid(0.0, 40.0, 801, 4)
        cfg = ModelConfig(n=3, alpha=1.0, coupling=SiteTimeExponential(1.0), p=1.0)
        cells = witness.transition_curve([3], [1.0], cfg, "gamma1", 0.05, 4.0,
                                         grid, tol=2e-3)
        direct = witness.find_transition(cfg, "gamma1", 0.05, 4.0, grid, tol=2e-3)
        assert len(cells) == 1
        assert cells[0].result.value == direct.value

    def test_failed_cell_recorded_not_fatal(self):
        grid = TimeGrid(0.0, 30.0, 601, 2)
        cfg = ModelConfig(n=6, alpha=1.0, coupling=TimeExponential(1.0), p=0.6)
        cells = witness.transition_curve([6], [0.6], cfg, "gamma_r", 2.5, 3.5,
                                         grid, engine="closed_form")
        assert cells[0].result is None
        assert "verdict" in cells[0].error
