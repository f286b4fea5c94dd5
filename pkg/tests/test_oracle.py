import math
from dataclasses import replace

import numpy as np
import pytest

from polyrabi.cascade import ModeConfig, StageParams, run_cascade
from polyrabi.oracle import (
    BasisSizeError,
    GridMismatchError,
    TruncatedBasis,
    build_hamiltonian,
    compare,
    evolve,
    verify_Sk,
)
from polyrabi.propagator import (
    PeSeries,
    PropagatorComponents,
    build_T,
    dressed_propagator,
    excitation_probability,
    undress,
)
from polyrabi.terms import mat_vec


class TestBasis:
    def test_dimensions_and_bijection(self):
        b = TruncatedBasis(5)
        assert b.dim == 22
        seen = set()
        for n in range(-5, 6):
            for up in (False, True):
                seen.add(b.index(n, up))
        assert seen == set(range(22))

    def test_out_of_range(self):
        with pytest.raises(IndexError):
            TruncatedBasis(5).index(6, True)


class TestBuildHamiltonian:
    def test_w_too_small(self):
        cfg = ModeConfig(j=1, m=(0, 2), omega=(0.5, 0.5), delta0=1.0)
        with pytest.raises(BasisSizeError):
            build_hamiltonian(cfg, 10)

    def test_diagonal_when_undriven(self):
        cfg = ModeConfig(j=1, m=(0,), omega=(0.0,), delta0=0.5)
        h, basis = build_hamiltonian(cfg, 8)
        assert np.count_nonzero(h - np.diag(np.diag(h))) == 0
        evals = np.sort(np.linalg.eigvalsh(h))
        expect = np.sort(
            np.concatenate(
                [basis.sites - 0.5 * cfg.omega0, basis.sites + 0.5 * cfg.omega0]
            )
        )
        assert np.allclose(evals, expect, atol=1e-14)

    def test_hermitian_exactly(self):
        cfg = ModeConfig(j=1, m=(0, 2), omega=(0.5 + 0.2j, 0.5), delta0=1.0)
        h, _ = build_hamiltonian(cfg, 20)
        assert np.array_equal(h, h.conj().T)

    def test_dressed_splitting_at_resonance(self):
        cfg = ModeConfig(j=1, m=(0,), omega=(0.4,), delta0=0.0)
        h, _ = build_hamiltonian(cfg, 8)
        evals = np.sort(np.linalg.eigvalsh(h))
        gaps = np.round(np.diff(evals), 10)
        # resonant pairs split by |omega| inside each unit lattice step
        assert set(gaps[1:-1]) == {0.4, 0.6}

    def test_negative_shift_modes(self):
        cfg = ModeConfig(j=-1, m=(0, 2), omega=(0.5, 0.5), delta0=2.0)
        h, basis = build_hamiltonian(cfg, 20)
        # counter-rotating mode couples (n, down) -> (n+1, up)
        assert h[basis.index(1, True), basis.index(0, False)] == 0.25
        assert h[basis.index(-1, True), basis.index(0, False)] == 0.25


class TestEvolve:
    def test_initial_state(self):
        cfg = ModeConfig(j=1, m=(0,), omega=(0.5,), delta0=1.0)
        h, basis = build_hamiltonian(cfg, 10)
        run = evolve(h, basis, np.array([0.0, 1.0]))
        assert run.pe.values[0] == pytest.approx(0.0, abs=1e-24)

    def test_undriven_stays_down(self):
        cfg = ModeConfig(j=1, m=(0,), omega=(0.0,), delta0=1.0)
        h, basis = build_hamiltonian(cfg, 10)
        run = evolve(h, basis, np.linspace(0, 20, 50))
        assert np.max(run.pe.values) < 1e-28

    def test_single_mode_matches_closed_form(self):
        cfg = ModeConfig(j=1, m=(0,), omega=(0.5,), delta0=0.0)
        h, basis = build_hamiltonian(cfg, 30)
        taus = np.linspace(0, 4 * math.pi, 200)
        run = evolve(h, basis, taus)
        expect = np.sin(0.25 * taus) ** 2
        assert np.max(np.abs(run.pe.values - expect)) < 1e-10

    def test_norm_conservation(self):
        cfg = ModeConfig(j=1, m=(0, 2), omega=(0.5, 0.5), delta0=1.0)
        h, basis = build_hamiltonian(cfg, 60)
        run = evolve(h, basis, np.linspace(0, 4 * math.pi, 100))
        assert run.norm_defect < 1e-10

    def test_oracle_series_in_unit_interval(self, fig1_oracle):
        assert fig1_oracle.pe.values.min() >= -1e-10
        assert fig1_oracle.pe.values.max() <= 1 + 1e-10

    def test_channel_amplitudes_recombine(self, fig1_oracle):
        # coherent channel sum reproduces the total probability
        run = fig1_oracle
        total = sum(run.shift_amplitude(int(-n)) for n in run.basis.sites)
        assert np.allclose(np.abs(total) ** 2, run.pe.values, atol=1e-20)


class TestVerifySk:
    def test_identity_when_uncoupled(self):
        p = StageParams(k=1, detuning=0.7, chi=0.0, mode_shift=1, dm_next=1)
        rep = verify_Sk(p, 20)
        assert rep.unitarity_defect == pytest.approx(0.0, abs=1e-14)
        assert rep.diag_residual == pytest.approx(0.0, abs=1e-14)

    def test_fig1_stage1(self):
        p = StageParams(k=1, detuning=1.0, chi=0.5, mode_shift=1, dm_next=2)
        rep = verify_Sk(p, 60)
        assert rep.unitarity_defect <= 1e-10
        assert rep.diag_residual <= 1e-10

    def test_random_draws(self):
        rng = np.random.default_rng(13)
        for _ in range(50):
            chi = rng.uniform(0.05, 2.0) * np.exp(1j * rng.uniform(0, 2 * math.pi))
            p = StageParams(
                k=1,
                detuning=float(rng.uniform(-3, 3)),
                chi=complex(chi),
                mode_shift=int(rng.choice([-3, -2, -1, 1, 2, 3])),
                dm_next=1,
            )
            rep = verify_Sk(p, 30)
            assert rep.unitarity_defect <= 1e-10
            assert rep.diag_residual <= 1e-10


class TestCompare:
    def test_self_comparison_zero(self, fig1_oracle):
        rep = compare(fig1_oracle.pe, fig1_oracle.pe)
        assert rep.max_abs == 0.0
        assert rep.rms == 0.0

    def test_grid_mismatch(self):
        a = PeSeries(tau=np.linspace(0, 1, 5), values=np.zeros(5))
        b = PeSeries(tau=np.linspace(0, 2, 5), values=np.zeros(5))
        with pytest.raises(GridMismatchError):
            compare(a, b)

    def test_per_channel(self):
        tau = np.linspace(0, 1, 4)
        a = PeSeries(tau=tau, values=np.zeros(4), channels={1: np.full(4, 0.5)})
        b = PeSeries(
            tau=tau, values=np.ones(4), channels={1: np.full(4, 0.1), 2: np.zeros(4)}
        )
        rep = compare(a, b)
        assert rep.max_abs == 1.0
        assert rep.per_channel == {1: pytest.approx(0.4)}

    def test_discriminates_wrong_frame_sign(self, taus_4pi):
        # flipping the frame-rotation sign must blow up the comparison;
        # this is the mutation the comparator exists to catch
        cfg = ModeConfig(j=1, m=(0, 1, 2), omega=(1 / 7,) * 3, delta0=2.0)
        h, basis = build_hamiltonian(cfg, 120)
        reference = evolve(h, basis, taus_4pi).pe
        cr = run_cascade(cfg)
        good = excitation_probability(undress(cr), taus_4pi)
        good_dev = compare(good, reference).max_abs

        mutated = [replace(p, dm_next=-p.dm_next) for p in cr.stages[:-1]]
        u = dressed_propagator(cr.stages[-1]).u
        for p in reversed(mutated):
            u = mat_vec(build_T(p), u)
        bad = excitation_probability(PropagatorComponents(u=u), taus_4pi)
        bad_dev = compare(bad, reference).max_abs
        assert bad_dev > 10 * good_dev
        assert bad_dev > 0.05
