import numpy as np
import pytest

from znnfov import (DivergenceError, EigenPairState, HistoryWindow, SweepFailure,
                    ZnnParams, angle_grid, assemble_system, builtin_schemes,
                    compare_sweeps, constant_flow, get_scheme, hermitian_split,
                    oracle_sweep, startup, state_residual, sweep, tune_eta,
                    znn_step)
from znnfov.schemes import normalize

from conftest import random_complex

S22 = builtin_schemes()["2_2b"]
S45 = builtin_schemes()["4_5a"]
EULER = builtin_schemes()["euler"]


class TestParams:
    def test_mu_defaults_to_three_eta(self):
        p = ZnnParams(tau=1e-3, eta=40.0)
        assert p.mu == 120.0
        assert p.h == 40.0 * 1e-3

    def test_mu_override(self):
        assert ZnnParams(tau=1e-3, eta=40.0, mu=10.0).mu == 10.0

    @pytest.mark.parametrize("kw", [
        dict(tau=0.0, eta=1.0), dict(tau=1e-3, eta=-1.0),
        dict(tau=1e-3, eta=1.0, mu=-1.0),
        dict(tau=1e-3, eta=1.0, t_start=1.0, t_final=0.5),
    ])
    def test_validation(self, kw):
        with pytest.raises(ValueError):
            ZnnParams(**kw)


class TestAngleGrid:
    def test_counts(self):
        assert len(angle_grid(0.001)) == 6283
        assert len(angle_grid(0.01)) == 628
        assert len(angle_grid(0.005)) == 1256
        assert abs(len(angle_grid(0.0001)) - 62833) <= 2

    def test_exact_division(self):
        grid = angle_grid(0.1, 0.0, 1.0)
        assert len(grid) == 10
        assert grid[0] == 0.0
        assert grid[-1] == pytest.approx(0.9)

    def test_half_open(self):
        assert angle_grid(0.5, 0.0, 1.0).tolist() == [0.0, 0.5]


class TestAssembleSystem:
    def test_exact_pair_gives_zero_rhs(self):
        flow = constant_flow(np.diag([3.0, 1.0, 2.0]))
        st = EigenPairState(x=np.array([1.0, 0, 0], complex), lam=3.0 + 0j, t=0.0)
        p, q = assemble_system(flow.value_at(0.0), flow.derivative_at(0.0), st,
                               ZnnParams(tau=1e-3, eta=10.0))
        assert np.all(q == 0)
        np.testing.assert_array_equal(p[:3, 3], [-1, 0, 0])

    def test_scalar_example(self):
        st = EigenPairState(x=np.array([1.0 + 0j]), lam=2.0 + 0j, t=0.0)
        p, q = assemble_system([[2.0]], [[0.0]], st, ZnnParams(tau=1e-3, eta=7.0))
        np.testing.assert_array_equal(p, [[0.0, -1.0], [-1.0, 0.0]])
        np.testing.assert_array_equal(q, [0.0, 0.0])

    def test_matches_matrix_form_bruteforce(self, jordan_flow):
        rng = np.random.default_rng(2)
        params = ZnnParams(tau=1e-3, eta=25.0)
        x = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        x /= np.linalg.norm(x)
        x += 0.01 * (rng.standard_normal(2) + 1j * rng.standard_normal(2))
        st = EigenPairState(x=x, lam=0.48 + 0j, t=0.7)
        a_t = jordan_flow.value_at(0.7)
        a_dot = jordan_flow.derivative_at(0.7)
        p, q = assemble_system(a_t, a_dot, st, params)
        # independent evaluation straight from the block formulas
        eye = np.eye(2)
        p_ref = np.block([[a_t - st.lam * eye, -x[:, None]],
                          [-x.conj()[None, :], np.zeros((1, 1))]])
        q_ref = np.concatenate([
            (-params.eta * (a_t - st.lam * eye) - a_dot) @ x,
            [params.mu / 2.0 * (np.vdot(x, x) - 1.0)],
        ])
        np.testing.assert_allclose(p, p_ref, atol=1e-15)
        np.testing.assert_allclose(q, q_ref, rtol=1e-13, atol=1e-16)

    def test_hermitean_for_real_lambda(self):
        flow = hermitian_split(random_complex(4, 8))
        x = np.ones(4, complex) / 2.0
        st = EigenPairState(x=x, lam=0.3 + 0j, t=1.1)
        p, _ = assemble_system(flow.value_at(1.1), flow.derivative_at(1.1), st,
                               ZnnParams(tau=1e-3, eta=5.0))
        assert np.linalg.norm(p - p.conj().T) <= 1e-13 * np.linalg.norm(p)


class TestStartup:
    def test_window_lengths(self, jordan_flow):
        params = ZnnParams(tau=1e-3, eta=40.0)
        assert len(startup(jordan_flow, S22, params)) == 4
        assert len(startup(jordan_flow, S45, params)) == 9
        assert len(startup(jordan_flow, EULER, params)) == 1

    def test_grid_spacing_and_phases(self, jordan_flow):
        params = ZnnParams(tau=1e-3, eta=40.0)
        win = startup(jordan_flow, S45, params)
        t = np.array([s.t for s in win.states])
        np.testing.assert_allclose(np.diff(t), params.tau, atol=1e-12)
        for a, b in zip(win.states, win.states[1:]):
            ov = np.vdot(a.x, b.x)
            assert ov.real > 0 and abs(ov.imag) <= 1e-12

    def test_stationary_states_identical(self):
        flow = constant_flow(np.diag([3.0, 1.0, 2.0]))
        win = startup(flow, S22, ZnnParams(tau=1e-3, eta=40.0))
        first = win.states[0]
        for st in win.states[1:]:
            np.testing.assert_array_equal(st.x, first.x)
            assert st.lam == first.lam

    def test_startup_residuals_at_oracle_accuracy(self, jordan_flow):
        params = ZnnParams(tau=1e-3, eta=40.0)
        for st in startup(jordan_flow, S22, params).states:
            resid, defect = state_residual(jordan_flow, st)
            assert resid <= 1e-14
            assert defect <= 1e-14


class TestStateResidual:
    def test_exact_pair(self):
        flow = constant_flow(np.diag([2.0, 1.0]))
        st = EigenPairState(x=np.array([1.0, 0], complex), lam=2.0 + 0j, t=0.0)
        resid, defect = state_residual(flow, st)
        assert resid == 0.0 and defect == 0.0

    def test_scaled_vector_norm_defect(self):
        flow = constant_flow(np.diag([2.0, 1.0]))
        st = EigenPairState(x=np.array([2.0, 0], complex), lam=2.0 + 0j, t=0.0)
        _, defect = state_residual(flow, st)
        assert defect == 3.0

    def test_matches_direct_recomputation(self, jordan_flow):
        rng = np.random.default_rng(3)
        x = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        st = EigenPairState(x=x, lam=0.3 + 0.01j, t=0.9)
        resid, defect = state_residual(jordan_flow, st)
        a_t = jordan_flow.value_at(0.9)
        assert resid == pytest.approx(np.linalg.norm(a_t @ x - st.lam * x), rel=1e-14)
        assert defect == pytest.approx(abs(np.vdot(x, x).real - 1), rel=1e-14)


class TestFixedPointAndDecay:
    def test_constant_flow_fixed_point(self):
        flow = constant_flow(np.diag([3.0, 1.0, 2.0]))
        params = ZnnParams(tau=1e-3, eta=50.0, t_final=1.2)
        for scheme in (EULER, S22, S45):
            res = sweep(flow, scheme, params)
            assert np.max(np.abs(res.lambdas - 3.0)) <= 1e-12
            assert np.max(np.abs(np.abs(res.values) - 3.0)) <= 1e-12
            assert res.residuals.max() <= 1e-12

    def test_trig_flow_with_zero_tracked_eigenvalue(self):
        # K = 0 and tracked eigenvalue exactly zero: Adot @ x vanishes, so the
        # exact pair is a fixed point even though the flow varies with t
        flow = hermitian_split(np.diag([0.0, -1.0, -2.0]).astype(complex))
        params = ZnnParams(tau=1e-3, eta=50.0, t_final=1.0)
        res = sweep(flow, S22, params, which="max")
        assert np.max(np.abs(res.lambdas)) <= 1e-12
        assert res.residuals.max() <= 1e-12

    def test_perturbed_lambda_decay_euler(self):
        m = np.diag([3.0, 1.0, 2.0])
        flow = constant_flow(m)
        params = ZnnParams(tau=1e-3, eta=50.0)
        delta = 1e-3
        st = EigenPairState(x=np.array([1.0, 0, 0], complex), lam=3.0 + delta, t=0.0)
        window = HistoryWindow(states=(st,))
        per_step_cap = np.exp(-0.5 * params.h)
        resid = delta
        for _ in range(600):
            new = znn_step(flow, window, EULER, params)
            window = window.advanced(new)
            r_new, _ = state_residual(flow, new)
            if r_new < 1e-12:
                break
            assert r_new <= per_step_cap * resid
            resid = r_new
        assert resid < 1e-10

    def test_perturbed_lambda_decay_multistep_cumulative(self):
        flow = constant_flow(np.diag([3.0, 1.0, 2.0]))
        params = ZnnParams(tau=1e-3, eta=50.0)
        delta = 1e-3
        states = tuple(
            EigenPairState(x=np.array([1.0, 0, 0], complex), lam=3.0 + delta,
                           t=k * params.tau)
            for k in range(S22.n_history)
        )
        window = HistoryWindow(states=states)
        r0 = delta
        for k in range(1, 500):
            new = znn_step(flow, window, S22, params)
            window = window.advanced(new)
            r, _ = state_residual(flow, new)
            if r < 1e-12:
                break
            assert r <= 3.0 * r0 * np.exp(-0.5 * params.h * k)


class TestZnnStep:
    def test_euler_jordan_tracks_half(self, jordan_flow):
        params = ZnnParams(tau=1e-4, eta=1e3, t_final=1.0)
        res = sweep(jordan_flow, EULER, params)
        tail = res.lambdas[res.startup_count:]
        assert np.max(np.abs(tail - 0.5)) <= 1e-6

    def test_window_length_enforced(self, jordan_flow):
        params = ZnnParams(tau=1e-3, eta=40.0)
        window = startup(jordan_flow, S22, params)
        with pytest.raises(ValueError, match="needs"):
            znn_step(jordan_flow, window, S45, params)

    def test_matches_code_transcription(self):
        # straight-line transcription of the reference implementation's five
        # code lines (decay constants folded into the right-hand side and the
        # update negated); must agree with the solve-then-combine convention
        flow = hermitian_split(random_complex(3, 17))
        params = ZnnParams(tau=1e-3, eta=60.0)
        window = startup(flow, S22, params)
        ours = znn_step(flow, window, S22, params)

        zz = window.as_matrix()
        n = 3
        t_k = window.newest.t
        ath = flow.value_at(t_k)
        adot = flow.derivative_at(t_k)
        ze = zz[n, 0]
        zs = zz[:n, 0]
        al = ath - ze * np.eye(n)
        p = np.block([[al, -zs[:, None]], [-zs.conj()[None, :], np.zeros((1, 1))]])
        q = S22.beta * params.tau * np.concatenate([
            (params.eta * al + adot) @ zs,
            [-1.5 * params.eta * (np.vdot(zs, zs) - 1.0)],
        ])
        x_sol = np.linalg.solve(p, q)
        znew = -(x_sol + zz @ np.asarray(S22.polyrest, dtype=complex))
        np.testing.assert_allclose(ours.x, znew[:n], rtol=1e-12, atol=1e-15)
        assert abs(ours.lam - znew[n]) <= 1e-12 * max(1.0, abs(znew[n]))

    def test_divergence_error(self):
        flow = constant_flow(np.diag([3.0, 1.0]))
        params = ZnnParams(tau=1e-2, eta=300.0)  # h = 3: contraction lost
        x = np.array([1.0, 0.15], complex)
        x /= np.linalg.norm(x)
        st = EigenPairState(x=x, lam=3.4 + 0j, t=0.0)
        window = HistoryWindow(states=(st,))
        with pytest.raises(DivergenceError):
            for _ in range(50):
                new = znn_step(flow, window, EULER, params)
                window = window.advanced(new)


class TestSweep:
    def test_point_counts(self, jordan_flow):
        res = sweep(jordan_flow, S45, ZnnParams(tau=1e-3, eta=40.0))
        assert len(res) == 6283
        assert res.startup_count == 9
        assert np.all(np.diff(res.t) > 0)

    def test_jordan_boundary_circle(self, jordan_flow):
        tuned = tune_eta(jordan_flow, S45, 1e-3, (0.03, 0.06))
        res = tuned.result
        assert np.max(np.abs(np.abs(res.values) - 0.5)) <= 1e-6
        assert res.residuals.max() <= 1e-6

    def test_matches_iterated_znn_step(self):
        flow = hermitian_split(random_complex(3, 5))
        params = ZnnParams(tau=1e-3, eta=60.0, t_final=0.12)
        res = sweep(flow, S22, params)
        window = startup(flow, S22, params)
        states = list(window.states)
        for _ in range(len(res) - S22.n_history):
            new = znn_step(flow, window, S22, params)
            states.append(new)
            window = window.advanced(new)
        vals = np.array([np.vdot(s.x, flow.a @ s.x) for s in states])
        lams = np.array([s.lam for s in states])
        np.testing.assert_allclose(vals, res.values, rtol=5e-13, atol=1e-15)
        np.testing.assert_allclose(lams, res.lambdas, rtol=5e-13, atol=1e-15)

    def test_determinism_bitwise(self):
        flow = hermitian_split(random_complex(4, 21))
        params = ZnnParams(tau=1e-3, eta=55.0, t_final=1.0)
        r1 = sweep(flow, S45, params)
        r2 = sweep(flow, S45, params)
        assert np.array_equal(r1.values, r2.values)
        assert np.array_equal(r1.lambdas, r2.lambdas)
        assert np.array_equal(r1.residuals, r2.residuals)
        assert np.array_equal(r1.norm_defects, r2.norm_defects)

    def test_divergence_carries_partial_and_index(self, jordan_flow):
        params = ZnnParams(tau=1e-2, eta=300.0)  # h = 3 diverges quickly
        with pytest.raises(SweepFailure) as err:
            sweep(jordan_flow, EULER, params)
        assert err.value.index >= 1
        assert len(err.value.partial) == err.value.index

    def test_restart_reseeds_and_completes(self, jordan_flow):
        params = ZnnParams(tau=1e-2, eta=300.0, restart_threshold=1e-4)
        res = sweep(jordan_flow, EULER, params)
        assert len(res) == 628
        assert len(res.step_failures) > 0
        assert res.residuals.max() <= 1e-4 + 1e-10

    def test_unstable_scheme_rejected(self, jordan_flow):
        bad = normalize([1.0, -2.0, 1.0], name="bad")
        with pytest.raises(Exception, match="refusing"):
            sweep(jordan_flow, bad, ZnnParams(tau=1e-2, eta=10.0))

    def test_grid_too_coarse(self, jordan_flow):
        with pytest.raises(ValueError, match="startup"):
            sweep(jordan_flow, S45, ZnnParams(tau=1.0, eta=0.05))

    def test_min_tracking(self, jordan_flow):
        params = ZnnParams(tau=1e-3, eta=45.0)
        res = sweep(jordan_flow, S45, params, which="min")
        assert np.max(np.abs(res.lambdas.real + 0.5)) <= 1e-6

    def test_accuracy_improves_with_smaller_tau(self, jordan_flow):
        errors = []
        for tau, h_range in ((5e-3, (0.085, 0.093)), (1e-3, (0.085, 0.093)),
                             (1e-4, (0.085, 0.093))):
            tuned = tune_eta(jordan_flow, S22, tau, h_range, coarse=5, refine=4)
            err = np.mean(np.abs(np.abs(tuned.result.values) - 0.5))
            errors.append(err)
        assert errors[0] > errors[1] > errors[2]
