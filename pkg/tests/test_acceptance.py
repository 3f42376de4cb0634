"""Acceptance suite: one test per release criterion, at the stated
tolerances, printing one PASS/FAIL line each (visible with pytest -s).

Criterion 11 (sweep plotting) belongs to the separate plotter package and
runs in plotter/tests.
"""

import math
import statistics
import time
from contextlib import contextmanager
from dataclasses import replace

import numpy as np
import pytest

import aauc
from aauc.channel import angular_matrix, default_params, make_rng
from aauc.harness import (SweepConfig, derive_seed, generate_scenario,
                          run_sweep, write_sweep_csv)
from aauc.numerics import SaddleProblem, saddle_solve
from aauc.secrecy import (angular_secrecy, build_training_set, fit_lambda,
                          mc_average_secrecy, objective_p2)
from aauc.solvers import (_p5_subproblem, bfom_lipschitz, bfom_solve,
                          closed_form_large_n, large_nk_power_split,
                          p2_piece_values, psi_value, recover_power_split,
                          sco_solve, solve_p5, stack_zw, surrogate_oracles,
                          unstack_zw, upsilon_value)
from conftest import make_random_setup, random_feasible_point


@contextmanager
def criterion(num, label):
    start = time.perf_counter()
    try:
        yield
    except Exception:
        print(f"\ncriterion {num:2d} [{label}]: FAIL "
              f"({time.perf_counter() - start:.1f}s)")
        raise
    print(f"\ncriterion {num:2d} [{label}]: PASS "
          f"({time.perf_counter() - start:.1f}s)")


def test_criterion_01_angular_model_fit():
    with criterion(1, "angular-model fit"):
        t0 = time.perf_counter()
        p = default_params(n_antennas=8, n_users=3, rician_k_db=30.0)
        assert p.pathloss_exp == 2.5
        geom, _ = generate_scenario(1, p)
        j = angular_matrix(geom, p)
        samples = build_training_set(geom, p, make_rng(2718),
                                     n_noise=41, n_per_noise=100,
                                     sigma_e2_dbm_lo=-100.0,
                                     sigma_e2_dbm_hi=-60.0,
                                     r_max=3.0, w_power=0.01)
        lam, mse = fit_lambda(samples, j)
        elapsed = time.perf_counter() - t0
        print(f"  lambda={lam:.4f} mse={mse:.5f} time={elapsed:.0f}s")
        assert 0.4 <= lam <= 0.9
        assert mse <= 0.02
        assert elapsed <= 120.0


def test_criterion_02_average_secrecy_lower_bound():
    with criterion(2, "secrecy lower bound"):
        p = default_params(n_antennas=8, n_users=3, rician_k_db=30.0)
        rng = make_rng(77)
        violations = 0
        for i in range(50):
            geom, _ = generate_scenario(1000 + i, p)
            j = angular_matrix(geom, p)
            w = (rng.standard_normal(2) + 1j * rng.standard_normal(2)) \
                * math.sqrt(0.005)
            r = float(rng.uniform(0.5, 3.0))
            sig = 10.0 ** rng.uniform(-9.5, -7.0)
            pp = replace(p, noise_eav=sig)
            est = mc_average_secrecy(r, w, geom, pp, 64, 2000, rng)
            bound = angular_secrecy(r, w, j, 1.0, sig)
            if est.mean + 3.0 * est.stderr < bound:
                violations += 1
        assert violations == 0


def test_criterion_03_surrogate_suite():
    with criterion(3, "surrogate bound/tightness/gradient"):
        rng = make_rng(31)
        lower_checked = 0
        for n, k in [(4, 3), (8, 3), (8, 6), (32, 6)]:
            p, ch, j = make_random_setup(90 + n + k, n, k)
            for _ in range(63):
                z0, w0 = random_feasible_point(rng, n, k, p.p_max)
                z1, w1 = random_feasible_point(rng, n, k, p.p_max)
                pieces = surrogate_oracles(z0, w0, ch, j, p)
                u0 = stack_zw(z0, w0)
                u1 = stack_zw(z1, w1)
                tv0 = p2_piece_values(z0, w0, ch, j, p)
                tv1 = p2_piece_values(z1, w1, ch, j, p)
                for idx, pc in enumerate(pieces):
                    assert pc(u0)[0] == pytest.approx(tv0[idx], abs=1e-10)
                    assert pc(u1)[0] <= tv1[idx] + 1e-9
                    lower_checked += 1
        assert lower_checked >= 1000

        # gradient of the true pieces vs the surrogate gradient at expansion
        for n, k in [(4, 3), (8, 6)]:
            p, ch, j = make_random_setup(60 + n, n, k)
            for _ in range(4):
                z, w = random_feasible_point(rng, n, k, p.p_max)
                pieces = surrogate_oracles(z, w, ch, j, p)
                u0 = stack_zw(z, w)
                step = 1e-6
                for idx, pc in enumerate(pieces):
                    grad = pc(u0)[1]
                    fd = np.empty_like(u0)
                    for i in range(u0.size):
                        up = u0.copy()
                        up[i] += step
                        dn = u0.copy()
                        dn[i] -= step
                        zp, wp = unstack_zw(up, n - 1)
                        zm, wm = unstack_zw(dn, n - 1)
                        fd[i] = (p2_piece_values(zp, wp, ch, j, p)[idx]
                                 - p2_piece_values(zm, wm, ch, j, p)[idx]) \
                            / (2 * step)
                    assert np.linalg.norm(grad - fd) <= \
                        1e-4 * np.linalg.norm(fd)


def test_criterion_04_sco_monotone_and_tiny_optimal():
    with criterion(4, "sco monotonicity and tiny-instance optimality"):
        t0 = time.perf_counter()
        p = default_params(n_antennas=32, n_users=6, rician_k_db=30.0)
        monotone = 0
        for run in range(50):
            geom, ch = generate_scenario(derive_seed(404, 32.0, run), p)
            j = angular_matrix(geom, p)
            _, rep = sco_solve(ch, j, p, outer_iters=20)
            tr = rep.objective_trace
            if all(b >= a - 1e-9 for a, b in zip(tr, tr[1:])):
                monotone += 1
        assert monotone == 50

        # tiny instance against an exhaustive power-split grid (phases drop
        # out at N=2, K=2 because all channel blocks are scalars)
        pt = default_params(n_antennas=2, n_users=2, rician_k_db=30.0)
        for seed in (1, 2, 4, 6):
            geom, ch = generate_scenario(seed, pt)
            j = angular_matrix(geom, pt)
            a = (ch.u.conj().T @ ch.g_helpers.T)[0, 0]
            h = ch.h_k[0]
            tz = np.linspace(0.0, 2 * pt.p_max, 801)
            best = -np.inf
            for frac in np.linspace(0.0, 1.0, 801):
                tw = (2 * pt.p_max - tz) * frac
                vals = (0.5 * np.log2(1 + np.minimum(
                    abs(a) ** 2 * tz, abs(h) ** 2 * tw) / pt.noise_users)
                    - 0.5 * np.log2(1 + pt.lam * j.diag[0] * tw
                                    / pt.noise_eav))
                best = max(best, float(vals.max()))
            sol, rep = sco_solve(ch, j, pt, outer_iters=400)
            assert rep.objective_trace[-1] == pytest.approx(best, abs=1e-2)
        elapsed = time.perf_counter() - t0
        print(f"  elapsed {elapsed:.0f}s")
        assert elapsed <= 300.0


def test_criterion_05_closed_form_quality_and_gap_trend():
    with criterion(5, "closed-form saturation/equalization/gap trend"):
        p0, ch0, j0 = make_random_setup(3141, 16, 5)
        sol0 = closed_form_large_n(ch0, j0, p0)
        used = np.linalg.norm(sol0.z) ** 2 + np.linalg.norm(sol0.w) ** 2
        assert used == pytest.approx(2 * p0.p_max, rel=1e-8)
        assert psi_value(sol0.w, ch0, j0, p0) == pytest.approx(
            upsilon_value(sol0.w, ch0, j0, p0), abs=1e-6)

        gaps = {}
        for n in (32, 128, 512):
            p = default_params(n_antennas=n, n_users=6, rician_k_db=30.0)
            diffs = []
            for run in range(10):
                geom, ch = generate_scenario(derive_seed(55, float(n), run), p)
                j = angular_matrix(geom, p)
                sol_s, _ = sco_solve(ch, j, p)
                sol_c = closed_form_large_n(ch, j, p)
                diffs.append(objective_p2(sol_s.z, sol_s.w, ch, j, p)
                             - objective_p2(sol_c.z, sol_c.w, ch, j, p))
            gaps[n] = float(np.mean(diffs))
        print(f"  gaps: {gaps}")
        assert gaps[32] >= gaps[128] >= gaps[512]


def test_criterion_06_bfom_oracle_and_smoothness_constant():
    with criterion(6, "power-split subproblems vs oracle, smoothness bounds"):
        # subproblem agreement with a 10x-budget generic solve
        for seed in (1, 2, 3, 4):
            p, ch, j = make_random_setup(seed, 8, 4)
            z0 = large_nk_power_split(ch, p).z
            rows, t, relay_gain = _p5_subproblem(ch, p, z0)
            p_total = 2 * p.p_max
            lip = bfom_lipschitz(rows, relay_gain, p_total) / 4
            y0 = np.concatenate([z0.real, z0.imag])
            y, _, _, _ = solve_p5(rows, t, relay_gain, p_total, lip,
                                  3000, 1e-4, y0, np.full(4, 0.25))
            x = recover_power_split(rows, t, relay_gain, p_total, y)
            fast = min(float(np.min(rows @ x + t)),
                       relay_gain * (p_total - float(x @ x)))
            pieces = [
                (lambda xx, rr=rows[i], tt=t[i]: (float(rr @ xx + tt), rr))
                for i in range(rows.shape[0])
            ]
            pieces.append(lambda xx: (
                relay_gain * (p_total - float(xx @ xx)),
                -2.0 * relay_gain * xx))
            prob = SaddleProblem(pieces=pieces, radius=math.sqrt(p_total),
                                 piece_count=4, lipschitz=lip)
            oracle = saddle_solve(prob, 30000, 1e-9, x0=y0, stall=10 ** 9)
            scale = max(1.0, abs(oracle.value), abs(fast))
            assert abs(fast - oracle.value) <= 1e-3 * scale

        # smoothness constant: holds at the stated value, not at 1% of it
        p, ch, j = make_random_setup(47, 8, 4)
        z0 = large_nk_power_split(ch, p).z
        rows, t, relay_gain = _p5_subproblem(ch, p, z0)
        p_total = 2 * p.p_max
        l_hat = bfom_lipschitz(rows, relay_gain, p_total)
        k = rows.shape[0] + 1

        def grad_x(x, gamma):
            return rows.T @ gamma[:-1] - 2.0 * relay_gain * gamma[-1] * x

        def grad_g(x):
            return np.concatenate(
                [rows @ x + t, [relay_gain * (p_total - x @ x)]])

        def violations(lc):
            rng = make_rng(14)
            count = 0
            for _ in range(100):
                xs = []
                gs = []
                for _ in range(2):
                    x = rng.standard_normal(rows.shape[1])
                    x *= math.sqrt(p_total) * rng.uniform(0, 1) \
                        / np.linalg.norm(x)
                    xs.append(x)
                    gs.append(rng.dirichlet(np.ones(k)))
                (x, x2), (g, g2) = xs, gs
                dx = np.linalg.norm(x - x2)
                dg = float(np.sum(np.abs(g - g2)))
                if np.linalg.norm(grad_x(x, g) - grad_x(x2, g)) \
                        > lc * dx + 1e-12:
                    count += 1
                if np.linalg.norm(grad_x(x, g) - grad_x(x, g2)) \
                        > lc * dg + 1e-12:
                    count += 1
                if np.max(np.abs(grad_g(x) - grad_g(x))) > lc * dg + 1e-12:
                    count += 1
                if np.max(np.abs(grad_g(x) - grad_g(x2))) > lc * dx + 1e-12:
                    count += 1
            return count

        assert violations(l_hat) == 0
        assert violations(l_hat / 100.0) > 0

        # power recovery identity
        p, ch, j = make_random_setup(48, 8, 4)
        sol, _ = bfom_solve(ch, p)
        assert sol.p == pytest.approx(
            2 * p.p_max - np.linalg.norm(sol.z) ** 2, abs=1e-9)


def test_criterion_07_power_split():
    with criterion(7, "scalar power split"):
        p, ch, j = make_random_setup(63, 8, 4)
        sol = large_nk_power_split(ch, p)
        cols = ch.u.conj().T @ ch.g_helpers.T
        cost = float(np.sum(p.noise_users
                            / np.sum(np.abs(cols) ** 2, axis=0)))
        relay = np.linalg.norm(ch.h_k) ** 2 / p.noise_users
        lhs = (2 * p.p_max - sol.p) / cost
        rhs = sol.p * relay
        assert lhs == pytest.approx(rhs, rel=1e-9)

        lo, hi = 0.0, 2 * p.p_max
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if (2 * p.p_max - mid) / cost > mid * relay:
                lo = mid
            else:
                hi = mid
        assert sol.p == pytest.approx(0.5 * (lo + hi), abs=1e-10)

        ch.h_k = ch.h_k * math.sqrt(
            p.noise_users / (cost * np.linalg.norm(ch.h_k) ** 2))
        assert large_nk_power_split(ch, p).p == pytest.approx(p.p_max,
                                                              rel=1e-12)


def test_criterion_08_security_headline(tmp_path):
    with criterion(8, "cooperative vs direct secrecy"):
        t0 = time.perf_counter()
        config = SweepConfig(
            experiment="rician_sweep", runs=10, seed=2024,
            parameter_grid=[30.0], methods=["sco", "direct"],
            params=default_params(n_antennas=64, n_users=6),
            n_rho=64, n_fading=1000)
        rows = run_sweep(config)
        write_sweep_csv(tmp_path / "security_sweep.csv", rows)
        sco_mean = np.mean([r.secrecy_mc for r in rows if r.method == "sco"])
        direct_mean = np.mean([r.secrecy_mc for r in rows
                               if r.method == "direct"])
        elapsed = time.perf_counter() - t0
        print(f"  sco={sco_mean:.3f} direct={direct_mean:.5f} "
              f"time={elapsed:.0f}s")
        assert sco_mean >= 0.5
        assert direct_mean <= 0.05
        assert elapsed <= 600.0


def test_criterion_09_speed_ordering():
    with criterion(9, "wall-time ordering at scale"):
        p = default_params(n_antennas=128, n_users=32, rician_k_db=30.0)
        t_sco, t_cf, t_bfom = [], [], []
        for run in range(5):
            geom, ch = generate_scenario(derive_seed(7, 128.0, run), p)
            j = angular_matrix(geom, p)
            t0 = time.perf_counter()
            sco_solve(ch, j, p)
            t1 = time.perf_counter()
            closed_form_large_n(ch, j, p)
            t2 = time.perf_counter()
            bfom_solve(ch, p)
            t3 = time.perf_counter()
            t_sco.append(t1 - t0)
            t_cf.append(t2 - t1)
            t_bfom.append(t3 - t2)
        ms = statistics.median(t_sco)
        mc = statistics.median(t_cf)
        mb = statistics.median(t_bfom)
        print(f"  medians: sco={ms:.2f}s cf={mc:.4f}s bfom={mb:.2f}s")
        assert ms >= 5.0 * mc
        assert ms >= 5.0 * mb


def test_criterion_10_sweep_determinism(tmp_path):
    with criterion(10, "sweep determinism"):
        config_kw = dict(
            experiment="rician_sweep", runs=2, seed=99,
            parameter_grid=[10.0, 30.0],
            methods=["sco", "closed_form", "large_nk", "direct"],
            params=default_params(n_antennas=16, n_users=4),
            n_rho=16, n_fading=100)

        def render(name):
            rows = run_sweep(SweepConfig(**config_kw))
            path = tmp_path / name
            write_sweep_csv(path, rows)
            out = []
            for line in path.read_text(encoding="utf-8").splitlines():
                cols = line.split(",")
                if cols[0] != "experiment":
                    cols[8] = "WALL"
                out.append(",".join(cols))
            return "\n".join(out)

        assert render("a.csv") == render("b.csv")
