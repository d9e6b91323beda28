"""Acceptance suite: every exit criterion as an executable check.

Each criterion function returns a list of Check rows; `run_all` executes
the requested criteria, shares the heavy Monte Carlo ensembles between
them, and reports one pass/fail line per criterion.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import engine, montecarlo, oracle, qcalc, ratresidue, stats, tw
from .model import ModelParams, ParticleConfig, ScalingParams

__all__ = ["Check", "CriterionReport", "run_all", "CRITERIA"]


@dataclass
class Check:
    name: str
    measured: float
    expected: float
    tolerance: float
    passed: bool
    detail: str = ""

    @classmethod
    def close(cls, name: str, measured, expected, tolerance, detail: str = ""):
        measured = float(measured)
        expected = float(expected)
        return cls(name, measured, expected, tolerance,
                   abs(measured - expected) <= tolerance, detail)


@dataclass
class CriterionReport:
    index: int
    title: str
    checks: list[Check] = field(default_factory=list)
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


def criterion_1_mu_integral() -> list[Check]:
    """mu-integral identity, L = 1..5, tau in {0.2, 0.5, 0.8}."""
    checks = []
    for tau in (0.2, 0.5, 0.8):
        for l_block in range(1, 6):
            lhs = qcalc.mu_integral_lhs(l_block, tau)
            rhs = qcalc.mu_integral_rhs(l_block, tau)
            checks.append(Check.close(
                f"mu-integral L={l_block} tau={tau}", abs(lhs - rhs), 0.0, 1e-10))
    return checks


def criterion_2_weight_integrals() -> list[Check]:
    """F-weight integrals: f0 vanishes, f matches the closed form, stages agree."""
    checks = []
    for tau in (0.2, 0.4, 0.7):
        for l_block in range(1, 5):
            checks.append(Check.close(
                f"f0 L={l_block} tau={tau}",
                abs(ratresidue.weight_integral_plain(l_block, tau)), 0.0, 1e-10))
            for xi in (-1.0, -0.5):
                val = ratresidue.weight_integral_saddle(l_block, tau, xi)
                ref = ratresidue.staged_integral_closed_form(l_block, tau, xi)
                checks.append(Check.close(
                    f"weight_integral_saddle L={l_block} tau={tau} xi={xi}",
                    abs(val - ref) / abs(ref), 0.0, 1e-9))
    stage_vals = [ratresidue.staged_integral_value(3, k, 0.4, -1.0) for k in range(4)]
    spread = max(abs(v - stage_vals[0]) for v in stage_vals)
    checks.append(Check.close(
        "claim stages L=3 spread / |value|",
        spread / abs(stage_vals[0]), 0.0, 1e-9))
    return checks


def criterion_3_pole_order() -> list[Check]:
    """Pole of order at most L-1 at w_1 = 1, boundedness at large w_1."""
    checks = []
    tau = 0.4
    for l_block in (2, 3):
        vals = {}
        for rho in (1e-2, 1e-3):
            mags = []
            for k in range(8):
                w1 = 1.0 + rho * np.exp(2j * np.pi * k / 8)
                probe = ratresidue.reduced_weight_probe(l_block, tau, w1)
                mags.append(abs((w1 - 1.0) ** (l_block - 1) * probe))
            vals[rho] = max(mags)
        variation = abs(vals[1e-2] - vals[1e-3]) / vals[1e-3]
        checks.append(Check.close(
            f"(w1-1)^(L-1) * probe bounded, L={l_block}", variation, 0.0, 0.05,
            detail=f"max magnitudes {vals[1e-2]:.6g} vs {vals[1e-3]:.6g}"))
        far = abs(ratresidue.reduced_weight_probe(l_block, tau, 1e3))
        near = abs(ratresidue.reduced_weight_probe(l_block, tau, 2.0))
        checks.append(Check(
            f"probe O(1) at |w1|=1e3, L={l_block}", far, near, near * 10.0,
            far <= max(near * 10.0, 1.0),
            detail=f"|probe(1e3)|={far:.3g}"))
        order = ratresidue.reduced_weight_pole_order(l_block, tau)
        checks.append(Check(
            f"exact pole order at w1=1, L={l_block}", order, l_block - 1,
            0, order <= l_block - 1))
    return checks


TRIPLE_CASES = [
    (-1, 1, 1), (0, 1, 1), (1, 1, 1),
    (0, 1, 2), (1, 1, 2),
    (1, 2, 1),
]


def criterion_4_triple_agreement() -> list[Check]:
    """Both exact formula routes and the CTMC oracle agree to 1e-6 absolute."""
    model = ModelParams(0.3)
    t = 0.5
    checks = []
    for x, m, l_block in TRIPLE_CASES:
        v_circle = qcalc.block_probability_circle(x, m, t, l_block, model)
        v_deformed = qcalc.block_probability_deformed(x, m, t, l_block, model)
        space = oracle.default_space(model, t, x, m, l_block)
        v_orc = oracle.prob_block(space, model, t, x, m, l_block)
        tag = f"x={x} m={m} L={l_block}"
        checks.append(Check.close(f"circle route vs oracle {tag}", v_circle, v_orc, 1e-6))
        checks.append(Check.close(f"deformed route vs oracle {tag}", v_deformed, v_orc, 1e-6))
        checks.append(Check.close(f"circle vs deformed route {tag}", v_circle, v_deformed, 1e-6))
    return checks


def criterion_5_tw_routes() -> list[Check]:
    """Real-line, contour, and Painleve routes agree; trace identity; mass 1."""
    checks = []
    for s in range(-5, 3):
        a = tw.f2(float(s))
        b = tw.det_J0_contour(float(s)).real
        c = tw.painleve_f2(float(s))
        checks.append(Check.close(f"f2 vs det_J0 s={s}", a, b, 1e-6))
        checks.append(Check.close(f"f2 vs painleve s={s}", a, c, 1e-6))
    for s in (-2.0, 0.0, 1.0):
        tr = tw.trace_f2_ratio(s)
        ratio = tw.f2_prime(s) / tw.f2(s)
        checks.append(Check.close(f"trace identity s={s}", tr, ratio, 1e-6))
    u, wu = np.polynomial.legendre.leggauss(96)
    xs = -8.0 + 0.5 * (u + 1.0) * 14.0
    ws = 0.5 * wu * 14.0
    mass = float(sum(w * tw.f2_prime(float(x)) for x, w in zip(xs, ws)))
    checks.append(Check.close("integral of F2' over [-8,6]", mass, 1.0, 1e-6))
    return checks


def criterion_6_sim_vs_oracle(n_traj: int = 1_000_000, seed: int = 60) -> list[Check]:
    """Simulator frequencies vs exact CTMC at N = 4, window [-6, 8], t = 1."""
    model = ModelParams(0.3)
    t = 1.0
    x_lo, x_hi = -6, 8
    n_at, n_block, n_gap, n_oob = engine.ensemble_tally(
        seed, 0, n_traj, 4, t, model.p, 1, 3, 2, x_lo, x_hi)
    run = oracle.OracleRun(oracle.StateSpace((x_lo, x_hi), 4), model, t)
    checks = []
    for x in (0, 1):
        i = x - x_lo
        for l_block in (1, 2, 3):
            p_exact = run.prob_block(x, 1, l_block)
            p_emp = n_block[i, l_block - 1] / n_traj
            se = math.sqrt(max(p_exact * (1 - p_exact), 1e-12) / n_traj)
            checks.append(Check.close(
                f"block x={x} L={l_block}", p_emp, p_exact, 3.0 * se,
                detail=f"z={(p_emp - p_exact) / se:+.2f}"))
        for g_gap in (1, 2):
            p_exact = run.prob_gap(x, 1, g_gap)
            p_emp = n_gap[i, g_gap - 1] / n_traj
            se = math.sqrt(max(p_exact * (1 - p_exact), 1e-12) / n_traj)
            checks.append(Check.close(
                f"gap x={x} G={g_gap}", p_emp, p_exact, 3.0 * se,
                detail=f"z={(p_emp - p_exact) / se:+.2f}"))
    return checks


def _kpz_ensemble(t: float, n_traj: int, seed: int, workers: int = 1):
    spec = montecarlo.EnsembleSpec(
        ModelParams(0.3), 0.25, t, n_traj, seed, l_max=4, g_max=4)
    return spec, montecarlo.run_ensemble(spec, workers=workers)


def _shared_ensemble(shared: dict, key: str, t: float, n_traj: int, seed: int,
                     workers: int):
    if key not in shared:  # lazily: the ensembles cost minutes to hours
        shared[key] = _kpz_ensemble(t, n_traj, seed, workers)
    return shared[key]


def criterion_7_kpz_law(shared: dict, n_traj: int = 200_000, seed: int = 70,
                        workers: int = 1) -> list[Check]:
    """KS distance between the law of s(x_m) and F2 at sigma=1/4, t=512."""
    spec, tbl = _shared_ensemble(shared, "kpz512", 512.0, n_traj, seed, workers)
    f2_grid = {}

    def cdf(s):
        key = round(s, 9)
        if key not in f2_grid:
            f2_grid[key] = tw.f2(min(max(s, -8.4), 7.9))
        return f2_grid[key]

    ks = montecarlo.ks_distance_vs_cdf(tbl, cdf)
    return [Check.close("KS distance to F2", ks, 0.0, 0.05,
                        detail=f"n_traj={tbl.n_total}, oob={tbl.n_oob}")]


def criterion_8_corollaries(shared: dict, n_traj: int = 200_000, seed: int = 70,
                            workers: int = 1) -> list[Check]:
    """Conditional block/gap frequencies pooled over |s| <= 1 vs the limits."""
    spec, tbl = _shared_ensemble(shared, "kpz512", 512.0, n_traj, seed, workers)
    tbl.check_counting_identity()
    n_at, blocks, gaps = tbl.pooled(1.0)
    sq = math.sqrt(spec.sigma_actual)
    checks = [
        Check.close("2-block | presence", blocks[1] / n_at, sq, 0.05),
        Check.close("3-block | presence", blocks[2] / n_at, sq**2, 0.05),
        Check.close("gap >= 1 | presence", gaps[0] / n_at, 1.0 - sq, 0.05),
        Check.close("gap >= 2 | presence", gaps[1] / n_at, (1.0 - sq) ** 2, 0.05),
        Check("counting identity n_gap1 + n_block2 == n_at",
              float(np.abs(tbl.n_gap[:, 0] + tbl.n_block[:, 1] - tbl.n_at).max()),
              0.0, 0.0, bool(np.array_equal(tbl.n_gap[:, 0] + tbl.n_block[:, 1],
                                            tbl.n_at))),
    ]
    return checks


def criterion_9_density_magnitude(shared: dict, n_traj: int = 200_000,
                                   seed: int = 70, workers: int = 1) -> list[Check]:
    """t^(1/3) P(x_m = x) at s = 0 vs c2^-1 F2'(s_eff), and the t-trend."""
    checks = []
    ratios = {}
    for key, t in (("kpz125", 125.0), ("kpz512", 512.0)):
        spec, tbl = _shared_ensemble(shared, key, t, n_traj, seed, workers)
        sc = ScalingParams(spec.sigma_actual, 0.0)
        x = stats.kpz_position(sc, t)
        s_eff = stats.s_of_position(x, spec.m, t)
        emp = tbl.n_at[x - tbl.x_lo] / tbl.n_total
        pred = stats.block_density_prediction(sc, 1, t, tw.f2_prime(s_eff))
        ratios[t] = emp / pred
        if t == 512.0:
            checks.append(Check.close(
                "t^(1/3) P(x_m=x) / prediction at t=512", ratios[t], 1.0, 0.20,
                detail=f"x={x}, s_eff={s_eff:.4f}"))
    trend_ok = abs(ratios[512.0] - 1.0) < abs(ratios[125.0] - 1.0)
    checks.append(Check("finite-t trend moves toward prediction",
                        abs(ratios[512.0] - 1.0), abs(ratios[125.0] - 1.0),
                        0.0, trend_ok,
                        detail=f"ratio(125)={ratios[125.0]:.4f}, "
                               f"ratio(512)={ratios[512.0]:.4f}"))
    return checks


def criterion_10_duality(n_traj: int = 200_000, seed: int = 61) -> list[Check]:
    """Per-trajectory particle-hole duality and the scaling algebra."""
    model = ModelParams(0.3)
    t, n = 1.0, 4
    cases = [(0, 1, 1), (0, 1, 2), (1, 1, 1)]
    gap_counts = {c: 0 for c in cases}
    dual_counts = {c: 0 for c in cases}
    from .model import SimSpec
    from .stats import dual_config, dual_index, is_block_start

    def dual_block_exactly(dual, m_dual, x_dual, g_gap):
        # beyond the simulated window the step data has no holes, so a
        # missing dual particle means the (G+1)-block cannot exist
        if m_dual + g_gap - 1 > dual.n_particles:
            return False
        if dual.positions[m_dual - 1] != x_dual:
            return False
        if not is_block_start(dual, m_dual, g_gap):
            return False
        return (m_dual + g_gap > dual.n_particles
                or not is_block_start(dual, m_dual, g_gap + 1))

    for k in range(n_traj):
        spec = SimSpec(model, t, n, seed, k)
        pos = engine.sample_positions(spec)
        config = ParticleConfig(tuple(int(v) for v in pos))
        for (x, m, g_gap) in cases:
            if pos[m - 1] == x and pos[m] - x - 1 >= g_gap:
                gap_counts[(x, m, g_gap)] += 1
            if pos[-1] <= x + g_gap:
                continue  # gap event impossible (m < N), no dual particle either
            # dual index tied to the original particle index through the
            # hole count right of x+G (no holes beyond the last particle)
            m_pred = 1 + (int(pos[-1]) - x - g_gap) - (n - m)
            if m_pred < 1:
                continue
            dual = dual_config(config, (x, int(pos[-1])))
            if dual_block_exactly(dual, m_pred, -(x + g_gap), g_gap):
                dual_counts[(x, m, g_gap)] += 1
                if dual_index(config, x, g_gap) != m_pred:
                    raise AssertionError("dual_index disagrees with hole count")
    checks = []
    for c in cases:
        p_hat = gap_counts[c] / n_traj
        se = math.sqrt(max(p_hat * (1 - p_hat), 1e-12) / n_traj)
        checks.append(Check.close(
            f"dual block count vs gap count (x={c[0]}, m={c[1]}, G={c[2]})",
            dual_counts[c] / n_traj, p_hat, 3.0 * se,
            detail=f"counts {dual_counts[c]} vs {gap_counts[c]}"))
    rng = np.random.default_rng(3)
    worst = 0.0
    for sigma in rng.uniform(0.05, 0.95, size=100):
        sc = ScalingParams(float(sigma))
        sq = math.sqrt(sc.sigma)
        worst = max(
            worst,
            abs(1.0 / sc.c3 / (1.0 - sc.xi_saddle) - 1.0 / sc.c2),
            abs(sc.xi_saddle / (1.0 - sc.xi_saddle) + sq),
            abs(sc.c2 / (1.0 - sq) - (1.0 - sq) ** (-1 / 3) * sigma ** (1 / 3)
                - sc.c2),
        )
    checks.append(Check.close(
        "scaling identities over 100 random sigma", worst, 0.0, 1e-12))
    return checks


CRITERIA = {
    1: ("mu-integral identity", lambda shared, **kw: criterion_1_mu_integral()),
    2: ("weight-function integrals", lambda shared, **kw: criterion_2_weight_integrals()),
    3: ("inner-integral pole order", lambda shared, **kw: criterion_3_pole_order()),
    4: ("exact-formula triple agreement", lambda shared, **kw: criterion_4_triple_agreement()),
    5: ("Tracy-Widom routes", lambda shared, **kw: criterion_5_tw_routes()),
    6: ("simulator vs CTMC oracle",
        lambda shared, n_traj_c6=1_000_000, **kw: criterion_6_sim_vs_oracle(n_traj_c6)),
    7: ("KPZ limit law (KS)",
        lambda shared, n_traj_kpz=200_000, workers=1, **kw:
        criterion_7_kpz_law(shared, n_traj_kpz, workers=workers)),
    8: ("conditional block/gap limits",
        lambda shared, n_traj_kpz=200_000, workers=1, **kw:
        criterion_8_corollaries(shared, n_traj_kpz, workers=workers)),
    9: ("density-magnitude prediction",
        lambda shared, n_traj_kpz=200_000, workers=1, **kw:
        criterion_9_density_magnitude(shared, n_traj_kpz, workers=workers)),
    10: ("particle-hole duality",
         lambda shared, n_traj_dual=200_000, **kw: criterion_10_duality(n_traj_dual)),
}


def run_all(criteria=None, emit=print, **kwargs) -> list[CriterionReport]:
    """Run the requested acceptance criteria (all by default), sharing
    ensembles; one pass/fail line per criterion."""
    shared: dict = {}
    reports = []
    for idx in sorted(criteria or CRITERIA):
        title, fn = CRITERIA[idx]
        t0 = time.time()
        checks = fn(shared, **kwargs)
        rep = CriterionReport(idx, title, checks, time.time() - t0)
        reports.append(rep)
        status = "PASS" if rep.passed else "FAIL"
        emit(f"criterion {idx:2d} [{status}] {title} "
             f"({len(checks)} checks, {rep.seconds:.1f}s)")
        for c in checks:
            if not c.passed:
                emit(f"    FAILED {c.name}: measured={c.measured:.6g} "
                     f"expected={c.expected:.6g} tol={c.tolerance:.2g} {c.detail}")
    return reports
