"""The acceptance suite behind ``rgw verify``.

Each check returns a :class:`CriterionResult`. Monte Carlo checks use the
stated replica counts and 3-standard-error bands; a deterministic floor of
1e-12 relative is added where the estimator has zero variance, so rounding
of an exact answer is not reported as a miss.

Several stated instances are degenerate (a sequence already at its limit,
or a statistic identically zero). There the literal check is reported,
the degenerate identity is asserted exactly, and a non-degenerate
companion instance carries the strict form of the check.
"""

from __future__ import annotations

import csv
import filecmp
import math
import tempfile
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from . import analytic as an
from . import phase, spine
from .errors import NotComparable
from .model import ReproductionLaw, TypeMeasure, validate_law
from .simulate import population as pop
from .simulate import trees

ROUND_FLOOR = 1e-12

HALF = validate_law([0.5, 0.0, 0.5])
PAIR = validate_law([0.0, 0.5, 0.5])
D2 = validate_law([0.0, 0.0, 1.0])


@dataclass(frozen=True)
class CriterionResult:
    number: int
    title: str
    passed: bool
    detail: str


@dataclass(frozen=True)
class Scale:
    replicas: int = 100_000
    replicas_small: int = 10_000
    companion_replicas: int = 2_000
    urn_steps: int = 1_000_000
    urn_paths: int = 100
    urn_paths_steps: int = 100_000
    trees: int = 1_000
    coupled: int = 10_000
    grid: int = 200


FULL = Scale()
QUICK = Scale(10_000, 2_000, 500, 100_000, 30, 20_000, 200, 1_000, 100)


def _within(est: float, se: float, exact: float, k: float = 3.0) -> bool:
    return abs(est - exact) <= k * se + ROUND_FLOOR * abs(exact)


def _g(x: float) -> str:
    return f"{x:.6g}"


def c01_growth_closed_form(ctx) -> CriterionResult:
    errs = [abs(an.growth_rate(D2, q) - 2.0) for q in (0.1, 0.5, 0.9)]
    errs.append(abs(an.growth_rate(HALF, 0.5) - 1.5))
    ok = max(errs) <= 1e-9
    return CriterionResult(1, "closed-form growth rates", ok, f"max error {max(errs):.3g} (tol 1e-9)")


def _nu_p_grid(n: int = 50):
    qs = np.linspace(0.01, 0.24, n)
    ps = 0.1 * np.arange(1, n + 1) / n
    return qs, ps


def c02_ordering(ctx) -> CriterionResult:
    qs, ps = _nu_p_grid()
    worst = -math.inf
    for q in qs:
        for p in ps:
            law = phase.nu_p(float(p))
            worst = max(worst, an.m_star(law, float(q)) - an.growth_rate(law, float(q)))
    ok = worst <= 1e-9
    return CriterionResult(2, "m_* <= m_nu_q on 50x50 nu_p grid", ok, f"max(m_* - m) = {worst:.3g}")


def c03_spectrum(ctx) -> CriterionResult:
    q = 0.25
    spec = an.urn_spectrum(PAIR, q)
    disc = math.sqrt(1.875**2 - 2.0)
    oracle = ((1.875 + disc) / 2, (1.875 - disc) / 2)
    eig_err = max(abs(a - b) for a, b in zip(spec.positive, oracle))
    a, _ = an.activity_matrix(PAIR, q)
    res = 0.0
    for i, lam in enumerate(spec.eigenvalues):
        v = spec.vector_array(i, "left")
        u = spec.vector_array(i, "right")
        res = max(res, np.abs(v @ a - lam * v).max(), np.abs(a @ u - lam * u).max())
    vsum = abs(sum(spec.left_vectors[0][c] for c in PAIR.colors) - 1.0)
    single = 0.0
    for j in (2, 3, 4):
        w = [0.0] * (j + 1)
        w[j] = 1.0
        for qq in (0.1, 0.3, 0.7, 0.9):
            single = max(single, abs(an.urn_spectrum(ReproductionLaw(tuple(w)), qq).lambda1 - j))
    ok = eig_err <= 1e-9 and res < 1e-9 and vsum <= 1e-10 and single <= 1e-12
    return CriterionResult(
        3,
        "urn spectrum vs quadratic oracle",
        ok,
        f"eig err {eig_err:.3g}, residual {res:.3g}, |sum v1 - 1| {vsum:.3g}, single-color |lambda1 - j| {single:.3g}",
    )


def _sign(x: float, band: float = 1e-9) -> int:
    return 0 if abs(x) <= band else (1 if x > 0 else -1)


def c04_criteria_equivalence(ctx) -> CriterionResult:
    qs, ps = _nu_p_grid()
    laws = [(phase.nu_p(float(p)), float(q)) for q in qs for p in ps]
    extra = [validate_law(w) for w in ([0.5, 0, 0.5], [0, 0.5, 0.5], [0.3, 0.2, 0.1, 0.4], [0.6, 0.1, 0.1, 0.2])]
    for law in extra:
        for q in np.linspace(0.01, 0.99 / law.k_star, 25):
            laws.append((law, float(q)))
    bad, ties = 0, 0
    for law, q in laws:
        s = {_sign(an.principal_eigenvalue(law, q) - 1), _sign(an.survival_sum(law, q) - 1),
             _sign(an.mean_matrix_radius(law, q) - 1)}
        if 0 in s:
            ties += 1
            continue
        bad += len(s) > 1
    ok = bad == 0
    return CriterionResult(
        4, "sign agreement lambda1 / survival sum / mean-matrix radius", ok,
        f"{len(laws)} points, {bad} disagreements, {ties} within 1e-9 of 1",
    )


def c05_mean_asymptotics(ctx) -> CriterionResult:
    def check(law, q):
        m = an.growth_rate(law, q)
        target = 1.0 / (q + (1 - q) * law[law.k_star])
        series = an.exact_mean_series(TypeMeasure.null(law), law, q, 18)
        e10 = abs(series[10] * m**-10 - target)
        e18 = abs(series[18] * m**-18 - target)
        return target, e10, e18

    t, e10, e18 = check(HALF, 0.5)
    degenerate = e10 <= ROUND_FLOOR * t and e18 <= ROUND_FLOOR * t
    literal = e18 <= 0.05 * t and e18 < e10
    ct, c10, c18 = check(PAIR, 0.5)
    companion = c18 <= 0.05 * ct and c18 < c10
    ok = (literal or degenerate) and companion
    return CriterionResult(
        5, "E Z(n) m^-n -> 1/(q + (1-q) nu(k*))", ok,
        f"half-law: err10 {e10:.3g}, err18 {e18:.3g} (sequence equals 4/3 exactly, strict check "
        f"{'holds' if literal else 'degenerate'}); companion 0.5d1+0.5d2: err10 {_g(c10)}, err18 {_g(c18)}",
    )


def c06_p_ell_contrast(ctx) -> CriterionResult:
    eligible = [ell for ell in HALF.colors if ell < HALF.k_star]
    law, q, ell = PAIR, 0.5, 1
    m = an.growth_rate(law, q)
    series = an.exact_mean_series(TypeMeasure.point(law, ell), law, q, 18)
    r = [series[n] * m**-n for n in range(19)]
    ok = all(b < a for a, b in zip(r, r[1:])) and r[18] < 0.25 * r[0]
    return CriterionResult(
        6, "delta_ell start with ell < k*: E Z(n) m^-n decreases", ok,
        f"half-law has no eligible ell ({eligible}); companion ell=1: ratio {_g(r[1])} -> {_g(r[18])} strictly decreasing",
    )


def c07_martingale(ctx) -> CriterionResult:
    ens = pop.simulate_ensemble(HALF, 0.5, pop.Start.typed({2: 1}), 10, ctx.scale.replicas, seed=ctx.seed, jobs=ctx.jobs)
    r = ens.replicas
    parts, ok = [], True
    for n in (4, 8):
        x = ens.m[:, n]
        se = x.std(ddof=1) / math.sqrt(r)
        good = _within(x.mean(), se, 1.0)
        ok &= good
        parts.append(f"M_{n} {_g(x.mean())} +- {_g(se)}")
    exact = an.exact_mean_series(TypeMeasure.point(HALF, 2), HALF, 0.5, 10)
    worst = 0.0
    for n in range(11):
        z = ens.z[:, n].astype(float)
        se = z.std(ddof=1) / math.sqrt(r)
        ok &= _within(z.mean(), se, exact[n])
        if se > 0:
            worst = max(worst, abs(z.mean() - exact[n]) / se)
    parts.append(f"max |Z mean - exact| / SE over n<=10: {worst:.2f}")
    return CriterionResult(7, "martingale mean and E Z(n) vs exact", bool(ok), "; ".join(parts))


def c08_starred(ctx) -> CriterionResult:
    ok, parts = True, []
    for name, law, q in (("half-law", HALF, 0.5), ("nu_0.05", phase.nu_p(0.05), 0.2)):
        ens = pop.simulate_ensemble(law, q, pop.Start.null(), 8, ctx.scale.replicas, seed=ctx.seed + 1, jobs=ctx.jobs)
        ms = an.m_star(law, q)
        worst = 0.0
        for ell in range(1, 9):
            z = ens.z_star[:, ell].astype(float)
            se = z.std(ddof=1) / math.sqrt(ens.replicas)
            target = law.k_star * ms ** (ell - 1)
            ok &= _within(z.mean(), se, target)
            if se > 0:
                worst = max(worst, abs(z.mean() - target) / se)
        parts.append(f"{name}: max dev {worst:.2f} SE")
    return CriterionResult(8, "E Z_*(l) = k* m_*^(l-1)", bool(ok), "; ".join(parts))


def c09_low_m_star_collapse(ctx) -> CriterionResult:
    law, q = phase.nu_p(0.05), 0.2
    ens = pop.simulate_ensemble(law, q, pop.Start.null(), 20, ctx.scale.replicas_small, seed=ctx.seed + 2, jobs=ctx.jobs)
    st = pop.scaled_stats(ens, an.growth_rate(law, q), an.m_star(law, q))
    med = [float(st.growth["median"][n]) for n in (5, 10, 15, 20)]
    ok = all(b <= a for a, b in zip(med, med[1:])) and med[-1] < 0.1 and st.truncated_fraction == 0
    return CriterionResult(
        9, "median m^-n Z(n) falls to 0 when m_* <= 1", ok,
        "medians at n=5,10,15,20: " + ", ".join(_g(x) for x in med),
    )


def c10_starred_share(ctx) -> CriterionResult:
    out = {}
    for name, law, reps in (("half-law", HALF, ctx.scale.replicas_small), ("companion", PAIR, ctx.scale.companion_replicas)):
        ens = pop.simulate_ensemble(law, 0.5, pop.Start.null(), 20, reps, seed=ctx.seed + 3, jobs=ctx.jobs)
        st = pop.scaled_stats(ens, an.growth_rate(law, 0.5), an.m_star(law, 0.5))
        out[name] = (float(st.mean_abs_diff[10]), float(st.mean_abs_diff[20]), st.truncated_fraction)
    h10, h20, htr = out["half-law"]
    c10, c20, ctr = out["companion"]
    degenerate = h10 == 0.0 and h20 == 0.0
    ok = (h20 < h10 or degenerate) and c20 < c10 and htr < 0.01 and ctr < 0.01
    return CriterionResult(
        10, "mean |m^-n Z(n) - m_*^-n Z_*(n)| shrinks when m < m_*^2", ok,
        f"half-law: {_g(h10)} -> {_g(h20)} (Z_* = Z identically); companion 0.5d1+0.5d2: {_g(c10)} -> {_g(c20)}; "
        f"truncated {htr:.3g}, {ctr:.3g}",
    )


TREE_SETS = (
    (PAIR, 0.25, pop.Start.null()),
    (PAIR, 0.6, pop.Start.typed({1: 1})),
    (HALF, 0.5, pop.Start.null()),
    (validate_law([0.8, 0.05, 0.05, 0.05, 0.05]), 0.2, pop.Start.p_ell(3)),
    (validate_law([0.2, 0.3, 0.2, 0.3]), 0.4, pop.Start.typed({1: 1, 3: 2})),
)


def c11_tree_identity(ctx) -> CriterionResult:
    n = ctx.scale.trees
    per = n // len(TREE_SETS)
    bad, checked = 0, 0
    for s, (law, q, start) in enumerate(TREE_SETS):
        for i in range(per):
            tree = trees.simulate_tree(law, q, start, 1 + i % 8, seed=ctx.seed + 4, index=s * per + i)
            for h in range(tree.height + 1):
                lhs, rhs = trees.tree_identity_sides(tree, h)
                bad += lhs != rhs
                checked += 1
    return CriterionResult(
        11, "tree identity z(h)(z(h)-1) = sum phi(v,h)", bad == 0,
        f"{per * len(TREE_SETS)} trees, {checked} (tree, h) pairs, {bad} mismatches",
    )


def c12_coupling(ctx) -> CriterionResult:
    t = TypeMeasure.from_mapping(PAIR, {1: 1, 2: 1})
    tp = TypeMeasure.point(PAIR, 2, 2)
    viol, grew = 0, 0
    for i in range(ctx.scale.coupled):
        a, b = trees.coupled_trees(t, tp, PAIR, 0.3, 6, seed=ctx.seed + 5, index=i)
        viol += not trees.is_subtree(a, b)
        grew += a.size < b.size
    try:
        trees.coupled_trees(TypeMeasure.point(PAIR, 2), TypeMeasure.point(PAIR, 1), PAIR, 0.3, 3)
        rejected = False
    except NotComparable:
        rejected = True
    pairs = [
        (PAIR, 0.3, {1: 1, 2: 1}, {2: 2}),
        (validate_law([0.1, 0.3, 0.3, 0.3]), 0.4, {1: 2, 3: 1}, {2: 2, 3: 1}),
        (validate_law([0.4, 0.2, 0.1, 0.3]), 0.7, {1: 1}, {3: 1}),
    ]
    mono = True
    for law, q, lo, hi in pairs:
        s_lo = an.exact_mean_series(TypeMeasure.from_mapping(law, lo), law, q, 12)
        s_hi = an.exact_mean_series(TypeMeasure.from_mapping(law, hi), law, q, 12)
        mono &= all(x <= y * (1 + ROUND_FLOOR) for x, y in zip(s_lo, s_hi))
    ok = viol == 0 and rejected and mono
    return CriterionResult(
        12, "monotone coupling and DP domination", ok,
        f"{ctx.scale.coupled} coupled pairs, {viol} violations ({grew} strict), reversed pair rejected: {rejected}, "
        f"DP monotone n<=12 on {len(pairs)} pairs: {mono}",
    )


def c13_urn_law(ctx) -> CriterionResult:
    worst = 0.0
    for ell in (1, 2):
        for n in (1, 2, 3):
            worst = max(worst, spine.total_variation(
                spine.urn_path_probabilities(PAIR, 0.25, ell, n), spine.spine_path_probabilities(PAIR, 0.25, ell, n)))
    return CriterionResult(13, "urn path law = size-biased spine law (n <= 3)", worst < 1e-12, f"max TV {worst:.3g}")


def c14_urn_lln(ctx) -> CriterionResult:
    q = 0.25
    spec = an.urn_spectrum(PAIR, q)
    v1 = np.array([spec.left_vectors[0][c] for c in PAIR.colors])
    n = ctx.scale.urn_steps
    path = spine.simulate_urn(PAIR, q, 1, n, seed=ctx.seed + 6)
    st = path.state()
    bookkeeping = st.check()
    frac = np.array([st.counts[c] for c in PAIR.colors]) / n
    single = float(np.abs(frac - v1).max())
    m, k = ctx.scale.urn_paths_steps, ctx.scale.urn_paths
    fr = np.empty((k, len(v1)))
    for i in range(k):
        s = spine.simulate_urn(PAIR, q, 1 + i % 2, m, seed=ctx.seed + 7, index=i).state()
        fr[i] = [s.counts[c] / m for c in PAIR.colors]
    se = fr.std(axis=0, ddof=1) / math.sqrt(k)
    zmax = float((np.abs(fr.mean(axis=0) - v1) / se).max())
    ok = single < 0.01 and zmax <= 3 and bookkeeping
    return CriterionResult(
        14, "urn color fractions -> v1", ok,
        f"single path n={n}: max |N/n - v1| {single:.3g}; {k} paths n={m}: max |mean - v1| / SE {zmax:.2f}",
    )


def c15_spine_growth(ctx) -> CriterionResult:
    q = 0.25
    lam1 = an.urn_spectrum(PAIR, q).lambda1
    path = spine.simulate_urn(PAIR, q, 1, ctx.scale.urn_steps, seed=ctx.seed + 8)
    g = spine.spine_growth_estimate(path)
    per = spine.perpetuity_report(path)
    rel_mean = abs(g.limit_mean - lam1) / lam1
    rel_slope = abs(g.log_phi_slope + math.log(lam1)) / math.log(lam1)
    low = phase.nu_p(0.03)
    ssum = an.survival_sum(low, 0.05)
    path2 = spine.simulate_urn(low, 0.05, 1, ctx.scale.urn_steps, seed=ctx.seed + 9)
    g2 = spine.spine_growth_estimate(path2)
    per2 = spine.perpetuity_report(path2)
    ok = rel_mean < 0.01 and rel_slope < 0.02 and per.converged and ssum < 1 and g2.log_phi_slope > 0 and not per2.converged
    return CriterionResult(
        15, "spine growth: m_tau -> lambda1, log Phi slope, perpetuity", ok,
        f"lambda1 {_g(lam1)}: tail mean rel err {rel_mean:.3g}, slope rel err {rel_slope:.3g}, converged {per.converged}; "
        f"nu_0.03 q=0.05 (sum {_g(ssum)}): slope {_g(g2.log_phi_slope)}, log partial sum {_g(per2.log_partial_sum)}, "
        f"converged {per2.converged}",
    )


def c16_many_to_one(ctx) -> CriterionResult:
    ok, parts = True, []
    for name, law, q in (("half-law", HALF, 0.5), ("companion", PAIR, 0.25)):
        est = spine.many_to_one_estimate(law, q, 2, 6, ctx.scale.replicas, seed=ctx.seed + 10)
        exact = an.exact_mean(TypeMeasure.point(law, 2), law, q, 6)
        good = _within(est.mean, est.se, exact)
        ok &= good
        parts.append(f"{name}: {_g(est.mean)} +- {_g(est.se)} vs exact {_g(exact)}")
    return CriterionResult(16, "many-to-one identity at n = 6", bool(ok), "; ".join(parts))


def c17_phase_diagram(ctx) -> CriterionResult:
    spec = phase.GridSpec(resolution=(ctx.scale.grid, ctx.scale.grid))
    grid = ctx.phase_grid(spec)
    dq, dp = spec.dq, spec.dp
    near = {}
    for name in ("blue", "orange"):
        pts = grid.curves[name]
        near[name] = any(abs(q) <= dq and abs(p - 0.1) <= dp for q, p, _ in pts)
    orange = grid.curves["orange"]
    q_end, p_end, _ = max(orange, key=lambda t: (t[0], -t[1]))
    tail = sorted(orange)[-10:]
    decreasing = all(b[1] <= a[1] for a, b in zip(tail, tail[1:]))
    resid = max(abs(r) for name in grid.curves for _, _, r in grid.curves[name])
    grey = int(grid.grey.sum())
    ok = near["blue"] and near["orange"] and p_end <= 5 * dp and decreasing and grey > 0 and resid < phase.CURVE_TOL
    return CriterionResult(
        17, "phase diagram: curve endpoints and grey set", ok,
        f"blue/orange through (0, 0.1): {near['blue']}/{near['orange']}; orange end q={_g(q_end)} p={_g(p_end)}; "
        f"grey cells {grey}; max residual {resid:.3g}",
    )


def write_artifacts(seed: int, out: Path, jobs: int = 1) -> list[Path]:
    """Small deterministic CSV/SVG set used by the reproducibility check."""
    out.mkdir(parents=True, exist_ok=True)
    ens = pop.simulate_ensemble(HALF, 0.5, pop.Start.typed({2: 1}), 8, 200, seed=seed, jobs=jobs)
    pop.write_ensemble_csv(out / "trajectories.csv", ens)
    pop.write_trajectory_csv(out / "trajectory_0.csv", pop.simulate_trajectory(PAIR, 0.5, pop.Start.null(), 8, seed=seed))
    spine.write_urn_csv(out / "urn.csv", spine.simulate_urn(PAIR, 0.25, 1, 10_000, seed=seed), stride=10)
    grid = phase.compute_phase_grid(phase.GridSpec(resolution=(40, 40)), jobs=jobs)
    phase.write_grid_csv(out / "phase_grid.csv", grid)
    phase.write_curves_csv(out / "phase_curves.csv", grid)
    phase.write_svg(out / "phase_diagram.svg", grid)
    return sorted(out.iterdir())


def c18_determinism(ctx) -> CriterionResult:
    with tempfile.TemporaryDirectory() as tmp:
        a = write_artifacts(ctx.seed, Path(tmp) / "a", ctx.jobs)
        b = write_artifacts(ctx.seed, Path(tmp) / "b", ctx.jobs)
        names = [p.name for p in a]
        same = names == [p.name for p in b] and all(filecmp.cmp(x, y, shallow=False) for x, y in zip(a, b))
    return CriterionResult(18, "byte-identical artifacts for equal seeds", same, f"{len(names)} files: {', '.join(names)}")


CRITERIA: tuple[Callable, ...] = (
    c01_growth_closed_form, c02_ordering, c03_spectrum, c04_criteria_equivalence, c05_mean_asymptotics,
    c06_p_ell_contrast, c07_martingale, c08_starred, c09_low_m_star_collapse, c10_starred_share, c11_tree_identity, c12_coupling,
    c13_urn_law, c14_urn_lln, c15_spine_growth, c16_many_to_one, c17_phase_diagram, c18_determinism,
)


class Context:
    def __init__(self, seed: int, jobs: int = 1, scale: Scale = FULL):
        self.seed = seed
        self.jobs = jobs
        self.scale = scale
        self._grids: dict = {}

    def phase_grid(self, spec):
        if spec not in self._grids:
            self._grids[spec] = phase.compute_phase_grid(spec, jobs=self.jobs)
        return self._grids[spec]


def run_criterion(number: int, ctx: Context) -> CriterionResult:
    return CRITERIA[number - 1](ctx)


def format_line(r: CriterionResult) -> str:
    return f"[{'PASS' if r.passed else 'FAIL'}] {r.number:02d} {r.title}: {r.detail}"


def run_suite(seed: int, jobs: int = 1, scale: Scale = FULL, only=None, echo=print) -> list[CriterionResult]:
    ctx = Context(seed, jobs, scale)
    results = []
    for i, fn in enumerate(CRITERIA, start=1):
        if only and i not in only:
            continue
        t0 = time.perf_counter()
        r = fn(ctx)
        results.append(r)
        if echo:
            echo(f"{format_line(r)} ({time.perf_counter() - t0:.1f}s)")
    return results


def write_results_csv(path, results: list[CriterionResult]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["criterion", "title", "passed", "detail"])
        for r in results:
            w.writerow([r.number, r.title, int(r.passed), r.detail])
