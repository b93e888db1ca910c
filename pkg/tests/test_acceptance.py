"""
Acceptance criteria, one test each. Every test records a single PASS/FAIL
line that is repeated in the "acceptance criteria" section of the pytest
summary.

Criterion 4 needs the public SSA files, which are not shipped. Point
PROXIMITY_SSA_STATE at namesbystate.zip (or its unpacked directory), and
optionally PROXIMITY_SSA_NATIONAL at names.zip; `proximity fetch` downloads
both. Without them the criterion fails with an explanatory message.
"""
import json
import os
import time
from pathlib import Path

import numpy as np
import pytest

from proximity.adjacency import STATES, load_adjacency
from proximity.babynames import NameRecord, build_panel, parse_national, parse_state
from proximity.cli import main
from proximity.gravity import GravityConfig, fit_window, simulate
from proximity.pei import (PeiError, breakpoint_test, compute_pei, compute_series, pei_value,
                           yearly_aggregate)
from proximity.powerlaw import (fit_mle, fit_rank, force_zeros, sample_truncated_power_law,
                                sample_truncated_zipf)

from test_pei import EXPECTED_GROUP_A, oracle

BUNDLED = Path(__file__).resolve().parents[1] / "src" / "proximity" / "data" / "torus-5000.json"
GRAPH = load_adjacency()


@pytest.mark.slow
def test_criterion_1_gravity_shape(criterion):
    base = GravityConfig.from_json(BUNDLED)
    seeds = range(100, 120)
    exps, worst = [], 0.0
    for seed in seeds:
        cfg = GravityConfig.from_dict({**base.to_dict(), "seed": seed})
        t0 = time.perf_counter()
        links = simulate(cfg)
        lo, hi = fit_window(cfg)
        exps.append(fit_mle(links.distances, lo, hi).exponent)
        worst = max(worst, time.perf_counter() - t0)
    exps = np.array(exps)
    share = np.mean(np.abs(exps - 1) <= 0.1)
    ok = share >= 0.9 and worst <= 60
    criterion(1, ok, f"{len(exps)} seeds, {share:.0%} within 1.0 +/- 0.1 "
                     f"(range {exps.min():.3f}-{exps.max():.3f}), slowest seed {worst:.1f} s")
    assert ok


@pytest.mark.slow
def test_criterion_2_estimator_recovery(criterion):
    seeds = range(200)
    rank_ok = {}
    for n, zeros in ((1297, 0.0), (4455, 0.41)):
        hits = 0
        for s in seeds:
            sample = sample_truncated_zipf(n, 1.0, 5000.0, seed=s)
            if zeros:
                sample = force_zeros(sample, zeros, seed=10_000 + s)
            hits += fit_rank(sample).correlation <= -0.98
        rank_ok[n] = hits / len(seeds)
    mle_ok = {}
    for alpha in (1.0, 1.12, 1.20):
        for n in (1297, 4455):
            hits = 0
            for s in seeds:
                sample = sample_truncated_power_law(n, alpha, 1.0, 5000.0, seed=20_000 + s)
                f = fit_mle(sample, 1.0, 5000.0)
                hits += abs(f.exponent - alpha) <= 3 * f.stderr
            mle_ok[(alpha, n)] = hits / len(seeds)
    ok = min(rank_ok.values()) >= 0.95 and min(mle_ok.values()) >= 0.95
    detail = ("rank corr <= -0.98: " + ", ".join(f"n={n} {v:.1%}" for n, v in rank_ok.items())
              + "; MLE within 3 se: " + ", ".join(f"a={a} n={n} {v:.1%}" for (a, n), v in mle_ok.items()))
    criterion(2, ok, detail)
    assert ok


def test_criterion_3_toy_exactness(criterion, toy_states):
    panel = build_panel(parse_state(toy_states).records)
    series = compute_series(panel, GRAPH, (1990, 1993), "new")
    worst = 0.0
    got = {(p.name, p.year): p.pei for p in series.points}
    for key, ga in EXPECTED_GROUP_A.items():
        want = float(oracle(key[0], key[1], ga))
        err = abs(got[key] - want) / abs(want) if want else abs(got[key])
        worst = max(worst, err)
    ok = set(got) == set(EXPECTED_GROUP_A) and worst <= 1e-12
    criterion(3, ok, f"{len(got)} toy PEI values, worst relative error {worst:.2e}")
    assert ok


def _ssa_paths():
    state = os.environ.get("PROXIMITY_SSA_STATE")
    national = os.environ.get("PROXIMITY_SSA_NATIONAL")
    return (state if state and os.path.exists(state) else None,
            national if national and os.path.exists(national) else None)


def headline(panel, cohort="new"):
    series = compute_series(panel, GRAPH, (1970, 2005), cohort)
    med = series.medians()
    pre = [v for y, v in med.items() if y < 1995]
    post = [v for y, v in med.items() if y >= 1995]
    bp = breakpoint_test(series, 1995, "medians")
    checks = {
        # under the "new" rule the earliest possible PEI year is 1972
        "a": all(v > 0 for v in med.values()) and set(range(1972, 2006)) <= set(med),
        "b": np.mean([p.pei > 0 for p in series.points]) >= 0.95,
        "c": abs(np.mean(pre) - 0.203) <= 0.08 and abs(np.mean(post) - 0.267) <= 0.08,
        "d": bp.mean_post > bp.mean_pre and bp.p_value < 0.01,
    }
    summary = (f"points {len(series.points)}, positive {np.mean([p.pei > 0 for p in series.points]):.1%}, "
               f"pre mean {np.mean(pre):.3f}, post mean {np.mean(post):.3f}, t {bp.t:.2f} p {bp.p_value:.2g}")
    return checks, summary


@pytest.mark.slow
def test_criterion_4_headline(criterion):
    state, national = _ssa_paths()
    if state is None:
        criterion(4, False, "SSA per-state files not available: set PROXIMITY_SSA_STATE "
                            "(run `proximity fetch` where ssa.gov is reachable)")
        pytest.fail("SSA per-state data missing; criterion 4 cannot be evaluated")
    t0 = time.perf_counter()
    records = parse_state(state, years=(1970, 2005)).records
    if national:
        records += [r for r in parse_national(national).records if 1970 <= r.year <= 2005]
    checks, summary = headline(build_panel(records, (1970, 2005)))
    lines = [f"default rules: {summary} {checks}"]
    # if the level band misses under the default rules, some documented variant must hit it
    level_ok = checks["c"]
    for cohort, top_n in (("new", None), ("seeded", 100), ("seeded", None)):
        if level_ok:
            break
        alt, alt_summary = headline(build_panel(records, (1970, 2005), top_n=top_n), cohort)
        lines.append(f"cohort={cohort} top_n={top_n or 'all'}: {alt_summary} {alt}")
        level_ok = alt["c"]
    elapsed = time.perf_counter() - t0
    ok = checks["a"] and checks["b"] and checks["d"] and level_ok and elapsed <= 300
    criterion(4, ok, " | ".join(lines) + f" | {elapsed:.0f} s")
    assert ok


def test_criterion_5_saturation_degeneracy(criterion):
    # every state already lists the name: Group A is the whole country
    recs = []
    for i, s in enumerate(STATES):
        recs += [NameRecord("sat", "F", s, 1990, 3 + i), NameRecord("sat", "F", s, 1991, 5 + 2 * i),
                 NameRecord("fill", "F", s, 1991, 1000 + 37 * i)]
    panel = build_panel(recs)
    p = compute_pei("sat", "F", 1991, panel, GRAPH)
    saturated = p.group_a == set(STATES) and p.pei == 0.0 and pei_value(7, 0, 1234, 0) == 0.0
    try:
        compute_pei("sat", "F", 1990, panel, GRAPH)
        undefined = False
    except PeiError:
        undefined = True
    vals = [0.1, 0.2, 0.3]
    outlier = yearly_aggregate(vals + [1000.0]).median == yearly_aggregate(vals + [0.35]).median == 0.25
    ok = saturated and undefined and outlier
    criterion(5, ok, f"saturated PEI {p.pei!r}, undefined before first listing: {undefined}, "
                     f"median with 1000.0 outlier {yearly_aggregate(vals + [1000.0]).median!r}")
    assert ok


def _tree(d):
    return {p.relative_to(d).as_posix(): p.read_bytes() for p in sorted(Path(d).rglob("*")) if p.is_file()}


@pytest.mark.slow
def test_criterion_6_determinism(criterion, tmp_path, toy_states, toy_national):
    mirror = tmp_path / "mirror"
    (mirror / "state").mkdir(parents=True)
    (mirror / "names.zip").write_bytes(b"n" * 100)
    (mirror / "state" / "namesbystate.zip").write_bytes(b"s" * 100)
    commands = {
        "fit-distances": ["fit-distances", "--synthetic", "zipf", "--zero-fraction", "0.41", "--n", "4455"],
        "simulate-gravity": ["simulate-gravity", "torus-5000.json"],
        "compute-pei": ["compute-pei", "--state-data", toy_states, "--national-data", toy_national,
                        "--window", "1990", "1993", "--breakpoint", "1993"],
        "export-map": ["export-map", "--state-data", toy_states, "--name", "alpha", "--sex", "F", "--year", "1993"],
        "fetch": ["fetch", "--url-base", mirror.as_uri()],
    }
    same = {}
    for name, argv in commands.items():
        runs = []
        for k in ("a", "b"):
            out = tmp_path / name / k
            assert main(["--out-dir", str(out), "--seed", "11", "--quiet"] + [str(a) for a in argv]) == 0
            runs.append(_tree(out))
        same[name] = bool(runs[0]) and runs[0] == runs[1]
    ok = all(same.values())
    criterion(6, ok, ", ".join(f"{k} {'identical' if v else 'DIFFERENT'}" for k, v in same.items()))
    assert ok


def test_headline_pipeline_on_synthetic_diffusion(tmp_path):
    # names spread from a seed state to its neighbours: PEI should be positive
    rng = np.random.default_rng(5)
    rows = {s: [] for s in STATES}
    for year in range(1970, 2006):
        for s in STATES:
            rows[s].append((s, "F", year, "Filler", 5000 + 100 * STATES.index(s)))
    for k in range(60):
        name, start = f"Nm{k}", 1971 + k % 34
        held = {STATES[rng.integers(len(STATES))]}
        for year in range(start, 2006):
            for s in sorted(held):
                rows[s].append((s, "F", year, name, int(rng.integers(20, 80))))
            held |= {n for s in held for n in GRAPH[s] if rng.random() < 0.3}
    d = tmp_path / "states"
    d.mkdir()
    for s, rs in rows.items():
        (d / f"{s}.TXT").write_text("".join(",".join(map(str, r)) + "\r\n" for r in rs))
    checks, summary = headline(build_panel(parse_state(d, years=(1970, 2005)).records, (1970, 2005)))
    assert checks["a"] and checks["b"], summary
