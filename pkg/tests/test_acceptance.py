"""End-to-end acceptance gates for the shrinking-obstacle laboratory.

The full study runs exactly once per session (serially, so the cost of
every solver run is attributable to the criteria that consume it), and
each test below re-derives one criterion's verdict from the emitted
tables at the advertised tolerance, checks it against the report's own
verdict, and enforces the criterion's wall-clock budget.  `pytest -v`
therefore yields one pass/fail line per criterion; each test prints an
additional `Cxx label: pass/fail` line for log scraping.
"""

import time
from types import SimpleNamespace

import pytest

from thinflow.studies import StudyConfig, run_full_study

# wall-clock budgets, in seconds, per criterion
BUDGETS = {
    "C01": 5.0,
    "C02": 30.0,
    "C03": 30.0,
    "C04": 5.0,
    "C05": 10.0,
    "C06": 60.0,
    "C07": 120.0,
    "C08": 120.0,
    "C09": 300.0,
    "C10": 900.0,
    "C11": 600.0,
    "C12": 900.0,
}

# solver runs each criterion consumes (charged at full cost, so shared
# runs are over- rather than under-charged)
RUN_CHARGES = {
    "C09": ("eps0.1_128x256_thom",),
    "C10": ("eps0.2_128x256_thom", "eps0.1_128x256_thom",
            "eps0.05_128x256_thom"),
    "C11": ("eps0.1_64x128_thom", "eps0.1_128x256_thom"),
    "C12": ("eps0.1_64x128_thom", "eps0.1_128x256_thom",
            "eps0.1_256x512_thom", "eps0.1_256x512_jensen"),
}


@pytest.fixture(scope="module")
def result():
    study = StudyConfig(threads=1)
    marks = []

    def note(msg):
        marks.append((time.perf_counter(), msg))

    t0 = time.perf_counter()
    report = run_full_study(study, progress=note)
    t1 = time.perf_counter()

    phase = {}
    jobs = {}
    prev = t0
    for i, (t, msg) in enumerate(marks):
        nxt = marks[i + 1][0] if i + 1 < len(marks) else t1
        if msg.startswith("eps"):
            jobs[msg] = t - prev    # completion note: the cost precedes it
        else:
            phase[msg] = nxt - t    # announcement note: the cost follows it
        prev = t

    charged = {}
    for cid in BUDGETS:
        spent = next(v for m, v in phase.items() if m.startswith(cid))
        for label in RUN_CHARGES.get(cid, ()):
            spent += jobs[label]
        charged[cid] = spent
    return SimpleNamespace(report=report, charged=charged, jobs=jobs,
                           total=t1 - t0)


def _criterion(result, cid, ok, detail=""):
    label = result.report.labels[cid]
    spent, budget = result.charged[cid], BUDGETS[cid]
    verdict = result.report.verdicts[cid]
    ok = bool(ok) and verdict == "pass" and spent <= budget
    print(f"{cid} {label}: {'pass' if ok else 'fail'}"
          f" ({spent:.1f}s of {budget:.0f}s budget)")
    assert ok, (f"{cid} {label}: verdict={verdict},"
                f" spent={spent:.1f}s/{budget:.0f}s {detail}")


def _strictly_decreasing(seq):
    return all(b < a for a, b in zip(seq, seq[1:]))


def test_C01_carrier_circulation_unit(result):
    rows = result.report.tables["carrier_circulation"]
    ok = (
        {round(r["eps"], 6) for r in rows} == {0.2, 0.1, 0.05}
        and all(abs(r["circulation"] - 1.0) <= 1e-6 for r in rows)
    )
    _criterion(result, "C01", ok,
               detail=str([r["circulation"] for r in rows]))


def test_C02_initial_circulations(result):
    # the reference flow carries unit boundary circulation and balanced
    # bumps, so the large-circle value must also be 1
    rows = result.report.tables["initial_circulation"]
    cfg = result.report.config["flow"]
    ok = (
        cfg["curve_circulation"] == 1.0
        and {round(r["eps"], 6) for r in rows} == {0.2, 0.1, 0.05}
        and all(abs(r["boundary"] - 1.0) <= 1e-6 for r in rows)
        and all(abs(r["far"] - 1.0) <= 1e-6 for r in rows)
    )
    _criterion(result, "C02", ok)


def test_C03_farfield_decay_exponents(result):
    rows = {r["field"]: r for r in result.report.tables["farfield_decay"]}
    mag = rows["carrier_magnitude_1e3"]
    ok = (
        abs(rows["carrier"]["slope"] + 1.0) <= 0.05
        and abs(rows["induced"]["slope"] + 2.0) <= 0.1
        and abs(rows["shifted"]["slope"] + 2.0) <= 0.1
        and not any(rows[k]["unreliable"]
                    for k in ("carrier", "induced", "shifted"))
        # |x| |H| at |x| = 1e3 within 1% of 1/(2 pi)
        and abs(mag["slope"] / mag["target"] - 1.0) <= 0.01
    )
    _criterion(result, "C03", ok,
               detail=str({k: rows[k]["slope"] for k in rows}))


def test_C04_endpoint_blowup_exponent(result):
    row = result.report.tables["endpoint_blowup"][0]
    ok = (
        abs(row["slope"] + 0.5) <= 0.05
        and not row["unreliable"]
        and len(row["magnitudes"]) >= 5
    )
    _criterion(result, "C04", ok, detail=f"slope={row['slope']}")


def test_C05_slit_jump_profile(result):
    # the closed form for a unit-circulation slit: 1 / (pi sqrt(1 - x^2))
    rows = result.report.tables["slit_jump"]
    total = result.report.tables["slit_jump_total"][0]
    pi = 3.141592653589793
    ok = (
        {r["x"] for r in rows} == {0.0, 0.5, -0.5}
        and all(
            abs(r["value"] * pi * (1.0 - r["x"] ** 2) ** 0.5 - 1.0) <= 1e-3
            for r in rows
        )
        and abs(total["integral"] - 1.0) <= 1e-3
        and total["oracle_verified"]
    )
    _criterion(result, "C05", ok)


def test_C06_family_health_monotone(result):
    rows = result.report.tables["family_health"]
    gaps = [r["sup_rel_map_dev"] for r in rows]
    ok = (
        [round(r["epsilon"], 6) for r in rows] == [0.2, 0.1, 0.05, 0.025]
        and all(
            abs(r["sup_rel_map_dev"] - r["epsilon"] / (1.0 + r["epsilon"]))
            <= 1e-12
            for r in rows
        )
        and _strictly_decreasing(gaps)
        and _strictly_decreasing([r["l3_derivative_dev"] for r in rows])
    )
    _criterion(result, "C06", ok)


def test_C07_initial_data_l2_convergence(result):
    rows = result.report.tables["initial_data_convergence"]
    dists = [r["distance"] for r in rows]
    ok = (
        [round(r["eps"], 6) for r in rows] == [0.2, 0.1, 0.05, 0.025]
        and all(d > 0.0 for d in dists)
        and _strictly_decreasing(dists)
    )
    _criterion(result, "C07", ok, detail=str(dists))


def test_C08_solver_exactness_anchors(result):
    rows = {r["anchor"]: r for r in result.report.tables["solver_anchors"]}
    ok = (
        rows["zero_data"]["value"] == 0.0
        and rows["poisson_carrier"]["value"] <= 1e-10
        and rows["poisson_orders"]["value"] >= 1.9
        and rows["diffusion_orders"]["value"] >= 1.9
    )
    _criterion(result, "C08", ok,
               detail=str({k: rows[k]["value"] for k in rows}))


def test_C09_conservation_and_energy(result):
    rows = {r["quantity"]: r["value"]
            for r in result.report.tables["conservation_energy"]}
    runs = {r["run"]: r for r in result.report.tables["runs"]}
    ok = (
        rows["beta_defect_max"] <= 1e-6
        and rows["far_circulation_error"] <= 1e-4
        and rows["envelope_margin"] <= 1.0
        # the reference run actually covers the unit time interval
        and runs["eps0.1_128x256_thom"]["final_time"] >= 1.0 - 1e-9
    )
    _criterion(result, "C09", ok, detail=str(rows))


def test_C10_flow_family_cauchy(result):
    rows = result.report.tables["flow_convergence"]
    dists = [r["distance"] for r in rows]
    ok = (
        [r["eps_pair"] for r in rows] == [[0.2, 0.1], [0.1, 0.05]]
        and all(d > 0.0 for d in dists)
        and _strictly_decreasing(dists)
    )
    _criterion(result, "C10", ok, detail=str(dists))


def test_C11_weak_residual_refinement(result):
    rows = result.report.tables["weak_residual"]
    ok = (
        len(rows) == 3
        and all(r["factor"] >= 3.0 for r in rows)
    )
    _criterion(result, "C11", ok,
               detail=str({r["field"]: r["factor"] for r in rows}))


def test_C12_twin_run_agreement(result):
    rows = result.report.tables["twin_runs"]
    ladder = [r for r in rows if r["coarse"] != ["thom"]]
    closure = [r for r in rows if r["coarse"] == ["thom"]][0]
    dists = [r["distance"] for r in ladder]
    scale = dists[-1]
    ok = (
        len(ladder) == 2
        and _strictly_decreasing(dists)
        and closure["distance"] <= 2.0 * scale
    )
    _criterion(result, "C12", ok,
               detail=f"ladder={dists} closure={closure['distance']}")


def test_full_report_coherence(result):
    rep = result.report
    assert sorted(rep.verdicts) == sorted(BUDGETS)
    assert rep.all_pass()
    assert rep.guards.get("cadence_halving_stable") is True
    assert len(rep.config_hash) == 64
    assert set(rep.config_hash) <= set("0123456789abcdef")
    assert result.total <= sum(BUDGETS.values())
    stamp = " ".join(f"{k}={v:.1f}s" for k, v in sorted(result.jobs.items()))
    print(f"full study wall time {result.total:.1f}s; {stamp}")
