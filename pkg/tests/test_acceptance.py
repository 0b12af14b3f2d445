"""Acceptance criteria 1-10, each run end to end through the CLI presets.

Every check prints one PASS/FAIL line. Run directly with
`python3 tests/test_acceptance.py` or through pytest.
"""

import contextlib
import io
import json
import sys
import tempfile
import time
from pathlib import Path

import pytest

from muskat_film.cli import main, preset_path
from muskat_film.io import read_csv


def run_preset(name: str, out: Path) -> tuple[int, dict, float]:
    """Exit code, summary.json and wall time of one preset run."""
    command = json.loads(preset_path(name).read_text())["command"]
    t0 = time.perf_counter()
    with contextlib.redirect_stderr(io.StringIO()):
        code = main([command, "--config", f"preset:{name}", "--out", str(out)])
    elapsed = time.perf_counter() - t0
    summary = json.loads((out / "summary.json").read_text()) if (out / "summary.json").exists() else {}
    return code, summary, elapsed


def inequality_rows(out: Path) -> list[dict]:
    _, header, rows = read_csv(out / "inequalities.csv")
    out_rows = []
    for r in rows:
        d = dict(zip(header, r))
        d.update(lhs=float(d["lhs"]), rhs=float(d["rhs"]), slack=float(d["slack"]))
        out_rows.append(d)
    return out_rows


def ac1(tmp: Path):
    code, s, t = run_preset("ac01_wiener_suite", tmp)
    fam = s["families"]
    names = {"product", "power_2", "power_3", "power_4", "G_composition"}
    interp = [k for k in fam if k.startswith("interpolation")]
    ok = (code == 0 and names <= set(fam) and len(interp) == 5
          and all(fam[k]["count"] == 200 for k in names | set(interp))
          and s["violations"] == 0 and min(f["min_slack"] for f in fam.values()) >= -1e-12 and t < 10)
    return ok, f"{len(fam)} families x 200 draws, violations {s['violations']}, " \
               f"min slack {min(f['min_slack'] for f in fam.values()):.3g}", t


def ac2(tmp: Path):
    code, s, t = run_preset("ac02_elliptic_solver", tmp)
    rows = {r["name"]: r for r in inequality_rows(tmp)}
    exact = max(rows["manufactured_cosh"]["lhs"], rows["manufactured_quadratic"]["lhs"])
    orders = [rows[k]["rhs"] for k in rows if k.startswith("residual_order")]
    ok = code == 0 and exact <= 1e-10 and len(orders) == 2 and min(orders) >= 1.9 and t < 10
    return ok, f"manufactured error {exact:.2g}, residual orders {', '.join(f'{o:.3f}' for o in orders)}", t


def ac3(tmp: Path):
    code, s, t = run_preset("ac03_elliptic_estimate", tmp)
    fam = s["families"]["elliptic_C10"]
    ok = code == 0 and fam["count"] == 100 and fam["violations"] == 0 and t < 30
    return ok, f"{fam['count']} draws, {fam['violations']} violations, min slack {fam['min_slack']:.3g}", t


def ac4(tmp: Path):
    c1, s1, t1 = run_preset("ac04_remainder_first_order", tmp / "fo")
    c2, s2, t2 = run_preset("ac04_remainder_refined", tmp / "ref")
    ok = (c1 == c2 == 0 and 0.9 <= s1["slope"] <= 1.1 and 1.4 <= s2["slope"] <= 1.6
          and s1["meta"]["compliant"] and s2["meta"]["compliant"] and t1 + t2 < 60)
    return ok, f"FirstOrder slope {s1['slope']:.4f} (0.9-1.1), Refined slope {s2['slope']:.4f} (1.4-1.6)", t1 + t2


def ac5(tmp: Path):
    code, s, t = run_preset("ac05_thin_film_energy", tmp)
    led = s["ledger"]
    ok = (code == 0 and led["compliant"] and s["t_final"] == 5.0
          and led["min_inequality_slack"] >= -1e-10 and led["min_decay_slack"] >= -1e-10 and t < 60)
    return ok, f"T = {s['t_final']:g}, min inequality slack {led['min_inequality_slack']:.3g}, " \
               f"min decay slack {led['min_decay_slack']:.3g}", t


def ac6(tmp: Path):
    drifts, total = {}, 0.0
    for name in ("ac06_mass_conservation", "ac05_thin_film_energy", "ac10_illposed_growth"):
        code, s, t = run_preset(name, tmp / name)
        total += t
        drifts[name] = s["mass_drift"] if code == 0 else float("inf")
    worst = max(drifts.values())
    return worst <= 1e-12, f"max |mode 0 drift| {worst:.3g} over {len(drifts)} trajectories", total


def ac7(tmp: Path):
    code, s, t = run_preset("ac07_decomposition", tmp)
    rows = inequality_rows(tmp)
    ok = code == 0 and len(rows) == 3 and all(r["lhs"] <= r["rhs"] for r in rows) and t < 30
    worst = max(r["lhs"] / r["rhs"] for r in rows)
    return ok, f"{len(rows)} decompositions, worst residual {worst:.3g} x (100 tol)", t


def ac8(tmp: Path):
    code, s, t = run_preset("ac08_convergence_thin_film", tmp)
    ok = code == 0 and s["meta"]["compliant"] and 0.8 <= s["slope"] <= 1.3 and t < 900
    return ok, f"slope {s['slope']:.4f} (0.8-1.3), r^2 {s['r_squared']:.4f}", t


def ac9(tmp: Path):
    c1, s1, t1 = run_preset("ac09_convergence_refined_stable", tmp / "stable")
    c2, s2, t2 = run_preset("ac09_convergence_refined_unstable", tmp / "unstable")
    ok = (c1 == 0 and s1["meta"]["compliant"] and 1.3 <= s1["slope"] <= 1.8
          and c2 == 0 and s2["meta"]["all_above_mu_zero"] and t1 + t2 < 900)
    return ok, f"stable slope {s1['slope']:.4f} (1.3-1.8); unstable slope {s2['slope']:.4f} " \
               f"reported, mu >= mu_0 = {s2['meta']['mu_zero']:.4g}", t1 + t2


def ac10(tmp: Path):
    code, s, t = run_preset("ac10_illposed_growth", tmp)
    g = [m for m in s["mode_growth"] if m["n"] == 6][0]
    ok = code == 0 and g["relative_error"] <= 0.05 and t < 10
    return ok, f"rate {g['measured_rate']:.6g} vs symbol {g['symbol']:.6g}, " \
               f"relative error {g['relative_error']:.2g}", t


CRITERIA = [
    (1, "Wiener inequality suite", ac1),
    (2, "elliptic solver correctness", ac2),
    (3, "elliptic estimate constant C = 10", ac3),
    (4, "remainder scaling", ac4),
    (5, "thin-film energy inequality and decay", ac5),
    (6, "mass conservation", ac6),
    (7, "decomposition residual", ac7),
    (8, "convergence rate O(mu)", ac8),
    (9, "convergence rate O(mu^3/2), stable regime", ac9),
    (10, "ill-posedness diagnostic", ac10),
]


def evaluate(number, label, check, tmp: Path) -> tuple[bool, str]:
    try:
        ok, detail, elapsed = check(tmp)
    except Exception as exc:  # a crash is a failure of the criterion, reported on its line
        ok, detail, elapsed = False, f"{type(exc).__name__}: {exc}", float("nan")
    line = f"AC{number:<2} {'PASS' if ok else 'FAIL'}  {label}: {detail} [{elapsed:.1f} s]"
    return ok, line


@pytest.mark.parametrize("number,label,check", CRITERIA, ids=[f"ac{n:02d}" for n, _, _ in CRITERIA])
def test_criterion(number, label, check, tmp_path, capsys):
    ok, line = evaluate(number, label, check, tmp_path)
    with capsys.disabled():
        print("\n" + line)
    assert ok, line


if __name__ == "__main__":
    failures = 0
    with tempfile.TemporaryDirectory() as d:
        for number, label, check in CRITERIA:
            tmp = Path(d) / f"ac{number}"
            tmp.mkdir()
            ok, line = evaluate(number, label, check, tmp)
            failures += not ok
            print(line, flush=True)
    sys.exit(1 if failures else 0)
