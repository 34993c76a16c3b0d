import csv
import io
import json
from collections import defaultdict

import pytest

from asmvlc.cli import main
from asmvlc.sweep import CSV_COLUMNS, SweepSpec, read_csv, run_sweep
from asmvlc import ConfigError, ModOrderCombo, build_channel_matrix, load_scenario
from asmvlc.ser import snr_db_to_sigma

from oracles import brute_average_ser


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


class TestChannelCommand:
    def test_scenario1(self, capsys, tmp_path):
        dest = tmp_path / "h.json"
        code, out, _ = run(capsys, "channel", "scenario1", "--json", dest)
        assert code == 0 and "LED1" in out and "PD1" in out
        doc = json.loads(dest.read_text())
        assert doc["n_r"] == 1 and doc["n_t"] == 2
        assert doc["gains"][0][0] > doc["gains"][0][1]

    def test_scenario4_positive(self, capsys, tmp_path):
        dest = tmp_path / "h.json"
        assert run(capsys, "channel", "scenario4", "--json", dest)[0] == 0
        gains = json.loads(dest.read_text())["gains"]
        assert len(gains) == 4 and all(g > 0 for row in gains for g in row)

    def test_idempotent(self, capsys, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        out1 = run(capsys, "channel", "scenario3", "--json", a)[1]
        out2 = run(capsys, "channel", "scenario3", "--json", b)[1]
        assert out1 == out2 and a.read_bytes() == b.read_bytes()

    def test_missing_file(self, capsys, tmp_path):
        dest = tmp_path / "h.json"
        code, out, err = run(capsys, "channel", tmp_path / "missing.json", "--json", dest)
        assert code == 2 and not dest.exists() and out == ""
        assert "cannot read" in err

    def test_bad_key_named(self, capsys, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text(json.dumps({"leds": [[1, 1, 3]], "pds": [[1, 1, 1]], "semi_angle_deg": 35,
                                 "area_cm2": 1, "fov_deg": "wide", "peak_intensity": 1}))
        code, _, err = run(capsys, "channel", p)
        assert code == 2 and "fov_deg" in err


class TestOptimizeCommand:
    def test_asm_scenario1(self, capsys, tmp_path):
        dest = tmp_path / "r.json"
        code, out, _ = run(capsys, "optimize", "scenario1", "--m", 3, "--snr-db", 130, "--json", dest)
        assert code == 0 and "best combo [8,2]" in out
        doc = json.loads(dest.read_text())
        assert doc["best_combo"] == [8, 2]
        assert len(doc["ranked"]) == 3

    def test_cr_asm_scenario1(self, capsys, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        run(capsys, "optimize", "scenario1", "--m", 3, "--snr-db", 130, "--json", a)
        code, out, _ = run(capsys, "optimize", "scenario1", "--m", 3, "--snr-db", 130,
                           "--scheme", "cr-asm", "--json", b)
        asm, cr = json.loads(a.read_text()), json.loads(b.read_text())
        assert code == 0 and cr["best_combo"] == asm["best_combo"] == [8, 2]
        assert cr["candidates_evaluated"] <= asm["candidates_evaluated"]

    def test_ssk_equivalent(self, capsys):
        code, out, _ = run(capsys, "optimize", "scenario1", "--m", 1, "--snr-db", 130)
        assert code == 0 and "[1,1]" in out and "SSK-equivalent" in out

    def test_infeasible_exit_code(self, capsys):
        code, _, err = run(capsys, "optimize", "scenario1", "--m", 3.3, "--snr-db", 130)
        assert code == 3 and "error" in err

    def test_needs_noise_level(self, capsys):
        assert run(capsys, "optimize", "scenario1", "--m", 3)[0] == 2


class TestTheoryAndSimulate:
    def test_theory(self, capsys):
        code, out, _ = run(capsys, "theory", "scenario1", "--combo", "[8,2]", "--snr-db", 130)
        H = build_channel_matrix(load_scenario("scenario1")).gains.tolist()
        want = brute_average_ser(H, [8, 2], 1.0, snr_db_to_sigma(130, 1.0))
        assert code == 0 and f"average SER {want:.6e}" in out

    def test_simulate(self, capsys, tmp_path):
        dest = tmp_path / "s.json"
        code, _, _ = run(capsys, "simulate", "scenario3", "--combo", "2,2", "--snr-db", 122,
                         "--trials", 200_000, "--seed", 5, "--json", dest)
        doc = json.loads(dest.read_text())
        assert code == 0 and doc["trials_run"] == 200_000
        assert abs(doc["ser_estimate"] - doc["theory"]) <= max(3 * doc["std_error"], 0.2 * doc["theory"])

    def test_combo_length_mismatch(self, capsys):
        assert run(capsys, "theory", "scenario1", "--combo", "[4,4,4,4]", "--snr-db", 130)[0] == 2


def group_theory(rows):
    groups = defaultdict(list)
    for r in rows:
        groups[(r["scheme"], r["combo"])].append((float(r["snr_db"]), float(r["ser_theory"])))
    return groups


class TestSweepCommand:
    def test_scenario1_schemes(self, capsys, tmp_path):
        dest = tmp_path / "s1.csv"
        code, _, _ = run(capsys, "sweep", "scenario1", "--snr-start-db", 110, "--snr-stop-db", 150,
                         "--snr-step-db", 2, "--schemes", "ASM,CR-ASM,SMS,SSK", "--m", 3, "-o", dest)
        assert code == 0
        rows = read_csv(dest)
        assert tuple(rows[0].keys()) == CSV_COLUMNS
        by = {(float(r["snr_db"]), r["scheme"]): r for r in rows}
        grid = sorted({float(r["snr_db"]) for r in rows})
        for snr in grid[len(grid) // 2:]:
            assert float(by[snr, "SMS"]["ser_theory"]) >= float(by[snr, "ASM"]["ser_theory"])
        for snr in grid:
            ssk = float(by[snr, "SSK"]["ser_theory"])
            for s in ("ASM", "CR-ASM", "SMS"):
                assert ssk <= float(by[snr, s]["ser_theory"])
            assert by[snr, "SSK"]["m"] == "1.0" and by[snr, "SMS"]["combo"] == "[4,4]"

    def test_row_invariants(self, tmp_path):
        spec = SweepSpec("scenario2", 120, 150, 3, ("ASM", "CR-ASM", "SMS", "SSK"), 4,
                         trials=20_000, seed=8, output_path=str(tmp_path / "o.csv"))
        run_sweep(spec)
        rows = read_csv(spec.output_path)
        for r in rows:
            assert 0.0 <= float(r["ser_theory"]) <= 1.0
            assert 0.0 <= float(r["ser_sim"]) <= 1.0
            assert float(r["std_error"]) >= 0.0
            assert r["seed"] == "8" and r["trials"] == "20000"
        for pts in group_theory(rows).values():
            pts.sort()
            assert all(b[1] <= a[1] for a, b in zip(pts, pts[1:]))

    def test_empty_schemes(self, capsys, tmp_path):
        dest = tmp_path / "none.csv"
        code, _, err = run(capsys, "sweep", "scenario1", "--snr-start-db", 120, "--snr-stop-db", 130,
                           "--schemes", "", "--m", 3, "-o", dest)
        assert code == 2 and not dest.exists() and "scheme" in err

    def test_infeasible_m(self, capsys, tmp_path):
        dest = tmp_path / "x.csv"
        code, _, _ = run(capsys, "sweep", "scenario1", "--snr-start-db", 120, "--snr-stop-db", 130,
                         "--schemes", "ASM", "--m", 3.25, "-o", dest)
        assert code == 3 and not dest.exists()

    @pytest.mark.parametrize("kw", [dict(snr_step_db=0), dict(snr_start_db=140), dict(schemes=("QAM",)),
                                    dict(spectral_efficiency=None)])
    def test_spec_validation(self, kw):
        base = dict(scenario_path="scenario1", snr_start_db=120, snr_stop_db=130, snr_step_db=1,
                    schemes=("ASM",), spectral_efficiency=3)
        with pytest.raises(ConfigError):
            SweepSpec(**{**base, **kw})

    def test_stdout_csv(self, capsys):
        code, out, _ = run(capsys, "compare", "scenario3", "--snr-start-db", 120, "--snr-stop-db", 122,
                           "--m", 3)
        rows = list(csv.DictReader(io.StringIO(out)))
        assert code == 0 and len(rows) == 3 * 4

    def test_reproducible_bytes(self, tmp_path):
        outs = []
        for k in range(2):
            spec = SweepSpec("scenario1", 140, 150, 5, ("ASM", "SMS"), 3, trials=30_000, seed=77,
                             output_path=str(tmp_path / f"{k}.csv"))
            run_sweep(spec)
            outs.append((tmp_path / f"{k}.csv").read_bytes())
        assert outs[0] == outs[1]

    def test_optimize_roundtrip(self, capsys, tmp_path):
        rep = tmp_path / "r.json"
        run(capsys, "optimize", "scenario4", "--m", 4, "--snr-db", 130, "--json", rep)
        best = ModOrderCombo(tuple(json.loads(rep.read_text())["best_combo"]))
        fixed = run_sweep(SweepSpec("scenario4", 110, 140, 5, ("ASM",), 4, operating_snr_db=130))
        override = run_sweep(SweepSpec("scenario4", 110, 140, 5, ("ASM",), 4, combo_override=best))
        assert [r.combo for r in fixed] == [best] * len(fixed)
        assert [r.ser_theory for r in fixed] == [r.ser_theory for r in override]
