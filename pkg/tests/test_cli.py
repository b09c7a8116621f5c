import json
import subprocess
import sys

import pytest

from oocrn.cli import main
from oocrn.crn import check_output_oblivious
from oocrn.crnfile import load_crn

from conftest import FIXTURES, spec_path


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


class TestCheck:
    def test_clean(self, capsys):
        code, out, _ = run(capsys, "check", spec_path("dip"))
        assert code == 0 and out.startswith("ok:")

    def test_swapped_orientation(self, capsys):
        code, out, _ = run(capsys, "check", spec_path("wedges_swapped"))
        assert code == 1 and "A1>B1 violated" in out

    def test_bad_rational(self, capsys):
        code, _, err = run(capsys, "check", spec_path("bad_rational"))
        assert code == 1 and "bad_rational.json" in err and "'2/0'" in err

    def test_json_syntax_location(self, capsys, tmp_path):
        bad = tmp_path / "s.json"
        bad.write_text('{"kind": "grid_affine",\n "pieces": [}\n')
        code, _, err = run(capsys, "check", bad)
        assert code == 1 and "s.json:2:" in err

    def test_larger_box(self, capsys, tmp_path):
        code, out, _ = run(capsys, "check", spec_path("affine"), "--box", "12,12")
        assert code == 0 and "[0,12]x[0,12]" in out


@pytest.mark.parametrize("name, point, value", [("affine", "3,2", "13"), ("dip", "2,2", "2"), ("wedges", "2,2", "10"),
                                                ("parity", "1,1", "6")])
def test_eval(capsys, name, point, value):
    code, out, _ = run(capsys, "eval", spec_path(name), "--input", point)
    assert code == 0 and out == value + "\n"


def test_eval_rejects_negative(capsys):
    with pytest.raises(SystemExit) as info:
        main(["eval", str(spec_path("affine")), "--input", "-1,2"])
    assert info.value.code == 2


class TestSynth:
    @pytest.mark.parametrize("name", ["affine", "dip", "parity"])
    def test_matches_golden(self, capsys, tmp_path, name):
        out = tmp_path / f"{name}.crn"
        code, _, _ = run(capsys, "synth", spec_path(name), "-o", out)
        assert code == 0
        assert out.read_text() == (FIXTURES / "golden" / f"{name}.crn").read_text()
        assert out.with_suffix(".synth.json").read_text() == (FIXTURES / "golden" / f"{name}.synth.json").read_text()

    def test_affine_has_three_reactions(self, capsys, tmp_path):
        out = tmp_path / "a.crn"
        run(capsys, "synth", spec_path("affine"), "-o", out)
        assert len(load_crn(out).reactions) == 3

    def test_fissure_is_output_oblivious(self, capsys, tmp_path):
        out = tmp_path / "b.crn"
        run(capsys, "synth", spec_path("dip"), "-o", out)
        assert check_output_oblivious(load_crn(out)) == []
        report = json.loads(out.with_suffix(".synth.json").read_text())
        assert report["fissures"][0]["span"] == 2 and report["output_oblivious"]

    def test_parity_branches(self, capsys, tmp_path):
        out = tmp_path / "e.crn"
        run(capsys, "synth", spec_path("parity"), "-o", out)
        report = json.loads(out.with_suffix(".synth.json").read_text())
        assert len(report["branches"]) == 4 and report["reaction_families"]["min"] == 3

    def test_stdout(self, capsys):
        code, out, _ = run(capsys, "synth", spec_path("affine"))
        assert code == 0 and "Lp + X2 -> Lp + 3 Y" in out

    def test_invalid_spec(self, capsys):
        code, _, err = run(capsys, "synth", spec_path("wedges_swapped"))
        assert code == 1 and "does not validate" in err


class TestSimulate:
    def test_output(self, capsys):
        code, out, _ = run(capsys, "simulate", FIXTURES / "golden" / "wedges.crn", "--input", "2,2", "--seed", "5")
        assert code == 0 and out == "10\n"

    def test_zero_input(self, capsys):
        code, out, _ = run(capsys, "simulate", FIXTURES / "golden" / "parity.crn", "--input", "0,0")
        assert out == "1\n"

    def test_trace_reproducible(self, capsys):
        args = ("simulate", FIXTURES / "golden" / "dip.crn", "--input", "3,2", "--seed", "9", "--trace")
        _, first, _ = run(capsys, *args)
        _, second, _ = run(capsys, *args)
        assert first == second and first.count("\n") > 5

    def test_budget(self, capsys):
        code, _, err = run(capsys, "simulate", FIXTURES / "golden" / "wedges.crn", "--input", "3,3",
                           "--max-steps", "3")
        assert code == 2 and "step budget" in err

    def test_one_input(self, capsys):
        code, out, _ = run(capsys, "simulate", FIXTURES / "double_minus_one.crn", "--input", "4")
        assert code == 0 and out == "7\n"


class TestVerify:
    def test_affine(self, capsys):
        code, out, _ = run(capsys, "verify", FIXTURES / "golden" / "affine.crn", "--spec", spec_path("affine"),
                           "--box", "4,4")
        assert code == 0 and "summary: 25 PASS, 0 FAIL, 0 INCONCLUSIVE" in out

    def test_hand_written_dip(self, capsys):
        code, out, _ = run(capsys, "verify", FIXTURES / "dip_leader.crn", "--spec", spec_path("dip"), "--box", "5,5")
        assert code == 0 and "output-oblivious: yes" in out

    def test_double_minus_one_not_oblivious(self, capsys):
        code, out, _ = run(capsys, "verify", FIXTURES / "double_minus_one.crn", "--spec", spec_path("double_minus_one"), "--box", "4")
        assert code == 0
        assert "output-oblivious: no" in out and "Y + L -> 0" in out

    def test_fail_prints_witness(self, capsys, tmp_path):
        code, out, _ = run(capsys, "verify", FIXTURES / "dip_leader.crn", "--spec", spec_path("affine"), "--box", "1,1")
        assert code == 1 and "witness for n=" in out

    def test_inconclusive(self, capsys):
        code, out, _ = run(capsys, "verify", FIXTURES / "golden" / "wedges.crn", "--spec", spec_path("wedges"),
                           "--box", "2,2", "--max-configs", "5")
        assert code == 2 and "INCONCLUSIVE" in out

    def test_random_and_json(self, capsys, tmp_path):
        report = tmp_path / "r.json"
        code, out, _ = run(capsys, "verify", FIXTURES / "golden" / "dip.crn", "--spec", spec_path("dip"),
                           "--box", "3,3", "--mode", "random", "--runs", "5", "--json", report)
        assert code == 0
        doc = json.loads(report.read_text())
        assert doc["summary"]["PASS"] == 16 and doc["verdicts"][0]["input"] == [0, 0]

    def test_jobs_same_report(self, capsys):
        base = ("verify", FIXTURES / "dip_leader.crn", "--spec", spec_path("dip"), "--box", "3,3")
        _, serial, _ = run(capsys, *base)
        _, parallel, _ = run(capsys, *base, "--jobs", "2")
        assert serial == parallel

    def test_unparsable_crn(self, capsys, tmp_path):
        bad = tmp_path / "bad.crn"
        bad.write_text("@input X\n@output Y\n@leader L\nX => Y\n")
        code, _, err = run(capsys, "verify", bad, "--spec", spec_path("affine"), "--box", "1,1")
        assert code == 1 and "bad.crn:4:" in err


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "oocrn", "eval", str(spec_path("affine")), "--input", "3,2"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and proc.stdout == "13\n"
