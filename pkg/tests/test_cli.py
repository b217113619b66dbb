import json

import pytest

from felldual.bundles import bundle_to_json_dict, save_bundle
from felldual.cli import EXIT_OK, EXIT_USAGE, EXIT_VERIFICATION, main
from felldual.demos import demo_bundle


@pytest.fixture()
def swap_file(tmp_path):
    path = tmp_path / "swap.json"
    save_bundle(demo_bundle("swap"), str(path))
    return str(path)


@pytest.fixture()
def broken_file(tmp_path):
    data = bundle_to_json_dict(demo_bundle("z2line"))
    data["fibers"]["1"] = []
    path = tmp_path / "broken.json"
    path.write_text(json.dumps(data))
    return str(path)


class TestValidate:
    def test_valid_file(self, swap_file, capsys):
        assert main(["validate", swap_file]) == EXIT_OK
        out = capsys.readouterr().out
        assert "saturation" in out and "pass" in out

    def test_broken_saturation_names_pair(self, broken_file, capsys):
        assert main(["validate", broken_file]) == EXIT_VERIFICATION
        out = capsys.readouterr().out
        assert "FAIL" in out and "saturation" in out
        assert "(" in out  # names the failing arrow pair

    def test_malformed_json(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        assert main(["validate", str(bad)]) == EXIT_USAGE

    def test_missing_file(self, capsys):
        assert main(["validate", "/nonexistent.json"]) == EXIT_USAGE


class TestDuality:
    def test_demo_z2line(self, capsys):
        assert main(["duality", "--demo", "z2line"]) == EXIT_OK
        out = capsys.readouterr().out
        assert "verdict: pass" in out

    def test_demo_swap_reports_summary(self, capsys):
        assert main(["duality", "--demo", "swap"]) == EXIT_OK
        out = capsys.readouterr().out
        assert "D = 4" in out
        assert "verdict: pass" in out

    def test_file_target(self, swap_file, capsys):
        assert main(["duality", swap_file]) == EXIT_OK

    def test_json_report_deterministic(self, tmp_path, capsys):
        out1 = tmp_path / "a.json"
        out2 = tmp_path / "b.json"
        assert main(["duality", "--demo", "trivial",
                     "--json", str(out1)]) == EXIT_OK
        assert main(["duality", "--demo", "trivial",
                     "--json", str(out2)]) == EXIT_OK
        assert out1.read_bytes() == out2.read_bytes()
        doc = json.loads(out1.read_text())
        assert doc["verdict"] == "pass"
        assert "wall_times" not in doc

    def test_json_with_timings(self, tmp_path, capsys):
        out = tmp_path / "t.json"
        assert main(["duality", "--demo", "trivial", "--timings",
                     "--json", str(out)]) == EXIT_OK
        assert "wall_times" in json.loads(out.read_text())

    def test_unknown_demo(self, capsys):
        assert main(["duality", "--demo", "nope"]) == EXIT_USAGE

    def test_bad_tol(self, capsys):
        assert main(["duality", "--demo", "trivial", "--tol", "0.5"]) \
            == EXIT_USAGE

    def test_no_targets(self, capsys):
        assert main(["duality"]) == EXIT_USAGE

    def test_broken_bundle_rejected(self, broken_file, capsys):
        assert main(["duality", broken_file]) == EXIT_USAGE

    def test_parallel_multiple_targets(self, capsys):
        assert main(["duality", "--demo", "trivial", "--demo", "z2line",
                     "--parallel"]) == EXIT_OK
        out = capsys.readouterr().out
        assert out.count("verdict: pass") == 2

    def test_tiny_tolerance_fails_with_report(self, capsys):
        assert main(["duality", "--demo", "z2line", "--tol", "1e-16"]) \
            == EXIT_VERIFICATION
        out = capsys.readouterr().out
        assert "fail" in out


class TestDemo:
    def test_trivial_profile(self, capsys):
        assert main(["demo", "trivial"]) == EXIT_OK
        assert "D = 1" in capsys.readouterr().out

    def test_z2line_profile(self, capsys):
        assert main(["demo", "z2line"]) == EXIT_OK
        assert "D = 2" in capsys.readouterr().out

    def test_pauli_profile(self, capsys):
        assert main(["demo", "pauli"]) == EXIT_OK
        out = capsys.readouterr().out
        assert "D = 4" in out and "ambient 4" in out

    def test_emit_round_trip(self, tmp_path, capsys):
        path = tmp_path / "out.json"
        assert main(["demo", "swap", "--emit", str(path)]) == EXIT_OK
        assert main(["validate", str(path)]) == EXIT_OK

    def test_unknown_name(self, capsys):
        assert main(["demo", "unknown"]) == EXIT_USAGE


class TestListDemos:
    def test_lists_all_five(self, capsys):
        assert main(["list-demos"]) == EXIT_OK
        out = capsys.readouterr().out
        for name in ("trivial", "z2line", "cyclic3", "swap", "pauli"):
            assert name in out
