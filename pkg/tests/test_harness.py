import csv
import json
import subprocess
import sys

import jsonschema
import pytest

from pclab import harness as h
from pclab.cli import main


def strip_timings(report):
    r = json.loads(json.dumps(report))
    r["metrics"].pop("timings_ms")
    return r


def test_vlm_report_schema_and_verdict():
    r = h.cmd_verify_vlm(5)
    h.validate_report(r)
    assert r["verdict"] == h.VERIFIED and r["metrics"]["omega"] == 5
    assert r["field"]["p"] == 5 and r["field"]["N"] == 2
    assert r["metrics"]["counts"]["max_cliques_01"] == 1


def test_reports_are_reproducible():
    a = h.cmd_verify_gpstar(9, 10, 9, seed=3)
    b = h.cmd_verify_gpstar(9, 10, 9, seed=3)
    assert strip_timings(a) == strip_timings(b)
    assert a["verdict"] == h.VERIFIED


def test_gpstar_wrong_count_is_refuted_with_witnesses():
    r = h.cmd_verify_gpstar(9, 10, 5)
    assert r["verdict"] == h.REFUTED
    assert len(r["witnesses"]) == 9 and all(len(w) == 9 for w in r["witnesses"])
    assert all(w[0] == -1 for w in r["witnesses"])  # zero is written as -1


def test_maximal_peisert_q3():
    r = h.cmd_verify_maximal_peisert(3)
    assert r["verdict"] == h.REFUTED
    c = r["metrics"]["counts"]
    assert r["metrics"]["omega"] == 9 and c["extension_size"] == 9 and c["structure_consistent"] == 1
    assert r["witnesses"]


def test_not_applicable_cases():
    assert h.cmd_verify_mullin(5)["verdict"] == h.NOT_APPLICABLE
    assert h.cmd_verify_sziklai(5, 4)["verdict"] == h.NOT_APPLICABLE
    assert h.cmd_cor_improvement(9)["verdict"] == h.NOT_APPLICABLE
    assert h.cmd_charsum("primecor", 5, N=3)["verdict"] == h.NOT_APPLICABLE


def test_cor_improvement_verified_when_m_small():
    r = h.cmd_cor_improvement(9, family="peisert_type", reps=[0, 1])
    assert r["metrics"]["counts"]["cosets_m"] == 2
    assert r["verdict"] == h.VERIFIED
    assert h.largest_proper_divisor(1) == 0 and h.largest_proper_divisor(6) == 3


def test_conjecture_r():
    assert h.conjecture_r(11**3, 11, 7) == 1
    assert h.conjecture_r(3**4, 3, 5) == 2  # d | (81-1)/(9-1) = 10, not (81-1)/(81-1)


def test_timeout_verdict():
    r = h.cmd_verify_maximal_peisert(3, budget_ms=0)
    assert r["verdict"] in (h.TIMEOUT, h.REFUTED)
    r = h.cmd_verify_vlm(13, budget_ms=0)
    assert r["verdict"] == h.TIMEOUT
    assert r["metrics"]["margins"]["lower_bound"] <= r["metrics"]["margins"]["upper_bound"]


def test_charsum_csv(tmp_path):
    out = tmp_path / "katz.csv"
    r = h.cmd_charsum("katz", 9, N=2, csv_path=out)
    assert r["verdict"] == h.VERIFIED
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 72 * 79
    assert max(float(x["magnitude"]) for x in rows) <= 3 + 1e-9
    assert r["metrics"]["counts"]["grazing"] > 0  # the bound is attained


def test_epsilon_command():
    r = h.cmd_epsilon(d=26)
    assert r["verdict"] == h.VERIFIED and r["field"] is None
    r = h.cmd_epsilon(points=[1, 1j])
    assert abs(r["metrics"]["margins"]["epsilon_star"] - 2**-0.5) < 1e-9


def test_schema_rejects_bad_reports():
    r = h.cmd_epsilon(d=4)
    r["verdict"] = "maybe"
    with pytest.raises(jsonschema.ValidationError):
        h.validate_report(r)


@pytest.mark.parametrize("argv,code", [
    (["verify-vlm", "--q", "3"], 0),
    (["verify-gpstar", "--q", "9", "--d", "10", "--count", "8"], 1),
    (["verify-mullin", "--p", "5"], 2),
    (["verify-vlm", "--q", "13", "--budget-ms", "0"], 3),
    (["verify-vlm"], 4),
    (["no-such-command"], 4),
    (["verify-sziklai", "--q", "12", "--d", "3"], 4),
])
def test_cli_exit_codes(argv, code, capsys):
    assert main(argv) == code


def test_cli_json_and_cache(tmp_path):
    out = tmp_path / "r.json"
    cache = tmp_path / "cache"
    assert main(["verify-sziklai", "--q", "5", "--d", "3", "--json", str(out), "--cache-dir", str(cache)]) == 0
    report = json.loads(out.read_text())
    h.validate_report(report)
    assert (cache / "tower_p5_n1_N2.json").exists()
    assert main(["verify-sziklai", "--q", "5", "--d", "3", "--json", str(out), "--cache-dir", str(cache)]) == 0
    assert strip_timings(json.loads(out.read_text()))["field"] == report["field"]


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "pclab", "epsilon", "--d", "6"], capture_output=True, text=True)
    assert proc.returncode == 0 and "verified" in proc.stdout


@pytest.mark.parametrize("q", [7, 9, 11, 19, 23, 27, 31])
def test_subfield_maximal_in_peisert_q4(q):
    r = h.cmd_verify_maximal_peisert(q)
    assert r["verdict"] == h.VERIFIED
    assert r["metrics"]["counts"]["fq_maximal"] == 1
