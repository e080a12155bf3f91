import json
import subprocess
import sys
import textwrap

import pytest

from morreylorentz.cli import main


def write(tmp_path, text, name="run.ini"):
    p = tmp_path / name
    p.write_text(textwrap.dedent(text))
    return str(p)


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


GOLDEN = """
    [function]
    kind = characteristic
    length = 2
    [p]
    kind = two-piece
    inner = 1
    outer = 2
    [norm]
    name = lebesgue
"""


def test_norm_golden(tmp_path, capsys):
    cfgp = write(tmp_path, GOLDEN)
    code, out, _ = run(capsys, "norm", "--config", cfgp, "--out", str(tmp_path / "o"))
    assert code == 0
    assert float(out) == pytest.approx((1 + 5**0.5) / 2, rel=1e-12)
    body = json.loads((tmp_path / "o" / "norm.json").read_text())
    assert body["norm"] == "lebesgue" and "config" in body


def test_norm_json_and_csv(tmp_path, capsys):
    cfgp = write(tmp_path, GOLDEN)
    code, out, _ = run(capsys, "norm", "--config", cfgp, "--json")
    assert code == 0 and set(json.loads(out)) == {"value", "relError", "refinements"}
    code, out, _ = run(capsys, "norm", "--config", cfgp, "--csv")
    assert code == 0 and len(out.strip().split(",")) == 3


def test_norm_infinite_exits_3(tmp_path, capsys):
    # the Lorentz weight makes the truncated norm blow up like r^(1/p - lambda/q) at 0
    cfgp = write(tmp_path, """
        [function]
        kind = characteristic
        [p]
        kind = constant
        value = 8
        [q]
        kind = constant
        value = 0.5
        [norm]
        name = morrey-lorentz
        lambda = 0.9
    """)
    code, out, _ = run(capsys, "norm", "--config", cfgp, "--out", str(tmp_path))
    assert code == 3 and out.strip() == "infinite"
    assert json.loads((tmp_path / "norm.json").read_text())["value"] == "infinite"


def test_apply_maximal(tmp_path, capsys):
    cfgp = write(tmp_path, """
        [function]
        kind = interval
        a = 0
        b = 1
        [apply]
        operator = maximal
        points = 2, 0.5
    """)
    code, out, _ = run(capsys, "apply", "--config", cfgp)
    assert code == 0
    assert out.splitlines() == ["point,value", "2.0,0.25", "0.5,1.0"]


def test_apply_hilbert_at_breakpoint_exits_3(tmp_path, capsys):
    cfgp = write(tmp_path, """
        [function]
        kind = interval
        a = 0
        b = 1
        [apply]
        operator = hilbert
        points = 1.0
    """)
    assert run(capsys, "apply", "--config", cfgp)[0] == 3


def test_apply_marcinkiewicz_mean_nonzero_exits_3(tmp_path, capsys):
    cfgp = write(tmp_path, """
        [function]
        kind = grid
        side = 1
        m = 2
        values = 1,1,1,1
        [apply]
        operator = marcinkiewicz
        points = 3 0; 0 3
        [omega]
        kind = constant
        params = 1
    """)
    code, _, err = run(capsys, "apply", "--config", cfgp)
    assert code == 3 and "mean-zero" in err


def test_rearrange(tmp_path, capsys):
    cfgp = write(tmp_path, """
        [function]
        kind = steps
        breakpoints = 1, 2, 4
        values = 1, 3, 2
    """)
    code, out, _ = run(capsys, "rearrange", "--config", cfgp, "--out", str(tmp_path))
    assert code == 0
    assert (tmp_path / "rearranged.csv").read_text() == out


@pytest.mark.parametrize("text", [
    "[function\nkind = x",
    "[function]\nkind = nonsense\n[norm]\nname = lebesgue",
    "[function]\nkind = characteristic\n[norm]\nname = sobolev",
    "[function]\nkind = characteristic\n[p]\nkind = constant\nvalue = abc",
    "[run]\ncommand = apply\n[function]\nkind = characteristic",
])
def test_malformed_config_exits_2(tmp_path, capsys, text):
    cfgp = write(tmp_path, text)
    assert run(capsys, "norm", "--config", cfgp)[0] == 2


def test_missing_config_exits_2(tmp_path, capsys):
    assert run(capsys, "norm", "--config", str(tmp_path / "nope.ini"))[0] == 2


def test_verify_gate_exits_6(tmp_path, capsys):
    cfgp = write(tmp_path, """
        [run]
        gate = true
        [p]
        kind = constant
        value = 3
        [verify]
        experiment = T3.2
        lambda = 0.9
        [family]
        count = 2
    """)
    code, _, err = run(capsys, "verify", "--config", cfgp)
    assert code == 6 and "lambda p_plus" in err


def test_verify_unknown_experiment_exits_2(tmp_path, capsys):
    cfgp = write(tmp_path, "[verify]\nexperiment = T7.7\n")
    assert run(capsys, "verify", "--config", cfgp)[0] == 2


def test_verify_hardy_divergence_exits_4(tmp_path, capsys):
    cfgp = write(tmp_path, """
        [q]
        kind = constant
        value = 2
        [verify]
        experiment = L3.3
        lambda = 0.3
        beta = 0.85
        [family]
        generator = dyadic-combs
        count = 2
    """)
    code, out, _ = run(capsys, "verify", "--config", cfgp)
    assert code == 4 and "divergence-witnessed (exploratory)" in out


def test_verify_outputs_and_replay(tmp_path, capsys):
    cfgp = write(tmp_path, """
        [verify]
        experiment = T3.1
        lambda = 0.25
        [family]
        generator = characteristic-intervals
        count = 2
    """)
    a, b = tmp_path / "a", tmp_path / "b"
    assert run(capsys, "verify", "--config", cfgp, "--out", str(a))[0] == 0
    assert {p.name for p in a.iterdir()} == {"report.json", "report.csv", "config.ini"}
    # the materialized config replays to byte-identical reports
    assert run(capsys, "verify", "--config", str(a / "config.ini"), "--out", str(b))[0] == 0
    for name in ("report.json", "report.csv", "config.ini"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_seed_override_changes_family(tmp_path, capsys):
    cfgp = write(tmp_path, """
        [verify]
        experiment = T3.1
        [family]
        count = 2
    """)
    _, out0, _ = run(capsys, "verify", "--config", cfgp, "--json")
    _, out1, _ = run(capsys, "verify", "--config", cfgp, "--json", "--seed", "7")
    assert json.loads(out1)["config"]["family"]["seed"] == "7"
    assert out0 != out1


def test_console_entry_point(tmp_path):
    cfgp = write(tmp_path, GOLDEN)
    res = subprocess.run([sys.executable, "-m", "morreylorentz.cli", "norm", "--config", cfgp],
                         capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.startswith("1.618033988749")
