import json

import numpy as np
import pytest

from hkcoeff import cli
from hkcoeff.samplers import random_hmodule
from hkcoeff.weyl import GroupData


def run(argv, capsys):
    rc = cli.main(argv)
    return rc, json.loads(capsys.readouterr().out)


def test_algebra_rank(capsys):
    rc, doc = run(["algebra", "--group", "SL2", "--q", "3", "--ring", "zmod:9", "--face", "x0"], capsys)
    assert rc == 0 and doc["rank"] == 4 and doc["schema"] == 1


def test_verify_is_deterministic(capsys):
    argv = ["verify", "--suite", "roundtrip", "--group", "PGL2", "--q", "2", "--ring", "zmod:4", "--cases", "2"]
    cli.main(argv)
    a = capsys.readouterr().out
    cli.main(argv)
    b = capsys.readouterr().out
    assert a == b
    doc = json.loads(a)
    assert doc["ok"] and doc["config"]["ring"] == "zmod:4"


def test_timestamp_is_opt_in(capsys):
    argv = ["algebra", "--group", "SL2", "--q", "2", "--ring", "zmod:2", "--face", "C"]
    _, doc = run(argv, capsys)
    assert "timestamp" not in doc
    _, doc = run(["--timestamp"] + argv, capsys)
    assert "timestamp" in doc


@pytest.mark.parametrize(
    "argv",
    [
        ["verify", "--suite", "rank1", "--group", "GL2", "--q", "2", "--ring", "zmod:2"],
        ["verify", "--suite", "rank1", "--group", "SL2", "--q", "2", "--ring", "zmod:3"],
        ["verify", "--suite", "nope", "--group", "SL2", "--q", "2", "--ring", "zmod:2"],
        ["verify", "--suite", "braid", "--group", "SL2", "--q", "4", "--ring", "zmod:2"],
        ["algebra", "--group", "SO3", "--q", "2", "--ring", "zmod:2", "--face", "C"],
    ],
)
def test_config_errors(argv, capsys):
    rc, doc = run(argv, capsys)
    assert rc == 2 and "error" in doc


@pytest.mark.parametrize("suite", ["braid", "parahoric", "frobenius", "cabanes", "acyclic", "rank1", "flat", "etale"])
def test_suites_pass(suite, capsys):
    rc, doc = run(["verify", "--suite", suite, "--group", "SL2", "--q", "2", "--ring", "zmod:2", "--cases", "2"], capsys)
    assert rc == 0 and doc["ok"]
    assert all({"name", "anchor", "pass", "suite"} <= set(c) for c in doc["checks"])


@pytest.fixture
def module_file(tmp_path):
    M = random_hmodule(GroupData("pgl2", 3), 3, np.random.default_rng(1))
    path = tmp_path / "m.json"
    path.write_text(json.dumps(M.to_json()))
    return path


def test_fm_homology_halftree(module_file, capsys):
    rc, doc = run(["fm", "--module", str(module_file), "--radius", "1"], capsys)
    assert rc == 0 and doc["system"]["region"]["chambers"] == 3
    rc, doc = run(["homology", "--module", str(module_file)], capsys)
    assert rc == 0 and all(c["pass"] for c in doc["checks"])
    rc, doc = run(["homology", "--module", str(module_file), "--region", "tree", "--radius", "2"], capsys)
    assert rc == 0 and "H0" in doc
    rc, doc = run(["halftree", "--module", str(module_file)], capsys)
    assert rc == 0


def test_fm_zero_module(tmp_path, capsys):
    from hkcoeff.hecke import zero_module

    Z = zero_module(GroupData("sl2", 2), 2)
    p = tmp_path / "z.json"
    p.write_text(json.dumps(Z.to_json()))
    rc, doc = run(["fm", "--module", str(p)], capsys)
    assert rc == 0 and doc["zero"]


def test_out_file(tmp_path, capsys):
    out = tmp_path / "a.json"
    rc = cli.main(["--out", str(out), "algebra", "--group", "PGL2", "--q", "2", "--ring", "zmod:2", "--face", "C", "--dagger"])
    assert rc == 0 and json.loads(out.read_text())["rank"] == 2
