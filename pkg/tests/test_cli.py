import json

import numpy as np
import pytest

from kazext.cli import (
    BALANCE_S_CAP,
    EXIT_CAP,
    EXIT_DISCONNECTED,
    EXIT_GUARD,
    EXIT_OK,
    EXIT_USAGE,
    main,
    parse_generators,
    parse_group,
    parse_range,
)
from kazext.groups import write_table
from kazext.spectra import build_cayley, spectral_gap

from conftest import s3


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_gap_cyclic(capsys):
    code, out, _ = run(capsys, "gap", "cyclic:3", "--gens", "1")
    d = json.loads(out)
    assert code == EXIT_OK and d["beta"] == 1.5 and d["connected"]


def test_gap_disconnected(capsys):
    code, out, _ = run(capsys, "gap", "cyclic:4", "--gens", "2")
    assert code == EXIT_DISCONNECTED and json.loads(out)["connected"] is False


def test_gap_reproducible(capsys):
    args = ("gap", "metabelian:3,2,nonsplit", "--gens", "random:4", "--seed", "7")
    _, a, _ = run(capsys, *args)
    _, b, _ = run(capsys, *args)
    assert a == b
    d = json.loads(a)
    G, codec = parse_group("metabelian:3,2,nonsplit")
    S = [codec.parse(t) for t in d["generators"]]
    assert spectral_gap(build_cayley(G, S)).lambda2 == pytest.approx(d["lambda2"], abs=1e-12)


@pytest.mark.parametrize("spec", ["metabelian:3,2,nonsplit", "metabelian:3,2,split", "gamma2:3,2", "algebra:3"])
def test_designators_roundtrip(spec):
    G, codec = parse_group(spec)
    for g in range(G.order):
        assert codec.parse(codec.format(g)) == g


def test_designator_forms():
    G, codec = parse_group("algebra:3")
    assert codec.parse("1,0,0") == 1 and codec.parse("0,0,1") == 9
    G, codec = parse_group("metabelian:3,2,split")
    assert codec.parse("1,0,0|0") == 1 and codec.parse("0|1") == 27
    G, codec = parse_group("metabelian:3,2,nonsplit")
    g = codec.parse("0|1")
    assert G.element_orders([g])[0] == 27


def test_file_group(tmp_path, capsys):
    path = tmp_path / "s3.txt"
    write_table(s3(), path)
    code, out, _ = run(capsys, "gap", f"file:{path}", "--gens", "1", "3")
    assert code == EXIT_OK and json.loads(out)["method"] == "dense"


def test_usage_errors(capsys):
    for argv in [["gap", "foo:3", "--gens", "1"], ["gap", "cyclic:x", "--gens", "1"],
                 ["gap", "cyclic:5", "--gens", "9"], ["gap", "algebra:3", "--gens", "1,2"],
                 ["gap", "cyclic:5", "--gens", "1", "--tol", "0"], ["gap", "file:/nonexistent", "--gens", "1"],
                 ["gap"], ["nope"]]:
        code, _, err = run(capsys, *argv)
        assert code == EXIT_USAGE and err


def test_random_gens_parse():
    G, codec = parse_group("cyclic:50")
    S = parse_generators(["random:5"], G, codec, seed=3)
    assert len(set(S.tolist())) == 5 and 0 not in S
    assert np.array_equal(S, parse_generators(["random:5"], G, codec, seed=3))


def test_parse_range():
    assert parse_range("3") == [3]
    assert parse_range("1-4") == [1, 2, 3, 4]
    assert parse_range("1,5,7-8") == [1, 5, 7, 8]


def test_verify_census(capsys):
    code, out, _ = run(capsys, "verify", "census", "--p", "5", "--format", "csv")
    assert code == EXIT_OK
    assert out.splitlines()[-1] == "5,2500,2500"


def test_verify_nonsplit(capsys):
    code, out, _ = run(capsys, "verify", "nonsplit", "--p", "3", "--n", "2")
    assert code == EXIT_OK and json.loads(out)["pass"]


def test_verify_gamma2(capsys):
    code, out, _ = run(capsys, "verify", "gamma2", "--p", "3", "--k", "2")
    assert code == EXIT_OK and all(r["pass"] for r in json.loads(out)["rows"])


def test_verify_main_theorem(capsys):
    code, out, _ = run(capsys, "verify", "main-theorem", "--p", "3", "--n", "2", "--trials", "20", "--seed", "1")
    d = json.loads(out)
    assert code == EXIT_OK and d["passed"] == 20 and d["min_ratio"] > 1


def test_verify_parallel_matches_serial(capsys):
    args = ["verify", "main-theorem", "--p", "3", "--n", "1", "--trials", "4", "--seed", "2"]
    _, a, _ = run(capsys, *args)
    _, b, _ = run(capsys, *args, "--workers", "2")
    assert a == b


def test_verify_serre(capsys):
    code, out, _ = run(capsys, "verify", "serre", "--p", "3", "--k", "2", "--trials", "2")
    assert code == EXIT_OK and json.loads(out)["passed"] == 2


def test_verify_size_guard(capsys):
    code, _, err = run(capsys, "verify", "gamma2", "--p", "5", "--k", "3")
    assert code == EXIT_GUARD and "too large" in err


def test_balance(capsys, tmp_path):
    out_path = tmp_path / "bal.csv"
    code, _, _ = run(capsys, "balance", "--p", "3", "--delta", "0.1", "--c", "1.5", "--trials", "4",
                     "--format", "csv", "--output", str(out_path))
    lines = out_path.read_text().splitlines()
    assert code == EXIT_OK and len(lines) == 5
    assert lines[0].startswith("seed,s,delta_target,delta_star,success")
    code, out, _ = run(capsys, "balance", "--p", "3", "--delta", "0.1", "--trials", "3")
    d = json.loads(out)
    assert d["s"] == 14 and d["inequality_holds"]


def test_balance_pole_guard(capsys):
    code, _, err = run(capsys, "balance", "--p", "5", "--delta", "0.49", "--trials", "1")
    assert code == EXIT_GUARD and str(BALANCE_S_CAP) in err
    code, _, _ = run(capsys, "balance", "--p", "5", "--delta", "0.5", "--trials", "1")
    assert code == EXIT_USAGE


def test_tame_table(capsys):
    code, out, _ = run(capsys, "tame-table", "--k", "3", "--c", "1-10", "--format", "csv")
    lines = out.splitlines()
    assert code == EXIT_OK and len(lines) == 11
    cases = [ln.split(",")[2] for ln in lines[1:]]
    assert cases == ["small_c"] * 6 + ["c=2kl+1", "c=2kl+2", "c=2kl+3", "c=2kl+4"]
    assert all(ln.endswith(",24") for ln in lines[1:])


def test_geps(capsys):
    code, out, _ = run(capsys, "geps", "gamma2:3,2", "--eps", "0.2")
    d = json.loads(out)
    assert code == EXIT_OK and d["verified_avg_kazhdan"] >= 0.2
    code, out, _ = run(capsys, "geps", "cyclic:2", "--eps", "0.999")
    assert json.loads(out)["m"] == 1
    code, out, _ = run(capsys, "geps", "cyclic:64", "--eps", "0.5")
    assert code == EXIT_OK and json.loads(out)["m"] <= 8


def test_geps_cap(capsys):
    code, out, _ = run(capsys, "geps", "cyclic:8", "--eps", "3.9")
    assert code == EXIT_CAP and "best" not in out and json.loads(out)["m"] is not None


def test_text_format(capsys):
    code, out, _ = run(capsys, "gap", "cyclic:5", "--gens", "1", "--format", "text")
    assert "beta:" in out and code == EXIT_OK
