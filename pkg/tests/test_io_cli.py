import csv
import json
import os
import warnings
from fractions import Fraction

import pytest

from pickreg import blaschke, cli, io, kernels, nodes, spectra
from pickreg.errors import InvalidParameter
from pickreg.numerics import Enclosure


# serialization

def test_parse_rational():
    assert io.parse_rational("3/4") == Fraction(3, 4)
    assert io.parse_rational("-2") == -2
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert io.parse_rational("0.5") == Fraction(1, 2)
    with pytest.warns(UserWarning):
        q = io.parse_rational("0.1")
    assert q == Fraction(0.1) and q.denominator & (q.denominator - 1) == 0
    with pytest.raises(InvalidParameter):
        io.parse_rational("abc")


def test_enclosure_round_trip():
    for e in (Enclosure.of(Fraction(3, 7)), Enclosure.of(2, 200).sqrt()):
        back = io.enclosure_from_json(json.loads(json.dumps(io.enclosure_json(e))))
        assert back.contains(e) and back.lo == e.lo and back.hi == e.hi


def test_nodes_round_trip():
    for seq in (nodes.gen_radial_power(Fraction(3, 2), 4), nodes.gen_geometric(Fraction(1, 3), 3),
                nodes.explicit([(Fraction(1, 2), Fraction(1, 4)), Fraction(-1, 3)])):
        doc = json.loads(io.dumps(io.nodes_json(seq)))
        assert doc["schema_version"] == io.SCHEMA_VERSION
        back = io.nodes_from_json(doc)
        assert len(back) == len(seq)
        assert all(a.re.overlaps(b.re) and a.im.overlaps(b.im) for a, b in zip(seq, back))


def test_measure_and_moments_round_trip():
    mu = blaschke.nu_measure(nodes.explicit([Fraction(1, 2), Fraction(3, 4)]))
    back = io.measure_from_json(json.loads(io.dumps(io.measure_json(mu))))
    assert [a.mass.exact for a in back] == [Fraction(225, 64), Fraction(1225, 1024)]
    m = kernels.moment_generator("lognormal", 4)
    back = io.moments_from_json(json.loads(io.dumps(io.moments_json(m))))
    assert all(a.overlaps(b) for a, b in zip(m.values, back.values))


def test_load_rejects_wrong_kind(tmp_path):
    p = tmp_path / "x.json"
    p.write_text(json.dumps({"kind": "moments", "schema_version": 1}))
    with pytest.raises(InvalidParameter):
        io.nodes_from_json(io.load(str(p)))
    with pytest.raises(InvalidParameter):
        io.load(str(tmp_path / "missing.json"))


def test_trajectory_csv_columns():
    seq = nodes.gen_geometric(Fraction(1, 2), 4)
    traj = spectra.lambda0_trajectory(kernels.pick_family(seq), 3)
    rows = list(csv.reader(io.trajectory_csv(traj).splitlines()))
    assert rows[0] == ["n", "lambda0_lo", "lambda0_hi", "bits_used"]
    assert [r[0] for r in rows[1:]] == ["0", "1", "2", "3"]
    assert Fraction(rows[1][1]) <= Fraction(4, 3) <= Fraction(rows[1][2])


def test_matrix_csv():
    K = kernels.pick_matrix(nodes.explicit([Fraction(1, 2), Fraction(3, 4)]), 1)
    lines = io.matrix_csv(K).splitlines()
    assert lines[0] == "i,j,re_lo,re_hi,im_lo,im_hi" and len(lines) == 5


# command line

def run(tmp_path, *argv):
    return cli.main([*argv, "--out", str(tmp_path), "--quiet"])


def read(tmp_path, name):
    with open(os.path.join(tmp_path, name)) as fh:
        return json.load(fh) if name.endswith(".json") else fh.read()


def test_cli_nodes_geometric(tmp_path):
    assert run(tmp_path, "nodes", "--family", "geometric", "--r", "1/2", "--count", "3") == 0
    doc = read(tmp_path, "nodes.json")
    assert [p["re"] for p in doc["points"]] == ["1/2", "3/4", "7/8"]
    man = read(tmp_path, "manifest.json")
    assert man["command"] == "nodes" and "nodes.json" in man["outputs"]


def test_cli_nodes_radial(tmp_path):
    assert run(tmp_path, "nodes", "--family", "radial", "--p", "2", "--count", "3") == 0
    assert [p["re"] for p in read(tmp_path, "nodes.json")["points"]] == ["3/4", "8/9", "15/16"]


def test_cli_invalid_inputs(tmp_path):
    assert run(tmp_path, "nodes", "--family", "radial", "--p", "1", "--count", "3") == 2
    assert run(tmp_path, "nodes", "--family", "explicit", "--values", "1/2,1/2") == 2
    assert run(tmp_path, "nodes", "--family", "explicit", "--values", "3/2") == 2


def test_cli_lambda0_single_node(tmp_path):
    assert run(tmp_path, "nodes", "--family", "explicit", "--values", "1/2") == 0
    assert run(tmp_path, "lambda0", "--input", str(tmp_path / "nodes.json"), "--svg") == 0
    rows = list(csv.reader(read(tmp_path, "lambda0.csv").splitlines()))
    assert len(rows) == 2 and Fraction(rows[1][1]) <= Fraction(4, 3) <= Fraction(rows[1][2])
    assert read(tmp_path, "lambda0.svg").startswith("<svg")


def test_cli_lambda0_hankel(tmp_path):
    assert run(tmp_path, "moments", "--kind", "factorial", "--count", "3") == 0
    assert run(tmp_path, "lambda0", "--kernel", "hankel", "--input", str(tmp_path / "moments.json"),
               "--nmax", "1", "--rel-tol", "1/10000000000000000") == 0
    last = read(tmp_path, "lambda0.json")["records"][-1]["lambda0"]
    assert Fraction(last["lo"]) < Fraction(3819660112501052, 10 ** 16)
    assert Fraction(3819660112501051, 10 ** 16) < Fraction(last["hi"])


def test_cli_lambda0_radial_40(tmp_path):
    assert run(tmp_path, "nodes", "--family", "radial", "--p", "2", "--count", "41") == 0
    assert run(tmp_path, "lambda0", "--input", str(tmp_path / "nodes.json"), "--nmax", "40",
               "--rel-tol", "1/1000000") == 0
    rows = list(csv.reader(read(tmp_path, "lambda0.csv").splitlines()))[1:]
    los = [Fraction(r[1]) for r in rows]
    his = [Fraction(r[2]) for r in rows]
    # sections can only lower the smallest eigenvalue
    assert all(lo_next <= hi for hi, lo_next in zip(his, los[1:]))
    assert his[-1] < Fraction(1, 10 ** 6)


def test_cli_lambda0_exhaustion_keeps_partial(tmp_path):
    assert run(tmp_path, "nodes", "--family", "radial", "--p", "2", "--count", "30") == 0
    code = cli.main(["lambda0", "--input", str(tmp_path / "nodes.json"), "--out", str(tmp_path),
                     "--bits", "32", "--max-bits", "64", "--quiet"])
    assert code == 3
    rows = list(csv.reader(read(tmp_path, "lambda0.csv").splitlines()))
    assert len(rows) > 2


def test_cli_carleson_measure(tmp_path):
    doc = {"schema_version": 1, "kind": "measure", "atoms": [{"point": "1/2", "mass": "1"}]}
    (tmp_path / "m.json").write_text(json.dumps(doc))
    assert run(tmp_path, "carleson", "--measure", str(tmp_path / "m.json")) == 0
    assert read(tmp_path, "box_constant.json")["constant"] == "2"
    mu = blaschke.nu_measure(nodes.explicit([Fraction(1, 2), Fraction(3, 4)]))
    (tmp_path / "nu.json").write_text(io.dumps(io.measure_json(mu)))
    assert run(tmp_path, "carleson", "--measure", str(tmp_path / "nu.json")) == 0
    assert read(tmp_path, "box_constant.json")["constant"] == "4825/512"


def test_cli_carleson_trajectory(tmp_path):
    assert run(tmp_path, "nodes", "--family", "radial", "--p", "2", "--count", "31") == 0
    assert run(tmp_path, "carleson", "--nodes", str(tmp_path / "nodes.json"), "--nmax", "30") == 0
    rows = list(csv.reader(read(tmp_path, "box_trajectory.csv").splitlines()))
    assert rows[0][4:6] == ["aux_box_constant_lo", "aux_box_constant_hi"]
    vals = [Fraction(r[4]) for r in rows[1:]]
    assert all(a < b for a, b in zip(vals, vals[1:]))
    assert run(tmp_path, "carleson", "--nodes", str(tmp_path / "nodes.json"), "--nmax", "5",
               "--weights", "ambient:31") == 0
    assert run(tmp_path, "carleson", "--nodes", str(tmp_path / "nodes.json"), "--weights", "bogus") == 2


@pytest.mark.parametrize("scenario", ["two-node", "radial-p2-n20", "geometric-n20"])
def test_cli_verify(tmp_path, scenario):
    assert run(tmp_path, "verify", "--scenario", scenario) == 0
    doc = read(tmp_path, "verify.json")
    assert doc["passed"] and all(c["status"] in ("pass", "skipped") for c in doc["checks"])


def test_cli_verify_fault(tmp_path):
    assert run(tmp_path, "verify", "--scenario", "two-node", "--inject-fault") == 4
    failed = {c["name"] for c in read(tmp_path, "verify.json")["checks"] if c["status"] == "fail"}
    assert "embed-lambda0-identity" in failed and "proof-matrix-identity" in failed


def test_cli_reproduce_short(tmp_path):
    assert run(tmp_path, "reproduce-example", "--nmax", "3", "--bits", "128") == 0
    doc = read(tmp_path, "verdicts.json")
    assert doc["radial"]["tag"] == "inconclusive"
    for name in ("lambda0_radial.csv", "box_radial.csv", "masses.csv", "lambda0.svg", "box.svg", "masses.svg"):
        assert os.path.exists(tmp_path / name)


def test_cli_reproduce_full(tmp_path):
    assert run(tmp_path, "reproduce-example", "--p", "2", "--nmax", "50") == 0
    doc = read(tmp_path, "verdicts.json")
    assert doc["radial"]["tag"] == "singular-evidence"
    assert doc["geometric_r_1/2"]["tag"] == "regular-evidence"
    assert doc["mass_bounds_hold"]
    assert read(tmp_path, "manifest.json")["precision"]["bits"] == 512


def test_cli_reproduce_three_halves(tmp_path):
    assert run(tmp_path, "reproduce-example", "--p", "3/2", "--nmax", "50", "--companion-nmax", "10") == 0
    doc = read(tmp_path, "verdicts.json")
    assert doc["radial"]["tag"] == "singular-evidence"


def test_cli_replay(tmp_path):
    first = tmp_path / "first"
    assert run(first, "nodes", "--family", "radial", "--p", "2", "--count", "12") == 0
    assert run(first, "lambda0", "--input", str(first / "nodes.json"), "--nmax", "11") == 0
    assert cli.main(["replay", str(first / "manifest.json"), "--out", str(tmp_path / "again")]) == 0
    # tampering with a recorded hash is detected
    man = read(first, "manifest.json")
    man["outputs"]["lambda0.csv"] = "0" * 64
    (first / "manifest.json").write_text(json.dumps(man))
    assert cli.main(["replay", str(first / "manifest.json"), "--out", str(tmp_path / "third")]) == 4


def test_cli_bits_env(tmp_path, monkeypatch):
    monkeypatch.setenv("PICKREG_BITS", "192")
    assert run(tmp_path, "nodes", "--family", "geometric", "--r", "1/2", "--count", "2") == 0
    assert read(tmp_path, "manifest.json")["precision"]["bits"] == 192
