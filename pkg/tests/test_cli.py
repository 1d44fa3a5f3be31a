import json
import random

from click.testing import CliRunner
from hypothesis import given, settings, strategies as st

from monofol.cli import main
from monofol.problem import ProblemError, parse_problem
from monofol.series import Series, format_series

N1 = """\
variables = u1 w1
u_block = u1
generator = u1*w1
"""

N2 = """\
# two generators on a two-dimensional chart
variables = u1 w1
u_block = u1
divisor = u1
generator = u1
generator = u1*w1
trunc = 12
samples = 5
seed = 0
"""

DROP = """\
variables = u v
u_block = u
generator = u*v^2 + u^2
"""

ORACLE = """\
variables = u1 w1 w2
u_block = u1
generator = u1*w1^2 - w2^3 + u1*w1^2*w2
"""

TRUNCATED = """\
variables = u1 u2 w1
u_block = u1 u2
generator = w1^2 + 3*u1^2*u2
generator = u2 + 3*u1^3*u2
"""


def run(tmp_path, text, *args, name="p.txt"):
    path = tmp_path / name
    path.write_text(text)
    res = CliRunner().invoke(main, [args[0], str(path)] + list(args[1:]))
    return res


def test_invariant_by_both_methods(tmp_path):
    res = run(tmp_path, N1, "invariant")
    assert res.exit_code == 0
    doc = json.loads(res.output)
    assert doc["scan"] == 1 and doc["chain"] == 1


def test_decompose(tmp_path):
    res = run(tmp_path, DROP, "decompose")
    doc = json.loads(res.output)
    assert doc["delta"] == {"u": 1}
    assert doc["residual_quotients"] == ["u + v^2"]


def test_monomialize_single_leaf(tmp_path):
    res = run(tmp_path, N1, "monomialize")
    assert res.exit_code == 0
    doc = json.loads(res.output)
    assert doc["status"] == "ok" and doc["summary"]["leaves"] == {"monomialized": 1}
    leaf = doc["tree"]
    while leaf["children"]:
        [leaf] = leaf["children"]
    assert leaf["status"] == "monomialized"
    assert leaf["info"]["certificate"]["rank"] == 1


def test_malformed_literal_reports_position(tmp_path):
    res = run(tmp_path, N1.replace("u1*w1", "u1*+w1"), "monomialize")
    assert res.exit_code == 2
    doc = json.loads(res.output)
    assert doc["error"] == "parse" and doc["line"] == 3 and doc["column"] == 16


def test_unknown_variable(tmp_path):
    res = run(tmp_path, N1.replace("u1*w1", "u1*z"), "invariant")
    assert res.exit_code == 2
    assert json.loads(res.output)["column"] == 16


def test_missing_file(tmp_path):
    res = CliRunner().invoke(main, ["invariant", str(tmp_path / "nope.txt")])
    assert res.exit_code == 2


def test_dependent_generators_are_rejected(tmp_path):
    res = run(tmp_path, N1 + "generator = 2*u1*w1\n", "monomialize")
    assert res.exit_code == 2
    assert "dependent" in json.loads(res.output)["message"]


def test_oracle_failure_exit(tmp_path):
    res = run(tmp_path, ORACLE, "monomialize")
    assert res.exit_code == 3
    assert json.loads(res.output)["status"] == "oracle_failure"


def test_truncation_exit(tmp_path):
    res = run(tmp_path, TRUNCATED, "monomialize")
    assert res.exit_code == 4
    doc = json.loads(res.output)
    assert doc["status"] == "truncation_ambiguous"
    # raising the truncation order settles it
    res = run(tmp_path, TRUNCATED, "monomialize", "--trunc", "24")
    assert res.exit_code == 0


def test_byte_determinism(tmp_path):
    a = run(tmp_path, DROP, "monomialize", "--seed", "7").output
    b = run(tmp_path, DROP, "monomialize", "--seed", "7").output
    assert a == b
    c = run(tmp_path, DROP, "monomialize", "--seed", "8").output
    assert json.loads(c)["settings"]["seed"] == 8


def test_output_file_and_graph(tmp_path):
    out = tmp_path / "tree.json"
    res = run(tmp_path, DROP, "monomialize", "--output", str(out), "--emit-graph")
    assert res.exit_code == 0 and res.output == ""
    doc = json.loads(out.read_text())
    dot = (tmp_path / "tree.dot").read_text()
    assert dot.startswith("digraph chart_tree {")
    assert dot.count("->") == doc["summary"]["nodes"] - 1


def test_check_accepts_emitted_trees(tmp_path):
    for text in (N1, N2, DROP):
        out = tmp_path / "tree.json"
        run(tmp_path, text, "monomialize", "--output", str(out))
        res = CliRunner().invoke(main, ["check", str(out)])
        assert res.exit_code == 0, res.output
        assert json.loads(res.output)["ok"]


def test_check_runs_problem_files(tmp_path):
    res = run(tmp_path, N2, "check")
    assert res.exit_code == 0 and json.loads(res.output)["ok"]


def test_check_rejects_tampering(tmp_path):
    out = tmp_path / "tree.json"
    run(tmp_path, DROP, "monomialize", "--output", str(out))
    doc = json.loads(out.read_text())
    leaf = doc["tree"]
    while leaf["children"]:
        leaf = leaf["children"][-1]
    leaf["generators"][0] = leaf["generators"][0] + " + u"
    out.write_text(json.dumps(doc))
    res = CliRunner().invoke(main, ["check", str(out)])
    assert res.exit_code == 5
    assert not json.loads(res.output)["ok"]


def test_prepare_and_drop_commands(tmp_path):
    res = run(tmp_path, DROP, "prepare")
    assert res.exit_code == 0
    doc = json.loads(res.output)
    assert doc["skipped"] is None
    res = run(tmp_path, DROP, "drop")
    doc = json.loads(res.output)
    assert doc["summary"]["drops"] == 3
    assert doc["summary"]["samples"] == doc["summary"]["samples_ok"] > 0
    res = run(tmp_path, N1, "drop")
    assert json.loads(res.output)["skipped"].startswith("tangency order 1")


# -- problem files round trip ------------------------------------------------

@st.composite
def problem_text(draw):
    m = draw(st.integers(2, 4))
    k = draw(st.integers(1, m - 1))
    names = ["u%d" % (i + 1) for i in range(k)] + ["w%d" % (i + 1) for i in range(m - k)]
    lines = ["variables = " + " ".join(names), "u_block = " + " ".join(names[:k])]
    if draw(st.booleans()):
        lines.append("first_integrals = " + " ".join(str(draw(st.integers(1, 3))) for _ in range(k)))
    for _ in range(draw(st.integers(1, 2))):
        terms = {}
        for _ in range(draw(st.integers(1, 3))):
            e = [0] * m
            for _ in range(draw(st.integers(0, 4))):
                e[draw(st.integers(0, m - 1))] += 1
            terms[tuple(e)] = draw(st.sampled_from([1, -1, 2, 3]))
        lines.append("generator = " + format_series(Series(m, terms), names))
    lines.append("trunc = %d" % draw(st.integers(4, 12)))
    return "\n".join(lines) + "\n"


@settings(max_examples=80, deadline=None)
@given(problem_text())
def test_serialize_parse_is_idempotent(text):
    try:
        prob = parse_problem(text)
    except ProblemError:
        return
    once = prob.serialize()
    assert parse_problem(once).serialize() == once


def test_serialize_round_trip_example():
    prob = parse_problem(N2)
    assert prob.serialize() == N2.split("\n", 1)[1]


def test_problem_errors_have_positions():
    bad = ["variables = u1 w1\nu_block = u1\ngenerator = u1^\n",
           "variables = u1 w1\nu_block = u1\nfirst_integrals = 1 2\ngenerator = u1\n",
           "variables = u1 w1\nu_block = u1\ncolour = red\ngenerator = u1\n",
           "variables = u1 w1\nu_block = u1\n"]
    lines = []
    for text in bad:
        try:
            parse_problem(text)
        except ProblemError as exc:
            lines.append(exc.line)
    assert lines == [3, 3, 3, None]


def test_seeded_sampling_is_reproducible(tmp_path):
    seeds = random.Random(3).sample(range(1000), 2)
    docs = [json.loads(run(tmp_path, DROP, "drop", "--seed", str(s)).output) for s in seeds]
    again = json.loads(run(tmp_path, DROP, "drop", "--seed", str(seeds[0])).output)
    assert docs[0] == again
