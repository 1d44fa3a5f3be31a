import json

import pytest

from monofol import driver
from monofol.check import check_document
from monofol.driver import (InternalError, Node, PreconditionError, Settings, basic_normal_form,
                            drop_invariant, measure, monomialize, monomialize_step, prepare,
                            resolve_infinite, tree_status)
from monofol.foliation import ChartFrame, LocalModel
from monofol.invariant import INF, decompose, tangency_order_scan
from monofol.linalg import ExpMatrix, rank
from monofol.problem import parse_series
from monofol.serialize import dumps, tree_document
from monofol.series import format_series


def model(gens, names, k, B=None, divisor=None):
    m = len(names)
    div = divisor if divisor is not None else [True] * k + [False] * (m - k)
    fr = ChartFrame(names, ["u"] * k + ["w"] * (m - k), div)
    Bm = ExpMatrix(B, k) if B else ExpMatrix.empty(k)
    return LocalModel(fr, Bm, [parse_series(g, names) for g in gens], 12)


def texts(md):
    return [format_series(g, md.frame.names) for g in md.gens]


def nu_of(md):
    dec, tang = measure(md)
    return "trivial" if dec is None else tang.value


# -- infinite tangency order ------------------------------------------------

def test_resolve_infinite_regular_generators():
    md = model(["u1 + u2*w1"], ["u1", "u2", "w1"], 2)
    dec, tang = measure(md)
    assert tang.value is INF
    root = Node(md, "input")
    leaves = [leaf for leaf, _ in resolve_infinite(root, dec, Settings())]
    assert [texts(l.model) for l in leaves] == [["u1 + u1*u2*w1"], ["u1*u2 + u2*w1"]]
    assert [nu_of(l.model) for l in leaves] == [0, 1]


def test_resolve_infinite_separates_eigencoefficients():
    # lattice u1*u2: the remaining field is u1 d/du1 - u2 d/du2 and the two
    # terms of f sit in different eigenspaces
    md = model(["u1 + u2"], ["u1", "u2", "w1"], 2, B=[[1, 1]])
    dec, tang = measure(md)
    assert tang.value is INF
    leaves = [leaf for leaf, _ in resolve_infinite(Node(md, "input"), dec, Settings())]
    assert len(leaves) == 2
    assert all(nu_of(l.model) not in (INF, "trivial") for l in leaves)


def test_resolve_infinite_stops_once_finite():
    md = model(["2*u1*w1 + 2*u1^3 + u1*w1^2", "-u1^2*w1^2"], ["u1", "w1"], 1)
    root = monomialize(md)
    assert tree_status(root) == "ok"
    for node in root.walk():
        if node.label.startswith("infinite-order") and any(
                c.label.startswith("infinite-order") for c in node.children):
            # an inner chart of the principalization still had infinite order
            assert nu_of(node.model) is INF


def test_finite_input_needs_no_resolution():
    md = model(["u1*w1"], ["u1", "w1"], 1)
    root = monomialize_step(md)
    assert root.children == [] and root.status == "ready" and root.nu == 1


# -- basic normal form -------------------------------------------------------

@pytest.mark.parametrize("gen,names,expected", [
    ("v^2 + 2*u*v", ["u", "v"], "-u^2 + v^2"),
    ("v^3 + 3*w*v^2", ["u", "v", "w"], "v^3 - 3*v*w^2 + 2*w^3"),
    ("v^2 + u*v^3", ["u", "v"], "v^2 + u*v^3"),
])
def test_basic_normal_form(gen, names, expected):
    md = model([gen], names, 1)
    dec, tang = measure(md)
    out, tr, v = basic_normal_form(md, tang)
    assert names[v] == "v"
    assert out.frame.v_slot == v
    assert texts(out) == [expected]


def test_basic_normal_form_puts_witness_first():
    md = model(["u1*w1 + w1^3", "w1^2 + u1^3"], ["u1", "w1"], 1)
    dec, tang = measure(md)
    assert tang.value == 2 and tang.witness[0] == 1
    out, tr, v = basic_normal_form(md, tang)
    assert tr.perm == [1, 0]
    assert out.labels == (1, 0)


def test_basic_normal_form_rejects_low_order():
    md = model(["u1*w1"], ["u1", "w1"], 1)
    with pytest.raises(PreconditionError):
        basic_normal_form(md, measure(md)[1])


# -- prepared normal form ----------------------------------------------------

def bnf_node(gens, names, k):
    md = model(gens, names, k)
    dec, tang = measure(md)
    bm, tr, v = basic_normal_form(md, tang)
    node = Node(bm, "bnf")
    node.nu = tang.value
    return node


def test_prepare_without_constant_coefficients_is_immediate():
    node = bnf_node(["v^3 + u*v"], ["u", "v"], 1)
    out = prepare(node, Settings())
    assert len(out) == 1 and out[0][0] is node and node.children == []
    pf = node.info["prepared"]
    assert pf["nu"] == 3 and pf["beta"] is None
    assert pf["intermediate"] == [{"generator": 0, "power": 1, "exponent": [1]}]


def test_prepare_runs_the_base_recursion():
    node = bnf_node(["v^2 + u1*u2*v + u1^2"], ["u1", "u2", "v"], 2)
    out = prepare(node, Settings())
    assert len(out) == 1
    leaf, pf = out[0]
    assert leaf.label.startswith("base:")
    info = leaf.info["prepared"]
    assert info["beta"] == [2, 0] and info["eps"] == 0 and info["intermediate"] == []


def test_prepare_never_raises_the_order():
    for gens, names, k in [(["v^2 + u1*u2*v + u1^2"], ["u1", "u2", "v"], 2),
                           (["w1^2 + 3*u1^2*u2", "u2 + 3*u1^3*u2"], ["u1", "u2", "w1"], 2),
                           (["v^3 + u1*v + u1^2*u2"], ["u1", "u2", "v"], 2)]:
        node = bnf_node(gens, names, k)
        for leaf, pf in prepare(node, Settings()):
            assert leaf.nu <= node.nu


# -- dropping the order --------------------------------------------------------

def test_drop_on_u_times_v2_plus_u():
    node = bnf_node(["u*v^2 + u^2"], ["u", "v"], 1)
    s = Settings()
    [(pnode, pf)] = prepare(node, s)
    assert pf.nu == 2 and list(pf.beta) == [1] and pf.eps == 0
    leaves = drop_invariant(pnode, pf, s)
    cases = sorted(l.info["drop"]["case"] for l in leaves)
    assert cases == ["drop[rank-deficient,base-monomial]", "drop[rank-deficient,base-monomial]",
                     "drop[rank-deficient,v-power]"]
    for leaf in leaves:
        assert leaf.info["drop"]["nu_out"] in (0, 1, "trivial")
        pts = leaf.info["samples"]["points"]
        assert all(p["ok"] for p in pts)
    # the chart where u generates has its origin samples on the exceptional line
    assert sum(len(l.info["samples"]["points"]) for l in leaves) >= 5


def test_drop_records_every_boundary():
    s = Settings()
    monomialize_step(model(["u*v^2 + u^2"], ["u", "v"], 1), s)
    assert s.drops and all(out == "trivial" or out < nu_in for _, nu_in, out in s.drops)


# -- full runs -----------------------------------------------------------------

def certificates(root):
    return [(leaf.model.B.tolist(), texts(leaf.model)) for leaf in root.leaves()
            if leaf.status == "monomialized"]


def test_monomialize_single_generator():
    root = monomialize(model(["u1*w1"], ["u1", "w1"], 1))
    assert [l.status for l in root.leaves()] == ["monomialized"]
    [leaf] = root.leaves()
    assert leaf.model.B.tolist() == [[1, 1]]
    assert leaf.info["certificate"]["rank"] == 1


def test_monomialize_two_generators():
    root = monomialize(model(["u1", "u1*w1"], ["u1", "w1"], 1))
    [leaf] = root.leaves()
    assert leaf.status == "monomialized"
    assert texts(leaf.model) == ["u1", "u1*w1"]
    assert rank(leaf.model.B) == 2
    assert [n.label for n in root.walk()] == [
        "input", "refine[zero-one,eps=0,generator=0]", "refine[zero-one,eps=1,generator=1]"]


def test_trivial_model_is_an_immediate_leaf():
    root = monomialize(model(["u1", "u2"], ["u1", "u2", "w1"], 2, B=[[1, 0], [0, 1]]))
    assert root.children == [] and root.status == "monomialized"


def test_dependent_exact_leaf_is_an_internal_error():
    with pytest.raises(InternalError):
        monomialize(model(["u1", "2*u1"], ["u1", "w1"], 1))


def test_leaf_certificates_are_monomial():
    for gens, names, k in [(["u*v^2 + u^2"], ["u", "v"], 1),
                           (["u1*w1 + w1^3", "w1^2 + u1^3"], ["u1", "w1"], 1),
                           (["u1 + u2*w1"], ["u1", "u2", "w1"], 2)]:
        root = monomialize(model(gens, names, k))
        assert tree_status(root) == "ok"
        for leaf in root.leaves():
            assert leaf.status == "monomialized"
            md = leaf.model
            assert rank(md.B) == md.n
            for g in md.gens:
                assert not g.is_zero()
                assert all(md.dist.is_first_integral(e) for e in g.terms)
        doc = json.loads(dumps(tree_document(root, "monomialize", Settings())))
        assert check_document(doc).ok


def test_every_center_is_admissible(monkeypatch):
    seen = []
    real = driver.fitting_admissible

    def spy(md, center):
        verdict = real(md, center)
        seen.append(verdict.admissible)
        return verdict

    monkeypatch.setattr(driver, "fitting_admissible", spy)
    monomialize(model(["w1^2 + 3*u1^2*u2", "u1*w1 + u2"], ["u1", "u2", "w1"], 2))
    assert seen and all(seen)


def test_depth_limit():
    with pytest.raises(InternalError):
        monomialize(model(["u*v^2 + u^2"], ["u", "v"], 1), Settings(max_depth=0))


def test_scan_is_the_witness_source():
    md = model(["u*v^2 + u^2"], ["u", "v"], 1)
    dec = decompose(md)
    assert tangency_order_scan(md, dec).witness == (0, (0, 2))
