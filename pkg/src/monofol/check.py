"""Independent re-verification of an emitted chart tree.

Only the JSON document is trusted as input: generators are re-parsed, every
edge is replayed by substitution, and leaf certificates are recomputed with
plain row-span tests rather than the distribution objects the driver used."""
from .foliation import ChartFrame
from .invariant import TrivialModel, decompose, tangency_order_scan
from .linalg import ExpMatrix, in_row_span, rank
from .problem import parse_series
from .series import Series


class CheckReport:
    def __init__(self):
        self.errors = []
        self.counts = {"edges": 0, "charts": 0, "certificates": 0, "drops": 0, "samples": 0}

    @property
    def ok(self):
        return not self.errors

    def fail(self, path, msg):
        self.errors.append("%s: %s" % (path, msg))

    def to_dict(self):
        return {"ok": self.ok, "errors": self.errors, "counts": self.counts}


def _frame(d):
    names = d["names"]
    kinds = ["w" if k == "v" else k for k in d["kinds"]]
    v = d["kinds"].index("v") if "v" in d["kinds"] else None
    div = [n in d["divisor"] for n in names]
    return ChartFrame(names, kinds, div, v)


def _gens(d, names):
    return [parse_series(g, names, d["order"], exact=e) for g, e in zip(d["generators"], d["exact"])]


def _lattice(d, frame):
    ub = frame.u_block
    rows = [[x for x in r] for r in d["first_integrals"]]
    return ExpMatrix(rows, len(ub)) if rows else ExpMatrix.empty(len(ub))


def _full(frame, B):
    ub = frame.u_block
    rows = []
    for r in B.rows:
        full = [0] * frame.m
        for j, x in zip(ub, r):
            full[j] = x
        rows.append(full)
    return ExpMatrix(rows, frame.m) if rows else ExpMatrix.empty(frame.m)


def _same_span(A, B):
    if rank(A) != rank(B):
        return False
    return all(in_row_span(r, B) for r in A.rows)


def _is_first_integral(e, frame, B):
    if any(e[i] for i in frame.free):
        return False
    return in_row_span([e[j] for j in frame.u_block], B)


def _nu(frame, B, gens, order):
    from .foliation import LocalModel
    model = LocalModel(frame, B, gens, order)
    try:
        dec = decompose(model)
    except TrivialModel:
        return "trivial"
    t = tangency_order_scan(model, dec).value
    return "inf" if t is None else t


def check_document(doc):
    report = CheckReport()
    n = doc["generators"]
    root = doc["tree"]
    fr0 = _frame(root["frame"])
    rank0 = rank(_lattice(root, fr0))

    def visit(node, parent, rounds):
        path = node["path"]
        fr = _frame(node["frame"])
        names = fr.names
        gens = _gens(node, names)
        B = _lattice(node, fr)
        if parent is not None:
            pfr, pgens, pB = parent
            tr = node["transition"]
            report.counts["edges"] += 1
            m = len(names)
            images = []
            for k, name in enumerate(names):
                text = tr["images"].get(name)
                images.append(Series.var(m, k, node["order"]) if text is None
                              else parse_series(text, names, node["order"]))
            replay = [g.copy_with(order=node["order"]).substitute(images) for g in pgens]
            order = tr.get("generator_order")
            if order is not None:
                replay = [replay[k] for k in order]
            if len(replay) != len(gens):
                report.fail(path, "generator count changed along the edge")
            for k, (a, b) in enumerate(zip(replay, gens)):
                if a.terms != b.terms:
                    report.fail(path, "generator %d does not match the replayed substitution" % k)
            if "chart" in tr:
                report.counts["charts"] += 1
                ch = tr["chart"]
                slots = [names.index(s) for s in ch["slots"]]
                A = ch["matrix"]
                full = [[1 if i == j else 0 for j in range(m)] for i in range(m)]
                for l, s in enumerate(slots):
                    for c, t in enumerate(slots):
                        full[s][t] = A[l][c]
                for l, s in enumerate(slots):
                    e = [0] * m
                    for c, t in enumerate(slots):
                        e[t] += A[l][c]
                    if images[s].terms != {tuple(e): 1}:
                        report.fail(path, "images do not match the chart matrix at %s" % names[s])
                moved = _full(pfr, pB) @ ExpMatrix(full, m)
                if not _same_span(_full(fr, B), moved):
                    report.fail(path, "first-integral lattice is not the transported one")
            if node["label"].startswith("refine["):
                rounds += 1
        info = node.get("info", {})
        if "drop" in info:
            report.counts["drops"] += 1
            d = info["drop"]
            nu_out = _nu(fr, B, gens, node["order"])
            if nu_out != d["nu_out"]:
                report.fail(path, "recorded tangency order after the drop is %s, recomputed %s"
                            % (d["nu_out"], nu_out))
            if not (nu_out == "trivial" or (nu_out != "inf" and nu_out < d["nu_in"])):
                report.fail(path, "tangency order did not drop")
        for key in ("samples", "base_samples"):
            if key not in info:
                continue
            for p in info[key]["points"]:
                report.counts["samples"] += 1
                if not p.get("ok"):
                    report.fail(path, "sampled point failed: %s" % p)
        if node["status"] == "monomialized":
            report.counts["certificates"] += 1
            for k, g in enumerate(gens):
                if g.is_zero():
                    report.fail(path, "generator %d vanishes" % k)
                for e in g.terms:
                    if not _is_first_integral(e, fr, B):
                        report.fail(path, "generator %d has a term that is not a first integral" % k)
                        break
            rk = rank(B)
            if rk != rank0 + rounds or rk < n:
                report.fail(path, "lattice rank %d after %d refinements (start %d, n=%d)"
                            % (rk, rounds, rank0, n))
        elif not node["children"] and node["status"] not in ("oracle_failure",
                                                              "truncation_ambiguous", "trivial",
                                                              "ready"):
            report.fail(path, "leaf without a status")
        for c in node["children"]:
            visit(c, (fr, gens, B), rounds)

    visit(root, None, 0)
    return report
