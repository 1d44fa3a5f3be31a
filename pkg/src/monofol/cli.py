"""Command line front end.

Exit codes: 0 success, 2 parse error, 3 oracle failure, 4 truncation
ambiguous, 5 internal assertion."""
import json
import os
import sys

import click

from .check import check_document
from .driver import (InternalError, Node, Settings, basic_normal_form, drop_invariant, measure,
                     monomialize, nu_text, prepare, tree_status)
from .invariant import INF, TrivialModel, decompose, tangency_order_chain, tangency_order_scan
from .problem import ProblemError, load_problem
from .serialize import dumps, to_dot, tree_document
from .series import DivergentSubstitution, format_series

EXIT_OK, EXIT_PARSE, EXIT_ORACLE, EXIT_TRUNC, EXIT_INTERNAL = 0, 2, 3, 4, 5
STATUS_EXIT = {"ok": EXIT_OK, "oracle_failure": EXIT_ORACLE,
               "truncation_ambiguous": EXIT_TRUNC}


def _emit(text, output):
    if output:
        with open(output, "w") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=False)


def _graph(root, output):
    path = (os.path.splitext(output)[0] if output else "chart_tree") + ".dot"
    with open(path, "w") as fh:
        fh.write(to_dot(root))


def _fail(code, payload, output=None):
    _emit(dumps(payload), output)
    sys.exit(code)


def _load(path, trunc, samples, seed):
    try:
        prob = load_problem(path)
    except ProblemError as exc:
        _fail(EXIT_PARSE, exc.to_dict())
    except OSError as exc:
        _fail(EXIT_PARSE, {"error": "parse", "message": str(exc), "line": None, "column": None})
    model = prob.model(trunc)
    settings = Settings(samples=prob.samples if samples is None else samples,
                        seed=prob.seed if seed is None else seed)
    return prob, model, settings


def _guard(fn):
    """Turn internal failures into exit code 5 with a diagnostic document."""
    def wrapped(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (InternalError, AssertionError) as exc:
            _fail(EXIT_INTERNAL, {"error": "internal", "message": str(exc)})
        except DivergentSubstitution as exc:
            _fail(EXIT_TRUNC, {"error": "truncation_ambiguous", "message": str(exc)})
    wrapped.__name__ = fn.__name__
    wrapped.__doc__ = fn.__doc__
    return wrapped


def common(f):
    f = click.option("--emit-graph", is_flag=True, help="Also write the tree as a .dot file.")(f)
    f = click.option("--output", "-o", type=click.Path(dir_okay=False), default=None,
                     help="Write the document here instead of stdout.")(f)
    f = click.option("--seed", type=int, default=None, help="Sampling seed (overrides the file).")(f)
    f = click.option("--samples", type=int, default=None,
                     help="Off-origin points per drop chart (overrides the file).")(f)
    f = click.option("--trunc", type=int, default=None, help="Truncation order N.")(f)
    f = click.argument("problem", type=click.Path())(f)
    return f


@click.group()
def main():
    """Monomialization of first integrals of monomial singular distributions."""


@main.command()
@common
@_guard
def invariant(problem, trunc, samples, seed, output, emit_graph):
    """Tangency order by the scan and by the ideal chain."""
    prob, model, settings = _load(problem, trunc, samples, seed)
    try:
        dec = decompose(model)
    except TrivialModel:
        _emit(dumps({"command": "invariant", "trivial": True}), output)
        return
    t = tangency_order_scan(model, dec)
    doc = {"command": "invariant", "trivial": False, "scan": nu_text(t.value),
           "witness": None if t.witness is None else
           {"generator": t.witness[0], "derivative": list(t.witness[1])},
           "truncation": model.order}
    if model.is_exact():
        doc["chain"] = nu_text(tangency_order_chain(model))
    else:
        doc["chain"] = None
        doc["chain_note"] = "chain method needs polynomial generators"
    _emit(dumps(doc), output)


@main.command("decompose")
@common
@_guard
def decompose_cmd(problem, trunc, samples, seed, output, emit_graph):
    """Split generators into first-integral part and residual."""
    prob, model, settings = _load(problem, trunc, samples, seed)
    names = model.frame.names
    try:
        dec = decompose(model)
    except TrivialModel:
        _emit(dumps({"command": "decompose", "trivial": True}), output)
        return
    doc = {"command": "decompose", "trivial": False,
           "first_integral_parts": [format_series(g, names) for g in dec.g],
           "delta": {names[j]: int(d) for j, d in zip(model.frame.u_block, dec.delta)},
           "residual_quotients": [format_series(T, names) for T in dec.T]}
    _emit(dumps(doc), output)


def _front(model, settings):
    """Basic normal form node (or a reason why there is none)."""
    root = Node(model, "input")
    dec, tang = measure(model)
    if dec is None:
        return root, None, "trivial"
    root.nu = tang.value
    if tang.value is INF or tang.value <= 1:
        return root, None, "tangency order %s: no preparation needed" % nu_text(tang.value)
    bmodel, tr, v = basic_normal_form(model, tang)
    bnode = root.add(Node(bmodel, "basic-normal-form[v=%s]" % model.frame.names[v], tr))
    bnode.nu = tang.value
    return root, bnode, None


def _finish(root, command, settings, output, emit_graph, extra=None):
    doc = tree_document(root, command, settings)
    if extra:
        doc.update(extra)
    _emit(dumps(doc), output)
    if emit_graph:
        _graph(root, output)
    sys.exit(STATUS_EXIT[tree_status(root)])


@main.command("prepare")
@common
@_guard
def prepare_cmd(problem, trunc, samples, seed, output, emit_graph):
    """Basic normal form followed by the prepared normal form."""
    prob, model, settings = _load(problem, trunc, samples, seed)
    root, bnode, why = _front(model, settings)
    if bnode is not None:
        prepare(bnode, settings)
    _finish(root, "prepare", settings, output, emit_graph, {"skipped": why})


@main.command("drop")
@common
@_guard
def drop_cmd(problem, trunc, samples, seed, output, emit_graph):
    """One drop of the tangency order (normal forms plus blowups)."""
    prob, model, settings = _load(problem, trunc, samples, seed)
    root, bnode, why = _front(model, settings)
    if bnode is not None:
        for pnode, pf in prepare(bnode, settings):
            if pf is not None:
                drop_invariant(pnode, pf, settings)
    _finish(root, "drop", settings, output, emit_graph, {"skipped": why})


@main.command("monomialize")
@common
@_guard
def monomialize_cmd(problem, trunc, samples, seed, output, emit_graph):
    """Full chart tree down to monomial first integrals."""
    prob, model, settings = _load(problem, trunc, samples, seed)
    root = monomialize(model, settings)
    _finish(root, "monomialize", settings, output, emit_graph)


@main.command("check")
@common
@_guard
def check_cmd(problem, trunc, samples, seed, output, emit_graph):
    """Re-verify a chart tree document (or monomialize a problem file first)."""
    try:
        with open(problem) as fh:
            text = fh.read()
    except OSError as exc:
        _fail(EXIT_PARSE, {"error": "parse", "message": str(exc), "line": None, "column": None})
    try:
        doc = json.loads(text)
    except ValueError:
        doc = None
    if doc is None:
        prob, model, settings = _load(problem, trunc, samples, seed)
        root = monomialize(model, settings)
        doc = json.loads(dumps(tree_document(root, "monomialize", settings)))
    report = check_document(doc)
    out = {"command": "check", "tree_status": doc["status"]}
    out.update(report.to_dict())
    _emit(dumps(out), output)
    if not report.ok:
        sys.exit(EXIT_INTERNAL)
    sys.exit(STATUS_EXIT[doc["status"]])


if __name__ == "__main__":
    main()
