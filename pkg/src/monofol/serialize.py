"""Chart trees as JSON documents and as Graphviz text."""
import json

from .driver import nu_text, tree_status
from .series import format_series

FORMAT = "monofol-chart-tree/1"


def node_to_dict(node):
    m = node.model
    names = m.frame.names
    out = {
        "path": node.path,
        "label": node.label,
        "frame": m.frame.to_dict(),
        "first_integrals": m.B.tolist(),
        "generators": [format_series(g, names) for g in m.gens],
        "exact": [g.exact for g in m.gens],
        "labels": list(m.labels),
        "order": m.order,
        "nu": nu_text(node.nu) if node.nu_known else None,
        "status": node.status,
        "children": [node_to_dict(c) for c in node.children],
    }
    if node.detail is not None:
        out["detail"] = node.detail
    if node.transform is not None:
        # the edge is described in the child's own variable names
        out["transition"] = node.transform.to_dict(names)
    if node.info:
        out["info"] = node.info
    return out


def summarize(root):
    counts = {}
    for leaf in root.leaves():
        counts[leaf.status or "open"] = counts.get(leaf.status or "open", 0) + 1
    drops = [n.info["drop"] for n in root.walk() if "drop" in n.info]
    samples = [p for n in root.walk() if "samples" in n.info for p in n.info["samples"]["points"]]
    return {
        "leaves": counts,
        "nodes": sum(1 for _ in root.walk()),
        "drops": len(drops),
        "samples": len(samples),
        "samples_ok": sum(1 for p in samples if p.get("ok")),
    }


def tree_document(root, command, settings, n=None):
    return {
        "format": FORMAT,
        "command": command,
        "settings": {"samples": settings.samples, "seed": settings.seed,
                     "trunc": root.model.order},
        "generators": root.model.n if n is None else n,
        "status": tree_status(root),
        "summary": summarize(root),
        "tree": node_to_dict(root),
    }


def dumps(doc):
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def _dot_escape(s):
    return s.replace("\\", "\\\\").replace('"', '\\"')


def to_dot(root):
    lines = ["digraph chart_tree {", "  node [shape=box, fontname=\"monospace\"];"]

    def ident(node):
        return "n" + node.path.replace(".", "_").replace("/", "_")

    for node in root.walk():
        text = node.label
        if node.nu_known:
            text += "\\nnu=" + str(nu_text(node.nu))
        if node.status:
            text += "\\n" + node.status
        lines.append('  %s [label="%s"];' % (ident(node), _dot_escape(text).replace("\\\\n", "\\n")))
    for node in root.walk():
        for c in node.children:
            lines.append("  %s -> %s;" % (ident(node), ident(c)))
    lines.append("}")
    return "\n".join(lines) + "\n"
