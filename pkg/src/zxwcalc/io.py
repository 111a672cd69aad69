"""Text formats: canonical JSON for diagrams, plus Graphviz DOT rendering.

The JSON form is canonical: node ids sorted, wires sorted, object keys
sorted, no whitespace, floats in shortest round-trip form.  Serializing the
same diagram therefore always yields the same bytes, which lets equality of
serialized text stand in for structural equality in tests.
"""

from __future__ import annotations

import json

from .diagram import (
    Diagram,
    Dualiser,
    GreenSpider,
    Hadamard,
    HadamardDagger,
    LabeledBox,
    Multiplier,
    PinkSpider,
    ScalarBox,
    Triangle,
    TriangleInverse,
    VBox,
    WNode,
    WNodeGeneral,
    ZBox,
    validate,
)

FORMAT_VERSION = 1

_FIXED_KINDS = {
    "hadamard": Hadamard,
    "hadamard_dagger": HadamardDagger,
    "wnode": WNode,
    "dualiser": Dualiser,
    "triangle": Triangle,
    "triangle_inverse": TriangleInverse,
    "vbox": VBox,
}

_FIXED_NAMES = {cls: name for name, cls in _FIXED_KINDS.items()}


def _c_doc(value: complex) -> list[float]:
    return [float(value.real), float(value.imag)]


def _c_load(doc) -> complex:
    if (
        not isinstance(doc, (list, tuple))
        or len(doc) != 2
        or not all(isinstance(x, (int, float)) for x in doc)
    ):
        raise ValueError(f"expected a [re, im] pair, got {doc!r}")
    return complex(doc[0], doc[1])


def _kind_doc(kind) -> dict:
    if isinstance(kind, ZBox):
        return {
            "kind": "zbox",
            "phase": [_c_doc(a) for a in kind.phase],
            "inputs": kind.n_in,
            "outputs": kind.n_out,
        }
    if isinstance(kind, GreenSpider):
        return {
            "kind": "green_spider",
            "angles": [float(a) for a in kind.angles],
            "inputs": kind.n_in,
            "outputs": kind.n_out,
        }
    if isinstance(kind, LabeledBox):
        return {
            "kind": "labeled_box",
            "value": _c_doc(kind.value),
            "inputs": kind.n_in,
            "outputs": kind.n_out,
        }
    if isinstance(kind, PinkSpider):
        return {
            "kind": "pink_spider",
            "label": kind.label,
            "inputs": kind.n_in,
            "outputs": kind.n_out,
        }
    if isinstance(kind, WNodeGeneral):
        return {
            "kind": "wnode_general",
            "legs": kind.legs,
            "transposed": kind.transposed,
        }
    if isinstance(kind, Multiplier):
        return {"kind": "multiplier", "weight": kind.weight}
    if isinstance(kind, ScalarBox):
        return {"kind": "scalar_box", "value": _c_doc(kind.value)}
    name = _FIXED_NAMES.get(type(kind))
    if name is None:
        raise TypeError(f"cannot serialize node kind {type(kind).__name__}")
    return {"kind": name}


def _kind_load(doc) -> object:
    if not isinstance(doc, dict) or "kind" not in doc:
        raise ValueError(f"node document must be an object with a 'kind': {doc!r}")
    name = doc["kind"]
    try:
        if name == "zbox":
            return ZBox(
                tuple(_c_load(a) for a in doc["phase"]),
                int(doc["inputs"]),
                int(doc["outputs"]),
            )
        if name == "green_spider":
            return GreenSpider(
                tuple(float(a) for a in doc["angles"]),
                int(doc["inputs"]),
                int(doc["outputs"]),
            )
        if name == "labeled_box":
            return LabeledBox(
                _c_load(doc["value"]), int(doc["inputs"]), int(doc["outputs"])
            )
        if name == "pink_spider":
            return PinkSpider(
                int(doc["label"]), int(doc["inputs"]), int(doc["outputs"])
            )
        if name == "wnode_general":
            return WNodeGeneral(int(doc["legs"]), bool(doc["transposed"]))
        if name == "multiplier":
            return Multiplier(int(doc["weight"]))
        if name == "scalar_box":
            return ScalarBox(_c_load(doc["value"]))
    except KeyError as exc:
        raise ValueError(f"node kind {name!r} is missing field {exc}") from None
    cls = _FIXED_KINDS.get(name)
    if cls is None:
        raise ValueError(f"unknown node kind {name!r}")
    return cls()


def _source_doc(ep) -> dict:
    if ep[0] == "bin":
        return {"input": ep[1]}
    return {"node": ep[1], "port": ep[2]}


def _sink_doc(ep) -> dict:
    if ep[0] == "bout":
        return {"output": ep[1]}
    return {"node": ep[1], "port": ep[2]}


def _source_load(doc) -> tuple:
    if not isinstance(doc, dict):
        raise ValueError(f"wire endpoint must be an object, got {doc!r}")
    if "input" in doc:
        return ("bin", int(doc["input"]))
    if "node" in doc and "port" in doc:
        return ("out", doc["node"], int(doc["port"]))
    raise ValueError(f"malformed wire source {doc!r}")


def _sink_load(doc) -> tuple:
    if not isinstance(doc, dict):
        raise ValueError(f"wire endpoint must be an object, got {doc!r}")
    if "output" in doc:
        return ("bout", int(doc["output"]))
    if "node" in doc and "port" in doc:
        return ("in", doc["node"], int(doc["port"]))
    raise ValueError(f"malformed wire sink {doc!r}")


def serialize_diagram(diagram: Diagram) -> str:
    """Canonical JSON text for a diagram, ending in a newline."""
    for nid in diagram.nodes:
        if not isinstance(nid, str):
            raise TypeError(f"node ids must be strings to serialize, got {nid!r}")
    doc = {
        "version": FORMAT_VERSION,
        "dimension": diagram.dimension,
        "inputs": diagram.n_in,
        "outputs": diagram.n_out,
        "nodes": {nid: _kind_doc(kind) for nid, kind in sorted(diagram.nodes.items())},
        "wires": [
            {"from": _source_doc(src), "to": _sink_doc(snk)}
            for src, snk in sorted(diagram.wires)
        ],
    }
    return json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n"


def parse_diagram(text: str) -> Diagram:
    """Inverse of :func:`serialize_diagram`; raises ValueError on bad input."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ValueError("diagram document must be a JSON object")
    version = doc.get("version")
    if version != FORMAT_VERSION:
        raise ValueError(f"unsupported format version {version!r}")
    for field in ("dimension", "inputs", "outputs", "nodes", "wires"):
        if field not in doc:
            raise ValueError(f"diagram document is missing {field!r}")
    nodes_doc = doc["nodes"]
    if not isinstance(nodes_doc, dict):
        raise ValueError("'nodes' must map node ids to node documents")
    nodes = {nid: _kind_load(kd) for nid, kd in nodes_doc.items()}
    wires_doc = doc["wires"]
    if not isinstance(wires_doc, list):
        raise ValueError("'wires' must be a list")
    wires = []
    for wd in wires_doc:
        if not isinstance(wd, dict) or "from" not in wd or "to" not in wd:
            raise ValueError(f"each wire needs 'from' and 'to': {wd!r}")
        wires.append((_source_load(wd["from"]), _sink_load(wd["to"])))
    diagram = Diagram(
        int(doc["dimension"]), nodes, wires, int(doc["inputs"]), int(doc["outputs"])
    )
    errors = validate(diagram)
    if errors:
        raise ValueError("invalid diagram: " + "; ".join(errors))
    return diagram


# ---------------------------------------------------------------------------
# DOT rendering


def _dot_quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _short_complex(value: complex) -> str:
    re, im = value.real, value.imag
    if im == 0:
        return f"{re:g}"
    if re == 0:
        return f"{im:g}j"
    return f"{re:g}{im:+g}j"


def _node_label(kind) -> str:
    if isinstance(kind, ZBox):
        return "Z " + ",".join(_short_complex(a) for a in kind.phase)
    if isinstance(kind, GreenSpider):
        return "Z< " + ",".join(f"{a:g}" for a in kind.angles)
    if isinstance(kind, LabeledBox):
        return f"box {_short_complex(kind.value)}"
    if isinstance(kind, PinkSpider):
        return f"X {kind.label}"
    if isinstance(kind, WNodeGeneral):
        return f"W{kind.legs}" + ("t" if kind.transposed else "")
    if isinstance(kind, Multiplier):
        return f"x{kind.weight}"
    if isinstance(kind, ScalarBox):
        return _short_complex(kind.value)
    return {
        Hadamard: "H",
        HadamardDagger: "H†",
        WNode: "W",
        Dualiser: "D",
        Triangle: "T",
        TriangleInverse: "T⁻¹",
        VBox: "V",
    }[type(kind)]


def _node_style(kind) -> str:
    if isinstance(kind, (ZBox, GreenSpider, LabeledBox)):
        return "shape=box,style=filled,fillcolor=palegreen"
    if isinstance(kind, PinkSpider):
        return "shape=circle,style=filled,fillcolor=lightpink"
    if isinstance(kind, (WNode, WNodeGeneral)):
        return "shape=triangle,style=filled,fillcolor=black,fontcolor=white"
    if isinstance(kind, (Hadamard, HadamardDagger)):
        return "shape=box,style=filled,fillcolor=khaki"
    return "shape=box,style=filled,fillcolor=lightgray"


def _dot_endpoint(ep) -> str:
    if ep[0] == "bin":
        return f"in{ep[1]}"
    if ep[0] == "bout":
        return f"out{ep[1]}"
    return "n_" + str(ep[1])


def render_dot(diagram: Diagram) -> str:
    """Graphviz source for a diagram, deterministic line order."""
    lines = ["digraph zxw {", "  rankdir=LR;"]
    for pos in range(diagram.n_in):
        lines.append(f"  in{pos} [shape=point,xlabel={_dot_quote(f'in {pos}')}];")
    for pos in range(diagram.n_out):
        lines.append(f"  out{pos} [shape=point,xlabel={_dot_quote(f'out {pos}')}];")
    for nid, kind in sorted(diagram.nodes.items()):
        name = "n_" + str(nid)
        label = _dot_quote(_node_label(kind))
        lines.append(f"  {_dot_quote(name)} [label={label},{_node_style(kind)}];")
    for src, snk in sorted(diagram.wires):
        tail = _dot_quote(_dot_endpoint(src))
        head = _dot_quote(_dot_endpoint(snk))
        attrs = []
        if src[0] == "out":
            attrs.append(f"taillabel={_dot_quote(str(src[2]))}")
        if snk[0] == "in":
            attrs.append(f"headlabel={_dot_quote(str(snk[2]))}")
        suffix = " [" + ",".join(attrs) + "]" if attrs else ""
        lines.append(f"  {tail} -> {head}{suffix};")
    lines.append("}")
    return "\n".join(lines) + "\n"
