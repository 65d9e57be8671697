"""Path-spec documents, run reports and gauge-potential CSV output.

Path-spec format (YAML; any JSON document is also accepted)::

    version: 1
    segments:
      - generator: {J_HHx: 0.5, J_VVx: 0.5}
        length: pi
      - generator:
          dense: [[[re, im], ...4 entries], ...4 rows]
        length: 1.5

or a preset instead of ``segments``::

    version: 1
    preset: {name: example-iv-b, s2: 6.283185307179586, variant: diag}

Generator tokens are ``J_ax J_ay J_az J_a0 J_bx J_by J_bz J_b0 J_HHx J_HHy
J_HVx J_HVy J_VHx J_VHy J_VVx J_VVy``; ``dense`` adds an explicit 4x4
Hermitian matrix of [re, im] pairs. Numbers may be written as floats or as
multiples of pi (``pi``, ``2*pi``, ``pi/2``, ``-3*pi/4``).
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import re
import warnings
from dataclasses import dataclass, field

import numpy as np
import yaml

from . import __version__
from .decompose import (
    CartanFactors,
    Closing,
    CompiledSubgroup,
    PhaseLayer,
    TwoModeRotation,
    cartan_kpk,
)
from .errors import DegenerateAngles, InputError, InvalidLength, SpecSyntaxError, UnknownGenerator
from .fockspace import TOKENS, GeneratorCombo
from .holonomy import (
    Path,
    PathSegment,
    example_path,
    gauge_potential,
    total_transformation,
    wilson_loop,
)
from .lie import EulerParamsLO

SPEC_VERSION = 1
REPORT_FORMAT = "entgauge.report"
REPORT_VERSION = 1

_PI_EXPR = re.compile(
    r"^\s*(?P<sign>[+-])?\s*(?:(?P<num>\d+(?:\.\d*)?|\.\d+)\s*\*\s*)?pi"
    r"(?:\s*/\s*(?P<den>\d+(?:\.\d*)?))?\s*$"
)

PRESETS = {
    "example-iv-b": {"s2": 2 * np.pi, "variant": "diag"},
}


def _pos(node):
    mark = node.start_mark
    return mark.line + 1, mark.column + 1


def _fail(cls, message, node):
    line, col = _pos(node)
    raise cls(message, line, col)


def _number(node, what: str) -> float:
    if not isinstance(node, yaml.ScalarNode):
        _fail(SpecSyntaxError, f"{what} must be a number", node)
    text = node.value
    try:
        value = float(text)
    except ValueError:
        value = None
    if value is not None:
        if not np.isfinite(value):
            _fail(SpecSyntaxError, f"{what} must be finite", node)
        return value
    m = _PI_EXPR.match(text)
    if not m:
        _fail(SpecSyntaxError, f"{what}: cannot read {text!r} as a number", node)
    value = np.pi * float(m["num"] or 1.0) / float(m["den"] or 1.0)
    return -value if m["sign"] == "-" else value


def _mapping(node, what: str, allowed: set[str], required: set[str] = frozenset()):
    if not isinstance(node, yaml.MappingNode):
        _fail(SpecSyntaxError, f"{what} must be a mapping", node)
    out = {}
    for key, value in node.value:
        if not isinstance(key, yaml.ScalarNode):
            _fail(SpecSyntaxError, f"{what}: keys must be plain strings", key)
        name = key.value
        if name not in allowed:
            _fail(SpecSyntaxError, f"{what}: unknown field {name!r}", key)
        if name in out:
            _fail(SpecSyntaxError, f"{what}: duplicate field {name!r}", key)
        out[name] = (key, value)
    for name in sorted(required - set(out)):
        _fail(SpecSyntaxError, f"{what}: missing field {name!r}", node)
    return out


def _sequence(node, what: str):
    if not isinstance(node, yaml.SequenceNode):
        _fail(SpecSyntaxError, f"{what} must be a list", node)
    return node.value


def _complex_matrix_node(node, what: str, shape=(4, 4)) -> np.ndarray:
    rows = _sequence(node, what)
    if len(rows) != shape[0]:
        _fail(SpecSyntaxError, f"{what} must have {shape[0]} rows", node)
    out = np.zeros(shape, dtype=complex)
    for i, row in enumerate(rows):
        entries = _sequence(row, f"{what} row {i}")
        if len(entries) != shape[1]:
            _fail(SpecSyntaxError, f"{what} row {i} must have {shape[1]} entries", row)
        for j, entry in enumerate(entries):
            pair = _sequence(entry, f"{what}[{i}][{j}]")
            if len(pair) != 2:
                _fail(SpecSyntaxError, f"{what}[{i}][{j}] must be a [re, im] pair", entry)
            out[i, j] = complex(_number(pair[0], what), _number(pair[1], what))
    return out


def _generator(node):
    fields = _mapping(node, "generator", set(TOKENS) | {"dense"})
    coeffs = {}
    dense = None
    for name, (key, value) in fields.items():
        if name == "dense":
            dense = _complex_matrix_node(value, "dense generator")
            if np.linalg.norm(dense - dense.conj().T) > 1e-10:
                _fail(SpecSyntaxError, "dense generator is not Hermitian", value)
        else:
            coeffs[name] = _number(value, f"coefficient of {name}")
    return GeneratorCombo.from_tokens(coeffs), dense


def _check_tokens(node):
    # report unknown tokens as UnknownGenerator rather than a generic field error
    if isinstance(node, yaml.MappingNode):
        for key, _ in node.value:
            if isinstance(key, yaml.ScalarNode) and key.value not in TOKENS and key.value != "dense":
                line, col = _pos(key)
                raise UnknownGenerator(key.value, line, col)


def _compose(text: str):
    try:
        return yaml.compose(text, Loader=yaml.SafeLoader)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark or exc.context_mark
        line, col = (mark.line + 1, mark.column + 1) if mark else (None, None)
        raise SpecSyntaxError(f"malformed document: {exc.problem}", line, col) from None
    except yaml.YAMLError as exc:
        raise SpecSyntaxError(f"malformed document: {exc}") from None


def parse_path_spec(text: str) -> Path:
    """Parse a path-spec document into a :class:`Path`.

    Strict: unknown fields are rejected and every error carries the line and
    column of the offending node.
    """
    root = _compose(text)
    if root is None:
        raise SpecSyntaxError("empty document", 1, 1)
    top = _mapping(root, "document", {"version", "segments", "preset"}, {"version"})
    key, vnode = top["version"]
    if not (isinstance(vnode, yaml.ScalarNode) and vnode.value == str(SPEC_VERSION)):
        _fail(SpecSyntaxError, f"unsupported version; expected {SPEC_VERSION}", vnode)
    if ("segments" in top) == ("preset" in top):
        _fail(SpecSyntaxError, "exactly one of 'segments' or 'preset' is required", root)
    if "preset" in top:
        return _parse_preset(top["preset"][1])

    items = []
    seg_nodes = _sequence(top["segments"][1], "segments")
    if not seg_nodes:
        _fail(SpecSyntaxError, "segments must not be empty", top["segments"][1])
    for idx, seg in enumerate(seg_nodes):
        f = _mapping(seg, f"segment {idx}", {"generator", "length"}, {"generator", "length"})
        gnode = f["generator"][1]
        _check_tokens(gnode)
        combo, dense = _generator(gnode)
        lnode = f["length"][1]
        length = _number(lnode, "length")
        if not length > 0:
            _fail(InvalidLength, f"segment {idx}: length must be positive, got {length}", lnode)
        if dense is None:
            items.append((combo, length))
        else:
            items.append((combo, length, dense))
    return _path_from_items(items)


def _path_from_items(items) -> Path:
    segs, s = [], 0.0
    for item in items:
        combo, length = item[0], item[1]
        dense = item[2] if len(item) > 2 else None
        segs.append(PathSegment(combo, s, s + length, dense=dense))
        s += length
    return Path(tuple(segs))


def _parse_preset(node) -> Path:
    f = _mapping(node, "preset", {"name", "s2", "variant"}, {"name"})
    name_node = f["name"][1]
    name = name_node.value if isinstance(name_node, yaml.ScalarNode) else None
    if name not in PRESETS:
        _fail(SpecSyntaxError, f"unknown preset {name!r}; known: {sorted(PRESETS)}", name_node)
    params = dict(PRESETS[name])
    if "s2" in f:
        params["s2"] = _number(f["s2"][1], "s2")
        if params["s2"] < 0:
            _fail(InvalidLength, "s2 must be non-negative", f["s2"][1])
    if "variant" in f:
        vnode = f["variant"][1]
        if vnode.value not in ("diag", "hv"):
            _fail(SpecSyntaxError, "variant must be 'diag' or 'hv'", vnode)
        params["variant"] = vnode.value
    return example_path(params["s2"], params["variant"])


def path_to_spec(path: Path) -> str:
    """Serialize a path as a version-1 spec document (JSON flavour)."""
    segs = []
    for seg in path.segments:
        gen = {k: v for k, v in seg.generator.to_tokens().items()}
        if seg.dense is not None:
            gen["dense"] = encode_matrix(seg.dense)
        segs.append({"generator": gen, "length": seg.length})
    return json.dumps({"version": SPEC_VERSION, "segments": segs}, indent=2) + "\n"


def read_matrix(text: str, shape=(4, 4)) -> np.ndarray:
    """Read a matrix file: a list of rows, entries as [re, im] pairs or plain
    real numbers, optionally under a top-level ``matrix`` key."""
    root = _compose(text)
    if root is None:
        raise SpecSyntaxError("empty document", 1, 1)
    if isinstance(root, yaml.MappingNode):
        f = _mapping(root, "document", {"matrix"}, {"matrix"})
        root = f["matrix"][1]
    rows = _sequence(root, "matrix")
    if len(rows) != shape[0]:
        _fail(SpecSyntaxError, f"matrix must have {shape[0]} rows", root)
    out = np.zeros(shape, dtype=complex)
    for i, row in enumerate(rows):
        entries = _sequence(row, f"row {i}")
        if len(entries) != shape[1]:
            _fail(SpecSyntaxError, f"row {i} must have {shape[1]} entries", row)
        for j, e in enumerate(entries):
            if isinstance(e, yaml.SequenceNode):
                if len(e.value) != 2:
                    _fail(SpecSyntaxError, f"entry [{i}][{j}] must be [re, im]", e)
                out[i, j] = complex(_number(e.value[0], "entry"), _number(e.value[1], "entry"))
            else:
                out[i, j] = _number(e, "entry")
    return out


# ---------------------------------------------------------------- reports


_PAIR = re.compile(r"\[\s+([^\s,\[\]]+),\s+([^\s,\[\]]+)\s+\]")


def dumps(data) -> str:
    """Indented JSON with each [re, im] pair kept on one line."""
    return _PAIR.sub(r"[\1, \2]", json.dumps(data, indent=2)) + "\n"


def encode_matrix(m: np.ndarray) -> list:
    m = np.asarray(m, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def decode_matrix(data) -> np.ndarray:
    return np.array([[complex(re, im) for re, im in row] for row in data], dtype=complex)


def input_digest(text: str | bytes) -> str:
    if isinstance(text, str):
        text = text.encode()
    return "sha256:" + hashlib.sha256(text).hexdigest()


@dataclass(eq=False)
class RunReport:
    digest: str
    classification: Closing
    holonomy: np.ndarray
    total_fundamental: np.ndarray
    total_restricted: np.ndarray
    cartan: CartanFactors
    steps: int
    residual: float
    samples: list[tuple[float, np.ndarray]] = field(default_factory=list)

    def __eq__(self, other):
        if not isinstance(other, RunReport):
            return NotImplemented
        return (
            self.digest == other.digest
            and self.classification == other.classification
            and np.array_equal(self.holonomy, other.holonomy)
            and np.array_equal(self.total_fundamental, other.total_fundamental)
            and np.array_equal(self.total_restricted, other.total_restricted)
            and self.cartan.kbar == other.cartan.kbar
            and self.cartan.x_H == other.cartan.x_H
            and self.cartan.x_V == other.cartan.x_V
            and np.array_equal(self.cartan.kprime, other.cartan.kprime)
            and self.steps == other.steps
            and self.residual == other.residual
            and len(self.samples) == len(other.samples)
            and all(
                s1 == s2 and np.array_equal(m1, m2)
                for (s1, m1), (s2, m2) in zip(self.samples, other.samples)
            )
        )


def cartan_to_dict(c: CartanFactors) -> dict:
    return {
        "kbar": {name: getattr(c.kbar, name) for name in EulerParamsLO.names()},
        "x_H": c.x_H,
        "x_V": c.x_V,
        "kprime": encode_matrix(c.kprime),
    }


def cartan_from_dict(d: dict) -> CartanFactors:
    kbar = EulerParamsLO(**{name: float(d["kbar"][name]) for name in EulerParamsLO.names()})
    return CartanFactors(kbar, float(d["x_H"]), float(d["x_V"]), decode_matrix(d["kprime"]))


def compiled_to_dict(c: CompiledSubgroup) -> dict:
    elements = []
    for f in c.factorization:
        if isinstance(f, TwoModeRotation):
            elements.append({"type": "rotation", "modes": list(f.modes), "theta": f.theta, "phi": f.phi})
        else:
            elements.append({"type": "phases", "phases": list(f.phases)})
    return {"V": encode_matrix(c.V), "c": [float(x) for x in c.c], "factorization": elements}


def compiled_from_dict(d: dict) -> CompiledSubgroup:
    elements = []
    for e in d["factorization"]:
        if e["type"] == "rotation":
            elements.append(TwoModeRotation(tuple(e["modes"]), float(e["theta"]), float(e["phi"])))
        else:
            elements.append(PhaseLayer(tuple(float(p) for p in e["phases"])))
    return CompiledSubgroup(decode_matrix(d["V"]), np.array(d["c"], dtype=float), elements)


def report_to_dict(r: RunReport) -> dict:
    out = {
        "format": REPORT_FORMAT,
        "version": REPORT_VERSION,
        "generator": f"entgauge {__version__}",
        "input_digest": r.digest,
        "classification": r.classification.value,
        "holonomy": encode_matrix(r.holonomy),
        "total_transformation": {
            "fundamental": encode_matrix(r.total_fundamental),
            "restricted": encode_matrix(r.total_restricted),
        },
        "cartan": cartan_to_dict(r.cartan),
        "integrator": {"steps": r.steps, "residual": r.residual},
    }
    if r.samples:
        out["gauge_potential"] = [{"s": s, "A": encode_matrix(m)} for s, m in r.samples]
    return out


def _signed(x) -> str:
    text = repr(float(x))
    return text if text.startswith("-") else "+" + text


def _human(r: RunReport) -> str:
    def table(title, m):
        lines = [title]
        for row in np.asarray(m):
            cells = [f"{float(z.real)!r:>23} {_signed(z.imag):>24}j" for z in row]
            lines.append("  " + " | ".join(cells))
        return lines

    lines = [
        f"{REPORT_FORMAT} v{REPORT_VERSION} (entgauge {__version__})",
        f"input digest     : {r.digest}",
        f"classification   : {r.classification.value}",
        f"integrator steps : {r.steps}",
        f"residual         : {r.residual!r}",
        "",
    ]
    lines += table("holonomy (HH, HV, VH, VV):", r.holonomy)
    lines += table("total transformation, fundamental (aH, aV, bH, bV):", r.total_fundamental)
    lines += table("total transformation, restricted to qubit subspace:", r.total_restricted)
    lines.append("cartan factors:")
    for name in EulerParamsLO.names():
        lines.append(f"  kbar.{name:<8}: {getattr(r.cartan.kbar, name)!r}")
    lines.append(f"  x_H          : {r.cartan.x_H!r}")
    lines.append(f"  x_V          : {r.cartan.x_V!r}")
    lines += table("  kprime:", r.cartan.kprime)
    for s, m in r.samples:
        lines += table(f"gauge potential at s = {s!r}:", m)
    return "\n".join(lines) + "\n"


def emit_report(report: RunReport, format: str = "structured") -> str:
    """Render a report: ``structured`` (versioned JSON) or ``human`` (text).

    Floats are written with repr, so both forms are lossless.
    """
    if format in ("structured", "json"):
        return dumps(report_to_dict(report))
    if format == "human":
        return _human(report)
    raise ValueError(f"unknown report format {format!r}")


def parse_report(text: str) -> RunReport:
    """Inverse of ``emit_report(..., 'structured')``."""
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecSyntaxError(f"malformed report: {exc.msg}", exc.lineno, exc.colno) from None
    if d.get("format") != REPORT_FORMAT or d.get("version") != REPORT_VERSION:
        raise SpecSyntaxError("not an entgauge report of a supported version")
    try:
        return RunReport(
            digest=d["input_digest"],
            classification=Closing(d["classification"]),
            holonomy=decode_matrix(d["holonomy"]),
            total_fundamental=decode_matrix(d["total_transformation"]["fundamental"]),
            total_restricted=decode_matrix(d["total_transformation"]["restricted"]),
            cartan=cartan_from_dict(d["cartan"]),
            steps=int(d["integrator"]["steps"]),
            residual=float(d["integrator"]["residual"]),
            samples=[(float(x["s"]), decode_matrix(x["A"])) for x in d.get("gauge_potential", [])],
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"report is missing or has invalid field: {exc}") from None


def sample_points(path: Path, n: int) -> np.ndarray:
    """n cell midpoints spread uniformly over the path's pseudotime range."""
    if n < 2:
        raise ValueError("need at least two samples")
    span = path.s_end - path.s_start
    return path.s_start + (np.arange(n) + 0.5) * span / n


def sample_gauge_potential_csv(path: Path, n: int) -> str:
    """CSV of the gauge potential at n pseudotimes: column ``s`` then
    ``A{a}{b}_re`` and ``A{a}{b}_im`` for a, b = 1..4 (row-major)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    header = ["s"]
    for a in range(1, 5):
        for b in range(1, 5):
            header += [f"A{a}{b}_re", f"A{a}{b}_im"]
    writer.writerow(header)
    for s in sample_points(path, n):
        m = gauge_potential(path, float(s)).matrix
        row = [repr(float(s))]
        for z in m.ravel():
            row += [repr(float(z.real)), repr(float(z.imag))]
        writer.writerow(row)
    return buf.getvalue()


def read_gauge_potential_csv(text: str) -> list[tuple[float, np.ndarray]]:
    rows = list(csv.reader(io.StringIO(text)))
    out = []
    for row in rows[1:]:
        vals = [float(x) for x in row]
        z = np.array(vals[1::2]) + 1j * np.array(vals[2::2])
        out.append((vals[0], z.reshape(4, 4)))
    return out


def build_report(path: Path, digest: str, tol: float = 1e-10, samples: int = 0) -> RunReport:
    """Integrate the holonomy of ``path`` and collect everything a report holds."""
    hol = wilson_loop(path, tol)
    total = total_transformation(path)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateAngles)
        cartan = cartan_kpk(total.fundamental)
    table = []
    if samples:
        table = [(float(s), gauge_potential(path, float(s)).matrix) for s in sample_points(path, samples)]
    return RunReport(
        digest=digest,
        classification=hol.classification,
        holonomy=hol.matrix,
        total_fundamental=total.fundamental,
        total_restricted=total.restricted,
        cartan=cartan,
        steps=hol.steps,
        residual=hol.residual,
        samples=table,
    )
