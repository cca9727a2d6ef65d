"""Line-oriented text formats for models and samples.

General model::

    tree-bayesnet v1 n=<n>
    root <P(X_0=+1)>
    edge <parent> <child> <q_pp> <q_pm>      (n - 1 lines)

Symmetric model::

    tree-ising-sym v1 n=<n>
    edge <i> <j> <alpha>                      (n - 1 lines)

Samples: one assignment per line, +/-1 integers separated by spaces, after a
header comment ``# tree-bayesnet-samples v1 n=<n> m=<m>``.  Lines starting
with ``#`` are comments everywhere.  Floats are written with ``repr`` so a
write/read round trip is exact.
"""

from __future__ import annotations

import io
import re

import numpy as np

from .model import ModelError, SymmetricTreeModel, TreeModel

__all__ = [
    "ParseError",
    "format_model",
    "parse_model",
    "format_samples",
    "parse_samples",
    "read_model",
    "write_model",
    "read_samples",
    "write_samples",
]

GENERAL_HEADER = "tree-bayesnet v1"
SYMMETRIC_HEADER = "tree-ising-sym v1"
SAMPLES_HEADER = "tree-bayesnet-samples v1"


class ParseError(ValueError):
    pass


def _f(x: float) -> str:
    return repr(float(x))


def format_model(model, comments: tuple[str, ...] = ()) -> str:
    lines = [f"# {c}" for c in comments]
    if isinstance(model, SymmetricTreeModel):
        lines.append(f"{SYMMETRIC_HEADER} n={model.n}")
        for (i, j), a in zip(model.edges, model.alpha):
            lines.append(f"edge {i} {j} {_f(a)}")
    elif isinstance(model, TreeModel):
        lines.append(f"{GENERAL_HEADER} n={model.n}")
        lines.append(f"root {_f(model.root_prob)}")
        for (p, c), (qpp, qpm) in zip(model.edges, model.cond):
            lines.append(f"edge {p} {c} {_f(qpp)} {_f(qpm)}")
    else:
        raise TypeError(f"cannot format {type(model).__name__}")
    return "\n".join(lines) + "\n"


def _content_lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if line and not line.startswith("#"):
            yield lineno, line


def _num(tok: str, lineno: int, kind=float):
    try:
        return kind(tok)
    except ValueError:
        raise ParseError(f"line {lineno}: cannot read {tok!r} as {kind.__name__}") from None


def parse_model(text: str):
    """Parse either model format; returns ``TreeModel`` or ``SymmetricTreeModel``."""
    lines = list(_content_lines(text))
    if not lines:
        raise ParseError("empty model file")
    lineno, header = lines[0]
    m = re.fullmatch(r"(tree-bayesnet v1|tree-ising-sym v1)(?:\s+n=(\d+))?", header)
    if not m:
        raise ParseError(f"line {lineno}: unknown header {header!r}")
    symmetric = m.group(1) == SYMMETRIC_HEADER
    n = int(m.group(2)) if m.group(2) else None
    root = None
    edges, values = [], []
    for lineno, line in lines[1:]:
        tok = line.split()
        if tok[0] == "root" and not symmetric:
            if len(tok) != 2 or root is not None:
                raise ParseError(f"line {lineno}: malformed root line")
            root = _num(tok[1], lineno)
        elif tok[0] == "edge":
            want = 4 if symmetric else 5
            if len(tok) != want:
                raise ParseError(f"line {lineno}: expected {want} fields, got {len(tok)}")
            edges.append((_num(tok[1], lineno, int), _num(tok[2], lineno, int)))
            values.append([_num(t, lineno) for t in tok[3:]])
        else:
            raise ParseError(f"line {lineno}: unexpected {tok[0]!r}")
    if n is None:
        n = 1 + max((max(e) for e in edges), default=0)
    try:
        if symmetric:
            return SymmetricTreeModel(n, edges, np.array(values).reshape(len(edges)))
        if root is None:
            raise ParseError("missing root line")
        return TreeModel(n, edges, root, np.array(values).reshape(len(edges), 2))
    except ModelError as exc:
        raise ParseError(f"invalid model: {exc}") from exc


def format_samples(samples: np.ndarray) -> str:
    x = np.asarray(samples)
    m, n = x.shape
    buf = io.StringIO()
    buf.write(f"# {SAMPLES_HEADER} n={n} m={m}\n")
    if m:
        np.savetxt(buf, x, fmt="%d", delimiter=" ")
    return buf.getvalue()


def parse_samples(text: str) -> np.ndarray:
    """Parse a sample file into an int8 matrix (m, n)."""
    n_hint = None
    body = []
    for raw in text.splitlines():
        line = raw.strip()
        if line.startswith("#"):
            m = re.search(rf"{SAMPLES_HEADER} n=(\d+)", line)
            if m:
                n_hint = int(m.group(1))
        elif line:
            body.append(line)
    if not body:
        return np.zeros((0, n_hint or 0), dtype=np.int8)
    try:
        x = np.loadtxt(io.StringIO("\n".join(body)), dtype=np.int64, ndmin=2)
    except ValueError as exc:
        raise ParseError(f"malformed sample rows: {exc}") from None
    if not np.all((x == 1) | (x == -1)):
        raise ParseError("sample values must be +1 or -1")
    if n_hint is not None and n_hint != x.shape[1]:
        raise ParseError(f"header says n={n_hint} but rows have {x.shape[1]} values")
    return x.astype(np.int8)


def read_model(path):
    with open(path, encoding="utf-8") as fh:
        return parse_model(fh.read())


def write_model(path, model, comments: tuple[str, ...] = ()) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_model(model, comments))


def read_samples(path) -> np.ndarray:
    with open(path, encoding="utf-8") as fh:
        return parse_samples(fh.read())


def write_samples(path, samples) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_samples(samples))
