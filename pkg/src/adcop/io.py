"""Line-oriented text format for ADCOP and DCOP instances.

::

    adcop <n> <k>
    alphabet 0 1              # optional
    var <id> <owner> <domain-size>
    con <i> <j>
    <|D_i| rows of |D_j| costs>   # side of the owner of i
    <|D_i| rows of |D_j| costs>   # side of the owner of j

Variable ids are 1-based. A ``dcop`` header carries one matrix per
constraint instead of two. Blank lines and ``#`` comments are ignored.
"""

from __future__ import annotations

import io
from pathlib import Path
from typing import TextIO, Union

import numpy as np

from .model import AdcopInstance, Dcop


class InstanceFormatError(ValueError):
    pass


def _fmt_cost(x) -> str:
    if float(x).is_integer():
        return str(int(x))
    return repr(float(x))


def _write_matrix(out: TextIO, table: np.ndarray) -> None:
    for row in table:
        out.write(" ".join(_fmt_cost(x) for x in row) + "\n")


def dumps(instance: Union[AdcopInstance, Dcop]) -> str:
    out = io.StringIO()
    symmetric = isinstance(instance, Dcop)
    k = max(instance.domain_sizes, default=0)
    out.write(f"{'dcop' if symmetric else 'adcop'} {instance.n_vars} {k}\n")
    if not symmetric:
        out.write("alphabet " + " ".join(_fmt_cost(x) for x in sorted(instance.cost_alphabet)) + "\n")
    for v, (owner, size) in enumerate(zip(instance.owners, instance.domain_sizes)):
        out.write(f"var {v + 1} {owner} {size}\n")
    for c in instance.constraints:
        if c.arity != 2:
            raise InstanceFormatError("text format holds binary constraints only")
        i, j = c.scope
        out.write(f"con {i + 1} {j + 1}\n")
        if symmetric:
            _write_matrix(out, c.table)
        else:
            for side in c.sides:
                _write_matrix(out, side)
    return out.getvalue()


def _number(tok: str):
    try:
        return int(tok)
    except ValueError:
        try:
            return float(tok)
        except ValueError:
            raise InstanceFormatError(f"not a number: {tok!r}") from None


def loads(text: str) -> Union[AdcopInstance, Dcop]:
    lines = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            lines.append(line)
    if not lines:
        raise InstanceFormatError("empty instance file")
    head = lines[0].split()
    if len(head) != 3 or head[0] not in ("adcop", "dcop"):
        raise InstanceFormatError(f"bad header: {lines[0]!r}")
    symmetric = head[0] == "dcop"
    n = int(head[1])
    sizes: dict[int, int] = {}
    owners: dict[int, int] = {}
    alphabet = None
    constraints = []
    pos = 1

    def read_matrix(rows: int, cols: int):
        nonlocal pos
        if pos + rows > len(lines):
            raise InstanceFormatError("truncated cost matrix")
        mat = []
        for _ in range(rows):
            row = [_number(t) for t in lines[pos].split()]
            if len(row) != cols:
                raise InstanceFormatError(f"expected {cols} costs, got {len(row)}: {lines[pos]!r}")
            mat.append(row)
            pos += 1
        return mat

    while pos < len(lines):
        tok = lines[pos].split()
        pos += 1
        if tok[0] == "alphabet":
            alphabet = frozenset(_number(t) for t in tok[1:])
        elif tok[0] == "var":
            if len(tok) != 4:
                raise InstanceFormatError(f"bad var line: {' '.join(tok)!r}")
            vid, owner, size = (int(t) for t in tok[1:])
            sizes[vid] = size
            owners[vid] = owner
        elif tok[0] == "con":
            if len(tok) != 3:
                raise InstanceFormatError(f"bad con line: {' '.join(tok)!r}")
            i, j = int(tok[1]), int(tok[2])
            if i not in sizes or j not in sizes:
                raise InstanceFormatError(f"constraint {i} {j} references undeclared variable")
            shape = (sizes[i], sizes[j])
            if symmetric:
                constraints.append(((i - 1, j - 1), read_matrix(*shape)))
            else:
                constraints.append(((i - 1, j - 1), (read_matrix(*shape), read_matrix(*shape))))
        else:
            raise InstanceFormatError(f"unknown line: {' '.join(tok)!r}")
    if sorted(sizes) != list(range(1, n + 1)):
        raise InstanceFormatError(f"expected variables 1..{n}, got {sorted(sizes)}")
    domain_sizes = [sizes[v] for v in range(1, n + 1)]
    owner_list = [owners[v] for v in range(1, n + 1)]
    try:
        if symmetric:
            return Dcop.build(domain_sizes, constraints, owner_list)
        return AdcopInstance.build(domain_sizes, constraints, owner_list, alphabet)
    except ValueError as exc:
        raise InstanceFormatError(str(exc)) from exc


def load(path: Union[str, Path]) -> Union[AdcopInstance, Dcop]:
    return loads(Path(path).read_text())


def dump(instance: Union[AdcopInstance, Dcop], path: Union[str, Path]) -> None:
    Path(path).write_text(dumps(instance))
