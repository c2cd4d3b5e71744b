from __future__ import annotations

import numpy as np
import pytest

from adcop.generators import from_preset
from adcop.io import InstanceFormatError, dump, dumps, load, loads
from adcop.model import Dcop
from adcop.transforms import aggregate_symmetric


def same_instance(a, b) -> bool:
    if a.domain_sizes != b.domain_sizes or a.owners != b.owners or len(a.constraints) != len(b.constraints):
        return False
    for c, d in zip(a.constraints, b.constraints):
        if c.scope != d.scope:
            return False
        left = [c.table] if isinstance(a, Dcop) else c.sides
        right = [d.table] if isinstance(b, Dcop) else d.sides
        if not all(np.array_equal(x, y) for x, y in zip(left, right)):
            return False
    return True


def test_round_trip_adcop(tmp_path):
    inst = from_preset("setup1", seed=7)
    path = tmp_path / "a.adcop"
    dump(inst, path)
    back = load(path)
    assert same_instance(inst, back)
    assert back.cost_alphabet == inst.cost_alphabet
    assert dumps(back) == path.read_text()


def test_round_trip_dcop():
    dcop = aggregate_symmetric(from_preset("setup2", seed=3))
    assert same_instance(dcop, loads(dumps(dcop)))


def test_figure1_text(figure1):
    text = dumps(figure1)
    assert text.splitlines()[0] == "adcop 2 2"
    assert "con 1 2" in text
    assert loads(text).evaluate((1, 0)) == 9


@pytest.mark.parametrize(
    "text",
    [
        "",
        "nonsense 2 2\n",
        "adcop 2 2\nvar 1 1 2\n",
        "adcop 2 2\nvar 1 1 2\nvar 2 2 2\ncon 1 3\n",
        "adcop 2 2\nvar 1 1 2\nvar 2 2 2\ncon 1 2\n0 0\n0 0\n0 0\n",
        "adcop 2 2\nvar 1 1 2\nvar 2 2 2\ncon 1 2\n0 x\n0 0\n0 0\n0 0\n",
        "adcop 2 2\nvar 1 1 2\nvar 2 2 2\nbogus\n",
    ],
)
def test_malformed(text):
    with pytest.raises(InstanceFormatError):
        loads(text)
