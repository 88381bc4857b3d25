import pytest

from kazext.errors import GroupError
from kazext.groups import dumps_table, loads_table, make_group_algebra, read_table, write_table

from conftest import s3


def test_roundtrip(tmp_path):
    G = s3()
    path = tmp_path / "s3.txt"
    write_table(G, path)
    H = read_table(path)
    assert H.order == 6 and H.label == "s3"
    assert (H.table == G.table).all()
    A, _ = make_group_algebra(3)
    assert (loads_table(dumps_table(A)).table == A.table).all()


def test_format():
    text = dumps_table(s3())
    lines = text.splitlines()
    assert lines[0] == "order 6" and len(lines) == 7
    assert lines[1] == "0 1 2 3 4 5"


@pytest.mark.parametrize("text", [
    "",
    "ordr 2\n0 1\n1 0\n",
    "order 2\n0 1\n",
    "order 2\n0 1\n1\n",
    "order 2\n0 1\n1 2\n",
    "order 2\n0 x\n1 0\n",
    "order 2\n0 1\n0 1\n",
    "order 2\n1 0\n0 1\n",
])
def test_malformed(text):
    with pytest.raises(GroupError):
        loads_table(text)
