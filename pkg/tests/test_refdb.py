import numpy as np
import pytest

from synchrocal.errors import DuplicateId, MissingReference, ParseError
from synchrocal.refdb import (
    GenReference,
    LineReference,
    PersistenceState,
    ReferenceStore,
    expand_reference,
    load_store,
    save_store,
    store_from_dict,
)
from synchrocal.simulator import default_line


def sample_store():
    s = ReferenceStore(base_mva=100.0)
    s.add(LineReference("L1", 0.01, 0.10, 0.20, z0=0.03 + 0.3j, b0=0.12, updated_at="2024-01-02T03:04:05"))
    p = default_line()
    s.add(LineReference("L2", 0.01, 0.10, 0.20, z_abc=p.z_abc, b_abc=p.b_abc.real))
    s.add(GenReference("G1", 4.0, 0.3, 1.0, 0.05))
    s.persistence_for("L1", 5).record("w1", {"r1": True})
    return s


def test_save_load_round_trip(tmp_path):
    s = sample_store()
    path = tmp_path / "ref.json"
    save_store(s, path)
    back = load_store(path)
    assert back.lines == s.lines and back.generators == s.generators
    assert back.persistence["L1"].history == s.persistence["L1"].history
    assert back.base_mva == 100.0


def test_lookup_errors():
    s = sample_store()
    with pytest.raises(MissingReference):
        s.line("nope")
    with pytest.raises(MissingReference):
        s.generator("L1")
    with pytest.raises(DuplicateId):
        s.add(GenReference("L1", 1, 1, 1, 1))


def test_expand_reference_matches_default_line():
    ref = LineReference("x", 0.01, 0.10, 0.20, z0=0.03 + 0.3j, b0=0.12)
    got, want = expand_reference(ref), default_line()
    assert np.allclose(got.z_abc, want.z_abc, rtol=1e-14) and np.allclose(got.b_abc, want.b_abc, rtol=1e-14)
    # zero-sequence defaults
    p = expand_reference(LineReference("y", 0.01, 0.10, 0.20))
    assert np.allclose(np.diag(p.b_abc), 0.20) and np.allclose(p.b_abc - np.diag(np.diag(p.b_abc)), 0)


def test_empty_file_gives_empty_store(tmp_path):
    p = tmp_path / "empty.json"
    p.write_text("  \n")
    s = load_store(p)
    assert s.lines == {} and s.generators == {}


@pytest.mark.parametrize(
    "doc, where",
    [
        ({"lines": [{"id": "a", "r_ems": -1, "x_ems": 0.1, "b_ems": 0.2}]}, "lines[0].r_ems"),
        ({"lines": [{"id": "a", "r_ems": 0.1, "b_ems": 0.2}]}, "lines[0].x_ems"),
        ({"lines": [{"id": "a", "r_ems": 0.1, "x_ems": "big", "b_ems": 0.2}]}, "lines[0].x_ems"),
        ({"lines": [{"id": "a", "r_ems": 0.1, "x_ems": 0.1, "b_ems": 0.2, "z0_re": 1}]}, "z0_re/z0_im"),
        ({"generators": [{"id": "g", "h": 0, "t": 1, "kd": 1, "kr": 1}]}, "generators[0].h"),
        ({"generators": [{"id": "g", "h": 1, "t": 1, "kd": 1, "kr": 1, "source": "X"}]}, "source"),
        ({"generators": [{"id": "g", "h": 1, "t": 1, "kd": 1, "kr": 1, "updated_at": "yesterday"}]}, "updated_at"),
        ([], "top level"),
    ],
)
def test_parse_errors_name_the_field(doc, where):
    with pytest.raises(ParseError, match=where.replace("[", r"\[").replace("]", r"\]")):
        store_from_dict(doc)


def test_bad_json_reports_position(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{"lines": [\n  {"id": }\n]}')
    with pytest.raises(ParseError, match="line 2"):
        load_store(p)


def test_persistence_ring_buffer():
    st = PersistenceState(3)
    for i, f in enumerate([True, True, False, True, False]):
        st.record(f"w{i}", {"r1": f})
    assert len(st.history) == 3
    assert st.count("r1") == 1
    assert st.count("x1") == 0


def test_persistence_capacity_change_keeps_recent():
    s = ReferenceStore()
    st = s.persistence_for("a", 5)
    for i in range(5):
        st.record(str(i), {"r1": True})
    assert [h["window"] for h in s.persistence_for("a", 2).history] == ["3", "4"]
