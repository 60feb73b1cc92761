import pytest

from builders import simple_element, wide_element
from gkfuse.algebra import AlgebraError
from gkfuse.fusion import FusionRefused
from gkfuse.product import default_phi_data, product_khom_ktheory
from gkfuse.sequences import validate_l1


@pytest.fixture(scope="module")
def product():
    s = simple_element(label="s")
    t = simple_element(label="t")
    x, trace = product_khom_ktheory(t, s)
    return s, t, x, trace


def test_product_runs_every_line(product):
    _, _, x, trace = product
    assert [k for k in trace.lines] == ["1", "2", "3", "4", "5", "5F", "6", "7", "8"]
    assert set(trace.certificates) == set(trace.lines) - {"1"}
    assert trace.ok and validate_l1(x).ok
    assert trace.lines["8"] is x


def test_product_types(product):
    s, t, x, _ = product
    # t . s goes from the source of s to the target of t
    assert x.A.same_as(s.A) and x.B.same_as(t.B)


def test_product_trace_json(product):
    _, _, _, trace = product
    js = trace.to_json()
    assert js["ok"] and js["stabilization_index"] >= 1
    assert set(js["lines"]) == set(trace.lines)
    assert all(c["ok"] for c in js["closed_form"])


def test_default_phi_data_is_identity_on_one_dimensional_base():
    s = simple_element()
    (m,) = default_phi_data(s)
    assert m == [[1, 0], [0, 1]]


def test_bad_phi_data_is_refused():
    s = simple_element(label="s")
    t = simple_element(label="t")
    with pytest.raises(FusionRefused, match="hypothesis on phi"):
        product_khom_ktheory(t, s, phi_data=[[[0, 0], [0, 0]]])


def test_mismatched_factors_raise():
    with pytest.raises(AlgebraError):
        product_khom_ktheory(wide_element(), simple_element())


def test_degenerate_t_gives_degenerate_product():
    s = simple_element(label="s")
    t = simple_element(((0,), (1,)), label="t0")
    x, trace = product_khom_ktheory(t, s)
    assert trace.ok
    assert x.s_plus.matrix == x.s_minus.matrix
