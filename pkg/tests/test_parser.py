import pytest

import tml2
from tml2.parser import ParseError

from conftest import parse_sample, read_sample


def codes(err: ParseError) -> list[str]:
    return [d.code for d in err.diagnostics]


def test_minimal_thing():
    m = tml2.parse("thing T {}")
    assert len(m.things) == 1
    t = m.things[0]
    assert t.name == "T"
    assert t.properties == () and t.messages == () and t.ports == ()
    assert t.statechart is None and t.analytics == ()


def test_smart_pingpong_shape():
    m = parse_sample("smart_pingpong")
    assert [t.name for t in m.things] == ["Client", "Server", "DataAnalytics"]
    server = m.thing("Server")
    assert server.statechart is not None
    assert len(server.statechart.states) == 3


def test_unclosed_thing_single_error_at_eof():
    with pytest.raises(ParseError) as exc:
        tml2.parse("thing T {", "x.tml2")
    diags = exc.value.diagnostics
    assert len(diags) == 1
    d = diags[0]
    assert d.code == "P001"
    assert (d.line, d.col) == (1, 10)  # one past the last character


def test_unterminated_string():
    src = 'thing T {\n    data_analytics d {\n        dataset: "oops\n    }\n}\n'
    with pytest.raises(ParseError) as exc:
        tml2.parse(src)
    assert "P002" in codes(exc.value)


def test_int_literal_range():
    ok = tml2.parse("thing T { property x: Int = 9223372036854775807 }")
    assert ok.things[0].properties[0].initial.value == 2**63 - 1
    with pytest.raises(ParseError) as exc:
        tml2.parse("thing T { property x: Int = 9223372036854775808 }")
    assert codes(exc.value) == ["P003"]


def test_unknown_statement_keyword():
    src = """
thing T {
    statechart init S {
        state S {
            entry {
                state x;
            }
        }
    }
}
"""
    with pytest.raises(ParseError) as exc:
        tml2.parse(src)
    assert "P004" in codes(exc.value)


def test_recovery_reports_multiple_errors():
    src = "thing A { property }\nthing B { message }\nthing C {}\n"
    with pytest.raises(ParseError) as exc:
        tml2.parse(src)
    diags = exc.value.diagnostics
    assert len(diags) == 2
    assert {d.line for d in diags} == {1, 2}


def test_keywords_are_reserved():
    with pytest.raises(ParseError):
        tml2.parse("thing thing {}")
    with pytest.raises(ParseError):
        tml2.parse("thing T { property label: Int }")


def test_error_positions_inside_source_bounds():
    bad_sources = [
        "thing T {",
        "thing A { property }\nthing B { message }\n",
        'thing T {\n    data_analytics d {\n        dataset: "oops\n    }\n}\n',
        "??",
        "thing T { property x: Int = 99999999999999999999 }",
    ]
    for src in bad_sources:
        with pytest.raises(ParseError) as exc:
            tml2.parse(src)
        lines = src.split("\n")
        for d in exc.value.diagnostics:
            assert 1 <= d.line <= len(lines)
            assert 1 <= d.col <= len(lines[d.line - 1]) + 1


def test_comments_and_message_params():
    src = """
// leading comment
thing T { // trailing comment
    message m(a: Int, b: Real)
}
"""
    m = tml2.parse(src)
    msg = m.things[0].messages[0]
    assert [(p.name, p.type) for p in msg.params] == [
        ("a", tml2.ValueType.INT),
        ("b", tml2.ValueType.REAL),
    ]


def test_real_literal_requires_decimal_point():
    m = tml2.parse("thing T { property x: Int = 1 property y: Real = 1.0 }")
    x, y = m.things[0].properties
    assert x.initial.type is tml2.ValueType.INT
    assert y.initial.type is tml2.ValueType.REAL


def test_algorithm_defaults_filled_in():
    src = """
thing T {
    property a: Int
    property b: Int
    property c: Int
    data_analytics d {
        features: a
        label: b
        dataset: "x.csv"
        algorithm: LogisticRegression
        prediction: c
    }
}
"""
    m = tml2.parse(src)
    spec = m.things[0].analytics[0].algorithm
    assert spec.kind == "LogisticRegression"
    assert spec.params == (("lr", 0.1), ("epochs", 500))


def test_missing_da_field_is_an_error():
    src = """
thing T {
    property a: Int
    data_analytics d {
        features: a
        label: a
        dataset: "x.csv"
        algorithm: KNN
    }
}
"""
    with pytest.raises(ParseError) as exc:
        tml2.parse(src)
    assert any("prediction" in d.message for d in exc.value.diagnostics)


def test_declaration_order_preserved():
    m = parse_sample("smart_pingpong")
    server = m.thing("Server")
    assert [s.name for s in server.statechart.states] == [
        "Active",
        "Suspicious",
        "Blocked",
    ]
    assert [p.name for p in server.properties] == ["last_ping", "gap"]
    config = m.configurations[0]
    assert [i.name for i in config.instances] == ["client", "server", "monitor"]


def test_parse_is_reproducible():
    src = read_sample("smart_pingpong")
    assert tml2.equals_structural(tml2.parse(src), tml2.parse(src))


def test_structural_equality_ignores_positions_not_names():
    a = tml2.parse("thing A {}")
    b = tml2.parse("\n\n   thing A {}", "other.tml2")
    c = tml2.parse("thing B {}")
    assert tml2.equals_structural(a, b)
    assert not tml2.equals_structural(a, c)
