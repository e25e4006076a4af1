"""Canonical formatter: Model AST back to source text.

The output is a fixed point (formatting formatted text changes nothing)
and always re-parses to a structurally equal model. Indentation is four
spaces, one declaration per line, literals in canonical spelling.
"""

from __future__ import annotations

from .model import (
    AlgorithmSpec,
    Assign,
    Binary,
    Block,
    Configuration,
    DaPredict,
    DaPreprocess,
    DaSave,
    DaTrain,
    DataAnalyticsBlock,
    Expr,
    IfStmt,
    Literal,
    Message,
    Model,
    NameRef,
    NowCall,
    Port,
    PrintStmt,
    Property,
    SendStmt,
    State,
    StateChart,
    Stmt,
    Thing,
    Transition,
    Unary,
    ValueType,
    VarDecl,
    WhileStmt,
)

_INDENT = "    "

# binding strength, loosest to tightest; used to insert minimal parens
_LEVEL = {
    "or": 1,
    "and": 2,
    "<": 3, "<=": 3, ">": 3, ">=": 3, "==": 3, "!=": 3,
    "+": 4, "-": 4,
    "*": 5, "/": 5, "%": 5,
}
_UNARY_LEVEL = 6
_ATOM_LEVEL = 7

_STRING_ESCAPES = {"\\": "\\\\", '"': '\\"', "\n": "\\n", "\t": "\\t", "\r": "\\r"}


def format_real(value: float) -> str:
    """Shortest round-trip decimal that the lexer accepts (needs a '.')."""
    s = repr(value)
    if "e" in s or "E" in s:
        mantissa, _, exp = s.partition("e")
        if "." not in mantissa:
            mantissa += ".0"
        return f"{mantissa}e{exp}"
    if "." not in s:
        s += ".0"
    return s


def format_string(value: str) -> str:
    return '"' + "".join(_STRING_ESCAPES.get(c, c) for c in value) + '"'


def format_literal(value: object) -> str:
    """Canonical spelling for a literal by its Python type."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return format_real(value)
    if isinstance(value, str):
        return format_string(value)
    raise TypeError(f"not a literal value: {value!r}")


def format_expr(e: Expr) -> str:
    return _expr(e)[0]


def _expr(e: Expr) -> tuple[str, int]:
    if isinstance(e, Literal):
        if e.type is ValueType.BOOL:
            return ("true" if e.value else "false", _ATOM_LEVEL)
        if e.type is ValueType.INT:
            return (str(e.value), _ATOM_LEVEL)
        if e.type is ValueType.REAL:
            return (format_real(float(e.value)), _ATOM_LEVEL)
        return (format_string(str(e.value)), _ATOM_LEVEL)
    if isinstance(e, NameRef):
        return (e.name, _ATOM_LEVEL)
    if isinstance(e, NowCall):
        return ("Now()", _ATOM_LEVEL)
    if isinstance(e, Unary):
        text, level = _expr(e.operand)
        if level < _UNARY_LEVEL:
            text = f"({text})"
        prefix = "not " if e.op == "not" else "-"
        return (prefix + text, _UNARY_LEVEL)
    if isinstance(e, Binary):
        my = _LEVEL[e.op]
        left, llevel = _expr(e.left)
        right, rlevel = _expr(e.right)
        if llevel < my:
            left = f"({left})"
        if rlevel <= my:  # left-associative: parenthesize equal-level right child
            right = f"({right})"
        return (f"{left} {e.op} {right}", my)
    raise TypeError(f"unknown expression node: {e!r}")


class _Writer:
    def __init__(self) -> None:
        self.lines: list[str] = []

    def line(self, depth: int, text: str) -> None:
        self.lines.append(_INDENT * depth + text)

    def text(self) -> str:
        return "\n".join(self.lines) + "\n" if self.lines else ""


def pretty_print(m: Model) -> str:
    w = _Writer()
    for thing in m.things:
        _print_thing(w, thing)
    for config in m.configurations:
        _print_configuration(w, config)
    return w.text()


def _print_thing(w: _Writer, t: Thing) -> None:
    w.line(0, f"thing {t.name} {{")
    for prop in t.properties:
        _print_property(w, prop)
    for msg in t.messages:
        _print_message(w, msg)
    for port in t.ports:
        _print_port(w, port)
    if t.statechart is not None:
        _print_statechart(w, t.statechart)
    for da in t.analytics:
        _print_analytics(w, da)
    w.line(0, "}")


def _print_property(w: _Writer, p: Property) -> None:
    init = f" = {format_expr(p.initial)}" if p.initial is not None else ""
    w.line(1, f"property {p.name}: {p.type}{init}")


def _print_message(w: _Writer, m: Message) -> None:
    params = ", ".join(f"{p.name}: {p.type}" for p in m.params)
    w.line(1, f"message {m.name}({params})")


def _print_port(w: _Writer, p: Port) -> None:
    w.line(1, f"{p.direction} port {p.name} {{")
    if p.sends:
        w.line(2, "sends " + ", ".join(p.sends))
    if p.receives:
        w.line(2, "receives " + ", ".join(p.receives))
    w.line(1, "}")


def _print_statechart(w: _Writer, sc: StateChart) -> None:
    w.line(1, f"statechart init {sc.initial} {{")
    for state in sc.states:
        _print_state(w, state)
    w.line(1, "}")


def _print_state(w: _Writer, s: State) -> None:
    w.line(2, f"state {s.name} {{")
    if s.entry is not None:
        w.line(3, "entry {")
        _print_block(w, s.entry, 4)
        w.line(3, "}")
    if s.exit is not None:
        w.line(3, "exit {")
        _print_block(w, s.exit, 4)
        w.line(3, "}")
    for tr in s.transitions:
        _print_transition(w, tr)
    w.line(2, "}")


def _print_transition(w: _Writer, tr: Transition) -> None:
    parts = ["transition"]
    if tr.trigger is not None:
        parts.append(f"event {tr.trigger.port}?{tr.trigger.message}")
    if tr.guard is not None:
        parts.append(f"guard {format_expr(tr.guard)}")
    parts.append("internal" if tr.target is None else f"-> {tr.target}")
    head = " ".join(parts)
    if tr.action is None:
        w.line(3, head)
    else:
        w.line(3, head + " action {")
        _print_block(w, tr.action, 4)
        w.line(3, "}")


def _print_analytics(w: _Writer, da: DataAnalyticsBlock) -> None:
    w.line(1, f"data_analytics {da.name} {{")
    w.line(2, "features: " + ", ".join(da.features))
    w.line(2, f"label: {da.label}")
    w.line(2, f"dataset: {format_string(da.dataset)}")
    w.line(2, f"algorithm: {_format_algorithm(da.algorithm)}")
    w.line(2, f"prediction: {da.prediction}")
    w.line(1, "}")


def _format_algorithm(spec: AlgorithmSpec) -> str:
    if not spec.params:
        return spec.kind
    params = ", ".join(f"{name}={format_literal(value)}" for name, value in spec.params)
    return f"{spec.kind}({params})"


def _print_configuration(w: _Writer, c: Configuration) -> None:
    w.line(0, f"configuration {c.name} {{")
    for inst in c.instances:
        w.line(1, f"instance {inst.name}: {inst.thing}")
    for conn in c.connectors:
        w.line(
            1,
            f"connector {conn.from_instance}.{conn.from_port} "
            f"=> {conn.to_instance}.{conn.to_port}",
        )
    w.line(0, "}")


def _print_block(w: _Writer, block: Block, depth: int) -> None:
    for stmt in block:
        _print_stmt(w, stmt, depth)


def _print_stmt(w: _Writer, s: Stmt, depth: int) -> None:
    if isinstance(s, VarDecl):
        w.line(depth, f"var {s.name}: {s.type} = {format_expr(s.init)};")
    elif isinstance(s, Assign):
        w.line(depth, f"{s.target} = {format_expr(s.expr)};")
    elif isinstance(s, SendStmt):
        args = ", ".join(format_expr(a) for a in s.args)
        w.line(depth, f"{s.port}!{s.message}({args});")
    elif isinstance(s, IfStmt):
        w.line(depth, f"if ({format_expr(s.cond)}) {{")
        _print_block(w, s.then, depth + 1)
        if s.orelse is None:
            w.line(depth, "}")
        else:
            w.line(depth, "} else {")
            _print_block(w, s.orelse, depth + 1)
            w.line(depth, "}")
    elif isinstance(s, WhileStmt):
        w.line(depth, f"while ({format_expr(s.cond)}) {{")
        _print_block(w, s.body, depth + 1)
        w.line(depth, "}")
    elif isinstance(s, PrintStmt):
        w.line(depth, f"print({format_expr(s.expr)});")
    elif isinstance(s, DaPreprocess):
        w.line(depth, f"da_preprocess({s.da});")
    elif isinstance(s, DaTrain):
        w.line(depth, f"da_train({s.da});")
    elif isinstance(s, DaPredict):
        w.line(depth, f"da_predict({s.da});")
    elif isinstance(s, DaSave):
        w.line(depth, f"da_save({s.da}, {format_string(s.path)});")
    else:
        raise TypeError(f"unknown statement node: {s!r}")
