"""Recursive-descent parser for `.tml2` sources.

Errors never stop the pass: the parser records a diagnostic and
resynchronizes at the next top-level `thing`/`configuration` keyword, so
one run reports every top-level declaration that fails. parse() raises
ParseError (carrying all diagnostics) iff at least one error occurred.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

from .diagnostics import Diagnostic, error
from .model import (
    HYPERPARAM_DEFAULTS,
    AlgorithmKind,
    AlgorithmSpec,
    Assign,
    Binary,
    Block,
    Configuration,
    Connector,
    DaPredict,
    DaPreprocess,
    DaSave,
    DaTrain,
    DataAnalyticsBlock,
    Expr,
    IfStmt,
    Instance,
    Literal,
    Message,
    Model,
    NameRef,
    NowCall,
    Param,
    Port,
    PortDirection,
    Pos,
    PrintStmt,
    Property,
    SendStmt,
    State,
    StateChart,
    Stmt,
    Thing,
    Transition,
    Trigger,
    Unary,
    ValueType,
    VarDecl,
    WhileStmt,
)

INT64_MAX = 2**63 - 1

KEYWORDS = frozenset(
    {
        "thing", "configuration", "property", "message", "provided", "required",
        "port", "sends", "receives", "statechart", "init", "state", "entry",
        "exit", "transition", "event", "guard", "internal", "action",
        "data_analytics", "features", "label", "dataset", "algorithm",
        "prediction", "instance", "connector", "var", "if", "else", "while",
        "print", "da_preprocess", "da_train", "da_predict", "da_save",
        "and", "or", "not", "true", "false", "Int", "Real", "Bool", "String",
        "Now",
    }
)

_STMT_KEYWORDS = frozenset(
    {"var", "if", "while", "print", "da_preprocess", "da_train", "da_predict", "da_save"}
)

_TYPE_NAMES = {
    "Int": ValueType.INT,
    "Real": ValueType.REAL,
    "Bool": ValueType.BOOL,
    "String": ValueType.STRING,
}

_ESCAPES = {"\\": "\\", '"': '"', "n": "\n", "t": "\t", "r": "\r"}

# longest first so "==" wins over "="
_OPERATORS = (
    "==", "!=", "<=", ">=", "->", "=>",
    "{", "}", "(", ")", ":", "=", ",", ";", ".", "!", "?",
    "<", ">", "+", "-", "*", "/", "%",
)


class ParseError(Exception):
    """Carries every diagnostic collected during a failed parse."""

    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = diagnostics
        super().__init__("\n".join(d.render() for d in diagnostics))


@dataclass(frozen=True)
class Token:
    kind: str  # "ident" | "int" | "real" | "string" | "eof" | operator/keyword text
    text: str
    value: Union[int, float, str, None]
    line: int
    col: int

    @property
    def pos(self) -> Pos:
        return Pos(self.line, self.col)


class _Lexer:
    def __init__(self, source: str, file: str, diags: list[Diagnostic]):
        self.src = source
        self.file = file
        self.diags = diags
        self.i = 0
        self.line = 1
        self.col = 1

    def _advance(self, n: int = 1) -> None:
        for _ in range(n):
            if self.i < len(self.src):
                if self.src[self.i] == "\n":
                    self.line += 1
                    self.col = 1
                else:
                    self.col += 1
                self.i += 1

    def _error(self, code: str, message: str, line: int, col: int) -> None:
        self.diags.append(error(code, message, self.file, line, col))

    def tokens(self) -> list[Token]:
        out: list[Token] = []
        src = self.src
        while self.i < len(src):
            c = src[self.i]
            if c in " \t\r\n":
                self._advance()
                continue
            if c == "/" and src.startswith("//", self.i):
                while self.i < len(src) and src[self.i] != "\n":
                    self._advance()
                continue
            line, col = self.line, self.col
            if c.isdigit():
                out.append(self._number(line, col))
                continue
            if c.isalpha() or c == "_":
                start = self.i
                while self.i < len(src) and (src[self.i].isalnum() or src[self.i] == "_"):
                    self._advance()
                text = src[start : self.i]
                kind = text if text in KEYWORDS else "ident"
                out.append(Token(kind, text, None, line, col))
                continue
            if c == '"':
                out.append(self._string(line, col))
                continue
            for op in _OPERATORS:
                if src.startswith(op, self.i):
                    self._advance(len(op))
                    out.append(Token(op, op, None, line, col))
                    break
            else:
                self._error("P001", f"unexpected character {c!r}", line, col)
                self._advance()
        out.append(Token("eof", "", None, self.line, self.col))
        return out

    def _number(self, line: int, col: int) -> Token:
        src = self.src
        start = self.i
        while self.i < len(src) and src[self.i].isdigit():
            self._advance()
        is_real = False
        if (
            self.i + 1 < len(src)
            and src[self.i] == "."
            and src[self.i + 1].isdigit()
        ):
            is_real = True
            self._advance()
            while self.i < len(src) and src[self.i].isdigit():
                self._advance()
            # optional exponent, only after a fractional part
            j = self.i
            if j < len(src) and src[j] in "eE":
                k = j + 1
                if k < len(src) and src[k] in "+-":
                    k += 1
                if k < len(src) and src[k].isdigit():
                    self._advance(k - j)
                    while self.i < len(src) and src[self.i].isdigit():
                        self._advance()
        text = src[start : self.i]
        if is_real:
            val = float(text)
            if math.isinf(val):
                self._error("P003", f"real literal {text} out of range", line, col)
                val = 0.0
            return Token("real", text, val, line, col)
        ival = int(text)
        if ival > INT64_MAX:
            self._error(
                "P003", f"integer literal {text} out of 64-bit signed range", line, col
            )
            ival = 0
        return Token("int", text, ival, line, col)

    def _string(self, line: int, col: int) -> Token:
        src = self.src
        self._advance()  # opening quote
        parts: list[str] = []
        while self.i < len(src):
            c = src[self.i]
            if c == '"':
                self._advance()
                return Token("string", "".join(parts), "".join(parts), line, col)
            if c == "\n":
                break
            if c == "\\":
                esc_line, esc_col = self.line, self.col
                self._advance()
                if self.i < len(src) and src[self.i] in _ESCAPES:
                    parts.append(_ESCAPES[src[self.i]])
                    self._advance()
                else:
                    bad = src[self.i] if self.i < len(src) else "<eof>"
                    self._error("P001", f"invalid escape sequence '\\{bad}'", esc_line, esc_col)
                    self._advance()
                continue
            parts.append(c)
            self._advance()
        self._error("P002", "unterminated string literal", line, col)
        return Token("string", "".join(parts), "".join(parts), line, col)


class _SyntaxError(Exception):
    def __init__(self, diag: Diagnostic):
        self.diag = diag


class _Parser:
    def __init__(self, source: str, source_name: str):
        self.file = source_name
        self.diags: list[Diagnostic] = []
        self.toks = _Lexer(source, source_name, self.diags).tokens()
        self.pos = 0

    # --- token plumbing ---------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.toks[self.pos]

    def at(self, kind: str) -> bool:
        return self.tok.kind == kind

    def advance(self) -> Token:
        t = self.tok
        if t.kind != "eof":
            self.pos += 1
        return t

    def accept(self, kind: str) -> Optional[Token]:
        if self.at(kind):
            return self.advance()
        return None

    def fail(self, message: str, tok: Optional[Token] = None, code: str = "P001") -> _SyntaxError:
        t = tok or self.tok
        return _SyntaxError(error(code, message, self.file, t.line, t.col))

    def expect(self, kind: str, what: Optional[str] = None) -> Token:
        if self.at(kind):
            return self.advance()
        want = what or f"'{kind}'"
        raise self.fail(f"expected {want}, got {self._describe(self.tok)}")

    def ident(self, what: str = "identifier") -> Token:
        if self.at("ident"):
            return self.advance()
        if self.tok.text in KEYWORDS:
            raise self.fail(f"expected {what}, got reserved keyword '{self.tok.text}'")
        raise self.fail(f"expected {what}, got {self._describe(self.tok)}")

    @staticmethod
    def _describe(t: Token) -> str:
        if t.kind == "eof":
            return "end of input"
        if t.kind == "string":
            return "string literal"
        if t.kind in ("int", "real"):
            return f"'{t.text}'"
        return f"'{t.text}'"

    def _sync_top_level(self) -> None:
        while self.tok.kind not in ("thing", "configuration", "eof"):
            self.advance()

    # --- grammar ----------------------------------------------------------

    def parse_model(self) -> Model:
        things: list[Thing] = []
        configs: list[Configuration] = []
        while not self.at("eof"):
            start = self.pos
            try:
                if self.at("thing"):
                    things.append(self.parse_thing())
                elif self.at("configuration"):
                    configs.append(self.parse_configuration())
                else:
                    raise self.fail(
                        f"expected 'thing' or 'configuration', got {self._describe(self.tok)}"
                    )
            except _SyntaxError as e:
                self.diags.append(e.diag)
                if self.pos == start:
                    self.advance()
                self._sync_top_level()
        return Model(tuple(things), tuple(configs), source_name=self.file)

    def parse_thing(self) -> Thing:
        kw = self.expect("thing")
        name = self.ident("thing name")
        self.expect("{")
        properties: list[Property] = []
        messages: list[Message] = []
        ports: list[Port] = []
        statechart: Optional[StateChart] = None
        analytics: list[DataAnalyticsBlock] = []
        while not self.at("}"):
            if self.at("property"):
                properties.append(self.parse_property())
            elif self.at("message"):
                messages.append(self.parse_message())
            elif self.at("provided") or self.at("required"):
                ports.append(self.parse_port())
            elif self.at("statechart"):
                if statechart is not None:
                    raise self.fail("a thing may declare at most one statechart")
                statechart = self.parse_statechart()
            elif self.at("data_analytics"):
                analytics.append(self.parse_analytics())
            else:
                raise self.fail(
                    f"expected a thing member or '}}', got {self._describe(self.tok)}"
                )
        self.expect("}")
        return Thing(
            name=name.text,
            properties=tuple(properties),
            messages=tuple(messages),
            ports=tuple(ports),
            statechart=statechart,
            analytics=tuple(analytics),
            pos=kw.pos,
        )

    def parse_property(self) -> Property:
        kw = self.expect("property")
        name = self.ident("property name")
        self.expect(":")
        vtype = self.parse_type()
        initial = self.parse_expr() if self.accept("=") else None
        return Property(name.text, vtype, initial, pos=kw.pos)

    def parse_type(self) -> ValueType:
        for text, vt in _TYPE_NAMES.items():
            if self.at(text):
                self.advance()
                return vt
        raise self.fail(f"expected a type (Int, Real, Bool, String), got {self._describe(self.tok)}")

    def parse_message(self) -> Message:
        kw = self.expect("message")
        name = self.ident("message name")
        self.expect("(")
        params: list[Param] = []
        if not self.at(")"):
            while True:
                pname = self.ident("parameter name")
                self.expect(":")
                ptype = self.parse_type()
                params.append(Param(pname.text, ptype, pos=pname.pos))
                if not self.accept(","):
                    break
        self.expect(")")
        return Message(name.text, tuple(params), pos=kw.pos)

    def parse_port(self) -> Port:
        kw = self.advance()  # provided | required
        direction = (
            PortDirection.PROVIDED if kw.kind == "provided" else PortDirection.REQUIRED
        )
        self.expect("port")
        name = self.ident("port name")
        self.expect("{")
        sends: tuple[str, ...] = ()
        receives: tuple[str, ...] = ()
        if self.accept("sends"):
            sends = self.parse_identlist()
        if self.accept("receives"):
            receives = self.parse_identlist()
        self.expect("}")
        return Port(name.text, direction, sends, receives, pos=kw.pos)

    def parse_identlist(self) -> tuple[str, ...]:
        names = [self.ident().text]
        while self.accept(","):
            names.append(self.ident().text)
        return tuple(names)

    def parse_statechart(self) -> StateChart:
        kw = self.expect("statechart")
        self.expect("init")
        initial = self.ident("initial state name")
        self.expect("{")
        states: list[State] = []
        while self.at("state"):
            states.append(self.parse_state())
        self.expect("}")
        return StateChart(initial.text, tuple(states), pos=kw.pos)

    def parse_state(self) -> State:
        kw = self.expect("state")
        name = self.ident("state name")
        self.expect("{")
        entry = self.parse_block() if self.accept("entry") else None
        exit_ = self.parse_block() if self.accept("exit") else None
        transitions: list[Transition] = []
        while self.at("transition"):
            transitions.append(self.parse_transition())
        self.expect("}")
        return State(name.text, entry, exit_, tuple(transitions), pos=kw.pos)

    def parse_transition(self) -> Transition:
        kw = self.expect("transition")
        trigger = None
        if self.accept("event"):
            port = self.ident("port name")
            self.expect("?")
            msg = self.ident("message name")
            trigger = Trigger(port.text, msg.text, pos=port.pos)
        guard = self.parse_expr() if self.accept("guard") else None
        if self.accept("->"):
            target: Optional[str] = self.ident("target state name").text
        elif self.accept("internal"):
            target = None
        else:
            raise self.fail(f"expected '->' or 'internal', got {self._describe(self.tok)}")
        action = self.parse_block() if self.accept("action") else None
        return Transition(trigger, guard, target, action, pos=kw.pos)

    def parse_analytics(self) -> DataAnalyticsBlock:
        kw = self.expect("data_analytics")
        name = self.ident("data-analytics block name")
        brace = self.expect("{")
        fields: dict[str, object] = {}
        field_order = ("features", "label", "dataset", "algorithm", "prediction")
        while self.tok.kind in field_order:
            key_tok = self.advance()
            key = key_tok.kind
            if key in fields:
                raise self.fail(f"duplicate field '{key}' in data_analytics block", tok=key_tok)
            self.expect(":")
            if key == "features":
                fields[key] = self.parse_identlist()
            elif key == "dataset":
                fields[key] = self.expect("string", "dataset path string").value
            elif key == "algorithm":
                fields[key] = self.parse_algorithm()
            else:
                fields[key] = self.ident().text
        close = self.expect("}", "a data_analytics field or '}'")
        missing = [k for k in field_order if k not in fields]
        if missing:
            raise self.fail(
                f"data_analytics block '{name.text}' is missing field(s): {', '.join(missing)}",
                tok=close,
            )
        return DataAnalyticsBlock(
            name=name.text,
            features=fields["features"],  # type: ignore[arg-type]
            label=fields["label"],  # type: ignore[arg-type]
            dataset=fields["dataset"],  # type: ignore[arg-type]
            algorithm=fields["algorithm"],  # type: ignore[arg-type]
            prediction=fields["prediction"],  # type: ignore[arg-type]
            pos=kw.pos,
        )

    def parse_algorithm(self) -> AlgorithmSpec:
        name = self.ident("algorithm name")
        written: list[tuple[str, object]] = []
        if self.accept("("):
            while True:
                pname = self.ident("hyperparameter name")
                self.expect("=")
                written.append((pname.text, self.parse_hyper_literal()))
                if not self.accept(","):
                    break
            self.expect(")")
        try:
            kind = AlgorithmKind(name.text)
        except ValueError:
            kind = None
        if kind is None:
            params = tuple(written)
        else:
            merged = dict(HYPERPARAM_DEFAULTS[kind])
            extras = []
            for key, value in written:
                if key in merged:
                    merged[key] = value  # type: ignore[assignment]
                else:
                    extras.append((key, value))
            params = tuple(merged.items()) + tuple(extras)
        return AlgorithmSpec(name.text, params, pos=name.pos)  # type: ignore[arg-type]

    def parse_hyper_literal(self) -> object:
        t = self.tok
        if t.kind == "int" or t.kind == "real" or t.kind == "string":
            self.advance()
            return t.value
        if t.kind == "true":
            self.advance()
            return True
        if t.kind == "false":
            self.advance()
            return False
        if t.kind == "-":
            self.advance()
            n = self.tok
            if n.kind == "int":
                self.advance()
                return -n.value  # type: ignore[operator]
            if n.kind == "real":
                self.advance()
                return -n.value  # type: ignore[operator]
            raise self.fail(f"expected a numeric literal, got {self._describe(self.tok)}")
        raise self.fail(f"expected a literal, got {self._describe(t)}")

    def parse_configuration(self) -> Configuration:
        kw = self.expect("configuration")
        name = self.ident("configuration name")
        self.expect("{")
        instances: list[Instance] = []
        connectors: list[Connector] = []
        while True:
            if self.at("instance"):
                ikw = self.advance()
                iname = self.ident("instance name")
                self.expect(":")
                tname = self.ident("thing name")
                instances.append(Instance(iname.text, tname.text, pos=ikw.pos))
            elif self.at("connector"):
                ckw = self.advance()
                fi = self.ident("instance name")
                self.expect(".")
                fp = self.ident("port name")
                self.expect("=>")
                ti = self.ident("instance name")
                self.expect(".")
                tp = self.ident("port name")
                connectors.append(Connector(fi.text, fp.text, ti.text, tp.text, pos=ckw.pos))
            else:
                break
        self.expect("}", "'instance', 'connector' or '}'")
        return Configuration(name.text, tuple(instances), tuple(connectors), pos=kw.pos)

    # --- statements ---------------------------------------------------------

    def parse_block(self) -> Block:
        self.expect("{")
        stmts: list[Stmt] = []
        while not self.at("}"):
            stmts.append(self.parse_stmt())
        self.expect("}")
        return tuple(stmts)

    def parse_stmt(self) -> Stmt:
        t = self.tok
        if t.kind == "var":
            self.advance()
            name = self.ident("variable name")
            self.expect(":")
            vtype = self.parse_type()
            self.expect("=")
            init = self.parse_expr()
            self.expect(";")
            return VarDecl(name.text, vtype, init, pos=t.pos)
        if t.kind == "if":
            self.advance()
            self.expect("(")
            cond = self.parse_expr()
            self.expect(")")
            then = self.parse_block()
            orelse = self.parse_block() if self.accept("else") else None
            return IfStmt(cond, then, orelse, pos=t.pos)
        if t.kind == "while":
            self.advance()
            self.expect("(")
            cond = self.parse_expr()
            self.expect(")")
            body = self.parse_block()
            return WhileStmt(cond, body, pos=t.pos)
        if t.kind == "print":
            self.advance()
            self.expect("(")
            expr = self.parse_expr()
            self.expect(")")
            self.expect(";")
            return PrintStmt(expr, pos=t.pos)
        if t.kind in ("da_preprocess", "da_train", "da_predict"):
            self.advance()
            self.expect("(")
            da = self.ident("data-analytics block name")
            self.expect(")")
            self.expect(";")
            cls = {"da_preprocess": DaPreprocess, "da_train": DaTrain, "da_predict": DaPredict}[t.kind]
            return cls(da.text, pos=t.pos)
        if t.kind == "da_save":
            self.advance()
            self.expect("(")
            da = self.ident("data-analytics block name")
            self.expect(",")
            path = self.expect("string", "model path string")
            self.expect(")")
            self.expect(";")
            return DaSave(da.text, str(path.value), pos=t.pos)
        if t.kind == "ident":
            name = self.advance()
            if self.accept("="):
                expr = self.parse_expr()
                self.expect(";")
                return Assign(name.text, expr, pos=name.pos)
            if self.accept("!"):
                msg = self.ident("message name")
                self.expect("(")
                args: list[Expr] = []
                if not self.at(")"):
                    while True:
                        args.append(self.parse_expr())
                        if not self.accept(","):
                            break
                self.expect(")")
                self.expect(";")
                return SendStmt(name.text, msg.text, tuple(args), pos=name.pos)
            raise self.fail(f"expected '=' or '!' after '{name.text}', got {self._describe(self.tok)}")
        if t.text in KEYWORDS:
            raise self.fail(f"unknown statement keyword '{t.text}'", tok=t, code="P004")
        raise self.fail(f"expected a statement, got {self._describe(t)}")

    # --- expressions (precedence climbing, loosest first) --------------------

    def parse_expr(self) -> Expr:
        return self.parse_or()

    def parse_or(self) -> Expr:
        left = self.parse_and()
        while self.at("or"):
            op = self.advance()
            left = Binary("or", left, self.parse_and(), pos=op.pos)
        return left

    def parse_and(self) -> Expr:
        left = self.parse_cmp()
        while self.at("and"):
            op = self.advance()
            left = Binary("and", left, self.parse_cmp(), pos=op.pos)
        return left

    def parse_cmp(self) -> Expr:
        left = self.parse_add()
        while self.tok.kind in ("<", "<=", ">", ">=", "==", "!="):
            op = self.advance()
            left = Binary(op.kind, left, self.parse_add(), pos=op.pos)
        return left

    def parse_add(self) -> Expr:
        left = self.parse_mul()
        while self.tok.kind in ("+", "-"):
            op = self.advance()
            left = Binary(op.kind, left, self.parse_mul(), pos=op.pos)
        return left

    def parse_mul(self) -> Expr:
        left = self.parse_unary()
        while self.tok.kind in ("*", "/", "%"):
            op = self.advance()
            left = Binary(op.kind, left, self.parse_unary(), pos=op.pos)
        return left

    def parse_unary(self) -> Expr:
        if self.tok.kind in ("-", "not"):
            op = self.advance()
            return Unary("-" if op.kind == "-" else "not", self.parse_unary(), pos=op.pos)
        return self.parse_primary()

    def parse_primary(self) -> Expr:
        t = self.tok
        if t.kind == "int":
            self.advance()
            return Literal(ValueType.INT, t.value, pos=t.pos)
        if t.kind == "real":
            self.advance()
            return Literal(ValueType.REAL, t.value, pos=t.pos)
        if t.kind == "string":
            self.advance()
            return Literal(ValueType.STRING, t.value, pos=t.pos)
        if t.kind == "true":
            self.advance()
            return Literal(ValueType.BOOL, True, pos=t.pos)
        if t.kind == "false":
            self.advance()
            return Literal(ValueType.BOOL, False, pos=t.pos)
        if t.kind == "Now":
            self.advance()
            self.expect("(")
            self.expect(")")
            return NowCall(pos=t.pos)
        if t.kind == "ident":
            self.advance()
            return NameRef(t.text, pos=t.pos)
        if t.kind == "(":
            self.advance()
            inner = self.parse_expr()
            self.expect(")")
            return inner
        raise self.fail(f"expected an expression, got {self._describe(t)}")


def parse(source: str, source_name: str = "<input>") -> Model:
    """Parse DSL text into a Model; raises ParseError listing every error."""
    p = _Parser(source, source_name)
    model = p.parse_model()
    errors = [d for d in p.diags if d.severity.value == "error"]
    if errors:
        raise ParseError(p.diags)
    return model
