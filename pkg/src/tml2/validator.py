"""Static checks for parsed models.

Simulation and code generation require a report with ok == True; the
rule set (V001-V014, warnings V101-V103) is exactly what makes those
phases total: any model that validates clean cannot hit a name or type
failure at runtime.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .diagnostics import Diagnostic, Severity, error, warning
from .model import (
    AlgorithmKind,
    AlgorithmSpec,
    Assign,
    Binary,
    Block,
    Configuration,
    DaPredict,
    DaPreprocess,
    DaSave,
    DaTrain,
    Expr,
    IfStmt,
    Literal,
    Message,
    Model,
    NameRef,
    NowCall,
    Port,
    PortDirection,
    Pos,
    PrintStmt,
    SendStmt,
    Stmt,
    Thing,
    Unary,
    ValueType,
    VarDecl,
    WhileStmt,
)

_NUMERIC = (ValueType.INT, ValueType.REAL)
_ARITH_OPS = ("+", "-", "*", "/", "%")
_CMP_OPS = ("<", "<=", ">", ">=")
_EQ_OPS = ("==", "!=")
_BOOL_OPS = ("and", "or")


@dataclass(frozen=True)
class ValidationReport:
    diagnostics: tuple[Diagnostic, ...]
    ok: bool

    @property
    def errors(self) -> tuple[Diagnostic, ...]:
        return tuple(d for d in self.diagnostics if d.severity is Severity.ERROR)

    @property
    def warnings(self) -> tuple[Diagnostic, ...]:
        return tuple(d for d in self.diagnostics if d.severity is Severity.WARNING)

    def render(self) -> str:
        return "\n".join(d.render() for d in self.diagnostics)


def validate(m: Model) -> ValidationReport:
    v = _Validator(m)
    v.run()
    diags = sorted(v.diags, key=lambda d: d.sort_key)
    ok = not any(d.severity is Severity.ERROR for d in diags)
    return ValidationReport(tuple(diags), ok)


def widens_to(src: ValueType, dst: ValueType) -> bool:
    """Assignment compatibility: exact match, or Int widening to Real."""
    return src is dst or (src is ValueType.INT and dst is ValueType.REAL)


class _Scope:
    """Name→type environment: local frames over trigger params over properties."""

    def __init__(self, props: dict[str, ValueType], params: dict[str, ValueType]):
        self.props = props
        self.params = params
        self.frames: list[dict[str, ValueType]] = []

    def lookup(self, name: str) -> Optional[ValueType]:
        for frame in reversed(self.frames):
            if name in frame:
                return frame[name]
        if name in self.params:
            return self.params[name]
        return self.props.get(name)


class _Validator:
    def __init__(self, m: Model):
        self.model = m
        self.file = m.source_name
        self.diags: list[Diagnostic] = []

    def _error(self, code: str, message: str, pos: Pos) -> None:
        self.diags.append(error(code, message, self.file, pos.line, pos.col))

    def _warn(self, code: str, message: str, pos: Pos) -> None:
        self.diags.append(warning(code, message, self.file, pos.line, pos.col))

    def run(self) -> None:
        self._check_unique(
            [(t.name, t.pos) for t in self.model.things], "thing", "model"
        )
        self._check_unique(
            [(c.name, c.pos) for c in self.model.configurations], "configuration", "model"
        )
        for thing in self.model.things:
            self._check_thing(thing)
        for config in self.model.configurations:
            self._check_configuration(config)

    def _check_unique(self, named: list[tuple[str, Pos]], kind: str, scope: str) -> None:
        seen: set[str] = set()
        for name, pos in named:
            if name in seen:
                self._error("V001", f"duplicate {kind} name '{name}' in {scope}", pos)
            seen.add(name)

    # ------------------------------------------------------------------ things

    def _check_thing(self, t: Thing) -> None:
        scope = f"thing '{t.name}'"
        self._check_unique([(p.name, p.pos) for p in t.properties], "property", scope)
        self._check_unique([(m.name, m.pos) for m in t.messages], "message", scope)
        self._check_unique([(p.name, p.pos) for p in t.ports], "port", scope)
        self._check_unique(
            [(d.name, d.pos) for d in t.analytics], "data_analytics block", scope
        )
        for msg in t.messages:
            self._check_unique(
                [(p.name, p.pos) for p in msg.params], "parameter", f"message '{msg.name}'"
            )

        props = {p.name: p.type for p in t.properties}

        for prop in t.properties:
            if prop.initial is not None:
                got = self._type_of(prop.initial, _Scope(props, {}), t)
                if got is not None and not widens_to(got, prop.type):
                    self._error(
                        "V006",
                        f"initializer of property '{prop.name}' must be {prop.type}, got {got}",
                        prop.pos,
                    )

        for port in t.ports:
            for mname in port.sends + port.receives:
                if t.message(mname) is None:
                    self._error(
                        "V002",
                        f"port '{port.name}' references undeclared message '{mname}'",
                        port.pos,
                    )

        for da in t.analytics:
            self._check_analytics(t, da, props)

        if t.statechart is not None:
            self._check_statechart(t, props)

        self._check_thing_warnings(t)

    def _check_analytics(self, t: Thing, da, props: dict[str, ValueType]) -> None:
        seen: set[str] = set()
        for fname in da.features:
            if fname in seen:
                self._error(
                    "V001", f"duplicate feature '{fname}' in data_analytics '{da.name}'", da.pos
                )
            seen.add(fname)
        if da.label in da.features:
            self._error(
                "V001",
                f"label '{da.label}' of data_analytics '{da.name}' also listed in features",
                da.pos,
            )
        if da.prediction in da.features:
            self._error(
                "V001",
                f"prediction '{da.prediction}' of data_analytics '{da.name}' also listed in features",
                da.pos,
            )

        for role, name in (
            *(("feature", f) for f in da.features),
            ("label", da.label),
            ("prediction", da.prediction),
        ):
            if name not in props:
                self._error(
                    "V008",
                    f"data_analytics '{da.name}' {role} '{name}' is not a declared property",
                    da.pos,
                )
            elif role in ("feature", "label") and props[name] not in _NUMERIC:
                self._error(
                    "V009",
                    f"data_analytics '{da.name}' {role} '{name}' must be numeric (Int or Real), "
                    f"got {props[name]}",
                    da.pos,
                )

        kind = self._check_algorithm(da.algorithm)
        if kind is not None and da.prediction in props:
            expected = (
                ValueType.REAL if kind is AlgorithmKind.LINEAR_REGRESSION else ValueType.INT
            )
            if props[da.prediction] is not expected:
                self._error(
                    "V009",
                    f"prediction property '{da.prediction}' must be {expected} for "
                    f"{kind} (got {props[da.prediction]})",
                    da.pos,
                )

    def _check_algorithm(self, spec: AlgorithmSpec) -> Optional[AlgorithmKind]:
        kind = spec.algorithm()
        if kind is None:
            self._error("V010", f"unknown algorithm '{spec.kind}'", spec.pos)
            return None
        # fall through: hyperparameter problems don't hide the kind itself
        known = {
            AlgorithmKind.LINEAR_REGRESSION: {"lambda"},
            AlgorithmKind.LOGISTIC_REGRESSION: {"lr", "epochs"},
            AlgorithmKind.GAUSSIAN_NB: {"var_smoothing"},
            AlgorithmKind.KNN: {"k"},
        }[kind]
        for name, value in spec.params:
            if name not in known:
                self._error(
                    "V010", f"unknown hyperparameter '{name}' for {kind}", spec.pos
                )
                continue
            is_int = isinstance(value, int) and not isinstance(value, bool)
            is_num = is_int or isinstance(value, float)
            if name in ("epochs", "k"):
                if not is_int or value < 1:
                    self._error(
                        "V010",
                        f"hyperparameter '{name}' of {kind} must be an Int >= 1, "
                        f"got {value!r}",
                        spec.pos,
                    )
            elif name == "lambda":
                if not is_num or value < 0:
                    self._error(
                        "V010",
                        f"hyperparameter 'lambda' of {kind} must be numeric >= 0, got {value!r}",
                        spec.pos,
                    )
            else:  # lr, var_smoothing: strictly positive
                if not is_num or value <= 0:
                    self._error(
                        "V010",
                        f"hyperparameter '{name}' of {kind} must be numeric > 0, got {value!r}",
                        spec.pos,
                    )
        return kind

    # -------------------------------------------------------------- statecharts

    def _check_statechart(self, t: Thing, props: dict[str, ValueType]) -> None:
        sc = t.statechart
        assert sc is not None
        self._check_unique(
            [(s.name, s.pos) for s in sc.states], "state", f"statechart of '{t.name}'"
        )
        state_names = {s.name for s in sc.states}
        if sc.initial not in state_names:
            self._error(
                "V003", f"initial state '{sc.initial}' is not a declared state", sc.pos
            )
        for state in sc.states:
            for block in (state.entry, state.exit):
                if block is not None:
                    self._check_block(block, _Scope(props, {}), t)
            for tr in state.transitions:
                if tr.target is not None and tr.target not in state_names:
                    self._error(
                        "V004",
                        f"transition target state '{tr.target}' is not declared",
                        tr.pos,
                    )
                params: dict[str, ValueType] = {}
                if tr.trigger is not None:
                    port = t.port(tr.trigger.port)
                    if port is None:
                        self._error(
                            "V005",
                            f"transition trigger references unknown port '{tr.trigger.port}'",
                            tr.pos,
                        )
                    elif tr.trigger.message not in port.receives:
                        self._error(
                            "V005",
                            f"port '{port.name}' does not receive message '{tr.trigger.message}'",
                            tr.pos,
                        )
                    decl = t.message(tr.trigger.message)
                    if decl is not None:
                        params = {p.name: p.type for p in decl.params}
                scope = _Scope(props, params)
                if tr.guard is not None:
                    got = self._type_of(tr.guard, scope, t)
                    if got is not None and got is not ValueType.BOOL:
                        self._error(
                            "V006", f"transition guard must be Bool, got {got}", tr.pos
                        )
                if tr.action is not None:
                    self._check_block(tr.action, _Scope(props, params), t)

    # ------------------------------------------------------------- statements

    def _check_block(self, block: Block, scope: _Scope, t: Thing) -> None:
        scope.frames.append({})
        for stmt in block:
            self._check_stmt(stmt, scope, t)
        scope.frames.pop()

    def _check_stmt(self, s: Stmt, scope: _Scope, t: Thing) -> None:
        if isinstance(s, VarDecl):
            got = self._type_of(s.init, scope, t)
            if got is not None and not widens_to(got, s.type):
                self._error(
                    "V006",
                    f"initializer of variable '{s.name}' must be {s.type}, got {got}",
                    s.pos,
                )
            if s.name in scope.frames[-1]:
                self._error("V001", f"duplicate variable '{s.name}' in block", s.pos)
            scope.frames[-1][s.name] = s.type
        elif isinstance(s, Assign):
            got = self._type_of(s.expr, scope, t)
            target = scope.lookup(s.target)
            if target is None:
                self._error(
                    "V007",
                    f"assignment to undeclared property or variable '{s.target}'",
                    s.pos,
                )
            elif s.target in scope.params and not any(
                s.target in f for f in scope.frames
            ):
                self._error(
                    "V007", f"cannot assign to trigger parameter '{s.target}'", s.pos
                )
            elif got is not None and not widens_to(got, target):
                self._error(
                    "V006",
                    f"cannot assign {got} to {target} '{s.target}'",
                    s.pos,
                )
        elif isinstance(s, SendStmt):
            arg_types = [self._type_of(a, scope, t) for a in s.args]
            port = t.port(s.port)
            if port is None:
                self._error("V005", f"send on unknown port '{s.port}'", s.pos)
                return
            if s.message not in port.sends:
                self._error(
                    "V005", f"port '{s.port}' does not send message '{s.message}'", s.pos
                )
                return
            decl = t.message(s.message)
            if decl is None:
                return  # undeclared message already reported at the port (V002)
            if len(s.args) != len(decl.params):
                self._error(
                    "V006",
                    f"message '{s.message}' expects {len(decl.params)} argument(s), "
                    f"got {len(s.args)}",
                    s.pos,
                )
                return
            for i, (arg_t, param) in enumerate(zip(arg_types, decl.params), start=1):
                if arg_t is not None and not widens_to(arg_t, param.type):
                    self._error(
                        "V006",
                        f"argument {i} of message '{s.message}' expects {param.type}, "
                        f"got {arg_t}",
                        s.pos,
                    )
        elif isinstance(s, IfStmt):
            self._check_cond(s.cond, "if", scope, t, s.pos)
            self._check_block(s.then, scope, t)
            if s.orelse is not None:
                self._check_block(s.orelse, scope, t)
        elif isinstance(s, WhileStmt):
            self._check_cond(s.cond, "while", scope, t, s.pos)
            self._check_block(s.body, scope, t)
        elif isinstance(s, PrintStmt):
            self._type_of(s.expr, scope, t)
        elif isinstance(s, (DaPreprocess, DaTrain, DaPredict, DaSave)):
            if t.analytics_block(s.da) is None:
                self._error(
                    "V014",
                    f"da_* statement references undeclared data_analytics block '{s.da}'",
                    s.pos,
                )
        else:
            raise TypeError(f"unknown statement node: {s!r}")

    def _check_cond(self, cond: Expr, what: str, scope: _Scope, t: Thing, pos: Pos) -> None:
        got = self._type_of(cond, scope, t)
        if got is not None and got is not ValueType.BOOL:
            self._error("V006", f"condition of '{what}' must be Bool, got {got}", pos)

    # ------------------------------------------------------------ expressions

    def _type_of(self, e: Expr, scope: _Scope, t: Thing) -> Optional[ValueType]:
        if isinstance(e, Literal):
            return e.type
        if isinstance(e, NowCall):
            return ValueType.INT
        if isinstance(e, NameRef):
            got = scope.lookup(e.name)
            if got is None:
                self._error("V006", f"unknown name '{e.name}' in expression", e.pos)
            return got
        if isinstance(e, Unary):
            inner = self._type_of(e.operand, scope, t)
            if inner is None:
                return None
            if e.op == "-":
                if inner not in _NUMERIC:
                    self._error("V006", f"unary '-' requires a numeric operand, got {inner}", e.pos)
                    return None
                return inner
            if inner is not ValueType.BOOL:
                self._error("V006", f"'not' requires a Bool operand, got {inner}", e.pos)
                return None
            return ValueType.BOOL
        if isinstance(e, Binary):
            lt = self._type_of(e.left, scope, t)
            rt = self._type_of(e.right, scope, t)
            if lt is None or rt is None:
                return None
            if e.op in _ARITH_OPS:
                if lt not in _NUMERIC or rt not in _NUMERIC:
                    self._error(
                        "V006",
                        f"operator '{e.op}' requires numeric operands, got {lt} and {rt}",
                        e.pos,
                    )
                    return None
                if lt is ValueType.REAL or rt is ValueType.REAL:
                    return ValueType.REAL
                return ValueType.INT
            if e.op in _CMP_OPS:
                if lt not in _NUMERIC or rt not in _NUMERIC:
                    self._error(
                        "V006",
                        f"operator '{e.op}' requires numeric operands, got {lt} and {rt}",
                        e.pos,
                    )
                    return None
                return ValueType.BOOL
            if e.op in _EQ_OPS:
                comparable = (lt in _NUMERIC and rt in _NUMERIC) or lt is rt
                if not comparable:
                    self._error(
                        "V006", f"cannot compare {lt} with {rt} using '{e.op}'", e.pos
                    )
                    return None
                return ValueType.BOOL
            if e.op in _BOOL_OPS:
                if lt is not ValueType.BOOL or rt is not ValueType.BOOL:
                    self._error(
                        "V006",
                        f"operator '{e.op}' requires Bool operands, got {lt} and {rt}",
                        e.pos,
                    )
                    return None
                return ValueType.BOOL
            raise TypeError(f"unknown binary operator {e.op!r}")
        raise TypeError(f"unknown expression node: {e!r}")

    # -------------------------------------------------------------- warnings

    def _check_thing_warnings(self, t: Thing) -> None:
        if t.statechart is not None:
            sc = t.statechart
            targeted = {tr.target for s in sc.states for tr in s.transitions if tr.target}
            for s in sc.states:
                if s.name != sc.initial and s.name not in targeted:
                    self._warn(
                        "V101",
                        f"state '{s.name}' is unreachable (no inbound transition, not initial)",
                        s.pos,
                    )
        used = {n for p in t.ports for n in p.sends + p.receives}
        for msg in t.messages:
            if msg.name not in used:
                self._warn(
                    "V102", f"message '{msg.name}' is not used by any port", msg.pos
                )
        if t.analytics:
            called = self._da_names_called(t)
            for da in t.analytics:
                if da.name not in called:
                    self._warn(
                        "V103",
                        f"data_analytics block '{da.name}' is never used by the statechart",
                        da.pos,
                    )

    def _da_names_called(self, t: Thing) -> set[str]:
        names: set[str] = set()
        if t.statechart is None:
            return names

        def walk(block: Optional[Block]) -> None:
            if block is None:
                return
            for s in block:
                if isinstance(s, (DaPreprocess, DaTrain, DaPredict, DaSave)):
                    names.add(s.da)
                elif isinstance(s, IfStmt):
                    walk(s.then)
                    walk(s.orelse)
                elif isinstance(s, WhileStmt):
                    walk(s.body)

        for state in t.statechart.states:
            walk(state.entry)
            walk(state.exit)
            for tr in state.transitions:
                walk(tr.action)
        return names

    # --------------------------------------------------------- configurations

    def _check_configuration(self, c: Configuration) -> None:
        self._check_unique(
            [(i.name, i.pos) for i in c.instances], "instance", f"configuration '{c.name}'"
        )
        for inst in c.instances:
            if self.model.thing(inst.thing) is None:
                self._error(
                    "V011",
                    f"instance '{inst.name}' references undeclared thing '{inst.thing}'",
                    inst.pos,
                )
        for conn in c.connectors:
            from_port = self._resolve_endpoint(c, conn.from_instance, conn.from_port, conn.pos)
            to_port = self._resolve_endpoint(c, conn.to_instance, conn.to_port, conn.pos)
            if from_port is None or to_port is None:
                continue
            self._check_connector_compat(c, conn, from_port, to_port)

    def _resolve_endpoint(
        self, c: Configuration, instance: str, port: str, pos: Pos
    ) -> Optional[tuple[Thing, Port]]:
        inst = c.instance(instance)
        if inst is None:
            self._error(
                "V012", f"connector references unknown instance '{instance}'", pos
            )
            return None
        thing = self.model.thing(inst.thing)
        if thing is None:
            return None  # V011 already reported
        p = thing.port(port)
        if p is None:
            self._error(
                "V012",
                f"connector references unknown port '{port}' on instance '{instance}'",
                pos,
            )
            return None
        return (thing, p)

    def _check_connector_compat(
        self,
        c: Configuration,
        conn,
        from_ep: tuple[Thing, Port],
        to_ep: tuple[Thing, Port],
    ) -> None:
        (from_thing, from_port) = from_ep
        (to_thing, to_port) = to_ep
        directions = {from_port.direction, to_port.direction}
        if directions != {PortDirection.PROVIDED, PortDirection.REQUIRED}:
            self._error(
                "V013",
                "connector must join exactly one required and one provided port, "
                f"got {from_port.direction} and {to_port.direction}",
                conn.pos,
            )
            return
        for sender_thing, sender, receiver_thing, receiver in (
            (from_thing, from_port, to_thing, to_port),
            (to_thing, to_port, from_thing, from_port),
        ):
            for mname in sender.sends:
                if mname not in receiver.receives:
                    self._error(
                        "V013",
                        f"message '{mname}' sent by port '{sender.name}' is not received "
                        f"by peer port '{receiver.name}'",
                        conn.pos,
                    )
                    continue
                sdecl = sender_thing.message(mname)
                rdecl = receiver_thing.message(mname)
                if sdecl is None or rdecl is None:
                    continue  # V002 already reported
                if [p.type for p in sdecl.params] != [p.type for p in rdecl.params]:
                    self._error(
                        "V013",
                        f"message '{mname}' has incompatible parameter types across "
                        f"connector ('{sender_thing.name}' vs '{receiver_thing.name}')",
                        conn.pos,
                    )
