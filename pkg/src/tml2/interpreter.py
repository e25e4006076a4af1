"""Deterministic execution of a validated configuration.

Time is a global step counter: each step visits every instance in
configuration order, delivers at most one queued message to it, and then
chases enabled eventless transitions. Messages sent during step k become
visible to their receiver at step k+1, never earlier, so the trace is a
pure function of (model, configuration, max_steps).

The caller must validate the model first; the interpreter assumes every
name resolves and every expression is well-typed.
"""

from __future__ import annotations

import json
import math
import os
from collections import deque
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence, Union

from . import mlengine
from .mlengine import EngineError
from .model import (
    AlgorithmKind,
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
    Model,
    NameRef,
    NowCall,
    PrintStmt,
    SendStmt,
    State,
    Stmt,
    Thing,
    Transition,
    Unary,
    ValueType,
    VarDecl,
    WhileStmt,
)

EVENTLESS_CHAIN_LIMIT = 1000
WHILE_ITERATION_LIMIT = 100_000

Value = Union[int, float, bool, str]


class SimulationError(Exception):
    """Runtime failure with a stable code (E-LIVELOCK, E-DIV, E-IO, ...)."""

    def __init__(self, code: str, message: str):
        self.code = code
        super().__init__(message)

    def __str__(self) -> str:
        return f"[{self.code}] {super().__str__()}"


@dataclass(frozen=True)
class TraceEvent:
    step: int
    instance: str
    kind: str  # Dispatch|Send|Transition|EventlessTransition|Discard|Train|Predict|Print
    detail: dict

    def to_json(self) -> str:
        obj = {
            "step": self.step,
            "instance": self.instance,
            "kind": self.kind,
            "detail": self.detail,
        }
        return json.dumps(obj, separators=(",", ":"))


def trace_to_jsonl(trace: Sequence[TraceEvent]) -> str:
    return "".join(ev.to_json() + "\n" for ev in trace)


@dataclass(frozen=True)
class Envelope:
    port: str  # receiving port on the target instance
    message: str
    args: tuple[Value, ...]
    enqueue_step: int


@dataclass(frozen=True)
class InstanceSnapshot:
    name: str
    thing: str
    state: Optional[str]
    properties: dict[str, Value]
    pending: int


@dataclass(frozen=True)
class SimulationResult:
    instances: tuple[InstanceSnapshot, ...]
    trace: tuple[TraceEvent, ...]
    steps_run: int

    def instance(self, name: str) -> InstanceSnapshot:
        for snap in self.instances:
            if snap.name == name:
                return snap
        raise KeyError(name)


# ---------------------------------------------------------------------------
# expression evaluation
# ---------------------------------------------------------------------------


def _trunc_div(a: int, b: int) -> int:
    q = abs(a) // abs(b)
    return q if (a < 0) == (b < 0) else -q


def eval_expr(expr: Expr, env: Optional[Mapping[str, Value]] = None, now: int = 0) -> Value:
    """Strict left-to-right evaluation; `and`/`or` short-circuit.

    `env` must bind every free name (the validator guarantees this for
    expressions inside a validated model); Now() evaluates to `now`.
    """
    bindings = env or {}
    return _eval(expr, bindings, now)


def _eval(expr: Expr, env: Mapping[str, Value], now: int) -> Value:
    if isinstance(expr, Literal):
        return expr.value
    if isinstance(expr, NameRef):
        return env[expr.name]
    if isinstance(expr, NowCall):
        return now
    if isinstance(expr, Unary):
        v = _eval(expr.operand, env, now)
        if expr.op == "-":
            return -v  # type: ignore[operator]
        return not v
    if isinstance(expr, Binary):
        op = expr.op
        left = _eval(expr.left, env, now)
        if op == "and":
            return bool(left) and bool(_eval(expr.right, env, now))
        if op == "or":
            return bool(left) or bool(_eval(expr.right, env, now))
        right = _eval(expr.right, env, now)
        if op == "+":
            return left + right  # type: ignore[operator]
        if op == "-":
            return left - right  # type: ignore[operator]
        if op == "*":
            return left * right  # type: ignore[operator]
        if op == "/":
            if isinstance(left, int) and isinstance(right, int):
                if right == 0:
                    raise SimulationError("E-DIV", "division by zero")
                return _trunc_div(left, right)
            if right == 0:
                raise SimulationError("E-DIV", "division by zero")
            return float(left) / float(right)  # type: ignore[arg-type]
        if op == "%":
            if isinstance(left, int) and isinstance(right, int):
                if right == 0:
                    raise SimulationError("E-DIV", "modulo by zero")
                return left - _trunc_div(left, right) * right
            if right == 0:
                raise SimulationError("E-DIV", "modulo by zero")
            return math.fmod(float(left), float(right))  # type: ignore[arg-type]
        if op == "<":
            return left < right  # type: ignore[operator]
        if op == "<=":
            return left <= right  # type: ignore[operator]
        if op == ">":
            return left > right  # type: ignore[operator]
        if op == ">=":
            return left >= right  # type: ignore[operator]
        if op == "==":
            return left == right
        if op == "!=":
            return left != right
        raise TypeError(f"unknown operator {op!r}")
    raise TypeError(f"unknown expression node: {expr!r}")


def render_value(v: Value) -> str:
    """Canonical text for a runtime value (used by print and summaries)."""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _widen(value: Value, vtype: ValueType) -> Value:
    if vtype is ValueType.REAL and isinstance(value, int) and not isinstance(value, bool):
        return float(value)
    return value


_DEFAULTS: dict[ValueType, Value] = {
    ValueType.INT: 0,
    ValueType.REAL: 0.0,
    ValueType.BOOL: False,
    ValueType.STRING: "",
}


# ---------------------------------------------------------------------------
# runtime structures
# ---------------------------------------------------------------------------


@dataclass
class _DaState:
    dataset: Optional[mlengine.Dataset] = None
    scaler: Optional[mlengine.ScalerParams] = None
    model: Optional[mlengine.TrainedModel] = None


@dataclass
class _Instance:
    name: str
    thing: Thing
    state: Optional[str]
    props: dict[str, Value] = field(default_factory=dict)
    da: dict[str, _DaState] = field(default_factory=dict)
    mailbox: deque = field(default_factory=deque)

    def current_state(self) -> Optional[State]:
        if self.thing.statechart is None or self.state is None:
            return None
        return self.thing.statechart.state(self.state)


class _Env(Mapping):
    """Name lookup for expression evaluation: locals, trigger params, props."""

    def __init__(self, inst: _Instance, params: Optional[dict[str, Value]] = None):
        self.inst = inst
        self.params = params or {}
        self.frames: list[dict[str, tuple[ValueType, Value]]] = []

    def __getitem__(self, name: str) -> Value:
        for frame in reversed(self.frames):
            if name in frame:
                return frame[name][1]
        if name in self.params:
            return self.params[name]
        return self.inst.props[name]

    def __iter__(self):  # Mapping protocol; not used on hot paths
        seen = set()
        for frame in reversed(self.frames):
            for k in frame:
                if k not in seen:
                    seen.add(k)
                    yield k
        for k in self.params:
            if k not in seen:
                seen.add(k)
                yield k
        for k in self.inst.props:
            if k not in seen:
                yield k

    def __len__(self) -> int:
        return len(list(iter(self)))

    def declare(self, name: str, vtype: ValueType, value: Value) -> None:
        self.frames[-1][name] = (vtype, _widen(value, vtype))

    def assign(self, name: str, value: Value) -> None:
        for frame in reversed(self.frames):
            if name in frame:
                vtype = frame[name][0]
                frame[name] = (vtype, _widen(value, vtype))
                return
        # validator rejects assignment to trigger parameters
        prop = self.inst.thing.property(name)
        assert prop is not None, f"unvalidated assignment target {name!r}"
        self.inst.props[name] = _widen(value, prop.type)


# ---------------------------------------------------------------------------
# the scheduler
# ---------------------------------------------------------------------------


class _Simulation:
    def __init__(self, model: Model, config: Configuration, base_dir: str):
        self.model = model
        self.config = config
        self.base_dir = base_dir
        self.trace: list[TraceEvent] = []
        self.now = 0
        self.instances: list[_Instance] = []
        self.by_name: dict[str, _Instance] = {}
        for decl in config.instances:
            thing = model.thing(decl.thing)
            assert thing is not None, f"unvalidated instance thing {decl.thing!r}"
            inst = _Instance(decl.name, thing, None)
            self.instances.append(inst)
            self.by_name[decl.name] = inst
        # (instance, port) -> peers in connector declaration order, both directions
        self.routes: dict[tuple[str, str], list[tuple[str, str]]] = {}
        for conn in config.connectors:
            self.routes.setdefault((conn.from_instance, conn.from_port), []).append(
                (conn.to_instance, conn.to_port)
            )
            self.routes.setdefault((conn.to_instance, conn.to_port), []).append(
                (conn.from_instance, conn.from_port)
            )

    def emit(self, inst: str, kind: str, detail: dict) -> None:
        self.trace.append(TraceEvent(self.now, inst, kind, detail))

    # ---- lifecycle --------------------------------------------------------

    def initialize(self) -> None:
        for inst in self.instances:
            for prop in inst.thing.properties:
                inst.props[prop.name] = _DEFAULTS[prop.type]
            for prop in inst.thing.properties:
                if prop.initial is not None:
                    value = _eval(prop.initial, _Env(inst), self.now)
                    inst.props[prop.name] = _widen(value, prop.type)
            for da in inst.thing.analytics:
                inst.da[da.name] = _DaState()
        for inst in self.instances:
            chart = inst.thing.statechart
            if chart is None:
                continue
            inst.state = chart.initial
            state = inst.current_state()
            if state is not None and state.entry is not None:
                self.exec_block(inst, state.entry, _Env(inst))
            self.chase_eventless(inst)

    def run(self, max_steps: int) -> int:
        steps = 0
        for k in range(1, max_steps + 1):
            self.now = k
            if not self.anything_pending():
                break
            steps = k
            for inst in self.instances:
                self.turn(inst)
        return steps

    def anything_pending(self) -> bool:
        """Would the step about to run (Now() == self.now) do any work?"""
        if any(inst.mailbox for inst in self.instances):
            return True
        for inst in self.instances:
            state = inst.current_state()
            if state is None:
                continue
            for tr in state.transitions:
                if tr.trigger is not None:
                    continue
                if tr.guard is None:
                    return True
                try:
                    if _eval(tr.guard, _Env(inst), self.now):
                        return True
                except SimulationError:
                    return True  # let the real turn raise it in order
        return False

    # ---- one instance turn --------------------------------------------------

    def turn(self, inst: _Instance) -> None:
        if inst.mailbox and inst.mailbox[0].enqueue_step < self.now:
            env: Envelope = inst.mailbox.popleft()
            self.emit(
                inst.name,
                "Dispatch",
                {"port": env.port, "message": env.message, "args": list(env.args)},
            )
            self.dispatch(inst, env)
        self.chase_eventless(inst)

    def dispatch(self, inst: _Instance, envelope: Envelope) -> None:
        state = inst.current_state()
        if state is not None:
            decl = inst.thing.message(envelope.message)
            params: dict[str, Value] = {}
            if decl is not None:
                params = {p.name: v for p, v in zip(decl.params, envelope.args)}
            for tr in state.transitions:
                if tr.trigger is None:
                    continue
                if tr.trigger.port != envelope.port or tr.trigger.message != envelope.message:
                    continue
                if tr.guard is not None and not _eval(tr.guard, _Env(inst, params), self.now):
                    continue
                self.fire(inst, state, tr, params)
                return
        self.emit(
            inst.name,
            "Discard",
            {"port": envelope.port, "message": envelope.message, "reason": "no-transition"},
        )

    def chase_eventless(self, inst: _Instance) -> None:
        chain = 0
        while True:
            state = inst.current_state()
            if state is None:
                return
            fired = False
            for tr in state.transitions:
                if tr.trigger is not None:
                    continue
                if tr.guard is not None and not _eval(tr.guard, _Env(inst), self.now):
                    continue
                chain += 1
                if chain > EVENTLESS_CHAIN_LIMIT:
                    raise SimulationError(
                        "E-LIVELOCK",
                        f"eventless transition chain reached length {chain} on "
                        f"instance '{inst.name}' (limit {EVENTLESS_CHAIN_LIMIT})",
                    )
                self.fire(inst, state, tr, {}, eventless=True)
                fired = True
                break
            if not fired:
                return

    def fire(
        self,
        inst: _Instance,
        state: State,
        tr: Transition,
        params: dict[str, Value],
        eventless: bool = False,
    ) -> None:
        kind = "EventlessTransition" if eventless else "Transition"
        if tr.target is None:
            if tr.action is not None:
                self.exec_block(inst, tr.action, _Env(inst, params))
            self.emit(
                inst.name,
                kind,
                {"from": state.name, "to": state.name, "internal": True},
            )
            return
        if state.exit is not None:
            self.exec_block(inst, state.exit, _Env(inst))
        if tr.action is not None:
            self.exec_block(inst, tr.action, _Env(inst, params))
        self.emit(
            inst.name,
            kind,
            {"from": state.name, "to": tr.target, "internal": False},
        )
        inst.state = tr.target
        new_state = inst.current_state()
        if new_state is not None and new_state.entry is not None:
            self.exec_block(inst, new_state.entry, _Env(inst))

    # ---- statements ---------------------------------------------------------

    def exec_block(self, inst: _Instance, block: Block, env: _Env) -> None:
        env.frames.append({})
        try:
            for stmt in block:
                self.exec_stmt(inst, stmt, env)
        finally:
            env.frames.pop()

    def exec_stmt(self, inst: _Instance, stmt: Stmt, env: _Env) -> None:
        if isinstance(stmt, VarDecl):
            env.declare(stmt.name, stmt.type, _eval(stmt.init, env, self.now))
        elif isinstance(stmt, Assign):
            env.assign(stmt.target, _eval(stmt.expr, env, self.now))
        elif isinstance(stmt, SendStmt):
            self.send(inst, stmt, env)
        elif isinstance(stmt, IfStmt):
            if _eval(stmt.cond, env, self.now):
                self.exec_block(inst, stmt.then, env)
            elif stmt.orelse is not None:
                self.exec_block(inst, stmt.orelse, env)
        elif isinstance(stmt, WhileStmt):
            iterations = 0
            while _eval(stmt.cond, env, self.now):
                iterations += 1
                if iterations > WHILE_ITERATION_LIMIT:
                    raise SimulationError(
                        "E-WHILE",
                        f"while loop exceeded {WHILE_ITERATION_LIMIT} iterations "
                        f"on instance '{inst.name}'",
                    )
                self.exec_block(inst, stmt.body, env)
        elif isinstance(stmt, PrintStmt):
            text = render_value(_eval(stmt.expr, env, self.now))
            self.emit(inst.name, "Print", {"text": text})
        elif isinstance(stmt, DaPreprocess):
            self.da_preprocess(inst, stmt.da)
        elif isinstance(stmt, DaTrain):
            self.da_train(inst, stmt.da)
        elif isinstance(stmt, DaPredict):
            self.da_predict(inst, stmt.da)
        elif isinstance(stmt, DaSave):
            self.da_save(inst, stmt.da, stmt.path)
        else:
            raise TypeError(f"unknown statement node: {stmt!r}")

    def send(self, inst: _Instance, stmt: SendStmt, env: _Env) -> None:
        decl = inst.thing.message(stmt.message)
        assert decl is not None, f"unvalidated send of {stmt.message!r}"
        args = tuple(
            _widen(_eval(a, env, self.now), p.type)
            for a, p in zip(stmt.args, decl.params)
        )
        delivered = 0
        for peer_name, peer_port_name in self.routes.get((inst.name, stmt.port), ()):
            peer = self.by_name[peer_name]
            peer_port = peer.thing.port(peer_port_name)
            if peer_port is None or stmt.message not in peer_port.receives:
                continue
            peer.mailbox.append(
                Envelope(peer_port_name, stmt.message, args, self.now)
            )
            self.emit(
                inst.name,
                "Send",
                {
                    "port": stmt.port,
                    "message": stmt.message,
                    "args": list(args),
                    "to": peer_name,
                },
            )
            delivered += 1
        if delivered == 0:
            self.emit(
                inst.name,
                "Discard",
                {"port": stmt.port, "message": stmt.message, "reason": "unconnected"},
            )

    # ---- data analytics ------------------------------------------------------

    def _da(self, inst: _Instance, name: str) -> tuple[DataAnalyticsBlock, _DaState]:
        block = inst.thing.analytics_block(name)
        assert block is not None, f"unvalidated da block {name!r}"
        return block, inst.da[name]

    def _resolve(self, path: str) -> str:
        return path if os.path.isabs(path) else os.path.join(self.base_dir, path)

    def _ensure_dataset(self, block: DataAnalyticsBlock, st: _DaState) -> mlengine.Dataset:
        if st.dataset is None:
            try:
                st.dataset = mlengine.load_dataset(
                    self._resolve(block.dataset), block.features, block.label
                )
            except EngineError as e:
                raise SimulationError("E-IO", str(e)) from e
        return st.dataset

    def da_preprocess(self, inst: _Instance, name: str) -> None:
        block, st = self._da(inst, name)
        ds = self._ensure_dataset(block, st)
        st.scaler = mlengine.fit_scaler(ds.features())

    def da_train(self, inst: _Instance, name: str) -> None:
        block, st = self._da(inst, name)
        ds = self._ensure_dataset(block, st)
        X = ds.features()
        if st.scaler is not None:
            X = mlengine.apply_scaler(st.scaler, X)
        y = ds.labels()
        kind = block.algorithm.algorithm()
        assert kind is not None, f"unvalidated algorithm {block.algorithm.kind!r}"
        common = {
            "feature_names": block.features,
            "label_name": block.label,
            "scaler": st.scaler,
        }
        try:
            if kind is AlgorithmKind.LINEAR_REGRESSION:
                st.model = mlengine.train_linear_regression(
                    X, y, float(block.algorithm.param("lambda")), **common
                )
            elif kind is AlgorithmKind.LOGISTIC_REGRESSION:
                st.model = mlengine.train_logistic_regression(
                    X,
                    y,
                    float(block.algorithm.param("lr")),
                    int(block.algorithm.param("epochs")),
                    **common,
                )
            elif kind is AlgorithmKind.GAUSSIAN_NB:
                st.model = mlengine.train_gaussian_nb(
                    X, y, float(block.algorithm.param("var_smoothing")), **common
                )
            else:
                st.model = mlengine.train_knn(
                    X, y, int(block.algorithm.param("k")), **common
                )
        except (EngineError, ValueError) as e:
            raise SimulationError(
                "E-IO", f"training data_analytics '{name}' failed: {e}"
            ) from e
        metric = self._training_metric(block, st.model, ds)
        self.emit(
            inst.name, "Train", {"da": name, "rows": ds.n, "metric": metric}
        )

    def _training_metric(
        self,
        block: DataAnalyticsBlock,
        model: mlengine.TrainedModel,
        ds: mlengine.Dataset,
    ) -> float:
        # regression: mean squared error; classifiers: training accuracy
        raw = ds.features()
        y = ds.labels()
        preds = [mlengine.predict(model, row) for row in raw]
        if model.algorithm == "LinearRegression":
            return sum((p - t) ** 2 for p, t in zip(preds, y)) / ds.n
        return sum(1 for p, t in zip(preds, y) if p == int(t)) / ds.n

    def da_predict(self, inst: _Instance, name: str) -> None:
        block, st = self._da(inst, name)
        if st.model is None:
            raise SimulationError(
                "E-DA-ORDER",
                f"da_predict({name}) before da_train on instance '{inst.name}'",
            )
        features = [float(inst.props[f]) for f in block.features]
        value = mlengine.predict(st.model, features)
        prop = inst.thing.property(block.prediction)
        assert prop is not None
        inst.props[block.prediction] = _widen(value, prop.type)
        self.emit(
            inst.name,
            "Predict",
            {"da": name, "features": features, "prediction": value},
        )

    def da_save(self, inst: _Instance, name: str, path: str) -> None:
        _, st = self._da(inst, name)
        if st.model is None:
            raise SimulationError(
                "E-DA-ORDER",
                f"da_save({name}) before da_train on instance '{inst.name}'",
            )
        try:
            mlengine.save_model(st.model, self._resolve(path))
        except EngineError as e:
            raise SimulationError("E-IO", str(e)) from e

    # ---- results -------------------------------------------------------------

    def snapshot(self) -> tuple[InstanceSnapshot, ...]:
        out = []
        for inst in self.instances:
            out.append(
                InstanceSnapshot(
                    name=inst.name,
                    thing=inst.thing.name,
                    state=inst.state,
                    properties=dict(inst.props),
                    pending=len(inst.mailbox),
                )
            )
        return tuple(out)


def simulate(
    model: Model,
    config_name: str,
    max_steps: int,
    base_dir: str = "",
) -> SimulationResult:
    """Run a configuration for up to max_steps global steps.

    Stops early only when no mailbox holds a message and no eventless
    transition is enabled for the step about to run. Relative dataset and
    model paths resolve against base_dir (defaults to the working
    directory).
    """
    if max_steps < 1:
        raise ValueError("max_steps must be >= 1")
    config = model.configuration(config_name)
    if config is None:
        raise KeyError(f"configuration {config_name!r} not found")
    sim = _Simulation(model, config, base_dir)
    sim.initialize()
    steps = sim.run(max_steps)
    return SimulationResult(sim.snapshot(), tuple(sim.trace), steps)
