"""Abstract syntax for tml2 models.

Every node is a frozen dataclass so a parsed model can be shared freely
(between validator, simulator, and code generator) without defensive
copies. Source positions ride along on each node but are excluded from
equality: two parses of equivalent text compare equal even if whitespace
moved everything around.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional, Union


@dataclass(frozen=True)
class Pos:
    """1-based line/column of a node's first token. (0, 0) = synthetic."""

    line: int = 0
    col: int = 0


NO_POS = Pos()


def _pos_field() -> Pos:
    # positions never participate in structural equality
    return field(default=NO_POS, compare=False, repr=False)


class ValueType(enum.Enum):
    INT = "Int"
    REAL = "Real"
    BOOL = "Bool"
    STRING = "String"

    def __str__(self) -> str:
        return self.value


class PortDirection(enum.Enum):
    PROVIDED = "provided"
    REQUIRED = "required"

    def __str__(self) -> str:
        return self.value


class AlgorithmKind(enum.Enum):
    LINEAR_REGRESSION = "LinearRegression"
    LOGISTIC_REGRESSION = "LogisticRegression"
    GAUSSIAN_NB = "GaussianNB"
    KNN = "KNN"

    def __str__(self) -> str:
        return self.value


# Canonical hyperparameter order and defaults per algorithm. The parser
# fills in defaults so an AlgorithmSpec always carries the full set.
HYPERPARAM_DEFAULTS: dict[AlgorithmKind, tuple[tuple[str, Union[int, float]], ...]] = {
    AlgorithmKind.LINEAR_REGRESSION: (("lambda", 0.0),),
    AlgorithmKind.LOGISTIC_REGRESSION: (("lr", 0.1), ("epochs", 500)),
    AlgorithmKind.GAUSSIAN_NB: (("var_smoothing", 1e-9),),
    AlgorithmKind.KNN: (("k", 3),),
}


# ---------------------------------------------------------------------------
# Expressions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Expr:
    pass


@dataclass(frozen=True)
class Literal(Expr):
    """A typed constant. `type` disambiguates 1 / 1.0 / true."""

    type: ValueType
    value: Union[int, float, bool, str]
    pos: Pos = _pos_field()


@dataclass(frozen=True)
class NameRef(Expr):
    """Reference to a property, local variable, or trigger parameter."""

    name: str
    pos: Pos = _pos_field()


@dataclass(frozen=True)
class Unary(Expr):
    op: str  # "-" | "not"
    operand: Expr
    pos: Pos = _pos_field()


@dataclass(frozen=True)
class Binary(Expr):
    op: str  # + - * / % < <= > >= == != and or
    left: Expr
    right: Expr
    pos: Pos = _pos_field()


@dataclass(frozen=True)
class NowCall(Expr):
    """Built-in Now(): the global scheduler step during simulation."""

    pos: Pos = _pos_field()


# ---------------------------------------------------------------------------
# Statements
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Stmt:
    pass


Block = tuple["Stmt", ...]


@dataclass(frozen=True)
class VarDecl(Stmt):
    name: str
    type: ValueType
    init: Expr
    pos: Pos = _pos_field()


@dataclass(frozen=True)
class Assign(Stmt):
    target: str
    expr: Expr
    pos: Pos = _pos_field()


@dataclass(frozen=True)
class SendStmt(Stmt):
    port: str
    message: str
    args: tuple[Expr, ...]
    pos: Pos = _pos_field()


@dataclass(frozen=True)
class IfStmt(Stmt):
    cond: Expr
    then: Block
    orelse: Optional[Block]
    pos: Pos = _pos_field()


@dataclass(frozen=True)
class WhileStmt(Stmt):
    cond: Expr
    body: Block
    pos: Pos = _pos_field()


@dataclass(frozen=True)
class PrintStmt(Stmt):
    expr: Expr
    pos: Pos = _pos_field()


@dataclass(frozen=True)
class DaPreprocess(Stmt):
    da: str
    pos: Pos = _pos_field()


@dataclass(frozen=True)
class DaTrain(Stmt):
    da: str
    pos: Pos = _pos_field()


@dataclass(frozen=True)
class DaPredict(Stmt):
    da: str
    pos: Pos = _pos_field()


@dataclass(frozen=True)
class DaSave(Stmt):
    da: str
    path: str
    pos: Pos = _pos_field()


# ---------------------------------------------------------------------------
# Thing members
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Property:
    name: str
    type: ValueType
    initial: Optional[Expr] = None
    pos: Pos = _pos_field()


@dataclass(frozen=True)
class Param:
    name: str
    type: ValueType
    pos: Pos = _pos_field()


@dataclass(frozen=True)
class Message:
    name: str
    params: tuple[Param, ...] = ()
    pos: Pos = _pos_field()


@dataclass(frozen=True)
class Port:
    name: str
    direction: PortDirection
    sends: tuple[str, ...] = ()
    receives: tuple[str, ...] = ()
    pos: Pos = _pos_field()


@dataclass(frozen=True)
class Trigger:
    port: str
    message: str
    pos: Pos = _pos_field()


@dataclass(frozen=True)
class Transition:
    """target=None means an internal transition (no state change)."""

    trigger: Optional[Trigger] = None
    guard: Optional[Expr] = None
    target: Optional[str] = None
    action: Optional[Block] = None
    pos: Pos = _pos_field()

    @property
    def is_internal(self) -> bool:
        return self.target is None

    @property
    def is_eventless(self) -> bool:
        return self.trigger is None


@dataclass(frozen=True)
class State:
    name: str
    entry: Optional[Block] = None
    exit: Optional[Block] = None
    transitions: tuple[Transition, ...] = ()
    pos: Pos = _pos_field()


@dataclass(frozen=True)
class StateChart:
    initial: str
    states: tuple[State, ...] = ()
    pos: Pos = _pos_field()

    def state(self, name: str) -> Optional[State]:
        for s in self.states:
            if s.name == name:
                return s
        return None


HyperValue = Union[int, float, bool, str]


@dataclass(frozen=True)
class AlgorithmSpec:
    """Algorithm choice plus its complete hyperparameter set.

    `kind` is the raw name from the source so the validator can reject
    unknown algorithms; use `algorithm()` for the resolved enum. For a
    known kind, `params` starts from the canonical defaults (see
    HYPERPARAM_DEFAULTS) overlaid with whatever the source spelled out,
    so equal specs compare equal regardless of how explicit they were.
    """

    kind: str
    params: tuple[tuple[str, HyperValue], ...]
    pos: Pos = _pos_field()

    def algorithm(self) -> Optional[AlgorithmKind]:
        try:
            return AlgorithmKind(self.kind)
        except ValueError:
            return None

    def param(self, name: str) -> HyperValue:
        for key, value in self.params:
            if key == name:
                return value
        raise KeyError(name)


@dataclass(frozen=True)
class DataAnalyticsBlock:
    name: str
    features: tuple[str, ...]
    label: str
    dataset: str
    algorithm: AlgorithmSpec
    prediction: str
    pos: Pos = _pos_field()


@dataclass(frozen=True)
class Thing:
    name: str
    properties: tuple[Property, ...] = ()
    messages: tuple[Message, ...] = ()
    ports: tuple[Port, ...] = ()
    statechart: Optional[StateChart] = None
    analytics: tuple[DataAnalyticsBlock, ...] = ()
    pos: Pos = _pos_field()

    def property(self, name: str) -> Optional[Property]:
        for p in self.properties:
            if p.name == name:
                return p
        return None

    def message(self, name: str) -> Optional[Message]:
        for m in self.messages:
            if m.name == name:
                return m
        return None

    def port(self, name: str) -> Optional[Port]:
        for p in self.ports:
            if p.name == name:
                return p
        return None

    def analytics_block(self, name: str) -> Optional[DataAnalyticsBlock]:
        for d in self.analytics:
            if d.name == name:
                return d
        return None


# ---------------------------------------------------------------------------
# Configurations
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Instance:
    name: str
    thing: str
    pos: Pos = _pos_field()


@dataclass(frozen=True)
class Connector:
    from_instance: str
    from_port: str
    to_instance: str
    to_port: str
    pos: Pos = _pos_field()


@dataclass(frozen=True)
class Configuration:
    name: str
    instances: tuple[Instance, ...] = ()
    connectors: tuple[Connector, ...] = ()
    pos: Pos = _pos_field()

    def instance(self, name: str) -> Optional[Instance]:
        for i in self.instances:
            if i.name == name:
                return i
        return None


@dataclass(frozen=True)
class Model:
    things: tuple[Thing, ...] = ()
    configurations: tuple[Configuration, ...] = ()
    source_name: str = field(default="<input>", compare=False)

    def thing(self, name: str) -> Optional[Thing]:
        for t in self.things:
            if t.name == name:
                return t
        return None

    def configuration(self, name: str) -> Optional[Configuration]:
        for c in self.configurations:
            if c.name == name:
                return c
        return None


def equals_structural(a: Model, b: Model) -> bool:
    """True iff the two ASTs are identical up to source positions.

    Names, declaration order, and literal values (including their static
    type: Int 1 differs from Real 1.0) all participate; positions and the
    source file name do not.
    """
    return isinstance(a, Model) and isinstance(b, Model) and a == b
