"""AST node definitions and the canonical statement printer.

Positions are carried for error reporting but excluded from equality so
that parse(print(parse(s))) == parse(s) holds.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Tuple


@dataclass(frozen=True)
class Node:
    pass


# --- expressions -------------------------------------------------------------

@dataclass(frozen=True)
class Lit(Node):
    value: object    # int, float or str

    def src(self) -> str:
        if isinstance(self.value, str):
            return f'"{self.value}"'
        if isinstance(self.value, float):
            return repr(self.value)
        return str(self.value)


@dataclass(frozen=True)
class Name(Node):
    ident: str

    def src(self) -> str:
        return self.ident


@dataclass(frozen=True)
class Apply(Node):
    fn: str
    args: Tuple[Node, ...]

    def src(self) -> str:
        return f"{self.fn}({', '.join(a.src() for a in self.args)})"


@dataclass(frozen=True)
class HullApply(Node):
    fn: str
    arg: Node

    def src(self) -> str:
        return f"{self.fn}(Hull {self.arg.src()})"


@dataclass(frozen=True)
class Neg(Node):
    operand: Node

    def src(self) -> str:
        return f"-{self.operand.src()}"


@dataclass(frozen=True)
class Bin(Node):
    op: str          # + - * /
    left: Node
    right: Node

    def src(self) -> str:
        return f"({self.left.src()} {self.op} {self.right.src()})"


@dataclass(frozen=True)
class ListExpr(Node):
    """Parenthesized value list: (Input, Hidden, Output) or ((Input, 1), ...)."""

    items: Tuple[Node, ...]

    def src(self) -> str:
        return f"({', '.join(x.src() for x in self.items)})"


@dataclass(frozen=True)
class InExpr(Node):
    item: Node
    coll: Node

    def src(self) -> str:
        return f"{self.item.src()} in ({self.coll.src()})"


@dataclass(frozen=True)
class EqCond(Node):
    """Equality test in a where clause; binds the left name if it is unbound."""

    left: Node
    right: Node

    def src(self) -> str:
        return f"{self.left.src()} = ({self.right.src()})"


@dataclass(frozen=True)
class InCond(Node):
    item: Node
    coll: Node

    def src(self) -> str:
        return f"{self.item.src()} in ({self.coll.src()})"


@dataclass(frozen=True)
class SelectForEach(Node):
    projections: Tuple[Node, ...]
    type_name: str
    var: str
    conds: Tuple[Node, ...]

    def src(self) -> str:
        out = f"select {', '.join(p.src() for p in self.projections)} for each {self.type_name} {self.var}"
        if self.conds:
            out += " where " + " and ".join(c.src() for c in self.conds)
        return out


@dataclass(frozen=True)
class SelectFrom(Node):
    projections: Tuple[str, ...]
    type_name: str

    def src(self) -> str:
        return f"select {', '.join(self.projections)} from {self.type_name}"


# --- statements --------------------------------------------------------------

@dataclass(frozen=True)
class Stmt(Node):
    pass


@dataclass(frozen=True)
class FnDecl(Node):
    name: str
    value_type: object     # store.py encoding
    many: bool = False

    def src(self) -> str:
        vt = self.value_type
        if vt == "FunctionRef":
            t = "function"
        elif isinstance(vt, tuple) and vt[0] == "ref":
            t = vt[1]
        elif isinstance(vt, tuple) and vt[0] == "tuple":
            t = "<" + ", ".join(e if isinstance(e, str) else e[1] for e in vt[1]) + ">"
        else:
            t = vt
        return f"{self.name} {t}{' many' if self.many else ''}"


@dataclass(frozen=True)
class CreateType(Stmt):
    name: str
    supertypes: Tuple[str, ...]
    decls: Tuple[FnDecl, ...]
    line: int = field(default=0, compare=False)

    def src(self) -> str:
        sup = f" subtype of {', '.join(self.supertypes)}" if self.supertypes else ""
        return f"Create type {self.name}{sup} ({', '.join(d.src() for d in self.decls)});"


@dataclass(frozen=True)
class CreateInstance(Stmt):
    type_name: str
    fns: Tuple[str, ...]
    name: str
    args: Tuple[Node, ...]
    line: int = field(default=0, compare=False)

    def src(self) -> str:
        args = f"({', '.join(a.src() for a in self.args)})" if self.args else ""
        return f"Create {self.type_name} ({', '.join(self.fns)}) instance {self.name}{args};"


@dataclass(frozen=True)
class ForEachClause(Node):
    type_name: str
    var: str
    conds: Tuple[Node, ...]

    def src(self) -> str:
        out = f" for each {self.type_name} {self.var}"
        if self.conds:
            out += " where " + " and ".join(c.src() for c in self.conds)
        return out


@dataclass(frozen=True)
class SetStmt(Stmt):
    fn: str
    target: Node
    value: Node
    foreach: Optional[ForEachClause] = None
    line: int = field(default=0, compare=False)

    def src(self) -> str:
        loop = self.foreach.src() if self.foreach else ""
        return f"Set {self.fn}({self.target.src()}) = {self.value.src()}{loop};"


@dataclass(frozen=True)
class ConnectStmt(Stmt):
    """Written `Set Predecessor(A) = (B, C)`: connect A to each of B, C."""

    source: Node
    targets: Tuple[Node, ...]
    line: int = field(default=0, compare=False)

    def src(self) -> str:
        if len(self.targets) == 1:
            rhs = self.targets[0].src()
        else:
            rhs = f"({', '.join(t.src() for t in self.targets)})"
        return f"Set Predecessor({self.source.src()}) = {rhs};"


@dataclass(frozen=True)
class CreateFunction(Stmt):
    name: str
    param: str
    param_type: str
    body: Tuple[SetStmt, ...]
    line: int = field(default=0, compare=False)

    def src(self) -> str:
        body = "\n".join("  " + s.src() for s in self.body)
        return (f"Create function {self.name}({self.param} {self.param_type}) as\n"
                f"begin\n{body}\nend;")


@dataclass(frozen=True)
class AddTypeStmt(Stmt):
    type_name: str
    target: Node
    line: int = field(default=0, compare=False)

    def src(self) -> str:
        return f"Add type {self.type_name} to {self.target.src()};"


@dataclass(frozen=True)
class LearnStmt(Stmt):
    net: Node
    epochs: int
    line: int = field(default=0, compare=False)

    def src(self) -> str:
        return f"Learn {self.net.src()} repeat {self.epochs};"


@dataclass(frozen=True)
class SelectStmt(Stmt):
    expr: Node
    line: int = field(default=0, compare=False)

    def src(self) -> str:
        return f"Select {self.expr.src()};"


@dataclass(frozen=True)
class ImportStmt(Stmt):
    path: str
    type_name: str
    line: int = field(default=0, compare=False)

    def src(self) -> str:
        return f'Import "{self.path}" into {self.type_name};'


@dataclass(frozen=True)
class CallStmt(Stmt):
    name: str
    args: Tuple[Node, ...]
    line: int = field(default=0, compare=False)

    def src(self) -> str:
        return f"{self.name}({', '.join(a.src() for a in self.args)});"


def print_script(statements) -> str:
    return "\n".join(s.src() for s in statements)
