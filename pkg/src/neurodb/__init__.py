"""neurodb: an embedded object database whose OSQL dialect defines, stores,
trains, and evaluates neural networks as first-class database objects."""

from . import errors
from .network import (
    LearnReport,
    backward_pass,
    connect,
    evaluate,
    flatten,
    forward_pass,
    hull_resolve,
    ident,
    install_schema,
    learn,
    random_weights,
    set_all_weights,
    sigmoid,
)
from .osql.parser import parse_script, parse_statement
from .session import Session, new_database
from .snapshot import load_snapshot, save_snapshot
from .store import Database, FunctionSig, ObjectInstance, TypeDef
from .streams import (
    EvaluationTrigger,
    bind_check,
    bind_input,
    output_insert,
    output_return,
    register_trigger,
)
from .values import FnRef, Ref, Stream

__all__ = [
    "Database", "FunctionSig", "ObjectInstance", "TypeDef",
    "Session", "new_database",
    "Ref", "FnRef", "Stream",
    "parse_script", "parse_statement",
    "save_snapshot", "load_snapshot",
    "install_schema", "connect", "flatten", "hull_resolve",
    "forward_pass", "backward_pass", "evaluate", "learn", "LearnReport",
    "sigmoid", "ident", "set_all_weights", "random_weights",
    "bind_input", "bind_check", "output_return", "output_insert",
    "EvaluationTrigger", "register_trigger",
    "errors",
]

__version__ = "0.1.0"
