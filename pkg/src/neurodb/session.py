"""High-level session: a database with the predefined schema and paradigm
installed, plus statement execution with a shared configuration."""

from __future__ import annotations

import sys
from typing import List, Optional, Tuple

from . import network, paradigms
from .osql import ast
from .osql.eval import ExecConfig, exec_statement
from .osql.parser import parse_script
from .store import Database


def new_database() -> Database:
    db = Database()
    network.install_schema(db)
    paradigms.install(db)
    return db


class Session:
    def __init__(self, db: Optional[Database] = None, mode: str = "paper",
                 report_interval: int = 100, out=None, base_dir: Optional[str] = None):
        self.db = db if db is not None else new_database()
        if db is not None:
            # loaded databases may predate schema/paradigm installation
            network.install_schema(self.db)
            paradigms.install(self.db)
        self.out = out if out is not None else sys.stdout
        self.config = ExecConfig(
            mode=mode,
            report_interval=report_interval,
            report=self._report_line,
            base_dir=base_dir,
        )

    def _report_line(self, line: str) -> None:
        print(line, file=self.out)

    def execute_statement(self, stmt: ast.Stmt):
        return exec_statement(stmt, self.db, self.config)

    def execute(self, text: str) -> List[Tuple[ast.Stmt, object]]:
        """Parse and run a statement sequence; returns (statement, result)
        pairs in execution order."""
        results = []
        for stmt in parse_script(text):
            results.append((stmt, self.execute_statement(stmt)))
        return results

    def object_named(self, name: str) -> Optional[int]:
        return self.db.lookup_name(name)
