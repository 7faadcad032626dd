"""Recursive-descent parser for the OSQL dialect.

Statements end with ';'.  `Set f(x) -> v` is accepted as a synonym of '='.
`Set Predecessor(A) = (B, C)` is parsed as a connection statement.  Inside a
type declaration list ',' and ';' both separate declarations.
"""

from __future__ import annotations

from typing import List, Optional

from ..errors import OsqlSyntaxError
from . import ast
from .lexer import Token, tokenize

SCALAR_TYPES = {"CharacterString": "CharacterString", "Real": "Real", "Integer": "Integer"}


class Parser:
    def __init__(self, tokens: List[Token]):
        self._toks = tokens
        self._pos = 0

    # --- token plumbing ---------------------------------------------------

    def _peek(self, ahead: int = 0) -> Token:
        i = min(self._pos + ahead, len(self._toks) - 1)
        return self._toks[i]

    def _advance(self) -> Token:
        tok = self._toks[self._pos]
        if tok.kind != "EOF":
            self._pos += 1
        return tok

    def _check(self, kind: str, value=None) -> bool:
        tok = self._peek()
        return tok.kind == kind and (value is None or tok.value == value)

    def _match(self, kind: str, value=None) -> Optional[Token]:
        if self._check(kind, value):
            return self._advance()
        return None

    def _expect(self, kind: str, value=None, what: str = "") -> Token:
        if self._check(kind, value):
            return self._advance()
        tok = self._peek()
        expected = what or value or kind
        raise OsqlSyntaxError(
            f"expected {expected}, found {tok.text or 'end of input'!r}",
            tok.line, tok.col)

    def _kw(self, word: str) -> Optional[Token]:
        return self._match("KEYWORD", word)

    def _expect_kw(self, word: str) -> Token:
        return self._expect("KEYWORD", word)

    def _ident(self, what="identifier") -> str:
        return self._expect("IDENT", what=what).text

    # --- entry point ---------------------------------------------------------

    def parse_script(self) -> List[ast.Stmt]:
        stmts = []
        while not self._check("EOF"):
            stmts.append(self.parse_statement())
        return stmts

    def parse_statement(self) -> ast.Stmt:
        tok = self._peek()
        if tok.kind == "KEYWORD":
            if tok.value == "create":
                return self._parse_create()
            if tok.value == "set":
                return self._parse_set()
            if tok.value == "add":
                return self._parse_add_type()
            if tok.value == "learn":
                return self._parse_learn()
            if tok.value == "select":
                return self._parse_select_stmt()
            if tok.value == "import":
                return self._parse_import()
        if tok.kind == "IDENT" and self._peek(1).kind == "LPAREN":
            return self._parse_call()
        raise OsqlSyntaxError(f"expected a statement, found {tok.text!r}",
                              tok.line, tok.col)

    # --- create forms ---------------------------------------------------------

    def _parse_create(self) -> ast.Stmt:
        line = self._expect_kw("create").line
        if self._kw("type"):
            return self._parse_create_type(line)
        if self._kw("function"):
            return self._parse_create_function(line)
        return self._parse_create_instance(line)

    def _parse_create_type(self, line: int) -> ast.CreateType:
        name = self._ident("type name")
        supers: List[str] = []
        if self._kw("subtype"):
            self._kw("of")
            supers.append(self._ident("supertype name"))
            while self._match("COMMA"):
                supers.append(self._ident("supertype name"))
        self._expect("LPAREN")
        decls: List[ast.FnDecl] = []
        while not self._check("RPAREN"):
            decls.append(self._parse_fn_decl())
            if not (self._match("COMMA") or self._match("SEMI")):
                break
        self._expect("RPAREN")
        self._expect("SEMI")
        return ast.CreateType(name, tuple(supers), tuple(decls), line=line)

    def _parse_fn_decl(self) -> ast.FnDecl:
        name = self._ident("function name")
        if self._match("LANGLE"):
            elems = [self._parse_decl_type()]
            while self._match("COMMA"):
                elems.append(self._parse_decl_type())
            self._expect("RANGLE")
            vt = ("tuple", tuple(elems))
        else:
            vt = self._parse_decl_type()
        many = bool(self._kw("many"))
        return ast.FnDecl(name, vt, many)

    def _parse_decl_type(self):
        if self._kw("function"):
            return "FunctionRef"
        name = self._ident("type name")
        if name in SCALAR_TYPES:
            return SCALAR_TYPES[name]
        return ("ref", name)

    def _parse_create_instance(self, line: int) -> ast.CreateInstance:
        type_name = self._ident("type name")
        self._expect("LPAREN")
        fns: List[str] = []
        while not self._check("RPAREN"):
            fns.append(self._ident("function name"))
            if not self._match("COMMA"):
                break
        self._expect("RPAREN")
        self._expect_kw("instance")
        name = self._ident("instance name")
        args: List[ast.Node] = []
        if self._match("LPAREN"):
            while not self._check("RPAREN"):
                args.append(self.parse_expr())
                if not self._match("COMMA"):
                    break
            self._expect("RPAREN")
        self._expect("SEMI")
        return ast.CreateInstance(type_name, tuple(fns), name, tuple(args), line=line)

    def _parse_create_function(self, line: int) -> ast.CreateFunction:
        name = self._ident("function name")
        self._expect("LPAREN")
        param = self._ident("parameter name")
        param_type = self._ident("parameter type")
        self._expect("RPAREN")
        self._expect_kw("as")
        self._expect_kw("begin")
        body: List[ast.SetStmt] = []
        while not self._check("KEYWORD", "end"):
            stmt = self.parse_statement()
            if not isinstance(stmt, ast.SetStmt):
                raise OsqlSyntaxError("function bodies may contain Set statements only",
                                      line, 0)
            body.append(stmt)
        self._expect_kw("end")
        self._expect("SEMI")
        return ast.CreateFunction(name, param, param_type, tuple(body), line=line)

    # --- set / connect ----------------------------------------------------------

    def _parse_set(self) -> ast.Stmt:
        line = self._expect_kw("set").line
        fn = self._ident("function name")
        self._expect("LPAREN")
        target = self.parse_expr()
        self._expect("RPAREN")
        if not self._match("ARROW"):
            self._expect("EQ", what="'=' or '->'")
        value = self.parse_expr()
        foreach = None
        if self._check("KEYWORD", "for"):
            foreach = self._parse_foreach()
        self._expect("SEMI")
        if fn == "Predecessor" and foreach is None:
            if isinstance(value, ast.ListExpr):
                targets = value.items
            else:
                targets = (value,)
            return ast.ConnectStmt(target, targets, line=line)
        return ast.SetStmt(fn, target, value, foreach, line=line)

    def _parse_foreach(self) -> ast.ForEachClause:
        self._expect_kw("for")
        self._expect_kw("each")
        type_name = self._ident("type name")
        var = self._ident("variable name")
        conds = self._parse_where()
        return ast.ForEachClause(type_name, var, conds)

    def _parse_where(self) -> tuple:
        conds: List[ast.Node] = []
        if self._kw("where"):
            conds.append(self._parse_cond())
            while self._kw("and"):
                conds.append(self._parse_cond())
        return tuple(conds)

    def _parse_cond(self) -> ast.Node:
        left = self.parse_expr()
        if self._kw("in"):
            self._expect("LPAREN")
            coll = self.parse_expr()
            self._expect("RPAREN")
            return ast.InCond(left, coll)
        if self._match("EQ"):
            right = self.parse_expr()
            return ast.EqCond(left, right)
        tok = self._peek()
        raise OsqlSyntaxError("expected '=' or 'in' in condition", tok.line, tok.col)

    # --- other statements ----------------------------------------------------

    def _parse_add_type(self) -> ast.AddTypeStmt:
        line = self._expect_kw("add").line
        self._expect_kw("type")
        type_name = self._ident("type name")
        self._expect_kw("to")
        target = self.parse_expr()
        self._expect("SEMI")
        return ast.AddTypeStmt(type_name, target, line=line)

    def _parse_learn(self) -> ast.LearnStmt:
        line = self._expect_kw("learn").line
        net = self.parse_expr()
        self._expect_kw("repeat")
        count = self._expect("NUMBER", what="epoch count")
        if not isinstance(count.value, int):
            raise OsqlSyntaxError("epoch count must be an integer", count.line, count.col)
        self._expect("SEMI")
        return ast.LearnStmt(net, count.value, line=line)

    def _parse_select_stmt(self) -> ast.SelectStmt:
        line = self._expect_kw("select").line
        expr = self._parse_select_core(line)
        self._expect("SEMI")
        return ast.SelectStmt(expr, line=line)

    def _parse_select_core(self, line: int) -> ast.Node:
        projections = [self.parse_expr()]
        while self._match("COMMA"):
            projections.append(self.parse_expr())
        if self._kw("from"):
            names = []
            for p in projections:
                if not isinstance(p, ast.Name):
                    raise OsqlSyntaxError("select-from projects function names only",
                                          line, 0)
                names.append(p.ident)
            type_name = self._ident("type name")
            return ast.SelectFrom(tuple(names), type_name)
        if self._check("KEYWORD", "for"):
            self._expect_kw("for")
            self._expect_kw("each")
            type_name = self._ident("type name")
            var = self._ident("variable name")
            conds = self._parse_where()
            return ast.SelectForEach(tuple(projections), type_name, var, conds)
        if len(projections) == 1:
            return projections[0]
        tok = self._peek()
        raise OsqlSyntaxError("expected 'from' or 'for each'", tok.line, tok.col)

    def _parse_import(self) -> ast.ImportStmt:
        line = self._expect_kw("import").line
        path = self._expect("STRING", what="file path").value
        self._expect_kw("into")
        type_name = self._ident("type name")
        self._expect("SEMI")
        return ast.ImportStmt(path, type_name, line=line)

    def _parse_call(self) -> ast.CallStmt:
        tok = self._expect("IDENT")
        self._expect("LPAREN")
        args: List[ast.Node] = []
        while not self._check("RPAREN"):
            args.append(self.parse_expr())
            if not self._match("COMMA"):
                break
        self._expect("RPAREN")
        self._expect("SEMI")
        return ast.CallStmt(tok.text, tuple(args), line=tok.line)

    # --- expressions -----------------------------------------------------------
    # precedence: additive < multiplicative < unary < primary

    def parse_expr(self) -> ast.Node:
        left = self._parse_term()
        while True:
            if self._match("PLUS"):
                left = ast.Bin("+", left, self._parse_term())
            elif self._match("MINUS"):
                left = ast.Bin("-", left, self._parse_term())
            else:
                return left

    def _parse_term(self) -> ast.Node:
        left = self._parse_unary()
        while True:
            if self._match("STAR"):
                left = ast.Bin("*", left, self._parse_unary())
            elif self._match("SLASH"):
                left = ast.Bin("/", left, self._parse_unary())
            else:
                return left

    def _parse_unary(self) -> ast.Node:
        if self._match("MINUS"):
            return ast.Neg(self._parse_unary())
        if self._match("PLUS"):
            return self._parse_unary()
        return self._parse_primary()

    def _parse_primary(self) -> ast.Node:
        tok = self._peek()
        if tok.kind == "NUMBER":
            self._advance()
            return ast.Lit(tok.value)
        if tok.kind == "STRING":
            self._advance()
            return ast.Lit(tok.value)
        if tok.kind == "KEYWORD" and tok.value == "select":
            self._advance()
            return self._parse_select_core(tok.line)
        if tok.kind == "IDENT":
            self._advance()
            if self._check("LPAREN"):
                return self._parse_apply(tok.text)
            return ast.Name(tok.text)
        if tok.kind == "LPAREN":
            self._advance()
            first = self.parse_expr()
            if self._match("COMMA"):
                items = [first, self.parse_expr()]
                while self._match("COMMA"):
                    items.append(self.parse_expr())
                self._expect("RPAREN")
                return ast.ListExpr(tuple(items))
            self._expect("RPAREN")
            return first
        raise OsqlSyntaxError(f"expected an expression, found {tok.text or 'end of input'!r}",
                              tok.line, tok.col)

    def _parse_apply(self, fn: str) -> ast.Node:
        self._expect("LPAREN")
        if self._kw("hull"):
            arg = self.parse_expr()
            self._expect("RPAREN")
            return ast.HullApply(fn, arg)
        args: List[ast.Node] = []
        while not self._check("RPAREN"):
            args.append(self.parse_expr())
            if not self._match("COMMA"):
                break
        self._expect("RPAREN")
        return ast.Apply(fn, tuple(args))


def parse_script(text: str) -> List[ast.Stmt]:
    """Parse OSQL source into a statement list."""
    return Parser(tokenize(text)).parse_script()


def parse_statement(text: str) -> ast.Stmt:
    parser = Parser(tokenize(text))
    stmt = parser.parse_statement()
    tok = parser._peek()
    if tok.kind != "EOF":
        raise OsqlSyntaxError(f"unexpected input after statement: {tok.text!r}",
                              tok.line, tok.col)
    return stmt
