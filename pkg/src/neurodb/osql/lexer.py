"""Tokenizer for the OSQL dialect.

Keywords are case-insensitive; identifiers are case-sensitive.  A '-' with
identifier characters on both sides and no whitespace binds into the
identifier (names like XOR-Net), so subtraction between identifiers needs
spaces around the operator.  Comments run from '--' to end of line; note the
identifier rule means '--' only starts a comment when it is not glued to an
identifier.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import OsqlSyntaxError

KEYWORDS = {
    "create", "type", "subtype", "of", "instance", "function", "as",
    "begin", "end", "set", "select", "for", "each", "where", "in",
    "from", "and", "add", "to", "learn", "repeat", "import", "into",
    "hull", "many",
}

PUNCT = {
    "(": "LPAREN", ")": "RPAREN", ",": "COMMA", ";": "SEMI",
    "=": "EQ", "+": "PLUS", "-": "MINUS", "*": "STAR", "/": "SLASH",
    "<": "LANGLE", ">": "RANGLE",
}


@dataclass(frozen=True)
class Token:
    kind: str        # IDENT, KEYWORD, NUMBER, STRING, ARROW, punctuation kinds, EOF
    text: str
    value: object    # parsed number for NUMBER, bare text for STRING
    line: int
    col: int


def _ident_char(c: str) -> bool:
    return c.isalnum() or c == "_"


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    i, line, col = 0, 1, 1
    n = len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if c == "-" and i + 1 < n and text[i + 1] == "-":
            while i < n and text[i] != "\n":
                i += 1
            continue
        start_line, start_col = line, col
        if c == '"':
            j = i + 1
            while j < n and text[j] != '"':
                if text[j] == "\n":
                    raise OsqlSyntaxError("unterminated string", start_line, start_col)
                j += 1
            if j >= n:
                raise OsqlSyntaxError("unterminated string", start_line, start_col)
            raw = text[i + 1:j]
            tokens.append(Token("STRING", text[i:j + 1], raw, start_line, start_col))
            col += j + 1 - i
            i = j + 1
            continue
        if c.isdigit() or (c == "." and i + 1 < n and text[i + 1].isdigit()):
            j = i
            is_real = False
            while j < n and text[j].isdigit():
                j += 1
            if j < n and text[j] == "." and j + 1 < n and text[j + 1].isdigit():
                is_real = True
                j += 1
                while j < n and text[j].isdigit():
                    j += 1
            if j < n and text[j] in "eE":
                k = j + 1
                if k < n and text[k] in "+-":
                    k += 1
                if k < n and text[k].isdigit():
                    is_real = True
                    j = k
                    while j < n and text[j].isdigit():
                        j += 1
            lit = text[i:j]
            value = float(lit) if is_real else int(lit)
            tokens.append(Token("NUMBER", lit, value, start_line, start_col))
            col += j - i
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n:
                if _ident_char(text[j]):
                    j += 1
                elif text[j] == "-" and j + 1 < n and _ident_char(text[j + 1]):
                    j += 1
                else:
                    break
            word = text[i:j]
            kind = "KEYWORD" if word.lower() in KEYWORDS else "IDENT"
            val = word.lower() if kind == "KEYWORD" else word
            tokens.append(Token(kind, word, val, start_line, start_col))
            col += j - i
            i = j
            continue
        if c == "-" and i + 1 < n and text[i + 1] == ">":
            tokens.append(Token("ARROW", "->", "->", start_line, start_col))
            i += 2
            col += 2
            continue
        if c in PUNCT:
            tokens.append(Token(PUNCT[c], c, c, start_line, start_col))
            i += 1
            col += 1
            continue
        raise OsqlSyntaxError(f"unexpected character {c!r}", line, col)
    tokens.append(Token("EOF", "", None, line, col))
    return tokens
