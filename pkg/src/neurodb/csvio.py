"""CSV import: one instance per data row, in file order.

The header names must match functions declared on the target type; cells
are parsed per the declared value type (Real, Integer or CharacterString).
"""

from __future__ import annotations

import csv

from .errors import CsvParseError, HeaderMismatch, IoError, UnknownType
from .store import Database

_PARSE = {
    "Real": float,
    "Integer": int,
    "CharacterString": str,
}


def import_csv(db: Database, path: str, type_name: str) -> int:
    if type_name not in db.types:
        raise UnknownType(f"unknown type {type_name}")
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise HeaderMismatch(f"{path} has no header row") from None
        header = [h.strip() for h in header]
        parsers = []
        for name in header:
            sig = db.declared_on_type(type_name, name)
            if sig is None or sig.multivalued or sig.value_type not in _PARSE:
                raise HeaderMismatch(
                    f"column {name!r} does not match a scalar function of {type_name}")
            parsers.append(_PARSE[sig.value_type])
        count = 0
        for rownum, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != len(header):
                raise CsvParseError(f"expected {len(header)} cells, got {len(row)}",
                                    rownum)
            inits = {}
            for name, parse, cell in zip(header, parsers, row):
                try:
                    inits[name] = parse(cell.strip())
                except ValueError:
                    raise CsvParseError(
                        f"cannot parse {cell.strip()!r} for column {name}",
                        rownum) from None
            db.create_instance(type_name, inits)
            count += 1
    return count
