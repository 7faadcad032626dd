"""Generic typed object store.

A Database holds named types (with single or multiple inheritance), object
instances identified by monotonically assigned integer ids, and per-object
function bindings.  Everything the engine layers on top (network schema,
query functions, stream bindings, triggers) lives in plain attributes of
the Database so one snapshot captures the whole state.

Value types for declared functions are encoded as:

    "Real" | "Integer" | "CharacterString" | "FunctionRef"
    ("ref", type_name)
    ("tuple", (elem_type, ...))
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

from .errors import (
    ContainmentConflict,
    CyclicHierarchy,
    DuplicateType,
    NameCollision,
    TypeMismatch,
    UnknownFunction,
    UnknownObject,
    UnknownSupertype,
    UnknownType,
)
from .values import FnRef, Ref, type_name_of


@dataclass
class FunctionSig:
    """Declared function (attribute) of a type."""

    name: str
    value_type: Any
    multivalued: bool = False
    kind: str = "stored"


@dataclass
class TypeDef:
    name: str
    supertypes: List[str] = field(default_factory=list)
    functions: List[FunctionSig] = field(default_factory=list)
    type_defaults: Dict[str, Any] = field(default_factory=dict)


@dataclass
class ObjectInstance:
    oid: int
    types: List[str]          # in order of acquisition
    bindings: Dict[str, Any] = field(default_factory=dict)


class Database:
    """Single-writer object database.

    Not safe for concurrent mutation; readers and the writer must be
    serialized externally.
    """

    def __init__(self):
        self.types: Dict[str, TypeDef] = {}
        self.objects: Dict[int, ObjectInstance] = {}
        self.next_oid = 1
        self.names: Dict[str, int] = {}           # script handle -> oid
        self.functions: Dict[str, Any] = {}       # query-language functions (AST)
        self.stream_bindings: Dict[int, Dict[str, Any]] = {}
        self.triggers: list = []
        # derived indexes (rebuilt on snapshot load)
        self._extents: Dict[str, List[int]] = {}  # type -> sorted oids (incl. subtypes)
        self._parents: Dict[int, int] = {}        # containment child -> parent
        self._link_owner: Dict[int, int] = {}     # link -> owning unit
        self._closures: Dict[str, List[str]] = {}
        self._sig_cache: Dict[tuple, Optional[FunctionSig]] = {}
        self._isa_cache: Dict[tuple, bool] = {}
        # hooks: on_set(db, oid, fn, value) before write; on_insert(db, oid) after create
        self.on_set: list = []
        self.on_insert: list = []

    # --- type system -------------------------------------------------------

    def closure(self, type_name: str) -> List[str]:
        """Type plus all supertypes, most-derived first, depth-first."""
        cached = self._closures.get(type_name)
        if cached is not None:
            return cached
        out: List[str] = []
        stack = [type_name]
        while stack:
            t = stack.pop(0)
            if t in out:
                continue
            out.append(t)
            stack = list(self.types[t].supertypes) + stack
        self._closures[type_name] = out
        return out

    def create_type(self, name, supertypes=(), functions=(), type_defaults=None) -> TypeDef:
        supertypes = list(supertypes)
        functions = list(functions)
        if name in supertypes:
            raise CyclicHierarchy(f"type {name} cannot be its own supertype")
        for s in supertypes:
            if s not in self.types:
                raise UnknownSupertype(f"unknown supertype {s}")
        if name in self.types:
            if self._redeclaration_compatible(name, supertypes, functions) and not type_defaults:
                return self.types[name]
            raise DuplicateType(f"type {name} already exists")
        seen = set()
        for f in functions:
            if f.name in seen:
                raise NameCollision(f"function {f.name} declared twice on {name}")
            seen.add(f.name)
            self._check_value_type(f.value_type)
        td = TypeDef(name, supertypes, functions, dict(type_defaults or {}))
        self.types[name] = td
        self._closures.clear()
        self._sig_cache.clear()
        self._isa_cache.clear()
        self._extents.setdefault(name, [])
        return td

    def _redeclaration_compatible(self, name, supertypes, functions) -> bool:
        # Re-declaring a predefined type is a no-op when it agrees with (a
        # subset of) the installed definition; anything else is a duplicate.
        existing = self.types[name]
        if list(existing.supertypes) != supertypes:
            return False
        for f in functions:
            sig = self.declared_on_type(name, f.name)
            if sig is None or sig.value_type != f.value_type or sig.multivalued != f.multivalued:
                return False
        return True

    def _check_value_type(self, vt):
        if vt in ("Real", "Integer", "CharacterString", "FunctionRef"):
            return
        if isinstance(vt, tuple) and len(vt) == 2 and vt[0] == "ref":
            if vt[1] not in self.types:
                raise UnknownType(f"unknown type {vt[1]} in declaration")
            return
        if isinstance(vt, tuple) and len(vt) == 2 and vt[0] == "tuple":
            if not vt[1]:
                raise TypeMismatch("tuple type needs at least one element")
            for elem in vt[1]:
                self._check_value_type(elem)
            return
        raise TypeMismatch(f"bad value type {vt!r}")

    def declared_on_type(self, type_name: str, fn: str) -> Optional[FunctionSig]:
        """Most-derived declaration of fn visible on a type, or None."""
        for t in self.closure(type_name):
            for sig in self.types[t].functions:
                if sig.name == fn:
                    return sig
        return None

    def declared_for(self, obj: ObjectInstance, fn: str) -> Optional[FunctionSig]:
        """Most-derived declaration across the object's types.

        Types are searched in reverse order of acquisition, each followed by
        its supertypes depth-first.
        """
        key = (fn,) + tuple(obj.types)
        try:
            return self._sig_cache[key]
        except KeyError:
            pass
        sig = None
        for t in reversed(obj.types):
            sig = self.declared_on_type(t, fn)
            if sig is not None:
                break
        self._sig_cache[key] = sig
        return sig

    def is_instance(self, oid: int, type_name: str) -> bool:
        obj = self.objects.get(oid)
        if obj is None:
            return False
        key = (type_name,) + tuple(obj.types)
        try:
            return self._isa_cache[key]
        except KeyError:
            result = any(type_name in self.closure(t) for t in obj.types)
            self._isa_cache[key] = result
            return result

    # --- instances -----------------------------------------------------------

    def create_instance(self, type_name: str, initializers: Optional[Dict[str, Any]] = None,
                        fire_triggers: bool = True) -> int:
        if type_name not in self.types:
            raise UnknownType(f"unknown type {type_name}")
        oid = self.next_oid
        obj = ObjectInstance(oid, [type_name])
        coerced = {}
        for fn, v in (initializers or {}).items():
            sig = self.declared_for(obj, fn)
            if sig is None:
                raise UnknownFunction(f"{fn} is not declared on {type_name}")
            coerced[fn] = self.coerce(v, sig)
        self.next_oid = oid + 1
        obj.bindings = coerced
        self.objects[oid] = obj
        for t in self.closure(type_name):
            bisect.insort(self._extents.setdefault(t, []), oid)
        if fire_triggers and self.on_insert:
            try:
                for hook in list(self.on_insert):
                    hook(self, oid)
            except Exception:
                # an insert whose triggers fail never happened: remove the
                # object and everything the trigger chain created after it
                for created in [o for o in self.objects if o >= oid]:
                    if created in self.objects:
                        self.delete_instance(created)
                raise
        return oid

    def add_type(self, oid: int, type_name: str) -> None:
        obj = self._get(oid)
        if type_name not in self.types:
            raise UnknownType(f"unknown type {type_name}")
        if type_name in obj.types:
            return
        obj.types.append(type_name)
        for t in self.closure(type_name):
            ext = self._extents.setdefault(t, [])
            i = bisect.bisect_left(ext, oid)
            if i >= len(ext) or ext[i] != oid:
                ext.insert(i, oid)

    def set_value(self, fn: str, oid: int, value) -> None:
        obj = self._get(oid)
        sig = self.declared_for(obj, fn)
        if sig is None:
            raise UnknownFunction(f"{fn} is not declared on object #{oid}")
        value = self.coerce(value, sig)
        for hook in self.on_set:
            hook(self, oid, fn, value)
        obj.bindings[fn] = value

    def get_value(self, fn: str, oid: int):
        """Instance binding, else most-derived type default, else None."""
        obj = self._get(oid)
        sig = self.declared_for(obj, fn)
        if sig is None:
            raise UnknownFunction(f"{fn} is not declared on object #{oid}")
        if fn in obj.bindings:
            return self.scrub(obj.bindings[fn])
        for t in reversed(obj.types):
            for c in self.closure(t):
                defaults = self.types[c].type_defaults
                if fn in defaults:
                    return self.scrub(defaults[fn])
        return None

    def instances_of(self, type_name: str) -> List[int]:
        if type_name not in self.types:
            raise UnknownType(f"unknown type {type_name}")
        return list(self._extents.get(type_name, []))

    def extent(self, type_name: str) -> List[int]:
        """Read-only view of instances_of for hot loops; do not mutate."""
        if type_name not in self.types:
            raise UnknownType(f"unknown type {type_name}")
        return self._extents.get(type_name, ())

    def delete_instance(self, oid: int) -> None:
        obj = self._get(oid)
        # links pointing out of this object disappear with it
        if not self.is_link_like(obj):
            for link_oid in [l for l, _ in self._iter_links() if self.objects[l].bindings.get("LinkFrom") == Ref(oid)]:
                if link_oid in self.objects:
                    self.delete_instance(link_oid)
            # incoming links are owned by this object's predecessor bag
            for v in list(obj.bindings.values()):
                if isinstance(v, list):
                    for item in v:
                        if isinstance(item, Ref) and self._link_owner.get(item.oid) == oid:
                            if item.oid in self.objects:
                                self.delete_instance(item.oid)
        owner = self._link_owner.pop(oid, None)
        if owner is not None and owner in self.objects:
            bag = self.objects[owner].bindings.get("Predecessor")
            if isinstance(bag, list):
                self.objects[owner].bindings["Predecessor"] = [r for r in bag if r != Ref(oid)]
        obj = self.objects.pop(oid, None)
        if obj is None:
            return
        for t in set(c for tn in obj.types for c in self.closure(tn)):
            ext = self._extents.get(t, [])
            i = bisect.bisect_left(ext, oid)
            if i < len(ext) and ext[i] == oid:
                ext.pop(i)
        self._parents.pop(oid, None)
        for child, parent in [(c, p) for c, p in self._parents.items() if p == oid]:
            del self._parents[child]
        for name, bound in [(n, o) for n, o in self.names.items() if o == oid]:
            del self.names[name]

    def _iter_links(self):
        for oid in self._extents.get("Link", []):
            yield oid, self.objects[oid]

    def is_link_like(self, obj: ObjectInstance) -> bool:
        return "Link" in self.types and any("Link" in self.closure(t) for t in obj.types)

    def _get(self, oid: int) -> ObjectInstance:
        obj = self.objects.get(oid)
        if obj is None:
            raise UnknownObject(f"no object #{oid}")
        return obj

    # --- values -----------------------------------------------------------

    def coerce(self, v, sig: FunctionSig):
        if v is None:
            return None
        if sig.multivalued:
            if not isinstance(v, (list, tuple)):
                raise TypeMismatch(f"{sig.name} is multivalued, got {type_name_of(v)}")
            elem = FunctionSig(sig.name, sig.value_type, False)
            return [self.coerce(x, elem) for x in v]
        return self._coerce_scalar(v, sig.value_type, sig.name)

    def _coerce_scalar(self, v, vt, fname):
        if v is None:
            return None
        if vt == "Real":
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise TypeMismatch(f"{fname} expects Real, got {type_name_of(v)}")
            return float(v)
        if vt == "Integer":
            if isinstance(v, bool) or not isinstance(v, int):
                raise TypeMismatch(f"{fname} expects Integer, got {type_name_of(v)}")
            return v
        if vt == "CharacterString":
            if not isinstance(v, str):
                raise TypeMismatch(f"{fname} expects CharacterString, got {type_name_of(v)}")
            return v
        if vt == "FunctionRef":
            if not isinstance(v, FnRef):
                raise TypeMismatch(f"{fname} expects a function reference, got {type_name_of(v)}")
            return v
        if isinstance(vt, tuple) and vt[0] == "ref":
            if not isinstance(v, Ref):
                raise TypeMismatch(f"{fname} expects a {vt[1]} reference, got {type_name_of(v)}")
            if v.oid not in self.objects:
                raise TypeMismatch(f"{fname}: reference to missing object {v}")
            if not self.is_instance(v.oid, vt[1]):
                raise TypeMismatch(f"{fname} expects a {vt[1]} reference")
            return v
        if isinstance(vt, tuple) and vt[0] == "tuple":
            if not isinstance(v, (list, tuple)) or len(v) != len(vt[1]):
                raise TypeMismatch(f"{fname} expects a tuple of arity {len(vt[1])}")
            return tuple(self._coerce_scalar(x, t, fname) for x, t in zip(v, vt[1]))
        raise TypeMismatch(f"bad declared type {vt!r}")

    def scrub(self, v):
        """Replace references to deleted objects with nulls on read.

        Returns the stored container unchanged (no copy) when nothing needs
        replacing; callers must treat results as read-only.
        """
        if type(v) is Ref:
            return v if v.oid in self.objects else None
        if isinstance(v, list):
            for x in v:
                if (type(x) is Ref and x.oid not in self.objects) \
                        or isinstance(x, (list, tuple)):
                    return [self.scrub(y) for y in v]
            return v
        if isinstance(v, tuple):
            for x in v:
                if (type(x) is Ref and x.oid not in self.objects) \
                        or isinstance(x, (list, tuple)):
                    return tuple(self.scrub(y) for y in v)
            return v
        return v

    # --- containment index (maintained by network-schema hooks) -------------

    def containment_parent(self, oid: int) -> Optional[int]:
        return self._parents.get(oid)

    def set_containment(self, parent: int, children: List[int]) -> None:
        """Re-point the containment parent of `children` to `parent`.

        A unit may have at most one parent; re-parenting away from a
        different live parent is rejected.
        """
        for c in children:
            existing = self._parents.get(c)
            if existing is not None and existing != parent and existing in self.objects:
                raise ContainmentConflict(
                    f"object #{c} is already contained in #{existing}")
        old = [c for c, p in self._parents.items() if p == parent]
        for c in old:
            del self._parents[c]
        for c in children:
            self._parents[c] = parent

    def link_owner(self, link_oid: int) -> Optional[int]:
        return self._link_owner.get(link_oid)

    def set_link_owner(self, link_oid: int, owner: int) -> None:
        existing = self._link_owner.get(link_oid)
        if existing is not None and existing != owner and existing in self.objects:
            raise ContainmentConflict(f"link #{link_oid} already belongs to #{existing}")
        self._link_owner[link_oid] = owner

    # --- names ---------------------------------------------------------------

    def bind_name(self, name: str, oid: int) -> None:
        if name in self.names and self.names[name] in self.objects and self.names[name] != oid:
            raise NameCollision(f"name {name} is already bound")
        self.names[name] = oid

    def lookup_name(self, name: str) -> Optional[int]:
        oid = self.names.get(name)
        if oid is not None and oid in self.objects:
            return oid
        return None

    def name_of(self, oid: int) -> Optional[str]:
        for name, bound in self.names.items():
            if bound == oid:
                return name
        return None
