"""Property declarations (``obj::Name(options)``) and their registry."""
from __future__ import annotations

from dataclasses import dataclass, field

from . import expr as ex
from .errors import NoValuesError, PropertyError

# property name -> accepted keyword options
KNOWN_PROPERTIES = {
    "Indices": {"position", "values"},
    "Coordinate": set(),
    "Derivative": set(),
    "PartialDerivative": set(),
    "AntiSymmetric": set(),
    "Symmetric": set(),
    "Depends": set(),
    "Accent": set(),
    "Metric": set(),
    "InverseMetric": set(),
}
_POSITIONAL = {"Depends"}


@dataclass(frozen=True)
class Property:
    name: str
    options: dict = field(default_factory=dict, hash=False, compare=True)
    args: tuple = ()

    def __post_init__(self):
        if self.name not in KNOWN_PROPERTIES:
            raise PropertyError(f"unknown property {self.name}")
        bad = set(self.options) - KNOWN_PROPERTIES[self.name]
        if bad:
            raise PropertyError(f"option(s) {sorted(bad)} not valid for {self.name}")
        if self.args and self.name not in _POSITIONAL:
            raise PropertyError(f"{self.name} takes no positional arguments")
        pos = self.options.get("position")
        if pos is not None and pos not in ("free", "fixed"):
            raise PropertyError(f"position must be free or fixed, not {pos}")

    def label(self) -> str:
        """Short display form used in confirmation lines."""
        if self.name == "Indices" and "position" in self.options:
            return f"Indices(position={self.options['position']})"
        return self.name


def _pattern_matches(pattern: ex.Expr, node: ex.Expr, reg) -> bool:
    if pattern.kind in (ex.DERIV, ex.ACCENT) and not pattern.indices \
            and pattern.args and pattern.args[0].kind == ex.WILD:
        return node.kind == pattern.kind and node.name == pattern.name
    return ex.match(pattern, node, reg) is not None


class PropertyRegistry:
    """Ordered (pattern, property) list; ``attach`` returns a new registry."""

    def __init__(self, entries=()):
        self.entries = tuple(entries)
        self._fixed = {}
        self._coords = []
        self._groups = []
        for pat, prop in self.entries:
            if prop.name == "Indices":
                names = tuple(prop.options.get("names", (pat.name,)))
                if names not in [g for g, _ in self._groups]:
                    self._groups.append((names, prop))
                self._fixed[pat.name] = prop
            elif prop.name == "Coordinate" and pat.kind == ex.SYM and pat.name not in self._coords:
                self._coords.append(pat.name)

    def __repr__(self):
        return f"PropertyRegistry({len(self.entries)} entries)"

    # -- building ----------------------------------------------------------

    def attach(self, pattern: ex.Expr, prop: Property) -> "PropertyRegistry":
        return self.attach_all([pattern], prop)

    def attach_all(self, patterns, prop: Property) -> "PropertyRegistry":
        patterns = list(patterns)
        if prop.name == "Indices":
            opts = dict(prop.options)
            if "values" in opts:
                opts["values"] = tuple(v.name if isinstance(v, ex.Expr) else str(v)
                                       for v in opts["values"])
            prop = Property("Indices", opts)
            # group membership drives the dummy-name pool
            prop.options["names"] = tuple(p.name for p in patterns)
        entries = list(self.entries)
        for pat in patterns:
            self._check(pat, prop, entries)
            entries = [(p, q) for p, q in entries if not (p == pat and q.name == prop.name)]
            entries.append((pat, prop))
        return PropertyRegistry(entries)

    @staticmethod
    def _check(pat, prop, entries):
        if prop.name in ("Metric", "InverseMetric") and len(pat.indices) != 2:
            raise PropertyError(f"{prop.name} needs a rank-2 pattern")
        clash = {"Symmetric": "AntiSymmetric", "AntiSymmetric": "Symmetric"}.get(prop.name)
        if clash and any(p == pat and q.name == clash for p, q in entries):
            raise PropertyError(f"{prop.name} conflicts with {clash} already attached")
        if prop.name == "Indices" and pat.kind != ex.SYM:
            raise PropertyError("Indices attach to plain index names")

    # -- queries -----------------------------------------------------------

    def lookup(self, node: ex.Expr) -> list:
        found = {}
        for pat, prop in self.entries:
            if _pattern_matches(pat, node, self):
                found[prop.name] = prop
        return list(found.values())

    def get(self, node: ex.Expr, name: str):
        for prop in self.lookup(node):
            if prop.name == name:
                return prop
        return None

    def has(self, node: ex.Expr, name: str) -> bool:
        return self.get(node, name) is not None

    def symmetry(self, node: ex.Expr):
        if node.kind != ex.SYM or len(node.indices) < 2:
            return None
        if self.has(node, "AntiSymmetric"):
            return "anti"
        if self.has(node, "Symmetric"):
            return "sym"
        return None

    def depends(self, node: ex.Expr):
        prop = self.get(node, "Depends")
        return None if prop is None else prop.args

    def is_coordinate(self, name: str) -> bool:
        return name in self._coords

    def coordinates(self) -> list:
        return list(self._coords)

    def is_fixed(self, name: str) -> bool:
        prop = self._fixed.get(name)
        return prop is not None and prop.options.get("position") == "fixed"

    def is_index(self, name: str) -> bool:
        return name in self._fixed

    def index_values(self, name: str) -> list:
        prop = self._fixed.get(name)
        if prop is None or prop.options.get("position") != "fixed" or "values" not in prop.options:
            raise NoValuesError(f"index {name} has no declared values")
        return list(prop.options["values"])

    def index_pool(self, name: str) -> list:
        for names, _ in self._groups:
            if name in names:
                return list(names)
        for names, prop in self._groups:
            if prop.options.get("position") != "fixed":
                return list(names)
        if self._groups:
            return list(self._groups[0][0])
        return ex.NULL_REGISTRY.index_pool(name)

    def index_rank(self, name: str):
        pos = 0
        for names, _ in self._groups:
            if name in names:
                return (pos + names.index(name), name)
            pos += len(names)
        if not self._groups:
            return ex.NULL_REGISTRY.index_rank(name)
        return (pos, name)


def index_values(reg: PropertyRegistry, name: str) -> list:
    return reg.index_values(name)


def attach(reg: PropertyRegistry, pattern: ex.Expr, prop: Property) -> PropertyRegistry:
    return reg.attach(pattern, prop)


def lookup(reg: PropertyRegistry, node: ex.Expr) -> list:
    return reg.lookup(node)
