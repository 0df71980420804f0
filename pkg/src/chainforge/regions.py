"""Country-group definitions (e.g. EU27) used to split intra- from extra-region flows."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path


@dataclass(frozen=True)
class RegionDefinition:
    """A named set of ISO-3 country codes."""

    name: str
    members: frozenset[str] = field(default_factory=frozenset)

    def __post_init__(self):
        if not self.members:
            raise ValueError(f"region {self.name!r} has no members")
        bad = sorted(m for m in self.members if len(m) != 3 or not m.isalpha() or not m.isupper())
        if bad:
            raise ValueError(f"region {self.name!r} has non ISO-3 members: {bad}")

    def __contains__(self, code: str) -> bool:
        return code in self.members


def load_region(path: str | Path) -> RegionDefinition:
    """Load a region file: JSON object with ``name`` and ``members`` (ISO-3 list)."""
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    members = raw["members"]
    if len(set(members)) != len(members):
        dupes = sorted({m for m in members if members.count(m) > 1})
        raise ValueError(f"region file {path} has duplicate members: {dupes}")
    return RegionDefinition(name=raw["name"], members=frozenset(members))


def builtin_eu27() -> RegionDefinition:
    """The EU27 region shipped with the package."""
    ref = resources.files("chainforge.data").joinpath("region_eu27.json")
    raw = json.loads(ref.read_text(encoding="utf-8"))
    return RegionDefinition(name=raw["name"], members=frozenset(raw["members"]))
