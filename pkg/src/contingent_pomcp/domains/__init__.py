"""Benchmark generators and the named instance catalog."""
from __future__ import annotations

from dataclasses import dataclass, field

from . import blocks, doors, localize, medpks, unix, wumpus
from .common import UnsupportedSize

GENERATORS = {
    "doors": doors.generate,
    "blocks": blocks.generate,
    "unix": unix.generate,
    "medpks": medpks.generate,
    "localize": localize.generate,
    "wumpus": wumpus.generate,
}

SIZE_RANGES = {
    "doors": (3, 9),
    "blocks": (3, 6),
    "unix": (1, 3),
    "medpks": (2, 12),
    "localize": (3, 9),
    "wumpus": (3, 9),
}


@dataclass(frozen=True)
class DomainSpec:
    family: str
    size: int
    seed: int = 0
    params: tuple = field(default=())  # sorted (name, value) pairs

    def kwargs(self) -> dict:
        return dict(self.params)


CATALOG = {
    "doors5": DomainSpec("doors", 5),
    "blocks4": DomainSpec("blocks", 4),
    "localize3": DomainSpec("localize", 3),
    "medpks10": DomainSpec("medpks", 10),
    "unix1": DomainSpec("unix", 1),
    "wumpus5": DomainSpec("wumpus", 5),
}


def generate(spec: DomainSpec) -> tuple[str, str]:
    try:
        gen = GENERATORS[spec.family]
    except KeyError:
        raise ValueError(f"unknown domain family {spec.family!r}") from None
    return gen(spec.size, seed=spec.seed, **spec.kwargs())


def list_instances() -> dict[str, DomainSpec]:
    return dict(CATALOG)


def lookup(name: str) -> DomainSpec:
    try:
        return CATALOG[name]
    except KeyError:
        raise KeyError(f"unknown instance {name!r}; known: {sorted(CATALOG)}") from None


def load(spec: DomainSpec | str):
    """Generate and parse an instance into a Problem."""
    from ..parser import parse

    if isinstance(spec, str):
        spec = lookup(spec)
    return parse(*generate(spec))


def smallest(family: str) -> DomainSpec:
    return DomainSpec(family, SIZE_RANGES[family][0])


__all__ = [
    "CATALOG", "DomainSpec", "GENERATORS", "SIZE_RANGES", "UnsupportedSize",
    "generate", "list_instances", "load", "lookup", "smallest",
]
