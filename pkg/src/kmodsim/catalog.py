"""Module catalog: the simulated kernel-modules directory.

Catalog files are newline-delimited records ``name|size_kb|deps|tags`` under
a ``MODCAT v1`` header; ``#`` starts a comment line and empty fields are
allowed. Entries named ``*.symbols`` are helper files, not modules, and are
dropped before any validation. Surviving records are kept in bytewise
alphabetical name order; a record's position in that order is the canonical
index used by index files and partition plans.

The reserved tag ``@base`` marks a module as part of the base kernel: it can
never be attached dynamically. Because a non-isolatable region cannot depend
on something that is absent until attached, base status propagates to every
transitive dependency of a ``@base`` module.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace

from .errors import (
    CircularDependency,
    DuplicateModule,
    MalformedRecord,
    UnknownDependency,
)

CATALOG_HEADER = "MODCAT v1"
BASE_TAG = "@base"
SYMBOLS_SUFFIX = ".symbols"

_NAME_RE = re.compile(r"^[A-Za-z0-9._-]+$")


@dataclass(frozen=True)
class ModuleRecord:
    """One loadable module: name, size, dependencies, device-match tags."""

    name: str
    size_kb: int
    deps: tuple[str, ...] = ()
    hw_tags: tuple[str, ...] = ()
    base_kernel_only: bool = False


@dataclass(frozen=True)
class ModuleCatalog:
    """Immutable, alphabetically ordered module set with a validated DAG.

    Safe for concurrent reads; nothing here mutates after construction.
    """

    records: tuple[ModuleRecord, ...]
    index_of: dict[str, int] = field(init=False, compare=False, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "index_of", {r.name: i for i, r in enumerate(self.records)}
        )

    def __len__(self) -> int:
        return len(self.records)

    def __contains__(self, name: str) -> bool:
        return name in self.index_of

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(r.name for r in self.records)

    def record(self, name: str) -> ModuleRecord:
        return self.records[self.index_of[name]]


def parse_catalog(text: str) -> ModuleCatalog:
    """Parse catalog text into a validated, alphabetically ordered catalog.

    ``*.symbols`` entries are discarded first; duplicates, unknown
    dependencies and dependency cycles are rejected. The result does not
    depend on the order of records in the input.
    """
    lines = text.splitlines()
    if not lines or lines[0].strip() != CATALOG_HEADER:
        raise MalformedRecord(f"catalog must start with a '{CATALOG_HEADER}' header line")

    raw: list[ModuleRecord] = []
    for lineno, line in enumerate(lines[1:], start=2):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        raw.append(_parse_record(stripped, lineno))

    records = [r for r in raw if not r.name.endswith(SYMBOLS_SUFFIX)]

    seen: set[str] = set()
    for rec in records:
        if rec.name in seen:
            raise DuplicateModule(f"module {rec.name!r} appears more than once")
        seen.add(rec.name)

    records.sort(key=lambda r: r.name.encode("utf-8"))

    for rec in records:
        for dep in rec.deps:
            if dep not in seen:
                raise UnknownDependency(
                    f"module {rec.name!r} depends on unknown module {dep!r}"
                )

    _reject_cycles(records)
    return ModuleCatalog(tuple(_propagate_base(records)))


def serialize_catalog(catalog: ModuleCatalog) -> str:
    """Render a catalog back to file form (records in canonical order)."""
    lines = [CATALOG_HEADER]
    for rec in catalog.records:
        tags = list(rec.hw_tags)
        if rec.base_kernel_only:
            tags.append(BASE_TAG)
        lines.append(
            f"{rec.name}|{rec.size_kb}|{','.join(rec.deps)}|{','.join(tags)}"
        )
    return "\n".join(lines) + "\n"


def topo_levels(catalog: ModuleCatalog) -> dict[str, int]:
    """Dependency depth of every module, 1-based.

    A module without dependencies sits at level 1; otherwise its level is one
    more than its deepest dependency. Lower levels must attach first.
    """
    levels: dict[str, int] = {}
    for rec in catalog.records:
        _fill_level(catalog, rec.name, levels)
    return levels


def _fill_level(catalog: ModuleCatalog, name: str, levels: dict[str, int]) -> None:
    stack = [name]
    while stack:
        cur = stack[-1]
        if cur in levels:
            stack.pop()
            continue
        deps = catalog.record(cur).deps
        pending = [d for d in deps if d not in levels]
        if pending:
            stack.extend(pending)
            continue
        levels[cur] = 1 + max((levels[d] for d in deps), default=0)
        stack.pop()


def _parse_record(line: str, lineno: int) -> ModuleRecord:
    parts = line.split("|")
    if len(parts) != 4:
        raise MalformedRecord(
            f"line {lineno}: expected 4 '|'-separated fields, got {len(parts)}"
        )
    name = parts[0].strip()
    if not _NAME_RE.match(name):
        raise MalformedRecord(f"line {lineno}: bad module name {name!r}")

    size_text = parts[1].strip()
    try:
        size_kb = int(size_text)
    except ValueError:
        raise MalformedRecord(
            f"line {lineno}: size must be an integer, got {size_text!r}"
        ) from None
    if size_kb < 0:
        raise MalformedRecord(f"line {lineno}: negative size {size_kb}")

    deps = []
    for dep in _split_list(parts[2]):
        if not _NAME_RE.match(dep):
            raise MalformedRecord(f"line {lineno}: bad dependency name {dep!r}")
        deps.append(dep)

    tags = _split_list(parts[3])
    base = BASE_TAG in tags
    hw_tags = tuple(t for t in tags if t != BASE_TAG)

    return ModuleRecord(
        name=name,
        size_kb=size_kb,
        deps=tuple(dict.fromkeys(deps)),
        hw_tags=hw_tags,
        base_kernel_only=base,
    )


def _split_list(text: str) -> list[str]:
    return [item.strip() for item in text.split(",") if item.strip()]


def _reject_cycles(records: list[ModuleRecord]) -> None:
    # Iterative three-color DFS; reports one cycle rotated so that the
    # bytewise-smallest member leads, keeping the error deterministic.
    WHITE, GRAY, BLACK = 0, 1, 2
    by_name = {r.name: r for r in records}
    color = {r.name: WHITE for r in records}

    for root in by_name:
        if color[root] != WHITE:
            continue
        color[root] = GRAY
        path = [root]
        stack = [iter(by_name[root].deps)]
        while stack:
            dep = next(stack[-1], None)
            if dep is None:
                color[path.pop()] = BLACK
                stack.pop()
                continue
            if color[dep] == GRAY:
                cycle = path[path.index(dep):]
                pivot = min(range(len(cycle)), key=lambda i: cycle[i].encode("utf-8"))
                raise CircularDependency(cycle[pivot:] + cycle[:pivot])
            if color[dep] == WHITE:
                color[dep] = GRAY
                path.append(dep)
                stack.append(iter(by_name[dep].deps))


def _propagate_base(records: list[ModuleRecord]) -> list[ModuleRecord]:
    by_name = {r.name: r for r in records}
    base = {r.name for r in records if r.base_kernel_only}
    queue = list(base)
    while queue:
        for dep in by_name[queue.pop()].deps:
            if dep not in base:
                base.add(dep)
                queue.append(dep)
    return [
        r if r.base_kernel_only == (r.name in base) else replace(r, base_kernel_only=True)
        for r in records
    ]
