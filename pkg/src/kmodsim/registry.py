"""Index-file registration: selection bits (v0) and dependency-depth bytes (v1).

An index file is positionally aligned with its catalog: line *i* describes
the module at catalog position *i*. Format v0 stores the user's raw
selection as 0/1 flags and defers every other decision to load time. Format
v1 bakes the expensive decisions into registration: a selected module that
passes the hardware check receives its dependency depth (1 = independent,
2-255 = dependent), and every module reachable through its dependencies is
depth-tagged as well, whether or not it was selected itself. Modules that
stay unselected or fail the hardware check keep value 0 and are never swept
in at load time.

Base-kernel modules are already resident, so they are never registered as
roots; they still receive depth values when a loadable module depends on
them, which keeps the byte ordering rule (dependency value < dependent
value) intact across the whole file.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable

from .catalog import ModuleCatalog
from .errors import (
    ConfigError,
    DepthOverflow,
    PositionMismatch,
    UnknownSelection,
    ValueOutOfRange,
    VersionMismatch,
)
from .hardware import HardwareInventory, check_hardware_support

INDEX_HEADERS = {"v0": "MODINDEX v0", "v1": "MODINDEX v1"}
MAX_DEPTH_VALUE = 255

ALL_LOAD = "all_load"
ALL_SKIP = "all_skip"
FROM_FILE = "from_file"
INTERACTIVE = "interactive"


@dataclass(frozen=True)
class SelectionPolicy:
    """How registration decides which modules the user wants loaded."""

    kind: str
    names: frozenset[str] = frozenset()
    ask: Callable[[str], bool] | None = field(default=None, compare=False)

    @classmethod
    def all_load(cls) -> "SelectionPolicy":
        return cls(ALL_LOAD)

    @classmethod
    def all_skip(cls) -> "SelectionPolicy":
        return cls(ALL_SKIP)

    @classmethod
    def from_file(cls, names: Iterable[str]) -> "SelectionPolicy":
        return cls(FROM_FILE, names=frozenset(names))

    @classmethod
    def interactive(cls, ask: Callable[[str], bool]) -> "SelectionPolicy":
        return cls(INTERACTIVE, ask=ask)


@dataclass(frozen=True)
class IndexFile:
    """Per-module registration outcome, aligned 1:1 with catalog positions."""

    version: str
    entries: tuple[tuple[str, int], ...]

    def values(self) -> tuple[int, ...]:
        return tuple(v for _, v in self.entries)

    def value_of(self, name: str) -> int:
        for entry_name, value in self.entries:
            if entry_name == name:
                return value
        raise KeyError(name)


def resolve_selection(catalog: ModuleCatalog, policy: SelectionPolicy) -> frozenset[str]:
    """Materialize a policy into the set of selected module names.

    Interactive policies are asked once per module, in catalog order.
    """
    if policy.kind == ALL_LOAD:
        return frozenset(catalog.names)
    if policy.kind == ALL_SKIP:
        return frozenset()
    if policy.kind == FROM_FILE:
        unknown = sorted(policy.names - set(catalog.names))
        if unknown:
            raise UnknownSelection(f"selection names unknown modules: {', '.join(unknown)}")
        return policy.names
    if policy.kind == INTERACTIVE:
        if policy.ask is None:
            raise ConfigError("interactive policy needs an ask callback")
        return frozenset(r.name for r in catalog.records if policy.ask(r.name))
    raise ConfigError(f"unknown selection policy {policy.kind!r}")


def register_v0(catalog: ModuleCatalog, policy: SelectionPolicy) -> IndexFile:
    """Record the raw selection as one flag bit per catalog position."""
    selected = resolve_selection(catalog, policy)
    entries = tuple(
        (rec.name, 1 if rec.name in selected else 0) for rec in catalog.records
    )
    return IndexFile("v0", entries)


def register_v1(
    catalog: ModuleCatalog,
    policy: SelectionPolicy,
    inventory: HardwareInventory,
) -> IndexFile:
    """Assign dependency-depth bytes to every loadable, supported selection.

    Each hardware-supported selected module and all of its transitive
    dependencies get their depth; everything else stays 0. Re-encountering a
    module through a later root keeps the larger of the two depths (they are
    always equal on an acyclic catalog).
    """
    selected = resolve_selection(catalog, policy)
    values = {rec.name: 0 for rec in catalog.records}
    depths: dict[str, int] = {}
    for rec in catalog.records:
        if rec.name not in selected or rec.base_kernel_only:
            continue
        if not check_hardware_support(rec, inventory):
            continue
        for member in _dependency_closure(catalog, rec.name):
            values[member] = max(values[member], _depth_of(catalog, member, depths))
    entries = tuple((rec.name, values[rec.name]) for rec in catalog.records)
    return IndexFile("v1", entries)


def write_index(index: IndexFile) -> str:
    """Render an index file: header plus one ``name value`` line per module."""
    lines = [INDEX_HEADERS[index.version]]
    lines.extend(f"{name} {value}" for name, value in index.entries)
    return "\n".join(lines) + "\n"


def read_index(text: str, catalog: ModuleCatalog) -> IndexFile:
    """Parse an index file and validate positional alignment with the catalog."""
    lines = text.splitlines()
    header = lines[0].strip() if lines else ""
    version = next((v for v, h in INDEX_HEADERS.items() if h == header), None)
    if version is None:
        raise VersionMismatch(f"unrecognized index header {header!r}")

    body = [line for line in lines[1:] if line.strip()]
    if len(body) != len(catalog):
        raise PositionMismatch(
            f"index has {len(body)} entries, catalog has {len(catalog)} modules"
        )

    limit = 1 if version == "v0" else MAX_DEPTH_VALUE
    entries = []
    for pos, line in enumerate(body):
        parts = line.split()
        if len(parts) != 2:
            raise PositionMismatch(f"entry {pos}: expected 'name value', got {line!r}")
        name, raw = parts
        if name != catalog.records[pos].name:
            raise PositionMismatch(
                f"entry {pos}: expected module {catalog.records[pos].name!r}, got {name!r}"
            )
        try:
            value = int(raw)
        except ValueError:
            raise ValueOutOfRange(f"entry {pos}: value {raw!r} is not an integer") from None
        if not 0 <= value <= limit:
            raise ValueOutOfRange(
                f"entry {pos}: value {value} outside [0, {limit}] for {version}"
            )
        entries.append((name, value))
    return IndexFile(version, tuple(entries))


def _dependency_closure(catalog: ModuleCatalog, root: str) -> set[str]:
    closure = {root}
    queue = [root]
    while queue:
        for dep in catalog.record(queue.pop()).deps:
            if dep not in closure:
                closure.add(dep)
                queue.append(dep)
    return closure


def _depth_of(catalog: ModuleCatalog, name: str, memo: dict[str, int]) -> int:
    # Post-order walk with an explicit stack; depth is one more than the
    # deepest dependency, and anything past one byte is a hard error.
    stack = [name]
    while stack:
        cur = stack[-1]
        if cur in memo:
            stack.pop()
            continue
        deps = catalog.record(cur).deps
        pending = [d for d in deps if d not in memo]
        if pending:
            stack.extend(pending)
            continue
        depth = 1 + max((memo[d] for d in deps), default=0)
        if depth > MAX_DEPTH_VALUE:
            raise DepthOverflow(
                f"module {cur!r} sits at dependency depth {depth}; "
                f"index values top out at {MAX_DEPTH_VALUE}"
            )
        memo[cur] = depth
        stack.pop()
    return memo[name]
