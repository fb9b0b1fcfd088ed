"""Device inventory and the hardware-support gate for module loading.

Inventory files carry one device description per line under a ``HWINV v1``
header. A module is supported when any of its tags occurs, case-insensitively
and on word boundaries, inside any device string. Modules without tags are
not hardware-gated at all (filesystems, syscall shims) and always pass.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .catalog import ModuleRecord
from .errors import MalformedInventory

INVENTORY_HEADER = "HWINV v1"


@dataclass(frozen=True)
class HardwareInventory:
    """Immutable list of device description strings; order is irrelevant."""

    devices: tuple[str, ...]
    _folded: tuple[str, ...] = field(init=False, compare=False, repr=False)

    def __post_init__(self) -> None:
        for dev in self.devices:
            if not dev or dev != dev.strip():
                raise ValueError(f"device strings must be non-empty and trimmed: {dev!r}")
        object.__setattr__(self, "_folded", tuple(d.casefold() for d in self.devices))

    def __len__(self) -> int:
        return len(self.devices)


def parse_inventory(text: str) -> HardwareInventory:
    """Parse inventory text; one trimmed device per non-comment line."""
    lines = text.splitlines()
    if not lines or lines[0].strip() != INVENTORY_HEADER:
        raise MalformedInventory(
            f"inventory must start with a '{INVENTORY_HEADER}' header line"
        )
    devices = []
    for line in lines[1:]:
        stripped = line.strip()
        if stripped and not stripped.startswith("#"):
            devices.append(stripped)
    return HardwareInventory(tuple(devices))


def check_hardware_support(module: ModuleRecord, inventory: HardwareInventory) -> bool:
    """True when the inventory satisfies the module's device tags.

    An untagged module matches unconditionally; adding devices can therefore
    never turn a supported module into an unsupported one.
    """
    if not module.hw_tags:
        return True
    folded_tags = [t.casefold() for t in module.hw_tags]
    for device in inventory._folded:
        for tag in folded_tags:
            if _contains_word(device, tag):
                return True
    return False


def _contains_word(haystack: str, needle: str) -> bool:
    # Containment with word boundaries on both ends of the match window;
    # word characters are alphanumerics and underscore.
    if not needle:
        return False
    start = 0
    while True:
        i = haystack.find(needle, start)
        if i < 0:
            return False
        end = i + len(needle)
        before_ok = i == 0 or not _is_word_char(haystack[i - 1])
        after_ok = end == len(haystack) or not _is_word_char(haystack[end])
        if before_ok and after_ok:
            return True
        start = i + 1


def _is_word_char(ch: str) -> bool:
    return ch.isalnum() or ch == "_"
