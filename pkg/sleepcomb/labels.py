"""Element labels and actions.

Every ground-set element carries a ``Label``. Labels are totally ordered so that
every tie in the library can be broken the same deterministic way:

    Tagged (by index, then 0 < 1 < *)  <  F  <  T  <  Bit (by index, then bit)
    <  Anonymous (by id)

An action is a ``frozenset`` of labels. Actions are compared through
``action_key``, the tuple of their labels in label order, which gives the
label-lexicographic order used for rankings and tie-breaking.

Text syntax: ``i:0``, ``i:1``, ``i:*``, ``F``, ``T``, ``b<i>:<0|1>`` and ``a<k>``.
Actions are written as their labels joined by ``;`` in label order.
"""

import re
from dataclasses import dataclass
from enum import IntEnum
from functools import lru_cache
from typing import AbstractSet, FrozenSet, Iterable, Iterator, Tuple, Union

from sleepcomb.errors import InvalidInstance


class LabelKind(IntEnum):
    TAGGED = 0
    FALSE = 1
    TRUE = 2
    BIT = 3
    ANONYMOUS = 4


class Tag(IntEnum):
    ZERO = 0
    ONE = 1
    STAR = 2

    def __str__(self) -> str:
        return "*" if self is Tag.STAR else str(int(self))


@dataclass(frozen=True, order=True)
class Label:
    """A ground-set element label.

    Build labels with the class constructors rather than the raw fields.
    """

    kind: LabelKind
    index: int = 0
    tag: int = 0

    def __post_init__(self) -> None:
        if self.kind in (LabelKind.TAGGED, LabelKind.BIT) and self.index < 1:
            raise InvalidInstance(f"Label index must be >= 1, got {self.index}")
        if self.kind is LabelKind.ANONYMOUS and self.index < 0:
            raise InvalidInstance(f"Anonymous id must be >= 0, got {self.index}")
        if self.kind is LabelKind.BIT and self.tag not in (0, 1):
            raise InvalidInstance(f"Bit label value must be 0 or 1, got {self.tag}")

    @classmethod
    def tagged(cls, index: int, tag: Union[Tag, int]) -> "Label":
        return cls(LabelKind.TAGGED, index, Tag(tag))

    @classmethod
    def false(cls) -> "Label":
        return cls(LabelKind.FALSE)

    @classmethod
    def true(cls) -> "Label":
        return cls(LabelKind.TRUE)

    @classmethod
    def bit(cls, index: int, value: int) -> "Label":
        return cls(LabelKind.BIT, index, value)

    @classmethod
    def anonymous(cls, ident: int) -> "Label":
        return cls(LabelKind.ANONYMOUS, ident)

    def __str__(self) -> str:
        if self.kind is LabelKind.TAGGED:
            return f"{self.index}:{Tag(self.tag)}"
        if self.kind is LabelKind.FALSE:
            return "F"
        if self.kind is LabelKind.TRUE:
            return "T"
        if self.kind is LabelKind.BIT:
            return f"b{self.index}:{self.tag}"
        return f"a{self.index}"

    def __repr__(self) -> str:
        return f"Label({str(self)!r})"


F = Label.false()
T = Label.true()

Action = FrozenSet[Label]
SleepingSet = FrozenSet[Label]

_LABEL_RE = re.compile(r"^(?:(\d+):([01*])|(F)|(T)|b(\d+):([01])|a(\d+))$")


def parse_label(text: str) -> Label:
    """Parse the text syntax of a single label.

    Raises:
        InvalidInstance: If ``text`` is not a label.
    """
    match = _LABEL_RE.match(text.strip())
    if match is None:
        raise InvalidInstance(f"Not a label: {text!r}")
    index, tag, false, true, bit_index, bit, anon = match.groups()
    if index is not None:
        return Label.tagged(int(index), Tag.STAR if tag == "*" else int(tag))
    if false:
        return F
    if true:
        return T
    if bit_index is not None:
        return Label.bit(int(bit_index), int(bit))
    return Label.anonymous(int(anon))


def make_action(*labels: Union[str, Label]) -> Action:
    """Build an action from labels or label strings: ``make_action("1:0", "T")``."""
    return frozenset(
        parse_label(item) if isinstance(item, str) else item for item in labels
    )


def parse_action(text: str) -> Action:
    """Parse ``;``-joined labels; the empty string is the empty action."""
    if not text.strip():
        return frozenset()
    return make_action(*text.split(";"))


@lru_cache(maxsize=1 << 16)
def _frozen_key(action: FrozenSet[Label]) -> Tuple[Label, ...]:
    return tuple(sorted(action))


def action_key(action: AbstractSet[Label]) -> Tuple[Label, ...]:
    """Sort key giving the label-lexicographic order of actions."""
    if isinstance(action, frozenset):
        return _frozen_key(action)
    return tuple(sorted(action))


def format_action(action: AbstractSet[Label]) -> str:
    return ";".join(str(label) for label in action_key(action))


def format_labels(labels: Iterable[Label]) -> str:
    return ";".join(str(label) for label in sorted(labels))


def sorted_actions(actions: Iterable[Action]) -> list:
    return sorted(actions, key=action_key)


class GroundSet:
    """An ordered ground set of distinct labels."""

    def __init__(self, elements: Iterable[Label]):
        self.elements: Tuple[Label, ...] = tuple(elements)
        self._members = frozenset(self.elements)
        if len(self._members) != len(self.elements):
            raise InvalidInstance("Ground set contains duplicate labels")
        if not self.elements:
            raise InvalidInstance("Ground set must not be empty")

    @property
    def d(self) -> int:
        return len(self.elements)

    @property
    def members(self) -> FrozenSet[Label]:
        return self._members

    def __contains__(self, label: object) -> bool:
        return label in self._members

    def __iter__(self) -> Iterator[Label]:
        return iter(self.elements)

    def __len__(self) -> int:
        return len(self.elements)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, GroundSet) and self.elements == other.elements

    def __hash__(self) -> int:
        return hash(self.elements)

    def __repr__(self) -> str:
        return f"GroundSet({format_labels(self.elements)})"


def special_labels(n: int) -> Tuple[Label, ...]:
    """The 3n+2 labels ``(i,0), (i,1), (i,*)`` for i <= n, then F and T."""
    labels = [Label.tagged(i, tag) for i in range(1, n + 1) for tag in Tag]
    return tuple(labels + [F, T])
