"""Axis spaces and exhaustive situation enumeration.

A situation space is an ordered list of axes, each with a finite ordered
set of value labels. A situation assigns one value to every axis and is
identified by a 1-based id and by a code string built from the first
character of each chosen label (e.g. ``NNYN``).
"""

from __future__ import annotations

import hashlib
import itertools
import json
from dataclasses import dataclass
from typing import IO, Iterable, Sequence

from .errors import SpaceError


@dataclass(frozen=True)
class Axis:
    name: str
    values: tuple[str, ...]


@dataclass(frozen=True)
class SituationSpace:
    axes: tuple[Axis, ...]

    @property
    def cardinality(self) -> int:
        n = 1
        for axis in self.axes:
            n *= len(axis.values)
        return n

    def digest(self) -> str:
        """Stable hex digest of the axis structure, for log/space pairing."""
        canonical = json.dumps(
            [{"name": a.name, "values": list(a.values)} for a in self.axes],
            separators=(",", ":"),
        )
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class Situation:
    id: int
    assignments: tuple[int, ...]
    code: str

    @property
    def name(self) -> str:
        return f"s{self.id}"


def build_space(axes_config: Iterable[dict]) -> SituationSpace:
    """Validate an axis list (as parsed from the axes JSON file) into a space.

    Axis order is preserved. Within one axis the value labels must be unique,
    non-empty, and begin with distinct characters so situation codes stay
    unambiguous; axis names must be unique across the space.
    """
    axes: list[Axis] = []
    seen_names: set[str] = set()
    for pos, entry in enumerate(axes_config):
        try:
            name = entry["name"]
            values = list(entry["values"])
        except (TypeError, KeyError) as exc:
            raise SpaceError(f"axis #{pos + 1}: missing {exc} field") from None
        if not isinstance(name, str) or not name:
            raise SpaceError(f"axis #{pos + 1}: name must be a non-empty string")
        if name in seen_names:
            raise SpaceError(f"axis #{pos + 1} ({name!r}): duplicate axis name")
        seen_names.add(name)
        if len(values) < 2:
            raise SpaceError(f"axis #{pos + 1} ({name!r}): needs at least 2 values, got {len(values)}")
        seen_values: set[str] = set()
        seen_initials: set[str] = set()
        for v in values:
            if not isinstance(v, str) or not v:
                raise SpaceError(f"axis #{pos + 1} ({name!r}): empty value label")
            if v in seen_values:
                raise SpaceError(f"axis #{pos + 1} ({name!r}): duplicate value label {v!r}")
            if v[0] in seen_initials:
                raise SpaceError(
                    f"axis #{pos + 1} ({name!r}): value labels {v!r} and another "
                    f"share first character {v[0]!r}; codes would be ambiguous"
                )
            seen_values.add(v)
            seen_initials.add(v[0])
        axes.append(Axis(name=name, values=tuple(values)))
    if not axes:
        raise SpaceError("axis config defines no axes")
    return SituationSpace(axes=tuple(axes))


def load_axes(stream: IO[str]) -> SituationSpace:
    """Read the ``{"axes": [...]}`` JSON config from an open text stream."""
    try:
        doc = json.load(stream)
    except json.JSONDecodeError as exc:
        raise SpaceError(f"axes file is not valid JSON: {exc}") from None
    if not isinstance(doc, dict) or "axes" not in doc:
        raise SpaceError('axes file must be an object with an "axes" list')
    return build_space(doc["axes"])


def enumerate_situations(space: SituationSpace) -> list[Situation]:
    """All situations in lexicographic order of assignment indices.

    The last axis varies fastest; ids are assigned 1..n in that order, so
    the all-first-values situation is always s1.
    """
    ranges = [range(len(axis.values)) for axis in space.axes]
    out = []
    for i, assignment in enumerate(itertools.product(*ranges), start=1):
        code = "".join(
            space.axes[k].values[j][0] for k, j in enumerate(assignment)
        )
        out.append(Situation(id=i, assignments=assignment, code=code))
    return out


def encode(space: SituationSpace, assignments: Sequence[int]) -> str:
    """Code string for one assignment tuple (first character per chosen label)."""
    if len(assignments) != len(space.axes):
        raise SpaceError(
            f"assignment length {len(assignments)} != number of axes {len(space.axes)}"
        )
    chars = []
    for k, j in enumerate(assignments):
        axis = space.axes[k]
        if not 0 <= j < len(axis.values):
            raise SpaceError(f"axis #{k + 1} ({axis.name!r}): value index {j} out of range")
        chars.append(axis.values[j][0])
    return "".join(chars)


def decode(code: str, space: SituationSpace) -> Situation:
    """Invert :func:`encode`: one character per axis, matched by first letter.

    Raises SpaceError naming the offending axis position on wrong length or
    an unknown character.
    """
    if len(code) != len(space.axes):
        raise SpaceError(
            f"code {code!r} has length {len(code)}, expected {len(space.axes)} (one per axis)"
        )
    assignments = []
    for k, ch in enumerate(code):
        axis = space.axes[k]
        for j, label in enumerate(axis.values):
            if label[0] == ch:
                assignments.append(j)
                break
        else:
            raise SpaceError(
                f"code {code!r}: character {ch!r} at axis #{k + 1} ({axis.name!r}) "
                f"matches no value (choices: {', '.join(v[0] for v in axis.values)})"
            )
    # id = 1 + mixed-radix value of the assignment, last axis fastest
    index = 0
    for k, j in enumerate(assignments):
        index = index * len(space.axes[k].values) + j
    return Situation(id=index + 1, assignments=tuple(assignments), code=code)
