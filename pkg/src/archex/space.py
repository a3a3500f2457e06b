"""Design-space algebra: parameters, configurations, enumeration and composition.

Setting values are held as :class:`decimal.Decimal` so that membership tests
are exact (``Decimal("0.1")`` is ``0.1``; the float is not).
"""

from __future__ import annotations

import itertools
import math
from collections.abc import Iterable, Iterator, Mapping, Sequence
from dataclasses import dataclass
from decimal import Decimal

from .errors import (
    DuplicateName,
    DuplicateSetting,
    EmptySettings,
    IncompleteCoverage,
    InvalidSetting,
    NonAscendingSettings,
    OverlappingDomains,
    UnknownParameter,
)

__all__ = [
    "ParameterSpec",
    "DesignSpace",
    "PartialConfiguration",
    "Configuration",
    "to_decimal",
    "validate_space",
    "cardinality",
    "enumerate_partial",
    "compose",
]


def to_decimal(value) -> Decimal:
    """Convert an int, str, float or Decimal to an exact Decimal.

    Floats go through ``repr`` so ``0.1`` becomes ``Decimal("0.1")``.
    """
    if isinstance(value, Decimal):
        return value
    if isinstance(value, bool):
        raise TypeError("boolean is not a numeric setting")
    if isinstance(value, int):
        return Decimal(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"non-finite setting {value!r}")
        return Decimal(repr(value))
    if isinstance(value, str):
        return Decimal(value)
    raise TypeError(f"unsupported setting type {type(value).__name__}")


def format_setting(value: Decimal) -> str:
    """Plain decimal text without exponent: 3200, 1.5, 0.075."""
    text = format(value, "f")
    if "." in text:
        text = text.rstrip("0").rstrip(".")
    return text or "0"


@dataclass(frozen=True)
class ParameterSpec:
    name: str
    settings: tuple[Decimal, ...]

    @property
    def size(self) -> int:
        return len(self.settings)

    @property
    def first(self) -> Decimal:
        return self.settings[0]

    @property
    def last(self) -> Decimal:
        return self.settings[-1]


class PartialConfiguration(Mapping):
    """Immutable assignment of settings to a subset of parameter names.

    Equality and hashing use the name-sorted assignment, so two partial
    configurations built in different orders compare equal.
    """

    __slots__ = ("_data", "_key")

    def __init__(self, assignment: Mapping[str, object] | Iterable[tuple[str, object]] = ()):
        items = assignment.items() if isinstance(assignment, Mapping) else assignment
        data = {}
        for name, value in items:
            data[name] = to_decimal(value)
        self._data = data
        self._key = tuple(sorted(data.items()))

    @classmethod
    def _trusted(cls, data: dict):
        obj = cls.__new__(cls)
        obj._data = data
        obj._key = tuple(sorted(data.items()))
        return obj

    def __getitem__(self, name: str) -> Decimal:
        return self._data[name]

    def __iter__(self) -> Iterator[str]:
        return iter(self._data)

    def __len__(self) -> int:
        return len(self._data)

    def __hash__(self) -> int:
        return hash(self._key)

    def __eq__(self, other) -> bool:
        if isinstance(other, PartialConfiguration):
            return self._key == other._key
        return NotImplemented

    @property
    def key(self) -> tuple[tuple[str, Decimal], ...]:
        """Canonical name-sorted assignment."""
        return self._key

    def __repr__(self) -> str:
        body = ", ".join(f"{k}={format_setting(v)}" for k, v in self._data.items())
        return f"{type(self).__name__}({body})"


class Configuration(PartialConfiguration):
    """A complete assignment: one setting for every parameter of a space.

    Build through :meth:`DesignSpace.configuration` (validated) or
    :func:`compose`.
    """

    __slots__ = ()

    def with_setting(self, name: str, value: Decimal) -> "Configuration":
        if name not in self._data:
            raise UnknownParameter(name)
        data = dict(self._data)
        data[name] = value
        return Configuration._trusted(data)


class DesignSpace:
    """Ordered list of tunable parameters and their setting sets."""

    def __init__(self, parameters: Sequence[ParameterSpec]):
        self.parameters = tuple(parameters)
        self._by_name = {p.name: p for p in self.parameters}
        self._index = {p.name: i for i, p in enumerate(self.parameters)}
        self._members = {p.name: frozenset(p.settings) for p in self.parameters}

    def __repr__(self) -> str:
        sizes = "x".join(str(p.size) for p in self.parameters)
        return f"DesignSpace({', '.join(self.names)}; {sizes})"

    def __eq__(self, other) -> bool:
        if isinstance(other, DesignSpace):
            return self.parameters == other.parameters
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self.parameters)

    @property
    def n(self) -> int:
        return len(self.parameters)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(p.name for p in self.parameters)

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(p.size for p in self.parameters)

    @property
    def cardinality(self) -> int:
        return math.prod(self.sizes)

    def parameter(self, name: str) -> ParameterSpec:
        try:
            return self._by_name[name]
        except KeyError:
            raise UnknownParameter(f"unknown parameter {name!r}") from None

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise UnknownParameter(f"unknown parameter {name!r}") from None

    def check_member(self, name: str, value) -> Decimal:
        value = to_decimal(value)
        if value not in self._members[self.parameter(name).name]:
            raise InvalidSetting(f"{format_setting(value)} is not a setting of {name!r}")
        return value

    def partial(self, assignment: Mapping[str, object]) -> PartialConfiguration:
        data = {name: self.check_member(name, value) for name, value in assignment.items()}
        return PartialConfiguration._trusted(data)

    def configuration(self, assignment: Mapping[str, object]) -> Configuration:
        """Validated complete configuration."""
        extra = [k for k in assignment if k not in self._by_name]
        if extra:
            raise UnknownParameter(f"unknown parameter {extra[0]!r}")
        missing = [p.name for p in self.parameters if p.name not in assignment]
        if missing:
            raise IncompleteCoverage(f"no setting for {', '.join(missing)}")
        data = {p.name: self.check_member(p.name, assignment[p.name]) for p in self.parameters}
        return Configuration._trusted(data)

    def first_configuration(self) -> Configuration:
        return Configuration._trusted({p.name: p.first for p in self.parameters})

    def ordered_values(self, config: Mapping[str, Decimal]) -> tuple[Decimal, ...]:
        return tuple(config[name] for name in self.names)

    def enumerate_partial(self, subset: Sequence[str]) -> Iterator[PartialConfiguration]:
        return enumerate_partial(self, subset)

    def enumerate(self) -> Iterator[Configuration]:
        """Every configuration, last parameter varying fastest."""
        names = self.names
        for values in itertools.product(*(p.settings for p in self.parameters)):
            yield Configuration._trusted(dict(zip(names, values)))


def validate_space(raw_spec: Iterable[tuple[str, Sequence[object]]]) -> DesignSpace:
    """Build a :class:`DesignSpace` from ``(name, settings)`` pairs.

    Settings must be non-empty, free of duplicates and strictly ascending;
    names must be unique.
    """
    params = []
    seen = set()
    for name, settings in raw_spec:
        if not isinstance(name, str) or not name:
            raise DuplicateName(f"parameter name must be a non-empty string, got {name!r}")
        if name in seen:
            raise DuplicateName(f"duplicate parameter name {name!r}")
        seen.add(name)
        values = tuple(to_decimal(v) for v in settings)
        if not values:
            raise EmptySettings(f"parameter {name!r} has no settings")
        if len(set(values)) != len(values):
            dup = next(v for v in values if values.count(v) > 1)
            raise DuplicateSetting(f"parameter {name!r} lists {format_setting(dup)} more than once")
        for a, b in zip(values, values[1:]):
            if not a < b:
                raise NonAscendingSettings(
                    f"settings of {name!r} are not ascending: {format_setting(a)} before {format_setting(b)}"
                )
        params.append(ParameterSpec(name, values))
    if not params:
        raise EmptySettings("design space has no parameters")
    return DesignSpace(params)


def cardinality(space: DesignSpace) -> int:
    return space.cardinality


def enumerate_partial(space: DesignSpace, subset: Sequence[str]) -> Iterator[PartialConfiguration]:
    """Cartesian product over ``subset`` in lexicographic index order.

    The last-listed parameter varies fastest. An empty subset yields a
    single empty partial configuration.
    """
    subset = list(subset)
    specs = [space.parameter(name) for name in subset]
    if len(set(subset)) != len(subset):
        raise OverlappingDomains("subset lists a parameter twice")

    def gen():
        for values in itertools.product(*(s.settings for s in specs)):
            yield PartialConfiguration._trusted(dict(zip(subset, values)))

    return gen()


def compose(a: Mapping[str, Decimal], b: Mapping[str, Decimal], space: DesignSpace) -> Configuration:
    """Union of two disjoint partial configurations covering ``space``."""
    overlap = set(a) & set(b)
    if overlap:
        raise OverlappingDomains(f"both partials assign {', '.join(sorted(overlap))}")
    merged = dict(a)
    merged.update(b)
    return space.configuration(merged)
