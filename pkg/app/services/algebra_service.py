import logging
from abc import ABC, abstractmethod
from collections import defaultdict
from itertools import product
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Sequence

from pydantic import BaseModel, ConfigDict

from app import config
from app.errors import AlgebraError, AlgebraLawError, AlgebraMismatch, CtxSplitUndefined, UnknownAlgebra
from app.models.types import Ctx, Usage, UsagePair

logger = logging.getLogger(__name__)

OMEGA = "w"


class UsageAlgebra(ABC):
    """Partial commutative monoid with computable leftovers.

    `split(x, y)` decides the ternary relation x ·= y ⊹ z and returns the
    unique z, or None when y cannot be taken out of x.
    """

    name: str = ""
    zero: Usage
    one: Usage
    finite: bool = True

    @abstractmethod
    def split(self, x: Usage, y: Usage) -> Optional[Usage]:
        ...

    @abstractmethod
    def contains(self, x: object) -> bool:
        ...

    @abstractmethod
    def samples(self, bound: Optional[int] = None) -> List[Usage]:
        """Whole carrier when finite, otherwise the values up to `bound`."""

    def parse(self, text: str) -> Usage:
        value: Usage = int(text) if text.isdigit() else text
        if not self.contains(value):
            raise AlgebraError(f"'{text}' is not a usage of algebra '{self.name}'")
        return value

    def show(self, x: Usage) -> str:
        return str(x)

    def combine(self, y: Usage, z: Usage) -> Optional[Usage]:
        """Smallest sampled x with x ·= y ⊹ z."""
        for x in self.samples():
            if self.split(x, y) == z:
                return x
        return None


class LinearAlgebra(UsageAlgebra):
    name = "lin"
    zero = 0
    one = 1

    _table = {(0, 0): 0, (1, 0): 1, (1, 1): 0}

    def split(self, x, y):
        return self._table.get((x, y))

    def contains(self, x):
        return type(x) is int and x in (0, 1)

    def samples(self, bound=None):
        return [0, 1]


class GradedAlgebra(UsageAlgebra):
    name = "gra"
    zero = 0
    one = 1
    finite = False

    def split(self, x, y):
        if y <= x:
            return x - y
        return None

    def contains(self, x):
        return type(x) is int and x >= 0

    def samples(self, bound=None):
        limit = config.GRADED_SAMPLE_BOUND if bound is None else bound
        return list(range(limit + 1))

    def combine(self, y, z):
        return y + z


class SharedAlgebra(UsageAlgebra):
    name = "sha"
    zero = OMEGA
    one = OMEGA

    def split(self, x, y):
        if x == OMEGA and y == OMEGA:
            return OMEGA
        return None

    def contains(self, x):
        return x == OMEGA

    def samples(self, bound=None):
        return [OMEGA]


class LawViolation(BaseModel):
    model_config = ConfigDict(frozen=True)

    law: str
    witness: tuple


def split(alg: UsageAlgebra, x: Usage, y: Usage) -> Optional[Usage]:
    return alg.split(x, y)


def check_split(alg: UsageAlgebra, x: Usage, y: Usage, z: Usage) -> bool:
    return alg.split(x, y) == z


def check_laws(alg: UsageAlgebra, samples: Optional[Sequence[Usage]] = None) -> List[LawViolation]:
    """Check the seven algebra laws on every combination of `samples`."""
    values = list(alg.samples() if samples is None else samples)
    violations: List[LawViolation] = []
    table: Dict[tuple, Optional[Usage]] = {(x, y): alg.split(x, y) for x, y in product(values, values)}

    for (x, y), z in table.items():
        if z is not None and not alg.contains(z):
            violations.append(LawViolation(law="computeʳ", witness=(x, y, z)))
        if z is None and any(alg.combine(y, w) == x for w in values):
            violations.append(LawViolation(law="computeʳ", witness=(x, y)))

    # x is determined by (y, z), and y by (x, z)
    by_rest = defaultdict(set)
    by_left = defaultdict(set)
    for (x, y), z in table.items():
        if z is not None:
            by_rest[(y, z)].add(x)
            by_left[(x, z)].add(y)
    violations.extend(
        LawViolation(law="unique", witness=(y, z, tuple(sorted(xs, key=str))))
        for (y, z), xs in by_rest.items() if len(xs) > 1
    )
    violations.extend(
        LawViolation(law="uniqueˡ", witness=(x, z, tuple(sorted(ys, key=str))))
        for (x, z), ys in by_left.items() if len(ys) > 1
    )

    for (x, y), z in table.items():
        if z is None:
            continue
        if alg.split(x, z) != y:
            violations.append(LawViolation(law="comm", witness=(x, y, z)))
        for u in values:
            v = alg.split(y, u)
            if v is None:
                continue
            w = alg.split(x, u)
            if w is None or alg.split(w, v) != z:
                violations.append(LawViolation(law="assoc", witness=(x, y, z, u, v)))

    for x in values:
        if alg.split(x, alg.zero) != x:
            violations.append(LawViolation(law="idˡ", witness=(x,)))
    for y in values:
        if alg.split(alg.zero, y) is not None and y != alg.zero:
            violations.append(LawViolation(law="minˡ", witness=(y,)))
    return violations


# Pairs

def zero_pair(alg: UsageAlgebra) -> UsagePair:
    return UsagePair(alg=alg.name, input=alg.zero, output=alg.zero)


def in_pair(alg: UsageAlgebra) -> UsagePair:
    return UsagePair(alg=alg.name, input=alg.one, output=alg.zero)


def out_pair(alg: UsageAlgebra) -> UsagePair:
    return UsagePair(alg=alg.name, input=alg.zero, output=alg.one)


def both_pair(alg: UsageAlgebra) -> UsagePair:
    return UsagePair(alg=alg.name, input=alg.one, output=alg.one)


def pair_in(alg: UsageAlgebra, pair: UsagePair) -> bool:
    return pair.alg == alg.name and alg.contains(pair.input) and alg.contains(pair.output)


def split_pair(alg: UsageAlgebra, x: UsagePair, y: UsagePair) -> Optional[UsagePair]:
    if x.alg != alg.name or y.alg != alg.name:
        raise AlgebraError(f"pairs {x} and {y} do not both belong to '{alg.name}'")
    for pair in (x, y):
        if not pair_in(alg, pair):
            raise AlgebraError(f"pair {pair} holds a value outside '{alg.name}'")
    left = alg.split(x.input, y.input)
    right = alg.split(x.output, y.output)
    if left is None or right is None:
        return None
    return UsagePair(alg=alg.name, input=left, output=right)


def parse_usage(alg: UsageAlgebra, text: str) -> Usage:
    return alg.parse(text)


def show_usage(alg: UsageAlgebra, value: Usage) -> str:
    return alg.show(value)


class AlgebraSet(Mapping[str, UsageAlgebra]):
    """Registered usage algebras by identifier. Frozen: `register` returns a new set."""

    def __init__(self, algebras: Mapping[str, UsageAlgebra]):
        if not algebras:
            raise AlgebraError("At least one usage algebra must be registered")
        self._algebras: Dict[str, UsageAlgebra] = dict(algebras)

    def __getitem__(self, idx: str) -> UsageAlgebra:
        return self._algebras[idx]

    def __iter__(self) -> Iterator[str]:
        return iter(self._algebras)

    def __len__(self) -> int:
        return len(self._algebras)

    def resolve(self, idx: str) -> UsageAlgebra:
        try:
            return self._algebras[idx]
        except KeyError:
            raise UnknownAlgebra(idx) from None

    @property
    def default_idx(self) -> str:
        return next(iter(self._algebras))

    def register(self, idx: str, alg: UsageAlgebra, samples: Optional[Iterable[Usage]] = None) -> "AlgebraSet":
        if alg.name != idx:
            raise AlgebraError(f"Algebra named '{alg.name}' cannot be registered as '{idx}'")
        violations = check_laws(alg, None if samples is None else list(samples))
        if violations:
            first = violations[0]
            logger.warning(f"Rejected algebra '{idx}': {len(violations)} law violations, first {first.law}")
            raise AlgebraLawError(first.law, first.witness)
        return AlgebraSet({**self._algebras, idx: alg})


DEFAULT_ALGEBRAS = AlgebraSet({"lin": LinearAlgebra(), "gra": GradedAlgebra(), "sha": SharedAlgebra()})


def split_ctx(
    gamma: Ctx, delta: Ctx, algebras: AlgebraSet = DEFAULT_ALGEBRAS
) -> Optional[Ctx]:
    """Pointwise split of two usage contexts over the same indices, None when any position fails."""
    try:
        return require_split_ctx(gamma, delta, algebras)
    except CtxSplitUndefined:
        return None


def require_split_ctx(gamma: Ctx, delta: Ctx, algebras: AlgebraSet = DEFAULT_ALGEBRAS) -> Ctx:
    if len(gamma) != len(delta):
        raise AlgebraError(f"Cannot split contexts of lengths {len(gamma)} and {len(delta)}")
    result = []
    for k, (have, want) in enumerate(zip(gamma, delta)):
        if have.alg != want.alg:
            raise AlgebraMismatch(k, have.alg, want.alg)
        left = split_pair(algebras.resolve(have.alg), have, want)
        if left is None:
            raise CtxSplitUndefined(k, have, want)
        result.append(left)
    return tuple(result)


def consumption(gamma: Ctx, delta: Ctx, algebras: AlgebraSet = DEFAULT_ALGEBRAS) -> Optional[Ctx]:
    """What was taken from `gamma` to leave `delta`."""
    return split_ctx(gamma, delta, algebras)
