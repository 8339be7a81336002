import logging
import random
from typing import List, Optional, Sequence, Tuple

from app import config
from app.errors import LeftoverPiError
from app.models.process import End, Par, Process, Recv, Res, Send
from app.models.report import GeneratedProcess
from app.models.types import ChanType, Ctx, NuAnnot, Scope, Type, UnitType, Usage, UsagePair
from app.services.algebra_service import DEFAULT_ALGEBRAS, AlgebraSet, in_pair, out_pair, split_pair, zero_pair
from app.services.checker_service import check
from app.services.context_service import consume_var, extend
from app.services.scope_service import var

logger = logging.getLogger(__name__)

GRADED_VALUE_BOUND = 4
MAX_TYPE_DEPTH = 2
MAX_FREE_CHANNELS = 2


class ProcessGenerator:
    """Samples typing-rule applications top-down so the result always checks.

    At a nonzero budget a node is a parallel composition 40% of the time and a
    restriction, input or output 20% of the time each. Bound channels and
    received payloads are drained before their binder closes.
    """

    def __init__(self, seed: int, mix: Sequence[str], algebras: AlgebraSet = DEFAULT_ALGEBRAS):
        self.rng = random.Random(seed)
        self.algebras = algebras
        self.mix = [idx for idx in mix if idx in algebras] or [algebras.default_idx]

    # Values and types

    def usage(self, idx: str) -> Usage:
        alg = self.algebras.resolve(idx)
        return self.rng.choice(alg.samples(GRADED_VALUE_BOUND))

    def pair(self, idx: str) -> UsagePair:
        return UsagePair(alg=idx, input=self.usage(idx), output=self.usage(idx))

    def type(self, depth: int) -> Type:
        if depth == 0 or self.rng.random() < 0.4:
            return UnitType()
        return self.chan_type(depth)

    def chan_type(self, depth: int = MAX_TYPE_DEPTH) -> ChanType:
        payload = self.type(depth - 1)
        idx = self.rng.choice(self.mix)
        if isinstance(payload, UnitType):
            usage = zero_pair(self.algebras.resolve(idx))
        else:
            usage = self.pair(idx)
        return ChanType(payload=payload, usage=usage)

    def root_scope(self) -> Scope:
        scope = Scope()
        for idx in self.mix:
            scope = extend(scope, UnitType(), zero_pair(self.algebras.resolve(idx)))
        for _ in range(self.rng.randint(0, MAX_FREE_CHANNELS)):
            scope = extend(scope, self.chan_type(), self.pair(self.rng.choice(self.mix)))
        return scope

    def cover(self, usage: UsagePair) -> Usage:
        """Smallest multiplicity y with (y, y) able to give `usage`."""
        alg = self.algebras.resolve(usage.alg)
        for y in alg.samples():
            if split_pair(alg, UsagePair(alg=usage.alg, input=y, output=y), usage) is not None:
                return y
        raise LeftoverPiError(f"No multiplicity of '{usage.alg}' covers {usage}")

    # Helpers over scopes

    def _with(self, scope: Scope, ctx: Ctx) -> Scope:
        return scope.model_copy(update={"ctx": ctx})

    def _can_step(self, scope: Scope, i: int, demanded: UsagePair) -> bool:
        if not isinstance(scope.pre[i], ChanType):
            return False
        alg = self.algebras.resolve(scope.idxs[i])
        return split_pair(alg, scope.ctx[i], demanded) is not None

    def _payload_sources(self, scope: Scope, t: ChanType) -> List[int]:
        sources = []
        for j, (pre_j, idx_j, have) in enumerate(zip(scope.pre, scope.idxs, scope.ctx)):
            if pre_j == t.payload and idx_j == t.usage.alg:
                if split_pair(self.algebras.resolve(idx_j), have, t.usage) is not None:
                    sources.append(j)
        return sources

    def _close(self, scope: Scope, body: Process, out: Ctx) -> Tuple[Process, Ctx]:
        """Exhaust position 0 after `body` ran from `scope`."""
        drain, drained = self.drain(self._with(scope, out), [0])
        if isinstance(drain, End):
            return body, drained
        return Par(depth=scope.depth, left=body, right=drain), drained

    # Processes

    def process(self, scope: Scope, budget: int) -> Tuple[Process, Ctx]:
        if budget <= 0:
            return End(depth=scope.depth), scope.ctx
        roll = self.rng.random()
        if roll < 0.4:
            return self._par(scope, budget)
        if roll < 0.6:
            return self._res(scope, budget)
        if roll < 0.8:
            result = self._recv(scope, budget)
        else:
            result = self._send(scope, budget)
        return result if result is not None else self._res(scope, budget)

    def _par(self, scope: Scope, budget: int) -> Tuple[Process, Ctx]:
        left_budget = self.rng.randint(0, budget - 1)
        left, middle = self.process(scope, left_budget)
        right, out = self.process(self._with(scope, middle), budget - 1 - left_budget)
        return Par(depth=scope.depth, left=left, right=right), out

    def _res(self, scope: Scope, budget: int) -> Tuple[Process, Ctx]:
        t = self.chan_type()
        chan_alg = self.rng.choice(self.mix)
        annot = NuAnnot(
            payload_type=t.payload, payload_usage=t.usage, chan_alg=chan_alg, chan_mult=self.usage(chan_alg)
        )
        inner = extend(scope, t, annot.slot_usage)
        body, out = self.process(inner, budget - 1)
        body, out = self._close(inner, body, out)
        return Res(depth=scope.depth, hint="c", annot=annot, body=body), out[1:]

    def _recv(self, scope: Scope, budget: int) -> Optional[Tuple[Process, Ctx]]:
        candidates = [
            i for i in range(scope.depth)
            if isinstance(scope.pre[i], ChanType)
            and self._can_step(scope, i, in_pair(self.algebras.resolve(scope.idxs[i])))
        ]
        if not candidates:
            return None
        i = self.rng.choice(candidates)
        t, after = consume_var(
            scope.pre, scope.idxs, scope.ctx, i, in_pair(self.algebras.resolve(scope.idxs[i])), self.algebras
        )
        inner = extend(self._with(scope, after), t.payload, t.usage)
        body, out = self.process(inner, budget - 1)
        body, out = self._close(inner, body, out)
        return Recv(depth=scope.depth, chan=var(i, scope.depth), hint="x", body=body), out[1:]

    def _send(self, scope: Scope, budget: int) -> Optional[Tuple[Process, Ctx]]:
        candidates = [
            i for i in range(scope.depth)
            if isinstance(scope.pre[i], ChanType)
            and self._can_step(scope, i, out_pair(self.algebras.resolve(scope.idxs[i])))
        ]
        if not candidates:
            return None
        i = self.rng.choice(candidates)
        return self._emit(scope, i, lambda s: self.process(s, budget - 1))

    def _emit(self, scope: Scope, i: int, continuation) -> Optional[Tuple[Process, Ctx]]:
        """Output once on `i`, reusing a payload in scope or creating a fresh channel to send."""
        t, after = consume_var(
            scope.pre, scope.idxs, scope.ctx, i, out_pair(self.algebras.resolve(scope.idxs[i])), self.algebras
        )
        sent = self._with(scope, after)
        sources = self._payload_sources(sent, t)
        if sources:
            j = self.rng.choice(sources)
            _, leftover = consume_var(sent.pre, sent.idxs, sent.ctx, j, t.usage, self.algebras)
            body, out = continuation(self._with(sent, leftover))
            return Send(depth=scope.depth, chan=var(i, scope.depth), payload=var(j, scope.depth), body=body), out
        if not isinstance(t.payload, ChanType):
            return None
        fresh = t.payload
        annot = NuAnnot(
            payload_type=fresh.payload, payload_usage=fresh.usage,
            chan_alg=t.usage.alg, chan_mult=self.cover(t.usage),
        )
        inner = extend(sent, fresh, annot.slot_usage)
        _, leftover = consume_var(inner.pre, inner.idxs, inner.ctx, 0, t.usage, self.algebras)
        body, out = continuation(self._with(inner, leftover))
        body, out = self._close(inner, body, out)
        depth = scope.depth + 1
        send = Send(depth=depth, chan=var(i + 1, depth), payload=var(0, depth), body=body)
        return Res(depth=scope.depth, hint="w", annot=annot, body=send), out[1:]

    def drain(self, scope: Scope, todo: List[int]) -> Tuple[Process, Ctx]:
        """Consume whatever usage is left at the positions in `todo`, in order."""
        if not todo:
            return End(depth=scope.depth), scope.ctx
        pos, rest = todo[0], todo[1:]
        t = scope.pre[pos]
        alg = self.algebras.resolve(scope.idxs[pos])
        have = scope.ctx[pos]
        if have == zero_pair(alg) or not isinstance(t, ChanType):
            return self.drain(scope, rest)

        if have.input != alg.zero and self._can_step(scope, pos, in_pair(alg)):
            _, after = consume_var(scope.pre, scope.idxs, scope.ctx, pos, in_pair(alg), self.algebras)
            inner = extend(self._with(scope, after), t.payload, t.usage)
            if have.output != alg.zero:
                # one input in parallel with the remaining outputs
                body, body_out = self.drain(inner, [0])
                left = Recv(depth=scope.depth, chan=var(pos, scope.depth), hint="x", body=body)
                right, out = self.drain(self._with(scope, body_out[1:]), todo)
                return Par(depth=scope.depth, left=left, right=right), out
            body, body_out = self.drain(inner, [0] + [p + 1 for p in todo])
            return Recv(depth=scope.depth, chan=var(pos, scope.depth), hint="x", body=body), body_out[1:]

        if have.output != alg.zero and self._can_step(scope, pos, out_pair(alg)):
            def resume(inner: Scope) -> Tuple[Process, Ctx]:
                shift = inner.depth - scope.depth
                return self.drain(inner, [p + shift for p in todo])

            emitted = self._emit(scope, pos, resume)
            if emitted is not None:
                return emitted
        return self.drain(scope, rest)


def gen_well_typed(
    seed: int,
    budget: int = config.PROPERTY_BUDGET,
    mix: Sequence[str] = config.DEFAULT_ALGEBRA_MIX,
    algebras: AlgebraSet = DEFAULT_ALGEBRAS,
) -> GeneratedProcess:
    generator = ProcessGenerator(seed, mix, algebras)
    scope = generator.root_scope()
    process, _ = generator.process(scope, budget)
    try:
        check(scope.pre, scope.idxs, scope.ctx, process, algebras)
    except LeftoverPiError as exc:
        logger.warning(f"Generated process for seed {seed} does not check ({exc}); using end")
        process = End(depth=scope.depth)
    return GeneratedProcess(
        seed=seed, budget=budget, pre=scope.pre, idxs=scope.idxs, ctx=scope.ctx, process=process
    )
