"""Shared helpers for the test suite."""

import random
from typing import Optional

from synkc.frontend import Abort, IfElse, Loop, Par, Seq


def permute_pars(node, reverse: bool = False, rng: Optional[random.Random] = None):
    """Rebuild the tree with every Par's arms reordered the same way."""

    def perm(arms):
        arms = list(arms)
        if reverse:
            return tuple(reversed(arms))
        assert rng is not None
        rng.shuffle(arms)
        return tuple(arms)

    def rec(n):
        match n:
            case Seq(a, b, span):
                return Seq(rec(a), rec(b), span)
            case Loop(body, span):
                return Loop(rec(body), span)
            case IfElse(c, t, e, span):
                return IfElse(c, rec(t), rec(e), span)
            case Abort(c, body, span, resumed):
                return Abort(c, rec(body), span, resumed)
            case Par(arms, span):
                return Par(perm(tuple(rec(a) for a in arms)), span)
            case _:
                return n

    return rec(node)
