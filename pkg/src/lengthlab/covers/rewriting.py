"""Knuth-Bendix completion for group presentations under shortlex order.

A completed system is confluent: two words are equal in the group exactly
when they reduce to the same normal form.
"""

from __future__ import annotations

from collections import deque

from .presentation import free_reduce, invert


def shortlex_less(u: tuple, v: tuple) -> bool:
    return (len(u), u) < (len(v), v)


class RewritingSystem:
    """String rewriting system for a group on ``rank`` generators."""

    def __init__(self, rank: int, relators, max_rules: int = 4000, max_pairs: int = 200000):
        self.rank = rank
        self.rules: dict = {}
        self.max_rules = max_rules
        self.max_pairs = max_pairs
        self.complete = False
        self.pairs_checked = 0
        self._lens: list = []
        eqs = deque()
        for a in range(2 * rank):
            eqs.append(((a, a ^ 1), ()))
        for r in relators:
            r = tuple(r)
            if r:
                # r = 1 split in the middle keeps rules short
                h = (len(r) + 1) // 2
                eqs.append((r[:h], invert(r[h:])))
        self._complete(eqs)

    # -- reduction --------------------------------------------------------
    def reduce(self, word) -> tuple:
        rules = self.rules
        lens = self._lens
        out: list = []
        todo = list(reversed(tuple(word)))
        while todo:
            out.append(todo.pop())
            for L in lens:
                if L > len(out):
                    break
                key = tuple(out[-L:])
                rhs = rules.get(key)
                if rhs is not None:
                    del out[-L:]
                    todo.extend(reversed(rhs))
                    break
        return tuple(out)

    def equal(self, u, v) -> bool:
        return self.reduce(tuple(u) + invert(tuple(v))) == ()

    def is_identity(self, word) -> bool:
        return self.reduce(word) == ()

    # -- completion -------------------------------------------------------
    def _orient(self, u, v):
        u, v = self.reduce(u), self.reduce(v)
        if u == v:
            return None
        return (u, v) if shortlex_less(v, u) else (v, u)

    def _add_rule(self, lhs, rhs, queue):
        # drop rules made redundant by the new one
        stale = [l for l in self.rules if _contains(l, lhs)]
        self.rules[lhs] = rhs
        self._refresh()
        for l in stale:
            r = self.rules.pop(l)
            self._refresh()
            queue.append((l, r))
        for l in list(self.rules):
            if l == lhs:
                continue
            r = self.rules[l]
            nr = self.reduce(r)
            if nr != r:
                self.rules[l] = nr

    def _refresh(self):
        self._lens = sorted({len(l) for l in self.rules})

    def _critical_pairs(self, l1, l2):
        r1, r2 = self.rules[l1], self.rules[l2]
        out = []
        # suffix of l1 overlapping a prefix of l2
        for k in range(1, min(len(l1), len(l2))):
            if l1[-k:] == l2[:k]:
                out.append((r1 + l2[k:], l1[:-k] + r2))
        return out

    def _complete(self, eqs):
        while eqs:
            while eqs:
                u, v = eqs.popleft()
                o = self._orient(u, v)
                if o is None:
                    continue
                if len(self.rules) >= self.max_rules:
                    return
                self._add_rule(o[0], o[1], eqs)
            # critical pairs over the current (inter-reduced) rule set
            rules = list(self.rules)
            for l1 in rules:
                for l2 in rules:
                    if l1 not in self.rules or l2 not in self.rules:
                        continue
                    for u, v in self._critical_pairs(l1, l2):
                        self.pairs_checked += 1
                        if self.pairs_checked > self.max_pairs:
                            return
                        if self.reduce(u) != self.reduce(v):
                            eqs.append((u, v))
        self.complete = True


def _contains(word, sub) -> bool:
    if len(sub) > len(word):
        return False
    L = len(sub)
    return any(word[i : i + L] == sub for i in range(len(word) - L + 1))


def free_group_system(rank: int) -> RewritingSystem:
    return RewritingSystem(rank, [])


__all__ = ["RewritingSystem", "free_group_system", "free_reduce", "shortlex_less"]
