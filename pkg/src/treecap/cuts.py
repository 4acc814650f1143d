"""Cut enumeration and member classification for one destination.

A valid cut S for destination d is a subset of the destination's reach
set G (nodes whose subtree contains a destination member) such that

* the source is in S and no destination member is,
* S is closed under taking parents,
* if a node's noisy child is in S, all of its noiseless children in G
  are too,
* every member is classifiable (below); sets passing the first three
  conditions but not this one never arise from the inequality-system
  reduction and carry no bound.

Members split into three disjoint classes that decide which terms the
member contributes to the cut value:

* class A: no child inside S, and at least one noiseless child in G
  (or no noisy child in G) -- contributes I(U;Y) + H(X|U);
* class B: noisy child in G but outside S, noiseless G-children all
  inside S -- contributes I(U;Y) + I(X;Yhat|U);
* class C: every G-child inside S -- contributes -I(Y;Yhat|U,X).
"""

from dataclasses import dataclass
from typing import Iterable, Mapping

from .channels import TermValues
from .errors import CutClassificationError
from .network import DerivedIndex, TreeNetwork

__all__ = ["Cut", "enumerate_cuts", "classify", "cut_value"]


@dataclass(frozen=True)
class Cut:
    destination: int
    members: tuple[int, ...]
    class_a: tuple[int, ...]
    class_b: tuple[int, ...]
    class_c: tuple[int, ...]

    def __str__(self):
        tags = {k: "A" for k in self.class_a}
        tags.update({k: "B" for k in self.class_b})
        tags.update({k: "C" for k in self.class_c})
        inner = ", ".join(f"{k}:{tags[k]}" for k in self.members)
        return "{" + inner + "}"


def classify(
    net: TreeNetwork, idx: DerivedIndex, d: int, members: Iterable[int]
) -> tuple[tuple[int, ...], tuple[int, ...], tuple[int, ...]]:
    """Split cut members into the classes A / B / C.

    Raises CutClassificationError if some member fits no class or more
    than one; for sets produced by :func:`enumerate_cuts` that would be an
    internal error.
    """
    s = frozenset(members)
    g = frozenset(idx.reachset_of[d])
    a, b, c = [], [], []
    for k in sorted(s):
        z = set(idx.children[k])
        nk = idx.noisy_child[k]
        m_in_g = set(idx.noiseless_children[k]) & g
        n_in_g = {nk} & g if nk is not None else set()
        matches = []
        if not (z & s) and m_in_g:
            matches.append("A")
        if nk is not None and nk not in s and m_in_g <= s and n_in_g:
            matches.append("B")
        if (z & g) <= s:
            matches.append("C")
        if len(matches) != 1:
            raise CutClassificationError(
                f"cut member {k} of {sorted(s)} for destination {d + 1} matches "
                f"classes {matches or 'none'}"
            )
        (a if matches[0] == "A" else b if matches[0] == "B" else c).append(k)
    return tuple(a), tuple(b), tuple(c)


def enumerate_cuts(net: TreeNetwork, idx: DerivedIndex, d: int) -> list[Cut]:
    """All valid cuts for destination ``d`` (0-based index).

    Depth-first construction: each reached node keeps either none of its
    children, its noiseless G-children, or all of its G-children, and any
    option touching a destination member is discarded.  This honors the
    closure conditions directly instead of filtering the subset lattice,
    so realistic trees enumerate instantly.
    """
    g = frozenset(idx.reachset_of[d])
    dest = net.destinations[d]

    def options(k: int) -> list[tuple[int, ...]]:
        nk = idx.noisy_child[k]
        m_in_g = tuple(c for c in idx.noiseless_children[k] if c in g)
        opts = [()]
        if not set(m_in_g) & dest:
            opts.append(m_in_g)
            if nk is not None and nk in g and nk not in dest:
                opts.append(tuple(sorted(m_in_g + (nk,))))
        return sorted(set(opts))

    cuts: list[frozenset[int]] = []

    def expand(pending: list[int], acc: set[int]):
        if not pending:
            cuts.append(frozenset(acc))
            return
        k, rest = pending[0], pending[1:]
        for kept in options(k):
            expand(rest + list(kept), acc | set(kept))

    if 1 in dest:
        return []
    expand([1], {1})
    out = []
    for s in sorted(cuts, key=lambda s: (len(s), sorted(s))):
        a, b, c = classify(net, idx, d, s)
        out.append(Cut(d, tuple(sorted(s)), a, b, c))
    return out


def cut_value(cut: Cut, terms: Mapping[int, TermValues]) -> float:
    """Signed value of one cut: A-terms plus B-terms minus C-terms.

    May be negative; achievable rates are clamped at zero by callers that
    report them.
    """
    try:
        total = 0.0
        for k in cut.class_a:
            total += terms[k].i_uy + terms[k].h_x_given_u
        for k in cut.class_b:
            total += terms[k].i_uy + terms[k].i_x_yhat_given_u
        for k in cut.class_c:
            total -= terms[k].i_y_yhat_given_ux
    except KeyError as e:
        raise KeyError(f"no term values supplied for cut member {e.args[0]}") from None
    return total
