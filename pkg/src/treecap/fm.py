"""Per-node rate inequalities and their exact Fourier-Motzkin reduction.

For one destination, every relevant relay node k admits three upper
bounds on the rate its subtree can support: a decode-only bound, a bound
routing through its noiseless children, and a bound routing through all
children minus the compression penalty.  Projecting the system onto the
source rate must reproduce the min-cut bound exactly; that identity is
what :func:`mincut_equivalence_check` verifies, in exact rational
arithmetic so equality is never a tolerance question.
"""

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from . import cuts as cuts_mod
from .errors import RowCapExceededError
from .network import DerivedIndex, TreeNetwork

__all__ = [
    "RationalTerms",
    "Row",
    "InequalitySystem",
    "lemma2_system",
    "eliminate",
    "mincut_equivalence_check",
    "FmReport",
]

FLOAT_DENOMINATOR = 2**40  # floats entering a system are snapped to this grid


@dataclass(frozen=True)
class RationalTerms:
    """Exact-rational counterpart of channels.TermValues."""

    i_uy: Fraction
    h_x_given_u: Fraction
    i_x_yhat_given_u: Fraction
    i_y_yhat_given_ux: Fraction

    @classmethod
    def from_floats(cls, i_uy, h_x_given_u, i_x_yhat_given_u, i_y_yhat_given_ux):
        snap = lambda v: Fraction(round(v * FLOAT_DENOMINATOR), FLOAT_DENOMINATOR)
        return cls(snap(i_uy), snap(h_x_given_u), snap(i_x_yhat_given_u), snap(i_y_yhat_given_ux))


@dataclass(frozen=True)
class Row:
    """coeffs . r <= const, coefficients and constant exact rationals."""

    coeffs: tuple[tuple[int, Fraction], ...]
    const: Fraction

    def coeff_map(self) -> dict[int, Fraction]:
        return dict(self.coeffs)


def _make_row(coeffs: Mapping[int, Fraction], const) -> Row:
    items = tuple(sorted((v, Fraction(c)) for v, c in coeffs.items() if c != 0))
    return Row(items, Fraction(const))


@dataclass(frozen=True)
class InequalitySystem:
    variables: tuple[int, ...]
    rows: tuple[Row, ...]

    def __post_init__(self):
        declared = set(self.variables)
        for row in self.rows:
            for v, _ in row.coeffs:
                if v not in declared:
                    raise ValueError(f"row references undeclared variable r_{v}")


def lemma2_system(
    net: TreeNetwork,
    idx: DerivedIndex,
    d: int,
    constants: Mapping[int, RationalTerms],
) -> InequalitySystem:
    """Build the three-inequality system over the rates of all relay nodes
    relevant to destination ``d``.

    Destination members support unbounded rates, so their variables are
    omitted and any row that would mention one is dropped as vacuous.
    Nodes outside the reach set support rate zero and never appear.
    """
    g = set(idx.reachset_of[d])
    dest = net.destinations[d]
    variables = tuple(sorted(g - dest))
    rows = []
    for k in variables:
        try:
            t = constants[k]
        except KeyError:
            raise KeyError(f"no constants supplied for node {k}") from None
        m_in_g = [j for j in idx.noiseless_children[k] if j in g]
        nk = idx.noisy_child[k]
        z_in_g = sorted(m_in_g + ([nk] if nk is not None and nk in g else []))
        rows.append(_make_row({k: 1}, t.i_uy + t.h_x_given_u))
        if not set(m_in_g) & dest:
            coeffs = {j: Fraction(-1) for j in m_in_g}
            coeffs[k] = Fraction(1)
            rows.append(_make_row(coeffs, t.i_uy + t.i_x_yhat_given_u))
        if not set(z_in_g) & dest:
            coeffs = {j: Fraction(-1) for j in z_in_g}
            coeffs[k] = Fraction(1)
            rows.append(_make_row(coeffs, -t.i_y_yhat_given_ux))
    return InequalitySystem(variables, _prune(rows))


def _prune(rows: Sequence[Row]) -> tuple[Row, ...]:
    # pairwise dominance on identical coefficient vectors: keep the tightest
    best: dict[tuple, Fraction] = {}
    order: list[tuple] = []
    for row in rows:
        key = row.coeffs
        if key not in best:
            best[key] = row.const
            order.append(key)
        elif row.const < best[key]:
            best[key] = row.const
    return tuple(Row(key, best[key]) for key in order)


def eliminate(
    system: InequalitySystem, drop: Sequence[int], row_cap: int = 200_000
) -> InequalitySystem:
    """Exact Fourier-Motzkin projection eliminating ``drop`` in order.

    Always terminates; raises RowCapExceededError if an intermediate
    system outgrows ``row_cap``.  Idempotent on systems already free of
    the dropped variables.
    """
    unknown = [v for v in drop if v not in system.variables]
    if unknown:
        raise ValueError(f"cannot drop undeclared variable r_{unknown[0]}")
    rows = list(system.rows)
    for v in drop:
        zero, pos, neg = [], [], []
        for row in rows:
            c = row.coeff_map().get(v, Fraction(0))
            if c == 0:
                zero.append(row)
            elif c > 0:
                pos.append(row)
            else:
                neg.append(row)
        combined = []
        for rp in pos:
            cp = rp.coeff_map()
            for rn in neg:
                cn = rn.coeff_map()
                scale_p = -cn[v]
                scale_n = cp[v]
                coeffs = {}
                for key, val in cp.items():
                    coeffs[key] = coeffs.get(key, Fraction(0)) + scale_p * val
                for key, val in cn.items():
                    coeffs[key] = coeffs.get(key, Fraction(0)) + scale_n * val
                assert coeffs.get(v, Fraction(0)) == 0
                combined.append(_make_row(coeffs, scale_p * rp.const + scale_n * rn.const))
        rows = list(_prune(zero + combined))
        if len(rows) > row_cap:
            raise RowCapExceededError(
                f"elimination of r_{v} produced {len(rows)} rows (cap {row_cap})"
            )
    remaining = tuple(x for x in system.variables if x not in set(drop))
    return InequalitySystem(remaining, tuple(rows))


def projected_source_bound(system: InequalitySystem) -> Fraction | None:
    """Tightest upper bound on r_1 in a system already projected onto it.

    Returns None when the projection leaves r_1 unbounded (no rows).
    """
    bounds = []
    for row in system.rows:
        cm = row.coeff_map()
        if set(cm) != {1}:
            raise ValueError(f"system is not projected onto r_1: row {row}")
        if cm[1] <= 0:
            raise ValueError(f"unexpected non-positive r_1 coefficient in {row}")
        bounds.append(row.const / cm[1])
    return min(bounds) if bounds else None


def elimination_order(net: TreeNetwork, idx: DerivedIndex, d: int, keep: int = 1) -> list[int]:
    """Deepest-first order over the destination's relay nodes; keeps
    intermediate row counts small on trees."""
    dest = net.destinations[d]
    nodes = [k for k in sorted(idx.reachset_of[d]) if k != keep and k not in dest]
    return sorted(nodes, key=lambda k: (-idx.level[k], k))


@dataclass(frozen=True)
class FmTrialFailure:
    trial: int
    constants: dict
    projected: Fraction | None
    mincut: Fraction


@dataclass(frozen=True)
class FmReport:
    destination: int
    trials: int
    passes: int
    failures: tuple[FmTrialFailure, ...]

    @property
    def ok(self) -> bool:
        return self.passes == self.trials

    def __str__(self):
        s = f"destination {self.destination + 1}: {self.passes}/{self.trials} exact matches"
        for f in self.failures:
            s += f"\n  trial {f.trial}: projected {f.projected} != min-cut {f.mincut}"
        return s


def draw_rational_terms(
    net: TreeNetwork,
    idx: DerivedIndex,
    rng: random.Random,
    denominator: int = 2**12,
    scale: int = 4,
) -> dict[int, RationalTerms]:
    """Random nonnegative rational term values for every non-leaf node.

    Respects the structure real information terms have: the three
    noisy-observation terms vanish for nodes without a noisy child, and
    I(X;Yhat|U) never exceeds H(X|U) (the projection/min-cut identity
    relies on that ordering at nodes whose noiseless children all sit
    outside the reach set).
    """
    draw = lambda hi: Fraction(rng.randint(0, hi), denominator)
    out = {}
    for k in sorted(net.by_id):
        if net.is_leaf(k):
            continue
        h_x = draw(scale * denominator)
        if idx.noisy_child[k] is None:
            out[k] = RationalTerms(Fraction(0), h_x, Fraction(0), Fraction(0))
        else:
            h_x_grid = int(h_x * denominator)  # exact: h_x is on the grid
            out[k] = RationalTerms(
                draw(scale * denominator),
                h_x,
                Fraction(rng.randint(0, h_x_grid), denominator),
                draw(scale * denominator),
            )
    return out


def mincut_equivalence_check(
    net: TreeNetwork,
    idx: DerivedIndex,
    d: int,
    trials: int,
    seed: int,
    denominator: int = 2**12,
) -> FmReport:
    """Draw random rational term values, reduce the inequality system onto
    the source rate, and compare with the enumerated min-cut value.

    Equality is exact rational equality, trial by trial.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = random.Random(seed)
    cut_list = cuts_mod.enumerate_cuts(net, idx, d)
    order = elimination_order(net, idx, d)
    passes = 0
    failures = []
    for t in range(trials):
        constants = draw_rational_terms(net, idx, rng, denominator)
        system = lemma2_system(net, idx, d, constants)
        projected = eliminate(system, order)
        bound = projected_source_bound(projected)
        best = None
        for cut in cut_list:
            val = Fraction(0)
            for k in cut.class_a:
                val += constants[k].i_uy + constants[k].h_x_given_u
            for k in cut.class_b:
                val += constants[k].i_uy + constants[k].i_x_yhat_given_u
            for k in cut.class_c:
                val -= constants[k].i_y_yhat_given_ux
            if best is None or val < best:
                best = val
        if bound is not None and best is not None and bound == best:
            passes += 1
        else:
            failures.append(FmTrialFailure(t, constants, bound, best))
    return FmReport(d, trials, passes, tuple(failures))
