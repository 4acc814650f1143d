"""Discrete-distribution kernel: entropies, mutual informations, the
per-node information terms entering the cut bounds, and channel capacity
via Blahut-Arimoto.

Conventions used throughout the package:

* all logarithms are base 2 and all rates are in bits,
* ``0 * log 0 = 0`` and ``0 * log(0/0) = 0``,
* distributions are validated to sum to 1 within ``SUM_TOL``.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError, DimensionMismatchError

SUM_TOL = 1e-12

__all__ = [
    "Pmf",
    "ChannelMatrix",
    "NodeProfile",
    "TermValues",
    "entropy",
    "mutual_information",
    "conditional_mutual_information",
    "node_terms",
    "blahut_arimoto",
]


def _frozen(a) -> np.ndarray:
    out = np.array(a, dtype=float)
    out.setflags(write=False)
    return out


def _check_distribution(p: np.ndarray, what: str) -> None:
    if p.size == 0:
        raise ValueError(f"{what} is empty")
    if np.any(p < 0):
        raise ValueError(f"{what} has a negative entry")
    s = float(p.sum())
    if abs(s - 1.0) > SUM_TOL:
        raise ValueError(f"{what} sums to {s!r}, not 1 within {SUM_TOL}")


@dataclass(frozen=True)
class Pmf:
    """Probability mass function over a finite alphabet."""

    probs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "probs", _frozen(self.probs))
        if self.probs.ndim != 1:
            raise ValueError("Pmf expects a 1-d vector")
        _check_distribution(self.probs, "pmf")

    def __len__(self):
        return self.probs.shape[0]


@dataclass(frozen=True)
class ChannelMatrix:
    """Row-stochastic conditional distribution, ``rows[x][y] = p(y|x)``."""

    rows: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "rows", _frozen(self.rows))
        if self.rows.ndim != 2:
            raise ValueError("ChannelMatrix expects a 2-d matrix")
        if self.rows.shape[0] == 0 or self.rows.shape[1] == 0:
            raise ValueError("ChannelMatrix must have at least one row and column")
        if np.any(self.rows < 0):
            raise ValueError("channel matrix has a negative entry")
        bad = np.nonzero(np.abs(self.rows.sum(axis=1) - 1.0) > SUM_TOL)[0]
        if bad.size:
            raise ValueError(f"channel row {bad[0]} is not stochastic")

    @property
    def input_size(self) -> int:
        return self.rows.shape[0]

    @property
    def output_size(self) -> int:
        return self.rows.shape[1]


@dataclass(frozen=True)
class NodeProfile:
    """Per-node distribution choice: a joint input distribution p(u, x)
    and, when the node has a noisy child, a compression test channel
    p(yhat | u, y) applied to that child's observation.

    Cardinality limits enforced at construction: ``|U| <= |X| + 4`` and
    ``|Yhat| <= |U| * |Y| + 2``.
    """

    joint_ux: np.ndarray
    test_channel: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "joint_ux", _frozen(self.joint_ux))
        if self.joint_ux.ndim != 2:
            raise ValueError("joint_ux must be 2-d (u, x)")
        _check_distribution(self.joint_ux, "joint_ux")
        u, x = self.joint_ux.shape
        if u > x + 4:
            raise ValueError(f"|U| = {u} exceeds |X| + 4 = {x + 4}")
        if self.test_channel is not None:
            t = _frozen(self.test_channel)
            object.__setattr__(self, "test_channel", t)
            if t.ndim != 3:
                raise ValueError("test_channel must be 3-d (u, y, yhat)")
            if t.shape[0] != u:
                raise DimensionMismatchError(
                    f"test_channel has {t.shape[0]} u-slices, joint_ux has {u}"
                )
            if np.any(t < 0) or np.any(np.abs(t.sum(axis=2) - 1.0) > SUM_TOL):
                raise ValueError("test_channel slices must be distributions")
            y, yhat = t.shape[1], t.shape[2]
            if yhat > u * y + 2:
                raise ValueError(f"|Yhat| = {yhat} exceeds |U||Y| + 2 = {u * y + 2}")

    @property
    def u_size(self) -> int:
        return self.joint_ux.shape[0]

    @property
    def x_size(self) -> int:
        return self.joint_ux.shape[1]

    @property
    def yhat_size(self) -> int:
        return 0 if self.test_channel is None else self.test_channel.shape[2]


def _clamp_nonneg(v: float, tol: float = 1e-9) -> float:
    # information quantities are nonnegative; tiny negatives are float dust
    if v < 0:
        if v < -tol:
            raise ValueError(f"information quantity came out {v}, below -{tol}")
        return 0.0
    return v


@dataclass(frozen=True)
class TermValues:
    """The four per-node information terms used by the cut bounds, in bits.

    ``i_uy`` and the two yhat-terms are zero for nodes without a noisy child.
    """

    i_uy: float
    h_x_given_u: float
    i_x_yhat_given_u: float
    i_y_yhat_given_ux: float

    def __post_init__(self):
        for name in ("i_uy", "h_x_given_u", "i_x_yhat_given_u", "i_y_yhat_given_ux"):
            object.__setattr__(self, name, _clamp_nonneg(float(getattr(self, name))))

    def as_array(self) -> np.ndarray:
        return np.array(
            [self.i_uy, self.h_x_given_u, self.i_x_yhat_given_u, self.i_y_yhat_given_ux]
        )


def entropy(p) -> float:
    """Shannon entropy in bits; accepts a Pmf or any nonnegative array."""
    a = p.probs if isinstance(p, Pmf) else np.asarray(p, dtype=float)
    a = a.reshape(-1)
    nz = a > 0
    return float(-(a[nz] * np.log2(a[nz])).sum())


def mutual_information(joint) -> float:
    """I(A;B) in bits from a 2-d joint distribution p(a,b)."""
    j = np.asarray(joint, dtype=float)
    if j.ndim != 2:
        raise ValueError("mutual_information expects a 2-d joint")
    return _clamp_nonneg(entropy(j.sum(axis=1)) + entropy(j.sum(axis=0)) - entropy(j))


def conditional_mutual_information(joint_abc) -> float:
    """I(A;B|C) in bits from a 3-d joint distribution p(a,b,c)."""
    j = np.asarray(joint_abc, dtype=float)
    if j.ndim != 3:
        raise ValueError("conditional_mutual_information expects a 3-d joint")
    h_ac = entropy(j.sum(axis=1))
    h_bc = entropy(j.sum(axis=0))
    h_abc = entropy(j)
    h_c = entropy(j.sum(axis=(0, 1)))
    return _clamp_nonneg(h_ac + h_bc - h_abc - h_c)


def joint_tensor(profile: NodeProfile, channel: ChannelMatrix) -> np.ndarray:
    """Full joint p(u, x, y, yhat) = p(u,x) p(y|x) p(yhat|u,y)."""
    if profile.test_channel is None:
        raise DimensionMismatchError("profile has no test channel for a noisy child")
    if channel.input_size != profile.x_size:
        raise DimensionMismatchError(
            f"channel has {channel.input_size} input rows, profile |X| = {profile.x_size}"
        )
    if channel.output_size != profile.test_channel.shape[1]:
        raise DimensionMismatchError(
            f"channel output size {channel.output_size} != test channel |Y| "
            f"{profile.test_channel.shape[1]}"
        )
    return np.einsum(
        "ux,xy,uyh->uxyh", profile.joint_ux, channel.rows, profile.test_channel
    )


def node_terms(
    x_alphabet: int, channel: ChannelMatrix | None, profile: NodeProfile
) -> TermValues:
    """Evaluate the four information terms of a transmitting node.

    ``channel`` is the noisy child's observation channel p(y|x), with rows
    indexed by this node's input alphabet; pass None when the node has no
    noisy child, in which case only H(X|U) is live and the other three
    terms are zero.
    """
    if profile.x_size != x_alphabet:
        raise DimensionMismatchError(
            f"profile |X| = {profile.x_size}, node alphabet = {x_alphabet}"
        )
    h_x_u = entropy(profile.joint_ux) - entropy(profile.joint_ux.sum(axis=1))
    if channel is None:
        if profile.test_channel is not None:
            raise DimensionMismatchError("test channel given but node has no noisy child")
        return TermValues(0.0, h_x_u, 0.0, 0.0)
    if profile.test_channel is None:
        # no compression: treat yhat as the constant symbol
        profile = NodeProfile(
            profile.joint_ux, np.ones((profile.u_size, channel.output_size, 1))
        )
    q = joint_tensor(profile, channel)
    i_uy = mutual_information(q.sum(axis=(1, 3)))
    i_x_yhat_u = conditional_mutual_information(q.sum(axis=2).transpose(1, 2, 0))
    u, x, y, h = q.shape
    q_yh_ux = q.transpose(2, 3, 0, 1).reshape(y, h, u * x)
    i_y_yhat_ux = conditional_mutual_information(q_yh_ux)
    return TermValues(i_uy, h_x_u, i_x_yhat_u, i_y_yhat_ux)


def blahut_arimoto(
    channel: ChannelMatrix,
    tol: float = 1e-9,
    max_iter: int = 10**6,
    _trace: list | None = None,
) -> tuple[float, Pmf]:
    """Capacity of a discrete memoryless channel in bits.

    Alternating maximization with the classical sandwich stopping rule:
    stop once ``max_x D_x - log2(sum_x p(x) 2^{D_x}) <= tol`` where
    ``D_x = D(p(y|x) || p(y))``.  Returns the mutual information of the
    final input, which is within ``tol`` of capacity, together with that
    input.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    w = channel.rows
    mask = w > 0
    logw = np.zeros_like(w)
    np.log2(w, out=logw, where=mask)
    p = np.full(w.shape[0], 1.0 / w.shape[0])
    for _ in range(max_iter):
        q = p @ w
        logq = np.zeros_like(q)
        np.log2(q, out=logq, where=q > 0)
        d = ((logw - logq[None, :]) * w).sum(axis=1)
        upper = float(d.max())
        lower = float(np.log2((p * np.exp2(d)).sum()))
        if _trace is not None:
            _trace.append(float((p * d).sum()))
        p = p * np.exp2(d - d.max())
        p /= p.sum()
        if upper - lower <= tol:
            # I(updated input) >= lower, so it is within tol of capacity
            q = p @ w
            np.log2(q, out=logq, where=q > 0)
            d = ((logw - logq[None, :]) * w).sum(axis=1)
            return max(float((p * d).sum()), 0.0), Pmf(p)
    raise ConvergenceError(
        f"Blahut-Arimoto did not reach tol={tol} within {max_iter} iterations"
    )


# ---------------------------------------------------------------------------
# batched helpers used by the search modules (private API)
# ---------------------------------------------------------------------------


def _batch_entropy(p: np.ndarray) -> np.ndarray:
    """Entropy along all axes but the first, for a (B, ...) stack."""
    flat = p.reshape(p.shape[0], -1)
    terms = np.zeros_like(flat)
    np.log2(flat, out=terms, where=flat > 0)
    return -(flat * terms).sum(axis=1)


def batch_node_quantities(
    joints: np.ndarray, channel: ChannelMatrix | None, test: np.ndarray | None
) -> dict[str, np.ndarray]:
    """Evaluate a stack of joint_ux candidates against one fixed test channel.

    ``joints`` is (B, U, X); ``test`` is (U, Y, H) or (B, U, Y, H).
    Returns batched arrays for the four node terms plus H(X|U,Yhat), which
    the diamond feasibility checks need.
    """
    b = joints.shape[0]
    h_u = _batch_entropy(joints.sum(axis=2))
    h_ux = _batch_entropy(joints)
    out = {
        "h_x_given_u": h_ux - h_u,
        "i_uy": np.zeros(b),
        "i_x_yhat_given_u": np.zeros(b),
        "i_y_yhat_given_ux": np.zeros(b),
        "h_x_given_u_yhat": h_ux - h_u,
    }
    if channel is None:
        return out
    if test is None:
        test = np.ones((joints.shape[1], channel.output_size, 1))
    if test.ndim == 3:
        q = np.einsum("bux,xy,uyh->buxyh", joints, channel.rows, test)
    else:
        q = np.einsum("bux,xy,buyh->buxyh", joints, channel.rows, test)
    p_uy = q.sum(axis=(2, 4))
    out["i_uy"] = (
        _batch_entropy(p_uy.sum(axis=2)) + _batch_entropy(p_uy.sum(axis=1)) - _batch_entropy(p_uy)
    )
    p_uxh = q.sum(axis=3)
    h_uh = _batch_entropy(p_uxh.sum(axis=2))
    h_uxh = _batch_entropy(p_uxh)
    out["i_x_yhat_given_u"] = h_ux + h_uh - h_uxh - h_u
    h_uxy = _batch_entropy(q.sum(axis=4))
    h_uxyh = _batch_entropy(q)
    out["i_y_yhat_given_ux"] = h_uxy + h_uxh - h_uxyh - h_ux
    out["h_x_given_u_yhat"] = h_uxh - h_uh
    return out
