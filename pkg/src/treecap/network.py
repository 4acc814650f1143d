"""Tree-network model: parsing, class validation, and derived index sets.

The network class handled here is a rooted tree whose root (node 1) is the
source, every non-root node receives its parent's transmission either
exactly (noiseless child) or through a DMC (noisy child), each parent has
at most one noisy child, and every destination is a set of leaf nodes.
Leaf nodes do not transmit (input alphabet size 0).
"""

import json
from dataclasses import dataclass
from types import MappingProxyType

from .channels import ChannelMatrix
from .errors import NetworkFormatError

__all__ = [
    "NodeSpec",
    "TreeNetwork",
    "DerivedIndex",
    "Violation",
    "ValidationReport",
    "parse_network",
    "validate",
    "derived_sets",
    "tightness_condition",
]


@dataclass(frozen=True)
class NodeSpec:
    """One node: identity, parent link, reception kind, and input alphabet.

    ``channel`` is the observation DMC p(y | x_parent) for a noisy child
    and None for a noiseless child (which receives its parent's symbol
    exactly).  ``alphabet`` is the node's own input alphabet size; 0 means
    the node never transmits and is only allowed at leaves.
    """

    id: int
    parent: int | None
    alphabet: int
    channel: ChannelMatrix | None = None

    def __post_init__(self):
        if self.id < 1:
            raise ValueError(f"node id must be a positive integer, got {self.id}")
        if self.alphabet < 0:
            raise ValueError(f"node {self.id}: alphabet size must be >= 0")

    @property
    def kind(self) -> str:
        if self.parent is None:
            return "source"
        return "noisy" if self.channel is not None else "noiseless"

    def received_alphabet(self, parent_alphabet: int) -> int:
        if self.parent is None:
            return 0
        if self.channel is not None:
            return self.channel.output_size
        return parent_alphabet


class TreeNetwork:
    """A structurally well-formed tree with destination sets.

    Construction checks tree shape and alphabet consistency only; class
    membership (at most one noisy child per node, destinations are leaf
    sets covering all leaves, leaves silent) is checked by :func:`validate`.
    """

    def __init__(self, nodes, destinations):
        nodes = tuple(nodes)
        by_id: dict[int, NodeSpec] = {}
        for n in nodes:
            if n.id in by_id:
                raise NetworkFormatError(f"duplicate node id {n.id}")
            by_id[n.id] = n
        roots = [n for n in nodes if n.parent is None]
        if len(roots) != 1:
            raise NetworkFormatError(f"expected exactly one root node, found {len(roots)}")
        if roots[0].id != 1:
            raise NetworkFormatError(f"the source must be node 1, root is {roots[0].id}")
        if roots[0].channel is not None:
            raise NetworkFormatError("node 1 is the source and cannot have a channel")
        for n in nodes:
            if n.parent is not None and n.parent not in by_id:
                raise NetworkFormatError(f"node {n.id} references unknown parent {n.parent}")
        # reachability from the root doubles as the acyclicity check
        children: dict[int, list[int]] = {n.id: [] for n in nodes}
        for n in nodes:
            if n.parent is not None:
                children[n.parent].append(n.id)
        seen = set()
        stack = [1]
        while stack:
            k = stack.pop()
            seen.add(k)
            stack.extend(children[k])
        orphans = sorted(set(by_id) - seen)
        if orphans:
            raise NetworkFormatError(f"node {orphans[0]} is not reachable from the source")
        for n in nodes:
            if n.channel is not None and n.channel.input_size != by_id[n.parent].alphabet:
                raise NetworkFormatError(
                    f"node {n.id}: channel has {n.channel.input_size} rows but parent "
                    f"{n.parent} has alphabet size {by_id[n.parent].alphabet}"
                )
        dests = []
        for i, d in enumerate(destinations):
            d = frozenset(d)
            unknown = sorted(k for k in d if k not in by_id)
            if unknown:
                raise NetworkFormatError(
                    f"destination {i + 1} references unknown node {unknown[0]}"
                )
            dests.append(d)
        self.nodes = nodes
        self.destinations = tuple(dests)
        self.by_id = MappingProxyType(by_id)
        self._children = MappingProxyType({k: tuple(sorted(v)) for k, v in children.items()})

    @property
    def node_count(self) -> int:
        return len(self.nodes)

    def children(self, k: int) -> tuple[int, ...]:
        return self._children[k]

    def node(self, k: int) -> NodeSpec:
        return self.by_id[k]

    def is_leaf(self, k: int) -> bool:
        return not self._children[k]

    def leaves(self) -> tuple[int, ...]:
        return tuple(sorted(k for k in self.by_id if self.is_leaf(k)))


@dataclass(frozen=True)
class Violation:
    condition: str
    subject: str
    message: str

    def __str__(self):
        return f"{self.subject}: {self.message}"


@dataclass(frozen=True)
class ValidationReport:
    entries: tuple[Violation, ...]

    @property
    def ok(self) -> bool:
        return not self.entries

    def __str__(self):
        if self.ok:
            return "class membership: OK"
        return "\n".join(str(e) for e in self.entries)


def validate(net: TreeNetwork) -> ValidationReport:
    """Check membership in the supported network class.

    Violations are report entries, never exceptions; an empty report means
    the instance is inside the class.
    """
    entries = []
    for k in sorted(net.by_id):
        noisy = [c for c in net.children(k) if net.node(c).channel is not None]
        if len(noisy) > 1:
            entries.append(
                Violation(
                    "one-noisy-child",
                    f"node {k}",
                    f"has {len(noisy)} noisy children {noisy}; at most one is allowed",
                )
            )
        if not net.is_leaf(k) and net.node(k).alphabet == 0:
            entries.append(
                Violation(
                    "silent-parent",
                    f"node {k}",
                    "transmits to children but has an empty input alphabet",
                )
            )
        if net.is_leaf(k) and net.node(k).alphabet != 0:
            entries.append(
                Violation(
                    "transmitting-leaf",
                    f"node {k}",
                    f"is a leaf but has input alphabet size {net.node(k).alphabet}; "
                    "leaves never transmit",
                )
            )
    leaves = set(net.leaves())
    covered = set()
    for i, d in enumerate(net.destinations):
        if not d:
            entries.append(Violation("empty-destination", f"destination {i + 1}", "is empty"))
        non_leaf = sorted(d - leaves)
        if non_leaf:
            entries.append(
                Violation(
                    "non-leaf-destination",
                    f"destination {i + 1}",
                    f"contains non-leaf node(s) {non_leaf}",
                )
            )
        covered |= d
    missing = sorted(leaves - covered)
    if missing:
        entries.append(
            Violation(
                "uncovered-leaves",
                "destinations",
                f"leaf node(s) {missing} belong to no destination",
            )
        )
    return ValidationReport(tuple(entries))


@dataclass(frozen=True)
class DerivedIndex:
    """Precomputed structural sets, all with deterministic sorted order.

    ``reachset_of`` and ``lowest_cover`` are keyed by 0-based destination
    index; node-keyed maps cover every node id.
    """

    children: MappingProxyType
    noisy_child: MappingProxyType
    noiseless_children: MappingProxyType
    leaves_of: MappingProxyType
    subtree_of: MappingProxyType
    level: MappingProxyType
    reachset_of: MappingProxyType
    lowest_cover: MappingProxyType


def derived_sets(net: TreeNetwork) -> DerivedIndex:
    """Build the derived index for a validated network.

    Pure function of the network: equal inputs give identical outputs.
    """
    order = _topological(net)
    level = {1: 0}
    for k in order[1:]:
        level[k] = level[net.node(k).parent] + 1
    noisy_child = {}
    noiseless_children = {}
    for k in net.by_id:
        noisy = [c for c in net.children(k) if net.node(c).channel is not None]
        noisy_child[k] = noisy[0] if noisy else None
        noiseless_children[k] = tuple(c for c in net.children(k) if net.node(c).channel is None)
    leaves_of: dict[int, tuple[int, ...]] = {}
    subtree_of: dict[int, tuple[int, ...]] = {}
    for k in reversed(order):
        if net.is_leaf(k):
            leaves_of[k] = (k,)
            subtree_of[k] = (k,)
        else:
            acc, sub = [], [k]
            for c in net.children(k):
                acc.extend(leaves_of[c])
                sub.extend(subtree_of[c])
            leaves_of[k] = tuple(sorted(acc))
            subtree_of[k] = tuple(sorted(sub))
    reachset = {}
    lowest = {}
    for i, dset in enumerate(net.destinations):
        reachset[i] = tuple(sorted(k for k in net.by_id if dset & set(leaves_of[k])))
        covering = [k for k in net.by_id if dset <= set(leaves_of[k])]
        # covering nodes form a root-to-a_d chain, so the deepest is unique
        lowest[i] = max(covering, key=lambda k: level[k])
    return DerivedIndex(
        children=net._children,
        noisy_child=MappingProxyType(noisy_child),
        noiseless_children=MappingProxyType(noiseless_children),
        leaves_of=MappingProxyType(leaves_of),
        subtree_of=MappingProxyType(subtree_of),
        level=MappingProxyType(level),
        reachset_of=MappingProxyType(reachset),
        lowest_cover=MappingProxyType(lowest),
    )


def _topological(net: TreeNetwork) -> list[int]:
    out, stack = [], [1]
    while stack:
        k = stack.pop()
        out.append(k)
        stack.extend(reversed(net.children(k)))
    return out


def tightness_condition(net: TreeNetwork, idx: DerivedIndex | None = None) -> bool:
    """True iff every destination's lowest covering subtree avoids all
    other destinations, which makes the lower and upper bounds coincide."""
    idx = idx or derived_sets(net)
    for i in range(len(net.destinations)):
        cover_leaves = set(idx.leaves_of[idx.lowest_cover[i]])
        for j, dset in enumerate(net.destinations):
            if i != j and cover_leaves & dset:
                return False
    return True


def parse_network(text: str) -> TreeNetwork:
    """Parse the canonical JSON network document.

    Top-level fields: ``nodes`` (list of {id, parent, kind, alphabet,
    channel}) and ``destinations`` (list of id-lists).  Channel rows are
    decimal probabilities; ``kind`` is "noisy" or "noiseless" (optional
    for the root).  Raises NetworkFormatError with a field location on any
    problem; class membership is deliberately not checked here.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise NetworkFormatError(f"invalid JSON: {e.msg}", f"line {e.lineno}") from e
    if not isinstance(doc, dict):
        raise NetworkFormatError("document must be a JSON object")
    for field_name in ("nodes", "destinations"):
        if field_name not in doc:
            raise NetworkFormatError(f"missing top-level field '{field_name}'")
        if not isinstance(doc[field_name], list):
            raise NetworkFormatError(f"'{field_name}' must be a list")
    nodes = []
    for i, raw in enumerate(doc["nodes"]):
        loc = f"nodes[{i}]"
        if not isinstance(raw, dict):
            raise NetworkFormatError("node entry must be an object", loc)
        try:
            node_id = int(raw["id"])
        except (KeyError, TypeError, ValueError):
            raise NetworkFormatError("missing or non-integer 'id'", loc) from None
        loc = f"nodes[{i}] (id {raw.get('id')})"
        parent = raw.get("parent")
        if parent is not None:
            try:
                parent = int(parent)
            except (TypeError, ValueError):
                raise NetworkFormatError("non-integer 'parent'", loc) from None
        try:
            alphabet = int(raw.get("alphabet", 0))
        except (TypeError, ValueError):
            raise NetworkFormatError("non-integer 'alphabet'", loc) from None
        kind = raw.get("kind")
        channel_rows = raw.get("channel")
        if kind not in (None, "noisy", "noiseless", "source"):
            raise NetworkFormatError(f"unknown kind {kind!r}", loc)
        if kind == "noisy" and channel_rows is None:
            raise NetworkFormatError("kind 'noisy' requires a 'channel' matrix", loc)
        if kind in ("noiseless", "source") and channel_rows is not None:
            raise NetworkFormatError(f"kind {kind!r} must not carry a channel", loc)
        channel = None
        if channel_rows is not None:
            try:
                channel = ChannelMatrix(channel_rows)
            except (ValueError, TypeError) as e:
                raise NetworkFormatError(f"bad channel matrix: {e}", loc) from None
        try:
            nodes.append(NodeSpec(node_id, parent, alphabet, channel))
        except ValueError as e:
            raise NetworkFormatError(str(e), loc) from None
    destinations = []
    for i, raw in enumerate(doc["destinations"]):
        if not isinstance(raw, list) or not all(isinstance(k, int) for k in raw):
            raise NetworkFormatError("must be a list of node ids", f"destinations[{i}]")
        destinations.append(raw)
    return TreeNetwork(nodes, destinations)
