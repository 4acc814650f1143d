"""Shared fixtures and independent oracles for the test suite."""

import itertools
import json
import math
from fractions import Fraction

import numpy as np

from treecap.channels import NodeProfile, Pmf
from treecap.network import parse_network


def bsc(q):
    return [[1 - q, q], [q, 1 - q]]


def diamond_doc(q=0.1, r2_bits=1, r3_bits=1):
    """Source 1, noisy relay 2, noiseless relay 3, destination leaves 4, 5."""
    return {
        "nodes": [
            {"id": 1, "parent": None, "alphabet": 2},
            {"id": 2, "parent": 1, "kind": "noisy", "alphabet": 2**r2_bits, "channel": bsc(q)},
            {"id": 3, "parent": 1, "kind": "noiseless", "alphabet": 2**r3_bits},
            {"id": 4, "parent": 2, "kind": "noiseless", "alphabet": 0},
            {"id": 5, "parent": 3, "kind": "noiseless", "alphabet": 0},
        ],
        "destinations": [[4, 5]],
    }


def diamond_network(q=0.1, r2_bits=1, r3_bits=1):
    return parse_network(json.dumps(diamond_doc(q, r2_bits, r3_bits)))


def path3_doc(q=0.1):
    """Source 1 -> noisy relay 2 -> noiseless destination leaf 3."""
    return {
        "nodes": [
            {"id": 1, "parent": None, "alphabet": 2},
            {"id": 2, "parent": 1, "kind": "noisy", "alphabet": 2, "channel": bsc(q)},
            {"id": 3, "parent": 2, "kind": "noiseless", "alphabet": 0},
        ],
        "destinations": [[3]],
    }


def path3_network(q=0.1):
    return parse_network(json.dumps(path3_doc(q)))


CAPTION_DESTINATIONS = [[5, 11, 12, 13], [9, 12, 14], [10]]
DISJOINT_DESTINATIONS = [[5, 9, 10, 11], [12, 13], [14]]


def fig1_doc(q=0.1, destinations=None):
    """14-node example tree; noisy links feed nodes 2, 9, and 12."""
    destinations = [list(d) for d in (CAPTION_DESTINATIONS if destinations is None else destinations)]
    mk = lambda i, p, a, ch=None: {
        "id": i,
        "parent": p,
        "kind": "noisy" if ch else ("noiseless" if p else None),
        "alphabet": a,
        **({"channel": ch} if ch else {}),
    }
    return {
        "nodes": [
            mk(1, None, 2),
            mk(2, 1, 2, bsc(q)),
            mk(3, 1, 2),
            mk(4, 2, 2),
            mk(5, 2, 0),
            mk(6, 2, 2),
            mk(7, 3, 2),
            mk(8, 3, 2),
            mk(9, 4, 0, bsc(q)),
            mk(10, 4, 0),
            mk(11, 6, 0),
            mk(12, 7, 0, bsc(q)),
            mk(13, 7, 0),
            mk(14, 8, 0),
        ],
        "destinations": destinations,
    }


def fig1_network(q=0.1, destinations=None):
    return parse_network(json.dumps(fig1_doc(q, destinations)))


def random_network(rng, max_nodes=10, max_alphabet=3, max_destinations=3, single_destination=False):
    """Random in-class instance: random tree shape, at most one noisy child
    per node, leaves silent, destinations covering all leaves."""
    n = int(rng.integers(2, max_nodes + 1))
    parents = {1: None}
    for k in range(2, n + 1):
        parents[k] = int(rng.integers(1, k))
    children = {k: [] for k in parents}
    for k, p in parents.items():
        if p is not None:
            children[p].append(k)
    alphabets = {
        k: 0 if not children[k] else int(rng.integers(1, max_alphabet + 1)) for k in parents
    }
    noisy = {}
    for k, kids in children.items():
        if kids and rng.random() < 0.6:
            noisy[int(rng.choice(kids))] = int(rng.integers(1, max_alphabet + 1))
    nodes = []
    for k in sorted(parents):
        entry = {"id": k, "parent": parents[k], "alphabet": alphabets[k]}
        if parents[k] is not None:
            if k in noisy:
                rows = rng.dirichlet(np.ones(noisy[k]), size=alphabets[parents[k]])
                entry["kind"] = "noisy"
                entry["channel"] = rows.tolist()
            else:
                entry["kind"] = "noiseless"
        nodes.append(entry)
    leaves = sorted(k for k in parents if not children[k])
    if single_destination:
        dests = [leaves]
    else:
        count = int(rng.integers(1, min(max_destinations, len(leaves)) + 1))
        dests = [[] for _ in range(count)]
        for i, leaf in enumerate(leaves):
            dests[i % count].append(leaf)
        for leaf in leaves:  # occasional overlap: destination sets need not be disjoint
            if rng.random() < 0.15:
                dests[int(rng.integers(0, count))].append(leaf)
        dests = [sorted(set(d)) for d in dests]
    return parse_network(json.dumps({"nodes": nodes, "destinations": dests}))


def random_profiles(rng, net, idx, u_extra=1, yhat_extra=1):
    """Random dense profile assignment for every transmitting node."""
    profiles = {}
    for k in sorted(net.by_id):
        if net.is_leaf(k):
            continue
        x = net.node(k).alphabet
        u = min(x + u_extra, x + 4)
        joint = rng.dirichlet(np.ones(u * x)).reshape(u, x)
        test = None
        nk = idx.noisy_child[k]
        if nk is not None:
            y = net.node(nk).channel.output_size
            h = min(y + yhat_extra, u * y + 2)
            test = rng.dirichlet(np.ones(h), size=(u, y))
        profiles[k] = NodeProfile(joint, test)
    return profiles


def uniform_input(size):
    return Pmf(np.full(size, 1.0 / size))


# ---------------------------------------------------------------------------
# independent oracles
# ---------------------------------------------------------------------------


def brute_force_cuts(net, idx, d):
    """Subset-lattice filter over the reach set: keeps sets satisfying the
    membership conditions and whose members all classify uniquely."""
    g = sorted(idx.reachset_of[d])
    dest = net.destinations[d]
    candidates = [k for k in g if k != 1 and k not in dest]
    found = []
    for r in range(len(candidates) + 1):
        for combo in itertools.combinations(candidates, r):
            s = frozenset(combo) | {1}
            if _is_valid_cut(net, idx, d, s):
                found.append(tuple(sorted(s)))
    return sorted(found, key=lambda s: (len(s), s))


def _is_valid_cut(net, idx, d, s):
    g = set(idx.reachset_of[d])
    dest = net.destinations[d]
    if 1 not in s or (s & dest) or not (s <= g):
        return False
    for k in s:
        if k != 1 and net.node(k).parent not in s:
            return False
        nk = idx.noisy_child[k]
        if nk is not None and nk in s:
            if not (set(idx.noiseless_children[k]) & g) <= s:
                return False
    for k in s:
        z = set(idx.children[k])
        nk = idx.noisy_child[k]
        m_in_g = set(idx.noiseless_children[k]) & g
        n_in_g = {nk} & g if nk is not None else set()
        matches = 0
        if not (z & s) and m_in_g:
            matches += 1
        if nk is not None and nk not in s and m_in_g <= s and n_in_g:
            matches += 1
        if (z & g) <= s:
            matches += 1
        if matches != 1:
            return False
    return True


def dp_source_bound(net, idx, d, constants):
    """Dynamic-programming oracle for the projected source-rate bound:
    the largest rate each subtree supports, folded bottom-up.  Exact
    (Fraction) arithmetic; independent of both the FM elimination and the
    cut enumeration."""
    g = set(idx.reachset_of[d])
    dest = net.destinations[d]
    order = sorted(g - dest, key=lambda k: -idx.level[k])
    best = {}
    for k in order:
        t = constants[k]
        m_in_g = [j for j in idx.noiseless_children[k] if j in g]
        nk = idx.noisy_child[k]
        z_in_g = m_in_g + ([nk] if nk is not None and nk in g else [])
        options = [t.i_uy + t.h_x_given_u]
        if not set(m_in_g) & dest:
            options.append(sum((best[j] for j in m_in_g), Fraction(0)) + t.i_uy + t.i_x_yhat_given_u)
        if not set(z_in_g) & dest:
            options.append(sum((best[j] for j in z_in_g), Fraction(0)) - t.i_y_yhat_given_ux)
        best[k] = min(options)
    return best[1]


def brute_force_node_terms(joint_ux, channel_rows, test):
    """Direct-summation oracle for the four node terms (pure python)."""
    nu, nx = len(joint_ux), len(joint_ux[0])
    ny = len(channel_rows[0]) if channel_rows is not None else 1
    nh = len(test[0][0]) if test is not None else 1
    p = {}
    for u in range(nu):
        for x in range(nx):
            for y in range(ny):
                for h in range(nh):
                    w = 1.0 if channel_rows is None else channel_rows[x][y]
                    t = 1.0 if test is None else test[u][y][h]
                    p[u, x, y, h] = joint_ux[u][x] * w * t

    def ent(group):
        marg = {}
        for key, v in p.items():
            gk = tuple(key[i] for i in group)
            marg[gk] = marg.get(gk, 0.0) + v
        return -sum(v * math.log2(v) for v in marg.values() if v > 0)

    i_uy = ent([0]) + ent([2]) - ent([0, 2])
    h_x_u = ent([0, 1]) - ent([0])
    i_x_h_u = ent([0, 1]) + ent([0, 3]) - ent([0, 1, 3]) - ent([0])
    i_y_h_ux = ent([0, 1, 2]) + ent([0, 1, 3]) - ent([0, 1, 2, 3]) - ent([0, 1])
    if channel_rows is None:
        return 0.0, h_x_u, 0.0, 0.0
    return i_uy, h_x_u, i_x_h_u, i_y_h_ux
