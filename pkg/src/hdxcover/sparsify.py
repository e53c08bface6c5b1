"""Random bipartite vertex splits and edge subsampling of expanders.

Both stages keep the surviving edges' weights and renormalize, so the
spectral module can re-certify the result from scratch.  Trial batches
report how often the sparsified graphs beat the requested thresholds;
degenerate draws (an empty side or edge set) are discarded and counted.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyResult, EmptySide
from .graphs import WGraph
from .spectral import adjacency_spectrum, bipartite_lambda


def split_vertex_sets(vertices, p, rng):
    """Two-phase disjoint sampling with marginal inclusion p on both sides.

    Each vertex enters A independently with probability p; the remainder
    enter B with probability p/(1-p), so P(v in B) is exactly p as well.
    """
    if not 0 < p < 0.5:
        raise ValueError("need 0 < p < 1/2")
    rng = np.random.default_rng(rng)
    a, b = set(), set()
    q = p / (1.0 - p)
    for v in vertices:
        if rng.random() < p:
            a.add(v)
        elif rng.random() < q:
            b.add(v)
    return a, b


@dataclass(frozen=True)
class SplitSample:
    graph: WGraph  # bipartite, renormalized cross-edge measure
    a: frozenset
    b: frozenset
    cross_mass: float  # nu_G of the surviving edges before renormalizing


def bipartite_vertex_split(G, p, rng):
    """Sample disjoint sides and keep the crossing edges."""
    a, b = split_vertex_sets(G.vertices, p, rng)
    if not a or not b:
        raise EmptySide("a side came out empty")
    cross = []
    mass = 0.0
    for (u, v), w in zip(G.edges, G.weights):
        if (u in a and v in b) or (u in b and v in a):
            cross.append((u, v, w))
            mass += w
    if not cross:
        raise EmptySide("no edge crosses the sampled sides")
    return SplitSample(WGraph(cross, sides=(a, b)), frozenset(a), frozenset(b), mass)


@dataclass(frozen=True)
class SubsampleResult:
    graph: WGraph
    kept_edges: int
    dropped_vertices: int


def edge_subsample(H, p, rng):
    """Independent Bernoulli(p) edge retention, weights renormalized."""
    if not 0 < p <= 1:
        raise ValueError("need 0 < p <= 1")
    rng = np.random.default_rng(rng)
    keep = rng.random(H.m) < p
    edges = [
        (u, v, w) for (u, v), w, k in zip(H.edges, H.weights, keep) if k
    ]
    if not edges:
        raise EmptyResult("no edge survived the subsample")
    sides = None
    if H.sides is not None:
        touched = {x for u, v, _ in edges for x in (u, v)}
        sides = (H.sides[0] & touched, H.sides[1] & touched)
    graph = WGraph(edges, sides=sides)
    return SubsampleResult(graph, len(edges), H.n - graph.n)


@dataclass
class TrialReport:
    trials: int
    discarded: int
    p_split: float
    p_edge: float
    lambda_g: float
    min_degree: int
    near_uniform_r: float
    split_bound: float
    edge_threshold: float
    split_lambdas: list
    edge_lambdas: list
    split_ok_fraction: float
    edge_ok_fraction: float
    side_mass_ok_fraction: float
    vertex_mass_ok_fraction: float
    eps: float

    def to_dict(self):
        return {
            "trials": self.trials,
            "discarded": self.discarded,
            "p_split": self.p_split,
            "p_edge": self.p_edge,
            "lambda_g": self.lambda_g,
            "min_degree": self.min_degree,
            "near_uniform_r": self.near_uniform_r,
            "split_bound": self.split_bound,
            "edge_threshold": self.edge_threshold,
            "split_lambdas": self.split_lambdas,
            "edge_lambdas": self.edge_lambdas,
            "split_ok_fraction": self.split_ok_fraction,
            "edge_ok_fraction": self.edge_ok_fraction,
            "side_mass_ok_fraction": self.side_mass_ok_fraction,
            "vertex_mass_ok_fraction": self.vertex_mass_ok_fraction,
            "eps": self.eps,
        }


def near_uniform_r(G):
    """Smallest r bracketing all edge and vertex weights around uniform."""
    r = 1.0
    for w in G.weights:
        r = max(r, w * G.m, 1.0 / (w * G.m))
    for v in G.vertices:
        w = G.vertex_measure(v)
        r = max(r, w * G.n, 1.0 / (w * G.n))
    return r


def _one_trial(G, p_split, p_edge, eps, seed_pair):
    try:
        sample = bipartite_vertex_split(G, p_split, int(seed_pair[0]))
        sub = edge_subsample(sample.graph, p_edge, int(seed_pair[1]))
    except (EmptySide, EmptyResult):
        return None
    lam_split = float(bipartite_lambda(sample.graph))
    lam_edge = float(bipartite_lambda(sub.graph))

    mass_a = sum(G.vertex_measure(v) for v in sample.a)
    mass_b = sum(G.vertex_measure(v) for v in sample.b)
    side_ok = (
        abs(mass_a - p_split) <= eps * p_split
        and abs(mass_b - p_split) <= eps * p_split
    )
    vertex_ok = True
    for v in sample.a:
        total = 2.0 * G.vertex_measure(v)
        into_b = sum(G.weights[i] for nbr, i in G.incident(v) if nbr in sample.b)
        if abs(into_b - p_split * total) >= eps * p_split * total:
            vertex_ok = False
            break
    return lam_split, lam_edge, side_ok, vertex_ok


def sparsify_trial(
    G,
    p_split,
    p_edge,
    trials,
    rng,
    split_factor=100.0,
    edge_threshold=0.95,
    eps=0.1,
    workers=0,
):
    """Run the split-then-subsample pipeline and tally threshold hits.

    Per trial the bipartite expansion of the split graph is compared with
    split_factor/p^3 times the two-sided expansion of G, and the
    subsampled graph's expansion with edge_threshold.  Side masses and
    per-vertex cross masses are also checked within eps*p, mirroring the
    concentration events the analysis conditions on.  Trials draw their
    seeds from the master stream up front, so they are independent and
    may run concurrently (workers > 1) with deterministic aggregation.
    """
    master = np.random.default_rng(rng)
    seeds = master.integers(0, 2**63 - 1, size=2 * trials)
    lam_g = adjacency_spectrum(G).two_sided
    min_degree = min(len(G.neighbors(v)) for v in G.vertices)
    split_bound = split_factor / p_split**3 * lam_g

    pairs = [(seeds[2 * t], seeds[2 * t + 1]) for t in range(trials)]
    if workers and workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(
                pool.map(lambda sp: _one_trial(G, p_split, p_edge, eps, sp), pairs)
            )
    else:
        results = [_one_trial(G, p_split, p_edge, eps, sp) for sp in pairs]

    split_lambdas = [r[0] for r in results if r is not None]
    edge_lambdas = [r[1] for r in results if r is not None]
    side_ok = sum(1 for r in results if r is not None and r[2])
    vertex_ok = sum(1 for r in results if r is not None and r[3])
    discarded = sum(1 for r in results if r is None)

    done = trials - discarded
    return TrialReport(
        trials=trials,
        discarded=discarded,
        p_split=p_split,
        p_edge=p_edge,
        lambda_g=float(lam_g),
        min_degree=min_degree,
        near_uniform_r=float(near_uniform_r(G)),
        split_bound=float(split_bound),
        edge_threshold=edge_threshold,
        split_lambdas=split_lambdas,
        edge_lambdas=edge_lambdas,
        split_ok_fraction=(
            sum(1 for x in split_lambdas if x <= split_bound) / done if done else 0.0
        ),
        edge_ok_fraction=(
            sum(1 for x in edge_lambdas if x <= edge_threshold) / done if done else 0.0
        ),
        side_mass_ok_fraction=side_ok / done if done else 0.0,
        vertex_mass_ok_fraction=vertex_ok / done if done else 0.0,
        eps=eps,
    )
