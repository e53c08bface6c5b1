"""Spectra of normalized adjacency operators and expansion certificates.

The random-walk operator A of a weighted graph is self-adjoint under the
vertex-measure inner product, so its spectrum is computed by symmetrizing
with the similarity transform D^{1/2} A D^{-1/2} and running a dense
symmetric eigensolver.  Bipartite expansion is the second singular value
of the analogously symmetrized side-to-side operator.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateColoring,
    NonPositiveAlpha,
    NotBipartite,
    TooLargeForExact,
)
from .graphs import WGraph

TOL = 1e-9


@dataclass(frozen=True)
class SpectralReport:
    """Eigenvalues of the normalized adjacency operator, sorted descending."""

    eigenvalues: tuple
    bipartite_lambda: float | None = None

    def __post_init__(self):
        ev = self.eigenvalues
        if abs(ev[0] - 1.0) > 1e-8:
            raise AssertionError(f"top eigenvalue {ev[0]} != 1")
        if max(abs(e) for e in ev) > 1.0 + 1e-8:
            raise AssertionError("eigenvalue outside [-1, 1]")

    @property
    def one_sided(self):
        return self.eigenvalues[1] if len(self.eigenvalues) > 1 else -1.0

    @property
    def two_sided(self):
        if len(self.eigenvalues) < 2:
            return 0.0
        return max(abs(self.eigenvalues[1]), abs(self.eigenvalues[-1]))


def _symmetrized_matrix(G):
    n = G.n
    vm = G.vertex_measures()
    M = np.zeros((n, n))
    root = np.sqrt(vm)
    for (u, v), w in zip(G.edges, G.weights):
        iu, iv = G.vertex_index(u), G.vertex_index(v)
        val = 0.5 * w / (root[iu] * root[iv])
        M[iu, iv] = val
        M[iv, iu] = val
    return M


def adjacency_spectrum(G):
    """Full spectrum of the normalized adjacency operator of G."""
    eigs = np.linalg.eigvalsh(_symmetrized_matrix(G))[::-1]
    eigs = np.clip(eigs, -1.0, 1.0)
    bip = bipartite_lambda(G) if G.sides is not None else None
    return SpectralReport(tuple(float(e) for e in eigs), bipartite_lambda=bip)


def bipartite_lambda(G):
    """lambda(B): the norm of the side-to-side operator off the constants.

    Computed as the second singular value of the measure-symmetrized
    bipartite operator; the first singular value is always 1.
    """
    if G.sides is None:
        raise NotBipartite("graph has no declared bipartition")
    left = sorted(G.sides[0])
    right = sorted(G.sides[1])
    lpos = {v: i for i, v in enumerate(left)}
    rpos = {v: i for i, v in enumerate(right)}
    lmass = np.array([G.side_measure(v) for v in left])
    rmass = np.array([G.side_measure(v) for v in right])
    M = np.zeros((len(right), len(left)))
    for (u, v), w in zip(G.edges, G.weights):
        if u in lpos:
            a, b = lpos[u], rpos[v]
        else:
            a, b = lpos[v], rpos[u]
        M[b, a] = w / math.sqrt(lmass[a] * rmass[b])
    sv = np.linalg.svd(M, compute_uv=False)
    return float(sv[1]) if len(sv) > 1 else 0.0


def lambda_report(G, mode):
    """The requested expansion constant of G.

    mode is one of "one_sided", "two_sided", "bipartite".
    """
    if mode == "bipartite":
        return bipartite_lambda(G)
    rep = adjacency_spectrum(G)
    if mode == "one_sided":
        return rep.one_sided
    if mode == "two_sided":
        return rep.two_sided
    raise ValueError(f"unknown mode {mode!r}")


# --- high-dimensional expansion ---


@dataclass(frozen=True)
class HdxRow:
    face: tuple
    lambda2: float
    lambda_min: float
    value: float


@dataclass(frozen=True)
class HdxReport:
    threshold: float
    mode: str
    rows: tuple
    passes: bool
    worst_face: tuple
    worst_value: float

    def to_dict(self):
        return {
            "threshold": self.threshold,
            "mode": self.mode,
            "passes": self.passes,
            "worst_face": list(self.worst_face),
            "worst_value": self.worst_value,
            "n_links": len(self.rows),
        }


def _link_row(X, face, mode):
    rep = adjacency_spectrum(X.link(face).one_skeleton())
    value = rep.one_sided if mode == "one_sided" else rep.two_sided
    ev = rep.eigenvalues
    lam2 = ev[1] if len(ev) > 1 else -1.0
    return HdxRow(face, float(lam2), float(ev[-1]), float(value))


def is_hdx(X, lam, mode="two_sided", workers=0, include_empty_face=True):
    """Certify link expansion for every face of dimension -1..d-2.

    Every link skeleton (including the complex's own, unless
    include_empty_face is False) must have expansion at most lam.  Link
    evaluations are independent; workers > 1 runs them concurrently.
    """
    lo = -1 if include_empty_face else 0
    faces = [s for k in range(lo, X.dim - 1) for s in X.faces(k)]
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda s: _link_row(X, s, mode), faces))
    else:
        rows = [_link_row(X, s, mode) for s in faces]
    worst = max(rows, key=lambda r: r.value)
    # comparisons share the library-wide 1e-9 measure tolerance
    return HdxReport(
        threshold=float(lam),
        mode=mode,
        rows=tuple(rows),
        passes=worst.value <= lam + TOL,
        worst_face=worst.face,
        worst_value=worst.value,
    )


def spectra_csv(report):
    """CSV dump of an HdxReport: face id, lambda_2, lambda_n, two_sided."""
    lines = ["face,lambda2,lambda_min,value"]
    for row in report.rows:
        fid = "-".join(str(v) for v in row.face) if row.face else "*"
        lines.append(f"{fid},{row.lambda2!r},{row.lambda_min!r},{row.value!r}")
    return "\n".join(lines) + "\n"


# --- expander mixing discrepancy ---


@dataclass(frozen=True)
class EmlReport:
    alpha: float
    witness: tuple  # (S, T) as vertex tuples
    eml_ratio: float  # discrepancy over the full mixing denominator
    eml_witness: tuple
    exact: bool
    pairs: int


def _subset_sums(values):
    k = len(values)
    out = np.zeros(1 << k)
    for i in range(k):
        step = 1 << i
        out[step : 2 * step] = out[:step] + values[i]
    return out


def _mask_vertices(mask, items):
    return tuple(items[i] for i in range(len(items)) if mask >> i & 1)


def eml_discrepancy(G, strategy="exact", samples=2000, rng=None, exact_limit=14):
    """Worst-case mixing discrepancy alpha over disjoint vertex pairs.

    alpha maximizes |nu(E(S,T)) - nu(S)nu(T)| / sqrt(nu(S)nu(T)); for a
    bipartite graph S and T range over the two sides with per-side
    measures and the full cross-edge mass.  For a general graph the cut
    carries the oriented convention nu(u, v) = nu({u, v})/2, matching the
    vertex measure's normalization (this is what the adjacency operator's
    bilinear form actually computes).  The report also carries the
    discrepancy normalized by the full mixing denominator with its
    (1-nu) factors.  The sampled strategy draws random pairs and reports
    a lower bound on alpha.
    """
    if strategy == "exact":
        return _eml_exact(G, exact_limit)
    if strategy == "sampled":
        return _eml_sampled(G, samples, rng)
    raise ValueError(f"unknown strategy {strategy!r}")


def _pair_scores(cut, nu_s, nu_t):
    prod = nu_s * nu_t
    diff = np.abs(cut - prod)
    alpha = diff / np.sqrt(prod)
    denom = prod * (1.0 - nu_s) * (1.0 - nu_t)
    ratio = np.divide(
        diff, np.sqrt(np.maximum(denom, 0.0)), out=np.zeros_like(diff),
        where=denom > 1e-300,
    )
    return alpha, ratio


def _eml_exact_bipartite(G, limit):
    left = sorted(G.sides[0])
    right = sorted(G.sides[1])
    if len(left) > limit or len(right) > limit:
        raise TooLargeForExact(
            f"sides {len(left)}x{len(right)} exceed the exact limit {limit}"
        )
    lmass = np.array([G.side_measure(v) for v in left])
    rmass = np.array([G.side_measure(v) for v in right])
    W = np.zeros((len(left), len(right)))
    rpos = {v: i for i, v in enumerate(right)}
    lpos = {v: i for i, v in enumerate(left)}
    for (u, v), w in zip(G.edges, G.weights):
        if u in lpos:
            W[lpos[u], rpos[v]] = w
        else:
            W[lpos[v], rpos[u]] = w
    t_sums = _subset_sums(rmass)
    best = (-1.0, None, None)
    best_ratio = (-1.0, None, None)
    pairs = 0
    for smask in range(1, 1 << len(left)):
        srows = [i for i in range(len(left)) if smask >> i & 1]
        nu_s = lmass[srows].sum()
        cut = _subset_sums(W[srows].sum(axis=0))
        alpha, ratio = _pair_scores(cut[1:], nu_s, t_sums[1:])
        pairs += len(alpha)
        i = int(np.argmax(alpha))
        if alpha[i] > best[0]:
            best = (float(alpha[i]), smask, i + 1)
        j = int(np.argmax(ratio))
        if ratio[j] > best_ratio[0]:
            best_ratio = (float(ratio[j]), smask, j + 1)
    wit = (_mask_vertices(best[1], left), _mask_vertices(best[2], right))
    rwit = (_mask_vertices(best_ratio[1], left), _mask_vertices(best_ratio[2], right))
    return EmlReport(best[0], wit, best_ratio[0], rwit, True, pairs)


def _eml_exact(G, limit):
    if G.sides is not None:
        return _eml_exact_bipartite(G, limit)
    verts = list(G.vertices)
    n = len(verts)
    if n > limit:
        raise TooLargeForExact(f"{n} vertices exceed the exact limit {limit}")
    vmass = G.vertex_measures()
    W = np.zeros((n, n))
    for (u, v), w in zip(G.edges, G.weights):
        iu, iv = G.vertex_index(u), G.vertex_index(v)
        W[iu, iv] = W[iv, iu] = w
    best = (-1.0, None, None)
    best_ratio = (-1.0, None, None)
    pairs = 0
    for smask in range(1, (1 << n) - 1):
        srows = [i for i in range(n) if smask >> i & 1]
        comp = [i for i in range(n) if not smask >> i & 1]
        nu_s = vmass[srows].sum()
        # oriented cross mass: half of the unordered edge weight
        cut = 0.5 * _subset_sums(W[np.ix_(srows, comp)].sum(axis=0))
        t_sums = _subset_sums(vmass[comp])
        alpha, ratio = _pair_scores(cut[1:], nu_s, t_sums[1:])
        pairs += len(alpha)
        i = int(np.argmax(alpha))
        if alpha[i] > best[0]:
            best = (float(alpha[i]), smask, (comp, i + 1))
        j = int(np.argmax(ratio))
        if ratio[j] > best_ratio[0]:
            best_ratio = (float(ratio[j]), smask, (comp, j + 1))

    def decode(entry):
        smask, (comp, tmask) = entry
        s = _mask_vertices(smask, verts)
        t = tuple(verts[comp[i]] for i in range(len(comp)) if tmask >> i & 1)
        return s, t

    return EmlReport(
        best[0], decode(best[1:]), best_ratio[0], decode(best_ratio[1:]), True, pairs
    )


def _eml_sampled(G, samples, rng):
    rng = np.random.default_rng(rng)
    best = (-1.0, ((), ()))
    best_ratio = (-1.0, ((), ()))
    if G.sides is not None:
        left, right = sorted(G.sides[0]), sorted(G.sides[1])
    verts = list(G.vertices)
    vmass_of = {v: G.vertex_measures()[G.vertex_index(v)] for v in verts}
    for _ in range(samples):
        if G.sides is not None:
            s = {v for v in left if rng.random() < 0.5}
            t = {v for v in right if rng.random() < 0.5}
            nu_s = sum(G.side_measure(v) for v in s)
            nu_t = sum(G.side_measure(v) for v in t)
        else:
            s = {v for v in verts if rng.random() < 0.5}
            t = {v for v in verts if v not in s and rng.random() < 0.5}
            nu_s = sum(vmass_of[v] for v in s)
            nu_t = sum(vmass_of[v] for v in t)
        if not s or not t:
            continue
        cut = sum(
            w
            for (u, v), w in zip(G.edges, G.weights)
            if (u in s and v in t) or (v in s and u in t)
        )
        if G.sides is None:
            cut *= 0.5  # oriented convention off the bipartite case
        diff = abs(cut - nu_s * nu_t)
        alpha = diff / math.sqrt(nu_s * nu_t)
        if alpha > best[0]:
            best = (alpha, (tuple(sorted(s)), tuple(sorted(t))))
        denom = nu_s * nu_t * (1 - nu_s) * (1 - nu_t)
        if denom > 0:
            ratio = diff / math.sqrt(denom)
            if ratio > best_ratio[0]:
                best_ratio = (ratio, (tuple(sorted(s)), tuple(sorted(t))))
    return EmlReport(best[0], best[1], best_ratio[0], best_ratio[1], False, samples)


def converse_eml_bound(alpha):
    """Upper bound on expansion recovered from the discrepancy alpha."""
    if alpha <= 0:
        raise NonPositiveAlpha(f"alpha must be positive, got {alpha}")
    return 260.0 * alpha * (1.0 + math.log2(3.0 / alpha))


# --- colorings and composition ---


def coloring_measure(G, H, f):
    """Reweight G so edge fibers carry the measure of their target edges.

    f maps G-vertices onto H-vertices and must be a graph homomorphism;
    every H-edge needs a nonempty fiber, otherwise the coloring is
    degenerate and the missing edge is reported.
    """
    fiber_mass = {}
    images = []
    for (u, v), w in zip(G.edges, G.weights):
        a, b = f[u], f[v]
        if a == b or not H.has_edge(a, b):
            raise ValueError(f"edge {(u, v)!r} maps to non-edge {(a, b)!r}")
        key = (a, b) if a < b else (b, a)
        images.append(key)
        fiber_mass[key] = fiber_mass.get(key, 0.0) + w
    for (a, b), w in zip(H.edges, H.weights):
        if (a, b) not in fiber_mass:
            raise DegenerateColoring(
                f"target edge {(a, b)!r} has an empty fiber", witness=(a, b)
            )
    hw = {e: w for e, w in zip(H.edges, H.weights)}
    new = [
        hw[img] * w / fiber_mass[img]
        for img, w in zip(images, G.weights)
    ]
    return G.reweighted(new)


@dataclass(frozen=True)
class CompositionReport:
    lambda_target: float
    eta: float
    eta_witness: tuple
    lambda_colored: float
    bound: float
    ok: bool


def composition_check(G, H, f, mode="two_sided"):
    """Verify the composed expansion bound max(lambda(H), eta).

    eta is the worst bipartite expansion over the per-target-edge fiber
    graphs under their conditional weights; the colored graph's expansion
    must not exceed max(lambda(H), eta) up to 1e-7.
    """
    colored = coloring_measure(G, H, f)  # raises if degenerate
    lam_h = lambda_report(H, mode if mode != "bipartite" else "two_sided")
    eta, eta_witness = -1.0, ()
    for a, b in H.edges:
        fiber = []
        for (u, v), w in zip(G.edges, G.weights):
            img = (f[u], f[v])
            if img == (a, b) or img == (b, a):
                fiber.append((u, v, w))
        left = {u for u, v, _ in fiber if f[u] == a} | {
            v for u, v, _ in fiber if f[v] == a
        }
        right = {u for u, v, _ in fiber if f[u] == b} | {
            v for u, v, _ in fiber if f[v] == b
        }
        lam_fiber = bipartite_lambda(WGraph(fiber, sides=(left, right)))
        if lam_fiber > eta:
            eta, eta_witness = lam_fiber, (a, b)
    lam_colored = lambda_report(colored, mode)
    bound = max(lam_h, eta)
    return CompositionReport(
        lambda_target=float(lam_h),
        eta=float(eta),
        eta_witness=eta_witness,
        lambda_colored=float(lam_colored),
        bound=float(bound),
        ok=lam_colored <= bound + 1e-7,
    )
