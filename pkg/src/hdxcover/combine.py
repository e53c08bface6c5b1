"""Pruning a complex against a fixed target complex via vertex colorings.

Vertices get colors in the target's vertex set; a face is satisfied when
its colors are distinct and form a face of the target.  Resampling drives
two event families to false: a satisfied face whose link misses a color
completing it (AC), and a satisfaction graph that fails the expansion
threshold (NE).  A clean outcome yields a sub-complex with a
non-degenerate coloring into the target.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .complexes import PureComplex, build_complex
from .errors import BadKindForFace, NotAFace, UnsatisfiedBase
from .graphs import WGraph
from .spectral import adjacency_spectrum, is_hdx


@dataclass(frozen=True)
class CombineConfig:
    lambda_target: float
    ne_threshold: float | None = None  # defaults to lambda_target
    ne_check_link_measure: bool = False
    max_resamples: int = 10_000

    def __post_init__(self):
        if not (0.0 < self.lambda_target < 1.0):
            raise ValueError("lambda_target must lie in (0, 1)")

    @property
    def resolved_ne_threshold(self):
        return (
            self.ne_threshold if self.ne_threshold is not None else self.lambda_target
        )


@dataclass(frozen=True)
class ColorSatGraph:
    sigma: tuple
    graph: WGraph | None
    link_graph: WGraph | None
    degenerate: bool
    missing: tuple | None
    dropped_vertices: tuple


@dataclass
class CombineOutcome:
    status: str
    coloring: dict  # X vertex -> C vertex
    y: PureComplex | None
    measure_kind: str  # "coloring" | "restricted" | "empty"
    resamples: int
    transcript: tuple
    violations_remaining: tuple
    config: CombineConfig


class Combiner:
    """Precomputed machinery for one (complex, target) pair."""

    def __init__(self, X, C, config):
        if X.dim != C.dim:
            raise BadKindForFace("complex and target must share a dimension")
        self.X = X
        self.C = C
        self.config = config
        self.d = X.dim
        self.vpos = {v: i for i, v in enumerate(X.vertices)}
        self.tops = X.top_faces
        self.c_tops = set(C.top_faces)
        self._image_links = {}
        self._link_vertices = {}
        self._events = None

    # --- satisfaction ---

    def as_array(self, coloring):
        if isinstance(coloring, np.ndarray):
            return coloring
        arr = np.empty(len(self.X.vertices), dtype=np.int64)
        for v, c in coloring.items():
            arr[self.vpos[v]] = c
        return arr

    def image(self, face, col):
        return tuple(sorted(int(col[self.vpos[v]]) for v in face))

    def face_satisfied(self, face, col):
        face = tuple(sorted(face))
        if not self.X.has_face(face):
            raise NotAFace(f"{face!r} is not a face")
        img = self.image(face, col)
        return len(set(img)) == len(face) and self.C.has_face(img)

    def satisfied_mask(self, col):
        out = np.empty(len(self.tops), dtype=bool)
        for i, face in enumerate(self.tops):
            img = self.image(face, col)
            out[i] = len(set(img)) == self.d + 1 and img in self.c_tops
        return out

    def target_link(self, image):
        if image not in self._image_links:
            self._image_links[image] = self.C.link(image)
        return self._image_links[image]

    def link_vertices(self, face):
        if face not in self._link_vertices:
            fset = set(face)
            seen = set()
            for i in self.X.cofaces(face):
                seen.update(v for v in self.X.top_faces[i] if v not in fset)
            self._link_vertices[face] = tuple(sorted(seen))
        return self._link_vertices[face]

    # --- events ---

    def events(self):
        if self._events is None:
            ev = []
            for ell in range(0, self.d):
                for s in self.X.faces(ell):
                    ev.append(("AC", s))
            for ell in range(0, self.d - 1):
                for s in self.X.faces(ell):
                    ev.append(("NE", s))
            ev.sort()
            self._events = tuple(ev)
        return self._events

    def eval_ac(self, face, col):
        """Some completing color is missing around a satisfied face."""
        if not self.face_satisfied(face, col):
            return False
        img = self.image(face, col)
        completions = set(self.target_link(img).vertices)
        present = {int(col[self.vpos[v]]) for v in self.link_vertices(face)}
        return bool(completions - present)

    def satisfaction_graph(self, sigma, col):
        sigma = tuple(sorted(sigma))
        if len(sigma) - 1 > self.d - 2:
            raise BadKindForFace("satisfaction graphs exist up to dimension d-2")
        if sigma != () and not self.face_satisfied(sigma, col):
            raise UnsatisfiedBase(f"{sigma!r} is not satisfied")
        sset = set(sigma)
        vert_ok = {}
        edge_mass = {}
        for i in self.X.cofaces(sigma):
            face = self.X.top_faces[i]
            rest = [v for v in face if v not in sset]
            for v in rest:
                if v not in vert_ok:
                    vert_ok[v] = self.face_satisfied(tuple(sorted(sigma + (v,))), col)
            for u, w in itertools.combinations(rest, 2):
                key = (u, w) if u < w else (w, u)
                if key not in edge_mass:
                    sat = self.face_satisfied(tuple(sorted(sigma + key)), col)
                    edge_mass[key] = 0.0 if sat else None
                if edge_mass[key] is not None:
                    edge_mass[key] += self.X.weights[i]
        edges = {k: m for k, m in edge_mass.items() if m is not None and m > 0}
        good = tuple(sorted(v for v, ok in vert_ok.items() if ok))
        if not edges:
            return ColorSatGraph(sigma, None, None, True, None, good)
        link_graph = WGraph([(u, v, m) for (u, v), m in edges.items()])
        dropped = tuple(v for v in good if v not in set(link_graph.vertices))

        if sigma == ():
            # no reference link; the graph itself is the object of interest
            return ColorSatGraph(sigma, link_graph, link_graph, False, None, dropped)
        img = self.image(sigma, col)
        tskel = self.target_link(img).one_skeleton()
        fiber = {}
        for (u, v), m in edges.items():
            key = tuple(sorted((int(col[self.vpos[u]]), int(col[self.vpos[v]]))))
            fiber[key] = fiber.get(key, 0.0) + m
        for e in tskel.edges:
            if e not in fiber:
                return ColorSatGraph(sigma, None, link_graph, True, e, dropped)
        tw = {e: w for e, w in zip(tskel.edges, tskel.weights)}
        colored = []
        for (u, v), m in edges.items():
            key = tuple(sorted((int(col[self.vpos[u]]), int(col[self.vpos[v]]))))
            colored.append((u, v, tw[key] * m / fiber[key]))
        return ColorSatGraph(
            sigma, WGraph(colored), link_graph, False, None, dropped
        )

    def eval_ne(self, sigma, col):
        if sigma != () and not self.face_satisfied(sigma, col):
            return False
        sg = self.satisfaction_graph(sigma, col)
        if sg.degenerate or sg.graph is None or sg.dropped_vertices:
            return True
        thr = self.config.resolved_ne_threshold + 1e-9
        if adjacency_spectrum(sg.graph).two_sided > thr:
            return True
        if self.config.ne_check_link_measure:
            if adjacency_spectrum(sg.link_graph).two_sided > thr:
                return True
        return False

    def eval_event(self, kind, face, col):
        face = tuple(sorted(face))
        ell = len(face) - 1
        if kind == "AC":
            if not 0 <= ell <= self.d - 1:
                raise BadKindForFace(f"AC applies to dimensions 0..{self.d - 1}")
            return self.eval_ac(face, col)
        if kind == "NE":
            if not 0 <= ell <= self.d - 2:
                raise BadKindForFace(f"NE applies to dimensions 0..{self.d - 2}")
            return self.eval_ne(face, col)
        raise BadKindForFace(f"unknown event kind {kind!r}")

    def event_scope(self, face):
        """Vertex positions whose colors the events at this face read."""
        verts = set(face) | set(self.link_vertices(face))
        return tuple(sorted(self.vpos[v] for v in verts))

    def first_violated(self, col):
        for kind, face in self.events():
            if kind == "AC":
                hit = self.eval_ac(face, col)
            else:
                hit = self.eval_ne(face, col)
            if hit:
                return kind, face
        return None

    # --- pruning ---

    def c_pruning(self, col):
        mask = self.satisfied_mask(col)
        if not mask.any():
            return None, "empty", mask
        kept = [self.tops[i] for i in np.nonzero(mask)[0]]
        base_w = self.X.weights[mask]
        fiber = {}
        for face, w in zip(kept, base_w):
            img = self.image(face, col)
            fiber[img] = fiber.get(img, 0.0) + w
        degenerate = any(t not in fiber for t in self.c_tops)
        if degenerate:
            y = build_complex(self.d, kept, base_w)
            return y, "restricted", mask
        cw = {t: w for t, w in zip(self.C.top_faces, self.C.weights)}
        weights = [
            cw[self.image(face, col)] * w / fiber[self.image(face, col)]
            for face, w in zip(kept, base_w)
        ]
        return build_complex(self.d, kept, weights), "coloring", mask

    def run(self, rng):
        rng = np.random.default_rng(rng)
        n_colors = len(self.C.vertices)
        color_ids = np.array(self.C.vertices, dtype=np.int64)
        col = color_ids[rng.integers(0, n_colors, size=len(self.X.vertices))]
        transcript = []
        resamples = 0
        while True:
            violated = self.first_violated(col)
            if violated is None:
                y, kind, _ = self.c_pruning(col)
                return CombineOutcome(
                    status="clean",
                    coloring={v: int(col[self.vpos[v]]) for v in self.X.vertices},
                    y=y,
                    measure_kind=kind,
                    resamples=resamples,
                    transcript=tuple(transcript),
                    violations_remaining=(),
                    config=self.config,
                )
            if resamples >= self.config.max_resamples:
                y, kind, _ = self.c_pruning(col)
                remaining = tuple(
                    (k, s) for k, s in self.events() if self.eval_event(k, s, col)
                )
                return CombineOutcome(
                    status="budget_exhausted",
                    coloring={v: int(col[self.vpos[v]]) for v in self.X.vertices},
                    y=y,
                    measure_kind=kind,
                    resamples=resamples,
                    transcript=tuple(transcript),
                    violations_remaining=remaining,
                    config=self.config,
                )
            kind, face = violated
            scope = self.event_scope(face)
            col = col.copy()
            col[list(scope)] = color_ids[
                rng.integers(0, n_colors, size=len(scope))
            ]
            transcript.append((resamples, kind, face, scope))
            resamples += 1


# --- module-level wrappers ---


def c_satisfied(X, C, coloring, face):
    comb = Combiner(X, C, CombineConfig(0.5))
    return comb.face_satisfied(face, comb.as_array(coloring))


def c_pruning(X, C, coloring):
    comb = Combiner(X, C, CombineConfig(0.5))
    y, kind, _ = comb.c_pruning(comb.as_array(coloring))
    return y, kind


def eval_event_combine(kind, X, C, coloring, tau, config):
    comb = Combiner(X, C, config)
    return comb.eval_event(kind, tau, comb.as_array(coloring))


def moser_tardos_combine(X, C, config, rng):
    return Combiner(X, C, config).run(rng)


# --- verification ---


@dataclass(frozen=True)
class CombineReport:
    homomorphism_ok: bool
    homomorphism_witness: tuple | None
    nondegenerate_ok: bool
    nondegenerate_witness: tuple | None
    hdx_ok: bool
    hdx_threshold: float
    hdx_threshold_alt: float
    hdx_worst: float
    connected_ok: bool
    path_argument_ok: bool
    fraction_ok: bool
    fractions: dict
    fraction_bound: float

    @property
    def ok(self):
        return (
            self.homomorphism_ok
            and self.nondegenerate_ok
            and self.hdx_ok
            and self.connected_ok
            and self.path_argument_ok
            and self.fraction_ok
        )

    def to_dict(self):
        return {
            "homomorphism_ok": self.homomorphism_ok,
            "nondegenerate_ok": self.nondegenerate_ok,
            "hdx_ok": self.hdx_ok,
            "hdx_threshold": self.hdx_threshold,
            "hdx_threshold_alt": self.hdx_threshold_alt,
            "hdx_worst": self.hdx_worst,
            "connected_ok": self.connected_ok,
            "path_argument_ok": self.path_argument_ok,
            "fraction_ok": self.fraction_ok,
            "fractions": {str(k): v for k, v in self.fractions.items()},
            "fraction_bound": self.fraction_bound,
            "ok": self.ok,
        }


def _path_argument(X, C, coloring, y_edges):
    """Replay the descent that connects endpoints of unsatisfied edges."""
    cskel = C.one_skeleton()
    dist = {}
    for src in cskel.vertices:
        seen = {src: 0}
        queue = [src]
        while queue:
            x = queue.pop(0)
            for nb in cskel.neighbors(x):
                if nb not in seen:
                    seen[nb] = seen[x] + 1
                    queue.append(nb)
        dist[src] = seen
    xskel_edges = set(X.faces(1))
    neighbors = {v: set() for v in X.vertices}
    for u, v in xskel_edges:
        neighbors[u].add(v)
        neighbors[v].add(u)
    y_edge_set = set(y_edges)

    for u, v in xskel_edges:
        if (u, v) in y_edge_set:
            continue
        cur, steps = u, 0
        ok = False
        while steps <= len(X.vertices):
            if tuple(sorted((cur, v))) in y_edge_set:
                ok = True
                break
            cu, cv = coloring[cur], coloring[v]
            if cv not in dist.get(cu, {}):
                break
            gap = dist[cu][cv]
            nxt, best = None, np.inf
            for cand in sorted(neighbors[cur] & neighbors[v]):
                if tuple(sorted((cur, cand))) not in y_edge_set:
                    continue
                score = dist[coloring[cand]].get(cv, np.inf)
                # strict descent; from a zero gap any step with a finite
                # color distance makes the next edge satisfiable
                if (gap > 0 and score < min(gap, best)) or (
                    gap == 0 and score < best
                ):
                    nxt, best = cand, score
            if nxt is None:
                break
            cur, steps = nxt, steps + 1
        if not ok:
            return False, (u, v)
    return True, None


def verify_combine(X, C, outcome):
    """The five clean-outcome checks.

    (a) every kept face maps to a target face, (b) every target top face
    has a preimage, (c) link expansion at 2*lam/(1-2*lam) (the larger of
    the two candidate thresholds; both are reported), (d) the 1-skeleton
    is connected, both by search and by replaying the color-distance
    descent, (e) face fractions clear (1/(2 m^d))^d at every level.
    """
    y = outcome.y
    coloring = outcome.coloring
    lam = outcome.config.lambda_target
    if y is None:
        raise UnsatisfiedBase("outcome kept no top face")

    hom_ok, hom_wit = True, None
    for face in y.top_faces:
        img = tuple(sorted(coloring[v] for v in face))
        if len(set(img)) != len(face) or not C.has_face(img):
            hom_ok, hom_wit = False, face
            break

    images = {tuple(sorted(coloring[v] for v in face)) for face in y.top_faces}
    nondeg_ok, nondeg_wit = True, None
    for t in C.top_faces:
        if t not in images:
            nondeg_ok, nondeg_wit = False, t
            break

    if lam < 0.5:
        threshold = 2 * lam / (1 - 2 * lam)
    else:
        threshold = 1.0  # the bound degenerates; any spectrum passes
    threshold_alt = 2 * lam / (1 - lam) if lam < 1 else 1.0
    hdx = is_hdx(y, min(threshold, 1.0))

    skel = y.one_skeleton()
    connected = skel.is_connected() and set(skel.vertices) == set(X.vertices)
    path_ok, _ = _path_argument(X, C, coloring, y.faces(1))

    m = len(C.vertices)
    bound = (1.0 / (2 * m**X.dim)) ** X.dim
    fractions = {
        k: y.n_faces(k) / X.n_faces(k) for k in range(0, X.dim + 1)
    }
    frac_ok = all(v >= bound for v in fractions.values())

    return CombineReport(
        homomorphism_ok=hom_ok,
        homomorphism_witness=hom_wit,
        nondegenerate_ok=nondeg_ok,
        nondegenerate_witness=nondeg_wit,
        hdx_ok=hdx.passes,
        hdx_threshold=threshold,
        hdx_threshold_alt=threshold_alt,
        hdx_worst=hdx.worst_value,
        connected_ok=connected,
        path_argument_ok=path_ok,
        fraction_ok=frac_ok,
        fractions=fractions,
        fraction_bound=bound,
    )
