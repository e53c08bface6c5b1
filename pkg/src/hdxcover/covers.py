"""Group-labeled covers of simplicial complexes.

An edge labeling into a finite group that satisfies the triangle condition
on every 2-face determines a cover: vertices are (base vertex, element)
pairs and top faces lift base top faces consistently with the labels.
Cycle label-products at a fixed vertex generate the holonomy subgroup,
which controls how many components the cover splits into.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .complexes import PureComplex, build_complex
from .errors import Disconnected, NotACocycle, NotAnEdge

TOL = 1e-9


def edge_key(u, v):
    return (u, v) if u < v else (v, u)


def directed_label(group, labeling, u, v):
    """Label of the oriented edge (u, v): f(uv) if u < v, else its inverse."""
    key = edge_key(u, v)
    try:
        g = labeling[key]
    except KeyError:
        raise NotAnEdge(f"{key!r} carries no label") from None
    return g if u < v else group.inv(g)


def coboundary_labeling(X, group, potential):
    """f(uv) = potential(u)^-1 * potential(v) on every edge; always a cocycle."""
    out = {}
    for u, v in X.faces(1):
        out[(u, v)] = group.mul(group.inv(potential[u]), potential[v])
    return out


def is_cocycle(X, labeling, group):
    """Check the triangle condition on all 2-faces; returns (ok, witness)."""
    if X.dim < 2:
        return True, None
    for i, j, k in X.faces(2):
        lhs = group.mul(labeling[(i, j)], labeling[(j, k)])
        if lhs != labeling[(i, k)]:
            return False, (i, j, k)
    return True, None


@dataclass(frozen=True)
class CoverComplex:
    """The lifted complex together with its covering data."""

    complex: PureComplex
    base: PureComplex
    group: object
    labeling: dict
    legend: dict  # lifted vertex id -> (base vertex, group element)

    def phi(self, vid):
        return self.legend[vid][0]

    def phi_face(self, face):
        return tuple(sorted(self.legend[v][0] for v in face))

    def fiber(self, base_vertex):
        return tuple(
            sorted(v for v, (b, _) in self.legend.items() if b == base_vertex)
        )


def build_cover(X, labeling, group):
    """Construct the cover of X determined by a cocycle labeling.

    Lifted top faces fix the element at the least vertex and propagate
    along directed labels; each carries 1/|group| of its base weight.
    """
    if X.dim < 2:
        raise NotACocycle("covers are built over complexes of dimension >= 2")
    ok, witness = is_cocycle(X, labeling, group)
    if not ok:
        raise NotACocycle(f"triangle condition fails at {witness}", witness=witness)
    n_g = group.order
    pos = {v: i for i, v in enumerate(X.vertices)}

    def vid(v, g):
        return pos[v] * n_g + g

    legend = {vid(v, g): (v, g) for v in X.vertices for g in range(n_g)}
    tops = []
    weights = []
    for face, w in zip(X.top_faces, X.weights):
        v0 = face[0]
        shifts = [
            0 if v == v0 else directed_label(group, labeling, v0, v) for v in face
        ]
        share = w / n_g
        for g in range(n_g):
            row = group.mul_table[g]
            tops.append(tuple(sorted(vid(v, int(row[s])) for v, s in zip(face, shifts))))
            weights.append(share)
    cover = build_complex(X.dim, tops, weights)
    return CoverComplex(cover, X, group, dict(labeling), legend)


def holonomy_subgroup(X, labeling, group, v, order="bfs"):
    """Subgroup of cycle label-products at v, via a spanning tree.

    Tree paths assign each vertex a potential; every non-tree edge then
    contributes one generator.  The traversal order only changes the
    generators, not the subgroup (checked by tests).
    """
    from .groups import subgroup_closure

    skel = X.one_skeleton()
    if not skel.is_connected():
        raise Disconnected("holonomy needs a connected 1-skeleton")
    pot = {v: 0}
    frontier = [v]
    tree_edges = set()
    while frontier:
        x = frontier.pop(0 if order == "bfs" else -1)
        for y in sorted(skel.neighbors(x)):
            if y not in pot:
                pot[y] = group.mul(pot[x], directed_label(group, labeling, x, y))
                tree_edges.add(edge_key(x, y))
                frontier.append(y)
    gens = set()
    for u, w in skel.edges:
        if (u, w) in tree_edges:
            continue
        g = group.mul(
            group.mul(pot[u], directed_label(group, labeling, u, w)),
            group.inv(pot[w]),
        )
        gens.add(g)
    return subgroup_closure(group, gens)


def connected_components(X):
    """Component count and a vertex -> component-id labeling of a complex."""
    if X.dim >= 1:
        skel = X.one_skeleton()
        comps = skel.connected_components()
    else:
        comps = [{v} for v in X.vertices]
    comps = sorted(comps, key=min)
    labels = {}
    for cid, comp in enumerate(comps):
        for v in comp:
            labels[v] = cid
    return len(comps), labels


@dataclass(frozen=True)
class ComponentReport:
    count: int
    expected_index: int
    matches: bool
    labels: dict


def cover_components(cover):
    """Components of a cover, checked against the holonomy index."""
    count, labels = connected_components(cover.complex)
    base_vertex = cover.base.vertices[0]
    h = holonomy_subgroup(cover.base, cover.labeling, cover.group, base_vertex)
    index = cover.group.order // len(h)
    return ComponentReport(count, index, count == index, labels)


@dataclass(frozen=True)
class CoverReport:
    ok: bool
    surjective: bool
    faces_checked: int
    violations: tuple  # (face, reason) pairs


def verify_cover(cover, tol=TOL):
    """Audit that the projection is a genuine cover of the base.

    Checks surjectivity on vertices and top faces, and for every nonempty
    lifted face that the projection restricts to a weighted isomorphism
    between its link and the link of its image.
    """
    tilde, base = cover.complex, cover.base
    violations = []

    surj = set(cover.phi(v) for v in tilde.vertices) == set(base.vertices)
    image_tops = {cover.phi_face(f) for f in tilde.top_faces}
    surj = surj and image_tops == set(base.top_faces)

    base_tops = {f: i for i, f in enumerate(base.top_faces)}
    checked = 0
    for k in range(0, tilde.dim + 1):
        for face in tilde.faces(k):
            checked += 1
            img = cover.phi_face(face)
            if len(set(img)) != len(face) or not base.has_face(img):
                violations.append((face, "image is not a face"))
                continue
            if k == tilde.dim:
                continue  # links of top faces are empty
            idx = tilde.cofaces(face)
            fset = set(face)
            link_w = {}
            for i in idx:
                rest = tuple(v for v in tilde.top_faces[i] if v not in fset)
                link_w[rest] = link_w.get(rest, 0.0) + tilde.weights[i]
            lvs = {v for rest in link_w for v in rest}
            phi_v = {v: cover.phi(v) for v in lvs}
            if len(set(phi_v.values())) != len(lvs):
                violations.append((face, "projection not injective on the link"))
                continue
            bidx = base.cofaces(img)
            iset = set(img)
            base_w = {}
            for i in bidx:
                rest = tuple(v for v in base.top_faces[i] if v not in iset)
                base_w[rest] = base_w.get(rest, 0.0) + base.weights[i]
            mapped = {
                tuple(sorted(phi_v[v] for v in rest)): w for rest, w in link_w.items()
            }
            if set(mapped) != set(base_w):
                violations.append((face, "link faces do not correspond"))
                continue
            ts = sum(link_w.values())
            bs = sum(base_w.values())
            for rest, w in mapped.items():
                if abs(w / ts - base_w[rest] / bs) > tol:
                    violations.append((face, f"link weight mismatch at {rest}"))
                    break
    return CoverReport(
        ok=surj and not violations,
        surjective=surj,
        faces_checked=checked,
        violations=tuple(violations),
    )


def cover_to_dict(cover):
    """JSON form: base and group references plus lifted faces as pairs."""
    from .complexes import complex_to_dict
    from .groups import group_to_dict

    return {
        "base": complex_to_dict(cover.base),
        "group": group_to_dict(cover.group),
        "faces": [
            [list(cover.legend[v]) for v in face]
            for face in cover.complex.top_faces
        ],
        "weights": [float(w) for w in cover.complex.weights],
    }


def push_cocycle(X, labeling, group, quotient):
    """Project a cocycle through a quotient map; the image is again a cocycle."""
    ok, witness = is_cocycle(X, labeling, group)
    if not ok:
        raise NotACocycle(f"input fails the triangle condition at {witness}",
                          witness=witness)
    return {e: quotient.project(g) for e, g in labeling.items()}
