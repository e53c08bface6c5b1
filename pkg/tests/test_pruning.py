import itertools
import math

import numpy as np
import pytest

from hdxcover.complexes import build_complex, complete_complex
from hdxcover.covers import coboundary_labeling
from hdxcover.errors import (
    BadKindForFace,
    NotAFace,
    Unmeasurable,
    UnsatisfiedBase,
)
from hdxcover.groups import cayley_clique_complex, cyclic, validate_genset
from hdxcover.pruning import (
    PruneConfig,
    Pruner,
    dependency_scope,
    eval_event,
    f_pruning,
    face_fraction_report,
    is_satisfied,
    measure_ratio_audit,
    moser_tardos_prune,
    pruned_measure,
    sample_labeling,
    satisfaction_graph,
)
from hdxcover.spectral import is_hdx

Z5 = cyclic(5)
Z5_GENS = validate_genset(Z5, [1, 2, 3, 4])


def z5_pruner(X, **cfg):
    config = PruneConfig.empirical(cfg.pop("lambda_target", 0.9), **cfg)
    return Pruner(X, Z5, Z5_GENS, config)


def coboundary_indices(X, potential):
    """Coboundary labeling expressed as generator indices for Z5_GENS."""
    elems = coboundary_labeling(X, Z5, potential)
    rank = {e: i for i, e in enumerate(Z5_GENS)}
    return {edge: rank[g] for edge, g in elems.items()}


@pytest.fixture(scope="module")
def fixture30():
    X = complete_complex(30, 2)
    pruner = z5_pruner(X)
    outcome = pruner.run(2)
    assert outcome.status == "clean"
    return X, pruner, outcome


class TestSampleLabeling:
    def test_single_generator_constant(self):
        X = complete_complex(5, 2)
        f = sample_labeling(X, 1, 0)
        assert (f == 0).all()

    def test_deterministic(self):
        X = complete_complex(8, 2)
        a = sample_labeling(X, 4, 123)
        b = sample_labeling(X, 4, 123)
        assert (a == b).all()

    def test_frequencies_within_three_sigma(self):
        X = build_complex(1, itertools.combinations(range(142), 2))
        m = 4
        f = sample_labeling(X, m, 7)
        n = len(f)
        sigma = math.sqrt(n * (1 / m) * (1 - 1 / m))
        for label in range(m):
            assert abs((f == label).sum() - n / m) <= 3 * sigma


class TestIsSatisfied:
    def test_z2_triangle_unsatisfied(self):
        g = cyclic(2)
        X = build_complex(2, [(0, 1, 2)])
        f = {(0, 1): 0, (1, 2): 0, (0, 2): 0}  # every edge labeled by 1
        assert not is_satisfied(X, f, g, (1,), (0, 1, 2))

    def test_edges_vacuous(self):
        X = complete_complex(4, 2)
        f = {e: 0 for e in X.faces(1)}
        assert is_satisfied(X, f, cyclic(2), (1,), (0, 1))
        assert is_satisfied(X, f, cyclic(2), (1,), (2,))

    def test_coboundary_satisfied(self):
        X = complete_complex(5, 2)
        f = coboundary_indices(X, {i: i for i in range(5)})
        pruner = z5_pruner(X)
        arr = pruner.as_array(f)
        for face in X.faces(2):
            assert pruner.face_satisfied(face, arr)

    def test_not_a_face(self):
        X = complete_complex(4, 2)
        f = {e: 0 for e in X.faces(1)}
        with pytest.raises(NotAFace):
            is_satisfied(X, f, cyclic(2), (1,), (0, 9))


class TestFPruning:
    def test_coboundary_keeps_everything(self):
        X = complete_complex(5, 2)
        f = coboundary_indices(X, {i: i for i in range(5)})
        y, isolated = f_pruning(X, f, Z5, Z5_GENS)
        assert y.top_faces == X.top_faces
        assert isolated == ()

    def test_one_flipped_edge_removes_its_triangles(self):
        # a single relabeled edge breaks exactly the two triangles through it
        # (an odd number of broken triangles is impossible on K_4: if all
        # triangles through one vertex hold, the fourth telescopes)
        X = complete_complex(4, 2)
        f = coboundary_indices(X, {i: i for i in range(4)})
        f[(2, 3)] = (f[(2, 3)] + 1) % 4
        y, isolated = f_pruning(X, f, Z5, Z5_GENS)
        assert set(y.top_faces) == {(0, 1, 2), (0, 1, 3)}
        assert isolated == ()

    def test_adversarial_empty(self):
        g = cyclic(2)
        X = complete_complex(4, 2)
        f = {e: 0 for e in X.faces(1)}  # all-ones labeling over Z/2
        y, isolated = f_pruning(X, f, g, (1,))
        assert y is None
        assert isolated == tuple(X.vertices)


class TestSatisfactionGraph:
    def test_empty_face_full_skeleton(self):
        X = complete_complex(6, 2)
        f = sample_labeling(X, 4, 0)
        sg = satisfaction_graph(X, f, Z5, Z5_GENS, ())
        assert set(sg.graph.edges) == set(X.faces(1))
        assert sg.coloring is None

    def test_coboundary_full_link(self):
        X = complete_complex(5, 2)
        f = coboundary_indices(X, {i: i for i in range(5)})
        sg = satisfaction_graph(X, f, Z5, Z5_GENS, (0,))
        assert set(sg.graph.edges) == set(X.link((0,)).faces(1))
        assert not sg.degenerate

    def test_vertex_partition_matches_census(self):
        X = complete_complex(40, 2)
        f = sample_labeling(X, 4, 11)
        pruner = z5_pruner(X)
        sg = pruner.satisfaction_graph((3,), f)
        by_color = {}
        for v, c in sg.coloring.items():
            by_color.setdefault(c, set()).add(v)
        # direct enumeration of directed labels out of vertex 3
        expected = {}
        for v in X.vertices:
            if v == 3:
                continue
            expected.setdefault(pruner.directed_element(f, 3, v), set()).add(v)
        assert by_color == expected

    def test_unsatisfied_base_raises(self):
        # triangles are the lowest-dimensional faces that can fail, so the
        # base complex needs dimension >= 4 for them to be valid bases
        g = cyclic(2)
        X = complete_complex(6, 4)
        f = {e: 0 for e in X.faces(1)}
        pruner = Pruner(X, g, (1,), PruneConfig(0.5))
        arr = pruner.as_array(f)
        with pytest.raises(UnsatisfiedBase):
            pruner.satisfaction_graph((0, 1, 2), arr)

    def test_dimension_guard(self):
        X = complete_complex(5, 2)
        f = sample_labeling(X, 4, 0)
        pruner = z5_pruner(X)
        with pytest.raises(BadKindForFace):
            pruner.satisfaction_graph((0, 1), f)

    def test_coloring_lands_in_link(self):
        X = complete_complex(12, 2)
        f = sample_labeling(X, 4, 5)
        pruner = z5_pruner(X)
        sg = pruner.satisfaction_graph((7,), f)
        assert set(sg.coloring.values()) <= set(Z5_GENS)


class TestEvalEvent:
    def test_at_single_generator_never_fires(self):
        g = cyclic(2)
        X = complete_complex(8, 2)
        config = PruneConfig(0.5, r=1.5)
        f = {e: 0 for e in X.faces(1)}
        for v in X.vertices:
            assert not eval_event("AT", X, f, g, (1,), (v,), config)

    def test_at_fires_on_missing_tuple(self):
        X = complete_complex(8, 2)
        f = {e: 0 for e in X.faces(1)}  # only one label used
        config = PruneConfig(0.5, r=1.5)
        assert eval_event("AT", X, f, Z5, Z5_GENS, (0,), config)

    def test_at_top_dimension_rejected(self):
        X = complete_complex(6, 2)
        f = sample_labeling(X, 4, 0)
        with pytest.raises(BadKindForFace):
            eval_event("AT", X, f, Z5, Z5_GENS, (0, 1, 2), PruneConfig(0.5))

    def test_bc_matches_exhaustive_scan(self):
        group = cyclic(5)
        gens = validate_genset(group, [1, 4], require_generating=False)
        X = build_complex(2, [(0, 1, 2)])
        config = PruneConfig(0.5)
        elems = {0: 1, 1: 4}  # generator index -> element
        for labels in itertools.product(range(2), repeat=3):
            f = {(0, 1): labels[0], (1, 2): labels[1], (0, 2): labels[2]}
            pruner = Pruner(X, group, gens, config)
            realized = set()
            lab = {e: elems[i] for e, i in f.items()}
            for u, w in [(1, 2), (2, 1)]:
                from hdxcover.covers import directed_label

                prod = group.mul(
                    group.mul(
                        directed_label(group, lab, 0, u),
                        directed_label(group, lab, u, w),
                    ),
                    directed_label(group, lab, w, 0),
                )
                realized.add(prod)
            expected = any(s not in realized for s in (1, 4))
            assert pruner.eval_bc(0, pruner.as_array(f)) == expected

    def test_bc_true_case_exists(self):
        # labels 1,1,4 on the triangle realize only {2,3}, missing S
        group = cyclic(5)
        gens = validate_genset(group, [1, 4], require_generating=False)
        X = build_complex(2, [(0, 1, 2)])
        f = {(0, 1): 0, (1, 2): 0, (0, 2): 1}
        assert eval_event("BC", X, f, group, gens, (0,), PruneConfig(0.5))

    def test_ne_disconnected_link(self):
        X = build_complex(2, [(0, 1, 2), (0, 3, 4)])
        f = coboundary_indices(X, {0: 0, 1: 1, 2: 2, 3: 3, 4: 4})
        config = PruneConfig(0.9, ne_threshold=0.9)
        assert eval_event("NE", X, f, Z5, Z5_GENS, (0,), config)

    def test_ne_false_on_good_link(self, fixture30):
        X, pruner, outcome = fixture30
        for v in list(X.vertices)[:5]:
            assert not pruner.eval_ne((v,), outcome.labeling)

    def test_ec_event(self):
        g = cyclic(2)
        X = complete_complex(4, 2)
        f = {e: 0 for e in X.faces(1)}
        config = PruneConfig(0.5, edge_cover_events=True)
        assert eval_event("EC", X, f, g, (1,), (0, 1), config)


class TestDependencyScope:
    def test_complete_k4_vertex_scope_is_everything(self):
        X = complete_complex(4, 2)
        rep = dependency_scope(X, (0,))
        assert set(rep.edges) == set(X.faces(1))
        assert rep.within_bound

    def test_far_faces_excluded(self):
        X = build_complex(2, [(0, 1, 2), (3, 4, 5)])
        rep = dependency_scope(X, (0,))
        assert (3, 4) not in rep.edges
        assert rep.neighbor_events == len(
            [s for k in range(2) for s in X.faces(k) if set(s) <= {0, 1, 2}]
        ) - 1

    def test_monotone_in_face(self):
        X = complete_complex(6, 2)
        small = set(dependency_scope(X, (0,)).edges)
        large = set(dependency_scope(X, (0, 1)).edges)
        assert small <= large


class TestMoserTardos:
    def test_deterministic_transcript(self):
        X = complete_complex(30, 2)
        config = PruneConfig.empirical(0.9, max_resamples=10_000)
        a = moser_tardos_prune(X, Z5, Z5_GENS, config, 1)
        b = moser_tardos_prune(X, Z5, Z5_GENS, config, 1)
        assert a.transcript == b.transcript
        assert (a.labeling == b.labeling).all()
        assert a.status == b.status == "clean"

    def test_clean_means_no_event_fires(self, fixture30):
        X, pruner, outcome = fixture30
        assert outcome.status == "clean"
        assert pruner.all_violations(outcome.labeling) == ()

    def test_budget_exhausted_reports_remaining(self):
        X = complete_complex(12, 2)
        config = PruneConfig.empirical(0.9, max_resamples=3)
        out = moser_tardos_prune(X, Z5, Z5_GENS, config, 0)
        assert out.status == "budget_exhausted"
        assert out.resamples == 3
        assert out.violations_remaining

    def test_zero_resample_seed(self):
        X = complete_complex(30, 2)
        config = PruneConfig.empirical(0.9, max_resamples=10)
        out = moser_tardos_prune(X, Z5, Z5_GENS, config, 37)
        assert out.status == "clean"
        assert out.resamples == 0

    def test_resampling_stays_inside_scope(self, fixture30):
        X, pruner, _ = fixture30
        config = pruner.config
        rng = np.random.default_rng(5)
        f = sample_labeling(X, 4, rng)
        violated = pruner.first_violated(f)
        if violated is None:
            pytest.skip("seed starts clean")
        kind, face = violated
        scope = set(pruner.event_scope(kind, face))
        g = f.copy()
        g[list(scope)] = rng.integers(0, 4, size=len(scope))
        changed = {i for i in range(len(f)) if f[i] != g[i]}
        assert changed <= scope

    def test_clean_links_match_satisfaction_graphs(self, fixture30):
        X, pruner, outcome = fixture30
        y = outcome.y
        for v in list(y.vertices)[:8]:
            sg = pruner.satisfaction_graph((v,), outcome.labeling)
            link = y.link((v,))
            assert set(link.faces(0)) == {(u,) for u in sg.graph.vertices}
            assert set(link.faces(1)) == set(sg.graph.edges)

    def test_clean_is_hdx_at_config_lambda(self, fixture30):
        X, pruner, outcome = fixture30
        rep = is_hdx(outcome.y, pruner.config.lambda_target)
        assert rep.passes


class TestPrunedMeasure:
    def test_coboundary_measure_totals_one(self):
        X = complete_complex(5, 2)
        f = coboundary_indices(X, {i: i for i in range(5)})
        pm = pruned_measure(X, f, Z5, Z5_GENS)
        assert pm.total == pytest.approx(1.0, abs=1e-12)
        # every ordered identity-link pattern is realized
        cayley = cayley_clique_complex(Z5, Z5_GENS, 2)
        c_e = cayley.complex.link((0,))
        n_patterns = len(c_e.top_faces) * 2
        assert len(pm.patterns) == n_patterns

    def test_missing_pattern_unmeasurable(self):
        X = build_complex(2, [(0, 1, 2)])
        f = coboundary_indices(X, {0: 0, 1: 1, 2: 2})
        with pytest.raises(Unmeasurable) as err:
            pruned_measure(X, f, Z5, Z5_GENS)
        assert err.value.witness is not None

    def test_clean_run_measures(self, fixture30):
        X, pruner, outcome = fixture30
        pm = pruned_measure(
            outcome.y, outcome.labeling_dict(), Z5, Z5_GENS, pruner.cayley
        )
        assert pm.total == pytest.approx(1.0, abs=1e-9)
        assert (pm.weights >= 0).all()

    def test_orientations_exchangeable_on_uniform_fixture(self):
        # on the fully symmetric fixture every orientation of a face has
        # the same probability, so unordered mass = (d+1)! * oriented mass
        import itertools as it

        X = complete_complex(5, 2)
        f = coboundary_indices(X, {i: i for i in range(5)})
        pm = pruned_measure(X, f, Z5, Z5_GENS)
        lab = {e: Z5_GENS[i] for e, i in f.items()}

        def dir_el(u, v):
            g = lab[tuple(sorted((u, v)))]
            return g if u < v else Z5.inv(g)

        face = X.top_faces[0]
        w = X.weights[0]
        per_orientation = []
        for perm in it.permutations(face):
            pat = tuple(dir_el(perm[0], x) for x in perm[1:])
            per_orientation.append(
                (1 / 6 / 2) * (w / 6) / pm.patterns[pat]
            )
        assert np.allclose(per_orientation, per_orientation[0])
        idx = X.top_faces.index(face)
        assert pm.weights[idx] == pytest.approx(6 * per_orientation[0])


class TestMeasureRatio:
    def test_coboundary_uniform_ratio_one(self):
        X = complete_complex(5, 2)
        f = coboundary_indices(X, {i: i for i in range(5)})
        pruner = z5_pruner(X)
        y, _, _ = pruner.f_pruning(pruner.as_array(f))
        rep = measure_ratio_audit(X, y, pruner.as_array(f), Z5, Z5_GENS, (0,), r=1.5)
        assert rep.support_matches
        assert rep.max_ratio == pytest.approx(1.0, abs=1e-9)

    def test_clean_run_within_bound(self, fixture30):
        X, pruner, outcome = fixture30
        rep = measure_ratio_audit(
            X,
            outcome.y,
            outcome.labeling,
            Z5,
            Z5_GENS,
            (4,),
            cayley=pruner.cayley,
            config=pruner.config,
        )
        assert rep.ok
        assert rep.max_ratio <= 1.5 ** 30

    def test_bound_monotone_in_r(self):
        X = complete_complex(5, 2)
        f = coboundary_indices(X, {i: i for i in range(5)})
        pruner = z5_pruner(X)
        y, _, _ = pruner.f_pruning(pruner.as_array(f))
        small = measure_ratio_audit(X, y, pruner.as_array(f), Z5, Z5_GENS, (0,), r=1.2)
        large = measure_ratio_audit(X, y, pruner.as_array(f), Z5, Z5_GENS, (0,), r=2.0)
        assert small.bound < large.bound
        assert small.max_ratio == pytest.approx(large.max_ratio)


class TestFractions:
    def test_face_fraction_report(self, fixture30):
        X, pruner, outcome = fixture30
        fr = face_fraction_report(X, outcome.y)
        assert fr[0] == 1.0 and fr[1] == 1.0
        m = len(Z5_GENS)
        assert fr[2] >= (1 / (2 * m**2)) ** 2


class TestConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            PruneConfig(lambda_target=1.5)
        with pytest.raises(ValueError):
            PruneConfig(lambda_target=0.5, r=0.9)
        with pytest.raises(ValueError):
            PruneConfig(lambda_target=0.5, max_resamples=0)

    def test_formula_defaults(self):
        cfg = PruneConfig.formula(0.6)
        assert cfg.at_top_level and not cfg.edge_cover_events
        assert cfg.resolved_ne_threshold == pytest.approx(0.3)

    def test_empirical_defaults(self):
        cfg = PruneConfig.empirical(0.9)
        assert not cfg.at_top_level and cfg.edge_cover_events
        assert cfg.resolved_ne_threshold == pytest.approx(0.9)
        assert cfg.ne_check_link_measure

    def test_at_bounds(self):
        cfg = PruneConfig(0.5, r=2.0)
        lo, hi = cfg.at_bounds(1, 4)
        assert lo == pytest.approx(1 / 64)
        assert hi == pytest.approx(0.25)

    def test_event_ordering(self):
        X = complete_complex(6, 2)
        pruner = z5_pruner(X)
        kinds = [k for k, _ in pruner.events()]
        assert kinds == sorted(kinds)
