"""Experiment orchestration: pipelines, audits, and report emission.

A spec is a plain dict (usually parsed from CLI flags or a JSON file)
naming a pipeline and its inputs.  Reports are emitted as deterministic
JSON (stable key order, no timestamps); wall times go to a separate file
so identical seeds reproduce identical report bytes.
"""
from __future__ import annotations

import hashlib
import json
import os
import time
from dataclasses import dataclass, field

import numpy as np

from . import combine as combine_mod
from . import covers as covers_mod
from . import groups as groups_mod
from . import pruning as pruning_mod
from . import sparsify as sparsify_mod
from .complexes import check_suitable, complete_complex, complex_from_dict
from .errors import HdxError, InputError
from .graphs import WGraph
from .spectral import adjacency_spectrum, is_hdx, spectra_csv

EXIT_CLEAN = 0
EXIT_BUDGET = 2
EXIT_AUDIT = 3
EXIT_INPUT = 4


def stage_seed(master, stage):
    """Deterministic per-stage seed: the stage name hashed into the stream."""
    digest = hashlib.sha256(f"{master}:{stage}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


@dataclass
class RunReport:
    spec: dict
    stages: list = field(default_factory=list)
    audits: list = field(default_factory=list)
    status: str = "clean"
    exit_code: int = EXIT_CLEAN
    timings: dict = field(default_factory=dict)
    spectra: str | None = None
    lambda_series: list = field(default_factory=list)
    outcome: dict | None = None
    cover_export: dict | None = None

    def add_stage(self, name, payload):
        self.stages.append({"name": name, "result": payload})

    def add_audit(self, name, ok, detail):
        self.audits.append({"name": name, "ok": bool(ok), "detail": detail})

    def finish(self):
        if any(not a["ok"] for a in self.audits) and self.exit_code == EXIT_CLEAN:
            self.exit_code = EXIT_AUDIT
            self.status = "audit_failure"
        return self

    def payload(self):
        # timings are deliberately left out: identical seeds must yield
        # identical bytes
        return {
            "spec": self.spec,
            "stages": self.stages,
            "audits": self.audits,
            "status": self.status,
            "exit_code": self.exit_code,
        }

    def to_json_bytes(self):
        return (
            json.dumps(self.payload(), sort_keys=True, indent=2, default=_jsonify)
            + "\n"
        ).encode()


def _jsonify(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (set, frozenset)):
        return sorted(obj)
    raise TypeError(f"cannot serialize {type(obj)!r}")


# --- input loading ---


def _maybe_inline(obj):
    """File path, or inline JSON when the string looks like JSON."""
    if isinstance(obj, str) and obj.lstrip()[:1] in ("{", "["):
        return json.loads(obj)
    return obj


def _load_complex_input(obj):
    obj = _maybe_inline(obj)
    if isinstance(obj, str):
        with open(obj) as fh:
            obj = json.load(fh)
    if obj.get("kind") == "complete":
        return complete_complex(int(obj["n"]), int(obj["dim"]))
    return complex_from_dict(obj)


def _load_group_input(obj):
    obj = _maybe_inline(obj)
    if isinstance(obj, str):
        with open(obj) as fh:
            obj = json.load(fh)
    return groups_mod.make_group(obj)


def _load_graph_input(obj):
    obj = _maybe_inline(obj)
    if isinstance(obj, str):
        with open(obj) as fh:
            obj = json.load(fh)
    if obj.get("kind") == "complete":
        n = int(obj["n"])
        return WGraph([(i, j, 1.0) for i in range(n) for j in range(i + 1, n)])
    if obj.get("kind") == "edges" or "edges" in obj:
        return WGraph([tuple(e) for e in obj["edges"]])
    raise InputError(f"unrecognized graph object: {sorted(obj)}")


def _load_genset_input(obj):
    obj = _maybe_inline(obj)
    if isinstance(obj, str):
        with open(obj) as fh:
            obj = json.load(fh)
    if isinstance(obj, dict):
        obj = obj["generators"]
    return [int(x) for x in obj]


# --- pipelines ---


def _prune_config(params):
    mode = params.get("mode", "empirical")
    kw = dict(
        lambda_target=float(params.get("lambda", 0.9)),
        r=float(params.get("r", 1.5)),
        c=float(params.get("c", 1.1)),
        eta=float(params.get("eta", 0.3)),
        max_resamples=int(params.get("max_resamples", 10_000)),
    )
    if mode == "formula":
        return pruning_mod.PruneConfig.formula(**kw)
    if mode == "empirical":
        lam = kw.pop("lambda_target")
        mr = kw.pop("max_resamples")
        return pruning_mod.PruneConfig.empirical(lam, max_resamples=mr, **kw)
    raise InputError(f"unknown prune mode {mode!r}")


def _transcript_digest(transcript):
    h = hashlib.sha256()
    for entry in transcript:
        h.update(repr(entry).encode())
    return h.hexdigest()


def _prune_stages(report, params, seed):
    X = _load_complex_input(params["complex"])
    group = _load_group_input(params["group"])
    gens = groups_mod.validate_genset(group, _load_genset_input(params["genset"]))
    config = _prune_config(params)

    t0 = time.perf_counter()
    suit = check_suitable(X, config.c, config.r, config.eta)
    report.add_stage("suitability", suit.to_dict())
    report.timings["suitability"] = time.perf_counter() - t0

    cayley = groups_mod.cayley_clique_complex(group, gens, X.dim)
    chyp = is_hdx(cayley.complex, 1.0, include_empty_face=False)
    report.add_stage(
        "cayley",
        {
            "group": group.name,
            "gens": list(gens),
            "worst_link_lambda": chyp.worst_value,
        },
    )

    t0 = time.perf_counter()
    pruner = pruning_mod.Pruner(X, group, gens, config, cayley=cayley)
    outcome = pruner.run(stage_seed(seed, "prune"))
    report.timings["prune"] = time.perf_counter() - t0
    report.add_stage(
        "prune",
        {
            "status": outcome.status,
            "resamples": outcome.resamples,
            "transcript_digest": _transcript_digest(outcome.transcript),
            "kept_top_faces": 0 if outcome.y is None else len(outcome.y.top_faces),
            "isolated_vertices": list(outcome.isolated_vertices),
            "violations_remaining": [
                [k, list(f)] for k, f in outcome.violations_remaining
            ],
        },
    )
    report.outcome = {
        "labeling": [
            [int(u), int(v), int(l)]
            for (u, v), l in zip(outcome.edges, outcome.labeling)
        ],
        "y_top_faces": []
        if outcome.y is None
        else [list(f) for f in outcome.y.top_faces],
        "transcript": [
            [it, kind, list(face), len(scope)]
            for it, kind, face, scope in outcome.transcript
        ],
        "status": outcome.status,
    }
    return X, group, gens, cayley, config, outcome


def _audit_clean_prune(report, X, group, gens, cayley, config, outcome):
    y = outcome.y
    lam = config.lambda_target
    hdx = is_hdx(y, lam)
    report.add_audit("y_is_hdx", hdx.passes, hdx.to_dict())
    report.spectra = spectra_csv(hdx)
    report.lambda_series = sorted(row.value for row in hdx.rows)

    m = len(gens)
    d = X.dim
    uniform_bound = (1.0 / (2 * m**d)) ** d
    fractions = pruning_mod.face_fraction_report(X, y)
    frac_ok = all(v >= uniform_bound for v in fractions.values())
    for ell in range(0, d):
        frac_ok = frac_ok and fractions[ell] >= (1.0 / (2 * m**d)) ** (d - ell)
    report.add_audit(
        "face_fraction",
        frac_ok,
        {"fractions": {str(k): v for k, v in fractions.items()}, "bound": uniform_bound},
    )

    f_elems = outcome.labeling_elements(gens)
    hol = covers_mod.holonomy_subgroup(y, f_elems, group, y.vertices[0])
    report.add_audit(
        "holonomy_full", len(hol) == group.order, {"subgroup_order": len(hol)}
    )

    cover = covers_mod.build_cover(y, f_elems, group)
    comp = covers_mod.cover_components(cover)
    report.add_audit(
        "cover_connected",
        comp.count == 1 and comp.matches,
        {"components": comp.count, "expected_index": comp.expected_index},
    )
    cover_report = covers_mod.verify_cover(cover)
    report.add_audit(
        "verify_cover",
        cover_report.ok,
        {"faces_checked": cover_report.faces_checked,
         "violations": len(cover_report.violations)},
    )
    report.cover_export = covers_mod.cover_to_dict(cover)

    worst_gap = 0.0
    base_spec = {
        v: adjacency_spectrum(y.link((v,)).one_skeleton()).eigenvalues
        for v in y.vertices
    }
    for vid in cover.complex.vertices:
        bv = cover.phi(vid)
        ev = adjacency_spectrum(
            cover.complex.link((vid,)).one_skeleton()
        ).eigenvalues
        gap = max(abs(a - b) for a, b in zip(ev, base_spec[bv]))
        worst_gap = max(worst_gap, gap)
    report.add_audit("cover_link_spectra", worst_gap <= 1e-9, {"worst_gap": worst_gap})

    pm = pruning_mod.pruned_measure(y, outcome.labeling_dict(), group, gens, cayley)
    report.add_audit(
        "pruned_measure_total", abs(pm.total - 1.0) <= 1e-9, {"total": pm.total}
    )

    worst_ratio = 1.0
    bound = config.r ** (15 * d)
    f_arr = outcome.labeling
    pruner = pruning_mod.Pruner(X, group, gens, config, cayley=cayley)
    for ell in range(0, d - 1):
        for sigma in X.faces(ell):
            if not pruner.face_satisfied(sigma, f_arr):
                continue
            ratio = pruning_mod.measure_ratio_audit(
                X, y, f_arr, group, gens, sigma, cayley=cayley, config=config
            )
            if not ratio.support_matches:
                report.add_audit("measure_ratio", False, {"sigma": list(sigma)})
                return
            worst_ratio = max(worst_ratio, ratio.max_ratio)
    report.add_audit(
        "measure_ratio",
        worst_ratio <= bound,
        {"max_ratio": worst_ratio, "bound": bound},
    )


def run_prune(report, params, seed):
    X, group, gens, cayley, config, outcome = _prune_stages(report, params, seed)
    if outcome.status != "clean":
        report.status = "budget_exhausted"
        report.exit_code = EXIT_BUDGET
        return report.finish(), outcome
    _audit_clean_prune(report, X, group, gens, cayley, config, outcome)
    return report.finish(), outcome


def run_cover_family(report, params, seed):
    report, outcome = run_prune(report, params, seed)
    if outcome.status != "clean":
        return report
    group = _load_group_input(params["group"])
    gens = groups_mod.validate_genset(group, _load_genset_input(params["genset"]))
    y = outcome.y
    f_elems = outcome.labeling_elements(gens)
    index_cap = int(params.get("index_cap", 64))
    family = []
    lam = float(params.get("lambda", 0.9))
    for sub in groups_mod.normal_subgroups(group, index_cap=index_cap):
        quotient = groups_mod.quotient_group(group, sub)
        pushed = covers_mod.push_cocycle(y, f_elems, group, quotient)
        cover = covers_mod.build_cover(y, pushed, quotient.group)
        comp = covers_mod.cover_components(cover)
        vc = covers_mod.verify_cover(cover)
        links = is_hdx(cover.complex, lam, include_empty_face=False)
        skeleton = adjacency_spectrum(cover.complex.one_skeleton()).two_sided
        family.append(
            {
                "subgroup_order": len(sub),
                "quotient_order": quotient.group.order,
                "cover_vertices": len(cover.complex.vertices),
                "components": comp.count,
                "verified": vc.ok,
                "links_within_lambda": links.passes,
                "skeleton_lambda": skeleton,
            }
        )
        report.add_audit(
            f"cover_family_index_{quotient.group.order}",
            vc.ok and comp.count == 1 and links.passes,
            {"components": comp.count, "skeleton_lambda": skeleton},
        )
    report.add_stage("cover_family", {"members": family})
    return report.finish()


def run_sparsify(report, params, seed):
    G = _load_graph_input(params["graph"])
    trial = sparsify_mod.sparsify_trial(
        G,
        float(params.get("p_split", 0.3)),
        float(params.get("p_edge", 0.5)),
        int(params.get("trials", 50)),
        stage_seed(seed, "sparsify"),
        split_factor=float(params.get("split_factor", 100.0)),
        edge_threshold=float(params.get("edge_threshold", 0.95)),
    )
    report.add_stage("sparsify", trial.to_dict())
    report.lambda_series = sorted(trial.edge_lambdas)
    report.add_audit(
        "split_bound_rate", trial.split_ok_fraction >= 0.9, trial.split_ok_fraction
    )
    report.add_audit(
        "edge_threshold_rate", trial.edge_ok_fraction >= 0.9, trial.edge_ok_fraction
    )
    return report.finish()


def run_combine(report, params, seed):
    X = _load_complex_input(params["complex"])
    C = _load_complex_input(params["target"])
    lam = params.get("lambda")
    if lam is None:
        lam = is_hdx(C, 1.0).worst_value
        lam = max(min(lam, 0.999), 1e-6)
    config = combine_mod.CombineConfig(
        lambda_target=float(lam),
        max_resamples=int(params.get("max_resamples", 10_000)),
    )
    outcome = combine_mod.moser_tardos_combine(
        X, C, config, stage_seed(seed, "combine")
    )
    report.add_stage(
        "combine",
        {
            "status": outcome.status,
            "resamples": outcome.resamples,
            "transcript_digest": _transcript_digest(outcome.transcript),
            "measure_kind": outcome.measure_kind,
            "kept_top_faces": 0 if outcome.y is None else len(outcome.y.top_faces),
        },
    )
    report.outcome = {
        "coloring": {str(v): c for v, c in sorted(outcome.coloring.items())},
        "y_top_faces": []
        if outcome.y is None
        else [list(f) for f in outcome.y.top_faces],
        "transcript": [
            [it, kind, list(face), len(scope)]
            for it, kind, face, scope in outcome.transcript
        ],
        "status": outcome.status,
    }
    if outcome.status != "clean":
        report.status = "budget_exhausted"
        report.exit_code = EXIT_BUDGET
        return report.finish()
    verdict = combine_mod.verify_combine(X, C, outcome)
    report.add_audit("verify_combine", verdict.ok, verdict.to_dict())
    return report.finish()


def run_scan(report, params, seed):
    group = _load_group_input(params["group"])
    dim = int(params.get("dim", 2))
    candidates = groups_mod.scan_gensets(
        group,
        dim,
        eta_target=params.get("eta"),
        max_size=int(params.get("max_size", 8)),
    )
    report.add_stage(
        "scan",
        {
            "group": group.name,
            "candidates": [
                {
                    "gens": list(c.gens),
                    "worst_link_lambda": c.worst_link_lambda,
                    "meets_target": c.meets_target,
                }
                for c in candidates
            ],
        },
    )
    report.lambda_series = sorted(c.worst_link_lambda for c in candidates)
    if candidates:
        best = candidates[0]
        cayley = groups_mod.cayley_clique_complex(group, best.gens, dim)
        again = is_hdx(cayley.complex, 1.0, include_empty_face=False).worst_value
        report.add_audit(
            "scan_reverification",
            abs(again - best.worst_link_lambda) <= 1e-9,
            {"gens": list(best.gens), "lambda": best.worst_link_lambda},
        )
    return report.finish()


PIPELINES = {
    "prune": lambda rep, p, s: run_prune(rep, p, s)[0],
    "cover-family": run_cover_family,
    "sparsify": run_sparsify,
    "combine": run_combine,
    "scan": run_scan,
}


def run_experiment(spec):
    """Dispatch a spec dict to its pipeline; returns a RunReport."""
    kind = spec.get("kind")
    if kind not in PIPELINES:
        raise InputError(f"unknown pipeline {kind!r}")
    params = spec.get("params", {})
    seed = int(spec.get("seed", 0))
    report = RunReport(spec={"kind": kind, "params": params, "seed": seed})
    t0 = time.perf_counter()
    try:
        PIPELINES[kind](report, params, seed)
    except (OSError, json.JSONDecodeError, KeyError, InputError) as exc:
        report.status = "input_error"
        report.exit_code = EXIT_INPUT
        report.add_stage("error", {"message": str(exc)})
    except HdxError as exc:
        report.status = "input_error"
        report.exit_code = EXIT_INPUT
        report.add_stage("error", {"type": type(exc).__name__, "message": str(exc)})
    report.timings["total"] = time.perf_counter() - t0
    return report


def emit_report(report, out_dir, formats=("json", "csv", "plot")):
    """Write the report files; returns the list of paths written."""
    os.makedirs(out_dir, exist_ok=True)
    written = []

    path = os.path.join(out_dir, "report.json")
    with open(path, "wb") as fh:
        fh.write(report.to_json_bytes())
    written.append(path)

    if "csv" in formats and report.spectra:
        path = os.path.join(out_dir, "spectra.csv")
        with open(path, "w") as fh:
            fh.write(report.spectra)
        written.append(path)

    if report.outcome is not None:
        path = os.path.join(out_dir, "outcome.json")
        with open(path, "w") as fh:
            json.dump(report.outcome, fh, sort_keys=True, indent=2,
                      default=_jsonify)
            fh.write("\n")
        written.append(path)

    if report.cover_export is not None:
        path = os.path.join(out_dir, "cover.json")
        with open(path, "w") as fh:
            json.dump(report.cover_export, fh, sort_keys=True, indent=2,
                      default=_jsonify)
            fh.write("\n")
        written.append(path)

    if "plot" in formats and report.lambda_series:
        path = os.path.join(out_dir, "lambda_series.dat")
        with open(path, "w") as fh:
            for i, v in enumerate(report.lambda_series):
                fh.write(f"{i} {v!r}\n")
        written.append(path)

    path = os.path.join(out_dir, "timings.json")
    with open(path, "w") as fh:
        json.dump(report.timings, fh, sort_keys=True, indent=2)
        fh.write("\n")
    written.append(path)
    return written
