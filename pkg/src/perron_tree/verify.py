"""Checkers for the sign and monotonicity structure of Fiedler-type
eigenvectors on trees, plus the randomized cross-validation harness.

Checkers never raise on a violated property: they return a
:class:`TheoremVerdict` whose diagnostics say which clause matched at each
site, and carry a counterexample when something fails. They are meant to be
fed the eigenvector built by :mod:`perron_tree.spectral`, never an arbitrary
eigensolver column (in a repeated eigenspace those have no sign structure).
"""

from __future__ import annotations

import dataclasses
import logging
from concurrent.futures import ProcessPoolExecutor
from typing import Any

import numpy as np

from .spectral import (
    Classification,
    Kind,
    SpectralReport,
    bottleneck_formula,
    bottleneck_oracle,
    classify_exhaustive,
    lambda1,
    laplacian_bottleneck_oracle,
    perron_branches_at,
)
from .tolerances import DEFAULT, Tolerances
from .tree import Tree, block_decomposition, branches_at, random_tree, shared_path_matrix

log = logging.getLogger(__name__)


@dataclasses.dataclass(frozen=True)
class SignPattern:
    signs: np.ndarray  # int8 in {-1, 0, 1}
    eps: float

    def __getitem__(self, v):
        return self.signs[v]


def sign_pattern(values, tol: Tolerances = DEFAULT) -> SignPattern:
    """Per-vertex sign with a zero band of ``tol.sign * ||values||_inf``."""
    values = np.asarray(values, dtype=float)
    eps = tol.sign * float(np.max(np.abs(values), initial=0.0))
    signs = np.where(values > eps, 1, np.where(values < -eps, -1, 0)).astype(np.int8)
    return SignPattern(signs, eps)


@dataclasses.dataclass
class TheoremVerdict:
    theorem: str
    passed: bool
    case: str | None = None
    sites: list[dict[str, Any]] = dataclasses.field(default_factory=list)
    details: dict[str, Any] = dataclasses.field(default_factory=dict)
    counterexample: dict[str, Any] | None = None

    def fail(self, **payload) -> "TheoremVerdict":
        self.passed = False
        if self.counterexample is None:
            self.counterexample = payload
        return self

    def to_dict(self) -> dict[str, Any]:
        return {
            "theorem": self.theorem,
            "passed": self.passed,
            "case": self.case,
            "details": self.details,
            "counterexample": self.counterexample,
        }


def _valuation(t: Tree, vals, theorem: str, strict: bool, tol: Tolerances) -> TheoremVerdict:
    vals = np.asarray(vals, dtype=float)
    sp = sign_pattern(vals, tol)
    verdict = TheoremVerdict(theorem, True)
    for v in range(t.n):
        if t.degree[v] < 2:
            continue
        comps = branches_at(t, v).branches
        sv = int(sp[v])
        # flip so that the cut vertex is non-negative; case (1) then covers f(v) < 0
        flipped = vals * sv if sv else vals
        fs = sp.signs * sv if sv else sp.signs
        has_pos = [bool(np.any(fs[list(c.vertices)] > 0)) for c in comps]
        has_neg = [bool(np.any(fs[list(c.vertices)] < 0)) for c in comps]
        site = {"vertex": v}
        if sv != 0:
            site["case"] = "1" if sv > 0 else "1 (negated)"
            negative = [i for i, h in enumerate(has_neg) if h]
            if len(negative) != 1:
                verdict.sites.append(site | {"ok": False})
                return verdict.fail(vertex=v, clause="exactly one component with opposite sign",
                                    components=negative)
            if strict:
                rest = [u for i, c in enumerate(comps) if i != negative[0] for u in c.vertices]
                bad = [u for u in rest if not flipped[u] - flipped[v] > sp.eps]
                if bad:
                    verdict.sites.append(site | {"ok": False})
                    return verdict.fail(vertex=v, clause="f(u) > f(v) off the opposite component",
                                        vertices=bad)
        else:
            mixed = [i for i in range(len(comps)) if has_pos[i] and has_neg[i]]
            if mixed:
                site["case"] = "2"
                others_zero = all(not (has_pos[i] or has_neg[i])
                                  for i in range(len(comps)) if i not in mixed)
                if len(mixed) != 1 or not others_zero:
                    verdict.sites.append(site | {"ok": False})
                    return verdict.fail(vertex=v, clause="one mixed component, rest zero",
                                        mixed=mixed)
            else:
                # no component mixes signs, so each is purely +, - or 0
                site["case"] = "3"
        verdict.sites.append(site | {"ok": True})
    cases = sorted({s["case"] for s in verdict.sites})
    verdict.case = ",".join(cases) if cases else None
    return verdict


def check_valuation(t: Tree, f, lambda1: float | None = None,
                    tol: Tolerances = DEFAULT) -> TheoremVerdict:
    """Sign pattern of the harmonic eigenfunction around every cut vertex,
    including the strict growth ``f(u) > f(v)`` away from the sign change.

    ``lambda1`` is only recorded in the verdict for reference.
    """
    verdict = _valuation(t, f, "valuation_f", True, tol)
    if lambda1 is not None:
        verdict.details["lambda1"] = lambda1
    return verdict


def check_valuation_g(t: Tree, g, tol: Tolerances = DEFAULT) -> TheoremVerdict:
    """As :func:`check_valuation` on the eigenfunction itself, without the
    inequality clause (it fails for ``g`` when degrees vary)."""
    return _valuation(t, g, "valuation_g", False, tol)


def _block_class(signs: np.ndarray) -> str:
    s = set(int(x) for x in signs)
    if s == {1}:
        return "positive"
    if s == {-1}:
        return "negative"
    if s == {0}:
        return "zero"
    if 1 in s and -1 in s:
        return "mixed"
    return "semi"  # zero next to nonzero inside one block


def _zero_hubs(t: Tree, sp: SignPattern) -> list[int]:
    return [v for v in range(t.n)
            if sp[v] == 0 and any(sp[w] != 0 for w in t.adjacency[v])]


def _leaf_paths(t: Tree, start: int, blocked: int | None = None):
    """Every path from ``start`` to a leaf, not entering ``blocked``."""
    stack = [(start, -1, [start])]
    while stack:
        u, parent, path = stack.pop()
        nxt = [w for w in t.adjacency[u] if w != parent and w != blocked]
        if not nxt:
            yield path
        for w in reversed(nxt):
            stack.append((w, u, path + [w]))


def _monotone(seq: np.ndarray, direction: int, eps: float) -> bool:
    if direction == 0:
        return bool(np.all(np.abs(seq) <= eps))
    return bool(np.all(direction * np.diff(seq) > eps))


def check_monotonicity(t: Tree, f, tol: Tolerances = DEFAULT) -> TheoremVerdict:
    """Monotonicity of the harmonic eigenfunction over articulation points.

    Case 1 (no mixed edge): one zero vertex ``z`` with a nonzero neighbor;
    from ``z`` outward the articulation values grow on the positive side,
    shrink on the negative side and vanish elsewhere; positive and negative
    vertices sit in different branches at ``z``. Case 2 (one mixed edge):
    leaving that edge, articulation values move away from zero.
    """
    f = np.asarray(f, dtype=float)
    sp = sign_pattern(f, tol)
    art = block_decomposition(t).articulation_points
    verdict = TheoremVerdict("monotonicity", True)
    mixed = [(u, w) for u, w in t.edges if sp[u] * sp[w] < 0]

    if not mixed:
        verdict.case = "1"
        hubs = _zero_hubs(t, sp)
        if len(hubs) != 1 or hubs[0] not in art:
            return verdict.fail(clause="unique articulation point z with f(z)=0", found=hubs)
        z = hubs[0]
        verdict.details["z"] = z
        for u, w in t.edges:
            rest = [x for x in (u, w) if x != z]
            if _block_class(sp.signs[rest]) not in ("positive", "negative", "zero"):
                return verdict.fail(clause="blocks pure apart from z", block=(u, w))
        comp = branches_at(t, z).component
        pos = {comp[v] for v in range(t.n) if sp[v] > 0}
        neg = {comp[v] for v in range(t.n) if sp[v] < 0}
        if pos & neg:
            return verdict.fail(clause="mixed-sign paths pass through z", branches=sorted(pos & neg))
        for path in _leaf_paths(t, z):
            points = [v for v in path[1:] if v in art]
            direction = int(sp[path[1]]) if len(path) > 1 else 0
            ok = _monotone(f[points], direction, sp.eps) and all(sp[v] == direction for v in points)
            verdict.sites.append({"path": path, "direction": direction, "ok": ok})
            if not ok:
                return verdict.fail(clause="monotone from z", path=path)
        return verdict

    if len(mixed) == 1:
        verdict.case = "2"
        a, b = mixed[0]
        verdict.details["mixed_block"] = (a, b)
        for u, w in t.edges:
            if (u, w) != (a, b) and _block_class(sp.signs[[u, w]]) == "semi":
                return verdict.fail(clause="other blocks positive, negative or zero", block=(u, w))
        for v, other in ((a, b), (b, a)):
            direction = int(sp[v])
            for path in _leaf_paths(t, v, blocked=other):
                points = [x for x in path if x in art]
                ok = _monotone(f[points], direction, sp.eps)
                if direction == 0:
                    ok = ok and bool(np.all(sp.signs[path] == 0))
                verdict.sites.append({"path": path, "direction": direction, "ok": ok})
                if not ok:
                    return verdict.fail(clause="monotone leaving the mixed block", path=path)
        return verdict

    verdict.case = None
    return verdict.fail(clause="at most one mixed block", mixed=mixed)


def check_block_signs(t: Tree, g, tol: Tolerances = DEFAULT) -> TheoremVerdict:
    """Classify every block by the signs of ``g`` and require exactly one of:
    no mixed block and a unique zero articulation point ``z`` with every
    block pure apart from ``z``; or a unique mixed block, all others pure."""
    sp = sign_pattern(g, tol)
    bd = block_decomposition(t)
    classes = [_block_class(sp.signs[sorted(b)]) for b in bd.blocks]
    verdict = TheoremVerdict("block_signs", True)
    verdict.sites = [{"block": sorted(b), "class": c} for b, c in zip(bd.blocks, classes)]
    n_mixed = classes.count("mixed")
    if n_mixed == 0:
        verdict.case = "1"
        hubs = [v for v in _zero_hubs(t, sp) if v in bd.articulation_points]
        if len(hubs) != 1:
            return verdict.fail(clause="unique zero articulation point", found=hubs)
        z = hubs[0]
        verdict.details["z"] = z
        classes = [_block_class(sp.signs[sorted(b - {z})]) if z in b else c
                   for b, c in zip(bd.blocks, classes)]
        verdict.details["counts"] = {c: classes.count(c) for c in sorted(set(classes))}
        if "semi" in classes:
            return verdict.fail(clause="blocks pure apart from z")
        return verdict
    verdict.details["counts"] = {c: classes.count(c) for c in sorted(set(classes))}
    if n_mixed == 1:
        verdict.case = "2"
        verdict.details["mixed_block"] = tuple(sorted(bd.blocks[classes.index("mixed")]))
        if "semi" in classes:
            return verdict.fail(clause="remaining blocks positive, negative or zero")
        return verdict
    return verdict.fail(clause="at most one mixed block", mixed=n_mixed)


def check_sign_consistency(f, g, tol: Tolerances = DEFAULT) -> TheoremVerdict:
    """``sign(f) == sign(g)`` vertexwise."""
    a, b = sign_pattern(f, tol).signs, sign_pattern(g, tol).signs
    verdict = TheoremVerdict("sign_consistency", True)
    bad = np.flatnonzero(a != b).tolist()
    return verdict.fail(vertices=bad) if bad else verdict


def check_corollary(t: Tree, cls: Classification, tol: Tolerances = DEFAULT) -> TheoremVerdict:
    """Away from the characteristic vertices there is exactly one Perron
    branch, and it contains all of them."""
    verdict = TheoremVerdict("corollary", True)
    for u in range(t.n):
        if u in cls.characteristic:
            continue
        pb = perron_branches_at(t, u, tol)
        if len(pb.perron) != 1:
            return verdict.fail(vertex=u, clause="unique Perron branch", perron=pb.perron)
        comp = pb.branch_set.component
        if any(comp[c] != pb.perron[0] for c in cls.characteristic):
            return verdict.fail(vertex=u, clause="Perron branch holds the characteristic site")
    return verdict


def check_classification_consistency(cls: Classification, mono: TheoremVerdict,
                                     blocks: TheoremVerdict) -> TheoremVerdict:
    """Type 1 pairs with the no-mixed-block case at the characteristic
    vertex; Type 2 with the single mixed block on the characteristic edge."""
    verdict = TheoremVerdict("classification_consistency", True)
    if cls.kind is Kind.TYPE1:
        verdict.case = "1"
        for v in (mono, blocks):
            if v.case != "1" or v.details.get("z") != cls.characteristic[0]:
                return verdict.fail(checker=v.theorem, case=v.case, z=v.details.get("z"))
    else:
        verdict.case = "2"
        for v in (mono, blocks):
            if v.case != "2" or tuple(sorted(v.details.get("mixed_block", ()))) != cls.characteristic:
                return verdict.fail(checker=v.theorem, case=v.case,
                                    mixed_block=v.details.get("mixed_block"))
    return verdict


def run_checks(t: Tree, report: SpectralReport, tol: Tolerances = DEFAULT) -> dict[str, TheoremVerdict]:
    """Every structural checker on the eigenvector of ``report``."""
    mono = check_monotonicity(t, report.f, tol)
    blocks = check_block_signs(t, report.g, tol)
    return {
        "valuation_f": check_valuation(t, report.f, report.lambda1, tol),
        "valuation_g": check_valuation_g(t, report.g, tol),
        "monotonicity": mono,
        "block_signs": blocks,
        "sign_consistency": check_sign_consistency(report.f, report.g, tol),
        "corollary": check_corollary(t, report.classification, tol),
        "classification_consistency": check_classification_consistency(
            report.classification, mono, blocks),
    }


def bottleneck_deviations(t: Tree, tol: Tolerances = DEFAULT) -> tuple[float, float, float]:
    """Max entrywise deviations over every branch at every vertex:
    normalized formula vs inversion, Laplacian inversion vs path counts, and
    the anchor-row identity ``M e_a = sqrt(d_a) * sqrt(d)``."""
    norm_dev = lap_dev = anchor_dev = 0.0
    for k in range(t.n):
        for b in branches_at(t, k).branches:
            formula = bottleneck_formula(t, k, b)
            oracle = bottleneck_oracle(t, k, b, tol)
            norm_dev = max(norm_dev, float(np.max(np.abs(formula.matrix - oracle.matrix))))
            counts = shared_path_matrix(t, k, b.vertices)
            lap = laplacian_bottleneck_oracle(t, k, b, tol)
            lap_dev = max(lap_dev, float(np.max(np.abs(lap - counts))))
            s = formula.sqrt_degrees
            row = formula.matrix[formula.anchor_index]
            anchor_dev = max(anchor_dev, float(np.max(np.abs(row - s[formula.anchor_index] * s))))
    return norm_dev, lap_dev, anchor_dev


@dataclasses.dataclass
class TrialResult:
    n: int
    seed: int
    passed: bool
    kind: str | None = None
    lambda_dev: float = float("nan")
    residual_rel: float = float("nan")
    orth_residual: float = float("nan")
    fixed_point_gap: float | None = None
    bottleneck_dev: float = float("nan")
    laplacian_bottleneck_dev: float = float("nan")
    anchor_row_dev: float = float("nan")
    spectrum_ok: bool = False
    classification_agrees: bool = False
    verdicts: dict[str, bool] = dataclasses.field(default_factory=dict)
    problems: list[str] = dataclasses.field(default_factory=list)


def run_trial(n: int, seed: int, tol: Tolerances = DEFAULT, lemmas: bool = True) -> TrialResult:
    """All cross-checks on ``random_tree(n, seed)``; never raises."""
    res = TrialResult(n, seed, False)
    try:
        t = random_tree(n, seed)
        report = lambda1(t, tol)
        cls = report.classification
        res.kind = cls.kind.value
        res.classification_agrees = cls.same_as(classify_exhaustive(t, tol))
        res.lambda_dev = abs(report.lambda1 - report.oracle_lambda1)
        res.residual_rel = report.residual_inf / max(1.0, float(np.max(np.abs(report.g))))
        res.orth_residual = report.orth_residual
        res.fixed_point_gap = report.fixed_point_gap
        spectrum = report.oracle_spectrum
        res.spectrum_ok = bool(abs(spectrum[0]) <= 1e-10
                               and spectrum[0] >= -1e-10 and spectrum[-1] <= 2 + 1e-10)
        if lemmas:
            res.bottleneck_dev, res.laplacian_bottleneck_dev, res.anchor_row_dev = \
                bottleneck_deviations(t, tol)
        res.verdicts = {k: v.passed for k, v in run_checks(t, report, tol).items()}
    except Exception as exc:  # counted, not propagated
        res.problems.append(f"{type(exc).__name__}: {exc}")
        return res

    p = res.problems
    if not res.classification_agrees:
        p.append("walk and exhaustive classification differ")
    if not res.lambda_dev <= 1e-8:
        p.append(f"lambda1 deviates from oracle by {res.lambda_dev:.3e}")
    if not res.residual_rel <= 1e-8:
        p.append(f"eigen residual {res.residual_rel:.3e}")
    if not res.orth_residual <= 1e-8:
        p.append(f"orthogonality residual {res.orth_residual:.3e}")
    if res.fixed_point_gap is not None and not res.fixed_point_gap <= 1e-10:
        p.append(f"fixed point gap {res.fixed_point_gap:.3e}")
    if not res.spectrum_ok:
        p.append("spectrum outside [0, 2]")
    if lemmas:
        if not res.bottleneck_dev <= 1e-9:
            p.append(f"normalized bottleneck deviation {res.bottleneck_dev:.3e}")
        if not res.laplacian_bottleneck_dev <= 1e-9:
            p.append(f"Laplacian bottleneck deviation {res.laplacian_bottleneck_dev:.3e}")
        if not res.anchor_row_dev <= 1e-9:
            p.append(f"anchor row deviation {res.anchor_row_dev:.3e}")
    p.extend(f"{name} failed" for name, ok in res.verdicts.items() if not ok)
    res.passed = not p
    return res


@dataclasses.dataclass
class EnsembleSummary:
    n_min: int
    n_max: int
    trials: int
    seed: int
    passed: int = 0
    type_counts: dict[str, int] = dataclasses.field(default_factory=dict)
    classification_agreements: int = 0
    max_lambda_dev: float = 0.0
    max_residual: float = 0.0
    max_orth_residual: float = 0.0
    max_fixed_point_gap: float = 0.0
    max_bottleneck_dev: float = 0.0
    max_laplacian_bottleneck_dev: float = 0.0
    max_anchor_row_dev: float = 0.0
    verdict_passes: dict[str, int] = dataclasses.field(default_factory=dict)
    failures: list[dict[str, Any]] = dataclasses.field(default_factory=list)

    @property
    def failed(self) -> int:
        return self.trials - self.passed

    def to_dict(self) -> dict[str, Any]:
        out = dataclasses.asdict(self)
        out["failed"] = self.failed
        return out


def trial_plan(n_min: int, n_max: int, trials: int, seed: int) -> list[tuple[int, int]]:
    """``(n, tree_seed)`` per trial, drawn from one PCG64 stream."""
    rng = np.random.Generator(np.random.PCG64(seed))
    return [(int(rng.integers(n_min, n_max + 1)), int(rng.integers(0, 2**63 - 1)))
            for _ in range(trials)]


def _max(a: float, b) -> float:
    if b is None or np.isnan(b):
        return a
    return max(a, float(b))


def ensemble_crosscheck(n_min: int, n_max: int, trials: int, seed: int,
                        tol: Tolerances = DEFAULT, workers: int = 1,
                        lemmas: bool = True, max_examples: int = 10) -> EnsembleSummary:
    """Run :func:`run_trial` on ``trials`` random trees with sizes uniform in
    ``[n_min, n_max]`` and aggregate. Serial and parallel runs (``workers``
    processes) produce identical summaries."""
    if not 2 <= n_min <= n_max:
        raise ValueError(f"need 2 <= n_min <= n_max, got {n_min}, {n_max}")
    if trials < 1:
        raise ValueError(f"need trials >= 1, got {trials}")
    plan = trial_plan(n_min, n_max, trials, seed)
    args = [(n, s, tol, lemmas) for n, s in plan]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            results = list(pool.map(run_trial, *zip(*args), chunksize=8))
    else:
        results = [run_trial(*a) for a in args]

    summary = EnsembleSummary(n_min, n_max, trials, seed)
    for r in results:
        summary.passed += r.passed
        if r.kind:
            summary.type_counts[r.kind] = summary.type_counts.get(r.kind, 0) + 1
        summary.classification_agreements += r.classification_agrees
        summary.max_lambda_dev = _max(summary.max_lambda_dev, r.lambda_dev)
        summary.max_residual = _max(summary.max_residual, r.residual_rel)
        summary.max_orth_residual = _max(summary.max_orth_residual, r.orth_residual)
        summary.max_fixed_point_gap = _max(summary.max_fixed_point_gap, r.fixed_point_gap)
        summary.max_bottleneck_dev = _max(summary.max_bottleneck_dev, r.bottleneck_dev)
        summary.max_laplacian_bottleneck_dev = _max(summary.max_laplacian_bottleneck_dev,
                                                    r.laplacian_bottleneck_dev)
        summary.max_anchor_row_dev = _max(summary.max_anchor_row_dev, r.anchor_row_dev)
        for name, ok in r.verdicts.items():
            summary.verdict_passes[name] = summary.verdict_passes.get(name, 0) + ok
        if not r.passed:
            log.warning("trial n=%d seed=%d failed: %s", r.n, r.seed, "; ".join(r.problems))
            if len(summary.failures) < max_examples:
                summary.failures.append({"n": r.n, "seed": r.seed, "problems": r.problems})
    summary.type_counts = dict(sorted(summary.type_counts.items()))
    summary.verdict_passes = dict(sorted(summary.verdict_passes.items()))
    return summary
