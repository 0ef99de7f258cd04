"""Verification commands: each runs one family of checks and returns a JSON-ready report."""

from __future__ import annotations

import csv
import math
import time
from contextlib import contextmanager

import jsonschema
import numpy as np

from . import charsum as cs
from .cayley import CayleyGraph, ConnectionSpec, build_connection, is_peisert_type
from .clique import (
    VertexSet,
    classify_structure,
    enumerate_max_cliques_zero,
    find_subspace_extension,
    is_clique,
    is_maximal_clique,
    max_clique,
    unique_01_max_clique,
    verify_stability,
)
from .directions import (
    INF,
    default_embedding,
    direction_set,
    embed,
    search_extension,
    verify_ball_dichotomy,
)
from .errors import SearchTimeout
from .ff import FieldTower, cached_tower, divisors, is_prime, prime_power

SCHEMA_VERSION = "1"

VERIFIED = "verified"
REFUTED = "refuted"
NOT_APPLICABLE = "hypothesis_not_applicable"
TIMEOUT = "timeout"

EXIT_CODES = {VERIFIED: 0, REFUTED: 1, NOT_APPLICABLE: 2, TIMEOUT: 3}
EXIT_USAGE = 4

REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "pclab verification report",
    "type": "object",
    "required": ["schema_version", "command", "params", "field", "verdict", "witnesses", "metrics"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "command": {"type": "string"},
        "params": {"type": "object"},
        "field": {
            "type": ["object", "null"],
            "required": ["p", "n", "N", "modulus", "generator"],
            "properties": {
                "p": {"type": "integer"},
                "n": {"type": "integer"},
                "N": {"type": "integer"},
                "modulus": {"type": "array", "items": {"type": "integer"}},
                "generator": {"type": "array", "items": {"type": "integer"}},
            },
        },
        "verdict": {"enum": [VERIFIED, REFUTED, NOT_APPLICABLE, TIMEOUT]},
        "witnesses": {
            "type": "array",
            "items": {"type": "array", "items": {"type": "integer"}},
        },
        "metrics": {
            "type": "object",
            "properties": {
                "omega": {"type": ["integer", "null"]},
                "counts": {"type": "object"},
                "margins": {"type": "object"},
                "timings_ms": {"type": "object"},
            },
        },
        "advisory": {"type": "object"},
        "notes": {"type": "array", "items": {"type": "string"}},
    },
}


def validate_report(report: dict) -> None:
    jsonschema.validate(report, REPORT_SCHEMA)


class Job:
    """Parameters shared by every command plus the report being assembled."""

    def __init__(self, command: str, params: dict, budget_ms: int = 120_000,
                 threads: int = 1, seed: int = 0, cache_dir=None):
        self.command = command
        self.params = {k: v for k, v in params.items() if v is not None}
        self.budget_ms = budget_ms
        self.threads = threads
        self.seed = seed
        self.cache_dir = cache_dir
        self.start = time.monotonic()
        self.tower: FieldTower | None = None
        self.witnesses: list[list[int]] = []
        self.metrics: dict = {"omega": None, "counts": {}, "margins": {}, "timings_ms": {}}
        self.advisory: dict = {}
        self.notes: list[str] = []

    @property
    def remaining_s(self) -> float:
        return max(0.0, self.budget_ms / 1000 - (time.monotonic() - self.start))

    def get_tower(self, p, n, N) -> FieldTower:
        self.tower = cached_tower(p, n, N, self.cache_dir)
        return self.tower

    @contextmanager
    def timed(self, label):
        t0 = time.monotonic()
        yield
        self.metrics["timings_ms"][label] = round(1000 * (time.monotonic() - t0), 3)

    def witness(self, C):
        self.witnesses.append(VertexSet.of(C).dlogs(self.tower) if self.tower else list(C))

    def report(self, verdict: str) -> dict:
        self.metrics["timings_ms"]["total"] = round(1000 * (time.monotonic() - self.start), 3)
        out = {
            "schema_version": SCHEMA_VERSION,
            "command": self.command,
            "params": {**self.params, "budget_ms": self.budget_ms, "threads": self.threads,
                       "seed": self.seed},
            "field": self.tower.describe() if self.tower else None,
            "verdict": verdict,
            "witnesses": self.witnesses,
            "metrics": self.metrics,
            "advisory": self.advisory,
            "notes": self.notes,
        }
        validate_report(out)
        return out


def _graph(job: Job, p, n, N, spec: ConnectionSpec) -> CayleyGraph:
    tower = job.get_tower(p, n, N)
    return CayleyGraph(tower, build_connection(spec, tower))


def _threshold(name, p, value):
    return {"name": name, "threshold": value, "p": p, "inside_guaranteed_regime": p > value}


def _peisert_type_uniqueness(job: Job, graph: CayleyGraph, affine_check: bool = False) -> str:
    """omega = q, every maximum 0-clique a subgroup, and F_q the only 0,1-clique."""
    tower = graph.tower
    q = tower.q
    pt = is_peisert_type(graph.S, tower)
    job.metrics["counts"]["cosets_m"] = pt.m
    if not pt.ok:
        job.notes.append(f"not a Peisert-type graph: {pt.reason}")
        return NOT_APPLICABLE
    with job.timed("max_clique"):
        res = max_clique(graph, job.remaining_s)
    job.metrics["omega"] = res.omega
    with job.timed("enumerate_zero"):
        cliques = enumerate_max_cliques_zero(graph, res.omega, budget_s=job.remaining_s,
                                             workers=job.threads)
    with job.timed("unique_01"):
        u = unique_01_max_clique(graph, res.omega, budget_s=job.remaining_s)
    flags = [classify_structure(C, tower) for C in cliques]
    job.metrics["counts"].update({
        "max_cliques_zero": len(cliques),
        "max_cliques_01": len(u.cliques_01),
        "subgroup_cliques": sum(f.is_additive_subgroup for f in flags),
        "coset_lines": sum(f.is_Fq_coset_line for f in flags),
    })
    verdict = VERIFIED
    if res.omega != q:
        job.notes.append(f"omega = {res.omega} differs from q = {q}")
        job.witness(res.witness)
        verdict = REFUTED
    for C, f in zip(cliques, flags):
        if not f.is_additive_subgroup:
            job.notes.append("maximum 0-clique that is not an additive subgroup")
            job.witness(C)
            verdict = REFUTED
        elif affine_check and not f.is_Fq_coset_line:
            job.notes.append("maximum 0-clique that is not of the form c*F_q")
            job.witness(C)
            verdict = REFUTED
    if not u.unique_subfield:
        for C in u.violations:
            job.witness(C)
        job.notes.append("F_q is not the only maximum clique through 0 and 1")
        verdict = REFUTED
    return verdict


def _run(job: Job, body) -> dict:
    try:
        verdict = body()
    except SearchTimeout as exc:
        job.metrics["margins"]["lower_bound"] = exc.lower
        job.metrics["margins"]["upper_bound"] = exc.upper
        job.notes.append(str(exc))
        verdict = TIMEOUT
    return job.report(verdict)


# -- commands -------------------------------------------------------------

def cmd_verify_vlm(q: int, **kw) -> dict:
    """Paley graph of order q^2: the only maximum clique through 0, 1 is F_q."""
    job = Job("verify-vlm", {"q": q}, **kw)
    p, n = prime_power(q)

    def body():
        graph = _graph(job, p, n, 2, ConnectionSpec.paley())
        job.advisory["guaranteed_threshold"] = _threshold("4.1 n^2 / eps^2 with eps = 1", p, 4.1 * n * n)
        job.advisory["subfield_step"] = _threshold("4 n^2", p, 4 * n * n)
        return _peisert_type_uniqueness(job, graph)

    return _run(job, body)


def cmd_verify_mullin(q: int, **kw) -> dict:
    """Peisert graph of order q^2, q = 3 mod 4: the only maximum clique through 0, 1 is F_q."""
    job = Job("verify-mullin", {"q": q}, **kw)
    p, n = prime_power(q)

    def body():
        if q % 4 != 3:
            job.notes.append("q must be 3 mod 4")
            return NOT_APPLICABLE
        graph = _graph(job, p, n, 2, ConnectionSpec.peisert())
        job.advisory["guaranteed_threshold"] = _threshold("8.2 n^2", p, 8.2 * n * n)
        job.advisory["subfield_step"] = _threshold("4 n^2", p, 4 * n * n)
        return _peisert_type_uniqueness(job, graph)

    return _run(job, body)


def cmd_verify_sziklai(q: int, d: int, **kw) -> dict:
    """GP(q^2, d), d | q+1: F_q is the only 0,1-clique and every maximum 0-clique is c*F_q."""
    job = Job("verify-sziklai", {"q": q, "d": d}, **kw)
    p, n = prime_power(q)

    def body():
        if d < 2 or (q + 1) % d:
            job.notes.append("needs d > 1 dividing q + 1")
            return NOT_APPLICABLE
        graph = _graph(job, p, n, 2, ConnectionSpec.gpaley(d))
        return _peisert_type_uniqueness(job, graph, affine_check=True)

    return _run(job, body)


def gpstar_threshold(n: int, d: int) -> float:
    return 4.1 * n * n * d**4 / (math.pi**2 * (d - 1) ** 2)


def cmd_verify_gpstar(q: int, d: int, count: int | None = None, **kw) -> dict:
    """GP*(q^2, d) with d | q+1: count maximum 0-cliques and test 0,1-uniqueness."""
    job = Job("verify-gpstar", {"q": q, "d": d, "count": count}, **kw)
    p, n = prime_power(q)

    def body():
        if d % 2 or (q + 1) % d:
            job.notes.append("needs even d dividing q + 1")
            return NOT_APPLICABLE
        graph = _graph(job, p, n, 2, ConnectionSpec.gpeisert(d))
        thr = gpstar_threshold(n, d) if d >= 4 else 4.1 * n * n
        job.advisory["guaranteed_threshold"] = _threshold("4.1 n^2 d^4 / (pi^2 (d-1)^2)", p, thr)
        with job.timed("max_clique"):
            res = max_clique(graph, job.remaining_s)
        job.metrics["omega"] = res.omega
        with job.timed("enumerate_zero"):
            cliques = enumerate_max_cliques_zero(graph, res.omega, budget_s=job.remaining_s,
                                                 workers=job.threads)
        u = unique_01_max_clique(graph, res.omega, budget_s=job.remaining_s)
        job.metrics["counts"].update({
            "max_cliques_zero": len(cliques),
            "max_cliques_01": len(u.cliques_01),
            "coset_lines": (q + 1) // 2,
            "subgroup_cliques": sum(classify_structure(C, graph.tower).is_additive_subgroup
                                    for C in cliques),
        })
        if count is not None:
            if len(cliques) == count:
                return VERIFIED
            job.notes.append(f"expected {count} maximum 0-cliques, found {len(cliques)}")
            for C in cliques:
                job.witness(C)
            return REFUTED
        if u.unique_subfield:
            return VERIFIED
        for C in u.violations:
            job.witness(C)
        if p > thr:
            return REFUTED
        job.notes.append("uniqueness fails, but p is below the guaranteed threshold")
        return NOT_APPLICABLE

    return _run(job, body)


def cmd_verify_maximal_peisert(q: int, **kw) -> dict:
    """Is F_q a maximal clique of the Peisert graph of order q^4?  If not, check the F_q + hF_q structure."""
    job = Job("verify-maximal-peisert", {"q": q}, **kw)
    p, n = prime_power(q)

    def body():
        if p % 4 != 3:
            job.notes.append("needs p = 3 mod 4")
            return NOT_APPLICABLE
        graph = _graph(job, p, n, 4, ConnectionSpec.peisert())
        Fq = graph.tower.base_field()
        if not is_clique(graph, Fq):
            job.notes.append("F_q is not a clique")
            return NOT_APPLICABLE
        with job.timed("maximality"):
            mx = is_maximal_clique(graph, Fq)
        job.metrics["counts"]["fq_maximal"] = int(mx.maximal)
        if mx.maximal:
            return VERIFIED
        job.witnesses.append([int(graph.tower.log[mx.witness])])
        job.notes.append(f"F_q extends by the element with dlog {int(graph.tower.log[mx.witness])}")
        with job.timed("max_clique"):
            res = max_clique(graph, job.remaining_s)
        job.metrics["omega"] = res.omega
        ext = find_subspace_extension(graph, Fq)
        job.metrics["counts"]["omega_is_q_squared"] = int(res.omega == q * q)
        if ext is not None:
            job.witness(ext.V)
            job.metrics["counts"]["extension_size"] = len(ext.V)
            job.metrics["counts"]["extension_h_dlog"] = int(graph.tower.log[ext.h])
        consistent = res.omega == q * q and ext is not None and len(ext.V) == q * q
        job.metrics["counts"]["structure_consistent"] = int(consistent)
        if not consistent:
            job.notes.append("non-maximal F_q without the predicted F_q + hF_q maximum clique")
        return REFUTED

    return _run(job, body)


def conjecture_r(Q: int, p: int, d: int) -> int | None:
    """Largest r with d | (Q-1)/(p^r - 1), over the r for which p^r - 1 divides Q - 1."""
    D = round(math.log(Q, p))
    best = None
    for r in divisors(D):
        if ((Q - 1) // (p**r - 1)) % d == 0:
            best = r
    return best


def cmd_verify_maximal_gp(q: int, n: int, d: int, **kw) -> dict:
    """F_q maximal in GP(q^n, d), plus the F_{p^r} instance of the general maximality conjecture."""
    job = Job("verify-maximal-gp", {"q": q, "n": n, "d": d}, **kw)
    p, e = prime_power(q)

    def body():
        Q = q**n
        if Q % (2 * d) != 1:
            job.notes.append(f"GP(q^n, d) needs q^n = 1 mod {2 * d}")
            return NOT_APPLICABLE
        graph = _graph(job, p, e, n, ConnectionSpec.gpaley(d))
        tower = graph.tower
        hyp = is_prime(n) and n % 2 == 1 and q > n * n
        cond = ((Q - 1) // (q - 1)) % d == 0
        job.metrics["counts"]["hypotheses_hold"] = int(hyp)
        job.metrics["counts"]["clique_condition"] = int(cond)
        verdict = VERIFIED
        if cond:
            with job.timed("maximality"):
                mx = is_maximal_clique(graph, tower.base_field())
            job.metrics["counts"]["fq_maximal"] = int(mx.maximal)
            if not mx.maximal:
                job.witnesses.append([int(tower.log[mx.witness])])
                verdict = REFUTED if hyp else NOT_APPLICABLE
        else:
            job.notes.append("d does not divide (q^n-1)/(q-1); F_q is not a clique")
            verdict = NOT_APPLICABLE
        r = conjecture_r(Q, p, d)
        job.metrics["counts"]["conjecture_r"] = r
        if r is not None:
            K = tower.prime_subfield(r)
            if not is_clique(graph, K):
                raise AssertionError(f"F_{p}^{r} should be a clique")
            mk = is_maximal_clique(graph, K)
            job.metrics["counts"]["conjecture_subfield_maximal"] = int(mk.maximal)
            if not mk.maximal:
                job.notes.append(f"F_{p**r} is not maximal: conjecture instance fails")
                job.witnesses.append([int(tower.log[mk.witness])])
                verdict = REFUTED
        return verdict

    return _run(job, body)


def _spec_from_args(family: str, d: int | None, reps) -> ConnectionSpec:
    if family == "paley":
        return ConnectionSpec.paley()
    if family == "peisert":
        return ConnectionSpec.peisert()
    if family == "gpaley":
        return ConnectionSpec.gpaley(d)
    if family == "gpeisert":
        return ConnectionSpec.gpeisert(d)
    if family == "peisert_type":
        return ConnectionSpec.peisert_type(reps or [0])
    raise ValueError(f"unknown family {family!r}")


def largest_proper_divisor(n: int) -> int:
    return max((k for k in divisors(n) if k < n), default=0)


def cmd_cor_improvement(q: int, family: str = "paley", d: int | None = None, reps=None, **kw) -> dict:
    """If m <= p^(n-k) (k the largest proper divisor of n), F_q is the only 0,1-maximum clique."""
    job = Job("cor-improvement", {"q": q, "family": family, "d": d,
                                  "reps": list(reps) if reps else None}, **kw)
    p, n = prime_power(q)

    def body():
        graph = _graph(job, p, n, 2, _spec_from_args(family, d, reps))
        pt = is_peisert_type(graph.S, graph.tower)
        if not pt.ok:
            job.notes.append(f"not Peisert-type: {pt.reason}")
            return NOT_APPLICABLE
        k = largest_proper_divisor(n)
        bound = p ** (n - k)
        job.metrics["counts"].update({"cosets_m": pt.m, "bound": bound})
        if pt.m > bound:
            job.notes.append(f"m = {pt.m} exceeds p^(n-k) = {bound}")
            return NOT_APPLICABLE
        u = unique_01_max_clique(graph, budget_s=job.remaining_s)
        job.metrics["omega"] = u.omega
        job.metrics["counts"]["max_cliques_01"] = len(u.cliques_01)
        if u.unique_subfield:
            return VERIFIED
        for C in u.violations:
            job.witness(C)
        return REFUTED

    return _run(job, body)


# -- character sums ---------------------------------------------------------

def _sweep_rows(kind, label, mags, ms, bound, strict):
    rows = []
    for m, mag in zip(ms, mags):
        rows.append({"kind": kind, "subset": label, "m": int(m), "magnitude": float(mag),
                     "bound": float(bound), "margin": float(bound - mag), "strict": strict})
    return rows


def _sweep_verdict(rows):
    bad = [r for r in rows if (r["magnitude"] >= r["bound"] + cs.SLACK if r["strict"]
                               else r["magnitude"] > r["bound"] + cs.SLACK)]
    graze = [r for r in rows if abs(r["margin"]) < cs.GRAZE]
    return bad, graze


def write_csv(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=["kind", "subset", "m", "magnitude", "bound", "margin", "strict"])
        w.writeheader()
        w.writerows(rows)


def katz_sweep(tower: FieldTower, samples: int | None = None, seed: int = 0):
    deg = tower.degrees()
    thetas = np.flatnonzero(deg == tower.N)
    ms = np.arange(1, tower.qm1)
    rng = np.random.default_rng(seed)
    pairs = None
    if samples is not None:
        pairs = list(zip(rng.choice(thetas, samples), rng.choice(ms, samples)))
    bound = cs.katz_bound(tower)
    base = tower.base_field()
    rows = []
    if pairs is None:
        for th in thetas:
            A = tower.add(int(th), base)
            rows += _sweep_rows("katz", f"theta={int(th)}", cs.sum_magnitudes(A, ms, tower), ms, bound, False)
    else:
        for th, m in pairs:
            A = tower.add(int(th), base)
            rows += _sweep_rows("katz", f"theta={int(th)}", cs.sum_magnitudes(A, [m], tower), [m], bound, False)
    return rows


def _random_subspace_with_one(tower, dim, rng):
    while True:
        basis = [1] + [int(x) for x in rng.integers(1, tower.order, dim - 1)]
        try:
            return basis, cs.span(tower, basis)
        except ValueError:
            continue


def charsumcor_sweep(tower: FieldTower, samples: int | None = None, seed: int = 0):
    """Bound (2n/sqrt q)|V| over n-dim subspaces V ∋ 1 of F_{q^{2n}} other than F_{q^n}."""
    n = tower.N // 2
    rng = np.random.default_rng(seed)
    sub = tower.subfield(n)
    if n == 2 and samples is None:
        spaces = [(b, cs.span(tower, b)) for b in cs.planes_through_one(tower)]
    else:
        spaces = []
        while len(spaces) < (samples or 20):
            b, V = _random_subspace_with_one(tower, n, rng)
            if not np.array_equal(V, sub):
                spaces.append((b, V))
    ms = np.arange(1, tower.qm1)
    rows = []
    for b, V in spaces:
        bound = 2 * n / math.sqrt(tower.q) * V.size
        rows += _sweep_rows("charsumcor", f"basis={b}", cs.sum_magnitudes(V, ms, tower), ms, bound, True)
    return rows


def primecor_sweep(tower: FieldTower, samples: int | None = None, seed: int = 0,
                   char_samples: int | None = None):
    planes = cs.planes_through_one(tower, exclude_subfield=False)
    rng = np.random.default_rng(seed)
    if samples is not None and samples < len(planes):
        idx = sorted(rng.choice(len(planes), samples, replace=False))
        planes = [planes[i] for i in idx]
    ms = np.arange(1, tower.qm1)
    if char_samples is not None and char_samples < ms.size:
        ms = np.sort(rng.choice(ms, char_samples, replace=False))
    rows = []
    for b in planes:
        V = cs.span(tower, b)
        rows += _sweep_rows("primecor", f"basis={tuple(b)}", cs.sum_magnitudes(V, ms, tower), ms, V.size - 1, True)
    return rows


def reis_sweep(tower: FieldTower, t: int, samples: int = 20, seed: int = 0):
    rng = np.random.default_rng(seed)
    ms = np.arange(1, tower.qm1)
    rows = []
    skipped = 0
    bound = tower.N * tower.q ** (t - 0.5)
    for _ in range(samples):
        while True:
            basis = [int(x) for x in rng.integers(1, tower.order, t)]
            try:
                cs.span(tower, basis)
                break
            except ValueError:
                continue
        A = cs.AffineSpace(tower, int(rng.integers(0, tower.order)), tuple(basis))
        if not cs.reis_hypothesis(A):
            skipped += 1
            continue
        rows += _sweep_rows("reis", f"u={A.u},basis={basis}", cs.sum_magnitudes(A.elements(), ms, tower), ms, bound, True)
    return rows, skipped


def cmd_charsum(kind: str, q: int, N: int | None = None, t: int | None = None,
                samples: int | None = None, char_samples: int | None = None,
                csv_path=None, **kw) -> dict:
    job = Job("charsum", {"kind": kind, "q": q, "N": N, "t": t, "samples": samples,
                          "char_samples": char_samples}, **kw)
    p, e = prime_power(q)

    def body():
        if kind == "katz":
            tower = job.get_tower(p, e, N or 2)
            rows = katz_sweep(tower, samples, job.seed)
        elif kind == "charsumcor":
            tower = job.get_tower(p, e, 2 * (N or 2))
            rows = charsumcor_sweep(tower, samples, job.seed)
        elif kind == "primecor":
            n = N or 3
            if not (is_prime(n) and n % 2 == 1 and q > n * n):
                job.notes.append("needs n an odd prime and q > n^2")
                return NOT_APPLICABLE
            tower = job.get_tower(p, e, n)
            rows = primecor_sweep(tower, samples, job.seed, char_samples)
        elif kind == "reis":
            tower = job.get_tower(p, e, N or 2)
            rows, skipped = reis_sweep(tower, t or 1, samples or 20, job.seed)
            job.metrics["counts"]["hypothesis_failed"] = skipped
        else:
            raise ValueError(f"unknown charsum kind {kind!r}")
        bad, graze = _sweep_verdict(rows)
        job.metrics["counts"].update({"evaluations": len(rows), "violations": len(bad),
                                      "grazing": len(graze)})
        if rows:
            worst = min(rows, key=lambda r: r["margin"])
            job.metrics["margins"].update({"min_margin": worst["margin"],
                                           "worst_magnitude": worst["magnitude"],
                                           "bound": worst["bound"]})
        if csv_path:
            write_csv(rows, csv_path)
        for r in bad[:20]:
            job.notes.append(f"violation: {r}")
        return REFUTED if bad else VERIFIED

    return _run(job, body)


def cmd_epsilon(d: int | None = None, points=None, **kw) -> dict:
    job = Job("epsilon", {"d": d, "points": [str(z) for z in points] if points else None}, **kw)

    def body():
        if d is not None:
            M = cs.half_root_set(d)
            eps = cs.epsilon_star(M).epsilon_star
            lower = cs.half_root_lower_bound(d)
            job.metrics["margins"].update({"epsilon_star": eps, "sin_pi_over_d": math.sin(math.pi / d),
                                           "pi_over_d_lower_bound": lower, "margin": eps - lower})
            ok = abs(eps - math.sin(math.pi / d)) <= 1e-9 and eps >= lower
            return VERIFIED if ok else REFUTED
        eps = cs.epsilon_star([complex(z) for z in points]).epsilon_star
        job.metrics["margins"]["epsilon_star"] = eps
        return VERIFIED

    return _run(job, body)


# -- directions -------------------------------------------------------------

def clique_direction_check(graph: CayleyGraph, cliques) -> list[dict]:
    """For maximum 0-cliques: no vertical direction, at most m directions, 1 + D*v inside S."""
    tower = graph.tower
    pt = is_peisert_type(graph.S, tower)
    e = default_embedding(tower, graph.S)
    out = []
    for C in cliques:
        U = embed(C, e)
        D = direction_set(U, tower)
        finite = [s for s in D if s != INF]
        shifted = [tower.add(1, tower.mul(s, e.v)) for s in finite]
        out.append({
            "clique": VertexSet.of(C).dlogs(tower),
            "vertical": INF in D,
            "n_directions": len(D),
            "m": pt.m,
            "inside_S": all(graph.S.member[x] for x in shifted),
            "ok": INF not in D and len(D) <= pt.m and all(graph.S.member[x] for x in shifted),
        })
    return out


def random_function(tower: FieldTower, rng) -> dict[int, int]:
    base = tower.base_field()
    return {int(x): int(y) for x, y in zip(base, rng.choice(base, base.size))}


def cmd_directions(q: int, mode: str = "ball", samples: int = 1000, family: str = "paley",
                   d: int | None = None, **kw) -> dict:
    job = Job("directions", {"q": q, "mode": mode, "samples": samples, "family": family, "d": d}, **kw)
    p, n = prime_power(q)
    rng = np.random.default_rng(job.seed)

    def body():
        if mode == "ball":
            tower = job.get_tower(p, n, 1)
            fails = 0
            branches = {}
            for _ in range(samples):
                v = verify_ball_dichotomy(random_function(tower, rng), tower)
                branches[v.branch] = branches.get(v.branch, 0) + 1
                fails += not v.holds
            job.metrics["counts"].update(branches)
            return REFUTED if fails else VERIFIED
        graph = _graph(job, p, n, 2, _spec_from_args(family, d, None))
        res = max_clique(graph, job.remaining_s)
        job.metrics["omega"] = res.omega
        cliques = enumerate_max_cliques_zero(graph, res.omega, budget_s=job.remaining_s)
        if mode == "cliques":
            checks = clique_direction_check(graph, cliques)
            bad = [c for c in checks if not c["ok"]]
            job.metrics["counts"].update({"cliques": len(checks), "failures": len(bad)})
            job.witnesses += [c["clique"] for c in bad]
            return REFUTED if bad else VERIFIED
        if mode == "extension":
            e = default_embedding(graph.tower, graph.S)
            tried = extended = contradictions = 0
            for C in cliques:
                U = sorted(embed(C, e))
                for _ in range(3):
                    k = int(rng.integers(1, math.isqrt(q) + 1))
                    drop = set(rng.choice(len(U), k, replace=False).tolist())
                    sub = [u for i, u in enumerate(U) if i not in drop]
                    r = search_extension(sub, graph.tower)
                    tried += 1
                    extended += r.extension is not None
                    contradictions += r.contradiction
            job.metrics["counts"].update({"searches": tried, "extended": extended,
                                          "contradictions": contradictions})
            return REFUTED if contradictions else VERIFIED
        raise ValueError(f"unknown directions mode {mode!r}")

    return _run(job, body)


def cmd_stability(q: int, family: str = "paley", d: int | None = None, **kw) -> dict:
    job = Job("stability", {"q": q, "family": family, "d": d}, **kw)
    p, n = prime_power(q)

    def body():
        graph = _graph(job, p, n, 2, _spec_from_args(family, d, None))
        with job.timed("stability"):
            rep = verify_stability(graph, job.remaining_s)
        job.metrics["margins"]["threshold"] = rep.threshold
        job.metrics["counts"]["hypothesis_m_below_half"] = int(rep.hypothesis_holds)
        if not rep.hypothesis_holds:
            job.notes.append("m = (q+1)/2: outside the guaranteed range, containment checked anyway")
        job.metrics["counts"].update({"min_size": rep.min_size, "large_cliques": len(rep.large_cliques),
                                      "subspace_cliques": len(rep.subspace_cliques)})
        for C in rep.uncontained:
            job.witness(C)
        return VERIFIED if rep.verified else REFUTED

    return _run(job, body)

