"""Exit criteria.  Each check prints one PASS/FAIL line.

Run with ``pytest -m acceptance -s`` or directly as ``python tests/test_acceptance.py``.
"""

import random
import subprocess
import sys
import time
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from helpers import (  # noqa: E402
    brute_force_sat,
    closure_by_rescan,
    conjunction_sat,
    diversity_instances,
    feasible_members,
    literal_holds,
    oracle_coverage,
    parse_instances,
    planted_model_formula,
    random_atom,
    random_bam_case,
    random_constraint_formula,
    random_formula,
    validity_instances,
)
from highdiv.ccss import (  # noqa: E402
    LiteralStats,
    SearchParams,
    bam,
    build_equality_system,
    build_high_frequency_system,
    contextual_literals,
    feasible_interval,
    literal_delta,
)
from highdiv.cdclt import UnderApproximation, Unknown, solve  # noqa: E402
from highdiv.core import EQ, LE, Assignment, Clause, CnfFormula, Literal, evaluate_formula, make_atom  # noqa: E402
from highdiv.coverage import CoverageAccumulator, coverage_of  # noqa: E402
from highdiv.errors import NoMoveError  # noqa: E402
from highdiv.intervals import IntervalSet  # noqa: E402
from highdiv.sampler import RunConfig, baseline_samples, highdiv_sample, verify_sample  # noqa: E402
from highdiv.smtlib import Ast, parse_script  # noqa: E402
from highdiv.theory import Constraint, TheoryAssertion, TheorySat, assertion_constraint, check_conjunction, solve_constraints  # noqa: E402

pytestmark = pytest.mark.acceptance


def report(name: str, ok: bool, detail: str) -> None:
    print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}", flush=True)
    sys.__stdout__.flush()


def chain_formula() -> CnfFormula:
    atoms = [make_atom({0: -1, 1: 1}, -1, LE), make_atom({0: -1}, -10, LE),
             make_atom({1: 1, 2: -1}, 0, LE), make_atom({0: 1, 2: -1}, 3, LE)]
    clauses = [Clause((Literal.atom(0), Literal.atom(1))), Clause((Literal.atom(2),)), Clause((Literal.atom(3),))]
    return CnfFormula(clauses, atoms, ["x1", "x2", "x3"], [])


# ---------------------------------------------------------------------------


def check_validity():
    start = time.monotonic()
    total = failures = 0
    for i, problem in enumerate(parse_instances(validity_instances())):
        samples = highdiv_sample(problem, RunConfig(k=200, time_limit=6.0, seed=i))
        total += len(samples)
        failures += sum(not verify_sample(s, problem.ast) for s in samples)
    elapsed = time.monotonic() - start
    ok = failures == 0 and total >= 2000 and elapsed < 180
    return ok, f"{failures} failures over {total} samples on 20 formulas in {elapsed:.1f}s"


def check_cdclt_oracle():
    start = time.monotonic()
    rng = random.Random(2718)
    agree = 0
    for i in range(500):
        f = random_formula(rng, n_ints=rng.randint(1, 4), n_bools=rng.randint(0, 2), n_clauses=8)
        res = solve(UnderApproximation(f), random.Random(i))
        sat = isinstance(res, Assignment)
        if not isinstance(res, Unknown) and sat == brute_force_sat(f) and (not sat or evaluate_formula(f, res)):
            agree += 1
    elapsed = time.monotonic() - start
    return agree == 500 and elapsed < 120, f"{agree}/500 verdicts match brute force in {elapsed:.1f}s"


def check_theory_oracle():
    start = time.monotonic()
    rng = random.Random(161)
    agree = cores = unsat = 0
    for _ in range(500):
        n = rng.randint(1, 4)
        atoms = [random_atom(rng, n, eq_prob=0.25) for _ in range(rng.randint(1, 6))]
        f = CnfFormula([], atoms, [f"x{i}" for i in range(n)], [])
        assertions = [TheoryAssertion(a, atom.rel == EQ or rng.random() < 0.7) for a, atom in enumerate(atoms)]
        box = [Constraint(((v, s),), 20, LE, ("box", v, s)) for v in range(n) for s in (1, -1)]
        res = check_conjunction(assertions, f, extra=box)
        rows = {t: assertion_constraint(t, atoms[t.atom_id]) for t in assertions}
        rows.update({b.tag: b for b in box})
        expect = conjunction_sat([(c.coeffs, c.const, c.rel) for c in rows.values()], n)
        if isinstance(res, TheorySat) != expect:
            continue
        if isinstance(res, TheorySat):
            agree += all(literal_holds(f, Literal.atom(t.atom_id, t.positive), {v: res.witness.get(v, 0) for v in range(n)})
                         for t in assertions)
            continue
        unsat += 1
        core = [rows[tag] for tag in res.core]
        ok = not conjunction_sat([(c.coeffs, c.const, c.rel) for c in core], n)
        ok = ok and not isinstance(solve_constraints([Constraint(c.coeffs, c.const, c.rel, j) for j, c in enumerate(core)]),
                                   TheorySat)
        agree += ok
        cores += ok
    elapsed = time.monotonic() - start
    return agree == 500 and elapsed < 60, (f"{agree}/500 agree, {cores}/{unsat} cores re-verify unsat, "
                                           f"{elapsed:.1f}s")


def check_feasible_interval():
    f = chain_formula()
    exact = feasible_interval(0, f, Assignment({0: 10, 1: 7, 2: 7})) == IntervalSet([(8, 10)])
    rng = random.Random(404)
    match = 0
    for _ in range(500):
        g, point = planted_model_formula(rng)
        x = rng.randrange(g.num_ints)
        got = feasible_interval(x, g, Assignment(point))
        match += {v for v in range(-100, 101) if v in got} == feasible_members(x, g, point)
    return exact and match == 500, f"{match}/500 triples match membership oracle, chain formula -> [8,10]: {exact}"


def check_bam():
    f = chain_formula()
    alpha = Assignment({0: 0, 1: 0, 2: 0})
    l1, l4 = f.clauses[0].literals[0], f.clauses[2].literals[0]
    stats = LiteralStats.from_counts({l4: 0}, 0)
    rng = random.Random(0)
    worked = all(bam(0, l1, [l4], alpha, f, stats, rng).interval == (1, 3) for _ in range(50))
    good = done = 0
    while done < 10_000:
        case = random_bam_case(rng)
        if case is None:
            continue
        g, a, x, lit = case
        ctx = contextual_literals(x, g, a)
        total = rng.randint(0, 50)
        st = LiteralStats.from_counts({c: rng.randint(0, total) for c in ctx}, total)
        try:
            d = literal_delta(x, lit, a, g)
            op = bam(x, lit, ctx, a, g, st, rng)
        except NoMoveError:
            continue
        done += 1
        lo, hi = op.interval
        good += (lo <= op.value <= hi and (lo if d > 0 else hi) == a.int_values[x] + d
                 and literal_holds(g, lit, {**a.int_values, x: op.value}))
    return worked and good == 10_000, f"{good}/10000 moves satisfy the target inside the interval, worked case [1,3]: {worked}"


def check_closures():
    rng = random.Random(5150)
    good = 0
    for _ in range(200):
        f = random_constraint_formula(rng)
        lam = rng.randint(1, 4)
        used = sorted({l.ident for c in f.clauses for l in c.literals})
        eqs = [frozenset(f.atoms[a].variables) for a in used if f.atoms[a].rel == EQ]
        others = [frozenset(f.atoms[a].variables) for a in used if f.atoms[a].rel != EQ]
        e_eq = closure_by_rescan(set().union(*eqs) if eqs else set(), others)
        freq: dict[int, int] = {}
        for c in f.clauses:
            for l in c.literals:
                for v in f.atoms[l.ident].variables:
                    freq[v] = freq.get(v, 0) + 1
        pre = closure_by_rescan({v for v, n in freq.items() if n > lam}, others)
        got_eq = build_equality_system(f)
        got_hf = build_high_frequency_system(f, lam, got_eq)
        closed = all((not vs & got_eq or vs <= got_eq) for vs in others) and all(vs <= got_eq for vs in eqs)
        good += got_eq == e_eq and got_hf == pre - e_eq and closed and not got_hf & got_eq
    return good == 200, f"{good}/200 constraint sets match the rescan fixpoint"


def check_coverage():
    ast = Ast()
    x = ast.int_var("x")
    p = ast.bool_var("p")
    ast.roots.append(ast.op("or", p, ast.op("le", x, ast.const(0))))
    empty = CoverageAccumulator(ast).coverage() == 0.0
    acc = CoverageAccumulator(ast, [x])
    acc.accumulate({"x": 0, "p": True})
    acc.accumulate({"x": -1, "p": True})
    full = acc.coverage() == 1.0
    acc = CoverageAccumulator(ast, [p])
    acc.accumulate({"x": 1, "p": True})
    acc.accumulate({"x": 1, "p": False})
    flip = acc.covered_bits == 1

    rng = random.Random(99)
    asts = [parse_script(t) for t in diversity_instances()]
    props = oracle = 0
    for i in range(1000):
        a = asts[i % len(asts)]
        samples = []
        for _ in range(rng.randint(0, 10)):
            s = {n: rng.choice([rng.randint(-8, 8), rng.randint(-1000, 1000), rng.randint(-2**62, 2**62)])
                 for n in a.int_vars}
            s.update({b: rng.random() < 0.5 for b in a.bool_vars})
            samples.append(s)
        acc = CoverageAccumulator(a)
        last, mono = 0.0, True
        for s in samples:
            acc.accumulate(s)
            mono &= acc.coverage() >= last
            last = acc.coverage()
        shuffled = samples[:]
        rng.shuffle(shuffled)
        props += mono and coverage_of(a, shuffled) == last
        oracle += (acc.covered_bits, acc.total_bits) == oracle_coverage(a, samples)
    ok = empty and full and flip and props == 1000 and oracle == 1000
    return ok, (f"analytic cases {empty}/{full}/{flip}, monotone+permutation {props}/1000, "
                f"oracle bit-for-bit {oracle}/1000")


def _diversity_runs(move: str, seeds, time_limit: float):
    problems = parse_instances(diversity_instances())
    out = []
    for problem in problems:
        covs = []
        for seed in seeds:
            cfg = RunConfig(k=200, time_limit=time_limit, seed=seed, search=SearchParams(move=move))
            covs.append(coverage_of(problem.ast, highdiv_sample(problem, cfg).samples))
        out.append(sum(covs) / len(covs))
    return problems, out


def check_diversity():
    start = time.monotonic()
    problems, ours = _diversity_runs("bam", [0], 15.0)
    wins, parts = 0, []
    for problem, cov in zip(problems, ours):
        base = baseline_samples(problem, 200)
        base_cov = coverage_of(problem.ast, base.samples)
        wins += cov > base_cov
        parts.append(f"{cov:.3f}>{base_cov:.3f}({len(base)})")
    elapsed = time.monotonic() - start
    return wins == 10 and elapsed < 180, f"{wins}/10 beat baseline in {elapsed:.1f}s [{' '.join(parts)}]"


def check_ablation():
    start = time.monotonic()
    _, with_bam = _diversity_runs("bam", [0, 1, 2], 5.0)
    _, with_cm = _diversity_runs("cm", [0, 1, 2], 5.0)
    mean_bam = sum(with_bam) / len(with_bam)
    mean_cm = sum(with_cm) / len(with_cm)
    elapsed = time.monotonic() - start
    return mean_cm <= mean_bam and elapsed < 300, f"mean coverage cm {mean_cm:.4f} <= bam {mean_bam:.4f} ({elapsed:.1f}s)"


def check_determinism(tmp: Path):
    src = tmp / "det.smt2"
    src.write_text(diversity_instances()[2])
    blobs = []
    for i in range(3):
        out = tmp / f"det{i}.jsonl"
        subprocess.run([sys.executable, "-m", "highdiv", "sample", "--in", str(src), "--out", str(out), "-k", "100",
                        "--seed", "42", "--deterministic-budget", "150"], check=True, capture_output=True, timeout=300)
        blobs.append(out.read_bytes())
    ok = blobs[0] == blobs[1] == blobs[2] and len(blobs[0]) > 0
    lines = len(blobs[0].splitlines())
    return ok, f"3 runs, {lines} samples each, byte-identical: {ok}"


# ---------------------------------------------------------------------------

CHECKS = [
    ("validity", check_validity),
    ("cdclt-oracle", check_cdclt_oracle),
    ("theory-oracle", check_theory_oracle),
    ("feasible-interval", check_feasible_interval),
    ("bam-postcondition", check_bam),
    ("subsystem-closures", check_closures),
    ("coverage-metric", check_coverage),
    ("diversity", check_diversity),
    ("ablation", check_ablation),
]


@pytest.mark.parametrize("name,check", CHECKS, ids=[n for n, _ in CHECKS])
def test_criterion(name, check, capsys):
    ok, detail = check()
    with capsys.disabled():
        report(name, ok, detail)
    assert ok, detail


def test_determinism(tmp_path, capsys):
    ok, detail = check_determinism(tmp_path)
    with capsys.disabled():
        report("determinism", ok, detail)
    assert ok, detail


if __name__ == "__main__":
    import tempfile

    results = []
    for name, check in CHECKS:
        ok, detail = check()
        report(name, ok, detail)
        results.append(ok)
    with tempfile.TemporaryDirectory() as d:
        ok, detail = check_determinism(Path(d))
    report("determinism", ok, detail)
    results.append(ok)
    sys.exit(0 if all(results) else 1)
