"""Command-line driver: ``koszul-lab check`` runs a scenario's certifications,
``koszul-lab dump`` writes sorted tables for golden-file comparison.

Exit codes: 0 all pass, 1 a certification fails, 2 bad configuration,
3 internal inconsistency (two independent computations disagree).
"""

import argparse
import json
import sys
import time
from dataclasses import dataclass, asdict

from .derham import (DiskConfig, LogDeRham, check_dg_soundness, check_cohomology, kunneth_compare,
                     monomial_str)
from .graded import Report, positive_part, regular_module, trivial_module, shift_module, \
    exterior_algebra, truncated_polynomial
from .koszul import (KoszulReport, is_koszul_algebra, is_koszul_module, tor_table, hyper_tor_of_C,
                     lemma_equivalence_check)
from .parallel import default_jobs
from .quasi import (FormsQuasiAlgebra, QuasiCoalgebra, check_axioms, is_koszul_quasi,
                    is_koszul_quasi_coalgebra, check_coalgebra_axioms, quadratic_sequence_check,
                    distributivity_criterion, external_mult_duality_check, tuples_up_to)
from .quasimod import (FormsAction, theorem3, theorem3_json, pullback_comparison,
                       poincare_with_parameters_check, diagonal_vs_tensor_merge)
from .rlinalg import LatticeCapExceeded

SCHEMA = "koszul-lab/1"
SCENARIOS = ("algebra", "modules", "quasi", "dual", "theorem3", "full")
FORMATS = ("json", "table", "csv")


class ConfigError(ValueError):
    pass


@dataclass
class ScenarioConfig:
    u: int = 1
    v: int = 1
    D: int = 2
    N: int = 4
    m_max: int = 3
    tuple_budget: int = 4
    scenario: str = "algebra"
    output: str = "table"
    jobs: int = 1
    lattice_cap: int = 4096
    timings: bool = False

    def validate(self):
        for name in ("u", "v", "D", "N", "m_max", "tuple_budget", "lattice_cap"):
            if getattr(self, name) < 0:
                raise ConfigError("%s must be >= 0, got %d" % (name, getattr(self, name)))
        if self.u < 1:
            raise ConfigError("u must be at least 1")
        if self.v > self.u:
            raise ConfigError("v must not exceed u (got v=%d, u=%d)" % (self.v, self.u))
        if self.jobs < 1:
            raise ConfigError("jobs must be at least 1")
        if self.scenario not in SCENARIOS:
            raise ConfigError("unknown scenario %r; choose one of %s" % (self.scenario, ", ".join(SCENARIOS)))
        if self.output not in FORMATS:
            raise ConfigError("unknown output format %r; choose one of %s" % (self.output, ", ".join(FORMATS)))
        if self.m_max < 1:
            raise ConfigError("m_max must be at least 1")
        return self

    def disk(self, m=1):
        return DiskConfig(m, self.u, self.v, self.D)

    def to_json(self):
        out = asdict(self)
        out.pop("timings")
        out.pop("output")
        out.pop("jobs")
        return out


# ---------------------------------------------------------------------------
# checks

class Check:
    """One named verdict; ``kind`` is "certification" or "consistency"."""

    def __init__(self, name, passed, kind="certification", data=None, seconds=None):
        self.name = name
        self.passed = bool(passed)
        self.kind = kind
        self.data = data or {}
        self.seconds = seconds

    def to_json(self, timings=False):
        out = {"check": self.name, "kind": self.kind, "verdict": "pass" if self.passed else "fail"}
        out.update(self.data)
        if timings and self.seconds is not None:
            out["seconds"] = round(self.seconds, 3)
        return out


def _collapsed(table):
    return [{"i": i, "j": j, "dim": d} for (i, j), d in sorted(table.collapsed().items())]


def _from_report(name, rep, kind="certification", extra=None):
    data = {}
    if isinstance(rep, KoszulReport):
        j = rep.to_json()
        data["bounds"] = j["bounds"]
        if rep.shift:
            data["shift"] = rep.shift
        if rep.table is not None:
            data["tor"] = _collapsed(rep.table)
        if rep.witnesses:
            data["witnesses"] = j["witnesses"][:10]
        if rep.caveats:
            data["caveats"] = rep.caveats
        if getattr(rep, "slices", None) is not None:
            data["slices"] = rep.slices
    elif isinstance(rep, Report):
        data.update({k: v for k, v in rep.details.items()})
        if rep.witness is not None:
            data["witness"] = rep.witness
    if extra:
        data.update(extra)
    return Check(name, rep.passed, kind, data)


class Runner:
    def __init__(self, cfg):
        self.cfg = cfg
        self.checks = []
        self._X = None
        self._F = None
        self._C = None

    def timed(self, fn):
        t0 = time.perf_counter()
        chk = fn()
        chk.seconds = time.perf_counter() - t0
        self.checks.append(chk)
        return chk

    @property
    def X(self):
        if self._X is None:
            self._X = LogDeRham(self.cfg.disk())
        return self._X

    @property
    def F(self):
        if self._F is None:
            self._F = FormsQuasiAlgebra(self.cfg.disk())
        return self._F

    @property
    def C(self):
        if self._C is None:
            self._C = QuasiCoalgebra(self.F, self.cfg.N)
        return self._C

    # -- scenarios

    def algebra(self):
        c = self.cfg
        self.timed(lambda: _from_report("dg_soundness", check_dg_soundness(c.disk())))
        self.timed(lambda: _from_report("cohomology_model", check_cohomology(c.disk())))
        Z = self.X.closed_forms()
        self.timed(lambda: _from_report("Z_koszul_algebra", is_koszul_algebra(Z, c.N, c.D, c.jobs)))

    def modules(self):
        c = self.cfg
        X = self.X
        A = X.exterior_A()
        self.timed(lambda: _from_report("A_koszul_algebra", is_koszul_algebra(A, c.N, c.D, c.jobs)))

        def omega_free():
            T = tor_table(A, X.a_action("Omega", A=A), c.N, c.D, c.jobs)
            bad = [(i, j, a, d) for (i, j, a), d in sorted(T.entries.items()) if i > 0]
            return Check("Omega_free", not bad, data={"tor": _collapsed(T),
                                                      "witnesses": [{"i": i, "j": j, "a": list(a), "dim": d}
                                                                    for i, j, a, d in bad[:10]]})
        self.timed(omega_free)
        self.timed(lambda: _from_report("H_koszul_module",
                                        is_koszul_module(A, X.a_action("H", A=A), c.N, c.D, 0, c.jobs)))
        self.timed(lambda: _from_report("Zplus_koszul_shift1",
                                        is_koszul_module(A, positive_part(X.a_action("Z", A=A)),
                                                         c.N, c.D, 1, c.jobs)))
        self.timed(lambda: _from_report("hyper_tor_diagonal", hyper_tor_of_C(X, c.N, c.D, c.jobs)))

        def window():
            corpus = module_corpus(X, A)
            rows = []
            ok = True
            for M in corpus:
                r = lemma_equivalence_check(A, M, c.N, c.D, c.jobs)
                rows.append({"module": M.name, "agree": r.passed,
                             "side_a": r.details["side_a"], "side_b": r.details["side_b"]})
                ok = ok and r.passed
            return Check("lemma_equivalence", ok, data={"instances": rows})
        self.timed(window)

    def quasi(self):
        c = self.cfg
        F = self.F
        self.timed(lambda: _from_report("quasi_axioms", check_axioms(F, c.N, c.m_max)))
        self.timed(lambda: _from_report("quasi_koszul", is_koszul_quasi(F, c.N, c.m_max, None, c.jobs)))
        self.timed(lambda: _from_report("diagonal_vs_tensor_merge", diagonal_vs_tensor_merge(F, c.N, c.m_max),
                                        kind="consistency"))

        def m1():
            rq = is_koszul_quasi(F, c.N, 1, None, c.jobs)
            ra = is_koszul_algebra(F.X.closed_forms(), c.N, c.D, c.jobs)
            return Check("m1_agrees_with_graded", rq.passed == ra.passed, "consistency",
                         {"quasi": rq.passed, "graded": ra.passed})
        self.timed(m1)

    def dual(self):
        c = self.cfg
        F, C = self.F, self.C

        def dims():
            rows = [{"tuple": ".".join(map(str, ns)), "dim": C.total_dim(ns)}
                    for ns in tuples_up_to(c.N, c.m_max, positive=True)]
            return Check("dual_dimensions", True, data={"components": rows})
        self.timed(dims)
        self.timed(lambda: _from_report("coalgebra_axioms", check_coalgebra_axioms(C, c.N, c.m_max)))
        self.timed(lambda: _from_report("cobar_koszul", is_koszul_quasi_coalgebra(C, c.N, c.m_max, c.jobs)))
        self.timed(lambda: _from_report("quadratic_sequences", quadratic_sequence_check(F, C, c.N)))

        def distrib():
            rows = []
            ok = True
            for n in range(2, c.N + 1):
                try:
                    r = distributivity_criterion(C, n, c.lattice_cap)
                except LatticeCapExceeded as e:
                    return Check("distributivity", False, data={"n": n, "error": str(e)})
                rows.append(r.to_json())
                ok = ok and r.passed
            return Check("distributivity", ok, data={"by_n": rows})
        self.timed(distrib)
        self.timed(lambda: _from_report("extmult_duality", external_mult_duality_check(F, C, c.N, c.m_max)))

    def theorem3(self):
        c = self.cfg
        F = self.F
        act = FormsAction(F)
        res = {}

        def hyp():
            res.update(theorem3(F, act, c.tuple_budget, 1, 2, None, c.m_max, c.jobs))
            j = theorem3_json(res)
            return Check("theorem3_hypothesis", res["hypothesis"].passed, data=j["hypothesis"])
        self.timed(hyp)
        self.timed(lambda: _from_report("theorem3_conclusion", res["conclusion"]))
        self.timed(lambda: Check("theorem3_implication", res["implication_holds"], "consistency",
                                 {"hypothesis": res["hypothesis"].passed, "A_koszul": res["A_koszul"].passed,
                                  "conclusion": res["conclusion"].passed}))

        def pull():
            ok, rows = pullback_comparison(F, T=c.tuple_budget)
            bad = [r for r in rows if r["pullback_dim"] != r["e_homology_dim"]
                   or r.get("coalgebra_dim", r["pullback_dim"]) != r["pullback_dim"]]
            total = sum(r["pullback_dim"] for r in rows)
            return Check("pullback_model", ok, "consistency",
                         {"instances": len(rows), "total_dim": total, "mismatches": bad[:10]})
        self.timed(pull)
        self.timed(lambda: _from_report("poincare_with_parameters",
                                        poincare_with_parameters_check(c.disk(), c.tuple_budget)))

    def full(self):
        self.algebra()
        self.modules()
        self.quasi()
        self.dual()
        self.theorem3()
        c = self.cfg

        def kun():
            if c.u > 2 or c.D > 2:
                return Check("kunneth_m2", True, "consistency", {"skipped": "needs u <= 2 and D <= 2"})
            rows = []
            ok = True
            cfg2 = c.disk(2)
            for degs in [(a, b) for a in range(c.u + 1) for b in range(c.u + 1)]:
                r = kunneth_compare(cfg2, degs)
                rows.append({"degrees": list(degs), "direct": r.details["direct"], "product": r.details["product"]})
                ok = ok and r.passed
            return Check("kunneth_m2", ok, "consistency", {"degrees": rows})
        self.timed(kun)

    def run(self):
        getattr(self, self.cfg.scenario)()
        return self.checks


def module_corpus(X, A):
    """Free, trivial and forms-derived modules over A."""
    Om = X.a_action("Omega", A=A)
    Zm = X.a_action("Z", A=A)
    Hm = X.a_action("H", A=A)
    out = [regular_module(A, "A"), trivial_module(A, name="k"), trivial_module(A, 1, name="k(1)"),
           trivial_module(A, 0, 2, name="k^2"), Om, Zm, Hm, positive_part(Zm),
           shift_module(Zm, 1), shift_module(Hm, 1), positive_part(Om)]
    for M, nm in zip(out[-2:], ["H(1)", "Omega+"]):
        M.name = nm
    out[-3].name = "Z(1)"
    out[7].name = "Z+"
    return out


def exit_code(checks):
    if any(not ch.passed and ch.kind == "consistency" for ch in checks):
        return 3
    if any(not ch.passed for ch in checks):
        return 1
    return 0


def render(cfg, checks, code, fmt=None, timings=None):
    fmt = fmt or cfg.output
    timings = cfg.timings if timings is None else timings
    if fmt == "json":
        doc = {"schema": SCHEMA, "scenario": cfg.scenario, "config": cfg.to_json(),
               "checks": [ch.to_json(timings) for ch in checks],
               "verdict": "pass" if code == 0 else "fail", "exit_code": code}
        return json.dumps(doc, indent=2, sort_keys=True, default=str) + "\n"
    if fmt == "csv":
        head = "check,kind,verdict" + (",seconds" if timings else "")
        lines = [head]
        for ch in checks:
            row = "%s,%s,%s" % (ch.name, ch.kind, "pass" if ch.passed else "fail")
            if timings:
                row += ",%.3f" % ch.seconds
            lines.append(row)
        return "\n".join(lines) + "\n"
    width = max([len(ch.name) for ch in checks] + [5])
    lines = ["scenario %s  u=%d v=%d D=%d N=%d m_max=%d" % (cfg.scenario, cfg.u, cfg.v, cfg.D, cfg.N, cfg.m_max)]
    for ch in checks:
        line = "%-4s  %-*s  %s" % ("PASS" if ch.passed else "FAIL", width, ch.name, ch.kind)
        if timings:
            line += "  %.2fs" % ch.seconds
        if not ch.passed:
            w = ch.data.get("witness") or ch.data.get("witnesses") or ch.data.get("mismatches")
            if w:
                line += "  witness=%s" % json.dumps(w, sort_keys=True, default=str)[:200]
        lines.append(line)
    lines.append("verdict: %s (exit %d)" % ("pass" if code == 0 else "fail", code))
    return "\n".join(lines) + "\n"


def run(cfg):
    """(exit code, rendered report)."""
    cfg.validate()
    try:
        checks = Runner(cfg).run()
    except AssertionError as e:
        return 3, "internal inconsistency: %s\n" % e
    code = exit_code(checks)
    return code, render(cfg, checks, code)


# ---------------------------------------------------------------------------
# dumps

def dump_basis(cfg):
    X = LogDeRham(cfg.disk())
    lines = []
    for s in X.strata():
        for mono in X.monomials(s):
            lines.append("%d\t(%s)\t%s" % (s[0], " ".join(map(str, s[1])), monomial_str(mono, cfg.v)))
    return "\n".join(lines) + "\n"


def _tor_target(cfg, target):
    X = None
    if target == "exterior":
        weights = [tuple(1 if k == g else 0 for k in range(cfg.u)) for g in range(cfg.u)]
        return exterior_algebra(weights, name="Lambda"), None
    if target == "truncated-poly":
        return truncated_polynomial(3), None
    X = LogDeRham(cfg.disk())
    A = X.exterior_A()
    if target == "Z":
        return X.closed_forms(), None
    mods = {"Omega": lambda: X.a_action("Omega", A=A), "H": lambda: X.a_action("H", A=A),
            "Zplus": lambda: positive_part(X.a_action("Z", A=A))}
    if target not in mods:
        raise ConfigError("unknown tor target %r; choose exterior, truncated-poly, Z, Omega, H, Zplus" % target)
    return A, mods[target]()


def dump_tor(cfg, target="exterior", by_multidegree=False):
    A, M = _tor_target(cfg, target)
    T = tor_table(A, M, cfg.N, None if target in ("exterior", "truncated-poly") else cfg.D, cfg.jobs)
    if by_multidegree:
        return T.to_csv()
    lines = ["i,j,dim"] + ["%d,%d,%d" % (i, j, d) for (i, j), d in sorted(T.collapsed().items())]
    return "\n".join(lines) + "\n"


def dump_dual(cfg):
    C = QuasiCoalgebra(FormsQuasiAlgebra(cfg.disk()), cfg.N)
    lines = ["tuple,dim"]
    for ns in sorted(tuples_up_to(cfg.N, cfg.m_max, positive=True)):
        lines.append("%s,%d" % (".".join(map(str, ns)), C.total_dim(ns)))
    return "\n".join(lines) + "\n"


def dump_quasi_components(cfg):
    F = FormsQuasiAlgebra(cfg.disk())
    doc = {}
    for idx in sorted(tuples_up_to(cfg.N, cfg.m_max, positive=False)):
        comp = F.component(idx)
        doc[".".join(map(str, idx))] = {
            "total": sum(comp.values()),
            "strata": [{"weights": [list(w) for w in W], "dim": d} for W, d in sorted(comp.items())]}
    return json.dumps({"schema": SCHEMA, "config": cfg.to_json(), "components": doc},
                      indent=2, sort_keys=True) + "\n"


DUMPS = {"basis": dump_basis, "tor": dump_tor, "dual": dump_dual, "quasi-components": dump_quasi_components}


# ---------------------------------------------------------------------------
# argument handling

FLAG_KEYS = {"u": "u", "v": "v", "max-z-degree": "D", "max-degree": "N", "m-max": "m_max",
             "tuple-budget": "tuple_budget", "scenario": "scenario", "output": "output", "jobs": "jobs",
             "lattice-cap": "lattice_cap"}


def read_config_file(path):
    """key=value lines mirroring the long flags; '#' starts a comment."""
    out = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError("%s:%d: expected key=value" % (path, lineno))
            k, v = (x.strip() for x in line.split("=", 1))
            k = k.lstrip("-").replace("_", "-")
            if k not in FLAG_KEYS:
                raise ConfigError("%s:%d: unknown key %r" % (path, lineno, k))
            out[FLAG_KEYS[k]] = v
    return out


def _parser():
    p = argparse.ArgumentParser(prog="koszul-lab", description="Exact Koszulness certifications for "
                                "closed log forms on polydisks and their quasi-algebras.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="key=value file mirroring these flags")
        sp.add_argument("--u", type=int)
        sp.add_argument("--v", type=int)
        sp.add_argument("--max-z-degree", type=int, dest="D", help="per-factor weight bound D")
        sp.add_argument("--max-degree", type=int, dest="N", help="internal degree bound N")
        sp.add_argument("--m-max", type=int, dest="m_max")
        sp.add_argument("--tuple-budget", type=int, dest="tuple_budget")
        sp.add_argument("--jobs", type=int, help="worker processes (default $KOSZUL_LAB_JOBS or 1)")
        sp.add_argument("--lattice-cap", type=int, dest="lattice_cap")
        sp.add_argument("--out", help="write to this file instead of stdout")

    ck = sub.add_parser("check", help="run a scenario's certifications")
    common(ck)
    ck.add_argument("--scenario")
    ck.add_argument("--output")
    ck.add_argument("--timings", action="store_true", help="include wall-clock seconds per check")

    dp = sub.add_parser("dump", help="write a deterministic table")
    dp.add_argument("what", choices=sorted(DUMPS))
    common(dp)
    dp.add_argument("--target", default="exterior", help="tor dump: exterior, truncated-poly, Z, Omega, H, Zplus")
    dp.add_argument("--by-multidegree", action="store_true")
    return p


def build_config(args):
    values = {}
    if getattr(args, "config", None):
        values.update(read_config_file(args.config))
    for key in ("u", "v", "D", "N", "m_max", "tuple_budget", "jobs", "lattice_cap", "scenario", "output"):
        val = getattr(args, key, None)
        if val is not None:
            values[key] = val
    if "jobs" not in values:
        values["jobs"] = default_jobs()
    cfg = ScenarioConfig()
    for k, v in values.items():
        default = getattr(cfg, k)
        try:
            setattr(cfg, k, type(default)(v))
        except ValueError:
            raise ConfigError("%s: cannot read %r as %s" % (k, v, type(default).__name__))
    cfg.timings = bool(getattr(args, "timings", False))
    return cfg.validate()


def _emit(text, path):
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None):
    args = _parser().parse_args(argv)
    try:
        cfg = build_config(args)
    except (ConfigError, ValueError) as e:
        sys.stderr.write("koszul-lab: configuration error: %s\n" % e)
        return 2
    except OSError as e:
        sys.stderr.write("koszul-lab: %s\n" % e)
        return 2
    if args.command == "check":
        code, text = run(cfg)
        _emit(text, args.out)
        return code
    try:
        if args.what == "tor":
            text = dump_tor(cfg, args.target, args.by_multidegree)
        else:
            text = DUMPS[args.what](cfg)
    except ConfigError as e:
        sys.stderr.write("koszul-lab: configuration error: %s\n" % e)
        return 2
    _emit(text, args.out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
