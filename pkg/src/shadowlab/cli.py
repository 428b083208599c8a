"""Command-line front end.

    shadowlab classify --coeffs 1,0.5,0.5,1
    shadowlab experiment {orbit,shadow,lemma,halfplane,gh-shadow,spectral} [options]
    shadowlab report --suite {all,table1} --format {json,csv}

Exit codes: 0 success, 2 invalid symbol (not a self-map, degenerate or the
identity), 3 configuration error, 4 a checked invariant was violated.
"""

from __future__ import annotations

import argparse
import cmath
import json
import math
import os
import re
import sys
import tempfile
from dataclasses import dataclass

import numpy as np

from . import halfplane as hp
from .compop import comp_matrix, spectrum_annulus_HA
from .errors import DegenerateCoefficients, IdentityMap, NotSelfMap, ShadowLabError
from .hardy import TaylorPoly, binomial_series
from .lft import (
    SHADOWING_CLASSES,
    MoebiusMap,
    SymbolTag,
    canonical_form,
    classify,
    is_inf,
    make_moebius,
    parabolic_canonical,
    table1_map,
)
from .shadowing import (
    finite_horizon_shadow,
    fixed_point_certificate,
    lemma_check,
    lemma_partial_sums,
    lemma_constant,
    natural_pseudo_orbit,
    orbit_csv,
    parabolic_certificate,
    parabolic_orbit_value_at_zero,
    shadowing_verdict,
)

EXIT_OK, EXIT_SYMBOL, EXIT_CONFIG, EXIT_INVARIANT = 0, 2, 3, 4
OUT_DIR_ENV = "SHADOWLAB_OUT_DIR"
SIMILARITY_CONTRACT = 1e-4
BOUND_SLACK = 1e-6


class ConfigError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------- parsing

def parse_complex(text: str) -> complex:
    """Parse "re+imi" style values: 2, -0.5i, 1+2i, i, 1-i."""
    s = text.strip().replace(" ", "").replace("i", "j").replace("J", "j")
    s = re.sub(r"(^|[+-])j", r"\g<1>1j", s)
    try:
        return complex(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}") from None


def parse_complex_list(text: str) -> list[complex]:
    return [parse_complex(t) for t in text.split(",") if t.strip()]


def parse_float_list(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a list of numbers: {text!r}") from None


def _positive(kind):
    def conv(text):
        v = kind(text)
        if v <= 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {text}")
        return v
    return conv


@dataclass(frozen=True)
class ExperimentConfig:
    N: int = 128
    L: int = 200
    delta: float = 0.1
    epsilon: float = 1.0
    G: int = 4096
    T_max: float = 40.0
    tol: float = 1e-9
    seed: int = 0
    out: str | None = None
    format: str = "json"

    @classmethod
    def from_args(cls, args) -> "ExperimentConfig":
        return cls(args.N, args.L, args.delta, args.epsilon, args.G, args.T_max, args.tol, args.seed, args.out, args.format)


# ----------------------------------------------------------------- output

def _cjson(z) -> list | str:
    z = complex(z)
    if is_inf(z):
        return "inf"
    return [z.real, z.imag]


def _fmt_complex(z: complex) -> str:
    z = complex(z)
    if z.imag == 0:
        return repr(z.real)
    return f"{z.real!r}{z.imag:+}i"


def resolve_output(out: str | None, default_name: str) -> str | None:
    """None means stdout.  Relative paths land under $SHADOWLAB_OUT_DIR if set."""
    root = os.environ.get(OUT_DIR_ENV)
    if out is None:
        return os.path.join(root, default_name) if root else None
    if out.strip() == "":
        raise ConfigError("empty output path")
    if root and not os.path.isabs(out):
        return os.path.join(root, out)
    return out


def write_output(text: str, out: str | None, default_name: str) -> None:
    path = resolve_output(out, default_name)
    if path is None:
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(path))
    try:
        os.makedirs(directory, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=directory, prefix=".shadowlab-")
    except OSError as exc:
        raise ConfigError(f"cannot write to {path}: {exc}") from None
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise


def _dump(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _summary(line: str) -> None:
    print(line, file=sys.stderr)


# --------------------------------------------------------------- classify

def classification_report(phi: MoebiusMap, tol: float = 1e-9) -> dict:
    cls = classify(phi, tol)
    if cls.tag is SymbolTag.IDENTITY:
        raise IdentityMap("identity map")
    canon = canonical_form(phi, tol)
    params = {k: (float(v) if isinstance(v, float) else _cjson(v)) for k, v in canon.params.items()}
    return {
        "class": cls.tag.value,
        "fixed_points": [_cjson(p) for p in cls.fixed],
        "multiplier": _cjson(cls.multiplier),
        "canonical_params": params,
        "shadowing_verdict": cls.shadowing,
        "verdict": cls.shadowing,
    }


def run_classify(args) -> int:
    coeffs = parse_complex_list(args.coeffs)
    if len(coeffs) != 4:
        raise ConfigError("--coeffs needs exactly four values a,b,c,d")
    report = classification_report(make_moebius(*coeffs), args.tol)
    write_output(_dump(report), args.out, "classify.json")
    _summary(f"class: {report['class']}, verdict: {report['verdict']}")
    return EXIT_OK


# ------------------------------------------------------------ experiments

def _symbol_from_args(args) -> MoebiusMap:
    if args.coeffs:
        coeffs = parse_complex_list(args.coeffs)
        if len(coeffs) != 4:
            raise ConfigError("--coeffs needs exactly four values a,b,c,d")
        return make_moebius(*coeffs)
    sym = args.symbol
    if sym == "parabolic":
        return parabolic_canonical(args.a)
    if sym == "rotation":
        return make_moebius(args.omega, 0, 0, 1)
    if sym in ("ha", "hna1", "hna2"):
        tag = {"ha": SymbolTag.HA, "hna1": SymbolTag.HNA_I, "hna2": SymbolTag.HNA_II}[sym]
        return table1_map(tag, r=args.r)
    raise ConfigError(f"unknown symbol {sym!r}")


def _seed_vector(args, cfg: ExperimentConfig) -> np.ndarray:
    if args.symbol == "parabolic" and not args.coeffs:
        return binomial_series(args.s, cfg.N).coeffs
    v = np.zeros(cfg.N + 1, dtype=complex)
    v[0] = 1.0
    return v


def _orbit_setup(args, cfg: ExperimentConfig):
    phi = _symbol_from_args(args)
    T = comp_matrix(phi, cfg.N)
    orbit = natural_pseudo_orbit(T, _seed_vector(args, cfg), cfg.delta, cfg.L)
    return phi, T, orbit


def run_orbit(args, cfg: ExperimentConfig) -> int:
    phi, T, orbit = _orbit_setup(args, cfg)
    if args.symbol == "parabolic" and not args.coeffs:
        # evaluation point 0, where the orbit values are known in closed form
        cert = parabolic_certificate(args.a, args.s, cfg.delta, args.g_norm, cfg.L, cfg.N)
        values = parabolic_orbit_value_at_zero(args.a, args.s, cfg.delta, np.arange(1, cfg.L + 1), cfg.N)
        text = orbit_csv(orbit, 0, zip(cert.n, cert.lower_bounds), values)
    else:
        cls = classify(phi, cfg.tol)
        alpha = cls.attracting
        if abs(alpha) < 1:
            f = TaylorPoly(orbit.states[0])
            cert = fixed_point_certificate(alpha, f, cfg.delta, args.g_alpha, cfg.L)
            text = orbit_csv(orbit, alpha, zip(cert.n, cert.lower_bounds))
        else:
            text = orbit_csv(orbit, 0)
    write_output(text, cfg.out, "orbit.csv")
    _summary(f"max residual: {orbit.residuals.max():.6g}")
    return EXIT_OK


def run_shadow(args, cfg: ExperimentConfig) -> int:
    phi, T, orbit = _orbit_setup(args, cfg)
    report = finite_horizon_shadow(T, orbit, cfg.epsilon)
    write_output(_dump(report.to_json()), cfg.out, "shadow.json")
    _summary(f"sup_error: {report.sup_error:.6g}")
    return EXIT_OK


def run_lemma(args, cfg: ExperimentConfig) -> int:
    rows, violations = [], 0
    for s in args.s_list:
        for a in args.a_list:
            chk = lemma_check(s, a, args.nmax)
            n = np.arange(1, args.nmax + 1)
            bad = int(np.count_nonzero(lemma_partial_sums(s, a, args.nmax) < lemma_constant(s, a) * n ** (s + 1)))
            violations += bad
            rows.append({"s": s, "a": _cjson(a), "n_max": args.nmax, "passed": chk.passed,
                         "first_violation": chk.first_violation, "violations": bad, "worst_ratio": chk.worst_ratio})
    write_output(_dump({"rows": rows, "violations": violations}), cfg.out, "lemma.json")
    _summary(f"violations: {violations}")
    return EXIT_INVARIANT if violations else EXIT_OK


HALFPLANE_FUNCTIONS = {
    "exp": lambda t: np.exp(-t),
    "texp": lambda t: t * np.exp(-t),
    "indicator": lambda t: (t < 1).astype(float),
}


def run_halfplane(args, cfg: ExperimentConfig) -> int:
    grid = hp.uniform_grid(cfg.T_max, cfg.G)
    rows = []
    for a in args.a_list:
        for name, fn in HALFPLANE_FUNCTIONS.items():
            F = hp.GridFunction.sample(fn, grid)
            for w in args.w:
                rows.append({"a": a, "F": name, "w": _cjson(w), "discrepancy": hp.similarity_check(a, F, [w])})
    worst = max(r["discrepancy"] for r in rows)
    write_output(_dump({"G": cfg.G, "T_max": cfg.T_max, "rows": rows, "max_discrepancy": worst}), cfg.out, "halfplane.json")
    _summary(f"max discrepancy: {worst:.3g}")
    return EXIT_INVARIANT if worst > SIMILARITY_CONTRACT else EXIT_OK


def run_gh_shadow(args, cfg: ExperimentConfig) -> int:
    a = args.a_real
    grid = hp.gh_grid(a, cfg.L, T_max=cfg.T_max)
    rng = np.random.default_rng(cfg.seed)
    worst, violations, K = None, 0, hp.gh_constant(a)
    for _ in range(args.trials):
        orbit = hp.random_pseudo_orbit(a, grid, cfg.delta, cfg.L, rng)
        rep = hp.gh_shadow(a, orbit)
        violations += rep.sup_error > K * cfg.delta
        if worst is None or rep.sup_error > worst.sup_error:
            worst = rep
    out = worst.to_json() | {"trials": args.trials, "violations": violations}
    write_output(_dump(out), cfg.out, "gh_shadow.json")
    _summary(f"sup_error: {worst.sup_error:.6g} (K*delta = {K * cfg.delta:.6g}), violations: {violations}")
    return EXIT_INVARIANT if violations else EXIT_OK


def run_spectral(args, cfg: ExperimentConfig) -> int:
    table = hp.spectral_bounds_report(args.a_real, args.nmax)
    over = (table.column("measured_W") > table.column("bound_W") + BOUND_SLACK) | (
        table.column("measured_V") > table.column("bound_V") + BOUND_SLACK
    )
    write_output(table.to_csv(), cfg.out, "spectral.csv")
    _summary(f"bound violations: {int(over.sum())}")
    return EXIT_INVARIANT if over.any() else EXIT_OK


EXPERIMENTS = {
    "orbit": run_orbit,
    "shadow": run_shadow,
    "lemma": run_lemma,
    "halfplane": run_halfplane,
    "gh-shadow": run_gh_shadow,
    "spectral": run_spectral,
}


def run_experiment(args) -> int:
    cfg = ExperimentConfig.from_args(args)
    if args.kind in ("gh-shadow", "spectral"):
        a = args.a
        if abs(a.imag) > 0 or not 0 < a.real < 1:
            raise ConfigError("--a must be a real number in (0, 1) for this experiment")
        args.a_real = a.real
    return EXPERIMENTS[args.kind](args, cfg)


# ----------------------------------------------------------------- report

TABLE1_SAMPLES = [
    (SymbolTag.EA, [{"omega": cmath.exp(1j * t)} for t in (math.pi / 3, 1.0, 2.5)]),
    (SymbolTag.HA, [{"r": r} for r in (0.25, 0.5, 0.75)]),
    (SymbolTag.HNA_I, [{"r": r} for r in (0.25, 0.5, 0.75)]),
    (SymbolTag.HNA_II, [{"r": r} for r in (0.25, 0.5, 0.75)]),
    (SymbolTag.LOX, [{"a": 0.5, "c": 0.2}, {"a": 0.5j, "c": 0.3}, {"a": 0.3 + 0.3j, "c": 0.5}]),
    (SymbolTag.PA, [{"a": a} for a in (1j, 2j, -1j)]),
    (SymbolTag.PNA, [{"a": a} for a in (1, 2, 1 + 1j)]),
]


def table1_rows() -> list[dict]:
    rows = []
    for tag, samples in TABLE1_SAMPLES:
        for params in samples:
            phi = table1_map(tag, **params)
            cls = classify(phi)
            verdict = shadowing_verdict(phi)
            rows.append({
                "family": tag.value,
                "param": ";".join(f"{k}={_fmt_complex(v)}" for k, v in params.items()),
                "class": cls.tag.value,
                "verdict": verdict,
                "expected_verdict": tag in SHADOWING_CLASSES,
            })
    return rows


def run_report(args) -> int:
    rows = table1_rows()
    mismatches = sum(r["class"] != r["family"] or r["verdict"] != r["expected_verdict"] for r in rows)
    if args.format == "csv":
        lines = ["family,param,class,verdict"]
        lines += [f"{r['family']},{r['param']},{r['class']},{'true' if r['verdict'] else 'false'}" for r in rows]
        text = "\n".join(lines) + "\n"
    else:
        body = {"table1": rows, "mismatches": mismatches}
        if args.suite == "all":
            body["gh_constants"] = {str(a): hp.gh_constant(a) for a in (0.25, 0.5, 0.75)}
            ann = spectrum_annulus_HA(table1_map(SymbolTag.HA, r=0.5))
            body["ha_spectrum_annulus"] = {"r": 0.5, "inner": ann.inner, "outer": ann.outer}
        text = _dump(body)
    write_output(text, args.out, f"report_{args.suite}.{args.format}")
    _summary(f"rows: {len(rows)}, mismatches: {mismatches}")
    return EXIT_INVARIANT if mismatches else EXIT_OK


# ------------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="shadowlab", description="Shadowing experiments for composition operators.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("classify", help="classify a linear fractional self-map of the disk")
    c.add_argument("--coeffs", required=True, help="a,b,c,d of (az+b)/(cz+d); complex as re+imi")
    c.add_argument("--tol", type=_positive(float), default=1e-9)
    c.add_argument("--out", default=None)

    e = sub.add_parser("experiment", help="run a pseudo-orbit, shadow or half-plane experiment")
    e.add_argument("kind", choices=sorted(EXPERIMENTS))
    e.add_argument("--N", type=_positive(int), default=128, help="truncation degree")
    e.add_argument("--L", type=_positive(int), default=200, help="horizon")
    e.add_argument("--delta", type=_positive(float), default=0.1)
    e.add_argument("--epsilon", type=_positive(float), default=1.0)
    e.add_argument("--G", type=_positive(int), default=4096, help="half-plane grid cells")
    e.add_argument("--T-max", dest="T_max", type=_positive(float), default=40.0)
    e.add_argument("--tol", type=_positive(float), default=1e-9)
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--out", default=None)
    e.add_argument("--format", choices=("json", "csv"), default="json")
    e.add_argument("--symbol", choices=("parabolic", "rotation", "ha", "hna1", "hna2"), default="parabolic")
    e.add_argument("--coeffs", default=None, help="explicit symbol a,b,c,d (overrides --symbol)")
    e.add_argument("--a", type=parse_complex, default=1.0, help="parabolic parameter, or the half-plane a")
    e.add_argument("--s", type=float, default=0.25, help="exponent of the seed (1-z)^-s")
    e.add_argument("--r", type=float, default=0.5)
    e.add_argument("--omega", type=parse_complex, default=1j, help="rotation multiplier")
    e.add_argument("--g-alpha", dest="g_alpha", type=parse_complex, default=0.0, help="candidate shadow value at the fixed point")
    e.add_argument("--g-norm", dest="g_norm", type=float, default=0.0, help="candidate shadow norm")
    e.add_argument("--s-list", dest="s_list", type=parse_float_list, default=None, help="lemma exponents (default: --s)")
    e.add_argument("--a-list", dest="a_list", type=parse_complex_list, default=None, help="lemma or half-plane parameters (default: --a)")
    e.add_argument("--nmax", type=_positive(int), default=None)
    e.add_argument("--w", type=parse_complex_list, default=[1, 2, 1 + 1j], help="half-plane sample points")
    e.add_argument("--trials", type=_positive(int), default=1)

    r = sub.add_parser("report", help="reproduce the classification table")
    r.add_argument("--suite", choices=("all", "table1"), default="all")
    r.add_argument("--format", choices=("json", "csv"), default="json")
    r.add_argument("--out", default=None)
    return p


def _finish_experiment_args(args) -> None:
    if args.s_list is None:
        args.s_list = [args.s]
    if args.a_list is None:
        args.a_list = [args.a]
    if args.kind == "halfplane":
        if any(a.imag != 0 for a in args.a_list):
            raise ConfigError("half-plane parameters must be real")
        args.a_list = [a.real for a in args.a_list]
    if args.nmax is None:
        args.nmax = 10_000 if args.kind == "lemma" else 20


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "classify":
            return run_classify(args)
        if args.command == "experiment":
            _finish_experiment_args(args)
            return run_experiment(args)
        return run_report(args)
    except (NotSelfMap, DegenerateCoefficients, IdentityMap) as exc:
        print(f"shadowlab: {exc}", file=sys.stderr)
        return EXIT_SYMBOL
    except (ConfigError, ShadowLabError) as exc:
        print(f"shadowlab: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
