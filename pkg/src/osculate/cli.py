"""Command-line entry point.

Every subcommand writes a single report to stdout (or ``--output``).  JSON
reports embed the run configuration.  Exact quantities are written as
"num/den" strings, with float approximations in separate fields.

Exit status: 0 on success, 1 if some identity or formula comparison fails,
2 on usage or resource errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from dataclasses import asdict, dataclass, field
from fractions import Fraction

from . import algebra, asymptotics, formulas, glue, montecarlo, transfer
from .formulas import aht, neighbor_formula, q_row, winding_formula

log = logging.getLogger("osculate")

EXIT_OK, EXIT_MISMATCH, EXIT_USAGE = 0, 1, 2
FORMATS = ("json", "csv", "pretty")
SHIFTS = {"1": 1, "i": algebra.I, "omega": algebra.OMEGA, "w": algebra.OMEGA}
MAX_DIGITS = 2000


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    subcommand: str
    format: str = "json"
    L: int | None = None
    L_min: int | None = None
    L_max: int | None = None
    seed: int | None = None
    max_states: int | None = transfer.DEFAULT_MAX_STATES
    budget: int | None = transfer.DEFAULT_BUDGET
    policy: str | None = None
    options: dict = field(default_factory=dict)

    def validate(self):
        if self.format not in FORMATS:
            raise UsageError(f"unknown format {self.format!r}")
        for name in ("max_states", "budget"):
            v = getattr(self, name)
            if v is not None and v <= 0:
                raise UsageError(f"--{name.replace('_', '-')} must be positive")
        if self.L is not None and self.L < 1:
            raise UsageError("--L must be positive")
        if self.L_min is not None and self.L_max is not None and self.L_min > self.L_max:
            raise UsageError("--L-min exceeds --L-max")
        if self.policy is not None and self.policy not in glue.POLICIES:
            raise UsageError(f"unknown policy {self.policy!r}")
        d = self.options.get("digits")
        if d is not None and not 50 <= d <= MAX_DIGITS:
            raise UsageError(f"--digits must lie in 50..{MAX_DIGITS}")
        return self


def frac(x: Fraction) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def _csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerows(rows)
    return buf.getvalue()


def _dump(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _need_L(cfg: RunConfig) -> int:
    if cfg.L is None:
        raise UsageError(f"{cfg.subcommand} needs --L")
    return cfg.L


def _even_range(cfg: RunConfig, lo: int, hi: int) -> list[int]:
    a = cfg.L_min if cfg.L_min is not None else lo
    b = cfg.L_max if cfg.L_max is not None else hi
    return [L for L in range(max(a, 2), b + 1) if L % 2 == 0]


# -- subcommands ----------------------------------------------------------------


def cmd_stationary(cfg: RunConfig):
    L = _need_L(cfg)
    if L < 2:
        raise UsageError("--L must be at least 2")
    o = cfg.options
    dist = transfer.stationary(
        L, method=o.get("solve"), build=o.get("build"), budget=cfg.budget, max_states=cfg.max_states
    )
    low = dist.minimum()
    ratios = dist.ratios()
    checks = {
        "min_is_inverse_aht": low == Fraction(1, aht(L)),
        "ratios_integral": all(r.denominator == 1 for r in ratios.values()),
    }
    if L % 2 == 0:
        checks["max_ratio_is_aht_odd"] = dist.maximum() / low == aht(L - 1)
    status = EXIT_OK if all(checks.values()) else EXIT_MISMATCH
    if cfg.format == "csv":
        rows = [["pattern", "p", "decimal", "ratio"]]
        rows += [[p.symbols, frac(v), repr(float(v)), str(ratios[p])] for p, v in dist.items()]
        return _csv(rows), status
    if cfg.format == "pretty":
        lines = [f"L={L}  states={len(dist)}  min={frac(low)}  max/min={dist.maximum() / low}"]
        lines += [f"  {p.symbols}  {frac(v)}  x{ratios[p]}" for p, v in dist.items()]
        lines += [f"  {k}: {v}" for k, v in checks.items()]
        return "\n".join(lines) + "\n", status
    report = {
        "config": asdict(cfg),
        **dist.to_json(),
        "states": len(dist),
        "min": frac(low),
        "max": frac(dist.maximum()),
        "argmax": [p.symbols for p in dist.argmax()],
        "ratios": [str(ratios[p]) for p in dist],
        "checks": checks,
    }
    return _dump(report), status


def cmd_glue(cfg: RunConfig):
    L = _need_L(cfg)
    if L < 2:
        raise UsageError("--L must be at least 2")
    policy = cfg.policy or glue.CONTRACTIBLE_ONLY
    dist = transfer.stationary(L, budget=cfg.budget, max_states=cfg.max_states)
    observables = {}
    target = winding_formula(L)
    if L % 2 == 0:
        w = glue.winding_edge_prob(dist)
        observables["winding"] = {"value": frac(w), "decimal": float(w), "formula": frac(target), "match": w == target}
        sd = glue.surround_distribution(dist, policy)
        q = [Fraction(v, aht(L) ** 2) for v in q_row(L)]
        got = [sd.get(m, Fraction(0)) for m in range(L // 2 + 1)]
        observables["surround"] = {
            "policy": policy,
            "value": [frac(v) for v in got],
            "decimal": [float(v) for v in got],
            "formula": [frac(v) for v in q],
            "match": got == q and set(sd) <= set(range(L // 2 + 1)),
        }
    else:
        s = glue.spanning_visit_prob(dist)
        observables["spanning"] = {"value": frac(s), "decimal": float(s), "formula": frac(target), "match": s == target}
    status = EXIT_OK if all(v["match"] for v in observables.values()) else EXIT_MISMATCH
    if cfg.format == "csv":
        rows = [["observable", "index", "value", "decimal", "formula"]]
        for name, v in observables.items():
            if isinstance(v["value"], list):
                for m, (a, d, f) in enumerate(zip(v["value"], v["decimal"], v["formula"])):
                    rows.append([name, m, a, repr(d), f])
            else:
                rows.append([name, "", v["value"], repr(v["decimal"]), v["formula"]])
        return _csv(rows), status
    if cfg.format == "pretty":
        lines = [f"L={L}"]
        for name, v in observables.items():
            lines.append(f"  {name}: {v['value']}  formula {v['formula']}  {'ok' if v['match'] else 'MISMATCH'}")
        return "\n".join(lines) + "\n", status
    return _dump({"config": asdict(cfg), "L": L, "observables": observables}), status


_IDENTITY_RANGES = {
    "normalization": 60,
    "q-sum": 40,
    "b-expansion": 40,
    "q-l0-forms": 60,
    "charpoly-symmetry": 40,
}


def cmd_verify(cfg: RunConfig):
    ident = cfg.options.get("identity", "all")
    names = list(formulas.IDENTITIES) + ["b-recurrence", "aht-sequences"] if ident == "all" else [ident]
    reports = []
    for name in names:
        if name in formulas.IDENTITIES:
            Ls = _even_range(cfg, 2, _IDENTITY_RANGES[name])
            if name == "charpoly-symmetry":
                lo = cfg.L_min if cfg.L_min is not None else 1
                hi = cfg.L_max if cfg.L_max is not None else 40
                Ls = list(range(max(lo, 1), hi + 1))
            reports.append(formulas.IDENTITIES[name](Ls))
        elif name == "b-recurrence":
            reports.append(formulas.verify_b_recurrence(cfg.L_max or 50))
        elif name == "aht-sequences":
            reports.append(formulas.verify_aht_sequences())
        elif name == "cspp":
            reports.append(_verify_cspp(cfg))
        else:
            raise UsageError(f"unknown identity {name!r}")
    status = EXIT_OK if all(r.ok for r in reports) else EXIT_MISMATCH
    if cfg.format == "csv":
        rows = [["identity", "L", "status"]]
        for r in reports:
            rows += [[r.name, L, e["status"]] for L, e in sorted(r.results.items())]
        return _csv(rows), status
    if cfg.format == "pretty":
        lines = []
        for r in reports:
            rng = r.L_range
            lines.append(f"{r.name}: {'ok' if r.ok else 'MISMATCH at ' + str(r.mismatches())}  L={rng[0]}..{rng[1]}")
        return "\n".join(lines) + "\n", status
    return _dump({"config": asdict(cfg), "reports": [r.to_json() for r in reports]}), status


def _verify_cspp(cfg: RunConfig):
    rep = formulas.ConjectureReport("cspp", "weighted CSPP count in the L-box = det(Pascal_L + sI)")
    hi = min(cfg.L_max or 3, algebra.MAX_CSPP_BOX)
    for L in range(max(cfg.L_min or 1, 1), hi + 1):
        vals = [(algebra.cspp_weighted_enum(L, s), algebra.shifted_det(L, s)) for s in (1, algebra.I, algebra.OMEGA)]
        rep.record(L, [str(a) for a, _ in vals], [str(b) for _, b in vals])
    return rep


def cmd_qlm(cfg: RunConfig):
    Ls = [cfg.L] if cfg.L is not None else _even_range(cfg, 2, 20)
    for L in Ls:
        if L < 2 or L % 2:
            raise UsageError("qlm needs even L >= 2")
    rows = {L: q_row(L) for L in Ls}
    if cfg.format == "pretty":
        return "".join(",".join(map(str, rows[L])) + "\n" for L in Ls), EXIT_OK
    if cfg.format == "csv":
        out = [["L", "m", "Q", "P"]]
        for L in Ls:
            den = aht(L) ** 2
            out += [[L, m, q, frac(Fraction(q, den))] for m, q in enumerate(rows[L])]
        return _csv(out), EXIT_OK
    data = []
    for L in Ls:
        den = aht(L) ** 2
        data.append({
            "L": L,
            "Q": [str(q) for q in rows[L]],
            "denominator": str(den),
            "P": [frac(Fraction(q, den)) for q in rows[L]],
            "decimal": [q / den for q in rows[L]],
        })
    return _dump({"config": asdict(cfg), "rows": data}), EXIT_OK


def _parse_shift(text: str):
    if text in SHIFTS:
        return SHIFTS[text]
    try:
        return int(text)
    except ValueError:
        raise UsageError(f"--shift must be an integer, 'i' or 'omega', got {text!r}") from None


def cmd_det(cfg: RunConfig):
    L = _need_L(cfg)
    s = _parse_shift(cfg.options.get("shift", "1"))
    C = algebra.pascal_charpoly(L)
    value = C.evaluate_shift(s)
    if cfg.format == "csv":
        return C.to_csv(), EXIT_OK
    if cfg.format == "pretty":
        return f"det(P_{L} + {cfg.options.get('shift', '1')} I) = {value}\n", EXIT_OK
    report = {
        "config": asdict(cfg),
        "L": L,
        "shift": cfg.options.get("shift", "1"),
        "ring": algebra.ring_of(s),
        "det": str(value),
        "charpoly": [str(c) for c in C.coeffs],
    }
    if not isinstance(value, int):
        report["decimal"] = [complex(value).real, complex(value).imag]
    else:
        report["decimal"] = float(value)
    return _dump(report), EXIT_OK


def cmd_fit(cfg: RunConfig):
    o = cfg.options
    lo = cfg.L_min if cfg.L_min is not None else 40
    hi = cfg.L_max if cfg.L_max is not None else 120
    digits = o.get("digits") or 60
    if cfg.format == "csv":
        Ls = [L for L in range(lo + lo % 2, hi + 1, 2)]
        return asymptotics.to_csv(Ls), EXIT_OK
    try:
        fit = asymptotics.fit_a_coefficients(lo, hi, o.get("k_max") or 10, digits)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if cfg.format == "pretty":
        lines = [f"window {fit.final.window[0]}..{fit.final.window[-1]}"]
        lines += [f"  a_{k} = {fit.coefficient(k):.12g}  (spread {fit.spread(k):.2g})" for k in fit.orders]
        if fit.flagged():
            lines.append(f"  unstable: {fit.flagged()}")
        return "\n".join(lines) + "\n", EXIT_OK
    report = {"config": asdict(cfg), **fit.to_json()}
    report["forecast_residuals"] = [[L, r] for L, r in fit.forecast_residuals()]
    return _dump(report), EXIT_OK


def _mc_expected(L: int, observable: str):
    if observable == "neighbor":
        return neighbor_formula(L)
    if observable in ("winding", "spanning"):
        return winding_formula(L)
    return None


def cmd_mc(cfg: RunConfig):
    L = _need_L(cfg)
    o = cfg.options
    obs = o.get("observable") or "winding"
    samples = o.get("samples") or 100_000
    seed = cfg.seed if cfg.seed is not None else 0
    workers = o.get("workers") or 1
    height = o.get("height")
    if samples <= 0:
        raise UsageError("--samples must be positive")
    strip = obs in ("surround", "spanning") or height is not None
    if strip:
        if obs == "neighbor":
            raise UsageError("the neighbor observable is measured on walks; drop --height")
        H = height or 50 * L
        try:
            est = montecarlo.estimate_strip(L, H, samples, obs, seed, workers)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    else:
        if L % 2:
            raise UsageError("walks need even L; use --observable spanning for odd L")
        res = montecarlo.estimate_walks(L, samples, seed, workers)
        key = obs if obs != "neighbor" else {
            "edge": "neighbor", "vertex": "neighbor-vertex", "vertex-below": "neighbor-vertex-below"
        }[o.get("neighbor_reading") or "edge"]
        est = {obs: res[key]}
    expected = {}
    if obs == "surround":
        den = aht(L) ** 2
        for m, q in enumerate(q_row(L)):
            expected[m] = Fraction(q, den)
    else:
        expected[obs] = _mc_expected(L, obs)
    entries = []
    within = True
    for k, e in est.items():
        d = e.to_json()
        exp = expected.get(k)
        if exp is not None:
            z = e.zscore(float(exp))
            d["expected"] = frac(exp)
            d["zscore"] = z
            within &= abs(z) <= 3
        entries.append(d)
    if cfg.format == "csv":
        rows = [["observable", "samples", "hits", "mean", "stderr", "censored", "expected", "zscore"]]
        for d in entries:
            rows.append([d["observable"], d["samples"], d["hits"], repr(d["mean"]), repr(d["stderr"]),
                         d["censored"], d.get("expected", ""), repr(d.get("zscore", ""))])
        return _csv(rows), EXIT_OK
    if cfg.format == "pretty":
        lines = [f"L={L} seed={seed}"]
        for d in entries:
            lines.append(
                f"  {d['observable']}: {d['mean']:.5f} +- {d['stderr']:.5f}"
                + (f"  expected {d['expected']}  z={d['zscore']:+.2f}" if "expected" in d else "")
            )
        return "\n".join(lines) + "\n", EXIT_OK
    return _dump({"config": asdict(cfg), "estimates": entries, "within_3sigma": within}), EXIT_OK


COMMANDS = {
    "stationary": cmd_stationary,
    "glue-observables": cmd_glue,
    "verify": cmd_verify,
    "qlm": cmd_qlm,
    "det": cmd_det,
    "fit": cmd_fit,
    "mc": cmd_mc,
}


# -- argument parsing -------------------------------------------------------------------


def _budget_flags(p):
    p.add_argument("--max-states", type=int, default=transfer.DEFAULT_MAX_STATES,
                   help="refuse circumferences with more connectivity states (default %(default)s)")
    p.add_argument("--budget", type=int, default=transfer.DEFAULT_BUDGET,
                   help="limit on columns x tile rows for the transfer matrix (default %(default)s)")
    p.add_argument("--allow-large", action="store_true",
                   help="lift both limits (needed for L >= 14)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="osculate", description="Exact and sampled loop statistics on the cylinder.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="subcommand", required=True)

    def add(name, help, formats_help=""):
        p = sub.add_parser(name, help=help, description=help + ("\n\n" + formats_help if formats_help else ""),
                           formatter_class=argparse.RawDescriptionHelpFormatter)
        p.add_argument("--format", choices=FORMATS, default="json")
        p.add_argument("--output", "-o", help="write the report here instead of stdout")
        return p

    p = add("stationary", "exact stationary distribution of connectivity states",
            "CSV columns: pattern,p,decimal,ratio (ratio = p / min p)")
    p.add_argument("--L", type=int, required=True)
    p.add_argument("--build", choices=("bruteforce", "sweep"))
    p.add_argument("--solve", choices=tuple(transfer.SOLVERS))
    _budget_flags(p)

    p = add("glue-observables", "winding, spanning and face-surround probabilities from glued states",
            "CSV columns: observable,index,value,decimal,formula")
    p.add_argument("--L", type=int, required=True)
    p.add_argument("--policy", choices=glue.POLICIES, default=glue.CONTRACTIBLE_ONLY)
    _budget_flags(p)

    p = add("verify", "exact checks of the determinant and counting identities",
            "CSV columns: identity,L,status")
    p.add_argument("--identity", default="all",
                   choices=("all", *formulas.IDENTITIES, "b-recurrence", "aht-sequences", "cspp"))
    p.add_argument("--L-min", type=int)
    p.add_argument("--L-max", type=int)

    p = add("qlm", "integers Q(L, m), m = 0..L/2 (pretty: one comma-separated row per L)",
            "CSV columns: L,m,Q,P")
    p.add_argument("--L", type=int)
    p.add_argument("--L-min", type=int)
    p.add_argument("--L-max", type=int)
    p.set_defaults(format="pretty")

    p = add("det", "det(Pascal_L + s I) with s an integer, i or omega",
            "CSV output is the characteristic polynomial: n,C_n")
    p.add_argument("--L", type=int, required=True)
    p.add_argument("--shift", default="1")

    p = add("fit", "large-L expansion coefficients of P(L, 0) L^(5/48)",
            "CSV output lists the data instead: L,P_L0,y_L")
    p.add_argument("--L-min", type=int, default=40)
    p.add_argument("--L-max", type=int, default=120)
    p.add_argument("--k-max", type=int, default=10)
    p.add_argument("--digits", type=int, default=60)

    p = add("mc", "Monte Carlo estimates from walkers (default) or finite strips (--height)",
            "CSV columns: observable,samples,hits,mean,stderr,censored,expected,zscore")
    p.add_argument("--L", type=int, required=True)
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--height", type=int, help="strip height; surround and spanning always use strips")
    p.add_argument("--observable", choices=("winding", "neighbor", "surround", "spanning"), default="winding")
    p.add_argument("--neighbor-reading", choices=montecarlo.NEIGHBOR_MODES, default="edge")
    p.add_argument("--workers", type=int, default=1)
    return ap


_CORE = {"subcommand", "format", "L", "L_min", "L_max", "seed", "max_states", "budget", "policy"}
_DROP = {"output", "verbose", "allow_large"}


def config_from_args(args: argparse.Namespace) -> RunConfig:
    ns = vars(args).copy()
    if ns.get("allow_large"):
        ns["max_states"] = None
        ns["budget"] = None
    core = {k: ns[k] for k in _CORE if k in ns}
    extra = {k: v for k, v in ns.items() if k not in _CORE and k not in _DROP}
    if "max_states" not in ns:
        core["max_states"] = None
        core["budget"] = None
    return RunConfig(**core, options=dict(sorted(extra.items()))).validate()


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, stream=sys.stderr)
    try:
        cfg = config_from_args(args)
        text, status = COMMANDS[cfg.subcommand](cfg)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except transfer.ResourceError as exc:
        print(f"resource limit: {exc} (use --allow-large to lift)", file=sys.stderr)
        return EXIT_USAGE
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
