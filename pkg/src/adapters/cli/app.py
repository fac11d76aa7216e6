"""Command-line front-end.

    cf-limits-lab.py digits --frac 113/355
    cf-limits-lab.py measure --kind threshold --b 2 --n-to 5
    cf-limits-lab.py sample --n 1000 --trials 4 --mode mixture --output digits.txt
    cf-limits-lab.py zero-one --preset sqrt-nlogn-equal --limsup --trials 200
    cf-limits-lab.py clt --config experiments/clt-threshold-2.json --threads 8
    cf-limits-lab.py mixing

Results go to stdout and, when requested, to files under the output
directory; diagnostics go to stderr.
"""

import argparse
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from functools import partial
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, TextIO

import mpmath
from pydantic import ValidationError

from src.adapters.storage.result_store import ResultStore
from src.config import AppConfig, __version__
from src.domain.cf_core import (
    convergents,
    derived_band_hits,
    derived_vars,
    digits_of_rational,
    digits_of_real,
    lemma_violations,
)
from src.domain.clt_lab import clt_constants, clt_experiment, corollary_cases
from src.domain.digit_sampler import SamplerMode, sample_block, seed_bank, write_stream
from src.domain.errors import (
    DomainError,
    PrecisionHorizonError,
    PreconditionRefused,
    SelfCheckFailed,
    SequenceSpecError,
)
from src.domain.events import EventFamily
from src.domain.gauss_measure import range_measure
from src.domain.mixing_lab import (
    MIXING_CONSTANTS,
    empirical_phi,
    empirical_psi1,
    eta_exact,
    eta_numeric,
    interior_regime_bound,
    phi1_rectangle_scan,
    regime_table,
)
from src.domain.models import DerivedSequence
from src.domain.zero_one import VerdictKind, chandra_certificate, limsup_study, series_verdict
from src.infrastructure.parallel import TrajectoryPool, chunked
from src.infrastructure.run_ledger import RunLedger
from src.ports.inbound import EventFamilySpec, ExperimentConfig, load_experiment
from src.ports.outbound import ResultStorePort, RunLedgerPort, TrajectoryRunnerPort, WrittenFile

EXIT_OK = 0
EXIT_BAD_INPUT = 2
EXIT_REFUSED = 3
EXIT_SELF_CHECK = 4

ETA_TOLERANCE = 1e-4


def _log(msg: str):
    print(msg, file=sys.stderr)


@dataclass
class RunContext:
    """What a command handler may touch besides its config."""

    app: AppConfig
    store: ResultStorePort
    runner: TrajectoryRunnerPort
    out: TextIO = sys.stdout
    binary_out: Any = None
    meta: Dict[str, Any] = field(default_factory=dict)
    written: List[WrittenFile] = field(default_factory=list)

    def emit(self, line: str = ""):
        print(line, file=self.out)

    def json(self, name: str, payload: Any):
        self.written.append(self.store.write_json(name, payload, self.meta))

    def csv(self, name: str, header: Sequence[str], rows):
        self.written.append(self.store.write_csv(name, header, rows, self.meta))


def _require_family(cfg: ExperimentConfig) -> EventFamily:
    if cfg.family is None:
        raise DomainError(f"'{cfg.command}' needs an event family (--preset or --kind)")
    return cfg.family.to_family()


def _side_name(output: str, suffix: str) -> str:
    return str(Path(output).with_suffix("")) + suffix


# ── digits ──────────────────────────────────────────────────


def _parse_fraction(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise DomainError(f"not a fraction: {text!r}")


def _parse_real(text: str, bits: Optional[int]):
    try:
        if bits is None:
            return float(text)
        with mpmath.workprec(bits):
            return mpmath.mpf(text)
    except ValueError:
        raise DomainError(f"not a real number: {text!r}")


def _band_hits(cfg: ExperimentConfig, derived: DerivedSequence) -> List[int]:
    family = _require_family(cfg)
    if family.c is None or family.d is None:
        raise DomainError("--band-var needs a band family with sequences c and d")
    return derived_band_hits(derived, family.c.positive, family.d.positive, cfg.band_var, family.n0)


def cmd_digits(cfg: ExperimentConfig, ctx: RunContext) -> int:
    if (cfg.frac is None) == (cfg.real is None):
        raise DomainError("digits needs exactly one of --frac or --real")
    if cfg.frac is not None:
        x = _parse_fraction(cfg.frac)
        expansion = digits_of_rational(x.numerator, x.denominator)
        digits, horizon = expansion.digits, len(expansion.digits)
        if expansion.truncated:
            _log(f"Expansion truncated at {len(digits)} digits")
    else:
        x = _parse_real(cfg.real, cfg.precision_bits)
        expansion = digits_of_real(x, cfg.n, cfg.precision_bits)
        digits, horizon = expansion.digits, expansion.horizon
        if horizon < len(digits):
            _log(f"Only the first {horizon} digits are reliable at {expansion.precision_bits} bits")

    # the last index of a rational expansion sits on the boundary of every bound
    checked = horizon - 1 if cfg.frac is not None else horizon
    for problem in lemma_violations(x, digits, checked):
        _log(f"warning: {problem}")

    states = convergents(digits)
    derived = derived_vars(x, digits, horizon, states)
    header = ["n", "a_n", "p_n", "q_n", "r_n", "y_n", "u_n", "reliable"]
    rows = [
        [v.n, v.digit, states[v.n].p_cur, states[v.n].q_cur, v.r, v.y, v.u, v.reliable]
        for v in derived.values
    ]

    ctx.emit(" ".join(str(a) for a in digits))
    ctx.emit()
    ctx.emit("\t".join(header))
    for row in rows:
        ctx.emit("\t".join(f"{c:.10g}" if isinstance(c, float) else str(c) for c in row))

    payload: Dict[str, Any] = {"digits": digits, "horizon": horizon, "table": [dict(zip(header, r)) for r in rows]}
    if cfg.band_var is not None:
        hits = _band_hits(cfg, derived)
        ctx.emit()
        ctx.emit(f"band hits ({cfg.band_var}_n): " + " ".join(str(n) for n in hits))
        payload["band_hits"] = {"variable": cfg.band_var, "indices": hits}

    if cfg.output:
        if cfg.format == "csv":
            ctx.csv(cfg.output, header, rows)
        else:
            ctx.json(cfg.output, payload)
    return EXIT_OK


# ── measure ─────────────────────────────────────────────────


def cmd_measure(cfg: ExperimentConfig, ctx: RunContext) -> int:
    family = _require_family(cfg)
    n_to = cfg.n_to or cfg.n_from
    if n_to < cfg.n_from:
        raise DomainError(f"empty index range {cfg.n_from}..{n_to}")
    header = ["n", "lo", "hi", "measure"]
    rows = []
    for n in range(cfg.n_from, n_to + 1):
        r = family.digit_range(n)
        rows.append([n, r.lo, r.hi if r.hi is not None else "inf", range_measure(r)])

    ctx.emit(family.describe())
    for n, lo, hi, value in rows:
        ctx.emit(f"{n}\t[{lo}, {hi}]\t{value:.10f}")

    if cfg.output:
        if cfg.format == "csv":
            ctx.csv(cfg.output, header, rows)
        else:
            ctx.json(cfg.output, {"family": family.describe(), "rows": [dict(zip(header, r)) for r in rows]})
    return EXIT_OK


# ── sample ──────────────────────────────────────────────────


def _sample_job(seeds, n: int, mode: str, a: Optional[float], burn_in: int, config) -> List[List[int]]:
    return sample_block(seeds, n, mode, a=a, burn_in=burn_in, config=config).tolist()


def cmd_sample(cfg: ExperimentConfig, ctx: RunContext) -> int:
    mode = cfg.mode or SamplerMode.EXACT.value
    seeds = seed_bank(cfg.seed, cfg.trials)
    job = partial(
        _sample_job, n=cfg.n, mode=mode, a=cfg.a, burn_in=cfg.burn_in, config=ctx.app.sampler
    )
    parts = ctx.runner.map(job, list(chunked(seeds, 8)))
    digits = [d for part in parts for row in part for d in row]
    data = write_stream(digits, cfg.stream_format)
    _log(f"Sampled {cfg.trials} x {cfg.n} digits ({mode})")

    if cfg.output:
        ctx.written.append(ctx.store.write_bytes(cfg.output, data, ctx.meta))
    elif cfg.stream_format == "binary":
        if ctx.binary_out is None:
            raise DomainError("binary streams need --output or a byte-capable stdout")
        ctx.binary_out.write(data)
        ctx.binary_out.flush()
    else:
        ctx.out.write(data.decode("ascii"))
    return EXIT_OK


# ── zero-one ────────────────────────────────────────────────


def cmd_zero_one(cfg: ExperimentConfig, ctx: RunContext) -> int:
    family = _require_family(cfg)
    verdict = series_verdict(family, cfg.horizon, cfg.method)
    ctx.emit(verdict.kind.value)
    ctx.emit(f"series: {verdict.series}")
    for t, s in verdict.partial_sums.items():
        ctx.emit(f"  sum to {t}: {s:.6f}")
    for note in verdict.notes:
        ctx.emit(f"  {note}")
    if verdict.kind is VerdictKind.INCONCLUSIVE:
        _log(f"warning: no certificate for {family.describe()}")

    payload: Dict[str, Any] = {
        "family": family.describe(),
        "verdict": verdict,
        "chandra": {m: chandra_certificate(family, m) for m in ("psi", "phi")},
    }
    output = cfg.output or "zero-one.json"
    if cfg.limsup:
        study = limsup_study(
            family, cfg.horizons, cfg.trials, cfg.seed,
            mode=cfg.mode or SamplerMode.MIXTURE.value, runner=ctx.runner, config=ctx.app.sampler,
        )
        payload["limsup"] = study
        header = ["horizon", "mean", "median", "minimum", "maximum", "stalled_fraction", "standard_error", "exact_mean"]
        ctx.emit()
        ctx.emit("\t".join(header))
        for row in study.rows:
            ctx.emit(
                f"{row.horizon}\t{row.mean:.4f}\t{row.median:g}\t{row.minimum}\t{row.maximum}\t"
                f"{row.stalled_fraction:.4f}\t{row.standard_error:.4f}\t{row.exact_mean:.4f}"
            )
        ctx.csv(
            _side_name(output, ".growth.csv"),
            header,
            [[getattr(r, h) for h in header] for r in study.rows],
        )
    ctx.json(output, payload)
    return EXIT_OK


# ── clt ─────────────────────────────────────────────────────


def _clt_family(cfg: ExperimentConfig) -> EventFamily:
    if cfg.case is None:
        return _require_family(cfg)
    if cfg.family is not None:
        raise DomainError("give either --case or an event family, not both")
    return corollary_cases()[cfg.case]


def cmd_clt(cfg: ExperimentConfig, ctx: RunContext) -> int:
    family = _clt_family(cfg)
    epsilon = cfg.epsilon if cfg.epsilon is not None else ctx.app.run.epsilon
    try:
        result = clt_experiment(
            family, cfg.n, cfg.trials, cfg.seed,
            mode=cfg.mode or SamplerMode.EXACT.value, epsilon=epsilon, runner=ctx.runner,
            config=ctx.app.sampler,
        )
    except PreconditionRefused:
        ctx.emit(f"rho = {clt_constants().rho:.6f}")
        raise

    c = result.conditions
    ctx.emit(f"rho = {result.constants['rho']:.6f}")
    ctx.emit(f"threshold_ok = {c['threshold_ok']}  divergence_ok = {c['divergence_ok']}")
    ctx.emit(f"exact mean = {result.exact_mean:.6f}  mc mean = {result.mc_mean:.6f} +- {result.mc_standard_error:.6f}")
    ctx.emit(f"mc variance = {result.mc_variance:.6f}  lower bound = {result.variance_lower_bound:.6f}")
    ctx.emit(f"ks = {result.ks_distance:.6f}  (p = {result.ks_pvalue:.4g})")
    ctx.emit(f"chi2 = {result.chi2_statistic:.4f}  (p = {result.chi2_pvalue:.4g})")

    output = cfg.output or "clt.json"
    ctx.json(output, result)
    ctx.csv(_side_name(output, ".ecdf.csv"), ["z", "ecdf"], result.ecdf)
    if cfg.samples_csv:
        ctx.csv(
            _side_name(output, ".samples.csv"),
            ["trajectory", "z"],
            [[i, float(z)] for i, z in enumerate(result.standardized)],
        )
    return EXIT_OK


# ── mixing ──────────────────────────────────────────────────


def cmd_mixing(cfg: ExperimentConfig, ctx: RunContext) -> int:
    c = MIXING_CONSTANTS
    exact = eta_exact()
    numeric, argmax_a = eta_numeric(cfg.grid_a, cfg.grid_x)
    rho = clt_constants().rho
    psi_hat = empirical_psi1(cfg.K)
    phi_scan, px, py = phi1_rectangle_scan(min(cfg.grid_x, 400))
    phis = [empirical_phi(lag, K=min(cfg.K, 10), trials=cfg.trials, seed=cfg.seed) for lag in cfg.lags]

    ctx.emit(f"eta {exact:.7f}")
    ctx.emit(f"eta_numeric {numeric:.7f} (a = {argmax_a:.6f}, grid {cfg.grid_a}x{cfg.grid_x})")
    ctx.emit(f"psi1 {c.psi1:.7f}")
    ctx.emit(f"rho {rho:.6f}")
    ctx.emit(f"interior_bound {interior_regime_bound():.7f}")
    ctx.emit(f"empirical_psi1 {psi_hat:.7f} (K = {cfg.K})")
    ctx.emit(f"phi1_rectangles {phi_scan:.7f}")
    for est in phis:
        ctx.emit(f"phi({est.lag}) {est.value:.7f} +- {est.standard_error:.2g}")

    profiles = regime_table(cfg.profile_points)
    output = cfg.output or "mixing.json"
    ctx.json(
        output,
        {
            "constants": c,
            "eta_exact": exact,
            "eta_numeric": numeric,
            "eta_numeric_argmax": argmax_a,
            "grid": [cfg.grid_a, cfg.grid_x],
            "rho": rho,
            "interior_regime_bound": interior_regime_bound(),
            "empirical_psi1": {"K": cfg.K, "value": psi_hat},
            "phi1_rectangle_scan": {"value": phi_scan, "x": px, "y": py},
            "empirical_phi": phis,
            "regimes": profiles,
        },
    )
    ctx.csv(
        _side_name(output, ".profile.csv"),
        ["a", "x1", "x2", "regime", "magnitude"],
        [[p.a, p.x1, p.x2, p.regime, p.magnitude] for p in profiles],
    )
    if abs(numeric - exact) > ETA_TOLERANCE:
        raise SelfCheckFailed(f"eta_numeric {numeric:.7f} is more than {ETA_TOLERANCE:g} from eta {exact:.7f}")
    return EXIT_OK


COMMANDS: Dict[str, Callable[[ExperimentConfig, RunContext], int]] = {
    "digits": cmd_digits,
    "measure": cmd_measure,
    "sample": cmd_sample,
    "zero-one": cmd_zero_one,
    "clt": cmd_clt,
    "mixing": cmd_mixing,
}


# ── argument parsing ────────────────────────────────────────

_FAMILY_FLAGS = ("preset", "kind", "b", "c", "d", "n0")


def _add_family_flags(p: argparse.ArgumentParser):
    g = p.add_argument_group("event family")
    g.add_argument("--preset", help="Named family, e.g. sqrt-nlogn-equal")
    g.add_argument("--kind", choices=["threshold", "equal", "closed_band", "open_band"])
    g.add_argument("--b", help="Threshold sequence b_n")
    g.add_argument("--c", help="Band width sequence c_n")
    g.add_argument("--d", help="Band start sequence d_n")
    g.add_argument("--n0", type=int, help="First index the family is defined from")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON experiment manifest; flags override its fields")
    common.add_argument("--seed", type=int, help="Master seed")
    common.add_argument("--threads", type=int, dest="workers", help="Worker processes")
    common.add_argument("--output-dir", help="Directory for result files (default $CF_LAB_OUTPUT_DIR)")
    common.add_argument("--output", help="Result file name inside the output directory")
    common.add_argument("--format", choices=["json", "csv"])

    parser = argparse.ArgumentParser(prog="cf-limits-lab", description="Continued-fraction limit-law lab")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("digits", parents=[common], help="Digits and convergents of a number")
    p.add_argument("--frac", help="Rational p/q in (0, 1)")
    p.add_argument("--real", help="Real number in (0, 1)")
    p.add_argument("--n", type=int, help="Digits to extract from --real")
    p.add_argument("--precision-bits", type=int, help="mpmath precision for --real")
    _add_family_flags(p)
    p.add_argument("--band-var", choices=["r", "y", "u"], help="Report indices where this variable falls in the c, d band")

    p = sub.add_parser("measure", parents=[common], help="Gauss measure of A_n over an index range")
    _add_family_flags(p)
    p.add_argument("--n-from", type=int)
    p.add_argument("--n-to", type=int)

    p = sub.add_parser("sample", parents=[common], help="Sample digit trajectories")
    p.add_argument("--n", type=int, help="Digits per trajectory")
    p.add_argument("--trials", type=int)
    p.add_argument("--mode", choices=[m.value for m in SamplerMode])
    p.add_argument("--a", type=float, help="gamma_a parameter")
    p.add_argument("--burn-in", type=int)
    p.add_argument("--stream-format", choices=["text", "binary"])

    p = sub.add_parser("zero-one", parents=[common], help="0-1 law verdict and limsup study")
    _add_family_flags(p)
    p.add_argument("--horizon", type=int)
    p.add_argument("--horizons", type=int, nargs="+")
    p.add_argument("--method", choices=["partial_sum", "integral_test"])
    p.add_argument("--limsup", action="store_true", default=None, help="Run the Monte Carlo limsup study")
    p.add_argument("--trials", type=int)
    p.add_argument("--mode", choices=[m.value for m in SamplerMode])

    p = sub.add_parser("clt", parents=[common], help="Central limit experiment for S_n")
    _add_family_flags(p)
    p.add_argument("--n", type=int, help="Trajectory length")
    p.add_argument("--trials", type=int)
    p.add_argument("--mode", choices=[m.value for m in SamplerMode])
    p.add_argument("--epsilon", type=float)
    p.add_argument("--case", choices=["A", "B", "C", "D"], help="One of the four admissible corollary families")
    p.add_argument("--samples-csv", action="store_true", default=None, help="Also write the standardized sample")

    p = sub.add_parser("mixing", parents=[common], help="Mixing constants and discrepancy profile")
    p.add_argument("--grid-a", type=int)
    p.add_argument("--grid-x", type=int)
    p.add_argument("--K", type=int, help="Digit cutoff for empirical estimators")
    p.add_argument("--lags", type=int, nargs="+")
    p.add_argument("--trials", type=int, help="Monte Carlo trials for lags > 1")
    p.add_argument("--profile-points", type=int)
    return parser


def resolve_config(args: argparse.Namespace, app: AppConfig) -> ExperimentConfig:
    """Manifest (if any), then flag overrides, then environment defaults."""
    if args.config:
        cfg = load_experiment(args.config)
        if cfg.command != args.command:
            raise DomainError(f"manifest {args.config} is for '{cfg.command}', not '{args.command}'")
    else:
        cfg = ExperimentConfig(command=args.command)

    values = vars(args)
    overrides = {
        k: v for k, v in values.items()
        if k in ExperimentConfig.model_fields and k not in ("command", "family")
    }
    family_flags = {k: values.get(k) for k in _FAMILY_FLAGS if values.get(k) is not None}
    if family_flags:
        if "preset" in family_flags or cfg.family is None:
            base: Dict[str, Any] = {}
        else:
            base = cfg.family.model_dump(exclude_none=True)
        base.update(family_flags)
        if "kind" in family_flags:
            base.pop("preset", None)
        overrides["family"] = EventFamilySpec.model_validate(base).model_dump()
    cfg = cfg.with_overrides(**overrides)

    defaults = {}
    if cfg.seed is None:
        defaults["seed"] = app.run.seed
    if cfg.workers is None:
        defaults["workers"] = app.run.workers
    return cfg.with_overrides(**defaults)


def main(argv: Optional[Sequence[str]] = None, out: Optional[TextIO] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_BAD_INPUT if e.code else EXIT_OK

    app = AppConfig.from_env()
    try:
        cfg = resolve_config(args, app)
    except (ValidationError, DomainError, SequenceSpecError, OSError, ValueError) as e:
        _log(f"error: {e}")
        return EXIT_BAD_INPUT

    output_dir = args.output_dir or app.run.output_dir
    ctx = RunContext(
        app=app,
        store=ResultStore(output_dir),
        runner=TrajectoryPool(cfg.workers),
        out=out or sys.stdout,
        binary_out=getattr(out or sys.stdout, "buffer", None),
        meta={
            "version": __version__,
            "command": cfg.command,
            "config": cfg.model_dump(mode="json"),
            "config_digest": cfg.digest(),
        },
    )

    started = time.monotonic()
    try:
        code = COMMANDS[cfg.command](cfg, ctx)
    except PreconditionRefused as e:
        _log(f"refused: {e}")
        code = EXIT_REFUSED
    except SelfCheckFailed as e:
        _log(f"self-check failed: {e}")
        code = EXIT_SELF_CHECK
    except (DomainError, SequenceSpecError, PrecisionHorizonError) as e:
        _log(f"error: {e}")
        code = EXIT_BAD_INPUT

    ledger: RunLedgerPort = RunLedger(output_dir)
    ledger.record(
        {
            "command": cfg.command,
            "config_digest": cfg.digest(),
            "seed": cfg.seed,
            "exit_code": code,
            "duration_s": round(time.monotonic() - started, 3),
            "outputs": [w.path for w in ctx.written],
        }
    )
    return code
