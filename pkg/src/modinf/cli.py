"""Command-line front end: run a registered model with one algorithm.

    modinf --model beta-bernoulli --algo smc --particles 1000 --steps 9 --seed 7

Writes one record per weighted sample (or per exact posterior entry for
``enumerate``) followed by a summary record, as JSON lines or CSV.

Exit codes: 0 success, 2 unknown model, 3 invalid arguments, 4 runtime error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass

from .algorithms import SmcConfig, importance, run_rmsmc, run_smc, trace_mh
from .core import DEFAULT_STEP_BUDGET, InferenceError, RngState
from .models import REGISTRY, get_model, list_models
from .oracle import DiscretizedBase, SummaryStats, exact_meaning, summarize
from .sampler import program_to_rep
from .values import encode_text, to_jsonable

ALGOS = ("enumerate", "importance", "smc", "mh", "rmsmc")
EXIT_OK, EXIT_UNKNOWN_MODEL, EXIT_INVALID, EXIT_RUNTIME = 0, 2, 3, 4

# which optional flags each algorithm accepts
_APPLICABLE = {
    "enumerate": set(),
    "importance": {"particles", "budget", "workers"},
    "smc": {"particles", "steps", "budget", "workers"},
    "rmsmc": {"particles", "steps", "rejuv", "budget", "workers"},
    "mh": {"steps", "burnin", "budget"},
}
_NEEDS_STEPS = {"smc", "rmsmc", "mh"}


class InvalidSpec(Exception):
    pass


@dataclass(frozen=True)
class RunSpec:
    model: str
    algo: str
    particles: int = 1000
    steps: int | None = None
    rejuv: int = 0
    burnin: int = 0
    seed: int = 0
    output: str = "json"
    budget: int = DEFAULT_STEP_BUDGET
    workers: int = 1

    def validate(self) -> None:
        if self.algo not in ALGOS:
            raise InvalidSpec(f"unknown algorithm {self.algo!r}")
        if self.output not in ("json", "csv"):
            raise InvalidSpec(f"unknown output format {self.output!r}")
        if not 0 <= self.seed < 2**64:
            raise InvalidSpec("--seed must be a 64-bit unsigned integer")
        if self.particles < 1:
            raise InvalidSpec("--particles must be >= 1")
        if self.rejuv < 0 or self.burnin < 0:
            raise InvalidSpec("--rejuv and --burnin must be >= 0")
        if self.budget < 1 or self.workers < 1:
            raise InvalidSpec("--budget and --workers must be >= 1")
        if self.algo in _NEEDS_STEPS:
            if self.steps is None:
                raise InvalidSpec(f"--steps is required for {self.algo}")
            if self.steps < 0:
                raise InvalidSpec("--steps must be >= 0")
        if self.algo == "mh" and not self.steps > self.burnin:
            raise InvalidSpec("mh needs --steps > --burnin")


def _numeric(x):
    if isinstance(x, (bool, int, float)):
        return float(x)
    return None


def _summary(pairs) -> SummaryStats:
    weights = [w for w, _ in pairs]
    xs = [_numeric(x) for _, x in pairs]
    if any(x is None for x in xs):
        s = summarize(weights, [0.0] * len(weights))
        nan = math.nan
        return SummaryStats(nan, nan, s.total_weight, s.effective_sample_size, nan)
    return summarize(weights, xs)


def _finite_or_none(x: float):
    return x if math.isfinite(x) else None


def _execute(spec: RunSpec, info) -> list[tuple[float, object]]:
    model = info.build()
    if spec.algo == "enumerate":
        base = DiscretizedBase(info.cells)
        m = exact_meaning(base, program_to_rep(model, base))
        total = m.total()
        if total == 0.0:
            raise InferenceError("model evidence is zero; no posterior to report")
        return [(w / total, x) for x, w in m.items()]
    if spec.algo == "importance":
        out, _ = importance(model, spec.particles, RngState.from_seed(spec.seed), budget=spec.budget, workers=spec.workers)
        return [(w, x) for w, x in out]
    if spec.algo == "mh":
        return [(1.0, x) for x in trace_mh(model, spec.steps, spec.burnin, spec.seed, budget=spec.budget)]
    cfg = SmcConfig(spec.particles, spec.steps, spec.rejuv, spec.seed)
    runner = run_smc if spec.algo == "smc" else run_rmsmc
    return [(w, x) for w, x in runner(model, cfg, workers=spec.workers, budget=spec.budget)]


def _render(pairs, stats: SummaryStats, fmt: str) -> str:
    summary = {k: _finite_or_none(v) for k, v in stats.as_dict().items()}
    if fmt == "json":
        lines = [json.dumps({"weight": w, "value": to_jsonable(x)}, separators=(",", ":")) for w, x in pairs]
        lines.append(json.dumps({"summary": summary}, separators=(",", ":")))
        return "\n".join(lines) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf)  # RFC 4180: quoted as needed, CRLF line ends
    writer.writerow(["record", "weight", "value", *summary])
    for w, x in pairs:
        writer.writerow(["sample", repr(w), encode_text(x)] + [""] * len(summary))
    writer.writerow(["summary", "", ""] + ["" if v is None else repr(v) for v in summary.values()])
    return buf.getvalue()


def run(spec: RunSpec, out=None, err=None) -> int:
    """Execute ``spec``, writing results to ``out`` and diagnostics to ``err``; return the exit code."""
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    try:
        info = get_model(spec.model)
    except KeyError:
        print(f"modinf: unknown model {spec.model!r}; known: {', '.join(REGISTRY)}", file=err)
        return EXIT_UNKNOWN_MODEL
    try:
        spec.validate()
        if spec.algo == "enumerate" and not info.discrete:
            raise InvalidSpec(f"enumerate needs a discrete model; {spec.model} is continuous")
    except InvalidSpec as e:
        print(f"modinf: {e}", file=err)
        return EXIT_INVALID
    try:
        pairs = _execute(spec, info)
        for w, _ in pairs:
            if not (0.0 <= w < math.inf):
                raise InferenceError(f"non-finite or negative weight {w!r}")
        text = _render(pairs, _summary(pairs), spec.output)
    except (InferenceError, ValueError, ArithmeticError, RecursionError) as e:
        print(f"modinf: {type(e).__name__}: {e}", file=err)
        return EXIT_RUNTIME
    out.write(text)
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def _u64(s: str) -> int:
    v = int(s, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("must be a 64-bit unsigned integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="modinf", description="Run a registered model with an inference algorithm.")
    p.add_argument("--model", help="registered model name (see --list-models)")
    p.add_argument("--algo", choices=ALGOS)
    p.add_argument("--particles", type=int, help="number of particles (default 1000)")
    p.add_argument("--steps", type=int, help="SMC steps, or MH chain length")
    p.add_argument("--rejuv", type=int, help="trace-MH moves after each resample (rmsmc)")
    p.add_argument("--burnin", type=int, help="discarded MH steps")
    p.add_argument("--seed", type=_u64, default=0)
    p.add_argument("--output", choices=("json", "csv"), default="json")
    p.add_argument("--budget", type=int, help=f"step budget per run (default {DEFAULT_STEP_BUDGET})")
    p.add_argument("--workers", type=int, help="threads for particle evaluation; output does not depend on it")
    p.add_argument("--list-models", action="store_true", help="print the model registry and exit")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.list_models:
        for meta in list_models():
            print(json.dumps(meta, separators=(",", ":")))
        return EXIT_OK
    if args.model is None or args.algo is None:
        parser.error("--model and --algo are required")
    given = {k for k in ("particles", "steps", "rejuv", "burnin", "budget", "workers") if getattr(args, k) is not None}
    stray = given - _APPLICABLE[args.algo]
    if stray:
        parser.error(f"{', '.join('--' + k for k in sorted(stray))} not applicable to --algo {args.algo}")
    defaults = RunSpec(args.model, args.algo)
    spec = RunSpec(
        model=args.model,
        algo=args.algo,
        particles=defaults.particles if args.particles is None else args.particles,
        steps=args.steps,
        rejuv=defaults.rejuv if args.rejuv is None else args.rejuv,
        burnin=defaults.burnin if args.burnin is None else args.burnin,
        seed=args.seed,
        output=args.output,
        budget=defaults.budget if args.budget is None else args.budget,
        workers=defaults.workers if args.workers is None else args.workers,
    )
    return run(spec)


if __name__ == "__main__":
    sys.exit(main())
