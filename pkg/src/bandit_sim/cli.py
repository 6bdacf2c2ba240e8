"""Command line entry point ``bandit-sim``."""

from __future__ import annotations

import argparse
import sys

from . import oracles
from .core import make_reservoir, quantile_mu_rho
from .errors import BanditError
from .harness import ALGORITHMS, INSTANCE_HELP, RunConfig, list_presets, run_experiment, run_preset
from .qrm import ALPHA_EMPIRICAL, qrm_schedule

# name -> (argument converters, function)
ORACLES = {
    "h0": ((int, int), oracles.h0),
    "x0": ((int, int, int), oracles.x0),
    "finite-bound": ((int, int, float), lambda K, M, T: oracles.finite_regret_bound(K, M, T).bound_value),
    "quantile-bound": ((float, int, float, float),
                       lambda rho, M, T, a: oracles.quantile_regret_bound(rho, M, T, a).bound_value),
    "gamma": ((), oracles.gamma_constant),
    "r-star": ((float, float, float), oracles.r_star),
    "pr-empty": ((float, int), oracles.pr_empty),
    "schedule": ((float, int, int), qrm_schedule),
    "mu-rho": ((str, float), lambda tag, rho: quantile_mu_rho(make_reservoir(tag), rho)),
}


def _extra(text: str) -> tuple[int, ...]:
    return tuple(int(float(x)) for x in text.split(",") if x)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bandit-sim", description="Bounded arm-memory bandit experiments.")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run one experiment configuration")
    r.add_argument("--instance", required=True, help=INSTANCE_HELP)
    r.add_argument("--algo", required=True, choices=sorted(ALGORITHMS))
    r.add_argument("--M", type=int, required=True, help="arm memory size")
    r.add_argument("--eta", type=float, default=1.0, help="UCB1 exploration weight")
    r.add_argument("--alpha", type=float, default=ALPHA_EMPIRICAL, help="QRM exploration exponent")
    r.add_argument("--rho", type=float, default=None, help="also log quantile regret w.r.t. mu_rho")
    r.add_argument("--horizon", type=lambda s: int(float(s)), required=True)
    r.add_argument("--runs", type=int, required=True)
    r.add_argument("--seed", type=int, default=0, help="base seed; run i uses seed + i")
    r.add_argument("--checkpoints", type=_extra, default=(), help="extra comma-separated checkpoints")
    r.add_argument("--out", required=True, help="per-run CSV path (aggregate goes next to it)")
    r.add_argument("--workers", type=int, default=None, help="overrides BANDIT_THREADS")

    ps = sub.add_parser("preset", help="run a named experiment preset")
    ps.add_argument("name", help="preset name, or 'list'")
    ps.add_argument("--out-dir", default=None)
    ps.add_argument("--runs", type=int, default=None, help="override the replicate count")
    ps.add_argument("--horizon", type=lambda s: int(float(s)), default=None, help="override the horizon")
    ps.add_argument("--seed", type=int, default=0)
    ps.add_argument("--workers", type=int, default=None)

    o = sub.add_parser("oracle", help="evaluate a closed-form quantity")
    o.add_argument("name", choices=sorted(ORACLES))
    o.add_argument("args", nargs="*")
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            cfg = RunConfig(args.instance, args.algo, args.M, args.horizon, runs=args.runs, eta=args.eta,
                            alpha=args.alpha, rho=args.rho, base_seed=args.seed,
                            checkpoints=args.checkpoints, out=args.out)
            agg = run_experiment(cfg, args.workers).aggregate
            print(f"{cfg.label()}: n={agg.n} mean={agg.mean:.6g} se={agg.se:.6g}")
        elif args.command == "preset":
            if args.name == "list":
                for name, desc in list_presets().items():
                    print(f"{name:14s} {desc}")
                return 0
            if args.out_dir is None:
                raise BanditError("--out-dir is required to run a preset")
            for exp in run_preset(args.name, args.out_dir, runs=args.runs, horizon=args.horizon,
                                  base_seed=args.seed, workers=args.workers):
                a = exp.aggregate
                print(f"{exp.config.label()}: n={a.n} mean={a.mean:.6g} se={a.se:.6g}")
        else:
            types, fn = ORACLES[args.name]
            if len(args.args) != len(types):
                raise BanditError(f"oracle {args.name} takes {len(types)} argument(s), got {len(args.args)}")
            print(fn(*(t(float(a)) if t is int else t(a) for t, a in zip(types, args.args))))
    except BanditError as exc:
        print(f"bandit-sim: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
