"""Command-line interface.

Subcommands: simulate, weak-lln, skeleton, arch-tau, diagnose, poc, bn.
Each takes a TOML config (--config) and writes a JSON report plus a CSV
table into --outdir.  Exit codes: 0 success, 2 configuration error,
3 numeric error.
"""

from __future__ import annotations

import argparse
import sys

from .chains import arch_tau, ArchChain
from .config import build_chain, load_config
from .ensemble import replicate_stream
from .errors import ConfigError, NumericError
from .harness import (
    bn_table,
    run_arch_contrast,
    run_diagnostics,
    run_ensemble,
    run_poc,
    run_skeleton_contrast,
    run_weak_lln,
    write_report,
)

_RUNNERS = {
    "simulate": (run_ensemble, "simulate_report"),
    "weak-lln": (run_weak_lln, "weak_lln_report"),
    "skeleton": (run_skeleton_contrast, "skeleton_report"),
    "poc": (run_poc, "poc_report"),
    "diagnose": (run_diagnostics, "diagnostics_report"),
    "bn": (bn_table, "bn_table"),
}


def _arch_tau_report(cfg):
    chain = build_chain(cfg.chain)
    if not isinstance(chain, ArchChain):
        raise ConfigError("arch-tau requires chain.type = 'arch'")
    run_a = cfg.run
    est = arch_tau(
        chain.spec, run_a.tau_draws, replicate_stream(run_a.master_seed, 999_999_937)
    )
    return {
        "kind": "arch_tau",
        "config": cfg.raw,
        "kappa": chain.spec.kappa,
        "two_kappa": 2.0 * chain.spec.kappa,
        "tau_hat": est.estimate,
        "tau_stderr": est.stderr,
        "n_used": est.n_used,
        "n_rejected": est.n_rejected,
    }


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="stablemc",
        description="Stable-limit Monte Carlo toolkit for heavy-tailed Markov chains",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
        ("simulate", "ensemble of normalized partial sums vs the stable target"),
        ("weak-lln", "weak law of large numbers decay table"),
        ("skeleton", "skeleton sums vs full-sequence boundedness contrast"),
        ("arch", "ARCH sums vs the two candidate stable targets"),
        ("arch-tau", "Monte-Carlo estimate of the ARCH limit scale tau"),
        ("diagnose", "transition-operator diagnostics"),
        ("poc", "conditional characteristic-function diagnostics"),
        ("bn", "normalizing-sequence table"),
    ]:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("-c", "--config", required=True, help="TOML configuration file")
        p.add_argument("-o", "--outdir", default="out", help="output directory")
        p.add_argument("--workers", type=int, default=None, help="override run.workers")
    args = parser.parse_args(argv)

    try:
        cfg = load_config(args.config)
        if args.workers is not None:
            if args.workers < 1:
                raise ConfigError("--workers must be >= 1")
            cfg.run.workers = args.workers
        if args.command == "arch":
            report = run_arch_contrast(cfg)
            name = "arch_report"
        elif args.command == "arch-tau":
            report = _arch_tau_report(cfg)
            name = "arch_tau"
        else:
            runner, name = _RUNNERS[args.command]
            report = runner(cfg)
        jpath, cpath = write_report(report, args.outdir, name)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return 3
    print(f"wrote {jpath} and {cpath}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
