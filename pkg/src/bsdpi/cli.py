"""Command line harness.

Subcommands:
  divergence  -- print every divergence of a state pair plus the quadrature check
  bounds      -- run a bound campaign from flags or a JSON config, write CSV
  certify     -- equality-condition report for (sigma, rho, channel) files
  selftest    -- reduced-count run of the full acceptance battery
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass, field

from . import campaigns
from .channels import load_channel
from .divergences import (
    bs_entropy,
    bs_entropy_quadrature,
    family_from_tag,
    maximal_f,
    regularized_divergence,
    relative_entropy,
    standard_f,
)
from .errors import ConfigError, NumericsError, SingularState
from .linalg import set_eig_corruption
from .recovery import equality_residuals
from .states import gamma, load_state


@dataclass
class CampaignConfig:
    seed: int = 7
    trials: int = 500
    dims: tuple = (2, 3, 4)
    channel_kind: str = "random_cptp"
    families: tuple = ("xlogx",)
    tolerances: dict = field(default_factory=dict)
    output_path: str | None = None

    def __post_init__(self):
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if not self.dims or any(d < 2 for d in self.dims):
            raise ConfigError("dims must all be >= 2")
        if self.channel_kind not in ("pinching", "partial_trace", "random_cptp"):
            raise ConfigError(f"unknown channel_kind {self.channel_kind!r}")

    @classmethod
    def from_json(cls, text: str) -> "CampaignConfig":
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc.msg}") from exc
        if not isinstance(obj, dict):
            raise ConfigError("config must be a JSON object")
        known = {
            "seed", "trials", "dims", "channel_kind", "families",
            "tolerances", "output_path",
        }
        unknown = set(obj) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        kwargs = dict(obj)
        if "dims" in kwargs:
            kwargs["dims"] = tuple(int(d) for d in kwargs["dims"])
        if "families" in kwargs:
            kwargs["families"] = tuple(kwargs["families"])
        return cls(**kwargs)

    def tol(self, key: str, default: float) -> float:
        return float(self.tolerances.get(key, default))


def cmd_divergence(args) -> int:
    sigma = load_state(args.sigma)
    rho = load_state(args.rho)
    fam = family_from_tag(args.family)
    d = relative_entropy(sigma, rho)
    bs = bs_entropy(sigma, rho)
    try:
        s_f = standard_f(sigma, rho, fam)
        m_f = maximal_f(sigma, rho, fam)
        route = "direct"
    except SingularState:
        s_f = regularized_divergence(sigma, rho, fam, kind="standard").value
        m_f = regularized_divergence(sigma, rho, fam, kind="maximal").value
        route = "regularized"
    print(f"relative_entropy      = {d!r}")
    print(f"bs_entropy            = {bs!r}")
    print(f"standard_f[{fam.tag}] = {s_f!r} ({route})")
    print(f"maximal_f[{fam.tag}]  = {m_f!r} ({route})")
    try:
        quad = bs_entropy_quadrature(sigma, rho, tol=1e-8)
        print(f"bs_quadrature         = {quad!r}  |delta| = {abs(quad - bs):.3e}")
    except SingularState:
        print("bs_quadrature         = skipped (rank-deficient input)")
    return 0


def cmd_bounds(args) -> int:
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            config = CampaignConfig.from_json(fh.read())
    else:
        config = CampaignConfig(
            seed=args.seed,
            trials=args.trials,
            dims=tuple(int(d) for d in args.dims.split(",")),
            channel_kind=args.channel,
            families=tuple(args.family.split(",")) if args.family else ("xlogx",),
            output_path=args.out,
        )
    if args.out:
        config.output_path = args.out
    if getattr(args, "tol", None) is not None:
        config.tolerances["slack_rel"] = args.tol

    slack_rel = config.tol("slack_rel", campaigns.DEFAULT_TOLERANCES["slack_rel"])
    dpi_abs = config.tol("dpi_abs", campaigns.DEFAULT_TOLERANCES["dpi_abs"])
    rows = []
    merged = campaigns.CampaignSummary()

    def merge(summary):
        merged.total += summary.total
        merged.violations.extend(summary.violations)
        merged.min_slack = min(merged.min_slack, summary.min_slack)
        merged.equality_hits += summary.equality_hits

    if config.channel_kind == "random_cptp":
        summary, r = campaigns.run_dpi_campaign(
            config.seed, config.trials, config.dims, tol_abs=dpi_abs
        )
        merge(summary)
        rows.extend(r)
        summary, r = campaigns.run_channel_bound_campaign(
            config.seed, config.trials, config.dims, slack_rel=slack_rel
        )
        merge(summary)
        rows.extend(r)
    else:
        summary, r = campaigns.run_condexp_bound_campaign(
            config.seed, config.trials, config.dims,
            kind=config.channel_kind, slack_rel=slack_rel,
            include_standard_row=getattr(args, "include_standard_dpi", False),
        )
        merge(summary)
        rows.extend(r)
    bound_families = [t for t in config.families if t not in ("square", "neg_log")]
    if bound_families:
        kind = config.channel_kind if config.channel_kind != "random_cptp" else "random_cptp"
        summary, r, pass_rates = campaigns.run_maxf_campaign(
            config.seed, config.trials, config.dims,
            families=bound_families, kind=kind,
        )
        merge(summary)
        rows.extend(r)
        for tag, rate in pass_rates.items():
            print(f"precondition pass-rate [{tag}]: {rate:.3f}")

    if config.output_path:
        campaigns.write_csv(config.output_path, rows)
        print(f"wrote {len(rows)} rows to {config.output_path}")
    print(
        f"total={merged.total} violations={len(merged.violations)} "
        f"min_slack={merged.min_slack!r}"
    )
    for seed, message in merged.violations[:20]:
        print(f"VIOLATION seed={seed}: {message}")
    return 0 if merged.ok else 1


def cmd_certify(args) -> int:
    sigma = load_state(args.sigma)
    rho = load_state(args.rho)
    channel = load_channel(args.channel)
    report = equality_residuals(sigma, rho, channel)
    text = report.to_json()
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    print(text)
    threshold = 1e-8 * (1.0 + gamma(sigma, rho).sup_norm)
    equal = (
        report.residual_eq2 <= threshold
        and report.residual_eq3 <= threshold
        and report.residual_bs_recovery <= threshold
    )
    print(f"threshold = {threshold:.3e}")
    print("EQUALITY" if equal else "NO-EQUALITY")
    return 0


def cmd_selftest(args) -> int:
    if args.inject_eig_corruption:
        set_eig_corruption(1e-6)
    try:
        return _run_selftest(seed=args.seed)
    finally:
        set_eig_corruption(0.0)


def _run_selftest(seed: int = 7) -> int:
    started = time.time()
    failures = 0

    def report(criterion: str, ok: bool, detail: str = ""):
        nonlocal failures
        status = "PASS" if ok else "FAIL"
        suffix = f" ({detail})" if detail else ""
        print(f"criterion {criterion}: {status}{suffix}")
        if not ok:
            failures += 1

    dims = (2, 3, 4)
    try:
        summary, _ = campaigns.run_dpi_campaign(seed, 60, dims)
        report("1 dpi", summary.ok, f"min gap {summary.min_slack:.2e}")

        summary, _ = campaigns.run_condexp_bound_campaign(seed, 60, dims, "pinching")
        ok = summary.ok
        summary2, _ = campaigns.run_condexp_bound_campaign(seed, 24, dims, "partial_trace")
        report("2 condexp bound", ok and summary2.ok)

        summary, _ = campaigns.run_channel_bound_campaign(seed, 60, dims, n_rank_deficient=12)
        report("3 channel bound", summary.ok)

        summary, _, rates = campaigns.run_maxf_campaign(
            seed, 60, dims, families=("xlogx", "neg_power:0.5")
        )
        report("4 maxf bound", summary.ok, f"pass rates {rates}")

        summary, stats = campaigns.run_equality_campaign(seed, 10, 60, dims)
        report(
            "5 equality", summary.ok,
            f"hits {summary.equality_hits}, co-positive {stats['co_positive']}",
        )

        summary = campaigns.run_ordering_campaign(seed, 40, dims)
        report("6 ordering", summary.ok)

        summary = campaigns.run_oracle_campaign(seed, 8, dims)
        report("7 oracles", summary.ok)

        summary = campaigns.run_structural_campaign(seed, 25, dims)
        report("8 structural", summary.ok)
    except NumericsError as exc:
        print(f"selftest aborted: {type(exc).__name__}: {exc}")
        failures += 1

    elapsed = time.time() - started
    print(f"selftest finished in {elapsed:.1f} s, failures: {failures}")
    return 0 if failures == 0 else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bsdpi",
        description="divergence computations, bound campaigns, and equality certification",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("divergence", help="print divergences of a state pair")
    p.add_argument("sigma")
    p.add_argument("rho")
    p.add_argument("--family", default="xlogx")
    p.set_defaults(fn=cmd_divergence)

    p = sub.add_parser("bounds", help="run a bound campaign and write CSV")
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--trials", type=int, default=500)
    p.add_argument("--dims", default="2,3,4")
    p.add_argument("--channel", default="random_cptp",
                   choices=["pinching", "partial_trace", "random_cptp"])
    p.add_argument("--family", default="xlogx")
    p.add_argument("--out", default=None)
    p.add_argument("--tol", type=float, default=None,
                   help="override the relative slack tolerance")
    p.add_argument("--config", default=None, help="JSON config file")
    p.add_argument("--include-standard-dpi", action="store_true",
                   help="emit informational relative-entropy comparison rows")
    p.set_defaults(fn=cmd_bounds)

    p = sub.add_parser("certify", help="equality-condition report for a triple")
    p.add_argument("sigma")
    p.add_argument("rho")
    p.add_argument("channel")
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_certify)

    p = sub.add_parser("selftest", help="reduced-count acceptance battery")
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--inject-eig-corruption", action="store_true",
                   help="perturb the eigensolver to prove the battery detects it")
    p.set_defaults(fn=cmd_selftest)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except NumericsError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
