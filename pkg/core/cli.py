"""
Magnus Walks Command Line Interface
===================================

Subcommands: embed, flow, wp, return-prob, check-exclusive, curves, gamma, ball,
dirichlet, selftest. Data goes to stdout (or --output); messages and progress go
to stderr through the rich console.
"""

import argparse
import json
import math
import sys
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from rich.table import Table

from .asymptotics import (
    box_zd,
    delta_regular_check,
    dirichlet_lambda1,
    log_gamma_from_volume,
    parse_n_grid,
    parse_profile,
    phi_profile,
    power_volume,
    segment,
    stretched_exponential_volume,
    tower_volume,
    wreath_volume,
)
from .exclusive import ExclusiveCandidate, check_exclusive
from .fox import flow_of_word, magnus_embed, net_flow, words_equal_mod_NN
from .groups import MarkedGroup, ball, ball_elements, parse_group_spec
from .measures import (
    MeasureSpec,
    convolve_power,
    law_measure,
    lazy_law,
    make_generator_power_measure,
    make_lazy_srw,
    make_phi_lower_measure,
    make_pm_one_law,
    make_power_law,
    make_uniform_law,
    sws,
)
from .selftest import run_selftest
from .utils import (
    BudgetExceeded,
    GroupSpecError,
    MagnusError,
    Settings,
    console,
    csv_text,
    dumps_json,
    emit,
    format_number,
    parse_int_list,
    schema_name,
    setup_logging,
    show_error_message,
    show_success_message,
)
from .walks import mc_return_probability
from .words import parse_word, parse_word_list

COMMANDS = ("embed", "flow", "wp", "return-prob", "check-exclusive", "curves", "gamma",
            "ball", "dirichlet", "selftest")

SEEDED = {"return-prob", "selftest"}


def build_measure(group: MarkedGroup, text: str) -> MeasureSpec:
    """
    lazy | power:ALPHA[,CUTOFF] | uniform:V1,V2,... | phi-lower | sws
    """
    kind, _, rest = (text or "lazy").partition(":")
    try:
        if kind == "lazy":
            return make_lazy_srw(group)
        if kind == "power":
            values = [v for v in rest.split(",") if v.strip()]
            alpha = float(values[0])
            cutoff = int(values[1]) if len(values) > 1 else 10_000
            return make_generator_power_measure(group, [make_power_law(alpha, cutoff)])
        if kind == "uniform":
            return make_generator_power_measure(group, [make_uniform_law(parse_int_list(rest, "uniform law"))])
        if kind == "phi-lower":
            return make_phi_lower_measure([lazy_law()], group)
        if kind == "sws":
            return sws(law_measure(make_pm_one_law()), make_lazy_srw(group))
    except (IndexError, ValueError) as exc:
        raise GroupSpecError(f"invalid measure {text!r}: {exc}")
    raise GroupSpecError(f"unknown measure {text!r}; use lazy, power:a[,M], uniform:v1,v2, phi-lower or sws")


def build_volume(text: str, wreath: Optional[float]):
    """power:D[,c] | stretched:a | tower:m, optionally wrapped as a wreath volume."""
    kind, _, rest = text.partition(":")
    try:
        values = [float(v) for v in rest.split(",") if v.strip()]
        if kind == "power":
            volume = power_volume(values[0], values[1] if len(values) > 1 else 1.0)
        elif kind == "stretched":
            volume = stretched_exponential_volume(values[0])
        elif kind == "tower":
            volume = tower_volume(int(values[0]))
        else:
            raise GroupSpecError(f"unknown volume {text!r}; use power:D[,c], stretched:a or tower:m")
    except (IndexError, ValueError) as exc:
        raise GroupSpecError(f"invalid volume {text!r}: {exc}")
    return wreath_volume(volume, wreath) if wreath else volume


def build_omega(group: MarkedGroup, text: str, budget: int) -> List[Any]:
    """segment:k | box:k,D | ball:R"""
    kind, _, rest = text.partition(":")
    values = parse_int_list(rest, "set")
    if kind == "segment" and len(values) == 1:
        return segment(values[0])
    if kind == "box" and len(values) == 2:
        return box_zd(values[0], values[1])
    if kind == "ball" and len(values) == 1:
        return ball_elements(group, values[0], budget)
    raise GroupSpecError(f"invalid set {text!r}; use segment:k, box:k,D or ball:R")


def gnuplot_script(data_file: str, x: str, y: str, title: str, logscale: str = "x") -> str:
    return "\n".join([
        "set datafile separator ','",
        f"set logscale {logscale}" if logscale else "unset logscale",
        f"set xlabel '{x}'",
        f"set ylabel '{y}'",
        f"set title '{title}'",
        "set key off",
        f"plot '{data_file}' using '{x}':'{y}' every ::1 with linespoints",
        "",
    ])


class MagnusCLI:
    """
    Command line front end; `run` returns the process exit code.
    """

    def __init__(self, settings: Optional[Settings] = None):
        self.settings = settings or Settings.from_env()
        self.quiet = False

    # -- parser ------------------------------------------------------------

    def build_parser(self) -> argparse.ArgumentParser:
        parser = argparse.ArgumentParser(prog="magnus-walks",
                                         description="Random walks on F_r/[N,N] via the Magnus embedding")
        parser.add_argument("--manifest", type=Path, help="run the jobs of a JSON manifest")
        parser.add_argument("--threads", type=int, help="worker processes for Monte Carlo")
        parser.add_argument("--budget", type=int, help="support/ball size budget")
        parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
        parser.add_argument("-q", "--quiet", action="store_true", help="no progress bars or panels")
        sub = parser.add_subparsers(dest="command")

        def command(name: str, help_text: str) -> argparse.ArgumentParser:
            p = sub.add_parser(name, help=help_text)
            p.add_argument("--json", action="store_true", help="emit a JSON document")
            p.add_argument("--output", type=Path, help="write data here instead of stdout")
            return p

        p = command("embed", "Magnus embedding ψ(w) = (ā(w), π(w))")
        p.add_argument("--group", required=True)
        p.add_argument("--word", required=True)

        p = command("flow", "flow 𝔣_w on the Cayley graph of Γ₁")
        p.add_argument("--group", required=True)
        p.add_argument("--word", required=True)

        p = command("wp", "word problem in F_r/[N,N]")
        p.add_argument("--group", required=True)
        p.add_argument("--u", required=True)
        p.add_argument("--v", required=True)

        p = command("return-prob", "return probability μ^(n)(e)")
        p.add_argument("--group", required=True)
        p.add_argument("--measure", default="lazy")
        p.add_argument("--n", required=True, help="one n or a comma list")
        mode = p.add_mutually_exclusive_group()
        mode.add_argument("--exact", action="store_true")
        mode.add_argument("--mc", action="store_true")
        p.add_argument("--trials", type=int, default=100_000)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--csv", action="store_true", help="CSV even for a single exact value")

        p = command("check-exclusive", "sufficient conditions for an exclusive pair")
        p.add_argument("--group", required=True)
        p.add_argument("--gamma", required=True, help="Γ generators, 'w1; w2; ...'")
        p.add_argument("--rho", required=True)
        p.add_argument("--split-at", type=int, required=True, help="0-based position of s in ρ")
        p.add_argument("--m", help="H_m exponents, e.g. 2,2")
        p.add_argument("--bar", default=None, help="subgroup predicate for Γ̄ (default from --m or full)")
        p.add_argument("--radius", type=int, default=4)

        p = command("curves", "profile exponents over an n grid")
        p.add_argument("--family", required=True)
        p.add_argument("--params", default="")
        p.add_argument("--n-grid", default="10:1000000:13")
        p.add_argument("--plot-script", type=Path)

        p = command("gamma", "γ function of a volume function")
        p.add_argument("--volume", required=True, help="power:D[,c], stretched:a or tower:m")
        p.add_argument("--wreath", type=float, default=None, help="use exp(C V log V) with this C")
        p.add_argument("--t-grid", default="10:100000:9")
        p.add_argument("--delta", type=float, default=None, help="also test δ-regularity")
        p.add_argument("--plot-script", type=Path)

        p = command("ball", "sphere and ball sizes")
        p.add_argument("--group", required=True)
        p.add_argument("--radius", type=int, required=True)

        p = command("dirichlet", "lowest Dirichlet eigenvalue of a finite set")
        p.add_argument("--group", required=True)
        p.add_argument("--measure", default="lazy")
        p.add_argument("--set", dest="omega", required=True, help="segment:k, box:k,D or ball:R")

        p = command("selftest", "run the acceptance checks")
        p.add_argument("--full", action="store_true", help="full-size Monte Carlo")
        p.add_argument("--seed", type=int, default=20240601)
        p.add_argument("--only", default=None, help="comma list of criterion numbers")
        return parser

    # -- entry -------------------------------------------------------------

    def run(self, argv: Optional[Sequence[str]] = None) -> int:
        parser = self.build_parser()
        try:
            args = parser.parse_args(argv)
        except SystemExit as exc:
            return int(exc.code or 0)
        setup_logging("DEBUG" if args.verbose else None)
        self.quiet = args.quiet
        if args.threads:
            self.settings.threads = max(1, args.threads)
        if args.budget:
            self.settings.ball_budget = args.budget
            self.settings.support_budget = args.budget
        try:
            if args.manifest:
                return self.run_manifest(args.manifest)
            if not args.command:
                parser.print_usage(sys.stderr)
                return 2
            return self.dispatch(args)
        except BudgetExceeded as exc:
            self.error(f"budget exhausted: {exc.detail}")
            return exc.exit_code
        except MagnusError as exc:
            self.error(str(exc))
            return exc.exit_code

    def dispatch(self, args: argparse.Namespace) -> int:
        handler = getattr(self, "cmd_" + args.command.replace("-", "_"))
        return handler(args)

    def error(self, message: str):
        if self.quiet:
            console.print(f"error: {message}")
        else:
            show_error_message(message)

    def write(self, args: argparse.Namespace, command: str, payload: Dict[str, Any], text: str):
        if args.json:
            emit(dumps_json(dict(payload, schema=schema_name(command))), args.output)
        else:
            emit(text, args.output)

    # -- manifest ----------------------------------------------------------

    def manifest_argv(self, job: Dict[str, Any], number: int) -> List[str]:
        command = job.get("command")
        if command not in COMMANDS:
            raise GroupSpecError(f"job {number}: unknown command {command!r}")
        if "seed" not in job:
            raise GroupSpecError(f"job {number}: every job needs an explicit seed")
        argv = [command]
        for key, value in (job.get("args") or {}).items():
            flag = "--" + key.replace("_", "-")
            if value is True:
                argv.append(flag)
            elif value is False or value is None:
                continue
            elif isinstance(value, list):
                argv.extend([flag, ",".join(str(v) for v in value)])
            else:
                argv.extend([flag, str(value)])
        if command in SEEDED:
            argv.extend(["--seed", str(int(job["seed"]))])
        if job.get("output"):
            argv.extend(["--output", str(job["output"])])
        return argv

    def run_manifest(self, path: Path) -> int:
        try:
            manifest = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, ValueError) as exc:
            raise GroupSpecError(f"cannot read manifest {path}: {exc}")
        if manifest.get("version") != 1 or not isinstance(manifest.get("jobs"), list):
            raise GroupSpecError("manifest needs version 1 and a jobs list")
        jobs = [self.manifest_argv(job, k) for k, job in enumerate(manifest["jobs"], 1)]
        parser = self.build_parser()
        for k, argv in enumerate(jobs, 1):
            try:
                args = parser.parse_args(argv)
            except SystemExit as exc:
                return int(exc.code or 2)
            args.verbose, args.quiet = False, self.quiet
            code = self.dispatch(args)
            if code:
                return code
        if not self.quiet:
            show_success_message(f"{len(jobs)} jobs finished", title="Manifest")
        return 0

    # -- commands ----------------------------------------------------------

    def cmd_embed(self, args) -> int:
        group = parse_group_spec(args.group)
        w = parse_word(args.word, group.rank)
        image = magnus_embed(w, group)
        payload = {"group": group.name, "word": str(w), **image.to_json()}
        lines = [f"{json.dumps(row['key'])}\t{' '.join(str(c) for c in row['vector'])}" for row in payload["a"]]
        lines.append(f"base\t{json.dumps(payload['base'])}")
        self.write(args, "embed", payload, "\n".join(lines) + "\n")
        return 0

    def cmd_flow(self, args) -> int:
        group = parse_group_spec(args.group)
        w = parse_word(args.word, group.rank)
        flow = flow_of_word(w, group)
        net = net_flow(flow)
        payload = {"group": group.name, "word": str(w), **flow.to_json(),
                   "circulation": net.is_circulation,
                   "net": sorted(([group.to_json(x), v] for x, v in net.values.items()), key=repr)}
        lines = [f"{json.dumps(e['vertex'])}\ts{e['gen']}\t{e['value']}" for e in payload["edges"]]
        lines.append("circulation" if net.is_circulation else "not a circulation")
        self.write(args, "flow", payload, "\n".join(lines) + "\n")
        return 0

    def cmd_wp(self, args) -> int:
        group = parse_group_spec(args.group)
        u = parse_word(args.u, group.rank)
        v = parse_word(args.v, group.rank)
        equal = words_equal_mod_NN(u, v, group)
        payload = {"group": group.name, "u": str(u), "v": str(v), "equal": equal}
        self.write(args, "wp", payload, ("EQUAL" if equal else "DISTINCT") + "\n")
        return 0

    def cmd_return_prob(self, args) -> int:
        group = parse_group_spec(args.group)
        spec = build_measure(group, args.measure)
        ns = parse_int_list(args.n, "n")
        if not ns:
            raise GroupSpecError("--n needs at least one value")
        show = not self.quiet
        rows, deficits = [], []
        code = 0
        if args.mc:
            for n in ns:
                est = mc_return_probability(spec, n, args.trials, args.seed, threads=self.settings.threads,
                                            block_size=self.settings.block_size, show_progress=show)
                rows.append([n, None, est.estimate, est.ci_low, est.ci_high, est.trials, est.seed])
        else:
            floor = None if spec.exact else self.settings.mass_floor
            for n in ns:
                try:
                    dist = convolve_power(spec, n, budget=self.settings.support_budget,
                                          mass_floor=floor, show_progress=show)
                except BudgetExceeded as exc:
                    dist = exc.partial
                    self.error(f"budget exhausted: {exc.detail}; truncated output follows")
                    code = exc.exit_code
                value = dist.at_identity()
                if dist.exact and dist.deficit == 0:
                    rows.append([n, value, float(value), None, None, None, None])
                else:
                    # true value lies in [value, value + deficit]
                    rows.append([n, None, float(value), float(value), float(value + dist.deficit), None, None])
                deficits.append(dist.deficit)
        header = ["n", "exact", "estimate", "ci_lo", "ci_hi", "trials", "seed"]
        payload = {"group": group.name, "measure": spec.name, "complete": code == 0,
                   "rows": [dict(zip(header, [format_number(v) if isinstance(v, Fraction) else v for v in row]))
                            for row in rows]}
        for row, deficit in zip(payload["rows"], deficits):
            row["deficit"] = format_number(deficit)
        if not args.mc and len(rows) == 1 and rows[0][1] is not None and not args.csv:
            text = format_number(rows[0][1]) + "\n"
        else:
            text = csv_text(header, rows)
        self.write(args, "return-prob", payload, text)
        return code

    def cmd_check_exclusive(self, args) -> int:
        group = parse_group_spec(args.group)
        gammas = parse_word_list(args.gamma, group.rank)
        rho = parse_word(args.rho, group.rank)
        m = tuple(parse_int_list(args.m, "m")) if args.m else None
        bar = args.bar or ("sublattice:" + ",".join(str(k) for k in m) if m and group.is_abelian else "full")
        candidate = ExclusiveCandidate(group, gammas, rho, args.split_at, bar=bar, radius=args.radius, m=m,
                                       budget=self.settings.ball_budget)
        report = check_exclusive(candidate)
        payload = report.to_json()
        emit(dumps_json(dict(payload, schema=schema_name("check-exclusive"))), args.output)
        return 0

    def cmd_curves(self, args) -> int:
        spec = parse_profile(args.family, args.params)
        points = [phi_profile(spec, n) for n in parse_n_grid(args.n_grid) if n >= 3]
        header = ["n", "exponent", "value"]
        rows = [[int(p.n), p.exponent, p.value] for p in points]
        payload = {"family": spec.family, "params": spec.params,
                   "points": [dict(zip(header, row)) for row in rows]}
        self.write(args, "curves", payload, csv_text(header, rows))
        if args.plot_script:
            data = str(args.output) if args.output else "curves.csv"
            emit(gnuplot_script(data, "n", "exponent", spec.label, "xy"), args.plot_script)
        return 0

    def cmd_gamma(self, args) -> int:
        volume = build_volume(args.volume, args.wreath)
        grid = [float(t) for t in parse_n_grid(args.t_grid)]
        rows = []
        for t in grid:
            u = log_gamma_from_volume(volume, t)
            rows.append([t, u, math.exp(u) if u < 700 else math.inf])
        header = ["t", "log_gamma", "gamma"]
        payload = {"volume": volume.name, "points": [dict(zip(header, row)) for row in rows]}
        if args.delta is not None:
            ok, worst = delta_regular_check(volume, args.delta, grid)
            payload["delta_regular"] = {"delta": args.delta, "holds": ok, "worst_ratio": worst}
            console.print(f"δ-regular with δ={args.delta}: {'yes' if ok else 'no'} (worst ratio {worst:.4f})")
        self.write(args, "gamma", payload, csv_text(header, rows))
        if args.plot_script:
            data = str(args.output) if args.output else "gamma.csv"
            emit(gnuplot_script(data, "t", "log_gamma", volume.name, "xy"), args.plot_script)
        return 0

    def cmd_ball(self, args) -> int:
        group = parse_group_spec(args.group)
        try:
            layers = ball(group, args.radius, self.settings.ball_budget)
            code = 0
        except BudgetExceeded as exc:
            layers = exc.partial or []
            self.error(f"budget exhausted: {exc.detail}; partial output follows")
            code = exc.exit_code
        rows = [[layer.radius, len(layer.frontier), layer.size] for layer in layers]
        header = ["radius", "sphere", "ball"]
        payload = {"group": group.name, "complete": code == 0, "layers": [dict(zip(header, r)) for r in rows]}
        self.write(args, "ball", payload, csv_text(header, rows))
        return code

    def cmd_dirichlet(self, args) -> int:
        group = parse_group_spec(args.group)
        spec = build_measure(group, args.measure)
        omega = build_omega(group, args.omega, self.settings.ball_budget)
        result = dirichlet_lambda1(spec, omega, budget=self.settings.dirichlet_budget)
        header = ["set", "size", "lambda1", "test_bound"]
        row = [args.omega, result.size, result.lambda1, result.test_bound]
        payload = {"group": group.name, "measure": spec.name, **dict(zip(header, row)),
                   "iterations": result.iterations}
        self.write(args, "dirichlet", payload, csv_text(header, [row]))
        return 0

    def cmd_selftest(self, args) -> int:
        only = parse_int_list(args.only, "criteria") if args.only else None
        results = run_selftest(full=args.full, seed=args.seed, only=only)
        table = Table(title="Self-test" + (" (full)" if args.full else " (quick)"))
        table.add_column("#", style="cyan", width=3)
        table.add_column("Criterion", style="magenta")
        table.add_column("Result")
        table.add_column("Seconds", justify="right")
        table.add_column("Detail", style="dim")
        for r in results:
            table.add_row(str(r.number), r.name, "[green]pass[/green]" if r.passed else "[red]FAIL[/red]",
                          f"{r.seconds:.2f}", r.detail)
        if not self.quiet:
            console.print(table)
        passed = all(r.passed for r in results)
        payload = {"full": args.full, "seed": args.seed, "passed": passed, "results": [r.to_json() for r in results]}
        text = "".join(f"{r.number}\t{'pass' if r.passed else 'FAIL'}\t{r.name}\n" for r in results)
        self.write(args, "selftest", payload, text)
        return 0 if passed else 1


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        cli = MagnusCLI()
    except MagnusError as exc:
        show_error_message(str(exc), title="Configuration")
        return exc.exit_code
    return cli.run(argv)


if __name__ == "__main__":
    sys.exit(main())
