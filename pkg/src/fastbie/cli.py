"""Command-line front end: experiment runner and geometry emission.

Subcommands: ``solve`` (primal convergence/close-boundary sweeps),
``adjoint`` (orthogonality-defect sweeps), ``cauchy`` (interior evaluation),
``bench`` (fast-vs-direct summation timings), ``geometry`` (node dump).
Every run reads a line-oriented config file, writes one CSV row per sweep
cell, a manifest with the fully resolved configuration, and PNG figures
rendered from the CSV next to it.

Config grammar (one ``key = value`` per line, ``#`` comments):

    domain     = example1-bounded count=3 | example2-bounded-5 |
                 example4-unbounded-5 | square-with-grading grading=3 |
                 file:PATH
    n          = 64 128 256            (even node counts; point counts for bench)
    eps        = 1e-1 1e-2             (optional separation sweep)
    theta      = default | pi/2 | pi/2 0 pi/2 0 pi/2
    gamma      = example1-bounded | example1-unbounded | constant | trig k:a:b ...
    targets    = 0.5,0.1 0.99,0.0      (cauchy only)
    iprec      = 4
    restart    = 25
    tol        = 1e-12
    maxit      = 40
    subtraction = on | off
    kind       = gnk | adjoint | cauchy | bench   (optional; must match subcommand)

Domain files use the same line shape:

    kind  = bounded | unbounded
    alpha = RE IM                      (bounded only)
    curve = circle CX CY R [orientation=ccw|cw]
    curve = ellipse CX CY A B [orientation=ccw|cw]
    curve = square CX CY HALF [grading=P] [orientation=ccw|cw]
    curve = polygon X1 Y1 X2 Y2 X3 Y3 ... [grading=P]
    curve = trig KMIN RE0 IM0 RE1 IM1 ...
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .bie import (
    adjoint_orthogonality,
    build_adjoint_problem,
    build_problem,
    cauchy_eval,
    solve_adjoint,
    solve_gnk,
)
from .fastsum import build_plan, direct_e_matvec, e_matvec
from .geometry import (
    Domain,
    PiecewiseConstant,
    bounded_domain,
    circle,
    discretize,
    ellipse,
    polygon,
    square,
    trig_curve,
    unbounded_domain,
)
from .gmres import GmresConfig
from .kernels import build_auxiliary
from .presets import NAMED_DOMAINS, TEST_FUNCTIONS, default_theta, gamma_samples
from . import report

CSV_COLUMNS = [
    "n", "total_nodes", "eps", "err_mu_inf", "err_h_inf", "E_n",
    "gmres_iters", "matvec_count", "time_setup_s", "time_solve_s",
    "time_direct_s", "converged", "status",
]

_KNOWN_KEYS = {
    "domain", "n", "eps", "theta", "gamma", "targets", "iprec",
    "restart", "tol", "maxit", "subtraction", "kind",
}


class ConfigError(ValueError):
    pass


def parse_angle(token: str) -> float:
    """Parse angle tokens like 'pi/2', '3pi/4', '-pi', '0', '1.5708'."""
    tok = token.strip().lower().replace("*", "")
    if "pi" not in tok:
        return float(tok)
    head, _, tail = tok.partition("pi")
    value = math.pi
    if head in ("-",):
        value = -value
    elif head:
        value *= float(head)
    if tail:
        if not tail.startswith("/"):
            raise ConfigError(f"cannot parse angle {token!r}")
        value /= float(tail[1:])
    return value


def _read_lines(path: Path) -> list[tuple[str, str]]:
    pairs = []
    for raw in path.read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"malformed line (expected 'key = value'): {raw!r}")
        key, _, value = line.partition("=")
        pairs.append((key.strip().lower(), value.strip()))
    return pairs


@dataclass
class ExperimentConfig:
    """Fully resolved experiment description."""

    domain_spec: str
    n_list: list[int]
    eps_list: list[float] = field(default_factory=list)
    theta_spec: str = "default"
    gamma_spec: str = "example1-bounded"
    targets: list[complex] = field(default_factory=list)
    iprec: int = 4
    gmres: GmresConfig = field(default_factory=lambda: GmresConfig(25, 1e-12, 40))
    subtract: bool = True
    kind: str | None = None

    def manifest_lines(self) -> list[str]:
        lines = [
            f"fastbie = {__version__}",
            f"domain = {self.domain_spec}",
            "n = " + " ".join(str(n) for n in self.n_list),
        ]
        if self.eps_list:
            lines.append("eps = " + " ".join(f"{e:g}" for e in self.eps_list))
        lines += [
            f"theta = {self.theta_spec}",
            f"gamma = {self.gamma_spec}",
            f"iprec = {self.iprec}",
            f"restart = {self.gmres.restart}",
            f"tol = {self.gmres.tol:g}",
            f"maxit = {self.gmres.maxit}",
            f"subtraction = {'on' if self.subtract else 'off'}",
        ]
        if self.targets:
            lines.append("targets = " + " ".join(f"{z.real:g},{z.imag:g}" for z in self.targets))
        return lines


def parse_experiment_config(path: Path) -> ExperimentConfig:
    values: dict[str, str] = {}
    for key, value in _read_lines(path):
        if key not in _KNOWN_KEYS:
            raise ConfigError(f"unknown config key {key!r}")
        if key in values:
            raise ConfigError(f"duplicate config key {key!r}")
        values[key] = value
    if "domain" not in values:
        raise ConfigError("config is missing the 'domain' key")
    if "n" not in values:
        raise ConfigError("config is missing the 'n' key")

    n_list = [int(tok) for tok in values["n"].split()]
    if not n_list:
        raise ConfigError("'n' needs at least one value")

    cfg = ExperimentConfig(domain_spec=values["domain"], n_list=n_list)
    if "eps" in values:
        cfg.eps_list = [float(tok) for tok in values["eps"].split()]
    if "theta" in values:
        cfg.theta_spec = values["theta"]
    if "gamma" in values:
        cfg.gamma_spec = values["gamma"]
    if "targets" in values:
        cfg.targets = [complex(float(a), float(b))
                       for a, b in (tok.split(",") for tok in values["targets"].split())]
    if "iprec" in values:
        cfg.iprec = int(values["iprec"])
    cfg.gmres = GmresConfig(
        restart=int(values.get("restart", 25)),
        tol=float(values.get("tol", 1e-12)),
        maxit=int(values.get("maxit", 40)),
    )
    if "subtraction" in values:
        flag = values["subtraction"].lower()
        if flag not in ("on", "off"):
            raise ConfigError("subtraction must be 'on' or 'off'")
        cfg.subtract = flag == "on"
    if "kind" in values:
        cfg.kind = values["kind"].lower()
    return cfg


# ---------------------------------------------------------------------------
# Domain resolution
# ---------------------------------------------------------------------------
def _split_params(tokens: list[str]) -> dict[str, str]:
    params = {}
    for tok in tokens:
        if "=" not in tok:
            raise ConfigError(f"expected key=value parameter, got {tok!r}")
        k, _, v = tok.partition("=")
        params[k.lower()] = v
    return params


def parse_domain_file(path: Path) -> Domain:
    kind = None
    alpha = None
    curves = []
    for key, value in _read_lines(path):
        if key == "kind":
            kind = value.lower()
            if kind not in ("bounded", "unbounded"):
                raise ConfigError(f"domain kind must be bounded|unbounded, got {value!r}")
        elif key == "alpha":
            re_s, im_s = value.split()
            alpha = complex(float(re_s), float(im_s))
        elif key == "curve":
            curves.append(value)
        else:
            raise ConfigError(f"unknown domain key {key!r}")
    if kind is None:
        raise ConfigError("domain file is missing 'kind'")
    if not curves:
        raise ConfigError("domain file declares no curves")

    built = []
    for idx, spec in enumerate(curves):
        tokens = spec.split()
        shape, args = tokens[0].lower(), tokens[1:]
        plain = [a for a in args if "=" not in a]
        params = _split_params([a for a in args if "=" in a])
        default_orient = "ccw" if (kind == "bounded" and idx == 0) else "cw"
        orient = params.pop("orientation", default_orient)
        if shape == "circle":
            cx, cy, r = map(float, plain)
            built.append(circle(complex(cx, cy), r, orient))
        elif shape == "ellipse":
            cx, cy, a, b = map(float, plain)
            built.append(ellipse(complex(cx, cy), a, b, orient))
        elif shape == "square":
            cx, cy, half = map(float, plain)
            built.append(square(complex(cx, cy), half,
                                grading=int(params.pop("grading", 3)), orientation=orient))
        elif shape == "polygon":
            vals = list(map(float, plain))
            if len(vals) < 6 or len(vals) % 2:
                raise ConfigError("polygon needs at least 3 x,y vertex pairs")
            verts = [complex(vals[2 * i], vals[2 * i + 1]) for i in range(len(vals) // 2)]
            built.append(polygon(verts, grading=int(params.pop("grading", 3))))
        elif shape == "trig":
            kmin = int(plain[0])
            vals = list(map(float, plain[1:]))
            if not vals or len(vals) % 2:
                raise ConfigError("trig curve needs kmin plus re,im coefficient pairs")
            coeffs = [complex(vals[2 * i], vals[2 * i + 1]) for i in range(len(vals) // 2)]
            built.append(trig_curve(coeffs, k_min=kmin))
        else:
            raise ConfigError(f"unknown curve shape {shape!r}")
        if params:
            raise ConfigError(f"unknown curve parameters {sorted(params)} on curve {idx}")
    if kind == "bounded":
        if alpha is None:
            raise ConfigError("bounded domain file needs 'alpha'")
        return bounded_domain(built, alpha)
    if alpha is not None:
        raise ConfigError("unbounded domain file must not set 'alpha'")
    return unbounded_domain(built)


def resolve_domain(spec: str, eps: float | None) -> Domain:
    tokens = spec.split()
    name, params = tokens[0], _split_params(tokens[1:])
    if name.startswith("file:"):
        if params:
            raise ConfigError("file domains take no inline parameters")
        return parse_domain_file(Path(name[5:]))
    if name not in NAMED_DOMAINS:
        raise ConfigError(f"unknown domain {name!r} (known: {sorted(NAMED_DOMAINS)})")
    if name == "example2-bounded-5" or name == "example4-unbounded-5":
        if eps is None:
            eps = float(params.pop("eps", 0.1))
        if params:
            raise ConfigError(f"unknown domain parameters {sorted(params)}")
        return NAMED_DOMAINS[name](eps)
    if eps is not None:
        raise ConfigError(f"domain {name!r} does not take an eps sweep")
    if name == "square-with-grading":
        grading = int(params.pop("grading", 3))
        if params:
            raise ConfigError(f"unknown domain parameters {sorted(params)}")
        return NAMED_DOMAINS[name](grading)
    count = int(params.pop("count", 3))
    if params:
        raise ConfigError(f"unknown domain parameters {sorted(params)}")
    return NAMED_DOMAINS[name](count)


def resolve_theta(spec: str, domain: Domain) -> PiecewiseConstant:
    if spec == "default":
        return default_theta(domain)
    tokens = spec.split()
    values = [parse_angle(tok) for tok in tokens]
    if len(values) == 1:
        return PiecewiseConstant(tuple(values) * domain.num_curves)
    if len(values) != domain.num_curves:
        raise ConfigError(
            f"theta list has {len(values)} entries, domain has {domain.num_curves} curves"
        )
    return PiecewiseConstant(tuple(values))


# ---------------------------------------------------------------------------
# Experiment cells
# ---------------------------------------------------------------------------
def _blank_row(n: int, eps: float | None) -> dict:
    row = {c: "" for c in CSV_COLUMNS}
    row["n"] = n
    row["eps"] = f"{eps:.6e}" if eps is not None else ""
    row["status"] = "ok"
    return row


def _run_gnk_cell(cfg: ExperimentConfig, domain: Domain, n: int, row: dict) -> None:
    theta = resolve_theta(cfg.theta_spec, domain)
    t0 = time.perf_counter()
    disc = discretize(domain, n)
    aux = build_auxiliary(disc, theta)
    gamma = gamma_samples(cfg.gamma_spec, disc.t, disc.eta, aux)
    problem = build_problem(domain, n, theta, gamma, iprec=cfg.iprec,
                            gmres_config=cfg.gmres, subtract=cfg.subtract)
    setup_s = time.perf_counter() - t0
    solution = solve_gnk(problem)
    row["total_nodes"] = disc.total_nodes
    row["time_setup_s"] = f"{setup_s:.6f}"
    row["time_solve_s"] = f"{sum(v for k, v in solution.timings.items() if k != 'plan_s'):.6f}"
    row["gmres_iters"] = solution.report.inner_iterations
    row["matvec_count"] = solution.report.matvec_count
    row["converged"] = int(solution.report.converged)
    if cfg.gamma_spec in TEST_FUNCTIONS:
        exact = TEST_FUNCTIONS[cfg.gamma_spec].exact_mu(disc.eta, aux.a)
        row["err_mu_inf"] = f"{np.max(np.abs(solution.mu - exact)):.16e}"
        row["err_h_inf"] = f"{np.max(np.abs(solution.h)):.16e}"


def _run_adjoint_cell(cfg: ExperimentConfig, domain: Domain, n: int, row: dict) -> None:
    theta = resolve_theta(cfg.theta_spec, domain)
    t0 = time.perf_counter()
    disc = discretize(domain, n)
    aux = build_auxiliary(disc, theta)
    rhs = np.ones(disc.total_nodes)
    problem = build_adjoint_problem(domain, n, theta, rhs, iprec=cfg.iprec,
                                    gmres_config=cfg.gmres, subtract=cfg.subtract)
    setup_s = time.perf_counter() - t0
    solution = solve_adjoint(problem)
    gamma_tilde = gamma_samples(cfg.gamma_spec, disc.t, disc.eta, aux)
    row["total_nodes"] = disc.total_nodes
    row["time_setup_s"] = f"{setup_s:.6f}"
    row["time_solve_s"] = f"{solution.timings['solve_s']:.6f}"
    row["gmres_iters"] = solution.report.inner_iterations
    row["matvec_count"] = solution.report.matvec_count
    row["converged"] = int(solution.report.converged)
    row["E_n"] = f"{adjoint_orthogonality(disc, gamma_tilde, solution.phi):.16e}"


def _run_cauchy_cell(cfg: ExperimentConfig, domain: Domain, n: int, row: dict) -> None:
    if cfg.gamma_spec not in TEST_FUNCTIONS:
        raise ConfigError("cauchy experiments need an analytic gamma spec with a known f")
    if not cfg.targets:
        raise ConfigError("cauchy experiments need a 'targets' list")
    test = TEST_FUNCTIONS[cfg.gamma_spec]
    t0 = time.perf_counter()
    disc = discretize(domain, n)
    plan = build_plan(disc.eta, cfg.iprec)
    setup_s = time.perf_counter() - t0
    targets = np.asarray(cfg.targets, dtype=complex)
    t0 = time.perf_counter()
    values = cauchy_eval(disc, test.f(disc.eta), targets, f_inf=test.f_inf, plan=plan)
    solve_s = time.perf_counter() - t0
    row["total_nodes"] = disc.total_nodes
    row["time_setup_s"] = f"{setup_s:.6f}"
    row["time_solve_s"] = f"{solve_s:.6f}"
    row["err_mu_inf"] = f"{np.max(np.abs(values - test.f(targets))):.16e}"
    row["converged"] = 1


def _run_bench_cell(cfg: ExperimentConfig, n: int, row: dict, seed: int) -> None:
    rng = np.random.default_rng(seed)
    pts = rng.random(n) + 1j * rng.random(n)
    x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    t0 = time.perf_counter()
    plan = build_plan(pts, cfg.iprec)
    setup_s = time.perf_counter() - t0
    e_matvec(plan, x)  # warm-up discarded (JIT, caches)
    times = []
    for _ in range(3):
        t0 = time.perf_counter()
        fast = e_matvec(plan, x)
        times.append(time.perf_counter() - t0)
    t0 = time.perf_counter()
    ref = direct_e_matvec(pts, x)
    direct_s = time.perf_counter() - t0
    row["total_nodes"] = n
    row["time_setup_s"] = f"{setup_s:.6f}"
    row["time_solve_s"] = f"{np.mean(times):.6f}"
    row["time_direct_s"] = f"{direct_s:.6f}"
    row["err_mu_inf"] = f"{np.max(np.abs(fast - ref)) / np.max(np.abs(ref)):.16e}"
    row["converged"] = 1


def run_experiment(cfg: ExperimentConfig, kind: str, out_dir: Path, seed: int = 0) -> int:
    """Execute the sweep, writing CSV + manifest + figures; returns exit code."""
    out_dir.mkdir(parents=True, exist_ok=True)
    rows: list[dict] = []
    failures = 0
    eps_cells: list[float | None] = list(cfg.eps_list) or [None]
    for eps in eps_cells:
        for n in cfg.n_list:
            row = _blank_row(n, eps)
            try:
                if kind == "bench":
                    _run_bench_cell(cfg, n, row, seed)
                else:
                    if n % 2 or n < 4:
                        raise ConfigError(f"n must be even and >= 4, got {n}")
                    domain = resolve_domain(cfg.domain_spec, eps)
                    if kind == "gnk":
                        _run_gnk_cell(cfg, domain, n, row)
                    elif kind == "adjoint":
                        _run_adjoint_cell(cfg, domain, n, row)
                    elif kind == "cauchy":
                        _run_cauchy_cell(cfg, domain, n, row)
                    else:
                        raise ConfigError(f"unknown experiment kind {kind!r}")
            except Exception as exc:  # noqa: BLE001 - cell failures are data
                failures += 1
                row["status"] = f"failed: {exc}"
                print(f"cell n={n} eps={eps}: {exc}", file=sys.stderr)
            rows.append(row)

    csv_path = out_dir / f"{kind}.csv"
    with csv_path.open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
        writer.writeheader()
        writer.writerows(rows)
    manifest = out_dir / "manifest.txt"
    manifest.write_text("\n".join([f"kind = {kind}"] + cfg.manifest_lines()) + "\n")

    try:
        if kind == "bench":
            report.render_bench_figure(rows, out_dir / "bench.png")
        else:
            sweep_key = "eps" if cfg.eps_list else "total_nodes"
            report.render_convergence_figure(rows, out_dir / f"{kind}.png", sweep_key)
    except Exception as exc:  # noqa: BLE001 - figures must not mask CSV output
        print(f"figure rendering failed: {exc}", file=sys.stderr)

    return 1 if failures else 0


def emit_geometry(cfg: ExperimentConfig, out_dir: Path) -> int:
    """Write node coordinates (t, Re eta, Im eta, component) and a figure."""
    out_dir.mkdir(parents=True, exist_ok=True)
    eps = cfg.eps_list[0] if cfg.eps_list else None
    domain = resolve_domain(cfg.domain_spec, eps)
    n = cfg.n_list[0]
    if n % 2 or n < 4:
        raise ConfigError(f"n must be even and >= 4, got {n}")
    disc = discretize(domain, n)
    path = out_dir / "geometry.csv"
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "re_eta", "im_eta", "component"])
        for i in range(disc.total_nodes):
            writer.writerow([f"{disc.t[i]:.16e}", f"{disc.eta[i].real:.16e}",
                             f"{disc.eta[i].imag:.16e}", int(disc.component[i])])
    (out_dir / "manifest.txt").write_text(
        "\n".join(["kind = geometry"] + cfg.manifest_lines()) + "\n")
    try:
        report.render_geometry_figure(disc, out_dir / "geometry.png")
    except Exception as exc:  # noqa: BLE001
        print(f"figure rendering failed: {exc}", file=sys.stderr)
    return 0


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------
_SUBCOMMAND_KIND = {"solve": "gnk", "adjoint": "adjoint", "cauchy": "cauchy",
                    "bench": "bench", "geometry": "geometry"}


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="fastbie", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _SUBCOMMAND_KIND:
        p = sub.add_parser(name)
        p.add_argument("config_pos", nargs="?", default=None, metavar="CONFIG")
        p.add_argument("--config", default=None)
        p.add_argument("--out", default="out")
        p.add_argument("--threads", type=int, default=None)
        p.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    config_path = args.config or args.config_pos
    if config_path is None or (args.config and args.config_pos):
        print("error: provide the config path exactly once (positional or --config)",
              file=sys.stderr)
        return 2
    if args.threads is not None:
        import numba

        numba.set_num_threads(max(1, args.threads))

    try:
        cfg = parse_experiment_config(Path(config_path))
        kind = _SUBCOMMAND_KIND[args.command]
        if cfg.kind is not None and cfg.kind != kind and kind != "geometry":
            raise ConfigError(f"config kind {cfg.kind!r} does not match subcommand {args.command!r}")
        if kind == "geometry":
            return emit_geometry(cfg, Path(args.out))
        return run_experiment(cfg, kind, Path(args.out), seed=args.seed)
    except (ConfigError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
