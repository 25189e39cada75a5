"""Command-line harness: ``weakgamma spectral|transform|bounds|verify``.

Every run writes a ``#``-prefixed JSON header holding the fully resolved
configuration, followed by a CSV table (or a single JSON document with
``--format json``). Exit codes: 0 ok, 1 verification failure, 2 model or
domain error, 3 numeric error.
"""

from __future__ import annotations

import ast
import csv
import dataclasses
import datetime as _dt
import io
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import click
import numpy as np

from . import logconcave as lc
from ._numerics import loglog_slope as _slope
from . import measures as ms
from . import ratefn as rf
from . import structured as st
from .exceptions import DomainError, ModelError, NumericError, SamplingError, WeakGammaError
from .report import BoundReport, fmt
from .spectral import discretize, integrated_gamma2_constant, poincare_constant
from .suites import SUITES, Outcome, tap_lines

EXIT_OK, EXIT_VERIFY, EXIT_MODEL, EXIT_NUMERIC = 0, 1, 2, 3


@dataclass
class RunConfig:
    command: str = ""
    model: str = "gaussian"
    resolution: int = 4001
    seed: int = 0
    out: str | None = None
    format: str = "csv"
    timestamp: bool = True
    suite: str = "all"
    # bounds
    bounds: list | None = None
    ns: list | None = None
    ps: list | None = None
    mc_size: int = 100_000
    eps: float = 1.0
    theta: float = 1.0
    # spectral
    eigen_count: int = 10
    # transform
    transform: str = "xi_iterated"
    rate: Any = None
    input: str | None = None
    grid: list | None = None
    nash_p: float = 2.0
    # verify
    sabotage: float | None = None

    def resolved(self) -> dict:
        d = dataclasses.asdict(self)
        d.pop("out")
        d.pop("timestamp")
        return d


_FIELDS = {f.name for f in dataclasses.fields(RunConfig)}


def load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ModelError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ModelError("config file must hold a JSON object")
    unknown = sorted(set(data) - _FIELDS)
    if unknown:
        raise ModelError(f"unknown config keys: {', '.join(unknown)}")
    return data


# ------------------------------------------------------------------ models

_ONE_D = {"gaussian": ms.gaussian, "uniform": ms.uniform, "subbotin": ms.subbotin,
          "double_well": ms.double_well, "custom1d": ms.custom1d}
_ND = {"subbotin_product": ms.subbotin_product, "gaussian_product": ms.gaussian_product,
       "radial_subbotin": ms.radial_subbotin}


def _literal(node: ast.AST) -> Any:
    if isinstance(node, ast.Name) and node.id == "inf":
        return math.inf
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, ast.USub):
        return -_literal(node.operand)
    if isinstance(node, ast.Tuple):
        return tuple(_literal(e) for e in node.elts)
    return ast.literal_eval(node)


def parse_model_spec(spec: str) -> tuple[str, list, dict]:
    """``"subbotin(1.5)"`` -> ``("subbotin", [1.5], {})``; a bare name has no arguments."""
    try:
        tree = ast.parse(spec.strip(), mode="eval").body
    except SyntaxError as exc:
        raise ModelError(f"cannot parse model spec {spec!r}") from exc
    if isinstance(tree, ast.Name):
        return tree.id, [], {}
    if not (isinstance(tree, ast.Call) and isinstance(tree.func, ast.Name)):
        raise ModelError(f"model spec must look like name(args): {spec!r}")
    try:
        args = [_literal(a) for a in tree.args]
        kwargs = {k.arg: _literal(k.value) for k in tree.keywords}
    except (ValueError, TypeError) as exc:
        raise ModelError(f"model arguments must be literals: {spec!r}") from exc
    return tree.func.id, args, kwargs


def build_model(spec: str, **override):
    """Instantiate a model; ``override`` replaces keyword arguments (used by sweeps)."""
    name, args, kwargs = parse_model_spec(spec)
    kwargs.update(override)
    if name in _ONE_D:
        scale = kwargs.pop("scale", None)
        try:
            pot = _ONE_D[name](*args, **kwargs)
        except TypeError as exc:
            raise ModelError(f"bad arguments for {name}: {exc}") from exc
        return ms.dilate(pot, scale) if scale is not None else pot
    if name in _ND:
        try:
            return _ND[name](*args, **kwargs)
        except TypeError as exc:
            raise ModelError(f"bad arguments for {name}: {exc}") from exc
    raise ModelError(f"unknown model {name!r}")


def _model_kind(model) -> str:
    if isinstance(model, ms.Potential1D):
        return "1d"
    if isinstance(model, ms.RadialModel):
        return "radial"
    return "product"


# ------------------------------------------------------------------ output


class Emitter:
    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.columns: list[str] = []
        self.rows: list[list] = []
        self.records: list[dict] = []
        self.footer: dict = {}

    def table(self, columns, rows, records=None):
        self.columns = list(columns)
        self.rows = [[fmt(v) for v in r] for r in rows]
        self.records = records or []

    def render(self) -> str:
        header = self.cfg.resolved()
        if self.cfg.format == "json":
            doc = {"config": header}
            if self.cfg.timestamp:
                doc["timestamp"] = _dt.datetime.now(_dt.timezone.utc).isoformat()
            doc["columns"] = self.columns
            doc["rows"] = self.records or [dict(zip(self.columns, r)) for r in self.rows]
            doc.update(self.footer)
            return json.dumps(_jsonable(doc), indent=1, sort_keys=True) + "\n"
        buf = io.StringIO()
        buf.write("# " + json.dumps(_jsonable(header), sort_keys=True) + "\n")
        if self.cfg.timestamp:
            buf.write("# timestamp: " + _dt.datetime.now(_dt.timezone.utc).isoformat() + "\n")
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(self.columns)
        wr.writerows(self.rows)
        for k, v in sorted(self.footer.items()):
            buf.write(f"# {k}: {fmt(v)}\n")
        return buf.getvalue()

    def write(self) -> None:
        text = self.render()
        if self.cfg.out:
            Path(self.cfg.out).write_text(text)
        else:
            click.echo(text, nl=False)


def _jsonable(x):
    if isinstance(x, float) and not math.isfinite(x):
        return fmt(x)
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.generic):
        return _jsonable(x.item())
    return x


# ------------------------------------------------------------------ commands


def run_spectral(cfg: RunConfig) -> int:
    pot = build_model(cfg.model)
    if not isinstance(pot, ms.Potential1D):
        raise ModelError("spectral needs a one-dimensional model")
    g = discretize(ms.build_grid(pot, cfg.resolution))
    cp = poincare_constant(g)
    g2 = integrated_gamma2_constant(g)
    rows = [("poincare_constant", cp), ("lambda_1", float(g.eigenvalues[1])),
            ("integrated_gamma2_constant", g2), ("equality_residual", abs(g2 - cp) / cp),
            ("nodes", g.measure.n), ("window_lo", g.measure.window[0]),
            ("window_hi", g.measure.window[1])]
    if pot.name == "subbotin" and "scale" not in dict(pot.params):
        p = dict(pot.params)["p"]
        if 1.0 < p <= 2.0:
            rows.append(("subbotin_upper_bound", st.subbotin_cp_eta(p)))
    for k in range(min(cfg.eigen_count, len(g.eigenvalues))):
        rows.append((f"eigenvalue_{k}", float(g.eigenvalues[k])))
    em = Emitter(cfg)
    em.table(("quantity", "value"), rows)
    em.write()
    return EXIT_OK


_T_TRANSFORMS = {"xi_wp", "xi_level", "xi_iterated", "eta", "xi_from_eta"}
_S_TRANSFORMS = {"identity", "beta_wp_from_xi", "beta_wp_from_xi_simple", "beta_from_beta_wp", "nash"}


def _rate_from_input(cfg: RunConfig) -> rf.RateFunction:
    if cfg.input is not None:
        return decay_curve_xi(Path(cfg.input).read_text())
    obj = cfg.rate
    if obj is None:
        raise DomainError("transform needs --rate (JSON or file) or --input (decay-curve CSV)")
    if isinstance(obj, str):
        text = Path(obj).read_text() if Path(obj).is_file() else obj
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise DomainError(f"rate is not valid JSON: {exc}") from exc
    return rf.from_json(obj)


def decay_curve_xi(text: str) -> rf.MonotoneTable:
    """Decay rate table ``t -> Var(P_t f) / Var(f)`` from a decay-curve CSV (``t > 0`` rows)."""
    lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    rows = list(csv.DictReader(lines))
    if not rows or "t" not in rows[0] or "variance" not in rows[0]:
        raise DomainError("decay-curve CSV needs columns t and variance")
    t = np.array([float(r["t"]) for r in rows])
    v = np.array([float(r["variance"]) for r in rows])
    v0 = v[t == 0][0] if np.any(t == 0) else v[0]
    keep = t > 0
    return rf.MonotoneTable.from_samples(t[keep], v[keep] / v0)


def loglog_slope(x, y) -> float:
    x, y = np.asarray(x, float), np.asarray(y, float)
    ok = np.isfinite(y) & (y > 0)
    if ok.sum() < 2:
        return math.nan
    return _slope(x[ok], y[ok])


def run_transform(cfg: RunConfig) -> int:
    name = cfg.transform
    if name not in _T_TRANSFORMS | _S_TRANSFORMS:
        raise DomainError(f"unknown transform {name!r}")
    rate = _rate_from_input(cfg)
    if cfg.input is not None and name not in {"beta_wp_from_xi", "beta_wp_from_xi_simple", "identity"}:
        raise DomainError("a decay-curve input is a decay rate; use beta_wp_from_xi")
    in_t = name in _T_TRANSFORMS
    lo, hi, count = cfg.grid or ((1e2, 1e6, 17) if in_t else (1e-4, 1e-1, 13))
    xs = np.geomspace(float(lo), float(hi), int(count))
    if name == "beta_from_beta_wp":
        fn = rf.beta_from_beta_wp(rate).value
    elif name == "nash":
        fn = rf.nash_exponent_improvement(rate, cfg.nash_p).value
    else:
        fn = {"xi_wp": lambda x: rf.xi_from_beta_wp(rate, x),
              "xi_level": lambda x: rf.xi_level_form(rate, x),
              "xi_iterated": lambda x: rf.xi_iterated(rate, x),
              "eta": lambda x: rf.eta_from_beta(rate, x, 0.5 * x),
              "xi_from_eta": lambda x: rf.xi_from_eta(rate, x).value,
              "identity": rate.value,
              "beta_wp_from_xi": lambda x: rf.beta_wp_from_xi(rate, x),
              "beta_wp_from_xi_simple": lambda x: rf.beta_wp_from_xi_simple(rate, x)}[name]
    ys = [float(fn(float(x))) for x in xs]
    em = Emitter(cfg)
    em.table(("t" if in_t else "s", "value"), zip(xs.tolist(), ys))
    em.footer["loglog_slope"] = loglog_slope(xs, ys)
    em.write()
    return EXIT_OK


def _one_d_reports(pot: ms.Potential1D, cfg: RunConfig, names) -> list[BoundReport]:
    m = ms.build_grid(pot, cfg.resolution)
    beta = lc.hessian_tail_beta(m)
    out = []
    for b in names:
        if b == "milman":
            out.append(lc.cp_bound_milman(beta))
        elif b == "grad_schedule":
            out.append(lc.cp_bound_grad_schedule(beta, theta=cfg.theta))
        elif b == "brascamp_moment":
            out.append(lc.cp_bound_brascamp_moment(m))
        elif b == "log_moment":
            out.append(lc.cp_bound_log_moment(lc.log_moment(m, cfg.eps), cfg.eps))
        elif b == "power_moment":
            out.append(lc.cp_bound_power_moment(lc.power_moment(m, cfg.eps), cfg.eps))
        else:
            raise DomainError(f"bound {b!r} does not apply to a one-dimensional model")
    cp = poincare_constant(discretize(m))
    for r in out:
        r.inputs.setdefault("model", pot.describe())
        r.comparisons["spectral_cp"] = cp
        r.comparisons["dominates_spectral_cp"] = int(r.dominates(cp))
    return out


def _product_reports(model: ms.ProductPerturbedModel, cfg: RunConfig, names) -> list[BoundReport]:
    p = dict(model.params).get("p", 2.0)
    n = model.n
    out = []
    for b in names:
        if b == "subbotin_product":
            out.append(st.subbotin_product_bound(p, n))
        elif b == "flat_tail":
            out.append(st.flat_tail_bound(p, ms.subbotin_alpha_exact(p), n))
        elif b == "concentration_kappa":
            alpha, abar = st.marginal_alpha(model.h[0], cfg.resolution)
            out.append(st.concentration_kappa(alpha, n, abar))
        elif b == "brascamp_moment":
            out.append(lc.cp_bound_brascamp_moment(model, cfg.seed, cfg.mc_size))
        else:
            raise DomainError(f"bound {b!r} does not apply to a product model")
    if model.w is None:
        # tensorization: a product of identical factors has the factor's constant
        cp = poincare_constant(discretize(ms.build_grid(model.h[0], cfg.resolution)))
        for r in out:
            r.comparisons["spectral_cp"] = cp
            r.comparisons["dominates_spectral_cp"] = int(r.dominates(cp))
    return out


def _radial_reports(model: ms.RadialModel, cfg: RunConfig, names) -> list[BoundReport]:
    p = dict(model.params)["p"]
    out = []
    for b in names:
        if b == "radial_subbotin":
            out.append(st.radial_subbotin_bound(p, model.n, model))
        elif b == "radial":
            out.append(st.radial_bound(model))
        else:
            raise DomainError(f"bound {b!r} does not apply to a radial model")
    for r in out:
        if "bjm_lower" in r.comparisons:
            r.comparisons["dominates_bjm_lower"] = int(r.dominates(r.comparisons["bjm_lower"]))
    return out


_DEFAULT_BOUNDS = {"1d": ["milman", "grad_schedule", "brascamp_moment", "log_moment", "power_moment"],
                   "radial": ["radial_subbotin", "radial"]}


def _sweep_points(cfg: RunConfig) -> list[dict]:
    name, _, _ = parse_model_spec(cfg.model)
    keys = []
    if cfg.ps:
        keys.append([("p", float(p)) for p in cfg.ps])
    if cfg.ns:
        keys.append([("n", int(n)) for n in cfg.ns])
    if not keys:
        return [{}]
    if name in _ONE_D and cfg.ns:
        raise DomainError("an n sweep needs a multivariate model")
    pts = [{}]
    for axis in keys:
        pts = [dict(d, **dict([kv])) for d in pts for kv in axis]
    return pts


def run_bounds(cfg: RunConfig) -> int:
    reports: list[BoundReport] = []
    labels: list[str] = []
    for over in _sweep_points(cfg):
        model = build_model(cfg.model, **over)
        kind = _model_kind(model)
        if cfg.bounds:
            names = cfg.bounds
        elif kind == "product":
            p = dict(model.params).get("p", 2.0)
            names = ["subbotin_product"] if 1.0 < p <= 2.0 else ["flat_tail"]
        else:
            names = _DEFAULT_BOUNDS[kind]
        fn = {"1d": _one_d_reports, "product": _product_reports, "radial": _radial_reports}[kind]
        got = fn(model, cfg, names)
        reports.extend(got)
        labels.extend([";".join(f"{k}={v}" for k, v in sorted(over.items()))] * len(got))
    _attach_exponent_fit(reports)
    em = Emitter(cfg)
    cols = ("sweep",) + BoundReport.CSV_COLUMNS
    em.table(cols, [[lab] + r.csv_row() for lab, r in zip(labels, reports)],
             records=[dict(r.to_json(), sweep=lab) for lab, r in zip(labels, reports)])
    em.write()
    return EXIT_OK


def _attach_exponent_fit(reports: list[BoundReport]) -> None:
    """For subbotin_product rows sharing ``p``: slope of ln(tail integral) in ln ln(6n)."""
    groups: dict[float, list[BoundReport]] = {}
    for r in reports:
        if r.name == "subbotin_product":
            groups.setdefault(r.inputs["p"], []).append(r)
    for p, reps in groups.items():
        if len(reps) < 2:
            continue
        ns = np.array([r.inputs["n"] for r in reps], float)
        ints = np.array([r.intermediates["tail_integral"] for r in reps])
        if np.all(ints > 0) and len(set(ns)) > 1:
            slope = float(np.polyfit(np.log(np.log(6.0 * ns)), np.log(ints), 1)[0])
        else:
            slope = 0.0
        for r in reps:
            r.comparisons["fitted_ln_exponent"] = slope
            r.comparisons["target_exponent"] = 2.0 - p


def run_verify(cfg: RunConfig) -> int:
    names = list(SUITES) if cfg.suite == "all" else [cfg.suite]
    outcomes: list[Outcome] = []
    for nm in names:
        kw = {}
        if nm == "wig2":
            kw["sabotage"] = cfg.sabotage
        if nm in ("decay", "wig2"):
            kw["resolution"] = min(cfg.resolution, 2001)
        outcomes.extend(SUITES[nm](**kw))
    lines = tap_lines(outcomes)
    text = "# " + json.dumps(_jsonable(cfg.resolved()), sort_keys=True) + "\n" + "\n".join(lines) + "\n"
    if cfg.out:
        Path(cfg.out).write_text(text)
    else:
        click.echo(text, nl=False)
    return EXIT_OK if all(o.passed for o in outcomes) else EXIT_VERIFY


_RUNNERS = {"spectral": run_spectral, "transform": run_transform, "bounds": run_bounds,
            "verify": run_verify}


def execute(cfg: RunConfig) -> int:
    """Run a resolved configuration and map errors onto exit codes."""
    try:
        return _RUNNERS[cfg.command](cfg)
    except (ModelError, DomainError) as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_MODEL
    except (NumericError, SamplingError, FloatingPointError, OverflowError) as exc:
        click.echo(f"numeric error: {exc}", err=True)
        return EXIT_NUMERIC
    except WeakGammaError as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_MODEL
    except OSError as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_MODEL


# ------------------------------------------------------------------ click


def _common(fn):
    opts = [
        click.option("--model", default=None, help="Model spec, e.g. 'subbotin(1.5)'."),
        click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None,
                     help="JSON config file; unknown keys are rejected."),
        click.option("--out", type=click.Path(dir_okay=False), default=None),
        click.option("--format", "fmt_", type=click.Choice(["csv", "json"]), default=None),
        click.option("--seed", type=click.IntRange(0, 2 ** 64 - 1), default=None),
        click.option("--resolution", type=click.IntRange(16, 8192), default=None),
        click.option("--no-timestamp", is_flag=True, default=False),
    ]
    for o in reversed(opts):
        fn = o(fn)
    return fn


def _resolve(command: str, config_path, flags: dict) -> RunConfig:
    data = load_config(config_path)
    data.pop("command", None)
    for k, v in flags.items():
        if v is not None:
            data[k] = v
    try:
        cfg = RunConfig(command=command, **data)
    except TypeError as exc:
        raise ModelError(f"bad config: {exc}") from exc
    if cfg.format not in ("csv", "json"):
        raise ModelError("format must be csv or json")
    return cfg


def _run(command: str, config_path, no_timestamp: bool, **flags) -> None:
    try:
        cfg = _resolve(command, config_path, flags)
    except ModelError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_MODEL)
    if no_timestamp:
        cfg.timestamp = False
    sys.exit(execute(cfg))


def _float_list(text):
    return None if text is None else [float(x) for x in text.split(",") if x.strip()]


@click.group()
def main() -> None:
    """Poincaré-constant bounds and semigroup checks for weak integrated Gamma-2 inequalities."""


@main.command()
@_common
@click.option("--eigen-count", type=int, default=None, help="Number of eigenvalues to list.")
def spectral(model, config_path, out, fmt_, seed, resolution, no_timestamp, eigen_count):
    """Spectral gap, integrated Gamma-2 constant and their residual for a 1-D model."""
    _run("spectral", config_path, no_timestamp, model=model, out=out, format=fmt_, seed=seed,
         resolution=resolution, eigen_count=eigen_count)


@main.command()
@_common
@click.option("--transform", "transform_", default=None,
              help="xi_wp, xi_level, xi_iterated, eta, xi_from_eta, identity, beta_wp_from_xi, "
                   "beta_wp_from_xi_simple, beta_from_beta_wp or nash.")
@click.option("--rate", default=None, help="Rate-function JSON, inline or a file path.")
@click.option("--input", "input_", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Decay-curve CSV (columns t, variance).")
@click.option("--grid", default=None, help="lo,hi,count of the geometric evaluation grid.")
@click.option("--nash-p", type=float, default=None)
def transform(model, config_path, out, fmt_, seed, resolution, no_timestamp, transform_, rate,
              input_, grid, nash_p):
    """Tabulate a rate-function transform on a geometric grid."""
    g = _float_list(grid)
    if g is not None and len(g) != 3:
        click.echo("error: --grid needs lo,hi,count", err=True)
        sys.exit(EXIT_MODEL)
    _run("transform", config_path, no_timestamp, model=model, out=out, format=fmt_, seed=seed,
         resolution=resolution, transform=transform_, rate=rate, input=input_, grid=g,
         nash_p=nash_p)


@main.command()
@_common
@click.option("--bound", "bounds", multiple=True, help="Bound name; repeatable.")
@click.option("--ns", default=None, help="Comma-separated dimensions to sweep.")
@click.option("--ps", default=None, help="Comma-separated exponents to sweep.")
@click.option("--mc-size", type=int, default=None)
def bounds(model, config_path, out, fmt_, seed, resolution, no_timestamp, bounds, ns, ps, mc_size):
    """One row per bound, with hypothesis flags and comparison columns."""
    nl = _float_list(ns)
    _run("bounds", config_path, no_timestamp, model=model, out=out, format=fmt_, seed=seed,
         resolution=resolution, bounds=list(bounds) or None,
         ns=None if nl is None else [int(v) for v in nl], ps=_float_list(ps), mc_size=mc_size)


@main.command()
@_common
@click.option("--suite", type=click.Choice(["decay", "wig2", "spi", "all"]), default=None)
@click.option("--sabotage", type=float, default=None,
              help="Also check a Gaussian wpi profile scaled by this factor (expected to fail).")
def verify(model, config_path, out, fmt_, seed, resolution, no_timestamp, suite, sabotage):
    """TAP-style invariant suites; exit 1 on any failure."""
    _run("verify", config_path, no_timestamp, model=model, out=out, format=fmt_, seed=seed,
         resolution=resolution, suite=suite, sabotage=sabotage)


if __name__ == "__main__":  # pragma: no cover
    main()
