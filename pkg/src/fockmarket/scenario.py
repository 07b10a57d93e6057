"""Scenario files: parsing, dispatch to the engines, CSV output and conservation reports.

A scenario is a JSON object with a ``"model"`` discriminator; see
``docs/scenario_schema.md`` for the field list of each model.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from . import dynamics, hamiltonians as ham, kms, meanfield as mf, perturbation
from .errors import ConfigError
from .fock import max_abs, number_operator
from .hamiltonians import ExtraTerm, ModelOneConfig, ModelTwoConfig

MODELS = ("model1", "model2", "meanfield", "meanfield-appendix2", "kms")
METHODS = {
    "model1": ("onebody", "exact"),
    "model2": ("exact", "series"),
    "meanfield": ("closed", "exact"),
    "meanfield-appendix2": ("closed",),
    "kms": ("closed",),
}
CONSERVATION_TOL = 1e-8
DEFAULT_POINTS = 400
DEFAULT_ORDER = 8


@dataclass(frozen=True)
class TimeGrid:
    t_max: float
    points: int = DEFAULT_POINTS

    def __post_init__(self):
        if not (self.t_max > 0 and math.isfinite(self.t_max)):
            raise ConfigError("time.t_max must be a positive finite number")
        if int(self.points) != self.points or self.points < 2:
            raise ConfigError("time.points must be an integer >= 2")
        object.__setattr__(self, "t_max", float(self.t_max))
        object.__setattr__(self, "points", int(self.points))

    def grid(self) -> np.ndarray:
        return np.linspace(0.0, self.t_max, self.points)


@dataclass(frozen=True)
class MeanFieldConfig:
    params: mf.MeanFieldParams
    gamma_share: float = 1.0


@dataclass(frozen=True)
class Appendix2Config:
    params: mf.Appendix2Params
    gamma_share: float = 1.0


@dataclass(frozen=True)
class KmsConfig:
    Phi: float
    Q_l: float
    betas: tuple[float, ...]
    gamma_share: float = 1.0
    k0: float = 0.0
    Pi0: float = 0.0

    def __post_init__(self):
        if not self.Q_l > 0:
            raise ConfigError("Q_l must be positive")
        betas = tuple(float(b) for b in self.betas)
        if not betas or min(betas) < 0:
            raise ConfigError("betas must be a non-empty list of non-negative values")
        object.__setattr__(self, "betas", betas)


# -- (de)serialisation helpers ---------------------------------------------

def _complex_in(v) -> complex:
    if isinstance(v, (list, tuple)):
        if len(v) != 2:
            raise ConfigError("complex values are written as [re, im]")
        return complex(float(v[0]), float(v[1]))
    return complex(float(v))


def _complex_out(z: complex) -> list[float]:
    return [z.real, z.imag]


def _coupling_in(p, L: int):
    if isinstance(p, (int, float)):
        m = np.full((L, L), float(p))
        np.fill_diagonal(m, 0.0)
        return m
    return p


def _require(cfg: dict, *keys: str) -> None:
    missing = [k for k in keys if k not in cfg]
    if missing:
        raise ConfigError(f"config is missing {', '.join(missing)}")


def _check_keys(cfg: dict, allowed: set[str]) -> None:
    unknown = set(cfg) - allowed
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")


def config_from_dict(model: str, cfg: dict):
    if not isinstance(cfg, dict):
        raise ConfigError("config must be an object")
    try:
        if model == "model1":
            _check_keys(cfg, {"alpha", "p", "initial_n", "price_M", "epsilon"})
            _require(cfg, "alpha", "p", "initial_n")
            return ModelOneConfig(cfg["alpha"], _coupling_in(cfg["p"], len(cfg["alpha"])),
                                  cfg["initial_n"], cfg.get("price_M", 0), cfg.get("epsilon", 1.0))
        if model == "model2":
            _check_keys(cfg, {"alpha", "beta", "p", "price_M", "initial_n", "initial_k",
                              "initial_O", "initial_Mp", "gamma_share"})
            _require(cfg, "alpha", "beta", "p", "price_M", "initial_n", "initial_k")
            return ModelTwoConfig(cfg["alpha"], cfg["beta"], _coupling_in(cfg["p"], len(cfg["alpha"])),
                                  cfg["price_M"], cfg["initial_n"], cfg["initial_k"],
                                  cfg.get("initial_O", 0), cfg.get("initial_Mp", 0),
                                  cfg.get("gamma_share", 1.0))
        if model == "meanfield":
            _check_keys(cfg, {"Phi", "X0", "n", "k", "eta", "Qbar", "X_l0", "gamma_share"})
            _require(cfg, "Phi", "X0", "n", "k")
            n = np.asarray(cfg["n"], dtype=float)
            k = np.asarray(cfg["k"], dtype=float)
            xl = None if cfg.get("X_l0") is None else tuple(_complex_in(v) for v in cfg["X_l0"])
            params = mf.MeanFieldParams(
                float(cfg["Phi"]), _complex_in(cfg["X0"]),
                float(cfg.get("eta", n.mean())), float(cfg.get("Qbar", (n + k).mean())),
                tuple(n), tuple(k), xl)
            return MeanFieldConfig(params, float(cfg.get("gamma_share", 1.0)))
        if model == "meanfield-appendix2":
            _check_keys(cfg, {"gamma_l", "PhiTilde", "mu", "X0", "n", "k", "gamma_share"})
            _require(cfg, "gamma_l", "PhiTilde", "X0", "n", "k")
            phit = float(cfg["PhiTilde"])
            params = mf.Appendix2Params(tuple(cfg["gamma_l"]), phit, float(cfg.get("mu", -phit / 2)),
                                        _complex_in(cfg["X0"]), tuple(cfg["n"]), tuple(cfg["k"]))
            return Appendix2Config(params, float(cfg.get("gamma_share", 1.0)))
        if model == "kms":
            _check_keys(cfg, {"Phi", "Q_l", "betas", "gamma_share", "k0", "Pi0"})
            _require(cfg, "Phi", "Q_l", "betas")
            return KmsConfig(float(cfg["Phi"]), float(cfg["Q_l"]), tuple(cfg["betas"]),
                             float(cfg.get("gamma_share", 1.0)), float(cfg.get("k0", 0.0)),
                             float(cfg.get("Pi0", 0.0)))
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"malformed {model} config: {exc}") from exc
    raise ConfigError(f"unknown model {model!r} (expected one of {', '.join(MODELS)})")


def config_to_dict(model: str, cfg) -> dict:
    if model == "model1":
        return {"alpha": list(cfg.alpha), "p": [list(r) for r in cfg.p],
                "initial_n": list(cfg.initial_n), "price_M": cfg.price_M, "epsilon": cfg.epsilon}
    if model == "model2":
        return {"alpha": list(cfg.alpha), "beta": list(cfg.beta), "p": [list(r) for r in cfg.p],
                "price_M": cfg.price_M, "initial_n": list(cfg.initial_n),
                "initial_k": list(cfg.initial_k), "initial_O": cfg.initial_O,
                "initial_Mp": cfg.initial_Mp, "gamma_share": cfg.gamma_share}
    if model == "meanfield":
        p = cfg.params
        out = {"Phi": p.Phi, "X0": _complex_out(p.X0), "n": list(p.n), "k": list(p.k),
               "eta": p.eta, "Qbar": p.Qbar, "gamma_share": cfg.gamma_share}
        if p.X_l0 is not None:
            out["X_l0"] = [_complex_out(z) for z in p.X_l0]
        return out
    if model == "meanfield-appendix2":
        p = cfg.params
        return {"gamma_l": list(p.gamma_l), "PhiTilde": p.PhiTilde, "mu": p.mu,
                "X0": _complex_out(p.X0), "n": list(p.n), "k": list(p.k),
                "gamma_share": cfg.gamma_share}
    if model == "kms":
        return {"Phi": cfg.Phi, "Q_l": cfg.Q_l, "betas": list(cfg.betas),
                "gamma_share": cfg.gamma_share, "k0": cfg.k0, "Pi0": cfg.Pi0}
    raise ConfigError(f"unknown model {model!r}")


def channel_names(model: str, cfg) -> list[str]:
    if model == "model1":
        return [f"n_{l + 1}" for l in range(cfg.L)] + ["P", "N"]
    if model == "model2":
        L = cfg.L
        names = []
        for prefix in ("n", "k", "Pi", "Q"):
            names += [f"{prefix}_{l + 1}" for l in range(L)]
        return names + ["O_f", "P_r", "N", "K"]
    if model in ("meanfield", "meanfield-appendix2"):
        L = cfg.params.L
        names = []
        for prefix in ("n", "k", "Pi"):
            names += [f"{prefix}_{l + 1}" for l in range(L)]
        return names
    if model == "kms":
        return ["n_c", "n_a", "Pi"]
    raise ConfigError(f"unknown model {model!r}")


def default_time(model: str, cfg) -> TimeGrid:
    """Two natural periods of the model, 400 points."""
    if model == "model1":
        if cfg.L == 2:
            T = dynamics.two_trader_period(cfg.alpha[1] - cfg.alpha[0], cfg.coupling[0, 1])
        else:
            T = dynamics.OneBodyPropagator.from_config(cfg).natural_period()
    elif model == "model2":
        T = math.pi
    elif model == "meanfield":
        T = cfg.params.period()
    elif model == "meanfield-appendix2":
        T = max(2 * math.pi / w for w in (cfg.params.omega(l) for l in range(cfg.params.L)) if w > 0) \
            if any(cfg.params.omega(l) > 0 for l in range(cfg.params.L)) else math.inf
    else:
        T = 1.0
    if not math.isfinite(T):
        T = 2 * math.pi
    return TimeGrid(2 * T, DEFAULT_POINTS)


@dataclass
class Scenario:
    name: str
    model: str
    config: Any
    time: TimeGrid | None = None
    outputs: list[str] | None = None
    method: str | None = None
    order: int | None = None
    extra_terms: list[ExtraTerm] = field(default_factory=list)

    def __post_init__(self):
        if self.model not in MODELS:
            raise ConfigError(f"unknown model {self.model!r} (expected one of {', '.join(MODELS)})")
        if self.time is None and self.model != "kms":
            self.time = default_time(self.model, self.config)
        available = channel_names(self.model, self.config)
        if self.outputs is None:
            self.outputs = available
        unknown = [c for c in self.outputs if c not in available]
        if unknown:
            raise ConfigError(f"unknown channels for {self.model}: {', '.join(unknown)}")
        if not self.outputs:
            raise ConfigError("outputs must name at least one channel")
        if self.method is not None and self.method not in METHODS[self.model]:
            raise ConfigError(f"{self.model} supports methods {', '.join(METHODS[self.model])}")
        if self.order is not None and not 0 <= int(self.order) <= perturbation.MAX_ORDER:
            raise ConfigError(f"order must lie in 0..{perturbation.MAX_ORDER}")
        if self.extra_terms and self.model not in ("model1", "model2"):
            raise ConfigError("extra_terms only apply to model1 and model2")
        for e in self.extra_terms:
            if len(e.delta) != self.config.mode_count:
                raise ConfigError(f"extra term delta must have {self.config.mode_count} entries")

    @classmethod
    def from_dict(cls, d: dict, default_name: str = "scenario") -> "Scenario":
        if not isinstance(d, dict):
            raise ConfigError("scenario must be a JSON object")
        known = {"name", "model", "config", "time", "outputs", "method", "order", "extra_terms"}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown scenario keys: {', '.join(sorted(unknown))}")
        if "model" not in d:
            raise ConfigError("scenario needs a 'model' field")
        model = d["model"]
        if model not in MODELS:
            raise ConfigError(f"unknown model {model!r} (expected one of {', '.join(MODELS)})")
        cfg = config_from_dict(model, d.get("config", {}))
        time = None
        if d.get("time") is not None:
            t = d["time"]
            if not isinstance(t, dict) or "t_max" not in t:
                raise ConfigError("time must be an object with t_max (and optional points)")
            time = TimeGrid(t["t_max"], t.get("points", DEFAULT_POINTS))
        extra = []
        for e in d.get("extra_terms") or []:
            try:
                extra.append(ExtraTerm(tuple(int(x) for x in e["delta"]), float(e.get("strength", 1.0))))
            except (KeyError, TypeError, ValueError) as exc:
                raise ConfigError(f"malformed extra term: {exc}") from exc
        return cls(str(d.get("name", default_name)), model, cfg, time,
                   None if d.get("outputs") is None else list(d["outputs"]),
                   d.get("method"), None if d.get("order") is None else int(d["order"]), extra)

    def to_dict(self) -> dict:
        out: dict[str, Any] = {"name": self.name, "model": self.model,
                               "config": config_to_dict(self.model, self.config),
                               "outputs": list(self.outputs)}
        if self.time is not None:
            out["time"] = {"t_max": self.time.t_max, "points": self.time.points}
        if self.method is not None:
            out["method"] = self.method
        if self.order is not None:
            out["order"] = self.order
        if self.extra_terms:
            out["extra_terms"] = [{"delta": list(e.delta), "strength": e.strength}
                                  for e in self.extra_terms]
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    return Scenario.from_dict(data, default_name=path.stem)


# -- running ----------------------------------------------------------------

@dataclass
class ConservationEntry:
    name: str
    initial: float
    drift: float

    @property
    def passed(self) -> bool:
        return self.drift <= CONSERVATION_TOL


@dataclass
class ConservationReport:
    entries: list[ConservationEntry]
    tolerance: float = CONSERVATION_TOL
    notes: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries)

    def format(self) -> str:
        lines = [f"# conservation report (tolerance {self.tolerance:.1e})",
                 f"{'quantity':<12}{'initial':>22}{'max_drift':>14}  status"]
        for e in self.entries:
            lines.append(f"{e.name:<12}{e.initial:>22.12g}{e.drift:>14.3e}  "
                         f"{'PASS' if e.passed else 'FAIL'}")
        lines += [f"# {n}" for n in self.notes]
        lines.append(f"overall: {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines) + "\n"


def _report(series: dict[str, np.ndarray], names: list[str], notes=()) -> ConservationReport:
    entries = []
    for n in names:
        v = np.asarray(series[n], dtype=float)
        entries.append(ConservationEntry(n, float(v[0]), float(np.max(np.abs(v - v[0])))))
    return ConservationReport(entries, notes=list(notes))


@dataclass
class RunResult:
    series: dynamics.TimeSeries
    report: ConservationReport
    axis: str = "t"
    notes: list[str] = field(default_factory=list)


def _model2_series_method(cfg: ModelTwoConfig, times, order: int):
    sector = ham.model2_sector(cfg)
    H = ham.build_model2(cfg, sector)
    psi = ham.initial_state(cfg, sector)
    L = cfg.L
    modes = list(range(2 * L + 2))
    vals = np.column_stack([
        perturbation.series_channel(H, number_operator(sector, {m: 1.0}), psi, order, times)
        for m in modes])
    norm = max_abs(H)
    radius = 1.0 / norm if norm > 0 else math.inf
    ch = dynamics.model2_channels(cfg, vals[:, :L], vals[:, L:2 * L], vals[:, 2 * L], vals[:, 2 * L + 1])
    ch["Gamma"] = vals[:, 2 * L] + vals[:, 2 * L + 1]
    return ch, radius


def simulate(sc: Scenario, method: str | None = None, order: int | None = None,
             max_dim: int | None = None) -> RunResult:
    """Evaluate every channel of the scenario plus its conservation report."""
    method = method or sc.method or METHODS[sc.model][0]
    if method not in METHODS[sc.model]:
        raise ConfigError(f"{sc.model} supports methods {', '.join(METHODS[sc.model])}")
    if order is None:
        order = sc.order if sc.order is not None else DEFAULT_ORDER
    cfg = sc.config
    notes: list[str] = [f"model={sc.model} method={method}"]

    if sc.model == "kms":
        n_c, n_a, Pi = [], [], []
        for b in cfg.betas:
            sol = kms.solve_equilibrium(kms.KmsProblem(cfg.Phi, cfg.Q_l, "solve_pair", beta=b))
            n_c.append(sol.nc0)
            n_a.append(sol.na0)
            Pi.append(kms.equilibrium_portfolio(cfg.gamma_share, cfg.k0, sol.nc0, cfg.Pi0))
        n_c, n_a = np.array(n_c), np.array(n_a)
        budget = n_a + n_c
        series = dynamics.TimeSeries(np.array(cfg.betas), {"n_c": n_c, "n_a": n_a, "Pi": np.array(Pi)})
        report = ConservationReport([ConservationEntry("budget", cfg.Q_l, float(np.max(np.abs(budget - cfg.Q_l))))])
        return RunResult(series, report, axis="beta", notes=notes)

    times = sc.time.grid()
    if sc.model == "model1":
        ts = dynamics.model1_series(cfg, times, method, sc.extra_terms, max_dim)
        report = _report(ts.channels, ["N", "P"])
    elif sc.model == "model2":
        if method == "exact":
            ts = dynamics.model2_series(cfg, times, sc.extra_terms, max_dim)
            ts.channels["Gamma"] = ts["O_f"] + ts["P_r"]
        else:
            if sc.extra_terms:
                raise ConfigError("extra_terms need the exact method")
            ch, radius = _model2_series_method(cfg, times, order)
            ts = dynamics.TimeSeries(times, ch)
            notes.append(f"series order={order} radius_hint={radius:.6g}")
            if times[-1] > radius:
                notes.append("warning: t_max exceeds radius_hint; series may be inaccurate")
        report = _report(ts.channels, ["N", "K", "Gamma"] + [f"Q_{l + 1}" for l in range(cfg.L)])
    else:
        p = cfg.params
        ch: dict[str, np.ndarray] = {}
        n_cols, k_cols, pi_cols = {}, {}, {}
        for l in range(p.L):
            if sc.model == "meanfield":
                n_l = mf.theta_system(p, l, times) if method == "exact" else mf.n_series(p, l, times)
                Q_l = p.Q(l)
            else:
                n_l = np.asarray(mf.nl_appendix2(p, l, times), dtype=float)
                Q_l = p.n[l] + p.k[l]
            n_cols[f"n_{l + 1}"] = n_l
            k_cols[f"k_{l + 1}"] = Q_l - n_l
            Pi0 = cfg.gamma_share * p.n[l] + p.k[l]
            pi_cols[f"Pi_{l + 1}"] = mf.portfolio_meanfield(cfg.gamma_share, n_l, p.n[l], Pi0)
        ch.update(n_cols)
        ch.update(k_cols)
        ch.update(pi_cols)
        for l in range(p.L):
            ch[f"Q_{l + 1}"] = ch[f"n_{l + 1}"] + ch[f"k_{l + 1}"]
            if sc.model == "meanfield":
                viol = mf.range_violations(p, l, times)
                if viol.size:
                    notes.append(f"n_{l + 1} leaves [0, Q_{l + 1}] at {viol.size} grid points")
        ts = dynamics.TimeSeries(times, ch)
        report = _report(ch, [f"Q_{l + 1}" for l in range(p.L)])
    report.notes = notes
    return RunResult(ts, report, notes=notes)


def verify(sc: Scenario, max_dim: int | None = None) -> ConservationReport:
    """Exact evolution of model1/model2 scenarios, drift of every integral of motion."""
    if sc.model not in ("model1", "model2"):
        raise ConfigError(f"verify supports exact-dynamics models only, not {sc.model}")
    result = simulate(sc, method="exact", max_dim=max_dim)
    return result.report


def format_value(v: float) -> str:
    v = float(v) + 0.0
    return f"{v:.12g}"


def write_csv(path: Path, result: RunResult, outputs: list[str]) -> None:
    lines = [",".join([result.axis] + outputs)]
    cols = [result.series.channels[o] for o in outputs]
    for i, t in enumerate(result.series.times):
        lines.append(",".join([format_value(t)] + [format_value(c[i]) for c in cols]))
    path.write_text("\n".join(lines) + "\n")
