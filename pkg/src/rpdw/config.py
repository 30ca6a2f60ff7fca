"""
JSON experiment configuration: parsing, defaults and up-front validation.

Every violated constraint is collected before anything runs, and each message
names the hypothesis it breaks.
"""

from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass, field
from typing import Any

from .errors import ConfigError
from .experiments import lifespan_exponent, p_crit
from .grid import MAX_TOTAL_POINTS

COMMANDS = (
    "kernel-table",
    "linear-decay",
    "lemma-check",
    "evolve",
    "lifespan-sweep",
    "critical-scan",
    "blowup-functional",
)

DEFAULTS: dict[str, Any] = {
    "seed": 0,
    "output_dir": "rpdw_out",
    "problem": {"n": 1, "p": 2.0, "gamma": 0.2, "q": 0.4, "epsilon": 0.1, "s": 0.0},
    "grid": {"N": 4096, "L": 256.0},
    "solver": {
        "h": 0.02,
        "T": 50.0,
        "riesz": "exact_zero",
        "mu": None,
        "blowup_factor": 1e8,
        "record_every": 50,
        "linear_only": False,
        "oversample": False,
    },
    "data": {"kind": "bracket", "cutoff": 0.8, "l2": 1.0, "width": 1.0},
    "kernel": {"t": [0.0, 1.0, 2.0], "r": [0.0, 0.5, 1.0]},
    "decay": {"j": 0, "t_min": 10.0, "t_max": 1e4, "count": 24},
    "lemma": {
        "gaussian": {"gamma": [0.0, 0.5], "n": [1, 2, 3], "c": 1.0, "eps_cut": 1.0, "t": [100.0, 1e4]},
        "convolution": {"pairs": [[2, 1.5], [0.5, 0.3], [1, 2], [1, 1]], "t": [10.0, 100.0, 1000.0]},
        "hankel": {"xi_min": 1e-3, "xi_max": 1e3, "count": 25},
    },
    "sweep": {
        "eps_list": [0.4, 0.3, 0.22, 0.16, 0.12, 0.09],
        "p_list": [1.5, 2.0, 3.0, 4.0, 5.0, 6.0],
    },
    "functional": {"R_list": [4.0, 8.0, 16.0], "snapshot_cadence": 0.5},
}

# hypotheses quoted in validation messages
H_DIM = "dimension range of the global existence theorem"
H_POWER = "superlinear power p > 1"
H_GAMMA = "Riesz order 0 <= gamma < n"
H_Q = "pseudo-measure data hypothesis of the global existence theorem"
H_EPS = "positive data size epsilon > 0"
H_DECAY = "decay estimate class s > q - n/2"
H_LIFESPAN = "subcritical lifespan bounds p < p_crit"


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated configuration for one CLI command."""

    command: str
    values: dict = field(repr=False)
    notes: tuple[str, ...] = ()

    def __getitem__(self, key):
        return self.values[key]

    @property
    def output_dir(self) -> str:
        return self.values["output_dir"]

    @property
    def seed(self) -> int:
        return self.values["seed"]

    def to_json(self) -> dict:
        return {"command": self.command, **copy.deepcopy(self.values)}


def _merge(base: dict, override: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in override.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def _is_num(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool) and math.isfinite(x)


def _check_problem(pr: dict, problems: list[str], notes: list[str]):
    n, p, g, q, e = (pr.get(k) for k in ("n", "p", "gamma", "q", "epsilon"))
    if not (isinstance(n, int) and not isinstance(n, bool) and 1 <= n <= 4):
        problems.append(f"n must be an integer with 1 <= n <= 4, got {n!r} ({H_DIM})")
        n = None
    if not (_is_num(p) and p > 1):
        problems.append(f"p must satisfy p > 1, got {p!r} ({H_POWER})")
    if n is not None:
        if not (_is_num(g) and 0 <= g < n):
            problems.append(f"gamma must satisfy 0 <= gamma < n = {n}, got {g!r} ({H_GAMMA})")
        if not (_is_num(q) and 0 < q < n / 2):
            problems.append(f"q must satisfy 0 < q < n/2 = {n / 2:g}, got {q!r} ({H_Q})")
    if not (_is_num(e) and e > 0):
        problems.append(f"epsilon must be positive, got {e!r} ({H_EPS})")
    if not _is_num(pr.get("s")):
        problems.append(f"s must be a finite number, got {pr.get('s')!r}")
    if problems:
        return
    if not g < q:
        notes.append(
            f"gamma = {g} >= q = {q}: outside the global existence regime (needs gamma < q); "
            "only the blow-up theory applies"
        )
    if n in (3, 4):
        lo, hi = 2 * (n - q + g) / n, (n + 2 * g) / (n - 2)
        if not lo <= p <= hi:
            notes.append(
                f"p = {p} outside the Gagliardo-Nirenberg window [{lo:.6g}, {hi:.6g}] for n = {n}; "
                "runs proceed but the global existence theorem does not cover them"
            )


def _check_grid(gr: dict, n, problems: list[str]):
    N, L = gr.get("N"), gr.get("L")
    if not (isinstance(N, int) and not isinstance(N, bool) and N >= 4 and N % 2 == 0):
        problems.append(f"grid N must be an even integer >= 4, got {N!r}")
    elif isinstance(n, int) and 1 <= n <= 4 and N**n > MAX_TOTAL_POINTS:
        problems.append(f"grid has N^n = {N**n} points, above the limit {MAX_TOTAL_POINTS}")
    if not (_is_num(L) and L > 0):
        problems.append(f"grid L must be positive, got {L!r}")


def _check_solver(so: dict, problems: list[str]):
    h, T, bf = so.get("h"), so.get("T"), so.get("blowup_factor")
    if not (_is_num(h) and h > 0):
        problems.append(f"solver h must be positive, got {h!r}")
    elif not (_is_num(T) and T >= h):
        problems.append(f"solver T must be at least h, got {T!r}")
    if not (_is_num(bf) and bf > 1):
        problems.append(f"blowup_factor must exceed 1, got {bf!r}")
    if so.get("riesz") not in ("exact_zero", "regularized"):
        problems.append(f"riesz must be 'exact_zero' or 'regularized', got {so.get('riesz')!r}")
    mu = so.get("mu")
    if mu is not None and not (_is_num(mu) and mu > 0):
        problems.append(f"riesz softening mu must be positive, got {mu!r}")
    re = so.get("record_every")
    if not (isinstance(re, int) and re >= 1):
        problems.append(f"record_every must be an integer >= 1, got {re!r}")


def _num_list(x, name, problems, minimum=1, positive=False) -> bool:
    if not (isinstance(x, list) and len(x) >= minimum and all(_is_num(v) for v in x)):
        problems.append(f"{name} must be a list of at least {minimum} numbers, got {x!r}")
        return False
    if positive and any(v <= 0 for v in x):
        problems.append(f"{name} entries must be positive")
        return False
    return True


def _check_command(cmd: str, v: dict, problems: list[str], notes: list[str]):
    pr = v["problem"]
    if cmd == "kernel-table":
        k = v["kernel"]
        if _num_list(k.get("t"), "kernel.t", problems) and any(t < 0 for t in k["t"]):
            problems.append("kernel.t entries must be nonnegative")
        if _num_list(k.get("r"), "kernel.r", problems) and any(r < 0 for r in k["r"]):
            problems.append("kernel.r entries must be nonnegative")
        return
    if cmd == "linear-decay":
        d = v["decay"]
        if d.get("j") not in (0, 1):
            problems.append(f"decay.j must be 0 or 1, got {d.get('j')!r}")
        if not (_is_num(d.get("t_min")) and _is_num(d.get("t_max")) and 0 < d["t_min"] < d["t_max"]):
            problems.append("decay times need 0 < t_min < t_max")
        if not (isinstance(d.get("count"), int) and d["count"] >= 5):
            problems.append("decay.count must be an integer >= 5")
        n, q, s = pr.get("n"), pr.get("q"), pr.get("s")
        if all(_is_num(x) for x in (n, q, s)) and s <= q - n / 2:
            problems.append(f"s = {s} must exceed q - n/2 = {q - n / 2:g} ({H_DECAY})")
        return
    if cmd == "lemma-check":
        gl = v["lemma"]["gaussian"]
        for g_ in gl.get("gamma", []):
            for n_ in gl.get("n", []):
                if _is_num(g_) and g_ <= -n_ / 2:
                    problems.append(f"Gaussian low-frequency bound needs gamma > -n/2, got gamma={g_}, n={n_}")
        hk = v["lemma"]["hankel"]
        if not (_is_num(hk.get("xi_min")) and _is_num(hk.get("xi_max")) and 0 < hk["xi_min"] < hk["xi_max"]):
            problems.append("hankel frequencies need 0 < xi_min < xi_max")
        return

    _check_grid(v["grid"], pr.get("n"), problems)
    _check_solver(v["solver"], problems)
    data = v["data"]
    if data.get("kind") not in ("bracket", "gaussian", "zero"):
        problems.append(f"data.kind must be 'bracket', 'gaussian' or 'zero', got {data.get('kind')!r}")

    if cmd == "lifespan-sweep":
        _num_list(v["sweep"].get("eps_list"), "sweep.eps_list", problems, minimum=6, positive=True)
        if problems:
            return
        pc = p_crit(pr["n"], pr["q"], pr["gamma"])
        if abs(pr["p"] - pc) <= 1e-12 * pc:
            problems.append(f"theory exponent infinite at critical p = {pc:.12g} ({H_LIFESPAN})")
        elif math.isinf(lifespan_exponent(pr["n"], pr["q"], pr["gamma"], pr["p"])):
            problems.append(f"p = {pr['p']} is not below p_crit = {pc:.12g} ({H_LIFESPAN})")
        if v["solver"]["riesz"] != "regularized":
            problems.append("lifespan sweeps need the regularized Riesz mode (positive data, nonzero mean forcing)")
        eps = v["sweep"]["eps_list"]
        if max(eps) / min(eps) < 10:
            notes.append(f"eps_list spans {max(eps) / min(eps):.3g}x, less than one decade")
    elif cmd == "critical-scan":
        _num_list(v["sweep"].get("p_list"), "sweep.p_list", problems, minimum=2)
        if not problems and any(p <= 1 for p in v["sweep"]["p_list"]):
            problems.append(f"sweep.p_list entries must exceed 1 ({H_POWER})")
    elif cmd == "blowup-functional":
        f = v["functional"]
        if _num_list(f.get("R_list"), "functional.R_list", problems, minimum=2, positive=True):
            Rmax = max(f["R_list"])
            L = v["grid"].get("L")
            if _is_num(L) and L < 4 * Rmax:
                problems.append(f"grid L = {L} must be at least 4 R = {4 * Rmax:g} for the largest R")
            c = f.get("snapshot_cadence")
            if not (_is_num(c) and c > 0):
                problems.append("functional.snapshot_cadence must be positive")
            elif c > min(f["R_list"]) ** 2 / 32:
                problems.append(
                    f"snapshot_cadence {c} exceeds R^2/32 = {min(f['R_list']) ** 2 / 32:g} for the smallest R"
                )
            T = v["solver"].get("T")
            if _is_num(T) and T < Rmax**2:
                problems.append(f"solver T = {T} must reach R^2 = {Rmax**2:g} for the largest R")
        if _is_num(pr.get("p")) and _is_num(pr.get("q")) and isinstance(pr.get("n"), int):
            if pr["p"] >= p_crit(pr["n"], pr["q"], pr["gamma"]):
                notes.append("p >= p_crit: the functional is evaluated but no blow-up is expected")


def resolve(raw: dict, command: str | None = None) -> ExperimentConfig:
    """Merge ``raw`` over defaults and validate for ``command``."""
    if not isinstance(raw, dict):
        raise ConfigError("configuration must be a JSON object")
    cmd = command or raw.get("command")
    problems: list[str] = []
    notes: list[str] = []
    if cmd not in COMMANDS:
        raise ConfigError(f"unknown command {cmd!r}; expected one of {', '.join(COMMANDS)}")
    unknown = set(raw) - set(DEFAULTS) - {"command"}
    if unknown:
        problems.append(f"unknown configuration keys: {', '.join(sorted(unknown))}")
    values = _merge(DEFAULTS, {k: v for k, v in raw.items() if k != "command"})
    if not isinstance(values["seed"], int):
        problems.append(f"seed must be an integer, got {values['seed']!r}")
    _check_problem(values["problem"], problems, notes)
    _check_command(cmd, values, problems, notes)
    if problems:
        raise ConfigError(problems)
    return ExperimentConfig(cmd, values, tuple(notes))


def parse_config(text: str, command: str | None = None) -> ExperimentConfig:
    """Parse JSON text into a validated configuration.

    Syntax errors report line and column; constraint errors list every violation.
    """
    return resolve(load_json(text), command)


def load_json(text: str):
    """json.loads with syntax errors turned into ConfigError naming line and column."""
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"JSON syntax error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def set_path(raw: dict, dotted: str, value) -> None:
    """Assign ``value`` at a dotted key path, creating sections as needed."""
    keys = dotted.split(".")
    node = raw
    for k in keys[:-1]:
        node = node.setdefault(k, {})
    node[keys[-1]] = value
