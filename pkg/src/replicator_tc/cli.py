"""Command-line front end.

Every subcommand writes its artifacts into ``--out-dir`` and prints a short
JSON summary on stdout.  Validation failures exit with 2, numerical
failures with 3; in both cases a JSON error object goes to stderr.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import presets
from .errors import NumericFailure, RejectedInput
from .game import MatrixGame, simulate_replicator
from .glv import EmbeddingMap, GlvSystem, embed_glv, poly_to_glv, simulate_with_clock
from .integrate import Trajectory, integrate_adaptive, reach
from .mwu import (
    UnnormalizedGameWarning,
    global_error_bound,
    lipschitz_bound,
    measure_global_error,
    measure_local_error,
    local_error_bound,
    normalize_game,
    select_step_size,
    simulate_mwu,
)
from .poly import PolynomialField
from .sphere import TranslationParams, estimate_bound_B, sphere_poly_to_game
from .turing import (
    EncodedConfig,
    TapeConfig,
    TuringMachine,
    decode,
    encode,
    encoded_step,
    tm_reach_check,
    tm_run,
    tm_step,
)

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC = 0, 2, 3


class UsageError(RejectedInput):
    pass


@dataclass
class RunConfig:
    """Validated parameters of one CLI invocation."""

    command: str
    out_dir: Path = Path(".")
    fmt: str = "csv"
    seed: int = 0
    input_path: Optional[Path] = None
    bundle_path: Optional[Path] = None
    eta: Optional[float] = None
    t_end: Optional[float] = None
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    horizon: Optional[float] = None
    epsilon: Optional[float] = None
    sigma: Optional[float] = None
    steps: Optional[int] = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.fmt not in ("csv", "json"):
            raise UsageError(f"unknown format {self.fmt!r}")
        for name in ("eta", "t_end", "rel_tol", "abs_tol", "horizon", "epsilon"):
            v = getattr(self, name)
            if v is not None and not (math.isfinite(v) and v > 0):
                raise UsageError(f"--{name.replace('_', '-')} must be positive and finite, got {v}")
        if self.sigma is not None and not self.sigma > 1:
            raise UsageError("--sigma must exceed 1")
        if self.steps is not None and self.steps < 0:
            raise UsageError("--steps must be nonnegative")

    @classmethod
    def from_args(cls, ns: argparse.Namespace) -> "RunConfig":
        known = {k: getattr(ns, k, None) for k in (
            "eta", "t_end", "rel_tol", "abs_tol", "horizon", "epsilon", "sigma", "steps")}
        known = {k: v for k, v in known.items() if v is not None}
        extra = {k: v for k, v in vars(ns).items() if k not in known and k not in (
            "command", "out_dir", "format", "seed", "input", "bundle", "handler")}
        return cls(
            command=ns.command,
            out_dir=Path(ns.out_dir),
            fmt=ns.format,
            seed=ns.seed,
            input_path=Path(ns.input) if getattr(ns, "input", None) else None,
            bundle_path=Path(ns.bundle) if getattr(ns, "bundle", None) else None,
            extra=extra,
            **known,
        )


# ---------------------------------------------------------------- io helpers

def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _write(cfg: RunConfig, name: str, text: str) -> str:
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    path = cfg.out_dir / name
    path.write_text(text)
    return str(path)


def _write_traj(cfg: RunConfig, stem: str, traj: Trajectory, names=None) -> str:
    if cfg.fmt == "json":
        return _write(cfg, stem + ".json", _dump(traj.to_json()))
    return _write(cfg, stem + ".csv", traj.to_csv(names))


def _load_json(path: Path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise RejectedInput(f"cannot read {path}: {exc.strerror}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        line = text.splitlines()[exc.lineno - 1] if exc.lineno - 1 < len(text.splitlines()) else ""
        raise RejectedInput(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg} near {line.strip()!r}") from exc


def _vector(text: Optional[str], name: str):
    if text is None:
        return None
    try:
        return np.array([float(v) for v in text.split(",")])
    except ValueError as exc:
        raise UsageError(f"{name} must be a comma-separated list of numbers") from exc


class Bundle:
    """Game plus the map back to the embedded system's coordinates."""

    def __init__(self, game: MatrixGame, emap: Optional[EmbeddingMap], offset, meta: dict, start=None):
        self.game = game
        self.emap = emap
        self.offset = None if offset is None else np.asarray(offset, dtype=float)
        self.meta = meta
        self.start = None if start is None else np.asarray(start, dtype=float)

    def forward(self, x):
        return self.emap.forward(np.asarray(x, dtype=float) + self.offset)

    def inverse(self, p):
        return self.emap.inverse(p) - self.offset

    def to_json(self) -> dict:
        return {
            "game": self.game.to_json(),
            "map": None if self.emap is None else self.emap.to_json(),
            "offset": None if self.offset is None else self.offset.tolist(),
            "start": None if self.start is None else self.start.tolist(),
            "meta": self.meta,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "Bundle":
        if "game" not in doc:
            if "A" in doc:
                return cls(MatrixGame.from_json(doc), None, None, {})
            raise RejectedInput("bundle has no 'game' entry")
        emap = EmbeddingMap.from_json(doc["map"]) if doc.get("map") else None
        offset = doc.get("offset")
        if emap is not None and offset is None:
            offset = np.zeros(emap.n)
        return cls(MatrixGame.from_json(doc["game"]), emap, offset, doc.get("meta", {}), doc.get("start"))


def _embed_poly(P: PolynomialField, shift: float, meta: dict, start=None) -> Bundle:
    glv = poly_to_glv(P.shift(np.full(P.n, shift)) if shift else P)
    game, emap = embed_glv(glv)
    return Bundle(game, emap, np.full(P.n, float(shift)), {**meta, "shift": shift, "n_monomials": glv.m_mon}, start)


def _embed_sphere(base: PolynomialField, sigma: Optional[float], meta: dict, start=None) -> Bundle:
    params = None
    if sigma is not None:
        params = TranslationParams(sigma, estimate_bound_B(base, sigma))
    emb = sphere_poly_to_game(base, params)
    meta = {**meta, "sigma": emb.params.sigma, "B": emb.params.B_bound, "region": emb.params.region,
            "n_monomials": emb.glv.m_mon}
    return Bundle(emb.game, emb.emap, np.full(base.n, emb.params.sigma), meta, start)


def build_bundle(cfg: RunConfig) -> Bundle:
    """Bundle from ``--bundle``, ``--preset`` or ``--input``."""
    preset = cfg.extra.get("preset")
    shift = cfg.extra.get("shift")
    if cfg.bundle_path is not None:
        return Bundle.from_json(_load_json(cfg.bundle_path))
    if preset == "lorenz":
        s = presets.LORENZ_SHIFT if shift is None else shift
        meta = {"preset": "lorenz", "params": presets.LORENZ_PARAMS}
        return _embed_poly(presets.lorenz_field(), s, meta, presets.LORENZ_START)
    if preset == "logistic":
        game, emap = embed_glv(presets.logistic_glv())
        return Bundle(game, emap, [0.0], {"preset": "logistic", "n_monomials": 1}, [0.5])
    if preset == "rotation":
        return _embed_sphere(presets.rotation(), cfg.sigma, {"preset": "rotation"}, [1.0, 0.0])
    if cfg.input_path is None:
        raise UsageError("give one of --preset, --input or --bundle")
    doc = _load_json(cfg.input_path)
    if not isinstance(doc, dict):
        raise RejectedInput("input document must be a JSON object")
    if "lambda" in doc:
        glv = GlvSystem.from_json(doc)
        game, emap = embed_glv(glv)
        return Bundle(game, emap, np.zeros(glv.n), {"source": "glv", "n_monomials": glv.m_mon})
    if "components" in doc:
        P = PolynomialField.from_json(doc)
        if cfg.extra.get("sphere"):
            return _embed_sphere(P, cfg.sigma, {"source": "sphere-polynomial"})
        return _embed_poly(P, shift or 0.0, {"source": "polynomial"})
    if "A" in doc or "game" in doc:
        return Bundle.from_json(doc)
    raise RejectedInput("input is neither a polynomial field ('components') nor a GLV system ('lambda')")


# ---------------------------------------------------------------- commands

def cmd_embed(cfg: RunConfig) -> dict:
    b = build_bundle(cfg)
    if b.emap is None:
        raise RejectedInput("embed needs a polynomial, GLV or preset input")
    n_mon = int(b.meta.get("n_monomials", b.emap.n_monomials))
    files = [_write(cfg, "game.csv", b.game.to_csv()), _write(cfg, "bundle.json", _dump(b.to_json()))]
    return {"m": b.game.m, "n_monomials": n_mon, "size_check": b.game.m - 1 >= n_mon,
            "max_abs_payoff": float(np.abs(b.game.A).max()), "files": files, "meta": b.meta}


def _start_point(cfg: RunConfig, b: Bundle):
    p0 = _vector(cfg.extra.get("p0"), "--p0")
    if p0 is not None:
        return p0
    x0 = _vector(cfg.extra.get("x0"), "--x0")
    if x0 is None and b.start is not None:
        x0 = b.start
    if x0 is not None:
        if b.emap is None:
            raise UsageError("--x0 needs a bundle with an embedding map; use --p0")
        return b.forward(x0)
    return np.full(b.game.m, 1.0 / b.game.m)


def cmd_simulate(cfg: RunConfig) -> dict:
    b = build_bundle(cfg)
    p0 = _start_point(cfg, b)
    mode = cfg.extra.get("mode", "rd")
    out = {"mode": mode, "m": b.game.m}
    if mode == "rd":
        if cfg.t_end is None:
            raise UsageError("rd mode needs --t-end")
        if cfg.extra.get("clock"):
            if b.emap is None:
                raise UsageError("--clock needs a bundle with an embedding map")
            traj = simulate_with_clock(b.game, p0, cfg.t_end, cfg.rel_tol, cfg.abs_tol)
        else:
            traj = simulate_replicator(b.game, p0, cfg.t_end, cfg.rel_tol, cfg.abs_tol)
    else:
        if cfg.eta is None or cfg.steps is None:
            raise UsageError("mwu mode needs --eta and --steps")
        game = normalize_game(b.game) if cfg.extra.get("normalize") else b.game
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", UnnormalizedGameWarning)
            traj = simulate_mwu(game, p0, cfg.eta, cfg.steps)
        out["unnormalized_warning"] = any(issubclass(w.category, UnnormalizedGameWarning) for w in caught)
        if cfg.extra.get("with_error"):
            rep = measure_global_error(game, p0, cfg.eta, cfg.steps)
            out["error_file"] = _write(cfg, "errors.csv", rep.to_csv())
            out["global_ok"] = rep.global_ok
            out["lipschitz_L"] = rep.lipschitz_L
    out["trajectory"] = _write_traj(cfg, "trajectory", traj)
    out["min_coordinate"] = float(traj.states.min())
    out["max_sum_error"] = float(np.abs(traj.states.sum(axis=1) - 1.0).max())
    if cfg.extra.get("pullback"):
        if b.emap is None:
            raise UsageError("--pullback needs a bundle with an embedding map")
        pb = traj.map(b.inverse)
        out["pullback"] = _write_traj(cfg, "pullback", pb)
    return out


def _random_normalized_game(rng, m) -> MatrixGame:
    return normalize_game(MatrixGame(rng.uniform(-1.0, 1.0, size=(m, m))))


def cmd_sweep_error(cfg: RunConfig) -> dict:
    rng = np.random.default_rng(cfg.seed)
    trials = int(cfg.extra.get("trials") or 20)
    etas = _vector(cfg.extra.get("etas"), "--etas")
    if etas is None:
        etas = np.geomspace(1e-4, 1e-1, 10)
    if np.any(etas <= 0):
        raise UsageError("--etas must be positive")
    if cfg.bundle_path or cfg.extra.get("preset") or cfg.input_path:
        base = normalize_game(build_bundle(cfg).game)
        games = [base] * trials
    else:
        m = int(cfg.extra.get("m") or 4)
        games = [_random_normalized_game(rng, m) for _ in range(trials)]
    points = [rng.dirichlet(np.ones(g.m)) for g in games]

    def trial(k):
        return [measure_local_error(games[k], points[k], float(eta)) for eta in etas]

    with ThreadPoolExecutor(max_workers=int(cfg.extra.get("workers") or 4)) as pool:
        results = list(pool.map(trial, range(trials)))  # map keeps trial order
    worst = np.max(np.array(results), axis=0)
    bounds = np.array([local_error_bound(float(e)) for e in etas])
    rows = [{"eta": float(e), "measured": float(w), "bound": float(bd)} for e, w, bd in zip(etas, worst, bounds)]
    if cfg.fmt == "json":
        path = _write(cfg, "sweep.json", _dump(rows))
    else:
        lines = ["eta,measured,bound"] + [f"{r['eta']!r},{r['measured']!r},{r['bound']!r}" for r in rows]
        path = _write(cfg, "sweep.csv", "\n".join(lines) + "\n")
    small = etas <= 1e-2
    slope = None
    if small.sum() >= 2:
        slope = float(np.polyfit(np.log(etas[small]), np.log(worst[small]), 1)[0])
    return {"file": path, "violations": int(np.sum(worst > bounds)), "trials": trials, "loglog_slope": slope}


def cmd_select_step_size(cfg: RunConfig) -> dict:
    L = cfg.extra.get("lipschitz")
    if L is None:
        if not (cfg.bundle_path or cfg.extra.get("preset") or cfg.input_path):
            raise UsageError("give --lipschitz or a game via --bundle/--preset")
        L = lipschitz_bound(normalize_game(build_bundle(cfg).game))
    if cfg.horizon is None or cfg.epsilon is None:
        raise UsageError("select-step-size needs --horizon and --epsilon")
    eta = select_step_size(L, cfg.horizon, cfg.epsilon, eta_max=cfg.eta or 0.1)
    steps = math.ceil(cfg.horizon / eta - 1e-12)
    out = {"eta": eta, "steps": steps, "L": L, "horizon": cfg.horizon, "epsilon": cfg.epsilon,
           "bound": global_error_bound(eta, L, steps)}
    out["file"] = _write(cfg, "step_size.json", _dump(out))
    return out


def _target(cfg: RunConfig):
    ball = cfg.extra.get("target_ball")
    box = cfg.extra.get("target_box")
    if ball:
        vals = _vector(ball, "--target-ball")
        c, r = vals[:-1], vals[-1]
        return lambda s: bool(np.abs(np.asarray(s) - c).max() <= r), {"ball": vals.tolist()}
    if box:
        try:
            lo, hi = (np.array([float(v) for v in part.split(",")]) for part in box.split(":"))
        except ValueError as exc:
            raise UsageError("--target-box takes lo1,lo2,...:hi1,hi2,...") from exc
        return lambda s: bool(np.all(np.asarray(s) >= lo) and np.all(np.asarray(s) <= hi)), {"box": [lo.tolist(), hi.tolist()]}
    raise UsageError("reach needs a target: --target-ball or --target-box")


def cmd_reach(cfg: RunConfig) -> dict:
    target, target_desc = _target(cfg)
    if cfg.horizon is None:
        raise UsageError("reach needs --horizon")
    traj_path = cfg.extra.get("trajectory")
    if traj_path:
        text = Path(traj_path).read_text()
        traj = Trajectory.from_json(json.loads(text)) if traj_path.endswith(".json") else Trajectory.from_csv(text)
    else:
        b = build_bundle(cfg)
        p0 = _start_point(cfg, b)
        if b.emap is not None:
            traj = simulate_with_clock(b.game, p0, cfg.horizon, cfg.rel_tol, cfg.abs_tol,
                                       max_step=cfg.extra.get("max_step") or np.inf).map(b.inverse)
        else:
            traj = simulate_replicator(b.game, p0, cfg.horizon, cfg.rel_tol, cfg.abs_tol)
    rep = reach(traj, target, cfg.horizon)
    out = {**rep.to_json(), "target": target_desc}
    out["file"] = _write(cfg, "reach.json", _dump({**rep.to_json(), "target": target_desc}))
    return out


def _tape(cfg: RunConfig, T: TuringMachine) -> TapeConfig:
    text = cfg.extra.get("tape")
    return TapeConfig.blank(T.q0) if not text else TapeConfig.from_string(text, T.q0)


def _random_machine(rng, r: int) -> TuringMachine:
    q_halt = r
    delta = {(q, s): (int(rng.integers(1, r + 1)), int(rng.integers(0, 10)), int(rng.integers(-1, 2)))
             for q in range(1, r) for s in range(10)}
    return TuringMachine(r, 1, q_halt, delta)


def _random_tape(rng, q: int, k0: int) -> TapeConfig:
    return TapeConfig(q, tuple(int(v) for v in rng.integers(0, 10, size=2 * k0 + 1)))


def conjugacy_failures(T: TuringMachine, c: TapeConfig, k: int) -> list:
    """Steps along the trace of ``c`` at which encode and step fail to commute."""
    bad = []
    for i in range(k):
        nxt = tm_step(T, c)
        got, ok = encoded_step(T, encode(c))
        if not ok or got != encode(nxt):
            bad.append(i)
        c = nxt
    return bad


def cmd_tm(cfg: RunConfig) -> dict:
    action = cfg.extra["action"]
    rng = np.random.default_rng(cfg.seed)
    k = int(cfg.extra.get("k") if cfg.extra.get("k") is not None else 1000)
    if action == "conjugacy-check" and cfg.extra.get("random"):
        n, fails = int(cfg.extra["random"]), 0
        for _ in range(n):
            T = _random_machine(rng, int(rng.integers(2, 6)))
            c = _random_tape(rng, int(rng.integers(1, T.r + 1)), int(rng.integers(0, 6)))
            fails += bool(conjugacy_failures(T, c, 1))
        out = {"action": action, "random_pairs": n, "failures": fails, "pass": fails == 0}
        out["file"] = _write(cfg, "tm_conjugacy.json", _dump(out))
        return out
    if not cfg.extra.get("machine"):
        raise UsageError("tm needs --machine (or --random for conjugacy-check)")
    T = TuringMachine.from_json(_load_json(Path(cfg.extra["machine"])))
    c = _tape(cfg, T)
    if action == "encode":
        e = encode(c)
        out = {"y1": str(e.y1), "y2": str(e.y2), "q": e.q, "k0": c.k0}
    elif action == "decode":
        y1, y2 = int(cfg.extra["y1"]), int(cfg.extra["y2"])
        d = decode(EncodedConfig(y1, y2, int(cfg.extra.get("q") or T.q0)))
        out = {"tape": d.to_string(), "q": d.q}
    elif action == "run":
        res = tm_run(T, c, k)
        out = {"status": res.status, "steps": res.steps, "tape": res.config.to_string(), "q": res.config.q}
    elif action == "conjugacy-check":
        bad = conjugacy_failures(T, c, k)
        out = {"steps_checked": k, "failures": bad, "pass": not bad}
    else:  # reach
        w = cfg.extra.get("w_star")
        if not w:
            raise UsageError("tm reach needs --w-star")
        rep = tm_reach_check(T, c, tuple(int(ch) for ch in w), cfg.epsilon or 0.25, k)
        doc = rep.to_json()
        if doc["hit_state"] is not None:
            doc["hit_state"] = [str(v) for v in doc["hit_state"]]
        out = doc
    out = {"action": action, **out}
    out["file"] = _write(cfg, f"tm_{action.replace('-', '_')}.json", _dump(out))
    return out


def lorenz_direct(x0, t_end, t_eval):
    return integrate_adaptive(presets.lorenz_field(), np.asarray(x0, dtype=float), t_end, 1e-12, 1e-12, t_eval=t_eval)


def cmd_demo_lorenz(cfg: RunConfig) -> dict:
    shift = cfg.extra.get("shift") or presets.LORENZ_SHIFT
    cfg.extra["preset"], cfg.extra["shift"] = "lorenz", shift
    b = build_bundle(cfg)
    t_end = cfg.t_end or 2.0
    p0 = b.forward(presets.LORENZ_START)
    rd = simulate_with_clock(b.game, p0, t_end, cfg.rel_tol, cfg.abs_tol)
    pulled = rd.map(b.inverse)
    direct = lorenz_direct(presets.LORENZ_START, t_end, rd.times)
    dev = float(np.abs(pulled.states - direct.states).max())
    scale = float(np.abs(direct.states).max())
    eta, steps = cfg.eta or 1e-2, cfg.steps if cfg.steps is not None else 10000
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UnnormalizedGameWarning)
        mwu = simulate_mwu(b.game, p0, eta, steps)
    out = {
        "shift": shift,
        "m": b.game.m,
        "rd_pullback_sup_deviation": dev,
        "rd_relative_deviation": dev / scale,
        "mwu_eta": eta,
        "mwu_steps": steps,
        "mwu_min_coordinate": float(mwu.states.min()),
        "mwu_max_sum_error": float(np.abs(mwu.states.sum(axis=1) - 1.0).max()),
        "files": [
            _write(cfg, "bundle.json", _dump(b.to_json())),
            _write_traj(cfg, "lorenz_rd_pullback", pulled, ["x", "y", "z"]),
            _write_traj(cfg, "lorenz_direct", direct, ["x", "y", "z"]),
            _write_traj(cfg, "lorenz_mwu_pullback", mwu.map(b.inverse), ["x", "y", "z"]),
        ],
    }
    out["files"].append(_write(cfg, "summary.json", _dump({k: v for k, v in out.items() if k != "files"})))
    return out


# ---------------------------------------------------------------- parser

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _add_source(p):
    p.add_argument("--input", help="polynomial field or GLV system JSON")
    p.add_argument("--bundle", help="bundle.json written by 'embed'")
    p.add_argument("--preset", choices=presets.PRESETS)
    p.add_argument("--shift", type=float, help="uniform coordinate shift for polynomial inputs")
    p.add_argument("--sigma", type=float, help="translation override for sphere fields")
    p.add_argument("--sphere", action="store_true", help="treat --input as a sphere-tangent field")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="replicator-tc", description="Embed polynomial systems into replicator dynamics and study them.")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out-dir", default=".")
    ap.add_argument("--format", choices=("csv", "json"), default="csv")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("embed", help="write the game matrix and embedding map")
    _add_source(p)
    p.set_defaults(handler=cmd_embed)

    p = sub.add_parser("simulate", help="run replicator dynamics or MWU on a game")
    _add_source(p)
    p.add_argument("--mode", choices=("rd", "mwu"), default="rd")
    p.add_argument("--x0", help="start in the embedded system's coordinates")
    p.add_argument("--p0", help="start on the simplex")
    p.add_argument("--t-end", type=float)
    p.add_argument("--rel-tol", type=float, default=1e-10)
    p.add_argument("--abs-tol", type=float, default=1e-12)
    p.add_argument("--eta", type=float)
    p.add_argument("--steps", type=int)
    p.add_argument("--clock", action="store_true", help="index RD samples by the embedded system's time")
    p.add_argument("--pullback", action="store_true")
    p.add_argument("--normalize", action="store_true", help="scale payoffs into [-1, 1] before MWU")
    p.add_argument("--with-error", action="store_true", help="also write measured global error and its bound")
    p.set_defaults(handler=cmd_simulate)

    p = sub.add_parser("sweep-error", help="one-step MWU error against its bound")
    _add_source(p)
    p.add_argument("--etas", help="comma-separated step sizes")
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--m", type=int, default=4, help="size of the random games")
    p.add_argument("--workers", type=int, default=4)
    p.set_defaults(handler=cmd_sweep_error)

    p = sub.add_parser("select-step-size", help="largest MWU step meeting a global error target")
    _add_source(p)
    p.add_argument("--lipschitz", type=float)
    p.add_argument("--horizon", type=float)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--eta", type=float, help="cap on the step size (default 0.1)")
    p.set_defaults(handler=cmd_select_step_size)

    p = sub.add_parser("reach", help="bounded-horizon reachability query")
    _add_source(p)
    p.add_argument("--trajectory", help="trajectory CSV/JSON to scan instead of simulating")
    p.add_argument("--x0")
    p.add_argument("--p0")
    p.add_argument("--horizon", type=float)
    p.add_argument("--target-ball", help="centre and sup-norm radius: c1,...,cn,r")
    p.add_argument("--target-box", help="lo1,...,lon:hi1,...,hin")
    p.add_argument("--max-step", type=float)
    p.add_argument("--rel-tol", type=float, default=1e-10)
    p.add_argument("--abs-tol", type=float, default=1e-12)
    p.set_defaults(handler=cmd_reach)

    p = sub.add_parser("tm", help="Turing machine utilities")
    p.add_argument("action", choices=("run", "encode", "decode", "conjugacy-check", "reach"))
    p.add_argument("--machine", help="machine JSON")
    p.add_argument("--tape", help="digits with the head in brackets, e.g. 12[3]45")
    p.add_argument("-k", type=int, help="step budget (default 1000)")
    p.add_argument("--w-star", help="output window digits for positions -k..k")
    p.add_argument("--epsilon", type=float)
    p.add_argument("--random", type=int, help="conjugacy-check on this many random machines")
    p.add_argument("--y1")
    p.add_argument("--y2")
    p.add_argument("--q", type=int)
    p.set_defaults(handler=cmd_tm)

    p = sub.add_parser("demo-lorenz", help="Lorenz attractor through RD and MWU")
    p.add_argument("--shift", type=float)
    p.add_argument("--t-end", type=float)
    p.add_argument("--eta", type=float)
    p.add_argument("--steps", type=int)
    p.add_argument("--rel-tol", type=float, default=1e-10)
    p.add_argument("--abs-tol", type=float, default=1e-12)
    p.set_defaults(handler=cmd_demo_lorenz)
    return ap


def _error(kind: str, exc: BaseException, code: int) -> int:
    doc = {"error": kind, "type": type(exc).__name__, "message": str(exc)}
    for attr in ("time", "bound_at_floor"):
        if getattr(exc, attr, None) is not None:
            doc[attr] = getattr(exc, attr)
    sys.stderr.write(json.dumps(doc, sort_keys=True) + "\n")
    return code


def main(argv=None) -> int:
    try:
        ns = build_parser().parse_args(argv)
        cfg = RunConfig.from_args(ns)
        result = ns.handler(cfg)
    except RejectedInput as exc:
        return _error("validation", exc, EXIT_INVALID)
    except NumericFailure as exc:
        return _error("numeric", exc, EXIT_NUMERIC)
    except (OSError, KeyError) as exc:
        return _error("validation", exc, EXIT_INVALID)
    sys.stdout.write(json.dumps(result, sort_keys=True, default=str) + "\n")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
