"""Experiment configuration: a flat TOML document validated against defaults.

Example::

    n_qubits = 10
    t = 1.0
    p1 = 1e-5
    p2_list = [1e-4, 2e-4, 3e-4]
    grid = [[2e-4, 18], [3e-4, 18], [1e-4, 22], [2e-4, 22], [1e-4, 31], [2e-4, 31]]
    c = 1.0
    lambdas = [1, 2, 3]
    observable = "X1"
    N_sweep = [1e6, 1e7, 1e8, 1e9, 1e10, 1e11, 1e12]
    trials = 100
    master_seed = 0
"""

from __future__ import annotations

import dataclasses
import re
from dataclasses import dataclass

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from ..errors import ConfigError
from ..qsim import PauliString
from ..trotter import LayerOrder

ESTIMATORS = ("raw", "vd", "seq_poly", "seq_exp", "data_efficient", "tse")

PAPER_GRID = ((2e-4, 18), (3e-4, 18), (1e-4, 22), (2e-4, 22), (1e-4, 31), (2e-4, 31))


@dataclass(frozen=True)
class ExperimentConfig:
    n_qubits: int = 10
    t: float = 1.0
    p1: float = 1e-5
    p2_list: tuple[float, ...] = (1e-4, 2e-4, 3e-4)
    grid: tuple[tuple[float, int], ...] = PAPER_GRID
    c: float = 1.0
    lambdas: tuple[float, ...] = (1.0, 2.0, 3.0)
    # base two-qubit rate of the lambda = 1 node; defaults to min(p2_list)
    p2_base: float | None = None
    # explicit node Trotter numbers, overriding floor(c / sqrt(p))
    node_trotter_numbers: tuple[int, ...] | None = None
    # (p2, M) of the raw/VD state; None picks the grid state closest to exact
    raw_state: tuple[float, int] | None = None
    observable: str = "X1"
    N_sweep: tuple[int, ...] = tuple(10**k for k in range(6, 13))
    trials: int = 100
    master_seed: int = 0
    estimators: tuple[str, ...] = ESTIMATORS
    layer_order: str = LayerOrder.LISTED.value
    noise_mode: str = "local"

    @property
    def base_p2(self) -> float:
        return self.p2_base if self.p2_base is not None else min(self.p2_list)

    def pauli(self) -> PauliString:
        return parse_observable(self.observable, self.n_qubits)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


PROFILES = {
    "full": {},
    # n = 6 desk-scale run: c puts the nodes at M = (15, 11, 8)
    "smoke": {
        "n_qubits": 6,
        "c": 0.3815,
        "grid": ((2e-4, 8), (3e-4, 8), (1e-4, 11), (2e-4, 11), (1e-4, 15), (2e-4, 15)),
        "trials": 20,
    },
}


_TOKEN = re.compile(r"^([IXYZ])(\d+)$")


def parse_observable(spec: str, n: int) -> PauliString:
    """``"XIII"`` (one letter per qubit) or site tokens such as ``"X1 Z3"`` (1-based)."""
    spec = spec.strip()
    if len(spec) == n and set(spec) <= set("IXYZ"):
        return PauliString(spec)
    letters = ["I"] * n
    for tok in spec.replace("*", " ").split():
        m = _TOKEN.match(tok)
        if not m:
            raise ConfigError(f"cannot parse observable token {tok!r}")
        site = int(m.group(2))
        if not 1 <= site <= n:
            raise ConfigError(f"observable site {site} outside 1..{n}")
        letters[site - 1] = m.group(1)
    if not spec:
        raise ConfigError("empty observable")
    return PauliString("".join(letters))


def _key_lines(text: str) -> dict[str, int]:
    lines = {}
    for i, line in enumerate(text.splitlines(), start=1):
        m = re.match(r"\s*\[*\s*([A-Za-z_][A-Za-z0-9_]*)\s*[=\]]", line)
        if m and m.group(1) not in lines:
            lines[m.group(1)] = i
    return lines


def _coerce(name: str, value, line: int | None, path: str | None):
    def fail(msg):
        raise ConfigError(f"{name}: {msg}", line, path)

    def number(v):
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            fail(f"expected a number, got {v!r}")
        return float(v)

    def integer(v):
        if isinstance(v, bool):
            fail(f"expected an integer, got {v!r}")
        if isinstance(v, float) and v.is_integer():
            v = int(v)
        if not isinstance(v, int):
            fail(f"expected an integer, got {v!r}")
        return v

    def array(v):
        if not isinstance(v, list):
            fail(f"expected an array, got {v!r}")
        return v

    def pair(v):
        if not isinstance(v, list) or len(v) != 2:
            fail(f"expected a [p2, M] pair, got {v!r}")
        return (number(v[0]), integer(v[1]))

    if name in ("n_qubits", "trials", "master_seed"):
        return integer(value)
    if name in ("t", "p1", "c", "p2_base"):
        return number(value)
    if name in ("p2_list", "lambdas"):
        return tuple(number(v) for v in array(value))
    if name == "N_sweep":
        return tuple(integer(v) for v in array(value))
    if name == "node_trotter_numbers":
        return tuple(integer(v) for v in array(value))
    if name == "grid":
        return tuple(pair(v) for v in array(value))
    if name == "raw_state":
        return pair(value)
    if name in ("observable", "layer_order", "noise_mode"):
        if not isinstance(value, str):
            fail(f"expected a string, got {value!r}")
        return value
    if name == "estimators":
        out = []
        for v in array(value):
            if not isinstance(v, str):
                fail(f"expected estimator names, got {v!r}")
            out.append(v)
        return tuple(out)
    raise AssertionError(name)


def validate(cfg: ExperimentConfig, lines: dict[str, int] | None = None, path: str | None = None) -> ExperimentConfig:
    lines = lines or {}

    def fail(key, msg):
        raise ConfigError(f"{key}: {msg}", lines.get(key), path)

    if cfg.n_qubits < 2:
        fail("n_qubits", "need at least 2 qubits")
    if not cfg.p2_list:
        fail("p2_list", "must not be empty")
    if len(set(cfg.p2_list)) != len(cfg.p2_list):
        fail("p2_list", "values must be distinct")
    if any(not 0 < p < 1 for p in cfg.p2_list):
        fail("p2_list", "values must lie in (0, 1)")
    if not 0 <= cfg.p1 <= 1:
        fail("p1", "must lie in [0, 1]")
    if cfg.p2_base is not None and not 0 < cfg.p2_base < 1:
        fail("p2_base", "must lie in (0, 1)")
    if cfg.c <= 0:
        fail("c", "must be positive")
    if cfg.trials < 1:
        fail("trials", "must be at least 1")
    if not cfg.N_sweep or any(n < 1 for n in cfg.N_sweep):
        fail("N_sweep", "shot counts must be positive")
    if any(b <= a for a, b in zip(cfg.N_sweep, cfg.N_sweep[1:])):
        fail("N_sweep", "must be strictly ascending")
    if not cfg.lambdas or cfg.lambdas[0] != 1.0:
        fail("lambdas", "the first scale factor must be 1")
    if any(b <= a for a, b in zip(cfg.lambdas, cfg.lambdas[1:])):
        fail("lambdas", "must be strictly ascending")
    if cfg.node_trotter_numbers is not None and len(cfg.node_trotter_numbers) != len(cfg.lambdas):
        fail("node_trotter_numbers", "needs one entry per scale factor")
    for p, M in cfg.grid:
        if not 0 <= p <= 1 or M < 1:
            fail("grid", f"invalid state ({p}, {M})")
    unknown = set(cfg.estimators) - set(ESTIMATORS)
    if unknown:
        fail("estimators", f"unknown estimators {sorted(unknown)}; choose from {list(ESTIMATORS)}")
    try:
        LayerOrder(cfg.layer_order)
    except ValueError:
        fail("layer_order", f"expected one of {[o.value for o in LayerOrder]}")
    if cfg.noise_mode not in ("local", "global"):
        fail("noise_mode", "expected 'local' or 'global'")
    try:
        parse_observable(cfg.observable, cfg.n_qubits)
    except ConfigError as e:
        fail("observable", str(e))
    return cfg


def load_config(path: str | None = None, profile: str = "full", **overrides) -> ExperimentConfig:
    """Profile defaults, then the TOML file at ``path``, then keyword overrides."""
    if profile not in PROFILES:
        raise ConfigError(f"unknown profile {profile!r}; choose from {sorted(PROFILES)}")
    values = dict(PROFILES[profile])
    lines: dict[str, int] = {}
    if path is not None:
        try:
            with open(path, "rb") as fh:
                raw = fh.read()
        except OSError as e:
            raise ConfigError(f"cannot read config: {e.strerror}", path=str(path)) from e
        text = raw.decode("utf-8", errors="replace")
        try:
            doc = tomllib.loads(text)
        except tomllib.TOMLDecodeError as e:
            m = re.search(r"line (\d+)", str(e))
            line = int(m.group(1)) if m else None
            if line is None and "end of document" in str(e):
                line = max(len(text.splitlines()), 1)
            raise ConfigError(f"TOML syntax error: {e}", line, str(path)) from e
        lines = _key_lines(text)
        known = {f.name for f in dataclasses.fields(ExperimentConfig)}
        for key, value in doc.items():
            if isinstance(value, dict):
                raise ConfigError(f"{key}: tables are not allowed in the flat config", lines.get(key), str(path))
            if key not in known:
                raise ConfigError(f"unknown key {key!r}", lines.get(key), str(path))
            values[key] = _coerce(key, value, lines.get(key), str(path))
    values.update({k: v for k, v in overrides.items() if v is not None})
    return validate(ExperimentConfig(**values), lines, None if path is None else str(path))
