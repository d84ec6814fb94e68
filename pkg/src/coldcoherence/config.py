"""Scenario files: TOML with four sections.

    [bath]        species = "He-4" | m + m_unit;  M + M_unit;  n_gas [1/m^3];  T [K];
                  optional T_sweep = {start, stop, n} or a list of temperatures
    [channels.nu], [channels.nu_prime]
                  alpha, beta, length_unit ("m" | "nm" | "bohr");
                  b_red = [re, im] in length_unit^2; c_red = [re, im] in length_unit^3;
                  energy + energy_unit ("J" | "K" | "Hz" | "MHz" | "GHz"); label
    [pair]        p_nu, p_nup (populations); rho0_abs (default sqrt(p_nu p_nup)) and
                  rho0_phase [rad], or rho0 = [re, im]
    [run]         n_points (200), t_max [s] (default 5/zeta0), order (2), margin (0.1),
                  length [m] (1e-9, reference length for theta); [run.oracle] enabled (false),
                  n_nodes (128), q_max, tol (1e-10), n_points (21), tolerance (1e-3)

Unit conversion to SI happens once, here.  ``serialize`` writes SI values
with explicit units, so load -> serialize -> load reproduces the config.
"""

from dataclasses import dataclass, field, asdict
import math
import re
import warnings

import tomli
import tomli_w

from .constants import ENERGY_UNITS, LENGTH_UNITS, MASS_UNITS, SPECIES_MASS_U, atomic_mass
from .errors import ValidationError
from .scattering import BathSpec, Channel, ChannelPair

__all__ = ["OracleOptions", "RunOptions", "ScenarioConfig", "load_config", "loads_config", "serialize"]

_KNOWN = {
    "bath": {"species", "m", "m_unit", "M", "M_unit", "n_gas", "T", "T_sweep"},
    "channel": {"label", "alpha", "beta", "length_unit", "b_red", "c_red", "energy", "energy_unit"},
    "pair": {"p_nu", "p_nup", "rho0", "rho0_abs", "rho0_phase"},
    "run": {"n_points", "t_max", "order", "margin", "length", "oracle"},
    "oracle": {"enabled", "n_nodes", "q_max", "tol", "n_points", "tolerance"},
}
_TOP = {"bath", "channels", "pair", "run"}


@dataclass(frozen=True)
class OracleOptions:
    enabled: bool = False
    n_nodes: int = 128
    q_max: float = None
    tol: float = 1e-10
    n_points: int = 21
    tolerance: float = 1e-3


@dataclass(frozen=True)
class RunOptions:
    n_points: int = 200
    t_max: float = None
    order: int = 2
    margin: float = 0.1
    length: float = 1e-9
    oracle: OracleOptions = field(default_factory=OracleOptions)


@dataclass(frozen=True)
class ScenarioConfig:
    bath: BathSpec
    pair: ChannelPair
    T_sweep: tuple = ()
    run: RunOptions = field(default_factory=RunOptions)
    species: str = None


class _Source:
    """Maps (section path, key) to a line number for diagnostics."""

    def __init__(self, text, path):
        self.lines = text.splitlines()
        self.path = path

    def line_of(self, section, key=None):
        header = re.compile(r"^\s*\[\s*" + re.escape(section) + r"\s*\]\s*(#.*)?$")
        start = None
        for i, line in enumerate(self.lines):
            if header.match(line):
                start = i
                break
        if start is None:
            return None
        if key is None:
            return start + 1
        kre = re.compile(r"^\s*" + re.escape(key) + r"\s*=")
        for j in range(start + 1, len(self.lines)):
            if re.match(r"^\s*\[", self.lines[j]):
                break
            if kre.match(self.lines[j]):
                return j + 1
        return start + 1

    def where(self, section, key=None):
        line = self.line_of(section, key)
        loc = f"{self.path}:{line}" if line else str(self.path)
        return f"{loc}: [{section}]" + (f" {key}" if key else "")


def _fail(src, section, key, msg):
    raise ValidationError(f"{src.where(section, key)}: {msg}")


def _num(src, section, table, key, default=None, positive=False, required=False):
    if key not in table:
        if required:
            _fail(src, section, None, f"missing required key {key!r}")
        return default
    v = table[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        _fail(src, section, key, f"expected a number, got {v!r}")
    v = float(v)
    if not math.isfinite(v):
        _fail(src, section, key, "must be finite")
    if positive and v <= 0:
        _fail(src, section, key, f"must be > 0, got {v!r}")
    return v


def _cplx(src, section, table, key):
    v = table.get(key, [0.0, 0.0])
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        return complex(float(v), 0.0)
    if not (isinstance(v, list) and len(v) == 2 and all(isinstance(x, (int, float)) for x in v)):
        _fail(src, section, key, f"expected [re, im], got {v!r}")
    return complex(float(v[0]), float(v[1]))


def _unknown(src, section, table, allowed, strict):
    extra = sorted(set(table) - allowed)
    for key in extra:
        msg = f"{src.where(section, key)}: unknown key {key!r}"
        if strict:
            raise ValidationError(msg)
        warnings.warn(msg, stacklevel=3)


def _unit(src, section, table, key, units, default):
    u = table.get(key, default)
    if u not in units:
        _fail(src, section, key, f"unknown unit {u!r}; known: {sorted(units)}")
    return units[u]


def _channel(src, name, table, strict):
    section = f"channels.{name}"
    if not isinstance(table, dict):
        _fail(src, "channels", None, f"channel {name!r} must be a table")
    _unknown(src, section, table, _KNOWN["channel"], strict)
    L = _unit(src, section, table, "length_unit", LENGTH_UNITS, "m")
    E = _unit(src, section, table, "energy_unit", ENERGY_UNITS, "J")
    label = str(table.get("label", name))
    alpha = _num(src, section, table, "alpha", required=True) * L
    beta = _num(src, section, table, "beta", default=0.0) * L
    if beta < 0:
        _fail(src, section, "beta", f"channel {label!r}: beta = {beta:g} m violates beta >= 0")
    try:
        return Channel.from_parts(label, _num(src, section, table, "energy", 0.0) * E, alpha, beta,
                                  _cplx(src, section, table, "b_red") * L**2,
                                  _cplx(src, section, table, "c_red") * L**3)
    except ValidationError as exc:
        _fail(src, section, None, str(exc))


def _sweep(src, bath):
    sw = bath.get("T_sweep")
    if sw is None:
        return ()
    if isinstance(sw, list):
        vals = [float(x) for x in sw]
    elif isinstance(sw, dict):
        start = _num(src, "bath", sw, "start", required=True, positive=True)
        stop = _num(src, "bath", sw, "stop", required=True, positive=True)
        n = int(sw.get("n", 10))
        if n < 2:
            _fail(src, "bath", "T_sweep", "n must be >= 2")
        vals = [start * (stop / start) ** (i / (n - 1)) for i in range(n)]  # log spaced
    else:
        _fail(src, "bath", "T_sweep", "expected a list or {start, stop, n}")
    if any(not (v > 0 and math.isfinite(v)) for v in vals):
        _fail(src, "bath", "T_sweep", "temperatures must be positive")
    return tuple(vals)


def loads_config(text, path="<string>", strict=True):
    """Parse and validate scenario text."""
    src = _Source(text, path)
    try:
        raw = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        raise ValidationError(f"{path}: parse error: {exc}") from None
    for key in sorted(set(raw) - _TOP):
        msg = f"{path}: unknown top-level section {key!r}"
        if strict:
            raise ValidationError(msg)
        warnings.warn(msg, stacklevel=2)
    if "bath" not in raw:
        raise ValidationError(f"{path}: missing [bath] section")
    bath = raw["bath"]
    _unknown(src, "bath", bath, _KNOWN["bath"], strict)
    species = bath.get("species")
    if species is not None:
        if species not in SPECIES_MASS_U:
            _fail(src, "bath", "species", f"unknown species {species!r}; known: {sorted(SPECIES_MASS_U)}")
        if "m" in bath:
            _fail(src, "bath", "m", "give either species or m, not both")
        m = SPECIES_MASS_U[species] * atomic_mass
    else:
        m = _num(src, "bath", bath, "m", required=True, positive=True) * _unit(src, "bath", bath, "m_unit", MASS_UNITS, "kg")
    M = _num(src, "bath", bath, "M", required=True, positive=True) * _unit(src, "bath", bath, "M_unit", MASS_UNITS, "kg")
    n_gas = _num(src, "bath", bath, "n_gas", required=True, positive=True)
    T = _num(src, "bath", bath, "T", required=True, positive=True)
    bath_spec = BathSpec(m, M, n_gas, T)
    T_sweep = _sweep(src, bath)

    chans = raw.get("channels", {})
    for name in ("nu", "nu_prime"):
        if name not in chans:
            raise ValidationError(f"{path}: missing [channels.{name}] section")
    for key in sorted(set(chans) - {"nu", "nu_prime"}):
        msg = f"{src.where('channels.' + key)}: unknown channel {key!r} (expected nu and nu_prime)"
        if strict:
            raise ValidationError(msg)
        warnings.warn(msg, stacklevel=2)
    nu = _channel(src, "nu", chans["nu"], strict)
    nup = _channel(src, "nu_prime", chans["nu_prime"], strict)

    pair_t = raw.get("pair", {})
    _unknown(src, "pair", pair_t, _KNOWN["pair"], strict)
    p_nu = _num(src, "pair", pair_t, "p_nu", 0.5)
    p_nup = _num(src, "pair", pair_t, "p_nup", 1.0 - p_nu)
    for key, p in (("p_nu", p_nu), ("p_nup", p_nup)):
        if not 0 <= p <= 1:
            _fail(src, "pair", key, f"population {p!r} outside [0, 1]")
    rho_abs = _num(src, "pair", pair_t, "rho0_abs", math.sqrt(p_nu * p_nup))
    phase = _num(src, "pair", pair_t, "rho0_phase", 0.0)
    if rho_abs < 0:
        _fail(src, "pair", "rho0_abs", "must be >= 0")
    if "rho0" in pair_t:
        if "rho0_abs" in pair_t or "rho0_phase" in pair_t:
            _fail(src, "pair", "rho0", "give rho0 or rho0_abs/rho0_phase, not both")
        rho0 = _cplx(src, "pair", pair_t, "rho0")
    else:
        rho0 = complex(rho_abs * math.cos(phase), rho_abs * math.sin(phase))
    try:
        pair = ChannelPair(nu, nup, rho0, p_nu, p_nup)
    except ValidationError as exc:
        _fail(src, "pair", "rho0_abs", str(exc))

    run_t = raw.get("run", {})
    _unknown(src, "run", run_t, _KNOWN["run"], strict)
    ora_t = run_t.get("oracle", {})
    _unknown(src, "run.oracle", ora_t, _KNOWN["oracle"], strict)
    order = run_t.get("order", 2)
    if order not in (0, 1, 2, 3) or isinstance(order, bool):
        _fail(src, "run", "order", "must be 0, 1, 2 or 3")
    n_points = run_t.get("n_points", 200)
    if not isinstance(n_points, int) or n_points < 2:
        _fail(src, "run", "n_points", "must be an integer >= 2")
    enabled = ora_t.get("enabled", False)
    if not isinstance(enabled, bool):
        _fail(src, "run.oracle", "enabled", "must be true or false")
    oracle = OracleOptions(
        enabled=enabled,
        n_nodes=int(ora_t.get("n_nodes", 128)),
        q_max=_num(src, "run.oracle", ora_t, "q_max", None, positive=True),
        tol=_num(src, "run.oracle", ora_t, "tol", 1e-10, positive=True),
        n_points=int(ora_t.get("n_points", 21)),
        tolerance=_num(src, "run.oracle", ora_t, "tolerance", 1e-3, positive=True),
    )
    run = RunOptions(
        n_points=n_points,
        t_max=_num(src, "run", run_t, "t_max", None, positive=True),
        order=int(order),
        margin=_num(src, "run", run_t, "margin", 0.1, positive=True),
        length=_num(src, "run", run_t, "length", 1e-9, positive=True),
        oracle=oracle,
    )
    return ScenarioConfig(bath_spec, pair, T_sweep, run, species)


def load_config(path, strict=True):
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    return loads_config(text, str(path), strict)


def _channel_table(ch):
    return {
        "label": ch.label,
        "alpha": ch.alpha,
        "beta": ch.beta,
        "length_unit": "m",
        "b_red": [ch.b_red.real, ch.b_red.imag],
        "c_red": [ch.c_red.real, ch.c_red.imag],
        "energy": ch.energy,
        "energy_unit": "J",
    }


def _drop_none(d):
    return {k: (_drop_none(v) if isinstance(v, dict) else v) for k, v in d.items() if v is not None}


def serialize(cfg):
    """TOML text of ``cfg`` in SI units."""
    bath = {"species": cfg.species} if cfg.species else {"m": cfg.bath.m, "m_unit": "kg"}
    bath.update({"M": cfg.bath.M, "M_unit": "kg", "n_gas": cfg.bath.n_gas, "T": cfg.bath.T})
    if cfg.T_sweep:
        bath["T_sweep"] = list(cfg.T_sweep)
    rho = cfg.pair.rho0
    doc = {
        "bath": bath,
        "channels": {"nu": _channel_table(cfg.pair.nu), "nu_prime": _channel_table(cfg.pair.nu_prime)},
        "pair": {"p_nu": cfg.pair.rho0_diag_nu, "p_nup": cfg.pair.rho0_diag_nup,
                 "rho0": [rho.real, rho.imag]},
        "run": _drop_none(asdict(cfg.run)),
    }
    return tomli_w.dumps(doc)
