"""Scenario files: sectioned key-value plain text, UTF-8, # comments.

A key's section is everything before its last dot (`fault.lambda_phi` lives
in `[fault]`).  Every key has a shipped default, so an empty file is the
nominal cruise/climb scenario; parsing validates each value and names the
offending key on failure.
"""

from __future__ import annotations

from .engine import ScenarioConfig
from .errors import ParameterDomain, ParseError, ValidationError
from .vehicle import DisturbanceChannel, SinusoidTerm

_BOOL = {"true": True, "false": False, "1": True, "0": False,
         "yes": True, "no": False}


def _parse_float(key, s):
    try:
        return float(s)
    except ValueError:
        raise ValidationError(f"{key}: expected a number, got {s!r}",
                              key=key, constraint="float") from None


def _parse_int(key, s):
    try:
        return int(s)
    except ValueError:
        raise ValidationError(f"{key}: expected an integer, got {s!r}",
                              key=key, constraint="int") from None


def _parse_bool(key, s):
    try:
        return _BOOL[s.strip().lower()]
    except KeyError:
        raise ValidationError(f"{key}: expected true/false, got {s!r}",
                              key=key, constraint="bool") from None


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


# (dotted key, attribute path from the ScenarioConfig root, type tag)
_SCALAR_KEYS = []


def _add(prefix, obj_path, fields, kind="float"):
    for f in fields:
        _SCALAR_KEYS.append((f"{prefix}.{f}", obj_path + (f,), kind))


_add("scenario", (), ["duration", "dt", "log_every", "divergence_ceiling"])
_SCALAR_KEYS.append(("scenario.variant", ("variant",), "str"))
_add("scenario", (), ["strict_ppc", "small_angle_hdot", "divide_by_g_theta"],
     "bool")
_add("initial", ("initial",), ["v_err", "h_err", "gamma", "Q"])
_SCALAR_KEYS.append(("initial.theta", ("initial", "theta"), "trim"))
_add("reference", ("reference",), ["v0", "v1", "omega_v", "h0", "h1", "omega_h"])
_add("aero", ("aero",), [
    "v_ref", "gv0", "gv1", "gv2", "fv_a0", "fv_a1", "fv_a2", "fv_exp",
    "fv_grav", "gh0", "gh1", "gg0", "gg1", "gg2", "fg_b0", "fg_b1", "fg_exp",
    "fg_grav", "gt0", "gt1", "gt2", "ft_c0", "ft_c1", "ft_c2", "ft_exp",
    "gq0", "gq1", "gq2", "fq_d0", "fq_d1", "fq_d2", "fq_exp",
    "zeta1", "zeta2", "zeta3", "omega1", "omega2", "omega3",
    "n1_alpha", "n1_phi", "n1_delta", "n2_alpha", "n2_phi", "n2_delta",
    "n3_alpha", "n3_phi", "n3_delta", "g_floor"])
_add("aero.envelope", ("aero", "envelope"), [
    "v_min", "v_max", "h_min", "h_max", "gamma_min", "gamma_max",
    "theta_min", "theta_max", "q_min", "q_max"])
_add("uncertainty", ("uncertainty",), ["v", "gamma", "theta", "q"])
_add("fault", ("fault",), ["lambda_phi", "f_phi", "lambda_delta", "f_delta",
                           "t_fault"])
_add("actuator", ("actuator",), ["phi_min", "phi_max", "delta_min",
                                 "delta_max", "phi_cmd_min", "phi_cmd_max",
                                 "delta_cmd_min", "delta_cmd_max"])
_add("gains", ("gains",), [
    "kv1", "kv2", "kv3", "kv4", "lam_v1", "lam_v2", "l_v1", "l_v2",
    "kh1", "kh2", "kh3", "kh4", "lam_h1", "lam_h2", "lam_h3", "lam_h4",
    "l_h1", "l_h2", "kg1", "kg2", "kg3", "lam_g1", "lam_g2", "lam_g3",
    "lam_g4", "l_g1", "l_g2", "kt1", "kt2", "kt3", "lam_t1", "lam_t2",
    "lam_t3", "lam_t4", "lam_t5", "l_t1", "l_t2", "kq1", "kq2", "kq3",
    "lam_q1", "l_q2", "l_q3", "tau_1", "tau_2", "tau_3"])
_SCALAR_KEYS.append(("gains.r", ("gains", "r"), "int"))
_add("vlimits", ("vlimits",), ["gamma_max", "theta_max", "q_max"])
_add("transform.velocity", ("transform_v",), ["beta", "a_exp", "mu", "T_p"])
_add("transform.altitude", ("transform_h",), ["beta", "a_exp", "mu", "T_p"])
_add("performance.velocity", ("perf_v",), ["xi_a", "xi_b", "T_s", "n"])
_add("performance.altitude", ("perf_h",), ["xi_a", "xi_b", "T_s", "n"])
_add("tracker", ("tracker",), ["d_h", "d_gamma", "eta0", "eta1", "eta2",
                               "eta3"])
_add("nn", ("nn",), ["alpha1", "beta1", "k_leak", "width_factor"])
_SCALAR_KEYS.append(("nn.nodes_per_dim", ("nn", "nodes_per_dim"), "int"))
for ch in ("v", "h", "gamma", "theta", "q"):
    _add(f"nn.{ch}", ("nn", ch), ["l1", "l2", "l3", "gamma_w"])
_add("acceptance", ("acceptance",), ["smooth_sign_c"])

_KEY_MAP = {key: (path, kind) for key, path, kind in _SCALAR_KEYS}

_DIST_CHANNELS = {"V": "V", "h": "h", "gamma": "gamma", "theta": "theta",
                  "Q": "Q"}
_MAX_SIN = 3


def known_keys() -> list[str]:
    keys = list(_KEY_MAP)
    for ch in _DIST_CHANNELS:
        keys.append(f"disturbance.{ch}.const")
        for i in range(1, _MAX_SIN + 1):
            keys.append(f"disturbance.{ch}.sin{i}")
    return keys


def _get_path(cfg, path):
    obj = cfg
    for name in path:
        obj = getattr(obj, name)
    return obj


def _set_path(cfg, path, value):
    obj = cfg
    for name in path[:-1]:
        obj = getattr(obj, name)
    setattr(obj, path[-1], value)


def _set_key(cfg: ScenarioConfig, key: str, raw: str) -> None:
    raw = raw.strip()
    if key in _KEY_MAP:
        path, kind = _KEY_MAP[key]
        if kind == "float":
            value = _parse_float(key, raw)
        elif kind == "int":
            value = _parse_int(key, raw)
        elif kind == "bool":
            value = _parse_bool(key, raw)
        elif kind == "trim":
            value = None if raw.lower() == "trim" else _parse_float(key, raw)
        else:
            value = raw
        _set_path(cfg, path, value)
        return
    parts = key.split(".")
    if len(parts) == 3 and parts[0] == "disturbance" and parts[1] in _DIST_CHANNELS:
        ch: DisturbanceChannel = getattr(cfg.disturbance, _DIST_CHANNELS[parts[1]])
        if parts[2] == "const":
            ch.const = _parse_float(key, raw)
            return
        if parts[2].startswith("sin") and parts[2][3:].isdigit():
            idx = int(parts[2][3:])
            if 1 <= idx <= _MAX_SIN:
                if raw.lower() in ("", "none", "off"):
                    term = None
                else:
                    pieces = [p.strip() for p in raw.split(",")]
                    if len(pieces) not in (2, 3):
                        raise ValidationError(
                            f"{key}: expected 'amplitude,frequency[,phase]', got {raw!r}",
                            key=key, constraint="amp,freq[,phase]")
                    nums = [_parse_float(key, p) for p in pieces]
                    if len(nums) == 2:
                        nums.append(0.0)
                    term = SinusoidTerm(*nums)
                while len(ch.terms) < idx:
                    ch.terms.append(SinusoidTerm(0.0, 0.0, 0.0))
                if term is None:
                    ch.terms[idx - 1] = SinusoidTerm(0.0, 0.0, 0.0)
                else:
                    ch.terms[idx - 1] = term
                return
    raise ValidationError(f"unknown configuration key {key!r}", key=key,
                          constraint="known key")


def parse_text(text: str) -> dict[str, str]:
    """Sectioned key-value text to a flat {dotted key: raw value} dict."""
    flat: dict[str, str] = {}
    section = ""
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if stripped.startswith("["):
            if not stripped.endswith("]"):
                raise ParseError(f"line {lineno}: malformed section header "
                                 f"{line.strip()!r}", line=lineno)
            section = stripped[1:-1].strip()
            continue
        if "=" not in stripped:
            raise ParseError(f"line {lineno}: expected key = value, got "
                             f"{line.strip()!r}", line=lineno)
        name, _, value = stripped.partition("=")
        key = f"{section}.{name.strip()}" if section else name.strip()
        flat[key] = value.strip()
    return flat


def parse_config(text: str) -> ScenarioConfig:
    """Build a validated ScenarioConfig; absent keys take shipped defaults."""
    cfg = ScenarioConfig()
    for key, raw in parse_text(text).items():
        _set_key(cfg, key, raw)
    try:
        cfg.validate()
    except ParameterDomain as exc:
        raise ValidationError(str(exc), constraint=str(exc)) from exc
    return cfg


def apply_overrides(cfg: ScenarioConfig, overrides: list[str]) -> ScenarioConfig:
    """Apply `key=value` strings in order, then re-validate."""
    for item in overrides:
        if "=" not in item:
            raise ValidationError(f"override {item!r} is not key=value",
                                  key=item, constraint="key=value")
        key, _, value = item.partition("=")
        _set_key(cfg, key.strip(), value.strip())
    cfg.validate()
    return cfg


def config_to_flat(cfg: ScenarioConfig) -> dict[str, str]:
    flat = {}
    for key, (path, kind) in _KEY_MAP.items():
        value = _get_path(cfg, path)
        if kind == "trim":
            flat[key] = "trim" if value is None else _fmt(float(value))
        elif kind == "bool":
            flat[key] = _fmt(bool(value))
        else:
            flat[key] = _fmt(value)
    for ch_key, attr in _DIST_CHANNELS.items():
        ch: DisturbanceChannel = getattr(cfg.disturbance, attr)
        flat[f"disturbance.{ch_key}.const"] = _fmt(float(ch.const))
        for i in range(1, _MAX_SIN + 1):
            term = (ch.terms[i - 1] if i <= len(ch.terms)
                    else SinusoidTerm(0.0, 0.0, 0.0))
            flat[f"disturbance.{ch_key}.sin{i}"] = (
                f"{_fmt(float(term.amplitude))},{_fmt(float(term.frequency))},"
                f"{_fmt(float(term.phase))}")
    return flat


def serialize_config(cfg: ScenarioConfig) -> str:
    """Canonical text form; parse_config(serialize_config(cfg)) round-trips."""
    flat = config_to_flat(cfg)
    sections: dict[str, list[tuple[str, str]]] = {}
    for key, value in flat.items():
        section, _, name = key.rpartition(".")
        sections.setdefault(section, []).append((name, value))
    lines = []
    for section in sorted(sections):
        lines.append(f"[{section}]")
        for name, value in sorted(sections[section]):
            lines.append(f"{name} = {value}")
        lines.append("")
    return "\n".join(lines)
