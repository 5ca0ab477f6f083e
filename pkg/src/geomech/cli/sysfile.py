"""Loader for system-definition files.

The dialect is a strict INI subset::

    # comment
    [system]
    dim = 3
    coords = ["q1", "q2", "q3"]
    params = ["k"]
    k = 1.0

    [lagrangian]
    L = "1/2*(q1_t^2 + q2_t^2 + q3_t^2) + k/(q1^2 + q2^2 + q3^2)^(1/2)"

Values are numbers, quoted strings or bracketed lists of those.
"""
from __future__ import annotations

import ast
import hashlib
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from ..symcore import CoordSystem, Expr, ParseError, parse

SECTION = re.compile(r"^\[([A-Za-z_][\w-]*)(?:\.([\w-]+))?\]$")
KEY = re.compile(r"^([A-Za-z_]\w*)\s*=\s*(.*)$")

# allowed keys per section kind; [system] also takes one value line per parameter
KEYS = {
    "system": {"dim", "coords", "momenta", "params", "time"},
    "lagrangian": {"L"},
    "hamiltonian": {"H"},
    "equation": {"xi", "E"},
    "frame": {"Gamma"},
    "change": {"forward", "inverse"},
    "mass": {"m"},
    "force": {"f"},
    "symmetry": {"ut", "u", "sigma"},
    "gauge": {"chi", "chi_t", "chi_tt"},
    "integrals": None,          # free names
    "simulate": {"q0", "v0", "p0", "t0", "tmax", "step", "stride"},
}
NAMED = {"frame", "change", "symmetry", "gauge"}
TARGETS = ("lagrangian", "hamiltonian", "equation")


class SystemFileError(ValueError):
    def __init__(self, message: str, line: Optional[int] = None, path: str = ""):
        where = f"{path}:{line}: " if line else (f"{path}: " if path else "")
        super().__init__(where + message)
        self.line = line


@dataclass
class Entry:
    value: object
    line: int


@dataclass
class SystemFile:
    path: str
    digest: str
    cs: CoordSystem
    target: str                                     # lagrangian, hamiltonian or equation
    sections: dict = field(default_factory=dict)    # (kind, name) -> {key: Entry}

    def section(self, kind: str, name: str = "") -> dict:
        return self.sections.get((kind, name), {})

    def named(self, kind: str) -> dict:
        return {n: s for (k, n), s in sorted(self.sections.items()) if k == kind}

    def value(self, kind: str, key: str, default=None, name: str = ""):
        e = self.section(kind, name).get(key)
        return default if e is None else e.value

    def expr(self, kind: str, key: str, name: str = "") -> Expr:
        return self._parse(self.section(kind, name)[key], kind, key)

    def exprs(self, kind: str, key: str, name: str = "", length: Optional[int] = None) -> tuple:
        e = self.section(kind, name)[key]
        items = e.value if isinstance(e.value, list) else [e.value]
        if length is not None and len(items) != length:
            raise SystemFileError(f"{key} needs {length} entries, got {len(items)}", e.line, self.path)
        return tuple(self._parse(Entry(x, e.line), kind, key) for x in items)

    def _parse(self, e: Entry, kind: str, key: str) -> Expr:
        return _parse_expr(e, self.cs, self.path)


def _parse_expr(e: Entry, cs: CoordSystem, path: str) -> Expr:
    v = e.value
    if isinstance(v, (int, float)):
        return Expr.coerce(v) if isinstance(v, int) else parse(repr(v), cs)
    if not isinstance(v, str):
        raise SystemFileError(f"expected an expression, got {v!r}", e.line, path)
    try:
        return parse(v, cs)
    except ParseError as exc:
        raise SystemFileError(str(exc), e.line, path) from None


def _value(text: str, line: int, path: str):
    text = text.strip()
    if not text:
        raise SystemFileError("missing value", line, path)
    try:
        v = ast.literal_eval(text)
    except (ValueError, SyntaxError):
        raise SystemFileError(f"cannot read value {text!r}", line, path) from None
    if isinstance(v, tuple):
        v = list(v)
    ok = (int, float, str)
    if isinstance(v, bool) or not (isinstance(v, ok) or
                                   (isinstance(v, list) and all(isinstance(x, ok) and not isinstance(x, bool)
                                                                for x in v))):
        raise SystemFileError(f"unsupported value {text!r}", line, path)
    return v


def _strip_comment(line: str) -> str:
    out = []
    quote = None
    for ch in line:
        if quote:
            if ch == quote:
                quote = None
        elif ch in "\"'":
            quote = ch
        elif ch == "#":
            break
        out.append(ch)
    return "".join(out).strip()


def _header_line(text: str, kind: str) -> Optional[int]:
    for no, raw in enumerate(text.splitlines(), 1):
        m = SECTION.match(_strip_comment(raw))
        if m and m.group(1) == kind:
            return no
    return None


def read_sections(text: str, path: str = "") -> dict:
    sections: dict = {}
    current = None
    for no, raw in enumerate(text.splitlines(), 1):
        line = _strip_comment(raw)
        if not line:
            continue
        m = SECTION.match(line)
        if m:
            kind, name = m.group(1), m.group(2) or ""
            if kind not in KEYS:
                raise SystemFileError(f"unknown section [{line[1:-1]}]", no, path)
            if (kind in NAMED) != bool(name):
                need = "needs" if kind in NAMED else "takes no"
                raise SystemFileError(f"section [{kind}] {need} a .NAME suffix", no, path)
            current = (kind, name)
            if current in sections:
                raise SystemFileError(f"duplicate section [{line[1:-1]}]", no, path)
            sections[current] = {}
            continue
        m = KEY.match(line)
        if not m:
            raise SystemFileError(f"expected 'key = value', got {line!r}", no, path)
        if current is None:
            raise SystemFileError("key outside of any section", no, path)
        key = m.group(1)
        if key in sections[current]:
            raise SystemFileError(f"duplicate key {key!r}", no, path)
        sections[current][key] = Entry(_value(m.group(2), no, path), no)
    return sections


def _names(e: Optional[Entry], path: str, what: str) -> tuple:
    if e is None:
        return ()
    v = e.value if isinstance(e.value, list) else [e.value]
    if not all(isinstance(x, str) and re.fullmatch(r"[A-Za-z]\w*", x) for x in v):
        raise SystemFileError(f"{what} must be a list of names", e.line, path)
    return tuple(v)


def _coord_system(sec: dict, path: str) -> CoordSystem:
    dim_e = sec.get("dim")
    coords = _names(sec.get("coords"), path, "coords")
    if dim_e is None and not coords:
        raise SystemFileError("[system] needs dim or coords", None, path)
    if dim_e is not None:
        if not isinstance(dim_e.value, int) or dim_e.value < 1:
            raise SystemFileError("dim must be a positive integer", dim_e.line, path)
        if coords and len(coords) != dim_e.value:
            raise SystemFileError("dim does not match the number of coords", dim_e.line, path)
        if not coords:
            coords = tuple(f"q{i + 1}" for i in range(dim_e.value))
    momenta = _names(sec.get("momenta"), path, "momenta") or tuple(f"p{i + 1}" for i in range(len(coords)))
    if len(momenta) != len(coords):
        raise SystemFileError("need one momentum name per coordinate", sec["momenta"].line, path)
    params = _names(sec.get("params"), path, "params")
    values = {}
    for key, e in sec.items():
        if key in KEYS["system"]:
            continue
        if key not in params:
            raise SystemFileError(f"unknown key {key!r} in [system]", e.line, path)
        if isinstance(e.value, bool) or not isinstance(e.value, (int, float)):
            raise SystemFileError(f"parameter {key} needs a numeric value", e.line, path)
        values[key] = float(e.value)
    time = sec["time"].value if "time" in sec else "t"
    try:
        return CoordSystem(coords, momenta, tuple((p, values.get(p)) for p in params), str(time))
    except ValueError as exc:
        raise SystemFileError(str(exc), None, path) from None


def load_text(text: str, path: str = "<string>") -> SystemFile:
    sections = read_sections(text, path)
    if ("system", "") not in sections:
        raise SystemFileError("missing [system] section", None, path)
    for (kind, name), sec in sections.items():
        allowed = KEYS[kind]
        if allowed is None:
            continue
        for key, e in sec.items():
            if kind != "system" and key not in allowed:
                raise SystemFileError(f"unknown key {key!r} in [{kind}{'.' + name if name else ''}]",
                                      e.line, path)
    cs = _coord_system(sections[("system", "")], path)
    targets = [k for k in TARGETS if (k, "") in sections]
    if len(targets) != 1:
        raise SystemFileError("exactly one of [lagrangian], [hamiltonian], [equation] is required",
                              _header_line(text, targets[1]) if targets else None, path)
    digest = hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]
    sf = SystemFile(path, digest, cs, targets[0], sections)
    _validate(sf)
    return sf


def load_system(path) -> SystemFile:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise SystemFileError(f"cannot read file: {exc.strerror}", None, str(path)) from None
    return load_text(text, str(path))


def _validate(sf: SystemFile) -> None:
    """Parse every expression once so that errors surface at load time."""
    for (kind, name), sec in sf.sections.items():
        if kind in ("system", "simulate"):
            continue
        for key, e in sec.items():
            if kind == "symmetry" and key == "ut":
                if e.value not in (0, 1):
                    raise SystemFileError("ut must be 0 or 1", e.line, sf.path)
                continue
            items = e.value if isinstance(e.value, list) else [e.value]
            for x in items:
                _parse_expr(Entry(x, e.line), sf.cs, sf.path)
    target = sf.section(sf.target)
    if not target:
        raise SystemFileError(f"[{sf.target}] is empty", None, sf.path)
    if sf.target == "equation" and len(target) != 1:
        raise SystemFileError("[equation] takes either xi or E, not both", None, sf.path)
