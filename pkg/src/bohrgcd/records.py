"""Instance JSON files and versioned CSV reports.

Big integers are written as decimal strings and rationals as ``"num/den"``
in lowest terms, so files are exact and language neutral.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

from .coppersmith import AgcdInstance, Planted
from .core import DomainError

SCHEMA_LINE = "# schema=v1"


def rational_str(x) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def parse_rational(s: str) -> Fraction:
    if not isinstance(s, str) or s.count("/") != 1:
        raise DomainError(f"expected a 'num/den' string, got {s!r}")
    num, den = s.split("/")
    return Fraction(int(num), int(den))


def _int(s) -> int:
    if not isinstance(s, str):
        raise DomainError(f"expected a decimal string, got {s!r}")
    return int(s)


def instance_to_dict(inst: AgcdInstance) -> dict:
    pl = inst.planted
    return {
        "a0": str(inst.a0),
        "a": [str(x) for x in inst.a],
        "X": [str(x) for x in inst.X],
        "beta": rational_str(inst.beta),
        "planted": None if pl is None else {
            "p": str(pl.p),
            "q": str(pl.q),
            "b": [str(x) for x in pl.b],
            "r": [str(x) for x in pl.r],
        },
    }


def instance_from_dict(d: dict) -> AgcdInstance:
    """Parse and validate; planted consistency is re-checked by the
    :class:`AgcdInstance` constructor."""
    try:
        pl = d.get("planted")
        planted = None
        if pl is not None:
            planted = Planted(_int(pl["p"]), _int(pl["q"]), tuple(map(_int, pl["b"])), tuple(map(_int, pl["r"])))
        return AgcdInstance(
            _int(d["a0"]),
            tuple(map(_int, d["a"])),
            tuple(map(_int, d["X"])),
            parse_rational(d["beta"]),
            planted,
        )
    except (KeyError, TypeError) as exc:
        raise DomainError(f"malformed instance: {exc!r}") from exc


def dumps_instance(inst: AgcdInstance) -> str:
    return json.dumps(instance_to_dict(inst), indent=2) + "\n"


def save_instance(path, inst: AgcdInstance) -> None:
    path = Path(path)
    try:
        path.write_text(dumps_instance(inst))
    except OSError as exc:
        raise OSError(f"cannot write instance file {path}: {exc.strerror}") from exc


def load_instance(path) -> AgcdInstance:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise OSError(f"cannot read instance file {path}: {exc.strerror}") from exc
    try:
        return instance_from_dict(json.loads(text))
    except json.JSONDecodeError as exc:
        raise DomainError(f"{path}: invalid JSON ({exc.msg})") from exc


def instance_digest(inst: AgcdInstance) -> str:
    canon = json.dumps(instance_to_dict(inst), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()[:16]


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, Fraction):
        return rational_str(v)
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (tuple, list)):
        return " ".join(_cell(x) for x in v)
    return str(v)


def format_csv(fields: Sequence[str], rows: Iterable[dict]) -> str:
    buf = io.StringIO()
    buf.write(SCHEMA_LINE + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(fields)
    for row in rows:
        w.writerow([_cell(row.get(f)) for f in fields])
    return buf.getvalue()


def read_csv(text: str) -> list[dict]:
    lines = text.splitlines()
    if not lines or lines[0] != SCHEMA_LINE:
        raise DomainError("missing schema header")
    return list(csv.DictReader(lines[1:]))
