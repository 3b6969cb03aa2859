"""Field definition files: TOML with polynomial, units and class data."""

from __future__ import annotations

import sys
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .nf import FieldError, IdealHNF, NumberFieldCtx
from .units import ClassGroupData, UnitGroupData

BUNDLED = ("q", "q_i", "q_sqrt2", "q_sqrt_m5", "cubic23", "zeta8")


@dataclass
class Field:
    """A loaded field: context plus verified unit and class-group data."""

    ctx: NumberFieldCtx
    units: UnitGroupData
    class_data: ClassGroupData

    @property
    def name(self):
        return self.ctx.name


def _build(data, dps=40):
    try:
        coeffs = data["poly"]
        name = data.get("name", "F")
        udata = data["units"]
        reps = data["class_reps"]
    except KeyError as exc:
        raise FieldError(f"field file missing key: {exc}")
    ctx = NumberFieldCtx(coeffs, name=name, dps=dps)
    units = UnitGroupData(
        ctx,
        zeta=ctx.elem(udata["zeta"]),
        zeta_order=int(udata["zeta_order"]),
        fundamental_units=[ctx.elem(u) for u in udata["fundamental"]],
    )
    class_data = ClassGroupData(
        ctx,
        representatives=[IdealHNF(ctx, r["num"], r.get("den", 1)).canonical() for r in reps],
    )
    class_data.validate()
    if not any(R == ctx.ideal_one() for R in class_data.representatives):
        raise FieldError("class representatives must include O_F")
    return Field(ctx=ctx, units=units, class_data=class_data)


def load_field(name_or_path, dps=40):
    """Load a bundled field by short name or any field file by path."""
    p = Path(str(name_or_path))
    if p.suffix == ".toml" and p.exists():
        raw = p.read_bytes()
    elif str(name_or_path) in BUNDLED:
        raw = resources.files("nfsums.fields").joinpath(f"{name_or_path}.toml").read_bytes()
    elif p.exists():
        raw = p.read_bytes()
    else:
        raise FieldError(
            f"unknown field {name_or_path!r}; bundled fields: {', '.join(BUNDLED)}"
        )
    try:
        data = tomllib.loads(raw.decode())
    except tomllib.TOMLDecodeError as exc:
        raise FieldError(f"cannot parse field file {name_or_path}: {exc}")
    return _build(data, dps=dps)
