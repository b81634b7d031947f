"""Label algebra for the monitored interpreter.

Three label shapes exist:

* Pure(e)  -- a plain lattice element
* Star(e)  -- partially leaked; e is a lower bound on the pure labels the
  value may carry in alternate executions
* Prod(p)  -- per-principal label over {L, H, P}, used only by the
  product (per-principal) permissive-upgrade strategy

Pure/Star never mix with Prod in one execution.  The program counter
label is always pure (a Pure element, or a Prod without any P).
"""

from __future__ import annotations

from dataclasses import dataclass


class LabelError(ValueError):
    pass


class MixedLabelFamilies(LabelError):
    pass


class ProdNotSupported(LabelError):
    pass


@dataclass(frozen=True)
class Label:
    pass


@dataclass(frozen=True)
class Pure(Label):
    elem: str


@dataclass(frozen=True)
class Star(Label):
    elem: str


@dataclass(frozen=True)
class Prod(Label):
    parts: tuple  # each part is "L", "H" or "P"

    def __post_init__(self):
        if not self.parts or any(p not in ("L", "H", "P") for p in self.parts):
            raise LabelError(f"bad product label {self.parts!r}")


def is_pure(k):
    """True for Pure labels and Prod labels with no P component."""
    if isinstance(k, Pure):
        return True
    if isinstance(k, Star):
        return False
    if isinstance(k, Prod):
        return "P" not in k.parts
    raise LabelError(f"not a label: {k!r}")


def pure_bound(k):
    """The lattice element under a Pure or Star label."""
    if isinstance(k, (Pure, Star)):
        return k.elem
    raise ProdNotSupported(f"no pure bound for product label {k!r}")


def _part_join(a, b):
    if "P" in (a, b):
        return "P"
    if "H" in (a, b):
        return "H"
    return "L"


def label_join(lat, k1, k2):
    """Join of two labels of the same family.

    Pure x Pure is pure; any starred operand makes the result starred,
    with the underlying elements joined in the lattice.  Products join
    pointwise with P absorbing.
    """
    if isinstance(k1, Prod) and isinstance(k2, Prod):
        if len(k1.parts) != len(k2.parts):
            raise MixedLabelFamilies("product labels of different arity")
        return Prod(tuple(_part_join(a, b) for a, b in zip(k1.parts, k2.parts)))
    if isinstance(k1, (Pure, Star)) and isinstance(k2, (Pure, Star)):
        e = lat.join(k1.elem, k2.elem)
        if isinstance(k1, Pure) and isinstance(k2, Pure):
            return Pure(e)
        return Star(e)
    raise MixedLabelFamilies(f"cannot join {k1!r} with {k2!r}")


def format_label(k):
    if isinstance(k, Pure):
        return k.elem
    if isinstance(k, Star):
        return k.elem + "*"
    if isinstance(k, Prod):
        return ",".join(k.parts)
    raise LabelError(f"not a label: {k!r}")


def parse_label(text):
    """Parse a label token: `H`, `M2*`, or a comma list like `H,P`."""
    text = text.strip()
    if not text:
        raise LabelError("empty label")
    if "," in text:
        return Prod(tuple(p.strip() for p in text.split(",")))
    if text.endswith("*"):
        return Star(text[:-1])
    return Pure(text)
