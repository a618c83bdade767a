"""Exception hierarchy shared by all rxngraph modules."""

from __future__ import annotations


class RxnGraphError(Exception):
    """Base class for data errors raised by rxngraph."""


class SmilesSyntaxError(RxnGraphError, ValueError):
    """Malformed SMILES text. ``offset`` is the byte offset of the problem."""

    def __init__(self, message: str, offset: int, text: str = ""):
        self.offset = offset
        self.text = text
        super().__init__(f"{message} at offset {offset}")


class UnsupportedFeature(RxnGraphError, ValueError):
    """Valid SMILES that uses a feature outside the supported subset."""

    def __init__(self, token: str, offset: int):
        self.token = token
        self.offset = offset
        super().__init__(f"unsupported SMILES feature {token!r} at offset {offset}")


class RecordError(RxnGraphError, ValueError):
    """A reaction record violates a structural invariant."""


class NoMappingError(RxnGraphError):
    """No atom-map index is shared between the two sides of a reaction."""


class NotAReactant(RxnGraphError):
    pass


class NotBinary(RxnGraphError):
    pass


class ValenceOverflow(RxnGraphError):
    pass


class RadiusTooLarge(RxnGraphError, ValueError):
    pass


class VariantMismatch(RxnGraphError, ValueError):
    pass


class EmptyInput(RxnGraphError):
    pass


class FormatVersionError(RxnGraphError):
    pass


class ChecksumError(RxnGraphError):
    pass


class _LookupError(RxnGraphError, KeyError):
    # KeyError quotes its message; keep the plain text
    def __str__(self) -> str:
        return str(self.args[0]) if self.args else ""


class UnknownNode(_LookupError):
    pass


class UnknownMolecule(_LookupError):
    pass


class OddLength(RxnGraphError, ValueError):
    pass


class NotComplementary(RxnGraphError, ValueError):
    pass
