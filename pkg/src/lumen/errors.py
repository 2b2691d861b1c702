"""Exception hierarchy and the shared ``Violation`` record."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any


@dataclass(frozen=True, order=True)
class Violation:
    """A broken invariant, reported as data rather than raised.

    ``rule`` names the invariant (e.g. ``"Irreflexivity"``), ``subject`` the
    offending entity and ``detail`` carries any extra qualifier such as a TP id.
    """

    rule: str
    subject: str
    detail: str = ""

    def to_json(self) -> dict[str, str]:
        return {"rule": self.rule, "subject": self.subject, "detail": self.detail}

    def __str__(self) -> str:
        if self.detail:
            return f"{self.rule}({self.subject}, {self.detail})"
        return f"{self.rule}({self.subject})"


class LumenError(Exception):
    """Base class for every error raised by this package."""

    #: machine-readable error name used on the wire
    code = "LumenError"

    def payload(self) -> dict[str, Any]:
        return {"error": self.code, "message": str(self)}


# --- documents -------------------------------------------------------------


class MalformedDocument(LumenError):
    code = "MalformedDocument"


class SchemaViolation(LumenError):
    code = "SchemaViolation"

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path
        self.message = message

    def payload(self) -> dict[str, Any]:
        return {"error": self.code, "path": self.path, "message": self.message}


class DuplicateKey(LumenError):
    code = "DuplicateKey"

    def __init__(self, path: str, key: str):
        super().__init__(f"{path}: duplicate key {key!r}")
        self.path = path
        self.key = key

    def payload(self) -> dict[str, Any]:
        return {"error": self.code, "path": self.path, "key": self.key}


# --- physical topology -----------------------------------------------------


class TopologyError(LumenError):
    """Raised by the physical topology loader; carries the violations found."""

    code = "InvalidTopology"

    def __init__(self, message: str, violations: list[Violation] | None = None):
        super().__init__(message)
        self.violations = list(violations or [])

    def payload(self) -> dict[str, Any]:
        return {
            "error": self.code,
            "message": str(self),
            "violations": [v.to_json() for v in self.violations],
        }


class DanglingReference(TopologyError):
    code = "DanglingReference"


class DuplicateId(TopologyError):
    code = "DuplicateId"


class InvalidAttachment(TopologyError):
    code = "InvalidAttachment"


class InvalidTopology(TopologyError):
    code = "InvalidTopology"


# --- graph / path computation ----------------------------------------------


class UnknownNode(LumenError):
    code = "UnknownNode"


class InvalidArgs(LumenError):
    code = "InvalidArgs"


# --- spectrum --------------------------------------------------------------


class NoFeasibleProfile(LumenError):
    code = "NoFeasibleProfile"

    def __init__(self, path_length_km: float, pair: tuple[str, str] | None = None):
        where = f" for pair {pair[0]}-{pair[1]}" if pair else ""
        super().__init__(f"no transceiver profile reaches {path_length_km:g} km{where}")
        self.path_length_km = path_length_km
        self.pair = pair

    def payload(self) -> dict[str, Any]:
        return {
            "error": self.code,
            "message": str(self),
            "pair": list(self.pair) if self.pair else None,
            "path-length-km": self.path_length_km,
        }


class ConflictingReservation(LumenError):
    code = "ConflictingReservation"


class UnknownToken(LumenError):
    code = "UnknownToken"


class DoubleRelease(LumenError):
    code = "DoubleRelease"


# --- virtual topology creation ---------------------------------------------


class AlreadyInstalled(LumenError):
    code = "AlreadyInstalled"


class InfeasiblePaths(LumenError):
    code = "InfeasiblePaths"

    def __init__(self, pair: tuple[str, str], needed: int, found: int):
        super().__init__(f"pair {pair[0]}-{pair[1]} needs {needed} paths, found {found}")
        self.pair = pair
        self.needed = needed
        self.found = found

    def payload(self) -> dict[str, Any]:
        return {
            "error": self.code,
            "message": str(self),
            "pair": list(self.pair),
            "needed": self.needed,
            "found": self.found,
        }


class InsufficientSpectrum(LumenError):
    code = "InsufficientSpectrum"

    def __init__(self, pair: tuple[str, str], links: list[str]):
        super().__init__(
            f"no continuous free spectrum for pair {pair[0]}-{pair[1]} on path {'/'.join(links)}"
        )
        self.pair = pair
        self.links = list(links)

    def payload(self) -> dict[str, Any]:
        return {
            "error": self.code,
            "message": str(self),
            "pair": list(self.pair),
            "path": self.links,
        }


class RequestRejected(LumenError):
    """A request failed validation against the client's endpoint assignment."""

    code = "InvalidRequest"

    def __init__(self, violations: list[Violation]):
        super().__init__("; ".join(str(v) for v in violations))
        self.violations = list(violations)

    def payload(self) -> dict[str, Any]:
        return {
            "error": self.code,
            "message": str(self),
            "violations": [v.to_json() for v in self.violations],
        }


class ActiveConnectionsExist(LumenError):
    code = "ActiveConnectionsExist"


# --- client view -----------------------------------------------------------


class UnknownTopology(LumenError):
    code = "UnknownTopology"


class UnknownLink(LumenError):
    code = "UnknownLink"


class UnknownConnection(LumenError):
    code = "UnknownConnection"


class AlreadyDeleted(LumenError):
    code = "AlreadyDeleted"


class CapExceeded(LumenError):
    code = "CapExceeded"

    def __init__(self, intent_id: str, cap: int):
        super().__init__(f"intent {intent_id!r} already has {cap} active connections")
        self.intent_id = intent_id
        self.cap = cap

    def payload(self) -> dict[str, Any]:
        return {"error": self.code, "message": str(self), "intent-id": self.intent_id, "cap": self.cap}


# --- service ---------------------------------------------------------------


class CorruptSnapshot(LumenError):
    code = "CorruptSnapshot"

    def __init__(self, validator: str, message: str):
        super().__init__(f"{validator}: {message}")
        self.validator = validator


class ConfigError(LumenError):
    code = "ConfigError"


class BindFailure(LumenError):
    code = "BindFailure"
