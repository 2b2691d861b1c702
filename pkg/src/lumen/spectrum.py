"""Flexible-grid spectrum bookkeeping.

Each fiber carries ``slots_per_link`` slots of 12.5 GHz. A slot is free,
dedicated to exactly one reservation, or shared by a set of reservations.
Shared (flexible) slots may be oversubscribed without limit; dedicated ones
are exclusive.

Mutation happens only through :func:`apply_reservation` and
:func:`release_reservation`, which are exact inverses of each other.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping, Sequence

from ._json import digest
from .errors import (
    ConflictingReservation,
    DoubleRelease,
    InvalidArgs,
    NoFeasibleProfile,
    UnknownToken,
)

SLOT_WIDTH_GHZ = 12.5
DEFAULT_SLOTS_PER_LINK = 320


class ReservationClass(str, Enum):
    DEDICATED = "dedicated"
    SHARED = "shared"


@dataclass(frozen=True, order=True)
class SlotRange:
    start: int
    count: int

    @property
    def stop(self) -> int:
        return self.start + self.count

    def slots(self) -> range:
        return range(self.start, self.stop)

    def check(self, slots_per_link: int) -> None:
        if self.count < 1 or self.start < 0 or self.stop > slots_per_link:
            raise InvalidArgs(f"{self} does not fit a {slots_per_link}-slot grid")

    def to_json(self) -> dict[str, int]:
        return {"start": self.start, "count": self.count}


@dataclass(frozen=True)
class TransceiverProfile:
    name: str
    slot_capacity_mbps: int
    max_reach_km: float

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "slot-capacity-mbps": self.slot_capacity_mbps,
            "max-reach-km": self.max_reach_km,
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "TransceiverProfile":
        return cls(str(data["name"]), int(data["slot-capacity-mbps"]), float(data["max-reach-km"]))


# Defaults only: reach-limited modulation choice, not a physical-layer model.
DEFAULT_PROFILES: tuple[TransceiverProfile, ...] = (
    TransceiverProfile("profile-16QAM", 50_000, 500.0),
    TransceiverProfile("profile-QPSK", 25_000, 2_000.0),
)


def check_profile_table(table: Sequence[TransceiverProfile]) -> list[TransceiverProfile]:
    """Return the table sorted by reach; raise unless capacity strictly falls as reach grows."""
    if not table:
        raise InvalidArgs("profile table is empty")
    ordered = sorted(table, key=lambda p: p.max_reach_km)
    for p in ordered:
        if p.slot_capacity_mbps <= 0 or not p.max_reach_km > 0:
            raise InvalidArgs(f"profile {p.name!r} needs positive capacity and reach")
    for lo, hi in zip(ordered, ordered[1:]):
        if not (hi.max_reach_km > lo.max_reach_km and hi.slot_capacity_mbps < lo.slot_capacity_mbps):
            raise InvalidArgs(f"profiles {lo.name!r} and {hi.name!r} are not non-dominated")
    return ordered


def slots_for_demand(
    bitrate_mbps: int,
    path_length_km: float,
    table: Sequence[TransceiverProfile] = DEFAULT_PROFILES,
) -> tuple[int, TransceiverProfile]:
    """Size a demand: pick the densest profile that reaches, then round slots up."""
    if bitrate_mbps <= 0:
        raise InvalidArgs("bitrate must be positive")
    reachable = [p for p in check_profile_table(table) if p.max_reach_km >= path_length_km]
    if not reachable:
        raise NoFeasibleProfile(path_length_km)
    profile = max(reachable, key=lambda p: p.slot_capacity_mbps)
    return -(-bitrate_mbps // profile.slot_capacity_mbps), profile


class SpectrumState:
    """Slot occupancy of one fiber."""

    __slots__ = ("slots_per_link", "dedicated", "shared")

    def __init__(self, slots_per_link: int = DEFAULT_SLOTS_PER_LINK):
        if slots_per_link < 1:
            raise InvalidArgs("slots_per_link must be >= 1")
        self.slots_per_link = slots_per_link
        self.dedicated: dict[int, str] = {}
        self.shared: dict[int, set[str]] = {}

    def is_free(self, slot: int) -> bool:
        return slot not in self.dedicated and slot not in self.shared

    def assignable(self, slot: int, cls: ReservationClass, owner: str | None = None) -> bool:
        if cls is ReservationClass.DEDICATED:
            return self.is_free(slot)
        if slot in self.dedicated:
            return False
        return owner is None or owner not in self.shared.get(slot, ())

    def owners(self, slot: int) -> set[str]:
        if slot in self.dedicated:
            return {self.dedicated[slot]}
        return set(self.shared.get(slot, ()))

    def occupied(self) -> list[int]:
        return sorted(set(self.dedicated) | set(self.shared))

    def to_json(self) -> dict:
        return {
            "dedicated": {str(s): o for s, o in sorted(self.dedicated.items())},
            "shared": {str(s): sorted(o) for s, o in sorted(self.shared.items())},
        }

    @classmethod
    def from_json(cls, data: Mapping, slots_per_link: int) -> "SpectrumState":
        state = cls(slots_per_link)
        state.dedicated = {int(s): o for s, o in data.get("dedicated", {}).items()}
        state.shared = {int(s): set(o) for s, o in data.get("shared", {}).items()}
        return state

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SpectrumState):
            return NotImplemented
        return (
            self.slots_per_link == other.slots_per_link
            and self.dedicated == other.dedicated
            and self.shared == other.shared
        )

    def __repr__(self) -> str:
        return f"SpectrumState(dedicated={self.dedicated}, shared={self.shared})"

    def violations(self) -> list[str]:
        out = []
        for slot in self.dedicated:
            if slot in self.shared:
                out.append(f"slot {slot} both dedicated and shared")
            if not 0 <= slot < self.slots_per_link:
                out.append(f"slot {slot} out of range")
        for slot, owners in self.shared.items():
            if not owners:
                out.append(f"slot {slot} has an empty shared set")
            if not 0 <= slot < self.slots_per_link:
                out.append(f"slot {slot} out of range")
        return out


def first_fit(
    path_links: Sequence[SpectrumState],
    count: int,
    cls: ReservationClass | str,
    owner: str | None = None,
) -> SlotRange | None:
    """Lowest-index range of ``count`` slots assignable on every link of the path."""
    cls = ReservationClass(cls)
    if not path_links:
        raise InvalidArgs("a path needs at least one link")
    total = path_links[0].slots_per_link
    if count < 1 or count > total:
        raise InvalidArgs(f"cannot place {count} slots on a {total}-slot grid")
    run = 0
    for slot in range(total):
        if all(state.assignable(slot, cls, owner) for state in path_links):
            run += 1
            if run == count:
                return SlotRange(slot - count + 1, count)
        else:
            run = 0
    return None


@dataclass(frozen=True)
class ReservationToken:
    id: str
    owner: str
    cls: ReservationClass
    links: tuple[str, ...]
    range: SlotRange

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "owner": self.owner,
            "class": self.cls.value,
            "links": list(self.links),
            "range": self.range.to_json(),
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "ReservationToken":
        return cls(
            data["id"],
            data["owner"],
            ReservationClass(data["class"]),
            tuple(data["links"]),
            SlotRange(data["range"]["start"], data["range"]["count"]),
        )


class SpectrumPool:
    """Spectrum of every fiber plus the registry of reservation tokens."""

    def __init__(self, link_ids: Iterable[str], slots_per_link: int = DEFAULT_SLOTS_PER_LINK):
        self.slots_per_link = slots_per_link
        self.links: dict[str, SpectrumState] = {
            link: SpectrumState(slots_per_link) for link in sorted(link_ids)
        }
        self.live: dict[str, ReservationToken] = {}
        self.released: set[str] = set()
        self.next_token = 1

    def copy(self) -> "SpectrumPool":
        return copy.deepcopy(self)

    def state_json(self) -> dict:
        return {link: state.to_json() for link, state in self.links.items()}

    def occupancy_hash(self) -> str:
        return digest({"slots-per-link": self.slots_per_link, "links": self.state_json()})

    def to_json(self) -> dict:
        return {
            "slots-per-link": self.slots_per_link,
            "links": self.state_json(),
            "live-tokens": [t.to_json() for t in self.live.values()],
            "released-tokens": sorted(self.released),
            "next-token": self.next_token,
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "SpectrumPool":
        pool = cls((), int(data["slots-per-link"]))
        pool.links = {
            link: SpectrumState.from_json(state, pool.slots_per_link)
            for link, state in sorted(data["links"].items())
        }
        pool.live = {t["id"]: ReservationToken.from_json(t) for t in data["live-tokens"]}
        pool.released = set(data["released-tokens"])
        pool.next_token = int(data["next-token"])
        return pool

    def rebuild_from_tokens(self) -> "SpectrumPool":
        """Replay the live tokens onto empty spectrum (used to audit snapshots)."""
        fresh = SpectrumPool(self.links, self.slots_per_link)
        for token in self.live.values():
            for link in token.links:
                state = fresh.links[link]
                for slot in token.range.slots():
                    _occupy(state, slot, token.cls, token.owner)
        return fresh

    def violations(self) -> list[str]:
        out = []
        for link, state in self.links.items():
            out.extend(f"{link}: {msg}" for msg in state.violations())
        return out


def _occupy(state: SpectrumState, slot: int, cls: ReservationClass, owner: str) -> None:
    if cls is ReservationClass.DEDICATED:
        state.dedicated[slot] = owner
    else:
        state.shared.setdefault(slot, set()).add(owner)


def apply_reservation(
    pool: SpectrumPool,
    path_links: Sequence[str],
    slot_range: SlotRange,
    cls: ReservationClass | str,
    owner: str,
) -> ReservationToken:
    """Occupy ``slot_range`` on every link of the path, all or nothing."""
    cls = ReservationClass(cls)
    slot_range.check(pool.slots_per_link)
    if not path_links:
        raise InvalidArgs("a path needs at least one link")
    if len(set(path_links)) != len(path_links):
        raise InvalidArgs("path lists a link twice")
    states = []
    for link in path_links:
        if link not in pool.links:
            raise InvalidArgs(f"unknown link {link!r}")
        states.append(pool.links[link])
    # check everything before touching anything
    for link, state in zip(path_links, states):
        for slot in slot_range.slots():
            if not state.assignable(slot, cls, owner):
                raise ConflictingReservation(
                    f"slot {slot} on {link} cannot take a {cls.value} reservation for {owner!r}"
                )
    for state in states:
        for slot in slot_range.slots():
            _occupy(state, slot, cls, owner)
    token = ReservationToken(f"tok-{pool.next_token}", owner, cls, tuple(path_links), slot_range)
    pool.next_token += 1
    pool.live[token.id] = token
    return token


def release_reservation(pool: SpectrumPool, token: ReservationToken | str) -> None:
    """Undo exactly what :func:`apply_reservation` did for ``token``."""
    token_id = token if isinstance(token, str) else token.id
    if token_id in pool.released:
        raise DoubleRelease(f"token {token_id!r} already released")
    record = pool.live.get(token_id)
    if record is None:
        raise UnknownToken(f"unknown token {token_id!r}")
    for link in record.links:
        state = pool.links[link]
        for slot in record.range.slots():
            if record.cls is ReservationClass.DEDICATED:
                if state.dedicated.get(slot) == record.owner:
                    del state.dedicated[slot]
            else:
                owners = state.shared.get(slot)
                if owners is not None:
                    owners.discard(record.owner)
                    if not owners:
                        del state.shared[slot]
    del pool.live[token_id]
    pool.released.add(token_id)


def bandwidth_ghz(slot_count: int) -> float:
    return slot_count * SLOT_WIDTH_GHZ
