"""Service configuration file and engine bootstrap.

Example::

    {
      "listen": "127.0.0.1",
      "port": 8040,
      "physical-topology": "six_node.json",
      "provider-constraints": "constraints.json",
      "slots-per-link": 320,
      "profiles": [{"name": "profile-16QAM", "slot-capacity-mbps": 50000, "max-reach-km": 500}],
      "snapshot": "state/lumen.snapshot"
    }

Relative paths resolve against the directory of the config file. ``profiles``,
``slots-per-link`` and ``snapshot`` are optional.
"""

from __future__ import annotations

import logging
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

from .._json import loads_strict
from ..errors import ConfigError, LumenError
from ..phys import load_physical_topology
from ..spectrum import DEFAULT_PROFILES, DEFAULT_SLOTS_PER_LINK, TransceiverProfile, check_profile_table
from ..vtc import parse_constraints
from .hypervisor import Hypervisor

log = logging.getLogger(__name__)

CONFIG_ENV = "LUMEN_CONFIG"
_KEYS = {"listen", "port", "physical-topology", "provider-constraints", "slots-per-link", "profiles", "snapshot"}


@dataclass
class ServiceConfig:
    physical_topology: Path
    provider_constraints: Path
    listen: str = "127.0.0.1"
    port: int = 8040
    profiles: tuple[TransceiverProfile, ...] = field(default=DEFAULT_PROFILES)
    slots_per_link: int = DEFAULT_SLOTS_PER_LINK
    snapshot: Path | None = None

    @classmethod
    def load(cls, path: str | os.PathLike) -> "ServiceConfig":
        path = Path(path)
        try:
            raw = loads_strict(path.read_bytes())
        except OSError as exc:
            raise ConfigError(f"cannot read {path}: {exc}") from None
        except LumenError as exc:
            raise ConfigError(f"{path}: {exc}") from None
        if not isinstance(raw, dict):
            raise ConfigError(f"{path}: expected an object")
        unknown = set(raw) - _KEYS
        if unknown:
            raise ConfigError(f"{path}: unknown keys {sorted(unknown)}")
        base = path.parent
        try:
            profiles = tuple(TransceiverProfile.from_json(p) for p in raw.get("profiles", ()))
            config = cls(
                physical_topology=base / raw["physical-topology"],
                provider_constraints=base / raw["provider-constraints"],
                listen=str(raw.get("listen", "127.0.0.1")),
                port=int(raw.get("port", 8040)),
                profiles=profiles or DEFAULT_PROFILES,
                slots_per_link=int(raw.get("slots-per-link", DEFAULT_SLOTS_PER_LINK)),
                snapshot=base / raw["snapshot"] if raw.get("snapshot") else None,
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"{path}: bad value ({type(exc).__name__}: {exc})") from None
        config.check()
        return config

    def check(self) -> None:
        if self.slots_per_link < 1:
            raise ConfigError("slots-per-link must be >= 1")
        try:
            check_profile_table(self.profiles)
        except LumenError as exc:
            raise ConfigError(str(exc)) from None
        for p in (self.physical_topology, self.provider_constraints):
            if not p.is_file():
                raise ConfigError(f"missing file {p}")


def build_engine(config: ServiceConfig) -> Hypervisor:
    """Load the referenced files and restore the snapshot if one exists.

    Raises:
        CorruptSnapshot: the snapshot exists but cannot be trusted.
    """
    topo = load_physical_topology(config.physical_topology)
    constraints = parse_constraints(config.provider_constraints.read_bytes())
    if config.snapshot is not None and config.snapshot.exists():
        log.info("restoring state from %s", config.snapshot)
        return Hypervisor.load_snapshot(
            config.snapshot.read_bytes(), topo, constraints, config.profiles, config.slots_per_link
        )
    return Hypervisor(topo, constraints, config.profiles, config.slots_per_link)


def write_atomic(path: Path, data: bytes) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=path.name + ".", dir=path.parent)
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
