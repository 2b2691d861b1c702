"""Process shell: engine, persistence, HTTP API and CLI."""

from .config import ServiceConfig, build_engine
from .hypervisor import Hypervisor, HypervisorState

__all__ = ["Hypervisor", "HypervisorState", "ServiceConfig", "build_engine"]
