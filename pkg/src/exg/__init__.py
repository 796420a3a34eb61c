"""Record task-level memory traces, build execution graphs, and look for parallelism."""

from exg.graph import (
    AddressTable,
    BuildConfig,
    DependencyKind,
    DepPolicy,
    ExecutionGraph,
    TableMode,
    build_eg,
    project,
    verify_topo_order,
)
from exg.kernels import Grain, KernelSpec, run_kernel
from exg.trace import AccessKind, Address, ProgramTrace, Recorder, TaskInstance

__version__ = "0.1.0"
