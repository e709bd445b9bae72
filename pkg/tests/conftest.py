"""Shared fixtures and tiny design builders for the test suite."""

import pytest

from hiermp import kernels
from hiermp.io import parse_design_text


@pytest.fixture(scope="session", autouse=True)
def _warm_kernels():
    # pay the one-time JIT bill up front so individual tests stay fast;
    # compiled kernels are disk-cached after the first run
    kernels.warmup()


BASIC_LIB = """\
MACRO m10x20 10 20
MACRO m12x8 12 8
STDCELL ff 2.0 FF
STDCELL inv 1.0
STDCELL lut 1.6
"""


def build_design(netlist: str, floorplan: str, library: str = BASIC_LIB):
    """Parse an in-memory design with the shared cell library."""
    return parse_design_text(netlist, library, floorplan)


@pytest.fixture
def two_macro_db():
    """Two connected macros plus one io pin on a 100x100 canvas."""
    netlist = """\
MODULE top PARENT -
INST a m10x20 top
INST b m10x20 top
NET n1 a.q b.d
NET n2 PIN p0 a.d
"""
    floorplan = """\
CANVAS 100 100
IOPIN p0 0 50
"""
    return build_design(netlist, floorplan)
