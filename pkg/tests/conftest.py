import numpy as np
import pytest

from netsplit.network import DIRECTED, EdgeDomain, Network, NetworkKind

KINDS = ["directed-loops", "directed-noloops", "undirected-loops", "undirected-noloops"]


@pytest.fixture(params=KINDS)
def kind(request):
    return NetworkKind.parse(request.param)


def random_network(n, kind, domain, rng):
    kind = NetworkKind.parse(kind)
    size = kind.n_dyads(n)
    if domain is EdgeDomain.REAL:
        vals = rng.normal(size=size) * 3.7
    elif domain is EdgeDomain.COUNT:
        vals = rng.poisson(4.0, size=size)
    else:
        vals = rng.integers(0, 2, size=size)
    return Network.from_dyad_values(n, kind, domain, vals)


def write_text(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return p


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[number])
