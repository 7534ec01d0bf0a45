import numpy as np
import pytest

from frisopt.support_search import CascadedLink


def random_link(rng, num_ports, direct_scale=1.0):
    h = rng.normal(size=num_ports) + 1j * rng.normal(size=num_ports)
    d = direct_scale * complex(rng.normal(), rng.normal())
    return CascadedLink(d=d, h=h)


def enumerate_best(link, m_o, codebooks):
    """Recursive search over (off | codeword) per port with exactly ``m_o`` ports on.

    Written independently of the package's oracle: it walks ports in order and
    prunes branches that cannot reach ``m_o`` selections.
    """
    h = np.asarray(link.h)
    num = h.size
    best = [-1.0]

    def walk(m, chosen, acc):
        if chosen == m_o:
            best[0] = max(best[0], abs(acc))
            return
        if num - m < m_o - chosen:
            return
        walk(m + 1, chosen, acc)
        for c in codebooks[m]:
            walk(m + 1, chosen + 1, acc + h[m] * c)

    walk(0, 0, complex(link.d))
    return best[0]


@pytest.fixture
def rng():
    return np.random.default_rng(20261015)


# one summary line per acceptance criterion, printed after the run
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
