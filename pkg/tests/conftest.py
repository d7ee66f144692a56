import os
import sys

from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile(
    "default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

from tdmh.graph import NetworkGraph  # noqa: E402


@st.composite
def connected_graphs(draw, min_nodes=2, max_nodes=12, extra=None):
    """Random connected graph on 0..n-1: a random spanning tree plus extra edges."""
    n = draw(st.integers(min_nodes, max_nodes))
    g = NetworkGraph(range(n))
    for v in range(1, n):
        g.add_edge(v, draw(st.integers(0, v - 1)))
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    k = draw(st.integers(0, extra if extra is not None else n))
    for u, v in draw(st.lists(st.sampled_from(pairs), max_size=k)) if pairs else []:
        g.add_edge(u, v)
    return g


DATA = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "data")
