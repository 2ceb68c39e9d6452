import numpy as np
import pytest

from nfvsim.substrate import Substrate


def make_substrate(node_caps, hostable, undirected_edges, link_cap, catalog):
    """Small hand-built substrate; every undirected edge becomes two links."""
    src, dst, cap = [], [], []
    for a, b in undirected_edges:
        for u, v in ((a, b), (b, a)):
            src.append(u)
            dst.append(v)
            cap.append(link_cap if np.isscalar(link_cap) else link_cap[(u, v)])
    return Substrate(node_caps, hostable, src, dst, cap, catalog)


@pytest.fixture
def ring4():
    """Four NFV nodes on a ring (0-1-2-3-0); f0 hosted on {0,2}, f1 on {0,1}.

    Mirrors the worked two-NF example: with zero intra costs and free hosting
    on node 0, the best route places both NFs on node 0 and ships via the
    direct 0-3 link.
    """
    return make_substrate(
        node_caps=[1000.0, 1000.0, 1000.0, 1000.0],
        hostable=[[0, 1], [1], [0], []],
        undirected_edges=[(0, 1), (1, 2), (2, 3), (0, 3)],
        link_cap=1000.0,
        catalog=["f0", "f1"],
    )


def link_id(substrate, u, v):
    for l in range(substrate.num_links):
        if substrate.link_src[l] == u and substrate.link_dst[l] == v:
            return l
    raise KeyError((u, v))
