import numpy as np
import pytest

from ctrlscore.errors import NetworkSpecError
from ctrlscore.network import (
    NetworkSpec,
    build_adjacency,
    build_laplacian_dynamics,
    fixture_fig2,
    format_edge_list,
    parse_edge_list,
    parse_matrix,
    read_edge_list,
    read_matrix,
)
from ctrlscore.spectral import block_diagonalize


def test_single_edge():
    A = build_laplacian_dynamics(NetworkSpec(2, ((1, 2, 0.7),)))
    assert np.array_equal(A, [[0.0, 0.0], [0.7, -0.7]])


def test_empty_edges():
    assert np.array_equal(build_laplacian_dynamics(NetworkSpec(3, ())), np.zeros((3, 3)))


def test_fixture_facts():
    spec = fixture_fig2()
    A = build_laplacian_dynamics(spec)
    assert spec.node_count == 10 and len(spec.edges) == 10
    assert all(w == 0.2 for _, _, w in spec.edges)
    assert spec.in_degree(9) == 0 and spec.in_degree(7) == 0
    assert np.array_equal(A[8], np.zeros(10))
    assert A[0, 0] == pytest.approx(-0.4)
    assert A[0, 6] == pytest.approx(0.2) and A[0, 8] == pytest.approx(0.2)
    assert np.allclose(A.sum(axis=1), 0.0)


@pytest.mark.parametrize("edges", [
    ((1, 1, 1.0),),
    ((1, 3, 1.0),),
    ((0, 2, 1.0),),
    ((1, 2, 0.0),),
    ((1, 2, -1.0),),
    ((1, 2, 1.0), (1, 2, 2.0)),
    ((1, 2),),
])
def test_invalid_specs(edges):
    with pytest.raises(NetworkSpecError):
        NetworkSpec(2, edges)


def test_labels_length():
    with pytest.raises(NetworkSpecError):
        NetworkSpec(2, (), labels=("a",))


def test_edge_list_round_trip(tmp_path):
    spec = fixture_fig2()
    path = tmp_path / "fig2.csv"
    path.write_text(format_edge_list(spec))
    back = read_edge_list(path)
    assert back.node_count == 10 and back.edges == spec.edges


def test_edge_list_parsing():
    text = "source,target,weight\n# comment\n1,2,0.5  # trailing\n\n3,1,2\n"
    spec = parse_edge_list(text, node_count=4)
    assert spec.node_count == 4 and spec.edges == ((1, 2, 0.5), (3, 1, 2.0))
    with pytest.raises(NetworkSpecError):
        parse_edge_list("1,2,0.5\nsource,target,weight\n")
    with pytest.raises(NetworkSpecError):
        parse_edge_list("1,2,x\n")
    with pytest.raises(NetworkSpecError):
        parse_edge_list("1,2\n")
    with pytest.raises(NetworkSpecError):
        parse_edge_list("# nothing\n")


def test_matrix_parsing(tmp_path):
    M = parse_matrix("0 1 # row one\n-1 0\n")
    assert np.array_equal(M, [[0.0, 1.0], [-1.0, 0.0]])
    path = tmp_path / "m.txt"
    path.write_text("1 2\n3 4\n")
    assert np.array_equal(read_matrix(path), [[1.0, 2.0], [3.0, 4.0]])
    for bad in ("1 2\n3\n", "", "1 x\n2 3\n", "nan 0\n0 1\n", "1 2 3\n4 5 6\n"):
        with pytest.raises(NetworkSpecError):
            parse_matrix(bad)


def test_adjacency_direction():
    A = build_adjacency(NetworkSpec(3, ((1, 3, 2.0),)))
    assert A[2, 0] == 2.0 and A[0, 2] == 0.0


def test_random_digraph_laplacians():
    # -L never has eigenvalues in the open right half-plane and zero is semisimple
    rng = np.random.default_rng(2024)
    for _ in range(200):
        n = int(rng.integers(2, 21))
        density = rng.uniform(0.05, 0.5)
        edges = tuple((s + 1, t + 1, float(rng.uniform(0.1, 2.0)))
                      for s in range(n) for t in range(n) if s != t and rng.random() < density)
        A = build_laplacian_dynamics(NetworkSpec(n, edges))
        assert np.allclose(A.sum(axis=1), 0.0, atol=1e-12)
        split = block_diagonalize(A)
        assert split.classification.n_plus == 0
        assert split.classification.n_zero >= 1
        assert split.report.assumption2
