"""Smoke test for the Python bindings.

Build and install first, e.g.

    maturin build --release -m crates/python/Cargo.toml
    pip install target/wheels/pyjointspec-*.whl

then run `python python/smoke_test.py`.
"""

import json
import math

import pyjointspec as js


def close(a, b, tol=1e-10):
    return abs(a - b) <= tol


def main():
    # diag(1, 2, 2, 3): Brown measure 1/4 δ_1 + 1/2 δ_2 + 1/4 δ_3.
    t = js.CommutingTuple([[[1, 0, 0, 0], [0, 2, 0, 0], [0, 0, 2, 0], [0, 0, 0, 3]]])
    mu = t.brown()
    weights = sorted((z[0].real, w) for z, w in mu.atoms())
    assert [round(z) for z, _ in weights] == [1, 2, 3]
    assert all(close(w, e) for (_, w), e in zip(weights, [0.25, 0.5, 0.25]))
    assert close(mu.total_mass(), 1.0)

    # A generated pair against its exact oracle measure.
    mats, oracle = js.generate({"kind": "conjugated_diagonal", "d": 6, "n": 2, "seed": 3})
    dec = js.CommutingTuple(mats).decompose()
    assert dec.brown().distance(oracle) < 1e-8

    # Spectral subspace of a disk and its Riesz idempotent.
    jordan = js.CommutingTuple([[[1, 5, 0], [0, -1, 0], [0, 0, 1]]]).decompose()
    disk = {"type": "open_ball", "center": [[1.0, 0.0]], "radius": 0.5}
    space = jordan.spectral_projection(disk)
    e = jordan.riesz_idempotent(disk)
    assert space.dim == 2 and e.rank == 2
    assert close(jordan.spectral_trace(disk), 2 / 3)
    m, cond = e.matrix()
    sq = [[sum(m[i][k] * m[k][j] for k in range(3)) for j in range(3)] for i in range(3)]
    assert max(abs(sq[i][j] - m[i][j]) for i in range(3) for j in range(3)) < 1e-10 * cond
    assert e.range().distance(space) < 1e-10
    assert e.complement().rank == 1

    # Lattice operations on subspaces.
    u = js.Subspace.span([[1, 0], [0, 1], [0, 0]])
    v = js.Subspace.span([[0, 0], [1, 0], [0, 1]])
    assert u.meet(v).dim == 1 and u.join(v).dim == 3
    assert u.complement().dim == 1

    # Non-commuting input is refused with a dedicated exception.
    try:
        js.CommutingTuple([[[0, 1], [0, 0]], [[0, 0], [1, 0]]])
    except js.NonCommutingError:
        pass
    else:
        raise AssertionError("non-commuting pair accepted")

    # Fuglede-Kadison determinant of diag(e, 1): tau(log|A|) = 1/2.
    assert close(js.fk_log_det([[math.e, 0], [0, 1]]), 0.5, 1e-12)

    # Grid density of a normal matrix holds its unit mass.
    cells, total, _ = js.grid_brown([[0.5, 0], [0, -0.5j]], radius=1.0, cells=40)
    assert len(cells) == 40 and abs(total - 1.0) < 0.05

    report = json.loads(js.verify(suites=["lattice", "box-formula"], seeds=[1, 2], max_dim=8))
    assert report["passed"], report["failures"]

    print("pyjointspec smoke test passed")


if __name__ == "__main__":
    main()
