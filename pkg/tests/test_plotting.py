import pytest

from fockphase.analysis import modality_scan, universal_sweep
from fockphase.condprob import PhiGrid, table_for
from fockphase.montecarlo import run_reconstruction
from fockphase.plotting import plot_condprob, plot_mismatch, plot_reconstruction, plot_sweep
from fockphase.state import StatePrep

GRID = PhiGrid(257)
PNG = b"\x89PNG"


def test_condprob_png_reproducible(tmp_path):
    t = table_for(StatePrep(10, 0, 1), GRID)
    a = plot_condprob(t, tmp_path / "a.png", "t")
    b = plot_condprob(t, tmp_path / "b.png", "t")
    assert a.read_bytes()[:4] == PNG and a.read_bytes() == b.read_bytes()


def test_other_figures(tmp_path):
    run = run_reconstruction(StatePrep(10, 0, 1), n=5, seed=1, grid=GRID)
    rows = universal_sweep([10, 20], [0, 1, 2], grid=GRID)
    scan = modality_scan(20, 2.0, [1, 2, 3], grid=GRID)
    for path in (plot_reconstruction(run, tmp_path / "r.png"),
                 plot_sweep(rows, tmp_path / "s.png", alpha=2.5),
                 plot_mismatch(scan, tmp_path / "m.png", 2.0)):
        assert path.read_bytes()[:4] == PNG
