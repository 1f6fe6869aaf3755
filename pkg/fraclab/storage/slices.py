"""
Time slices as CSV: columns t, x, u, psi, flap, contact; floats with 17
significant digits so that a read-back is exact.
"""
import csv
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from fraclab.core.exceptions import DataError
from fraclab.models.grid import Grid1D
from fraclab.models.operators import Generator
from fraclab.models.solution import Solution
from fraclab.services.obstacle_stepper import contact_mask

logger = logging.getLogger(__name__)

COLUMNS = ("t", "x", "u", "psi", "flap", "contact")


def _fmt(value: float) -> str:
    return format(float(value), ".17g")


def write_slices(path: Path, solution: Solution, op: Generator) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    x = solution.problem.grid.nodes
    psi = solution.psi.values
    with path.open("w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(COLUMNS)
        for t, u in zip(solution.times, solution.slices):
            flap = op.apply(u).values
            mask = contact_mask(u, solution.psi, solution.contact_tol).mask
            for i in range(x.size):
                writer.writerow(
                    (_fmt(t), _fmt(x[i]), _fmt(u.values[i]), _fmt(psi[i]), _fmt(flap[i]), int(mask[i]))
                )
    logger.info(f"Wrote {len(solution.slices)} slices to {path}")
    return path


@dataclass(frozen=True, eq=False)
class SliceTable:
    grid: Grid1D
    times: np.ndarray
    u: list[np.ndarray]
    psi: np.ndarray
    flap: list[np.ndarray]


def read_slices(path: Path) -> SliceTable:
    """Read a slice CSV back; the grid is rebuilt from the x column."""
    try:
        with path.open(newline="") as handle:
            reader = csv.reader(handle)
            header = next(reader)
            rows = [row for row in reader if row]
    except (OSError, StopIteration) as exc:
        raise DataError(f"cannot read slices from {path}: {exc}") from exc
    if tuple(header) != COLUMNS:
        raise DataError(f"unexpected CSV header {header}, expected {list(COLUMNS)}")
    data = np.array([[float(v) for v in row[:5]] for row in rows])
    times = np.unique(data[:, 0])
    n = data.shape[0] // times.size
    if n * times.size != data.shape[0]:
        raise DataError("slices do not all have the same number of nodes")
    blocks = data.reshape(times.size, n, 5)
    x = blocks[0, :, 1]
    h = x[1] - x[0]
    grid = Grid1D(float(x[0]), float(x[0] + n * h), n)
    return SliceTable(
        grid=grid,
        times=blocks[:, 0, 0],
        u=[blocks[k, :, 2] for k in range(times.size)],
        psi=blocks[0, :, 3],
        flap=[blocks[k, :, 4] for k in range(times.size)],
    )


def write_columns(path: Path, columns: dict[str, np.ndarray]) -> Path:
    """Plot-ready CSV of equally long named columns."""
    names = list(columns)
    data = [np.asarray(columns[name], dtype=float) for name in names]
    if len({d.size for d in data}) != 1:
        raise DataError(f"columns {names} differ in length")
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(names)
        for row in zip(*data):
            writer.writerow([_fmt(v) for v in row])
    logger.info(f"Wrote {data[0].size} rows to {path}")
    return path
