"""File formats: JSON degree/state inputs, CSV trajectories, JSONL estimates.

CSV values use 17 significant digits so that every emitted file re-parses
into the originating values exactly.  Trajectory column order is fixed:
t, zeta_0, zeta_1, ..., zeta_K, psi with K the largest tracked degree.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .core import DegreeDistribution, SubProfile
from .errors import DomainError
from .estimate import EstimateResult
from .fluid import FluidPath
from .paths import StatePoint


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def load_degree_distribution(path: str | Path) -> DegreeDistribution:
    """Read {"degrees": {"k": p_k}} from JSON."""
    with open(path) as f:
        data = json.load(f)
    if not isinstance(data, dict) or "degrees" not in data:
        raise DomainError(f"{path}: expected an object with a 'degrees' map")
    return DegreeDistribution({int(k): float(v) for k, v in data["degrees"].items()})


def load_degree_input(path: str | Path):
    """A degree file holds either a distribution {"degrees": {...}} or a
    plain JSON array of per-vertex degrees (an explicit sequence)."""
    from .explore import DegreeSequence

    with open(path) as f:
        data = json.load(f)
    if isinstance(data, list):
        return DegreeSequence(tuple(int(x) for x in data))
    if isinstance(data, dict) and "degrees" in data:
        return DegreeDistribution({int(k): float(v) for k, v in data["degrees"].items()})
    raise DomainError(f"{path}: expected a 'degrees' map or a degree array")


def dump_degree_distribution(p: DegreeDistribution, path: str | Path) -> None:
    with open(path, "w") as f:
        json.dump({"degrees": {str(k): v for k, v in p.weights.items()}}, f, indent=2)
        f.write("\n")


def load_sub_profile(path: str | Path, reference: DegreeDistribution) -> SubProfile:
    """Sub-profiles share the degree-file schema {"degrees": {...}}."""
    with open(path) as f:
        data = json.load(f)
    if not isinstance(data, dict) or "degrees" not in data:
        raise DomainError(f"{path}: expected an object with a 'degrees' map")
    return SubProfile({int(k): float(v) for k, v in data["degrees"].items()}, reference)


def load_state_point(path: str | Path) -> StatePoint:
    """Read {"x0": real, "xk": {"k": x_k}} from JSON."""
    with open(path) as f:
        data = json.load(f)
    if not isinstance(data, dict) or "x0" not in data or "xk" not in data:
        raise DomainError(f"{path}: expected an object with 'x0' and 'xk'")
    return StatePoint(float(data["x0"]), {int(k): float(v) for k, v in data["xk"].items()})


def dump_state_point(x: StatePoint, path: str | Path) -> None:
    with open(path, "w") as f:
        json.dump({"x0": x.x0, "xk": {str(k): v for k, v in x.xk.items()}}, f, indent=2)
        f.write("\n")


def fluid_path_to_csv(path_obj: FluidPath, path: str | Path) -> None:
    """Columns t, zeta_0..zeta_K, psi at full double precision."""
    K = path_obj.max_degree
    header = ["t"] + [f"zeta_{k}" for k in range(K + 1)] + ["psi"]
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(header)
        for i, t in enumerate(path_obj.grid):
            row = [_fmt(t), _fmt(path_obj.zeta0[i])]
            row += [_fmt(path_obj.zeta(k)[i]) for k in range(1, K + 1)]
            row.append(_fmt(path_obj.psi[i]))
            w.writerow(row)


def fluid_path_from_csv(path: str | Path) -> FluidPath:
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader)
        rows = [[float(x) for x in row] for row in reader if row]
    if header[0] != "t" or header[-1] != "psi":
        raise DomainError(f"{path}: not a trajectory CSV")
    data = np.array(rows)
    K = len(header) - 3  # t, zeta_0..zeta_K, psi
    zcols = data[:, 2:2 + K]  # zeta_1..zeta_K
    tracked = [k for k in range(1, K + 1) if np.any(zcols[:, k - 1] != 0.0)]
    return FluidPath(
        grid=data[:, 0],
        degrees=tuple(tracked),
        zeta0=data[:, 1],
        zetak=zcols[:, [k - 1 for k in tracked]] if tracked else np.zeros((len(data), 0)),
        psi=data[:, -1],
    )


def write_sidecar(meta: dict, path: str | Path) -> None:
    clean = {k: (None if isinstance(v, float) and not np.isfinite(v) else v)
             for k, v in meta.items()}
    with open(path, "w") as f:
        json.dump(clean, f, indent=2)
        f.write("\n")


def estimate_to_json_line(res: EstimateResult) -> str:
    return json.dumps(res.as_dict())


def estimate_from_json_line(line: str) -> EstimateResult:
    d = json.loads(line)
    rate = d["per_n_rate"]
    return EstimateResult(
        p_hat=d["p_hat"], ci_low=d["ci_low"], ci_high=d["ci_high"],
        reps=d["reps"], hits=d["hits"], n=d["n"], seed=d["seed"],
        per_n_rate=float("inf") if rate is None else rate,
    )


def estimates_to_csv(results: list[EstimateResult], path: str | Path) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["n", "p_hat", "ci_low", "ci_high", "per_n_rate"])
        for r in results:
            rate = _fmt(r.per_n_rate) if np.isfinite(r.per_n_rate) else "inf"
            w.writerow([r.n, _fmt(r.p_hat), _fmt(r.ci_low), _fmt(r.ci_high), rate])
