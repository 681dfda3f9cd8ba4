"""CSV ingestion/export of panels and JSON report helpers.

Long CSV layouts (headers required; unit ids are 1-based integers):

=====================  ===================
file                   columns
=====================  ===================
treatments.csv         t, i, a
network.csv            t, i, j, g (absent rows mean g = 0)
outcomes.csv           t, j, y
x_covariates.csv       t, i, name, value
w_covariates.csv       t, j, name, value
p_covariates.csv       t, i, j, name, value
q_weights.csv          covariate, i, q
exposures.csv          t, j, e
=====================  ===================

``t`` may be integers or dates; the sorted distinct ``t`` values of
``outcomes.csv`` define the periods ``1..T``.
"""

from __future__ import annotations

import json
import math
import os
import subprocess
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np
import pandas as pd

from .data import PanelDataset, SummaryWeights

FILES = {
    "treatments": ("treatments.csv", ["t", "i", "a"]),
    "network": ("network.csv", ["t", "i", "j", "g"]),
    "outcomes": ("outcomes.csv", ["t", "j", "y"]),
    "x": ("x_covariates.csv", ["t", "i", "name", "value"]),
    "w": ("w_covariates.csv", ["t", "j", "name", "value"]),
    "p": ("p_covariates.csv", ["t", "i", "j", "name", "value"]),
    "q": ("q_weights.csv", ["covariate", "i", "q"]),
    "exposures": ("exposures.csv", ["t", "j", "e"]),
}


class IngestError(ValueError):
    """Raised for unreadable or malformed input files."""


@dataclass
class LoadedPanel:
    """A panel plus the optional inputs that travel with it."""

    dataset: Optional[PanelDataset]
    exposures: Optional[np.ndarray] = None  # (T, M), NaN where not given
    q_weights: Dict[str, SummaryWeights] = field(default_factory=dict)
    time_labels: List[str] = field(default_factory=list)
    Y: Optional[np.ndarray] = None


def _read(path, columns):
    try:
        df = pd.read_csv(path)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as exc:
        raise IngestError(f"cannot read {path}: {exc}") from exc
    missing = [c for c in columns if c not in df.columns]
    if missing:
        raise IngestError(f"{os.path.basename(path)} lacks columns {missing}")
    return df


def _time_index(values: pd.Series):
    """Map raw ``t`` values onto 1..T in sorted order."""
    if pd.api.types.is_numeric_dtype(values):
        uniq = np.sort(values.unique())
        labels = [str(int(u)) if float(u).is_integer() else str(u) for u in uniq]
        return {u: k + 1 for k, u in enumerate(uniq)}, labels, False
    parsed = pd.to_datetime(values, errors="raise")
    uniq = np.sort(parsed.unique())
    return {pd.Timestamp(u): k + 1 for k, u in enumerate(uniq)}, [str(pd.Timestamp(u).date()) for u in uniq], True


def _map_t(df, tmap, is_date, name):
    raw = pd.to_datetime(df["t"]) if is_date else df["t"]
    keys = [pd.Timestamp(v) for v in raw] if is_date else list(raw)
    try:
        return np.array([tmap[k] for k in keys], dtype=int)
    except KeyError as exc:
        raise IngestError(f"{name}: time {exc.args[0]} does not appear in outcomes.csv") from None


def _ids(df, col, name, upper=None):
    ids = df[col].to_numpy()
    if len(ids) and (not np.all(np.equal(np.mod(ids, 1), 0)) or ids.min() < 1):
        raise IngestError(f"{name}: column {col} must hold positive integer ids")
    ids = ids.astype(int)
    if upper is not None and len(ids) and ids.max() > upper:
        raise IngestError(f"{name}: {col}={ids.max()} exceeds the {upper} units found elsewhere")
    return ids - 1


def load_panel(directory: str) -> LoadedPanel:
    """Read every known CSV present in ``directory``.

    ``outcomes.csv`` is required. Treatments and network are required unless
    ``exposures.csv`` is present, in which case the dataset may be ``None``
    and matching runs directly on the supplied exposures.

    Raises:
        IngestError: unreadable files, bad ids, or no exposure source.
    """
    path = lambda key: os.path.join(directory, FILES[key][0])
    has = {k: os.path.exists(path(k)) for k in FILES}
    if not has["outcomes"]:
        raise IngestError("missing outcomes.csv")
    out = _read(path("outcomes"), FILES["outcomes"][1])
    tmap, labels, is_date = _time_index(out["t"])
    T = len(labels)
    M = int(out["j"].max())
    Y = np.full((T, M), np.nan)
    Y[_map_t(out, tmap, is_date, "outcomes.csv") - 1, _ids(out, "j", "outcomes.csv")] = out["y"].to_numpy(float)

    exposures = None
    if has["exposures"]:
        ex = _read(path("exposures"), FILES["exposures"][1])
        exposures = np.full((T, M), np.nan)
        exposures[_map_t(ex, tmap, is_date, "exposures.csv") - 1, _ids(ex, "j", "exposures.csv", M)] = \
            ex["e"].to_numpy(float)

    if not (has["treatments"] and has["network"]):
        if exposures is None:
            raise IngestError("missing exposure source: provide treatments.csv and network.csv, or exposures.csv")
        return LoadedPanel(None, exposures, {}, labels, Y)

    tr = _read(path("treatments"), FILES["treatments"][1])
    N = int(tr["i"].max())
    A = np.full((T, N), np.nan)
    A[_map_t(tr, tmap, is_date, "treatments.csv") - 1, _ids(tr, "i", "treatments.csv")] = tr["a"].to_numpy(float)

    net = _read(path("network"), FILES["network"][1])
    G = np.zeros((T, N, M))
    G[_map_t(net, tmap, is_date, "network.csv") - 1, _ids(net, "i", "network.csv", N),
      _ids(net, "j", "network.csv", M)] = net["g"].to_numpy(float)

    blocks, names = {}, {}
    for key, unit_cols, shape in (("x", ["i"], (T, N)), ("w", ["j"], (T, M)), ("p", ["i", "j"], (T, N, M))):
        if not has[key]:
            continue
        df = _read(path(key), FILES[key][1])
        nm = list(dict.fromkeys(df["name"].astype(str)))
        arr = np.full(shape + (len(nm),), np.nan)
        k = df["name"].astype(str).map({n: c for c, n in enumerate(nm)}).to_numpy()
        upper = {"i": N, "j": M}
        idx = [_map_t(df, tmap, is_date, FILES[key][0]) - 1] + \
              [_ids(df, c, FILES[key][0], upper[c]) for c in unit_cols] + [k]
        arr[tuple(idx)] = df["value"].to_numpy(float)
        blocks[key], names[key] = arr, nm

    q_weights = {}
    if has["q"]:
        qdf = _read(path("q"), FILES["q"][1])
        for name, g in qdf.groupby("covariate", sort=False):
            vec = np.zeros(N)
            vec[_ids(g, "i", "q_weights.csv", N)] = g["q"].to_numpy(float)
            try:
                q_weights[str(name)] = SummaryWeights(vec, label=f"q:{name}")
            except ValueError as exc:
                raise IngestError(f"q_weights.csv, covariate {name}: {exc}") from exc

    ds = PanelDataset(A, G, Y, X=blocks.get("x"), W=blocks.get("w"), P=blocks.get("p"),
                      x_names=names.get("x", ()), w_names=names.get("w", ()), p_names=names.get("p", ()))
    return LoadedPanel(ds, exposures, q_weights, labels, Y)


def write_panel(dataset: PanelDataset, directory: str, exposures: Optional[np.ndarray] = None,
                q_weights: Optional[Dict[str, SummaryWeights]] = None) -> None:
    """Write a panel in the long CSV layout (network rows only where g = 1)."""
    os.makedirs(directory, exist_ok=True)
    T, N, M = dataset.T, dataset.N, dataset.M
    def grid(*sizes):
        return [g.ravel() for g in np.meshgrid(*[np.arange(1, s + 1) for s in sizes], indexing="ij")]

    tt, ii = grid(T, N)
    pd.DataFrame({"t": tt, "i": ii, "a": dataset.A.ravel().astype(int)}).to_csv(
        os.path.join(directory, "treatments.csv"), index=False)
    nz = np.argwhere(dataset.G == 1)
    pd.DataFrame({"t": nz[:, 0] + 1, "i": nz[:, 1] + 1, "j": nz[:, 2] + 1, "g": 1}).to_csv(
        os.path.join(directory, "network.csv"), index=False)
    tt, jj = grid(T, M)
    pd.DataFrame({"t": tt, "j": jj, "y": dataset.Y.ravel()}).to_csv(os.path.join(directory, "outcomes.csv"), index=False)
    for key, block, names, units in (("x", dataset.X, dataset.x_names, (N,)), ("w", dataset.W, dataset.w_names, (M,)),
                                     ("p", dataset.P, dataset.p_names, (N, M))):
        if block.shape[-1] == 0:
            continue
        frames = []
        for k, name in enumerate(names):
            cols = grid(T, *units)
            data = dict(zip(FILES[key][1][:-2], cols))
            data["name"] = name
            data["value"] = block[..., k].ravel()
            frames.append(pd.DataFrame(data))
        pd.concat(frames).to_csv(os.path.join(directory, FILES[key][0]), index=False)
    if exposures is not None:
        tt, jj = grid(T, M)
        pd.DataFrame({"t": tt, "j": jj, "e": np.asarray(exposures).ravel().astype(int)}).to_csv(
            os.path.join(directory, "exposures.csv"), index=False)
    if q_weights:
        rows = [dict(covariate=name, i=i + 1, q=float(w.q[i])) for name, w in q_weights.items() for i in range(N)]
        pd.DataFrame(rows).to_csv(os.path.join(directory, "q_weights.csv"), index=False)


# --------------------------------------------------------------------------
# JSON


def jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        if math.isnan(v):
            return None
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_json(path: str, payload: dict) -> None:
    """Deterministic JSON (sorted keys, NaN as null, infinities as strings)."""
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w") as fh:
        json.dump(jsonable(payload), fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_json(path: str) -> dict:
    with open(path) as fh:
        return json.load(fh)


def version_string() -> str:
    """Package version, plus ``git describe`` when run from a checkout."""
    from . import __version__
    try:
        here = os.path.dirname(os.path.abspath(__file__))
        desc = subprocess.run(["git", "describe", "--always", "--dirty", "--tags"], cwd=here,
                              capture_output=True, text=True, timeout=5)
        if desc.returncode == 0 and desc.stdout.strip():
            return f"{__version__}+{desc.stdout.strip()}"
    except (OSError, subprocess.SubprocessError):
        pass
    return __version__
