"""File formats: JSON nets, OBJ frame sets, CSV curve samples and key=value configs."""
from __future__ import annotations

import csv
import json
import math
import os
from pathlib import Path

import numpy as np

from .core import DEFAULT_TOL
from .errors import InvalidNetFile
from .quadnet import QuadNet, curvature_grid, validate


def net_to_dict(net: QuadNet, metadata: dict | None = None) -> dict:
    d = {"m": net.m, "n": net.n, "vertices": [[float(c) for c in p] for p in net.flat()]}
    if metadata:
        d["metadata"] = _jsonable(metadata)
    return d


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating,)):
        obj = float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    return obj


def dumps_net(net: QuadNet, metadata: dict | None = None, indent: int | None = None) -> str:
    # json writes floats with repr, which round-trips doubles exactly
    return json.dumps(net_to_dict(net, metadata), indent=indent)


def loads_net(text: str, check: bool = True, tol: float = DEFAULT_TOL):
    """Parse a JSON net; returns ``(net, metadata)``.

    With ``check`` the net must pass :func:`~isoflex.quadnet.validate`
    (planar, convex faces); otherwise InvalidNetFile carries the report.
    """
    try:
        d = json.loads(text)
        m, n = int(d["m"]), int(d["n"])
        verts = d["vertices"]
    except (ValueError, KeyError, TypeError) as exc:
        raise InvalidNetFile(f"malformed net file: {exc}") from exc
    if not isinstance(verts, list) or len(verts) != (m + 1) * (n + 1):
        raise InvalidNetFile(f"expected {(m + 1) * (n + 1)} vertices for a {m}x{n} net")
    try:
        net = QuadNet.from_flat(m, n, verts)
    except (ValueError, TypeError) as exc:
        raise InvalidNetFile(f"bad vertex data: {exc}") from exc
    if check:
        rep = validate(net, tol)
        if not rep.ok:
            raise InvalidNetFile(f"net fails validation: faces {rep.failing_faces()}", report=rep)
    return net, d.get("metadata", {})


def write_net(path, net: QuadNet, metadata: dict | None = None) -> None:
    Path(path).write_text(dumps_net(net, metadata, indent=1) + "\n")


def read_net(path, check: bool = True, tol: float = DEFAULT_TOL):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InvalidNetFile(f"cannot read {path}: {exc}") from exc
    return loads_net(text, check, tol)


def net_to_obj(net: QuadNet, comment: str | None = None) -> str:
    """OBJ text with vertices in JSON order and 1-based quad faces."""
    lines = [f"# {comment}"] if comment else []
    lines += ["v " + " ".join(repr(float(c)) for c in p) for p in net.flat()]
    N = net.n + 1
    for k, l in net.faces():
        idx = [k * N + l, (k + 1) * N + l, (k + 1) * N + l + 1, k * N + l + 1]
        lines.append("f " + " ".join(str(i + 1) for i in idx))
    return "\n".join(lines) + "\n"


def read_obj_vertices(path) -> np.ndarray:
    rows = []
    for line in Path(path).read_text().splitlines():
        if line.startswith("v "):
            rows.append([float(x) for x in line.split()[1:4]])
    return np.array(rows)


def _omega_or_none(net: QuadNet, tol):
    try:
        return curvature_grid(net, tol).tolist()
    except Exception as exc:  # frames are written even if curvature is undefined
        return {"error": str(exc)}


def write_frames(outdir, frames, tol: float = DEFAULT_TOL, extra: dict | None = None) -> dict:
    """Write ``frame_%04d.obj`` per ``(t, net)`` and ``manifest.json``; returns the manifest."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    ts = [float(t) for t, _ in frames]
    if any(b <= a for a, b in zip(ts, ts[1:])):
        raise ValueError("frame parameters must be strictly increasing")
    entries = []
    for idx, (t, net) in enumerate(frames):
        name = f"frame_{idx:04d}.obj"
        (outdir / name).write_text(net_to_obj(net, comment=f"t = {t!r}"))
        entries.append({"file": name, "t": float(t), "omega": _omega_or_none(net, tol)})
    # omega[i-1][j-1] is the curvature at interior vertex (i, j)
    manifest = {"count": len(entries), "t": ts, "omega_layout": "interior vertices", "frames": entries}
    if extra:
        manifest.update(_jsonable(extra))
    (outdir / "manifest.json").write_text(json.dumps(manifest, indent=1) + "\n")
    return manifest


def read_curve_csv(path):
    """Rows ``param,x,y,z`` or ``param,s``; a non-numeric first row is a header.

    Returns ``(params, values)`` with values of shape (N, 3) or (N,).
    """
    rows = []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            row = [c.strip() for c in row if c.strip() != ""]
            if not row or row[0].startswith("#"):
                continue
            try:
                rows.append([float(c) for c in row])
            except ValueError:
                if rows:
                    raise InvalidNetFile(f"non-numeric row in {path}: {row}")
    if not rows or len({len(r) for r in rows}) != 1 or len(rows[0]) not in (2, 4):
        raise InvalidNetFile(f"{path}: expected rows of 'param,x,y,z' or 'param,s'")
    arr = np.array(rows)
    if np.any(np.diff(arr[:, 0]) <= 0):
        raise InvalidNetFile(f"{path}: parameters must be strictly increasing")
    vals = arr[:, 1:] if arr.shape[1] == 4 else arr[:, 1]
    return arr[:, 0], vals


def write_curve_csv(path, params, values) -> None:
    values = np.asarray(values, dtype=float)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["param", "x", "y", "z"] if values.ndim == 2 else ["param", "s"])
        for p, v in zip(params, values):
            w.writerow([repr(float(p))] + ([repr(float(c)) for c in v] if values.ndim == 2 else [repr(float(v))]))


def read_config(path) -> dict:
    """Simple ``key = value`` file; ``#`` starts a comment. Numbers are parsed."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidNetFile(f"{path}:{lineno}: expected key = value")
        key, val = (s.strip() for s in line.split("=", 1))
        out[key] = _parse_scalar(val)
    return out


def _parse_scalar(val: str):
    low = val.lower()
    if low in ("true", "yes", "on"):
        return True
    if low in ("false", "no", "off"):
        return False
    for cast in (int, float):
        try:
            return cast(val)
        except ValueError:
            pass
    return val


def env_tol(default: float = DEFAULT_TOL) -> float:
    val = os.environ.get("ISOFLEX_TOL")
    if not val:
        return default
    try:
        return float(val)
    except ValueError:
        raise InvalidNetFile(f"ISOFLEX_TOL is not a number: {val!r}")
