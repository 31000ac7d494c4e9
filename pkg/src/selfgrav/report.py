"""Output files: schema-tagged CSV, JSON run manifests, optional figures.

CSV layout is fixed for byte-reproducibility: a leading ``# schema=...``
line, one header row, comma separators, LF endings, floats at 17
significant digits.  Manifests carry the resolved parameters and the
pinned constant table; they are the only place a timestamp appears, so
repeated identical invocations produce byte-identical CSV.
"""

from __future__ import annotations

import json
from datetime import datetime, timezone
from pathlib import Path

from .units import constants_table
from .variational import REGIME_DEEP_MAX, REGIME_NEWTONIAN_MIN


def fmt_value(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return format(x, ".17g")
    if x is None:
        return ""
    return str(x)


def write_csv(path, schema: str, columns, rows) -> None:
    path = Path(path)
    lines = [f"# schema={schema}", ",".join(columns)]
    for row in rows:
        lines.append(",".join(fmt_value(v) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n",
                          encoding="utf-8", newline="\n")


def run_manifest(command: str, params: dict, extra: dict | None = None) -> dict:
    from . import __version__
    manifest = {
        "schema": "selfgrav.manifest.v1",
        "command": command,
        "params": params,
        "constants": constants_table(),
        "regime_bands": {
            "deep_nonlocal_below": REGIME_DEEP_MAX,
            "newtonian_limit_above": REGIME_NEWTONIAN_MIN,
        },
        "version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }
    if extra:
        manifest.update(extra)
    return manifest


def write_manifest(path, command: str, params: dict, extra: dict | None = None) -> None:
    write_json(path, run_manifest(command, params, extra))


def manifest_path_for(output_path) -> Path:
    output_path = Path(output_path)
    return output_path.with_name(output_path.name + ".manifest.json")


def write_profile_csv(path, state, phi, meta: dict) -> None:
    """Radial profile (r, R, phi) with a JSON metadata header line."""
    path = Path(path)
    lines = [
        "# schema=selfgrav.profile.v1",
        "# meta=" + json.dumps(meta, sort_keys=True),
        "r,R,phi",
    ]
    for r, big_r, p in zip(state.r, state.R, phi):
        lines.append(f"{fmt_value(float(r))},{fmt_value(float(big_r))},{fmt_value(float(p))}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def write_trajectory_csv(path, traj) -> None:
    rows = zip(traj.times, traj.widths, traj.norms, traj.energies_F)
    write_csv(path, "selfgrav.trajectory.v1", ["t", "width", "norm", "F"],
              [[float(a), float(b), float(c), float(d)] for a, b, c, d in rows])


# --------------------------------------------------------------------------
# figures, rendered next to the delimited output when requested

def _pyplot():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    return plt


def save_spread_figure(rows, path) -> None:
    """Log-log spread vs mass, one curve per (model, nonlocal scale)."""
    plt = _pyplot()
    curves = {}
    for row in rows:
        key = (row["model"], row.get("Ms_eV"))
        curves.setdefault(key, ([], []))
        curves[key][0].append(row["m_kg"])
        curves[key][1].append(row["sigma_m"])
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    for (model, ms), (xs, ys) in sorted(curves.items(), key=str):
        label = model if ms is None else f"{model}, Ms = {ms:g} eV"
        style = "-" if model == "newtonian" else "--"
        ax.loglog(xs, ys, style, label=label)
    ax.set_xlabel("mass (kg)")
    ax.set_ylabel("spread (m)")
    ax.legend(fontsize=8)
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_profile_figure(state, phi, path) -> None:
    plt = _pyplot()
    fig, (ax1, ax2) = plt.subplots(2, 1, sharex=True, figsize=(6.0, 5.0))
    ax1.plot(state.r, state.R)
    ax1.set_ylabel("R(r)")
    ax2.plot(state.r, phi)
    ax2.set_ylabel("Phi(r)")
    ax2.set_xlabel("r (internal units)")
    for ax in (ax1, ax2):
        ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_trajectory_figure(traj, path, reference=None) -> None:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    ax.plot(traj.times, traj.widths, label="width")
    if reference is not None:
        ax.plot(traj.times, reference, "--", label="free-particle law")
    ax.set_xlabel("t (internal units)")
    ax.set_ylabel("width (internal units)")
    ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
