"""Write an experiment report as CSV, JSON and an optional log-log plot."""
import csv
import json
import os

from .runner import RECORD_FIELDS

CSV_COLUMNS = ("model", "grid_value") + RECORD_FIELDS


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_csv(report, path):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in report.records:
            w.writerow([report.model, _cell(r.grid_value)] + [_cell(r.fields.get(k)) for k in RECORD_FIELDS])


def write_json(report, path, include_runtime=True):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report.to_dict(include_runtime=include_runtime), fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_plot(report, path):
    """d1 (with 4-SE bars) and the bound against the grid on log-log axes."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    xs = [r.grid_value for r in report.records]
    d1 = [r.fields["d1"] for r in report.records]
    err = [4 * (r.fields["d1_se"] or 0) for r in report.records]
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.errorbar(xs, d1, yerr=err, marker="o", capsize=3, label="empirical d1 (4 SE)")
    pts = [(r.grid_value, r.fields["bound"]) for r in report.records if r.fields["bound"]]
    if pts:
        ax.plot(*zip(*pts), marker="s", linestyle="--", label="bound")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel(report.grid_name)
    ax.set_ylabel("distance to normal")
    ax.set_title(report.model)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def report_render(report, out_dir, stem="report", formats=("csv", "json"), plot=False):
    """Write the requested files into ``out_dir`` and return their paths.

    An empty record list still yields a header-only CSV and a valid JSON file.
    """
    os.makedirs(out_dir, exist_ok=True)
    paths = {}
    if "csv" in formats:
        paths["csv"] = os.path.join(out_dir, f"{stem}.csv")
        write_csv(report, paths["csv"])
    if "json" in formats:
        paths["json"] = os.path.join(out_dir, f"{stem}.json")
        write_json(report, paths["json"])
    if plot and report.records:
        paths["plot"] = os.path.join(out_dir, f"{stem}.png")
        write_plot(report, paths["plot"])
    return paths
