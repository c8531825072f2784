"""Batch front door: evaluate models over eps grids and emit reports.

Methods: exact diagonalization, the order-4 power-series baseline (rs),
the staged superconvergent engine (su), or all three side by side
(compare).  Reports are deterministic; floats are serialized with 17
significant digits so repeated runs are byte-identical and CSV/JSON carry
identical numbers.
"""

import argparse
import sys
from dataclasses import dataclass

import numpy as np

from .averaging import SmallDenominatorError
from .kolmogorov import ConsistencyError, default_n_stages, match_labels, run
from .linalg import eigh
from .models import BUILTIN_MODELS, ModelFormatError, load_model
from .rayleigh_schrodinger import rs_corrections
from .series import eval_series

_METHODS = ("su", "rs", "exact", "compare")
_METHOD_RANK = {"exact": 0, "rs": 1, "su": 2}


@dataclass
class RunConfig:
    method: str
    eps_list: tuple
    levels: tuple
    order: int = 4
    n_stages: int | None = None
    model_path: str | None = None
    builtin: str | None = None
    dim: int | None = None
    hbar: float | None = None
    deg_tol: float | None = None
    gap_guard: float | None = None
    fmt: str = "csv"
    out: str | None = None


def _load_config_model(config: RunConfig):
    if (config.model_path is None) == (config.builtin is None):
        raise ValueError("exactly one of --model and --builtin is required")
    if config.model_path is not None:
        model = load_model(config.model_path)
    else:
        builder = BUILTIN_MODELS.get(config.builtin)
        if builder is None:
            raise ValueError(
                f"unknown builtin {config.builtin!r}; available: "
                f"{sorted(BUILTIN_MODELS)}"
            )
        if config.dim is None:
            raise ValueError("--builtin requires --dim")
        model = builder(config.dim)
    if config.hbar is not None:
        model = model.with_hbar(config.hbar)
    return model


def _exact_levels(model, eps, deg_tol):
    """Eigenvalues of the evaluated series, labelled by unperturbed level."""
    h = eval_series(model.series(model.max_order), eps)
    spectral = eigh(h, deg_tol=deg_tol)
    base = eigh(model.coefficient(0), deg_tol=deg_tol)
    perm = match_labels(base.eigenvectors, spectral.eigenvectors)
    return spectral.eigenvalues[perm]


def compute_report(config: RunConfig) -> dict:
    """All rows and diagnostics for one run, as plain python values."""
    if config.method not in _METHODS:
        raise ValueError(f"unknown method {config.method!r}")
    if not config.eps_list:
        raise ValueError("at least one eps value is required")
    if not config.levels:
        raise ValueError("at least one level is required")
    if config.order < 1:
        raise ValueError(f"--order must be at least 1, got {config.order}")
    model = _load_config_model(config)
    levels = tuple(int(j) for j in config.levels)
    for j in levels:
        if not 0 <= j < model.dim:
            raise ValueError(f"level {j} outside 0..{model.dim - 1}")
    eps_list = tuple(sorted(float(e) for e in config.eps_list))
    n_stages = (
        config.n_stages if config.n_stages is not None
        else default_n_stages(config.order)
    )

    want_su = config.method in ("su", "compare")
    want_rs = config.method in ("rs", "compare")
    want_exact_rows = config.method in ("exact", "compare")
    rs_max = min(config.order, 4)

    warnings_list = []
    negative = [e for e in eps_list if e < 0]
    if negative:
        warnings_list.append(
            "eps < 0 requested; the truncated matrix stays diagonalizable but "
            "an unbounded-below potential has no converged spectrum to compare to"
        )

    if want_rs and not model.is_linear:
        raise ValueError(
            "the rs baseline handles only perturbations linear in eps "
            f"(model {model.name!r} has higher-order terms)"
        )

    exact = {eps: _exact_levels(model, eps, config.deg_tol) for eps in eps_list}

    rows = []

    def add_row(eps, level, method, soo, energy):
        rows.append(
            {
                "eps": float(eps),
                "level": int(level),
                "method": method,
                "stage_or_order": soo,
                "energy": float(energy),
                "abs_error_vs_exact": abs(float(energy) - float(exact[eps][level])),
            }
        )

    if want_exact_rows:
        for eps in eps_list:
            for j in levels:
                add_row(eps, j, "exact", "-", exact[eps][j])

    rs = None
    if want_rs:
        base = eigh(model.coefficient(0), deg_tol=config.deg_tol)
        rs = rs_corrections(
            base,
            model.coefficient(1),
            max_order=rs_max,
            levels=levels,
            gap_guard=config.gap_guard,
        )
        for eps in eps_list:
            for j in levels:
                for order in range(1, rs_max + 1):
                    add_row(eps, j, "rs", str(order), rs.energy(eps, j, order))

    su_results = {}
    stage_residuals = []
    if want_su:
        for eps in eps_list:
            result = run(
                model,
                eps,
                config.order,
                n_stages=n_stages,
                deg_tol=config.deg_tol,
                gap_guard=config.gap_guard,
            )
            su_results[eps] = result
            stage_residuals.append(
                {
                    "eps": eps,
                    "residuals": [info.slot_residual for info in result.history],
                }
            )
            for j in levels:
                for stage in range(1, result.n_stages + 1):
                    add_row(eps, j, "su", str(stage), result.energies[stage][j])

    comparisons = []
    if config.method == "compare":
        for eps in eps_list:
            for j in levels:
                su_err = abs(
                    float(su_results[eps].energies[-1][j]) - float(exact[eps][j])
                )
                rs_err = abs(rs.energy(eps, j, rs_max) - float(exact[eps][j]))
                winner = "su" if su_err < rs_err else ("rs" if rs_err < su_err else "tie")
                comparisons.append(
                    {
                        "eps": eps,
                        "level": j,
                        "su_error": su_err,
                        "rs_error": rs_err,
                        "winner": winner,
                    }
                )

    dim_drift = []
    if config.method == "exact" and model.name in BUILTIN_MODELS:
        bigger = BUILTIN_MODELS[model.name](model.dim + 20, hbar=model.hbar)
        for eps in eps_list:
            grown = _exact_levels(bigger, eps, config.deg_tol)
            for j in levels:
                dim_drift.append(
                    {
                        "eps": eps,
                        "level": j,
                        "drift": abs(float(exact[eps][j]) - float(grown[j])),
                    }
                )

    min_gap = None
    if su_results:
        finite = [r.min_gap for r in su_results.values() if np.isfinite(r.min_gap)]
        min_gap = min(finite) if finite else None

    rank = _METHOD_RANK
    rows.sort(
        key=lambda r: (
            r["eps"],
            r["level"],
            rank[r["method"]],
            -1 if r["stage_or_order"] == "-" else int(r["stage_or_order"]),
        )
    )

    return {
        "config": {
            "model": model.name,
            "provenance": model.provenance,
            "dimension": model.dim,
            "hbar": model.hbar,
            "method": config.method,
            "eps": list(eps_list),
            "levels": list(levels),
            "order": config.order,
            "stages": n_stages if want_su else None,
        },
        "rows": rows,
        "comparisons": comparisons,
        "diagnostics": {
            "min_denominator_gap": min_gap,
            "stage_residuals": stage_residuals,
            "dim_drift": dim_drift,
            "warnings": warnings_list,
        },
    }


def format_float(x: float) -> str:
    return f"{float(x):.17g}"


CSV_HEADER = "eps,level,method,stage_or_order,energy,abs_error_vs_exact"


def render_csv(report: dict) -> str:
    lines = [CSV_HEADER]
    for r in report["rows"]:
        lines.append(
            ",".join(
                (
                    format_float(r["eps"]),
                    str(r["level"]),
                    r["method"],
                    r["stage_or_order"],
                    format_float(r["energy"]),
                    format_float(r["abs_error_vs_exact"]),
                )
            )
        )
    return "\n".join(lines) + "\n"


def _json_scalar(v) -> str:
    if v is None:
        return "null"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if v != v or v in (float("inf"), float("-inf")):
            return "null"
        return format_float(v)
    if isinstance(v, str):
        return '"' + v.replace("\\", "\\\\").replace('"', '\\"') + '"'
    raise TypeError(f"cannot serialize {type(v)!r}")


def render_json(obj, indent=0) -> str:
    pad = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [
            f'{pad}  "{k}": {render_json(v, indent + 1)}' for k, v in obj.items()
        ]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [f"{pad}  {render_json(v, indent + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    return _json_scalar(obj)


def render_report(report: dict, fmt: str) -> str:
    if fmt == "csv":
        return render_csv(report)
    if fmt == "json":
        return render_json(report) + "\n"
    raise ValueError(f"unknown output format {fmt!r}")


def cmd_run(config: RunConfig) -> int:
    """Compute, render, and write one report; returns the exit code."""
    report = compute_report(config)
    text = render_report(report, config.fmt)
    if config.out is None:
        sys.stdout.write(text)
    else:
        with open(config.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    for note in report["diagnostics"]["warnings"]:
        print(f"warning: {note}", file=sys.stderr)
    return 0


def _csv_floats(text: str):
    return [float(x) for x in text.split(",")]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="superpert",
        description="Staged superconvergent perturbation theory for finite "
        "Hermitian models, with exact and power-series baselines.",
    )
    src = parser.add_mutually_exclusive_group(required=True)
    src.add_argument("--model", help="path to a JSON model file")
    src.add_argument(
        "--builtin",
        choices=sorted(BUILTIN_MODELS),
        help="builtin model tag (needs --dim)",
    )
    parser.add_argument("--dim", type=int, help="dimension for --builtin")
    parser.add_argument("--method", choices=_METHODS, required=True)
    parser.add_argument(
        "--eps",
        required=True,
        type=_csv_floats,
        help="comma-separated list of parameter values",
    )
    parser.add_argument("--order", type=int, default=4, help="truncation order P")
    parser.add_argument(
        "--stages", type=int, default=None, help="stage count (default covers P)"
    )
    parser.add_argument(
        "--levels",
        type=lambda s: [int(x) for x in s.split(",")],
        default=[0],
        help="comma-separated level labels (default 0)",
    )
    parser.add_argument("--deg-tol", type=float, default=None)
    parser.add_argument("--gap-guard", type=float, default=None)
    parser.add_argument("--hbar", type=float, default=None)
    parser.add_argument("--format", choices=("csv", "json"), default="csv")
    parser.add_argument("--out", default=None, help="output path (default stdout)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    config = RunConfig(
        method=args.method,
        eps_list=tuple(args.eps),
        levels=tuple(args.levels),
        order=args.order,
        n_stages=args.stages,
        model_path=args.model,
        builtin=args.builtin,
        dim=args.dim,
        hbar=args.hbar,
        deg_tol=args.deg_tol,
        gap_guard=args.gap_guard,
        fmt=args.format,
        out=args.out,
    )
    try:
        return cmd_run(config)
    except (
        ModelFormatError,
        SmallDenominatorError,
        ConsistencyError,
        ValueError,
        RuntimeError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
