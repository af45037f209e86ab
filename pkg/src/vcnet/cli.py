"""Command-line interface.

Three subcommands::

    vcnet analyze  panel.csv -o results/   # networks + tables from a panel
    vcnet simulate spec.toml -o panel.csv  # synthetic panel from a TOML spec
    vcnet hist     panel.csv --pair i,m    # per-entity statistic histogram

Every output is deterministic: running a command twice on the same
input produces byte-identical files.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import os
import sys
from typing import Optional, Sequence

from .errors import VcnetError
from .estimator import VCNetworkAnalyzer
from .inference import UNDECIDED
from .panel import load_csv, save_csv
from .stats import PairFirmStats
from .synth import generate, load_spec

#: Statistic -> the closed interval every per-entity value lies in.
HIST_SUPPORT = {"pearson": (-1.0, 1.0), "delta_f": (-2.0, 2.0)}

DEFAULT_BIN_WIDTH = 0.05


def _fmt(v: Optional[float]) -> str:
    """General statistic formatting: 6 significant digits, '' for absent."""
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return ""
    return f"{v:.6g}"


def _fmt_p(p: float) -> str:
    if isinstance(p, float) and math.isnan(p):
        return ""
    return f"{p:.2e}"


def _render_table(headers: list[str], rows: list[list[str]]) -> str:
    """Fixed-width text table; first column left-aligned, rest right."""
    cells = [headers] + rows
    widths = [max(len(row[i]) for row in cells) for i in range(len(headers))]

    def fmt_row(row: list[str]) -> str:
        parts = [row[0].ljust(widths[0])]
        parts += [row[i].rjust(widths[i]) for i in range(1, len(row))]
        return "  ".join(parts).rstrip()

    lines = [fmt_row(headers), fmt_row(["-" * w for w in widths])]
    lines += [fmt_row(r) for r in rows]
    return "\n".join(lines) + "\n"


def _tsv(headers: list[str], rows: list[list[str]]) -> str:
    return "\n".join("\t".join(row) for row in [headers] + rows) + "\n"


def _csv(headers: list[str], rows: list[list[str]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(headers)
    writer.writerows(rows)
    return buf.getvalue()


def _write(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _pair_label(pair: tuple[str, str]) -> str:
    return f"{pair[0]}-{pair[1]}"


def _direction_label(agg) -> str:
    st = agg.source_target()
    return "none" if st is None else f"{st[0]} -> {st[1]}"


def _correlation_rows(aggregates) -> list[list[str]]:
    return [
        [_pair_label(a.pair), _fmt(a.e_c), _fmt(a.sigma_c), str(a.n_pearson)]
        for a in aggregates
    ]


def _influence_rows(aggregates) -> list[list[str]]:
    return [
        [
            _pair_label(a.pair),
            _fmt(a.e_df),
            _fmt(a.sigma_df),
            _fmt(a.z),
            _fmt_p(a.p),
            str(a.n_entities),
            _direction_label(a),
        ]
        for a in aggregates
    ]


_CORR_HEADERS = ["pair", "mean_corr", "sd_corr", "n"]
_INFL_HEADERS = ["pair", "mean_delta_f", "sd_delta_f", "z", "p", "n", "direction"]
_DETAIL_HEADERS = [
    "x",
    "y",
    "entity",
    "n_points",
    "pearson",
    "f_forward",
    "f_backward",
    "delta_f",
    "n_forward",
    "n_backward",
]


def _detail_row(s: PairFirmStats) -> list[str]:
    def cell(v: Optional[float]) -> str:
        return "" if v is None else repr(float(v))

    return [
        s.pair[0],
        s.pair[1],
        s.entity,
        str(s.n_points),
        cell(s.pearson),
        cell(s.f_forward),
        cell(s.f_backward),
        cell(s.delta_f),
        str(s.n_forward),
        str(s.n_backward),
    ]


def _parse_pair(text: str) -> tuple[str, str]:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 2 or not all(parts):
        raise argparse.ArgumentTypeError(
            f"expected a pair like 'i,m', got {text!r}"
        )
    return (parts[0], parts[1])


def _parse_denominators(text: str) -> Optional[dict]:
    """'i=r,p=r' -> mapping; 'none' -> {} (every code divides by itself)."""
    text = text.strip()
    if text.lower() == "none":
        return {}
    out: dict[str, str] = {}
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        if "=" not in item:
            raise argparse.ArgumentTypeError(
                f"expected 'code=denominator' entries, got {item!r}"
            )
        code, denom = (s.strip() for s in item.split("=", 1))
        if not code or not denom:
            raise argparse.ArgumentTypeError(f"malformed entry {item!r}")
        out[code] = denom
    return out


def _add_analysis_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--h",
        type=float,
        default=0.2,
        metavar="H",
        help="volatility threshold in standard deviations (default 0.2)",
    )
    parser.add_argument(
        "--alpha",
        type=float,
        default=0.05,
        help="two-sided significance level for directing an edge (default 0.05)",
    )
    parser.add_argument(
        "--min-rate-points",
        type=int,
        default=4,
        metavar="N",
        help="minimum rate points an entity must supply for a pair (default 4)",
    )
    parser.add_argument(
        "--denominators",
        type=_parse_denominators,
        default=None,
        metavar="MAP",
        help="rate denominators as 'code=code,...' or 'none' for own-level "
        "throughout (default: i and p divide by r)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vcnet",
        description="Directional influence networks from panel time series "
        "via volatility-constrained correlation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_analyze = sub.add_parser(
        "analyze",
        help="compute correlation and influence networks from a panel CSV",
    )
    p_analyze.add_argument("input", help="long-format panel CSV (entity,year,<codes...>)")
    p_analyze.add_argument(
        "-o",
        "--out-dir",
        default=".",
        help="directory for output files (default: current directory)",
    )
    _add_analysis_options(p_analyze)
    p_analyze.add_argument(
        "--pair",
        action="append",
        type=_parse_pair,
        metavar="X,Y",
        help="restrict analysis to this pair (repeatable; default: all pairs)",
    )
    p_analyze.set_defaults(func=_cmd_analyze)

    p_sim = sub.add_parser(
        "simulate", help="generate a synthetic panel CSV from a TOML spec"
    )
    p_sim.add_argument("spec", help="TOML generator spec")
    p_sim.add_argument("-o", "--output", required=True, help="output CSV path")
    p_sim.add_argument(
        "--seed", type=int, default=None, help="override the spec's seed"
    )
    p_sim.set_defaults(func=_cmd_simulate)

    p_hist = sub.add_parser(
        "hist", help="histogram a per-entity pair statistic across entities"
    )
    p_hist.add_argument("input", help="long-format panel CSV")
    p_hist.add_argument(
        "--pair", type=_parse_pair, required=True, metavar="X,Y", help="pair to histogram"
    )
    p_hist.add_argument(
        "--stat",
        choices=sorted(HIST_SUPPORT),
        default="delta_f",
        help="which per-entity statistic to histogram (default delta_f)",
    )
    p_hist.add_argument(
        "--bins",
        type=float,
        default=DEFAULT_BIN_WIDTH,
        metavar="WIDTH",
        help=f"bin width (default {DEFAULT_BIN_WIDTH})",
    )
    p_hist.add_argument(
        "-o", "--output", default=None, help="output TSV path (default: stdout)"
    )
    _add_analysis_options(p_hist)
    p_hist.set_defaults(func=_cmd_hist)

    return parser


def _fit_analyzer(args) -> VCNetworkAnalyzer:
    dataset = load_csv(args.input)
    analyzer = VCNetworkAnalyzer(
        h=args.h,
        alpha=args.alpha,
        min_rate_points=args.min_rate_points,
        denominators=args.denominators,
        pairs=args.pair,
    )
    return analyzer.fit(dataset)


def _cmd_analyze(args) -> int:
    analyzer = _fit_analyzer(args)
    dataset = analyzer.dataset_
    aggregates = list(analyzer.aggregates_.values())
    network = analyzer.network_

    os.makedirs(args.out_dir, exist_ok=True)
    outputs = {
        "correlation.tsv": _tsv(_CORR_HEADERS, _correlation_rows(aggregates)),
        "correlation.txt": _render_table(_CORR_HEADERS, _correlation_rows(aggregates)),
        "influence.tsv": _tsv(_INFL_HEADERS, _influence_rows(aggregates)),
        "influence.txt": _render_table(_INFL_HEADERS, _influence_rows(aggregates)),
        "network.json": network.to_json(),
        "correlation.dot": network.correlation_dot(),
        "influence.dot": network.influence_dot(),
        "entity_pairs.csv": _csv(
            _DETAIL_HEADERS,
            [
                _detail_row(s)
                for pair in analyzer.pair_stats_
                for s in analyzer.pair_stats_[pair]
            ],
        ),
    }
    written = []
    try:
        for name, text in outputs.items():
            path = os.path.join(args.out_dir, name)
            written.append(path)
            _write(path, text)
    except OSError:
        # never leave a half-written result set behind
        for path in written:
            try:
                os.unlink(path)
            except OSError:
                pass
        raise

    print(
        f"entities: {dataset.n_entities}  "
        f"years: {dataset.year_start}-{dataset.year_end}  "
        f"variables: {', '.join(v.display() for v in dataset.variables)}"
    )
    negatives = {
        c: n for c, n in analyzer.rate_panel_.negative_denominators.items() if n
    }
    if negatives:
        rendered = ", ".join(f"{c}: {n}" for c, n in negatives.items())
        print(f"rates computed against a negative denominator: {rendered}")
    print()
    print(_render_table(_INFL_HEADERS, _influence_rows(aggregates)), end="")
    print()
    decided = [a for a in aggregates if a.direction != UNDECIDED]
    if decided:
        edges = ", ".join(
            f"{_direction_label(a)} (p={_fmt_p(a.p)})" for a in decided
        )
        print(f"directed edges ({len(decided)}): {edges}")
    else:
        print("directed edges (0): none")
    print(f"wrote {len(outputs)} files to {args.out_dir}")
    return 0


def _cmd_simulate(args) -> int:
    spec = load_spec(args.spec)
    if args.seed is not None:
        spec.seed = args.seed
        spec.validate()
    dataset = generate(spec)
    save_csv(dataset, args.output)
    links = ", ".join(f"{l.source}->{l.target}({l.strength:g})" for l in spec.links)
    print(
        f"wrote {args.output}: {dataset.n_entities} entities, "
        f"years {dataset.year_start}-{dataset.year_end}, "
        f"variables {', '.join(dataset.codes())}"
        + (f", links {links}" if links else ", no links")
    )
    return 0


def histogram_rows(
    values: Sequence[float], support: tuple[float, float], width: float
) -> list[list[str]]:
    """TSV rows (bin_left, bin_right, count, density) for one histogram.

    Bins tile the support from the left edge with the given width (the
    last bin is truncated at the right edge); density is
    count / (total * bin width), so the bar areas sum to 1.
    """
    lo, hi = support
    if not width > 0.0:
        raise ValueError(f"bin width must be positive, got {width}")
    if width > hi - lo:
        width = hi - lo
    n_bins = max(int(math.ceil((hi - lo) / width - 1e-9)), 1)
    edges = [lo + k * width for k in range(n_bins)] + [hi]
    counts = [0] * n_bins
    for v in values:
        k = min(int((v - lo) / width), n_bins - 1) if v > lo else 0
        counts[k] += 1
    total = len(values)
    rows = []
    for k in range(n_bins):
        bin_width = edges[k + 1] - edges[k]
        density = counts[k] / (total * bin_width) if total else 0.0
        rows.append(
            [_fmt(edges[k]), _fmt(edges[k + 1]), str(counts[k]), _fmt(density)]
        )
    return rows


def _cmd_hist(args) -> int:
    analyzer = VCNetworkAnalyzer(
        h=args.h,
        alpha=args.alpha,
        min_rate_points=args.min_rate_points,
        denominators=args.denominators,
        pairs=[args.pair],
    )
    analyzer.fit(load_csv(args.input))
    stats = analyzer.pair_stats_[args.pair]
    values = [getattr(s, args.stat) for s in stats]
    values = [v for v in values if v is not None]
    if not values:
        raise VcnetError(
            f"no entity supports {args.stat} for pair {_pair_label(args.pair)}"
        )
    rows = histogram_rows(values, HIST_SUPPORT[args.stat], args.bins)
    text = _tsv(["bin_left", "bin_right", "count", "density"], rows)
    if args.output:
        _write(args.output, text)
        print(
            f"wrote {args.output}: {args.stat} over {len(values)} entities "
            f"for pair {_pair_label(args.pair)}"
        )
    else:
        sys.stdout.write(text)
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except VcnetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
