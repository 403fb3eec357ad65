"""Command-line entry point.

Exit codes: 0 success, 1 usage, 2 parse, 3 empty result, 4 dimension or size
guard, 5 optimizer failure.

Every command that writes a file also writes ``<file>.manifest``, a flat
``key=value`` record of the command, all resolved parameters, the seed,
SHA-256 digests of the inputs and the tool version.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .errors import (ContractError, DegenerateInputError, DimensionError, EmptyResultError, ParseError,
                     PursuitError)
from .indexes import INDEXES, get_index, jl_distortion, random_projection
from .preprocess import (CountMatrix, join_labels, load_counts, load_labels, preprocess, write_counts)
from .pursuit import PursuitConfig, embed, pca, prepare, pursue_k
from .spectra import (ESD_BINS, MPParams, esd_vs_mp_distance, mp_density, simulate_wishart_esd,
                      df_projection_experiment)
from .svg import histogram_overlay_svg, scatter_svg
from .synthetic import two_clusters

EXIT_OK, EXIT_USAGE, EXIT_PARSE, EXIT_EMPTY, EXIT_DIMENSION, EXIT_OPTIMIZER = range(6)


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage; 2 is reserved for parse errors here
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _sha256(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(out_path: str | Path, command: str, params: dict, inputs: dict[str, str | None]) -> Path:
    """Write ``<out_path>.manifest``; keys are sorted so the text is reproducible."""
    lines = [f"command={command}", f"version={__version__}"]
    for k in sorted(params):
        lines.append(f"param.{k}={params[k]}")
    if "seed" in params:
        lines.append(f"seed={params['seed']}")
    for name in sorted(inputs):
        path = inputs[name]
        if path is not None:
            lines.append(f"input.{name}={path}")
            lines.append(f"input.{name}.sha256={_sha256(path)}")
    target = Path(str(out_path) + ".manifest")
    target.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return target


def _fmt(v: float) -> str:
    return repr(float(v))


def write_embedding(path: str | Path, cell_ids: Sequence[str], Z: np.ndarray) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["cell_id"] + [f"dim{j + 1}" for j in range(Z.shape[1])])
        for cid, row in zip(cell_ids, Z):
            w.writerow([cid] + [_fmt(v) for v in row])


def _labels_for(M: CountMatrix, path: str | None) -> list[str] | None:
    return None if path is None else join_labels(M, load_labels(path))


def _plot_embedding(path: str, Z: np.ndarray, labels, title: str) -> None:
    if Z.shape[1] != 2:
        print(f"skipping plot: need k = 2, got k = {Z.shape[1]}", file=sys.stderr)
        return
    Path(path).write_text(scatter_svg(Z, labels, title=title), encoding="utf-8")


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_preprocess(args) -> int:
    M = load_counts(args.in_csv)
    out = preprocess(M, args.zero_frac, quantile=not args.skip_quantile)
    write_counts(out, args.out_csv)
    write_manifest(args.out_csv, "preprocess",
                   {"zero_frac": args.zero_frac, "skip_quantile": args.skip_quantile,
                    "order": "filter,quantile-normalize"},
                   {"in_csv": args.in_csv})
    print(f"kept {len(out.gene_ids)} of {len(M.gene_ids)} genes, {len(out.cell_ids)} cells")
    return EXIT_OK


def cmd_pca(args) -> int:
    M = load_counts(args.in_csv)
    labels = _labels_for(M, args.labels)
    A, variances = pca(M.counts, args.k)
    Z = embed(M.counts - M.counts.mean(axis=0), A)
    write_embedding(args.out_csv, M.cell_ids, Z)
    if args.plot:
        _plot_embedding(args.plot, Z, labels, "PCA")
    write_manifest(args.out_csv, "pca", {"k": args.k, "plot": args.plot},
                   {"in_csv": args.in_csv, "labels": args.labels})
    for j, v in enumerate(variances, start=1):
        print(f"dim{j} explained_variance={v:.10g}")
    return EXIT_OK


def cmd_pp(args) -> int:
    M = load_counts(args.in_csv)
    labels = _labels_for(M, args.labels)
    kwargs = {"alpha": args.alpha} if args.index == "logcosh" else {}
    index = get_index(args.index, **kwargs)
    prepared = prepare(M.counts, index, reduce=True)
    d, r = M.counts.shape[1], prepared.data.shape[1]
    if r < d:
        print(f"whitening dropped {d - r} null direction(s); searching in {r} dimensions", file=sys.stderr)
    cfg = PursuitConfig(restarts=args.restarts, seed=args.seed, max_iters=args.max_iters)
    res = pursue_k(prepared.data, index, args.k, cfg, max_k=None)
    Z = embed(prepared.data, res.directions)
    write_embedding(args.out_csv, M.cell_ids, Z)
    if args.plot:
        _plot_embedding(args.plot, Z, labels, f"projection pursuit ({args.index})")
    write_manifest(args.out_csv, "pp",
                   {"index": args.index, "k": args.k, "alpha": args.alpha, "restarts": args.restarts,
                    "max_iters": args.max_iters, "seed": args.seed, "prep": index.prep, "plot": args.plot,
                    "search_dims": r},
                   {"in_csv": args.in_csv, "labels": args.labels})
    for j, (v, r) in enumerate(zip(res.values, res.chosen_restart), start=1):
        print(f"dim{j} index={v:.10g} restart={r}")
    return EXIT_OK


def cmd_spectrum(args) -> int:
    sample = simulate_wishart_esd(args.n, args.d, args.seed)
    dist = esd_vs_mp_distance(sample)
    with open(args.out_csv, "w", newline="", encoding="utf-8") as fh:
        fh.write("eigenvalue\n")
        fh.writelines(_fmt(v) + "\n" for v in sample.eigenvalues)
    if args.plot:
        p = MPParams(sample.gamma)
        edges = np.linspace(0.0, 1.1 * p.b_plus, ESD_BINS + 1)
        counts, _ = np.histogram(sample.eigenvalues, bins=edges)
        heights = counts / (counts.sum() * (edges[1] - edges[0]))
        xs = np.linspace(p.b_minus, p.b_plus, 401)
        svg = histogram_overlay_svg(edges, heights, xs, mp_density(xs, sample.gamma),
                                    title=f"ESD vs Marcenko-Pastur, n={args.n}, d={args.d}")
        Path(args.plot).write_text(svg, encoding="utf-8")
    write_manifest(args.out_csv, "spectrum", {"n": args.n, "d": args.d, "seed": args.seed, "plot": args.plot}, {})
    print(f"gamma={sample.gamma:.6g} l1_distance={dist:.6f}")
    return EXIT_OK


def cmd_dfcheck(args) -> int:
    ks = df_projection_experiment(args.n, args.d, args.m, args.seed)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write("ks\n")
            fh.writelines(_fmt(v) + "\n" for v in ks)
        write_manifest(args.out, "dfcheck", {"n": args.n, "d": args.d, "m": args.m, "seed": args.seed}, {})
    print(f"median_ks={np.median(ks):.6f} min_ks={ks.min():.6f} max_ks={ks.max():.6f}")
    return EXIT_OK


def cmd_jl(args) -> int:
    M = load_counts(args.in_csv)
    X = M.counts
    A = random_projection(X.shape[1], args.r, args.seed)
    dist = jl_distortion(X, embed(X, A))
    ok = dist.max_relative <= args.delta
    print(f"max_relative={dist.max_relative:.6f} sum_abs={dist.sum_abs:.6g} "
          f"skipped_pairs={dist.skipped_pairs} delta={args.delta} {'PASS' if ok else 'FAIL'}")
    return EXIT_OK


def cmd_synth(args) -> int:
    data = two_clusters(args.n, args.d, args.seed)
    ids = [f"c{i}" for i in range(args.n)]
    write_counts(CountMatrix(ids, [f"f{j}" for j in range(args.d)], data.X - data.X.min()), args.out_csv)
    with open(args.labels_out, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["cell_id", "label"])
        w.writerows((c, f"cluster{lab}") for c, lab in zip(ids, data.labels))
    write_manifest(args.out_csv, "synth", {"n": args.n, "d": args.d, "seed": args.seed}, {})
    print("u=" + ",".join(f"{x:.6f}" for x in data.u))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ppursuit", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("preprocess", help="filter genes and quantile-normalize a count matrix")
    s.add_argument("in_csv")
    s.add_argument("out_csv")
    s.add_argument("--zero-frac", type=float, default=0.8,
                   help="drop genes zero in more than this fraction of cells (default 0.8)")
    s.add_argument("--skip-quantile", action="store_true")
    s.set_defaults(func=cmd_preprocess)

    s = sub.add_parser("pca", help="principal component embedding")
    s.add_argument("in_csv")
    s.add_argument("out_csv")
    s.add_argument("--k", type=int, default=2)
    s.add_argument("--labels")
    s.add_argument("--plot", help="SVG output path (k = 2 only)")
    s.set_defaults(func=cmd_pca)

    s = sub.add_parser("pp", help="projection pursuit embedding")
    s.add_argument("in_csv")
    s.add_argument("out_csv")
    s.add_argument("--index", choices=[n for n in INDEXES if n != "mean"], default="logcosh")
    s.add_argument("--k", type=int, default=2)
    s.add_argument("--alpha", type=float, default=1.0)
    s.add_argument("--restarts", type=int, default=16)
    s.add_argument("--max-iters", type=int, default=500)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--labels")
    s.add_argument("--plot", help="SVG output path (k = 2 only)")
    s.set_defaults(func=cmd_pp)

    s = sub.add_parser("spectrum", help="Wishart eigenvalues vs the Marcenko-Pastur density")
    s.add_argument("out_csv")
    s.add_argument("--n", type=int, default=2000)
    s.add_argument("--d", type=int, default=1000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--plot")
    s.set_defaults(func=cmd_spectrum)

    s = sub.add_parser("dfcheck", help="Gaussianity of random 1-D projections")
    s.add_argument("--n", type=int, default=1000)
    s.add_argument("--d", type=int, default=500)
    s.add_argument("--m", type=int, default=100)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", help="optional CSV of per-direction KS statistics")
    s.set_defaults(func=cmd_dfcheck)

    s = sub.add_parser("jl", help="distance distortion of a Gaussian random projection")
    s.add_argument("in_csv")
    s.add_argument("--r", type=int, required=True)
    s.add_argument("--delta", type=float, default=0.5)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_jl)

    s = sub.add_parser("synth", help="write the two-cluster demo data and labels")
    s.add_argument("out_csv")
    s.add_argument("labels_out")
    s.add_argument("--n", type=int, default=1000)
    s.add_argument("--d", type=int, default=10)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_synth)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except EmptyResultError as exc:
        code, err = EXIT_EMPTY, exc
    except (DimensionError, DegenerateInputError) as exc:
        code, err = EXIT_DIMENSION, exc
    except PursuitError as exc:
        code, err = EXIT_OPTIMIZER, exc
    except (ParseError, ContractError, ValueError, OSError) as exc:
        code, err = EXIT_PARSE, exc
    print(f"error: {err}", file=sys.stderr)
    return code

if __name__ == "__main__":
    sys.exit(main())
