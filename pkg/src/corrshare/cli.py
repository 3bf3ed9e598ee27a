"""Command line entry point: ``corrshare <subcommand> ...``.

Every run writes tab-separated outputs plus ``manifest.json`` echoing the
configuration. Exit codes: 0 success, 2 usage error, 3 input or validation
error, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .evaluation import (
    fdr_curve,
    observed_statistics,
    permutation_null,
    train_test_validate,
    truth_curve,
)
from .exceptions import NumericalError, ParseError, ValidationError
from .ingest import (
    DatasetHandle,
    filter_top_variance,
    load_expression_matrix,
    load_outcome,
    validate_dataset,
    write_expression_matrix,
    write_outcome,
)
from .oracle import lemma1_experiment, noncentrality_curve, power_gain_condition
from .residual import DEFAULT_QUANTILES, avg_abs_residual_corr, residual_corr_scan, residual_matrix
from .scores import score, score_values
from .simulate import SimSpec, gen_custom, gen_oracle_means
from .sharing import CorrelationNeighbors, ShareOptions, shared_stat

log = logging.getLogger("corrshare")

EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4

# settings that never change results; kept out of the manifest so reruns
# with a different worker count produce identical files
_NON_RESULT_KEYS = {"workers", "out", "func", "verbose"}


def _fmt(v):
    if v is None:
        return "NA"
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_tsv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\t".join(header) + "\n")
        for row in rows:
            fh.write("\t".join(_fmt(v) for v in row) + "\n")


def write_manifest(out, args, extra=None):
    config = {k: v for k, v in sorted(vars(args).items()) if k not in _NON_RESULT_KEYS}
    manifest = {"program": "corrshare", "version": __version__, "config": config}
    if extra:
        manifest.update(extra)
    with open(Path(out) / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True, default=_fmt)
        fh.write("\n")


def read_truth(path, feature_ids):
    lookup = {f: i for i, f in enumerate(feature_ids)}
    with open(path, encoding="utf-8") as fh:
        ids = [ln.strip() for ln in fh if ln.strip()]
    if ids and ids[0] == "feature_id":
        ids = ids[1:]
    return sorted(lookup[f] for f in ids if f in lookup)


def _options(args):
    return ShareOptions(args.max_neighborhood, args.corr_floor)


def load_dataset(args) -> DatasetHandle:
    for p in (args.matrix, args.outcome):
        if not Path(p).is_file():
            raise FileNotFoundError(f"no such file: {p}")
    matrix = load_expression_matrix(args.matrix)
    outcome = load_outcome(args.outcome, args.outcome_kind)
    if args.top_variance:
        matrix = filter_top_variance(matrix, args.top_variance)
    handle = validate_dataset(matrix, outcome)
    sv = score(handle, raw_eq2=getattr(args, "raw_eq2", False))
    if sv.unscorable:
        keep = np.flatnonzero(sv.scorable_mask)
        if len(keep) == 0:
            raise NumericalError("no feature has a computable score")
        dropped = handle.dropped_features + [
            (handle.matrix.feature_ids[i], "zero information") for i in sv.unscorable
        ]
        handle = DatasetHandle(handle.matrix.subset_features(keep), outcome, dropped)
    for fid, reason in handle.dropped_features:
        log.warning("dropped feature %s: %s", fid, reason)
    return handle


def _write_fdr(path, curve):
    write_tsv(
        path,
        ["cutoff", "n_called", "est_false_positives", "est_fdr"],
        curve.rows(),
    )


def _write_truth(path, curve):
    write_tsv(
        path,
        ["cutoff", "n_called", "n_false_positive", "n_false_negative"],
        zip(curve.cutoffs, curve.n_called, curve.n_false_positive, curve.n_false_negative),
    )


def _fdr_outputs(args, handle, out, truth=None):
    opts = _options(args)
    nb = CorrelationNeighbors.from_matrix(handle.matrix.values, opts, workers=args.workers)
    T, r = observed_statistics(handle, nb, raw_eq2=args.raw_eq2, workers=args.workers)
    null = permutation_null(
        handle,
        opts,
        B=args.permutations,
        seed=args.seed,
        workers=args.workers,
        raw_eq2=args.raw_eq2,
        neighbors=nb,
    )
    _write_fdr(out / "fdr_t.tsv", fdr_curve(T, null.abs_T, estimator=args.fp_estimator))
    _write_fdr(out / "fdr_r.tsv", fdr_curve(r, null.abs_r, estimator=args.fp_estimator))
    if truth is not None:
        _write_truth(out / "truth_t.tsv", truth_curve(T, truth))
        _write_truth(out / "truth_r.tsv", truth_curve(r, truth))
    return nb, T, r, null


def _write_dropped(out, handle):
    write_tsv(out / "dropped.tsv", ["feature_id", "reason"], handle.dropped_features)


def cmd_analyze(args):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    handle = load_dataset(args)
    nb, T, r, null = _fdr_outputs(args, handle, out)
    res = shared_stat(handle.matrix, T, _options(args), neighbors=nb, workers=args.workers)
    ids = handle.matrix.feature_ids
    write_tsv(
        out / "scores.tsv",
        ["feature_id", "T", "r", "rho_hat", "neighborhood_size", "member_ids"],
        (
            (ids[i], res.T[i], res.r[i], res.rho_hat[i], len(mb), ",".join(ids[j] for j in mb))
            for i, mb in enumerate(res.members)
        ),
    )
    _write_dropped(out, handle)
    write_manifest(
        out, args, {"n_features": len(ids), "n_permutations": null.n_permutations,
                    "exhaustive_permutations": null.exhaustive},
    )


def cmd_fdr(args):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    handle = load_dataset(args)
    truth = read_truth(args.truth, handle.matrix.feature_ids) if args.truth else None
    _, _, _, null = _fdr_outputs(args, handle, out, truth)
    _write_dropped(out, handle)
    write_manifest(out, args, {"n_permutations": null.n_permutations,
                               "exhaustive_permutations": null.exhaustive})


def cmd_simulate(args):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    presets = {"example1": {}, "example2": {"rho": 0.0}}
    params = dict(presets.get(args.preset, {}))
    for key in ("m", "n", "n_nonnull", "shift", "rho", "group2_start"):
        val = getattr(args, key)
        if val is not None:
            params[key] = val
    data = gen_custom(SimSpec(seed=args.seed, **params))
    write_expression_matrix(data.matrix, out / "matrix.tsv")
    write_outcome(data.outcome, out / "outcome.tsv")
    write_tsv(out / "truth.tsv", ["feature_id"], ([data.matrix.feature_ids[i]] for i in data.truth))
    write_manifest(out, args)


def cmd_residual_scan(args):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    handle = load_dataset(args)
    T = score_values(handle.matrix.values, handle.outcome, raw_eq2=args.raw_eq2)
    scan = residual_corr_scan(handle, T, DEFAULT_QUANTILES)
    write_tsv(
        out / "residual_scan.tsv",
        ["quantile", "n_called", "within_called", "called_vs_uncalled", "within_uncalled"],
        (
            (row.quantile, row.n_called, row.within_called, row.called_vs_uncalled,
             row.within_uncalled)
            for row in scan.rows
        ),
    )
    extra = {"excluded_zero_residual": scan.excluded}
    if args.truth:
        truth = read_truth(args.truth, handle.matrix.feature_ids)
        null = sorted(set(range(handle.matrix.n_features)) - set(truth))
        res = residual_matrix(handle)
        write_tsv(
            out / "residual_truth.tsv",
            ["pair_set", "avg_abs_residual_corr"],
            [
                ("nonnull_nonnull", avg_abs_residual_corr(res, truth, truth)),
                ("nonnull_null", avg_abs_residual_corr(res, truth, null)),
                ("null_null", avg_abs_residual_corr(res, null, null)),
            ],
        )
    write_manifest(out, args, extra)


def cmd_validate(args):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    handle = load_dataset(args)
    curves, info = train_test_validate(
        handle,
        _options(args),
        split_fraction=args.split_fraction,
        seed=args.seed,
        raw_eq2=args.raw_eq2,
        workers=args.workers,
    )
    for name, curve in curves.items():
        write_tsv(
            out / f"agreement_{name}.tsv",
            ["cutoff", "n_called_train", "test_false_positives", "test_false_negatives"],
            zip(curve.cutoffs, curve.n_called_train, curve.test_false_positives,
                curve.test_false_negatives),
        )
    write_manifest(out, args, {"split": info})


def cmd_oracle(args):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    m_nonnull = args.m_nonnull or (80 if args.preset == "least-favorable" else 100)
    betas = gen_oracle_means(args.preset, m_nonnull, seed=args.seed)
    curves = noncentrality_curve(betas, args.rho, n=args.n)
    write_tsv(
        out / "oracle_curve.tsv",
        ["r", "beta_bar", "noncentrality"],
        zip(curves.r, curves.beta_bar, curves.noncentrality),
    )
    gain = power_gain_condition(betas, args.rho)
    write_tsv(
        out / "oracle_reference.tsv",
        ["quantity", "value"],
        [
            ("r_star", curves.r_star),
            ("noncentrality_at_r_star", curves.pi_at_r_star),
            ("noncentrality_r1", curves.pi_r1),
            ("t1_noncentrality", curves.t1_noncentrality),
            ("power_gain", gain.holds),
            ("power_gain_margin", gain.margin),
        ],
    )
    if args.lemma1:
        table = lemma1_experiment(
            m=args.lemma1_m,
            C_values=args.lemma1_c,
            n_reps=args.lemma1_reps,
            rho_structure=args.lemma1_structure,
            seed=args.seed,
            workers=args.workers,
        )
        write_tsv(
            out / "lemma1.tsv",
            ["C", "n", "median_max_error"],
            ((row["C"], row["n"], row["median_max_error"]) for row in table),
        )
    write_manifest(out, args)


def _data_flags(p, permutations=False):
    p.add_argument("--matrix", required=True, help="features-as-rows TSV")
    p.add_argument("--outcome", required=True, help="one record per sample")
    p.add_argument("--outcome-kind", choices=("twoclass", "survival"), default="twoclass")
    p.add_argument("--top-variance", type=int, default=None, metavar="K",
                   help="keep the K features of largest overall variance")
    p.add_argument("--raw-eq2", action="store_true",
                   help="t denominator without the sqrt(1/n1 + 1/n2) factor")
    _share_flags(p)
    if permutations:
        p.add_argument("--permutations", type=_positive_int, default=100, metavar="B")
        p.add_argument("--fp-estimator", choices=("mean", "median"), default="mean")


def _share_flags(p):
    p.add_argument("--max-neighborhood", type=_positive_int, default=None, metavar="K")
    p.add_argument("--corr-floor", type=float, default=0.0, metavar="DELTA")


def _common_flags(p):
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--workers", type=_positive_int, default=os.cpu_count() or 1)


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def build_parser():
    parser = argparse.ArgumentParser(prog="corrshare", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="scores, shared scores, neighbourhoods, FDR curves")
    _data_flags(p, permutations=True)
    _common_flags(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("fdr", help="permutation FDR curves (and truth curves if --truth)")
    _data_flags(p, permutations=True)
    p.add_argument("--truth", default=None, help="file of non-null feature ids")
    _common_flags(p)
    p.set_defaults(func=cmd_fdr)

    p = sub.add_parser("simulate", help="write a synthetic dataset")
    p.add_argument("--preset", choices=("example1", "example2", "custom"), default="example1")
    p.add_argument("--m", type=_positive_int, default=None)
    p.add_argument("--n", type=_positive_int, default=None)
    p.add_argument("--n-nonnull", type=int, default=None)
    p.add_argument("--shift", type=float, default=None)
    p.add_argument("--rho", type=float, default=None)
    p.add_argument("--group2-start", type=int, default=None)
    _common_flags(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("residual-scan", help="average absolute residual correlations")
    _data_flags(p)
    p.add_argument("--truth", default=None, help="file of non-null feature ids")
    _common_flags(p)
    p.set_defaults(func=cmd_residual_scan)

    p = sub.add_parser("validate", help="train/test agreement of calls")
    _data_flags(p)
    p.add_argument("--split-fraction", type=float, default=0.5)
    _common_flags(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("oracle", help="Cesaro averages and noncentrality curves")
    p.add_argument("--preset", choices=("least-favorable", "random-effects"),
                   default="least-favorable")
    p.add_argument("--m-nonnull", type=_positive_int, default=None)
    p.add_argument("--rho", type=float, default=0.5)
    p.add_argument("--n", type=_positive_int, default=1)
    p.add_argument("--lemma1", action="store_true", help="also run the concentration experiment")
    p.add_argument("--lemma1-m", type=_positive_int, default=200)
    p.add_argument("--lemma1-c", type=float, nargs="+", default=[5, 20, 80])
    p.add_argument("--lemma1-reps", type=_positive_int, default=50)
    p.add_argument("--lemma1-structure", choices=("identity", "block"), default="identity")
    _common_flags(p)
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        args.func(args)
    except (ParseError, ValidationError, FileNotFoundError) as exc:
        print(f"corrshare: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (NumericalError, FloatingPointError) as exc:
        print(f"corrshare: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"corrshare: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return 0


if __name__ == "__main__":
    sys.exit(main())
