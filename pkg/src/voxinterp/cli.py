"""Command-line pipeline: analyze, aggregate, pca, greedy, gmm, bimodality, mlp, age, plot."""

import argparse
import logging
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from xml.etree import ElementTree

import numpy as np

from . import profile as prof
from .audio_io import ANALYSIS_RATE, ShortAudioWarning, chunk_min_duration, load_wav, resample_to_16k
from .config import ConfigError, load_config, validate
from .embedding import group_by_owner, interspeaker_stats, load_embeddings, pca_fit, pca_project
from .embedding import pca_quality_table, stack
from .errors import ColorSourceError, FormatError, RangeError, TieError, VoxInterpError
from .interpret import age_report, bimodality_score, gendered_compare, gmm_fit, greedy_select
from .interpret import mlp_eval_cv, relabel_by_cluster
from .plot import scatter_svg
from .reports import read_csv, read_json, read_pc_scores, write_csv, write_json, write_pc_scores

log = logging.getLogger("voxinterp")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(2, f"{self.prog}: error: {message}\n")


def _map(fn, items, jobs):
    """Map preserving input order; threads only when ``jobs > 1``."""
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def _outdir(path):
    p = Path(path)
    p.mkdir(parents=True, exist_ok=True)
    return p


# --- shared loading helpers ---------------------------------------------------

def _load_embedding_files(paths):
    """Per-speaker mean embeddings from one or more files with a common dimension."""
    everything, dim_of = [], {}
    for path in paths:
        embs = load_embeddings(path)
        if not embs:
            raise FormatError(f"{path}: no embeddings")
        dim_of[str(path)] = embs[0].dim
        for other, d in dim_of.items():
            if d != embs[0].dim:
                raise FormatError(f"embedding dimension {embs[0].dim} in {path} does not match "
                                  f"dimension {d} in {other}")
        everything.extend(embs)
    ids, matrix = stack(group_by_owner(everything))
    return ids, matrix


def _join(ids_a, ids_b, path_a, path_b):
    """Indices into both id lists for shared speakers, in the order of ``ids_a``."""
    pos_b = {sid: i for i, sid in enumerate(ids_b)}
    ia = [i for i, sid in enumerate(ids_a) if sid in pos_b]
    if not ia:
        raise FormatError(f"no speaker ids shared between {path_a} and {path_b}")
    return np.array(ia, dtype=int), np.array([pos_b[ids_a[i]] for i in ia], dtype=int)


def _modeled_columns(records):
    """Descriptors present for at least one speaker."""
    return tuple(c for c in prof.DESCRIPTORS
                 if any(r.mean_profile.get(c) is not None for r in records))


def _normalized(records, min_speakers=10):
    columns = _modeled_columns(records)
    if not columns:
        raise FormatError("no descriptor is present for any speaker")
    matrix, norm = prof.fit_normalizer(records, columns, min_speakers=min_speakers)
    if matrix.dropped:
        log.warning("%d speakers dropped for missing descriptors", len(matrix.dropped))
    return matrix, norm


def _pc_count(scores, requested):
    return min(scores.shape[1], requested)


# --- analyze ------------------------------------------------------------------

def cmd_analyze(args, cfg):
    if not args.audio:
        args.parser.error("no audio files given")
    min_s = cfg.run.min_chunk_seconds if args.min_chunk_seconds is None else args.min_chunk_seconds
    sidecar = prof.read_sidecar(args.sidecar) if args.sidecar else {}

    def load(path):
        try:
            clip = load_wav(path)
            if clip.sample_rate != ANALYSIS_RATE:
                clip = resample_to_16k(clip)
            return path, clip
        except (VoxInterpError, OSError) as exc:
            log.warning("skipping %s: %s", path, exc)
            return path, None

    loaded = _map(load, args.audio, cfg.run.jobs)
    by_speaker = {}
    for path, clip in loaded:
        if clip is not None:
            by_speaker.setdefault(Path(path).resolve().parent.name, []).append(clip)
    if not by_speaker:
        print("voxinterp: error: no input file could be read", file=sys.stderr)
        return 1

    segments = []
    for spk, clips in by_speaker.items():
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", ShortAudioWarning)
            chunks = chunk_min_duration(clips, min_s, prefix=spk)
        for w in caught:
            log.warning("%s", w.message)
        segments.extend((spk, c) for c in chunks)

    def analyze(item):
        spk, seg = item
        p = prof.analyze_recording(seg, sidecar.get(seg.source_id), cfg.analysis)
        missing = {k: v for k, v in p.status.items() if v not in ("ok", "Absent")}
        if missing:
            log.info("%s: unmeasured %s", seg.source_id, missing)
        return spk, seg.source_id, p

    rows = _map(analyze, segments, cfg.run.jobs)
    prof.write_features(args.out, rows)
    prof.read_features(args.out)
    return 0


# --- aggregate ----------------------------------------------------------------

def cmd_aggregate(args, cfg):
    features = prof.read_features(args.features)
    metadata = prof.read_metadata(args.metadata)
    records, missing = prof.build_speakers(features, metadata)
    if missing:
        lines = ["warnings:"] + [f"  speaker {s!r} has no row in {args.metadata}" for s in missing]
        print("\n".join(lines), file=sys.stderr)
    prof.write_speakers(args.out, records)
    prof.read_speakers(args.out)
    return 0


# --- pca ----------------------------------------------------------------------

def cmd_pca(args, cfg):
    ids, X = _load_embedding_files(args.embeddings)
    model = pca_fit(X)
    kmax = min(10, model.n_components) if args.kmax is None else args.kmax
    if not 1 <= kmax <= model.n_components:
        raise RangeError(f"--kmax {kmax} outside 1..{model.n_components}")
    table = pca_quality_table(model, X, kmax)
    out = _outdir(args.out)
    write_csv(out / "pca_quality.csv", ("k", "variance_percent", "mean_cosine_distance"),
              ([r["k"], r["variance_percent"], r["mean_cosine_distance"]] for r in table))
    write_json(out / "pca_quality.json", {
        "table": "pca_quality",
        "n_speakers": len(ids),
        "dim": int(X.shape[1]),
        "total_variance": model.total_variance,
        "eigenvalues": model.eigenvalues[:kmax],
        "rows": table,
    })
    write_pc_scores(out / "pc_scores.csv", ids, pca_project(model, X, kmax))
    if len(ids) >= 2:
        write_json(out / "interspeaker.json", {"table": "interspeaker", **interspeaker_stats(X)})
    read_pc_scores(out / "pc_scores.csv")
    read_csv(out / "pca_quality.csv", ("k",))
    return 0


# --- greedy -------------------------------------------------------------------

def _read_clusters(path):
    _, rows = read_csv(path, ("speaker_id", "cluster", "label"))
    return {r["speaker_id"]: r["label"] for r in rows}


def _model_dict(m):
    return {
        "parameters": list(m.selected),
        "coefficients": {n: m.coefficients[n] for n in m.selected},
        "intercept": m.intercept,
        "train_rmse": m.train_rmse,
        "rmse": m.heldout_rmse,
        "corr": m.heldout_corr,
        "path_heldout_rmse": list(m.path_heldout_rmse),
    }


def cmd_greedy(args, cfg):
    records = prof.read_speakers(args.speakers)
    pc_ids, scores = read_pc_scores(args.pc_scores)
    matrix, norm = _normalized(records)
    ia, ib = _join(list(matrix.speaker_ids), pc_ids, args.speakers, args.pc_scores)
    X = matrix.rows[ia]
    Y = scores[ib]
    names = matrix.columns
    ic = cfg.interpret
    n_pcs = _pc_count(Y, ic.n_pcs if args.n_pcs is None else args.n_pcs)
    seed = cfg.run.seed

    def fit(j):
        return greedy_select(X, Y[:, j], names, ic.alpha, ic.heldout_fraction, seed)

    models = _map(fit, range(n_pcs), cfg.run.jobs)
    out = _outdir(args.out)
    write_csv(out / "greedy_models.csv",
              ("dimension", "parameters", "n_parameters", "rmse", "corr", "train_rmse"),
              ([f"pc{j + 1}", " ".join(m.selected), len(m.selected), m.heldout_rmse,
                m.heldout_corr, m.train_rmse] for j, m in enumerate(models)))
    write_json(out / "greedy_models.json", {
        "table": "greedy_models",
        "n_speakers": int(X.shape[0]),
        "normalizer": norm.metadata(),
        "alpha": ic.alpha,
        "heldout_fraction": ic.heldout_fraction,
        "seed": seed,
        "models": {f"pc{j + 1}": _model_dict(m) for j, m in enumerate(models)},
    })

    if args.gendered:
        cl = _read_clusters(args.gendered)
        keep = np.array([matrix.speaker_ids[i] in cl for i in ia], dtype=bool)
        if not keep.any():
            raise FormatError(f"no speaker ids shared between {args.gendered} and {args.speakers}")
        labels = [cl[matrix.speaker_ids[i]] for i in ia[keep]]
        Xg, Yg = X[keep], Y[keep]

        def compare(j):
            return gendered_compare(Xg, Yg[:, j], labels, names, ic.alpha, ic.heldout_fraction,
                                    seed, ic.min_cluster)

        comps = _map(compare, range(n_pcs), cfg.run.jobs)
        write_csv(out / "gendered_fit.csv",
                  ("dimension", "pooled_rmse", "pooled_corr", "gendered_rmse", "gendered_corr"),
                  ([f"pc{j + 1}", c["pooled"]["rmse"], c["pooled"]["corr"],
                    c["gendered"]["rmse"], c["gendered"]["corr"]] for j, c in enumerate(comps)))
        write_json(out / "gendered_fit.json", {
            "table": "gendered_fit",
            "rows": {f"pc{j + 1}": {
                "pooled": c["pooled"], "gendered": c["gendered"],
                "models": {k: _model_dict(m) for k, m in c["models"].items()},
            } for j, c in enumerate(comps)},
        })
        sign_rows = [(f"pc{j + 1}", name, cluster, sign)
                     for j, c in enumerate(comps)
                     for name, per in c["sign_table"].items()
                     for cluster, sign in per.items()]
        write_csv(out / "sign_table.csv", ("dimension", "parameter", "cluster", "sign"), sign_rows)
        write_json(out / "sign_table.json", {
            "table": "sign_table",
            "rows": {f"pc{j + 1}": c["sign_table"] for j, c in enumerate(comps)},
        })
    read_csv(out / "greedy_models.csv", ("dimension",))
    return 0


# --- gmm ----------------------------------------------------------------------

def cmd_gmm(args, cfg):
    ids, scores = read_pc_scores(args.pc_scores)
    if scores.shape[1] < 2:
        raise FormatError(f"{args.pc_scores}: need at least two PC columns")
    meta = prof.read_metadata(args.metadata)
    labels = [meta[s][0] if s in meta else "unknown" for s in ids]
    pts = scores[:, :2]
    g = gmm_fit(pts, k=2, seed=cfg.run.seed, restarts=cfg.interpret.gmm_restarts)
    try:
        rel = relabel_by_cluster(g, pts, labels)
    except TieError as exc:
        print(f"voxinterp: error: {exc}; candidate namings: {exc.namings}", file=sys.stderr)
        return 1
    out = _outdir(args.out)
    write_csv(out / "clusters.csv", ("speaker_id", "cluster", "label", "metadata_gender"),
              zip(ids, rel["assignments"].tolist(), rel["relabeled"].tolist(), labels))
    write_json(out / "gmm.json", {
        "table": "gmm",
        "n_points": len(ids),
        "weights": g.weights,
        "means": g.means,
        "covariances": g.covariances,
        "log_likelihood": g.log_likelihood,
        "n_iter": g.n_iter,
        "converged": g.converged,
        "component_names": rel["component_names"],
        "agreement_percent": rel["agreement_percent"],
    })
    _read_clusters(out / "clusters.csv")
    return 0


# --- bimodality ---------------------------------------------------------------

def cmd_bimodality(args, cfg):
    ids, scores = read_pc_scores(args.pc_scores)
    ic = cfg.interpret

    def score(j):
        return bimodality_score(scores[:, j], seed=cfg.run.seed, threshold=ic.bimodality_threshold,
                                min_weight=ic.bimodality_min_weight, restarts=ic.gmm_restarts)

    results = _map(score, range(scores.shape[1]), cfg.run.jobs)
    out = _outdir(args.out)
    write_csv(out / "bimodality.csv", ("dimension", "ashman_d", "bimodal", "min_weight"),
              ([f"pc{j + 1}", r["ashman_d"], r["bimodal"], r["min_weight"]]
               for j, r in enumerate(results)))
    write_json(out / "bimodality.json", {
        "table": "bimodality",
        "threshold": ic.bimodality_threshold,
        "rows": {f"pc{j + 1}": {k: r[k] for k in ("ashman_d", "bimodal", "min_weight")}
                 for j, r in enumerate(results)},
    })
    read_csv(out / "bimodality.csv", ("dimension",))
    return 0


# --- mlp ----------------------------------------------------------------------

def cmd_mlp(args, cfg):
    records = prof.read_speakers(args.speakers)
    emb_ids, E = _load_embedding_files(args.embeddings)
    matrix, norm = _normalized(records)
    ia, ib = _join(list(matrix.speaker_ids), emb_ids, args.speakers, args.embeddings[0])
    res = mlp_eval_cv(matrix.rows[ia], E[ib], folds=cfg.interpret.folds, seed=cfg.run.seed,
                      config=cfg.mlp)
    out = _outdir(args.out)
    write_csv(out / "mlp_folds.csv",
              ("fold", "size", "mean_cosine_distance", "null_mean_cosine_distance"),
              ([f, n, d, z] for f, (n, d, z) in enumerate(zip(
                  res["fold_sizes"], res["fold_mean_cosine_distance"],
                  res["null_fold_mean_cosine_distance"]))))
    write_json(out / "mlp.json", {
        "table": "mlp",
        "n_speakers": int(ia.size),
        "inputs": list(matrix.columns),
        "layer_sizes": [len(matrix.columns), *cfg.mlp.hidden, int(E.shape[1])],
        **res,
    })
    read_json(out / "mlp.json")
    return 0


# --- age ----------------------------------------------------------------------

def cmd_age(args, cfg):
    pc_ids, scores = read_pc_scores(args.pc_scores)
    emb_ids, E = _load_embedding_files(args.embeddings)
    meta = prof.read_metadata(args.metadata)
    ia, ib = _join(pc_ids, emb_ids, args.pc_scores, args.embeddings[0])
    ages = np.array([np.nan if meta.get(pc_ids[i], (None, None))[1] is None
                     else meta[pc_ids[i]][1] for i in ia])
    known = np.isfinite(ages)
    if not known.any():
        raise FormatError(f"no speaker in {args.pc_scores} has an age in {args.metadata}")
    res = age_report(scores[ia[known]], E[ib[known]], ages[known], seed=cfg.run.seed,
                     lam=cfg.interpret.ridge_lambda,
                     heldout_fraction=cfg.interpret.heldout_fraction)
    out = _outdir(args.out)
    write_csv(out / "age_report.csv", ("dimension", "age_r"),
              ([f"pc{j + 1}", r] for j, r in enumerate(res["pc_age_r"])))
    write_json(out / "age_report.json", {"table": "age_report", **res})
    read_csv(out / "age_report.csv", ("dimension",))
    return 0


# --- plot ---------------------------------------------------------------------

def cmd_plot(args, cfg):
    ids, scores = read_pc_scores(args.pc_scores)
    for axis in (args.x, args.y):
        if not 1 <= axis <= scores.shape[1]:
            raise RangeError(f"PC {axis} not in {args.pc_scores} (has pc1..pc{scores.shape[1]})")
    if args.color in ("gender", "age"):
        if not args.metadata:
            raise ColorSourceError(f"--color {args.color} needs --metadata")
        meta = prof.read_metadata(args.metadata)
        col = 0 if args.color == "gender" else 1
        values = [meta[s][col] if s in meta else None for s in ids]
    else:
        if not args.clusters:
            raise ColorSourceError("--color cluster needs --clusters")
        cl = _read_clusters(args.clusters)
        values = [cl.get(s) for s in ids]
    mode = "decade" if args.color == "age" else "categorical"
    svg = scatter_svg(scores[:, args.x - 1], scores[:, args.y - 1], values, mode,
                      xlabel=f"PC {args.x}", ylabel=f"PC {args.y}")
    Path(args.out).write_text(svg)
    ElementTree.parse(args.out)
    return 0


# --- parser -------------------------------------------------------------------

def build_parser():
    p = _Parser(prog="voxinterp", description=__doc__)
    p.add_argument("--config", help="INI file overriding default parameters")
    p.add_argument("--seed", type=int, help="seed for every randomized step")
    p.add_argument("--jobs", type=int, help="worker threads (results do not depend on it)")
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    a = sub.add_parser("analyze", help="descriptors for WAV files (speaker = parent directory)")
    a.add_argument("audio", nargs="*")
    a.add_argument("--sidecar", help="CSV segment_id,stoi,pesq")
    a.add_argument("--out", required=True, help="features CSV")
    a.add_argument("--min-chunk-seconds", type=float)
    a.set_defaults(func=cmd_analyze)

    g = sub.add_parser("aggregate", help="per-speaker mean profiles joined with metadata")
    g.add_argument("--features", required=True)
    g.add_argument("--metadata", required=True)
    g.add_argument("--out", required=True, help="speakers CSV")
    g.set_defaults(func=cmd_aggregate)

    c = sub.add_parser("pca", help="PCA quality table, PC scores and distance statistics")
    c.add_argument("--embeddings", required=True, nargs="+")
    c.add_argument("--kmax", type=int)
    c.add_argument("--out", required=True, help="output directory")
    c.set_defaults(func=cmd_pca)

    r = sub.add_parser("greedy", help="greedy linear models of PC scores")
    r.add_argument("--speakers", required=True)
    r.add_argument("--pc-scores", required=True)
    r.add_argument("--gendered", help="clusters CSV from the gmm command")
    r.add_argument("--n-pcs", type=int)
    r.add_argument("--out", required=True)
    r.set_defaults(func=cmd_greedy)

    m = sub.add_parser("gmm", help="two-component mixture on PC1/PC2 and gender relabeling")
    m.add_argument("--pc-scores", required=True)
    m.add_argument("--metadata", required=True)
    m.add_argument("--out", required=True)
    m.set_defaults(func=cmd_gmm)

    b = sub.add_parser("bimodality", help="Ashman's D per PC")
    b.add_argument("--pc-scores", required=True)
    b.add_argument("--out", required=True)
    b.set_defaults(func=cmd_bimodality)

    n = sub.add_parser("mlp", help="cross-validated MLP from descriptors to embeddings")
    n.add_argument("--speakers", required=True)
    n.add_argument("--embeddings", required=True, nargs="+")
    n.add_argument("--out", required=True)
    n.set_defaults(func=cmd_mlp)

    e = sub.add_parser("age", help="age correlation per PC and held-out age prediction")
    e.add_argument("--pc-scores", required=True)
    e.add_argument("--embeddings", required=True, nargs="+")
    e.add_argument("--metadata", required=True)
    e.add_argument("--out", required=True)
    e.set_defaults(func=cmd_age)

    s = sub.add_parser("plot", help="SVG scatter of two PCs")
    s.add_argument("--pc-scores", required=True)
    s.add_argument("--x", type=int, default=1)
    s.add_argument("--y", type=int, default=2)
    s.add_argument("--color", choices=("gender", "age", "cluster"), default="gender")
    s.add_argument("--metadata")
    s.add_argument("--clusters")
    s.add_argument("--out", required=True, help="SVG file")
    s.set_defaults(func=cmd_plot)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("voxinterp: %(levelname)s: %(message)s"))
    log.handlers = [handler]
    log.setLevel(max(logging.WARNING - 10 * args.verbose, logging.DEBUG))
    sub = parser._subparsers._group_actions[0].choices[args.command]
    args.parser = sub
    try:
        cfg = load_config(args.config).with_overrides(seed=args.seed, jobs=args.jobs)
        validate(cfg)
        return args.func(args, cfg)
    except (VoxInterpError, ConfigError, OSError) as exc:
        print(f"voxinterp: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
