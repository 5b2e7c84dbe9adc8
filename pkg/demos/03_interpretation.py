"""Demo: explaining embedding dimensions with acoustic descriptors.

The cohort from the previous demo is analyzed from its audio. Every speaker
gets a descriptor profile, the profiles are normalized, and the statistical
battery asks which descriptors explain each principal dimension, whether the
first dimensions split by gender, and how much of the embedding the
descriptors can predict.

    python3 demos/03_interpretation.py [output_dir]
"""

import sys
import tempfile
from pathlib import Path

import numpy as np

from voxinterp.audio_io import load_wav
from voxinterp.cohort import make_cohort
from voxinterp.embedding import group_by_owner, load_embeddings, pca_fit, pca_project, stack
from voxinterp.interpret import (
    age_report,
    bimodality_score,
    gendered_compare,
    gmm_fit,
    greedy_select,
    mlp_eval_cv,
    relabel_by_cluster,
)
from voxinterp.profile import SpeakerRecord, analyze_recording, fit_normalizer, read_metadata


def main(out_dir):
    print("=== DEMO: INTERPRETING PRINCIPAL DIMENSIONS ===\n")
    cohort = make_cohort(Path(out_dir) / "cohort", n_speakers=200, dim=32, seed=0)
    meta = read_metadata(cohort.metadata)

    print(f"1. DESCRIPTORS FROM AUDIO ({len(cohort.wavs)} recordings, this takes a little while)")
    records = []
    for path in cohort.wavs:
        spk = path.parent.name
        profile = analyze_recording(load_wav(path))
        records.append(SpeakerRecord(spk, *meta[spk], (profile,)))
    columns = ("fxmedian", "fxiqr", "ppq", "gne", "slope", "vtlen", "level")
    matrix, norm = fit_normalizer(records, columns)
    print(f"   {matrix.rows.shape[0]} speakers kept, {len(matrix.dropped)} dropped for gaps")
    print("   transforms: " + ", ".join(f"{c} {norm.transforms[c]}" for c in columns))
    err = [abs(r.mean_profile.vtlen - cohort.truth[r.speaker_id]["vtl"]) for r in records]
    print(f"   vtlen matches the synthetic tract length to {np.median(err):.2f} cm (median)")

    ids, E = stack(group_by_owner(load_embeddings(cohort.embeddings)))
    pos = {s: i for i, s in enumerate(ids)}
    E = E[[pos[s] for s in matrix.speaker_ids]]
    scores = pca_project(pca_fit(E), E, 4)
    gender = np.array([meta[s][0] for s in matrix.speaker_ids])

    print("\n2. GREEDY LINEAR MODELS (descriptors listed in the order they were added)")
    print("   dim  held-out corr  rmse    parameters")
    for j in range(4):
        m = greedy_select(matrix.rows, scores[:, j], matrix.columns, seed=0)
        print(f"   PC{j + 1}  {m.heldout_corr:>12.3f}  {m.heldout_rmse:6.3f}  {' '.join(m.selected)}")

    print("\n3. IS THERE A GENDER SPLIT?")
    for j in range(4):
        b = bimodality_score(scores[:, j], seed=0)
        print(f"   PC{j + 1}: Ashman's D {b['ashman_d']:.2f}, bimodal {b['bimodal']}")
    g = gmm_fit(scores[:, :2], seed=0)
    rel = relabel_by_cluster(g, scores[:, :2], gender)
    print(f"   a 2D mixture on PC1/PC2 agrees with the metadata for "
          f"{rel['agreement_percent']:.1f}% of speakers")

    print("\n4. POOLED VERSUS PER-CLUSTER MODELS")
    for j in (0, 1):
        out = gendered_compare(matrix.rows, scores[:, j], rel["relabeled"], matrix.columns)
        print(f"   PC{j + 1}: pooled corr {out['pooled']['corr']:.3f}, "
              f"per-cluster corr {out['gendered']['corr']:.3f}")
        for name, signs in out["sign_table"].items():
            print(f"        {name:<9} " + "  ".join(f"{c} {s}" for c, s in signs.items()))

    print("\n5. PREDICTING THE WHOLE EMBEDDING FROM DESCRIPTORS (5-fold MLP)")
    cv = mlp_eval_cv(matrix.rows, E, seed=0)
    print(f"   mean cosine distance {cv['mean_cosine_distance']:.3f} "
          f"versus {cv['null_mean_cosine_distance']:.3f} for the cohort mean")

    print("\n6. AGE")
    ages = np.array([meta[s][1] for s in matrix.speaker_ids])
    rep = age_report(scores, E, ages, seed=0)
    print("   per-PC correlation with age: " + ", ".join(f"{r:+.2f}" for r in rep["pc_age_r"]))
    print(f"   held-out ridge prediction r = {rep['heldout_r']:+.2f}")
    print("   Age was not used to build the embeddings, so both stay near zero.")


if __name__ == "__main__":
    if len(sys.argv) > 1:
        main(sys.argv[1])
    else:
        with tempfile.TemporaryDirectory() as tmp:
            main(tmp)
