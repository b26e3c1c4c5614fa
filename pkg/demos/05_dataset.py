# Build a small dataset, split it and print the per-instrument table.
import json
import sys
import tempfile
from fractions import Fraction
from pathlib import Path

import numpy as np

from synthtab.generate import riff_tablature
from synthtab.interchange import serialize_interchange
from synthtab.pipeline import SplitSpec, build, load_config, make_splits, stats, write_manifest
from synthtab.pipeline.stats import format_table

root = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(tempfile.mkdtemp(prefix="synthtab-demo-"))
corpus = root / "corpus"
corpus.mkdir(parents=True, exist_ok=True)

rng = np.random.default_rng(0)
for i in range(12):
    tab = riff_tablature(rng, 3.0, program=(24, 25, 26, 27)[i % 4], title=f"riff{i}")
    (corpus / f"riff{i:02d}.json").write_bytes(serialize_interchange(tab))

config = load_config(synth={"timbres": ["nylon_classical_finger", "steel_parlor_pick",
                                        "strat_neck", "tele_bridge", "archtop_neck"]})
manifest = build(corpus, config, root / "dataset")
print(json.dumps(manifest.run, indent=1))

again = build(corpus, config, root / "dataset")
print("second run rendered", again.run["rendered"], "skipped", again.run["skipped"])

spec = SplitSpec((8, 1, 1), holdout_timbres={"tele_bridge"}, holdout_song_fraction=Fraction(1, 10), seed=0)
split = make_splits(manifest, spec)
write_manifest(split, root / "dataset", {"stats": stats(split)})

report = stats(split)
print(format_table(report))
print("splits", report["splits"])
print("output in", root)
