# Frame labels from a compiled score, and tablature precision/recall/F1.
import sys
from pathlib import Path

import numpy as np

from synthtab import HumanizeConfig, compile_track, labels_from_score, load_labels, parse_tab_dsl, save_labels, tab_f1
from synthtab.labels import DEFAULT_HOP_S, labels_to_csv
from synthtab.metrics import aggregate

out = Path(sys.argv[1] if len(sys.argv) > 1 else ".")
out.mkdir(parents=True, exist_ok=True)

tab = parse_tab_dsl("""
tempo 120 tpq 480
note s1 f0 @0 d960
note s2 f3 @0 d480
note s3 f2 @480 d480 bend=1
""")
score = compile_track(tab.tracks[0], 120, 480, HumanizeConfig.off())
labels = labels_from_score(score, DEFAULT_HOP_S)
print(labels.active.shape, labels.hop_s, "segments", labels.segments())
print(labels_to_csv(labels).splitlines()[:4])

save_labels(labels, out / "demo.labels")
print(load_labels(out / "demo.labels") == labels)

# perturb the truth to make a "prediction"
rng = np.random.default_rng(3)
pred = labels.active.copy()
drop = rng.random(pred.shape[0]) < 0.2
pred[drop] = False
pred[5:8, 5, 7] = True
r = tab_f1(pred, labels)
print(f"P={r.precision:.3f} R={r.recall:.3f} F1={r.f1:.3f} tp={r.tp} fp={r.fp} fn={r.fn}")
print([round(s.f1, 3) for s in r.per_string])

reports = [r, tab_f1(labels.active, labels.active)]
print(aggregate(reports, "micro").f1, aggregate(reports, "macro").f1)
