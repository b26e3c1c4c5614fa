from .benchmark import run_benchmark
from .build import build, render_track
from .config import PipelineConfig, SplitSpec, load_config
from .manifest import DatasetManifest, ManifestEntry, Rejection, read_manifest, write_manifest
from .splits import make_splits
from .stats import stats

__all__ = [
    "DatasetManifest", "ManifestEntry", "PipelineConfig", "Rejection", "SplitSpec", "build",
    "load_config", "make_splits", "read_manifest", "render_track", "run_benchmark", "stats",
    "write_manifest",
]
