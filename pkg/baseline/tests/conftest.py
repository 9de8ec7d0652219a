import subprocess
import sys

import pytest

from afib_baseline.features import extract_features, load_backbone


def run_upstream(args):
    """Invoke the upstream pipeline CLI as a subprocess (external interface)."""
    return subprocess.run(
        [sys.executable, "-m", "afibdet.cli", *args],
        capture_output=True, text=True,
    )


@pytest.fixture(scope="session")
def synthetic_export(tmp_path_factory):
    """Images + manifest for 200 synthetic windows, produced by the upstream CLI."""
    root = tmp_path_factory.mktemp("export")
    cfg = root / "cfg.txt"
    cfg.write_text(f"synthetic = 200\nout_dir = {root}\n")
    for args in (
        ["segment", "--config", str(cfg)],
        ["spectrogram", "--config", str(cfg), "--all", "--export", str(root / "imgs")],
    ):
        proc = run_upstream(args)
        assert proc.returncode == 0, proc.stderr
    return {"images": str(root / "imgs"), "manifest": str(root / "manifest.csv")}


@pytest.fixture(scope="session")
def backbone():
    return load_backbone(untrained_seed=0)


@pytest.fixture(scope="session")
def feature_rows(synthetic_export, backbone):
    return extract_features(
        synthetic_export["images"], synthetic_export["manifest"], backbone
    )
