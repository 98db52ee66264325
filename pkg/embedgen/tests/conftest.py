import shutil
import subprocess

import pytest


@pytest.fixture(scope="session")
def vocab_listing(tmp_path_factory):
    """Vocabulary listing produced by the primary toolkit's own CLI."""
    exe = shutil.which("forcelang")
    if exe is None:
        pytest.skip("forcelang console script not on PATH")
    path = tmp_path_factory.mktemp("vocab") / "vocab.txt"
    proc = subprocess.run([exe, "vocab", "--out", str(path)],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    return path
