import os
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from niqqudkit import hebrew as H  # noqa: E402
import synthdata  # noqa: E402

# worked example: "mlk" as king (melekh) vs. reigned (malakh)
MLK = "מלך"
MELEKH = "מֶלֶךְ"
MALAKH = "מָלַךְ"


@pytest.fixture
def melekh_word():
    return H.parse_word(MELEKH)


@pytest.fixture
def malakh_word():
    return H.parse_word(MALAKH)


@pytest.fixture(scope="session")
def cue_train_text():
    return synthdata.cue_corpus(500, seed=11)


@pytest.fixture(scope="session")
def cue_heldout_text():
    return synthdata.cue_corpus(150, seed=12)


def nakdimon_dir() -> Path | None:
    """Directory holding the released train/test corpus, when provided.

    Looked up at $NAKDIMON_DIR or tests/data/nakdimon; must contain
    train.txt and test.txt (UTF-8 diacritized text).
    """
    candidates = []
    env = os.environ.get("NAKDIMON_DIR")
    if env:
        candidates.append(Path(env))
    candidates.append(Path(__file__).parent / "data" / "nakdimon")
    for path in candidates:
        if (path / "train.txt").is_file() and (path / "test.txt").is_file():
            return path
    return None


requires_nakdimon = pytest.mark.skipif(
    nakdimon_dir() is None,
    reason="released train/test corpus not present (see tests/data/README.md)",
)
