import hashlib
import json
import logging
import os
import shutil
import tempfile
from contextlib import contextmanager
from pathlib import Path

logger = logging.getLogger(__name__)


def derive_seed(*parts) -> int:
    """Deterministic 63-bit seed from a master seed and a path of labels/indices."""
    key = "|".join(str(p) for p in parts)
    digest = hashlib.sha256(key.encode("utf-8")).hexdigest()[:16]
    return int(digest, 16) & 0x7FFFFFFFFFFFFFFF


def format_float(value) -> str:
    """Shortest text that reads back to the same double."""
    return repr(float(value))


def write_json(path, payload) -> None:
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write('\n')


class StagedOutput:
    """
    Collects the files of one output set in a staging directory.

    Nothing appears in the output directory until ``commit`` moves every
    staged file into place.
    """

    def __init__(self, output_dir):
        self.output_dir = Path(output_dir)
        self.output_dir.mkdir(parents=True, exist_ok=True)
        self.staging_dir = Path(tempfile.mkdtemp(prefix='.staging-', dir=self.output_dir))

    def path(self, name) -> Path:
        return self.staging_dir / name

    def commit(self) -> list:
        moved = []
        for staged in sorted(self.staging_dir.rglob('*')):
            if staged.is_dir():
                continue
            target = self.output_dir / staged.relative_to(self.staging_dir)
            target.parent.mkdir(parents=True, exist_ok=True)
            os.replace(staged, target)
            moved.append(target)
        self.discard()
        return moved

    def discard(self) -> None:
        try:
            shutil.rmtree(self.staging_dir)
        except FileNotFoundError:
            pass
        except OSError as e:
            logger.warning("Failed to remove staging directory %s: %s", self.staging_dir, e)


@contextmanager
def staged_output(output_dir):
    """Stage files and commit them only if the block finishes without error."""
    staged = StagedOutput(output_dir)
    try:
        yield staged
    except BaseException:
        staged.discard()
        raise
    staged.commit()
