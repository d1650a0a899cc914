"""Acceptance suite: every criterion at its stated tolerance, one pass/fail line each.

Run standalone with ``python tests/test_acceptance.py`` or through pytest.
"""
import os

import pytest

from monoloc import cli, verify
from monoloc.config import preset
from monoloc.emit import sha256

CFG = preset("golden-sawtooth-lambda10")


@pytest.mark.parametrize("fn", verify.CRITERIA, ids=lambda f: f.__name__.split("_", 1)[0].upper())
def test_criterion(fn, capsys):
    r = fn(CFG)
    with capsys.disabled():
        print(f"\n{r.line()}  {r.detail}")
    assert r.passed, r.detail


def test_verify_json_hash_identical(tmp_path, capsys):
    """The verify command writes identical verify.json for repeated runs and thread counts."""
    digests = []
    for run, threads in enumerate(("1", "3", "1")):
        out = str(tmp_path / f"run{run}")
        assert cli.main(["verify", "--preset", "golden-sawtooth-lambda10", "--threads", threads,
                         "--out", out]) == 0
        digests.append(sha256(os.path.join(out, "verify.json")))
    capsys.readouterr()
    assert len(set(digests)) == 1


if __name__ == "__main__":
    ok = True
    for r in verify.run_all(CFG):
        print(r.line())
        ok &= r.passed
    raise SystemExit(0 if ok else 1)
