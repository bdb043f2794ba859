"""Regenerate the frozen CLI fixtures and golden outputs.

Run from the repository root:

    python3 tests/fixtures/make_goldens.py

Writes the input fixtures (corpus/test split + embeddings) and the golden
reports the CLI must reproduce byte-for-byte.  The script re-runs every
command twice and once multi-threaded and refuses to freeze anything that
is not already byte-stable.
"""

import pathlib
import shutil
import subprocess
import sys
import tempfile

HERE = pathlib.Path(__file__).resolve().parent
sys.path.insert(0, str(HERE.parent))  # for fixgen

from fixgen import imbalanced_dataset  # noqa: E402

from idsel.corpus import Corpus, save_corpus  # noqa: E402
from idsel.geometry import save_embeddings  # noqa: E402

SIMULATE_ARGS = [
    "simulate",
    "--corpus", "corpus.jsonl",
    "--embeddings", "embeddings.bin",
    "--n-shots", "2,4",
    "--repeats", "3",
    "--seed", "0",
    "--out", "report.json",
]
EVALUATE_ARGS = [
    "evaluate",
    "--corpus", "corpus.jsonl",
    "--embeddings", "embeddings.bin",
    "--test-file", "test.jsonl",
    "--n-shots", "2,4",
    "--repeats", "3",
    "--seed", "0",
    "--out", "report.json",
]
SELECT_ARGS = [
    "select",
    "--corpus", "corpus.jsonl",
    "--embeddings", "embeddings.bin",
    "--method", "rss",
    "--out", "selection.jsonl",
]


def write_inputs() -> None:
    corpus, emb = imbalanced_dataset(counts=(40, 25, 15), seed=77, dim=6, scale=0.6)
    ids = sorted(corpus.ids())
    test_ids = set(ids[::4])
    train = Corpus(documents=tuple(corpus.get(i) for i in ids if i not in test_ids))
    test = Corpus(documents=tuple(corpus.get(i) for i in ids if i in test_ids))
    save_corpus(train, HERE / "golden_corpus.jsonl")
    save_corpus(test, HERE / "golden_test.jsonl")
    save_embeddings(emb, HERE / "golden_embeddings.bin")
    print(f"inputs: train={len(train)} test={len(test)} embeddings={len(emb)}")


def run_cli(workdir: pathlib.Path, args: list[str], extra: list[str] = []) -> None:
    subprocess.run(
        [sys.executable, "-m", "idsel.cli", *args, *extra],
        cwd=workdir,
        check=True,
        capture_output=True,
        text=True,
    )


def produce(args: list[str], out_name: str) -> bytes:
    """Run a CLI command in a fresh directory; verify byte-stability first."""
    outputs = []
    for extra in ([], [], ["--threads", "4"]):
        with tempfile.TemporaryDirectory() as tmp:
            workdir = pathlib.Path(tmp)
            shutil.copy(HERE / "golden_corpus.jsonl", workdir / "corpus.jsonl")
            shutil.copy(HERE / "golden_test.jsonl", workdir / "test.jsonl")
            shutil.copy(HERE / "golden_embeddings.bin", workdir / "embeddings.bin")
            run_cli(workdir, args, extra)
            outputs.append((workdir / out_name).read_bytes())
    assert outputs[0] == outputs[1], "repeat run changed bytes"
    assert outputs[0] == outputs[2], "thread count changed bytes"
    return outputs[0]


def main() -> None:
    write_inputs()
    for args, golden in (
        (SIMULATE_ARGS, "golden_simulate.json"),
        (EVALUATE_ARGS, "golden_evaluate.json"),
        (SELECT_ARGS, "golden_select_rss.jsonl"),
    ):
        out_name = args[args.index("--out") + 1]
        payload = produce(args, out_name)
        (HERE / golden).write_bytes(payload)
        print(f"froze {golden} ({len(payload)} bytes)")
        print(payload.decode()[:400])
        print("---")


if __name__ == "__main__":
    main()
