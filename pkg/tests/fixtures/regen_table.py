"""Regenerate hash_table.tsv, the committed embedding-table fixture.

The table carries hashing-provider vectors for every required vocabulary
text plus the probe texts, in the exact format table_provider parses.
Run from the repository root:  python3 tests/fixtures/regen_table.py
"""
import pathlib

from forcelang.lang import HashingProvider, required_table_texts

HERE = pathlib.Path(__file__).parent


def main():
    provider = HashingProvider(0)
    texts = required_table_texts()
    probes = (HERE / "probe_texts.txt").read_text(encoding="utf-8").splitlines()
    for t in probes:
        if t not in texts:
            texts.append(t)
    out = HERE / "hash_table.tsv"
    with out.open("w", encoding="utf-8") as fh:
        fh.write("dim\t768\n")
        for text in texts:
            vec = provider.embed(text)
            fh.write(text + "\t" + "\t".join("%.8g" % v for v in vec) + "\n")
    print(f"wrote {len(texts)} rows to {out}")


if __name__ == "__main__":
    main()
