#!/usr/bin/env python3
"""Convert the published CLIP BPE merge list into the negprobe vocabulary format.

Input is the gzipped merge list distributed with CLIP/open_clip
(bpe_simple_vocab_16e6.txt.gz). Output is a UTF-8 text file with one token
per line (id = line number), a blank line, then one merge rule per line.

    python3 tools/convert_clip_vocab.py bpe_simple_vocab_16e6.txt.gz data/clip_vocab.txt
"""

import argparse
import gzip


def bytes_to_unicode():
    bs = (list(range(ord("!"), ord("~") + 1))
          + list(range(ord("¡"), ord("¬") + 1))
          + list(range(ord("®"), ord("ÿ") + 1)))
    cs = bs[:]
    n = 0
    for b in range(256):
        if b not in bs:
            bs.append(b)
            cs.append(256 + n)
            n += 1
    return [chr(c) for c in cs]


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("merges_gz")
    parser.add_argument("out")
    args = parser.parse_args()

    lines = gzip.open(args.merges_gz).read().decode("utf-8").split("\n")
    # First line is a version banner; the text encoder uses 49152 - 256 - 2 merges.
    merges = [tuple(line.split()) for line in lines[1:49152 - 256 - 2 + 1]]

    base = bytes_to_unicode()
    tokens = base + [t + "</w>" for t in base]
    tokens += ["".join(m) for m in merges]
    tokens += ["<|startoftext|>", "<|endoftext|>"]

    with open(args.out, "w", encoding="utf-8", newline="\n") as f:
        for t in tokens:
            f.write(t + "\n")
        f.write("\n")
        for left, right in merges:
            f.write(f"{left} {right}\n")
    print(f"wrote {len(tokens)} tokens, {len(merges)} merges to {args.out}")


if __name__ == "__main__":
    main()
