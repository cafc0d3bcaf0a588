#!/usr/bin/env python3
"""Cross-check `negprobe encode` against transformers and open_clip on random CLIP text towers.

usage: hf_crosscheck.py NEGPROBE_EXE EXPORT_SCRIPT
Exit 77 when torch or transformers is unavailable.
"""

import importlib.util
import json
import subprocess
import sys
import tempfile
from pathlib import Path

try:
    import numpy as np
    import torch
    from transformers import CLIPTextConfig, CLIPTextModelWithProjection
except ImportError as e:
    print(f"skip: {e}")
    sys.exit(77)

TEXTS = [
    "a photo of a cat",
    "not a dog",
    "there is no polar bear in the picture",
    "a man without a hat, walking",
    "",
]
TOL = 1e-4


def load_exporter(path):
    spec = importlib.util.spec_from_file_location("export_clip_text", path)
    mod = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(mod)
    return mod


def negprobe(exe, *args):
    r = subprocess.run([exe, *args], capture_output=True, text=True)
    if r.returncode != 0:
        raise SystemExit(f"{' '.join(args[:1])} failed ({r.returncode}): {r.stderr}")
    return r.stdout


def token_ids(exe, text):
    lines = negprobe(exe, "tokenize", "--text", text).splitlines()
    return [int(x) for x in lines[0].split()]


def encode(exe, weights, text):
    return np.array(json.loads(negprobe(exe, "encode", "--weights", weights, "--text", text)))


def compare(label, exe, weights, reference):
    worst = 0.0
    for text in TEXTS:
        ids = torch.tensor([token_ids(exe, text)])
        with torch.no_grad():
            want = reference(ids).double().numpy()[0]
        got = encode(exe, weights, text)
        err = float(np.max(np.abs(got - want)))
        worst = max(worst, err)
        if err > TOL:
            print(f"{label}: '{text}' max abs err {err:.3e} > {TOL}")
            return False
    print(f"{label}: {len(TEXTS)} texts, max abs err {worst:.3e}")
    return True


def hf_case(exe, exporter, tmp):
    torch.manual_seed(7)
    cfg = CLIPTextConfig(vocab_size=49408, hidden_size=64, intermediate_size=160,
                         num_hidden_layers=2, num_attention_heads=4, max_position_embeddings=77,
                         projection_dim=24, hidden_act="quick_gelu",
                         bos_token_id=49406, eos_token_id=49407, pad_token_id=49407)
    model = CLIPTextModelWithProjection(cfg).eval()
    # default init leaves LayerNorm at identity; perturb so the affine path is exercised
    with torch.no_grad():
        for name, p in model.named_parameters():
            if "layer_norm" in name:
                p.add_(0.1 * torch.randn_like(p))
    path = str(tmp / "hf.bin")
    exporter.export_hf(model, path)
    return compare("transformers", exe, path, lambda ids: model(input_ids=ids).text_embeds)


def open_clip_case(exe, exporter, tmp):
    try:
        from open_clip.model import CLIP, CLIPTextCfg, CLIPVisionCfg
    except ImportError:
        print("open_clip: not installed, skipped")
        return True
    torch.manual_seed(11)
    model = CLIP(embed_dim=24,
                 vision_cfg=CLIPVisionCfg(layers=1, width=32, head_width=16, patch_size=16, image_size=32),
                 text_cfg=CLIPTextCfg(context_length=77, vocab_size=49408, width=64, heads=4, layers=2),
                 quick_gelu=True).eval()
    with torch.no_grad():
        for name, p in model.named_parameters():
            if "ln_" in name and not name.startswith("visual"):
                p.add_(0.1 * torch.randn_like(p))
    path = str(tmp / "open_clip.bin")
    exporter.export_open_clip(model, path)
    return compare("open_clip", exe, path, lambda ids: model.encode_text(ids))


def main():
    if len(sys.argv) != 3:
        print(__doc__)
        return 2
    exe, script = sys.argv[1], sys.argv[2]
    exporter = load_exporter(script)
    with tempfile.TemporaryDirectory() as d:
        tmp = Path(d)
        ok = hf_case(exe, exporter, tmp)
        ok = open_clip_case(exe, exporter, tmp) and ok
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
