#!/usr/bin/env python3
"""Export a CLIP text tower to the negprobe tensor container.

Sources:
  --hf NAME_OR_DIR            transformers CLIPModel / CLIPTextModelWithProjection
  --open-clip ARCH --pretrained TAG
                              open_clip model (downloads through open_clip)

    python3 tools/export_clip_text.py --hf openai/clip-vit-base-patch32 \
        --out data/pretrained/clip_text.bin

Linear weights are written [in x out]; everything is float32.
"""

import argparse
import json
import struct
import sys

import numpy as np


def write_container(path, tensors, metadata):
    header = {"__metadata__": {k: str(v) for k, v in metadata.items()}}
    offset = 0
    blobs = []
    for name in sorted(tensors):
        arr = np.ascontiguousarray(tensors[name], dtype="<f4")
        raw = arr.tobytes()
        header[name] = {"dtype": "F32", "shape": list(arr.shape),
                        "data_offsets": [offset, offset + len(raw)]}
        blobs.append(raw)
        offset += len(raw)
    text = json.dumps(header, separators=(",", ":")).encode("utf-8")
    text += b" " * (-len(text) % 8)
    with open(path, "wb") as f:
        f.write(struct.pack("<Q", len(text)))
        f.write(text)
        for raw in blobs:
            f.write(raw)


def _np(t):
    return t.detach().cpu().float().numpy()


def from_hf_state(state, n_heads, eps):
    """state: CLIPTextModelWithProjection-style names (text_model.*, text_projection.weight)."""
    def get(name):
        for prefix in ("", "text_model.", "model.text_model."):
            if prefix + name in state:
                return _np(state[prefix + name])
        raise KeyError(name)

    out = {
        "token_embedding": get("embeddings.token_embedding.weight"),
        "positional_embedding": get("embeddings.position_embedding.weight"),
        "ln_final.weight": get("final_layer_norm.weight"),
        "ln_final.bias": get("final_layer_norm.bias"),
    }
    proj = state.get("text_projection.weight")
    if proj is None:
        raise KeyError("text_projection.weight (need a model with a text projection)")
    out["text_projection"] = _np(proj).T
    n_layers = 0
    while f"text_model.encoder.layers.{n_layers}.layer_norm1.weight" in state or \
            f"encoder.layers.{n_layers}.layer_norm1.weight" in state:
        n_layers += 1
    for i in range(n_layers):
        src = f"encoder.layers.{i}."
        dst = f"layers.{i}."
        for a, b in (("layer_norm1", "ln_1"), ("layer_norm2", "ln_2")):
            out[dst + b + ".weight"] = get(src + a + ".weight")
            out[dst + b + ".bias"] = get(src + a + ".bias")
        for a, b in (("self_attn.q_proj", "attn.query"), ("self_attn.k_proj", "attn.key"),
                     ("self_attn.v_proj", "attn.value"), ("self_attn.out_proj", "attn.out"),
                     ("mlp.fc1", "mlp.fc"), ("mlp.fc2", "mlp.proj")):
            out[dst + b + ".weight"] = get(src + a + ".weight").T
            out[dst + b + ".bias"] = get(src + a + ".bias")
    return out, _metadata(out, n_layers, n_heads, eps)


def from_open_clip_state(state, n_heads, eps):
    def get(name):
        return _np(state[name])

    out = {
        "token_embedding": get("token_embedding.weight"),
        "positional_embedding": get("positional_embedding"),
        "ln_final.weight": get("ln_final.weight"),
        "ln_final.bias": get("ln_final.bias"),
        "text_projection": get("text_projection") if state["text_projection"].dim() == 2 and
        "text_projection.weight" not in state else get("text_projection.weight").T,
    }
    n_layers = 0
    while f"transformer.resblocks.{n_layers}.ln_1.weight" in state:
        n_layers += 1
    d = out["token_embedding"].shape[1]
    for i in range(n_layers):
        src = f"transformer.resblocks.{i}."
        dst = f"layers.{i}."
        for a in ("ln_1", "ln_2"):
            out[dst + a + ".weight"] = get(src + a + ".weight")
            out[dst + a + ".bias"] = get(src + a + ".bias")
        w = get(src + "attn.in_proj_weight")
        b = get(src + "attn.in_proj_bias")
        for k, name in enumerate(("query", "key", "value")):
            out[dst + f"attn.{name}.weight"] = w[k * d:(k + 1) * d].T
            out[dst + f"attn.{name}.bias"] = b[k * d:(k + 1) * d]
        out[dst + "attn.out.weight"] = get(src + "attn.out_proj.weight").T
        out[dst + "attn.out.bias"] = get(src + "attn.out_proj.bias")
        out[dst + "mlp.fc.weight"] = get(src + "mlp.c_fc.weight").T
        out[dst + "mlp.fc.bias"] = get(src + "mlp.c_fc.bias")
        out[dst + "mlp.proj.weight"] = get(src + "mlp.c_proj.weight").T
        out[dst + "mlp.proj.bias"] = get(src + "mlp.c_proj.bias")
    return out, _metadata(out, n_layers, n_heads, eps)


def _metadata(t, n_layers, n_heads, eps):
    vocab, d = t["token_embedding"].shape
    return {
        "n_layers": n_layers,
        "n_heads": n_heads,
        "d_model": d,
        "d_ff": t["layers.0.mlp.fc.weight"].shape[1],
        "d_out": t["text_projection"].shape[1],
        "context_length": t["positional_embedding"].shape[0],
        "vocab_size": vocab,
        "layer_norm_epsilon": repr(float(eps)),
    }


def export_hf(model, path):
    cfg = model.config.text_config if hasattr(model.config, "text_config") else model.config
    if getattr(cfg, "hidden_act", "quick_gelu") != "quick_gelu":
        raise SystemExit(f"unsupported activation {cfg.hidden_act}; negprobe implements quick_gelu")
    tensors, meta = from_hf_state(model.state_dict(), cfg.num_attention_heads, cfg.layer_norm_eps)
    write_container(path, tensors, meta)
    return meta


def export_open_clip(model, path):
    state = model.state_dict()
    heads = model.transformer.resblocks[0].attn.num_heads
    tensors, meta = from_open_clip_state(state, heads, model.ln_final.eps)
    write_container(path, tensors, meta)
    return meta


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    src = ap.add_mutually_exclusive_group(required=True)
    src.add_argument("--hf")
    src.add_argument("--open-clip")
    ap.add_argument("--pretrained", default="openai")
    ap.add_argument("--out", required=True)
    args = ap.parse_args()

    if args.hf:
        from transformers import CLIPTextModelWithProjection
        model = CLIPTextModelWithProjection.from_pretrained(args.hf)
        meta = export_hf(model, args.out)
    else:
        import open_clip
        model, _, _ = open_clip.create_model_and_transforms(args.open_clip, pretrained=args.pretrained)
        meta = export_open_clip(model, args.out)
    print(f"wrote {args.out}: {json.dumps(meta)}", file=sys.stderr)


if __name__ == "__main__":
    main()
