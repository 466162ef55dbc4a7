#!/usr/bin/env python3
"""Smoke test for the ccim_py extension module.

Builds nothing itself: run `cargo build -p ccim-py` (or --release) first,
then `python3 python/smoke_test.py`. The script locates the compiled
cdylib under target/, imports it, and drives a miniature end-to-end run.
"""

import json
import math
import shutil
import sys
import tempfile
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent


def import_ccim_py():
    candidates = [
        REPO / "target" / "release" / "libccim_py.so",
        REPO / "target" / "debug" / "libccim_py.so",
        REPO / "target" / "release" / "libccim_py.dylib",
        REPO / "target" / "debug" / "libccim_py.dylib",
    ]
    lib = next((p for p in candidates if p.exists()), None)
    if lib is None:
        sys.exit("build the extension first: cargo build -p ccim-py")
    staging = Path(tempfile.mkdtemp(prefix="ccim_py_"))
    shutil.copy2(lib, staging / ("ccim_py" + lib.suffix.replace(".dylib", ".so")))
    sys.path.insert(0, str(staging))
    import ccim_py

    return ccim_py


def main():
    ccim = import_ccim_py()
    print(f"ccim_py {ccim.__version__}")

    gen_config = {
        "n_contexts": 6,
        "n_emotions": 3,
        "d_s": 8,
        "d_c": 12,
        "rho": 0.9,
        "sigma_s": 0.6,
        "sigma_c": 0.8,
        "subject_signal": 1.5,
        "n_train": 400,
        "n_test": 400,
        "leak_alpha": 0.0,
    }
    train, test = ccim.generate(json.dumps(gen_config), seed=1)
    assert len(train) == 400 and len(test) == 400
    assert train.split == "train" and test.split == "test"
    print(f"generated {train!r} / {test!r}")

    audit = train.bias_audit(0)
    assert 0.0 <= audit["zero_entropy_fraction"] <= 1.0
    assert all(0.0 <= h <= 1.0 for h in audit["per_context_entropy"])
    print(f"bias audit: zero-entropy fraction {audit['zero_entropy_fraction']:.3f}")

    features = train.context_features(mask_subject=True)
    dictionary = ccim.ConfounderDictionary.build(features, n=6, seed=0)
    assert dictionary.n == 6 and dictionary.dim == 12
    assert abs(sum(dictionary.priors()) - 1.0) < 1e-12
    print(f"built {dictionary!r}, priors sum to 1")

    with tempfile.TemporaryDirectory() as tmp:
        path = str(Path(tmp) / "dict.json")
        dictionary.save(path)
        reloaded = ccim.ConfounderDictionary.load(path)
        assert reloaded.fingerprint() == dictionary.fingerprint()
    print("dictionary save/load round trip ok")

    layer = ccim.CcimLayer(dictionary, joint_dim=16, out_dim=8, attn_dim=4, seed=0)
    weights = layer.attention_weights([0.1] * 16)
    assert abs(sum(weights) - 1.0) < 1e-12 and len(weights) == 6
    out = layer.forward([0.1] * 16)
    assert len(out) == 8 and all(math.isfinite(v) for v in out)
    print("intervention layer: attention normalized, forward finite")

    model_config = {
        "enc_hidden": 16,
        "d_h": 16,
        "use_ccim": True,
        "ccim": {"out_dim": 16, "attn_dim": 8, "kind": "dot_product", "use_prior": True},
        "lr": 0.1,
        "momentum": 0.9,
        "epochs": 8,
        "batch": 32,
        "seed": 0,
    }
    model = ccim.Model.train(json.dumps(model_config), train, dictionary)
    report = model.evaluate(test)
    assert 0.0 <= report["accuracy"] <= 1.0
    assert abs(report["map"] - sum(report["per_class_ap"]) / 3) < 1e-12
    assert model.loss_curve()[-1] < model.loss_curve()[0]
    print(f"trained ccim model: test accuracy {report['accuracy']:.3f}, mAP {report['map']:.3f}")

    rows = ccim.run_ablation(
        json.dumps(model_config), train, test,
        ["baseline", "ccim_full_dot"], seeds=[0], dict_n=6,
    )
    assert {r["variant"] for r in rows} == {"baseline", "ccim_full_dot"}
    print("ablation runner: " + ", ".join(f"{r['variant']}={r['map']:.3f}" for r in rows))

    ap = ccim.average_precision([3.0, 2.0, 1.0], [True, False, True])
    assert abs(ap - 5.0 / 6.0) < 1e-12
    assert abs(ccim.binary_entropy(0.25) - 0.811278) < 1e-6
    print("metric helpers ok")

    print("smoke test passed")


if __name__ == "__main__":
    main()
