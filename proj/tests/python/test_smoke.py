# Copyright 2026 The memre Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
import json
import math
import os
import pathlib

import numpy as np
import pytest

import memre

FIXTURES = pathlib.Path(__file__).resolve().parents[2] / "fixtures"


def test_prior_shift():
    assert memre.prior_shift(0.3, 0.3) == 0.0
    assert memre.prior_shift(0.3, 0.0) == 0.3
    assert memre.prior_shift(0.3, 0.1) == pytest.approx(0.2 / 0.9, rel=1e-15)
    with pytest.raises(memre.InvalidPriorError):
        memre.prior_shift(0.2, 0.3)


def test_worked_example():
    value = memre.risk("ssr-pu", [[0.0], [0.0]], [[True], [False]], [0.5], [0.25])
    assert abs(value - math.log(2)) < 1e-12


def test_ssr_reduces_to_pu():
    rng = np.random.default_rng(0)
    scores = rng.uniform(-3, 3, size=(9, 4)).tolist()
    positive = (rng.uniform(size=(9, 4)) < 0.3).tolist()
    pi = [0.1, 0.2, 0.3, 0.4]
    zero = [0.0] * 4
    assert memre.risk("ssr-pu", scores, positive, pi, zero) == memre.risk(
        "pu", scores, positive, pi, zero
    )


def test_pn_needs_no_priors():
    assert memre.risk("pn", [[0.0], [0.0]], [[True], [False]]) == pytest.approx(
        2 * math.log(2)
    )
    with pytest.raises(memre.ConfigError):
        memre.risk("hinge", [[0.0]], [[True]])


def test_micro_prf():
    gold = [("d", 0, 1, 1), ("d", 1, 0, 2)]
    preds = [("d", 0, 1, 1), ("d", 2, 0, 1)]
    r = memre.micro_prf(preds, gold)
    assert r["correct"] == 1
    assert r["f1"] == pytest.approx(0.5)


def test_corpus_stats():
    s = memre.corpus_stats(str(FIXTURES / "docred_mini.json"))
    assert s["docs"] == 3
    assert s["mean_triples"] == pytest.approx(8 / 3)
    with pytest.raises(memre.InputError):
        memre.corpus_stats(str(FIXTURES / "absent.json"))


def test_pca_matches_numpy():
    rng = np.random.default_rng(3)
    x = rng.normal(size=(30, 4)) * np.array([4.0, 2.0, 1.0, 0.5])
    out = memre.pca(x.tolist(), 2)
    cov = np.cov(x, rowvar=False)
    want = np.sort(np.linalg.eigvalsh(cov))[::-1]
    assert np.allclose(out["eigenvalues"], want, rtol=1e-9)
    proj = np.array(out["projection"])
    assert np.allclose(proj.var(axis=0, ddof=1), want[:2], rtol=1e-9)


def test_config_round_trip():
    text = memre.normalize_config("seed = 3\nmemory_size = 10\n")
    assert "memory_size = 10" in text
    assert memre.normalize_config(text) == text
    with pytest.raises(memre.ConfigError):
        memre.normalize_config("bogus = 1\n")


def test_cli_end_to_end(tmp_path):
    cfg = tmp_path / "tiny.cfg"
    cfg.write_text(
        "seed = 2\ndim = 16\nmemory_size = 4\nread_layers = 1\n"
        "train_docs = 16\ndev_docs = 6\ntest_docs = 6\n"
        "[stage]\nsplit = train\nepochs = 1\n"
    )
    data, run = tmp_path / "data", tmp_path / "run"
    code, _, err = memre.run_cli(["gen-data", "--config", str(cfg), "--out", str(data)])
    assert code == 0, err
    code, _, err = memre.run_cli(
        ["train", "--config", str(cfg), "--data", str(data), "--out", str(run)]
    )
    assert code == 0, err
    metrics = json.loads((run / "metrics.test.json").read_text())
    assert 0.0 <= metrics["f1"] <= 1.0
    manifest = json.loads((run / "manifest.json").read_text())
    assert manifest["command"] == "train"
    code, _, err = memre.run_cli(["eval", "--ckpt", str(run / "nope.ckpt")])
    assert code == 2
    assert "checkpoint not found" in err
