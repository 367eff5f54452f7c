"""Smoke test for the hybridparser extension module.

Build and install first:
    pip install maturin
    maturin develop -m crates/hybrid-parser-py/Cargo.toml
"""

import json

import hybridparser as hp


def main():
    corpus = hp.synthesize(7, 60, "+phrases,+ellipsis")
    assert corpus == hp.normalize(corpus)

    first = corpus.split("\n\n")[0] + "\n"
    seq, reached = hp.oracle(first)
    assert reached and seq[0] == "SHIFT", seq

    pure, losses = hp.to_pure_graph(first)
    assert not losses, losses
    restored, errors = hp.to_hybrid_graph(pure)
    assert not errors and hp.convertible(first)

    same = hp.elas_score(first, first)
    assert same["f1"] == 1.0, same

    model = hp.Model.train(corpus, features="lemma", pipeline="integrated", seed=1, epochs=5)
    assert json.loads(model.to_json())["version"] == 1
    reloaded = hp.Model.from_json(model.to_json())
    assert reloaded.pipeline == "integrated"

    parsed = model.parse(corpus)
    score = hp.evaluate(corpus, parsed, "elas")
    assert score["f1"] > 0.9, score

    svg = hp.render(first)[0]
    assert svg.startswith("<svg") or svg.startswith("<?xml"), svg[:40]
    print("ok: train F1 %.4f over %d graphs" % (score["f1"], corpus.count("\n\n")))


if __name__ == "__main__":
    main()
