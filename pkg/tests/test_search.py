import numpy as np
import pytest

from markov_commutator import io, search
from markov_commutator.errors import UnknownVariant


def test_trial_seed_matches_spawn():
    spawned = np.random.SeedSequence(7).spawn(5)
    for i in range(5):
        a = np.random.default_rng(search.trial_seed(7, i)).random(3)
        b = np.random.default_rng(spawned[i]).random(3)
        np.testing.assert_array_equal(a, b)


def test_runs_are_reproducible_and_thread_independent():
    one = list(search.run_search(4, "paren", 12, seed=3, asym=True, threads=1))
    four = list(search.run_search(4, "paren", 12, seed=3, asym=True, threads=4))
    assert io.dumps(one) == io.dumps(four)
    assert [r["trial"] for r in one] == list(range(12))


@pytest.mark.parametrize("family", search.FAMILIES)
def test_families(family):
    recs = list(search.run_search(5, "mu", 4, seed=1, family=family))
    assert all(r["verdict"] in ("holds", "fails") for r in recs)
    if family != "convex":
        # both curvature families have the hypergroup property at the lightest states
        assert all(r["verdict"] == "holds" for r in recs)


def test_records_are_json_lines():
    rec = search.run_trial(0, 2024, 4, "paren", asym=True)
    doc = io.read_json(io.dumps(rec))
    assert doc["verdict"] == "fails"
    assert {w["base_point"] for w in doc["witness"]} == set(range(5))
    assert search.verify_witness(doc)


def test_verify_witness_rejects_tampering():
    rec = io.read_json(io.dumps(search.run_trial(0, 2024, 4, "paren", asym=True)))
    rec["potential"]["values"] = [0.0] * 5
    assert not search.verify_witness(rec)
    assert not search.verify_witness({"verdict": "holds"})


def test_errors_are_recorded():
    rec = search.run_trial(0, 1, 4, "nope")
    assert rec["verdict"] == "error"
    assert "UnknownVariant" in rec["error"]


def test_certify_unknown_variant():
    with pytest.raises(UnknownVariant):
        search.certify(np.zeros(3), "nope")


def test_summary_line():
    recs = list(search.run_search(4, "paren", 10, seed=2024, asym=True))
    s = search.summarize(recs, 4, "paren", 2024, asym=True)
    assert s["summary"] and s["trials"] == 10
    assert s["holds"] + s["fails"] + s["errors"] == 10
    assert s["failure_rate"] == s["fails"] / 10
