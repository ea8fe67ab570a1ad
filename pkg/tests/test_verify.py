import pytest

from gwimm.verify import CHECKS, run_checks


def test_registry_covers_every_named_check():
    required = {
        "normalization", "oracle-equivalence", "lemma4-ratio",
        "lemma5-sandwich", "lemma8-decay", "lemma9-sup", "lemma10p-bound",
        "gw-llt-ratio", "main2-ratio", "lemma6-trend", "theta-consistency",
        "mc-vs-exact",
    }
    assert required <= set(CHECKS)
    # the two extras give criteria 3 and 10 their own named checks
    assert {"gamma-limit", "determinism"} <= set(CHECKS)


def test_unknown_name_rejected():
    with pytest.raises(ValueError, match="unknown check"):
        run_checks(["no-such-check"])
    with pytest.raises(ValueError, match="scale"):
        run_checks(["lemma4-ratio"], scale="huge")


def test_selected_fast_checks_pass_at_desk_scale():
    results = run_checks(["oracle-equivalence", "normalization",
                          "lemma4-ratio", "theta-consistency"], scale="desk")
    assert all(r.passed for r in results)
    assert [r.name for r in results] == ["oracle-equivalence", "normalization",
                                         "lemma4-ratio", "theta-consistency"]
