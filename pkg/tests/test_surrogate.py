import pytest

from naiveml.core import BLANK_ID, Choice, Pipeline, SlotRole, validate_catalog
from naiveml.surrogate import Bowl, SurrogateSurface, make_surface, surrogate_eval


def two_slot(base_pre, base_pred, interaction=None, scale=1.0, bowls=None):
    inter = {} if interaction is None else {(0, "t", 1, "p"): interaction}
    return SurrogateSurface((SlotRole.DATA_PREPROCESSOR, SlotRole.PREDICTOR), ((BLANK_ID, "t"), ("p",)),
                            {(0, BLANK_ID): 0.0, (0, "t"): base_pre, (1, "p"): base_pred},
                            inter, bowls or {}, scale)


def test_zero_scale_means_zero_interactions():
    s = make_surface([3, 2, 2], 0.0, seed=1)
    assert all(s.interaction(i, ci, j, cj) == 0.0 for (i, ci, j, cj) in s.interactions)


def test_same_seed_same_surface():
    a, b = make_surface([3, 2], 0.7, (0, 1), seed=9, params_per_candidate=2), \
        make_surface([3, 2], 0.7, (0, 1), seed=9, params_per_candidate=2)
    assert a.to_dict() == b.to_dict()


def test_interaction_table_size():
    s = make_surface([3, 2], 0.5, seed=0)
    assert len(s.interactions) == (3 + 1) * 2


def test_sum_of_bases_and_interaction():
    p = Pipeline((Choice("t"), Choice("p")))
    assert surrogate_eval(two_slot(0.3, 0.4), p).oriented_score == pytest.approx(0.7)
    r = surrogate_eval(two_slot(0.3, 0.4, interaction=0.2), p)
    assert r.oriented_score == pytest.approx(0.9)
    assert r.status == "ok" and r.wall_time == 0.0


def test_bowl_penalty():
    bowls = {("p", "x"): Bowl(optimum=0.25, amplitude=2.0, lo=0.0, hi=2.0, default=1.0)}
    s = two_slot(0.3, 0.4, bowls=bowls)
    at_opt = Pipeline((None, Choice("p", {"x": 0.25})))
    assert s.value(at_opt) == pytest.approx(0.4)
    off = Pipeline((None, Choice("p", {"x": 1.25})))
    assert s.value(off) == pytest.approx(0.4 - 2.0 * (1.0 / 2.0) ** 2)
    defaults = Pipeline((None, Choice("p")))
    assert s.value(defaults) == pytest.approx(0.4 - 2.0 * (0.75 / 2.0) ** 2)


def test_unknown_candidate():
    with pytest.raises(KeyError):
        two_slot(0.1, 0.2).value(Pipeline((Choice("zzz"), Choice("p"))))


def test_noise_free_surface_is_pure():
    s = make_surface([2, 3], 0.5, (0.1, 0.2), seed=3, params_per_candidate=1)
    p = Pipeline((Choice("t0_1"), Choice("p2", {"x0": 0.3})))
    assert len({surrogate_eval(s, p).oriented_score for _ in range(5)}) == 1


def test_noise_varies_between_calls():
    s = make_surface([2, 3], 0.5, seed=3, noise_sd=0.1)
    p = Pipeline((None, Choice("p0")))
    assert len({surrogate_eval(s, p).oriented_score for _ in range(5)}) == 5


def test_catalog_and_json_round_trip(tmp_path):
    s = make_surface([2, 2, 3], 0.4, (0.2, 0.5), seed=8, params_per_candidate=1)
    cat = s.catalog()
    assert validate_catalog(cat) == []
    assert [r for r in (slot.role for slot in cat.slots)] == list(s.roles)
    path = tmp_path / "surface.json"
    s.save(path)
    t = SurrogateSurface.load(path)
    p = Pipeline((Choice("t0_1"), None, Choice("p2", {"x0": 0.9})))
    assert t.value(p) == s.value(p)


def test_four_slot_surfaces_have_a_valid_catalog():
    s = make_surface([2, 3, 2, 4], 0.0, seed=0)
    assert validate_catalog(s.catalog()) == []
    assert s.catalog().slot_name(1) == "feature_preprocessor[1]"
