from statistics import NormalDist

import numpy as np
import pytest

from regscope.dataset import Class, ClassSet, load_dataset, save_dataset
from regscope.datagen import (
    BACKGROUND,
    ClassProfile,
    default_profiles,
    fixture,
    generate,
    load_profiles,
    save_profiles,
    soften,
    synthetic_report,
)
from regscope.errors import InvalidProfile
from regscope.ingest import report_to_sample


@pytest.fixture(scope="module")
def profiles():
    return {p.label: p.array() for p in default_profiles()}


def p_at(profiles, cls, loc):
    return profiles[cls][loc - 1]


def test_one_profile_per_family_and_cleanware(profiles):
    assert list(profiles) == [Class.CLEANWARE, Class.WORM, Class.BOTNET, Class.TROJAN]
    for p in profiles.values():
        assert p.shape == (47,) and p.min() >= 0 and p.max() <= 1


def test_worked_orderings(profiles):
    assert p_at(profiles, Class.TROJAN, 17) > p_at(profiles, Class.TROJAN, 45)
    assert p_at(profiles, Class.CLEANWARE, 45) > p_at(profiles, Class.CLEANWARE, 17)
    for cls in (Class.WORM, Class.BOTNET, Class.TROJAN):
        assert p_at(profiles, cls, 18) >= np.median(profiles[cls])


@pytest.mark.parametrize(
    "cls, high",
    [
        (Class.BOTNET, (1, 2, 8, 13, 17, 18)),
        (Class.TROJAN, (1, 2, 4, 14, 17, 19, 20)),
        (Class.WORM, (4, 8, 13, 17, 20, 21)),
        (Class.CLEANWARE, tuple(range(37, 46))),
    ],
)
def test_named_locations_are_high(profiles, cls, high):
    p = profiles[cls]
    others = [i for i in range(1, 48) if i not in high]
    assert min(p[i - 1] for i in high) > np.median([p[i - 1] for i in others])


def test_cleanware_low_on_system_locations(profiles):
    clean = profiles[Class.CLEANWARE]
    assert clean[:34].max() <= BACKGROUND
    for cls in (Class.WORM, Class.BOTNET, Class.TROJAN):
        assert profiles[cls][34:].max() <= BACKGROUND
        # Both system locations are common to every malware family.
        assert min(p_at(profiles, cls, 17), p_at(profiles, cls, 18)) > clean[16:18].max()


def test_trivial_profiles():
    one = np.zeros(47)
    one[16] = 1.0
    d = generate([ClassProfile(Class.TROJAN, tuple(one)), ClassProfile(Class.WORM, (0.0,) * 47)], 50, 1)
    assert d.X[d.y == -3, 16].all()
    assert not d.X[d.y == -1].any()


def test_half_probability_within_three_sigma():
    d = generate([ClassProfile(Class.WORM, (0.5,) * 47)], 10_000, 7)
    assert np.abs(d.X.mean(axis=0) - 0.5).max() <= 0.015


def _z_scores(profiles, n, seed):
    d = generate(profiles, n, seed)
    z = []
    for p in profiles:
        q = p.array()
        f = d.X[d.y == int(p.label)].mean(axis=0)
        sd = np.sqrt(q * (1 - q) / n)
        exact = sd == 0
        assert np.all(f[exact] == q[exact])
        z.extend((np.abs(f - q)[~exact] / sd[~exact]).tolist())
    return np.array(z)


def test_default_profiles_frequencies_within_three_sigma():
    assert _z_scores(default_profiles(), 10_000, 7).max() <= 3.0


def test_hard_profiles_frequencies_familywise():
    z = _z_scores(soften(default_profiles()), 10_000, 7)
    # 188 simultaneous two-sided tests at overall level 0.01.
    assert z.max() <= NormalDist().inv_cdf(1 - 0.005 / len(z))


def test_deterministic_and_seed_sensitive():
    a = save_dataset(fixture("separable"))
    assert a == save_dataset(fixture("separable"))
    assert a != save_dataset(fixture("separable", seed=8))
    assert load_dataset(a) == fixture("separable")


def test_fixtures_shape():
    d = fixture("separable")
    assert len(d) == 360 and d.n_features == 47
    assert sorted(set(d.y.tolist())) == [-3, -2, -1, 0]
    hard = fixture("hard", class_set=ClassSet.FAMILY4)
    assert hard.class_set is ClassSet.FAMILY4
    with pytest.raises(ValueError):
        fixture("medium")


def test_soften_moves_toward_half():
    p = soften([ClassProfile(Class.WORM, (0.0, 1.0, 0.5))])[0]
    assert p.hit_prob == (0.25, 0.75, 0.5)


@pytest.mark.parametrize("bad", [(1.2,), (-0.1,), (float("nan"),), ()])
def test_invalid_profiles(bad):
    with pytest.raises(InvalidProfile):
        ClassProfile(Class.WORM, bad)


def test_profile_csv_round_trip():
    ps = default_profiles()
    assert load_profiles(save_profiles(ps)) == ps
    with pytest.raises(InvalidProfile):
        load_profiles(b"label,P1\n0,0.5\n")
    with pytest.raises(InvalidProfile):
        load_profiles(b"class,P1\n0,1.5\n")
    with pytest.raises(InvalidProfile):
        load_profiles(b"class,P1\nvirus,0.5\n")


def test_synthetic_report_reproduces_its_vector():
    rng = np.random.default_rng(3)
    for _ in range(20):
        bits = rng.random(47) < 0.3
        bits[[40, 46]] = False  # duplicate locations fire under their lower id
        s = report_to_sample(synthetic_report(bits, "x"), Class.CLEANWARE)
        assert list(s.features) == bits.tolist()
