import pytest

from nethil.config.constants import Direction, LinkMode, PROFILE_ORDER
from nethil.netchan.profile import ChannelProfile, ProfileError, load_profile


@pytest.mark.parametrize("name", PROFILE_ORDER + ["real-loopback"])
def test_bundled_profiles_load(name):
    assert load_profile(name).name == name


def test_bundled_wifi_means():
    short = load_profile("wifi6-short")
    long_ = load_profile("wifi6-long")
    assert short.mean_delay_ms() == pytest.approx(3.0)
    assert long_.mean_delay_ms() == pytest.approx(8.0)
    assert short.mean_loss() == pytest.approx(0.002, rel=0.01)
    assert long_.mean_loss() == pytest.approx(0.0099, rel=0.01)
    assert load_profile("wifi6-long-iid").mean_loss() == pytest.approx(long_.mean_loss(), rel=0.01)


def test_ethernet_lab_delay():
    assert load_profile("ethernet-lab").mean_delay_ms() == pytest.approx(0.2)


def test_real_passthrough_gets_default_endpoints():
    profile = ChannelProfile(name="udp", mode=LinkMode.REAL_PASSTHROUGH)
    assert not profile.emulated
    assert profile.endpoints.command_recv == "127.0.0.1:9102"


def test_real_passthrough_rejects_impairment(tmp_path):
    path = tmp_path / "bad.yaml"
    path.write_text("mode: real-passthrough\ndelay_ns: 5\n")
    with pytest.raises(ProfileError, match="proxy"):
        load_profile(path)


def test_invalid_field_is_reported_with_its_path(tmp_path):
    path = tmp_path / "bad.yaml"
    path.write_text("loss:\n  kind: bernoulli\n  p: 2.0\n")
    with pytest.raises(ProfileError, match="loss.p"):
        load_profile(path)


def test_unknown_profile():
    with pytest.raises(ProfileError, match="Unknown channel profile"):
        load_profile("no-such-profile")


def test_name_defaults_to_file_stem(tmp_path):
    path = tmp_path / "bench.yaml"
    path.write_text("delay_ns: 1000\n")
    assert load_profile(path).name == "bench"


def test_direction_override():
    profile = ChannelProfile.model_validate({"name": "asym", "delay_ns": 1_000_000, "status": {"delay_ns": 4_000_000}})
    assert profile.mean_delay_ms(Direction.COMMAND) == pytest.approx(1.0)
    assert profile.mean_delay_ms(Direction.STATUS) == pytest.approx(4.0)


def test_static_cell_name():
    assert ChannelProfile.static(0.1, 50).name == "static-plr0.1-delay50ms"
