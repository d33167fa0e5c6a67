import numpy as np
import pytest

from noisydup.config import ModelSpec, format_config, load_config, parse_config
from noisydup.errors import ConfigError


class TestParse:
    def test_full_file(self):
        spec = parse_config("source = ber-half\ndup = geometric  # truncated\npd = 0.3\nkmax = 15\nnoise = bsc\np = 0.01\n")
        assert spec == ModelSpec(dup="geometric", pd=0.3, kmax=15, p=0.01)

    def test_defaults(self):
        assert parse_config("# nothing\n\n") == ModelSpec()

    def test_unknown_key(self):
        with pytest.raises(ConfigError, match="unknown key"):
            parse_config("snr = 3\n")

    def test_bad_value(self):
        with pytest.raises(ConfigError):
            parse_config("pd = lots\n")

    def test_missing_equals(self):
        with pytest.raises(ConfigError):
            parse_config("pd 0.3\n")

    @pytest.mark.parametrize("text", ["p = 1.5", "dup = poisson", "noise = bec", "dup = geometric\npd = 1", "kmax = 0"])
    def test_invalid_values(self, text):
        with pytest.raises(ConfigError):
            parse_config(text)

    def test_round_trip(self):
        spec = ModelSpec(dup="geometric", pd=0.45, kmax=7, p=0.1)
        assert parse_config(format_config(spec)) == spec

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(tmp_path / "absent.cfg")


class TestBuild:
    def test_bernoulli_channel(self):
        ch = ModelSpec(pd=0.3, p=0.1).build()
        np.testing.assert_allclose(ch.duration.pmf, [0.7, 0.3])
        np.testing.assert_allclose(ch.noise.emission[0], [0.9, 0.1])

    def test_matrix_file_source(self, tmp_path):
        path = tmp_path / "P.txt"
        path.write_text("0.8 0.2\n0.4 0.6\n")
        ch = ModelSpec(source=f"matrix-file:{path}").build()
        np.testing.assert_allclose(ch.source.initial, [2 / 3, 1 / 3])

    def test_matrix_file_reducible(self, tmp_path):
        path = tmp_path / "P.txt"
        path.write_text("1 0\n0 1\n")
        with pytest.raises(ConfigError):
            ModelSpec(source=f"matrix-file:{path}").build()

    def test_effective_kmax(self):
        assert ModelSpec(dup="bernoulli").effective_kmax == 2
        assert ModelSpec(dup="geometric", kmax=9).effective_kmax == 9
