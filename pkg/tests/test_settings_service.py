"""
Tests for services/settings_service.py and the JSON contracts.
"""
import json

from services.contract_service import schema_names, validate_against_schema
from services.settings_service import (
    apply_env_overrides,
    get_default_settings,
    load_settings,
    save_settings,
    update_setting,
    validate_settings,
)


class TestSettings:
    """Defaults, files and environment overrides."""

    def test_defaults_are_valid(self):
        assert validate_settings(get_default_settings()) == (True, None)

    def test_missing_file_gives_defaults(self, tmp_path, monkeypatch):
        monkeypatch.delenv("RATUNIF_CHECK_DEPTH", raising=False)
        monkeypatch.delenv("RATUNIF_MAX_STEPS", raising=False)
        assert load_settings(tmp_path / "settings.json") == get_default_settings()

    def test_save_and_load(self, tmp_path, monkeypatch):
        monkeypatch.delenv("RATUNIF_CHECK_DEPTH", raising=False)
        monkeypatch.delenv("RATUNIF_MAX_STEPS", raising=False)
        path = tmp_path / "settings.json"
        settings = dict(get_default_settings(), schedule="lifo", check_depth=None)
        assert save_settings(settings, path)
        loaded = load_settings(path)
        assert loaded["schedule"] == "lifo"
        assert loaded["check_depth"] is None

    def test_invalid_settings_not_saved(self, tmp_path):
        path = tmp_path / "settings.json"
        assert not save_settings({"schedule": "random"}, path)
        assert not path.exists()

    def test_invalid_file_falls_back(self, tmp_path, monkeypatch):
        monkeypatch.delenv("RATUNIF_MAX_STEPS", raising=False)
        path = tmp_path / "settings.json"
        path.write_text(json.dumps({"max_steps": -4}), encoding="utf-8")
        assert load_settings(path)["max_steps"] == get_default_settings()["max_steps"]

    def test_unreadable_file_falls_back(self, tmp_path):
        path = tmp_path / "settings.json"
        path.write_text("{not json", encoding="utf-8")
        assert load_settings(path)["schedule"] == "fifo"

    def test_env_overrides(self, monkeypatch):
        monkeypatch.setenv("RATUNIF_CHECK_DEPTH", "0")
        monkeypatch.setenv("RATUNIF_MAX_STEPS", "77")
        settings = apply_env_overrides(get_default_settings())
        assert settings["check_depth"] is None
        assert settings["max_steps"] == 77

    def test_bad_env_value_ignored(self, monkeypatch):
        monkeypatch.setenv("RATUNIF_MAX_STEPS", "lots")
        assert apply_env_overrides(get_default_settings())["max_steps"] == get_default_settings()["max_steps"]

    def test_update_setting(self, tmp_path, monkeypatch):
        monkeypatch.delenv("RATUNIF_CHECK_DEPTH", raising=False)
        path = tmp_path / "settings.json"
        assert update_setting("check_depth", 40, path)
        assert load_settings(path)["check_depth"] == 40
        assert not update_setting("colour", "red", path)


class TestContracts:
    """Schemas shipped under Contracts/."""

    def test_schema_names(self):
        assert {"settings", "run_config", "unify_result"} <= set(schema_names())

    def test_unknown_schema_passes(self):
        assert validate_against_schema({"x": 1}, "no_such_schema") == (True, None)

    def test_run_config(self):
        assert validate_against_schema({"problem": "?- H = H."}, "run_config")[0]
        ok, err = validate_against_schema({"problem": ""}, "run_config")
        assert not ok
        assert "run_config" in err
