import dataclasses

import pytest

from tbbackflow import cli, flux, verify


def test_clean_build_passes(capsys):
    assert cli.main(["verify"]) == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out
    for g in verify.GROUPS:
        assert g in out


def test_filter_runs_one_group(capsys):
    assert cli.main(["verify", "--filter", "continuity"]) == 0
    rows = capsys.readouterr().out.strip().splitlines()[1:]
    assert rows and all(r.startswith("continuity") for r in rows)


def test_unknown_group(capsys):
    assert cli.main(["verify", "--filter", "nope"]) == 2


def test_mutation_flipped_bias_term_is_caught(monkeypatch, capsys):
    original = flux.site_flux

    def mutant(psi_left, psi_here, params):
        return original(psi_left, psi_here, dataclasses.replace(params, epsilon=-params.epsilon))

    monkeypatch.setattr(flux, "site_flux", mutant)
    assert cli.main(["verify", "--filter", "continuity"]) == 1
    assert "FAIL" in capsys.readouterr().out


def test_seed_flag_changes_samples():
    a = verify.run_checks(["continuity"], seed=1)
    b = verify.run_checks(["continuity"], seed=2)
    assert a[0].passed and b[0].passed and a[0].value != b[0].value


def test_run_checks_deterministic():
    assert verify.run_checks(["bounds"]) == verify.run_checks(["bounds"])


def test_unknown_group_raises():
    with pytest.raises(ValueError):
        verify.run_checks(["nope"])
