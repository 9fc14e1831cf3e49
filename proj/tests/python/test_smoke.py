import os

import pytest

import seedgen


def test_pct_delta_reference_rows():
    assert seedgen.pct_delta(4548, 113) == pytest.approx(2.48, abs=1e-9)
    assert seedgen.pct_delta(14522, 3528) == pytest.approx(24.30, abs=1e-9)


def test_pdf_round_trip():
    bodies = ["<< /Type /Catalog >>", "[ 1 2 3 ]", "42"]
    pdf = seedgen.assemble_pdf(bodies, 0)
    assert pdf.startswith(b"%PDF-1.4\n")
    objects, warnings = seedgen.extract_objects(pdf)
    assert warnings == 0
    assert [body for (_, _, body) in objects] == bodies
    ok, diagnostics = seedgen.is_well_formed(pdf)
    assert ok, diagnostics


def test_toy_target_trace_format():
    trace = seedgen.run_toy_target(b"%PDF-1.4\n1 0 obj 42 endobj\n%%EOF\n")
    lines = trace.splitlines()
    assert lines
    for line in lines:
        block, flag = line.split(" ")
        assert len(block) == 8
        int(block, 16)
        assert flag in {"-", "E", "X", "B"}
    # deterministic
    assert trace == seedgen.run_toy_target(b"%PDF-1.4\n1 0 obj 42 endobj\n%%EOF\n")


def test_fnv1a64_known_value():
    assert seedgen.fnv1a64(b"") == 0xCBF29CE484222325


def _write_seeds(seed_dir):
    docs = [
        ["<< /Type /Catalog >>"],
        ["<< /Type /Catalog >>", "42"],
        ["<< /Type /Catalog >>", "[ 1 2 ]"],
        ["<< /Type /Catalog >>", "(text)", "/Name"],
    ]
    for i, bodies in enumerate(docs):
        with open(os.path.join(seed_dir, f"seed-{i}.pdf"), "wb") as f:
            f.write(seedgen.assemble_pdf(bodies, 0))


def test_pipeline_and_eval(tmp_path):
    seed_dir = tmp_path / "seeds"
    seed_dir.mkdir()
    _write_seeds(str(seed_dir))
    work = tmp_path / "work"

    config = "\n".join(
        [
            f"seed_dir = {seed_dir}",
            f"work_dir = {work}",
            "hidden_dim = 8",
            "epochs = 10",
            "translator_epochs = 10",
            "gen_count = 1",
            "max_attempts = 3",
            "max_len = 40",
            "vocab_budget = 16",
            "seed = 5",
        ]
    )
    result = seedgen.run_pipeline(config)
    assert result["corpus_paths"] == 4
    assert set(result["generated_paths"]) == {"C_s", "C_sf"}
    assert os.path.exists(result["manifest_path"])

    report = seedgen.evaluate(str(seed_dir), [("C_s", str(seed_dir))])
    assert "basic blocks" in report
    assert "execution paths" in report
    assert "C_s" in report


def test_pipeline_rejects_bad_config():
    with pytest.raises(Exception):
        seedgen.run_pipeline("nonsense_key = 1")
