"""Input handling: armored text, format detection, batch runs."""

import base64
import textwrap

import pytest

from derlint.diagnostics import Code
from derlint.ingest import (
    BatchResult,
    LintOptions,
    load_documents,
    load_input,
    lint,
    lint_bytes,
    run_batch,
)

from support import certs

BEGIN = "-----BEGIN CERTIFICATE-----"
END = "-----END CERTIFICATE-----"


def pem_of(data: bytes, width: int = 64) -> str:
    body = textwrap.fill(base64.b64encode(data).decode("ascii"), width)
    return f"{BEGIN}\n{body}\n{END}\n"


def container_codes(docs):
    return [d.container_error.code if d.container_error else None for d in docs]


class TestPem:
    def test_single_block(self):
        raw = pem_of(certs.base_cert()).encode("ascii")
        docs = load_documents(raw, "leaf.pem")
        assert len(docs) == 1
        assert docs[0].doc_id == "leaf.pem"
        assert docs[0].container_error is None
        assert docs[0].data == certs.base_cert()

    def test_multiple_blocks_get_numbered_ids(self):
        raw = (pem_of(certs.base_cert()) + pem_of(certs.ca_cert_accepted())).encode()
        docs = load_documents(raw, "bundle.pem")
        assert [d.doc_id for d in docs] == ["bundle.pem#1", "bundle.pem#2"]
        assert docs[0].data == certs.base_cert()
        assert docs[1].data == certs.ca_cert_accepted()

    def test_comments_between_blocks_allowed_blank_only(self):
        raw = (pem_of(certs.base_cert()) + "\n\n" + pem_of(certs.base_cert())).encode()
        docs = load_documents(raw, "x.pem")
        assert len(docs) == 2

    def test_free_text_outside_block_rejected(self):
        # Forced pem mode applies the strict armor rules to the whole file;
        # auto mode cannot even detect such input as armored.
        raw = ("subject=CN=Leaf\n" + pem_of(certs.base_cert())).encode()
        docs = load_documents(raw, "x.pem", fmt="pem")
        assert container_codes(docs) == [Code.BAD_PEM_ARMOR]
        docs = load_documents(raw, "x.pem")
        assert container_codes(docs) == [Code.UNRECOGNIZED_FORMAT]

    def test_trailing_text_after_block_rejected(self):
        raw = (pem_of(certs.base_cert()) + "-- mail signature --\n").encode()
        docs = load_documents(raw, "x.pem")
        assert Code.BAD_PEM_ARMOR in [c for c in container_codes(docs) if c]

    def test_wrong_begin_label(self):
        raw = pem_of(certs.base_cert()).replace("CERTIFICATE", "PRIVATE KEY").encode()
        docs = load_documents(raw, "x.pem", fmt="pem")
        assert container_codes(docs) == [Code.UNRECOGNIZED_FORMAT]

    def test_unclosed_block(self):
        raw = (BEGIN + "\nAAAA\n").encode()
        docs = load_documents(raw, "x.pem")
        assert container_codes(docs) == [Code.BAD_PEM_ARMOR]

    def test_blank_line_inside_block(self):
        body = pem_of(certs.base_cert()).splitlines()
        body.insert(2, "")
        docs = load_documents("\n".join(body).encode(), "x.pem")
        assert Code.BAD_PEM_ARMOR in [c for c in container_codes(docs) if c]

    def test_overlong_line(self):
        raw = pem_of(certs.base_cert(), width=70).encode()
        docs = load_documents(raw, "x.pem")
        assert container_codes(docs) == [Code.BAD_PEM_ARMOR]

    def test_bad_base64_characters(self):
        raw = (BEGIN + "\nnot*valid*base64\n" + END + "\n").encode()
        docs = load_documents(raw, "x.pem")
        assert container_codes(docs) == [Code.BAD_BASE64]

    def test_base64_with_wrong_padding(self):
        raw = (BEGIN + "\nQUJD0\n" + END + "\n").encode()
        docs = load_documents(raw, "x.pem")
        assert container_codes(docs) == [Code.BAD_BASE64]

    def test_non_ascii_input_in_pem_mode(self):
        docs = load_documents("café".encode("utf-8"), "x.pem", fmt="pem")
        assert container_codes(docs) == [Code.BAD_PEM_ARMOR]


class TestFormatDetection:
    def test_auto_detects_der(self):
        docs = load_documents(certs.base_cert(), "x.der")
        assert docs[0].data == certs.base_cert()

    def test_auto_detects_pem_with_leading_whitespace(self):
        raw = ("\n  \n" + pem_of(certs.base_cert())).encode()
        docs = load_documents(raw, "x.pem")
        assert docs[0].container_error is None

    def test_auto_unknown(self):
        docs = load_documents(b"\x7fELF...", "x.bin")
        assert container_codes(docs) == [Code.UNRECOGNIZED_FORMAT]

    def test_empty_input(self):
        docs = load_documents(b"", "x")
        assert container_codes(docs) == [Code.UNRECOGNIZED_FORMAT]

    def test_der_mode_forces_der(self):
        raw = pem_of(certs.base_cert()).encode()
        docs = load_documents(raw, "x", fmt="der")
        assert docs[0].container_error is None
        assert docs[0].data == raw

    def test_load_input_requires_single_document(self):
        raw = (pem_of(certs.base_cert()) * 2).encode()
        with pytest.raises(ValueError):
            load_input(raw, "x.pem")


class TestLint:
    def test_accepted_report(self):
        report = lint_bytes(certs.base_cert(), "ok.der")
        assert report.outcome == "accepted"
        assert report.diagnostics == []
        assert report.size_bytes == len(certs.base_cert())
        assert report.parse_time_micros is not None
        assert len(report.sha256) == 64

    def test_rejected_report(self):
        report = lint_bytes(certs.base_cert() + b"\x00", "bad.der")
        assert report.outcome == "rejected"
        assert [d.code for d in report.diagnostics] == [Code.TRAILING_BYTES]

    def test_timing_disabled(self):
        report = lint_bytes(certs.base_cert(), options=LintOptions(timing=False))
        assert report.parse_time_micros is None
        assert "parse_time_micros" not in report.to_json_dict()

    def test_container_error_report(self):
        doc = load_documents(b"junk", "j")[0]
        report = lint(doc)
        assert report.outcome == "rejected"
        assert report.diagnostics[0].code is Code.UNRECOGNIZED_FORMAT

    def test_max_size_bound(self):
        report = lint_bytes(certs.base_cert(), options=LintOptions(max_size=64))
        assert report.outcome == "rejected"
        assert report.diagnostics[0].code is Code.LENGTH_TOO_LARGE

    def test_json_shape(self):
        payload = lint_bytes(certs.base_cert() + b"\x00", "x").to_json_dict()
        assert set(payload) >= {"id", "sha256", "outcome", "size_bytes", "diagnostics"}
        assert payload["diagnostics"][0]["code"] == "TRAILING_BYTES"


class TestBatch:
    def write_tree(self, tmp_path):
        (tmp_path / "good.der").write_bytes(certs.base_cert())
        (tmp_path / "bad.der").write_bytes(certs.base_cert()[:-5])
        nested = tmp_path / "sub"
        nested.mkdir()
        (nested / "bundle.pem").write_text(pem_of(certs.base_cert()) + pem_of(certs.ca_cert_accepted()))
        return tmp_path

    def test_run_batch_over_tree(self, tmp_path):
        root = self.write_tree(tmp_path)
        result = run_batch([str(root)])
        assert isinstance(result, BatchResult)
        assert result.histogram.total == 4
        assert result.histogram.accepted == 3
        assert result.histogram.rejected == 1
        assert result.any_rejected
        assert [r.doc_id for r in result.reports] == sorted(r.doc_id for r in result.reports)

    def test_run_batch_parallel_matches_serial(self, tmp_path):
        root = self.write_tree(tmp_path)
        serial = run_batch([str(root)], jobs=1)
        parallel = run_batch([str(root)], jobs=4)
        assert [r.to_json_dict() | {"parse_time_micros": 0} for r in serial.reports] == [
            r.to_json_dict() | {"parse_time_micros": 0} for r in parallel.reports
        ]

    def test_missing_path_recorded_not_raised(self, tmp_path):
        result = run_batch([str(tmp_path / "nope.der")])
        assert result.io_errors
        assert not result.reports
