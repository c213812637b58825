"""Extension block: entry framing, body grammars, GeneralName, usage rules."""

import pytest

from derlint.der import parse_tlv_tree
from derlint.diagnostics import Code
from derlint.extensions import (
    AkiValue,
    BasicConstraintsValue,
    KeyUsageValue,
    check_key_usage_rules,
    parse_extensions,
    valid_dns_name,
    valid_email,
    valid_uri,
)
from derlint.registry import default_registry

from support import certs
from support import encoder as enc

REG = default_registry()

OID_CP = "2.5.29.32"
OID_PM = "2.5.29.33"
OID_IAN = "2.5.29.18"
OID_SDA = "2.5.29.9"
OID_NC = "2.5.29.30"
OID_CRL_DP = "2.5.29.31"
OID_IAP = "2.5.29.54"
OID_FRESHEST = "2.5.29.46"
OID_SIA = "1.3.6.1.5.5.7.1.11"
OID_CPS = "1.3.6.1.5.5.7.2.1"
OID_UNOTICE = "1.3.6.1.5.5.7.2.2"
OID_OCSP = "1.3.6.1.5.5.7.48.1"


def run_exts(*ext_bytes: bytes):
    wrapper = parse_tlv_tree(enc.ctx(3, enc.seq(*ext_bytes)))
    diags = []
    extset = parse_extensions(wrapper, REG, diags, "exts")
    return extset, [d.code for d in diags]


def run_body(oid_text: str, payload: bytes, critical: bool | None = None):
    return run_exts(certs.extension(oid_text, payload, critical))


def codes_only(oid_text: str, payload: bytes, critical: bool | None = None):
    _, codes = run_body(oid_text, payload, critical)
    return codes


class TestFraming:
    def test_wrapper_must_hold_one_sequence(self):
        wrapper = parse_tlv_tree(enc.ctx(3, enc.integer(1)))
        diags = []
        assert parse_extensions(wrapper, REG, diags, "exts") is None
        assert [d.code for d in diags] == [Code.STRUCTURAL_MISMATCH]

    def test_empty_sequence(self):
        extset, codes = run_exts()
        assert codes == [Code.EMPTY_EXTENSION_SEQUENCE]
        assert extset is not None and not extset.entries

    def test_duplicates_reported_each_extra_occurrence(self):
        _, codes = run_exts(certs.ski(), certs.ski(), certs.ski())
        assert codes.count(Code.DUPLICATED_EXTENSION) == 2

    def test_duplicates_found_in_either_order(self):
        _, codes = run_exts(certs.aki(), certs.ski(), certs.aki())
        assert Code.DUPLICATED_EXTENSION in codes
        _, codes = run_exts(certs.ski(), certs.aki(), certs.ski())
        assert Code.DUPLICATED_EXTENSION in codes

    def test_unknown_extension_kept_opaque(self):
        extset, codes = run_body("1.2.3.4.99", enc.octet_string(b"anything"))
        assert codes == []
        entry = extset.entries[0]
        assert not entry.known
        assert entry.body is None

    def test_unknown_critical_listed(self):
        extset, _ = run_exts(certs.extension("1.2.3.4.99", b"x", critical=True))
        assert extset.unknown_critical_oids() == ["1.2.3.4.99"]

    def test_explicit_noncritical_flagged(self):
        codes = codes_only(certs.OID_SKI, enc.octet_string(b"k"), critical=False)
        assert codes == [Code.DEFAULT_VALUE_ENCODED]

    def test_extn_value_must_be_primitive_octet_string(self):
        ext = enc.seq(enc.oid(certs.OID_SKI), enc.ia5("zz"))
        _, codes = run_exts(ext)
        assert codes == [Code.STRUCTURAL_MISMATCH]

    def test_entry_wrong_field_count(self):
        _, codes = run_exts(enc.seq(enc.oid(certs.OID_SKI)))
        assert codes == [Code.STRUCTURAL_MISMATCH]

    def test_body_trailing_bytes_remapped(self):
        codes = codes_only(certs.OID_SKI, enc.octet_string(b"k") + b"\x00")
        assert codes == [Code.REDUNDANT_TRAILING_BYTES]


class TestBodies:
    def test_ski(self):
        extset, codes = run_body(certs.OID_SKI, enc.octet_string(certs.KEYID))
        assert codes == []
        assert extset.entries[0].body == certs.KEYID

    def test_aki_key_id_only(self):
        extset, codes = run_body(certs.OID_AKI, enc.seq(enc.ctx_prim(0, b"\x01\x02")))
        assert codes == []
        body = extset.entries[0].body
        assert isinstance(body, AkiValue)
        assert body.key_id == b"\x01\x02"

    def test_aki_full_form(self):
        issuer = enc.ctx(1, enc.ctx_prim(2, b"ca.example.com"))
        body = enc.seq(enc.ctx_prim(0, b"\x01"), issuer, enc.ctx_prim(2, b"\x05"))
        extset, codes = run_body(certs.OID_AKI, body)
        assert codes == []
        aki = extset.entries[0].body
        assert aki.has_issuer and aki.has_serial

    def test_aki_issuer_without_serial(self):
        body = enc.seq(enc.ctx(1, enc.ctx_prim(2, b"ca.example.com")))
        codes = codes_only(certs.OID_AKI, body)
        assert codes == [Code.MALFORMED_EXTENSION_BODY]

    def test_aki_fields_out_of_order(self):
        body = enc.seq(enc.ctx_prim(2, b"\x05"), enc.ctx_prim(0, b"\x01"))
        codes = codes_only(certs.OID_AKI, body)
        assert codes == [Code.MALFORMED_EXTENSION_BODY]

    def test_aki_empty_key_id(self):
        codes = codes_only(certs.OID_AKI, enc.seq(enc.ctx_prim(0, b"")))
        assert codes == [Code.EMPTY_VALUE_FIELD]

    def test_key_usage_bits(self):
        extset, codes = run_body(certs.OID_KU, enc.named_bit_string({0, 5}), critical=True)
        assert codes == []
        ku = extset.entries[0].body
        assert isinstance(ku, KeyUsageValue)
        assert ku.has(5) and ku.has(0) and not ku.has(2)
        assert "keyCertSign" in ku.names()

    def test_key_usage_decipher_only_bit8(self):
        extset, codes = run_body(certs.OID_KU, enc.named_bit_string({8}), critical=True)
        assert codes == []
        assert extset.entries[0].body.has(8)

    def test_key_usage_bit_out_of_range(self):
        codes = codes_only(certs.OID_KU, enc.named_bit_string({9}), critical=True)
        assert codes == [Code.MALFORMED_EXTENSION_BODY]

    def test_basic_constraints_values(self):
        extset, codes = run_body(certs.OID_BC, enc.seq(enc.boolean(True), enc.integer(3)), critical=True)
        assert codes == []
        bc = extset.entries[0].body
        assert isinstance(bc, BasicConstraintsValue)
        assert bc.ca and bc.ca_explicit and bc.path_len == 3

    def test_basic_constraints_explicit_false(self):
        codes = codes_only(certs.OID_BC, enc.seq(enc.boolean(False)), critical=True)
        assert codes == [Code.DEFAULT_VALUE_ENCODED]

    def test_basic_constraints_stray_field(self):
        codes = codes_only(certs.OID_BC, enc.seq(enc.boolean(True), enc.integer(3), enc.null()), critical=True)
        assert codes == [Code.MALFORMED_EXTENSION_BODY]

    def test_certificate_policies(self):
        cps = enc.seq(enc.oid(OID_CPS), enc.ia5("https://example.com/cps"))
        notice = enc.seq(enc.oid(OID_UNOTICE), enc.seq(enc.utf8("read me")))
        pi = enc.seq(enc.oid("2.23.140.1.2.1"), enc.seq(cps, notice))
        extset, codes = run_body(OID_CP, enc.seq(pi))
        assert codes == []
        assert extset.entries[0].body == ["2.23.140.1.2.1"]

    def test_certificate_policies_empty(self):
        codes = codes_only(OID_CP, enc.seq())
        assert codes == [Code.MALFORMED_EXTENSION_BODY]

    def test_certificate_policies_bad_cps(self):
        cps = enc.seq(enc.oid(OID_CPS), enc.ia5("not a uri"))
        pi = enc.seq(enc.oid("2.23.140.1.2.1"), enc.seq(cps))
        codes = codes_only(OID_CP, enc.seq(pi))
        assert codes == [Code.BAD_DNS_URI_EMAIL_FORMAT]

    def test_certificate_policies_unknown_qualifier(self):
        q = enc.seq(enc.oid("1.2.3.4"), enc.null())
        pi = enc.seq(enc.oid("2.23.140.1.2.1"), enc.seq(q))
        codes = codes_only(OID_CP, enc.seq(pi))
        assert codes == [Code.WRONG_OID]

    def test_user_notice_with_ref(self):
        ref = enc.seq(enc.utf8("Org"), enc.seq(enc.integer(1), enc.integer(2)))
        notice = enc.seq(enc.oid(OID_UNOTICE), enc.seq(ref, enc.utf8("text")))
        pi = enc.seq(enc.oid("2.23.140.1.2.1"), enc.seq(notice))
        assert codes_only(OID_CP, enc.seq(pi)) == []

    def test_policy_mappings(self):
        pair = enc.seq(enc.oid("1.2.3"), enc.oid("1.2.4"))
        extset, codes = run_body(OID_PM, enc.seq(pair))
        assert codes == []
        assert extset.entries[0].body == [("1.2.3", "1.2.4")]

    def test_policy_mappings_wrong_member(self):
        pair = enc.seq(enc.oid("1.2.3"), enc.integer(1))
        codes = codes_only(OID_PM, enc.seq(pair))
        assert codes == [Code.WRONG_OID]

    def test_issuer_alt_name(self):
        body = enc.seq(enc.ctx_prim(1, b"admin@example.com"))
        assert codes_only(OID_IAN, body) == []

    def test_subject_directory_attributes(self):
        attr = enc.seq(enc.oid("2.5.4.12"), enc.set_of(enc.utf8("Dr")))
        assert codes_only(OID_SDA, enc.seq(attr)) == []
        bad = enc.seq(enc.oid("2.5.4.12"), enc.set_of())
        assert codes_only(OID_SDA, enc.seq(bad)) == [Code.MALFORMED_EXTENSION_BODY]

    def test_name_constraints(self):
        subtree = enc.seq(enc.ctx_prim(2, b"example.com"))
        body = enc.seq(enc.ctx(0, subtree))
        assert codes_only(OID_NC, body, critical=True) == []

    def test_name_constraints_ip_with_mask(self):
        subtree = enc.seq(enc.ctx_prim(7, bytes(8)))
        body = enc.seq(enc.ctx(0, subtree))
        assert codes_only(OID_NC, body, critical=True) == []
        # Outside nameConstraints the same 8-octet address is malformed.
        assert codes_only(certs.OID_SAN, enc.seq(enc.ctx_prim(7, bytes(8)))) == [
            Code.BAD_DNS_URI_EMAIL_FORMAT
        ]

    def test_name_constraints_explicit_zero_minimum(self):
        subtree = enc.seq(enc.ctx_prim(2, b"example.com"), enc.ctx_prim(0, b"\x00"))
        body = enc.seq(enc.ctx(0, subtree))
        assert codes_only(OID_NC, body, critical=True) == [Code.DEFAULT_VALUE_ENCODED]

    def test_name_constraints_empty(self):
        assert codes_only(OID_NC, enc.seq(), critical=True) == [Code.MALFORMED_EXTENSION_BODY]

    def test_policy_constraints_fields(self):
        body = enc.seq(enc.ctx_prim(0, b"\x01"), enc.ctx_prim(1, b"\x02"))
        assert codes_only("2.5.29.36", body, critical=True) == []
        body = enc.seq(enc.ctx_prim(1, b"\x02"), enc.ctx_prim(0, b"\x01"))
        assert codes_only("2.5.29.36", body, critical=True) == [Code.MALFORMED_EXTENSION_BODY]

    def test_extended_key_usage(self):
        extset, codes = run_body(certs.OID_EKU, enc.seq(enc.oid(certs.OID_KP_SERVER_AUTH)))
        assert codes == []
        assert extset.entries[0].body == [certs.OID_KP_SERVER_AUTH]

    def test_extended_key_usage_empty(self):
        assert codes_only(certs.OID_EKU, enc.seq()) == [Code.MALFORMED_EXTENSION_BODY]

    def test_crl_distribution_points(self):
        uri = enc.ctx_prim(6, b"http://crl.example.com/ca.crl")
        dp = enc.seq(enc.ctx(0, enc.ctx(0, uri)))
        assert codes_only(OID_CRL_DP, enc.seq(dp)) == []
        assert codes_only(OID_FRESHEST, enc.seq(dp)) == []

    def test_crl_dp_reasons_only(self):
        dp = enc.seq(enc.tlv(1, b"\x06\x40", tag_class="context"))
        codes = codes_only(OID_CRL_DP, enc.seq(dp))
        assert codes == [Code.MALFORMED_EXTENSION_BODY]

    def test_crl_dp_empty_point(self):
        assert codes_only(OID_CRL_DP, enc.seq(enc.seq())) == [Code.MALFORMED_EXTENSION_BODY]

    def test_inhibit_any_policy(self):
        extset, codes = run_body(OID_IAP, enc.integer(3), critical=True)
        assert codes == []
        assert extset.entries[0].body == 3
        assert codes_only(OID_IAP, enc.integer(-1), critical=True) == [Code.MALFORMED_EXTENSION_BODY]

    def test_info_access(self):
        ad = enc.seq(enc.oid(OID_OCSP), enc.ctx_prim(6, b"http://ocsp.example.com"))
        assert codes_only(certs.OID_AIA, enc.seq(ad)) == []
        assert codes_only(OID_SIA, enc.seq(ad)) == []

    def test_info_access_empty(self):
        assert codes_only(certs.OID_AIA, enc.seq()) == [Code.EMPTY_SEQUENCE_IN_INFO_ACCESS]

    def test_info_access_bad_description(self):
        ad = enc.seq(enc.oid(OID_OCSP))
        assert codes_only(certs.OID_AIA, enc.seq(ad)) == [Code.MALFORMED_EXTENSION_BODY]


class TestGeneralNames:
    def gn_codes(self, gn: bytes):
        return codes_only(certs.OID_SAN, enc.seq(gn))

    def test_all_good_kinds(self):
        other = enc.ctx(0, enc.oid("1.3.6.1.4.1.311.20.2.3"), enc.ctx(0, enc.utf8("u@d")))
        cases = [
            other,
            enc.ctx_prim(1, b"user@example.com"),
            enc.ctx_prim(2, b"www.example.com"),
            enc.ctx(3, enc.seq(enc.null())),
            enc.ctx(4, certs.name("Dir Name")),
            enc.ctx(5, enc.ctx(1, enc.utf8("party"))),
            enc.ctx_prim(6, b"https://example.com/x"),
            enc.ctx_prim(7, bytes(4)),
            enc.ctx_prim(7, bytes(16)),
            enc.ctx_prim(8, enc.oid("1.2.3.4")[2:]),
        ]
        for gn in cases:
            assert self.gn_codes(gn) == [], gn.hex()

    def test_non_context_tag(self):
        assert self.gn_codes(enc.ia5("x")) == [Code.MALFORMED_EXTENSION_BODY]

    def test_unknown_choice_tag(self):
        assert self.gn_codes(enc.ctx_prim(9, b"x")) == [Code.MALFORMED_EXTENSION_BODY]

    def test_other_name_needs_wrapped_value(self):
        bad = enc.ctx(0, enc.oid("1.2.3"), enc.utf8("bare"))
        assert self.gn_codes(bad) == [Code.MALFORMED_EXTENSION_BODY]

    def test_email_format(self):
        assert self.gn_codes(enc.ctx_prim(1, b"not-an-email")) == [Code.BAD_DNS_URI_EMAIL_FORMAT]

    def test_dns_format(self):
        assert self.gn_codes(enc.ctx_prim(2, b"-bad.example.com")) == [Code.BAD_DNS_URI_EMAIL_FORMAT]

    def test_uri_format(self):
        assert self.gn_codes(enc.ctx_prim(6, b"no-scheme-here")) == [Code.BAD_DNS_URI_EMAIL_FORMAT]

    def test_high_byte_in_dns(self):
        assert self.gn_codes(enc.ctx_prim(2, b"caf\xe9.example")) == [Code.CHAR_SET_VIOLATION]

    def test_nul_in_dns(self):
        assert self.gn_codes(enc.ctx_prim(2, b"a\x00b.example")) == [Code.CHAR_SET_VIOLATION]

    def test_ip_wrong_length(self):
        assert self.gn_codes(enc.ctx_prim(7, bytes(5))) == [Code.BAD_DNS_URI_EMAIL_FORMAT]

    def test_directory_name_inner_errors_surface(self):
        inner = enc.seq(enc.set_of(enc.seq(enc.oid("1.9.9.9"), enc.printable("x"))))
        assert self.gn_codes(enc.ctx(4, inner)) == [Code.WRONG_OID_IN_DN]

    def test_edi_party_name_needs_party(self):
        gn = enc.ctx(5, enc.ctx(0, enc.utf8("assigner")))
        assert self.gn_codes(gn) == [Code.MALFORMED_EXTENSION_BODY]


class TestValidators:
    def test_dns(self):
        assert valid_dns_name("example.com")
        assert valid_dns_name("a-b.c0.example")
        assert valid_dns_name("x" * 63 + ".example")
        assert not valid_dns_name("")
        assert not valid_dns_name("x" * 64 + ".example")
        assert not valid_dns_name("-leading.example")
        assert not valid_dns_name("trailing-.example")
        assert not valid_dns_name("double..dot")
        assert not valid_dns_name("under_score.example")
        assert not valid_dns_name("spa ce.example")
        assert not valid_dns_name("a." * 130 + "example")

    def test_email(self):
        assert valid_email("user@example.com")
        assert valid_email("a.b+c@sub.example.org")
        assert not valid_email("userexample.com")
        assert not valid_email("a@b@c.example")
        assert not valid_email("@example.com")
        assert not valid_email("user@")
        assert not valid_email("us er@example.com")

    def test_uri(self):
        assert valid_uri("https://example.com/")
        assert valid_uri("ldap://host/dc=example")
        assert valid_uri("urn:ietf:rfc:5280")
        assert not valid_uri("example.com/path")
        assert not valid_uri("https:")
        assert not valid_uri("1http://x")


class TestUsageRules:
    def run_rules(self, exts: tuple[bytes, ...], family: str = "rsa"):
        wrapper = parse_tlv_tree(enc.ctx(3, enc.seq(*exts)))
        diags = []
        extset = parse_extensions(wrapper, REG, diags, "exts")
        check_key_usage_rules(extset, family, diags, "exts")
        return [d.code for d in diags]

    def test_cert_sign_without_bc(self):
        codes = self.run_rules((certs.aki(), certs.ski(), certs.key_usage({5})))
        assert codes == [Code.KEY_CERT_SIGN_WITHOUT_BASIC_CONSTRAINTS]

    def test_cert_sign_with_proper_bc(self):
        codes = self.run_rules(
            (certs.aki(), certs.ski(), certs.key_usage({5}), certs.basic_constraints(ca=True))
        )
        assert codes == []

    def test_cert_sign_in_leaf(self):
        codes = self.run_rules(
            (certs.aki(), certs.ski(), certs.key_usage({5}), certs.basic_constraints())
        )
        assert codes == [Code.KEY_CERT_SIGN_IN_LEAF]

    def test_ca_without_ski(self):
        codes = self.run_rules((certs.aki(), certs.basic_constraints(ca=True)))
        assert codes == [Code.MISSING_SUBJECT_KEY_ID]

    def test_non_critical_ca_with_pathlen(self):
        codes = self.run_rules(
            (certs.aki(), certs.ski(), certs.basic_constraints(ca=True, pathlen=1, critical=None))
        )
        assert set(codes) == {Code.NOT_CRITICAL_BASIC_CONSTRAINTS, Code.PATH_LEN_IN_NON_CRITICAL_BC}

    def test_pathlen_in_leaf(self):
        codes = self.run_rules((certs.aki(), certs.basic_constraints(pathlen=0)))
        assert codes == [Code.PATH_LEN_IN_LEAF]

    def test_family_restrictions(self):
        # Agreement-only families cannot sign; signing families cannot encipher.
        assert self.run_rules((certs.aki(), certs.key_usage({0})), family="dh") == [
            Code.KEY_USAGE_VIOLATION_ON_PK_ALGORITHM
        ]
        assert self.run_rules((certs.aki(), certs.key_usage({2})), family="ec") == [
            Code.KEY_USAGE_VIOLATION_ON_PK_ALGORITHM
        ]
        assert self.run_rules((certs.aki(), certs.key_usage({0, 4})), family="ec") == []
        assert self.run_rules((certs.aki(), certs.key_usage({4})), family="dh") == []
        assert self.run_rules((certs.aki(), certs.key_usage({0, 2, 4})), family="rsa") == []

    def test_unknown_family_unrestricted(self):
        assert self.run_rules((certs.aki(), certs.key_usage({0})), family=None) == []
