#include <gtest/gtest.h>

#include <random>

#include "linkdeco/encoding.hpp"
#include "linkdeco/public_suffix.hpp"
#include "oracles.hpp"

using namespace linkdeco;

TEST(Encoding, StandardVectors) {
  EXPECT_EQ(sha1_hex("abc"), "a9993e364706816aba3e25717850c26c9cd0d89d");
  EXPECT_EQ(md5_hex("abc"), "900150983cd24fb0d6963f7d28e17f72");
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(base64_encode("UID123"), "VUlEMTIz");
  EXPECT_EQ(base64_encode("a"), "YQ==");
  EXPECT_EQ(base64_encode("ab"), "YWI=");
}

TEST(Encoding, AgreesWithOneShotDigests) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 200; ++i) {
    std::string s(1 + rng() % 70, ' ');
    for (auto& c : s) c = static_cast<char>(rng() % 256);
    EXPECT_EQ(base64_encode(s), oracle::base64(s));
    EXPECT_EQ(md5_hex(s), oracle::md5_hex(s));
    EXPECT_EQ(sha1_hex(s), oracle::sha1_hex(s));
    EXPECT_EQ(sha256_hex(s), oracle::sha256_hex(s));
  }
}

TEST(Encoding, CandidatesInPriorityOrder) {
  auto c = encode_candidates("UID123");
  ASSERT_EQ(c.size(), 5u);
  EXPECT_EQ(c[0].encoding, Encoding::kPlain);
  EXPECT_EQ(c[0].text, "UID123");
  EXPECT_EQ(c[1].text, "VUlEMTIz");
  EXPECT_EQ(c[4].text.size(), 64u);
  EXPECT_THROW(encode_candidates(""), std::invalid_argument);
  for (auto e : kAllEncodings) EXPECT_EQ(parse_encoding(to_string(e)), e);
}

TEST(Encoding, FindEncodedCaseRules) {
  EXPECT_EQ(find_encoded("xxABCdef", "abcdef", true), 2u);
  EXPECT_EQ(find_encoded("xxABCdef", "abcdef", false), std::string_view::npos);
  EXPECT_EQ(find_encoded("abc", "", false), std::string_view::npos);
  EXPECT_TRUE(is_hex_digest(Encoding::kSha1));
  EXPECT_FALSE(is_hex_digest(Encoding::kBase64));
}

TEST(PublicSuffix, RegistrableDomains) {
  auto psl = PublicSuffixList::parse("// VERSION: test\ncom\nuk\nco.uk\n*.ck\n!www.ck\n");
  EXPECT_EQ(psl.version(), "test");
  EXPECT_EQ(psl.registrable_domain("a.b.example.com"), "example.com");
  EXPECT_EQ(psl.registrable_domain("shop.example.co.uk"), "example.co.uk");
  EXPECT_EQ(psl.registrable_domain("a.b.foo.ck"), "b.foo.ck");
  EXPECT_EQ(psl.registrable_domain("www.ck"), "www.ck");
  EXPECT_EQ(psl.registrable_domain("co.uk"), "co.uk");
  EXPECT_EQ(psl.registrable_domain("x.unlisted"), "x.unlisted");
  EXPECT_EQ(psl.registrable_domain("10.0.0.1"), "10.0.0.1");
  EXPECT_GT(PublicSuffixList::bundled().rule_count(), 50u);
  EXPECT_EQ(registrable_domain("www.bbc.co.uk"), "bbc.co.uk");
}
