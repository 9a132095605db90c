#include "doctest.h"

#include <limits>

#include "embinv/core.hpp"
#include "support.hpp"

using namespace embinv;
using embinv::testing::error_kind;

TEST_SUITE("core") {

TEST_CASE("parse_sequence maps bases to fixed class indices") {
  const Sequence s = parse_sequence("ACGTACGTACGTACGTACGT");
  CHECK(class_index(s[0]) == 0);
  CHECK(class_index(s[1]) == 1);
  CHECK(class_index(s[2]) == 2);
  CHECK(class_index(s[3]) == 3);
  CHECK(render_sequence(s) == "ACGTACGTACGTACGTACGT");
}

TEST_CASE("parse_sequence rejects ambiguous bases with their index") {
  try {
    parse_sequence("ACGTACGTACGTACGTACGN");
    FAIL("expected AmbiguousBase");
  } catch (const SequenceError& e) {
    CHECK(e.kind() == "AmbiguousBase");
    CHECK(e.index() == 19);
    CHECK(e.error_class() == ErrorClass::data_format);
  }
}

TEST_CASE("parse_sequence rejects wrong lengths") {
  try {
    parse_sequence("ACGT");
    FAIL("expected WrongLength");
  } catch (const SequenceError& e) {
    CHECK(e.kind() == "WrongLength");
    CHECK(e.index() == 4);
  }
  CHECK(error_kind([] { parse_sequence("ACGTACGTACGTACGTACGTA"); }) == "WrongLength");
}

TEST_CASE("lowercase input is normalized") {
  CHECK(render_sequence(parse_sequence("acgtacgtacgtacgtacgt")) == "ACGTACGTACGTACGTACGT");
}

TEST_CASE("render(parse(s)) == s over random sequences") {
  rng::SplitMix64 gen(11);
  for (int i = 0; i < 1000; ++i) {
    const auto s = embinv::testing::random_bases(gen, kWindowLength);
    REQUIRE(render_sequence(parse_sequence(s)) == s);
  }
}

TEST_CASE("PositionIndex is 1-based and bounded") {
  const auto all = all_positions();
  REQUIRE(all.size() == 20);
  CHECK(all.front().value() == 1);
  CHECK(all.back().value() == 20);
  CHECK(all.front().offset() == 0);
  CHECK(PositionIndex(7).label() == "P7");
  CHECK_THROWS_AS(PositionIndex(0), UsageError);
  CHECK_THROWS_AS(PositionIndex(21), UsageError);
}

TEST_CASE("EmbeddingMatrix validates shape and finiteness") {
  CHECK(error_kind([] { EmbeddingMatrix(2, 3, std::vector<float>(5, 0.f)); }) == "DimMismatch");
  CHECK(error_kind([] {
          EmbeddingMatrix(1, 2, {1.f, std::numeric_limits<float>::quiet_NaN()});
        }) == "NonFiniteValue");
  CHECK(error_kind([] {
          EmbeddingMatrix(1, 1, {std::numeric_limits<float>::infinity()});
        }) == "NonFiniteValue");
  const EmbeddingMatrix m(2, 2, {1.f, 2.f, 3.f, 4.f}, "t");
  CHECK(m.row(1)[0] == 3.f);
}

TEST_CASE("Dataset rejects mismatched row counts") {
  const auto windows = embinv::testing::random_windows(3, 1);
  CHECK(error_kind([&] { Dataset(windows, EmbeddingMatrix(2, 1, {0.f, 0.f})); }) ==
        "RowCountMismatch");
  CHECK_NOTHROW(Dataset(windows, EmbeddingMatrix(3, 1, {0.f, 0.f, 0.f})));
}

TEST_CASE("exit codes per error class") {
  CHECK(exit_code_for(ErrorClass::usage) == 2);
  CHECK(exit_code_for(ErrorClass::data_format) == 3);
  CHECK(exit_code_for(ErrorClass::numeric) == 4);
  CHECK(exit_code_for(ErrorClass::io) == 5);
}

}
