#include <cmath>
#include <sstream>

#include "doctest.h"
#include "pufmc/batch.hpp"
#include "pufmc/errors.hpp"

using namespace pufmc;

namespace {

std::vector<Challenge> all_challenges(std::size_t k) {
  std::vector<Challenge> out;
  for (std::size_t idx = 0; idx < (1U << k); ++idx) {
    std::vector<std::int8_t> bits(k);
    for (std::size_t i = 0; i < k; ++i) bits[i] = (idx >> i) & 1U ? -1 : 1;
    out.emplace_back(bits);
  }
  return out;
}

void check_equivalence(const PufBatch& batch, const std::vector<Challenge>& cs) {
  const auto r = batch_eval(batch, cs);
  REQUIRE(r.rows() == batch.instance_count());
  REQUIRE(r.cols() == cs.size());
  for (std::size_t i = 0; i < batch.instance_count(); ++i) {
    const auto inst = batch.instance(i);
    for (std::size_t j = 0; j < cs.size(); ++j) REQUIRE(r.at(i, j) == eval_instance(inst, cs[j]));
  }
}

std::vector<ArchSpec> archs_for(std::size_t k) {
  std::vector<ArchSpec> a{ArchSpec::apuf(k), ArchSpec::xor_puf(k, 1), ArchSpec::xor_puf(k, 3),
                          ArchSpec::ff_xor(k, 1), ArchSpec::ff_xor(k, 2)};
  if (k >= 2) a.push_back(ArchSpec::ff_xor(k, 2, 1, k));
  if (k >= 3) a.push_back(ArchSpec::ct(k));
  return a;
}

}  // namespace

TEST_SUITE("batch") {
  TEST_CASE("degenerate 1 x 1 batch") {
    const PufBatch b(ArchSpec::apuf(5), 1, 3);
    const std::vector<Challenge> c{Challenge({1, -1, 1, 1, -1})};
    const auto r = batch_eval(b, c);
    CHECK(r.rows() == 1);
    CHECK(r.cols() == 1);
    CHECK(r.at(0, 0) == eval_instance(b.instance(0), c[0]));
  }

  TEST_CASE("batch equals scalar loop exhaustively for k <= 6") {
    for (std::size_t k = 1; k <= 6; ++k) {
      const auto cs = all_challenges(k);
      for (const auto& arch : archs_for(k)) {
        CAPTURE(arch.to_text());
        CAPTURE(k);
        check_equivalence(PufBatch(arch, 150, 1000 + k), cs);
      }
    }
  }

  TEST_CASE("batch equals scalar loop on random challenges, k = 64") {
    const auto cs = sample_challenges(64, 70, 5, true);
    for (const auto& arch : archs_for(64)) {
      CAPTURE(arch.to_text());
      check_equivalence(PufBatch(arch, 100, 21), cs);
    }
  }

  TEST_CASE("100 arbiter instances x 50 challenges") {
    check_equivalence(PufBatch(ArchSpec::apuf(32), 100, 8), sample_challenges(32, 50, 9, true));
  }

  TEST_CASE("results do not depend on chunk size or thread count") {
    const PufBatch b(ArchSpec::ff_xor(64, 2), 1000, 4);
    const auto cs = sample_challenges(64, 130, 6, true);
    BatchEvalOptions a{64, 1};
    BatchEvalOptions c{4096, 3};
    BatchEvalOptions d{200, 2};
    const auto ra = batch_eval(b, cs, a);
    CHECK(ra == batch_eval(b, cs, c));
    CHECK(ra == batch_eval(b, cs, d));
  }

  TEST_CASE("explicit batch evaluates like its generated source") {
    const PufBatch gen(ArchSpec::ct(30), 300, 12);
    const auto mat = gen.materialize();
    CHECK(mat.materialized());
    const auto cs = sample_challenges(30, 40, 1, true);
    CHECK(batch_eval(gen, cs) == batch_eval(mat, cs));
  }

  TEST_CASE("sampling is deterministic and seed dependent") {
    const PufBatch a(ArchSpec::xor_puf(16, 2), 50, 77);
    const PufBatch b(ArchSpec::xor_puf(16, 2), 50, 77);
    const PufBatch c(ArchSpec::xor_puf(16, 2), 50, 78);
    CHECK(a.parameters() == b.parameters());
    CHECK(a.parameters() != c.parameters());
  }

  TEST_CASE("sampled parameters are standard normal, k = 64") {
    const std::size_t n = 100000;
    const auto p = PufBatch(ArchSpec::apuf(64), n, 2024).parameters();
    for (std::size_t stage = 0; stage < 64; ++stage) {
      double s1 = 0, s2 = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const double v = p[i * 64 + stage];
        s1 += v;
        s2 += v * v;
      }
      const double mean = s1 / n;
      const double var = s2 / n - mean * mean;
      CHECK(std::abs(mean) < 0.02);
      CHECK(std::abs(var - 1.0) < 0.02);
    }
  }

  TEST_CASE("dimension and shape errors") {
    const PufBatch b(ArchSpec::apuf(8), 10, 1);
    const std::vector<Challenge> wrong{Challenge({1, 1, 1})};
    CHECK_THROWS_AS(batch_eval(b, wrong), DimensionError);
    CHECK_THROWS_AS(PufBatch(ArchSpec::apuf(8), 0, 1), ConfigError);
    CHECK_THROWS_AS(PufBatch::from_parameters(ArchSpec::apuf(8), 2, std::vector<double>(15)), DimensionError);
    CHECK_THROWS_AS(ArchSpec::parse("xor:0", 8).validate(), ConfigError);
    CHECK_THROWS_AS(ArchSpec::parse("ffxor:1:5:3", 8), ConfigError);
    CHECK_THROWS_AS(ArchSpec::parse("ipuf", 8), ConfigError);
  }

  TEST_CASE("architecture parsing and defaults") {
    const auto ff = ArchSpec::parse("ff", 64);
    CHECK(ff.tag == ArchTag::FfXor);
    CHECK(ff.chains == 1);
    CHECK(ff.f1 == 21);
    CHECK(ff.f2 == 42);
    CHECK(ArchSpec::parse(ff.to_text(), 64) == ff);
    CHECK(ArchSpec::parse("xor:4", 32).params_per_instance() == 128);
    CHECK(ArchSpec::ct(64).params_per_instance() == 64 + 32 + 4 * 21);
    CHECK(ff.with_stages(96).f2 == 64);
  }

  TEST_CASE("archive round trip") {
    const PufBatch b(ArchSpec::ff_xor(12, 2, 3, 9), 17, 5);
    std::stringstream ss;
    write_archive(ss, b);
    CHECK(ss.str().size() == 32 + 17 * 24 * 8);
    CHECK(ss.str().substr(0, 4) == "PUFB");
    const PufBatch r = read_archive(ss);
    CHECK(r.arch() == b.arch());
    CHECK(r.instance_count() == 17);
    CHECK(r.parameters() == b.parameters());

    std::stringstream bad("XXXX" + std::string(28, '\0'));
    CHECK_THROWS_AS(read_archive(bad), ConfigError);
    std::stringstream shortfile(ss.str().substr(0, 40));
    CHECK_THROWS_AS(read_archive(shortfile), ConfigError);
  }
}
