#include <gtest/gtest.h>

#include <filesystem>

#include "fastecpp/trialdiv.hpp"
#include "oracles.hpp"

using namespace fastecpp;
using trialdiv::PrimeProduct;

TEST(PrimeProduct, Examples) {
  EXPECT_EQ(trialdiv::prime_product(2, 10).value, 105);
  EXPECT_EQ(trialdiv::prime_product(1, 10).value, 210);
  EXPECT_EQ(trialdiv::prime_product(10, 11).value, 11);
  const auto e = trialdiv::prime_product(24, 28);
  EXPECT_TRUE(e.empty);
  EXPECT_EQ(e.value, 1);
  EXPECT_THROW(trialdiv::prime_product(5, 4), std::invalid_argument);
}

TEST(PrimeProduct, SquarefreeAndInRange) {
  const auto p = trialdiv::prime_product(1000, 3000);
  Int rest = p.value;
  std::size_t count = 0;
  for (std::uint64_t q = 2; q <= 4000; ++q) {
    if (!oracle::is_prime(q)) continue;
    const bool in = q > 1000 && q <= 3000;
    EXPECT_EQ(mpz_divisible_ui_p(rest.get_mpz_t(), q) != 0, in) << q;
    if (in) {
      mpz_divexact_ui(rest.get_mpz_t(), rest.get_mpz_t(), q);
      EXPECT_FALSE(mpz_divisible_ui_p(rest.get_mpz_t(), q));
      ++count;
    }
  }
  EXPECT_EQ(rest, 1);
  EXPECT_EQ(count, p.prime_count);
}

TEST(PrimeProduct, LogSizeTracksRangeWidth) {
  // log P over (0, B] is B (1 + o(1)).
  const auto p = trialdiv::prime_product(0, 1u << 20);
  const double ratio = static_cast<double>(p.nbits) * std::log(2.0) / static_cast<double>(1u << 20);
  EXPECT_GT(ratio, 0.99);
  EXPECT_LT(ratio, 1.01);
}

TEST(PrimeProduct, CacheRoundTrip) {
  const auto dir = std::filesystem::path(FASTECPP_TMP_DIR) / "product-cache";
  std::filesystem::remove_all(dir);
  WorkerPool pool(2);
  const auto a = trialdiv::cached_prime_products(1000, 3, pool, dir);
  const auto b = trialdiv::cached_prime_products(1000, 3, pool, dir);
  ASSERT_EQ(a.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(a[i].value, b[i].value);
    EXPECT_EQ(a[i].lo, i * 1000);
    EXPECT_EQ(a[i].hi, (i + 1) * 1000);
    EXPECT_EQ(a[i].value, trialdiv::prime_product(i * 1000, (i + 1) * 1000).value);
  }
  EXPECT_TRUE(std::filesystem::exists(dir / "primes-1000-2000.bin"));
}

TEST(RemainderTree, Examples) {
  EXPECT_EQ(trialdiv::remainder_tree(105, {8, 11}), (std::vector<Int>{1, 6}));
  EXPECT_EQ(trialdiv::remainder_tree(1, {2, 7, 1000}), (std::vector<Int>{1, 1, 1}));
  EXPECT_EQ(trialdiv::remainder_tree(100, {7}), (std::vector<Int>{2}));
  EXPECT_THROW(trialdiv::remainder_tree(100, {7, 1}), std::invalid_argument);
}

TEST(RemainderTree, MatchesDirectReductionForAnyBatchSplit) {
  const Int p = trialdiv::prime_product(0, 200000).value;
  IntRng rng(9);
  std::vector<Int> ms;
  for (int i = 0; i < 300; ++i) ms.push_back(rng.bits(64 + static_cast<unsigned long>(i % 200)) + 2);
  const auto got = trialdiv::remainder_tree(p, ms);
  for (std::size_t i = 0; i < ms.size(); ++i) ASSERT_EQ(got[i], mod(p, ms[i]));
  for (std::size_t budget : {1ul, 500ul, 5000ul, 100000ul, 1ul << 30}) {
    std::vector<Int> out(ms.size());
    const auto plan = trialdiv::plan_batches(ms, budget);
    std::size_t covered = 0;
    for (auto [a, b] : plan) {
      ASSERT_EQ(a, covered);
      ASSERT_LT(a, b);
      covered = b;
      trialdiv::detail::remainder_tree_batch(p, ms, a, b, out);
    }
    ASSERT_EQ(covered, ms.size());
    EXPECT_EQ(out, got) << budget;
  }
}

TEST(SmoothSplit, Examples) {
  const auto a = trialdiv::smooth_split(84, mod(Int(30), Int(84)));
  EXPECT_EQ(a.c, 12);
  EXPECT_EQ(a.rough, 7);
  const auto b = trialdiv::smooth_split(1024, 2);
  EXPECT_EQ(b.c, 1024);
  EXPECT_EQ(b.rough, 1);
  const auto c = trialdiv::smooth_split(101, 30);
  EXPECT_EQ(c.c, 1);
  EXPECT_EQ(c.rough, 101);
  EXPECT_THROW(trialdiv::smooth_split(1, 0), std::invalid_argument);
}

std::vector<PrimeProduct> ranges_for(std::uint64_t bound, unsigned count) {
  std::vector<PrimeProduct> out;
  for (unsigned i = 0; i < count; ++i) out.push_back(trialdiv::prime_product(bound * i / count, bound * (i + 1) / count));
  return out;
}

TEST(BatchFactor, Examples) {
  WorkerPool pool(2);
  const std::vector<PrimeProduct> pr{trialdiv::prime_product(1, 4), trialdiv::prime_product(4, 6)};
  const auto r = trialdiv::batch_factor({84}, pr, 16, pool);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].c, 12);
  EXPECT_EQ(r[0].rough, 7);
  EXPECT_TRUE(trialdiv::batch_factor({}, pr, 16, pool).empty());
  const auto many = trialdiv::batch_factor({84, 85, 86}, pr, 100, pool);
  EXPECT_EQ(many[1].c, 5);
  EXPECT_EQ(many[2].c, 2);
  // Ranges must be contiguous from the bottom.
  EXPECT_THROW(trialdiv::batch_factor({84}, {trialdiv::prime_product(4, 6)}, 4, pool), std::invalid_argument);
  EXPECT_THROW(trialdiv::batch_factor({84}, {pr[0], trialdiv::prime_product(5, 9)}, 4, pool), std::invalid_argument);
}

TEST(BatchFactor, AgreesWithNaiveTrialDivision) {
  IntRng rng(2024);
  WorkerPool pool(4);
  for (std::uint64_t bound : {1000ul, 100000ul}) {
    std::vector<Int> ms;
    for (int i = 0; i < 1000; ++i) {
      Int m = rng.bits(256);
      // Plant smooth factors so that the ladder has work to do.
      if (i % 3 == 0) m *= pow_ui(Int(2), static_cast<unsigned long>(i % 40)) * pow_ui(Int(997), static_cast<unsigned long>(i % 5));
      if (m < 2) m = 2;
      ms.push_back(m);
    }
    const auto primes = oracle::primes_upto(bound);
    std::vector<std::pair<Int, Int>> want;
    for (const auto& m : ms) want.push_back(oracle::smooth_part(m, primes));
    for (unsigned parts : {1u, 3u}) {
      for (unsigned batches : {1u, 16u}) {
        const auto got = trialdiv::batch_factor(ms, ranges_for(bound, parts), batches, pool);
        for (std::size_t i = 0; i < ms.size(); ++i) {
          const auto& [c, rough] = want[i];
          ASSERT_EQ(got[i].m, ms[i]);
          ASSERT_EQ(got[i].c, c) << i;
          ASSERT_EQ(got[i].rough, rough) << i;
        }
      }
    }
  }
}

TEST(BatchFactor, IndependentOfWorkerCount) {
  IntRng rng(77);
  std::vector<Int> ms;
  for (int i = 0; i < 500; ++i) ms.push_back(rng.bits(300) + 2);
  const auto products = ranges_for(50000, 4);
  WorkerPool one(1), eight(8);
  const auto a = trialdiv::batch_factor(ms, products, 16, one);
  const auto b = trialdiv::batch_factor(ms, products, 16, eight);
  const auto c = trialdiv::batch_factor(ms, products, 3, eight);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a, c);
}
