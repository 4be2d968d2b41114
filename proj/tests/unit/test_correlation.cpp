#include <doctest.h>

#include "amt/correlation.hpp"
#include "support/oracles.hpp"

using namespace amt;

namespace {

double max_rel_error(const CorrelationVolume& got, const oracle::Volume& want) {
  double worst = 0.0;
  for (int i = 0; i < want.rows; ++i)
    for (int j = 0; j < want.cols; ++j)
      for (int k = 0; k < want.th; ++k)
        for (int l = 0; l < want.tw; ++l) {
          const double w = want.at(i, j, k, l);
          const double e = std::fabs(got.at(i, j, k, l) - w) / std::max(1.0, std::fabs(w));
          worst = std::max(worst, e);
        }
  return worst;
}

FlowPair random_flows(oracle::Rng& rng, int h, int w, double mag) {
  return FlowPair{rng.tensor(Shape{1, 2, h, w}, -mag, mag), rng.tensor(Shape{1, 2, h, w}, -mag, mag),
                  1};
}

}  // namespace

TEST_CASE("all-pairs volume: 2x2 features") {
  // g0 cells (1,0) (0,1) / (1,1) (2,0); g1 = identity pattern.
  const Tensor g0(Shape{1, 2, 2, 2}, std::vector<float>{1, 0, 1, 2, 0, 1, 1, 0});
  const Tensor g1(Shape{1, 2, 2, 2}, std::vector<float>{1, 0, 0, 1, 0, 1, 1, 0});
  const CorrelationVolume c = build_all_pairs_volume(g0, g1);
  CHECK(c.at(0, 0, 0, 0) == 1.0f);
  CHECK(c.at(0, 0, 0, 1) == 0.0f);
  CHECK(c.at(0, 1, 0, 1) == 1.0f);
  CHECK(c.at(1, 0, 1, 1) == 1.0f);
  CHECK(c.at(1, 0, 0, 0) == 1.0f);
  CHECK(c.at(1, 1, 0, 0) == 2.0f);
}

TEST_CASE("all-pairs volume matches the quadruple loop") {
  oracle::Rng rng(21);
  for (int trial = 0; trial < 15; ++trial) {
    const int d = rng.integer(1, 32), h = rng.integer(1, 12), w = rng.integer(1, 12);
    const Tensor g0 = rng.tensor(Shape{1, d, h, w});
    const Tensor g1 = rng.tensor(Shape{1, d, h, w});
    CHECK(max_rel_error(build_all_pairs_volume(g0, g1), oracle::all_pairs(g0, g1)) < 1e-5);
  }
}

TEST_CASE("transpose is an involution and equals the swapped build") {
  oracle::Rng rng(22);
  for (int trial = 0; trial < 10; ++trial) {
    const int d = rng.integer(1, 16), h = rng.integer(1, 9), w = rng.integer(1, 9);
    const Tensor g0 = rng.tensor(Shape{1, d, h, w});
    const Tensor g1 = rng.tensor(Shape{1, d, h, w});
    const CorrelationVolume c = build_all_pairs_volume(g0, g1);
    CHECK(transpose_volume(transpose_volume(c)).identical(c));
    CHECK(transpose_volume(c).identical(build_all_pairs_volume(g1, g0)));
  }
}

TEST_CASE("correlation errors") {
  CHECK_THROWS_AS(build_all_pairs_volume(Tensor(Shape{1, 3, 2, 2}), Tensor(Shape{1, 4, 2, 2})),
                  Error);
  CHECK_THROWS_AS(build_pyramid(CorrelationVolume(2, 2, 4, 4), 0), Error);
}

TEST_CASE("pyramid levels are block means") {
  oracle::Rng rng(23);
  const Tensor g0 = rng.tensor(Shape{1, 8, 16, 16});
  const Tensor g1 = rng.tensor(Shape{1, 8, 16, 16});
  const CorrelationPyramid p = build_bidirectional_pyramid(g0, g1, 4);
  REQUIRE(p.levels() == 4);
  const oracle::Volume fwd = oracle::all_pairs(g0, g1);
  const oracle::Volume bwd = oracle::all_pairs(g1, g0);
  for (int lv = 0; lv < 4; ++lv) {
    CHECK(p.forward[lv].target_h() == 16 >> lv);
    const oracle::Volume f = oracle::block_mean(fwd, lv);
    const oracle::Volume b = oracle::block_mean(bwd, lv);
    double err = 0.0;
    for (std::size_t i = 0; i < f.v.size(); ++i) {
      err = std::max(err, std::fabs(p.forward[lv].values()[i] - f.v[i]));
      err = std::max(err, std::fabs(p.backward[lv].values()[i] - b.v[i]));
    }
    CHECK(err <= 1e-5);
  }
}

TEST_CASE("pyramid level of a constant volume stays constant") {
  CorrelationVolume c(8, 8, 8, 8);
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j)
      for (int k = 0; k < 8; ++k)
        for (int l = 0; l < 8; ++l) c.at(i, j, k, l) = 0.7f;
  const CorrelationPyramid p = build_pyramid(c, 4);
  for (float v : p.forward[3].values()) CHECK(v == 0.7f);
}

TEST_CASE("bilateral flow scaling") {
  oracle::Rng rng(24);
  const FlowPair f = random_flows(rng, 3, 4, 5.0);
  SUBCASE("t = 0.5 doubles both fields exactly") {
    const auto [f01, f10] = scale_bilateral_flows(f, 0.5f);
    for (std::size_t i = 0; i < f01.size(); ++i) {
      CHECK(f01[i] == 2.0f * f.f_t1[i]);
      CHECK(f10[i] == 2.0f * f.f_t0[i]);
    }
  }
  SUBCASE("general t") {
    const float t = 0.25f;
    const auto [f01, f10] = scale_bilateral_flows(f, t);
    for (std::size_t i = 0; i < f01.size(); ++i) {
      CHECK(f01[i] == doctest::Approx(f.f_t1[i] / 0.75).epsilon(1e-6));
      CHECK(f10[i] == doctest::Approx(f.f_t0[i] / 0.25).epsilon(1e-6));
    }
  }
  CHECK_THROWS_AS(scale_bilateral_flows(f, 0.0f), Error);
  CHECK_THROWS_AS(scale_bilateral_flows(f, 1.0f), Error);
}

TEST_CASE("lookup channel layout") {
  CHECK(LookupSpec{}.channels() == 392);
  CHECK(LookupSpec{0, 4, 0.5f}.channels() == 8);
  CHECK(LookupSpec{1, 2, 0.5f}.channels() == 36);
}

TEST_CASE("lookup with zero flow and r = 0 reads the diagonal") {
  oracle::Rng rng(25);
  const Tensor g0 = rng.tensor(Shape{1, 4, 4, 4});
  const Tensor g1 = rng.tensor(Shape{1, 4, 4, 4});
  const CorrelationPyramid p = build_bidirectional_pyramid(g0, g1, 1);
  const FlowPair zero{Tensor(Shape{1, 2, 4, 4}), Tensor(Shape{1, 2, 4, 4}), 1};
  const Tensor out = lookup_correlation(p, zero, LookupSpec{0, 1, 0.5f});
  REQUIRE(out.c() == 2);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      CHECK(out.at(0, 0, i, j) == p.forward[0].at(i, j, i, j));
      CHECK(out.at(0, 1, i, j) == p.backward[0].at(i, j, i, j));
    }
}

TEST_CASE("lookup with integer flows gathers exactly") {
  oracle::Rng rng(26);
  const int h = 6, w = 7;
  const Tensor g0 = rng.tensor(Shape{1, 5, h, w});
  const Tensor g1 = rng.tensor(Shape{1, 5, h, w});
  const CorrelationPyramid p = build_bidirectional_pyramid(g0, g1, 1);
  FlowPair f{Tensor(Shape{1, 2, h, w}), Tensor(Shape{1, 2, h, w}), 1};
  // t = 0.5 doubles the flows, so half-integers land on integer targets.
  for (float& v : f.f_t0.data()) v = 0.5f * rng.integer(-3, 3);
  for (float& v : f.f_t1.data()) v = 0.5f * rng.integer(-3, 3);
  const Tensor out = lookup_correlation(p, f, LookupSpec{0, 1, 0.5f});
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < w; ++j) {
      const int fx = j + int(2 * f.f_t1.at(0, 0, i, j)), fy = i + int(2 * f.f_t1.at(0, 1, i, j));
      const int bx = j + int(2 * f.f_t0.at(0, 0, i, j)), by = i + int(2 * f.f_t0.at(0, 1, i, j));
      const bool fin = fx >= 0 && fx < w && fy >= 0 && fy < h;
      const bool bin = bx >= 0 && bx < w && by >= 0 && by < h;
      CHECK(out.at(0, 0, i, j) == (fin ? p.forward[0].at(i, j, fy, fx) : 0.0f));
      CHECK(out.at(0, 1, i, j) == (bin ? p.backward[0].at(i, j, by, bx) : 0.0f));
    }
}

TEST_CASE("lookup matches the scalar oracle on random flows") {
  oracle::Rng rng(27);
  for (int trial = 0; trial < 4; ++trial) {
    const int h = 8, w = 8, levels = rng.integer(1, 4), radius = rng.integer(0, 3);
    const float t = float(rng.uniform(0.2, 0.8));
    const Tensor g0 = rng.tensor(Shape{1, 6, h, w}, 0, 1);
    const Tensor g1 = rng.tensor(Shape{1, 6, h, w}, 0, 1);
    const FlowPair f = random_flows(rng, h, w, 3.0);
    const Tensor got = lookup_correlation(build_bidirectional_pyramid(g0, g1, levels), f,
                                          LookupSpec{radius, levels, t});
    const Tensor want = oracle::lookup(g0, g1, f.f_t0, f.f_t1, t, radius, levels);
    REQUIRE(got.shape() == want.shape());
    CHECK(oracle::max_abs_diff(got, want) < 1e-5);
  }
}

TEST_CASE("lookup far outside reads zero") {
  oracle::Rng rng(28);
  const Tensor g = rng.tensor(Shape{1, 3, 4, 4});
  const CorrelationPyramid p = build_bidirectional_pyramid(g, g, 2);
  FlowPair f{Tensor(Shape{1, 2, 4, 4}, 100.0f), Tensor(Shape{1, 2, 4, 4}, 100.0f), 1};
  const Tensor out = lookup_correlation(p, f, LookupSpec{1, 2, 0.5f});
  for (float v : out.data()) CHECK(v == 0.0f);
}
