#include <doctest.h>

#include "amt/warping.hpp"
#include "support/oracles.hpp"

using namespace amt;

namespace {

Tensor constant_flow(int h, int w, float fx, float fy) {
  Tensor f(Shape{1, 2, h, w});
  for (float& v : f.plane(0, 0)) v = fx;
  for (float& v : f.plane(0, 1)) v = fy;
  return f;
}

}  // namespace

TEST_CASE("bilinear_sample at nodes and midpoints") {
  const Tensor src(Shape{1, 1, 2, 3}, std::vector<float>{1, 3, 5, 7, 9, 11});
  const Tensor cx(Shape{1, 1, 1, 4}, std::vector<float>{0, 2, 0.5f, 1});
  const Tensor cy(Shape{1, 1, 1, 4}, std::vector<float>{0, 1, 0, 0.5f});
  const Tensor out = bilinear_sample(src, cx, cy);
  CHECK(out[0] == 1.0f);
  CHECK(out[1] == 11.0f);
  CHECK(out[2] == 2.0f);
  CHECK(out[3] == 6.0f);
}

TEST_CASE("bilinear_sample outside and partially outside") {
  const Tensor src(Shape{1, 1, 2, 2}, 4.0f);
  const Tensor cx(Shape{1, 1, 1, 4}, std::vector<float>{-1, -0.5f, 2.5f, -3});
  const Tensor cy(Shape{1, 1, 1, 4}, std::vector<float>{0, 0, 0, 0});
  const Tensor out = bilinear_sample(src, cx, cy);
  CHECK(out[0] == 0.0f);
  CHECK(out[1] == 2.0f);
  CHECK(out[2] == 0.0f);
  CHECK(out[3] == 0.0f);
}

TEST_CASE("bilinear_sample matches the scalar oracle") {
  oracle::Rng rng(31);
  const Tensor src = rng.tensor(Shape{1, 3, 9, 11});
  const Tensor cx = rng.tensor(Shape{1, 1, 6, 7}, -2, 12);
  const Tensor cy = rng.tensor(Shape{1, 1, 6, 7}, -2, 10);
  const Tensor out = bilinear_sample(src, cx, cy);
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < 6; ++y)
      for (int x = 0; x < 7; ++x)
        CHECK(std::fabs(out.at(0, c, y, x) -
                        oracle::sample(src, 0, c, cx.at(0, 0, y, x), cy.at(0, 0, y, x))) < 1e-6);
}

TEST_CASE("backward_warp") {
  oracle::Rng rng(32);
  const Tensor src = rng.tensor(Shape{1, 3, 8, 10});
  SUBCASE("zero flow is the identity") {
    CHECK(backward_warp(src, Tensor(Shape{1, 2, 8, 10})).identical(src));
  }
  SUBCASE("integer flows shift indices") {
    for (int trial = 0; trial < 5; ++trial) {
      const int dx = rng.integer(-3, 3), dy = rng.integer(-3, 3);
      const Tensor out = backward_warp(src, constant_flow(8, 10, float(dx), float(dy)));
      for (int c = 0; c < 3; ++c)
        for (int y = 0; y < 8; ++y)
          for (int x = 0; x < 10; ++x) {
            const int sx = x + dx, sy = y + dy;
            const bool inside = sx >= 0 && sx < 10 && sy >= 0 && sy < 8;
            CHECK(out.at(0, c, y, x) == (inside ? src.at(0, c, sy, sx) : 0.0f));
          }
    }
  }
  SUBCASE("half-pixel flow averages horizontal neighbours") {
    const Tensor out = backward_warp(src, constant_flow(8, 10, 0.5f, 0.0f));
    for (int y = 0; y < 8; ++y)
      for (int x = 0; x < 9; ++x)
        CHECK(out.at(0, 1, y, x) ==
              doctest::Approx((src.at(0, 1, y, x) + src.at(0, 1, y, x + 1)) / 2).epsilon(1e-6));
  }
  SUBCASE("random flows match the oracle") {
    const Tensor flow = rng.tensor(Shape{1, 2, 8, 10}, -4, 4);
    CHECK(oracle::max_abs_diff(backward_warp(src, flow), oracle::warp(src, flow)) < 1e-6);
  }
  SUBCASE("linearity in the source") {
    const Tensor b = rng.tensor(Shape{1, 3, 8, 10});
    const Tensor flow = rng.tensor(Shape{1, 2, 8, 10}, -4, 4);
    const float alpha = 0.7f, beta = -1.3f;
    Tensor mix(src.shape());
    for (std::size_t i = 0; i < mix.size(); ++i) mix[i] = alpha * src[i] + beta * b[i];
    const Tensor lhs = backward_warp(mix, flow);
    const Tensor wa = backward_warp(src, flow);
    const Tensor wb = backward_warp(b, flow);
    for (std::size_t i = 0; i < lhs.size(); ++i)
      CHECK(std::fabs(lhs[i] - (alpha * wa[i] + beta * wb[i])) < 1e-5);
  }
  CHECK_THROWS_AS(backward_warp(src, Tensor(Shape{1, 2, 8, 9})), Error);
  CHECK_THROWS_AS(backward_warp(src, Tensor(Shape{1, 3, 8, 10})), Error);
}

TEST_CASE("upsample_flow_2x") {
  oracle::Rng rng(33);
  SUBCASE("zero stays zero") {
    const Tensor up = upsample_flow_2x(Tensor(Shape{1, 2, 3, 4}));
    CHECK(up.shape() == Shape{1, 2, 6, 8});
    for (float v : up.data()) CHECK(v == 0.0f);
  }
  SUBCASE("constants double exactly") {
    const Tensor up = upsample_flow_2x(constant_flow(3, 5, 3.0f, -1.0f));
    for (float v : up.plane(0, 0)) CHECK(v == 6.0f);
    for (float v : up.plane(0, 1)) CHECK(v == -2.0f);
  }
  SUBCASE("random flow equals resize oracle times two") {
    const Tensor f = rng.tensor(Shape{1, 2, 5, 6}, -3, 3);
    const Tensor want = oracle::resize(f, 10, 12);
    const Tensor got = upsample_flow_2x(f);
    for (std::size_t i = 0; i < got.size(); ++i) CHECK(std::fabs(got[i] - 2.0f * want[i]) < 1e-5);
  }
}

TEST_CASE("resize_flow scales values") {
  const Tensor down = resize_flow(constant_flow(8, 8, 4.0f, 2.0f), 2, 2, 0.25f);
  CHECK(down.shape() == Shape{1, 2, 2, 2});
  for (float v : down.plane(0, 0)) CHECK(v == 1.0f);
  for (float v : down.plane(0, 1)) CHECK(v == 0.5f);
}

TEST_CASE("FlowPair validation") {
  CHECK_NOTHROW(validate(FlowPair{Tensor(Shape{1, 2, 3, 3}), Tensor(Shape{1, 2, 3, 3}), 1}));
  CHECK_THROWS_AS(validate(FlowPair{Tensor(Shape{1, 2, 3, 3}), Tensor(Shape{1, 2, 3, 4}), 1}),
                  Error);
  Tensor bad(Shape{1, 2, 3, 3});
  bad[0] = INFINITY;
  CHECK_THROWS_AS(validate(FlowPair{bad, Tensor(Shape{1, 2, 3, 3}), 1}), Error);
}
