#include <doctest.h>

#include "amt/network.hpp"
#include "amt/ops.hpp"
#include "amt/parallel.hpp"
#include "support/oracles.hpp"

using namespace amt;

namespace {

const ModelWeights& small_weights() {
  static const ModelWeights w = random_init_weights(ModelConfig::small(), 7);
  return w;
}

UpdateState random_state(oracle::Rng& rng, const ModelConfig& cfg, int level, int grid) {
  const int side = grid << (level - 1);
  UpdateState s;
  s.level = level;
  s.flows = FlowPair{rng.tensor(Shape{1, 2, side, side}, -2, 2),
                     rng.tensor(Shape{1, 2, side, side}, -2, 2), level};
  s.x_t = rng.tensor(Shape{1, cfg.context_width(level), side, side});
  return s;
}

void zero_update_heads(ModelWeights& w) {
  for (int level = 1; level <= 3; ++level) {
    const std::string base = "update" + std::to_string(level);
    w.zero_layer(base + ".flow_head.conv2");
    w.zero_layer(base + ".feat_head.conv2");
  }
}

}  // namespace

TEST_CASE("presets") {
  CHECK(ModelConfig::small().num_fields == 3);
  CHECK(ModelConfig::large().num_fields == 5);
  CHECK(ModelConfig::global().num_fields == 5);
  CHECK(ModelConfig::global().upsample_corr_feature);
  CHECK(ModelConfig::small().corr_channels() == 392);
  CHECK(ModelConfig::small().required_multiple() == 64);
  Variant v;
  CHECK(parse_variant("L", v));
  CHECK(v == Variant::kLarge);
  CHECK_FALSE(parse_variant("XL", v));

  ModelConfig bad = ModelConfig::small();
  bad.num_fields = 0;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = ModelConfig::small();
  bad.radius = -1;
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("parameter counting") {
  ModelWeights single;
  single.set("conv.weight", Tensor(Shape{8, 4, 3, 3}));
  single.set("conv.bias", Tensor(Shape{8, 1, 1, 1}));
  CHECK(count_parameters(single) == 296);

  const ModelConfig cfg = ModelConfig::small();
  CHECK(count_parameters(small_weights()) == count_parameters(cfg));
  CHECK(count_parameters(cfg) >= 2'700'000);
  CHECK(count_parameters(cfg) <= 3'300'000);
  const double flops = double(estimate_flops(cfg, 720, 1280));
  CHECK(flops >= 0.096e12);
  CHECK(flops <= 0.144e12);
  CHECK(estimate_flops(cfg, 720, 1280) == estimate_flops(cfg, 768, 1280));
}

TEST_CASE("weights store validation") {
  ModelWeights w = small_weights();
  CHECK_NOTHROW(w.validate());
  w.erase("update2.corr1.bias");
  CHECK_THROWS_WITH_AS(w.validate(), doctest::Contains("update2.corr1.bias"), Error);
  w = small_weights();
  w.set("extra.weight", Tensor(Shape{1, 1, 1, 1}));
  CHECK_THROWS_AS(w.validate(), Error);
  w = small_weights();
  w.set("fusion.conv1.bias", Tensor(Shape{2, 1, 1, 1}));
  CHECK_THROWS_AS(w.validate(), Error);
}

TEST_CASE("random init") {
  const ModelConfig cfg = ModelConfig::small();
  const ModelWeights a = random_init_weights(cfg, 99);
  const ModelWeights b = random_init_weights(cfg, 99);
  const ModelWeights c = random_init_weights(cfg, 100);
  bool all_same = true, any_diff = false;
  for (const auto& [name, t] : a.params()) {
    all_same = all_same && t.identical(b.get(name));
    any_diff = any_diff || !t.identical(c.get(name));
  }
  CHECK(all_same);
  CHECK(any_diff);
  for (float v : a.get("init_dec.flow_head.weight").data()) CHECK(v == 0.0f);
  for (float v : a.get("fusion.conv2.weight").data()) CHECK(v == 0.0f);
}

TEST_CASE("correlation encoder") {
  oracle::Rng rng(41);
  const Tensor img = rng.tensor(Shape{1, 3, 256, 256}, 0, 1);
  const auto [g0, g1] = correlation_encoder_forward(img, img, small_weights());
  CHECK(g0.shape() == Shape{1, 84, 32, 32});
  CHECK(g0.identical(g1));
  CHECK(g0.all_finite());
  const auto again = correlation_encoder_forward(img, img, small_weights());
  CHECK(again.first.identical(g0));
  const Tensor odd = rng.tensor(Shape{1, 3, 96, 64}, 0, 1);
  CHECK_THROWS_AS(correlation_encoder_forward(odd, odd, small_weights()), Error);
}

TEST_CASE("context encoder") {
  oracle::Rng rng(42);
  const Tensor img = rng.tensor(Shape{1, 3, 64, 128}, 0, 1);
  const ContextFeatures ctx = context_encoder_forward(img, img, 0.3f, small_weights());
  for (float v : ctx.time_plane.data()) CHECK(v == 0.3f);
  CHECK(ctx.x0[0].shape() == Shape{1, 48, 8, 16});
  CHECK(ctx.x0[1].shape() == Shape{1, 32, 16, 32});
  CHECK(ctx.x0[2].shape() == Shape{1, 20, 32, 64});
  CHECK(ctx.init.level == 1);
  CHECK(ctx.init.x_t.shape() == Shape{1, 48, 8, 16});
  for (float v : ctx.init.flows.f_t0.data()) CHECK(v == 0.0f);
  for (float v : ctx.init.flows.f_t1.data()) CHECK(v == 0.0f);
  CHECK_THROWS_AS(context_encoder_forward(img, img, 1.0f, small_weights()), Error);
}

TEST_CASE("update block") {
  oracle::Rng rng(43);
  const ModelConfig cfg = ModelConfig::small();
  const int grid = 4;
  SUBCASE("additive identity at level 1") {
    const UpdateState s = random_state(rng, cfg, 1, grid);
    const Tensor corr = rng.tensor(Shape{1, 392, grid, grid});
    const UpdateState out = update_block_forward(s, corr, 1, small_weights());
    const UpdateResiduals r = update_block_residuals(s, corr, 1, small_weights());
    CHECK(out.x_t.shape() == s.x_t.shape());
    CHECK(out.flows.f_t0.identical(add(s.flows.f_t0, slice_channels(r.delta_flow, 0, 2))));
    CHECK(out.flows.f_t1.identical(add(s.flows.f_t1, slice_channels(r.delta_flow, 2, 2))));
    CHECK(out.x_t.identical(add(s.x_t, r.delta_feat)));
  }
  SUBCASE("zeroed heads leave the state unchanged at every level") {
    ModelWeights w = small_weights();
    zero_update_heads(w);
    for (int level = 1; level <= 3; ++level) {
      const UpdateState s = random_state(rng, cfg, level, grid);
      const Tensor corr = rng.tensor(Shape{1, 392, grid, grid});
      const UpdateState out = update_block_forward(s, corr, level, w);
      CHECK(out.flows.f_t0.identical(s.flows.f_t0));
      CHECK(out.flows.f_t1.identical(s.flows.f_t1));
      CHECK(out.x_t.identical(s.x_t));
    }
  }
  SUBCASE("coarse levels keep their resolution") {
    const UpdateState s = random_state(rng, cfg, 3, grid);
    const Tensor corr = rng.tensor(Shape{1, 392, grid, grid});
    const UpdateState out = update_block_forward(s, corr, 3, small_weights());
    CHECK(out.flows.f_t0.shape() == s.flows.f_t0.shape());
    CHECK(out.x_t.shape() == s.x_t.shape());
  }
  SUBCASE("channel mismatch") {
    const UpdateState s = random_state(rng, cfg, 1, grid);
    CHECK_THROWS_AS(update_block_forward(s, rng.tensor(Shape{1, 98, grid, grid}), 1,
                                         small_weights()),
                    Error);
    CHECK_THROWS_AS(update_block_forward(s, rng.tensor(Shape{1, 392, grid, grid}), 2,
                                         small_weights()),
                    Error);
  }
}

TEST_CASE("decoders") {
  oracle::Rng rng(44);
  const ModelConfig cfg = ModelConfig::small();
  const UpdateState s = random_state(rng, cfg, 1, 4);
  const Tensor w0 = rng.tensor(Shape{1, 48, 4, 4});
  const Tensor w1 = rng.tensor(Shape{1, 48, 4, 4});
  const UpdateState next = decoder_forward(1, w0, w1, s, small_weights());
  CHECK(next.level == 2);
  CHECK(next.flows.f_t0.shape() == Shape{1, 2, 8, 8});
  CHECK(next.x_t.shape() == Shape{1, 32, 8, 8});
  CHECK(decoder_forward(1, w0, w1, s, small_weights()).x_t.identical(next.x_t));

  SUBCASE("swapping the warped inputs changes the output") {
    const UpdateState swapped = decoder_forward(1, w1, w0, s, small_weights());
    CHECK_FALSE(swapped.flows.f_t0.identical(next.flows.f_t0));
  }
  SUBCASE("zeroed final layer gives zero flows and feature") {
    ModelWeights w = small_weights();
    w.zero_layer("decoder1.conv3");
    const UpdateState z = decoder_forward(1, w0, w1, s, w);
    for (float v : z.flows.f_t0.data()) CHECK(v == 0.0f);
    for (float v : z.flows.f_t1.data()) CHECK(v == 0.0f);
    for (float v : z.x_t.data()) CHECK(v == 0.0f);
  }
  CHECK_THROWS_AS(decoder_forward(3, w0, w1, s, small_weights()), Error);
  CHECK_THROWS_AS(decoder_forward(1, rng.tensor(Shape{1, 47, 4, 4}), w1, s, small_weights()),
                  Error);
}

TEST_CASE("multi-field decode") {
  oracle::Rng rng(45);
  const ModelConfig cfg = ModelConfig::small();
  const UpdateState s = random_state(rng, cfg, 3, 2);
  const Tensor w0 = rng.tensor(Shape{1, 20, 8, 8});
  const Tensor w1 = rng.tensor(Shape{1, 20, 8, 8});
  CHECK(multi_field_raw(w0, w1, s, small_weights()).c() == 24);
  const MultiFieldOutput out = multi_field_decode(w0, w1, s, small_weights(), 3);
  REQUIRE(out.groups.size() == 3);
  for (const FieldGroup& g : out.groups) {
    CHECK(g.f_t0.shape() == Shape{1, 2, 16, 16});
    CHECK(g.residual.shape() == Shape{1, 3, 16, 16});
    for (float m : g.mask.data()) {
      CHECK(m > 0.0f);
      CHECK(m < 1.0f);
    }
  }
  CHECK_THROWS_AS(multi_field_decode(w0, w1, s, small_weights(), 2), Error);

  ModelConfig one = cfg;
  one.num_fields = 1;
  const ModelWeights w1field = random_init_weights(one, 3);
  CHECK(multi_field_raw(w0, w1, s, w1field).c() == 8);
}

TEST_CASE("blend_candidate") {
  oracle::Rng rng(46);
  const Tensor i0 = rng.tensor(Shape{1, 3, 12, 10}, 0, 1);
  const Tensor i1 = rng.tensor(Shape{1, 3, 12, 10}, 0, 1);
  FieldGroup g{rng.tensor(Shape{1, 2, 12, 10}, -3, 3), rng.tensor(Shape{1, 2, 12, 10}, -3, 3),
               rng.tensor(Shape{1, 1, 12, 10}, 0, 1), rng.tensor(Shape{1, 3, 12, 10}, -0.1, 0.1)};
  SUBCASE("random inputs match the elementwise oracle") {
    const Tensor want = oracle::blend(i0, i1, g.f_t0, g.f_t1, g.mask, g.residual);
    CHECK(oracle::max_abs_diff(blend_candidate(i0, i1, g), want) < 1e-6);
  }
  SUBCASE("saturated mask selects the first warp") {
    g.mask = Tensor(g.mask.shape(), 1.0f);
    g.residual = Tensor(g.residual.shape(), 0.0f);
    CHECK(blend_candidate(i0, i1, g).identical(backward_warp(i0, g.f_t0)));
  }
  SUBCASE("half mask with zero flows averages") {
    g.mask = Tensor(g.mask.shape(), 0.5f);
    g.residual = Tensor(g.residual.shape(), 0.0f);
    g.f_t0 = Tensor(g.f_t0.shape());
    g.f_t1 = Tensor(g.f_t1.shape());
    const Tensor out = blend_candidate(i0, i1, g);
    for (std::size_t i = 0; i < out.size(); ++i) CHECK(out[i] == doctest::Approx((i0[i] + i1[i]) / 2));
  }
  g.residual = Tensor(Shape{1, 3, 12, 9});
  CHECK_THROWS_AS(blend_candidate(i0, i1, g), Error);
}

TEST_CASE("fuse_candidates") {
  oracle::Rng rng(47);
  std::vector<Tensor> cands;
  for (int i = 0; i < 3; ++i) cands.push_back(rng.tensor(Shape{1, 3, 8, 8}, 0, 1));
  ModelWeights w = small_weights();
  SUBCASE("zeroed fusion reproduces the mean") {
    w.zero_layer("fusion.conv2");
    const Tensor out = fuse_candidates(cands, w);
    for (std::size_t i = 0; i < out.size(); ++i) CHECK(out[i] == (cands[0][i] + cands[1][i] + cands[2][i]) / 3.0f);
  }
  SUBCASE("random fusion weights are deterministic") {
    for (float& v : w.mutable_get("fusion.conv2.weight").data()) v = float(rng.uniform(-0.1, 0.1));
    const Tensor a = fuse_candidates(cands, w);
    CHECK(a.all_finite());
    CHECK(fuse_candidates(cands, w).identical(a));
  }
  SUBCASE("single field") {
    ModelConfig one = ModelConfig::small();
    one.num_fields = 1;
    const ModelWeights w1 = random_init_weights(one, 5);
    const std::vector<Tensor> single{cands[0]};
    CHECK(fuse_candidates(single, w1).identical(cands[0]));
  }
  CHECK_THROWS_AS(fuse_candidates(std::span<const Tensor>(cands).first(2), w), Error);
}

TEST_CASE("interpolate_forward") {
  oracle::Rng rng(48);
  const Tensor i0 = rng.tensor(Shape{1, 3, 64, 64}, 0, 1);
  const Tensor i1 = rng.tensor(Shape{1, 3, 64, 64}, 0, 1);
  set_num_threads(1);
  const MultiFieldOutput a = interpolate_forward(i0, i1, 0.5f, small_weights());
  CHECK(a.frame.shape() == i0.shape());
  CHECK(a.frame.all_finite());
  REQUIRE(a.corr_features.size() == 3);
  CHECK(a.corr_features[0].c() == 392);
  CHECK(a.before_update[1].flows.f_t0.h() == 16);
  CHECK(a.before_update[2].flows.f_t0.h() == 32);
  set_num_threads(4);
  const MultiFieldOutput b = interpolate_forward(i0, i1, 0.5f, small_weights());
  set_num_threads(1);
  CHECK(b.frame.identical(a.frame));
  for (std::size_t g = 0; g < a.groups.size(); ++g) {
    CHECK(b.groups[g].f_t0.identical(a.groups[g].f_t0));
    CHECK(b.groups[g].mask.identical(a.groups[g].mask));
  }
  CHECK_THROWS_AS(interpolate_forward(i0, i1, 0.0f, small_weights()), Error);
  CHECK_THROWS_AS(interpolate_forward(i0, rng.tensor(Shape{1, 3, 64, 128}), 0.5f, small_weights()),
                  Error);
}
